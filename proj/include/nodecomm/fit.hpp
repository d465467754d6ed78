// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nodecomm/params.hpp"
#include "nodecomm/samples.hpp"
#include "nodecomm/topology.hpp"

namespace nodecomm
{

enum class Weighting
{
  Ordinary,  // unweighted residuals
  Relative   // residuals divided by the measurement
};

struct PostalParams
{
  double alpha = 0.0;
  double rb = 0.0;
};

/// A fitted non-negative parameter and the warning issued if it was clamped.
struct ClampedFit
{
  double value = 0.0;
  std::optional<std::string> warning;
};

/// Least squares of seconds = alpha + size / rb over single-message (n = 1,
/// ppn = 1) samples of one cell. A negative intercept is refitted with
/// alpha = 0. Needs >= 3 samples and two distinct sizes.
PostalParams fit_postal(std::span<const TimingSample> samples,
                        Weighting weighting = Weighting::Ordinary);

/// Injection bandwidth from off-node rendezvous samples taken with several
/// processes per node: seconds = n (alpha + ppn size / rn) for every sample
/// whose ppn * rb exceeds rn. The split between postal and injection samples
/// is re-derived from each estimate until it stops changing (10 rounds at most).
double fit_injection(std::span<const TimingSample> samples, double alpha, double rb,
                     Weighting weighting = Weighting::Ordinary);

/// Per-entry queue search cost from the residual left after transport. The
/// residual is regressed on n and n^2 together; a reversed search visits
/// n (n + 1) / 2 entries, so gamma is twice the n^2 coefficient. Samples whose
/// receives match in order have no n^2 term and give gamma = 0.
ClampedFit fit_gamma(std::span<const TimingSample> samples, const MachineModel &model,
                     Weighting weighting = Weighting::Ordinary);

/// Per-byte link penalty: residual after transport and queue search,
/// regressed on each sample's contended link bytes.
ClampedFit fit_delta(std::span<const TimingSample> samples, const MachineModel &model,
                     const CubeTopology &topo, Weighting weighting = Weighting::Ordinary);

/// n messages at the sample's ppn through the cell its size and locality select.
double sample_transport(const TimingSample &sample, const MachineModel &model);
/// gamma * entries examined for the sample's ordering.
double sample_queue(const TimingSample &sample, const MachineModel &model);
/// Off-node samples: link_bytes(average_hops(topo), n * size, ppn), i.e. every
/// rank on the cube sends its n messages off node. Zero otherwise.
double sample_link_bytes(const TimingSample &sample, const CubeTopology &topo);

struct FitOptions
{
  Weighting weighting = Weighting::Ordinary;
  std::size_t max_rounds = 500;
};

struct FitResult
{
  MachineModel model;
  std::array<std::size_t, 9> samples_per_cell{};
  std::array<bool, 9> cell_fitted{};
  std::array<double, 9> residual_rms{};  // over the cell's postal samples; 0 if unfitted
  bool rn_fitted = false;
  bool gamma_fitted = false;
  bool delta_fitted = false;
  std::size_t rounds = 0;
  std::vector<std::string> warnings;
};

/// Fits every parameter the samples can identify, starting from `base` and
/// keeping its values for the rest. Stages:
///   cells    samples free of contention whose ppn leaves injection
///            unconstrained, each normalized to one message
///   rn       contention-free off-node rendezvous samples with ppn > 1
///   gamma    reversed-order samples
///   delta    samples with contended link bytes
/// Each stage sees the measurements minus the other stages' current terms;
/// the stages repeat until no parameter changes.
FitResult fit_model(std::span<const TimingSample> samples, const MachineModel &base,
                    const CubeTopology &topo, const FitOptions &options = {});

}  // namespace nodecomm
