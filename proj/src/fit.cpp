// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "nodecomm/fit.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "nodecomm/cost.hpp"
#include "nodecomm/error.hpp"
#include "nodecomm/least_squares.hpp"
#include "nodecomm/schedule.hpp"

namespace nodecomm
{

namespace
{

std::vector<double> weights_for(std::span<const double> y, Weighting weighting)
{
  if (weighting == Weighting::Ordinary)
  {
    return {};
  }
  std::vector<double> w(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
  {
    w[i] = y[i] != 0.0 ? 1.0 / (y[i] * y[i]) : 0.0;
  }
  return w;
}

double fit_through_origin(const std::vector<double> &x, const std::vector<double> &y,
                          const std::vector<double> &measured, Weighting weighting)
{
  return least_squares(x, 1, y, weights_for(measured, weighting))[0];
}

}  // namespace

double sample_transport(const TimingSample &sample, const MachineModel &model)
{
  const auto protocol = classify_protocol(sample.size, model.thresholds());
  return static_cast<double>(sample.n) *
         max_rate_cost(sample.size, sample.ppn, model.cell(protocol, sample.locality));
}

double sample_queue(const TimingSample &sample, const MachineModel &model)
{
  return model.gamma() * static_cast<double>(ordering_steps(sample.n, sample.ordering));
}

double sample_link_bytes(const TimingSample &sample, const CubeTopology &topo)
{
  if (sample.locality != Locality::InterNode)
  {
    return 0.0;
  }
  const double per_process = static_cast<double>(sample.n) * static_cast<double>(sample.size);
  return link_bytes(average_hops(topo), per_process, sample.ppn);
}

PostalParams fit_postal(std::span<const TimingSample> samples, Weighting weighting)
{
  if (samples.size() < 3)
  {
    throw FitError("insufficient samples: postal fit needs at least 3, got " +
                   std::to_string(samples.size()));
  }
  std::set<Bytes> sizes;
  std::vector<double> design;
  std::vector<double> y;
  for (const auto &s : samples)
  {
    if (s.n != 1 || s.ppn != 1)
    {
      throw FitError("postal fit expects single-message samples with ppn = 1");
    }
    sizes.insert(s.size);
    design.push_back(1.0);
    design.push_back(static_cast<double>(s.size));
    y.push_back(s.seconds);
  }
  if (sizes.size() < 2)
  {
    throw FitError("rank deficient: every sample has the same size");
  }
  const auto w = weights_for(y, weighting);
  auto coef = least_squares(design, 2, y, w);
  double alpha = coef[0];
  double beta = coef[1];
  if (alpha < 0.0)
  {
    std::vector<double> slope_only;
    for (const auto &s : samples)
    {
      slope_only.push_back(static_cast<double>(s.size));
    }
    alpha = 0.0;
    beta = least_squares(slope_only, 1, y, w)[0];
  }
  if (!(beta > 0.0))
  {
    throw FitError("per-byte cost is not positive; cannot derive a bandwidth");
  }
  return PostalParams{alpha, 1.0 / beta};
}

double fit_injection(std::span<const TimingSample> samples, double alpha, double rb,
                     Weighting weighting)
{
  constexpr int kMaxRounds = 10;
  for (const auto &s : samples)
  {
    if (s.locality != Locality::InterNode)
    {
      throw FitError("injection fit expects off-node samples only");
    }
  }
  std::vector<bool> in_regime(samples.size());
  bool any = false;
  for (std::size_t i = 0; i < samples.size(); ++i)
  {
    in_regime[i] = samples[i].ppn >= 4;
    any = any || in_regime[i];
  }
  if (!any)
  {
    throw FitError("no samples with 4 or more processes per node; injection is not limiting");
  }
  for (int round = 0; round < kMaxRounds; ++round)
  {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> measured;
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
      if (!in_regime[i])
      {
        continue;
      }
      const auto &s = samples[i];
      const double n = static_cast<double>(s.n);
      x.push_back(n * static_cast<double>(s.ppn) * static_cast<double>(s.size));
      y.push_back(s.seconds - n * alpha);
      measured.push_back(s.seconds);
    }
    if (x.empty())
    {
      throw FitError("no sample is limited by injection bandwidth");
    }
    const double inverse = fit_through_origin(x, y, measured, weighting);
    if (!(inverse > 0.0))
    {
      throw FitError("injection term is not positive; cannot derive a bandwidth");
    }
    const double rn = 1.0 / inverse;
    std::vector<bool> next(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
      next[i] = static_cast<double>(samples[i].ppn) * rb > rn;
    }
    if (next == in_regime)
    {
      return rn;
    }
    in_regime = std::move(next);
  }
  throw FitError("injection regime split did not settle within 10 rounds");
}

ClampedFit fit_gamma(std::span<const TimingSample> samples, const MachineModel &model,
                     Weighting weighting)
{
  std::vector<double> design;
  std::vector<double> residual;
  std::vector<double> measured;
  bool any_positive = false;
  for (const auto &s : samples)
  {
    const double n = static_cast<double>(s.n);
    design.push_back(n);
    design.push_back(n * n);
    residual.push_back(s.seconds - sample_transport(s, model));
    measured.push_back(s.seconds);
    any_positive = any_positive || residual.back() > 0.0;
  }
  // Collinear n, n^2 (one distinct n) is reported before the sign check.
  const auto coef = least_squares(design, 2, residual, weights_for(measured, weighting));
  if (!any_positive)
  {
    return ClampedFit{0.0, "queue residuals are all <= 0; gamma set to 0"};
  }
  const double gamma = 2.0 * coef[1];
  if (gamma < 0.0)
  {
    return ClampedFit{0.0, "fitted gamma was negative; clamped to 0"};
  }
  return ClampedFit{gamma, std::nullopt};
}

ClampedFit fit_delta(std::span<const TimingSample> samples, const MachineModel &model,
                     const CubeTopology &topo, Weighting weighting)
{
  std::vector<double> x;
  std::vector<double> residual;
  std::vector<double> measured;
  bool contended = false;
  for (const auto &s : samples)
  {
    x.push_back(sample_link_bytes(s, topo));
    contended = contended || x.back() > 0.0;
    residual.push_back(s.seconds - sample_transport(s, model) - sample_queue(s, model));
    measured.push_back(s.seconds);
  }
  if (!contended)
  {
    throw FitError("no sample has contended link bytes; delta is not identifiable");
  }
  const double delta = fit_through_origin(x, residual, measured, weighting);
  if (delta < 0.0)
  {
    return ClampedFit{0.0, "fitted delta was negative; clamped to 0"};
  }
  return ClampedFit{delta, std::nullopt};
}

namespace
{

bool close(double a, double b)
{
  return a == b || std::abs(a - b) <= 1e-14 * std::max(std::abs(a), std::abs(b));
}

bool settled(const MachineModel &a, const MachineModel &b)
{
  if (!close(a.gamma(), b.gamma()) || !close(a.delta(), b.delta()))
  {
    return false;
  }
  for (std::size_t i = 0; i < 9; ++i)
  {
    const auto &x = a.cells()[i];
    const auto &y = b.cells()[i];
    if (!close(x.alpha, y.alpha) || !close(x.rb, y.rb) ||
        x.rn.is_unbounded() != y.rn.is_unbounded() ||
        (!x.rn.is_unbounded() && !close(x.rn.value(), y.rn.value())))
    {
      return false;
    }
  }
  return true;
}

}  // namespace

FitResult fit_model(std::span<const TimingSample> samples, const MachineModel &base,
                    const CubeTopology &topo, const FitOptions &options)
{
  FitResult result{base, {}, {}, {}, false, false, false, 0, {}};
  const auto &thresholds = base.thresholds();

  std::array<std::vector<std::size_t>, 9> postal;
  std::vector<std::size_t> injection;
  std::vector<std::size_t> reversed;
  std::vector<std::size_t> contended;
  std::set<std::uint64_t> reversed_counts;
  bool injection_high_ppn = false;
  std::vector<double> shared(samples.size());

  for (std::size_t i = 0; i < samples.size(); ++i)
  {
    const auto &s = samples[i];
    shared[i] = sample_link_bytes(s, topo);
    const auto protocol = classify_protocol(s.size, thresholds);
    const bool limited_cell =
      protocol == Protocol::Rendezvous && s.locality == Locality::InterNode;
    if (shared[i] > 0.0)
    {
      contended.push_back(i);
    }
    else if (s.ordering == Ordering::Reversed)
    {
      // Queue-dominated; these only inform gamma.
    }
    else if (!limited_cell || s.ppn == 1)
    {
      postal[MachineModel::index(protocol, s.locality)].push_back(i);
    }
    else
    {
      injection.push_back(i);
      injection_high_ppn = injection_high_ppn || s.ppn >= 4;
    }
    if (s.ordering == Ordering::Reversed)
    {
      reversed.push_back(i);
      reversed_counts.insert(s.n);
    }
  }

  for (std::size_t c = 0; c < 9; ++c)
  {
    result.samples_per_cell[c] = postal[c].size();
    result.cell_fitted[c] = postal[c].size() >= 3;
    if (!postal[c].empty() && postal[c].size() < 3)
    {
      const auto protocol = kProtocols[c / 3];
      const auto locality = kLocalities[c % 3];
      result.warnings.push_back("cell " + cell_key(protocol, locality) + " has only " +
                                std::to_string(postal[c].size()) +
                                " samples; keeping the base parameters");
    }
  }
  result.rn_fitted = injection_high_ppn;
  result.gamma_fitted = reversed_counts.size() >= 2;
  if (!reversed.empty() && !result.gamma_fitted)
  {
    result.warnings.push_back("reversed-order samples need at least two distinct counts; "
                              "gamma kept at the base value");
  }
  result.delta_fitted = !contended.empty();

  MachineModel model = base;
  std::vector<std::string> stage_warnings;
  bool done = false;
  for (std::size_t round = 0; round < options.max_rounds && !done; ++round)
  {
    const MachineModel previous = model;
    stage_warnings.clear();

    for (std::size_t c = 0; c < 9; ++c)
    {
      if (!result.cell_fitted[c])
      {
        continue;
      }
      std::vector<TimingSample> normalized;
      for (auto i : postal[c])
      {
        TimingSample s = samples[i];
        s.seconds = (s.seconds - sample_queue(s, model)) / static_cast<double>(s.n);
        s.n = 1;
        s.ppn = 1;
        normalized.push_back(s);
      }
      const auto fitted = fit_postal(normalized, options.weighting);
      const auto protocol = kProtocols[c / 3];
      const auto locality = kLocalities[c % 3];
      ParamSet cell = model.cell(protocol, locality);
      cell.alpha = fitted.alpha;
      cell.rb = fitted.rb;
      model = model.with_cell(protocol, locality, cell);
    }

    if (result.rn_fitted)
    {
      std::vector<TimingSample> adjusted;
      for (auto i : injection)
      {
        TimingSample s = samples[i];
        s.seconds -= sample_queue(s, model);
        adjusted.push_back(s);
      }
      ParamSet cell = model.cell(Protocol::Rendezvous, Locality::InterNode);
      cell.rn = InjectionRate::bytes_per_second(
        fit_injection(adjusted, cell.alpha, cell.rb, options.weighting));
      model = model.with_cell(Protocol::Rendezvous, Locality::InterNode, cell);
    }

    if (result.gamma_fitted)
    {
      std::vector<TimingSample> adjusted;
      for (auto i : reversed)
      {
        TimingSample s = samples[i];
        s.seconds -= contention_cost(shared[i], model.delta());
        adjusted.push_back(s);
      }
      const auto gamma = fit_gamma(adjusted, model, options.weighting);
      if (gamma.warning)
      {
        stage_warnings.push_back(*gamma.warning);
      }
      model = model.with_gamma(gamma.value);
    }

    if (result.delta_fitted)
    {
      std::vector<TimingSample> subset;
      for (auto i : contended)
      {
        subset.push_back(samples[i]);
      }
      const auto delta = fit_delta(subset, model, topo, options.weighting);
      if (delta.warning)
      {
        stage_warnings.push_back(*delta.warning);
      }
      model = model.with_delta(delta.value);
    }

    result.rounds = round + 1;
    done = settled(previous, model);
  }
  if (!done)
  {
    result.warnings.push_back("stages still moving after " + std::to_string(result.rounds) +
                              " rounds; reporting the last estimate");
  }
  result.warnings.insert(result.warnings.end(), stage_warnings.begin(), stage_warnings.end());

  for (std::size_t c = 0; c < 9; ++c)
  {
    if (!result.cell_fitted[c])
    {
      continue;
    }
    const auto &cell = model.cells()[c];
    double sum = 0.0;
    for (auto i : postal[c])
    {
      const auto &s = samples[i];
      const double per_message =
        (s.seconds - sample_queue(s, model)) / static_cast<double>(s.n);
      const double r = per_message - postal_cost(s.size, cell);
      sum += r * r;
    }
    result.residual_rms[c] = std::sqrt(sum / static_cast<double>(postal[c].size()));
  }
  result.model = model;
  return result;
}

}  // namespace nodecomm
