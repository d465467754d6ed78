// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace nodecomm
{

using Bytes = std::uint64_t;

enum class Protocol : std::uint8_t
{
  Short,
  Eager,
  Rendezvous
};

/// IntraNode means same node but a different socket.
enum class Locality : std::uint8_t
{
  IntraSocket,
  IntraNode,
  InterNode
};

inline constexpr std::array<Protocol, 3> kProtocols = {Protocol::Short, Protocol::Eager,
                                                       Protocol::Rendezvous};
inline constexpr std::array<Locality, 3> kLocalities = {
  Locality::IntraSocket, Locality::IntraNode, Locality::InterNode};

std::string_view to_string(Protocol protocol);
std::string_view to_string(Locality locality);
std::optional<Protocol> parse_protocol(std::string_view text);
std::optional<Locality> parse_locality(std::string_view text);

/// Size cutoffs (inclusive upper bounds) for the short and eager protocols.
struct ProtocolThresholds
{
  Bytes short_max = 128;
  Bytes eager_max = 8192;

  bool operator==(const ProtocolThresholds &) const = default;
};

Protocol classify_protocol(Bytes size, const ProtocolThresholds &thresholds);

/// Node injection bandwidth; either a finite rate or explicitly unbounded.
class InjectionRate
{
public:
  static InjectionRate unbounded() { return InjectionRate{}; }
  static InjectionRate bytes_per_second(double rate) { return InjectionRate{rate}; }

  bool is_unbounded() const noexcept { return !rate_.has_value(); }
  /// Finite rate. Only meaningful when !is_unbounded().
  double value() const { return *rate_; }

  bool operator==(const InjectionRate &) const = default;

private:
  InjectionRate() = default;
  explicit InjectionRate(double rate) : rate_(rate) {}
  std::optional<double> rate_;
};

/// Max-rate parameters for one (protocol, locality) cell.
struct ParamSet
{
  double alpha = 0.0;  // seconds
  double rb = 1.0;     // bytes / second between two processes
  InjectionRate rn = InjectionRate::unbounded();

  bool operator==(const ParamSet &) const = default;
};

/// Every fitted parameter of the node-aware model. Immutable once built; the
/// constructor rejects any value that breaks an invariant with a SchemaError.
class MachineModel
{
public:
  using Cells = std::array<ParamSet, 9>;

  MachineModel(const Cells &cells, double gamma, double delta,
               ProtocolThresholds thresholds = {}, double queue_multiplier = 1.0);

  const ParamSet &cell(Protocol protocol, Locality locality) const
  {
    return cells_[index(protocol, locality)];
  }
  const Cells &cells() const noexcept { return cells_; }
  double gamma() const noexcept { return gamma_; }
  double delta() const noexcept { return delta_; }
  const ProtocolThresholds &thresholds() const noexcept { return thresholds_; }
  /// Scale applied to the gamma * n^2 queue bound (1 is the plain upper bound).
  double queue_multiplier() const noexcept { return queue_multiplier_; }

  MachineModel with_cell(Protocol protocol, Locality locality, const ParamSet &params) const;
  MachineModel with_gamma(double gamma) const;
  MachineModel with_delta(double delta) const;

  static constexpr std::size_t index(Protocol protocol, Locality locality)
  {
    return static_cast<std::size_t>(protocol) * 3 + static_cast<std::size_t>(locality);
  }

  bool operator==(const MachineModel &) const = default;

private:
  Cells cells_;
  double gamma_;
  double delta_;
  ProtocolThresholds thresholds_;
  double queue_multiplier_;
};

/// "rendezvous.inter_node" style key for a cell.
std::string cell_key(Protocol protocol, Locality locality);

/// Measured Blue Waters values: the nine node-aware cells plus gamma = 8.4e-9
/// and delta = 1.0e-10, with the default protocol thresholds.
MachineModel blue_waters_model();

/// Parses a parameter document. Throws SchemaError naming the offending key.
MachineModel load_model(std::string_view text);
MachineModel load_model_file(const std::filesystem::path &path);

/// Canonical, deterministic document; load_model(save_model(m)) == m.
std::string save_model(const MachineModel &model);

}  // namespace nodecomm
