// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "nodecomm/params.hpp"

#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nodecomm/error.hpp"
#include "nodecomm/number_format.hpp"

namespace nodecomm
{

namespace
{

using json = nlohmann::json;

constexpr std::string_view kInf = "inf";

void require_nonnegative(double value, const std::string &key)
{
  if (!std::isfinite(value) || value < 0.0)
  {
    throw SchemaError(key, "must be a finite value >= 0");
  }
}

void require_positive(double value, const std::string &key)
{
  if (!std::isfinite(value) || value <= 0.0)
  {
    throw SchemaError(key, "must be a finite value > 0");
  }
}

double number_at(const json &object, const std::string &name, const std::string &key)
{
  const auto it = object.find(name);
  if (it == object.end())
  {
    throw SchemaError(key, "missing required key");
  }
  if (!it->is_number())
  {
    throw SchemaError(key, "expected a number");
  }
  return it->get<double>();
}

Bytes bytes_at(const json &object, const std::string &name, const std::string &key)
{
  const auto it = object.find(name);
  if (it == object.end())
  {
    throw SchemaError(key, "missing required key");
  }
  if (!it->is_number_unsigned())
  {
    throw SchemaError(key, "expected a non-negative integer byte count");
  }
  return it->get<Bytes>();
}

void reject_unknown_keys(const json &object, const std::set<std::string> &allowed,
                         const std::string &prefix)
{
  for (const auto &[name, value] : object.items())
  {
    if (!allowed.contains(name))
    {
      throw SchemaError(prefix + name, "unknown key");
    }
  }
}

// nlohmann reports only a byte offset; recover the last key opened before it so
// malformed values are still reported against their key.
std::string key_before(std::string_view text, std::size_t offset)
{
  const std::string head(text.substr(0, std::min(offset, text.size())));
  static const std::regex key_re("\"([^\"]+)\"\\s*:");
  std::string last = "<document>";
  for (auto it = std::sregex_iterator(head.begin(), head.end(), key_re);
       it != std::sregex_iterator(); ++it)
  {
    last = (*it)[1].str();
  }
  return last;
}

void append_cell(std::ostringstream &out, const ParamSet &p)
{
  out << "{\"alpha\": " << format_double(p.alpha) << ", \"rb\": " << format_double(p.rb)
      << ", \"rn\": ";
  if (p.rn.is_unbounded())
  {
    out << '"' << kInf << '"';
  }
  else
  {
    out << format_double(p.rn.value());
  }
  out << '}';
}

}  // namespace

std::string_view to_string(Protocol protocol)
{
  switch (protocol)
  {
    case Protocol::Short:
      return "short";
    case Protocol::Eager:
      return "eager";
    case Protocol::Rendezvous:
      return "rendezvous";
  }
  return "?";
}

std::string_view to_string(Locality locality)
{
  switch (locality)
  {
    case Locality::IntraSocket:
      return "intra_socket";
    case Locality::IntraNode:
      return "intra_node";
    case Locality::InterNode:
      return "inter_node";
  }
  return "?";
}

std::optional<Protocol> parse_protocol(std::string_view text)
{
  for (auto p : kProtocols)
  {
    if (to_string(p) == text)
    {
      return p;
    }
  }
  return std::nullopt;
}

std::optional<Locality> parse_locality(std::string_view text)
{
  for (auto l : kLocalities)
  {
    if (to_string(l) == text)
    {
      return l;
    }
  }
  return std::nullopt;
}

Protocol classify_protocol(Bytes size, const ProtocolThresholds &thresholds)
{
  if (size <= thresholds.short_max)
  {
    return Protocol::Short;
  }
  if (size <= thresholds.eager_max)
  {
    return Protocol::Eager;
  }
  return Protocol::Rendezvous;
}

std::string cell_key(Protocol protocol, Locality locality)
{
  return std::string(to_string(protocol)) + "." + std::string(to_string(locality));
}

MachineModel::MachineModel(const Cells &cells, double gamma, double delta,
                           ProtocolThresholds thresholds, double queue_multiplier)
  : cells_(cells), gamma_(gamma), delta_(delta), thresholds_(thresholds),
    queue_multiplier_(queue_multiplier)
{
  if (thresholds_.short_max >= thresholds_.eager_max)
  {
    throw SchemaError("thresholds", "short_max must be smaller than eager_max");
  }
  require_nonnegative(gamma_, "gamma");
  require_nonnegative(delta_, "delta");
  require_nonnegative(queue_multiplier_, "queue_multiplier");
  for (auto protocol : kProtocols)
  {
    for (auto locality : kLocalities)
    {
      const auto &p = cell(protocol, locality);
      const auto key = "params." + cell_key(protocol, locality);
      require_nonnegative(p.alpha, key + ".alpha");
      require_positive(p.rb, key + ".rb");
      if (!p.rn.is_unbounded())
      {
        require_positive(p.rn.value(), key + ".rn");
        // Only off-node rendezvous traffic is limited by node injection.
        if (protocol != Protocol::Rendezvous || locality != Locality::InterNode)
        {
          throw SchemaError(key + ".rn", "must be \"inf\" for this cell");
        }
      }
    }
  }
}

MachineModel MachineModel::with_cell(Protocol protocol, Locality locality,
                                     const ParamSet &params) const
{
  Cells cells = cells_;
  cells[index(protocol, locality)] = params;
  return MachineModel(cells, gamma_, delta_, thresholds_, queue_multiplier_);
}

MachineModel MachineModel::with_gamma(double gamma) const
{
  return MachineModel(cells_, gamma, delta_, thresholds_, queue_multiplier_);
}

MachineModel MachineModel::with_delta(double delta) const
{
  return MachineModel(cells_, gamma_, delta, thresholds_, queue_multiplier_);
}

MachineModel blue_waters_model()
{
  const auto inf = InjectionRate::unbounded();
  MachineModel::Cells cells{};
  auto set = [&](Protocol p, Locality l, double alpha, double rb, InjectionRate rn) {
    cells[MachineModel::index(p, l)] = ParamSet{alpha, rb, rn};
  };
  set(Protocol::Short, Locality::IntraSocket, 4.4e-07, 2.2e09, inf);
  set(Protocol::Short, Locality::IntraNode, 8.3e-07, 4.8e08, inf);
  set(Protocol::Short, Locality::InterNode, 2.3e-06, 1.3e09, inf);
  set(Protocol::Eager, Locality::IntraSocket, 5.3e-07, 3.2e09, inf);
  set(Protocol::Eager, Locality::IntraNode, 1.2e-06, 9.6e08, inf);
  set(Protocol::Eager, Locality::InterNode, 7.0e-06, 7.5e08, inf);
  set(Protocol::Rendezvous, Locality::IntraSocket, 1.7e-06, 6.2e09, inf);
  set(Protocol::Rendezvous, Locality::IntraNode, 2.5e-06, 6.2e09, inf);
  set(Protocol::Rendezvous, Locality::InterNode, 3.0e-06, 2.9e09,
      InjectionRate::bytes_per_second(6.6e09));
  return MachineModel(cells, 8.4e-09, 1.0e-10);
}

MachineModel load_model(std::string_view text)
{
  json doc;
  try
  {
    doc = json::parse(text.begin(), text.end());
  }
  catch (const json::parse_error &e)
  {
    throw SchemaError(key_before(text, e.byte), std::string("malformed value: ") + e.what());
  }
  if (!doc.is_object())
  {
    throw SchemaError("<document>", "expected an object");
  }
  reject_unknown_keys(doc, {"thresholds", "gamma", "delta", "queue_multiplier", "params"}, "");

  ProtocolThresholds thresholds;
  if (const auto it = doc.find("thresholds"); it != doc.end())
  {
    if (!it->is_object())
    {
      throw SchemaError("thresholds", "expected an object");
    }
    reject_unknown_keys(*it, {"short_max", "eager_max"}, "thresholds.");
    thresholds.short_max = bytes_at(*it, "short_max", "thresholds.short_max");
    thresholds.eager_max = bytes_at(*it, "eager_max", "thresholds.eager_max");
  }

  const double gamma = number_at(doc, "gamma", "gamma");
  const double delta = number_at(doc, "delta", "delta");
  double multiplier = 1.0;
  if (doc.contains("queue_multiplier"))
  {
    multiplier = number_at(doc, "queue_multiplier", "queue_multiplier");
  }

  const auto params_it = doc.find("params");
  if (params_it == doc.end())
  {
    throw SchemaError("params", "missing required key");
  }
  if (!params_it->is_object())
  {
    throw SchemaError("params", "expected an object");
  }
  std::set<std::string> cell_names;
  for (auto p : kProtocols)
  {
    for (auto l : kLocalities)
    {
      cell_names.insert(cell_key(p, l));
    }
  }
  reject_unknown_keys(*params_it, cell_names, "params.");

  MachineModel::Cells cells{};
  for (auto p : kProtocols)
  {
    for (auto l : kLocalities)
    {
      const auto name = cell_key(p, l);
      const auto key = "params." + name;
      const auto it = params_it->find(name);
      if (it == params_it->end())
      {
        throw SchemaError(key, "missing cell");
      }
      if (!it->is_object())
      {
        throw SchemaError(key, "expected an object");
      }
      reject_unknown_keys(*it, {"alpha", "rb", "rn"}, key + ".");
      ParamSet cell;
      cell.alpha = number_at(*it, "alpha", key + ".alpha");
      cell.rb = number_at(*it, "rb", key + ".rb");
      const auto rn = it->find("rn");
      if (rn == it->end())
      {
        throw SchemaError(key + ".rn", "missing required key");
      }
      if (rn->is_string() && rn->get<std::string>() == kInf)
      {
        cell.rn = InjectionRate::unbounded();
      }
      else if (rn->is_number())
      {
        cell.rn = InjectionRate::bytes_per_second(rn->get<double>());
      }
      else
      {
        throw SchemaError(key + ".rn", "expected a number or \"inf\"");
      }
      cells[MachineModel::index(p, l)] = cell;
    }
  }
  return MachineModel(cells, gamma, delta, thresholds, multiplier);
}

MachineModel load_model_file(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw Error("cannot read model file " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_model(buffer.str());
}

std::string save_model(const MachineModel &model)
{
  std::ostringstream out;
  out << "{\n";
  out << "  \"thresholds\": {\"short_max\": " << model.thresholds().short_max
      << ", \"eager_max\": " << model.thresholds().eager_max << "},\n";
  out << "  \"gamma\": " << format_double(model.gamma()) << ",\n";
  out << "  \"delta\": " << format_double(model.delta()) << ",\n";
  if (model.queue_multiplier() != 1.0)
  {
    out << "  \"queue_multiplier\": " << format_double(model.queue_multiplier()) << ",\n";
  }
  out << "  \"params\": {\n";
  bool first = true;
  for (auto p : kProtocols)
  {
    for (auto l : kLocalities)
    {
      if (!first)
      {
        out << ",\n";
      }
      first = false;
      out << "    \"" << cell_key(p, l) << "\": ";
      append_cell(out, model.cell(p, l));
    }
  }
  out << "\n  }\n}\n";
  return out.str();
}

}  // namespace nodecomm
