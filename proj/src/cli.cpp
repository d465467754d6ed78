// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "nodecomm/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "nodecomm/cost.hpp"
#include "nodecomm/error.hpp"
#include "nodecomm/fit.hpp"
#include "nodecomm/matrix_market.hpp"
#include "nodecomm/number_format.hpp"
#include "nodecomm/params.hpp"
#include "nodecomm/pattern.hpp"
#include "nodecomm/queue_sim.hpp"
#include "nodecomm/schedule.hpp"

namespace nodecomm::cli
{

namespace
{

struct Io
{
  std::ostream &out;
  std::ostream &err;
  std::istream &in;
};

std::string read_input(const std::string &path, std::istream &in)
{
  std::ostringstream buffer;
  if (path == "-")
  {
    buffer << in.rdbuf();
    return buffer.str();
  }
  std::ifstream file(path);
  if (!file)
  {
    throw Error("cannot read " + path);
  }
  buffer << file.rdbuf();
  return buffer.str();
}

void write_output(const std::string &path, const std::string &text, std::ostream &out)
{
  if (path.empty() || path == "-")
  {
    out << text;
    return;
  }
  std::ofstream file(path);
  if (!file || !(file << text))
  {
    throw Error("cannot write " + path);
  }
}

std::vector<std::uint64_t> parse_list(const std::string &text, const char *what)
{
  std::vector<std::uint64_t> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
  {
    try
    {
      std::size_t used = 0;
      const auto value = std::stoull(item, &used);
      if (used != item.size() || value == 0)
      {
        throw std::invalid_argument(item);
      }
      values.push_back(value);
    }
    catch (const std::logic_error &)
    {
      throw Error(std::string("malformed ") + what + " list entry `" + item + "`");
    }
  }
  if (values.empty())
  {
    throw Error(std::string("empty ") + what + " list");
  }
  return values;
}

std::vector<Ordering> parse_orders(const std::string &text)
{
  if (text == "both")
  {
    return {Ordering::InOrder, Ordering::Reversed};
  }
  return {*parse_ordering(text)};
}

/// Layout/topology flags shared by predict, pattern summary and emit-plot-data.
struct MachineFlags
{
  std::size_t ppn = 16;
  std::size_t sockets = 2;
  std::size_t geminis = 0;  // 0: smallest cube holding the layout's nodes
  std::size_t nodes_per_gemini = 2;
  std::string layout_path;

  void add(CLI::App &app)
  {
    app.add_option("--ppn", ppn, "Processes per node")->check(CLI::PositiveNumber);
    app.add_option("--sockets", sockets, "Sockets per node")->check(CLI::PositiveNumber);
    app.add_option("--geminis", geminis, "Geminis in the cube partition (default: fit nodes)");
    app.add_option("--nodes-per-gemini", nodes_per_gemini, "Nodes sharing one Gemini")
      ->check(CLI::PositiveNumber);
    app.add_option("--layout", layout_path, "Explicit `rank node socket` layout file");
  }

  RankLayout layout(std::size_t nprocs, std::istream &in) const
  {
    if (!layout_path.empty())
    {
      auto layout = load_layout(read_input(layout_path, in));
      if (layout.nprocs() < nprocs)
      {
        throw TopologyError("layout covers " + std::to_string(layout.nprocs()) +
                            " ranks but the input uses " + std::to_string(nprocs));
      }
      return layout;
    }
    return RankLayout::block(nprocs, ppn, sockets);
  }

  CubeTopology topology(const RankLayout &layout) const
  {
    if (geminis > 0)
    {
      return CubeTopology::for_geminis(geminis, nodes_per_gemini);
    }
    return CubeTopology::for_layout(layout, nodes_per_gemini);
  }
};

/// Pattern sources: trace files, or Matrix Market files plus an operation.
struct PatternFlags
{
  std::vector<std::string> traces;
  std::vector<std::string> matrices;
  std::vector<std::string> rhs;
  std::string op = "spmv";
  std::size_t nprocs = 0;

  void add(CLI::App &app)
  {
    app.add_option("--trace", traces, "Trace document (repeat for several levels)");
    app.add_option("--matrix", matrices, "Matrix Market file (repeat for several levels)");
    app.add_option("--rhs", rhs,
                   "Right-hand matrix B for --op spgemm, one per --matrix (default: A itself)");
    app.add_option("--op", op, "Operation on --matrix inputs")
      ->check(CLI::IsMember({"spmv", "spgemm"}));
    app.add_option("--nprocs", nprocs, "Process count for partitioning matrices");
  }

  std::vector<CommPattern> load(std::istream &in) const
  {
    if (traces.empty() == matrices.empty())
    {
      throw Error("give either --trace or --matrix inputs");
    }
    std::vector<CommPattern> levels;
    for (const auto &path : traces)
    {
      levels.push_back(load_pattern(read_input(path, in)));
    }
    if (matrices.empty())
    {
      return levels;
    }
    if (nprocs == 0)
    {
      throw Error("--nprocs is required with --matrix");
    }
    if (!rhs.empty() && (op != "spgemm" || rhs.size() != matrices.size()))
    {
      throw Error("--rhs needs --op spgemm and one entry per --matrix");
    }
    for (std::size_t i = 0; i < matrices.size(); ++i)
    {
      const auto a = load_matrix(read_input(matrices[i], in), nprocs);
      if (op == "spmv")
      {
        levels.push_back(spmv_pattern(a));
      }
      else if (rhs.empty())
      {
        levels.push_back(spgemm_pattern(a, a));
      }
      else
      {
        levels.push_back(spgemm_pattern(a, load_matrix(read_input(rhs[i], in), nprocs)));
      }
    }
    return levels;
  }
};

std::vector<CostBreakdown> predict_levels(const std::vector<CommPattern> &levels,
                                          const MachineFlags &machine, const MachineModel &model,
                                          std::istream &in)
{
  std::vector<CostBreakdown> out;
  for (const auto &pattern : levels)
  {
    const auto layout = machine.layout(pattern.nprocs(), in);
    out.push_back(predict_pattern(pattern, layout, machine.topology(layout), model));
  }
  return out;
}

std::string breakdown_fields(const CostBreakdown &b)
{
  return "\"transport\": " + format_double(b.transport) +
         ", \"queue\": " + format_double(b.queue) +
         ", \"contention\": " + format_double(b.contention) +
         ", \"total\": " + format_double(b.total);
}

std::string breakdown_document(const std::vector<CostBreakdown> &levels)
{
  CostBreakdown sum;
  for (const auto &b : levels)
  {
    sum = CostBreakdown::from_parts(sum.transport + b.transport, sum.queue + b.queue,
                                    sum.contention + b.contention);
  }
  const CostBreakdown &top = levels.size() == 1 ? levels.front() : sum;
  std::ostringstream doc;
  doc << "{" << breakdown_fields(top) << ",\n \"levels\": [";
  for (std::size_t i = 0; i < levels.size(); ++i)
  {
    doc << (i ? ",\n  " : "\n  ") << "{\"level\": " << i << ", " << breakdown_fields(levels[i])
        << "}";
  }
  doc << "\n ]}\n";
  return doc.str();
}

std::string levels_csv(const std::vector<CostBreakdown> &levels)
{
  std::ostringstream csv;
  csv << "level,transport,queue,contention,total\n";
  for (std::size_t i = 0; i < levels.size(); ++i)
  {
    const auto &b = levels[i];
    csv << i << ',' << format_double(b.transport) << ',' << format_double(b.queue) << ','
        << format_double(b.contention) << ',' << format_double(b.total) << '\n';
  }
  return csv.str();
}

struct ScenarioFlags
{
  std::string scenario = "pair-intra-socket";
  std::string sizes = "1024";
  std::string counts = "1";
  std::string order = "both";
  ScenarioShape shape;

  void add(CLI::App &app)
  {
    std::vector<std::string> names;
    for (auto n : scenario_names())
    {
      names.emplace_back(n);
    }
    app.add_option("--scenario", scenario, "Canned rank-pair arrangement")
      ->check(CLI::IsMember(names));
    app.add_option("--sizes", sizes, "Comma-separated message sizes in bytes");
    app.add_option("--counts", counts, "Comma-separated message counts n");
    app.add_option("--order", order, "Receive posting order")
      ->check(CLI::IsMember({"in", "reversed", "both"}));
    app.add_option("--ppn", shape.ppn, "Processes per node")->check(CLI::PositiveNumber);
    app.add_option("--sockets", shape.sockets, "Sockets per node")->check(CLI::PositiveNumber);
    app.add_option("--geminis", shape.geminis, "Geminis in the gemini-line scenario");
    app.add_option("--nodes-per-gemini", shape.nodes_per_gemini, "Nodes sharing one Gemini")
      ->check(CLI::PositiveNumber);
  }
};

int run_fit(const std::string &samples_path, const std::string &model_path, std::size_t geminis,
            std::size_t nodes_per_gemini, const std::string &weighting, const std::string &out_path,
            Io io)
{
  const auto samples = load_samples(read_input(samples_path, io.in));
  const MachineModel base =
    model_path.empty() ? blue_waters_model() : load_model(read_input(model_path, io.in));
  FitOptions options;
  options.weighting = weighting == "relative" ? Weighting::Relative : Weighting::Ordinary;
  const auto result =
    fit_model(samples, base, CubeTopology::for_geminis(geminis, nodes_per_gemini), options);
  for (const auto &w : result.warnings)
  {
    io.err << "warning: " << w << '\n';
  }
  write_output(out_path, save_model(result.model), io.out);
  return kExitOk;
}

int run_simulate_queue(std::size_t n, const std::string &order, std::uint64_t seed,
                       const std::string &schedule_name, const std::string &out_path, Io io)
{
  QueueTrace trace = order == "in"         ? in_order_trace(n)
                     : order == "reversed" ? reversed_trace(n)
                                           : random_trace(n, seed);
  const auto schedule =
    schedule_name == "alternating" ? alternating_schedule(n) : posts_first_schedule(n);
  const auto stats = simulate_queue(trace, schedule);
  std::ostringstream doc;
  doc << "{\"n\": " << n << ", \"order\": \"" << order << "\", \"schedule\": \"" << schedule_name
      << "\", \"total_steps\": " << stats.total_steps
      << ", \"worst_case_steps\": " << worst_case_steps(n)
      << ", \"max_posted_depth\": " << stats.max_posted_depth
      << ", \"max_unexpected_depth\": " << stats.max_unexpected_depth << "}\n";
  write_output(out_path, doc.str(), io.out);
  return kExitOk;
}

std::vector<TimingSample> synth_all(const ScenarioFlags &flags, const MachineModel &model,
                                    double noise, std::uint64_t seed)
{
  const auto scenario = make_scenario(flags.scenario, flags.shape);
  const auto sizes = parse_list(flags.sizes, "size");
  const auto counts = parse_list(flags.counts, "count");
  std::vector<TimingSample> samples;
  std::uint64_t stream = 0;
  for (auto order : parse_orders(flags.order))
  {
    for (auto n : counts)
    {
      for (auto size : sizes)
      {
        const auto schedule = make_schedule(scenario.pairs, n, size, order);
        // One sample per distinct locality; pairs of a canned scenario share one.
        auto batch = synth_timings(schedule, model, scenario.layout, scenario.topo, noise,
                                   seed + stream++);
        samples.push_back(batch.front());
      }
    }
  }
  return samples;
}

std::string highvolume_csv(const ScenarioFlags &flags, const MachineModel &model)
{
  const auto scenario = make_scenario(flags.scenario, flags.shape);
  std::ostringstream csv;
  csv << "n,size,ordering,transport,queue,contention,total\n";
  for (auto order : parse_orders(flags.order))
  {
    for (auto n : parse_list(flags.counts, "count"))
    {
      for (auto size : parse_list(flags.sizes, "size"))
      {
        const auto schedule = make_schedule(scenario.pairs, n, size, order);
        const auto b = schedule_costs(schedule, model, scenario.layout, scenario.topo).front();
        csv << n << ',' << size << ',' << to_string(order) << ',' << format_double(b.transport)
            << ',' << format_double(b.queue) << ',' << format_double(b.contention) << ','
            << format_double(b.total) << '\n';
      }
    }
  }
  return csv.str();
}

std::string pingpong_csv(const MachineModel &model, const std::string &sizes,
                         const std::string &ppns)
{
  std::ostringstream csv;
  csv << "locality,protocol,size,ppn,postal,max_rate\n";
  for (auto locality : kLocalities)
  {
    for (auto ppn : parse_list(ppns, "ppn"))
    {
      for (auto size : parse_list(sizes, "size"))
      {
        const auto protocol = classify_protocol(size, model.thresholds());
        const auto &cell = model.cell(protocol, locality);
        csv << to_string(locality) << ',' << to_string(protocol) << ',' << size << ',' << ppn
            << ',' << format_double(postal_cost(size, cell)) << ','
            << format_double(max_rate_cost(size, ppn, cell)) << '\n';
      }
    }
  }
  return csv.str();
}

}  // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err,
        std::istream &in)
{
  Io io{out, err, in};
  CLI::App app{"Node-aware MPI point-to-point performance models", "nodecomm"};
  app.require_subcommand(1);

  // fit
  auto *fit = app.add_subcommand("fit", "Fit model parameters to a timing-sample CSV");
  std::string fit_samples = "-";
  std::string fit_model_path;
  std::size_t fit_geminis = 1;
  std::size_t fit_npg = 2;
  std::string fit_weighting = "ordinary";
  std::string fit_out;
  fit->add_option("--samples", fit_samples, "Sample CSV (default: stdin)");
  fit->add_option("--model", fit_model_path, "Starting model for parameters the samples miss");
  fit->add_option("--geminis", fit_geminis, "Geminis spanned by the sampled ranks")
    ->check(CLI::PositiveNumber);
  fit->add_option("--nodes-per-gemini", fit_npg, "Nodes sharing one Gemini")
    ->check(CLI::PositiveNumber);
  fit->add_option("--weighting", fit_weighting, "Least-squares weighting")
    ->check(CLI::IsMember({"ordinary", "relative"}));
  fit->add_option("--out", fit_out, "Output parameter document (default: stdout)");

  // predict
  auto *predict = app.add_subcommand("predict", "Predict the cost of communication patterns");
  std::string predict_model;
  std::string predict_out;
  std::string predict_csv;
  MachineFlags predict_machine;
  PatternFlags predict_patterns;
  predict->add_option("--model", predict_model, "Parameter document")->required();
  predict_machine.add(*predict);
  predict_patterns.add(*predict);
  predict->add_option("--out", predict_out, "Breakdown document (default: stdout)");
  predict->add_option("--csv", predict_csv, "Per-level breakdown CSV");

  // simulate-queue
  auto *simulate = app.add_subcommand("simulate-queue", "Replay the two-queue matching discipline");
  std::size_t sim_n = 0;
  std::string sim_order = "in";
  std::uint64_t sim_seed = 0;
  std::string sim_schedule = "posts-first";
  std::string sim_out;
  simulate->add_option("--n", sim_n, "Message count")->required();
  simulate->add_option("--order", sim_order, "Arrival order relative to posting")
    ->check(CLI::IsMember({"in", "reversed", "random"}));
  simulate->add_option("--seed", sim_seed, "Seed for --order random");
  simulate->add_option("--schedule", sim_schedule, "Interleaving of posts and arrivals")
    ->check(CLI::IsMember({"posts-first", "alternating"}));
  simulate->add_option("--out", sim_out, "Output file (default: stdout)");

  // pattern
  auto *pattern = app.add_subcommand("pattern", "Derive or summarize communication patterns");
  std::string pattern_kind;
  std::string pattern_out;
  MachineFlags pattern_machine;
  PatternFlags pattern_inputs;
  pattern->add_option("kind", pattern_kind, "spmv | spgemm | summary")
    ->required()
    ->check(CLI::IsMember({"spmv", "spgemm", "summary"}));
  pattern_machine.add(*pattern);
  pattern_inputs.add(*pattern);
  pattern->add_option("--out", pattern_out, "Output file (default: stdout)");

  // synth
  auto *synth = app.add_subcommand("synth", "Generate model-implied ping-pong timings");
  std::string synth_model;
  double synth_noise = 0.0;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  ScenarioFlags synth_flags;
  synth->add_option("--model", synth_model, "Parameter document")->required();
  synth_flags.add(*synth);
  synth->add_option("--noise", synth_noise, "Relative std of lognormal noise")
    ->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", synth_seed, "Noise seed");
  synth->add_option("--out", synth_out, "Sample CSV (default: stdout)");

  // emit-plot-data
  auto *plot = app.add_subcommand("emit-plot-data", "Write CSV series for plotting");
  std::string plot_figure = "levels";
  std::string plot_model;
  std::string plot_out;
  std::string plot_ppns = "1,4,16";
  MachineFlags plot_machine;
  PatternFlags plot_patterns;
  ScenarioFlags plot_scenario;
  plot->add_option("--figure", plot_figure, "levels | pingpong | highvolume")
    ->check(CLI::IsMember({"levels", "pingpong", "highvolume"}));
  plot->add_option("--model", plot_model, "Parameter document")->required();
  plot->add_option("--trace", plot_patterns.traces, "Trace document per level");
  plot->add_option("--matrix", plot_patterns.matrices, "Matrix Market file per level");
  plot->add_option("--rhs", plot_patterns.rhs, "Right-hand matrix per level for spgemm");
  plot->add_option("--op", plot_patterns.op, "Operation on --matrix inputs")
    ->check(CLI::IsMember({"spmv", "spgemm"}));
  plot->add_option("--nprocs", plot_patterns.nprocs, "Process count for matrices");
  plot->add_option("--layout", plot_machine.layout_path, "Explicit layout file");
  plot->add_option("--scenario", plot_scenario.scenario, "Scenario for --figure highvolume");
  plot->add_option("--sizes", plot_scenario.sizes, "Message sizes");
  plot->add_option("--counts", plot_scenario.counts, "Message counts for highvolume");
  plot->add_option("--order", plot_scenario.order, "in | reversed | both")
    ->check(CLI::IsMember({"in", "reversed", "both"}));
  plot->add_option("--ppn", plot_machine.ppn, "Processes per node")->check(CLI::PositiveNumber);
  plot->add_option("--ppn-list", plot_ppns, "Active ppn values for pingpong");
  plot->add_option("--sockets", plot_machine.sockets, "Sockets per node")
    ->check(CLI::PositiveNumber);
  plot->add_option("--geminis", plot_machine.geminis, "Geminis in the cube partition");
  plot->add_option("--out", plot_out, "Output CSV (default: stdout)");

  try
  {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  }
  catch (const CLI::CallForHelp &)
  {
    out << app.help();
    return kExitOk;
  }
  catch (const CLI::CallForAllHelp &)
  {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  }
  catch (const CLI::ParseError &e)
  {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }

  try
  {
    if (fit->parsed())
    {
      return run_fit(fit_samples, fit_model_path, fit_geminis, fit_npg, fit_weighting, fit_out,
                     io);
    }
    if (predict->parsed())
    {
      const auto model = load_model(read_input(predict_model, in));
      const auto levels = predict_patterns.load(in);
      const auto costs = predict_levels(levels, predict_machine, model, in);
      if (!predict_csv.empty())
      {
        write_output(predict_csv, levels_csv(costs), out);
      }
      write_output(predict_out, breakdown_document(costs), out);
      return kExitOk;
    }
    if (simulate->parsed())
    {
      return run_simulate_queue(sim_n, sim_order, sim_seed, sim_schedule, sim_out, io);
    }
    if (pattern->parsed())
    {
      if (pattern_kind == "summary")
      {
        const auto levels = pattern_inputs.load(in);
        std::string text;
        for (const auto &level : levels)
        {
          text += pattern_summary(level, pattern_machine.layout(level.nprocs(), in));
        }
        write_output(pattern_out, text, out);
        return kExitOk;
      }
      if (pattern_inputs.matrices.size() != 1 || !pattern_inputs.traces.empty())
      {
        throw Error("pattern " + pattern_kind + " takes exactly one --matrix");
      }
      PatternFlags single = pattern_inputs;
      single.op = pattern_kind;
      write_output(pattern_out, save_pattern(single.load(in).front()), out);
      return kExitOk;
    }
    if (synth->parsed())
    {
      const auto model = load_model(read_input(synth_model, in));
      write_output(synth_out, save_samples(synth_all(synth_flags, model, synth_noise, synth_seed)),
                   out);
      return kExitOk;
    }
    if (plot->parsed())
    {
      const auto model = load_model(read_input(plot_model, in));
      std::string csv;
      if (plot_figure == "levels")
      {
        csv = levels_csv(predict_levels(plot_patterns.load(in), plot_machine, model, in));
      }
      else if (plot_figure == "pingpong")
      {
        csv = pingpong_csv(model, plot_scenario.sizes, plot_ppns);
      }
      else
      {
        plot_scenario.shape.ppn = plot_machine.ppn;
        plot_scenario.shape.sockets = plot_machine.sockets;
        if (plot_machine.geminis > 0)
        {
          plot_scenario.shape.geminis = plot_machine.geminis;
        }
        csv = highvolume_csv(plot_scenario, model);
      }
      write_output(plot_out, csv, out);
      return kExitOk;
    }
  }
  catch (const Error &e)
  {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  catch (const std::exception &e)
  {
    err << "internal error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace nodecomm::cli
