// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>

#include <json.hpp>

#include "campaign.hpp"
#include "cli_support.hpp"
#include "nodecomm/cost.hpp"
#include "nodecomm/error.hpp"
#include "nodecomm/queue_sim.hpp"
#include "oracles.hpp"

namespace nodecomm
{
namespace
{

using testing::read_file;
using testing::run_cli;
using testing::TempDir;

struct Outcome
{
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string &what)
  {
    if (!ok && pass)
    {
      detail = what;
    }
    pass = pass && ok;
  }
};

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

Outcome max_rate_arithmetic()
{
  Outcome o;
  const auto model = blue_waters_model();
  const auto &cell = model.cell(Protocol::Rendezvous, Locality::InterNode);
  const double want = 3.0e-6 + 1.6e7 / 6.6e9;
  const double got = max_rate_cost(1000000, 16, cell);
  o.require(rel(got, want) <= 1e-12, "ppn=16 value off");
  for (const auto &c : model.cells())
  {
    for (Bytes s : {0ull, 1ull, 100ull, 128ull, 129ull, 8192ull, 8193ull, 1000000ull})
    {
      o.require(max_rate_cost(s, 1, c) == postal_cost(s, c), "ppn=1 differs from postal");
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "T(16, 1e6) = %.12g s", got);
  if (o.pass)
  {
    o.detail = buf;
  }
  return o;
}

Outcome max_rate_reduction()
{
  Outcome o;
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 10000; ++i)
  {
    const std::size_t ppn = 1 + static_cast<std::size_t>(unit(rng) * 64);
    const double rb = std::pow(10.0, 6.0 + 5.0 * unit(rng));
    ParamSet p{unit(rng) * 1e-5, rb};
    if (i % 4 != 0)
    {
      p.rn = InjectionRate::bytes_per_second(ppn * rb * (1.0 + 4.0 * unit(rng)));
    }
    const Bytes s = static_cast<Bytes>(std::pow(10.0, 8.0 * unit(rng)));
    o.require(max_rate_cost(s, ppn, p) == postal_cost(s, p), "case " + std::to_string(i));
  }
  if (o.pass)
  {
    o.detail = "10000 random cases bitwise equal";
  }
  return o;
}

Outcome queue_sandwich()
{
  Outcome o;
  for (std::size_t n = 1; n <= 200; ++n)
  {
    o.require(simulate_queue(in_order_trace(n)).total_steps == n, "in-order n=" +
                                                                    std::to_string(n));
    o.require(simulate_queue(reversed_trace(n)).total_steps == worst_case_steps(n),
              "reversed n=" + std::to_string(n));
    for (std::uint64_t seed = 0; seed < 100; ++seed)
    {
      const auto steps = simulate_queue(random_trace(n, seed * 7919 + n)).total_steps;
      o.require(steps >= n && steps <= worst_case_steps(n), "bound n=" + std::to_string(n));
    }
  }
  const std::size_t n = 1000;
  double sum = 0.0;
  const int seeds = 64;
  for (int seed = 0; seed < seeds; ++seed)
  {
    sum += static_cast<double>(simulate_queue(random_trace(n, 5000 + seed)).total_steps);
  }
  const double ratio = sum / seeds / (static_cast<double>(n) * n);
  o.require(ratio >= 0.2 && ratio <= 0.45, "random mean/n^2 = " + std::to_string(ratio));
  if (o.pass)
  {
    o.detail = "random-order mean steps/n^2 = " + std::to_string(ratio) + " at n=1000";
  }
  return o;
}

Outcome hop_oracle()
{
  Outcome o;
  for (std::size_t c = 1; c <= 5; ++c)
  {
    const CubeTopology topo(c);
    std::int64_t total = 0;
    for (std::size_t a = 0; a < topo.num_geminis(); ++a)
      for (std::size_t b = 0; b < topo.num_geminis(); ++b)
        total += hops(topo.coord(a), topo.coord(b));
    const double pairs = static_cast<double>(topo.num_geminis() * topo.num_geminis());
    o.require(average_hops(topo) == static_cast<double>(total) / pairs,
              "c=" + std::to_string(c));
  }
  o.require(link_bytes(1.5, 16384, 16) == 1769472.0, "link_bytes example");
  if (o.pass)
  {
    o.detail = "closed form exact for c=1..5; link_bytes(1.5, 16384, 16) = 1769472";
  }
  return o;
}

struct Recovery
{
  std::string name;
  double tolerance;
  std::function<double(const MachineModel &)> get;
  double want;
  int hits = 0;
};

std::vector<Recovery> recovery_targets(const MachineModel &truth)
{
  std::vector<Recovery> out;
  for (auto p : kProtocols)
  {
    for (auto l : kLocalities)
    {
      const auto key = cell_key(p, l);
      out.push_back({key + ".alpha", 0.10,
                     [p, l](const MachineModel &m) { return m.cell(p, l).alpha; },
                     truth.cell(p, l).alpha});
      out.push_back({key + ".rb", 0.10, [p, l](const MachineModel &m) { return m.cell(p, l).rb; },
                     truth.cell(p, l).rb});
    }
  }
  out.push_back({"rn", 0.10,
                 [](const MachineModel &m) {
                   return m.cell(Protocol::Rendezvous, Locality::InterNode).rn.value();
                 },
                 6.6e9});
  out.push_back({"gamma", 0.10, [](const MachineModel &m) { return m.gamma(); }, truth.gamma()});
  out.push_back({"delta", 0.15, [](const MachineModel &m) { return m.delta(); }, truth.delta()});
  return out;
}

Outcome fit_round_trips()
{
  Outcome o;
  const auto truth = blue_waters_model();
  const auto neutral = campaign::neutral_model();

  const auto exact = campaign::fit(campaign::generate(truth, 0.0, 0, 12), neutral);
  double worst = 0.0;
  for (const auto &t : recovery_targets(truth))
  {
    const double err = rel(t.get(exact.contended.model), t.want);
    worst = std::max(worst, err);
    o.require(err <= 1e-6, "noise-free " + t.name);
  }

  auto targets = recovery_targets(truth);
  const int trials = 100;
  int failed_fits = 0;
  for (int trial = 0; trial < trials; ++trial)
  {
    try
    {
      const auto fit = campaign::fit(campaign::generate(truth, 0.05, 1000 + trial, 200), neutral);
      for (auto &t : targets)
      {
        t.hits += rel(t.get(fit.contended.model), t.want) <= t.tolerance ? 1 : 0;
      }
    }
    catch (const Error &)
    {
      ++failed_fits;
    }
  }
  std::ostringstream detail;
  detail << "noise-free worst rel err " << worst << "; noisy hits/100:";
  std::string first_miss;
  for (const auto &t : targets)
  {
    detail << ' ' << t.name << '=' << t.hits;
    if (t.hits < 95 && first_miss.empty())
    {
      first_miss = t.name;
    }
  }
  if (failed_fits)
  {
    detail << "; " << failed_fits << " fits raised";
  }
  o.require(first_miss.empty(), "noisy recovery below 95/100 (first: " + first_miss + ")");
  o.detail = o.pass ? detail.str() : o.detail + "; " + detail.str();
  return o;
}

Outcome pattern_oracles()
{
  Outcome o;
  std::mt19937_64 rng(606);
  std::size_t messages = 0;
  for (int trial = 0; trial < 100; ++trial)
  {
    const std::size_t nprocs = 1 + rng() % 8;
    const auto a = oracle::random_matrix(rng, 200, 0.05);
    auto b = oracle::random_matrix(rng, 200, 0.05);
    b.rows = a.cols;
    std::erase_if(b.entries, [&](const MatrixEntry &e) { return e.row >= b.rows; });
    const auto pa = SparseMatrixPartition::block_rows(a.rows, a.cols, a.entries, nprocs);
    const auto pb = SparseMatrixPartition::block_rows(b.rows, b.cols, b.entries, nprocs);
    const auto spmv = spmv_pattern(pa);
    const auto spgemm = spgemm_pattern(pa, pb);
    o.require(oracle::message_set(spmv) == oracle::spmv_messages(a, nprocs),
              "spmv trial " + std::to_string(trial));
    o.require(oracle::message_set(spgemm) == oracle::spgemm_messages(a, b, nprocs),
              "spgemm trial " + std::to_string(trial));
    messages += spmv.messages().size() + spgemm.messages().size();
  }
  if (o.pass)
  {
    o.detail = "100 matrices, " + std::to_string(messages) + " messages matched";
  }
  return o;
}

std::string strip_header(const std::string &csv) { return csv.substr(csv.find('\n') + 1); }

struct EndToEnd
{
  std::string name;
  std::vector<std::vector<std::string>> synth_runs;  // extra synth flags per run
  std::string base;                                  // starting model for fit
  std::vector<std::string> fit_flags;
  std::string scenario;
  ScenarioShape shape;
  std::uint64_t n;
  Bytes size;
  Ordering order;
  std::vector<std::string> predict_flags;
};

Outcome end_to_end()
{
  Outcome o;
  TempDir dir;
  const auto truth_path = std::string(NODECOMM_DATA_DIR) + "/default_model.json";
  const auto neutral_path = dir.write("neutral.json", save_model(campaign::neutral_model()));
  const auto truth = blue_waters_model();

  const std::vector<EndToEnd> cases = {
    {"intra-socket eager pair",
     {{"--scenario", "pair-intra-socket", "--sizes", "129,1024,4096,8192", "--counts",
       "1,10,100", "--order", "both"}},
     neutral_path,
     {},
     "pair-intra-socket",
     {},
     100,
     4096,
     Ordering::Reversed,
     {"--ppn", "16"}},
    {"16-ppn inter-node rendezvous",
     {{"--scenario", "pair-inter-node", "--sizes", "8193,65536,1048576", "--counts", "1,10",
       "--order", "both"},
      {"--scenario", "node-pairs", "--ppn", "16", "--sizes", "8193,65536,1048576", "--counts",
       "1,10", "--order", "both"}},
     neutral_path,
     {},
     "node-pairs",
     {},
     10,
     262144,
     Ordering::InOrder,
     {"--ppn", "16"}},
    {"4-Gemini contention line",
     {{"--scenario", "gemini-line", "--geminis", "4", "--sizes", "16384,262144,1048576",
       "--counts", "1,10", "--order", "both"}},
     "",  // chained from the previous case
     {"--geminis", "4"},
     "gemini-line",
     {},
     10,
     262144,
     Ordering::InOrder,
     {"--ppn", "16", "--geminis", "4"}},
  };

  std::string previous_fit;
  std::ostringstream detail;
  for (std::size_t k = 0; k < cases.size(); ++k)
  {
    const auto &c = cases[k];
    std::string csv = std::string(kSamplesHeader) + "\n";
    for (const auto &extra : c.synth_runs)
    {
      std::vector<std::string> args = {"synth", "--model", truth_path, "--noise", "0"};
      args.insert(args.end(), extra.begin(), extra.end());
      const auto r = run_cli(args);
      o.require(r.code == 0, c.name + ": synth failed: " + r.err);
      csv += strip_header(r.out);
    }
    const auto samples = dir.write("samples" + std::to_string(k) + ".csv", csv);
    const auto fitted = dir.path("fitted" + std::to_string(k) + ".json");
    std::vector<std::string> fit_args = {"fit", "--samples", samples, "--out", fitted, "--model",
                                         c.base.empty() ? previous_fit : c.base};
    fit_args.insert(fit_args.end(), c.fit_flags.begin(), c.fit_flags.end());
    const auto f = run_cli(fit_args);
    o.require(f.code == 0, c.name + ": fit failed: " + f.err);
    previous_fit = fitted;

    const auto sc = make_scenario(c.scenario, c.shape);
    const auto schedule = make_schedule(sc.pairs, c.n, c.size, c.order);
    const auto pattern = schedule_pattern(schedule, sc.layout.nprocs());
    const auto trace = dir.write("pattern" + std::to_string(k) + ".trace", save_pattern(pattern));
    const auto expected = predict_pattern(pattern, sc.layout, sc.topo, truth);

    std::vector<std::string> predict_args = {"predict", "--model", fitted, "--trace", trace};
    predict_args.insert(predict_args.end(), c.predict_flags.begin(), c.predict_flags.end());
    const auto p = run_cli(predict_args);
    o.require(p.code == 0, c.name + ": predict failed: " + p.err);
    if (p.code != 0)
    {
      continue;
    }
    const auto doc = nlohmann::json::parse(p.out);
    const double err = rel(doc["total"].get<double>(), expected.total);
    o.require(err <= 1e-6, c.name + ": total off by " + std::to_string(err));
    for (const char *part : {"transport", "queue", "contention"})
    {
      const double want = part[0] == 't'   ? expected.transport
                          : part[0] == 'q' ? expected.queue
                                           : expected.contention;
      const double got = doc[part].get<double>();
      o.require(want == 0.0 ? got == 0.0 : rel(got, want) <= 1e-6,
                c.name + ": " + part + " mismatch");
    }
    detail << (k ? "; " : "") << c.name << " rel err " << err;
  }
  if (o.pass)
  {
    o.detail = detail.str();
  }
  return o;
}

void check_breakdown(Outcome &o, const nlohmann::json &b, const std::string &where)
{
  const double t = b["transport"].get<double>();
  const double q = b["queue"].get<double>();
  const double c = b["contention"].get<double>();
  const double total = b["total"].get<double>();
  o.require(t >= 0.0 && q >= 0.0 && c >= 0.0 && total >= 0.0, where + ": negative component");
  o.require(total == t + q + c, where + ": total is not the sum of its parts");
}

Outcome breakdown_additivity()
{
  Outcome o;
  const std::string model = std::string(NODECOMM_DATA_DIR) + "/default_model.json";
  const std::string corpus = NODECOMM_TEST_DATA_DIR;
  std::vector<std::vector<std::string>> runs;
  std::vector<std::string> matrices;
  std::vector<std::string> traces;
  for (const auto &entry : std::filesystem::directory_iterator(corpus))
  {
    const auto ext = entry.path().extension();
    if (ext == ".mtx")
      matrices.push_back(entry.path().string());
    else if (ext == ".trace")
      traces.push_back(entry.path().string());
  }
  std::sort(matrices.begin(), matrices.end());
  std::sort(traces.begin(), traces.end());
  const std::string layout = corpus + "/roundrobin_64.layout";
  for (const auto &m : matrices)
  {
    for (const char *op : {"spmv", "spgemm"})
    {
      for (const char *nprocs : {"2", "8", "32", "64"})
      {
        for (const char *ppn : {"4", "16"})
        {
          runs.push_back({"--matrix", m, "--op", op, "--nprocs", nprocs, "--ppn", ppn});
        }
        runs.push_back({"--matrix", m, "--op", op, "--nprocs", nprocs, "--layout", layout});
      }
    }
  }
  for (const auto &t : traces)
  {
    runs.push_back({"--trace", t});
    runs.push_back({"--trace", t, "--ppn", "4", "--geminis", "27"});
    runs.push_back({"--trace", t, "--layout", layout});
  }
  std::vector<std::string> all_levels;
  for (const auto &t : traces)
  {
    all_levels.push_back("--trace");
    all_levels.push_back(t);
  }
  runs.push_back(all_levels);

  std::size_t outputs = 0;
  for (const auto &extra : runs)
  {
    std::vector<std::string> args = {"predict", "--model", model};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = run_cli(args);
    const std::string where = extra[1] + " " + (extra.size() > 3 ? extra[3] : "");
    o.require(r.code == 0, where + ": " + r.err);
    if (r.code != 0)
    {
      continue;
    }
    const auto doc = nlohmann::json::parse(r.out);
    for (const auto &level : doc["levels"])
    {
      check_breakdown(o, level, where);
    }
    if (doc["levels"].size() == 1)
    {
      check_breakdown(o, doc, where);
    }
    else
    {
      const auto t = doc["transport"].get<double>() + doc["queue"].get<double>() +
                     doc["contention"].get<double>();
      o.require(std::abs(doc["total"].get<double>() - t) <= 1e-15 * t, where + ": summed total");
    }
    ++outputs;
  }
  if (o.pass)
  {
    o.detail = std::to_string(outputs) + " predict outputs checked";
  }
  return o;
}

}  // namespace
}  // namespace nodecomm

int main()
{
  using namespace nodecomm;
  const std::vector<std::pair<const char *, Outcome (*)()>> criteria = {
    {"max-rate arithmetic and single-sender reduction", max_rate_arithmetic},
    {"max-rate equals postal below the injection limit", max_rate_reduction},
    {"queue search steps bounded by n and n(n+1)/2", queue_sandwich},
    {"average hops closed form and link bytes", hop_oracle},
    {"fit round-trips, noise-free and 5% noise", fit_round_trips},
    {"spmv and spgemm patterns equal set oracles", pattern_oracles},
    {"synth, fit, predict reproduce predictions", end_to_end},
    {"breakdowns additive and nonnegative on the corpus", breakdown_additivity},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i)
  {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try
    {
      o = criteria[i].second();
    }
    catch (const std::exception &e)
    {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
    std::printf("%s criterion %zu: %s [%.1fs] %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first, took.count(), o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
