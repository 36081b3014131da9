#include "runner.hpp"

#include "deltapath/error.hpp"
#include "deltapath/workloads.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>

using namespace deltapath;

namespace {

struct GenOptions
{
  unsigned k = 4;
  std::size_t n = 16;
  unsigned r = 4;
  std::size_t links = 0;
  std::string plan = "hopcount";
  std::uint64_t seed = 0;
  bool hosts = false;
  std::string out = "-";

  std::string kind = "link-failure";
  std::string topology;
  std::uint32_t trials = 1;
  std::uint32_t batch_size = 1;
  double step = 5.0;
  double mean_flow = 1.0;
  std::string path_strategy = "sd_utilization";
};

WeightPlan
plan_of(const GenOptions& o)
{
  if (o.plan == "hopcount" || o.plan == "hop_count")
    return {PlanKind::HopCount, o.seed};
  if (o.plan == "uniform")
    return {PlanKind::Uniform, o.seed};
  throw Error(Errc::ParseError, "unknown plan '" + o.plan + "' (hopcount|uniform)");
}

template <class Fn>
void
with_output(const std::string& path, Fn&& fn)
{
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out)
    throw Error(Errc::ParseError, "cannot write " + path);
  fn(out);
}

void
add_run_options(CLI::App& cmd, cli::RunConfig& cfg)
{
  cmd.add_option("--topology", cfg.topology, "topology file")->required()->check(CLI::ExistingFile);
  cmd.add_option("--strategy", cfg.strategy,
                 "hop_count | sd_free_bw | sd_utilization | shortest_widest");
  cmd.add_option("--workers", cfg.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd.add_option("--seed", cfg.seed, "random seed");
  cmd.add_flag("--verify", cfg.verify, "cross-check every epoch against the oracle");
}

} // namespace

int
main(int argc, char** argv)
{
  cli::init_logging();
  CLI::App app{"deltapath: incremental all-pairs QoS routing"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate topologies and event scenarios");
  gen_cmd->require_subcommand(1);
  auto* fattree = gen_cmd->add_subcommand("fattree", "k-ary fat-tree");
  fattree->add_option("--k", gen.k, "even arity")->required();
  fattree->add_flag("--hosts", gen.hosts, "record k/2 hosts per edge switch");
  auto* jelly = gen_cmd->add_subcommand("jellyfish", "random regular graph");
  jelly->add_option("--n", gen.n, "switches")->required();
  jelly->add_option("--r", gen.r, "network ports per switch");
  jelly->add_option("--links", gen.links, "target link count instead of --r");
  for (auto* c : {fattree, jelly}) {
    c->add_option("--plan", gen.plan, "hopcount | uniform");
    c->add_option("--seed", gen.seed, "random seed");
    c->add_option("-o,--out", gen.out, "output file");
  }
  auto* scen = gen_cmd->add_subcommand("scenario", "event file for a benchmark scenario");
  scen->add_option("--kind", gen.kind,
                   "link-failure | switch-failure | weight-updates | path-requests | flows");
  scen->add_option("--topology", gen.topology, "topology file")->required()->check(CLI::ExistingFile);
  scen->add_option("--trials", gen.trials, "trials / batches / flows");
  scen->add_option("--batch-size", gen.batch_size, "paths or requests per epoch");
  scen->add_option("--step", gen.step, "utilization added per updated link");
  scen->add_option("--mean-flow", gen.mean_flow, "mean synthetic flow size");
  scen->add_option("--path-strategy", gen.path_strategy, "strategy choosing updated paths");
  scen->add_option("--seed", gen.seed, "random seed");
  scen->add_option("-o,--out", gen.out, "output file");

  cli::RunConfig run;
  std::string format = "csv";
  auto* run_cmd = app.add_subcommand("run", "replay an event file and record metrics");
  add_run_options(*run_cmd, run);
  run_cmd->add_option("--events", run.events, "event file")->check(CLI::ExistingFile);
  run_cmd->add_option("--out", run.out, "metrics file (default stdout)");
  run_cmd->add_option("--rules-out", run.rules_out, "CSV of per-epoch rule changes");
  run_cmd->add_option("--format", format, "csv | jsonl")->check(CLI::IsMember({"csv", "jsonl"}));

  cli::BenchConfig bench;
  auto* bench_cmd = app.add_subcommand("bench", "run a benchmark scenario with resets");
  add_run_options(*bench_cmd, bench.run);
  bench_cmd->add_option("--scenario", bench.scenario,
                        "link-failure | switch-failure | weight-updates | path-requests | flows");
  bench_cmd->add_option("--trials", bench.trials, "trials, or batches per batch size");
  bench_cmd->add_option("--batch-size", bench.batch_size, "fixed batch size (default: sweep)");
  bench_cmd->add_option("--max-batch", bench.max_batch, "largest batch in the sweep");
  bench_cmd->add_option("--out", bench.run.out, "summary file (default stdout)");
  bench_cmd->add_option("--format", format, "csv | jsonl")->check(CLI::IsMember({"csv", "jsonl"}));

  cli::RunConfig qcfg;
  NodeId qsrc = 0, qdst = 0;
  auto* query_cmd = app.add_subcommand("query", "print the established path src -> dst");
  add_run_options(*query_cmd, qcfg);
  query_cmd->add_option("src", qsrc)->required();
  query_cmd->add_option("dst", qdst)->required();
  query_cmd->add_option("--events", qcfg.events, "event file replayed first")
    ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  auto fmt = format == "jsonl" ? cli::MetricsFormat::Jsonl : cli::MetricsFormat::Csv;
  run.format = fmt;
  bench.run.format = fmt;

  try {
    if (fattree->parsed()) {
      auto topo = gen_fattree(gen.k, plan_of(gen), gen.hosts);
      with_output(gen.out, [&](std::ostream& o) { write_topology(o, topo); });
    }
    else if (jelly->parsed()) {
      auto topo = gen.links > 0 ? gen_jellyfish_links(gen.n, gen.links, gen.seed, plan_of(gen))
                                : gen_jellyfish(gen.n, gen.r, gen.seed, plan_of(gen));
      with_output(gen.out, [&](std::ostream& o) { write_topology(o, topo); });
    }
    else if (scen->parsed()) {
      Scenario sc;
      sc.kind = parse_scenario_kind(gen.kind);
      sc.trials = gen.trials;
      sc.batch_size = gen.batch_size;
      sc.seed = gen.seed;
      sc.update_step = gen.step;
      sc.mean_flow_size = gen.mean_flow;
      sc.path_strategy = gen.path_strategy;
      auto script = gen_scenario(read_topology_file(gen.topology), sc);
      with_output(gen.out, [&](std::ostream& o) { write_events(o, script); });
    }
    else if (run_cmd->parsed()) {
      return cli::run(run, std::cout);
    }
    else if (bench_cmd->parsed()) {
      return cli::bench(bench, std::cout);
    }
    else if (query_cmd->parsed()) {
      return cli::query(qcfg, qsrc, qdst, std::cout);
    }
  }
  catch (const Error& e) {
    spdlog::error("{}", e.what());
    return e.code() == Errc::VerifyMismatch ? 3 : 1;
  }
  catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
