#include "runner.hpp"

#include "deltapath/error.hpp"
#include "deltapath/workloads.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

namespace deltapath::cli {

namespace {

using Clock = std::chrono::steady_clock;

double
micros_since(Clock::time_point start)
{
  return std::chrono::duration<double, std::micro>(Clock::now() - start).count();
}

double
median(std::vector<double> v)
{
  if (v.empty())
    return 0.0;
  std::sort(v.begin(), v.end());
  auto n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double
worst(const std::vector<double>& v)
{
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

// Rows share one column list; CSV writes it once as a header.
class Table
{
public:
  Table(std::ostream& out, MetricsFormat format, std::vector<std::string> columns)
    : m_out(out)
    , m_format(format)
    , m_columns(std::move(columns))
  {
    if (m_format == MetricsFormat::Csv) {
      for (std::size_t i = 0; i < m_columns.size(); ++i)
        m_out << (i ? "," : "") << m_columns[i];
      m_out << '\n';
    }
  }

  void
  row(const std::vector<nlohmann::json>& values)
  {
    if (m_format == MetricsFormat::Csv) {
      for (std::size_t i = 0; i < values.size(); ++i) {
        m_out << (i ? "," : "");
        if (values[i].is_string())
          m_out << values[i].get<std::string>();
        else
          m_out << values[i].dump();
      }
      m_out << '\n';
    }
    else {
      nlohmann::ordered_json obj;
      for (std::size_t i = 0; i < values.size(); ++i)
        obj[m_columns[i]] = values[i];
      m_out << obj.dump() << '\n';
    }
    m_out.flush();
  }

private:
  std::ostream& m_out;
  MetricsFormat m_format;
  std::vector<std::string> m_columns;
};

RoutingEngine
fresh_engine(const Topology& topo, const Strategy& s, unsigned workers)
{
  return RoutingEngine(to_graph(topo, s.link_cost_fn()), s, workers);
}

void
check(const RoutingEngine& engine, bool verify, std::uint64_t epoch)
{
  if (!verify)
    return;
  if (auto diff = first_divergence(engine))
    throw Error(Errc::VerifyMismatch, "epoch " + std::to_string(epoch) + ": " + *diff);
}

void
bench_failures(const BenchConfig& cfg, const Topology& topo, const Scenario& sc,
               const Strategy& s, std::ostream& out)
{
  auto script = gen_failure_events(topo, sc);
  std::vector<double> latencies;
  double changed = 0;
  for (const auto& epoch : script.epochs) {
    auto engine = fresh_engine(topo, s, cfg.run.workers);
    auto start = Clock::now();
    auto result = engine.step_epoch(epoch.events);
    latencies.push_back(micros_since(start));
    changed += static_cast<double>(result.changes.size());
    check(engine, cfg.run.verify, epoch.epoch);
  }
  Table t(out, cfg.run.format,
          {"scenario", "switches", "trials", "median_us", "worst_us", "mean_rules_changed"});
  t.row({std::string(to_string(sc.kind)), topo.nodes.size(), latencies.size(), median(latencies),
         worst(latencies), latencies.empty() ? 0.0 : changed / double(latencies.size())});
}

std::vector<std::uint32_t>
sizes(const BenchConfig& cfg, std::uint32_t default_max)
{
  if (cfg.batch_size > 0)
    return {cfg.batch_size};
  return power_of_two_sweep(1, cfg.max_batch > 0 ? cfg.max_batch : default_max);
}

void
bench_weight_updates(const BenchConfig& cfg, const Topology& topo, Scenario sc,
                     const Strategy& s, std::ostream& out)
{
  Table t(out, cfg.run.format,
          {"batch_size", "batches", "updates", "median_us", "worst_us", "updates_per_s"});
  for (auto size : sizes(cfg, 1024)) {
    sc.batch_size = size;
    auto script = gen_weight_update_batches(topo, sc);
    auto engine = fresh_engine(topo, s, cfg.run.workers);
    std::vector<double> latencies;
    std::size_t updates = 0;
    double total = 0;
    for (const auto& epoch : script.epochs) {
      auto start = Clock::now();
      engine.step_epoch(epoch.events);
      latencies.push_back(micros_since(start));
      total += latencies.back();
      updates += epoch.events.size();
      check(engine, cfg.run.verify, epoch.epoch);
    }
    t.row({size, latencies.size(), updates, median(latencies), worst(latencies),
           total > 0 ? double(updates) / (total * 1e-6) : 0.0});
    spdlog::info("batch size {} done", size);
  }
}

void
bench_path_requests(const BenchConfig& cfg, const Topology& topo, Scenario sc,
                    const Strategy& s, std::ostream& out)
{
  auto engine = fresh_engine(topo, s, cfg.run.workers);
  Table t(out, cfg.run.format,
          {"batch_size", "batches", "median_us", "worst_us", "paths_per_s", "unreachable"});
  for (auto size : sizes(cfg, 8192)) {
    sc.batch_size = size;
    auto script = gen_path_requests(topo, sc);
    std::vector<double> latencies;
    std::size_t paths = 0, missing = 0, hops = 0;
    double total = 0;
    for (const auto& epoch : script.epochs) {
      auto start = Clock::now();
      for (const auto& req : epoch.requests) {
        try {
          hops += retrieve(engine, req.src, req.dst).length;
        }
        catch (const Error& e) {
          if (e.code() != Errc::Unreachable)
            throw;
          ++missing;
        }
      }
      latencies.push_back(micros_since(start));
      total += latencies.back();
      paths += epoch.requests.size();
    }
    spdlog::debug("batch size {}: {} hops retrieved", size, hops);
    t.row({size, latencies.size(), median(latencies), worst(latencies),
           total > 0 ? double(paths) / (total * 1e-6) : 0.0, missing});
  }
}

void
bench_flows(const BenchConfig& cfg, const Topology& topo, const Scenario& sc,
            const Strategy& s, std::ostream& out)
{
  auto script = gen_flows(topo, sc);
  Runner runner(topo, s, cfg.run.workers);
  std::ostringstream sink;
  std::vector<double> fixpoint, retrieval;
  for (const auto& epoch : script.epochs) {
    auto m = runner.step(epoch, sink, cfg.run.verify);
    if (m.requests > 0)
      retrieval.push_back(m.retrieval_us);
    else
      fixpoint.push_back(m.fixpoint_us);
  }
  Table t(out, cfg.run.format,
          {"flows", "median_update_us", "worst_update_us", "median_retrieval_us",
           "worst_retrieval_us"});
  t.row({retrieval.size(), median(fixpoint), worst(fixpoint), median(retrieval),
         worst(retrieval)});
}

} // namespace

int
bench(const BenchConfig& cfg, std::ostream& out_default)
{
  auto topo = read_topology_file(cfg.run.topology);
  auto strategy = Strategy::builtin(cfg.run.strategy);
  Scenario sc;
  sc.kind = parse_scenario_kind(cfg.scenario);
  sc.trials = cfg.trials;
  sc.seed = cfg.run.seed;

  std::ofstream file;
  std::ostream* out = &out_default;
  if (!cfg.run.out.empty() && cfg.run.out != "-") {
    file.open(cfg.run.out);
    if (!file)
      throw Error(Errc::ParseError, "cannot write " + cfg.run.out);
    out = &file;
  }

  switch (sc.kind) {
  case ScenarioKind::LinkFailure:
  case ScenarioKind::SwitchFailure: bench_failures(cfg, topo, sc, strategy, *out); break;
  case ScenarioKind::WeightUpdateBatches:
    bench_weight_updates(cfg, topo, sc, strategy, *out);
    break;
  case ScenarioKind::PathRequestBatches:
    bench_path_requests(cfg, topo, sc, strategy, *out);
    break;
  case ScenarioKind::Flows: bench_flows(cfg, topo, sc, strategy, *out); break;
  }
  return 0;
}

} // namespace deltapath::cli
