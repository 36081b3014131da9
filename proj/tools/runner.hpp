#ifndef DELTAPATH_TOOLS_RUNNER_HPP
#define DELTAPATH_TOOLS_RUNNER_HPP

#include "deltapath/io.hpp"
#include "deltapath/policy_engine.hpp"
#include "deltapath/routing_core.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace deltapath::cli {

enum class MetricsFormat { Csv, Jsonl };

struct RunConfig
{
  std::string topology;
  std::string strategy = "hop_count";
  unsigned workers = 1;
  std::string events;
  std::string out;
  std::string rules_out;
  MetricsFormat format = MetricsFormat::Csv;
  bool verify = false;
  std::uint64_t seed = 0;
};

struct MetricRecord
{
  std::uint64_t epoch = 0;
  std::size_t events = 0;
  std::size_t rules_changed = 0;
  double fixpoint_us = 0.0;
  std::size_t rounds = 0;
  std::size_t requests = 0;
  /// Mean per-request retrieval latency; zero when the epoch has no requests.
  double retrieval_us = 0.0;
};

/// Writes one metric row per call; CSV gets a header before the first row.
class MetricsWriter
{
public:
  MetricsWriter(std::ostream& out, MetricsFormat format)
    : m_out(&out)
    , m_format(format)
  {
  }

  void write(const MetricRecord& m);

private:
  std::ostream* m_out;
  MetricsFormat m_format;
  bool m_header = false;
};

/// Replays event epochs against an engine, answering requests and policies.
class Runner
{
public:
  Runner(Topology topology, Strategy strategy, unsigned workers);

  /// Epoch-0 record for the initial fixpoint.
  const MetricRecord&
  initial() const noexcept
  {
    return m_initial;
  }

  /// Runs one script epoch. Request answers and policy results go to
  /// `answers`. With `verify`, throws Errc::VerifyMismatch on the first pair
  /// that disagrees with the oracle.
  MetricRecord step(const ScriptEpoch& epoch, std::ostream& answers, bool verify);

  const RuleDeltaBatch&
  last_changes() const noexcept
  {
    return m_last_changes;
  }

  const RoutingEngine&
  engine() const noexcept
  {
    return *m_engine;
  }

  /// Rebuilds the engine on the initial topology; policies are re-registered.
  void reset();

private:
  void verify_epoch(std::uint64_t epoch) const;
  void handle_policy(const PolicyCommand& cmd, std::ostream& answers);
  void warn_duplicates(const ScriptEpoch& epoch) const;

  Topology m_topology;
  Strategy m_strategy;
  unsigned m_workers;
  std::unique_ptr<RoutingEngine> m_engine;
  std::unique_ptr<PolicyEngine> m_policies;
  std::vector<std::pair<std::string, std::string>> m_policy_texts;
  MetricRecord m_initial;
  RuleDeltaBatch m_last_changes;
};

/// Loads the topology, replays the event file and writes metrics. Returns the
/// process exit code.
int run(const RunConfig& config, std::ostream& answers);

/// Replays `events_path` (may be empty) and prints the path src -> dst.
int query(const RunConfig& config, NodeId src, NodeId dst, std::ostream& out);

/// First pair where the engine disagrees with the from-scratch oracle.
std::optional<std::string> first_divergence(const RoutingEngine& engine);

struct BenchConfig
{
  RunConfig run;
  std::string scenario = "link-failure";
  std::uint32_t trials = 100;
  /// Fixed batch size; 0 sweeps powers of two.
  std::uint32_t batch_size = 0;
  std::uint32_t max_batch = 0;
};

/// Runs a scenario with resets between trials and writes a summary table.
int bench(const BenchConfig& config, std::ostream& out);

void init_logging();

} // namespace deltapath::cli

#endif // DELTAPATH_TOOLS_RUNNER_HPP
