#include "runner.hpp"

#include "deltapath/error.hpp"
#include "deltapath/oracle.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace deltapath::cli {

namespace {

using Clock = std::chrono::steady_clock;

double
micros_since(Clock::time_point start)
{
  return std::chrono::duration<double, std::micro>(Clock::now() - start).count();
}

bool
same_cost(double a, double b)
{
  if (a == b)
    return true;
  if (std::isinf(a) || std::isinf(b))
    return false;
  return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b));
}

std::ostream&
open_or(std::ofstream& file, const std::string& path, std::ostream& fallback)
{
  if (path.empty() || path == "-")
    return fallback;
  file.open(path);
  if (!file)
    throw Error(Errc::ParseError, "cannot write " + path);
  return file;
}

} // namespace

void
init_logging()
{
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("DELTAPATH_LOG"))
    spdlog::set_level(spdlog::level::from_str(env));
  spdlog::set_pattern("[%l] %v");
}

void
MetricsWriter::write(const MetricRecord& m)
{
  if (m_format == MetricsFormat::Csv) {
    if (!m_header) {
      *m_out << "epoch,events,rules_changed,fixpoint_us,rounds,requests,retrieval_us\n";
      m_header = true;
    }
    *m_out << m.epoch << ',' << m.events << ',' << m.rules_changed << ',' << m.fixpoint_us << ','
           << m.rounds << ',' << m.requests << ',' << m.retrieval_us << '\n';
  }
  else {
    nlohmann::ordered_json row{{"epoch", m.epoch},         {"events", m.events},
                       {"rules_changed", m.rules_changed}, {"fixpoint_us", m.fixpoint_us},
                       {"rounds", m.rounds},       {"requests", m.requests},
                       {"retrieval_us", m.retrieval_us}};
    *m_out << row.dump() << '\n';
  }
  m_out->flush();
}

std::optional<std::string>
first_divergence(const RoutingEngine& engine)
{
  auto expected = oracle::solve(engine.graph(), engine.strategy());
  auto actual = engine.established();
  auto describe = [](PairKey k) {
    return "(" + std::to_string(k.first) + "," + std::to_string(k.second) + ")";
  };
  for (const auto& [key, e] : expected.entries()) {
    auto it = actual.find(key);
    if (it == actual.end())
      return describe(key) + " has no rule; oracle cost " + format_cost(e.cost);
    const auto& r = it->second;
    if (!same_cost(r.p_cost, e.cost) || r.p_length != e.length || r.next != e.next) {
      std::ostringstream msg;
      msg << describe(key) << " engine next=" << r.next << " cost=" << format_cost(r.p_cost)
          << " length=" << r.p_length << "; oracle next=" << e.next
          << " cost=" << format_cost(e.cost) << " length=" << e.length;
      return msg.str();
    }
  }
  for (const auto& [key, r] : actual) {
    if (expected.find(key.first, key.second) == nullptr)
      return describe(key) + " has a rule but is unreachable";
  }
  return std::nullopt;
}

Runner::Runner(Topology topology, Strategy strategy, unsigned workers)
  : m_topology(std::move(topology))
  , m_strategy(strategy)
  , m_workers(workers)
{
  reset();
}

void
Runner::reset()
{
  auto start = Clock::now();
  m_policies.reset();
  m_engine = std::make_unique<RoutingEngine>(to_graph(m_topology, m_strategy.link_cost_fn()),
                                             m_strategy, m_workers);
  m_initial = {};
  m_initial.fixpoint_us = micros_since(start);
  m_initial.rules_changed = m_engine->established_count();
  m_initial.rounds = m_engine->last_rounds();
  m_policies = std::make_unique<PolicyEngine>(*m_engine);
  for (const auto& [id, text] : m_policy_texts) {
    try {
      m_policies->add(parse_policy(text, id));
    }
    catch (const Error& e) {
      spdlog::warn("policy {} dropped on reset: {}", id, e.what());
    }
  }
  spdlog::info("initialized {} nodes, {} rules in {:.1f} us", m_engine->node_count(),
               m_initial.rules_changed, m_initial.fixpoint_us);
}

void
Runner::warn_duplicates(const ScriptEpoch& epoch) const
{
  for (std::size_t i = 0; i < epoch.events.size(); ++i) {
    if (const auto* add = std::get_if<AddLink>(&epoch.events[i])) {
      if (!m_engine->graph().weights_between(add->a, add->b).empty())
        spdlog::warn("line {}: link {}-{} already exists; adding a parallel link",
                     i < epoch.event_lines.size() ? epoch.event_lines[i] : 0, add->a, add->b);
    }
  }
}

void
Runner::verify_epoch(std::uint64_t epoch) const
{
  if (auto diff = first_divergence(*m_engine))
    throw Error(Errc::VerifyMismatch, "epoch " + std::to_string(epoch) + ": " + *diff);
}

void
Runner::handle_policy(const PolicyCommand& cmd, std::ostream& answers)
{
  std::erase_if(m_policy_texts, [&](const auto& p) { return p.first == cmd.id; });
  if (!cmd.add) {
    m_policies->remove(cmd.id);
    answers << "policy=" << cmd.id << " removed\n";
    return;
  }
  m_policies->add(parse_policy(cmd.text, cmd.id, &m_engine->graph()));
  m_policy_texts.emplace_back(cmd.id, cmd.text);
  try {
    auto r = m_policies->evaluate(cmd.id);
    answers << "policy=" << cmd.id << ' ' << r.annotation << ' ' << format_path(r.primary);
    if (r.secondary)
      answers << " secondary " << format_path(*r.secondary);
    if (r.revisits)
      answers << " revisits";
    answers << '\n';
  }
  catch (const Error& e) {
    if (e.code() != Errc::Unreachable && e.code() != Errc::NoBackup)
      throw;
    answers << "policy=" << cmd.id << " error=" << to_string(e.code()) << '\n';
  }
}

MetricRecord
Runner::step(const ScriptEpoch& epoch, std::ostream& answers, bool verify)
{
  if (epoch.reset_before)
    reset();
  warn_duplicates(epoch);

  MetricRecord m;
  m.epoch = epoch.epoch;
  m.events = epoch.events.size();

  auto start = Clock::now();
  auto result = m_engine->step_epoch(epoch.events);
  m.fixpoint_us = micros_since(start);
  m.rules_changed = result.changes.size();
  m.rounds = result.rounds;
  m_policies->on_epoch(result);
  m_last_changes = std::move(result.changes);
  spdlog::debug("epoch {}: {} events, {} rule changes, {} rounds", m.epoch, m.events,
                m.rules_changed, m.rounds);

  if (verify)
    verify_epoch(epoch.epoch);

  for (const auto& cmd : epoch.policies)
    handle_policy(cmd, answers);

  m.requests = epoch.requests.size();
  std::vector<std::string> lines;
  lines.reserve(epoch.requests.size());
  auto req_start = Clock::now();
  for (const auto& req : epoch.requests) {
    try {
      lines.push_back("flow=" + std::to_string(req.flow_id) + ' ' +
                      format_path(retrieve(*m_engine, req.src, req.dst)));
    }
    catch (const Error& e) {
      if (e.code() != Errc::Unreachable)
        throw;
      lines.push_back("flow=" + std::to_string(req.flow_id) + " unreachable");
    }
  }
  if (!epoch.requests.empty())
    m.retrieval_us = micros_since(req_start) / static_cast<double>(epoch.requests.size());
  for (const auto& l : lines)
    answers << l << '\n';
  return m;
}

int
run(const RunConfig& config, std::ostream& answers)
{
  auto strategy = Strategy::builtin(config.strategy);
  EventScript script;
  if (!config.events.empty())
    script = read_events_file(config.events);
  Runner runner(read_topology_file(config.topology), strategy, config.workers);

  std::ofstream metrics_file, rules_file;
  MetricsWriter metrics(open_or(metrics_file, config.out, std::cout), config.format);
  std::ostream* rules = nullptr;
  if (!config.rules_out.empty()) {
    rules = &open_or(rules_file, config.rules_out, std::cout);
    *rules << "epoch,src,dst,next,p_cost,p_length,delta\n";
  }

  if (config.verify)
    if (auto diff = first_divergence(runner.engine()))
      throw Error(Errc::VerifyMismatch, "epoch 0: " + *diff);
  metrics.write(runner.initial());

  for (const auto& epoch : script.epochs) {
    metrics.write(runner.step(epoch, answers, config.verify));
    if (rules != nullptr)
      write_rule_changes(*rules, epoch.epoch, runner.last_changes());
  }
  return 0;
}

int
query(const RunConfig& config, NodeId src, NodeId dst, std::ostream& out)
{
  Runner runner(read_topology_file(config.topology), Strategy::builtin(config.strategy),
                config.workers);
  if (!config.events.empty()) {
    std::ostringstream sink;
    for (const auto& epoch : read_events_file(config.events).epochs)
      runner.step(epoch, sink, config.verify);
  }
  out << format_path(retrieve(runner.engine(), src, dst)) << '\n';
  return 0;
}

} // namespace deltapath::cli
