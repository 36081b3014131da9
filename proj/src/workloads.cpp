#include "deltapath/workloads.hpp"
#include "deltapath/error.hpp"
#include "deltapath/oracle.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

namespace deltapath {

namespace {

using Rng = std::mt19937_64;

std::size_t
pick(Rng& rng, std::size_t n)
{
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

Topology
switches(std::size_t n)
{
  Topology topo;
  for (std::size_t i = 0; i < n; ++i)
    topo.nodes.push_back({static_cast<NodeId>(i), NodeLabel::Switch, {}});
  return topo;
}

bool
connected(std::size_t n, const std::vector<std::set<std::size_t>>& adj)
{
  if (n == 0)
    return true;
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    auto v = stack.back();
    stack.pop_back();
    for (auto u : adj[v]) {
      if (!seen[u]) {
        seen[u] = true;
        ++count;
        stack.push_back(u);
      }
    }
  }
  return count == n;
}

// Random simple graph with the given port counts: connect random non-adjacent
// pairs with free ports; when stuck, splice an existing link to absorb the
// remaining ports.
std::optional<std::vector<std::set<std::size_t>>>
jellyfish_attempt(const std::vector<unsigned>& ports, Rng& rng)
{
  std::size_t n = ports.size();
  std::vector<std::set<std::size_t>> adj(n);
  std::vector<unsigned> free(ports);

  auto link = [&](std::size_t a, std::size_t b) {
    adj[a].insert(b);
    adj[b].insert(a);
    --free[a];
    --free[b];
  };
  auto unlink = [&](std::size_t a, std::size_t b) {
    adj[a].erase(b);
    adj[b].erase(a);
    ++free[a];
    ++free[b];
  };

  for (std::size_t guard = 0; guard < 50 * n * n + 1000; ++guard) {
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < n; ++i) {
      if (free[i] > 0)
        open.push_back(i);
    }
    if (open.empty())
      return adj;

    bool linked = false;
    for (int tries = 0; tries < 32 && open.size() > 1; ++tries) {
      auto a = open[pick(rng, open.size())];
      auto b = open[pick(rng, open.size())];
      if (a != b && !adj[a].contains(b)) {
        link(a, b);
        linked = true;
        break;
      }
    }
    if (linked)
      continue;

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < open.size(); ++i) {
      for (std::size_t j = i + 1; j < open.size(); ++j) {
        if (!adj[open[i]].contains(open[j]))
          pairs.emplace_back(open[i], open[j]);
      }
    }
    if (!pairs.empty()) {
      auto [a, b] = pairs[pick(rng, pairs.size())];
      link(a, b);
      continue;
    }

    std::vector<std::pair<std::size_t, std::size_t>> existing;
    for (std::size_t x = 0; x < n; ++x) {
      for (auto y : adj[x]) {
        if (x < y)
          existing.emplace_back(x, y);
      }
    }
    if (existing.empty())
      return std::nullopt;

    auto u = open[pick(rng, open.size())];
    std::size_t v = u;
    if (free[u] < 2) {
      // Two nodes with one free port each that are already adjacent.
      for (auto o : open) {
        if (o != u)
          v = o;
      }
      if (v == u)
        return std::nullopt;
    }
    bool spliced = false;
    for (int tries = 0; tries < 64 && !spliced; ++tries) {
      auto [x, y] = existing[pick(rng, existing.size())];
      if (pick(rng, 2) == 1)
        std::swap(x, y);
      if (x == u || y == u || x == v || y == v)
        continue;
      if (adj[u].contains(x) || adj[v].contains(y))
        continue;
      unlink(x, y);
      link(u, x);
      link(v, y);
      spliced = true;
    }
    if (!spliced)
      return std::nullopt;
  }
  return std::nullopt;
}

Topology
jellyfish_from_ports(const std::vector<unsigned>& ports, std::uint64_t seed, const WeightPlan& plan)
{
  Rng rng(seed);
  for (int attempt = 0; attempt < 200; ++attempt) {
    auto adj = jellyfish_attempt(ports, rng);
    if (!adj || !connected(ports.size(), *adj))
      continue;
    Topology topo = switches(ports.size());
    for (std::size_t a = 0; a < adj->size(); ++a) {
      for (auto b : (*adj)[a]) {
        if (a < b)
          topo.links.push_back({static_cast<NodeId>(a), static_cast<NodeId>(b), {}});
      }
    }
    apply_plan(topo, plan);
    return topo;
  }
  throw Error(Errc::Infeasible, "could not build a simple connected jellyfish");
}

std::set<std::pair<NodeId, NodeId>>
link_pairs(const Topology& topo)
{
  std::set<std::pair<NodeId, NodeId>> out;
  for (const auto& l : topo.links)
    out.insert(std::minmax(l.a, l.b));
  return out;
}

std::vector<NodeId>
node_ids(const Topology& topo)
{
  std::vector<NodeId> ids;
  for (const auto& n : topo.nodes)
    ids.push_back(n.id);
  return ids;
}

} // namespace

void
apply_plan(Topology& topo, const WeightPlan& plan)
{
  Rng rng(plan.seed);
  std::uniform_int_distribution<int> util(1, 100);
  for (auto& l : topo.links) {
    l.props.capacity = 100.0;
    l.props.delay = 1.0;
    l.props.utilization = plan.kind == PlanKind::HopCount ? 1.0 : util(rng);
  }
}

Topology
gen_fattree(unsigned k, const WeightPlan& plan, bool hosts)
{
  if (k < 2 || k % 2 != 0)
    throw Error(Errc::OddArity, "fat-tree arity must be even and >= 2, got " + std::to_string(k));
  unsigned half = k / 2;
  unsigned cores = half * half;
  Topology topo = switches(cores + k * k);
  auto agg = [&](unsigned pod, unsigned i) { return static_cast<NodeId>(cores + pod * k + i); };
  auto edge = [&](unsigned pod, unsigned i) {
    return static_cast<NodeId>(cores + pod * k + half + i);
  };
  for (unsigned pod = 0; pod < k; ++pod) {
    for (unsigned e = 0; e < half; ++e) {
      for (unsigned a = 0; a < half; ++a)
        topo.links.push_back({edge(pod, e), agg(pod, a), {}});
      if (hosts)
        topo.hosts[edge(pod, e)] = half;
    }
    for (unsigned a = 0; a < half; ++a) {
      for (unsigned c = 0; c < half; ++c)
        topo.links.push_back({agg(pod, a), static_cast<NodeId>(a * half + c), {}});
    }
  }
  apply_plan(topo, plan);
  return topo;
}

Topology
gen_jellyfish(std::size_t n, unsigned r, std::uint64_t seed, const WeightPlan& plan)
{
  if (n < 2 || r == 0 || r >= n || (n * r) % 2 != 0)
    throw Error(Errc::Infeasible, "jellyfish needs n*r even and 0 < r < n");
  return jellyfish_from_ports(std::vector<unsigned>(n, r), seed, plan);
}

Topology
gen_jellyfish_links(std::size_t n, std::size_t links, std::uint64_t seed, const WeightPlan& plan)
{
  if (n < 2 || links < n - 1 || links > n * (n - 1) / 2)
    throw Error(Errc::Infeasible, "link count out of range");
  std::vector<unsigned> ports(n, static_cast<unsigned>(2 * links / n));
  std::size_t extra = 2 * links - ports.front() * n;
  for (std::size_t i = 0; i < extra; ++i)
    ++ports[i];
  Rng shuffle_rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::shuffle(ports.begin(), ports.end(), shuffle_rng);
  return jellyfish_from_ports(ports, seed, plan);
}

Topology
gen_random_connected(std::size_t n, unsigned min_degree, unsigned max_degree,
                     std::uint64_t seed, const WeightPlan& plan)
{
  Rng rng(seed);
  Topology topo = switches(n);
  std::vector<std::set<std::size_t>> adj(n);
  for (std::size_t i = 1; i < n; ++i) {
    std::size_t j = pick(rng, i);
    for (int tries = 0; tries < 8 && adj[j].size() >= max_degree; ++tries)
      j = pick(rng, i);
    adj[i].insert(j);
    adj[j].insert(i);
  }
  std::uniform_int_distribution<unsigned> degree(min_degree, max_degree);
  for (std::size_t i = 0; i < n; ++i) {
    unsigned target = degree(rng);
    for (int tries = 0; tries < 64 && adj[i].size() < target; ++tries) {
      std::size_t j = pick(rng, n);
      if (j != i && !adj[i].contains(j) && adj[j].size() < max_degree) {
        adj[i].insert(j);
        adj[j].insert(i);
      }
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (auto b : adj[a]) {
      if (a < b)
        topo.links.push_back({static_cast<NodeId>(a), static_cast<NodeId>(b), {}});
    }
  }
  apply_plan(topo, plan);
  return topo;
}

ScenarioKind
parse_scenario_kind(std::string_view text)
{
  if (text == "link-failure")
    return ScenarioKind::LinkFailure;
  if (text == "switch-failure")
    return ScenarioKind::SwitchFailure;
  if (text == "weight-updates")
    return ScenarioKind::WeightUpdateBatches;
  if (text == "path-requests")
    return ScenarioKind::PathRequestBatches;
  if (text == "flows")
    return ScenarioKind::Flows;
  throw Error(Errc::ParseError, "unknown scenario '" + std::string(text) + "'");
}

std::string_view
to_string(ScenarioKind kind) noexcept
{
  switch (kind) {
  case ScenarioKind::LinkFailure: return "link-failure";
  case ScenarioKind::SwitchFailure: return "switch-failure";
  case ScenarioKind::WeightUpdateBatches: return "weight-updates";
  case ScenarioKind::PathRequestBatches: return "path-requests";
  case ScenarioKind::Flows: return "flows";
  }
  return "link-failure";
}

EventScript
gen_failure_events(const Topology& topo, const Scenario& scenario)
{
  Rng rng(scenario.seed);
  EventScript script;
  auto pairs = link_pairs(topo);
  std::vector<std::pair<NodeId, NodeId>> links(pairs.begin(), pairs.end());
  auto ids = node_ids(topo);
  for (std::uint32_t t = 0; t < scenario.trials; ++t) {
    ScriptEpoch e;
    e.epoch = t + 1;
    e.reset_before = t > 0;
    if (scenario.kind == ScenarioKind::SwitchFailure) {
      NodeId victim = ids[pick(rng, ids.size())];
      for (auto [a, b] : links) {
        if (a == victim || b == victim)
          e.events.push_back(RemoveLink{a, b, std::nullopt});
      }
      e.events.push_back(RemoveNode{victim});
    }
    else {
      auto [a, b] = links[pick(rng, links.size())];
      e.events.push_back(RemoveLink{a, b, std::nullopt});
    }
    script.epochs.push_back(std::move(e));
  }
  return script;
}

namespace {

// Adds `amount` utilization along optimal paths, tracking the evolving graph.
struct UtilizationTracker
{
  Strategy strategy;
  GraphStore graph;

  UtilizationTracker(const Topology& topo, const std::string& strategy_name)
    : strategy(Strategy::builtin(strategy_name))
    , graph(to_graph(topo, strategy.link_cost_fn()))
  {
  }

  std::optional<std::vector<NodeId>>
  path(NodeId s, NodeId t) const
  {
    return oracle::shortest_path(graph, strategy, s, t);
  }

  UpdateWeight
  bump(NodeId a, NodeId b, double amount)
  {
    double w = resolve_weight(graph, a, b, std::nullopt);
    double util = std::clamp(graph.properties({a, b, w})->utilization + amount, 0.0, 100.0);
    UpdateWeight ev{a, b, std::nullopt, std::nullopt, util, std::nullopt};
    graph.apply_deltas(ingest_event(graph, ev, strategy.link_cost_fn()));
    return ev;
  }
};

std::pair<NodeId, NodeId>
random_pair(Rng& rng, const std::vector<NodeId>& ids)
{
  NodeId s = ids[pick(rng, ids.size())];
  NodeId t = s;
  while (t == s && ids.size() > 1)
    t = ids[pick(rng, ids.size())];
  return {s, t};
}

} // namespace

EventScript
gen_weight_update_batches(const Topology& topo, const Scenario& scenario)
{
  Rng rng(scenario.seed);
  UtilizationTracker tracker(topo, scenario.path_strategy);
  auto ids = node_ids(topo);
  EventScript script;
  for (std::uint32_t t = 0; t < scenario.trials; ++t) {
    ScriptEpoch e;
    e.epoch = t + 1;
    for (std::uint32_t p = 0; p < scenario.batch_size; ++p) {
      auto [s, d] = random_pair(rng, ids);
      auto hops = tracker.path(s, d);
      if (!hops)
        continue;
      for (std::size_t i = 1; i < hops->size(); ++i)
        e.events.push_back(tracker.bump((*hops)[i - 1], (*hops)[i], scenario.update_step));
    }
    script.epochs.push_back(std::move(e));
  }
  return script;
}

EventScript
gen_path_requests(const Topology& topo, const Scenario& scenario)
{
  Rng rng(scenario.seed);
  auto ids = node_ids(topo);
  EventScript script;
  std::uint64_t flow = 0;
  for (std::uint32_t t = 0; t < scenario.trials; ++t) {
    ScriptEpoch e;
    e.epoch = t + 1;
    for (std::uint32_t i = 0; i < scenario.batch_size; ++i) {
      auto [s, d] = random_pair(rng, ids);
      e.requests.push_back({flow++, s, d});
    }
    script.epochs.push_back(std::move(e));
  }
  return script;
}

EventScript
gen_flows(const Topology& topo, const Scenario& scenario)
{
  Rng rng(scenario.seed);
  std::exponential_distribution<double> size(1.0 / scenario.mean_flow_size);
  UtilizationTracker tracker(topo, scenario.path_strategy);
  auto ids = node_ids(topo);
  EventScript script;
  std::uint64_t epoch = 0;
  for (std::uint32_t f = 0; f < scenario.trials; ++f) {
    auto [s, d] = random_pair(rng, ids);
    ScriptEpoch request;
    request.epoch = ++epoch;
    request.requests.push_back({f, s, d});
    script.epochs.push_back(std::move(request));

    auto hops = tracker.path(s, d);
    if (!hops)
      continue;
    ScriptEpoch reserve;
    reserve.epoch = ++epoch;
    double amount = std::round(size(rng) * 100.0) / 100.0;
    for (std::size_t i = 1; i < hops->size(); ++i)
      reserve.events.push_back(tracker.bump((*hops)[i - 1], (*hops)[i], amount));
    script.epochs.push_back(std::move(reserve));
  }
  return script;
}

EventScript
gen_scenario(const Topology& topo, const Scenario& scenario)
{
  switch (scenario.kind) {
  case ScenarioKind::LinkFailure:
  case ScenarioKind::SwitchFailure: return gen_failure_events(topo, scenario);
  case ScenarioKind::WeightUpdateBatches: return gen_weight_update_batches(topo, scenario);
  case ScenarioKind::PathRequestBatches: return gen_path_requests(topo, scenario);
  case ScenarioKind::Flows: return gen_flows(topo, scenario);
  }
  return {};
}

std::vector<std::uint32_t>
power_of_two_sweep(std::uint32_t from, std::uint32_t to)
{
  std::vector<std::uint32_t> out;
  for (std::uint64_t v = std::max<std::uint32_t>(from, 1); v <= to; v *= 2)
    out.push_back(static_cast<std::uint32_t>(v));
  return out;
}

} // namespace deltapath
