#ifndef DELTAPATH_TESTS_SUPPORT_HPP
#define DELTAPATH_TESTS_SUPPORT_HPP

#include "deltapath/graph_model.hpp"
#include "deltapath/io.hpp"
#include "deltapath/oracle.hpp"
#include "deltapath/routing_core.hpp"
#include "deltapath/strategy.hpp"
#include "deltapath/workloads.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace deltapath::test {

// Under sd_utilization the edge weight equals the link utilization, so
// `link(a, b, w)` yields weight w.
inline Topology
weighted(std::initializer_list<NodeId> nodes, std::initializer_list<std::tuple<NodeId, NodeId, double>> links)
{
  Topology topo;
  for (auto n : nodes)
    topo.nodes.push_back({n, NodeLabel::Switch, {}});
  for (auto [a, b, w] : links) {
    LinkProperties p;
    p.utilization = w;
    topo.links.push_back({a, b, p});
  }
  return topo;
}

inline GraphStore
graph_of(const Topology& topo, const Strategy& s)
{
  return to_graph(topo, s.link_cost_fn());
}

inline Strategy
sd()
{
  return Strategy::builtin("sd_utilization");
}

// Triangle A=0, B=1, C=2 with A-B 1, B-C 1, A-C 3.
inline Topology
triangle()
{
  return weighted({0, 1, 2}, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 3.0}});
}

inline bool
close(double a, double b)
{
  if (a == b)
    return true;
  if (std::isinf(a) || std::isinf(b))
    return false;
  return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b));
}

/// First mismatch between the engine's established view and the oracle, or
/// an empty string when they agree on every pair (cost, length, next).
inline std::string
oracle_mismatch(const RoutingEngine& engine)
{
  auto expected = oracle::solve(engine.graph(), engine.strategy());
  std::ostringstream out;
  for (const auto& [key, e] : expected.entries()) {
    auto r = engine.lookup(key.first, key.second);
    if (!r) {
      out << "missing rule " << key.first << "->" << key.second;
      return out.str();
    }
    if (!close(r->p_cost, e.cost) || r->p_length != e.length || r->next != e.next) {
      out << "pair " << key.first << "->" << key.second << ": engine " << *r << " oracle cost="
          << e.cost << " length=" << e.length << " next=" << e.next;
      return out.str();
    }
  }
  if (engine.established_count() != expected.size()) {
    for (const auto& [key, r] : engine.established()) {
      if (expected.find(key.first, key.second) == nullptr) {
        out << "spurious rule " << r;
        return out.str();
      }
    }
  }
  return {};
}

/// Random topology events that keep weights integral and valid.
class EventGen
{
public:
  explicit EventGen(std::uint64_t seed)
    : m_rng(seed)
  {
  }

  std::size_t
  below(std::size_t n)
  {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(m_rng);
  }

  /// One event valid against `g`: link add/remove/update, occasionally a node
  /// add or removal. `next_id` supplies fresh node ids.
  TopologyEvent
  next(const GraphStore& g, NodeId& next_id, bool nodes = true)
  {
    std::vector<NodeId> ids;
    for (const auto& [id, rec] : g.nodes())
      ids.push_back(id);
    std::vector<EdgeKey> links;
    for (const auto& [key, entry] : g.edges()) {
      if (key.src < key.dst)
        links.push_back(key);
    }
    std::uniform_int_distribution<int> util(1, 100);
    for (;;) {
      auto roll = below(100);
      if (nodes && roll < 4) {
        return AddNode{next_id++, NodeLabel::Switch};
      }
      if (nodes && roll < 7 && ids.size() > 3) {
        return RemoveNode{ids[below(ids.size())]};
      }
      if (roll < 40 && ids.size() >= 2) {
        NodeId a = ids[below(ids.size())];
        NodeId b = ids[below(ids.size())];
        if (a == b)
          continue;
        LinkProperties p;
        p.utilization = util(m_rng);
        return AddLink{a, b, p};
      }
      if (links.empty())
        continue;
      const auto& k = links[below(links.size())];
      if (roll < 70)
        return RemoveLink{k.src, k.dst, k.w};
      return UpdateWeight{k.src, k.dst, k.w, std::nullopt, double(util(m_rng)), std::nullopt};
    }
  }

  std::mt19937_64&
  rng() noexcept
  {
    return m_rng;
  }

private:
  std::mt19937_64 m_rng;
};

/// Applies `ev` to a plain graph store the way the engine would.
inline void
apply_event(GraphStore& g, const TopologyEvent& ev, const Strategy& s)
{
  g.apply_deltas(ingest_event(g, ev, s.link_cost_fn()));
}

/// Same nodes and edge multiset; link properties that do not affect the
/// weight may differ.
inline bool
same_edges(const GraphStore& a, const GraphStore& b)
{
  if (a.edge_count() != b.edge_count() || a.node_count() != b.node_count())
    return false;
  for (const auto& [key, entry] : a.edges()) {
    if (b.multiplicity(key) != entry.multiplicity)
      return false;
  }
  for (const auto& [id, rec] : a.nodes()) {
    if (!b.has_node(id))
      return false;
  }
  return true;
}

/// Reference change batch between two established views, in engine order.
inline RuleDeltaBatch
diff_views(const EstablishedMap& before, const EstablishedMap& after)
{
  RuleDeltaBatch out;
  for (const auto& [key, r] : before) {
    auto it = after.find(key);
    if (it == after.end() || !it->second.same_route(r)) {
      out.push_back(r);
      out.back().delta = -1;
    }
  }
  for (const auto& [key, r] : after) {
    auto it = before.find(key);
    if (it == before.end() || !it->second.same_route(r)) {
      out.push_back(r);
      out.back().delta = 1;
    }
  }
  std::sort(out.begin(), out.end(), [](const ForwardingRule& a, const ForwardingRule& b) {
    return std::tie(a.src, a.dst, a.delta, a.next, a.p_length, a.p_cost) <
           std::tie(b.src, b.dst, b.delta, b.next, b.p_length, b.p_cost);
  });
  return out;
}

inline std::set<PairKey>
touched_pairs(const RuleDeltaBatch& batch)
{
  std::set<PairKey> out;
  for (const auto& r : batch)
    out.emplace(r.src, r.dst);
  return out;
}

} // namespace deltapath::test

#endif // DELTAPATH_TESTS_SUPPORT_HPP
