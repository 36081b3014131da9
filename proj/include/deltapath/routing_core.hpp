#ifndef DELTAPATH_ROUTING_CORE_HPP
#define DELTAPATH_ROUTING_CORE_HPP

#include "deltapath/forwarding_rule.hpp"
#include "deltapath/graph_model.hpp"
#include "deltapath/strategy.hpp"

#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace deltapath {

/// Net change to a graph over one epoch.
struct GraphDelta
{
  std::vector<NodeRecord> added_nodes;
  std::vector<NodeId> removed_nodes;
  std::vector<EdgeRecord> edges;

  bool
  empty() const noexcept
  {
    return added_nodes.empty() && removed_nodes.empty() && edges.empty();
  }
};

struct EpochResult
{
  /// Net established-rule changes relative to the previous epoch.
  RuleDeltaBatch changes;
  GraphDelta graph_delta;
  std::size_t rounds = 0;
  bool rebuilt = false;
};

/// Joins rule `r` with edge `l` (r.src == l.src): l.dst reaches r.dst via
/// r.src. Returns nothing when the derived path would exceed `max_length` hops.
std::optional<ForwardingRule> derive(const ForwardingRule& r, const EdgeRecord& l,
                                     const Strategy& strategy, std::uint32_t max_length);

using PairKey = std::pair<NodeId, NodeId>;
using EstablishedMap = std::map<PairKey, ForwardingRule>;

/// Incremental all-pairs routing state.
///
/// Holds the graph G and the rule store R. Candidates per (src,dst) are a
/// multiset maintained as G joined with the propagated labels of each group;
/// the f_s-best candidate is the established rule. Each epoch folds edge
/// deltas and then rule deltas round by round until no group's propagated
/// labels change.
///
/// Groups are sharded by rule src across `workers`; a round runs the shards
/// concurrently and exchanges derived rules between rounds, so the result does
/// not depend on the worker count.
class RoutingEngine
{
public:
  /// Builds the fixpoint for `graph`. Throws Errc::InvalidWeight when an edge
  /// weight lies outside the strategy's domain.
  RoutingEngine(GraphStore graph, Strategy strategy, unsigned workers = 1);

  /// Ingests one batch of topology events and runs it to a fixpoint. A batch
  /// that fails validation leaves the engine unchanged.
  EpochResult step_epoch(std::span<const TopologyEvent> events);

  /// Same as step_epoch for an already-resolved delta: nodes are added, edges
  /// applied, then nodes removed.
  EpochResult step_delta(const GraphDelta& delta);

  std::optional<ForwardingRule> lookup(NodeId src, NodeId dst) const;

  std::size_t
  node_count() const noexcept
  {
    return m_graph.node_count();
  }

  EstablishedMap established() const;
  std::size_t established_count() const;
  std::size_t candidate_count() const;

  const GraphStore&
  graph() const noexcept
  {
    return m_graph;
  }

  const Strategy&
  strategy() const noexcept
  {
    return m_strategy;
  }

  unsigned
  workers() const noexcept
  {
    return static_cast<unsigned>(m_shards.size());
  }

  void set_workers(unsigned workers);

  /// Longest derivable path in hops.
  std::uint32_t
  length_cap() const noexcept
  {
    return m_capacity - 1;
  }

  std::size_t
  round_limit() const noexcept
  {
    return 2 * static_cast<std::size_t>(m_capacity) + 8;
  }

  /// Rounds used by the last fixpoint computation.
  std::size_t
  last_rounds() const noexcept
  {
    return m_last_rounds;
  }

  /// Full consistency audit (slow); returns one message per violation.
  std::vector<std::string> check_invariants() const;

private:
  struct Candidate
  {
    double cost;
    std::uint32_t len;
    NodeId next;
    std::int64_t mult;
  };

  struct Label
  {
    double cost;
    std::uint32_t len;

    friend bool operator==(const Label&, const Label&) = default;
  };

  struct Group
  {
    std::vector<Candidate> cands;
    std::vector<Label> labels;
  };

  struct Message
  {
    NodeId src;
    NodeId dst;
    NodeId next;
    std::uint32_t len;
    double cost;
    std::int64_t delta;
  };

  struct Shard
  {
    std::unordered_map<NodeId, std::unordered_map<NodeId, Group>> groups;
    std::vector<std::vector<Message>> outbox;
    std::vector<Message> inbox;
    std::unordered_map<std::uint64_t, std::optional<ForwardingRule>> before;
  };

  unsigned
  owner(NodeId src) const noexcept
  {
    return src % static_cast<unsigned>(m_shards.size());
  }

  void validate_weights(std::span<const EdgeRecord> edges) const;
  void reset_shards(unsigned workers);
  void rebuild();
  void seed_tautologies(std::span<const NodeId> nodes, std::int64_t delta);
  void seed_edge_deltas(std::span<const EdgeRecord> edges);
  void run_to_fixpoint();
  void process_inbox(Shard& shard);
  void apply_candidate(Group& g, const Message& m) const;
  std::vector<Label> compute_labels(const Group& g) const;
  void emit(Shard& shard, NodeId src, NodeId dst, const Label& label, std::int64_t sign) const;
  EpochResult propagate(GraphDelta delta);
  RuleDeltaBatch collect_changes();
  const Group* find_group(NodeId src, NodeId dst) const;
  ForwardingRule front_rule(NodeId src, NodeId dst, const Group& g) const;

  template <class Fn>
  void for_each_shard(Fn&& fn);

  GraphStore m_graph;
  Strategy m_strategy;
  std::uint32_t m_capacity = 2;
  std::vector<Shard> m_shards;
  bool m_tracking = false;
  std::size_t m_last_rounds = 0;
};

} // namespace deltapath

#endif // DELTAPATH_ROUTING_CORE_HPP
