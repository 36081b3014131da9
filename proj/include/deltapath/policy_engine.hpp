#ifndef DELTAPATH_POLICY_ENGINE_HPP
#define DELTAPATH_POLICY_ENGINE_HPP

#include "deltapath/path_retrieval.hpp"
#include "deltapath/routing_core.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace deltapath {

struct Waypoints
{
  std::vector<NodeId> nodes;
  friend bool operator==(const Waypoints&, const Waypoints&) = default;
};

struct NotNodes
{
  std::set<NodeId> nodes;
  friend bool operator==(const NotNodes&, const NotNodes&) = default;
};

enum class PathPolicyKind { Backup, TwoWayMultipath, RedundantPaths };

struct PathConstraint
{
  PathPolicyKind kind = PathPolicyKind::Backup;
  friend bool operator==(const PathConstraint&, const PathConstraint&) = default;
};

struct Policy
{
  std::string id;
  NodeId origin = 0;
  NodeId target = 0;
  std::variant<Waypoints, NotNodes, PathConstraint> body;

  friend bool operator==(const Policy&, const Policy&) = default;
};

/// Parses `S : c1 : ... : ck : T`. Each constraint is a node id (waypoint),
/// `!id` (excluded node) or one of `backup`, `multipath`, `redundant`.
/// Waypoints and exclusions cannot be mixed. When `known` is given every
/// referenced node must exist in it. Throws Errc::SyntaxError / UnknownNode.
Policy parse_policy(std::string_view text, std::string id = {},
                    const GraphStore* known = nullptr);

std::string to_string(const Policy& policy);

/// Chains k+1 retrievals S->c1->...->ck->T over `view` and joins them at the
/// shared junction nodes. `revisits` is set when the result repeats a node.
template <RuleView V>
Path
eval_waypoints(const Policy& policy, const V& view, bool* revisits = nullptr)
{
  const auto& wp = std::get<Waypoints>(policy.body);
  std::vector<NodeId> stops;
  stops.push_back(policy.origin);
  stops.insert(stops.end(), wp.nodes.begin(), wp.nodes.end());
  stops.push_back(policy.target);

  Path out;
  out.hops.push_back(policy.origin);
  bool additive = true;
  for (std::size_t i = 0; i + 1 < stops.size(); ++i) {
    Path seg = retrieve(view, stops[i], stops[i + 1]);
    out.hops.insert(out.hops.end(), seg.hops.begin() + 1, seg.hops.end());
    if (i == 0) {
      out.cost = seg.cost;
      auto self = view.lookup(stops[0], stops[0]);
      additive = !self || self->p_cost == 0.0;
    }
    else {
      out.cost = additive ? out.cost + seg.cost : std::min(out.cost, seg.cost);
    }
  }
  out.length = static_cast<std::uint32_t>(out.hops.size() - 1);
  if (revisits != nullptr) {
    std::set<NodeId> seen(out.hops.begin(), out.hops.end());
    *revisits = seen.size() != out.hops.size();
  }
  return out;
}

struct PolicyResult
{
  std::string policy_id;
  Path primary;
  /// Link-disjoint second path for backup / multipath / redundant policies.
  std::optional<Path> secondary;
  /// "waypoint", "not", "backup", "split" (multipath) or "duplicate" (redundant).
  std::string annotation;
  bool revisits = false;
};

/// Evaluates policies over a base routing engine. NOT-constraint and
/// path-constraint policies run on forks: copies of the base engine with the
/// excluded nodes or links removed, kept current by on_epoch. Policies with
/// identical exclusions share one fork.
class PolicyEngine
{
public:
  explicit PolicyEngine(const RoutingEngine& base)
    : m_base(&base)
  {
  }

  /// Registers (or replaces) a policy. Throws Errc::UnknownNode for nodes
  /// absent from the base graph.
  void add(Policy policy);
  void remove(std::string_view id);
  bool contains(std::string_view id) const;
  const Policy& policy(std::string_view id) const;
  std::size_t policy_count() const noexcept { return m_policies.size(); }

  PolicyResult evaluate(std::string_view id);

  /// Path avoiding the excluded nodes; Errc::Unreachable if none exists.
  Path eval_not(const Policy& policy);

  /// Primary path on the base rules and a link-disjoint backup computed on a
  /// fork without the primary's links; Errc::NoBackup if none exists.
  std::pair<Path, Path> eval_backup(const Policy& policy);

  /// Feeds the base epoch's net graph delta to every fork, minus records that
  /// touch the fork's exclusions, and re-runs each fork's fixpoint.
  void on_epoch(const EpochResult& base_epoch);

  std::size_t fork_count() const noexcept { return m_forks.size(); }

  /// Fork engine currently used by a NOT / backup policy, if any.
  const RoutingEngine* fork_of(std::string_view id) const;

  /// Graph a fork should hold: the base graph minus the policy's exclusions.
  GraphStore expected_fork_graph(std::string_view id) const;

private:
  struct Exclusion
  {
    std::set<NodeId> nodes;
    std::set<std::pair<NodeId, NodeId>> links; // normalized a < b

    bool touches(NodeId a, NodeId b) const;
    friend auto operator<=>(const Exclusion&, const Exclusion&) = default;
  };

  struct Fork
  {
    RoutingEngine engine;
    std::set<std::string> users;
  };

  struct Entry
  {
    Policy policy;
    std::optional<Exclusion> fork_key;
  };

  const RoutingEngine& acquire(const std::string& user, const Exclusion& ex);
  void release(Entry& entry);
  static GraphStore strip(const GraphStore& g, const Exclusion& ex);

  const RoutingEngine* m_base;
  std::map<std::string, Entry, std::less<>> m_policies;
  std::map<Exclusion, Fork> m_forks;
};

} // namespace deltapath

#endif // DELTAPATH_POLICY_ENGINE_HPP
