#ifndef DELTAPATH_PATH_RETRIEVAL_HPP
#define DELTAPATH_PATH_RETRIEVAL_HPP

#include "deltapath/error.hpp"
#include "deltapath/forwarding_rule.hpp"
#include "deltapath/routing_core.hpp"

#include <concepts>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace deltapath {

/// Anything that answers "which established rule does src use for dst".
template <class V>
concept RuleView = requires(const V& view, NodeId n) {
  { view.lookup(n, n) } -> std::same_as<std::optional<ForwardingRule>>;
  { view.node_count() } -> std::convertible_to<std::size_t>;
};

/// Frozen copy of an engine's established rules.
class RuleSnapshot
{
public:
  RuleSnapshot() = default;
  explicit RuleSnapshot(const RoutingEngine& engine);

  std::optional<ForwardingRule> lookup(NodeId src, NodeId dst) const;

  std::size_t
  node_count() const noexcept
  {
    return m_nodes;
  }

  std::size_t
  size() const noexcept
  {
    return m_rules.size();
  }

private:
  std::unordered_map<std::uint64_t, ForwardingRule> m_rules;
  std::size_t m_nodes = 0;
};

struct PathRequest
{
  std::uint64_t flow_id = 0;
  NodeId src = 0;
  NodeId dst = 0;
};

struct Path
{
  std::vector<NodeId> hops;
  double cost = 0.0;
  std::uint32_t length = 0;

  friend bool operator==(const Path&, const Path&) = default;
};

/// Follows next pointers from `src` until `dst`. Throws Errc::Unreachable when
/// a rule is missing and Errc::CycleDetected after more than node_count steps.
template <RuleView V>
Path
retrieve(const V& view, NodeId src, NodeId dst)
{
  auto first = view.lookup(src, dst);
  if (!first)
    throw Error(Errc::Unreachable,
                "no rule from " + std::to_string(src) + " to " + std::to_string(dst));
  Path path;
  path.cost = first->p_cost;
  path.hops.push_back(src);
  std::size_t bound = view.node_count();
  NodeId at = src;
  std::optional<ForwardingRule> rule = first;
  while (at != dst) {
    if (path.hops.size() > bound)
      throw Error(Errc::CycleDetected,
                  "pointer chase " + std::to_string(src) + "->" + std::to_string(dst));
    if (!rule) {
      rule = view.lookup(at, dst);
      if (!rule)
        throw Error(Errc::Unreachable,
                    "no rule from " + std::to_string(at) + " to " + std::to_string(dst));
    }
    at = rule->next;
    path.hops.push_back(at);
    rule.reset();
  }
  path.length = static_cast<std::uint32_t>(path.hops.size() - 1);
  return path;
}

/// Consecutive hop pairs of `p`.
std::vector<std::pair<NodeId, NodeId>> path_links(const Path& p);

/// `path=<n0>-<n1>-... cost=<c> length=<k>`
std::string format_path(const Path& p);

std::string format_cost(double cost);

} // namespace deltapath

#endif // DELTAPATH_PATH_RETRIEVAL_HPP
