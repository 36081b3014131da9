#ifndef DELTAPATH_ORACLE_HPP
#define DELTAPATH_ORACLE_HPP

// From-scratch reference solvers. Nothing here depends on the incremental
// engine; only the strategy's tie-break order is shared.

#include "deltapath/graph_model.hpp"
#include "deltapath/strategy.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace deltapath::oracle {

struct OracleEntry
{
  double cost = 0.0;
  std::uint32_t length = 0;
  /// Every first hop of an optimal, length-minimal path; sorted by id.
  std::vector<NodeId> witnesses;
  /// Tie-broken next hop.
  NodeId next = 0;
};

class OracleResult
{
public:
  using Entry = std::pair<std::pair<NodeId, NodeId>, OracleEntry>;

  const OracleEntry* find(NodeId s, NodeId t) const;

  /// Sorted by (s, t).
  const std::vector<Entry>&
  entries() const noexcept
  {
    return m_entries;
  }

  std::size_t
  size() const noexcept
  {
    return m_entries.size();
  }

  /// Entries may be added in any order; call finish() before reading.
  void add(NodeId s, NodeId t, OracleEntry entry);
  void finish();

private:
  std::vector<Entry> m_entries;
};

/// Per-destination Dijkstra over (cost, hops). Throws Errc::InvalidWeight on
/// a non-positive weight.
OracleResult apsp_additive(const GraphStore& graph, const Strategy& strategy);

/// Enumerates all simple paths. Throws Errc::TooLarge above `max_nodes`.
OracleResult widest_paths_bruteforce(const GraphStore& graph, const Strategy& strategy,
                                     std::size_t max_nodes = 14);

/// Dispatches on the strategy.
OracleResult solve(const GraphStore& graph, const Strategy& strategy);

/// Pairs whose optimum (cost, length, tie-broken next) differs, including
/// pairs that became reachable or unreachable.
std::set<std::pair<NodeId, NodeId>> affected_pairs(const GraphStore& before,
                                                   const GraphStore& after,
                                                   const Strategy& strategy);

/// One optimal node sequence s..t under an additive strategy, following the
/// tie-broken next hops; nullopt when unreachable.
std::optional<std::vector<NodeId>> shortest_path(const GraphStore& graph,
                                                 const Strategy& strategy, NodeId s, NodeId t);

/// Unweighted hop distances (for tests and topology checks).
std::map<std::pair<NodeId, NodeId>, std::uint32_t> bfs_distances(const GraphStore& graph);

} // namespace deltapath::oracle

#endif // DELTAPATH_ORACLE_HPP
