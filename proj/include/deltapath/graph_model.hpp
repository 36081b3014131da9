#ifndef DELTAPATH_GRAPH_MODEL_HPP
#define DELTAPATH_GRAPH_MODEL_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace deltapath {

using NodeId = std::uint32_t;

enum class NodeLabel { Switch, Server, Firewall, Host };

std::string_view to_string(NodeLabel label) noexcept;
NodeLabel parse_node_label(std::string_view text);

struct NodeRecord
{
  NodeId id = 0;
  NodeLabel label = NodeLabel::Switch;
  std::map<std::string, std::string> properties;

  friend bool operator==(const NodeRecord&, const NodeRecord&) = default;
};

/// Physical link attributes. Utilization is a percentage of capacity.
struct LinkProperties
{
  double capacity = 100.0;
  double utilization = 0.0;
  double delay = 0.0;

  /// Throws Errc::InvalidLink when a field is outside its domain.
  void validate() const;

  double
  free_bandwidth() const noexcept
  {
    return capacity * (1.0 - utilization / 100.0);
  }

  friend bool operator==(const LinkProperties&, const LinkProperties&) = default;
};

/// Identity of a directed edge for delta aggregation. Properties are carried
/// alongside but are not part of the identity.
struct EdgeKey
{
  NodeId src = 0;
  NodeId dst = 0;
  double w = 0.0;

  friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
  friend bool
  operator<(const EdgeKey& a, const EdgeKey& b) noexcept
  {
    if (a.src != b.src)
      return a.src < b.src;
    if (a.dst != b.dst)
      return a.dst < b.dst;
    return a.w < b.w;
  }
};

/// A directed weighted edge with a signed multiplicity change.
struct EdgeRecord
{
  NodeId src = 0;
  NodeId dst = 0;
  double w = 0.0;
  LinkProperties props;
  std::int64_t delta = 1;

  EdgeKey
  key() const noexcept
  {
    return {src, dst, w};
  }

  friend bool operator==(const EdgeRecord&, const EdgeRecord&) = default;
};

using LinkCostFn = std::function<double(const LinkProperties&)>;

struct AddLink
{
  NodeId a = 0;
  NodeId b = 0;
  LinkProperties props;
};

struct RemoveLink
{
  NodeId a = 0;
  NodeId b = 0;
  /// When absent the unique stored weight for (a, b) is used.
  std::optional<double> w;
};

struct AddNode
{
  NodeId id = 0;
  NodeLabel label = NodeLabel::Switch;
};

struct RemoveNode
{
  NodeId id = 0;
};

/// Replaces the properties of an existing link; only the fields that are set
/// change. The link is retracted at its old weight and re-added at the new one.
struct UpdateWeight
{
  NodeId a = 0;
  NodeId b = 0;
  std::optional<double> old_w;
  std::optional<double> capacity;
  std::optional<double> utilization;
  std::optional<double> delay;
};

using TopologyEvent = std::variant<AddLink, RemoveLink, AddNode, RemoveNode, UpdateWeight>;

struct EventBatch
{
  std::uint64_t epoch = 0;
  std::vector<TopologyEvent> events;
};

/// Delta-encoded property graph: live nodes plus a multiset of directed edges.
/// Every undirected link is held as two directed entries with equal
/// multiplicity; entries whose multiplicity reaches zero are dropped.
class GraphStore
{
public:
  struct EdgeEntry
  {
    std::int64_t multiplicity = 0;
    LinkProperties props;
  };

  using EdgeMap = std::map<EdgeKey, EdgeEntry>;

  class EdgeRange
  {
  public:
    EdgeRange(EdgeMap::const_iterator first, EdgeMap::const_iterator last)
      : m_first(first)
      , m_last(last)
    {
    }

    EdgeMap::const_iterator begin() const { return m_first; }
    EdgeMap::const_iterator end() const { return m_last; }
    bool empty() const { return m_first == m_last; }

  private:
    EdgeMap::const_iterator m_first;
    EdgeMap::const_iterator m_last;
  };

  bool
  has_node(NodeId id) const
  {
    return m_nodes.contains(id);
  }

  const NodeRecord* node(NodeId id) const;

  const std::map<NodeId, NodeRecord>&
  nodes() const noexcept
  {
    return m_nodes;
  }

  std::size_t
  node_count() const noexcept
  {
    return m_nodes.size();
  }

  void add_node(NodeRecord record);
  void erase_node(NodeId id);

  const EdgeMap&
  edges() const noexcept
  {
    return m_edges;
  }

  /// Number of directed edge keys (parallel links count once).
  std::size_t
  edge_count() const noexcept
  {
    return m_edges.size();
  }

  std::int64_t multiplicity(const EdgeKey& key) const;
  const LinkProperties* properties(const EdgeKey& key) const;

  /// Directed entries leaving `src`, ordered by (dst, w).
  EdgeRange out_edges(NodeId src) const;

  /// Stored weights between a and b (either direction is equivalent).
  std::vector<double> weights_between(NodeId a, NodeId b) const;

  /// Sums multiplicities per key and drops keys reaching zero. Returns the
  /// net non-zero change per key. Atomic: on error the store is unchanged.
  std::vector<EdgeRecord> apply_deltas(std::span<const EdgeRecord> deltas);

  /// Every (a,b,w) entry has an (b,a,w) twin of equal multiplicity.
  bool is_symmetric() const;

  friend bool operator==(const GraphStore& a, const GraphStore& b);

private:
  std::map<NodeId, NodeRecord> m_nodes;
  EdgeMap m_edges;
};

/// Translates one topology event into directed edge deltas. Node additions
/// and removals take effect on `store` immediately; edge records must be
/// applied with GraphStore::apply_deltas.
std::vector<EdgeRecord> ingest_event(GraphStore& store, const TopologyEvent& ev,
                                     const LinkCostFn& link_cost);

/// Independent copy of the store.
inline GraphStore
fork(const GraphStore& store)
{
  return store;
}

/// Resolves the stored weight of link (a, b), optionally near `hint`.
double resolve_weight(const GraphStore& store, NodeId a, NodeId b,
                      std::optional<double> hint);

} // namespace deltapath

#endif // DELTAPATH_GRAPH_MODEL_HPP
