#include "deltapath/graph_model.hpp"
#include "deltapath/error.hpp"

#include <cmath>
#include <limits>

namespace deltapath {

std::string_view
to_string(NodeLabel label) noexcept
{
  switch (label) {
  case NodeLabel::Switch: return "switch";
  case NodeLabel::Server: return "server";
  case NodeLabel::Firewall: return "firewall";
  case NodeLabel::Host: return "host";
  }
  return "switch";
}

NodeLabel
parse_node_label(std::string_view text)
{
  if (text == "switch")
    return NodeLabel::Switch;
  if (text == "server")
    return NodeLabel::Server;
  if (text == "firewall")
    return NodeLabel::Firewall;
  if (text == "host")
    return NodeLabel::Host;
  throw Error(Errc::ParseError, "unknown node label '" + std::string(text) + "'");
}

void
LinkProperties::validate() const
{
  if (!(capacity > 0.0) || !std::isfinite(capacity))
    throw Error(Errc::InvalidLink, "capacity must be positive");
  if (!(utilization >= 0.0 && utilization <= 100.0))
    throw Error(Errc::InvalidLink, "utilization must lie in [0,100]");
  if (!(delay >= 0.0) || !std::isfinite(delay))
    throw Error(Errc::InvalidLink, "delay must be non-negative");
}

const NodeRecord*
GraphStore::node(NodeId id) const
{
  auto it = m_nodes.find(id);
  return it == m_nodes.end() ? nullptr : &it->second;
}

void
GraphStore::add_node(NodeRecord record)
{
  auto id = record.id;
  if (!m_nodes.emplace(id, std::move(record)).second)
    throw Error(Errc::DuplicateNode, "node " + std::to_string(id) + " already exists");
}

void
GraphStore::erase_node(NodeId id)
{
  if (m_nodes.erase(id) == 0)
    throw Error(Errc::UnknownNode, "node " + std::to_string(id));
}

std::int64_t
GraphStore::multiplicity(const EdgeKey& key) const
{
  auto it = m_edges.find(key);
  return it == m_edges.end() ? 0 : it->second.multiplicity;
}

const LinkProperties*
GraphStore::properties(const EdgeKey& key) const
{
  auto it = m_edges.find(key);
  return it == m_edges.end() ? nullptr : &it->second.props;
}

GraphStore::EdgeRange
GraphStore::out_edges(NodeId src) const
{
  constexpr double lowest = -std::numeric_limits<double>::infinity();
  auto first = m_edges.lower_bound(EdgeKey{src, 0, lowest});
  auto last = src == std::numeric_limits<NodeId>::max()
                ? m_edges.end()
                : m_edges.lower_bound(EdgeKey{src + 1, 0, lowest});
  return {first, last};
}

std::vector<double>
GraphStore::weights_between(NodeId a, NodeId b) const
{
  constexpr double lowest = -std::numeric_limits<double>::infinity();
  std::vector<double> out;
  for (auto it = m_edges.lower_bound(EdgeKey{a, b, lowest});
       it != m_edges.end() && it->first.src == a && it->first.dst == b; ++it)
    out.push_back(it->first.w);
  return out;
}

std::vector<EdgeRecord>
GraphStore::apply_deltas(std::span<const EdgeRecord> deltas)
{
  struct Pending
  {
    std::int64_t delta = 0;
    std::optional<LinkProperties> props;
  };
  std::map<EdgeKey, Pending> net;
  for (const auto& rec : deltas) {
    auto& p = net[rec.key()];
    p.delta += rec.delta;
    if (rec.delta > 0)
      p.props = rec.props;
  }

  for (const auto& [key, p] : net) {
    if (multiplicity(key) + p.delta < 0)
      throw Error(Errc::NegativeMultiplicity,
                  "edge (" + std::to_string(key.src) + "," + std::to_string(key.dst) +
                    ") would drop below zero");
  }

  std::vector<EdgeRecord> changes;
  for (auto& [key, p] : net) {
    auto it = m_edges.find(key);
    if (p.delta == 0) {
      if (it != m_edges.end() && p.props)
        it->second.props = *p.props;
      continue;
    }
    if (it == m_edges.end())
      it = m_edges.emplace(key, EdgeEntry{0, p.props.value_or(LinkProperties{})}).first;
    else if (p.props)
      it->second.props = *p.props;
    it->second.multiplicity += p.delta;
    changes.push_back({key.src, key.dst, key.w, it->second.props, p.delta});
    if (it->second.multiplicity == 0)
      m_edges.erase(it);
  }
  return changes;
}

bool
GraphStore::is_symmetric() const
{
  for (const auto& [key, entry] : m_edges) {
    if (entry.multiplicity <= 0)
      return false;
    if (multiplicity(EdgeKey{key.dst, key.src, key.w}) != entry.multiplicity)
      return false;
  }
  return true;
}

bool
operator==(const GraphStore& a, const GraphStore& b)
{
  if (a.m_nodes != b.m_nodes || a.m_edges.size() != b.m_edges.size())
    return false;
  auto it = b.m_edges.begin();
  for (const auto& [key, entry] : a.m_edges) {
    if (!(it->first == key) || it->second.multiplicity != entry.multiplicity ||
        !(it->second.props == entry.props))
      return false;
    ++it;
  }
  return true;
}

double
resolve_weight(const GraphStore& store, NodeId a, NodeId b, std::optional<double> hint)
{
  auto weights = store.weights_between(a, b);
  auto link_name = "(" + std::to_string(a) + "," + std::to_string(b) + ")";
  if (weights.empty())
    throw Error(Errc::UnknownLink, "no link " + link_name);
  if (!hint) {
    if (weights.size() > 1)
      throw Error(Errc::AmbiguousLink, "link " + link_name + " has several weights");
    return weights.front();
  }
  for (double w : weights) {
    if (w == *hint || std::abs(w - *hint) <= 1e-9 * std::max(1.0, std::abs(w)))
      return w;
  }
  throw Error(Errc::UnknownLink, "no link " + link_name + " with that weight");
}

namespace {

void
require_node(const GraphStore& store, NodeId id)
{
  if (!store.has_node(id))
    throw Error(Errc::UnknownNode, "node " + std::to_string(id));
}

void
emit_pair(std::vector<EdgeRecord>& out, NodeId a, NodeId b, double w,
          const LinkProperties& props, std::int64_t delta)
{
  out.push_back({a, b, w, props, delta});
  out.push_back({b, a, w, props, delta});
}

} // namespace

std::vector<EdgeRecord>
ingest_event(GraphStore& store, const TopologyEvent& ev, const LinkCostFn& link_cost)
{
  std::vector<EdgeRecord> out;

  auto link_weight = [&](const LinkProperties& props) {
    props.validate();
    double w = link_cost(props);
    if (std::isnan(w))
      throw Error(Errc::InvalidWeight, "link cost is NaN");
    return w;
  };

  std::visit(
    [&](const auto& e) {
      using T = std::decay_t<decltype(e)>;
      if constexpr (std::is_same_v<T, AddLink>) {
        require_node(store, e.a);
        require_node(store, e.b);
        if (e.a == e.b)
          throw Error(Errc::InvalidLink, "self loop on node " + std::to_string(e.a));
        emit_pair(out, e.a, e.b, link_weight(e.props), e.props, +1);
      }
      else if constexpr (std::is_same_v<T, RemoveLink>) {
        require_node(store, e.a);
        require_node(store, e.b);
        double w = resolve_weight(store, e.a, e.b, e.w);
        emit_pair(out, e.a, e.b, w, *store.properties({e.a, e.b, w}), -1);
      }
      else if constexpr (std::is_same_v<T, UpdateWeight>) {
        require_node(store, e.a);
        require_node(store, e.b);
        double old_w = resolve_weight(store, e.a, e.b, e.old_w);
        LinkProperties props = *store.properties({e.a, e.b, old_w});
        emit_pair(out, e.a, e.b, old_w, props, -1);
        if (e.capacity)
          props.capacity = *e.capacity;
        if (e.utilization)
          props.utilization = *e.utilization;
        if (e.delay)
          props.delay = *e.delay;
        emit_pair(out, e.a, e.b, link_weight(props), props, +1);
      }
      else if constexpr (std::is_same_v<T, AddNode>) {
        store.add_node(NodeRecord{e.id, e.label, {}});
      }
      else if constexpr (std::is_same_v<T, RemoveNode>) {
        require_node(store, e.id);
        for (const auto& [key, entry] : store.out_edges(e.id)) {
          for (std::int64_t i = 0; i < entry.multiplicity; ++i)
            emit_pair(out, key.src, key.dst, key.w, entry.props, -1);
        }
        store.erase_node(e.id);
      }
    },
    ev);
  return out;
}

} // namespace deltapath
