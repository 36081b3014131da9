#include "deltapath/path_retrieval.hpp"

#include <cmath>
#include <cstdio>

namespace deltapath {

RuleSnapshot::RuleSnapshot(const RoutingEngine& engine)
  : m_nodes(engine.node_count())
{
  for (const auto& [key, rule] : engine.established())
    m_rules.emplace((static_cast<std::uint64_t>(key.first) << 32) | key.second, rule);
}

std::optional<ForwardingRule>
RuleSnapshot::lookup(NodeId src, NodeId dst) const
{
  auto it = m_rules.find((static_cast<std::uint64_t>(src) << 32) | dst);
  if (it == m_rules.end())
    return std::nullopt;
  return it->second;
}

std::vector<std::pair<NodeId, NodeId>>
path_links(const Path& p)
{
  std::vector<std::pair<NodeId, NodeId>> links;
  for (std::size_t i = 1; i < p.hops.size(); ++i)
    links.emplace_back(p.hops[i - 1], p.hops[i]);
  return links;
}

std::string
format_cost(double cost)
{
  if (std::isinf(cost))
    return cost > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", cost);
  return buf;
}

std::string
format_path(const Path& p)
{
  std::string out = "path=";
  for (std::size_t i = 0; i < p.hops.size(); ++i) {
    if (i > 0)
      out += '-';
    out += std::to_string(p.hops[i]);
  }
  out += " cost=" + format_cost(p.cost) + " length=" + std::to_string(p.length);
  return out;
}

} // namespace deltapath
