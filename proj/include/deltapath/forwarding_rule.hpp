#ifndef DELTAPATH_FORWARDING_RULE_HPP
#define DELTAPATH_FORWARDING_RULE_HPP

#include "deltapath/graph_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace deltapath {

/// Per-hop routing entry: `src` forwards traffic for `dst` to `next`.
struct ForwardingRule
{
  NodeId src = 0;
  NodeId dst = 0;
  NodeId next = 0;
  double p_cost = 0.0;
  std::uint32_t p_length = 0;
  std::int64_t delta = 1;

  bool
  same_route(const ForwardingRule& o) const noexcept
  {
    return src == o.src && dst == o.dst && next == o.next && p_cost == o.p_cost &&
           p_length == o.p_length;
  }

  friend bool operator==(const ForwardingRule&, const ForwardingRule&) = default;
};

std::ostream& operator<<(std::ostream& os, const ForwardingRule& r);

/// Changes to established rules: for each (src,dst) at most one retraction
/// (delta -1) and one establishment (delta +1).
using RuleDeltaBatch = std::vector<ForwardingRule>;

} // namespace deltapath

#endif // DELTAPATH_FORWARDING_RULE_HPP
