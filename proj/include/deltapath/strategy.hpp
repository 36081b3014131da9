#ifndef DELTAPATH_STRATEGY_HPP
#define DELTAPATH_STRATEGY_HPP

#include "deltapath/forwarding_rule.hpp"
#include "deltapath/graph_model.hpp"

#include <compare>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace deltapath {

enum class StrategyKind { HopCount, SdFreeBw, SdUtilization, ShortestWidest };

enum class Selection {
  MinCost, ///< lowest path cost wins
  MaxCost, ///< highest path cost (width) wins
};

/// Weight given to a fully utilized link by the free-bandwidth strategy.
inline constexpr double kSaturatedWeight = 1e9;

/// QoS routing strategy: link cost, path cost and path selection.
/// Immutable once built; copies are cheap.
class Strategy
{
public:
  /// Accepts the canonical names (hop_count, sd_free_bw, sd_utilization,
  /// shortest_widest) and the CLI spellings (hopcount, sd-freebw, sd-util,
  /// widest). Throws Errc::UnknownStrategy.
  static Strategy builtin(std::string_view name);

  static std::vector<std::string> names();

  StrategyKind
  kind() const noexcept
  {
    return m_kind;
  }

  std::string_view name() const noexcept;

  /// f_l: link properties to edge weight.
  double link_cost(const LinkProperties& props) const;

  /// f_p: cost of a path extended by an edge of weight `w`.
  double
  path_cost(double w, double p_cost) const noexcept
  {
    switch (m_kind) {
    case StrategyKind::HopCount: return 1.0 + p_cost;
    case StrategyKind::ShortestWidest: return w < p_cost ? w : p_cost;
    default: return w + p_cost;
    }
  }

  Selection
  selection() const noexcept
  {
    return m_kind == StrategyKind::ShortestWidest ? Selection::MaxCost : Selection::MinCost;
  }

  bool
  additive() const noexcept
  {
    return m_kind != StrategyKind::ShortestWidest;
  }

  /// Cost of the self rule (n, n, n).
  double
  tautology_cost() const noexcept
  {
    return additive() ? 0.0 : std::numeric_limits<double>::infinity();
  }

  /// Additive strategies need strictly positive weights; widths may be zero.
  bool admissible_weight(double w) const noexcept;

  LinkCostFn link_cost_fn() const;

  /// f_s as a strict total order: primary cost key, then fewer hops, then the
  /// smaller next-hop id. `less` means `a` is preferred.
  std::strong_ordering
  compare(double cost_a, std::uint32_t len_a, NodeId next_a, double cost_b,
          std::uint32_t len_b, NodeId next_b) const noexcept
  {
    if (cost_a != cost_b) {
      bool a_first = selection() == Selection::MinCost ? cost_a < cost_b : cost_a > cost_b;
      return a_first ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    if (len_a != len_b)
      return len_a <=> len_b;
    return next_a <=> next_b;
  }

  std::strong_ordering
  compare(const ForwardingRule& a, const ForwardingRule& b) const noexcept
  {
    return compare(a.p_cost, a.p_length, a.next, b.p_cost, b.p_length, b.next);
  }

  /// True when cost `a` is at least as good as cost `b` under f_s.
  bool
  cost_at_least_as_good(double a, double b) const noexcept
  {
    return selection() == Selection::MinCost ? a <= b : a >= b;
  }

  friend bool
  operator==(const Strategy& a, const Strategy& b) noexcept
  {
    return a.m_kind == b.m_kind;
  }

private:
  explicit Strategy(StrategyKind kind)
    : m_kind(kind)
  {
  }

  StrategyKind m_kind;
};

} // namespace deltapath

#endif // DELTAPATH_STRATEGY_HPP
