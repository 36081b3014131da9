#include "deltapath/strategy.hpp"
#include "deltapath/error.hpp"

#include <cmath>
#include <ostream>

namespace deltapath {

std::ostream&
operator<<(std::ostream& os, const ForwardingRule& r)
{
  return os << "(" << r.src << "," << r.dst << ",next=" << r.next << ",cost=" << r.p_cost
            << ",len=" << r.p_length << ",d=" << r.delta << ")";
}

Strategy
Strategy::builtin(std::string_view name)
{
  if (name == "hop_count" || name == "hopcount")
    return Strategy(StrategyKind::HopCount);
  if (name == "sd_free_bw" || name == "sd-freebw")
    return Strategy(StrategyKind::SdFreeBw);
  if (name == "sd_utilization" || name == "sd-util")
    return Strategy(StrategyKind::SdUtilization);
  if (name == "shortest_widest" || name == "widest")
    return Strategy(StrategyKind::ShortestWidest);
  throw Error(Errc::UnknownStrategy, std::string(name));
}

std::vector<std::string>
Strategy::names()
{
  return {"hop_count", "sd_free_bw", "sd_utilization", "shortest_widest"};
}

std::string_view
Strategy::name() const noexcept
{
  switch (m_kind) {
  case StrategyKind::HopCount: return "hop_count";
  case StrategyKind::SdFreeBw: return "sd_free_bw";
  case StrategyKind::SdUtilization: return "sd_utilization";
  case StrategyKind::ShortestWidest: return "shortest_widest";
  }
  return "hop_count";
}

double
Strategy::link_cost(const LinkProperties& props) const
{
  switch (m_kind) {
  case StrategyKind::HopCount:
    return 1.0;
  case StrategyKind::SdFreeBw: {
    double free = props.free_bandwidth();
    return free > 0.0 ? 1.0 / free : kSaturatedWeight;
  }
  case StrategyKind::SdUtilization:
    return props.utilization;
  case StrategyKind::ShortestWidest:
    return props.free_bandwidth() > 0.0 ? props.free_bandwidth() : 0.0;
  }
  return 1.0;
}

bool
Strategy::admissible_weight(double w) const noexcept
{
  if (std::isnan(w))
    return false;
  return additive() ? w > 0.0 && std::isfinite(w) : w >= 0.0;
}

LinkCostFn
Strategy::link_cost_fn() const
{
  return [s = *this](const LinkProperties& p) { return s.link_cost(p); };
}

} // namespace deltapath
