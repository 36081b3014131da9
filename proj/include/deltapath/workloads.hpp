#ifndef DELTAPATH_WORKLOADS_HPP
#define DELTAPATH_WORKLOADS_HPP

#include "deltapath/graph_model.hpp"
#include "deltapath/io.hpp"
#include "deltapath/strategy.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace deltapath {

enum class PlanKind { HopCount, Uniform };

/// HopCount: every link at utilization 1 (weight 1 under hop count and
/// utilization strategies). Uniform: integer utilization drawn uniformly from
/// [1,100].
struct WeightPlan
{
  PlanKind kind = PlanKind::HopCount;
  std::uint64_t seed = 0;
};

void apply_plan(Topology& topo, const WeightPlan& plan);

/// k-ary fat-tree at switch level: (k/2)^2 cores, k pods of k/2 aggregation
/// and k/2 edge switches. Node ids: cores first, then per pod aggregation and
/// edge switches. With `hosts`, each edge switch records k/2 attached hosts.
/// Throws Errc::OddArity.
Topology gen_fattree(unsigned k, const WeightPlan& plan = {}, bool hosts = false);

/// Random r-regular graph on n switches (simple and connected).
/// Throws Errc::Infeasible when n*r is odd or r >= n.
Topology gen_jellyfish(std::size_t n, unsigned r, std::uint64_t seed, const WeightPlan& plan = {});

/// Jellyfish with a target link count; degrees differ by at most one.
Topology gen_jellyfish_links(std::size_t n, std::size_t links, std::uint64_t seed,
                             const WeightPlan& plan = {});

/// Random connected graph with node degrees roughly in [min_degree, max_degree].
Topology gen_random_connected(std::size_t n, unsigned min_degree, unsigned max_degree,
                              std::uint64_t seed, const WeightPlan& plan = {});

enum class ScenarioKind { LinkFailure, SwitchFailure, WeightUpdateBatches, PathRequestBatches, Flows };

ScenarioKind parse_scenario_kind(std::string_view text);
std::string_view to_string(ScenarioKind kind) noexcept;

struct Scenario
{
  ScenarioKind kind = ScenarioKind::LinkFailure;
  std::uint32_t trials = 1;
  /// Paths per epoch for weight updates, requests per epoch for path requests.
  std::uint32_t batch_size = 1;
  std::uint64_t seed = 0;
  /// Utilization added per selected link (percentage points of capacity).
  double update_step = 5.0;
  /// Mean synthetic flow size (utilization points) for Flows.
  double mean_flow_size = 1.0;
  /// Strategy used to pick the paths whose links are updated.
  std::string path_strategy = "sd_utilization";
};

/// One epoch per trial, each removing a random link (or a random switch and
/// its links) from the initial state; trials are separated by resets.
EventScript gen_failure_events(const Topology& topo, const Scenario& scenario);

/// `trials` successive batches, each adding `update_step` utilization to every
/// link of `batch_size` random optimal paths (clamped at 100).
EventScript gen_weight_update_batches(const Topology& topo, const Scenario& scenario);

/// `trials` epochs of `batch_size` random path requests.
EventScript gen_path_requests(const Topology& topo, const Scenario& scenario);

/// Synthetic flow arrivals: each flow requests a random pair and reserves an
/// exponentially distributed share of utilization on its path.
EventScript gen_flows(const Topology& topo, const Scenario& scenario);

EventScript gen_scenario(const Topology& topo, const Scenario& scenario);

/// Powers of two from `from` to `to` inclusive.
std::vector<std::uint32_t> power_of_two_sweep(std::uint32_t from, std::uint32_t to);

} // namespace deltapath

#endif // DELTAPATH_WORKLOADS_HPP
