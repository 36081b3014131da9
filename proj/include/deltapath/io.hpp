#ifndef DELTAPATH_IO_HPP
#define DELTAPATH_IO_HPP

#include "deltapath/forwarding_rule.hpp"
#include "deltapath/graph_model.hpp"
#include "deltapath/path_retrieval.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace deltapath {

struct Link
{
  NodeId a = 0;
  NodeId b = 0;
  LinkProperties props;
};

/// Declarative topology as read from / written to a topology file.
struct Topology
{
  std::vector<NodeRecord> nodes;
  std::vector<Link> links;
  /// Hosts attached per edge switch (metadata only).
  std::map<NodeId, std::uint32_t> hosts;
};

/// Builds the delta store; each link becomes two directed +1 entries.
GraphStore to_graph(const Topology& topo, const LinkCostFn& link_cost);

/// Reads `node <id> <label>` and `link <a> <b> capacity=.. utilization=..
/// delay=..` lines. Throws Errc::ParseError naming the line.
Topology read_topology(std::istream& in);
Topology read_topology_file(const std::string& path);
void write_topology(std::ostream& out, const Topology& topo);

struct PolicyCommand
{
  bool add = true;
  std::string id;
  std::string text;
};

struct ScriptEpoch
{
  std::uint64_t epoch = 0;
  /// Restore the initial topology before this epoch.
  bool reset_before = false;
  std::vector<TopologyEvent> events;
  std::vector<PathRequest> requests;
  std::vector<PolicyCommand> policies;
  /// Source line of each event, for diagnostics.
  std::vector<std::size_t> event_lines;
};

struct EventScript
{
  std::vector<ScriptEpoch> epochs;
};

/// Event file: `epoch <n>` starts a batch; `reset` restores the initial
/// topology; topology lines `+link`, `-link`, `+node`, `-node`, `weight`;
/// `req <flow> <s> <t>`; `+policy <id> <S> : <body> : <T>`, `-policy <id>`.
EventScript read_events(std::istream& in);
EventScript read_events_file(const std::string& path);
void write_events(std::ostream& out, const EventScript& script);

std::string format_event(const TopologyEvent& ev);

/// `epoch,src,dst,next,p_cost,p_length,delta`
void write_rule_changes(std::ostream& out, std::uint64_t epoch, const RuleDeltaBatch& changes);

} // namespace deltapath

#endif // DELTAPATH_IO_HPP
