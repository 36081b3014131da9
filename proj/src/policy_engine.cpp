#include "deltapath/policy_engine.hpp"
#include "deltapath/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace deltapath {

namespace {

std::string_view
trim(std::string_view s)
{
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

NodeId
parse_node(std::string_view tok, std::string_view text)
{
  tok = trim(tok);
  NodeId id = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), id);
  if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
    throw Error(Errc::SyntaxError,
                "expected a node id, got '" + std::string(tok) + "' in '" + std::string(text) + "'");
  return id;
}

std::vector<std::string_view>
split(std::string_view s, char sep)
{
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return parts;
}

std::pair<NodeId, NodeId>
undirected(NodeId a, NodeId b)
{
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

} // namespace

Policy
parse_policy(std::string_view text, std::string id, const GraphStore* known)
{
  auto parts = split(text, ':');
  if (parts.size() < 2)
    throw Error(Errc::SyntaxError, "policy needs 'S : ... : T': '" + std::string(text) + "'");

  Policy p;
  p.id = std::move(id);
  p.origin = parse_node(parts.front(), text);
  p.target = parse_node(parts.back(), text);

  std::vector<NodeId> waypoints;
  std::set<NodeId> excluded;
  std::optional<PathPolicyKind> path_kind;
  for (std::size_t i = 1; i + 1 < parts.size(); ++i) {
    std::string_view segment = trim(parts[i]);
    if (segment.empty())
      throw Error(Errc::SyntaxError, "empty constraint in '" + std::string(text) + "'");
    for (auto tok : split(segment, ',')) {
      tok = trim(tok);
      if (tok == "backup" || tok == "multipath" || tok == "redundant") {
        if (path_kind)
          throw Error(Errc::SyntaxError, "more than one path constraint");
        path_kind = tok == "backup"      ? PathPolicyKind::Backup
                    : tok == "multipath" ? PathPolicyKind::TwoWayMultipath
                                         : PathPolicyKind::RedundantPaths;
      }
      else if (!tok.empty() && tok.front() == '!') {
        excluded.insert(parse_node(tok.substr(1), text));
      }
      else {
        waypoints.push_back(parse_node(tok, text));
      }
    }
  }

  int kinds = !waypoints.empty() + !excluded.empty() + path_kind.has_value();
  if (kinds > 1)
    throw Error(Errc::SyntaxError, "cannot mix constraint kinds in '" + std::string(text) + "'");
  if (excluded.contains(p.origin) || excluded.contains(p.target))
    throw Error(Errc::SyntaxError, "origin and target cannot be excluded");

  if (path_kind)
    p.body = PathConstraint{*path_kind};
  else if (!excluded.empty())
    p.body = NotNodes{std::move(excluded)};
  else
    p.body = Waypoints{std::move(waypoints)};

  if (known != nullptr) {
    auto require = [&](NodeId n) {
      if (!known->has_node(n))
        throw Error(Errc::UnknownNode, "policy references node " + std::to_string(n));
    };
    require(p.origin);
    require(p.target);
    if (auto* wp = std::get_if<Waypoints>(&p.body))
      std::for_each(wp->nodes.begin(), wp->nodes.end(), require);
    if (auto* nn = std::get_if<NotNodes>(&p.body))
      std::for_each(nn->nodes.begin(), nn->nodes.end(), require);
  }
  return p;
}

std::string
to_string(const Policy& policy)
{
  std::string out = std::to_string(policy.origin) + " : ";
  if (auto* wp = std::get_if<Waypoints>(&policy.body)) {
    for (NodeId n : wp->nodes)
      out += std::to_string(n) + " : ";
  }
  else if (auto* nn = std::get_if<NotNodes>(&policy.body)) {
    for (NodeId n : nn->nodes)
      out += "!" + std::to_string(n) + " : ";
  }
  else {
    switch (std::get<PathConstraint>(policy.body).kind) {
    case PathPolicyKind::Backup: out += "backup : "; break;
    case PathPolicyKind::TwoWayMultipath: out += "multipath : "; break;
    case PathPolicyKind::RedundantPaths: out += "redundant : "; break;
    }
  }
  return out + std::to_string(policy.target);
}

bool
PolicyEngine::Exclusion::touches(NodeId a, NodeId b) const
{
  return nodes.contains(a) || nodes.contains(b) || links.contains(undirected(a, b));
}

GraphStore
PolicyEngine::strip(const GraphStore& g, const Exclusion& ex)
{
  GraphStore out = fork(g);
  std::vector<EdgeRecord> removals;
  for (const auto& [key, entry] : g.edges()) {
    if (ex.touches(key.src, key.dst))
      removals.push_back({key.src, key.dst, key.w, entry.props, -entry.multiplicity});
  }
  out.apply_deltas(removals);
  for (NodeId n : ex.nodes) {
    if (out.has_node(n))
      out.erase_node(n);
  }
  return out;
}

void
PolicyEngine::add(Policy policy)
{
  auto require = [&](NodeId n) {
    if (!m_base->graph().has_node(n))
      throw Error(Errc::UnknownNode, "policy references node " + std::to_string(n));
  };
  require(policy.origin);
  require(policy.target);
  if (auto* wp = std::get_if<Waypoints>(&policy.body))
    std::for_each(wp->nodes.begin(), wp->nodes.end(), require);

  auto it = m_policies.find(policy.id);
  if (it != m_policies.end()) {
    release(it->second);
    m_policies.erase(it);
  }
  auto id = policy.id;
  m_policies.emplace(std::move(id), Entry{std::move(policy), std::nullopt});
}

void
PolicyEngine::remove(std::string_view id)
{
  auto it = m_policies.find(id);
  if (it == m_policies.end())
    throw Error(Errc::UnknownPolicy, std::string(id));
  release(it->second);
  m_policies.erase(it);
}

bool
PolicyEngine::contains(std::string_view id) const
{
  return m_policies.find(id) != m_policies.end();
}

const Policy&
PolicyEngine::policy(std::string_view id) const
{
  auto it = m_policies.find(id);
  if (it == m_policies.end())
    throw Error(Errc::UnknownPolicy, std::string(id));
  return it->second.policy;
}

const RoutingEngine&
PolicyEngine::acquire(const std::string& user, const Exclusion& ex)
{
  auto it = m_forks.find(ex);
  if (it == m_forks.end()) {
    // Replays the exclusions on a copy of the current base state as one batch.
    RoutingEngine engine = *m_base;
    std::vector<TopologyEvent> batch;
    const auto& g = m_base->graph();
    for (const auto& [a, b] : ex.links) {
      if (ex.nodes.contains(a) || ex.nodes.contains(b))
        continue;
      for (double w : g.weights_between(a, b)) {
        for (std::int64_t i = 0; i < g.multiplicity({a, b, w}); ++i)
          batch.push_back(RemoveLink{a, b, w});
      }
    }
    for (NodeId n : ex.nodes) {
      if (g.has_node(n))
        batch.push_back(RemoveNode{n});
    }
    engine.step_epoch(batch);
    it = m_forks.emplace(ex, Fork{std::move(engine), {}}).first;
  }
  it->second.users.insert(user);
  return it->second.engine;
}

void
PolicyEngine::release(Entry& entry)
{
  if (!entry.fork_key)
    return;
  auto it = m_forks.find(*entry.fork_key);
  if (it != m_forks.end()) {
    it->second.users.erase(entry.policy.id);
    if (it->second.users.empty())
      m_forks.erase(it);
  }
  entry.fork_key.reset();
}

Path
PolicyEngine::eval_not(const Policy& policy)
{
  if (!contains(policy.id) || !(this->policy(policy.id) == policy))
    add(policy);
  auto& entry = m_policies.find(policy.id)->second;
  Exclusion ex;
  ex.nodes = std::get<NotNodes>(policy.body).nodes;
  if (entry.fork_key != ex) {
    release(entry);
    acquire(policy.id, ex);
    entry.fork_key = ex;
  }
  return retrieve(m_forks.at(ex).engine, policy.origin, policy.target);
}

std::pair<Path, Path>
PolicyEngine::eval_backup(const Policy& policy)
{
  if (!contains(policy.id) || !(this->policy(policy.id) == policy))
    add(policy);
  auto& entry = m_policies.find(policy.id)->second;
  Path primary = retrieve(*m_base, policy.origin, policy.target);
  if (primary.length == 0)
    throw Error(Errc::NoBackup, "origin equals target");
  Exclusion ex;
  for (const auto& [a, b] : path_links(primary))
    ex.links.insert(undirected(a, b));
  if (entry.fork_key != ex) {
    release(entry);
    acquire(policy.id, ex);
    entry.fork_key = ex;
  }
  try {
    return {std::move(primary), retrieve(m_forks.at(ex).engine, policy.origin, policy.target)};
  }
  catch (const Error& e) {
    if (e.code() == Errc::Unreachable)
      throw Error(Errc::NoBackup, "no link-disjoint path " + std::to_string(policy.origin) +
                                    "->" + std::to_string(policy.target));
    throw;
  }
}

PolicyResult
PolicyEngine::evaluate(std::string_view id)
{
  const Policy p = policy(id);
  PolicyResult result;
  result.policy_id = p.id;
  if (std::holds_alternative<Waypoints>(p.body)) {
    result.primary = eval_waypoints(p, *m_base, &result.revisits);
    result.annotation = "waypoint";
  }
  else if (std::holds_alternative<NotNodes>(p.body)) {
    result.primary = eval_not(p);
    result.annotation = "not";
  }
  else {
    auto [primary, backup] = eval_backup(p);
    result.primary = std::move(primary);
    result.secondary = std::move(backup);
    switch (std::get<PathConstraint>(p.body).kind) {
    case PathPolicyKind::Backup: result.annotation = "backup"; break;
    case PathPolicyKind::TwoWayMultipath: result.annotation = "split"; break;
    case PathPolicyKind::RedundantPaths: result.annotation = "duplicate"; break;
    }
  }
  return result;
}

void
PolicyEngine::on_epoch(const EpochResult& base_epoch)
{
  const auto& delta = base_epoch.graph_delta;
  for (auto& [ex, fork] : m_forks) {
    GraphDelta filtered;
    for (const auto& n : delta.added_nodes) {
      if (!ex.nodes.contains(n.id))
        filtered.added_nodes.push_back(n);
    }
    for (NodeId n : delta.removed_nodes) {
      if (!ex.nodes.contains(n))
        filtered.removed_nodes.push_back(n);
    }
    for (const auto& e : delta.edges) {
      if (!ex.touches(e.src, e.dst))
        filtered.edges.push_back(e);
    }
    if (!filtered.empty())
      fork.engine.step_delta(filtered);
  }
}

const RoutingEngine*
PolicyEngine::fork_of(std::string_view id) const
{
  auto it = m_policies.find(id);
  if (it == m_policies.end() || !it->second.fork_key)
    return nullptr;
  auto jt = m_forks.find(*it->second.fork_key);
  return jt == m_forks.end() ? nullptr : &jt->second.engine;
}

GraphStore
PolicyEngine::expected_fork_graph(std::string_view id) const
{
  auto it = m_policies.find(id);
  if (it == m_policies.end())
    throw Error(Errc::UnknownPolicy, std::string(id));
  return strip(m_base->graph(), it->second.fork_key.value_or(Exclusion{}));
}

} // namespace deltapath
