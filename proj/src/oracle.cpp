#include "deltapath/oracle.hpp"
#include "deltapath/error.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <queue>
#include <tuple>
#include <unordered_map>

namespace deltapath::oracle {

namespace {

struct DenseGraph
{
  std::vector<NodeId> ids;
  std::unordered_map<NodeId, std::size_t> index;
  // out[i]: (j, w) for every directed entry i->j, parallel weights included.
  std::vector<std::vector<std::pair<std::size_t, double>>> out;
};

DenseGraph
densify(const GraphStore& graph)
{
  DenseGraph g;
  for (const auto& [id, rec] : graph.nodes()) {
    g.index.emplace(id, g.ids.size());
    g.ids.push_back(id);
  }
  g.out.resize(g.ids.size());
  for (const auto& [key, entry] : graph.edges()) {
    auto a = g.index.find(key.src);
    auto b = g.index.find(key.dst);
    if (a == g.index.end() || b == g.index.end())
      continue;
    g.out[a->second].emplace_back(b->second, key.w);
  }
  return g;
}

struct Label
{
  double cost = std::numeric_limits<double>::infinity();
  std::uint32_t length = 0;
  bool reached = false;
};

double
step_cost(const Strategy& strategy, double w)
{
  return strategy.kind() == StrategyKind::HopCount ? 1.0 : w;
}

// Costs toward destination d: cost(s) = step(s->n) + cost(n).
std::vector<Label>
dijkstra_to(const DenseGraph& g, const Strategy& strategy, std::size_t d)
{
  std::vector<Label> labels(g.ids.size());
  using Item = std::tuple<double, std::uint32_t, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  labels[d] = {0.0, 0, true};
  queue.emplace(0.0, 0u, d);
  std::vector<bool> done(g.ids.size(), false);
  while (!queue.empty()) {
    auto [cost, len, v] = queue.top();
    queue.pop();
    if (done[v])
      continue;
    done[v] = true;
    // Symmetric storage: the entries leaving v mirror those entering it.
    for (const auto& [u, w] : g.out[v]) {
      if (done[u])
        continue;
      double c = step_cost(strategy, w) + cost;
      std::uint32_t l = len + 1;
      auto& lu = labels[u];
      if (!lu.reached || c < lu.cost || (c == lu.cost && l < lu.length)) {
        lu = {c, l, true};
        queue.emplace(c, l, u);
      }
    }
  }
  return labels;
}

NodeId
tie_broken_next(const Strategy& strategy, NodeId s, NodeId t, const OracleEntry& e)
{
  ForwardingRule best{s, t, e.witnesses.front(), e.cost, e.length, 1};
  for (NodeId n : e.witnesses) {
    ForwardingRule r{s, t, n, e.cost, e.length, 1};
    if (strategy.compare(r, best) < 0)
      best = r;
  }
  return best.next;
}

void
check_weights(const GraphStore& graph, const Strategy& strategy)
{
  if (strategy.kind() == StrategyKind::HopCount)
    return;
  for (const auto& [key, entry] : graph.edges()) {
    if (!(key.w > 0.0))
      throw Error(Errc::InvalidWeight, "non-positive weight in oracle input");
  }
}

void
fill_destination(OracleResult& result, const DenseGraph& g, const Strategy& strategy,
                 std::size_t d, const std::vector<Label>& labels)
{
  NodeId dst = g.ids[d];
  for (std::size_t s = 0; s < g.ids.size(); ++s) {
    if (!labels[s].reached)
      continue;
    OracleEntry e;
    e.cost = labels[s].cost;
    e.length = labels[s].length;
    if (s == d) {
      e.witnesses.push_back(dst);
    }
    else {
      for (const auto& [n, w] : g.out[s]) {
        const auto& ln = labels[n];
        if (ln.reached && step_cost(strategy, w) + ln.cost == e.cost && ln.length + 1 == e.length)
          e.witnesses.push_back(g.ids[n]);
      }
      std::sort(e.witnesses.begin(), e.witnesses.end());
      e.witnesses.erase(std::unique(e.witnesses.begin(), e.witnesses.end()), e.witnesses.end());
    }
    e.next = tie_broken_next(strategy, g.ids[s], dst, e);
    result.add(g.ids[s], dst, std::move(e));
  }
}

} // namespace

const OracleEntry*
OracleResult::find(NodeId s, NodeId t) const
{
  std::pair key{s, t};
  auto it = std::lower_bound(m_entries.begin(), m_entries.end(), key,
                             [](const Entry& e, const std::pair<NodeId, NodeId>& k) {
                               return e.first < k;
                             });
  return it != m_entries.end() && it->first == key ? &it->second : nullptr;
}

void
OracleResult::add(NodeId s, NodeId t, OracleEntry entry)
{
  m_entries.emplace_back(std::pair{s, t}, std::move(entry));
}

void
OracleResult::finish()
{
  std::sort(m_entries.begin(), m_entries.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
}

OracleResult
apsp_additive(const GraphStore& graph, const Strategy& strategy)
{
  check_weights(graph, strategy);
  auto g = densify(graph);
  OracleResult result;
  for (std::size_t d = 0; d < g.ids.size(); ++d)
    fill_destination(result, g, strategy, d, dijkstra_to(g, strategy, d));
  result.finish();
  return result;
}

OracleResult
widest_paths_bruteforce(const GraphStore& graph, const Strategy& strategy, std::size_t max_nodes)
{
  if (graph.node_count() > max_nodes)
    throw Error(Errc::TooLarge, std::to_string(graph.node_count()) + " nodes");
  auto g = densify(graph);
  std::size_t n = g.ids.size();

  // Widest parallel variant per neighbour pair.
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  for (std::size_t a = 0; a < n; ++a) {
    std::map<std::size_t, double> widest;
    for (const auto& [b, w] : g.out[a]) {
      auto [it, fresh] = widest.emplace(b, w);
      if (!fresh)
        it->second = std::max(it->second, w);
    }
    adj[a].assign(widest.begin(), widest.end());
  }

  OracleResult result;
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < n; ++s) {
    struct Best
    {
      double width = -1.0;
      std::uint32_t length = 0;
      std::vector<NodeId> witnesses;
    };
    std::vector<Best> best(n);
    best[s] = {inf, 0, {g.ids[s]}};

    std::vector<bool> on_path(n, false);
    on_path[s] = true;
    auto visit = [&](auto&& self, std::size_t v, double width, std::uint32_t len,
                     NodeId first) -> void {
      auto& b = best[v];
      if (width > b.width || (width == b.width && len < b.length)) {
        b.width = width;
        b.length = len;
        b.witnesses = {first};
      }
      else if (width == b.width && len == b.length &&
               std::find(b.witnesses.begin(), b.witnesses.end(), first) == b.witnesses.end()) {
        b.witnesses.push_back(first);
      }
      for (const auto& [u, w] : adj[v]) {
        if (on_path[u])
          continue;
        on_path[u] = true;
        self(self, u, std::min(width, w), len + 1, first);
        on_path[u] = false;
      }
    };
    for (const auto& [u, w] : adj[s]) {
      on_path[u] = true;
      visit(visit, u, w, 1, g.ids[u]);
      on_path[u] = false;
    }

    for (std::size_t t = 0; t < n; ++t) {
      if (best[t].width < 0.0)
        continue;
      OracleEntry e;
      e.cost = best[t].width;
      e.length = best[t].length;
      e.witnesses = std::move(best[t].witnesses);
      std::sort(e.witnesses.begin(), e.witnesses.end());
      e.next = tie_broken_next(strategy, g.ids[s], g.ids[t], e);
      result.add(g.ids[s], g.ids[t], std::move(e));
    }
  }
  result.finish();
  return result;
}

OracleResult
solve(const GraphStore& graph, const Strategy& strategy)
{
  if (strategy.additive())
    return apsp_additive(graph, strategy);
  return widest_paths_bruteforce(graph, strategy);
}

std::set<std::pair<NodeId, NodeId>>
affected_pairs(const GraphStore& before, const GraphStore& after, const Strategy& strategy)
{
  auto a = solve(before, strategy);
  auto b = solve(after, strategy);
  std::set<std::pair<NodeId, NodeId>> out;
  for (const auto& [key, ea] : a.entries()) {
    const auto* eb = b.find(key.first, key.second);
    if (eb == nullptr || eb->cost != ea.cost || eb->length != ea.length || eb->next != ea.next)
      out.insert(key);
  }
  for (const auto& [key, eb] : b.entries()) {
    if (a.find(key.first, key.second) == nullptr)
      out.insert(key);
  }
  return out;
}

std::optional<std::vector<NodeId>>
shortest_path(const GraphStore& graph, const Strategy& strategy, NodeId s, NodeId t)
{
  check_weights(graph, strategy);
  auto g = densify(graph);
  auto si = g.index.find(s);
  auto ti = g.index.find(t);
  if (si == g.index.end() || ti == g.index.end())
    return std::nullopt;
  OracleResult result;
  fill_destination(result, g, strategy, ti->second, dijkstra_to(g, strategy, ti->second));
  result.finish();
  if (result.find(s, t) == nullptr)
    return std::nullopt;
  std::vector<NodeId> hops{s};
  while (hops.back() != t)
    hops.push_back(result.find(hops.back(), t)->next);
  return hops;
}

std::map<std::pair<NodeId, NodeId>, std::uint32_t>
bfs_distances(const GraphStore& graph)
{
  auto g = densify(graph);
  std::map<std::pair<NodeId, NodeId>, std::uint32_t> out;
  for (std::size_t s = 0; s < g.ids.size(); ++s) {
    std::vector<std::int64_t> dist(g.ids.size(), -1);
    std::deque<std::size_t> queue{s};
    dist[s] = 0;
    while (!queue.empty()) {
      auto v = queue.front();
      queue.pop_front();
      out[{g.ids[s], g.ids[v]}] = static_cast<std::uint32_t>(dist[v]);
      for (const auto& [u, w] : g.out[v]) {
        if (dist[u] < 0) {
          dist[u] = dist[v] + 1;
          queue.push_back(u);
        }
      }
    }
  }
  return out;
}

} // namespace deltapath::oracle
