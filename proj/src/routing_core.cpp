#include "deltapath/routing_core.hpp"
#include "deltapath/error.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

namespace deltapath {

namespace {

std::uint64_t
pair_key(NodeId src, NodeId dst) noexcept
{
  return (static_cast<std::uint64_t>(src) << 32) | dst;
}

} // namespace

std::optional<ForwardingRule>
derive(const ForwardingRule& r, const EdgeRecord& l, const Strategy& strategy,
       std::uint32_t max_length)
{
  if (r.src != l.src || r.p_length >= max_length)
    return std::nullopt;
  return ForwardingRule{l.dst,
                        r.dst,
                        r.src,
                        strategy.path_cost(l.w, r.p_cost),
                        r.p_length + 1,
                        l.delta * r.delta};
}

RoutingEngine::RoutingEngine(GraphStore graph, Strategy strategy, unsigned workers)
  : m_graph(std::move(graph))
  , m_strategy(strategy)
{
  if (!m_graph.is_symmetric())
    throw Error(Errc::InvalidLink, "graph edges must be stored in both directions");
  std::vector<EdgeRecord> all;
  for (const auto& [key, entry] : m_graph.edges())
    all.push_back({key.src, key.dst, key.w, entry.props, entry.multiplicity});
  validate_weights(all);
  reset_shards(std::max(1u, workers));
  rebuild();
}

void
RoutingEngine::validate_weights(std::span<const EdgeRecord> edges) const
{
  for (const auto& e : edges) {
    if (e.delta > 0 && !m_strategy.admissible_weight(e.w)) {
      std::ostringstream os;
      os << "weight " << e.w << " on (" << e.src << "," << e.dst << ") outside the domain of "
         << m_strategy.name();
      throw Error(Errc::InvalidWeight, os.str());
    }
  }
}

void
RoutingEngine::reset_shards(unsigned workers)
{
  m_shards.assign(workers, Shard{});
  for (auto& s : m_shards)
    s.outbox.resize(workers);
}

void
RoutingEngine::set_workers(unsigned workers)
{
  workers = std::max(1u, workers);
  if (workers == m_shards.size())
    return;
  auto old = std::move(m_shards);
  reset_shards(workers);
  for (auto& shard : old) {
    for (auto& [src, by_dst] : shard.groups)
      m_shards[owner(src)].groups.emplace(src, std::move(by_dst));
  }
}

void
RoutingEngine::rebuild()
{
  m_capacity = std::max<std::uint32_t>(2, static_cast<std::uint32_t>(m_graph.node_count()));
  for (auto& s : m_shards) {
    s.groups.clear();
    s.before.clear();
  }
  std::vector<NodeId> nodes;
  for (const auto& [id, rec] : m_graph.nodes())
    nodes.push_back(id);
  m_tracking = false;
  seed_tautologies(nodes, +1);
  run_to_fixpoint();
}

template <class Fn>
void
RoutingEngine::for_each_shard(Fn&& fn)
{
  if (m_shards.size() == 1) {
    fn(m_shards.front());
    return;
  }
  std::vector<std::exception_ptr> errors(m_shards.size());
  {
    std::vector<std::jthread> threads;
    threads.reserve(m_shards.size());
    for (std::size_t w = 0; w < m_shards.size(); ++w) {
      threads.emplace_back([&, w] {
        try {
          fn(m_shards[w]);
        }
        catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e)
      std::rethrow_exception(e);
  }
}

void
RoutingEngine::seed_tautologies(std::span<const NodeId> nodes, std::int64_t delta)
{
  double cost = m_strategy.tautology_cost();
  for (NodeId n : nodes)
    m_shards[owner(n)].inbox.push_back(Message{n, n, n, 0, cost, delta});
}

void
RoutingEngine::seed_edge_deltas(std::span<const EdgeRecord> edges)
{
  // Delta join of the edge changes with the labels propagated so far.
  for_each_shard([&](Shard& shard) {
    for (const auto& l : edges) {
      if (&m_shards[owner(l.src)] != &shard)
        continue;
      auto it = shard.groups.find(l.src);
      if (it == shard.groups.end())
        continue;
      for (const auto& [dst, g] : it->second) {
        for (const auto& label : g.labels) {
          ForwardingRule r{l.src, dst, 0, label.cost, label.len, 1};
          if (auto d = derive(r, l, m_strategy, length_cap()))
            shard.outbox[owner(d->src)].push_back(
              Message{d->src, d->dst, d->next, d->p_length, d->p_cost, d->delta});
        }
      }
    }
  });
}

void
RoutingEngine::run_to_fixpoint()
{
  auto exchange = [this] {
    bool any = false;
    for (std::size_t t = 0; t < m_shards.size(); ++t) {
      for (auto& src : m_shards) {
        auto& box = src.outbox[t];
        if (box.empty())
          continue;
        auto& in = m_shards[t].inbox;
        in.insert(in.end(), box.begin(), box.end());
        box.clear();
      }
      any = any || !m_shards[t].inbox.empty();
    }
    return any;
  };

  std::size_t rounds = 0;
  while (exchange()) {
    if (++rounds > round_limit())
      throw Error(Errc::NonConvergence,
                  "no fixpoint after " + std::to_string(round_limit()) + " rounds");
    for_each_shard([this](Shard& s) { process_inbox(s); });
  }
  m_last_rounds = rounds;
}

void
RoutingEngine::apply_candidate(Group& g, const Message& m) const
{
  auto it = std::lower_bound(g.cands.begin(), g.cands.end(), m, [this](const Candidate& c, const Message& x) {
    return m_strategy.compare(c.cost, c.len, c.next, x.cost, x.len, x.next) < 0;
  });
  if (it != g.cands.end() && it->cost == m.cost && it->len == m.len && it->next == m.next) {
    it->mult += m.delta;
    if (it->mult == 0)
      g.cands.erase(it);
    else if (it->mult < 0)
      throw Error(Errc::NegativeMultiplicity,
                  "candidate for (" + std::to_string(m.src) + "," + std::to_string(m.dst) + ")");
    return;
  }
  if (m.delta < 0)
    throw Error(Errc::NegativeMultiplicity,
                "retraction of unknown candidate for (" + std::to_string(m.src) + "," +
                  std::to_string(m.dst) + ")");
  g.cands.insert(it, Candidate{m.cost, m.len, m.next, m.delta});
}

std::vector<RoutingEngine::Label>
RoutingEngine::compute_labels(const Group& g) const
{
  std::vector<Label> labels;
  if (g.cands.empty())
    return labels;
  if (m_strategy.additive()) {
    labels.push_back({g.cands.front().cost, g.cands.front().len});
    return labels;
  }
  // Width-then-length selection is not preserved by extension, so every
  // (width, length) point not dominated by a wider-or-equal shorter one is
  // propagated. Candidates are sorted widest first, then shortest.
  std::uint32_t shortest = UINT32_MAX;
  for (const auto& c : g.cands) {
    if (c.len < shortest) {
      labels.push_back({c.cost, c.len});
      shortest = c.len;
    }
  }
  return labels;
}

void
RoutingEngine::emit(Shard& shard, NodeId src, NodeId dst, const Label& label,
                    std::int64_t sign) const
{
  if (label.len >= length_cap())
    return;
  ForwardingRule r{src, dst, 0, label.cost, label.len, sign};
  for (const auto& [key, entry] : m_graph.out_edges(src)) {
    EdgeRecord l{key.src, key.dst, key.w, {}, entry.multiplicity};
    if (auto d = derive(r, l, m_strategy, length_cap()))
      shard.outbox[owner(d->src)].push_back(
        Message{d->src, d->dst, d->next, d->p_length, d->p_cost, d->delta});
  }
}

void
RoutingEngine::process_inbox(Shard& shard)
{
  auto& in = shard.inbox;
  std::sort(in.begin(), in.end(), [](const Message& a, const Message& b) {
    return std::tie(a.src, a.dst, a.next, a.len, a.cost) <
           std::tie(b.src, b.dst, b.next, b.len, b.cost);
  });

  std::size_t i = 0;
  while (i < in.size()) {
    NodeId src = in[i].src;
    NodeId dst = in[i].dst;
    auto& by_dst = shard.groups[src];
    auto [git, fresh] = by_dst.try_emplace(dst);
    Group& g = git->second;

    if (m_tracking) {
      auto key = pair_key(src, dst);
      if (!shard.before.contains(key))
        shard.before.emplace(key, fresh || g.cands.empty()
                                    ? std::nullopt
                                    : std::optional<ForwardingRule>(front_rule(src, dst, g)));
    }

    for (; i < in.size() && in[i].src == src && in[i].dst == dst;) {
      Message m = in[i++];
      while (i < in.size() && in[i].src == src && in[i].dst == dst && in[i].next == m.next &&
             in[i].len == m.len && in[i].cost == m.cost)
        m.delta += in[i++].delta;
      if (m.delta != 0)
        apply_candidate(g, m);
    }

    if (m_strategy.additive()) {
      // Single best label: compare in place instead of building a new list.
      bool had = !g.labels.empty();
      bool has = !g.cands.empty();
      Label now = has ? Label{g.cands.front().cost, g.cands.front().len} : Label{};
      if (had != has || (has && !(g.labels.front() == now))) {
        if (had)
          emit(shard, src, dst, g.labels.front(), -1);
        if (has) {
          emit(shard, src, dst, now, +1);
          g.labels.assign(1, now);
        }
        else {
          g.labels.clear();
        }
      }
    }
    else if (auto labels = compute_labels(g); labels != g.labels) {
      for (const auto& old : g.labels) {
        if (std::find(labels.begin(), labels.end(), old) == labels.end())
          emit(shard, src, dst, old, -1);
      }
      for (const auto& now : labels) {
        if (std::find(g.labels.begin(), g.labels.end(), now) == g.labels.end())
          emit(shard, src, dst, now, +1);
      }
      g.labels = std::move(labels);
    }

    if (g.cands.empty()) {
      by_dst.erase(git);
      if (by_dst.empty())
        shard.groups.erase(src);
    }
  }
  in.clear();
}

ForwardingRule
RoutingEngine::front_rule(NodeId src, NodeId dst, const Group& g) const
{
  const auto& c = g.cands.front();
  return ForwardingRule{src, dst, c.next, c.cost, c.len, 1};
}

const RoutingEngine::Group*
RoutingEngine::find_group(NodeId src, NodeId dst) const
{
  const auto& shard = m_shards[owner(src)];
  auto it = shard.groups.find(src);
  if (it == shard.groups.end())
    return nullptr;
  auto jt = it->second.find(dst);
  return jt == it->second.end() ? nullptr : &jt->second;
}

std::optional<ForwardingRule>
RoutingEngine::lookup(NodeId src, NodeId dst) const
{
  const Group* g = find_group(src, dst);
  if (g == nullptr || g->cands.empty())
    return std::nullopt;
  return front_rule(src, dst, *g);
}

EstablishedMap
RoutingEngine::established() const
{
  EstablishedMap out;
  for (const auto& shard : m_shards) {
    for (const auto& [src, by_dst] : shard.groups) {
      for (const auto& [dst, g] : by_dst) {
        if (!g.cands.empty())
          out.emplace(PairKey{src, dst}, front_rule(src, dst, g));
      }
    }
  }
  return out;
}

std::size_t
RoutingEngine::established_count() const
{
  std::size_t n = 0;
  for (const auto& shard : m_shards) {
    for (const auto& [src, by_dst] : shard.groups)
      n += by_dst.size();
  }
  return n;
}

std::size_t
RoutingEngine::candidate_count() const
{
  std::size_t n = 0;
  for (const auto& shard : m_shards) {
    for (const auto& [src, by_dst] : shard.groups) {
      for (const auto& [dst, g] : by_dst)
        n += g.cands.size();
    }
  }
  return n;
}

RuleDeltaBatch
RoutingEngine::collect_changes()
{
  RuleDeltaBatch out;
  for (auto& shard : m_shards) {
    for (const auto& [key, before] : shard.before) {
      auto src = static_cast<NodeId>(key >> 32);
      auto dst = static_cast<NodeId>(key & 0xffffffffu);
      auto now = lookup(src, dst);
      if (before && now && before->same_route(*now))
        continue;
      if (!before && !now)
        continue;
      if (before) {
        out.push_back(*before);
        out.back().delta = -1;
      }
      if (now)
        out.push_back(*now);
    }
    shard.before.clear();
  }
  std::sort(out.begin(), out.end(), [](const ForwardingRule& a, const ForwardingRule& b) {
    return std::tie(a.src, a.dst, a.delta, a.next, a.p_length, a.p_cost) <
           std::tie(b.src, b.dst, b.delta, b.next, b.p_length, b.p_cost);
  });
  return out;
}

EpochResult
RoutingEngine::step_epoch(std::span<const TopologyEvent> events)
{
  GraphStore staged = m_graph;
  auto cost_fn = m_strategy.link_cost_fn();
  std::map<EdgeKey, std::pair<std::int64_t, LinkProperties>> net;
  for (const auto& ev : events) {
    auto records = ingest_event(staged, ev, cost_fn);
    validate_weights(records);
    for (const auto& r : staged.apply_deltas(records)) {
      auto& slot = net[r.key()];
      slot.first += r.delta;
      slot.second = r.props;
    }
  }

  GraphDelta delta;
  for (const auto& [key, slot] : net) {
    if (slot.first != 0)
      delta.edges.push_back({key.src, key.dst, key.w, slot.second, slot.first});
  }
  for (const auto& [id, rec] : staged.nodes()) {
    if (!m_graph.has_node(id))
      delta.added_nodes.push_back(rec);
  }
  for (const auto& [id, rec] : m_graph.nodes()) {
    if (!staged.has_node(id))
      delta.removed_nodes.push_back(id);
  }

  m_graph = std::move(staged);
  return propagate(std::move(delta));
}

EpochResult
RoutingEngine::step_delta(const GraphDelta& delta)
{
  validate_weights(delta.edges);
  GraphStore staged = m_graph;
  for (const auto& n : delta.added_nodes)
    staged.add_node(n);
  auto net = staged.apply_deltas(delta.edges);
  for (NodeId n : delta.removed_nodes) {
    if (!staged.out_edges(n).empty())
      throw Error(Errc::InvalidLink, "removed node " + std::to_string(n) + " still has links");
    staged.erase_node(n);
  }
  GraphDelta resolved{delta.added_nodes, delta.removed_nodes, std::move(net)};
  m_graph = std::move(staged);
  return propagate(std::move(resolved));
}

EpochResult
RoutingEngine::propagate(GraphDelta delta)
{
  EpochResult result;
  if (m_graph.node_count() > m_capacity) {
    // The derivation cap is fixed per rule state; outgrowing it means
    // recomputing from scratch with a larger one.
    auto old = established();
    rebuild();
    auto now = established();
    for (const auto& [key, rule] : old) {
      auto it = now.find(key);
      if (it == now.end() || !it->second.same_route(rule)) {
        result.changes.push_back(rule);
        result.changes.back().delta = -1;
      }
    }
    for (const auto& [key, rule] : now) {
      auto it = old.find(key);
      if (it == old.end() || !it->second.same_route(rule))
        result.changes.push_back(rule);
    }
    std::sort(result.changes.begin(), result.changes.end(),
              [](const ForwardingRule& a, const ForwardingRule& b) {
                return std::tie(a.src, a.dst, a.delta, a.next) < std::tie(b.src, b.dst, b.delta, b.next);
              });
    result.rounds = m_last_rounds;
    result.rebuilt = true;
    result.graph_delta = std::move(delta);
    return result;
  }

  m_tracking = true;
  seed_edge_deltas(delta.edges);
  std::vector<NodeId> added;
  for (const auto& n : delta.added_nodes)
    added.push_back(n.id);
  seed_tautologies(added, +1);
  seed_tautologies(delta.removed_nodes, -1);
  run_to_fixpoint();
  m_tracking = false;

  result.changes = collect_changes();
  result.rounds = m_last_rounds;
  result.graph_delta = std::move(delta);
  return result;
}

std::vector<std::string>
RoutingEngine::check_invariants() const
{
  std::vector<std::string> problems;
  auto report = [&](const std::string& msg) {
    if (problems.size() < 20)
      problems.push_back(msg);
  };

  if (!m_graph.is_symmetric())
    report("graph store is not symmetric or holds a non-positive multiplicity");

  // Expected candidate multiset: tautologies plus G joined with labels.
  using CandKey = std::tuple<NodeId, NodeId, NodeId, std::uint32_t, double>;
  std::map<CandKey, std::int64_t> expected;
  for (const auto& [id, rec] : m_graph.nodes())
    expected[{id, id, id, 0u, m_strategy.tautology_cost()}] += 1;

  std::map<CandKey, std::int64_t> actual;
  for (std::size_t w = 0; w < m_shards.size(); ++w) {
    const auto& shard = m_shards[w];
    for (const auto& [src, by_dst] : shard.groups) {
      if (owner(src) != w)
        report("group src " + std::to_string(src) + " stored on the wrong shard");
      for (const auto& [dst, g] : by_dst) {
        if (g.cands.empty())
          report("empty group retained");
        for (std::size_t i = 0; i < g.cands.size(); ++i) {
          const auto& c = g.cands[i];
          if (c.mult <= 0)
            report("candidate with multiplicity " + std::to_string(c.mult));
          if (i > 0) {
            const auto& p = g.cands[i - 1];
            if (m_strategy.compare(p.cost, p.len, p.next, c.cost, c.len, c.next) >= 0)
              report("candidates out of order");
          }
          actual[{src, dst, c.next, c.len, c.cost}] += c.mult;
        }
        if (compute_labels(g) != g.labels)
          report("stale labels for (" + std::to_string(src) + "," + std::to_string(dst) + ")");
        for (const auto& label : g.labels) {
          if (label.len >= length_cap())
            continue;
          for (const auto& [key, entry] : m_graph.out_edges(src)) {
            double cost = m_strategy.path_cost(key.w, label.cost);
            expected[{key.dst, dst, src, label.len + 1, cost}] += entry.multiplicity;
          }
        }
      }
    }
  }
  if (expected != actual)
    report("candidate multiset differs from the join of G with the propagated labels");

  for (const auto& [id, rec] : m_graph.nodes()) {
    auto r = lookup(id, id);
    if (!r || r->next != id || r->p_length != 0 || r->p_cost != m_strategy.tautology_cost())
      report("missing tautology for node " + std::to_string(id));
  }

  if (m_strategy.additive()) {
    for (const auto& [key, rule] : established()) {
      if (rule.src == rule.dst)
        continue;
      auto via = lookup(rule.next, rule.dst);
      bool ok = via && via->p_length + 1 == rule.p_length;
      if (ok) {
        ok = false;
        for (double w : m_graph.weights_between(rule.src, rule.next))
          ok = ok || m_strategy.path_cost(w, via->p_cost) == rule.p_cost;
      }
      if (!ok)
        report("next hop of (" + std::to_string(rule.src) + "," + std::to_string(rule.dst) +
               ") is inconsistent");
    }
  }
  return problems;
}

} // namespace deltapath
