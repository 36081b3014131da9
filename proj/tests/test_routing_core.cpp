#include "support.hpp"

#include "deltapath/error.hpp"

#include <doctest.h>

using namespace deltapath;
using namespace deltapath::test;

namespace {

RoutingEngine
engine_of(const Topology& topo, Strategy s = sd(), unsigned workers = 1)
{
  return RoutingEngine(graph_of(topo, s), s, workers);
}

EpochResult
step(RoutingEngine& e, std::vector<TopologyEvent> events)
{
  return e.step_epoch(events);
}

} // namespace

TEST_CASE("single node holds only its tautology")
{
  auto e = engine_of(weighted({4}, {}));
  CHECK(e.established_count() == 1);
  auto r = e.lookup(4, 4);
  REQUIRE(r);
  CHECK(r->next == 4);
  CHECK(r->p_cost == 0.0);
  CHECK(r->p_length == 0);
}

TEST_CASE("triangle initial routes")
{
  auto e = engine_of(triangle());
  auto r = e.lookup(0, 2);
  REQUIRE(r);
  CHECK(*r == ForwardingRule{0, 2, 1, 2.0, 2, 1});
  CHECK(e.established_count() == 9);
  CHECK(oracle_mismatch(e).empty());
  CHECK(e.check_invariants().empty());

  auto hop = engine_of(triangle(), Strategy::builtin("hop_count"));
  CHECK(*hop.lookup(0, 2) == ForwardingRule{0, 2, 2, 1.0, 1, 1});
}

TEST_CASE("derive joins a rule with an incoming edge")
{
  auto s = sd();
  ForwardingRule taut{2, 2, 2, 0.0, 0, 1};
  EdgeRecord bc{2, 1, 1.0, {}, +1};
  auto d = derive(taut, bc, s, 10);
  REQUIRE(d);
  CHECK(*d == ForwardingRule{1, 2, 2, 1.0, 1, 1});

  EdgeRecord gone{2, 1, 1.0, {}, -1};
  CHECK(derive(taut, gone, s, 10)->delta == -1);

  ForwardingRule ac{0, 2, 1, 2.0, 2, 1};
  EdgeRecord ad{0, 3, 1.0, {}, +1};
  CHECK(*derive(ac, ad, s, 10) == ForwardingRule{3, 2, 0, 3.0, 3, 1});

  CHECK_FALSE(derive(ac, ad, s, 2));
  CHECK_FALSE(derive(ac, EdgeRecord{1, 3, 1.0, {}, 1}, s, 10));
}

TEST_CASE("weight replacement retracts and re-establishes")
{
  // S1=1, S2=2, S3=3: S1-S3 5, S1-S2 1, S2-S3 10.
  auto e = engine_of(weighted({1, 2, 3}, {{1, 3, 5.0}, {1, 2, 1.0}, {2, 3, 10.0}}));
  auto before = e.established();
  auto out = step(e, {RemoveLink{1, 3, 5.0}, AddLink{1, 3, [] {
                                                       LinkProperties p;
                                                       p.utilization = 3;
                                                       return p;
                                                     }()}});
  CHECK(out.changes == diff_views(before, e.established()));
  auto has = [&](ForwardingRule r) {
    return std::find(out.changes.begin(), out.changes.end(), r) != out.changes.end();
  };
  CHECK(has({1, 3, 3, 5.0, 1, -1}));
  CHECK(has({1, 3, 3, 3.0, 1, +1}));
  CHECK(has({3, 1, 1, 5.0, 1, -1}));
  CHECK(has({3, 1, 1, 3.0, 1, +1}));
  CHECK(has({2, 3, 1, 4.0, 2, +1}));
  CHECK(oracle_mismatch(e).empty());
  CHECK(e.check_invariants().empty());
}

TEST_CASE("delta cancellation inside one batch produces no output")
{
  auto e = engine_of(triangle());
  LinkProperties p;
  p.utilization = 1;
  auto out = step(e, {AddLink{0, 2, p}, RemoveLink{0, 2, 1.0}});
  CHECK(out.changes.empty());
  CHECK(out.graph_delta.empty());
  CHECK(step(e, {}).changes.empty());
}

TEST_CASE("triangle link removal")
{
  auto e = engine_of(triangle());
  auto before = e.established();
  auto out = step(e, {RemoveLink{0, 1, std::nullopt}});
  CHECK(*e.lookup(0, 2) == ForwardingRule{0, 2, 2, 3.0, 1, 1});
  CHECK(*e.lookup(0, 1) == ForwardingRule{0, 1, 2, 4.0, 2, 1});
  CHECK(out.changes == diff_views(before, e.established()));
  CHECK(touched_pairs(out.changes) == std::set<PairKey>{{0, 1}, {1, 0}, {0, 2}, {2, 0}});
}

TEST_CASE("established view covers reachable pairs only")
{
  auto e = engine_of(weighted({0, 1, 2, 3, 4}, {{0, 1, 1.0}, {1, 2, 2.0}, {3, 4, 1.0}}));
  CHECK(e.established_count() == 9 + 4);
  CHECK_FALSE(e.lookup(0, 3));
  CHECK(e.lookup(3, 4));

  auto out = step(e, {RemoveLink{1, 2, std::nullopt}});
  CHECK_FALSE(e.lookup(0, 2));
  CHECK(e.established_count() == 4 + 1 + 4);
  CHECK(oracle_mismatch(e).empty());
  CHECK(out.rounds <= e.round_limit());
  CHECK(e.check_invariants().empty());
}

TEST_CASE("node removal drops its rules and rejoins through survivors")
{
  auto e = engine_of(weighted({0, 1, 2, 3}, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 3, 2.0}, {3, 2, 2.0}}));
  auto before = e.established();
  auto out = step(e, {RemoveNode{1}});
  CHECK_FALSE(e.lookup(1, 1));
  CHECK(e.lookup(0, 2)->next == 3);
  CHECK(out.changes == diff_views(before, e.established()));
  CHECK(out.graph_delta.removed_nodes == std::vector<NodeId>{1});
  CHECK(oracle_mismatch(e).empty());
}

TEST_CASE("growing beyond capacity rebuilds")
{
  auto e = engine_of(weighted({0, 1}, {{0, 1, 1.0}}));
  auto before = e.established();
  std::vector<TopologyEvent> batch;
  LinkProperties p;
  p.utilization = 1;
  for (NodeId n = 2; n < 8; ++n) {
    batch.push_back(AddNode{n, NodeLabel::Switch});
    batch.push_back(AddLink{n - 1, n, p});
  }
  auto out = e.step_epoch(batch);
  CHECK(out.rebuilt);
  CHECK(e.length_cap() >= 7);
  CHECK(e.lookup(0, 7)->p_length == 7);
  CHECK(out.changes == diff_views(before, e.established()));
  CHECK(oracle_mismatch(e).empty());
  CHECK(e.check_invariants().empty());
}

TEST_CASE("invalid batches leave the engine untouched")
{
  auto e = engine_of(triangle());
  auto before = e.established();
  auto graph = e.graph();
  LinkProperties zero;
  auto code = [&](std::vector<TopologyEvent> batch) {
    try {
      e.step_epoch(batch);
    }
    catch (const Error& err) {
      return err.code();
    }
    return Errc::ParseError;
  };
  CHECK(code({RemoveLink{0, 1, std::nullopt}, AddLink{0, 1, zero}}) == Errc::InvalidWeight);
  CHECK(code({RemoveLink{0, 1, std::nullopt}, RemoveLink{0, 1, std::nullopt}}) ==
        Errc::UnknownLink);
  CHECK(code({AddNode{5, NodeLabel::Switch}, RemoveNode{9}}) == Errc::UnknownNode);
  CHECK(e.established() == before);
  CHECK(e.graph() == graph);

  try {
    engine_of(weighted({0, 1}, {{0, 1, 0.0}}));
    FAIL("expected InvalidWeight");
  }
  catch (const Error& err) {
    CHECK(err.code() == Errc::InvalidWeight);
  }
}

TEST_CASE("parallel links keep the cheaper copy")
{
  auto e = engine_of(weighted({0, 1}, {{0, 1, 4.0}, {0, 1, 2.0}, {0, 1, 2.0}}));
  CHECK(e.lookup(0, 1)->p_cost == 2.0);
  step(e, {RemoveLink{0, 1, 2.0}});
  CHECK(e.lookup(0, 1)->p_cost == 2.0);
  step(e, {RemoveLink{0, 1, 2.0}});
  CHECK(e.lookup(0, 1)->p_cost == 4.0);
  CHECK(e.check_invariants().empty());
}

TEST_CASE("widest routes prefer width then hops")
{
  auto widest = Strategy::builtin("shortest_widest");
  // Free bandwidth = 100 - utilization.
  auto topo = weighted({0, 1, 2, 3}, {{0, 1, 30.0}, {1, 2, 30.0}, {0, 3, 50.0}, {3, 2, 50.0},
                                      {0, 2, 93.0}});
  auto e = engine_of(topo, widest);
  auto r = e.lookup(0, 2);
  CHECK(r->p_cost == doctest::Approx(70.0));
  CHECK(r->next == 1);
  CHECK(std::isinf(e.lookup(2, 2)->p_cost));
  CHECK(oracle_mismatch(e).empty());
  step(e, {RemoveLink{0, 1, std::nullopt}});
  CHECK(e.lookup(0, 2)->next == 3);
  CHECK(oracle_mismatch(e).empty());
}

TEST_CASE("worker count does not change results")
{
  auto topo = gen_random_connected(30, 2, 5, 11, {PlanKind::Uniform, 11});
  auto a = engine_of(topo, sd(), 1);
  auto b = engine_of(topo, sd(), 3);
  CHECK(a.established() == b.established());
  b.set_workers(2);
  CHECK(b.workers() == 2);
  auto ra = step(a, {RemoveLink{topo.links[0].a, topo.links[0].b, std::nullopt}});
  auto rb = step(b, {RemoveLink{topo.links[0].a, topo.links[0].b, std::nullopt}});
  CHECK(ra.changes == rb.changes);
  CHECK(b.check_invariants().empty());
}
