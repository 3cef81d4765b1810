#include <doctest.h>

#include "pnstate/evalbench.hpp"
#include "pnstate/logio.hpp"
#include "pnstate/replay.hpp"
#include "testutil.hpp"

using namespace pnstate;

TEST_CASE("fitting traces replay cleanly to the final marking") {
  workflow_net net = fixture_net(fixture_id::order_fulfillment);
  std::vector<std::string> trace{"Register order", "Check stock",      "Issue invoice",
                                 "Contact supplier", "Register payment", "Contact supplier",
                                 "Ship order"};
  replay_result r = token_replay(net, trace);
  CHECK(r.missing_tokens_added == 0);
  CHECK(r.unmodeled_skipped == 0);
  CHECK(r.marking.is_safe_set());
  CHECK(r.marking.as_marking() == net.final_marking());
}

TEST_CASE("the non-fitting prefix lands on an unreachable superset marking") {
  workflow_net net = fixture_net(fixture_id::order_fulfillment);
  std::vector<std::string> prefix{"Register order", "Check stock", "Collect from stock",
                                  "Register payment"};
  replay_result r = token_replay(net, prefix);
  CHECK(r.missing_tokens_added >= 1);

  // exact heuristic outcome: stock collected, payment forced via a token
  // conjured into place 11
  token_bag expected;
  for (auto p : make_marking(net, {"8", "9", "12"})) expected.add(p);
  CHECK(r.marking == expected);

  complete_reach_graph oracle = build_complete_reach_graph(net);
  validate_reachability(r, oracle.vertices);
  REQUIRE(r.reachable.has_value());
  CHECK_FALSE(*r.reachable);

  // strictly larger than reachable markings: its support strictly contains one
  marking support = r.marking.as_marking();
  bool superset_of_reachable = false;
  for (const marking& m : oracle.vertices) {
    if (m.size() < support.size() && support.contains_all(m.places())) {
      superset_of_reachable = true;
      break;
    }
  }
  CHECK(superset_of_reachable);
}

TEST_CASE("unmodeled labels are skipped and counted") {
  workflow_net net = fixture_net(fixture_id::order_fulfillment);
  std::vector<std::string> prefix{"Fax machine", "Register order", "Espresso"};
  replay_result r = token_replay(net, prefix);
  CHECK(r.unmodeled_skipped == 2);
  CHECK(r.missing_tokens_added == 0);
}

TEST_CASE("replay of fitting walks matches the graph vertex on unambiguous nets") {
  workflow_net net = fixture_net(fixture_id::order_fulfillment);
  reach_graph g = build_reach_graph(net);
  std::vector<testutil::walk> walks;
  testutil::enumerate_walks(g, 7, walks);
  for (const auto& w : walks) {
    replay_result r = token_replay(net, w.labels);
    CHECK(r.missing_tokens_added == 0);
    REQUIRE(r.marking.is_safe_set());
    CHECK(r.marking.as_marking() == g.vertex(w.end));
  }
}

TEST_CASE("a fitting log on the ambiguous net still trips replay") {
  workflow_net net = fixture_net(fixture_id::invoicing);
  reach_graph g = build_reach_graph(net);
  simulated_log sim = simulate_log(g, 1000, 99);
  complete_reach_graph oracle = build_complete_reach_graph(net);

  int unreachable = 0;
  for (const trace& t : sim.log.traces) {
    replay_result r = token_replay(net, t.activities());
    validate_reachability(r, oracle.vertices);
    if (!*r.reachable) ++unreachable;
  }
  CHECK(unreachable >= 1);
  // ... but it stays the exception, not the rule
  CHECK(unreachable < 500);
}

TEST_CASE("missing tokens grow with injected noise") {
  workflow_net net = fixture_net(fixture_id::order_fulfillment);
  reach_graph g = build_reach_graph(net);
  simulated_log sim = simulate_log(g, 1000, 4242);
  prefix_result prefixes = make_prefixes(sim.log, 3, 4243);

  double previous = -1;
  for (std::uint32_t level = 0; level <= 3; ++level) {
    noise_spec spec;
    spec.operations_per_case = level;
    spec.seed = 5000 + level;
    event_log noised = inject_noise(prefixes.log, spec);
    std::uint64_t total = 0;
    for (const trace& t : noised.traces) total += token_replay(net, t.activities()).missing_tokens_added;
    double mean = static_cast<double>(total) / static_cast<double>(noised.traces.size());
    CHECK(mean >= previous);
    previous = mean;
  }
  CHECK(previous > 0);
}
