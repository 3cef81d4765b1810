#include <doctest.h>

#include <chrono>
#include <random>
#include <sstream>

#include "pnstate/evalbench.hpp"
#include "pnstate/parse.hpp"
#include "pnstate/ngram.hpp"
#include "worked_examples.hpp"
#include "testutil.hpp"

using namespace pnstate;

namespace {

// Stored entries as a comparable map keyed by label sequences.
testutil::gram_table snapshot(const ngram_index& idx, const workflow_net& net) {
  testutil::gram_table table;
  idx.for_each_entry([&](std::span<const std::uint32_t> key, const auto& value) {
    std::vector<std::string> labels;
    for (auto k : key) labels.push_back(idx.alphabet()[k]);
    std::set<std::vector<std::string>> markings;
    for (auto s : value) {
      std::vector<std::string> names;
      for (place_id p : idx.state(s)) names.push_back(net.place_name(p));
      markings.insert(std::move(names));
    }
    table[std::move(labels)] = std::move(markings);
  });
  return table;
}

}  // namespace

TEST_CASE("3-gram index of the order fulfillment graph matches the worked table") {
  workflow_net net = fixture_net(fixture_id::order_fulfillment);
  ngram_index idx = build_index(build_reach_graph(net), 3);
  const auto& expected = testutil::order_fulfillment_3gram_table();

  CHECK(idx.size() == expected.size());
  CHECK(snapshot(idx, net) == expected);

  // pruning: the deterministic 1-gram is never extended
  idx.for_each_entry([&](std::span<const std::uint32_t> key, const auto&) {
    if (key.size() >= 2) CHECK(idx.alphabet()[key.back()] != "Ship order");
  });
}

TEST_CASE("pruning stops deterministic grams immediately") {
  const char* doc = R"({
    "places": [{"id":"p0"},{"id":"p1"},{"id":"p2"},{"id":"p3"}],
    "transitions": [{"id":"A","label":"A"},{"id":"B","label":"B"},{"id":"C","label":"C"}],
    "arcs": [{"from":"p0","to":"A"},{"from":"A","to":"p1"},
             {"from":"p1","to":"B"},{"from":"B","to":"p2"},
             {"from":"p2","to":"C"},{"from":"C","to":"p3"}]
  })";
  reach_graph g = build_reach_graph(parse_net(std::string(doc), net_format::native_json));
  ngram_index idx = build_index(g, 5);
  CHECK(idx.size() == 3);
  idx.for_each_entry([&](std::span<const std::uint32_t> key, const auto& value) {
    CHECK(key.size() == 1);
    CHECK(value.size() == 1);
  });
}

TEST_CASE("index values match brute-force path grouping") {
  SUBCASE("choice diamond, n=2, pruned vs completeness") {
    workflow_net net = fixture_net(fixture_id::choice_diamond);
    reach_graph g = build_reach_graph(net);
    auto brute = testutil::brute_force_grams(g, 2);

    index_options unpruned;
    unpruned.prune = false;
    ngram_index idx = build_index(g, 2, unpruned);
    REQUIRE(idx.size() == brute.size());
    for (const auto& [gram, targets] : brute) {
      const auto* value = idx.lookup(gram);
      REQUIRE(value != nullptr);
      std::set<marking> got;
      for (auto s : *value) got.insert(idx.state(s));
      CHECK(got == targets);
    }
  }

  SUBCASE("unpruned equals brute force on the running example") {
    workflow_net net = fixture_net(fixture_id::order_fulfillment);
    reach_graph g = build_reach_graph(net);
    auto brute = testutil::brute_force_grams(g, 3);
    index_options unpruned;
    unpruned.prune = false;
    ngram_index idx = build_index(g, 3, unpruned);
    CHECK(idx.size() == brute.size());
  }
}

TEST_CASE("pruned index stays complete through singleton suffixes") {
  for (fixture_id id : {fixture_id::order_fulfillment, fixture_id::invoicing, fixture_id::k3}) {
    workflow_net net = fixture_net(id);
    reach_graph g = build_reach_graph(net);
    ngram_index pruned = build_index(g, 3);
    auto brute = testutil::brute_force_grams(g, 3);

    index_options opts;
    opts.prune = false;
    CHECK(pruned.size() <= build_index(g, 3, opts).size());

    for (const auto& [gram, targets] : brute) {
      const auto* value = pruned.lookup(gram);
      if (value) {
        std::set<marking> got;
        for (auto s : *value) got.insert(pruned.state(s));
        CHECK(got == targets);
        continue;
      }
      // pruned away: some shorter suffix must already pin the target
      bool pinned = false;
      for (std::size_t cut = 1; cut < gram.size() && !pinned; ++cut) {
        std::vector<std::string> suffix(gram.begin() + cut, gram.end());
        const auto* sv = pruned.lookup(suffix);
        if (sv && sv->size() == 1 && targets.size() == 1 &&
            pruned.state((*sv)[0]) == *targets.begin())
          pinned = true;
      }
      CHECK(pinned);
    }
  }
}

TEST_CASE("stored grams shrink monotonically when grown backward") {
  workflow_net net = fixture_net(fixture_id::order_fulfillment);
  ngram_index idx = build_index(build_reach_graph(net), 3);
  idx.for_each_entry([&](std::span<const std::uint32_t> key, const auto& value) {
    if (key.size() < 2) return;
    std::vector<std::string> suffix;
    for (std::size_t i = 1; i < key.size(); ++i) suffix.push_back(idx.alphabet()[key[i]]);
    const auto* shorter = idx.lookup(suffix);
    REQUIRE(shorter != nullptr);
    CHECK(std::includes(shorter->begin(), shorter->end(), value.begin(), value.end()));
  });
}

TEST_CASE("lookups") {
  workflow_net net = fixture_net(fixture_id::order_fulfillment);
  ngram_index idx = build_index(build_reach_graph(net), 3);

  std::vector<std::string> gram{"Register order", "Check stock"};
  const auto* value = idx.lookup(gram);
  REQUIRE(value != nullptr);
  REQUIRE(value->size() == 1);
  CHECK(idx.state((*value)[0]) == make_marking(net, {"3", "9"}));

  std::vector<std::string> unknown{"No such activity"};
  CHECK(idx.lookup(unknown) == nullptr);
  std::vector<std::string> nopath{"Ship order", "Register order"};
  CHECK(idx.lookup(nopath) == nullptr);
}

TEST_CASE("k-complexity") {
  auto k_of = [](fixture_id id) {
    return estimate_k_complexity(build_reach_graph(fixture_net(id)), 16);
  };
  CHECK(k_of(fixture_id::seq).value == 1);
  CHECK(k_of(fixture_id::seq).is_finite());
  CHECK(k_of(fixture_id::loop).value == 1);
  CHECK(k_of(fixture_id::k3).value == 3);
  CHECK(k_of(fixture_id::k5).value == 5);
  CHECK(k_of(fixture_id::order_fulfillment).is_infinite());  // loop inside a parallel branch
  CHECK(k_of(fixture_id::invoicing).is_infinite());

  SUBCASE("cap saturation is an answer, not an error") {
    auto rep = estimate_k_complexity(build_reach_graph(fixture_net(fixture_id::k5)), 2);
    CHECK(rep.result == k_complexity_report::outcome::at_least_cap);
    CHECK(rep.value == 2);
  }
}

TEST_CASE("entry cap aborts oversized builds") {
  workflow_net net = fixture_net(fixture_id::order_fulfillment);
  reach_graph g = build_reach_graph(net);
  index_options tiny;
  tiny.max_entries = 5;
  CHECK_THROWS_AS(build_index(g, 3, tiny), index_cap_error);
}

TEST_CASE("index serialization") {
  workflow_net net = fixture_net(fixture_id::order_fulfillment);
  reach_graph g = build_reach_graph(net);
  ngram_index idx = build_index(g, 3);

  std::vector<std::string> place_names;
  for (place_id p = 0; p < net.place_count(); ++p) place_names.push_back(net.place_name(p));

  std::ostringstream out;
  serialize_index(idx, g.initial_marking(), place_names, net.observable_labels(), out);
  std::string bytes = out.str();

  SUBCASE("round-trip preserves everything") {
    std::istringstream in(bytes);
    index_file file = deserialize_index(in);
    CHECK(file.index.max_len() == 3);
    CHECK(file.index.size() == idx.size());
    CHECK(file.initial == g.initial_marking());
    CHECK(file.place_names == place_names);
    CHECK(file.net_labels == net.observable_labels());
    CHECK(snapshot(file.index, net) == snapshot(idx, net));

    // serialization is deterministic
    std::ostringstream again;
    serialize_index(file.index, file.initial, file.place_names, file.net_labels, again);
    CHECK(again.str() == bytes);
  }

  SUBCASE("truncated stream is corruption") {
    std::istringstream in(bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(deserialize_index(in), index_io_error);
  }

  SUBCASE("flipped byte is corruption") {
    std::string mangled = bytes;
    mangled[mangled.size() / 2] ^= 0x40;
    std::istringstream in(mangled);
    CHECK_THROWS_AS(deserialize_index(in), index_io_error);
  }

  SUBCASE("version mismatch is reported as such") {
    std::string other = bytes;
    other[4] = 9;  // version field follows the 4-byte magic
    std::istringstream in(other);
    CHECK_THROWS_WITH_AS(deserialize_index(in), doctest::Contains("version mismatch"),
                         index_io_error);
  }

  SUBCASE("text dump lists grams with their states") {
    std::ostringstream dump;
    dump_index_text(idx, place_names, dump);
    CHECK(dump.str().find("Register order\t{2,9}") != std::string::npos);
    CHECK(dump.str().find("Issue invoice, Check stock\t{3,10}") != std::string::npos);
  }
}

TEST_CASE("lookup latency stays flat as the index grows" * doctest::timeout(120)) {
  // Synthetic graphs with m*m uniquely labeled edges produce exactly m*m
  // singleton 1-grams; p99 lookup time must not scale with entry count.
  auto build_synthetic = [](std::uint32_t m) {
    graph_builder gb;
    std::vector<reach_graph::vertex_id> vs;
    for (std::uint32_t i = 0; i < m; ++i)
      vs.push_back(gb.intern_vertex(marking::single(i)));
    gb.set_initial(vs[0]);
    for (std::uint32_t i = 0; i < m; ++i)
      for (std::uint32_t j = 0; j < m; ++j)
        gb.add_edge(vs[i],
                    gb.intern_label("L" + std::to_string(i) + "_" + std::to_string(j)), vs[j]);
    return gb.finish();
  };

  auto p99_lookup_ns = [](const ngram_index& idx, std::uint32_t m) {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::uint32_t> pick(0, m - 1);
    // Pre-intern keys so only the hash lookup is on the clock.
    std::vector<std::vector<std::uint32_t>> keys;
    for (int i = 0; i < 256; ++i) {
      std::string label = "L" + std::to_string(pick(rng)) + "_" + std::to_string(pick(rng));
      keys.push_back({*idx.label_id(label)});
    }
    std::vector<double> samples;
    std::size_t sink = 0;
    for (int s = 0; s < 200; ++s) {
      auto t0 = std::chrono::steady_clock::now();
      for (int i = 0; i < 256; ++i) sink += idx.lookup_reversed(keys[i])->size();
      auto t1 = std::chrono::steady_clock::now();
      samples.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count() / 256.0);
    }
    CHECK(sink == 200 * 256);  // every value is a singleton; also keeps the loop alive
    std::sort(samples.begin(), samples.end());
    return samples[static_cast<std::size_t>(samples.size() * 0.99)];
  };

  double small = 0, large = 0;
  for (std::uint32_t m : {10u, 100u, 1000u}) {
    ngram_index idx = build_index(build_synthetic(m), 1);
    CHECK(idx.size() == static_cast<std::size_t>(m) * m);
    double p99 = p99_lookup_ns(idx, m);
    if (m == 10) small = p99;
    if (m == 1000) large = p99;
  }
  // 10^2 vs 10^6 entries: allow cache effects, forbid growth with size.
  CHECK(large < 12.0 * small + 100.0);
}
