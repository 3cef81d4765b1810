#include "pnstate/evalbench.hpp"

#include <algorithm>
#include <chrono>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "pnstate/ngram.hpp"
#include "pnstate/parse.hpp"
#include "pnstate/replay.hpp"

namespace pnstate {

namespace {

// Order fulfillment with a supplier loop in one parallel branch and an
// optional payment in the other.
constexpr const char* k_order_fulfillment = R"({
  "places": [{"id":"1"},{"id":"2"},{"id":"3"},{"id":"4"},{"id":"5"},{"id":"6"},{"id":"7"},
             {"id":"8"},{"id":"9"},{"id":"10"},{"id":"11"},{"id":"12"},{"id":"13"}],
  "transitions": [
    {"id":"Register order","label":"Register order"},
    {"id":"Check stock","label":"Check stock"},
    {"id":"t1","silent":true},
    {"id":"t2","silent":true},
    {"id":"Contact supplier","label":"Contact supplier"},
    {"id":"t3","silent":true},
    {"id":"t4","silent":true},
    {"id":"Collect from stock","label":"Collect from stock"},
    {"id":"t5","silent":true},
    {"id":"Issue invoice","label":"Issue invoice"},
    {"id":"t6","silent":true},
    {"id":"t7","silent":true},
    {"id":"Register payment","label":"Register payment"},
    {"id":"Ship order","label":"Ship order"}
  ],
  "arcs": [
    {"from":"1","to":"Register order"},
    {"from":"Register order","to":"2"},{"from":"Register order","to":"9"},
    {"from":"2","to":"Check stock"},{"from":"Check stock","to":"3"},
    {"from":"3","to":"t1"},{"from":"t1","to":"4"},
    {"from":"3","to":"t2"},{"from":"t2","to":"5"},
    {"from":"4","to":"Contact supplier"},{"from":"Contact supplier","to":"6"},
    {"from":"6","to":"t3"},{"from":"t3","to":"4"},
    {"from":"6","to":"t4"},{"from":"t4","to":"8"},
    {"from":"5","to":"Collect from stock"},{"from":"Collect from stock","to":"7"},
    {"from":"7","to":"t5"},{"from":"t5","to":"8"},
    {"from":"9","to":"Issue invoice"},{"from":"Issue invoice","to":"10"},
    {"from":"10","to":"t6"},{"from":"t6","to":"11"},
    {"from":"10","to":"t7"},{"from":"t7","to":"12"},
    {"from":"11","to":"Register payment"},{"from":"Register payment","to":"12"},
    {"from":"8","to":"Ship order"},{"from":"12","to":"Ship order"},
    {"from":"Ship order","to":"13"}
  ]
})";

// Invoicing with a Notify loop that can be re-entered from two points, which
// makes a repeated Notify ambiguous between staying late ({5,6}) and looping
// back early ({3,6}).
constexpr const char* k_invoicing = R"({
  "places": [{"id":"1"},{"id":"2"},{"id":"3"},{"id":"4"},{"id":"5"},{"id":"6"},{"id":"7"},{"id":"8"}],
  "transitions": [
    {"id":"Register invoice","label":"Register invoice"},
    {"id":"n1","label":"Notify"},
    {"id":"Post invoice","label":"Post invoice"},
    {"id":"t2","silent":true},
    {"id":"n2","label":"Notify"},
    {"id":"t4","silent":true},
    {"id":"t5","silent":true},
    {"id":"Pay invoice","label":"Pay invoice"}
  ],
  "arcs": [
    {"from":"1","to":"Register invoice"},
    {"from":"Register invoice","to":"2"},{"from":"Register invoice","to":"6"},
    {"from":"2","to":"n1"},{"from":"n1","to":"3"},
    {"from":"3","to":"Post invoice"},{"from":"Post invoice","to":"5"},
    {"from":"5","to":"t2"},{"from":"t2","to":"4"},
    {"from":"4","to":"n2"},{"from":"n2","to":"5"},
    {"from":"5","to":"t4"},{"from":"t4","to":"2"},
    {"from":"5","to":"t5"},{"from":"t5","to":"8"},
    {"from":"8","to":"Pay invoice"},{"from":"6","to":"Pay invoice"},
    {"from":"Pay invoice","to":"7"}
  ]
})";

// Three-way silent choice into observable branches that merge through a
// silent XOR-join; the shape that separates the traversal policies.
constexpr const char* k_choice_diamond = R"({
  "places": [{"id":"1"},{"id":"2"},{"id":"3"},{"id":"4"},{"id":"5"},{"id":"6"},{"id":"7"},
             {"id":"8"},{"id":"9"},{"id":"10"}],
  "transitions": [
    {"id":"So","label":"So"},
    {"id":"s1","silent":true},{"id":"s2","silent":true},{"id":"s3","silent":true},
    {"id":"A","label":"A"},{"id":"B","label":"B"},{"id":"C","label":"C"},
    {"id":"j1","silent":true},{"id":"j2","silent":true},{"id":"j3","silent":true},
    {"id":"Se","label":"Se"}
  ],
  "arcs": [
    {"from":"1","to":"So"},{"from":"So","to":"2"},
    {"from":"2","to":"s1"},{"from":"s1","to":"3"},
    {"from":"2","to":"s2"},{"from":"s2","to":"4"},
    {"from":"2","to":"s3"},{"from":"s3","to":"5"},
    {"from":"3","to":"A"},{"from":"A","to":"6"},
    {"from":"4","to":"B"},{"from":"B","to":"7"},
    {"from":"5","to":"C"},{"from":"C","to":"8"},
    {"from":"6","to":"j1"},{"from":"j1","to":"9"},
    {"from":"7","to":"j2"},{"from":"j2","to":"9"},
    {"from":"8","to":"j3"},{"from":"j3","to":"9"},
    {"from":"9","to":"Se"},{"from":"Se","to":"10"}
  ]
})";

// Sequential process with two decision points; every activity pins the state.
constexpr const char* k_seq = R"({
  "places": [{"id":"1"},{"id":"2"},{"id":"3"},{"id":"4"},{"id":"5"},{"id":"6"}],
  "transitions": [
    {"id":"A","label":"A"},{"id":"B","label":"B"},{"id":"C","label":"C"},
    {"id":"D","label":"D"},{"id":"E","label":"E"},{"id":"F","label":"F"},
    {"id":"G","label":"G"}
  ],
  "arcs": [
    {"from":"1","to":"A"},{"from":"A","to":"2"},
    {"from":"2","to":"B"},{"from":"B","to":"3"},
    {"from":"2","to":"C"},{"from":"C","to":"3"},
    {"from":"3","to":"D"},{"from":"D","to":"4"},
    {"from":"4","to":"E"},{"from":"E","to":"5"},
    {"from":"4","to":"F"},{"from":"F","to":"5"},
    {"from":"5","to":"G"},{"from":"G","to":"6"}
  ]
})";

// Seq with a rework loop back to the first decision.
constexpr const char* k_loop = R"({
  "places": [{"id":"1"},{"id":"2"},{"id":"3"},{"id":"4"},{"id":"5"},{"id":"6"},{"id":"7"}],
  "transitions": [
    {"id":"A","label":"A"},{"id":"B","label":"B"},{"id":"C","label":"C"},
    {"id":"D","label":"D"},{"id":"E","label":"E"},{"id":"R","label":"R"},
    {"id":"F","label":"F"},{"id":"G","label":"G"},{"id":"H","label":"H"}
  ],
  "arcs": [
    {"from":"1","to":"A"},{"from":"A","to":"2"},
    {"from":"2","to":"B"},{"from":"B","to":"3"},
    {"from":"2","to":"C"},{"from":"C","to":"3"},
    {"from":"3","to":"D"},{"from":"D","to":"4"},
    {"from":"4","to":"E"},{"from":"E","to":"5"},
    {"from":"4","to":"R"},{"from":"R","to":"2"},
    {"from":"5","to":"F"},{"from":"F","to":"6"},
    {"from":"5","to":"G"},{"from":"G","to":"6"},
    {"from":"6","to":"H"},{"from":"H","to":"7"}
  ]
})";

// Two parallel branches of two activities each: K = 2 + 1 = 3.
constexpr const char* k_k3 = R"({
  "places": [{"id":"1"},{"id":"a1"},{"id":"a2"},{"id":"a3"},
             {"id":"b1"},{"id":"b2"},{"id":"b3"},{"id":"z"}],
  "transitions": [
    {"id":"Start","label":"Start"},
    {"id":"A1","label":"A1"},{"id":"A2","label":"A2"},
    {"id":"B1","label":"B1"},{"id":"B2","label":"B2"},
    {"id":"End","label":"End"}
  ],
  "arcs": [
    {"from":"1","to":"Start"},
    {"from":"Start","to":"a1"},{"from":"Start","to":"b1"},
    {"from":"a1","to":"A1"},{"from":"A1","to":"a2"},
    {"from":"a2","to":"A2"},{"from":"A2","to":"a3"},
    {"from":"b1","to":"B1"},{"from":"B1","to":"b2"},
    {"from":"b2","to":"B2"},{"from":"B2","to":"b3"},
    {"from":"a3","to":"End"},{"from":"b3","to":"End"},
    {"from":"End","to":"z"}
  ]
})";

// Three parallel branches of two activities each: K = 2 + 2 + 1 = 5.
constexpr const char* k_k5 = R"({
  "places": [{"id":"1"},{"id":"a1"},{"id":"a2"},{"id":"a3"},
             {"id":"b1"},{"id":"b2"},{"id":"b3"},
             {"id":"c1"},{"id":"c2"},{"id":"c3"},{"id":"z"}],
  "transitions": [
    {"id":"Start","label":"Start"},
    {"id":"A1","label":"A1"},{"id":"A2","label":"A2"},
    {"id":"B1","label":"B1"},{"id":"B2","label":"B2"},
    {"id":"C1","label":"C1"},{"id":"C2","label":"C2"},
    {"id":"End","label":"End"}
  ],
  "arcs": [
    {"from":"1","to":"Start"},
    {"from":"Start","to":"a1"},{"from":"Start","to":"b1"},{"from":"Start","to":"c1"},
    {"from":"a1","to":"A1"},{"from":"A1","to":"a2"},
    {"from":"a2","to":"A2"},{"from":"A2","to":"a3"},
    {"from":"b1","to":"B1"},{"from":"B1","to":"b2"},
    {"from":"b2","to":"B2"},{"from":"B2","to":"b3"},
    {"from":"c1","to":"C1"},{"from":"C1","to":"c2"},
    {"from":"c2","to":"C2"},{"from":"C2","to":"c3"},
    {"from":"a3","to":"End"},{"from":"b3","to":"End"},{"from":"c3","to":"End"},
    {"from":"End","to":"z"}
  ]
})";

// Five parallel branches with lengths 3,2,2,2,2: K = 3+2+2+2 + 1 = 10.
constexpr const char* k_k10 = R"({
  "places": [{"id":"1"},
             {"id":"a1"},{"id":"a2"},{"id":"a3"},{"id":"a4"},
             {"id":"b1"},{"id":"b2"},{"id":"b3"},
             {"id":"c1"},{"id":"c2"},{"id":"c3"},
             {"id":"d1"},{"id":"d2"},{"id":"d3"},
             {"id":"e1"},{"id":"e2"},{"id":"e3"},{"id":"z"}],
  "transitions": [
    {"id":"Start","label":"Start"},
    {"id":"A1","label":"A1"},{"id":"A2","label":"A2"},{"id":"A3","label":"A3"},
    {"id":"B1","label":"B1"},{"id":"B2","label":"B2"},
    {"id":"C1","label":"C1"},{"id":"C2","label":"C2"},
    {"id":"D1","label":"D1"},{"id":"D2","label":"D2"},
    {"id":"E1","label":"E1"},{"id":"E2","label":"E2"},
    {"id":"End","label":"End"}
  ],
  "arcs": [
    {"from":"1","to":"Start"},
    {"from":"Start","to":"a1"},{"from":"Start","to":"b1"},{"from":"Start","to":"c1"},
    {"from":"Start","to":"d1"},{"from":"Start","to":"e1"},
    {"from":"a1","to":"A1"},{"from":"A1","to":"a2"},
    {"from":"a2","to":"A2"},{"from":"A2","to":"a3"},
    {"from":"a3","to":"A3"},{"from":"A3","to":"a4"},
    {"from":"b1","to":"B1"},{"from":"B1","to":"b2"},
    {"from":"b2","to":"B2"},{"from":"B2","to":"b3"},
    {"from":"c1","to":"C1"},{"from":"C1","to":"c2"},
    {"from":"c2","to":"C2"},{"from":"C2","to":"c3"},
    {"from":"d1","to":"D1"},{"from":"D1","to":"d2"},
    {"from":"d2","to":"D2"},{"from":"D2","to":"d3"},
    {"from":"e1","to":"E1"},{"from":"E1","to":"e2"},
    {"from":"e2","to":"E2"},{"from":"E2","to":"e3"},
    {"from":"a4","to":"End"},{"from":"b3","to":"End"},{"from":"c3","to":"End"},
    {"from":"d3","to":"End"},{"from":"e3","to":"End"},
    {"from":"End","to":"z"}
  ]
})";

struct fixture_entry {
  fixture_id id;
  const char* name;
  const char* json;
};

constexpr fixture_entry k_fixtures[] = {
    {fixture_id::seq, "Seq", k_seq},
    {fixture_id::loop, "Loop", k_loop},
    {fixture_id::k3, "K3", k_k3},
    {fixture_id::k5, "K5", k_k5},
    {fixture_id::k10, "K10", k_k10},
    {fixture_id::order_fulfillment, "OrderFulfillment", k_order_fulfillment},
    {fixture_id::invoicing, "Invoicing", k_invoicing},
    {fixture_id::choice_diamond, "ChoiceDiamond", k_choice_diamond},
};

const fixture_entry& entry(fixture_id id) {
  for (const auto& e : k_fixtures)
    if (e.id == id) return e;
  throw error("evalbench: unknown fixture");
}

}  // namespace

const char* fixture_name(fixture_id id) { return entry(id).name; }
const char* fixture_json(fixture_id id) { return entry(id).json; }

std::optional<fixture_id> find_fixture(std::string_view name) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
  };
  std::string want = lower(name);
  for (const auto& e : k_fixtures)
    if (lower(e.name) == want) return e.id;
  return std::nullopt;
}

workflow_net fixture_net(fixture_id id) {
  return parse_net(std::string(entry(id).json), net_format::native_json);
}

std::vector<std::pair<std::string, workflow_net>> fixtures() {
  std::vector<std::pair<std::string, workflow_net>> out;
  for (fixture_id id : {fixture_id::seq, fixture_id::loop, fixture_id::k3, fixture_id::k5,
                        fixture_id::k10})
    out.emplace_back(fixture_name(id), fixture_net(id));
  return out;
}

std::pair<std::uint32_t, std::uint32_t> accuracy(
    std::span<const std::vector<std::string>> enabled_sets,
    std::span<const std::optional<std::string>> next_activities) {
  if (enabled_sets.size() != next_activities.size())
    throw error("evalbench: accuracy inputs disagree on case count");
  std::uint32_t correct = 0, counted = 0;
  for (std::size_t i = 0; i < enabled_sets.size(); ++i) {
    if (!next_activities[i]) continue;
    ++counted;
    const auto& set = enabled_sets[i];
    if (std::binary_search(set.begin(), set.end(), *next_activities[i])) ++correct;
  }
  return {correct, counted};
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed ^ (salt * 0x9E3779B97F4A7C15ull);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  return x;
}

}  // namespace

std::vector<accuracy_row> run_eval(const workflow_net& raw_net, const std::string& model_name,
                                   const eval_options& options) {
  workflow_net net = normalize_mixed_xor_splits(raw_net);
  reach_graph graph = build_reach_graph(net);
  std::unordered_set<std::string> net_labels;
  for (const auto& l : net.observable_labels()) net_labels.insert(l);

  simulated_log sim = simulate_log(graph, options.cases, options.seed);
  prefix_result prefixes = make_prefixes(sim.log, options.min_prefix_len, options.seed + 1);

  // Held-out next activity per retained case: the event right after the
  // prefix in the full simulated trace.
  std::unordered_map<std::string, const trace*> full_by_case;
  for (const trace& t : sim.log.traces) full_by_case[t.case_id] = &t;
  std::vector<std::optional<std::string>> next;
  next.reserve(prefixes.log.traces.size());
  for (std::size_t i = 0; i < prefixes.log.traces.size(); ++i) {
    const trace& cut = prefixes.log.traces[i];
    const trace& full = *full_by_case.at(cut.case_id);
    std::size_t m = prefixes.prefix_lengths[i];
    if (m < full.events.size()) {
      next.emplace_back(full.events[m].activity);
    } else {
      next.emplace_back(std::nullopt);
    }
  }

  std::vector<ngram_index> indexes;
  for (std::uint32_t n : options.ns) indexes.push_back(build_index(graph, n));

  std::vector<accuracy_row> rows;
  for (std::uint32_t noise : options.noise_levels) {
    noise_spec spec;
    spec.operations_per_case = noise;
    spec.seed = mix_seed(options.seed, 100 + noise);
    event_log observed = noise == 0 ? prefixes.log : inject_noise(prefixes.log, spec);

    for (std::size_t ni = 0; ni < options.ns.size(); ++ni) {
      const ngram_index& index = indexes[ni];
      std::vector<std::vector<std::string>> enabled;
      enabled.reserve(observed.traces.size());
      for (std::size_t c = 0; c < observed.traces.size(); ++c) {
        auto labels = observed.traces[c].activities();
        state_answer ans = compute_state(index, graph.initial_marking(), net_labels, labels,
                                         options.selector, mix_seed(options.seed, c));
        enabled.push_back(next_enabled_activities(net, ans.chosen));
      }
      auto [correct, counted] = accuracy(enabled, next);
      accuracy_row row;
      row.model = model_name;
      row.method = std::to_string(options.ns[ni]) + "-gram";
      row.n = options.ns[ni];
      row.noise = noise;
      row.correct = correct;
      row.counted = counted;
      row.cases = static_cast<std::uint32_t>(observed.traces.size());
      row.accuracy = counted ? static_cast<double>(correct) / counted : 1.0;
      rows.push_back(std::move(row));
    }

    if (options.include_replay) {
      std::vector<std::vector<std::string>> enabled;
      enabled.reserve(observed.traces.size());
      for (const trace& t : observed.traces) {
        auto labels = t.activities();
        replay_result r = token_replay(net, labels);
        // A replay that had to conjure tokens sits outside the reachable
        // state space; such a state is no answer, so it scores as enabling
        // nothing.
        if (r.missing_tokens_added > 0) {
          enabled.emplace_back();
        } else {
          enabled.push_back(replay_next_enabled(net, r.marking));
        }
      }
      auto [correct, counted] = accuracy(enabled, next);
      accuracy_row row;
      row.model = model_name;
      row.method = "token-replay";
      row.noise = noise;
      row.correct = correct;
      row.counted = counted;
      row.cases = static_cast<std::uint32_t>(observed.traces.size());
      row.accuracy = counted ? static_cast<double>(correct) / counted : 1.0;
      rows.push_back(std::move(row));
    }

    if (options.include_alignment_slot) {
      accuracy_row row;
      row.model = model_name;
      row.method = "prefix-alignment";
      row.noise = noise;
      row.cases = static_cast<std::uint32_t>(observed.traces.size());
      rows.push_back(std::move(row));  // accuracy left unset: external baseline
    }
  }
  return rows;
}

bench_report run_bench(const workflow_net& raw_net, const std::string& model_name,
                       std::uint32_t n, const bench_options& options,
                       const event_log* external_log) {
  using clock = std::chrono::steady_clock;
  workflow_net net = normalize_mixed_xor_splits(raw_net);

  bench_report report;
  report.model = model_name;
  report.n = n;
  report.workers = std::max(1u, options.workers);

  auto t0 = clock::now();
  reach_graph graph = build_reach_graph(net);
  auto t1 = clock::now();
  ngram_index index = build_index(graph, n);
  auto t2 = clock::now();
  report.graph_build_s = std::chrono::duration<double>(t1 - t0).count();
  report.index_build_s = std::chrono::duration<double>(t2 - t1).count();
  report.graph_vertices = graph.vertex_count();
  report.index_entries = index.size();

  std::unordered_set<std::string> net_labels;
  for (const auto& l : net.observable_labels()) net_labels.insert(l);

  std::vector<std::vector<std::string>> queries;
  if (external_log) {
    for (const trace& t : external_log->traces) queries.push_back(t.activities());
  } else {
    simulated_log sim = simulate_log(graph, options.cases, options.seed);
    prefix_result prefixes = make_prefixes(sim.log, 1, options.seed + 1);
    for (const trace& t : prefixes.log.traces) queries.push_back(t.activities());
  }
  if (queries.empty()) throw error("evalbench: no queries to benchmark");

  const marking initial = graph.initial_marking();

  // Warm pass, untimed.
  for (const auto& q : queries)
    compute_state(index, initial, net_labels, q, options.selector, options.seed);

  const std::uint64_t total =
      std::max<std::uint64_t>(options.min_queries, queries.size());
  const std::uint32_t workers = report.workers;
  std::vector<std::vector<double>> samples(workers);
  auto worker = [&](std::uint32_t w) {
    std::uint64_t share = total / workers + (w < total % workers ? 1 : 0);
    auto& out = samples[w];
    out.reserve(share);
    std::size_t qi = w % queries.size();
    for (std::uint64_t i = 0; i < share; ++i) {
      auto start = clock::now();
      compute_state(index, initial, net_labels, queries[qi], options.selector, options.seed + i);
      auto stop = clock::now();
      out.push_back(std::chrono::duration<double, std::micro>(stop - start).count());
      if (++qi == queries.size()) qi = 0;
    }
  };

  auto wall0 = clock::now();
  if (workers == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (std::uint32_t w = 0; w < workers; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }
  auto wall1 = clock::now();

  std::vector<double> all;
  for (auto& s : samples) all.insert(all.end(), s.begin(), s.end());
  std::sort(all.begin(), all.end());
  report.queries = all.size();
  double sum = 0;
  for (double v : all) sum += v;
  report.mean_us = sum / static_cast<double>(all.size());
  report.median_us = all[all.size() / 2];
  report.p99_us = all[std::min(all.size() - 1, static_cast<std::size_t>(all.size() * 0.99))];
  double wall_s = std::chrono::duration<double>(wall1 - wall0).count();
  report.cases_per_second = static_cast<double>(all.size()) / wall_s;
  return report;
}

}  // namespace pnstate
