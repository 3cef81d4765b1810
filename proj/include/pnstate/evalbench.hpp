#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pnstate/logio.hpp"
#include "pnstate/net.hpp"
#include "pnstate/query.hpp"
#include "pnstate/reach.hpp"

namespace pnstate {

// Built-in models. seq..k10 are the five synthetic evaluation processes
// (K-complexities 1, 1, 3, 5, 10); order_fulfillment, invoicing and
// choice_diamond back the worked examples and tests.
enum class fixture_id { seq, loop, k3, k5, k10, order_fulfillment, invoicing, choice_diamond };

const char* fixture_name(fixture_id id);
std::optional<fixture_id> find_fixture(std::string_view name);
const char* fixture_json(fixture_id id);
workflow_net fixture_net(fixture_id id);
// The five evaluation fixtures, in order seq, loop, k3, k5, k10.
std::vector<std::pair<std::string, workflow_net>> fixtures();

struct accuracy_row {
  std::string model;
  std::string method;  // "3-gram", "token-replay", "prefix-alignment"
  std::uint32_t n = 0;
  std::uint32_t noise = 0;
  std::uint32_t correct = 0;
  std::uint32_t counted = 0;  // cases with a known next activity
  std::uint32_t cases = 0;
  // Unset for methods this tool does not compute (external baselines).
  std::optional<double> accuracy;
};

// Ratio of cases whose enabled-activity set contains the held-out next
// activity. Cases without a next activity do not count toward the
// denominator.
std::pair<std::uint32_t, std::uint32_t> accuracy(
    std::span<const std::vector<std::string>> enabled_sets,
    std::span<const std::optional<std::string>> next_activities);

struct eval_options {
  std::vector<std::uint32_t> ns{3, 5, 10};
  std::vector<std::uint32_t> noise_levels{0, 1, 2, 3};
  std::uint32_t cases = 1000;
  std::uint32_t min_prefix_len = 3;
  std::uint64_t seed = 1;
  state_selector selector = state_selector::seeded_random;
  bool include_replay = true;
  // Emit a row for the external prefix-alignment baseline with no computed
  // value, so downstream tables keep a column for it.
  bool include_alignment_slot = false;
};

// Full synthetic protocol: simulate cases, truncate to ongoing prefixes,
// inject noise, compute states with every configured method, score
// next-activity enablement.
std::vector<accuracy_row> run_eval(const workflow_net& net, const std::string& model_name,
                                   const eval_options& options = {});

struct bench_report {
  std::string model;
  std::uint32_t n = 0;
  std::uint32_t workers = 1;
  std::size_t graph_vertices = 0;
  std::size_t index_entries = 0;
  double graph_build_s = 0;
  double index_build_s = 0;
  std::uint64_t queries = 0;
  double mean_us = 0;
  double median_us = 0;
  double p99_us = 0;
  double cases_per_second = 0;
};

struct bench_options {
  std::uint32_t cases = 1000;
  std::uint64_t seed = 7;
  std::uint64_t min_queries = 100'000;
  std::uint32_t workers = 1;
  state_selector selector = state_selector::lexicographic_min;
};

// One untimed warm pass, then a timed pass of at least min_queries
// invocations cycling the prefix log.
bench_report run_bench(const workflow_net& net, const std::string& model_name, std::uint32_t n,
                       const bench_options& options = {},
                       const event_log* external_log = nullptr);

}  // namespace pnstate
