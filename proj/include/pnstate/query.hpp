#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "pnstate/net.hpp"
#include "pnstate/ngram.hpp"

namespace pnstate {

enum class state_selector { lexicographic_min, seeded_random };

struct state_answer {
  // Candidate states at the least ambiguous gram length, canonical order.
  std::vector<marking> markings;
  marking chosen;
  // 0 only when the filtered prefix was empty (answer = initial state).
  std::uint32_t gram_len_used = 0;
  // Events dropped as unmodeled while scanning the tail of the prefix.
  std::uint32_t filtered_events = 0;
};

// Instrumentation hook: how much of the prefix a query actually touched.
struct query_stats {
  std::size_t events_read = 0;
  std::size_t index_probes = 0;
};

// Ongoing-state computation from the ending grams of a trace prefix. Scans
// the prefix backward, so cost is bounded by n plus the unmodeled events in
// the scanned tail, independent of trace length. Grows the ending gram while
// it stays ambiguous; on a missing longer gram (pruned away or noise) the
// longest match found so far wins.
state_answer compute_state(const ngram_index& index, const marking& graph_initial,
                           const std::unordered_set<std::string>& net_labels,
                           std::span<const std::string> prefix,
                           state_selector selector = state_selector::lexicographic_min,
                           std::uint64_t seed = 0, query_stats* stats = nullptr);

// Labels of observable transitions enabled in any marking of the silent
// closure of m. Pure-graph vertices sit before decision points, so plain
// enablement would under-report.
std::vector<std::string> next_enabled_activities(const workflow_net& net, const marking& m,
                                                 std::size_t step_bound = 0);

}  // namespace pnstate
