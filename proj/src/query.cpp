#include "pnstate/query.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <unordered_set>

#include "pnstate/reach.hpp"

namespace pnstate {

state_answer compute_state(const ngram_index& index, const marking& graph_initial,
                           const std::unordered_set<std::string>& net_labels,
                           std::span<const std::string> prefix, state_selector selector,
                           std::uint64_t seed, query_stats* stats) {
  query_stats local;
  query_stats& st = stats ? *stats : local;

  const std::uint32_t n = index.max_len();
  state_answer answer;

  // Backward scan over the tail: the last n modeled labels (newest first),
  // counting the unmodeled events dropped on the way. Cost is bounded by n
  // plus those drops, never by the prefix length.
  std::vector<std::optional<std::uint32_t>> tail;
  tail.reserve(n);
  for (std::size_t pos = prefix.size(); pos > 0 && tail.size() < n;) {
    const std::string& label = prefix[--pos];
    ++st.events_read;
    if (net_labels.count(label)) {
      tail.push_back(index.label_id(label));
    } else {
      ++answer.filtered_events;
    }
  }

  if (tail.empty()) {
    answer.markings = {graph_initial};
    answer.chosen = graph_initial;
    answer.gram_len_used = 0;
    return answer;
  }

  if (!tail.front())
    throw unknown_activity_error(
        "the ending activity is in the model but no path fires it (dead transition?)");

  std::vector<std::uint32_t> key{*tail.front()};  // reversed key, last activity first
  ++st.index_probes;
  const std::vector<ngram_index::state_id>* best = index.lookup_reversed(key);
  std::uint32_t best_len = 1;

  for (std::uint32_t m = 1; best->size() > 1 && m < tail.size(); ++m) {
    if (!tail[m]) break;  // label never occurs on a graph path
    key.push_back(*tail[m]);
    ++st.index_probes;
    const auto* grown = index.lookup_reversed(key);
    if (!grown) break;  // pruned away or noise: keep the best match so far
    if (grown->size() < best->size()) {
      best = grown;
      best_len = m + 1;
    }
  }

  answer.markings.reserve(best->size());
  for (auto s : *best) answer.markings.push_back(index.state(s));
  answer.gram_len_used = best_len;
  if (selector == state_selector::seeded_random && answer.markings.size() > 1) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, answer.markings.size() - 1);
    answer.chosen = answer.markings[pick(rng)];
  } else {
    answer.chosen = answer.markings.front();
  }
  return answer;
}

std::vector<std::string> next_enabled_activities(const workflow_net& net, const marking& m,
                                                 std::size_t step_bound) {
  const std::size_t bound =
      step_bound ? step_bound
                 : std::max<std::size_t>(64, net.transition_count() * net.place_count() * 4);
  std::unordered_set<std::string> labels;
  std::unordered_set<marking, marking_hash> seen{m};
  std::deque<marking> pending{m};
  std::size_t steps = 0;
  while (!pending.empty()) {
    marking cur = std::move(pending.front());
    pending.pop_front();
    if (++steps > bound)
      throw cycle_guard_error("silent closure exceeded " + std::to_string(bound) +
                              " markings from " + net.format_marking(m));
    for (trans_id t : enabled_transitions(net, cur)) {
      if (net.is_observable(t)) {
        labels.insert(net.label(t));
      } else {
        marking next = fire(net, cur, t);
        if (seen.insert(next).second) pending.push_back(std::move(next));
      }
    }
  }
  std::vector<std::string> out(labels.begin(), labels.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace pnstate
