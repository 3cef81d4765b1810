#include "pnstate/replay.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>
#include <unordered_set>

namespace pnstate {

token_bag::token_bag(const marking& m) {
  for (place_id p : m) entries_.emplace_back(p, 1);
}

std::uint32_t token_bag::count(place_id p) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), std::make_pair(p, 0u));
  return it != entries_.end() && it->first == p ? it->second : 0;
}

std::size_t token_bag::total_tokens() const {
  std::size_t sum = 0;
  for (auto [p, c] : entries_) sum += c;
  return sum;
}

void token_bag::add(place_id p, std::uint32_t k) {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), std::make_pair(p, 0u));
  if (it != entries_.end() && it->first == p) {
    it->second += k;
  } else {
    entries_.insert(it, {p, k});
  }
}

void token_bag::remove(place_id p, std::uint32_t k) {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), std::make_pair(p, 0u));
  if (it == entries_.end() || it->first != p || it->second < k)
    throw not_enabled_error("token bag lacks a token in place id " + std::to_string(p));
  it->second -= k;
  if (it->second == 0) entries_.erase(it);
}

bool token_bag::covers(std::span<const place_id> places) const {
  return std::all_of(places.begin(), places.end(), [&](place_id p) { return count(p) > 0; });
}

bool token_bag::is_safe_set() const {
  return std::all_of(entries_.begin(), entries_.end(), [](auto e) { return e.second == 1; });
}

marking token_bag::as_marking() const {
  std::vector<place_id> ps;
  for (auto [p, c] : entries_) {
    if (c != 1) throw safeness_error("token bag is not 1-safe");
    ps.push_back(p);
  }
  return marking(std::move(ps));
}

namespace {

token_bag fire_bag(const workflow_net& net, token_bag bag, trans_id t) {
  for (place_id p : net.inputs(t)) bag.remove(p);
  for (place_id p : net.outputs(t)) bag.add(p);
  return bag;
}

std::vector<trans_id> enabled_silents_bag(const workflow_net& net, const token_bag& bag) {
  std::vector<trans_id> out;
  for (auto [p, c] : bag.entries()) {
    for (trans_id t : net.place_outputs(p)) {
      if (net.is_silent(t) && bag.covers(net.inputs(t))) out.push_back(t);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t bound_for(const workflow_net& net, std::size_t requested) {
  if (requested) return requested;
  return std::max<std::size_t>(64, net.transition_count() * net.place_count() * 4);
}

// Advance through non-decision silent transitions, smallest id first. The
// step budget keeps off-space multiset markings from spinning; when it runs
// out the bag is returned as-is (this is a heuristic baseline, not a
// verifier).
token_bag advance_bag_lazy(const workflow_net& net, token_bag bag, std::size_t bound) {
  for (std::size_t steps = 0; steps <= bound; ++steps) {
    bool moved = false;
    for (trans_id t : enabled_silents_bag(net, bag)) {
      if (!net.is_xor_split_silent(t)) {
        bag = fire_bag(net, bag, t);
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return bag;
}

}  // namespace

replay_result token_replay(const workflow_net& net, std::span<const std::string> prefix,
                           std::size_t step_bound) {
  const std::size_t bound = bound_for(net, step_bound);
  replay_result result;
  result.marking = advance_bag_lazy(net, token_bag(net.initial_marking()), bound);

  std::unordered_map<std::string, std::vector<trans_id>> by_label;
  for (trans_id t = 0; t < net.transition_count(); ++t)
    if (net.is_observable(t)) by_label[net.label(t)].push_back(t);

  for (const std::string& label : prefix) {
    auto cand_it = by_label.find(label);
    if (cand_it == by_label.end()) {
      ++result.unmodeled_skipped;
      continue;
    }
    const std::vector<trans_id>& candidates = cand_it->second;

    // Shortest silent path that enables any candidate; among equally close
    // candidates the smallest transition id fires. The search gives up once
    // its step budget is spent and falls through to token insertion.
    bool fired = false;
    {
      std::unordered_set<token_bag, token_bag_hash> seen{result.marking};
      std::deque<token_bag> level{result.marking};
      std::size_t steps = 0;
      while (!level.empty() && !fired && steps <= bound) {
        std::deque<token_bag> next_level;
        for (token_bag& bag : level) {
          if (fired) break;
          for (trans_id t : candidates) {
            if (bag.covers(net.inputs(t))) {
              result.marking = fire_bag(net, bag, t);
              fired = true;
              break;
            }
          }
          if (fired) break;
          for (trans_id t : enabled_silents_bag(net, bag)) {
            if (++steps > bound) break;
            token_bag nb = fire_bag(net, bag, t);
            if (seen.insert(nb).second) next_level.push_back(std::move(nb));
          }
          if (steps > bound) break;
        }
        level = std::move(next_level);
      }
    }

    if (!fired) {
      // Insert artificial tokens into the missing input places of the
      // candidate needing the fewest; ties go to the smallest id.
      trans_id best = candidates.front();
      std::size_t best_missing = SIZE_MAX;
      for (trans_id t : candidates) {
        std::size_t missing = 0;
        for (place_id p : net.inputs(t))
          if (result.marking.count(p) == 0) ++missing;
        if (missing < best_missing) {
          best_missing = missing;
          best = t;
        }
      }
      for (place_id p : net.inputs(best)) {
        if (result.marking.count(p) == 0) {
          result.marking.add(p);
          ++result.missing_tokens_added;
          ++result.consumed_artificially;
        }
      }
      result.marking = fire_bag(net, result.marking, best);
    }
    result.marking = advance_bag_lazy(net, result.marking, bound);
  }
  return result;
}

void validate_reachability(replay_result& result, const std::vector<marking>& reachable) {
  if (!result.marking.is_safe_set()) {
    result.reachable = false;
    return;
  }
  marking m = result.marking.as_marking();
  result.reachable =
      std::find(reachable.begin(), reachable.end(), m) != reachable.end();
}

std::vector<std::string> replay_next_enabled(const workflow_net& net, const token_bag& bag,
                                             std::size_t step_bound) {
  const std::size_t bound = bound_for(net, step_bound);
  std::unordered_set<std::string> labels;
  std::unordered_set<token_bag, token_bag_hash> seen{bag};
  std::deque<token_bag> pending{bag};
  std::size_t steps = 0;
  while (!pending.empty()) {
    token_bag cur = std::move(pending.front());
    pending.pop_front();
    if (++steps > bound)
      throw cycle_guard_error("replay silent closure exceeded " + std::to_string(bound) +
                              " markings");
    for (auto [p, c] : cur.entries()) {
      for (trans_id t : net.place_outputs(p)) {
        if (!cur.covers(net.inputs(t))) continue;
        if (net.is_observable(t)) {
          labels.insert(net.label(t));
        } else {
          token_bag nb = fire_bag(net, cur, t);
          if (seen.insert(nb).second) pending.push_back(std::move(nb));
        }
      }
    }
  }
  std::vector<std::string> out(labels.begin(), labels.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace pnstate
