#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pnstate/net.hpp"

namespace pnstate {

// Multiset marking: replay with artificial tokens can leave more than one
// token per place, which is exactly how it wanders off the reachable state
// space.
class token_bag {
 public:
  token_bag() = default;
  explicit token_bag(const marking& m);

  std::uint32_t count(place_id p) const;
  std::size_t total_tokens() const;
  void add(place_id p, std::uint32_t k = 1);
  // Throws if a token is missing.
  void remove(place_id p, std::uint32_t k = 1);
  bool covers(std::span<const place_id> places) const;

  // Sorted (place, count) pairs, counts > 0.
  const std::vector<std::pair<place_id, std::uint32_t>>& entries() const { return entries_; }
  bool is_safe_set() const;
  // Valid only when every count is 1.
  marking as_marking() const;

  bool operator==(const token_bag&) const = default;
  auto operator<=>(const token_bag&) const = default;

 private:
  std::vector<std::pair<place_id, std::uint32_t>> entries_;
};

struct token_bag_hash {
  std::size_t operator()(const token_bag& b) const {
    std::size_t h = 1469598103934665603ull;
    for (auto [p, c] : b.entries()) {
      h ^= (static_cast<std::size_t>(p) << 16) ^ c;
      h *= 1099511628211ull;
    }
    return h;
  }
};

struct replay_result {
  token_bag marking;
  std::uint32_t missing_tokens_added = 0;
  std::uint32_t consumed_artificially = 0;
  std::uint32_t unmodeled_skipped = 0;
  // Filled by validate_reachability when an explored state space is at hand.
  std::optional<bool> reachable;
};

// Token-based replay with a missing-token heuristic: events replayed in
// order; silent transitions fired along the shortest path (BFS) that enables
// the next observable label; if none exists, tokens are inserted into the
// missing input places and the transition fires anyway. Among transitions
// sharing the label, fewest inserted tokens wins, then smallest transition
// id. After each event the marking advances through non-decision silent
// transitions. A minimal reconstruction of replay semantics for comparative
// evaluation, not a port of any particular tool.
replay_result token_replay(const workflow_net& net, std::span<const std::string> prefix,
                           std::size_t step_bound = 0);

// Marks result.reachable against a set of known reachable markings.
void validate_reachability(replay_result& result, const std::vector<marking>& reachable);

// Observable labels enabled in the silent closure of a replay marking.
std::vector<std::string> replay_next_enabled(const workflow_net& net, const token_bag& bag,
                                             std::size_t step_bound = 0);

}  // namespace pnstate
