#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "pnstate/net.hpp"
#include "pnstate/reach.hpp"

namespace pnstate {

struct index_options {
  // Stop growing a gram backward once its value is a single state. The
  // unpruned variant stores every gram up to length n and exists to validate
  // completeness.
  bool prune = true;
  std::uint64_t max_entries = 50'000'000;
};

// Maps ending m-grams (activity sequences, 1 <= m <= n) to the set of states
// any path spelling them can end in. Immutable after build; lookups are
// amortized constant time and safe to run concurrently.
class ngram_index {
 public:
  using state_id = std::uint32_t;

  std::uint32_t max_len() const { return n_; }
  std::size_t size() const { return entries_.size(); }
  bool pruned() const { return pruned_; }

  const std::vector<std::string>& alphabet() const { return labels_; }
  std::optional<std::uint32_t> label_id(std::string_view label) const;

  const std::vector<marking>& states() const { return states_; }
  const marking& state(state_id s) const { return states_[s]; }

  // Gram in natural order (earliest activity first). Values are state ids
  // sorted in canonical marking order. Absent gram -> nullptr.
  const std::vector<state_id>* lookup(std::span<const std::string> gram) const;
  // Key in reversed label-id form (last activity first), as stored.
  const std::vector<state_id>* lookup_reversed(std::span<const std::uint32_t> key) const;

  // Entries in (length, key) order; key reported in natural order.
  void for_each_entry(
      const std::function<void(std::span<const std::uint32_t> key_natural,
                               const std::vector<state_id>& value)>& fn) const;

 private:
  friend ngram_index build_index(const reach_graph&, std::uint32_t, const index_options&);
  friend struct index_codec;

  struct key_hash {
    std::size_t operator()(const std::vector<std::uint32_t>& k) const {
      std::size_t h = 1469598103934665603ull;
      for (auto v : k) {
        h ^= v;
        h *= 1099511628211ull;
      }
      return h;
    }
  };

  std::uint32_t n_ = 1;
  bool pruned_ = true;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::uint32_t> label_index_;
  std::vector<marking> states_;
  // Keys stored reversed so backward growth is prefix extension.
  std::unordered_map<std::vector<std::uint32_t>, std::vector<state_id>, key_hash> entries_;
};

ngram_index build_index(const reach_graph& graph, std::uint32_t n,
                        const index_options& options = {});

// Smallest gram length that disambiguates the state of any fitting trace.
struct k_complexity_report {
  enum class outcome { finite, infinite, at_least_cap };
  outcome result = outcome::finite;
  // K when finite; the cap when saturated without an answer.
  std::uint32_t value = 1;
  std::uint32_t cap = 0;
  std::optional<std::uint32_t> saturated_at;

  bool is_finite() const { return result == outcome::finite; }
  bool is_infinite() const { return result == outcome::infinite; }
};
k_complexity_report estimate_k_complexity(const reach_graph& graph, std::uint32_t cap = 32);

// Binary index file: magic, version, flags, n, place-id dictionary, label
// dictionary, net alphabet, initial state, state table, entry table, crc32.
struct index_file {
  ngram_index index;
  marking initial;
  std::vector<std::string> place_names;
  std::vector<std::string> net_labels;
};

void serialize_index(const ngram_index& index, const marking& initial,
                     const std::vector<std::string>& place_names,
                     const std::vector<std::string>& net_labels, std::ostream& os);
index_file deserialize_index(std::istream& is);

// Debug dump, one gram per line: labels comma-joined TAB marking list.
void dump_index_text(const ngram_index& index, const std::vector<std::string>& place_names,
                     std::ostream& os);

}  // namespace pnstate
