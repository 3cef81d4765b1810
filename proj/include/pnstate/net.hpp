#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pnstate/error.hpp"

namespace pnstate {

using place_id = std::uint32_t;
using trans_id = std::uint32_t;

// A marking is the canonical state of a case: a sorted, duplicate-free set of
// place ids. One token per place (1-safe nets).
class marking {
 public:
  marking() = default;
  explicit marking(std::vector<place_id> places);

  static marking single(place_id p) { return marking(std::vector<place_id>{p}); }

  bool contains(place_id p) const;
  bool contains_all(std::span<const place_id> ps) const;
  std::size_t size() const { return places_.size(); }
  bool empty() const { return places_.empty(); }

  const std::vector<place_id>& places() const { return places_; }
  auto begin() const { return places_.begin(); }
  auto end() const { return places_.end(); }

  bool operator==(const marking& o) const = default;
  auto operator<=>(const marking& o) const = default;

 private:
  std::vector<place_id> places_;
};

struct marking_hash {
  std::size_t operator()(const marking& m) const {
    std::size_t h = 1469598103934665603ull;
    for (place_id p : m.places()) {
      h ^= p;
      h *= 1099511628211ull;
    }
    return h;
  }
};

// Labeled workflow net. Immutable once built; internal ids are dense indices
// assigned in document order, so equality and hashing of markings are stable
// across runs.
class workflow_net {
 public:
  std::size_t place_count() const { return place_names_.size(); }
  std::size_t transition_count() const { return trans_names_.size(); }

  const std::string& place_name(place_id p) const { return place_names_[p]; }
  const std::string& transition_name(trans_id t) const { return trans_names_[t]; }
  bool is_silent(trans_id t) const { return silent_[t]; }
  bool is_observable(trans_id t) const { return !silent_[t]; }
  // Label of an observable transition; silent transitions have none.
  const std::string& label(trans_id t) const { return labels_[t]; }

  place_id source() const { return source_; }
  place_id sink() const { return sink_; }
  marking initial_marking() const { return marking::single(source_); }
  marking final_marking() const { return marking::single(sink_); }

  std::span<const place_id> inputs(trans_id t) const { return pre_[t]; }
  std::span<const place_id> outputs(trans_id t) const { return post_[t]; }
  std::span<const trans_id> place_inputs(place_id p) const { return place_pre_[p]; }
  std::span<const trans_id> place_outputs(place_id p) const { return place_post_[p]; }

  std::optional<place_id> find_place(std::string_view name) const;
  std::optional<trans_id> find_transition(std::string_view name) const;

  // A silent transition is part of an XOR-split structure when one of its
  // input places offers a choice (more than one output transition).
  bool is_xor_split_silent(trans_id t) const { return xor_split_silent_[t]; }

  std::vector<trans_id> silent_transitions() const;
  std::vector<trans_id> observable_transitions() const;
  // Sorted, duplicate-free set of observable labels.
  std::vector<std::string> observable_labels() const;
  // Observable transitions carrying the given label (labels need not be unique).
  std::vector<trans_id> transitions_with_label(std::string_view label) const;

  bool is_valid_marking(const marking& m) const;
  // True when no XOR-split place mixes silent and observable outputs.
  bool is_normalized() const;

  std::string format_marking(const marking& m) const;

 private:
  friend class net_builder;

  std::vector<std::string> place_names_;
  std::vector<std::string> trans_names_;
  std::vector<std::string> labels_;
  std::vector<bool> silent_;
  std::vector<std::vector<place_id>> pre_, post_;
  std::vector<std::vector<trans_id>> place_pre_, place_post_;
  std::vector<bool> xor_split_silent_;
  std::unordered_map<std::string, place_id> place_index_;
  std::unordered_map<std::string, trans_id> trans_index_;
  place_id source_ = 0;
  place_id sink_ = 0;
};

// Incremental construction; build() checks the workflow-net structure
// (unique source/sink, bipartite flows, connectivity) and throws
// structure_error naming the offending elements.
class net_builder {
 public:
  place_id add_place(std::string name);
  trans_id add_transition(std::string name, std::string label, bool silent);
  trans_id add_silent(std::string name) { return add_transition(std::move(name), "", true); }
  void add_arc(std::string_view from, std::string_view to);
  void arc_p2t(place_id p, trans_id t);
  void arc_t2p(trans_id t, place_id p);

  workflow_net build();

 private:
  workflow_net net_;
  std::vector<std::pair<place_id, trans_id>> p2t_;
  std::vector<std::pair<trans_id, place_id>> t2p_;
};

// Token game.
bool is_enabled(const workflow_net& net, const marking& m, trans_id t);
std::vector<trans_id> enabled_transitions(const workflow_net& net, const marking& m);
// M2 = M1 \ pre(t) + post(t); throws not_enabled_error / safeness_error.
marking fire(const workflow_net& net, const marking& m, trans_id t);

// Lookups by document id; throw unknown_id_error.
std::vector<std::string> input_places(const workflow_net& net, std::string_view transition);
std::vector<std::string> output_places(const workflow_net& net, std::string_view transition);
std::vector<std::string> input_transitions(const workflow_net& net, std::string_view place);
std::vector<std::string> output_transitions(const workflow_net& net, std::string_view place);

// Rewires every XOR-split place that mixes silent and observable output
// transitions: each observable branch gets a fresh silent transition and a
// fresh place in front of it. Preserves the observable-trace language;
// idempotent on already-normal nets.
workflow_net normalize_mixed_xor_splits(const workflow_net& net);

// Helper for tests and formatting.
marking make_marking(const workflow_net& net, std::initializer_list<std::string_view> place_names);
marking make_marking(const workflow_net& net, std::span<const std::string> place_names);

}  // namespace pnstate
