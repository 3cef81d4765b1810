#pragma once

#include <cstdint>
#include <iosfwd>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "pnstate/net.hpp"

namespace pnstate {

// Silent-transition traversal policy for the reachability graph. The mixed
// policy (lazy through XOR-splits, eager elsewhere) is the production one;
// the other two exist as comparison oracles.
enum class traversal_policy { mixed_lazy_xor, eager_all, lazy_all };

struct reach_options {
  traversal_policy policy = traversal_policy::mixed_lazy_xor;
  // Hard cap on graph vertices; exceeding it signals an intractable or
  // unsound model rather than grinding on.
  std::size_t max_vertices = 1'000'000;
  // Step bound per silent closure; 0 means transitions * places * 4.
  std::size_t silent_step_bound = 0;
  // Worklist discipline, exposed to let tests assert order-independence.
  bool lifo_worklist = false;
};

// Pure reachability graph: vertices are markings, edges carry observable
// activity labels. Vertex and label ids are dense and deterministic for a
// given net and options.
class reach_graph {
 public:
  using vertex_id = std::uint32_t;
  using label_id = std::uint32_t;

  struct edge {
    vertex_id source;
    label_id label;
    vertex_id target;
    auto operator<=>(const edge&) const = default;
  };

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const marking& vertex(vertex_id v) const { return vertices_[v]; }
  const std::vector<marking>& vertices() const { return vertices_; }
  const std::vector<edge>& edges() const { return edges_; }
  vertex_id initial() const { return initial_; }
  const marking& initial_marking() const { return vertices_[initial_]; }

  const std::string& label_name(label_id l) const { return labels_[l]; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<label_id> find_label(std::string_view name) const;
  std::optional<vertex_id> find_vertex(const marking& m) const;

  // Outgoing (label, target) pairs, sorted; incoming (label, source) pairs.
  std::span<const std::pair<label_id, vertex_id>> out_edges(vertex_id v) const { return out_[v]; }
  std::span<const std::pair<label_id, vertex_id>> in_edges(vertex_id v) const { return in_[v]; }

  // Construction-order-independent view for comparisons and exports:
  // (source marking, label, target marking) sorted.
  std::vector<std::tuple<marking, std::string, marking>> canonical_edges() const;

 private:
  friend class graph_builder;
  std::vector<marking> vertices_;
  std::unordered_map<marking, vertex_id, marking_hash> vertex_index_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, label_id> label_index_;
  std::vector<edge> edges_;
  std::vector<std::vector<std::pair<label_id, vertex_id>>> out_, in_;
  vertex_id initial_ = 0;
};

// Used by tests and by logio to construct graphs directly.
class graph_builder {
 public:
  reach_graph::vertex_id intern_vertex(const marking& m);
  reach_graph::label_id intern_label(const std::string& name);
  void add_edge(reach_graph::vertex_id s, reach_graph::label_id l, reach_graph::vertex_id t);
  void set_initial(reach_graph::vertex_id v) { g_.initial_ = v; }
  reach_graph finish();

 private:
  reach_graph g_;
};

// Fires every enabled silent transition that is not part of an XOR-split
// structure, to fixpoint. Confluent, so firing order does not matter.
marking adv_lazy(const workflow_net& net, const marking& m, std::size_t step_bound = 0);

// Advances m through enabled silent transitions (decision points included)
// and reports, for every observable transition reachable that way, the
// minimal advancement of m that enables it. Pairs are sorted by transition id.
std::vector<std::pair<trans_id, marking>> adv_eager(const workflow_net& net, const marking& m,
                                                    std::size_t step_bound = 0);

// Given a marking `advanced` reached from `origin` by silent firings, with t
// enabled in `advanced`: returns the marking that advances only the minimal
// subset of origin's tokens needed to enable t, leaving the rest at their
// origin positions. Subsets are scanned in ascending size, ties broken
// lexicographically on place ids; within a subset, shortest silent
// advancement wins.
marking rollbk(const workflow_net& net, const marking& advanced, const marking& origin,
               trans_id t, std::size_t step_bound = 0);

// Worklist construction of the complete pure reachability graph. Requires a
// normalized net (no mixed XOR-splits).
reach_graph build_reach_graph(const workflow_net& net, const reach_options& options = {});

// Brute-force testing oracle: every reachable marking, every single-transition
// move, silent edges included (labeled by transition id).
struct complete_reach_graph {
  std::vector<marking> vertices;
  std::vector<std::tuple<std::uint32_t, trans_id, std::uint32_t>> edges;
  std::uint32_t initial = 0;

  bool contains(const marking& m) const;
};
complete_reach_graph build_complete_reach_graph(const workflow_net& net,
                                                std::size_t max_vertices = 1'000'000);

// Soundness diagnostics gathered during exhaustive exploration. The library
// otherwise trusts its input to be sound; this op reports where that trust
// would break.
struct soundness_report {
  bool safe = true;                      // no marking needs two tokens in a place
  bool proper_completion = true;         // sink token only in {sink}
  bool option_to_complete = true;        // {sink} reachable from every marking
  std::vector<trans_id> dead_transitions;
  bool is_sound() const {
    return safe && proper_completion && option_to_complete && dead_transitions.empty();
  }
};
soundness_report check_soundness(const workflow_net& net, std::size_t max_vertices = 1'000'000);

// Exports. Markings are printed as sorted place-id lists.
void write_dot(const reach_graph& g, const workflow_net& net, std::ostream& os);
// One edge per line: source TAB label TAB target, canonical order.
void write_edges_text(const reach_graph& g, const workflow_net& net, std::ostream& os);

}  // namespace pnstate
