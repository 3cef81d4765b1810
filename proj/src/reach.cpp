#include "pnstate/reach.hpp"

#include <algorithm>
#include <deque>
#include <ostream>
#include <queue>
#include <unordered_set>

namespace pnstate {

namespace {

std::size_t default_bound(const workflow_net& net, std::size_t requested) {
  if (requested) return requested;
  return std::max<std::size_t>(64, net.transition_count() * net.place_count() * 4);
}

std::vector<trans_id> enabled_silents(const workflow_net& net, const marking& m) {
  std::vector<trans_id> out;
  for (trans_id t : enabled_transitions(net, m))
    if (net.is_silent(t)) out.push_back(t);
  return out;
}

// All markings reachable from m by firing silent transitions only, m included.
std::vector<marking> silent_closure(const workflow_net& net, const marking& m,
                                    std::size_t bound) {
  std::vector<marking> order;
  std::unordered_set<marking, marking_hash> seen;
  std::deque<marking> pending{m};
  seen.insert(m);
  while (!pending.empty()) {
    marking cur = std::move(pending.front());
    pending.pop_front();
    order.push_back(cur);
    if (order.size() > bound)
      throw cycle_guard_error("silent closure exceeded " + std::to_string(bound) +
                              " markings from " + net.format_marking(m));
    for (trans_id t : enabled_silents(net, cur)) {
      marking next = fire(net, cur, t);
      if (seen.insert(next).second) pending.push_back(std::move(next));
    }
  }
  return order;
}

}  // namespace

marking adv_lazy(const workflow_net& net, const marking& m, std::size_t step_bound) {
  const std::size_t bound = default_bound(net, step_bound);
  marking cur = m;
  for (std::size_t steps = 0;; ++steps) {
    if (steps > bound)
      throw cycle_guard_error("lazy advancement exceeded " + std::to_string(bound) +
                              " steps from " + net.format_marking(m));
    trans_id chosen = 0;
    bool found = false;
    for (trans_id t : enabled_silents(net, cur)) {
      if (!net.is_xor_split_silent(t)) {
        chosen = t;
        found = true;
        break;
      }
    }
    if (!found) return cur;
    cur = fire(net, cur, chosen);
  }
}

marking rollbk(const workflow_net& net, const marking& advanced, const marking& origin,
               trans_id t, std::size_t step_bound) {
  const std::size_t bound = default_bound(net, step_bound);
  if (!is_enabled(net, advanced, t))
    throw not_enabled_error("rollbk: '" + net.transition_name(t) + "' not enabled in " +
                            net.format_marking(advanced));

  const auto& tokens = origin.places();
  const std::size_t n = tokens.size();
  // Subsets of origin tokens in ascending size; lexicographic within a size
  // because combinations are generated over the sorted token list.
  std::vector<std::uint32_t> pick;
  for (std::size_t k = 0; k <= n; ++k) {
    pick.assign(k, 0);
    for (std::size_t i = 0; i < k; ++i) pick[i] = static_cast<std::uint32_t>(i);
    for (;;) {
      std::vector<place_id> moved, kept;
      for (std::size_t i = 0, j = 0; i < n; ++i) {
        if (j < k && pick[j] == i) {
          moved.push_back(tokens[i]);
          ++j;
        } else {
          kept.push_back(tokens[i]);
        }
      }
      // Advance only the chosen sub-marking through silent firings; the kept
      // tokens stay put and double as a safeness constraint.
      std::unordered_set<marking, marking_hash> seen;
      std::deque<marking> pending;
      marking start{std::vector<place_id>(moved)};
      seen.insert(start);
      pending.push_back(start);
      std::size_t steps = 0;
      while (!pending.empty()) {
        marking sub = std::move(pending.front());
        pending.pop_front();
        if (++steps > bound)
          throw cycle_guard_error("rollbk advancement exceeded " + std::to_string(bound) +
                                  " steps from " + net.format_marking(origin));
        std::vector<place_id> full = kept;
        full.insert(full.end(), sub.begin(), sub.end());
        std::sort(full.begin(), full.end());
        if (std::adjacent_find(full.begin(), full.end()) == full.end()) {
          marking candidate{std::move(full)};
          if (is_enabled(net, candidate, t)) return candidate;
          for (trans_id s : enabled_transitions(net, candidate)) {
            if (!net.is_silent(s)) continue;
            // The silent move must consume advanced tokens only.
            if (!sub.contains_all(net.inputs(s))) continue;
            marking nsub = fire(net, sub, s);
            if (seen.insert(nsub).second) pending.push_back(std::move(nsub));
          }
        }
      }
      // Next k-combination.
      std::size_t i = k;
      while (i > 0) {
        --i;
        if (pick[i] != i + n - k) {
          ++pick[i];
          for (std::size_t j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
          i = k + 1;
          break;
        }
      }
      if (i != k + 1) break;
    }
  }
  throw error("reach: rollbk found no advancement of " + net.format_marking(origin) +
              " enabling '" + net.transition_name(t) + "'");
}

namespace {

std::vector<std::pair<trans_id, marking>> eager_pairs(const workflow_net& net, const marking& m,
                                                      std::size_t bound, bool pre_advance) {
  marking origin = pre_advance ? adv_lazy(net, m, bound) : m;
  // First closure marking enabling each observable serves as the rollback
  // witness.
  std::vector<std::pair<trans_id, marking>> witnesses;
  std::vector<bool> seen_obs(net.transition_count(), false);
  for (const marking& cur : silent_closure(net, origin, bound)) {
    for (trans_id t : enabled_transitions(net, cur)) {
      if (net.is_observable(t) && !seen_obs[t]) {
        seen_obs[t] = true;
        witnesses.emplace_back(t, cur);
      }
    }
  }
  std::sort(witnesses.begin(), witnesses.end());
  std::vector<std::pair<trans_id, marking>> result;
  result.reserve(witnesses.size());
  for (const auto& [t, advanced] : witnesses)
    result.emplace_back(t, rollbk(net, advanced, origin, t, bound));
  return result;
}

}  // namespace

std::vector<std::pair<trans_id, marking>> adv_eager(const workflow_net& net, const marking& m,
                                                    std::size_t step_bound) {
  return eager_pairs(net, m, default_bound(net, step_bound), true);
}

std::optional<reach_graph::label_id> reach_graph::find_label(std::string_view name) const {
  auto it = label_index_.find(std::string(name));
  if (it == label_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<reach_graph::vertex_id> reach_graph::find_vertex(const marking& m) const {
  auto it = vertex_index_.find(m);
  if (it == vertex_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::tuple<marking, std::string, marking>> reach_graph::canonical_edges() const {
  std::vector<std::tuple<marking, std::string, marking>> out;
  out.reserve(edges_.size());
  for (const edge& e : edges_)
    out.emplace_back(vertices_[e.source], labels_[e.label], vertices_[e.target]);
  std::sort(out.begin(), out.end());
  return out;
}

reach_graph::vertex_id graph_builder::intern_vertex(const marking& m) {
  auto it = g_.vertex_index_.find(m);
  if (it != g_.vertex_index_.end()) return it->second;
  auto id = static_cast<reach_graph::vertex_id>(g_.vertices_.size());
  g_.vertices_.push_back(m);
  g_.vertex_index_.emplace(m, id);
  g_.out_.emplace_back();
  g_.in_.emplace_back();
  return id;
}

reach_graph::label_id graph_builder::intern_label(const std::string& name) {
  auto it = g_.label_index_.find(name);
  if (it != g_.label_index_.end()) return it->second;
  auto id = static_cast<reach_graph::label_id>(g_.labels_.size());
  g_.labels_.push_back(name);
  g_.label_index_.emplace(name, id);
  return id;
}

void graph_builder::add_edge(reach_graph::vertex_id s, reach_graph::label_id l,
                             reach_graph::vertex_id t) {
  reach_graph::edge e{s, l, t};
  auto& out = g_.out_[s];
  auto entry = std::make_pair(l, t);
  auto it = std::lower_bound(out.begin(), out.end(), entry);
  if (it != out.end() && *it == entry) return;  // duplicate edge, collapse
  out.insert(it, entry);
  auto rentry = std::make_pair(l, s);
  auto& in = g_.in_[t];
  in.insert(std::lower_bound(in.begin(), in.end(), rentry), rentry);
  g_.edges_.push_back(e);
}

reach_graph graph_builder::finish() {
  std::sort(g_.edges_.begin(), g_.edges_.end());
  return std::move(g_);
}

namespace {

// Maximal silent advancements (closure markings with no silent enabled).
std::vector<marking> silent_fixpoints(const workflow_net& net, const marking& m,
                                      std::size_t bound) {
  std::vector<marking> fps;
  for (const marking& cur : silent_closure(net, m, bound))
    if (enabled_silents(net, cur).empty()) fps.push_back(cur);
  std::sort(fps.begin(), fps.end());
  return fps;
}

}  // namespace

reach_graph build_reach_graph(const workflow_net& net, const reach_options& options) {
  if (!net.is_normalized())
    throw structure_error(
        "net has an XOR-split place with mixed silent/observable outputs; "
        "apply normalize_mixed_xor_splits first");
  const std::size_t bound = default_bound(net, options.silent_step_bound);

  graph_builder gb;
  std::vector<marking> vertex_of;
  auto intern = [&](const marking& m) {
    auto id = gb.intern_vertex(m);
    if (id == vertex_of.size()) vertex_of.push_back(m);
    if (vertex_of.size() > options.max_vertices)
      throw state_space_error("graph exceeded " + std::to_string(options.max_vertices) +
                              " vertices");
    return id;
  };

  // Initial vertex per policy.
  std::vector<reach_graph::vertex_id> initials;
  switch (options.policy) {
    case traversal_policy::mixed_lazy_xor:
      initials.push_back(intern(adv_lazy(net, net.initial_marking(), bound)));
      break;
    case traversal_policy::lazy_all:
      initials.push_back(intern(net.initial_marking()));
      break;
    case traversal_policy::eager_all:
      for (const marking& m : silent_fixpoints(net, net.initial_marking(), bound))
        initials.push_back(intern(m));
      break;
  }
  gb.set_initial(initials.front());

  std::deque<reach_graph::vertex_id> worklist(initials.begin(), initials.end());
  std::vector<bool> explored;
  auto is_explored = [&](reach_graph::vertex_id v) {
    if (v >= explored.size()) explored.resize(v + 1, false);
    return explored[v];
  };

  while (!worklist.empty()) {
    reach_graph::vertex_id cur_id;
    if (options.lifo_worklist) {
      cur_id = worklist.back();
      worklist.pop_back();
    } else {
      cur_id = worklist.front();
      worklist.pop_front();
    }
    if (is_explored(cur_id)) continue;
    explored[cur_id] = true;
    const marking cur = vertex_of[cur_id];

    switch (options.policy) {
      case traversal_policy::mixed_lazy_xor:
        for (const auto& [t, advanced] : adv_eager(net, cur, bound)) {
          marking next = adv_lazy(net, fire(net, advanced, t), bound);
          auto next_id = intern(next);
          gb.add_edge(cur_id, gb.intern_label(net.label(t)), next_id);
          worklist.push_back(next_id);
        }
        break;
      case traversal_policy::lazy_all:
        for (const auto& [t, advanced] : eager_pairs(net, cur, bound, false)) {
          auto next_id = intern(fire(net, advanced, t));
          gb.add_edge(cur_id, gb.intern_label(net.label(t)), next_id);
          worklist.push_back(next_id);
        }
        break;
      case traversal_policy::eager_all:
        // cur is a silent fixpoint; observables fire directly.
        for (trans_id t : enabled_transitions(net, cur)) {
          if (net.is_silent(t)) continue;
          for (const marking& next : silent_fixpoints(net, fire(net, cur, t), bound)) {
            auto next_id = intern(next);
            gb.add_edge(cur_id, gb.intern_label(net.label(t)), next_id);
            worklist.push_back(next_id);
          }
        }
        break;
    }
  }
  return gb.finish();
}

bool complete_reach_graph::contains(const marking& m) const {
  return std::find(vertices.begin(), vertices.end(), m) != vertices.end();
}

complete_reach_graph build_complete_reach_graph(const workflow_net& net,
                                                std::size_t max_vertices) {
  complete_reach_graph g;
  std::unordered_map<marking, std::uint32_t, marking_hash> index;
  std::deque<std::uint32_t> worklist;
  auto intern = [&](const marking& m) {
    auto it = index.find(m);
    if (it != index.end()) return it->second;
    auto id = static_cast<std::uint32_t>(g.vertices.size());
    if (g.vertices.size() >= max_vertices)
      throw state_space_error("complete graph exceeded " + std::to_string(max_vertices) +
                              " vertices");
    g.vertices.push_back(m);
    index.emplace(m, id);
    worklist.push_back(id);
    return id;
  };
  g.initial = intern(net.initial_marking());
  while (!worklist.empty()) {
    std::uint32_t cur_id = worklist.front();
    worklist.pop_front();
    marking cur = g.vertices[cur_id];
    for (trans_id t : enabled_transitions(net, cur)) {
      std::uint32_t next_id = intern(fire(net, cur, t));
      g.edges.emplace_back(cur_id, t, next_id);
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  return g;
}

soundness_report check_soundness(const workflow_net& net, std::size_t max_vertices) {
  soundness_report report;
  complete_reach_graph g;
  try {
    g = build_complete_reach_graph(net, max_vertices);
  } catch (const safeness_error&) {
    report.safe = false;
    return report;
  }
  std::vector<bool> fired(net.transition_count(), false);
  std::vector<std::vector<std::uint32_t>> rev(g.vertices.size());
  for (const auto& [s, t, d] : g.edges) {
    fired[t] = true;
    rev[d].push_back(s);
  }
  for (trans_id t = 0; t < net.transition_count(); ++t)
    if (!fired[t]) report.dead_transitions.push_back(t);

  const marking final = net.final_marking();
  for (const marking& m : g.vertices) {
    if (m.contains(net.sink()) && m != final) report.proper_completion = false;
  }
  auto final_it = std::find(g.vertices.begin(), g.vertices.end(), final);
  if (final_it == g.vertices.end()) {
    report.option_to_complete = false;
  } else {
    std::vector<bool> can_finish(g.vertices.size(), false);
    std::deque<std::uint32_t> q{static_cast<std::uint32_t>(final_it - g.vertices.begin())};
    can_finish[q.front()] = true;
    while (!q.empty()) {
      auto v = q.front();
      q.pop_front();
      for (auto s : rev[v]) {
        if (!can_finish[s]) {
          can_finish[s] = true;
          q.push_back(s);
        }
      }
    }
    report.option_to_complete =
        std::all_of(can_finish.begin(), can_finish.end(), [](bool b) { return b; });
  }
  return report;
}

namespace {

std::string marking_text(const workflow_net& net, const marking& m) {
  std::string s;
  for (place_id p : m) {
    if (!s.empty()) s += ',';
    s += net.place_name(p);
  }
  return s;
}

}  // namespace

void write_dot(const reach_graph& g, const workflow_net& net, std::ostream& os) {
  os << "digraph reach {\n  rankdir=LR;\n";
  for (reach_graph::vertex_id v = 0; v < g.vertex_count(); ++v) {
    os << "  v" << v << " [label=\"{" << marking_text(net, g.vertex(v)) << "}\"";
    if (v == g.initial()) os << " shape=doublecircle";
    os << "];\n";
  }
  for (const auto& e : g.edges()) {
    os << "  v" << e.source << " -> v" << e.target << " [label=\"" << g.label_name(e.label)
       << "\"];\n";
  }
  os << "}\n";
}

void write_edges_text(const reach_graph& g, const workflow_net& net, std::ostream& os) {
  for (const auto& [src, label, dst] : g.canonical_edges()) {
    os << marking_text(net, src) << '\t' << label << '\t' << marking_text(net, dst) << '\n';
  }
}

}  // namespace pnstate
