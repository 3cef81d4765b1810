#include "pnstate/net.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

namespace pnstate {

marking::marking(std::vector<place_id> places) : places_(std::move(places)) {
  std::sort(places_.begin(), places_.end());
  auto dup = std::adjacent_find(places_.begin(), places_.end());
  if (dup != places_.end()) {
    throw safeness_error("marking holds two tokens in place id " + std::to_string(*dup));
  }
}

bool marking::contains(place_id p) const {
  return std::binary_search(places_.begin(), places_.end(), p);
}

bool marking::contains_all(std::span<const place_id> ps) const {
  return std::all_of(ps.begin(), ps.end(), [&](place_id p) { return contains(p); });
}

std::optional<place_id> workflow_net::find_place(std::string_view name) const {
  auto it = place_index_.find(std::string(name));
  if (it == place_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<trans_id> workflow_net::find_transition(std::string_view name) const {
  auto it = trans_index_.find(std::string(name));
  if (it == trans_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<trans_id> workflow_net::silent_transitions() const {
  std::vector<trans_id> out;
  for (trans_id t = 0; t < transition_count(); ++t)
    if (silent_[t]) out.push_back(t);
  return out;
}

std::vector<trans_id> workflow_net::observable_transitions() const {
  std::vector<trans_id> out;
  for (trans_id t = 0; t < transition_count(); ++t)
    if (!silent_[t]) out.push_back(t);
  return out;
}

std::vector<std::string> workflow_net::observable_labels() const {
  std::vector<std::string> out;
  for (trans_id t = 0; t < transition_count(); ++t)
    if (!silent_[t]) out.push_back(labels_[t]);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<trans_id> workflow_net::transitions_with_label(std::string_view label) const {
  std::vector<trans_id> out;
  for (trans_id t = 0; t < transition_count(); ++t)
    if (!silent_[t] && labels_[t] == label) out.push_back(t);
  return out;
}

bool workflow_net::is_valid_marking(const marking& m) const {
  return m.empty() || m.places().back() < place_count();
}

bool workflow_net::is_normalized() const {
  for (place_id p = 0; p < place_count(); ++p) {
    const auto& outs = place_post_[p];
    if (outs.size() < 2) continue;
    bool any_silent = false, any_observable = false;
    for (trans_id t : outs) (silent_[t] ? any_silent : any_observable) = true;
    if (any_silent && any_observable) return false;
  }
  return true;
}

std::string workflow_net::format_marking(const marking& m) const {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (place_id p : m) {
    if (!first) os << ", ";
    os << place_name(p);
    first = false;
  }
  os << '}';
  return os.str();
}

place_id net_builder::add_place(std::string name) {
  if (net_.place_index_.count(name)) throw structure_error("duplicate place id '" + name + "'");
  place_id id = static_cast<place_id>(net_.place_names_.size());
  net_.place_index_.emplace(name, id);
  net_.place_names_.push_back(std::move(name));
  return id;
}

trans_id net_builder::add_transition(std::string name, std::string label, bool silent) {
  if (net_.trans_index_.count(name)) throw structure_error("duplicate transition id '" + name + "'");
  if (!silent && label.empty())
    throw parse_error("observable transition '" + name + "' has no label");
  trans_id id = static_cast<trans_id>(net_.trans_names_.size());
  net_.trans_index_.emplace(name, id);
  net_.trans_names_.push_back(std::move(name));
  net_.labels_.push_back(silent ? std::string() : std::move(label));
  net_.silent_.push_back(silent);
  return id;
}

void net_builder::add_arc(std::string_view from, std::string_view to) {
  auto pf = net_.find_place(from);
  auto tf = net_.find_transition(from);
  auto pt = net_.find_place(to);
  auto tt = net_.find_transition(to);
  if (pf && tt) {
    arc_p2t(*pf, *tt);
  } else if (tf && pt) {
    arc_t2p(*tf, *pt);
  } else if ((pf && pt) || (tf && tt)) {
    throw structure_error("arc '" + std::string(from) + "' -> '" + std::string(to) +
                          "' does not connect a place with a transition");
  } else {
    throw structure_error("arc references unknown node '" +
                          std::string(pf || tf ? to : from) + "'");
  }
}

void net_builder::arc_p2t(place_id p, trans_id t) { p2t_.emplace_back(p, t); }
void net_builder::arc_t2p(trans_id t, place_id p) { t2p_.emplace_back(t, p); }

namespace {

void sort_unique(std::vector<std::uint32_t>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

workflow_net net_builder::build() {
  workflow_net net = std::move(net_);
  const std::size_t np = net.place_count();
  const std::size_t nt = net.transition_count();
  net.pre_.assign(nt, {});
  net.post_.assign(nt, {});
  net.place_pre_.assign(np, {});
  net.place_post_.assign(np, {});
  for (auto [p, t] : p2t_) {
    net.pre_[t].push_back(p);
    net.place_post_[p].push_back(t);
  }
  for (auto [t, p] : t2p_) {
    net.post_[t].push_back(p);
    net.place_pre_[p].push_back(t);
  }
  for (auto& v : net.pre_) sort_unique(v);
  for (auto& v : net.post_) sort_unique(v);
  for (auto& v : net.place_pre_) sort_unique(v);
  for (auto& v : net.place_post_) sort_unique(v);

  std::vector<place_id> sources, sinks;
  for (place_id p = 0; p < np; ++p) {
    if (net.place_pre_[p].empty()) sources.push_back(p);
    if (net.place_post_[p].empty()) sinks.push_back(p);
  }
  auto name_list = [&](const std::vector<place_id>& ps) {
    std::string s;
    for (place_id p : ps) {
      if (!s.empty()) s += ", ";
      s += "'" + net.place_name(p) + "'";
    }
    return s;
  };
  if (sources.size() != 1)
    throw structure_error(sources.empty() ? "no source place (every place has incoming flows)"
                                          : "multiple source places: " + name_list(sources));
  if (sinks.size() != 1)
    throw structure_error(sinks.empty() ? "no sink place (every place has outgoing flows)"
                                        : "multiple sink places: " + name_list(sinks));
  net.source_ = sources[0];
  net.sink_ = sinks[0];
  if (net.source_ == net.sink_)
    throw structure_error("source and sink are the same place '" +
                          net.place_name(net.source_) + "'");

  // Every node must lie on a path from source to sink. Nodes are encoded as
  // place p -> p, transition t -> np + t.
  const std::size_t nodes = np + nt;
  auto bfs = [&](std::size_t start, bool forward) {
    std::vector<bool> seen(nodes, false);
    std::queue<std::size_t> q;
    seen[start] = true;
    q.push(start);
    while (!q.empty()) {
      std::size_t v = q.front();
      q.pop();
      auto push = [&](std::size_t w) {
        if (!seen[w]) {
          seen[w] = true;
          q.push(w);
        }
      };
      if (v < np) {
        const auto& succs = forward ? net.place_post_[v] : net.place_pre_[v];
        for (trans_id t : succs) push(np + t);
      } else {
        trans_id t = static_cast<trans_id>(v - np);
        const auto& succs = forward ? net.post_[t] : net.pre_[t];
        for (place_id p : succs) push(p);
      }
    }
    return seen;
  };
  auto from_source = bfs(net.source_, true);
  auto to_sink = bfs(net.sink_, false);
  for (std::size_t v = 0; v < nodes; ++v) {
    if (!from_source[v] || !to_sink[v]) {
      std::string name = v < np ? "place '" + net.place_name(static_cast<place_id>(v)) + "'"
                                : "transition '" +
                                      net.transition_name(static_cast<trans_id>(v - np)) + "'";
      throw structure_error(name + " is not on a path from source to sink");
    }
  }

  net.xor_split_silent_.assign(nt, false);
  for (trans_id t = 0; t < nt; ++t) {
    if (!net.silent_[t]) continue;
    for (place_id p : net.pre_[t]) {
      if (net.place_post_[p].size() > 1) {
        net.xor_split_silent_[t] = true;
        break;
      }
    }
  }
  return net;
}

bool is_enabled(const workflow_net& net, const marking& m, trans_id t) {
  return m.contains_all(net.inputs(t));
}

std::vector<trans_id> enabled_transitions(const workflow_net& net, const marking& m) {
  std::vector<trans_id> out;
  for (place_id p : m) {
    for (trans_id t : net.place_outputs(p)) {
      if (is_enabled(net, m, t)) out.push_back(t);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

marking fire(const workflow_net& net, const marking& m, trans_id t) {
  auto pre = net.inputs(t);
  auto post = net.outputs(t);
  if (!m.contains_all(pre)) {
    std::string missing;
    for (place_id p : pre) {
      if (!m.contains(p)) {
        if (!missing.empty()) missing += ", ";
        missing += "'" + net.place_name(p) + "'";
      }
    }
    throw not_enabled_error("transition '" + net.transition_name(t) +
                            "' lacks tokens in " + missing);
  }
  std::vector<place_id> next;
  next.reserve(m.size() - pre.size() + post.size());
  for (place_id p : m) {
    if (!std::binary_search(pre.begin(), pre.end(), p)) next.push_back(p);
  }
  next.insert(next.end(), post.begin(), post.end());
  std::sort(next.begin(), next.end());
  auto dup = std::adjacent_find(next.begin(), next.end());
  if (dup != next.end()) {
    throw safeness_error("firing '" + net.transition_name(t) + "' puts a second token in '" +
                         net.place_name(*dup) + "'");
  }
  return marking(std::move(next));
}

namespace {

trans_id require_transition(const workflow_net& net, std::string_view name) {
  auto t = net.find_transition(name);
  if (!t) throw unknown_id_error("no transition '" + std::string(name) + "'");
  return *t;
}

place_id require_place(const workflow_net& net, std::string_view name) {
  auto p = net.find_place(name);
  if (!p) throw unknown_id_error("no place '" + std::string(name) + "'");
  return *p;
}

std::vector<std::string> place_names(const workflow_net& net, std::span<const place_id> ps) {
  std::vector<std::string> out;
  for (place_id p : ps) out.push_back(net.place_name(p));
  return out;
}

std::vector<std::string> trans_names(const workflow_net& net, std::span<const trans_id> ts) {
  std::vector<std::string> out;
  for (trans_id t : ts) out.push_back(net.transition_name(t));
  return out;
}

}  // namespace

std::vector<std::string> input_places(const workflow_net& net, std::string_view transition) {
  return place_names(net, net.inputs(require_transition(net, transition)));
}

std::vector<std::string> output_places(const workflow_net& net, std::string_view transition) {
  return place_names(net, net.outputs(require_transition(net, transition)));
}

std::vector<std::string> input_transitions(const workflow_net& net, std::string_view place) {
  return trans_names(net, net.place_inputs(require_place(net, place)));
}

std::vector<std::string> output_transitions(const workflow_net& net, std::string_view place) {
  return trans_names(net, net.place_outputs(require_place(net, place)));
}

workflow_net normalize_mixed_xor_splits(const workflow_net& net) {
  // Collect (split place, observable transition) pairs to rewire.
  std::vector<std::pair<place_id, trans_id>> rewires;
  for (place_id p = 0; p < net.place_count(); ++p) {
    auto outs = net.place_outputs(p);
    if (outs.size() < 2) continue;
    bool any_silent = false;
    for (trans_id t : outs) any_silent |= net.is_silent(t);
    if (!any_silent) continue;
    for (trans_id t : outs) {
      if (net.is_observable(t)) rewires.emplace_back(p, t);
    }
  }

  net_builder b;
  for (place_id p = 0; p < net.place_count(); ++p) b.add_place(net.place_name(p));
  for (trans_id t = 0; t < net.transition_count(); ++t)
    b.add_transition(net.transition_name(t), net.label(t), net.is_silent(t));

  auto rewired = [&](place_id p, trans_id t) {
    return std::find(rewires.begin(), rewires.end(), std::make_pair(p, t)) != rewires.end();
  };
  for (trans_id t = 0; t < net.transition_count(); ++t) {
    for (place_id p : net.inputs(t))
      if (!rewired(p, t)) b.arc_p2t(p, t);
    for (place_id p : net.outputs(t)) b.arc_t2p(t, p);
  }
  for (auto [p, t] : rewires) {
    std::string base = net.place_name(p) + "__" + net.transition_name(t);
    place_id fresh_p = b.add_place("p_norm_" + base);
    trans_id fresh_t = b.add_silent("tau_norm_" + base);
    b.arc_p2t(p, fresh_t);
    b.arc_t2p(fresh_t, fresh_p);
    b.arc_p2t(fresh_p, t);
  }
  return b.build();
}

marking make_marking(const workflow_net& net, std::initializer_list<std::string_view> names) {
  std::vector<place_id> ps;
  for (auto n : names) ps.push_back(require_place(net, n));
  return marking(std::move(ps));
}

marking make_marking(const workflow_net& net, std::span<const std::string> names) {
  std::vector<place_id> ps;
  for (const auto& n : names) ps.push_back(require_place(net, n));
  return marking(std::move(ps));
}

}  // namespace pnstate
