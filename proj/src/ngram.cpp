#include "pnstate/ngram.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_set>

namespace pnstate {

std::optional<std::uint32_t> ngram_index::label_id(std::string_view label) const {
  auto it = label_index_.find(std::string(label));
  if (it == label_index_.end()) return std::nullopt;
  return it->second;
}

const std::vector<ngram_index::state_id>* ngram_index::lookup(
    std::span<const std::string> gram) const {
  std::vector<std::uint32_t> key;
  key.reserve(gram.size());
  for (auto it = gram.rbegin(); it != gram.rend(); ++it) {
    auto id = label_id(*it);
    if (!id) return nullptr;
    key.push_back(*id);
  }
  return lookup_reversed(key);
}

const std::vector<ngram_index::state_id>* ngram_index::lookup_reversed(
    std::span<const std::uint32_t> key) const {
  auto it = entries_.find(std::vector<std::uint32_t>(key.begin(), key.end()));
  if (it == entries_.end()) return nullptr;
  return &it->second;
}

void ngram_index::for_each_entry(
    const std::function<void(std::span<const std::uint32_t>, const std::vector<state_id>&)>& fn)
    const {
  std::vector<const std::vector<std::uint32_t>*> keys;
  keys.reserve(entries_.size());
  for (const auto& [k, v] : entries_) keys.push_back(&k);
  std::sort(keys.begin(), keys.end(), [](const auto* a, const auto* b) {
    if (a->size() != b->size()) return a->size() < b->size();
    return std::lexicographical_compare(a->rbegin(), a->rend(), b->rbegin(), b->rend());
  });
  std::vector<std::uint32_t> natural;
  for (const auto* k : keys) {
    natural.assign(k->rbegin(), k->rend());
    fn(natural, entries_.at(*k));
  }
}

ngram_index build_index(const reach_graph& graph, std::uint32_t n, const index_options& options) {
  if (n < 1) throw error("index: n must be positive");
  if (graph.vertex_count() == 0) throw error("index: empty graph");

  ngram_index idx;
  idx.n_ = n;
  idx.pruned_ = options.prune;
  idx.labels_ = graph.labels();
  for (std::uint32_t i = 0; i < idx.labels_.size(); ++i) idx.label_index_[idx.labels_[i]] = i;

  // States are graph vertices re-ranked into canonical marking order so that
  // value lists and serialization do not depend on discovery order.
  std::vector<std::uint32_t> rank(graph.vertex_count());
  {
    std::vector<std::uint32_t> order(graph.vertex_count());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return graph.vertex(a) < graph.vertex(b);
    });
    idx.states_.reserve(order.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) {
      rank[order[i]] = i;
      idx.states_.push_back(graph.vertex(order[i]));
    }
  }

  // Path relation per gram: (start vertex, end vertex) pairs, used to grow
  // grams backward along incoming edges. Only the previous level's relations
  // are kept alive.
  using rel_t = std::vector<std::pair<std::uint32_t, std::uint32_t>>;
  using key_t = std::vector<std::uint32_t>;
  std::unordered_map<key_t, rel_t, ngram_index::key_hash> frontier;

  for (const auto& e : graph.edges()) frontier[{e.label}].emplace_back(e.source, e.target);

  auto store = [&](const key_t& key, const rel_t& rel) -> bool {
    std::vector<std::uint32_t> value;
    for (const auto& [s, t] : rel) value.push_back(rank[t]);
    std::sort(value.begin(), value.end());
    value.erase(std::unique(value.begin(), value.end()), value.end());
    bool ambiguous = value.size() > 1;
    idx.entries_.emplace(key, std::move(value));
    if (idx.entries_.size() > options.max_entries)
      throw index_cap_error("exceeded " + std::to_string(options.max_entries) +
                            " entries at gram count " + std::to_string(idx.entries_.size()));
    return ambiguous;
  };

  for (std::uint32_t len = 1; len <= n && !frontier.empty(); ++len) {
    for (auto& [key, rel] : frontier) {
      std::sort(rel.begin(), rel.end());
      rel.erase(std::unique(rel.begin(), rel.end()), rel.end());
    }
    std::unordered_map<key_t, rel_t, ngram_index::key_hash> next;
    for (auto& [key, rel] : frontier) {
      bool ambiguous = store(key, rel);
      if (len == n) continue;
      if (options.prune && !ambiguous) continue;
      for (const auto& [start, end] : rel) {
        for (const auto& [lab, pred] : graph.in_edges(start)) {
          key_t extended = key;
          extended.push_back(lab);
          next[std::move(extended)].emplace_back(pred, end);
        }
      }
    }
    frontier = std::move(next);
  }
  return idx;
}

namespace {

struct solve_result {
  enum class kind { finite, infinite, exceeded } k;
  std::uint32_t depth = 0;
};

using rel_t = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

struct rel_hash {
  std::size_t operator()(const rel_t& r) const {
    std::size_t h = 1469598103934665603ull;
    for (auto [a, b] : r) {
      h ^= (static_cast<std::size_t>(a) << 32) | b;
      h *= 1099511628211ull;
    }
    return h;
  }
};

// Extension depth needed before every gram with this path relation becomes
// deterministic. A relation reachable from itself can never resolve. Neither
// can an ambiguous relation with a path starting at the initial vertex: that
// path is a complete fitting trace, so no amount of extra history exists to
// settle it.
class k_solver {
 public:
  explicit k_solver(const reach_graph& g) : g_(g), initial_(g.initial()) {}

  solve_result solve(rel_t rel, std::uint32_t budget) {
    std::sort(rel.begin(), rel.end());
    rel.erase(std::unique(rel.begin(), rel.end()), rel.end());

    std::unordered_set<std::uint32_t> ends;
    for (auto [s, t] : rel) ends.insert(t);
    if (ends.size() <= 1) return {solve_result::kind::finite, 0};

    if (infinite_.count(rel)) return {solve_result::kind::infinite, 0};
    if (auto it = finite_.find(rel); it != finite_.end())
      return {solve_result::kind::finite, it->second};
    if (on_stack_.count(rel)) {
      infinite_.insert(rel);
      return {solve_result::kind::infinite, 0};
    }
    for (const auto& pair : rel) {
      if (pair.first == initial_ || g_.in_edges(pair.first).empty()) {
        infinite_.insert(rel);
        return {solve_result::kind::infinite, 0};
      }
    }
    if (budget == 0) return {solve_result::kind::exceeded, 0};

    on_stack_.insert(rel);
    std::map<std::uint32_t, rel_t> extensions;
    for (auto [s, t] : rel) {
      for (const auto& [lab, pred] : g_.in_edges(s)) extensions[lab].emplace_back(pred, t);
    }
    solve_result out{solve_result::kind::finite, 0};
    for (auto& [lab, ext] : extensions) {
      solve_result r = solve(std::move(ext), budget - 1);
      if (r.k == solve_result::kind::infinite) {
        out = r;
        break;
      }
      if (r.k == solve_result::kind::exceeded) out.k = solve_result::kind::exceeded;
      if (out.k == solve_result::kind::finite) out.depth = std::max(out.depth, r.depth);
    }
    on_stack_.erase(rel);
    if (out.k == solve_result::kind::finite) {
      out.depth += 1;
      finite_[rel] = out.depth;
    } else if (out.k == solve_result::kind::infinite) {
      infinite_.insert(rel);
    }
    return out;
  }

 private:
  const reach_graph& g_;
  reach_graph::vertex_id initial_;
  std::unordered_map<rel_t, std::uint32_t, rel_hash> finite_;
  std::unordered_set<rel_t, rel_hash> infinite_;
  std::unordered_set<rel_t, rel_hash> on_stack_;
};

}  // namespace

k_complexity_report estimate_k_complexity(const reach_graph& graph, std::uint32_t cap) {
  k_complexity_report report;
  report.cap = cap;
  std::map<std::uint32_t, rel_t> one_grams;
  for (const auto& e : graph.edges()) one_grams[e.label].emplace_back(e.source, e.target);

  k_solver solver(graph);
  std::uint32_t deepest = 0;
  bool exceeded = false;
  for (auto& [lab, rel] : one_grams) {
    solve_result r = solver.solve(std::move(rel), cap > 0 ? cap - 1 : 0);
    switch (r.k) {
      case solve_result::kind::infinite:
        report.result = k_complexity_report::outcome::infinite;
        return report;
      case solve_result::kind::exceeded:
        exceeded = true;
        break;
      case solve_result::kind::finite:
        deepest = std::max(deepest, r.depth);
        break;
    }
  }
  if (exceeded) {
    report.result = k_complexity_report::outcome::at_least_cap;
    report.value = cap;
    return report;
  }
  report.result = k_complexity_report::outcome::finite;
  report.value = deepest + 1;
  report.saturated_at = report.value;
  return report;
}

// ---------------------------------------------------------------------------
// Serialization.

namespace {

constexpr std::array<char, 4> k_magic{'P', 'N', 'G', 'X'};
constexpr std::uint32_t k_version = 1;

class crc32 {
 public:
  crc32() {
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      table_[i] = c;
    }
  }
  void update(const char* data, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i)
      state_ = table_[(state_ ^ static_cast<unsigned char>(data[i])) & 0xFF] ^ (state_ >> 8);
  }
  std::uint32_t value() const { return state_ ^ 0xFFFFFFFFu; }

 private:
  std::array<std::uint32_t, 256> table_{};
  std::uint32_t state_ = 0xFFFFFFFFu;
};

class writer {
 public:
  explicit writer(std::ostream& os) : os_(os) {}
  void raw(const char* data, std::size_t len) {
    os_.write(data, static_cast<std::streamsize>(len));
    crc_.update(data, len);
  }
  void u8(std::uint8_t v) { raw(reinterpret_cast<const char*>(&v), 1); }
  void u32(std::uint32_t v) {
    char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
                 static_cast<char>(v >> 24)};
    raw(b, 4);
  }
  void u64(std::uint64_t v) {
    u32(static_cast<std::uint32_t>(v));
    u32(static_cast<std::uint32_t>(v >> 32));
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  std::uint32_t crc() const { return crc_.value(); }

 private:
  std::ostream& os_;
  crc32 crc_;
};

class reader {
 public:
  explicit reader(std::istream& is) : is_(is) {}
  void raw(char* data, std::size_t len) {
    is_.read(data, static_cast<std::streamsize>(len));
    if (static_cast<std::size_t>(is_.gcount()) != len)
      throw index_io_error("corrupt index: truncated stream");
    crc_.update(data, len);
  }
  std::uint8_t u8() {
    char b;
    raw(&b, 1);
    return static_cast<std::uint8_t>(b);
  }
  std::uint32_t u32() {
    char b[4];
    raw(b, 4);
    return static_cast<std::uint32_t>(static_cast<unsigned char>(b[0])) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(b[1])) << 8) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(b[2])) << 16) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(b[3])) << 24);
  }
  std::uint64_t u64() {
    std::uint64_t lo = u32();
    return lo | (static_cast<std::uint64_t>(u32()) << 32);
  }
  std::string str() {
    std::uint32_t len = u32();
    if (len > (1u << 24)) throw index_io_error("corrupt index: absurd string length");
    std::string s(len, '\0');
    raw(s.data(), len);
    return s;
  }
  std::uint32_t crc() const { return crc_.value(); }

 private:
  std::istream& is_;
  crc32 crc_;
};

}  // namespace

struct index_codec {
  static void write(const ngram_index& index, const marking& initial,
                    const std::vector<std::string>& place_names,
                    const std::vector<std::string>& net_labels, std::ostream& os) {
    writer w(os);
    w.raw(k_magic.data(), k_magic.size());
    w.u32(k_version);
    w.u8(index.pruned_ ? 1 : 0);
    w.u32(index.n_);
    w.u32(static_cast<std::uint32_t>(place_names.size()));
    for (const auto& p : place_names) w.str(p);
    w.u32(static_cast<std::uint32_t>(index.labels_.size()));
    for (const auto& l : index.labels_) w.str(l);
    w.u32(static_cast<std::uint32_t>(net_labels.size()));
    for (const auto& l : net_labels) w.str(l);
    w.u32(static_cast<std::uint32_t>(initial.size()));
    for (place_id p : initial) w.u32(p);
    w.u32(static_cast<std::uint32_t>(index.states_.size()));
    for (const marking& m : index.states_) {
      w.u32(static_cast<std::uint32_t>(m.size()));
      for (place_id p : m) w.u32(p);
    }
    w.u64(index.entries_.size());
    index.for_each_entry([&](std::span<const std::uint32_t> key, const auto& value) {
      w.u32(static_cast<std::uint32_t>(key.size()));
      for (auto l : key) w.u32(l);
      w.u32(static_cast<std::uint32_t>(value.size()));
      for (auto s : value) w.u32(s);
    });
    std::uint32_t crc = w.crc();
    // crc written raw, outside the checksummed payload
    char b[4] = {static_cast<char>(crc), static_cast<char>(crc >> 8),
                 static_cast<char>(crc >> 16), static_cast<char>(crc >> 24)};
    os.write(b, 4);
  }

  static index_file read(std::istream& is) {
    reader r(is);
    std::array<char, 4> magic;
    r.raw(magic.data(), magic.size());
    if (magic != k_magic) throw index_io_error("not an index file (bad magic)");
    std::uint32_t version = r.u32();
    if (version != k_version)
      throw index_io_error("version mismatch: file has " + std::to_string(version) +
                           ", reader expects " + std::to_string(k_version));
    index_file out;
    out.index.pruned_ = r.u8() != 0;
    out.index.n_ = r.u32();
    std::uint32_t np = r.u32();
    out.place_names.reserve(np);
    for (std::uint32_t i = 0; i < np; ++i) out.place_names.push_back(r.str());
    std::uint32_t nl = r.u32();
    for (std::uint32_t i = 0; i < nl; ++i) {
      out.index.labels_.push_back(r.str());
      out.index.label_index_[out.index.labels_.back()] = i;
    }
    std::uint32_t nn = r.u32();
    for (std::uint32_t i = 0; i < nn; ++i) out.net_labels.push_back(r.str());
    std::uint32_t isz = r.u32();
    std::vector<place_id> init;
    for (std::uint32_t i = 0; i < isz; ++i) init.push_back(r.u32());
    out.initial = marking(std::move(init));
    std::uint32_t ns = r.u32();
    out.index.states_.reserve(ns);
    for (std::uint32_t i = 0; i < ns; ++i) {
      std::uint32_t sz = r.u32();
      std::vector<place_id> ps(sz);
      for (auto& p : ps) p = r.u32();
      out.index.states_.push_back(marking(std::move(ps)));
    }
    std::uint64_t ne = r.u64();
    for (std::uint64_t i = 0; i < ne; ++i) {
      std::uint32_t klen = r.u32();
      if (klen == 0 || klen > out.index.n_) throw index_io_error("corrupt index: bad key length");
      std::vector<std::uint32_t> natural(klen);
      for (auto& l : natural) l = r.u32();
      std::uint32_t vlen = r.u32();
      std::vector<std::uint32_t> value(vlen);
      for (auto& s : value) {
        s = r.u32();
        if (s >= ns) throw index_io_error("corrupt index: state id out of range");
      }
      std::vector<std::uint32_t> key(natural.rbegin(), natural.rend());
      out.index.entries_.emplace(std::move(key), std::move(value));
    }
    std::uint32_t expected = r.crc();
    char b[4];
    is.read(b, 4);
    if (is.gcount() != 4) throw index_io_error("corrupt index: missing checksum");
    std::uint32_t stored = static_cast<std::uint32_t>(static_cast<unsigned char>(b[0])) |
                           (static_cast<std::uint32_t>(static_cast<unsigned char>(b[1])) << 8) |
                           (static_cast<std::uint32_t>(static_cast<unsigned char>(b[2])) << 16) |
                           (static_cast<std::uint32_t>(static_cast<unsigned char>(b[3])) << 24);
    if (stored != expected) throw index_io_error("corrupt index: checksum mismatch");
    return out;
  }
};

void serialize_index(const ngram_index& index, const marking& initial,
                     const std::vector<std::string>& place_names,
                     const std::vector<std::string>& net_labels, std::ostream& os) {
  index_codec::write(index, initial, place_names, net_labels, os);
}

index_file deserialize_index(std::istream& is) { return index_codec::read(is); }

void dump_index_text(const ngram_index& index, const std::vector<std::string>& place_names,
                     std::ostream& os) {
  index.for_each_entry([&](std::span<const std::uint32_t> key, const auto& value) {
    std::string line;
    for (std::size_t i = 0; i < key.size(); ++i) {
      if (i) line += ", ";
      line += index.alphabet()[key[i]];
    }
    line += '\t';
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (i) line += ", ";
      line += '{';
      const marking& m = index.state(value[i]);
      bool first = true;
      for (place_id p : m) {
        if (!first) line += ',';
        line += p < place_names.size() ? place_names[p] : std::to_string(p);
        first = false;
      }
      line += '}';
    }
    os << line << '\n';
  });
}

}  // namespace pnstate
