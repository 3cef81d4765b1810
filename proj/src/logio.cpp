#include "pnstate/logio.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "xml_mini.hpp"

namespace pnstate {

std::vector<std::string> trace::activities() const {
  std::vector<std::string> out;
  out.reserve(events.size());
  for (const event& e : events) out.push_back(e.activity);
  return out;
}

std::vector<std::string> event_log::alphabet() const {
  std::vector<std::string> out;
  for (const trace& t : traces)
    for (const event& e : t.events) out.push_back(e.activity);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t event_log::event_count() const {
  std::size_t sum = 0;
  for (const trace& t : traces) sum += t.events.size();
  return sum;
}

// ---------------------------------------------------------------------------
// Timestamps.

namespace {

// Days since the epoch for a civil date (Howard Hinnant's algorithm).
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
                       static_cast<unsigned>(d) - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y += m <= 2;
}

}  // namespace

std::int64_t parse_timestamp(const std::string& text) {
  int y, mo, d, h, mi, s;
  int consumed = 0;
  if (std::sscanf(text.c_str(), "%4d-%2d-%2d%*1[T ]%2d:%2d:%2d%n", &y, &mo, &d, &h, &mi, &s,
                  &consumed) != 6 ||
      consumed == 0)
    throw log_error("unparseable timestamp '" + text + "'");
  std::size_t i = static_cast<std::size_t>(consumed);
  std::int64_t frac_us = 0;
  if (i < text.size() && text[i] == '.') {
    ++i;
    std::int64_t scale = 100000;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      frac_us += (text[i] - '0') * scale;
      scale /= 10;
      ++i;
    }
  }
  std::int64_t offset_s = 0;
  if (i < text.size()) {
    if (text[i] == 'Z') {
      ++i;
    } else if (text[i] == '+' || text[i] == '-') {
      int sign = text[i] == '+' ? 1 : -1;
      int oh = 0, om = 0;
      if (std::sscanf(text.c_str() + i + 1, "%2d:%2d", &oh, &om) < 1)
        throw log_error("unparseable timezone in '" + text + "'");
      offset_s = sign * (oh * 3600 + om * 60);
      i = text.size();
    }
  }
  std::int64_t days = days_from_civil(y, mo, d);
  std::int64_t secs = days * 86400 + h * 3600 + mi * 60 + s - offset_s;
  return secs * 1000000 + frac_us;
}

std::string format_timestamp(std::int64_t us) {
  std::int64_t secs = us / 1000000;
  std::int64_t frac = us % 1000000;
  if (frac < 0) {
    frac += 1000000;
    secs -= 1;
  }
  std::int64_t days = secs / 86400;
  std::int64_t rem = secs % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  int y;
  unsigned mo, d;
  civil_from_days(days, y, mo, d);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", y, mo, d,
                static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60),
                static_cast<int>(rem % 60));
  std::string out(buf);
  if (frac) {
    std::snprintf(buf, sizeof buf, ".%03d", static_cast<int>(frac / 1000));
    out += buf;
  }
  return out + "Z";
}

// ---------------------------------------------------------------------------
// CSV.

namespace {

std::vector<std::string> split_csv_row(const std::string& line, std::size_t row) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw log_error("row " + std::to_string(row) + ": unterminated quote");
  out.push_back(std::move(field));
  return out;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void sort_traces(event_log& log) {
  for (trace& t : log.traces) {
    // Only a fully timestamped trace has a defined chronological order;
    // otherwise input order stands.
    bool all = std::all_of(t.events.begin(), t.events.end(),
                           [](const event& e) { return e.timestamp_us.has_value(); });
    if (!all) continue;
    std::stable_sort(t.events.begin(), t.events.end(), [](const event& a, const event& b) {
      return *a.timestamp_us < *b.timestamp_us;
    });
  }
}

event_log read_csv(std::istream& in, const read_options& options) {
  std::string line;
  if (!std::getline(in, line)) throw log_error("empty csv");
  auto header = split_csv_row(line, 1);
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  auto require = [&](const std::string& name) {
    auto c = column(name);
    if (!c) throw log_error("missing column '" + name + "'");
    return *c;
  };
  std::size_t c_case = require("case_id");
  std::size_t c_act = require("activity");
  std::size_t c_ts = require("timestamp");
  std::optional<std::size_t> c_life = column("lifecycle");

  event_log log;
  std::map<std::string, std::size_t> case_index;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_row(line, row);
    if (fields.size() < header.size())
      throw log_error("row " + std::to_string(row) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    if (options.lifecycle_complete_only && c_life) {
      std::string lc = fields[*c_life];
      std::transform(lc.begin(), lc.end(), lc.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      if (lc != "complete" && lc != "closed" && lc != "completed") continue;
    }
    std::int64_t ts;
    try {
      ts = parse_timestamp(fields[c_ts]);
    } catch (const log_error& e) {
      throw log_error("row " + std::to_string(row) + ": " + e.what());
    }
    auto [it, fresh] = case_index.try_emplace(fields[c_case], log.traces.size());
    if (fresh) log.traces.push_back(trace{fields[c_case], {}, false});
    log.traces[it->second].events.push_back(event{fields[c_act], ts});
  }
  sort_traces(log);
  return log;
}

event_log read_xes(std::istream& in, const read_options& options) {
  std::ostringstream ss;
  ss << in.rdbuf();
  std::unique_ptr<xml::node> doc;
  try {
    doc = xml::parse_document(ss.str());
  } catch (const parse_error& e) {
    throw log_error(std::string("xes: ") + e.what());
  }
  if (!doc || doc->tag != "log") throw log_error("xes: missing <log> root");

  event_log log;
  std::size_t anonymous = 0;
  for (const xml::node* tr : doc->all("trace")) {
    std::string case_id;
    for (const xml::node* attr : tr->all("string")) {
      const std::string* key = attr->attr("key");
      const std::string* value = attr->attr("value");
      if (key && value && *key == "concept:name") case_id = *value;
    }
    if (case_id.empty()) case_id = "case_" + std::to_string(++anonymous);
    trace t{case_id, {}, false};
    for (const xml::node* ev : tr->all("event")) {
      std::string activity, lifecycle;
      std::optional<std::int64_t> ts;
      for (const auto& attr : ev->children) {
        const std::string* key = attr->attr("key");
        const std::string* value = attr->attr("value");
        if (!key || !value) continue;
        if (*key == "concept:name") activity = *value;
        if (*key == "lifecycle:transition") lifecycle = *value;
        if (*key == "time:timestamp") ts = parse_timestamp(*value);
      }
      if (activity.empty()) continue;
      if (options.lifecycle_complete_only && !lifecycle.empty()) {
        std::transform(lifecycle.begin(), lifecycle.end(), lifecycle.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (lifecycle != "complete" && lifecycle != "closed" && lifecycle != "completed")
          continue;
      }
      t.events.push_back(event{std::move(activity), ts});
    }
    log.traces.push_back(std::move(t));
  }
  sort_traces(log);
  return log;
}

}  // namespace

event_log read_log(std::istream& in, log_format format, const read_options& options) {
  return format == log_format::csv ? read_csv(in, options) : read_xes(in, options);
}

event_log read_log_file(const std::string& path, const read_options& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw log_error("cannot open '" + path + "'");
  log_format fmt = path.size() > 4 && path.substr(path.size() - 4) == ".xes" ? log_format::xes
                                                                             : log_format::csv;
  return read_log(in, fmt, options);
}

void write_csv(const event_log& log, std::ostream& os) {
  os << "case_id,activity,timestamp\n";
  for (const trace& t : log.traces) {
    for (const event& e : t.events) {
      os << csv_escape(t.case_id) << ',' << csv_escape(e.activity) << ','
         << (e.timestamp_us ? format_timestamp(*e.timestamp_us) : "") << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Prefixes, noise, simulation.

prefix_result make_prefixes(const event_log& log, std::uint32_t min_len, std::uint64_t seed) {
  if (min_len < 1) throw log_error("make_prefixes: min_len must be >= 1");
  prefix_result out;
  std::mt19937_64 rng(seed);
  for (const trace& t : log.traces) {
    auto len = static_cast<std::uint32_t>(t.events.size());
    if (len < min_len) {
      ++out.dropped_short_cases;
      continue;
    }
    std::uniform_int_distribution<std::uint32_t> pick(min_len, len);
    std::uint32_t m = pick(rng);
    trace cut{t.case_id, {t.events.begin(), t.events.begin() + m}, false};
    out.log.traces.push_back(std::move(cut));
    out.prefix_lengths.push_back(m);
  }
  return out;
}

event_log inject_noise(const event_log& log, const noise_spec& spec) {
  if (spec.operations_per_case > 3) throw log_error("inject_noise: at most 3 operations");
  event_log out = log;
  if (spec.operations_per_case == 0 || out.traces.empty()) return out;

  std::vector<std::string> alphabet =
      spec.alphabet_override.empty() ? log.alphabet() : spec.alphabet_override;
  if (alphabet.empty()) throw log_error("inject_noise: empty alphabet");

  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> op_pick(0, 2);
  for (trace& t : out.traces) {
    for (std::uint32_t op = 0; op < spec.operations_per_case; ++op) {
      for (;;) {  // redraw operations the trace is too short for
        int kind = op_pick(rng);
        auto len = t.events.size();
        if (kind == 0) {  // insert a random activity at a random position
          std::uniform_int_distribution<std::size_t> act(0, alphabet.size() - 1);
          std::uniform_int_distribution<std::size_t> pos(0, len);
          t.events.insert(t.events.begin() + static_cast<std::ptrdiff_t>(pos(rng)),
                          event{alphabet[act(rng)], std::nullopt});
          break;
        }
        if (kind == 1) {  // delete a random event
          if (len < 1) continue;
          std::uniform_int_distribution<std::size_t> pos(0, len - 1);
          t.events.erase(t.events.begin() + static_cast<std::ptrdiff_t>(pos(rng)));
          break;
        }
        // swap two random consecutive events; swapping equal activities would
        // be a no-op, so only unequal pairs qualify
        std::vector<std::size_t> spots;
        for (std::size_t i = 0; i + 1 < len; ++i)
          if (t.events[i].activity != t.events[i + 1].activity) spots.push_back(i);
        if (spots.empty()) continue;
        std::uniform_int_distribution<std::size_t> pos(0, spots.size() - 1);
        std::size_t i = spots[pos(rng)];
        std::swap(t.events[i], t.events[i + 1]);
        break;
      }
    }
    // Re-stamp sequentially so the new order is also the chronological one.
    std::int64_t base = 0;
    if (!t.events.empty() && t.events.front().timestamp_us) base = *t.events.front().timestamp_us;
    for (std::size_t i = 0; i < t.events.size(); ++i)
      t.events[i].timestamp_us = base + static_cast<std::int64_t>(i) * 1000000;
  }
  return out;
}

simulated_log simulate_log(const reach_graph& graph, std::uint32_t n_cases, std::uint64_t seed,
                           std::uint32_t max_len) {
  simulated_log out;
  std::mt19937_64 rng(seed);
  constexpr std::int64_t base_ts = 1704067200ll * 1000000;  // 2024-01-01T00:00:00Z
  for (std::uint32_t c = 0; c < n_cases; ++c) {
    char name[24];
    std::snprintf(name, sizeof name, "case_%05u", c + 1);
    trace t{name, {}, false};
    reach_graph::vertex_id v = graph.initial();
    for (std::uint32_t step = 0;; ++step) {
      auto edges = graph.out_edges(v);
      if (edges.empty()) break;
      if (step >= max_len) {
        t.truncated = true;
        break;
      }
      std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
      const auto& [label, target] = edges[pick(rng)];
      t.events.push_back(event{graph.label_name(label),
                               base_ts + static_cast<std::int64_t>(c) * 86400000000 +
                                   static_cast<std::int64_t>(step) * 1000000});
      v = target;
    }
    out.log.traces.push_back(std::move(t));
    out.end_vertices.push_back(v);
  }
  return out;
}

}  // namespace pnstate
