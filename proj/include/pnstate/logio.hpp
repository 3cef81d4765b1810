#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pnstate/reach.hpp"

namespace pnstate {

struct event {
  std::string activity;
  // Microseconds since the Unix epoch; unset events sort by input order.
  std::optional<std::int64_t> timestamp_us;
};

struct trace {
  std::string case_id;
  std::vector<event> events;
  // Simulation hit max_len before reaching a final vertex.
  bool truncated = false;

  std::vector<std::string> activities() const;
};

struct event_log {
  std::vector<trace> traces;

  // Sorted, duplicate-free activity alphabet observed in the log.
  std::vector<std::string> alphabet() const;
  std::size_t event_count() const;
};

enum class log_format { csv, xes };

struct read_options {
  // Keep only completion events when a lifecycle column/attribute exists.
  bool lifecycle_complete_only = false;
};

// csv needs a header with case_id, activity, timestamp (a lifecycle column is
// honored when present); xes reads trace/event/concept:name/time:timestamp.
// Events within a trace are sorted by timestamp, ties by input order.
event_log read_log(std::istream& in, log_format format, const read_options& options = {});
event_log read_log_file(const std::string& path, const read_options& options = {});
void write_csv(const event_log& log, std::ostream& os);

// ISO-8601 (YYYY-MM-DD[T ]HH:MM:SS[.fff][Z|+hh:mm]); naive values read as UTC.
std::int64_t parse_timestamp(const std::string& text);
std::string format_timestamp(std::int64_t us);

// Per case, keeps a uniformly drawn prefix of length m in [min_len, length].
struct prefix_result {
  event_log log;
  std::vector<std::uint32_t> prefix_lengths;
  std::uint32_t dropped_short_cases = 0;
};
prefix_result make_prefixes(const event_log& log, std::uint32_t min_len, std::uint64_t seed);

struct noise_spec {
  std::uint32_t operations_per_case = 0;  // 0..3
  std::uint64_t seed = 0;
  // Insert noise draws from the log's observed alphabet unless told to use
  // the model's.
  std::vector<std::string> alphabet_override;
};

// Applies operations_per_case operations per trace, each drawn uniformly
// from {insert random activity, delete random event, swap adjacent events}.
// An operation the trace is too short for (or a swap with no unequal
// adjacent pair) is redrawn. Timestamps are reassigned sequentially.
event_log inject_noise(const event_log& log, const noise_spec& spec);

// Uniform random walks over the graph's outgoing edges, from the initial
// vertex until a vertex without successors or max_len. The end vertex of
// each walk is recorded as ground truth.
struct simulated_log {
  event_log log;
  std::vector<reach_graph::vertex_id> end_vertices;
};
simulated_log simulate_log(const reach_graph& graph, std::uint32_t n_cases, std::uint64_t seed,
                           std::uint32_t max_len = 1000);

}  // namespace pnstate
