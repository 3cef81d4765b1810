#pragma once

#include <stdexcept>
#include <string>

namespace pnstate {

// All library errors derive from this; messages carry a module tag so the
// CLI can propagate them verbatim.
struct error : std::runtime_error {
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

struct parse_error : error {
  explicit parse_error(const std::string& msg) : error("net-core: parse error: " + msg) {}
};

struct structure_error : error {
  explicit structure_error(const std::string& msg) : error("net-core: structure error: " + msg) {}
};

struct not_enabled_error : error {
  explicit not_enabled_error(const std::string& msg) : error("net-core: not enabled: " + msg) {}
};

struct safeness_error : error {
  explicit safeness_error(const std::string& msg) : error("net-core: safeness violation: " + msg) {}
};

struct unknown_id_error : error {
  explicit unknown_id_error(const std::string& msg) : error("net-core: unknown id: " + msg) {}
};

// Silent-transition closure exceeded its step bound; on sound inputs this
// never fires, on unsound ones it converts a live-lock into a diagnostic.
struct cycle_guard_error : error {
  explicit cycle_guard_error(const std::string& msg) : error("reach: silent cycle guard: " + msg) {}
};

struct state_space_error : error {
  explicit state_space_error(const std::string& msg) : error("reach: state space bound: " + msg) {}
};

struct index_cap_error : error {
  explicit index_cap_error(const std::string& msg) : error("index: entry cap: " + msg) {}
};

struct index_io_error : error {
  explicit index_io_error(const std::string& msg) : error("index: io error: " + msg) {}
};

struct unknown_activity_error : error {
  explicit unknown_activity_error(const std::string& msg) : error("query: unknown activity: " + msg) {}
};

struct log_error : error {
  explicit log_error(const std::string& msg) : error("logio: " + msg) {}
};

}  // namespace pnstate
