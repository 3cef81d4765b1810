#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pnstate/net.hpp"

namespace pnstate {

enum class net_format { native_json, pnml };

// Native model format: top-level object with
//   places:      [{"id": "p1"}, ...]
//   transitions: [{"id": "t1", "label": "Do work", "silent": false}, ...]
//   arcs:        [{"from": "p1", "to": "t1"}, ...]
// A transition with no label and no silent flag is silent; an observable
// transition without a label is rejected.
workflow_net parse_net(std::istream& in, net_format format,
                       std::vector<std::string>* warnings = nullptr);
workflow_net parse_net(const std::string& text, net_format format,
                       std::vector<std::string>* warnings = nullptr);
workflow_net parse_net_file(const std::string& path,
                            std::vector<std::string>* warnings = nullptr);

// Round-trips with parse_net(native_json): ids and labels bit-exact,
// document order preserved.
std::string write_native_json(const workflow_net& net);

}  // namespace pnstate
