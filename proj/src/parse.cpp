#include "pnstate/parse.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "xml_mini.hpp"

namespace pnstate {

namespace {

workflow_net parse_native_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("invalid json: ") + e.what());
  }
  if (!doc.is_object()) throw parse_error("top-level value is not an object");

  net_builder b;
  for (const auto& p : doc.value("places", nlohmann::json::array())) {
    if (!p.contains("id") || !p["id"].is_string())
      throw parse_error("place without a string 'id'");
    b.add_place(p["id"].get<std::string>());
  }
  for (const auto& t : doc.value("transitions", nlohmann::json::array())) {
    if (!t.contains("id") || !t["id"].is_string())
      throw parse_error("transition without a string 'id'");
    std::string id = t["id"].get<std::string>();
    std::string label = t.value("label", std::string());
    bool silent = t.contains("silent") ? t["silent"].get<bool>() : label.empty();
    if (!silent && label.empty())
      throw parse_error("observable transition '" + id + "' has no label");
    b.add_transition(id, label, silent);
  }
  for (const auto& a : doc.value("arcs", nlohmann::json::array())) {
    if (!a.contains("from") || !a.contains("to"))
      throw parse_error("arc without 'from'/'to'");
    b.add_arc(a["from"].get<std::string>(), a["to"].get<std::string>());
  }
  return b.build();
}

// PNML core subset: place/transition/arc with <name><text> labels. Anything
// else is ignored with a warning. A transition with no name, an empty name,
// or a ProM/PM4PY invisible marker is silent.
workflow_net parse_pnml(const std::string& text, std::vector<std::string>* warnings) {
  auto doc = xml::parse_document(text);
  if (!doc || doc->tag != "pnml") throw parse_error("pnml: missing <pnml> root");
  const xml::node* net_node = doc->child("net");
  if (!net_node) throw parse_error("pnml: missing <net>");
  const xml::node* scope = net_node->child("page") ? net_node->child("page") : net_node;

  auto warn = [&](const std::string& msg) {
    if (warnings) warnings->push_back("pnml: ignored " + msg);
  };
  auto name_text = [](const xml::node* n) -> std::string {
    const xml::node* name = n->child("name");
    if (!name) return {};
    const xml::node* txt = name->child("text");
    return txt ? txt->text : name->text;
  };

  net_builder b;
  std::vector<std::tuple<std::string, std::string, bool>> transitions;
  std::vector<std::pair<std::string, std::string>> arcs;
  for (const auto& c : scope->children) {
    if (c->tag == "place") {
      const std::string* id = c->attr("id");
      if (!id) throw parse_error("pnml: place without id");
      b.add_place(*id);
    } else if (c->tag == "transition") {
      const std::string* id = c->attr("id");
      if (!id) throw parse_error("pnml: transition without id");
      std::string label = name_text(c.get());
      bool silent = label.empty();
      for (const xml::node* ts : c->all("toolspecific")) {
        const std::string* act = ts->attr("activity");
        if (act && *act == "$invisible$") silent = true;
      }
      transitions.emplace_back(*id, silent ? std::string() : label, silent);
    } else if (c->tag == "arc") {
      const std::string* from = c->attr("source");
      const std::string* to = c->attr("target");
      if (!from || !to) throw parse_error("pnml: arc without source/target");
      arcs.emplace_back(*from, *to);
    } else {
      warn("<" + c->tag + ">");
    }
  }
  for (auto& [id, label, silent] : transitions) b.add_transition(id, label, silent);
  for (auto& [from, to] : arcs) b.add_arc(from, to);
  return b.build();
}

}  // namespace

workflow_net parse_net(const std::string& text, net_format format,
                       std::vector<std::string>* warnings) {
  switch (format) {
    case net_format::native_json:
      return parse_native_json(text);
    case net_format::pnml:
      return parse_pnml(text, warnings);
  }
  throw parse_error("unknown format");
}

workflow_net parse_net(std::istream& in, net_format format, std::vector<std::string>* warnings) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_net(ss.str(), format, warnings);
}

workflow_net parse_net_file(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open '" + path + "'");
  net_format fmt = path.size() > 5 && path.substr(path.size() - 5) == ".pnml"
                       ? net_format::pnml
                       : net_format::native_json;
  return parse_net(in, fmt, warnings);
}

std::string write_native_json(const workflow_net& net) {
  nlohmann::ordered_json doc;
  doc["places"] = nlohmann::ordered_json::array();
  for (place_id p = 0; p < net.place_count(); ++p)
    doc["places"].push_back({{"id", net.place_name(p)}});
  doc["transitions"] = nlohmann::ordered_json::array();
  for (trans_id t = 0; t < net.transition_count(); ++t) {
    nlohmann::ordered_json jt;
    jt["id"] = net.transition_name(t);
    if (net.is_observable(t)) jt["label"] = net.label(t);
    jt["silent"] = net.is_silent(t);
    doc["transitions"].push_back(std::move(jt));
  }
  doc["arcs"] = nlohmann::ordered_json::array();
  for (trans_id t = 0; t < net.transition_count(); ++t) {
    for (place_id p : net.inputs(t))
      doc["arcs"].push_back({{"from", net.place_name(p)}, {"to", net.transition_name(t)}});
    for (place_id p : net.outputs(t))
      doc["arcs"].push_back({{"from", net.transition_name(t)}, {"to", net.place_name(p)}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace pnstate
