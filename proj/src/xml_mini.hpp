#pragma once

// Minimal non-validating XML reader, enough for the PNML core subset and the
// XES trace/event structure. Elements become a tree of nodes with attributes
// and concatenated text. No namespaces, DTDs or CDATA.

#include <cctype>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pnstate/error.hpp"

namespace pnstate::xml {

struct node {
  std::string tag;
  std::map<std::string, std::string> attrs;
  std::vector<std::unique_ptr<node>> children;
  std::string text;

  const std::string* attr(const std::string& key) const {
    auto it = attrs.find(key);
    return it == attrs.end() ? nullptr : &it->second;
  }
  const node* child(const std::string& t) const {
    for (const auto& c : children)
      if (c->tag == t) return c.get();
    return nullptr;
  }
  std::vector<const node*> all(const std::string& t) const {
    std::vector<const node*> out;
    for (const auto& c : children)
      if (c->tag == t) out.push_back(c.get());
    return out;
  }
};

class reader {
 public:
  explicit reader(std::string_view text) : s_(text) {}

  std::unique_ptr<node> parse() {
    skip_misc();
    auto root = parse_element();
    return root;
  }

 private:
  std::string_view s_;
  std::size_t i_ = 0;

  [[noreturn]] void fail(const std::string& what) {
    throw parse_error("xml: " + what + " at offset " + std::to_string(i_));
  }
  bool eof() const { return i_ >= s_.size(); }
  char peek() const { return s_[i_]; }
  bool starts(std::string_view p) const { return s_.substr(i_, p.size()) == p; }

  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }

  void skip_until(std::string_view end) {
    auto pos = s_.find(end, i_);
    if (pos == std::string_view::npos) fail("unterminated construct");
    i_ = pos + end.size();
  }

  // Whitespace, comments, processing instructions, doctype.
  void skip_misc() {
    for (;;) {
      skip_ws();
      if (starts("<!--")) {
        skip_until("-->");
      } else if (starts("<?")) {
        skip_until("?>");
      } else if (starts("<!")) {
        skip_until(">");
      } else {
        return;
      }
    }
  }

  std::string decode(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) {
      if (raw[k] != '&') {
        out += raw[k];
        continue;
      }
      auto semi = raw.find(';', k);
      if (semi == std::string_view::npos) fail("bad entity");
      auto ent = raw.substr(k + 1, semi - k - 1);
      if (ent == "amp") out += '&';
      else if (ent == "lt") out += '<';
      else if (ent == "gt") out += '>';
      else if (ent == "quot") out += '"';
      else if (ent == "apos") out += '\'';
      else if (!ent.empty() && ent[0] == '#') {
        int code = std::stoi(std::string(ent.substr(ent[1] == 'x' ? 2 : 1)), nullptr,
                             ent[1] == 'x' ? 16 : 10);
        out += static_cast<char>(code);
      } else {
        fail("unknown entity '" + std::string(ent) + "'");
      }
      k = semi;
    }
    return out;
  }

  std::string read_name() {
    std::size_t start = i_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == ':' ||
                      s_[i_] == '_' || s_[i_] == '-' || s_[i_] == '.'))
      ++i_;
    if (i_ == start) fail("expected a name");
    return std::string(s_.substr(start, i_ - start));
  }

  std::unique_ptr<node> parse_element() {
    if (eof() || peek() != '<') fail("expected '<'");
    ++i_;
    auto n = std::make_unique<node>();
    n->tag = read_name();
    for (;;) {
      skip_ws();
      if (eof()) fail("unterminated tag");
      if (starts("/>")) {
        i_ += 2;
        return n;
      }
      if (peek() == '>') {
        ++i_;
        break;
      }
      std::string key = read_name();
      skip_ws();
      if (eof() || peek() != '=') fail("expected '='");
      ++i_;
      skip_ws();
      if (eof() || (peek() != '"' && peek() != '\'')) fail("expected a quoted value");
      char quote = peek();
      ++i_;
      auto end = s_.find(quote, i_);
      if (end == std::string_view::npos) fail("unterminated attribute");
      n->attrs[key] = decode(s_.substr(i_, end - i_));
      i_ = end + 1;
    }
    // Content until matching close tag.
    for (;;) {
      std::size_t text_start = i_;
      while (!eof() && peek() != '<') ++i_;
      if (i_ > text_start) n->text += decode(s_.substr(text_start, i_ - text_start));
      if (eof()) fail("unterminated element <" + n->tag + ">");
      if (starts("<!--")) {
        skip_until("-->");
        continue;
      }
      if (starts("<?")) {
        skip_until("?>");
        continue;
      }
      if (starts("</")) {
        i_ += 2;
        std::string closing = read_name();
        if (closing != n->tag) fail("mismatched </" + closing + "> for <" + n->tag + ">");
        skip_ws();
        if (eof() || peek() != '>') fail("malformed close tag");
        ++i_;
        return n;
      }
      n->children.push_back(parse_element());
    }
  }
};

inline std::unique_ptr<node> parse_document(std::string_view text) {
  reader r(text);
  return r.parse();
}

}  // namespace pnstate::xml
