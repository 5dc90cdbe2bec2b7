/**
 * Copyright 2026 The Medformer Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "mdf/yaml.hpp"

#include <cerrno>
#include <cstdlib>
#include <sstream>

#include "mdf/error.hpp"

namespace mdf::yaml {

Node Node::make_scalar(std::string value, std::size_t line) {
  Node n;
  n.kind_ = Kind::scalar;
  n.scalar_ = std::move(value);
  n.line_ = line;
  return n;
}

Node Node::make_sequence(std::size_t line) {
  Node n;
  n.kind_ = Kind::sequence;
  n.line_ = line;
  return n;
}

Node Node::make_mapping(std::size_t line) {
  Node n;
  n.kind_ = Kind::mapping;
  n.line_ = line;
  return n;
}

const std::string &Node::scalar() const {
  if (kind_ != Kind::scalar) throw ConfigError("line " + std::to_string(line_) + ": expected a scalar");
  return scalar_;
}

const std::vector<Node> &Node::items() const {
  if (kind_ != Kind::sequence) throw ConfigError("line " + std::to_string(line_) + ": expected a sequence");
  return items_;
}

const std::vector<std::pair<std::string, Node>> &Node::entries() const {
  if (kind_ != Kind::mapping) throw ConfigError("line " + std::to_string(line_) + ": expected a mapping");
  return entries_;
}

const Node *Node::find(const std::string &key) const {
  if (kind_ != Kind::mapping) return nullptr;
  for (const auto &e : entries_) {
    if (e.first == key) return &e.second;
  }
  return nullptr;
}

bool Node::has(const std::string &key) const { return find(key) != nullptr; }

const Node &Node::at(const std::string &key) const {
  const Node *n = find(key);
  if (n == nullptr) throw LookupError("missing key '" + key + "' (line " + std::to_string(line_) + ")");
  return *n;
}

void Node::push(Node item) {
  if (kind_ != Kind::sequence) throw ContractError("push on a non-sequence node");
  items_.push_back(std::move(item));
}

void Node::set(const std::string &key, Node value) {
  if (kind_ != Kind::mapping) throw ContractError("set on a non-mapping node");
  if (has(key)) throw ParseError("duplicate key '" + key + "'", value.line());
  entries_.emplace_back(key, std::move(value));
}

std::string Node::as_string() const { return scalar(); }

std::int64_t Node::as_int() const {
  const std::string &s = scalar();
  errno = 0;
  char *end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0' || errno != 0) {
    throw ConfigError("line " + std::to_string(line_) + ": '" + s + "' is not an integer");
  }
  return v;
}

double Node::as_double() const {
  const std::string &s = scalar();
  errno = 0;
  char *end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || errno != 0) {
    throw ConfigError("line " + std::to_string(line_) + ": '" + s + "' is not a number");
  }
  return v;
}

bool Node::as_bool() const {
  const std::string &s = scalar();
  if (s == "true" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "no" || s == "off") return false;
  throw ConfigError("line " + std::to_string(line_) + ": '" + s + "' is not a boolean");
}

namespace {

struct Line {
  std::size_t indent;
  std::string text;
  std::size_t number;
};

std::string rstrip(const std::string &s) {
  std::size_t e = s.size();
  while (e > 0 && (s[e - 1] == ' ' || s[e - 1] == '\r')) --e;
  return s.substr(0, e);
}

// Removes a trailing comment that is not inside quotes.
std::string strip_comment(const std::string &s) {
  char quote = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (quote) {
      if (c == '\\' && quote == '"') {
        ++i;
      } else if (c == quote) {
        quote = 0;
      }
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#' && (i == 0 || s[i - 1] == ' ')) {
      return s.substr(0, i);
    }
  }
  return s;
}

std::vector<Line> split_lines(const std::string &text) {
  std::vector<Line> lines;
  std::istringstream in(text);
  std::string raw;
  std::size_t number = 0;
  bool started = false;
  while (std::getline(in, raw)) {
    ++number;
    std::size_t indent = 0;
    while (indent < raw.size() && (raw[indent] == ' ' || raw[indent] == '\t')) {
      if (raw[indent] == '\t') throw ParseError("tab in indentation", number);
      ++indent;
    }
    std::string body = rstrip(strip_comment(raw.substr(indent)));
    if (body.empty()) continue;
    if (indent == 0 && body == "---") {
      if (started) throw ParseError("multiple documents are not supported", number);
      started = true;
      continue;
    }
    if (indent == 0 && body == "...") break;
    started = true;
    lines.push_back({indent, body, number});
  }
  return lines;
}

Node parse_scalar(const std::string &s, std::size_t line) {
  if (s.empty()) return Node();
  const char c = s[0];
  if (c == '&' || c == '*') throw ParseError("anchors and aliases are not supported", line);
  if (c == '!') throw ParseError("tags are not supported", line);
  if (c == '|' || c == '>') throw ParseError("block scalars are not supported", line);
  if (s == "[]") return Node::make_sequence(line);
  if (c == '[' || c == '{') throw ParseError("flow collections are not supported", line);
  if (c == '"' || c == '\'') {
    if (s.size() < 2 || s.back() != c) throw ParseError("unterminated quoted scalar", line);
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      if (c == '"' && s[i] == '\\' && i + 2 < s.size()) {
        const char e = s[++i];
        out.push_back(e == 'n' ? '\n' : e == 't' ? '\t' : e);
      } else if (c == '\'' && s[i] == '\'' && i + 2 < s.size() && s[i + 1] == '\'') {
        out.push_back('\'');
        ++i;
      } else {
        out.push_back(s[i]);
      }
    }
    return Node::make_scalar(out, line);
  }
  if (s == "~" || s == "null") return Node();
  return Node::make_scalar(s, line);
}

// Splits "key: value" / "key:"; returns false when the text is not a
// mapping entry.
bool split_key(const std::string &s, std::string &key, std::string &value, std::size_t line) {
  std::size_t pos = std::string::npos;
  if (!s.empty() && (s[0] == '"' || s[0] == '\'')) {
    const std::size_t close = s.find(s[0], 1);
    if (close == std::string::npos) throw ParseError("unterminated quoted key", line);
    if (close + 1 < s.size() && s[close + 1] == ':') pos = close + 1;
  } else {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == ':' && (i + 1 == s.size() || s[i + 1] == ' ')) {
        pos = i;
        break;
      }
    }
  }
  if (pos == std::string::npos) return false;
  Node k = parse_scalar(rstrip(s.substr(0, pos)), line);
  if (!k.is_scalar()) throw ParseError("mapping keys must be scalars", line);
  key = k.scalar();
  std::size_t v = pos + 1;
  while (v < s.size() && s[v] == ' ') ++v;
  value = s.substr(v);
  return true;
}

bool is_item(const std::string &s) { return s == "-" || s.rfind("- ", 0) == 0; }

class Parser {
 public:
  explicit Parser(std::vector<Line> lines) : lines_(std::move(lines)) {}

  Node document() {
    if (lines_.empty()) return Node();
    if (lines_[0].indent != 0) throw ParseError("document must start at column 1", lines_[0].number);
    Node n = block(0);
    if (pos_ < lines_.size()) throw ParseError("unexpected indentation", lines_[pos_].number);
    return n;
  }

 private:
  Node block(std::size_t indent) {
    return is_item(lines_[pos_].text) ? sequence(indent) : mapping(indent);
  }

  // Value that follows "key:" or "-" with nothing after it on the line.
  Node nested(std::size_t parent_indent, bool allow_same_indent_sequence) {
    if (pos_ >= lines_.size()) return Node();
    const Line &next = lines_[pos_];
    if (next.indent > parent_indent) return block(next.indent);
    if (allow_same_indent_sequence && next.indent == parent_indent && is_item(next.text)) {
      return sequence(parent_indent);
    }
    return Node();
  }

  Node sequence(std::size_t indent) {
    Node seq = Node::make_sequence(lines_[pos_].number);
    while (pos_ < lines_.size() && lines_[pos_].indent == indent && is_item(lines_[pos_].text)) {
      Line &ln = lines_[pos_];
      std::string rest = ln.text == "-" ? "" : ln.text.substr(2);
      std::size_t shift = 2;
      while (!rest.empty() && rest[0] == ' ') {
        rest.erase(0, 1);
        ++shift;
      }
      if (rest.empty()) {
        ++pos_;
        seq.push(nested(indent, false));
        continue;
      }
      std::string key, value;
      if (is_item(rest)) throw ParseError("nested inline sequences are not supported", ln.number);
      if (split_key(rest, key, value, ln.number)) {
        // "- key: v" opens a mapping whose entries sit at the key's column.
        ln.indent = indent + shift;
        ln.text = rest;
        seq.push(mapping(ln.indent));
        continue;
      }
      seq.push(parse_scalar(rest, ln.number));
      ++pos_;
    }
    return seq;
  }

  Node mapping(std::size_t indent) {
    Node map = Node::make_mapping(lines_[pos_].number);
    while (pos_ < lines_.size() && lines_[pos_].indent == indent) {
      const Line ln = lines_[pos_];
      if (is_item(ln.text)) throw ParseError("sequence item where a mapping entry was expected", ln.number);
      std::string key, value;
      if (!split_key(ln.text, key, value, ln.number)) {
        throw ParseError("expected 'key: value', got '" + ln.text + "'", ln.number);
      }
      ++pos_;
      Node child = value.empty() ? nested(indent, true) : parse_scalar(value, ln.number);
      if (map.has(key)) throw ParseError("duplicate key '" + key + "'", ln.number);
      map.set(key, std::move(child));
    }
    if (pos_ < lines_.size() && lines_[pos_].indent > indent) {
      throw ParseError("unexpected indentation", lines_[pos_].number);
    }
    return map;
  }

  std::vector<Line> lines_;
  std::size_t pos_ = 0;
};

bool needs_quotes(const std::string &s) {
  if (s.empty()) return true;
  const std::string special = "#&*!|>[]{}'\"%@`,";
  if (special.find(s[0]) != std::string::npos || (s[0] == '-' && (s.size() == 1 || s[1] == ' '))) return true;
  if (s == "~" || s == "null" || s.front() == ' ' || s.back() == ' ') return true;
  if (s.find(": ") != std::string::npos || s.back() == ':' || s.find(" #") != std::string::npos) return true;
  return s.find('\n') != std::string::npos || s.find('\t') != std::string::npos;
}

std::string quote(const std::string &s) {
  if (!needs_quotes(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
    } else if (c == '\t') {
      out += "\\t";
    } else {
      out.push_back(c);
    }
  }
  return out + "\"";
}

void emit_node(const Node &n, std::size_t indent, std::ostringstream &out);

void emit_value(const Node &v, std::size_t indent, std::ostringstream &out) {
  if (v.is_scalar()) {
    out << ' ' << quote(v.scalar()) << '\n';
  } else if (v.is_null()) {
    out << '\n';
  } else if (v.is_sequence() && v.items().empty()) {
    out << " []\n";
  } else {
    out << '\n';
    emit_node(v, indent + 2, out);
  }
}

void emit_node(const Node &n, std::size_t indent, std::ostringstream &out) {
  const std::string pad(indent, ' ');
  if (n.is_mapping()) {
    for (const auto &[k, v] : n.entries()) {
      out << pad << quote(k) << ':';
      emit_value(v, indent, out);
    }
  } else if (n.is_sequence()) {
    for (const auto &item : n.items()) {
      if (item.is_mapping() && !item.entries().empty()) {
        std::ostringstream inner;
        emit_node(item, indent + 2, inner);
        std::string s = inner.str();
        out << pad << "- " << s.substr(indent + 2);
      } else {
        out << pad << '-';
        emit_value(item, indent, out);
      }
    }
  } else if (n.is_scalar()) {
    out << pad << quote(n.scalar()) << '\n';
  }
}

}  // namespace

Node parse(const std::string &text) { return Parser(split_lines(text)).document(); }

std::string emit(const Node &node) {
  std::ostringstream out;
  emit_node(node, 0, out);
  return out.str();
}

}  // namespace mdf::yaml
