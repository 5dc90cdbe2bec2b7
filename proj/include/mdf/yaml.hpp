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
#ifndef MDF_YAML_HPP_
#define MDF_YAML_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mdf::yaml {

/// Restricted YAML: block mappings, block sequences (of scalars or
/// mappings), plain or quoted scalars, comments, and `[]` for an empty
/// sequence. Tabs in indentation, flow collections, anchors, aliases, tags
/// and multi-line scalars are rejected with a ParseError carrying the line.
class Node {
 public:
  enum class Kind { null, scalar, sequence, mapping };

  Node() = default;
  static Node make_scalar(std::string value, std::size_t line = 0);
  static Node make_sequence(std::size_t line = 0);
  static Node make_mapping(std::size_t line = 0);

  Kind kind() const { return kind_; }
  bool is_null() const { return kind_ == Kind::null; }
  bool is_scalar() const { return kind_ == Kind::scalar; }
  bool is_sequence() const { return kind_ == Kind::sequence; }
  bool is_mapping() const { return kind_ == Kind::mapping; }
  std::size_t line() const { return line_; }

  const std::string &scalar() const;
  const std::vector<Node> &items() const;
  const std::vector<std::pair<std::string, Node>> &entries() const;

  bool has(const std::string &key) const;
  /// Throws LookupError if absent.
  const Node &at(const std::string &key) const;
  const Node *find(const std::string &key) const;

  void push(Node item);
  /// Throws ParseError on a duplicate key.
  void set(const std::string &key, Node value);

  /// Typed scalar access; ConfigError names the line on a bad value.
  std::string as_string() const;
  std::int64_t as_int() const;
  double as_double() const;
  bool as_bool() const;

 private:
  Kind kind_ = Kind::null;
  std::size_t line_ = 0;
  std::string scalar_;
  std::vector<Node> items_;
  std::vector<std::pair<std::string, Node>> entries_;
};

Node parse(const std::string &text);
/// Canonical block form: two-space indent, sequence items as "- ".
std::string emit(const Node &node);

}  // namespace mdf::yaml

#endif  // MDF_YAML_HPP_
