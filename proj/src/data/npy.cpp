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
#include <cstring>
#include <numeric>
#include <sstream>

#include "mdf/data.hpp"
#include "mdf/error.hpp"

namespace mdf {

namespace {

constexpr char kMagic[] = "\x93NUMPY";

[[noreturn]] void fail(const std::string &entry, const std::string &msg) {
  throw IngestionError(entry + ": " + msg);
}

struct Header {
  std::string descr;
  bool fortran = false;
  Shape shape;
};

class DictParser {
 public:
  DictParser(const std::string &text, const std::string &entry) : s_(text), entry_(entry) {}

  Header parse() {
    Header h;
    bool have_descr = false, have_order = false, have_shape = false;
    expect('{');
    while (true) {
      skip_ws();
      if (peek() == '}') break;
      const std::string key = quoted();
      expect(':');
      skip_ws();
      if (key == "descr") {
        h.descr = quoted();
        have_descr = true;
      } else if (key == "fortran_order") {
        h.fortran = boolean();
        have_order = true;
      } else if (key == "shape") {
        h.shape = tuple();
        have_shape = true;
      } else {
        fail(entry_, "unexpected header key '" + key + "'");
      }
      skip_ws();
      if (peek() == ',') ++i_;
    }
    if (!have_descr || !have_order || !have_shape) fail(entry_, "header lacks descr, fortran_order or shape");
    return h;
  }

 private:
  char peek() const {
    if (i_ >= s_.size()) fail(entry_, "truncated header");
    return s_[i_];
  }
  void skip_ws() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\n' || s_[i_] == '\t')) ++i_;
  }
  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(entry_, std::string("malformed header, expected '") + c + "'");
    ++i_;
  }
  std::string quoted() {
    skip_ws();
    const char q = peek();
    if (q != '\'' && q != '"') fail(entry_, "malformed header, expected a string");
    const auto end = s_.find(q, i_ + 1);
    if (end == std::string::npos) fail(entry_, "unterminated string in header");
    std::string out = s_.substr(i_ + 1, end - i_ - 1);
    i_ = end + 1;
    return out;
  }
  bool boolean() {
    if (s_.compare(i_, 4, "True") == 0) {
      i_ += 4;
      return true;
    }
    if (s_.compare(i_, 5, "False") == 0) {
      i_ += 5;
      return false;
    }
    fail(entry_, "fortran_order must be True or False");
  }
  Shape tuple() {
    expect('(');
    Shape out;
    while (true) {
      skip_ws();
      if (peek() == ')') {
        ++i_;
        return out;
      }
      std::size_t v = 0;
      bool any = false;
      while (i_ < s_.size() && s_[i_] >= '0' && s_[i_] <= '9') {
        v = v * 10 + static_cast<std::size_t>(s_[i_] - '0');
        ++i_;
        any = true;
      }
      if (!any) fail(entry_, "malformed shape tuple");
      out.push_back(v);
      skip_ws();
      if (peek() == ',') ++i_;
    }
  }

  const std::string &s_;
  std::string entry_;
  std::size_t i_ = 0;
};

struct DType_ {
  char kind;  // u, i, f
  std::size_t size;
  bool big;
};

DType_ decode_descr(const std::string &descr, const std::string &entry) {
  if (descr.size() < 3) fail(entry, "unsupported dtype '" + descr + "'");
  const char order = descr[0];
  const std::string code = descr.substr(1);
  DType_ d{};
  if (code == "u1") d = {'u', 1, false};
  else if (code == "i1") d = {'i', 1, false};
  else if (code == "i4") d = {'i', 4, false};
  else if (code == "i8") d = {'i', 8, false};
  else if (code == "f4") d = {'f', 4, false};
  else if (code == "f8") d = {'f', 8, false};
  else fail(entry, "unsupported dtype '" + descr + "'");
  if (order == '>') d.big = d.size > 1;
  else if (order != '<' && order != '|' && order != '=') fail(entry, "unsupported byte order in '" + descr + "'");
  return d;
}

double read_value(const unsigned char *p, const DType_ &d) {
  unsigned char buf[8];
  for (std::size_t i = 0; i < d.size; ++i) buf[i] = d.big ? p[d.size - 1 - i] : p[i];
  switch (d.kind) {
    case 'u':
      return static_cast<double>(buf[0]);
    case 'i':
      if (d.size == 1) return static_cast<double>(static_cast<std::int8_t>(buf[0]));
      if (d.size == 4) {
        std::int32_t v;
        std::memcpy(&v, buf, 4);
        return static_cast<double>(v);
      } else {
        std::int64_t v;
        std::memcpy(&v, buf, 8);
        return static_cast<double>(v);
      }
    default:
      if (d.size == 4) {
        float v;
        std::memcpy(&v, buf, 4);
        return static_cast<double>(v);
      } else {
        double v;
        std::memcpy(&v, buf, 8);
        return v;
      }
  }
}

void write_value(std::string &out, double v, const DType_ &d) {
  unsigned char buf[8];
  switch (d.kind) {
    case 'u':
      buf[0] = static_cast<unsigned char>(v);
      break;
    case 'i':
      if (d.size == 1) {
        buf[0] = static_cast<unsigned char>(static_cast<std::int8_t>(v));
      } else if (d.size == 4) {
        const auto x = static_cast<std::int32_t>(v);
        std::memcpy(buf, &x, 4);
      } else {
        const auto x = static_cast<std::int64_t>(v);
        std::memcpy(buf, &x, 8);
      }
      break;
    default:
      if (d.size == 4) {
        const auto x = static_cast<float>(v);
        std::memcpy(buf, &x, 4);
      } else {
        std::memcpy(buf, &v, 8);
      }
  }
  for (std::size_t i = 0; i < d.size; ++i) out.push_back(static_cast<char>(d.big ? buf[d.size - 1 - i] : buf[i]));
}

// Maps row-major linear index r to the storage offset of a fortran array.
std::vector<std::size_t> fortran_offsets(const Shape &shape) {
  const std::size_t n = std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  std::vector<std::size_t> fst(shape.size(), 1);
  for (std::size_t a = 1; a < shape.size(); ++a) fst[a] = fst[a - 1] * shape[a - 1];
  std::vector<std::size_t> out(n);
  std::vector<std::size_t> idx(shape.size(), 0);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t off = 0;
    for (std::size_t a = 0; a < shape.size(); ++a) off += idx[a] * fst[a];
    out[r] = off;
    for (std::size_t a = shape.size(); a-- > 0;) {
      if (++idx[a] < shape[a]) break;
      idx[a] = 0;
    }
  }
  return out;
}

}  // namespace

std::size_t NpyArray::numel() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

NpyArray parse_npy(const std::string &bytes, const std::string &entry) {
  if (bytes.size() < 10 || bytes.compare(0, 6, kMagic, 6) != 0) fail(entry, "bad magic, not a .npy array");
  const auto major = static_cast<unsigned char>(bytes[6]);
  std::size_t header_len = 0, offset = 0;
  const auto *u = reinterpret_cast<const unsigned char *>(bytes.data());
  if (major == 1) {
    header_len = u[8] | (u[9] << 8);
    offset = 10;
  } else if (major == 2 || major == 3) {
    if (bytes.size() < 12) fail(entry, "truncated header");
    header_len = static_cast<std::size_t>(u[8]) | (static_cast<std::size_t>(u[9]) << 8) |
                 (static_cast<std::size_t>(u[10]) << 16) | (static_cast<std::size_t>(u[11]) << 24);
    offset = 12;
  } else {
    fail(entry, "unsupported format version " + std::to_string(major));
  }
  if (offset + header_len > bytes.size()) fail(entry, "truncated header");
  Header h = DictParser(bytes.substr(offset, header_len), entry).parse();
  const DType_ d = decode_descr(h.descr, entry);
  NpyArray arr;
  arr.descr = h.descr;
  arr.shape = h.shape;
  arr.fortran_order = h.fortran;
  const std::size_t n = arr.numel();
  const std::size_t data_at = offset + header_len;
  if (bytes.size() - data_at != n * d.size) {
    fail(entry, "payload holds " + std::to_string(bytes.size() - data_at) + " bytes, shape " + shape_str(h.shape) +
                    " needs " + std::to_string(n * d.size));
  }
  arr.values.resize(n);
  const unsigned char *base = u + data_at;
  if (h.fortran && h.shape.size() > 1) {
    const auto offs = fortran_offsets(h.shape);
    for (std::size_t r = 0; r < n; ++r) arr.values[r] = read_value(base + offs[r] * d.size, d);
  } else {
    for (std::size_t r = 0; r < n; ++r) arr.values[r] = read_value(base + r * d.size, d);
  }
  return arr;
}

std::string encode_npy(const std::string &descr, const Shape &shape, const std::vector<double> &values,
                       bool fortran_order) {
  const DType_ d = decode_descr(descr, "encode_npy");
  const std::size_t n = std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  if (values.size() != n) throw DimensionError("encode_npy: value count does not match shape");
  std::ostringstream hs;
  hs << "{'descr': '" << descr << "', 'fortran_order': " << (fortran_order ? "True" : "False") << ", 'shape': (";
  for (std::size_t a = 0; a < shape.size(); ++a) hs << (a ? ", " : "") << shape[a];
  hs << (shape.size() == 1 ? ",), }" : "), }");
  std::string header = hs.str();
  const std::size_t unpadded = 10 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');
  std::string out(kMagic, 6);
  out.push_back('\x01');
  out.push_back('\x00');
  out.push_back(static_cast<char>(header.size() & 0xff));
  out.push_back(static_cast<char>((header.size() >> 8) & 0xff));
  out += header;
  out.reserve(out.size() + n * d.size);
  if (fortran_order && shape.size() > 1) {
    const auto offs = fortran_offsets(shape);
    std::vector<double> stored(n);
    for (std::size_t r = 0; r < n; ++r) stored[offs[r]] = values[r];
    for (double v : stored) write_value(out, v, d);
  } else {
    for (double v : values) write_value(out, v, d);
  }
  return out;
}

}  // namespace mdf
