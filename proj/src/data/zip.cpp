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
#include <zlib.h>

#include <cstring>
#include <fstream>
#include <iterator>

#include "mdf/data.hpp"
#include "mdf/error.hpp"

namespace mdf {

namespace {

std::uint32_t rd32(const std::string &b, std::size_t at) {
  if (at + 4 > b.size()) throw IngestionError("zip: truncated structure");
  const auto *u = reinterpret_cast<const unsigned char *>(b.data() + at);
  return static_cast<std::uint32_t>(u[0]) | (static_cast<std::uint32_t>(u[1]) << 8) |
         (static_cast<std::uint32_t>(u[2]) << 16) | (static_cast<std::uint32_t>(u[3]) << 24);
}

std::uint16_t rd16(const std::string &b, std::size_t at) {
  if (at + 2 > b.size()) throw IngestionError("zip: truncated structure");
  const auto *u = reinterpret_cast<const unsigned char *>(b.data() + at);
  return static_cast<std::uint16_t>(u[0] | (u[1] << 8));
}

void wr16(std::string &o, std::uint32_t v) {
  o.push_back(static_cast<char>(v & 0xff));
  o.push_back(static_cast<char>((v >> 8) & 0xff));
}

void wr32(std::string &o, std::uint32_t v) {
  wr16(o, v & 0xffff);
  wr16(o, v >> 16);
}

std::string inflate_raw(const std::string &src, std::size_t expected, const std::string &name) {
  std::string out(expected, '\0');
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw IngestionError(name + ": inflate init failed");
  zs.next_in = reinterpret_cast<Bytef *>(const_cast<char *>(src.data()));
  zs.avail_in = static_cast<uInt>(src.size());
  zs.next_out = reinterpret_cast<Bytef *>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  const auto produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected) throw IngestionError(name + ": corrupt deflate stream");
  return out;
}

std::string deflate_raw(const std::string &src) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw Error("deflate init failed");
  }
  std::string out(deflateBound(&zs, static_cast<uLong>(src.size())), '\0');
  zs.next_in = reinterpret_cast<Bytef *>(const_cast<char *>(src.data()));
  zs.avail_in = static_cast<uInt>(src.size());
  zs.next_out = reinterpret_cast<Bytef *>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  out.resize(zs.total_out);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw Error("deflate failed");
  return out;
}

std::uint32_t crc_of(const std::string &s) {
  return static_cast<std::uint32_t>(
      crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef *>(s.data()), static_cast<uInt>(s.size())));
}

}  // namespace

std::vector<ZipEntry> read_zip(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError(path + ": cannot open archive");
  const std::string b((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (b.size() < 22) throw IngestionError(path + ": not a zip archive");
  std::size_t eocd = std::string::npos;
  const std::size_t stop = b.size() > 22 + 65535 ? b.size() - 22 - 65535 : 0;
  for (std::size_t i = b.size() - 22 + 1; i-- > stop;) {
    if (rd32(b, i) == 0x06054b50) {
      eocd = i;
      break;
    }
  }
  if (eocd == std::string::npos) throw IngestionError(path + ": end of central directory not found");
  const std::size_t count = rd16(b, eocd + 10);
  std::size_t cd = rd32(b, eocd + 16);
  if (count == 0xffff || cd == 0xffffffffu) throw IngestionError(path + ": zip64 archives are not supported");
  std::vector<ZipEntry> out;
  for (std::size_t e = 0; e < count; ++e) {
    if (rd32(b, cd) != 0x02014b50) throw IngestionError(path + ": corrupt central directory");
    const std::uint16_t method = rd16(b, cd + 10);
    const std::uint32_t crc = rd32(b, cd + 16);
    const std::uint32_t csize = rd32(b, cd + 20);
    const std::uint32_t usize = rd32(b, cd + 24);
    const std::uint16_t nlen = rd16(b, cd + 28), xlen = rd16(b, cd + 30), clen = rd16(b, cd + 32);
    const std::uint32_t local = rd32(b, cd + 42);
    if (cd + 46 + nlen > b.size()) throw IngestionError(path + ": corrupt central directory");
    ZipEntry ent;
    ent.name = b.substr(cd + 46, nlen);
    cd += 46 + nlen + xlen + clen;
    if (rd32(b, local) != 0x04034b50) throw IngestionError(ent.name + ": bad local header");
    const std::size_t data = local + 30 + rd16(b, local + 26) + rd16(b, local + 28);
    if (data + csize > b.size()) throw IngestionError(ent.name + ": truncated member");
    const std::string raw = b.substr(data, csize);
    if (method == 0) {
      ent.data = raw;
    } else if (method == 8) {
      ent.data = inflate_raw(raw, usize, ent.name);
    } else {
      throw IngestionError(ent.name + ": unsupported compression method " + std::to_string(method));
    }
    if (ent.data.size() != usize || crc_of(ent.data) != crc) throw IngestionError(ent.name + ": CRC mismatch");
    out.push_back(std::move(ent));
  }
  return out;
}

void write_zip(const std::string &path, const std::vector<ZipEntry> &entries, bool deflate) {
  std::string body, dir;
  for (const auto &e : entries) {
    const std::string payload = deflate ? deflate_raw(e.data) : e.data;
    const std::uint32_t crc = crc_of(e.data);
    const auto offset = static_cast<std::uint32_t>(body.size());
    const std::uint16_t method = deflate ? 8 : 0;
    wr32(body, 0x04034b50);
    wr16(body, 20);
    wr16(body, 0);
    wr16(body, method);
    wr16(body, 0);
    wr16(body, 0x21);
    wr32(body, crc);
    wr32(body, static_cast<std::uint32_t>(payload.size()));
    wr32(body, static_cast<std::uint32_t>(e.data.size()));
    wr16(body, static_cast<std::uint32_t>(e.name.size()));
    wr16(body, 0);
    body += e.name;
    body += payload;

    wr32(dir, 0x02014b50);
    wr16(dir, 20);
    wr16(dir, 20);
    wr16(dir, 0);
    wr16(dir, method);
    wr16(dir, 0);
    wr16(dir, 0x21);
    wr32(dir, crc);
    wr32(dir, static_cast<std::uint32_t>(payload.size()));
    wr32(dir, static_cast<std::uint32_t>(e.data.size()));
    wr16(dir, static_cast<std::uint32_t>(e.name.size()));
    wr16(dir, 0);
    wr16(dir, 0);
    wr16(dir, 0);
    wr16(dir, 0);
    wr32(dir, 0);
    wr32(dir, offset);
    dir += e.name;
  }
  std::string end;
  wr32(end, 0x06054b50);
  wr16(end, 0);
  wr16(end, 0);
  wr16(end, static_cast<std::uint32_t>(entries.size()));
  wr16(end, static_cast<std::uint32_t>(entries.size()));
  wr32(end, static_cast<std::uint32_t>(dir.size()));
  wr32(end, static_cast<std::uint32_t>(body.size()));
  wr16(end, 0);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(path + ": cannot write archive");
  out << body << dir << end;
  if (!out) throw Error(path + ": write failed");
}

}  // namespace mdf
