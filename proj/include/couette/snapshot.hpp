#pragma once

// Snapshot files: a text sidecar `<base>.meta` with every metadata key and a
// raw payload `<base>.bin` of little-endian float64 samples, row-major with
// the second axis fastest. The sidecar carries the CRC-32 of the payload.

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "couette/errors.hpp"
#include "couette/field.hpp"
#include "couette/grid.hpp"

namespace couette {

struct Snapshot {
  Field field;
  double t = 0.0;
  double nu = 1.0;
  double alpha = 0.0;
};

namespace detail {

inline std::uint32_t crc32_of(const std::vector<unsigned char>& bytes) {
  uLong c = ::crc32(0L, Z_NULL, 0);
  std::size_t off = 0;
  while (off < bytes.size()) {
    const uInt chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    c = ::crc32(c, bytes.data() + off, chunk);
    off += chunk;
  }
  return static_cast<std::uint32_t>(c);
}

inline std::vector<unsigned char> encode_le(const std::vector<double>& v) {
  std::vector<unsigned char> out(v.size() * 8);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto u = std::bit_cast<std::uint64_t>(v[i]);
    for (int b = 0; b < 8; ++b) out[i * 8 + b] = static_cast<unsigned char>(u >> (8 * b));
  }
  return out;
}

inline std::vector<double> decode_le(const std::vector<unsigned char>& bytes) {
  std::vector<double> v(bytes.size() / 8);
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::uint64_t u = 0;
    for (int b = 0; b < 8; ++b) u |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
    v[i] = std::bit_cast<double>(u);
  }
  return v;
}

inline std::string hex32(std::uint32_t x) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", x);
  return buf;
}

inline std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline std::string snapshot_meta_path(const std::string& base) { return base + ".meta"; }
inline std::string snapshot_data_path(const std::string& base) { return base + ".bin"; }

/// Writes `<base>.meta` and `<base>.bin`.
inline void write_snapshot(const std::string& base, const Snapshot& s) {
  const auto bytes = detail::encode_le(samples_of(s.field));
  const GridSpec& g = s.field.grid();
  const std::string data_name = std::filesystem::path(snapshot_data_path(base)).filename().string();
  {
    std::ofstream bin(snapshot_data_path(base), std::ios::binary | std::ios::trunc);
    if (!bin) throw SnapshotError("cannot open " + snapshot_data_path(base) + " for writing");
    bin.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!bin) throw SnapshotError("failed writing " + snapshot_data_path(base));
  }
  std::ofstream meta(snapshot_meta_path(base), std::ios::trunc);
  if (!meta) throw SnapshotError("cannot open " + snapshot_meta_path(base) + " for writing");
  meta << "format: couette-snapshot-1\n"
       << "payload: " << data_name << "\n"
       << "dtype: float64\n"
       << "endianness: little\n"
       << "layout: row-major, second axis fastest\n"
       << "grid_half_width: " << detail::g17(g.half_width) << "\n"
       << "grid_n: " << g.n << "\n"
       << "frame: " << to_string(g.frame) << "\n"
       << "t: " << detail::g17(s.t) << "\n"
       << "nu: " << detail::g17(s.nu) << "\n"
       << "alpha: " << detail::g17(s.alpha) << "\n"
       << "payload_bytes: " << bytes.size() << "\n"
       << "crc32: " << detail::hex32(detail::crc32_of(bytes)) << "\n";
  if (!meta) throw SnapshotError("failed writing " + snapshot_meta_path(base));
}

/// Sidecar contents as key/value pairs.
inline std::map<std::string, std::string> read_snapshot_meta(const std::string& base) {
  std::ifstream in(snapshot_meta_path(base));
  if (!in) throw SnapshotError("cannot open " + snapshot_meta_path(base));
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.find(": ");
    if (pos == std::string::npos) continue;
    kv[line.substr(0, pos)] = line.substr(pos + 2);
  }
  for (const char* key : {"format", "dtype", "endianness", "grid_half_width", "grid_n", "frame", "t", "nu", "alpha",
                          "payload_bytes", "crc32"})
    if (!kv.count(key)) throw SnapshotError("snapshot metadata lacks '" + std::string(key) + "'");
  if (kv["format"] != "couette-snapshot-1") throw SnapshotError("unknown snapshot format '" + kv["format"] + "'");
  if (kv["dtype"] != "float64" || kv["endianness"] != "little")
    throw SnapshotError("unsupported payload encoding " + kv["dtype"] + "/" + kv["endianness"]);
  return kv;
}

/// Reads and validates a snapshot. With `expected`, a grid mismatch raises ShapeError.
inline Snapshot read_snapshot(const std::string& base, const std::optional<GridSpec>& expected = std::nullopt) {
  auto kv = read_snapshot_meta(base);
  GridSpec g;
  std::size_t declared = 0;
  double t = 0, nu = 0, alpha = 0;
  try {
    g = make_grid(std::stod(kv["grid_half_width"]), std::stoi(kv["grid_n"]), frame_from_string(kv["frame"]));
    declared = std::stoull(kv["payload_bytes"]);
    t = std::stod(kv["t"]);
    nu = std::stod(kv["nu"]);
    alpha = std::stod(kv["alpha"]);
  } catch (const std::logic_error& e) {
    throw SnapshotError(std::string("malformed snapshot metadata: ") + e.what());
  } catch (const ConfigError& e) {
    throw SnapshotError(std::string("malformed snapshot metadata: ") + e.what());
  }
  if (declared != g.size() * 8)
    throw SnapshotError("metadata declares " + std::to_string(declared) + " payload bytes but the grid needs " +
                        std::to_string(g.size() * 8));
  if (expected && !(expected->same_lattice(g) && expected->frame == g.frame))
    throw ShapeError("snapshot grid (L=" + kv["grid_half_width"] + ", n=" + kv["grid_n"] + ", " + kv["frame"] +
                     ") does not match the requested grid");
  const std::string data_path =
      kv.count("payload") ? (std::filesystem::path(base).parent_path() / kv["payload"]).string() : snapshot_data_path(base);
  std::ifstream in(data_path, std::ios::binary);
  if (!in) throw SnapshotError("cannot open " + data_path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != declared)
    throw SnapshotError("payload has " + std::to_string(bytes.size()) + " bytes, expected " + std::to_string(declared));
  const std::string crc = detail::hex32(detail::crc32_of(bytes));
  if (crc != kv["crc32"]) throw ChecksumError("checksum mismatch: payload " + crc + ", metadata " + kv["crc32"]);
  return {Field::from_samples(g, detail::decode_le(bytes)), t, nu, alpha};
}

}  // namespace couette
