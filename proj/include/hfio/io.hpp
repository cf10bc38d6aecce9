#pragma once

// Field files (little-endian complex64 samples plus a JSON header), CSV
// tables and JSON documents.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hfio/errors.hpp"
#include "hfio/spectral.hpp"

namespace hfio {

namespace fs = std::filesystem;

/// Writes `<stem>.bin` (interleaved re/im float32, little endian) and
/// `<stem>.json` ({n, N, L, band_limit}).
inline void write_field(const fs::path& stem, const SampledField& f) {
  static_assert(std::endian::native == std::endian::little, "field files assume a little-endian host");
  fs::path bin = stem, hdr = stem;
  bin += ".bin";
  hdr += ".json";
  std::ofstream out(bin, std::ios::binary);
  if (!out) throw Error("write_field: cannot open " + bin.string());
  std::vector<float> buf(2 * f.values.size());
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    buf[2 * i] = static_cast<float>(f.values[i].real());
    buf[2 * i + 1] = static_cast<float>(f.values[i].imag());
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  nlohmann::json h{{"n", f.grid.dim()}, {"N", f.grid.points()}, {"L", f.grid.period()}};
  h["band_limit"] = f.band_limit ? nlohmann::json(*f.band_limit) : nlohmann::json(nullptr);
  std::ofstream(hdr) << h.dump(2) << "\n";
}

inline SampledField read_field(const fs::path& stem) {
  fs::path bin = stem, hdr = stem;
  bin += ".bin";
  hdr += ".json";
  std::ifstream hs(hdr);
  if (!hs) throw Error("read_field: cannot open " + hdr.string());
  const auto h = nlohmann::json::parse(hs);
  PeriodicGrid g(h.at("n").get<int>(), h.at("N").get<int>(), h.at("L").get<double>());
  std::optional<double> band;
  if (h.contains("band_limit") && !h["band_limit"].is_null()) band = h["band_limit"].get<double>();
  std::ifstream in(bin, std::ios::binary);
  if (!in) throw Error("read_field: cannot open " + bin.string());
  std::vector<float> buf(2 * g.size());
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != buf.size() * sizeof(float))
    throw GridMismatch("read_field: sample file shorter than the header implies");
  SampledField f(g, band);
  for (std::size_t i = 0; i < g.size(); ++i) f.values[i] = cplx(buf[2 * i], buf[2 * i + 1]);
  return f;
}

/// Column table rendered with a fixed number format (byte-stable output).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row) {
    if (row.size() != header.size()) throw DomainError("CsvTable: row width differs from header");
    rows.push_back(std::move(row));
  }
  std::string render() const {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
    out += "\n";
    char cell[64];
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        std::snprintf(cell, sizeof cell, "%.12e", r[i]);
        if (i) out += ",";
        out += cell;
      }
      out += "\n";
    }
    return out;
  }
  void write(const fs::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error("CsvTable: cannot open " + path.string());
    out << render();
  }
};

inline void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error("write_json: cannot open " + path.string());
  out << j.dump(2) << "\n";
}

inline nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("read_json: cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError("read_json: " + path.string() + ": " + e.what());
  }
}

}  // namespace hfio
