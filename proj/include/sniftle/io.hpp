/**
 * @file io.hpp
 * @brief Field-scan output writers: delimited text and the SNFK1 binary dump.
 *
 * Text rows are ordered grid-major, then time, with all numbers printed to
 * 17 significant digits so values round-trip exactly. The binary format is
 * the magic bytes "SNFK1", a little-endian uint64 header length, the header
 * as structured text, then the row payload as little-endian float64.
 */
#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <ostream>
#include <string>
#include <vector>

#include "sniftle/fieldscan.hpp"
#include "sniftle/montecarlo.hpp"
#include "sniftle/version.hpp"

namespace sniftle {

/// Canonical shortest-round-trip-free formatting: 17 significant digits.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::string field_header(const ScanSpec& spec, const FieldResult& result,
                                const Provenance& prov, char comment) {
  std::string h;
  auto line = [&](const std::string& s) {
    h += comment;
    h += ' ';
    h += s;
    h += '\n';
  };
  line(std::string("sniftle ") + kVersion);
  line("config_hash " + prov.config_hash);
  line("seed " + std::to_string(prov.seed));
  line("spec_hash " + std::to_string(result.spec_hash));
  std::string dims = "grid";
  for (const ScanAxis& ax : spec.axes)
    dims += " " + format_double(ax.min) + ":" + format_double(ax.max) + ":" +
            std::to_string(ax.count);
  line(dims);
  std::string ts = "times";
  for (double t : spec.times) ts += " " + format_double(t);
  line(ts);
  return h;
}

}  // namespace detail

inline void write_field_text(std::ostream& os, const ScanSpec& spec,
                             const FieldResult& result, const Provenance& prov) {
  os << detail::field_header(spec, result, prov, '#');
  const std::size_t n = spec.axes.size();
  for (std::size_t d = 0; d < n; ++d) os << "x" << (d + 1) << " ";
  os << "t ftle sniftle s2 q2 status\n";
  for (std::size_t gi = 0; gi < result.grid_size; ++gi) {
    for (std::size_t ti = 0; ti < result.time_count; ++ti) {
      const std::size_t idx = ti * result.grid_size + gi;
      const MeasureRecord& r = result.records[idx];
      for (double x : r.xi0) os << format_double(x) << " ";
      os << format_double(r.t) << " " << format_double(r.ftle) << " "
         << format_double(r.sniftle) << " " << format_double(r.s2) << " "
         << format_double(r.q2) << " "
         << (result.status[idx] == RecordStatus::kOk ? "ok" : "failed") << "\n";
    }
  }
}

inline void write_field_binary(std::ostream& os, const ScanSpec& spec,
                               const FieldResult& result, const Provenance& prov) {
  const std::size_t n = spec.axes.size();
  std::string header = detail::field_header(spec, result, prov, '#');
  header += "# columns x1..x" + std::to_string(n) + " t ftle sniftle s2 q2 status\n";
  header += "# rows " + std::to_string(result.records.size()) + "\n";

  os.write("SNFK1", 5);
  std::uint64_t hlen = header.size();
  os.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  os.write(header.data(), std::streamsize(header.size()));
  std::vector<double> row(n + 6);
  for (std::size_t gi = 0; gi < result.grid_size; ++gi) {
    for (std::size_t ti = 0; ti < result.time_count; ++ti) {
      const std::size_t idx = ti * result.grid_size + gi;
      const MeasureRecord& r = result.records[idx];
      std::size_t c = 0;
      for (double x : r.xi0) row[c++] = x;
      row[c++] = r.t;
      row[c++] = r.ftle;
      row[c++] = r.sniftle;
      row[c++] = r.s2;
      row[c++] = r.q2;
      row[c++] = result.status[idx] == RecordStatus::kOk ? 0.0 : 1.0;
      os.write(reinterpret_cast<const char*>(row.data()),
               std::streamsize(row.size() * sizeof(double)));
    }
  }
}

/// Scaling-study table: one row per (scale, r) with moment and stderr.
inline void write_study_text(std::ostream& os, const ScalingStudy& study,
                             const Provenance& prov) {
  os << "# sniftle " << kVersion << "\n";
  os << "# config_hash " << prov.config_hash << "\n";
  os << "# seed " << prov.seed << "\n";
  os << "scale r moment stderr\n";
  for (const ScalingRow& row : study.rows)
    os << format_double(row.scale) << " " << row.r << " "
       << format_double(row.moment) << " " << format_double(row.stderr_) << "\n";
  for (const auto& [r, fit] : study.slopes) {
    os << "# slope r=" << r << " " << format_double(fit.slope) << " residual "
       << format_double(fit.residual)
       << (study.degenerate ? " degenerate-zero" : fit.monotone ? "" : " inconclusive")
       << "\n";
  }
}

}  // namespace sniftle
