#pragma once

// Per-spec metrics CSV. The first line is a schema comment
//   # asl-metrics v1 log_base=e config=<16 hex digits>
// followed by a column header and one row per spec. Fields a command did not
// compute are left empty.

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "asl/errors.hpp"
#include "asl/rng.hpp"

namespace asl {

inline constexpr std::string_view kCsvSchema = "asl-metrics v1";

inline constexpr std::array<std::string_view, 17> kCsvColumns{
    "spec_id",        "template", "delta_a", "delta_v",           "i_az_sv",    "i_ag_sv",
    "i_av_sz",        "h_a_sg",   "success_rate", "seed",         "log_base",   "off_support_steps",
    "nll",            "excess",   "modeling_error", "iterations", "converged"};

struct MetricsRow {
  std::string spec_id;
  std::string family;
  std::optional<double> delta_a, delta_v, i_az_sv, i_ag_sv, i_av_sz, h_a_sg;
  std::optional<double> success_rate;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> off_support_steps;
  std::optional<double> nll, excess, modeling_error;
  std::optional<std::uint64_t> iterations;
  std::optional<bool> converged;
};

/// Shortest round-trip decimal form; identical bytes for identical doubles.
inline std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) throw InvalidArgument("cannot format double");
  return std::string(buf.data(), end);
}

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

/// Stable 64-bit digest of a canonical config string.
inline std::uint64_t config_digest(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) h = (h ^ c) * 0x100000001B3ULL;
  return mix64(h);
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
  return s;
}

inline std::string csv_schema_line(std::uint64_t config) {
  return "# " + std::string(kCsvSchema) + " log_base=e config=" + hex64(config);
}

inline std::string csv_header() {
  std::string s;
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
    if (i) s += ',';
    s += kCsvColumns[i];
  }
  return s;
}

inline std::string format_row(const MetricsRow& r) {
  auto d = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  auto u = [](const std::optional<std::uint64_t>& v) { return v ? std::to_string(*v) : std::string(); };
  std::string s;
  s += csv_escape(r.spec_id) + ',' + csv_escape(r.family);
  for (const auto* v : {&r.delta_a, &r.delta_v, &r.i_az_sv, &r.i_ag_sv, &r.i_av_sz, &r.h_a_sg, &r.success_rate})
    s += ',' + d(*v);
  s += ',' + std::to_string(r.seed) + ",e," + u(r.off_support_steps);
  for (const auto* v : {&r.nll, &r.excess, &r.modeling_error}) s += ',' + d(*v);
  s += ',' + u(r.iterations) + ',' + (r.converged ? (*r.converged ? "true" : "false") : "");
  return s;
}

inline std::string format_csv(const std::vector<MetricsRow>& rows, std::uint64_t config) {
  std::string out = csv_schema_line(config) + '\n' + csv_header() + '\n';
  for (const auto& r : rows) out += format_row(r) + '\n';
  return out;
}

/// Splits one CSV record (no embedded newlines).
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

/// What a resumed run needs from an existing metrics file.
struct CsvProgress {
  std::uint64_t config = 0;
  std::unordered_set<std::string> spec_ids;
};

/// Reads the schema line and the spec ids already written. Throws IoError on
/// a missing or foreign file; a truncated trailing line is ignored.
inline CsvProgress read_csv_progress(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty metrics file: " + path);
  const std::string prefix = "# " + std::string(kCsvSchema) + " log_base=e config=";
  if (!line.starts_with(prefix) || line.size() != prefix.size() + 16)
    throw IoError("unrecognised metrics schema in " + path);
  CsvProgress p;
  const auto hex = std::string_view(line).substr(prefix.size());
  const auto [end, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), p.config, 16);
  if (ec != std::errc{} || end != hex.data() + hex.size()) throw IoError("bad config digest in " + path);
  if (!std::getline(in, line) || line != csv_header()) throw IoError("bad column header in " + path);
  while (std::getline(in, line)) {
    if (in.eof()) break;  // no trailing newline: partial write
    const auto cells = split_csv_line(line);
    if (cells.size() != kCsvColumns.size()) throw IoError("malformed row in " + path);
    p.spec_ids.insert(cells[0]);
  }
  return p;
}

namespace detail {

inline std::optional<double> parse_opt_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) throw IoError("bad number in metrics file: " + s);
  return v;
}

inline std::optional<std::uint64_t> parse_opt_u64(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) throw IoError("bad integer in metrics file: " + s);
  return v;
}

}  // namespace detail

/// Parses every complete row of a metrics file.
inline std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("# " + std::string(kCsvSchema)))
    throw IoError("unrecognised metrics schema in " + path);
  if (!std::getline(in, line) || line != csv_header()) throw IoError("bad column header in " + path);
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (in.eof()) break;
    const auto c = split_csv_line(line);
    if (c.size() != kCsvColumns.size()) throw IoError("malformed row in " + path);
    MetricsRow r;
    r.spec_id = c[0];
    r.family = c[1];
    r.delta_a = detail::parse_opt_double(c[2]);
    r.delta_v = detail::parse_opt_double(c[3]);
    r.i_az_sv = detail::parse_opt_double(c[4]);
    r.i_ag_sv = detail::parse_opt_double(c[5]);
    r.i_av_sz = detail::parse_opt_double(c[6]);
    r.h_a_sg = detail::parse_opt_double(c[7]);
    r.success_rate = detail::parse_opt_double(c[8]);
    r.seed = detail::parse_opt_u64(c[9]).value_or(0);
    r.off_support_steps = detail::parse_opt_u64(c[11]);
    r.nll = detail::parse_opt_double(c[12]);
    r.excess = detail::parse_opt_double(c[13]);
    r.modeling_error = detail::parse_opt_double(c[14]);
    r.iterations = detail::parse_opt_u64(c[15]);
    if (!c[16].empty()) r.converged = c[16] == "true";
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace asl
