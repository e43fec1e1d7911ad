#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "gifs/ledger.hpp"
#include "gifs/measure.hpp"
#include "gifs/point_set.hpp"

namespace gifs::io {

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view text, const std::string& where) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
    throw std::invalid_argument(where + ": '" + std::string(text) + "' is not a number");
  return v;
}

/// Rows of comma-separated numbers. Blank lines are skipped; every row must
/// have the same number of fields.
inline std::vector<std::vector<double>> parse_numeric_rows(std::string_view text, const std::string& what) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    std::vector<double> row;
    const std::string where = what + " line " + std::to_string(line_no);
    while (true) {
      const auto comma = line.find(',');
      row.push_back(parse_double(line.substr(0, comma), where));
      if (comma == std::string_view::npos) break;
      line = line.substr(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::invalid_argument(where + ": expected " + std::to_string(rows.front().size()) + " fields, got " +
                                  std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument(what + ": no rows");
  return rows;
}

/// One point per row, d columns, no header.
inline std::string pointset_to_csv(const PointSet& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto p = s[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (k) out += ',';
      out += format_double(p[k]);
    }
    out += '\n';
  }
  return out;
}

inline PointSet pointset_from_csv(std::string_view text) {
  const auto rows = parse_numeric_rows(text, "point set");
  const std::size_t d = rows.front().size();
  std::vector<double> coords;
  coords.reserve(rows.size() * d);
  for (const auto& r : rows) coords.insert(coords.end(), r.begin(), r.end());
  return PointSet(d, std::move(coords));
}

/// d coordinate columns followed by the weight.
inline std::string measure_to_csv(const DiscreteMeasure& mu) {
  std::string out;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (double x : mu.atom(i)) out += format_double(x) + ',';
    out += format_double(mu.weight(i));
    out += '\n';
  }
  return out;
}

inline DiscreteMeasure measure_from_csv(std::string_view text) {
  const auto rows = parse_numeric_rows(text, "measure");
  if (rows.front().size() < 2) throw std::invalid_argument("measure: need at least one coordinate and a weight");
  const std::size_t d = rows.front().size() - 1;
  std::vector<double> coords, weights;
  for (const auto& r : rows) {
    coords.insert(coords.end(), r.begin(), r.end() - 1);
    weights.push_back(r.back());
  }
  return DiscreteMeasure(d, std::move(coords), std::move(weights));
}

/// Header row then k, beta, sigma, eps, bound for every recorded step.
inline std::string ledger_to_csv(const OstrowskiLedger& ledger) {
  std::string out = "k,beta,sigma,eps,bound\n";
  for (std::size_t k = 1; k <= ledger.steps(); ++k) {
    out += std::to_string(k) + ',' + format_double(ledger.beta()[k - 1]) + ',' + format_double(ledger.sigma()[k - 1]) +
           ',' + format_double(ledger.eps()[k - 1]) + ',' + format_double(ledger.bounds()[k - 1]) + '\n';
  }
  return out;
}

struct LedgerRow {
  std::size_t k = 0;
  double beta = 0.0;
  double sigma = 0.0;
  double eps = 0.0;
  double bound = 0.0;
};

inline std::vector<LedgerRow> ledger_from_csv(std::string_view text) {
  const auto eol = text.find('\n');
  if (text.substr(0, eol) != "k,beta,sigma,eps,bound") throw std::invalid_argument("ledger: missing header row");
  std::vector<LedgerRow> rows;
  for (const auto& r : parse_numeric_rows(text.substr(eol + 1), "ledger")) {
    if (r.size() != 5) throw std::invalid_argument("ledger: expected 5 columns");
    rows.push_back({static_cast<std::size_t>(r[0]), r[1], r[2], r[3], r[4]});
  }
  return rows;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// Writes to a sibling temporary file and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace gifs::io
