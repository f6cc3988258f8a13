#pragma once

// Matrix files and report serialization.
//
//   CSV:  n lines of n comma-separated numbers. Blank lines and lines starting
//         with '#' are skipped.
//   JSON: {"n": 3, "entries": [[...], ...], "kind": "similarity"|"distance"}
//         "kind" defaults to "similarity".
//
// Report numbers are rounded to 12 significant digits so that output does not
// depend on the last bits of floating-point summation order.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "maxdiv/core.hpp"
#include "maxdiv/maximizer.hpp"
#include "maxdiv/means.hpp"

namespace maxdiv::io {

enum class FileFormat { Csv, Json };
enum class MatrixKind { Similarity, Distance };

struct MatrixFile {
  std::vector<std::vector<double>> entries;
  MatrixKind kind = MatrixKind::Similarity;
};

inline FileFormat format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".json") return FileFormat::Json;
  if (ext == ".csv" || ext == ".txt") return FileFormat::Csv;
  detail::fail(ErrorCode::ParseError, "cannot infer format of '", path.string(),
               "'; pass --format csv|json");
}

inline double parse_number(const std::string& token, std::size_t line) {
  std::size_t start = token.find_first_not_of(" \t\r");
  std::size_t stop = token.find_last_not_of(" \t\r");
  if (start == std::string::npos) detail::fail(ErrorCode::ParseError, "empty field on line ", line);
  const std::string t = token.substr(start, stop - start + 1);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != t.size()) detail::fail(ErrorCode::ParseError, "bad number '", t, "' on line ", line);
  return v;
}

inline MatrixFile read_csv(std::istream& in) {
  MatrixFile f;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) row.push_back(parse_number(field, lineno));
    f.entries.push_back(std::move(row));
  }
  return f;
}

inline MatrixFile read_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    detail::fail(ErrorCode::ParseError, "invalid JSON: ", e.what());
  }
  if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array()) {
    detail::fail(ErrorCode::ParseError, "expected an object with an \"entries\" array");
  }
  MatrixFile f;
  for (const auto& row : j["entries"]) {
    if (!row.is_array()) detail::fail(ErrorCode::ParseError, "\"entries\" must hold arrays");
    std::vector<double> r;
    for (const auto& v : row) {
      if (!v.is_number()) detail::fail(ErrorCode::ParseError, "non-numeric matrix entry");
      r.push_back(v.get<double>());
    }
    f.entries.push_back(std::move(r));
  }
  if (j.contains("n")) {
    if (!j["n"].is_number_integer() || j["n"].get<long long>() < 0 ||
        static_cast<std::size_t>(j["n"].get<long long>()) != f.entries.size()) {
      detail::fail(ErrorCode::NonSquare, "\"n\" does not match the number of rows (",
                   f.entries.size(), ")");
    }
  }
  if (j.contains("kind")) {
    const auto kind = j["kind"].is_string() ? j["kind"].get<std::string>() : std::string{};
    if (kind == "distance") {
      f.kind = MatrixKind::Distance;
    } else if (kind != "similarity") {
      detail::fail(ErrorCode::ParseError, "unknown \"kind\"; expected similarity or distance");
    }
  }
  return f;
}

inline MatrixFile read_matrix(std::istream& in, FileFormat fmt) {
  return fmt == FileFormat::Json ? read_json(in) : read_csv(in);
}

inline MatrixFile read_matrix_file(const std::filesystem::path& path,
                                   std::optional<FileFormat> fmt = std::nullopt) {
  std::ifstream in(path);
  if (!in) detail::fail(ErrorCode::ParseError, "cannot open '", path.string(), "'");
  return read_matrix(in, fmt.value_or(format_from_path(path)));
}

/// Similarity matrix from a file; distance files are converted by exp(-d).
inline SimilarityMatrix load_similarity(const MatrixFile& f, double tol = kValidationTol) {
  return f.kind == MatrixKind::Distance ? from_distance_matrix(f.entries, tol)
                                        : validate_similarity(f.entries, tol);
}

/// %.12g, parsed back, so JSON prints the shortest form of that value.
inline double round12(double v) {
  if (!std::isfinite(v)) return v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;  // no negative zero
}

inline std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", round12(v));
  return buf;
}

inline void write_matrix(std::ostream& out, const SimilarityMatrix& z, FileFormat fmt) {
  if (fmt == FileFormat::Json) {
    nlohmann::ordered_json j;
    j["n"] = z.size();
    j["kind"] = "similarity";
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < z.size(); ++i) {
      auto r = nlohmann::ordered_json::array();
      for (double v : z.row(i)) r.push_back(v);
      rows.push_back(std::move(r));
    }
    j["entries"] = std::move(rows);
    out << j.dump() << '\n';
    return;
  }
  char buf[64];
  for (std::size_t i = 0; i < z.size(); ++i) {
    for (std::size_t j = 0; j < z.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", z(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

inline nlohmann::ordered_json order_json(OrderQ q) {
  if (q.is_infinite()) return "inf";
  return q.value();
}

inline nlohmann::ordered_json one_based(std::span<const std::size_t> idx) {
  auto a = nlohmann::ordered_json::array();
  for (auto i : idx) a.push_back(i + 1);
  return a;
}

inline nlohmann::ordered_json profile_json(std::span<const ProfilePoint> pts) {
  auto a = nlohmann::ordered_json::array();
  for (const auto& pt : pts) {
    nlohmann::ordered_json o;
    o["q"] = order_json(pt.q);
    o["diversity"] = round12(pt.diversity);
    o["entropy"] = pt.entropy ? nlohmann::ordered_json(round12(*pt.entropy)) : nlohmann::ordered_json(nullptr);
    a.push_back(std::move(o));
  }
  return a;
}

/// Maximum diversity and supremum entropy at each order.
inline std::vector<ProfilePoint> report_profile(const MaximizationReport& rep,
                                                std::span<const OrderQ> qs) {
  std::vector<ProfilePoint> pts;
  for (const auto& q : qs) {
    ProfilePoint pt{q, rep.dmax, std::nullopt};
    if (!q.is_infinite()) pt.entropy = entropy_from_diversity(rep.dmax, q);
    pts.push_back(pt);
  }
  return pts;
}

inline nlohmann::ordered_json report_json(const MaximizationReport& rep,
                                          std::span<const OrderQ> qs) {
  nlohmann::ordered_json j;
  j["dmax"] = round12(rep.dmax);
  auto dists = nlohmann::ordered_json::array();
  for (const auto& p : rep.maximizing_distributions) {
    auto a = nlohmann::ordered_json::array();
    for (double v : p.values()) a.push_back(round12(v));
    dists.push_back(std::move(a));
  }
  j["maximizing"] = std::move(dists);
  auto subsets = nlohmann::ordered_json::array();
  for (const auto& g : rep.maximal_subsets) subsets.push_back(one_based(g.mask.members()));
  j["subsets"] = std::move(subsets);
  j["method"] = to_string(rep.method);
  auto comps = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < rep.components.size(); ++c) {
    nlohmann::ordered_json o;
    o["members"] = one_based(rep.components[c]);
    o["method"] = to_string(rep.component_methods[c]);
    comps.push_back(std::move(o));
  }
  j["components"] = std::move(comps);
  j["profile"] = profile_json(report_profile(rep, qs));
  j["truncated"] = rep.truncated;
  return j;
}

}  // namespace maxdiv::io
