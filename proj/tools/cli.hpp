#pragma once

// maxdiv command-line driver. Kept in a header so the tests can call run()
// directly with string streams.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "maxdiv/maxdiv.hpp"
#include "maxdiv/oracle.hpp"

namespace maxdiv::cli {

enum class ExitCode : int { Ok = 0, VerifyMismatch = 1, Invalid = 2, TooLarge = 3 };

enum class OutputMode { Text, Json };

struct RunConfig {
  std::string command;  ///< check | convert | profile | magnitude | maximize | verify
  std::string input_path;
  std::optional<io::FileFormat> format;  ///< input format; by extension when absent
  std::vector<OrderQ> q_list = {OrderQ::finite(0.0), OrderQ::finite(1.0), OrderQ::finite(2.0),
                                OrderQ::infinity()};
  std::vector<double> p;  ///< profile distribution
  double tol = kValidationTol;
  bool all_solutions = false;
  bool no_fast_paths = false;
  unsigned jobs = 1;
  std::uint64_t seed = 1;
  int restarts = 50;
  OutputMode output = OutputMode::Text;
  std::string out_path;                      ///< convert target; stdout when empty
  std::optional<io::FileFormat> out_format;  ///< convert target format
};

/// "0,1,2,inf" -> orders. Throws ParseError.
inline std::vector<OrderQ> parse_q_list(const std::string& text) {
  std::vector<OrderQ> qs;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto a = tok.find_first_not_of(" \t");
    const auto b = tok.find_last_not_of(" \t");
    if (a == std::string::npos) detail::fail(ErrorCode::ParseError, "empty entry in q list");
    tok = tok.substr(a, b - a + 1);
    if (tok == "inf" || tok == "Inf" || tok == "infinity") {
      qs.push_back(OrderQ::infinity());
    } else {
      qs.push_back(OrderQ::finite(io::parse_number(tok, 0)));
    }
  }
  if (qs.empty()) detail::fail(ErrorCode::ParseError, "empty q list");
  return qs;
}

inline std::vector<double> parse_reals(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) v.push_back(io::parse_number(tok, 0));
  return v;
}

inline std::optional<io::FileFormat> parse_format(const std::string& s) {
  if (s.empty()) return std::nullopt;
  if (s == "csv") return io::FileFormat::Csv;
  if (s == "json") return io::FileFormat::Json;
  detail::fail(ErrorCode::ParseError, "unknown format '", s, "'");
}

/// Parses argv into `cfg`. Returns an exit code when the program should stop
/// (help requested or bad usage).
inline std::optional<int> parse_args(int argc, const char* const* argv, RunConfig& cfg,
                                     std::ostream& out, std::ostream& err) {
  CLI::App app{"Maximum diversity and similarity-sensitive diversity profiles"};
  app.name("maxdiv");
  std::string q_text = "0,1,2,inf", p_text, format, output = "text", to;
  app.add_option("command", cfg.command, "check|convert|profile|magnitude|maximize|verify")
      ->required()
      ->check(CLI::IsMember({"check", "convert", "profile", "magnitude", "maximize", "verify"}));
  app.add_option("input", cfg.input_path, "matrix file (.csv or .json)")->required();
  app.add_option("--format", format, "input format: csv|json (default: by extension)")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--q", q_text, "orders, comma separated; 'inf' for infinity");
  app.add_option("--p", p_text, "distribution for 'profile', comma separated");
  app.add_option("--tol", cfg.tol, "validation tolerance")->check(CLI::NonNegativeNumber);
  app.add_flag("--all-solutions", cfg.all_solutions, "list every maximizing distribution");
  app.add_flag("--no-fast-paths", cfg.no_fast_paths, "always enumerate subsets");
  app.add_option("--jobs", cfg.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "oracle seed for 'verify'");
  app.add_option("--restarts", cfg.restarts, "oracle restarts for 'verify'")
      ->check(CLI::PositiveNumber);
  app.add_option("--output", output, "text|json")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--out", cfg.out_path, "output file for 'convert'");
  app.add_option("--to", to, "output format for 'convert': csv|json")
      ->check(CLI::IsMember({"csv", "json"}));
  try {
    app.parse(argc, argv);
    cfg.format = parse_format(format);
    cfg.out_format = parse_format(to);
    cfg.q_list = parse_q_list(q_text);
    if (!p_text.empty()) cfg.p = parse_reals(p_text);
    cfg.output = output == "json" ? OutputMode::Json : OutputMode::Text;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return static_cast<int>(ExitCode::Ok);
  } catch (const CLI::ParseError& e) {
    err << "maxdiv: " << e.what() << "\n\n" << app.help();
    return static_cast<int>(ExitCode::Invalid);
  } catch (const Error& e) {
    err << "maxdiv: " << e.what() << "\n\n" << app.help();
    return static_cast<int>(ExitCode::Invalid);
  }
  return std::nullopt;
}

namespace detail_cli {

inline std::string vec_text(std::span<const double> v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + io::fmt12(v[i]);
  return s + ")";
}

inline std::string set_text(std::span<const std::size_t> idx) {
  std::string s = "{";
  for (std::size_t i = 0; i < idx.size(); ++i) s += (i ? "," : "") + std::to_string(idx[i] + 1);
  return s + "}";
}

inline nlohmann::ordered_json rounded(std::span<const double> v) {
  auto a = nlohmann::ordered_json::array();
  for (double x : v) a.push_back(io::round12(x));
  return a;
}

inline MaximizeOptions maximize_options(const RunConfig& cfg) {
  MaximizeOptions opt;
  opt.fast_paths = !cfg.no_fast_paths;
  opt.jobs = cfg.jobs;
  opt.entropy_orders = cfg.q_list;
  return opt;
}

inline int cmd_check(const RunConfig& cfg, const SimilarityMatrix& z, std::ostream& out) {
  const auto comps = connected_components(z);
  const auto w = solve_weighting(z);
  const bool pd = is_positive_definite(z);
  const bool ultra = is_ultrametric(z);
  const bool scattered = is_scattered(z);
  if (cfg.output == OutputMode::Json) {
    nlohmann::ordered_json j;
    j["n"] = z.size();
    j["valid"] = true;
    j["components"] = comps.size();
    j["positive_definite"] = pd;
    j["ultrametric"] = ultra;
    j["scattered"] = scattered;
    j["weighting"] = to_string(w.status);
    j["magnitude"] = w.magnitude ? nlohmann::ordered_json(io::round12(*w.magnitude)) : nlohmann::ordered_json(nullptr);
    out << j.dump() << '\n';
    return 0;
  }
  out << "valid similarity matrix, n = " << z.size() << '\n'
      << "components: " << comps.size() << '\n'
      << "positive definite: " << (pd ? "yes" : "no") << '\n'
      << "ultrametric: " << (ultra ? "yes" : "no") << '\n'
      << "scattered: " << (scattered ? "yes" : "no") << '\n'
      << "weighting: " << to_string(w.status) << '\n';
  if (w.magnitude) out << "magnitude: " << io::fmt12(*w.magnitude) << '\n';
  return 0;
}

inline int cmd_convert(const RunConfig& cfg, const io::MatrixFile& file, std::ostream& out) {
  const auto z = from_distance_matrix(file.entries, cfg.tol);
  io::FileFormat fmt = io::FileFormat::Csv;
  if (cfg.out_format) {
    fmt = *cfg.out_format;
  } else if (!cfg.out_path.empty()) {
    fmt = io::format_from_path(cfg.out_path);
  } else if (cfg.format) {
    fmt = *cfg.format;
  } else {
    fmt = io::format_from_path(cfg.input_path);
  }
  if (cfg.out_path.empty()) {
    io::write_matrix(out, z, fmt);
    return 0;
  }
  std::ofstream f(cfg.out_path);
  if (!f) maxdiv::detail::fail(ErrorCode::ParseError, "cannot write '", cfg.out_path, "'");
  io::write_matrix(f, z, fmt);
  return 0;
}

inline int cmd_profile(const RunConfig& cfg, const SimilarityMatrix& z, std::ostream& out) {
  if (cfg.p.empty()) maxdiv::detail::fail(ErrorCode::EmptyInput, "'profile' needs --p");
  const auto p = Distribution::from(cfg.p, cfg.tol);
  if (p.size() != z.size()) {
    maxdiv::detail::fail(ErrorCode::DimensionMismatch, "--p has ", p.size(),
                         " entries, matrix has ", z.size(), " rows");
  }
  const auto pts = diversity_profile(z, p, cfg.q_list);
  if (cfg.output == OutputMode::Json) {
    nlohmann::ordered_json j;
    j["p"] = rounded(p.values());
    j["invariant"] = is_invariant(z, p);
    j["profile"] = io::profile_json(pts);
    out << j.dump() << '\n';
    return 0;
  }
  out << "q\tdiversity\tentropy\n";
  for (const auto& pt : pts) {
    out << pt.q.to_string() << '\t' << io::fmt12(pt.diversity) << '\t'
        << (pt.entropy ? io::fmt12(*pt.entropy) : std::string("-")) << '\n';
  }
  return 0;
}

inline int cmd_magnitude(const RunConfig& cfg, const SimilarityMatrix& z, std::ostream& out) {
  const auto w = solve_weighting(z);
  if (cfg.output == OutputMode::Json) {
    nlohmann::ordered_json j;
    j["status"] = to_string(w.status);
    j["magnitude"] = w.magnitude ? nlohmann::ordered_json(io::round12(*w.magnitude)) : nlohmann::ordered_json(nullptr);
    j["weighting"] =
        w.representative ? rounded(*w.representative) : nlohmann::ordered_json(nullptr);
    j["nonnegative"] = w.nonneg;
    out << j.dump() << '\n';
    return 0;
  }
  out << "status: " << to_string(w.status) << '\n';
  if (w.magnitude) {
    out << "magnitude: " << io::fmt12(*w.magnitude) << '\n'
        << "weighting: " << vec_text(*w.representative) << '\n'
        << "non-negative: " << (w.nonneg ? "yes" : "no") << '\n';
  }
  return 0;
}

inline void print_report_text(const MaximizationReport& rep, bool all, std::ostream& out) {
  constexpr std::size_t kShown = 10;
  out << "dmax: " << io::fmt12(rep.dmax) << '\n' << "method: " << to_string(rep.method) << '\n';
  if (rep.components.size() > 1) {
    out << "components:\n";
    for (std::size_t c = 0; c < rep.components.size(); ++c) {
      out << "  " << set_text(rep.components[c]) << "  " << to_string(rep.component_methods[c])
          << '\n';
    }
  }
  out << "maximal subsets: " << rep.maximal_subsets.size() << '\n';
  for (std::size_t k = 0; k < rep.maximal_subsets.size() && (all || k < kShown); ++k) {
    out << "  " << set_text(rep.maximal_subsets[k].mask.members()) << '\n';
  }
  out << "maximizing distributions: " << rep.maximizing_distributions.size() << '\n';
  for (std::size_t k = 0; k < rep.maximizing_distributions.size() && (all || k < kShown); ++k) {
    out << "  " << vec_text(rep.maximizing_distributions[k].values()) << '\n';
  }
  if (!all && (rep.maximal_subsets.size() > kShown || rep.maximizing_distributions.size() > kShown)) {
    out << "(use --all-solutions to list everything)\n";
  }
  if (rep.truncated) out << "(list truncated)\n";
  if (!rep.sup_entropy.empty()) {
    out << "q\tmax diversity\tmax entropy\n";
    for (const auto& s : rep.sup_entropy) {
      out << s.q.to_string() << '\t' << io::fmt12(rep.dmax) << '\t' << io::fmt12(s.value) << '\n';
    }
  }
}

inline int cmd_maximize(const RunConfig& cfg, const SimilarityMatrix& z, std::ostream& out) {
  const auto rep = maximize(z, maximize_options(cfg));
  if (cfg.output == OutputMode::Json) {
    out << io::report_json(rep, cfg.q_list).dump() << '\n';
  } else {
    print_report_text(rep, cfg.all_solutions, out);
  }
  return 0;
}

inline bool is_graph_matrix(const SimilarityMatrix& z) {
  for (double v : z.data()) {
    if (v != 0.0 && v != 1.0) return false;
  }
  return true;
}

inline int cmd_verify(const RunConfig& cfg, const SimilarityMatrix& z, std::ostream& out) {
  constexpr double kD2Tol = 1e-5;
  const auto rep = maximize(z, maximize_options(cfg));
  ProjectedGradientOptions pg;
  pg.jobs = cfg.jobs;
  const auto d2 = oracle_max_d2(z, cfg.restarts, cfg.seed, pg);
  bool ok = std::abs(d2.value - rep.dmax) <= kD2Tol;

  nlohmann::ordered_json j;
  j["dmax"] = io::round12(rep.dmax);
  j["method"] = to_string(rep.method);
  j["oracle_d2"] = {{"value", io::round12(d2.value)},
                    {"restarts", d2.restarts},
                    {"converged", d2.converged},
                    {"agrees", std::abs(d2.value - rep.dmax) <= kD2Tol}};
  if (z.size() <= 4) {
    const auto d0 = oracle_max_d0_grid(z, 200);
    const bool agrees = d0.value <= rep.dmax + 1e-9;
    ok = ok && agrees;
    j["oracle_d0_grid"] = {{"value", io::round12(d0.value)}, {"resolution", 200},
                           {"within_dmax", agrees}};
  }
  if (is_graph_matrix(z) && z.size() <= 25) {
    const int alpha = independence_number(z);
    const bool agrees = std::abs(rep.dmax - alpha) <= 1e-9;
    ok = ok && agrees;
    j["independence_number"] = {{"value", alpha}, {"agrees", agrees}};
  }
  for (const auto& p : rep.maximizing_distributions) {
    for (const auto& q : cfg.q_list) ok = ok && std::abs(diversity(z, p, q) - rep.dmax) <= 1e-8;
  }
  j["ok"] = ok;

  if (cfg.output == OutputMode::Json) {
    out << j.dump() << '\n';
  } else {
    out << "dmax: " << io::fmt12(rep.dmax) << " (" << to_string(rep.method) << ")\n"
        << "D2 oracle: " << io::fmt12(d2.value) << " from " << d2.restarts << " restarts"
        << (d2.converged ? "" : " (not converged)") << '\n';
    if (j.contains("oracle_d0_grid")) {
      out << "D0 grid oracle: " << io::fmt12(j["oracle_d0_grid"]["value"].get<double>()) << '\n';
    }
    if (j.contains("independence_number")) {
      out << "independence number: " << j["independence_number"]["value"].get<int>() << '\n';
    }
    out << (ok ? "verified" : "MISMATCH") << '\n';
  }
  return ok ? 0 : static_cast<int>(ExitCode::VerifyMismatch);
}

}  // namespace detail_cli

/// Executes one command. Exit codes: 0 success, 1 verification mismatch,
/// 2 invalid input or usage, 3 component too large for enumeration.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  using namespace detail_cli;
  try {
    const auto file = io::read_matrix_file(cfg.input_path, cfg.format);
    if (cfg.command == "convert") return cmd_convert(cfg, file, out);
    const auto z = io::load_similarity(file, cfg.tol);
    if (cfg.command == "check") return cmd_check(cfg, z, out);
    if (cfg.command == "profile") return cmd_profile(cfg, z, out);
    if (cfg.command == "magnitude") return cmd_magnitude(cfg, z, out);
    if (cfg.command == "maximize") return cmd_maximize(cfg, z, out);
    if (cfg.command == "verify") return cmd_verify(cfg, z, out);
    err << "maxdiv: unknown command '" << cfg.command << "'\n";
    return static_cast<int>(ExitCode::Invalid);
  } catch (const Error& e) {
    err << "maxdiv: " << e.what() << '\n';
    return static_cast<int>(e.code() == ErrorCode::ComponentTooLarge ? ExitCode::TooLarge
                                                                      : ExitCode::Invalid);
  }
}

}  // namespace maxdiv::cli
