#pragma once

// Batch experiment runner behind the blaschke_lab executable.
//
//   interp        lower bounds for the interpolation constants over a grid
//   embed         lower bounds for the embedding constants over a grid
//   kernel-norms  reproducing-kernel norm sweeps
//   quotient      quotient norm of one function on one sequence
//   fit           log-log slope of two CSV columns
//   selftest      quick numerical sanity checks
//
// Exit codes: 0 success, 2 invalid input, 3 numerical non-convergence.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "blaschke/error.hpp"
#include "blaschke/extremal.hpp"
#include "blaschke/funcexpr.hpp"
#include "blaschke/modelspace.hpp"
#include "blaschke/norms.hpp"
#include "blaschke/quotient.hpp"

namespace blaschke::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitNumerical = 3;

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& text) {
  const std::string t = trim(text);
  if (t == "inf" || t == "infinity" || t == "Inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw DomainError("not a number: '" + text + "'");
  }
  if (used != t.size()) throw DomainError("not a number: '" + text + "'");
  return v;
}

inline std::vector<Complex> parse_coefficients(const std::string& text) {
  std::vector<Complex> out;
  for (const auto& part : split(text, ',')) out.emplace_back(parse_real(part), 0.0);
  if (out.empty()) throw DomainError("empty coefficient list");
  return out;
}

/// Function literals: "poly:c0,c1,...", "rational:NUM|DEN", "qn:n,r,N",
/// "kernel:re,im" (the Cauchy kernel 1 / (1 - conj(zeta) z)).
inline Expr parse_function(const std::string& literal) {
  const auto colon = literal.find(':');
  if (colon == std::string::npos) throw DomainError("function literal needs a 'kind:' prefix: '" + literal + "'");
  const std::string kind = literal.substr(0, colon);
  const std::string body = literal.substr(colon + 1);
  if (kind == "poly") return Expr::polynomial(parse_coefficients(body));
  if (kind == "rational") {
    const auto bar = body.find('|');
    if (bar == std::string::npos) throw DomainError("rational literal must be NUM|DEN");
    return Expr::rational(parse_coefficients(body.substr(0, bar)), parse_coefficients(body.substr(bar + 1)));
  }
  if (kind == "qn") {
    const auto parts = split(body, ',');
    if (parts.size() != 3) throw DomainError("qn literal must be qn:n,r,N");
    const double n = parse_real(parts[0]), r = parse_real(parts[1]), N = parse_real(parts[2]);
    if (n != std::floor(n) || N != std::floor(N)) throw DomainError("qn literal: n and N must be integers");
    return test_function(static_cast<int>(n), r, static_cast<int>(N)).expr;
  }
  if (kind == "kernel") {
    const auto parts = split(body, ',');
    if (parts.size() != 2) throw DomainError("kernel literal must be kernel:re,im");
    return Expr::cauchy_kernel(Complex(parse_real(parts[0]), parse_real(parts[1])));
  }
  throw DomainError("unknown function literal kind '" + kind + "'");
}

/// Writes via a temporary file in the same directory and renames it into place.
inline void write_atomically(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw DomainError("cannot open output file: " + tmp.string());
    f << content;
    f.flush();
    if (!f) throw DomainError("failed to write output file: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw DomainError("cannot move output into place: " + ec.message());
  }
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const {
    std::string s;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) s += ',';
        s += cells[i];
      }
      s += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return s;
  }

  std::string json() const {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      nlohmann::ordered_json obj;
      for (std::size_t i = 0; i < header.size(); ++i) obj[header[i]] = nlohmann::ordered_json::parse(r[i]);
      arr.push_back(obj);
    }
    return arr.dump(2) + '\n';
  }
};

struct RunConfig {
  std::string space = "hardy";
  double p = 2.0;
  double beta = 0.0;
  std::string q_text = "2";
  double gamma = 0.0;
  double alpha = 0.0;
  int l = 1;
  std::string target = "hq";
  std::vector<int> n_values{8, 16, 32, 64, 128};
  std::vector<double> r_values{0.5, 0.75, 0.9};
  std::string out;
  std::string format = "csv";
  unsigned jobs = 0;
  std::uint64_t seed = 0;
  std::string sigma_path;
  std::string function;
  std::string input;
  std::string x_col = "x";
  std::string y_col = "lower";
};

inline std::uint64_t default_seed() {
  if (const char* env = std::getenv("BLASCHKE_LAB_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw DomainError("BLASCHKE_LAB_SEED is not an unsigned integer");
    }
  }
  return 20190101ULL;
}

/// key=value lines; '#' starts a comment.
inline std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open config file: " + path);
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw DomainError("config line " + std::to_string(lineno) + ": expected key=value");
    kv.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return kv;
}

/// Appends "--key value" for every config key not given on the command line.
inline std::vector<std::string> merge_config(const std::vector<std::string>& args) {
  std::string path;
  std::set<std::string> given;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) continue;
    const auto eq = a.find('=');
    const std::string key = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    given.insert(key);
    if (key == "config") {
      if (eq != std::string::npos) path = a.substr(eq + 1);
      else if (i + 1 < args.size()) path = args[i + 1];
    }
  }
  if (path.empty()) return args;
  std::vector<std::string> merged = args;
  for (const auto& [key, value] : read_config(path)) {
    if (key == "config") throw DomainError("config files cannot include other config files");
    if (given.count(key)) continue;
    merged.push_back("--" + key);
    merged.push_back(value);
  }
  return merged;
}

inline SweepGrid grid_of(const RunConfig& cfg) {
  SweepGrid g;
  g.n_values = cfg.n_values;
  g.r_values = cfg.r_values;
  g.validate();
  return g;
}

inline void emit(const RunConfig& cfg, const Table& table, std::ostream& out) {
  const std::string content = cfg.format == "json" ? table.json() : table.csv();
  if (cfg.out.empty()) out << content;
  else write_atomically(cfg.out, content);
}

inline nlohmann::ordered_json fit_summary(const std::vector<double>& x, const std::vector<double>& y, double target) {
  nlohmann::ordered_json j;
  const ExponentFit fit = exponent_fit(x, y);
  j["slope"] = fit.slope;
  j["intercept"] = fit.intercept;
  j["max_residual"] = fit.max_residual;
  j["target_slope"] = target;
  j["points"] = x.size();
  return j;
}

inline int cmd_interp(const RunConfig& cfg, std::ostream& out) {
  Space space;
  if (cfg.space == "hardy") space = Space::hardy(cfg.p);
  else if (cfg.space == "bergman") space = Space::bergman(cfg.p, cfg.beta);
  else throw DomainError("--space must be hardy or bergman");
  space.validate();
  const SweepGrid grid = grid_of(cfg);
  const auto results = parallel_map(grid.points(), [&](const SweepGrid::Point& p) { return interp_lower(p.n, p.r, space); }, cfg.jobs);
  Table t{{"n", "r", "x", "lower", "fejer", "supnorm"}, {}};
  std::vector<double> xs, ys;
  for (const auto& r : results) {
    t.rows.push_back({std::to_string(r.n), format_double(r.r), format_double(r.x), format_double(r.lower),
                      format_double(r.fejer_lower), format_double(r.supnorm)});
    xs.push_back(r.x);
    ys.push_back(r.lower);
  }
  emit(cfg, t, out);
  nlohmann::ordered_json summary;
  summary["subcommand"] = "interp";
  summary["space"] = cfg.space;
  summary["p"] = cfg.p;
  if (space.kind == Space::Kind::Bergman) summary["beta"] = cfg.beta;
  summary["fit"] = fit_summary(xs, ys, space.exponent());
  if (!cfg.out.empty()) out << summary.dump() << '\n';
  return kExitOk;
}

inline int cmd_embed(const RunConfig& cfg, std::ostream& out) {
  Space::bergman(cfg.p, cfg.beta).validate();
  const SweepGrid grid = grid_of(cfg);
  const auto results = parallel_map(grid.points(), [&](const SweepGrid::Point& p) { return embed_lower(p.n, p.r, cfg.p, cfg.beta); }, cfg.jobs);
  Table t{{"n", "r", "x", "m", "N", "lower", "supnorm", "bergman"}, {}};
  std::vector<double> xs, ys;
  for (const auto& r : results) {
    t.rows.push_back({std::to_string(r.n), format_double(r.r), format_double(r.x), std::to_string(r.m), std::to_string(r.N),
                      format_double(r.lower), format_double(r.supnorm), format_double(r.bergman)});
    xs.push_back(r.x);
    ys.push_back(r.lower);
  }
  emit(cfg, t, out);
  nlohmann::ordered_json summary;
  summary["subcommand"] = "embed";
  summary["p"] = cfg.p;
  summary["beta"] = cfg.beta;
  summary["fit"] = fit_summary(xs, ys, (2.0 + cfg.beta) / cfg.p);
  if (!cfg.out.empty()) out << summary.dump() << '\n';
  return kExitOk;
}

inline KernelTarget kernel_target_of(const RunConfig& cfg) {
  KernelTarget t;
  static const std::map<std::string, KernelTarget::Kind> kinds{{"hq", KernelTarget::Kind::Hq},
                                                               {"daq", KernelTarget::Kind::dAq},
                                                               {"ddaq", KernelTarget::Kind::ddAq},
                                                               {"bloch", KernelTarget::Kind::Bloch},
                                                               {"higher-l", KernelTarget::Kind::HigherL}};
  std::string key = cfg.target;
  for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const auto it = kinds.find(key);
  if (it == kinds.end()) throw DomainError("--target must be one of hq, daq, ddaq, bloch, higher-l");
  t.kind = it->second;
  t.q = parse_real(cfg.q_text);
  t.gamma = cfg.gamma;
  t.alpha = cfg.alpha;
  t.l = cfg.l;
  t.validate();
  return t;
}

inline int cmd_kernel_norms(const RunConfig& cfg, std::ostream& out) {
  const KernelTarget target = kernel_target_of(cfg);
  const SweepGrid grid = grid_of(cfg);
  const auto rows = kernel_norm_scan(grid, target, cfg.jobs);
  Table t{{"n", "r", "x", "value"}, {}};
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.n), format_double(r.r), format_double(r.x), format_double(r.value)});
    xs.push_back(r.x);
    ys.push_back(r.value);
  }
  emit(cfg, t, out);
  nlohmann::ordered_json summary;
  summary["subcommand"] = "kernel-norms";
  summary["target"] = cfg.target;
  summary["fit"] = fit_summary(xs, ys, target.exponent());
  if (!cfg.out.empty()) out << summary.dump() << '\n';
  return kExitOk;
}

inline int cmd_quotient(const RunConfig& cfg, std::ostream& out) {
  if (cfg.sigma_path.empty()) throw DomainError("quotient needs --sigma");
  if (cfg.function.empty()) throw DomainError("quotient needs --f");
  const PointSequence sigma = read_sigma_file(cfg.sigma_path);
  const Expr f = parse_function(cfg.function);
  const double value = quotient_norm(f, sigma);
  if (cfg.format == "json") {
    nlohmann::ordered_json j;
    j["n"] = sigma.n();
    j["r"] = sigma.r();
    j["quotient_norm"] = value;
    out << j.dump() << '\n';
  } else {
    out << format_double(value) << '\n';
  }
  return kExitOk;
}

inline std::vector<std::vector<std::string>> read_csv(const std::string& path, std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open input file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DomainError("input CSV is empty");
  header = split(trim(line), ',');
  for (auto& h : header) h = trim(h);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split(trim(line), ',');
    if (cells.size() != header.size()) throw DomainError("input CSV row has the wrong number of fields");
    rows.push_back(std::move(cells));
  }
  return rows;
}

inline int cmd_fit(const RunConfig& cfg, std::ostream& out) {
  if (cfg.input.empty()) throw DomainError("fit needs --input");
  std::vector<std::string> header;
  const auto rows = read_csv(cfg.input, header);
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw DomainError("column '" + name + "' not found in " + cfg.input);
  };
  const std::size_t xi = column(cfg.x_col), yi = column(cfg.y_col);
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    xs.push_back(parse_real(r[xi]));
    ys.push_back(parse_real(r[yi]));
  }
  const ExponentFit fit = exponent_fit(xs, ys);
  nlohmann::ordered_json j;
  j["slope"] = fit.slope;
  j["intercept"] = fit.intercept;
  j["max_residual"] = fit.max_residual;
  out << j.dump() << '\n';
  return kExitOk;
}

inline int cmd_selftest(const RunConfig& cfg, std::ostream& out) {
  struct Check {
    std::string name;
    std::function<bool()> pass;
  };
  auto near = [](double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); };
  const std::vector<Check> checks{
      {"blaschke factor at zero", [&] { return near(std::abs(eval(Expr::blaschke_factor(0.0), 0.5) + 0.5), 0.0, 1e-15); }},
      {"taylor coefficients", [&] {
         const auto c = taylor_coefficients(Expr::blaschke_factor(0.5), 1);
         return std::abs(c[0] - 0.5) < 1e-12 && std::abs(c[1] + 0.75) < 1e-12;
       }},
      {"mw gram", [&] {
         const auto G = mw_gram(PointSequence({0.5, Complex(-0.3, 0.2), 0.7}));
         return (G - Eigen::MatrixXcd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10;
       }},
      {"quotient norm 1+z on (0,0)", [&] {
         return near(quotient_norm(Expr::polynomial({1.0, 1.0}), PointSequence({0.0, 0.0})), (1.0 + std::sqrt(5.0)) / 2.0, 1e-9);
       }},
      {"sup norm of Q_4 at r=0.5", [&] { return near(sup_norm(test_function(4, 0.5, 1).expr, 8.0).value, 48.0, 1e-8); }},
      {"H1 norm of Q_4 at r=0.5", [&] { return near(hardy_norm(test_function(4, 0.5, 1).expr, 1.0).value, 4.0, 1e-8); }},
      {"fejer bound of (1+z)^2", [&] { return near(fejer_lower_bound({1.0, 2.0, 1.0}, 2), 2.0, 1e-15); }},
      {"random contraction", [&] {
         const PointSequence s({0.5, -0.3, Complex(0.1, 0.6)});
         return operator_norm(random_contraction(s, cfg.seed)) <= 1.0 + 1e-12;
       }},
  };
  bool all = true;
  for (const auto& c : checks) {
    bool ok = false;
    try {
      ok = c.pass();
    } catch (const Error&) {
      ok = false;
    }
    all = all && ok;
    out << (ok ? "ok   " : "FAIL ") << c.name << '\n';
  }
  return all ? kExitOk : kExitNumerical;
}

/// Runs one command line (without the program name).
inline int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Blaschke product and model space experiment runner"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "key=value file mirroring the flags (flags win)");
  app.add_option("--jobs", cfg.jobs, "worker threads (default: available parallelism)");
  app.add_option("--seed", cfg.seed, "random seed (default: $BLASCHKE_LAB_SEED)");
  app.add_option("--out", cfg.out, "output path (written atomically); stdout when absent");
  app.add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--n", cfg.n_values, "comma-separated n values")->delimiter(',');
    sub->add_option("--r", cfg.r_values, "comma-separated r values")->delimiter(',');
  };

  CLI::App* interp = app.add_subcommand("interp", "interpolation-constant lower bounds over a grid");
  interp->add_option("--space", cfg.space, "hardy or bergman");
  interp->add_option("--p", cfg.p, "space exponent p");
  interp->add_option("--beta", cfg.beta, "Bergman weight beta");
  add_grid(interp);

  CLI::App* embed = app.add_subcommand("embed", "embedding-constant lower bounds over a grid");
  embed->add_option("--p", cfg.p, "Bergman exponent p");
  embed->add_option("--beta", cfg.beta, "Bergman weight beta");
  add_grid(embed);

  CLI::App* kernel = app.add_subcommand("kernel-norms", "reproducing-kernel norm sweep");
  kernel->add_option("--target", cfg.target, "hq, daq, ddaq, bloch or higher-l");
  kernel->add_option("--q", cfg.q_text, "norm exponent q (inf allowed for hq)");
  kernel->add_option("--gamma", cfg.gamma, "Bergman weight gamma");
  kernel->add_option("--alpha", cfg.alpha, "Bloch weight alpha");
  kernel->add_option("--l", cfg.l, "derivative order");
  add_grid(kernel);

  CLI::App* quotient = app.add_subcommand("quotient", "quotient norm of f on a sequence");
  quotient->add_option("--sigma", cfg.sigma_path, "sigma file: one 're im' pair per line");
  quotient->add_option("--f", cfg.function, "function literal (poly:, rational:, qn:, kernel:)");

  CLI::App* fit = app.add_subcommand("fit", "log-log slope of two CSV columns");
  fit->add_option("--input", cfg.input, "CSV file with a header row");
  fit->add_option("--x-col", cfg.x_col, "x column name");
  fit->add_option("--y-col", cfg.y_col, "y column name");

  app.add_subcommand("selftest", "quick numerical sanity checks");

  try {
    cfg.seed = default_seed();
    const std::vector<std::string> args = merge_config(args_in);
    std::vector<std::string> storage{"blaschke_lab"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());
    app.parse(static_cast<int>(argv.size()), argv.data());

    if (interp->parsed()) return cmd_interp(cfg, out);
    if (embed->parsed()) return cmd_embed(cfg, out);
    if (kernel->parsed()) return cmd_kernel_norms(cfg, out);
    if (quotient->parsed()) return cmd_quotient(cfg, out);
    if (fit->parsed()) return cmd_fit(cfg, out);
    return cmd_selftest(cfg, out);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ConvergenceError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace blaschke::cli
