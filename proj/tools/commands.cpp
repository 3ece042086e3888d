#include "commands.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "nsbf/config.hpp"
#include "nsbf/errors.hpp"
#include "nsbf/expr.hpp"
#include "nsbf/spectral.hpp"

#ifndef NSBF_DATA_DIR
#define NSBF_DATA_DIR "data"
#endif

namespace nsbf::cli {

namespace {

using nlohmann::json;

class VerificationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  bool json_out = false, csv_out = false;
  std::optional<std::size_t> grid_n;
  std::optional<int> coeff_N;
  std::string output;
};

class Stopwatch {
 public:
  explicit Stopwatch(std::ostream& err) : err_(err) {}
  void stage(const std::string& what) {
    const auto now = std::chrono::steady_clock::now();
    char buf[64];
    std::snprintf(buf, sizeof buf, " (%.3f s)", std::chrono::duration<double>(now - last_).count());
    err_ << "nsbf: " << what << buf << "\n";
    last_ = now;
  }

 private:
  std::ostream& err_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

struct Pipeline {
  GridPtr grid;
  std::shared_ptr<const CoefficientSet> cs;
  NSelection selection;
  SpectralProblem problem;
  std::vector<std::string> warnings;
};

void apply_overrides(ProblemConfig& cfg, const Options& o) {
  if (o.grid_n) cfg.grid_n = *o.grid_n;
  if (o.coeff_N) {
    if (*o.coeff_N < 1) throw ConfigError("--coeff-N must be positive");
    cfg.N = *o.coeff_N;
  }
  if (o.json_out) cfg.format = "json";
  if (o.csv_out) cfg.format = "csv";
  if (!o.output.empty()) cfg.output = o.output;
}

Pipeline build(const ProblemConfig& cfg, Stopwatch& sw) {
  Pipeline p;
  p.grid = Grid::make(cfg.grid_kind, cfg.b, cfg.grid_n);
  const SampledFunction q = potential_samples(cfg, p.grid, p.warnings);
  ParticularSolution ps = cfg.particular_solution.empty()
                              ? particular_solution(q)
                              : particular_solution_from(sample(Expr::parse(cfg.particular_solution), p.grid));
  sw.stage("particular solution on " + std::to_string(cfg.grid_n) + " nodes");
  p.cs = std::make_shared<const CoefficientSet>(coefficients_recurrent(ps, q, cfg.N));
  sw.stage("coefficients up to N = " + std::to_string(cfg.N));
  p.selection = select_N(*p.cs);
  p.warnings.insert(p.warnings.end(), p.selection.warnings.begin(), p.selection.warnings.end());
  sw.stage("selected N = " + std::to_string(p.selection.N_star));
  p.problem = {std::make_shared<const NsbfSolver>(p.cs, p.selection.N_star), boundary_condition(cfg)};
  return p;
}

Spectrum search(const ProblemConfig& cfg, const Pipeline& p, Stopwatch& sw) {
  Spectrum s = cfg.mode == SearchMode::real ? find_real_spectrum(p.problem, cfg.real)
                                            : find_complex_spectrum(p.problem, cfg.rectangle, cfg.max_zeros);
  sw.stage(std::to_string(s.entries.size()) + " eigenvalues");
  return s;
}

void emit(const std::string& text, const std::filesystem::path& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << text;
}

void report_warnings(const std::vector<std::string>& w, std::ostream& err) {
  for (const auto& s : w) err << "nsbf: warning: " << s << "\n";
}

cplx parse_omega(const std::string& text) {
  const Expr e = Expr::parse(text, "w");
  if (!e.is_constant()) throw ConfigError("--omega values must be constants: " + text);
  return e.evaluate();
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- commands ---------------------------------------------------------------------

int cmd_solve(const std::string& path, const Options& o, std::ostream& out, std::ostream& err) {
  Stopwatch sw(err);
  ProblemConfig cfg = load_config(path);
  apply_overrides(cfg, o);
  const Pipeline p = build(cfg, sw);
  Spectrum s = search(cfg, p, sw);
  std::vector<std::string> warnings = p.warnings;
  warnings.insert(warnings.end(), s.warnings.begin(), s.warnings.end());
  report_warnings(warnings, err);
  if (cfg.format == "csv") {
    std::ostringstream os;
    write_spectrum_csv(os, s);
    emit(os.str(), cfg.output, out);
  } else {
    json doc = {{"N", cfg.N},
                {"N_star", p.selection.N_star},
                {"stabilized", p.selection.stabilized},
                {"eigenvalues", spectrum_json(s)},
                {"warnings", warnings}};
    emit(doc.dump(2) + "\n", cfg.output, out);
  }
  return kOk;
}

int cmd_check(const std::string& path, const Options& o, std::ostream& out, std::ostream& err) {
  Stopwatch sw(err);
  ProblemConfig cfg = load_config(path);
  apply_overrides(cfg, o);
  cfg.output = o.output;  // the residual table goes to stdout unless -o is given
  const Pipeline p = build(cfg, sw);
  report_warnings(p.warnings, err);
  if (o.json_out) {
    json rows = json::array();
    for (const auto& r : p.selection.table)
      rows.push_back({{"N", r.N}, {"eps1", r.eps1}, {"eps2", r.eps2}, {"d1", r.d1}, {"d2", r.d2}});
    json doc = {{"N_star", p.selection.N_star}, {"stabilized", p.selection.stabilized}, {"rows", rows}};
    emit(doc.dump(2) + "\n", cfg.output, out);
  } else {
    std::ostringstream os;
    write_residual_csv(os, p.selection.table);
    emit(os.str(), cfg.output, out);
  }
  return kOk;
}

int cmd_evaluate(const std::string& path, const std::vector<std::string>& omegas, const std::vector<double>& xs,
                 const Options& o, std::ostream& out, std::ostream& err) {
  Stopwatch sw(err);
  ProblemConfig cfg = load_config(path);
  apply_overrides(cfg, o);
  cfg.output = o.output;
  const Pipeline p = build(cfg, sw);
  report_warnings(p.warnings, err);
  const auto& solver = *p.problem.solver;
  static const char* names[] = {"c", "s", "c_prime", "s_prime", "dc_domega", "ds_domega"};
  json rows = json::array();
  std::ostringstream csv;
  csv << "omega_re,omega_im,x";
  for (const char* n : names) csv << "," << n << "_re," << n << "_im";
  csv << "\n";
  for (const auto& ot : omegas) {
    const cplx w = parse_omega(ot);
    for (double x : xs) {
      const auto v = solver.eval_basis(w, x);
      const auto d = solver.eval_omega_derivatives(w, x);
      const cplx vals[] = {v.c, v.s, v.c_prime, v.s_prime, d.dc_domega, d.ds_domega};
      json row = {{"omega_re", w.real()}, {"omega_im", w.imag()}, {"x", x}};
      csv << fmt17(w.real()) << "," << fmt17(w.imag()) << "," << fmt17(x);
      for (int k = 0; k < 6; ++k) {
        row[std::string(names[k]) + "_re"] = vals[k].real();
        row[std::string(names[k]) + "_im"] = vals[k].imag();
        csv << "," << fmt17(vals[k].real()) << "," << fmt17(vals[k].imag());
      }
      csv << "\n";
      rows.push_back(std::move(row));
    }
  }
  sw.stage("evaluated " + std::to_string(omegas.size() * xs.size()) + " points");
  emit(o.json_out ? rows.dump(2) + "\n" : csv.str(), cfg.output, out);
  return kOk;
}

json load_benchmarks(const std::filesystem::path& dir) {
  const auto path = dir / "benchmarks.json";
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

int cmd_benchmark(const std::string& name, bool list, const std::string& data_dir, const Options& o,
                  std::ostream& out, std::ostream& err) {
  const json all = load_benchmarks(data_dir);
  const auto& table = all.at("benchmarks");
  if (list) {
    for (const auto& [k, v] : table.items()) out << k << "  " << v.value("description", "") << "\n";
    return kOk;
  }
  if (!table.contains(name)) throw ConfigError("unknown benchmark '" + name + "'");
  const auto& bench = table[name];
  ProblemConfig cfg = config_from_json(bench.at("config"));
  apply_overrides(cfg, o);
  Stopwatch sw(err);
  const Pipeline p = build(cfg, sw);
  const Spectrum s = search(cfg, p, sw);
  report_warnings(p.warnings, err);
  report_warnings(s.warnings, err);

  json report = json::array();
  int failed = 0;
  std::ostringstream text;
  char line[256];
  std::snprintf(line, sizeof line, "%-6s %-44s %-44s %-10s %-10s %-9s %s\n", "index", "computed", "reference", "error",
                "tolerance", "source", "result");
  text << line;
  for (const auto& ref : bench.at("references")) {
    const int idx = ref.at("index");
    const cplx want(ref.at("lambda_re").get<double>(), ref.value("lambda_im", 0.0));
    const double tol = ref.at("tolerance");
    const bool relative = ref.value("tolerance_kind", "absolute") == "relative";
    const bool found = idx >= 0 && idx < static_cast<int>(s.entries.size());
    const cplx got = found ? s.entries[idx].lambda : cplx(NAN, NAN);
    const double e = std::abs(got - want) / (relative ? std::abs(want) : 1.0);
    const bool ok = found && e <= tol;
    failed += !ok;
    std::snprintf(line, sizeof line, "%-6d %-44s %-44s %-10.2e %-10.1e %-9s %s\n", idx,
                  (fmt17(got.real()) + (got.imag() < 0 ? "" : "+") + fmt17(got.imag()) + "i").c_str(),
                  (fmt17(want.real()) + (want.imag() < 0 ? "" : "+") + fmt17(want.imag()) + "i").c_str(), e, tol,
                  ref.value("source", "").c_str(), ok ? "PASS" : "FAIL");
    text << line;
    report.push_back({{"index", idx},
                      {"lambda_re", got.real()},
                      {"lambda_im", got.imag()},
                      {"reference_re", want.real()},
                      {"reference_im", want.imag()},
                      {"error", e},
                      {"tolerance", tol},
                      {"relative", relative},
                      {"source", ref.value("source", "")},
                      {"pass", ok}});
  }
  if (bench.contains("n_star_range")) {
    const int lo = bench["n_star_range"][0], hi = bench["n_star_range"][1];
    const bool ok = p.selection.N_star >= lo && p.selection.N_star <= hi;
    failed += !ok;
    std::snprintf(line, sizeof line, "selected N = %d, expected in [%d, %d]: %s\n", p.selection.N_star, lo, hi,
                  ok ? "PASS" : "FAIL");
    text << line;
  }
  const std::size_t checks = bench.at("references").size() + (bench.contains("n_star_range") ? 1 : 0);
  std::snprintf(line, sizeof line, "benchmark %s: %s (%zu/%zu checks passed, N = %d)\n", name.c_str(),
                failed ? "FAIL" : "PASS", checks - failed, checks, p.selection.N_star);
  text << line;
  if (o.json_out)
    emit(json{{"benchmark", name}, {"N_star", p.selection.N_star}, {"pass", failed == 0}, {"checks", report}}.dump(2) +
             "\n",
         o.output, out);
  else
    emit(text.str(), o.output, out);
  if (failed) throw VerificationFailure("benchmark " + name + " failed " + std::to_string(failed) + " check(s)");
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sturm-Liouville problems via Neumann series of Bessel functions", "nsbf"};
  app.require_subcommand(1);
  Options o;
  auto* json_flag = app.add_flag("--json", o.json_out, "JSON output");
  app.add_flag("--csv", o.csv_out, "CSV output")->excludes(json_flag);
  app.add_option("--grid-n", o.grid_n, "override grid.n");
  app.add_option("--coeff-N", o.coeff_N, "override coefficients.N");
  app.add_option("-o,--output", o.output, "write results to this file");

  std::string config, name, data_dir = NSBF_DATA_DIR;
  std::vector<std::string> omegas;
  std::vector<double> xs;
  bool list = false;

  auto* solve = app.add_subcommand("solve", "compute eigenvalues");
  solve->add_option("config", config, "problem file (.toml or .json)")->required();
  auto* check = app.add_subcommand("check", "residual table N,eps1,eps2,d1,d2 at x = b");
  check->add_option("config", config, "problem file")->required();
  auto* evaluate = app.add_subcommand("evaluate", "c, s and derivatives at given omega and x");
  evaluate->add_option("config", config, "problem file")->required();
  evaluate->add_option("--omega", omegas, "spectral parameter values (comma separated, e.g. 1,2.5,3+1i)")
      ->required()
      ->delimiter(',');
  evaluate->add_option("--x", xs, "grid nodes")->required()->delimiter(',');
  auto* bench = app.add_subcommand("benchmark", "run a stored benchmark and compare with reference values");
  bench->add_option("name", name, "paine1, paine2, gelfand_levitan, sech_well or complex_x2");
  bench->add_flag("--list", list, "list the available benchmarks");
  bench->add_option("--data-dir", data_dir, "directory holding benchmarks.json");

  try {
    std::vector<std::string> args;
    for (int k = argc - 1; k > 0; --k) args.emplace_back(argv[k]);
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (solve->parsed()) return cmd_solve(config, o, out, err);
    if (check->parsed()) return cmd_check(config, o, out, err);
    if (evaluate->parsed()) return cmd_evaluate(config, omegas, xs, o, out, err);
    if (bench->parsed()) {
      if (!list && name.empty()) throw ConfigError("benchmark needs a name (or --list)");
      return cmd_benchmark(name, list, data_dir, o, out, err);
    }
  } catch (const VerificationFailure& e) {
    err << "nsbf: " << e.what() << "\n";
    return kVerificationFailure;
  } catch (const ConfigError& e) {
    err << "nsbf: configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericalError& e) {
    err << "nsbf: numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const json::exception& e) {
    err << "nsbf: configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "nsbf: numerical failure: " << e.what() << "\n";
    return kNumericalError;
  }
  return kConfigError;
}

}  // namespace nsbf::cli
