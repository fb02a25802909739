// Copyright 2026 The dqls Authors
// SPDX-License-Identifier: Apache-2.0
//
// dqls: generate instances, run solves, sweeps and the GPE cost comparison.
// Exit status 0 on success, 1 when a run's own check fails, 2 on bad input.

#include "dqls/dqls.hpp"
#include "dqls/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

using namespace dqls;

namespace {

constexpr int kOk = 0;
constexpr int kAssertion = 1;
constexpr int kInput = 2;

struct Options {
  std::string instance, l_file, csv, json_out, spectrum, mode = "spectral", reg = "none", param = "delta", grid;
  std::uint64_t seed = 1;
  Eigen::Index m = 8, n = 4;
  std::size_t r = 2;
  double gamma = 1.0, eps = 1e-2, delta = 0.0, lambda = 0.0, phi = 0.25, margin = 0.9;
  std::size_t jobs = 1;
};

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw InputError(std::string(what) + ": cannot parse '" + tok + "'");
    }
  }
  return out;
}

// --spectrum is either "lo:hi" (log-uniform) or an explicit comma list.
GenSpec gen_spec(const Options& o) {
  GenSpec g;
  g.seed = o.seed;
  g.m = o.m;
  g.n = o.n;
  g.r = o.r;
  g.gamma = o.gamma;
  g.delta_margin = o.margin;
  if (!o.spectrum.empty()) {
    const auto colon = o.spectrum.find(':');
    if (colon != std::string::npos) {
      const auto lo = parse_list(o.spectrum.substr(0, colon), "--spectrum");
      const auto hi = parse_list(o.spectrum.substr(colon + 1), "--spectrum");
      if (lo.size() != 1 || hi.size() != 1 || !(lo[0] > 0 && lo[0] <= hi[0]))
        throw InputError("--spectrum: expected lo:hi with 0 < lo <= hi");
      g.sigma_lo = lo[0];
      g.sigma_hi = hi[0];
    } else {
      g.spectrum = parse_list(o.spectrum, "--spectrum");
      std::sort(g.spectrum.rbegin(), g.spectrum.rend());
      if (static_cast<Eigen::Index>(g.spectrum.size()) != g.n)
        throw InputError("--spectrum: need exactly n singular values");
      if (g.spectrum.back() <= 0) throw InputError("--spectrum: singular values must be positive");
    }
  }
  return g;
}

ApplyMode parse_mode(const std::string& s) { return s == "circuit" ? ApplyMode::circuit : ApplyMode::spectral; }

// Instance from --instance or from the generator flags, with optional overrides.
InstanceFile resolve_instance(const Options& o) {
  InstanceFile f;
  if (!o.instance.empty()) {
    f = load_instance(o.instance);
  } else {
    f.instance = gen_instance(gen_spec(o));
    f.seed = o.seed;
  }
  if (o.delta > 0) f.instance = build_instance(f.instance.parties, o.delta);
  if (!o.l_file.empty()) {
    const auto j = read_json_file(o.l_file);
    PenaltySpec p;
    p.L = detail::parse_matrix(j.contains("L") ? j["L"] : j, o.l_file);
    p.lambda = f.penalty ? f.penalty->lambda : 1.0;
    f.penalty = p;
  }
  if (o.lambda > 0) {
    if (!f.penalty) f.penalty = PenaltySpec{o.lambda, RMat::Identity(f.instance.n(), f.instance.n())};
    f.penalty->lambda = o.lambda;
  }
  return f;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text << "\n";
  else
    write_text(path, text + "\n");
}

// Appends rows, writing the header first when the file is new or empty.
void append_csv(const std::string& path, const std::vector<std::string>& rows, const std::string& header) {
  if (path.empty()) return;
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw InputError("cannot write " + path);
  if (fresh) out << header << "\n";
  for (auto& r : rows) out << r << "\n";
}

std::string run_id(const std::string& cmd, const Options& o, std::size_t idx) {
  std::ostringstream os;
  os << cmd << "-s" << o.seed << "-" << idx;
  return os.str();
}

RegressionResult solve_with(const InstanceFile& f, const Options& o) {
  const auto mode = parse_mode(o.mode);
  if (o.reg == "none") return solve_ols(f.instance, o.eps, mode);
  if (!f.penalty) throw InputError("--reg " + o.reg + " needs --lambda or a penalty in the instance file");
  if (o.reg == "ridge") return solve_ridge(f.instance, f.penalty->lambda, o.eps, mode);
  return solve_l2(f.instance, *f.penalty, o.eps, mode);
}

int cmd_gen(const Options& o) {
  const auto g = gen_spec(o);
  auto inst = gen_instance(g);
  if (o.delta > 0) inst = build_instance(inst.parties, o.delta);
  std::optional<PenaltySpec> pen;
  if (o.lambda > 0) pen = PenaltySpec{o.lambda, RMat::Identity(inst.n(), inst.n())};
  emit(o.json_out, instance_json(inst, pen, g.seed).dump(2));
  return kOk;
}

int cmd_solve(const Options& o) {
  const auto f = resolve_instance(o);
  const auto res = solve_with(f, o);
  auto j = result_json(res);
  j["seed"] = f.seed ? json(*f.seed) : json(nullptr);
  j["m"] = f.instance.m();
  j["n"] = f.instance.n();
  j["r"] = f.instance.r();
  j["delta"] = f.instance.delta;
  emit(o.json_out, j.dump(2));
  append_csv(o.csv, {csv_row({run_id("solve", o, 0), f.instance.r(), f.instance.m(), f.instance.n(), f.instance.delta, res})},
             csv_header());
  if (!res.feasible) {
    std::cerr << "dqls: solve infeasible";
    for (auto& w : res.warnings) std::cerr << "; " << w;
    std::cerr << "\n";
    return kAssertion;
  }
  return kOk;
}

json fit_json(const PolyFit& f) {
  return {{"coef", f.coef}, {"std_errors", f.std_errors}, {"r2", f.r2}};
}

int cmd_sweep(const Options& o) {
  if (o.grid.empty()) throw InputError("sweep: --grid is required");
  const auto grid = parse_list(o.grid, "--grid");
  if (grid.size() < 3) throw InputError("sweep: grid needs at least 3 points");
  if (o.reg != "none") throw InputError("sweep: only --reg none is supported");
  const auto mode = parse_mode(o.mode);
  SweepSummary s;
  if (o.param == "delta") {
    s = sweep_delta(gen_spec(o), grid, o.eps, mode, o.jobs);
  } else if (o.param == "eps") {
    s = sweep_eps(resolve_instance(o).instance, grid, mode, o.jobs);
  } else {
    s = sweep_r(gen_spec(o), grid, o.eps, mode, o.jobs);
  }
  std::vector<std::string> rows;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const auto& p = s.points[i];
    rows.push_back(csv_row({run_id(std::string("sweep-") + to_string(s.param), o, i), p.instance.r(), p.instance.m(),
                            p.instance.n(), p.instance.delta, p.result}));
  }
  append_csv(o.csv, rows, csv_header());
  json j;
  j["param"] = to_string(s.param);
  j["seed"] = o.instance.empty() ? json(o.seed) : json(nullptr);
  j["grid"] = grid;
  j["regressor"] = s.param == SweepParam::delta ? "log(1/delta)" : s.param == SweepParam::eps ? "ln(1/eps)" : "r";
  j["response"] = s.param == SweepParam::delta ? "log(qubits_total)" : "qubits_total";
  j["slope"] = s.fit.slope();
  j["intercept"] = s.fit.intercept();
  j["r2"] = s.fit.r2;
  j["fit"] = fit_json(s.fit);
  if (!s.alpha_base.empty()) j["alpha_base"] = s.alpha_base;
  emit(o.json_out, j.dump(2));
  return kOk;
}

int cmd_compare(const Options& o) {
  const auto grid = o.grid.empty() ? std::vector<double>{1e-1, 1e-2, 1e-3, 1e-4, 1e-5} : parse_list(o.grid, "--grid");
  if (grid.size() < 5) throw InputError("compare-gpe: eps grid needs at least 5 points");
  const auto f = resolve_instance(o);
  const auto c = compare_gpe(f.instance, o.phi, grid);
  if (!o.csv.empty()) {
    std::vector<std::string> rows;
    for (auto& r : c.rows) {
      std::ostringstream os;
      os << std::setprecision(12) << r.eps << ',' << c.phi << ',' << r.new_qubits << ',' << r.cks_qubits << ','
         << r.cks_repetitions;
      rows.push_back(os.str());
    }
    append_csv(o.csv, rows, "eps,phi,new_qubits,cks_qubits,cks_repetitions");
  }
  json j;
  j["phi"] = c.phi;
  j["seed"] = f.seed ? json(*f.seed) : json(nullptr);
  j["new_gpe"] = {{"form", new_gpe_form()}, {"affine", fit_json(c.new_affine)}, {"quadratic", fit_json(c.new_quadratic)}};
  j["cks_gpe"] = {{"form", cks_gpe_form()}, {"affine", fit_json(c.cks_affine)}, {"quadratic", fit_json(c.cks_quadratic)}};
  j["new_is_affine"] = c.new_is_affine();
  j["cks_is_quadratic"] = c.cks_is_quadratic();
  emit(o.json_out, j.dump(2));
  if (!c.new_is_affine() || !c.cks_is_quadratic()) {
    std::cerr << "dqls: compare-gpe shape check failed\n";
    return kAssertion;
  }
  return kOk;
}

void add_generator_flags(CLI::App* c, Options& o) {
  c->add_option("--seed", o.seed, "generator seed");
  c->add_option("--m", o.m, "rows")->check(CLI::PositiveNumber);
  c->add_option("--n", o.n, "columns")->check(CLI::PositiveNumber);
  c->add_option("--r", o.r, "parties")->check(CLI::PositiveNumber);
  c->add_option("--spectrum", o.spectrum, "lo:hi for log-uniform, or comma-separated singular values");
  c->add_option("--gamma", o.gamma, "target column-space overlap")->check(CLI::Range(0.0, 1.0));
  c->add_option("--delta", o.delta, "override the truncation threshold")->check(CLI::NonNegativeNumber);
  c->add_option("--lambda", o.lambda, "penalty weight")->check(CLI::NonNegativeNumber);
}

void add_run_flags(CLI::App* c, Options& o) {
  c->add_option("--instance", o.instance, "instance JSON file");
  c->add_option("--eps", o.eps, "target error")->check(CLI::Range(1e-12, 0.5));
  c->add_option("--mode", o.mode, "spectral or circuit")->check(CLI::IsMember({"spectral", "circuit"}));
  c->add_option("--reg", o.reg, "none, ridge or l2")->check(CLI::IsMember({"none", "ridge", "l2"}));
  c->add_option("--L-file", o.l_file, "JSON file holding the penalty matrix");
  c->add_option("--csv", o.csv, "append result rows to this CSV");
  c->add_option("--jobs", o.jobs, "parallel sweep points")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed quantum least-squares simulator"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen", "generate a seeded instance file");
  add_generator_flags(gen, o);
  gen->add_option("--json", o.json_out, "output path (default stdout)");

  auto* solve = app.add_subcommand("solve", "solve one instance");
  add_generator_flags(solve, o);
  add_run_flags(solve, o);
  solve->add_option("--json", o.json_out, "report path (default stdout)");

  auto* sweep = app.add_subcommand("sweep", "cost sweep over delta, eps or r");
  add_generator_flags(sweep, o);
  add_run_flags(sweep, o);
  sweep->add_option("--param", o.param, "delta, eps or r")->check(CLI::IsMember({"delta", "eps", "r"}));
  sweep->add_option("--grid", o.grid, "comma-separated grid values");
  sweep->add_option("--json", o.json_out, "fit summary path (default stdout)");

  auto* cmp = app.add_subcommand("compare-gpe", "GPE cost against the CKS baseline");
  add_generator_flags(cmp, o);
  add_run_flags(cmp, o);
  cmp->add_option("--phi", o.phi, "gap parameter")->check(CLI::Range(1e-3, 0.5));
  cmp->add_option("--grid", o.grid, "comma-separated eps grid (at least 5 points)");
  cmp->add_option("--json", o.json_out, "fit summary path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInput;
  }

  try {
    if (*gen) return cmd_gen(o);
    if (*solve) return cmd_solve(o);
    if (*sweep) return cmd_sweep(o);
    return cmd_compare(o);
  } catch (const InputError& e) {
    std::cerr << "dqls: " << e.what() << "\n";
    return kInput;
  } catch (const FitError& e) {
    std::cerr << "dqls: " << e.what() << "\n";
    return kInput;
  } catch (const ShapeError& e) {
    std::cerr << "dqls: " << e.what() << "\n";
    return kInput;
  } catch (const PreconditionError& e) {
    std::cerr << "dqls: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "dqls: " << e.what() << "\n";
    return kAssertion;
  }
}
