// Copyright 2026 The dqls Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Parameter sweeps over the regression pipeline and the GPE cost comparison.

#include "dqls/fit.hpp"
#include "dqls/generator.hpp"
#include "dqls/regression.hpp"

#include <atomic>
#include <functional>
#include <thread>

namespace dqls {

enum class SweepParam { delta, eps, r };

inline const char* to_string(SweepParam p) {
  switch (p) {
    case SweepParam::delta: return "delta";
    case SweepParam::eps: return "eps";
    default: return "r";
  }
}

struct SweepPoint {
  double value = 0.0;      // grid value of the swept parameter
  double regressor = 0.0;  // log(1/delta), ln(1/eps) or log r
  double response = 0.0;   // log(qubits) for delta and r, qubits for eps
  DistributedInstance instance;
  RegressionResult result;
};

struct SweepSummary {
  SweepParam param = SweepParam::delta;
  std::vector<SweepPoint> points;
  PolyFit fit;
  std::vector<double> alpha_base;  // r sweep: recomputed base scale per point
};

// Runs fn(i) for i in [0, count) on up to jobs threads; results land by index,
// so output order never depends on scheduling.
inline void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errs(count);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < count;) {
        try {
          fn(i);
        } catch (...) {
          errs[i] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

// Spectrum log-spaced from delta/margin to 1, one value per column, with b on
// the smallest singular direction. Every VT stage up to delta sees a singular
// value and the success probability is the same at every grid point.
inline DistributedInstance delta_sweep_instance(const GenSpec& base, double delta) {
  GenSpec g = base;
  const double lo = delta / g.delta_margin;
  if (!(lo < 1)) throw PreconditionError("delta sweep: delta must be below the margin");
  g.spectrum.clear();
  if (g.n == 1) g.spectrum.push_back(lo);
  for (Eigen::Index k = 0; g.n > 1 && k < g.n; ++k) g.spectrum.push_back(std::pow(lo, double(k) / double(g.n - 1)));
  g.gamma = 1.0;
  auto inst = gen_instance(g);
  Eigen::JacobiSVD<RMat> s(inst.A, Eigen::ComputeThinU);
  const RVec b = s.matrixU().col(g.n - 1);
  return build_instance(split_rows(inst.A, b, g.r), inst.delta);
}

inline void check_grid(const std::vector<double>& grid) {
  if (grid.size() < 3) throw FitError("sweep: grid needs at least 3 points");
}

inline SweepSummary sweep_delta(const GenSpec& base, const std::vector<double>& deltas, double eps, ApplyMode mode,
                                std::size_t jobs = 1, const RegressionOptions& opt = {}) {
  check_grid(deltas);
  SweepSummary s;
  s.param = SweepParam::delta;
  s.points.resize(deltas.size());
  parallel_for(deltas.size(), jobs, [&](std::size_t i) {
    auto& p = s.points[i];
    p.value = deltas[i];
    p.instance = delta_sweep_instance(base, deltas[i]);
    p.result = solve_ols(p.instance, eps, mode, opt);
    p.regressor = std::log(1.0 / deltas[i]);
    p.response = std::log(p.result.qubits_total);
  });
  std::vector<double> x, y;
  for (auto& p : s.points) x.push_back(p.regressor), y.push_back(p.response);
  s.fit = linear_fit(x, y);
  return s;
}

inline SweepSummary sweep_eps(const DistributedInstance& inst, const std::vector<double>& eps_grid, ApplyMode mode,
                              std::size_t jobs = 1, const RegressionOptions& opt = {}) {
  check_grid(eps_grid);
  SweepSummary s;
  s.param = SweepParam::eps;
  s.points.resize(eps_grid.size());
  parallel_for(eps_grid.size(), jobs, [&](std::size_t i) {
    auto& p = s.points[i];
    p.value = eps_grid[i];
    p.instance = inst;
    p.result = solve_ols(inst, eps_grid[i], mode, opt);
    p.regressor = std::log(1.0 / eps_grid[i]);
    p.response = p.result.qubits_total;
  });
  std::vector<double> x, y;
  for (auto& p : s.points) x.push_back(p.regressor), y.push_back(p.response);
  s.fit = linear_fit(x, y);
  return s;
}

// Same A and b at every point, rows re-split across r parties. The fitted
// model is linear in r.
inline SweepSummary sweep_r(const GenSpec& base, const std::vector<double>& rs, double eps, ApplyMode mode,
                            std::size_t jobs = 1, const RegressionOptions& opt = {}) {
  check_grid(rs);
  const auto inst0 = gen_instance(base);
  SweepSummary s;
  s.param = SweepParam::r;
  s.points.resize(rs.size());
  s.alpha_base.resize(rs.size());
  parallel_for(rs.size(), jobs, [&](std::size_t i) {
    auto& p = s.points[i];
    const auto r = static_cast<std::size_t>(rs[i]);
    p.value = rs[i];
    p.instance = build_instance(split_rows(inst0.A, inst0.b, r), inst0.delta);
    p.result = solve_ols(p.instance, eps, mode, opt);
    p.regressor = rs[i];
    p.response = p.result.qubits_total;
    double a2 = 0.0;
    for (auto& b : party_blocks(p.instance)) a2 += std::pow(spectral_norm(b.cast<cplx>()), 2);
    s.alpha_base[i] = std::sqrt(a2);
  });
  std::vector<double> x, y;
  for (auto& p : s.points) x.push_back(p.regressor), y.push_back(p.response);
  s.fit = linear_fit(x, y);
  return s;
}

struct GpeCompareRow {
  double eps = 0.0;
  double new_qubits = 0.0;
  double cks_qubits = 0.0;
  std::size_t cks_repetitions = 0;
};

struct GpeComparison {
  double phi = 0.25;
  std::vector<GpeCompareRow> rows;
  PolyFit new_affine, new_quadratic, cks_affine, cks_quadratic;

  bool new_is_affine() const { return std::abs(new_quadratic.coef[2]) <= 0.05 * std::abs(new_quadratic.coef[1]); }
  bool cks_is_quadratic() const { return cks_quadratic.coef[2] > 0; }
};

inline const char* new_gpe_form() { return "O(r^1.5 ||A|| / phi * log(mn) * log(1/eps))"; }
inline const char* cks_gpe_form() { return "O(r^1.5 ||A|| / phi * log(mn) * log(1/(phi eps)) * log(1/eps))"; }

// Ledger totals of one GPE call per pipeline at each eps, both run on |b> in
// spectral mode at fixed (phi, r, m, n).
inline GpeComparison compare_gpe(const DistributedInstance& inst, double phi, const std::vector<double>& eps_grid) {
  if (eps_grid.size() < 5) throw FitError("compare_gpe: eps grid needs at least 5 points");
  GpeComparison c;
  c.phi = phi;
  const auto be = be_of_A_bar(inst);
  const Walk w(be);
  Vec b0 = Vec::Zero(be.sys_dim);
  b0.head(inst.m()) = (inst.b / inst.b.norm()).cast<cplx>();
  for (double eps : eps_grid) {
    GpeCompareRow row;
    row.eps = eps;
    {
      RegisterLayout lay;
      lay.add("I", ceil_log2(static_cast<std::size_t>(be.sys_dim)));
      lay.add("Q", be.ancillas);
      lay.add("Mp", 1);
      lay.add("Mb", 1);
      lay.add("F", 1);
      auto s = StateVector::with_register(lay, "I", b0);
      CommLedger led;
      GpeParams g;
      g.phi = phi;
      g.eps = eps;
      gapped_phase_estimation(w, g, s, &led);
      row.new_qubits = led.total();
    }
    {
      RegisterLayout lay;
      lay.add("I", ceil_log2(static_cast<std::size_t>(be.sys_dim)));
      lay.add("F", 1);
      auto s = StateVector::with_register(lay, "I", b0);
      CommLedger led;
      CksParams cp;
      cp.phi = phi;
      cp.eps = eps;
      row.cks_repetitions = cks_gpe(inst, cp, s, &led).repetitions;
      row.cks_qubits = led.total();
    }
    c.rows.push_back(row);
  }
  std::vector<double> x, yn, yc;
  for (auto& r : c.rows) {
    x.push_back(std::log(1.0 / r.eps));
    yn.push_back(r.new_qubits);
    yc.push_back(r.cks_qubits);
  }
  c.new_affine = linear_fit(x, yn);
  c.new_quadratic = quadratic_fit(x, yn);
  c.cks_affine = linear_fit(x, yc);
  c.cks_quadratic = quadratic_fit(x, yc);
  return c;
}

}  // namespace dqls
