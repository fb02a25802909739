// Copyright 2026 The dqls Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dqls/vtaa.hpp"

#include <chrono>
#include <optional>

namespace dqls {

struct OracleResult {
  RVec x;
  bool zero = false;  // nothing survived truncation, or b has no retained component
  std::size_t retained = 0;
};

// Truncated pseudoinverse: singular values below delta are dropped.
inline OracleResult classical_oracle_ols(const RMat& a, const RVec& b, double delta) {
  if (b.size() != a.rows()) throw ShapeError("oracle: b length must equal rows of A");
  Eigen::JacobiSVD<RMat> s(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVec& sv = s.singularValues();
  OracleResult out;
  out.x = RVec::Zero(a.cols());
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) <= 0 || sv(k) < delta * (1 - 1e-12)) continue;
    out.x += (s.matrixU().col(k).dot(b) / sv(k)) * s.matrixV().col(k);
    ++out.retained;
  }
  const double scale = b.norm() / std::max(sv.size() ? sv(0) : 1.0, 1e-300);
  out.zero = out.retained == 0 || out.x.norm() <= 1e-12 * std::max(scale, 1e-300);
  if (out.zero) out.x.setZero();
  return out;
}

struct L2OracleResult {
  RVec x;            // normal-equation solution
  RVec x_augmented;  // A_L^+ (b; 0)
  double discrepancy = 0.0;
};

inline L2OracleResult classical_oracle_l2(const RMat& a, const RVec& b, double lambda, const RMat& l) {
  if (!(lambda > 0)) throw PreconditionError("oracle_l2: lambda must be positive");
  if (l.rows() != a.cols() || l.cols() != a.cols()) throw ShapeError("oracle_l2: L must be n x n");
  if (b.size() != a.rows()) throw ShapeError("oracle_l2: b length must equal rows of A");
  const RMat normal = a.transpose() * a + lambda * l.transpose() * l;
  Eigen::LDLT<RMat> ldlt(normal);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) throw std::runtime_error("oracle_l2: singular normal matrix");
  L2OracleResult out;
  out.x = ldlt.solve(a.transpose() * b);

  RMat al(a.rows() + a.cols(), a.cols());
  al << a, std::sqrt(lambda) * l;
  RVec bt = RVec::Zero(al.rows());
  bt.head(b.size()) = b;
  out.x_augmented = al.completeOrthogonalDecomposition().pseudoInverse() * bt;
  out.discrepancy = (out.x - out.x_augmented).norm();
  return out;
}

struct GammaMetrics {
  double gamma = 0.0;
  std::optional<double> gamma_l2;
  std::optional<double> gamma_ridge;
};

namespace detail {

inline double column_overlap(const RMat& a, const RVec& b) {
  const double nb = b.norm();
  if (nb == 0) return 0.0;
  Eigen::JacobiSVD<RMat> s(a, Eigen::ComputeThinU);
  const RVec& sv = s.singularValues();
  const double floor = 1e-12 * std::max(1.0, sv.size() ? sv(0) : 1.0);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > floor) acc += std::pow(s.matrixU().col(k).dot(b), 2);
  return std::clamp(std::sqrt(acc) / nb, 0.0, 1.0);
}

// (1 - L(x)/|b|^2)^(1/2) with L(x) = |Ax - b|^2 + lambda |Lx|^2 at the minimiser.
inline double penalized_overlap(const RMat& a, const RVec& b, double lambda, const RMat& l) {
  const double nb2 = b.squaredNorm();
  if (nb2 == 0) return 0.0;
  const RVec x = classical_oracle_l2(a, b, lambda, l).x;
  const double loss = (a * x - b).squaredNorm() + lambda * (l * x).squaredNorm();
  return std::sqrt(std::clamp(1.0 - loss / nb2, 0.0, 1.0));
}

inline double condition_number(const RMat& a) {
  Eigen::JacobiSVD<RMat> s(a);
  const double smin = min_nonzero_singular(a);
  return smin > 0 ? s.singularValues()(0) / smin : std::numeric_limits<double>::infinity();
}

}  // namespace detail

inline GammaMetrics gamma_metrics(const DistributedInstance& inst, const PenaltySpec* pen = nullptr) {
  GammaMetrics g;
  g.gamma = detail::column_overlap(inst.A, inst.b);
  if (pen) {
    g.gamma_l2 = detail::penalized_overlap(inst.A, inst.b, pen->lambda, pen->L);
    g.gamma_ridge = detail::penalized_overlap(inst.A, inst.b, pen->lambda, RMat::Identity(inst.n(), inst.n()));
  }
  return g;
}

enum class Regularizer { none, ridge, l2 };

inline const char* to_string(Regularizer r) {
  switch (r) {
    case Regularizer::ridge: return "ridge";
    case Regularizer::l2: return "l2";
    default: return "none";
  }
}

struct RegressionOptions {
  double gamma_floor = 1e-6;
  std::size_t degree_budget = 80;
  double support_grid = 1.0 / 64.0;
  CostConstants constants{};
};

struct RegressionResult {
  bool feasible = true;
  std::string mode;
  std::string reg = "none";
  RVec direction;          // unit vector, sign fixed by the largest entry
  double fidelity = 0.0;
  double gamma = 0.0;      // gamma, gamma_l2 or gamma_ridge depending on reg
  double p_succ = 0.0;
  double p_succ_predicted = 0.0;
  double amplified_success = 0.0;
  double truncated_mass = 0.0;  // weight outside the row-space block before renormalising
  double qubits_total = 0.0;
  double qubits_gpe = 0.0;
  double qubits_inv = 0.0;
  double qubits_bprep = 0.0;
  double kappa = 0.0;
  double alpha_eff = 0.0;
  double delta_param = 0.0;
  double lambda = 0.0;
  double eps = 0.0;
  double wall_ms = 0.0;
  VtStats stats;
  LedgerReport ledger;
  std::vector<std::string> warnings;
};

namespace detail {

// Global phase chosen so the largest entry is real and positive.
inline RVec real_direction(const Vec& v) {
  Eigen::Index at = 0;
  v.cwiseAbs().maxCoeff(&at);
  const cplx ph = std::abs(v(at)) > 0 ? std::conj(v(at)) / std::abs(v(at)) : cplx(1.0);
  RVec out = (v * ph).real();
  const double n = out.norm();
  return n > 0 ? RVec(out / n) : out;
}

// Shared tail of the OLS and penalised pipelines: encoding already built,
// b already padded to the encoded instance.
inline void run_pipeline(RegressionResult& res, const DistributedInstance& charge_inst, const BlockEncoding& be,
                         double delta_param, const RVec& b, Eigen::Index out_offset, Eigen::Index n,
                         const RVec& oracle, double eps, ApplyMode mode, const RegressionOptions& opt,
                         CommLedger& ledger) {
  VtProblem prob{&charge_inst, &be, delta_param, b};
  VtOptions vo;
  vo.mode = mode;
  vo.eps = eps;
  vo.degree_budget = opt.degree_budget;
  vo.support_grid = opt.support_grid;
  auto run = run_variable_time(prob, vo, ledger);
  res.warnings = run.warnings;
  if (run.failed) {
    res.feasible = false;
    res.stats = run.stats;
    res.ledger = ledger.report();
    return;
  }
  res.amplified_success = amplitude_amplify(run, ledger);
  res.stats = run.stats;
  res.p_succ = run.stats.p_succ;
  res.p_succ_predicted = run.stats.p_succ_predicted;
  res.alpha_eff = be.alpha_eff;
  res.delta_param = delta_param;

  const Vec block = run.output.segment(out_offset, n);
  res.truncated_mass = std::max(0.0, 1.0 - block.squaredNorm());
  res.fidelity = std::min(1.0, fidelity(block, oracle.cast<cplx>()));
  res.direction = real_direction(block);

  res.ledger = ledger.report();
  res.qubits_total = res.ledger.total;
  auto tag = [&](const char* t) {
    auto it = res.ledger.tags.find(t);
    return it == res.ledger.tags.end() ? 0.0 : it->second;
  };
  res.qubits_gpe = tag("gpe");
  res.qubits_inv = tag("inv");
  res.qubits_bprep = tag("bprep");
}

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

inline RegressionResult solve_ols(const DistributedInstance& inst, double eps, ApplyMode mode,
                                  const RegressionOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  RegressionResult res;
  res.mode = to_string(mode);
  res.eps = eps;
  res.kappa = detail::condition_number(inst.A);
  res.gamma = gamma_metrics(inst).gamma;
  if (res.gamma < opt.gamma_floor) {
    res.feasible = false;
    res.warnings.push_back("infeasible: gamma below floor");
    res.wall_ms = detail::elapsed_ms(t0);
    return res;
  }
  const auto oracle = classical_oracle_ols(inst.A, inst.b, inst.delta);
  CommLedger ledger(opt.constants);
  const auto be = be_of_A_bar(inst);
  detail::run_pipeline(res, inst, be, inst.delta, inst.b, padded_dim(inst), inst.n(), oracle.x, eps, mode, opt,
                       ledger);
  res.wall_ms = detail::elapsed_ms(t0);
  return res;
}

// Penalised least squares through the augmented matrix stack(A, sqrt(lambda) L).
inline RegressionResult solve_l2(const DistributedInstance& inst, const PenaltySpec& pen, double eps, ApplyMode mode,
                                 const RegressionOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  pen.validate(inst.n());
  const bool ridge = pen.L.isIdentity(0.0);
  RegressionResult res;
  res.mode = to_string(mode);
  res.reg = ridge ? "ridge" : "l2";
  res.eps = eps;
  res.lambda = pen.lambda;
  res.kappa = detail::condition_number(inst.A);
  const auto g = gamma_metrics(inst, &pen);
  res.gamma = ridge ? *g.gamma_ridge : *g.gamma_l2;
  if (res.gamma < opt.gamma_floor) {
    res.feasible = false;
    res.warnings.push_back("infeasible: gamma_l2 below floor");
    res.wall_ms = detail::elapsed_ms(t0);
    return res;
  }
  const auto oracle = classical_oracle_l2(inst.A, inst.b, pen.lambda, pen.L);
  const auto aug = augmented_instance(inst, pen);
  CommLedger ledger(opt.constants);
  const auto be = be_of_A_L(inst, pen, nullptr, 0, true);
  const double delta_param = std::sqrt(pen.lambda) * pen.delta_L();
  detail::run_pipeline(res, inst, be, delta_param, aug.b, padded_dim(aug), inst.n(), oracle.x, eps, mode, opt,
                       ledger);
  res.wall_ms = detail::elapsed_ms(t0);
  return res;
}

inline RegressionResult solve_ridge(const DistributedInstance& inst, double lambda, double eps, ApplyMode mode,
                                    const RegressionOptions& opt = {}) {
  return solve_l2(inst, {lambda, RMat::Identity(inst.n(), inst.n())}, eps, mode, opt);
}

}  // namespace dqls
