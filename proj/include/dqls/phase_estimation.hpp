// Copyright 2026 The dqls Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dqls/qsp.hpp"
#include "dqls/synthesis.hpp"

#include <optional>

namespace dqls {

enum class FlagConvention { paper, vtaa };

inline const char* to_string(FlagConvention f) { return f == FlagConvention::paper ? "paper" : "vtaa"; }

struct GpeParams {
  double phi = 0.5;
  double rho = 2.0;
  double eps = 1e-2;
  ApplyMode mode = ApplyMode::spectral;
  FlagConvention flag = FlagConvention::paper;
  // Walk eigenphases always satisfy |lambda|/alpha_eff <= 1/2.
  SpectralSupport support{0.5, 0.0, 1e-3};
  std::size_t degree_budget = 80;
  bool require = true;  // circuit mode: fail when synthesis misses the tolerance

  void validate() const {
    if (!(phi > 0 && phi <= 1)) throw PreconditionError("GpeParams: phi must lie in (0,1]");
    if (!(rho > 1)) throw PreconditionError("GpeParams: rho must exceed 1");
    if (!(eps > 0 && eps < 1)) throw PreconditionError("GpeParams: eps must lie in (0,1)");
  }
};

enum class GpeBand { large_pos, middle, large_neg, indeterminate };

inline const char* to_string(GpeBand b) {
  switch (b) {
    case GpeBand::large_pos: return "large_pos";
    case GpeBand::middle: return "middle";
    case GpeBand::large_neg: return "large_neg";
    case GpeBand::indeterminate: return "indeterminate";
  }
  return "?";
}

struct GpeCase {
  GpeBand band = GpeBand::indeterminate;
  Eigen::Vector2cd flag = Eigen::Vector2cd::Zero();  // guaranteed flag state; zero when indeterminate
  double tolerance = 0.0;
};

// Per-eigenvalue expectations for x = lambda/alpha_eff.
struct GpeCaseTable {
  double phi = 0.5, rho = 2.0, tolerance = 1e-2;
  FlagConvention flag = FlagConvention::paper;

  GpeCase classify(double x) const {
    GpeCase c;
    c.tolerance = tolerance;
    const double slack = 1e-12;
    if (x >= phi - slack) {
      c.band = GpeBand::large_pos;
      c.flag << 1.0, 0.0;
    } else if (x <= -phi + slack) {
      c.band = GpeBand::large_neg;
      c.flag << -1.0, 0.0;
    } else if (std::abs(x) <= phi / rho + slack) {
      c.band = GpeBand::middle;
      c.flag << 0.0, kI;
    } else {
      return c;
    }
    if (flag == FlagConvention::vtaa) std::swap(c.flag(0), c.flag(1));
    return c;
  }
};

inline GpeCaseTable case_table(const GpeParams& p, double tolerance) {
  return {p.phi, p.rho, tolerance, p.flag};
}

// Nominal degrees charged in spectral mode, so ledgers do not depend on the
// simulation mode. Constants sit just above what the synthesizer reaches.
struct DegreeModel {
  double c_bm = 3.0;
  double c_gpe = 4.0;
};

inline std::size_t even_ceil(double d) {
  auto n = static_cast<std::size_t>(std::ceil(d - 1e-9));
  if (n < 2) n = 2;
  return n + (n % 2);
}

inline std::size_t nominal_bm_degree(double eps, const DegreeModel& m = {}) {
  return even_ceil(m.c_bm * std::log(1.0 / eps));
}

inline std::size_t nominal_gpe_degree(double phi, double eps, const DegreeModel& m = {}) {
  return even_ceil(m.c_gpe / phi * std::log(1.0 / eps));
}

struct GpeRegisters {
  std::string sys = "I";
  std::string anc = "Q";
  std::string mark_proc = "Mp";    // processing qubit of the branch-marking QSP
  std::string mark_branch = "Mb";  // ends in |+> or |-> by branch
  std::string flag = "F";
};

struct GpeReport {
  std::size_t bm_degree = 0;
  std::size_t gpe_degree = 0;
  double bm_error = 0.0;   // achieved synthesis error (0 in spectral mode)
  double gpe_error = 0.0;
  bool synthesis_met = true;
  std::optional<std::string> warning;
};

namespace detail {

inline Mat2 sign_ideal(double theta) {
  const Mat2 ix = kI * pauli::X();
  return theta >= 0 ? ix : Mat2(-ix);
}

// exp(i beta X) with beta = 0 above the threshold, pi/2 in the middle band and
// pi on the negative side; linear across the gaps, mirrored for theta < 0.
inline Mat2 gpe_ideal(double theta, double phi, double rho) {
  const double a = std::abs(theta);
  const double a1 = std::acos(std::min(phi, 1.0)), a2 = std::acos(std::min(phi / rho, 1.0));
  double beta;
  if (a <= a1)
    beta = 0.0;
  else if (a < a2)
    beta = kPi / 2 * (a - a1) / (a2 - a1);
  else if (a <= kPi - a2)
    beta = kPi / 2;
  else if (a < kPi - a1)
    beta = kPi / 2 + kPi / 2 * (a - (kPi - a2)) / (a2 - a1);
  else
    beta = kPi;
  if (theta < 0) beta = -beta;
  return xrot(beta);
}

inline Mat2 phase_gate(cplx p) {
  Mat2 m = Mat2::Identity();
  m(1, 1) = p;
  return m;
}

inline std::vector<Control> with_control(std::vector<Control> c, const std::string& reg, std::size_t pattern) {
  c.push_back({reg, pattern});
  return c;
}

}  // namespace detail

// Weight of branch components whose mark disagrees with the branch sign.
inline double mark_mismatch(const Walk& w, const StateVector& s, const GpeRegisters& r = {},
                            const std::vector<Control>& controls = {}) {
  StateVector t = s;
  t.apply_operator(pauli::H(), {r.mark_branch}, controls);
  const auto& sp = w.spectrum();
  const Eigen::Index N = w.dim(), k = sp.vectors.cols() / 2;
  double bad = 0.0;
  t.apply_kernel({r.sys, r.anc, r.mark_branch}, controls, [&](Vec& v) {
    const Vec c0 = sp.vectors.adjoint() * v.head(N);
    const Vec c1 = sp.vectors.adjoint() * v.tail(N);
    bad += c0.tail(k).squaredNorm() + c1.head(k).squaredNorm();
  });
  return bad;
}

// Mark qubits start in |+>|+>; afterwards the branch mark holds |+> on + branches
// and |-> on - branches. adjoint runs the inverse.
inline GpeReport branch_mark(const Walk& w, double eps, StateVector& s, ApplyMode mode, CommLedger* ledger,
                             const GpeRegisters& r = {}, const std::vector<Control>& controls = {},
                             bool adjoint = false, std::size_t degree_budget = 80) {
  const auto& be = w.encoding();
  if (!be.hermitian) throw WalkError("branch_mark needs a Hermitian block encoding");
  GpeReport rep;
  const QspRegisters q{r.sys, r.anc, r.mark_proc};
  const auto ctl = detail::with_control(controls, r.mark_branch, 1);
  const Mat2 ph = detail::phase_gate(adjoint ? kI : -kI);
  if (mode == ApplyMode::circuit) {
    auto tup = sign_tuple(eps, degree_budget, true);
    rep.bm_degree = tup.sequence.degree();
    rep.bm_error = tup.achieved;
    rep.synthesis_met = tup.met;
    QspOptions o;
    o.adjoint = adjoint;
    if (adjoint) s.apply_operator(ph, {r.mark_branch}, controls);
    apply_phase_sequence(w, tup.sequence, s, mode, ledger, q, ctl, o);
    if (!adjoint) s.apply_operator(ph, {r.mark_branch}, controls);
  } else {
    rep.bm_degree = nominal_bm_degree(eps);
    auto f = [adjoint](double th) {
      Mat2 m = detail::sign_ideal(th);
      return adjoint ? Mat2(m.adjoint()) : m;
    };
    if (adjoint) s.apply_operator(ph, {r.mark_branch}, controls);
    spectral_apply(w, f, s, ledger, rep.bm_degree, q, ctl);
    if (!adjoint) s.apply_operator(ph, {r.mark_branch}, controls);
  }
  return rep;
}

// |+><+| (x) V_+ + |-><-| (x) V_-: the - branch runs on the reversed walk so both
// branches see the response at theta_u in [0, pi]. One degree-l select is charged.
inline GpeReport gpe_bm(const Walk& w, const GpeParams& p, StateVector& s, CommLedger* ledger,
                        const GpeRegisters& r = {}, const std::vector<Control>& controls = {},
                        bool adjoint = false) {
  p.validate();
  GpeReport rep;
  if (!adjoint) {
    const double mis = mark_mismatch(w, s, r, controls);
    if (mis > p.eps * p.eps * s.norm() * s.norm())
      rep.warning = "gpe_bm: branch mark disagrees with branch sign, weight " + std::to_string(mis);
  }
  const QspRegisters q{r.sys, r.anc, r.flag};
  const auto c0 = detail::with_control(controls, r.mark_branch, 0);
  const auto c1 = detail::with_control(controls, r.mark_branch, 1);
  s.apply_operator(pauli::H(), {r.mark_branch}, controls);
  if (p.mode == ApplyMode::circuit) {
    auto tup = gpe_tuple(p.phi, p.rho, p.eps, p.degree_budget, p.require, p.support);
    rep.gpe_degree = tup.sequence.degree();
    rep.gpe_error = tup.achieved;
    rep.synthesis_met = tup.met;
    QspOptions o;
    o.adjoint = adjoint;
    apply_phase_sequence(w, tup.sequence, s, p.mode, nullptr, q, c0, o);
    o.reverse_walk = true;
    apply_phase_sequence(w, tup.sequence, s, p.mode, nullptr, q, c1, o);
  } else {
    rep.gpe_degree = nominal_gpe_degree(p.phi, p.eps);
    const double phi = p.phi, rho = p.rho;
    auto f = [=](double th) {
      Mat2 m = detail::gpe_ideal(th, phi, rho);
      return adjoint ? Mat2(m.adjoint()) : m;
    };
    spectral_apply(w, f, s, nullptr, 0, q, c0);
    spectral_apply(w, [&](double th) { return f(-th); }, s, nullptr, 0, q, c1);
  }
  s.apply_operator(pauli::H(), {r.mark_branch}, controls);
  w.encoding().charge(ledger, rep.gpe_degree);
  return rep;
}

// Attach marks, mark branches, branch-marked GPE, unmark, detach. The flag
// register must start in |0>; with the vtaa convention the flag is flipped at
// the end so large singular values read |1>. adjoint runs the exact inverse.
inline GpeReport gapped_phase_estimation(const Walk& w, const GpeParams& p, StateVector& s, CommLedger* ledger,
                                         const GpeRegisters& r = {}, const std::vector<Control>& controls = {},
                                         bool adjoint = false) {
  p.validate();
  const Mat2 h = pauli::H();
  if (adjoint && p.flag == FlagConvention::vtaa) s.apply_operator(pauli::X(), {r.flag}, controls);
  s.apply_operator(h, {r.mark_proc}, controls);
  s.apply_operator(h, {r.mark_branch}, controls);
  auto bm = branch_mark(w, p.eps, s, p.mode, ledger, r, controls, false, p.degree_budget);
  auto rep = gpe_bm(w, p, s, ledger, r, controls, adjoint);
  branch_mark(w, p.eps, s, p.mode, ledger, r, controls, true, p.degree_budget);
  s.apply_operator(h, {r.mark_branch}, controls);
  s.apply_operator(h, {r.mark_proc}, controls);
  if (!adjoint && p.flag == FlagConvention::vtaa) s.apply_operator(pauli::X(), {r.flag}, controls);
  rep.bm_degree = bm.bm_degree;
  rep.bm_error = bm.bm_error;
  rep.synthesis_met = rep.synthesis_met && bm.synthesis_met;
  return rep;
}

// Baseline: textbook phase estimation on exp(i pi Abar / scale) with majority
// voting. The outcome statistics of each repetition are computed exactly per
// eigencomponent and the uncomputed circuit is applied as a flag rotation.
struct CksParams {
  double phi = 0.25;
  double eps = 1e-2;
  double scale = 0.0;    // 0: use the base scale alpha of the encoding of A
  double c_mv = 8.0;     // repetitions = ceil(c_mv ln(1/eps))
  int extra_bits = 3;    // phase bits = ceil(log2(1/phi)) + extra_bits
};

struct CksReport {
  int phase_bits = 0;
  std::size_t repetitions = 0;
  double per_repetition = 0.0;
};

inline double cks_repetition_charge(const DistributedInstance& inst, double phi, double eps,
                                    const CostConstants& k) {
  const double mn = static_cast<double>(inst.m()) * static_cast<double>(inst.n());
  return k.c_be * (static_cast<double>(inst.r()) / phi) * detail::log2_ceil_count(mn) *
         std::max(1.0, detail::log2_ceil_count(1.0 / (phi * eps)));
}

// Probability that one t-bit estimate of the phase frac (in turns) lands on k.
inline double pe_outcome_probability(double frac, int t, std::size_t k) {
  const double M = std::ldexp(1.0, t);
  const double d = frac - static_cast<double>(k) / M;
  const double s = std::sin(kPi * d);
  if (std::abs(s) < 1e-15) return 1.0;
  const double v = std::sin(kPi * M * d) / (M * s);
  return v * v;
}

inline double binomial_majority(std::size_t n, double p) {
  // P(more than n/2 successes), summed in log space.
  double tot = 0.0;
  const double lp = std::log(std::max(p, 1e-300)), lq = std::log(std::max(1 - p, 1e-300));
  for (std::size_t j = n / 2 + 1; j <= n; ++j) {
    const double lc = std::lgamma(double(n) + 1) - std::lgamma(double(j) + 1) - std::lgamma(double(n - j) + 1);
    tot += std::exp(lc + double(j) * lp + double(n - j) * lq);
  }
  return std::min(1.0, tot);
}

inline CksReport cks_gpe(const DistributedInstance& inst, const CksParams& p, StateVector& s, CommLedger* ledger,
                         const std::string& sys = "I", const std::string& flag = "F") {
  if (!(p.phi > 0 && p.phi < 0.5)) throw PreconditionError("cks_gpe: phi must lie in (0,1/2)");
  if (!(p.eps > 0 && p.eps < 1)) throw PreconditionError("cks_gpe: eps must lie in (0,1)");
  const auto D = padded_dim(inst);
  const Mat abar = hermitian_dilation(pad(inst.A.cast<cplx>(), D, D));
  double scale = p.scale;
  if (scale <= 0) {
    double a2 = 0.0;
    for (auto& b : party_blocks(inst)) a2 += std::pow(spectral_norm(b.cast<cplx>()), 2);
    scale = std::sqrt(a2);
  }
  if ((Eigen::Index{1} << s.layout().width(sys)) != abar.rows())
    throw LayoutError("cks_gpe: register " + sys + " does not match the dilated dimension");
  CksReport rep;
  rep.phase_bits = static_cast<int>(std::ceil(std::log2(1.0 / p.phi) - 1e-12)) + p.extra_bits;
  rep.repetitions = static_cast<std::size_t>(std::ceil(p.c_mv * std::log(1.0 / p.eps)));
  // Eigenphases of the exact exponential exp(i pi Abar / scale).
  auto e = eigh(abar);
  const int t = rep.phase_bits;
  const std::size_t M = std::size_t{1} << t;
  const double thr = 1.5 * p.phi;
  std::vector<double> p_large(static_cast<std::size_t>(e.values.size()));
  for (Eigen::Index u = 0; u < e.values.size(); ++u) {
    const double frac = e.values(u) / (2.0 * scale);  // turns, in [-1/2, 1/2]
    double pl = 0.0;
    for (std::size_t k = 0; k < M; ++k) {
      double est = 2.0 * static_cast<double>(k) / double(M);  // lambda/scale estimate
      if (est > 1.0) est -= 2.0;
      if (std::abs(est) >= thr) pl += pe_outcome_probability(frac, t, k);
    }
    p_large[static_cast<std::size_t>(u)] = binomial_majority(rep.repetitions, std::clamp(pl, 0.0, 1.0));
  }
  const Mat& V = e.vectors;
  const Eigen::Index n = abar.rows();
  s.apply_kernel({sys, flag}, {}, [&](Vec& v) {
    Vec c0 = V.adjoint() * v.head(n);
    Vec c1 = V.adjoint() * v.tail(n);
    for (Eigen::Index u = 0; u < n; ++u) {
      const double q = p_large[static_cast<std::size_t>(u)];
      const double c = std::sqrt(1 - q), sn = std::sqrt(q);
      const cplx a0 = c0(u), a1 = c1(u);
      c0(u) = c * a0 - sn * a1;
      c1(u) = sn * a0 + c * a1;
    }
    v.head(n) = V * c0;
    v.tail(n) = V * c1;
  });
  if (ledger) {
    rep.per_repetition = cks_repetition_charge(inst, p.phi, p.eps, ledger->constants());
    ledger->charge(Primitive::cks_pe_round, rep.repetitions, rep.per_repetition);
  } else {
    rep.per_repetition = cks_repetition_charge(inst, p.phi, p.eps, CostConstants{});
  }
  return rep;
}

// Ledger charge of one new-pipeline GPE call (BM, GPE_BM, BM^-1) in either mode.
inline double gpe_nominal_charge(const BlockEncoding& be, double phi, double eps) {
  return be.per_use * static_cast<double>(2 * nominal_bm_degree(eps) + nominal_gpe_degree(phi, eps));
}

}  // namespace dqls
