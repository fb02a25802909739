// Copyright 2026 The dqls Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dqls/phase_estimation.hpp"

namespace dqls {

struct InversionConfig {
  double phi = 0.25;
  double eps = 1e-2;
  double c_inv = 0.0;  // 0: delta/(2 alpha_eff) from the instance
  ApplyMode mode = ApplyMode::spectral;
  bool odd = true;     // odd response: maps left singular directions to right ones
  double x_max = 0.5;
  std::size_t degree_budget = 80;
  bool require = true;             // circuit mode: fail when synthesis misses the tolerance
  bool check_precondition = true;  // reject input weight below phi
};

struct InversionRegisters {
  std::string sys = "I";
  std::string anc = "Q";
  std::string proc = "P";
  std::string flag = "F";
};

struct InversionReport {
  std::size_t degree = 0;
  double synthesis_error = 0.0;
  bool synthesis_met = true;
  double c_inv = 0.0;
  double charge = 0.0;
};

class InversionError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

inline double default_c_inv(const DistributedInstance& inst, const BlockEncoding& be) {
  return inst.delta / (2.0 * be.alpha_eff);
}

inline double inversion_charge(const DistributedInstance& inst, double phi, double eps, const CostConstants& k) {
  return cks_repetition_charge(inst, phi, eps, k);
}

// Exact response used in spectral mode: c/x outside (-phi, phi), linear inside.
inline double inverse_ideal(double x, double phi, double c, bool odd) {
  const double ax = std::abs(x);
  const double mag = ax >= phi ? c / ax : c * ax / (phi * phi);
  return odd && x < 0 ? -mag : mag;
}

namespace detail {

inline void check_inversion_input(const Walk& w, const StateVector& s, double phi,
                                  const std::vector<Control>& sel, const std::string& sys, double tol) {
  const auto& be = w.encoding();
  auto e = eigh(be.target);
  const Vec v = s.register_vector(sys, sel);
  const double tot = std::max(v.squaredNorm(), 1e-300);
  for (Eigen::Index u = 0; u < e.values.size(); ++u) {
    const double x = e.values(u) / be.alpha_eff;
    if (std::abs(x) >= phi * (1 - 1e-12)) continue;
    const double wgt = std::norm(e.vectors.col(u).dot(v));
    if (wgt > tol * tot) {
      std::ostringstream os;
      os << "inv: input weight " << wgt / tot << " on singular value " << std::abs(e.values(u))
         << " (sigma/alpha_eff = " << std::abs(x) << ") below phi = " << phi;
      throw InversionError(os.str());
    }
  }
}

}  // namespace detail

// F <- 1 on the branch where the processing qubit returns to |0> and the
// encoding ancillas are clean; that branch carries g(Abar/alpha_eff)|b>.
inline InversionReport inv(const DistributedInstance& inst, const Walk& w, InversionConfig cfg, StateVector& s,
                           CommLedger* ledger, const InversionRegisters& r = {},
                           const std::vector<Control>& controls = {}) {
  const auto& be = w.encoding();
  if (cfg.c_inv <= 0) cfg.c_inv = default_c_inv(inst, be);
  if (!(cfg.phi > 0 && cfg.phi < 1)) throw PreconditionError("inv: phi must lie in (0,1)");
  if (!(cfg.eps > 0)) throw PreconditionError("inv: eps must be positive");
  if (!(cfg.c_inv > 0 && cfg.c_inv <= cfg.phi / 2 * (1 + 1e-12)))
    throw PreconditionError("inv: need 0 < c_inv <= phi/2");
  if (cfg.check_precondition) {
    auto sel = controls;
    sel.push_back({r.anc, 0});
    sel.push_back({r.proc, 0});
    sel.push_back({r.flag, 0});
    detail::check_inversion_input(w, s, cfg.phi, sel, r.sys, 1e-9);
  }
  InversionReport rep;
  rep.c_inv = cfg.c_inv;
  const QspRegisters q{r.sys, r.anc, r.proc};
  const Mat2 h = pauli::H();
  s.apply_operator(h, {r.proc}, controls);
  if (cfg.mode == ApplyMode::circuit) {
    auto tup = inverse_tuple(cfg.phi, cfg.eps, cfg.c_inv, cfg.odd, cfg.degree_budget, cfg.require, cfg.x_max);
    rep.degree = tup.sequence.degree();
    rep.synthesis_error = tup.achieved;
    rep.synthesis_met = tup.met;
    apply_phase_sequence(w, tup.sequence, s, cfg.mode, nullptr, q, controls);
  } else {
    const double phi = cfg.phi, c = cfg.c_inv;
    const bool odd = cfg.odd;
    auto f = [=](double th) {
      const double g = std::clamp(inverse_ideal(std::cos(th), phi, c, odd), -1.0, 1.0);
      return Mat2(g * pauli::I() + kI * std::sqrt(1 - g * g) * pauli::Z());
    };
    spectral_apply(w, f, s, nullptr, 0, q, controls);
  }
  s.apply_operator(h, {r.proc}, controls);
  auto fc = controls;
  fc.push_back({r.proc, 0});
  fc.push_back({r.anc, 0});
  s.apply_operator(pauli::X(), {r.flag}, fc);
  rep.charge = inversion_charge(inst, cfg.phi, cfg.eps, ledger ? ledger->constants() : CostConstants{});
  if (ledger) ledger->charge(Primitive::qsp_query, 1, rep.charge);
  return rep;
}

// c_inv^2 sum_k |beta_k|^2 (alpha_eff/sigma_k)^2 over retained singular values.
inline double predicted_flag_weight(const DistributedInstance& inst, const BlockEncoding& be, const RVec& b,
                                    double c_inv) {
  Eigen::JacobiSVD<RMat> sv(inst.A, Eigen::ComputeFullU);
  const RVec beta = sv.matrixU().transpose() * b;
  double s = 0.0;
  for (Eigen::Index k = 0; k < sv.singularValues().size(); ++k) {
    const double sig = sv.singularValues()(k);
    if (sig < inst.delta * (1 - 1e-12) || sig <= 0) continue;
    s += beta(k) * beta(k) * std::pow(be.alpha_eff / sig, 2);
  }
  return c_inv * c_inv * s;
}

}  // namespace dqls
