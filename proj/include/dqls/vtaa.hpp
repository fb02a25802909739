// Copyright 2026 The dqls Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dqls/inversion.hpp"

namespace dqls {

struct VtSchedule {
  int T = 1;
  std::vector<double> phi;  // phi_j = 2^-j, j = 1..T
  double eps = 1e-2;
  double eps_step = 0.0;
  double alpha_eff = 1.0;
  double delta = 1.0;
};

inline VtSchedule make_schedule(double alpha_eff, double delta, double eps) {
  if (!(delta > 0 && delta <= alpha_eff)) throw PreconditionError("schedule: need 0 < delta <= alpha_eff");
  if (!(eps > 0 && eps < 1)) throw PreconditionError("schedule: eps must lie in (0,1)");
  VtSchedule s;
  s.T = static_cast<int>(std::ceil(std::log2(alpha_eff / delta) - 1e-12)) + 1;
  s.T = std::max(s.T, 1);
  for (int j = 1; j <= s.T; ++j) s.phi.push_back(std::ldexp(1.0, -j));
  s.eps = eps;
  s.eps_step = eps / (4.0 * s.T);
  s.alpha_eff = alpha_eff;
  s.delta = delta;
  return s;
}

inline std::string clock_name(int j) { return "C" + std::to_string(j); }

// Low to high: I, Q, P, Mp, Mb, F, K, C1..CT.
inline RegisterLayout vt_layout(const BlockEncoding& be, int T) {
  RegisterLayout lay;
  lay.add("I", ceil_log2(static_cast<std::size_t>(be.sys_dim)));
  lay.add("Q", be.ancillas);
  lay.add("P", 1);
  lay.add("Mp", 1);
  lay.add("Mb", 1);
  lay.add("F", 1);
  lay.add("K", 1);
  for (int j = 1; j <= T; ++j) lay.add(clock_name(j), 1);
  return lay;
}

struct VtStats {
  std::vector<double> t;  // cumulative ledger total after step j
  std::vector<double> p;  // stop probability at step j
  double residual = 0.0;  // weight left with an all-zero clock
  double t_avg = 0.0;
  double t_max = 0.0;
  double t_max_prime = 0.0;
  double p_succ = 0.0;
  double p_succ_predicted = 0.0;
  double p_prep = 1.0;
  double T_U = 0.0;
  double k = 0.0;
  double q = 0.0;  // good amplitude after amplification
  double c_inv = 0.0;
  int iterations = 0;
};

// Weighted RMS stopping time and the derived quantities.
inline VtStats vt_statistics(VtStats s) {
  double acc = 0.0;
  for (std::size_t j = 0; j < s.t.size(); ++j) acc += s.p[j] * s.t[j] * s.t[j];
  s.t_avg = std::sqrt(acc);
  s.t_max = s.t.empty() ? 0.0 : s.t.back();
  s.t_max_prime = s.t.empty() || s.t.front() <= 0 ? 0.0 : 2.0 * s.t_max / s.t.front();
  return s;
}

struct VtOptions {
  ApplyMode mode = ApplyMode::spectral;
  double eps = 1e-2;
  double c_inv = 0.0;  // 0: delta/(2 alpha_eff)
  std::size_t degree_budget = 80;
  // Circuit mode: the promise sigma >= delta restricts where eigenphases sit.
  // The lower edge is rounded down to this grid so tuples can be shared.
  double support_grid = 1.0 / 64.0;
  bool require_synthesis = false;  // false: run best-effort tuples and record a warning
};

// What the variable-time algorithm consumes: a Hermitian encoding, the
// truncation parameter, and the right-hand side. charge_inst supplies r, m, n
// for the ledger.
struct VtProblem {
  const DistributedInstance* charge_inst = nullptr;
  const BlockEncoding* be = nullptr;
  double delta = 0.0;
  RVec b;
};

struct VtRunResult {
  StateVector state;
  VtStats stats;
  VtSchedule schedule;
  LedgerReport ledger;
  Vec output;              // post-selected I-register direction (dilated space)
  double clock_residue = 0.0;  // good-flag weight outside the clean-register sector
  bool failed = false;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<Control> clock_prefix_zero(int j) {
  std::vector<Control> c;
  for (int i = 1; i < j; ++i) c.push_back({clock_name(i), 0});
  return c;
}

inline void toggle_k(StateVector& s, int j) { s.apply_operator(pauli::X(), {"K"}, clock_prefix_zero(j)); }

inline std::vector<Control> clean_sector(int T) {
  std::vector<Control> c{{"F", 1}, {"Q", 0}, {"P", 0}, {"Mp", 0}, {"Mb", 0}, {"K", 0}};
  for (int j = 1; j <= T; ++j) c.push_back({clock_name(j), 0});
  return c;
}

inline double predicted_success(const BlockEncoding& be, const Vec& b, double delta, double c_inv) {
  auto e = eigh(be.target);
  const Vec bb = b.head(e.vectors.rows());
  double s = 0.0;
  for (Eigen::Index u = 0; u < e.values.size(); ++u) {
    const double lam = std::abs(e.values(u));
    if (lam < delta * (1 - 1e-9)) continue;
    s += std::norm(e.vectors.col(u).dot(bb)) * std::pow(be.alpha_eff / lam, 2);
  }
  return c_inv * c_inv * s;
}

}  // namespace detail

inline VtRunResult run_variable_time(const VtProblem& prob, const VtOptions& opt, CommLedger& ledger) {
  if (!prob.be || !prob.charge_inst) throw PreconditionError("run_variable_time: incomplete problem");
  const auto& be = *prob.be;
  const auto& inst = *prob.charge_inst;
  if (!be.hermitian) throw PreconditionError("run_variable_time: needs a Hermitian encoding");
  const Walk w(be);
  VtRunResult res;
  res.schedule = make_schedule(be.alpha_eff, prob.delta, opt.eps);
  const auto& sch = res.schedule;
  const int T = sch.T;

  double x_lo = prob.delta / be.alpha_eff;
  SpectralSupport sup{0.5, 0.0, 1e-3};
  if (opt.mode == ApplyMode::circuit && opt.support_grid > 0) {
    const double q = std::floor(x_lo / opt.support_grid + 1e-9) * opt.support_grid;
    if (q > 0) {
      x_lo = std::min(q, 0.5);
      sup.x_lo = x_lo;
    }
  }
  double c_inv = opt.c_inv > 0 ? opt.c_inv : x_lo / 2.0;
  res.stats.c_inv = c_inv;

  // |b> on I.
  const double nb = prob.b.norm();
  if (!(nb > 0)) throw PreconditionError("run_variable_time: b is zero");
  Vec bvec = Vec::Zero(be.sys_dim);
  if (prob.b.size() > be.sys_dim) throw LayoutError("run_variable_time: b longer than the encoded dimension");
  bvec.head(prob.b.size()) = (prob.b / nb).cast<cplx>();
  res.state = StateVector::with_register(vt_layout(be, T), "I", bvec);
  {
    LedgerTag tag(&ledger, "bprep");
    const double q = charge_b_prep(inst, ledger.constants());
    ledger.charge(Primitive::b_prep, 1, q);
    res.stats.T_U = q;
  }
  auto& s = res.state;
  res.stats.k = s.layout().total();

  GpeRegisters gr{"I", "Q", "Mp", "Mb", "F"};
  InversionRegisters ir{"I", "Q", "P", "F"};
  auto gpe_params = [&](int j) {
    GpeParams g;
    g.phi = 2.0 * sch.phi[static_cast<std::size_t>(j - 1)];
    g.eps = sch.eps_step;
    g.mode = opt.mode;
    g.flag = FlagConvention::vtaa;
    g.support = sup;
    g.degree_budget = opt.degree_budget;
    g.require = opt.require_synthesis;
    return g;
  };
  auto note = [&](const std::string& what, bool met, double err) {
    if (met) return;
    std::ostringstream os;
    os << what << " tuple missed its tolerance within degree " << opt.degree_budget << " (achieved " << err << ")";
    for (auto& x : res.warnings)
      if (x == os.str()) return;
    res.warnings.push_back(os.str());
  };

  for (int j = 1; j <= T; ++j) {
    const std::string cj = clock_name(j);
    gr.flag = cj;
    detail::toggle_k(s, j);
    {
      LedgerTag tag(&ledger, "gpe");
      auto g = gapped_phase_estimation(w, gpe_params(j), s, &ledger, gr, {{"K", 1}});
      note("GPE", g.synthesis_met, std::max(g.gpe_error, g.bm_error));
    }
    detail::toggle_k(s, j);
    {
      LedgerTag tag(&ledger, "inv");
      InversionConfig ic;
      ic.phi = std::max(sch.phi[static_cast<std::size_t>(j - 1)], x_lo);
      ic.eps = sch.eps_step;
      ic.c_inv = c_inv;
      ic.mode = opt.mode;
      ic.degree_budget = opt.degree_budget;
      ic.require = opt.require_synthesis;
      ic.check_precondition = false;
      auto r = inv(inst, w, ic, s, &ledger, ir, {{cj, 1}});
      note("inversion", r.synthesis_met, r.synthesis_error);
    }
    res.stats.p.push_back(s.weight({{cj, 1}}));
    res.stats.t.push_back(ledger.total());
  }
  std::vector<Control> all_zero;
  for (int j = 1; j <= T; ++j) all_zero.push_back({clock_name(j), 0});
  res.stats.residual = s.weight(all_zero);

  // Run the clock-writing part backwards: each eigencomponent carries a single
  // clock state, so this returns the clock to |0...0> on the good branch.
  for (int j = T; j >= 1; --j) {
    gr.flag = clock_name(j);
    detail::toggle_k(s, j);
    LedgerTag tag(&ledger, "gpe");
    gapped_phase_estimation(w, gpe_params(j), s, &ledger, gr, {{"K", 1}}, true);
    detail::toggle_k(s, j);
  }

  res.stats.p_succ = s.weight({{"F", 1}});
  res.stats.p_succ_predicted = detail::predicted_success(be, bvec, prob.delta, c_inv);
  res.stats = vt_statistics(res.stats);
  const auto clean = detail::clean_sector(T);
  res.clock_residue = std::max(0.0, res.stats.p_succ - s.weight(clean));
  if (res.stats.p_succ < 1e-12) {
    res.failed = true;
    res.warnings.push_back("no weight on the good flag: b has no component on retained singular directions");
  } else {
    Vec out = s.register_vector("I", clean);
    const double n = out.norm();
    if (n > 0) out /= n;
    res.output = out;
  }
  res.ledger = ledger.report();
  return res;
}

// Exact two-dimensional rotation on the good/bad split, with the iteration
// count fixed by the known success probability.
inline int amplification_rounds(double p) {
  if (!(p > 0)) throw PreconditionError("amplification: success probability must be positive");
  if (p >= 1.0) return 0;
  const double th = std::asin(std::sqrt(p));
  return std::max(0, static_cast<int>(std::lround(kPi / (4 * th) - 0.5)));
}

inline double amplitude_amplify(VtRunResult& r, CommLedger& ledger) {
  const double p = r.stats.p_succ;
  const int k = amplification_rounds(p);
  const double th = std::asin(std::sqrt(std::min(p, 1.0)));
  const double gs = std::sin((2 * k + 1) * th), bs = std::cos((2 * k + 1) * th);
  auto& st = r.state;
  const auto& lay = st.layout();
  const int fo = lay.offset("F"), qo = lay.offset("Q"), qw = lay.width("Q");
  const std::size_t qmask = ((std::size_t{1} << qw) - 1) << qo;
  Vec& a = st.amplitudes();
  double good = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (((u >> fo) & 1) && !(u & qmask)) good += std::norm(a(i));
  }
  const double bad = std::max(0.0, st.norm() * st.norm() - good);
  const double sg = good > 0 ? gs / std::sqrt(good) : 0.0;
  const double sb = bad > 1e-300 ? bs / std::sqrt(bad) : 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    const bool g = ((u >> fo) & 1) && !(u & qmask);
    a(i) *= g ? sg : sb;
  }
  ledger.repeat(2.0 * k + 1.0);
  r.stats.iterations = k;
  r.stats.q = std::sqrt(gs * gs * (good > 0 ? 1.0 : 0.0));
  r.ledger = ledger.report();
  return gs * gs;
}

// Unit-constant evaluation of the variable-time amplification bound, base-2 logs.
inline double cgj_cost(const VtStats& s) {
  const double lt = s.t_max_prime > 1 ? std::log2(s.t_max_prime) : 0.0;
  const double pre = (s.T_U + s.k) / std::sqrt(s.p_prep);
  const double ps = std::max(s.p_succ, 1e-300);
  return (s.t_max + pre) * std::sqrt(lt) + (s.t_avg + pre) * lt / std::sqrt(ps);
}

}  // namespace dqls
