#pragma once

#include "dqls/qsp.hpp"

#include <unsupported/Eigen/FFT>

#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <sstream>

namespace dqls {

// One declared interval of a response target. Full bands constrain the whole
// 2x2 response; scalar bands constrain only <+|F|+>.
struct TargetBand {
  double lo = 0.0, hi = 0.0;
  std::function<Mat2(double)> full;
  std::function<cplx(double)> scalar;
  double tolerance = 0.0;
  bool is_scalar() const { return static_cast<bool>(scalar); }
};

struct PiecewiseTarget {
  std::vector<TargetBand> bands;
  std::size_t degree_budget = 80;
};

struct SynthesisResult {
  PhaseSequence sequence;
  PiecewiseTarget target;
  double achieved = 0.0;  // worst band error on the verification grid
  double tolerance = 0.0;
  bool met = false;
  std::string kind;
};

class SynthesisError : public std::runtime_error {
 public:
  SynthesisError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

inline cplx plus_element(const Mat2& m) { return 0.5 * (m(0, 0) + m(0, 1) + m(1, 0) + m(1, 1)); }

inline double band_error(const TargetBand& b, const Mat2& f, double th) {
  if (b.is_scalar()) return std::abs(plus_element(f) - b.scalar(th));
  Eigen::JacobiSVD<Mat2> s(f - b.full(th));
  return s.singularValues()(0);
}

// 4096 uniform points per band plus both endpoints.
inline double verify(const PhaseSequence& seq, const PiecewiseTarget& t, std::size_t pts = 4096) {
  double worst = 0.0;
  for (auto& b : t.bands) {
    for (std::size_t i = 0; i <= pts + 1; ++i) {
      const double th = b.lo + (b.hi - b.lo) * double(i) / double(pts + 1);
      worst = std::max(worst, band_error(b, response(seq, th), th) / std::max(b.tolerance, 1e-300) * 1.0);
    }
  }
  return worst;  // in units of tolerance
}

inline double verify_abs(const PhaseSequence& seq, const PiecewiseTarget& t, std::size_t pts = 4096) {
  double worst = 0.0;
  for (auto& b : t.bands)
    for (std::size_t i = 0; i <= pts + 1; ++i) {
      const double th = b.lo + (b.hi - b.lo) * double(i) / double(pts + 1);
      worst = std::max(worst, band_error(b, response(seq, th), th));
    }
  return worst;
}

namespace synth {

// Smooth design for the whole circle. Full designs return the X-frame diagonal
// phase e^{i beta}; scalar designs return a real value.
struct Design {
  std::function<cplx(double)> p;  // theta -> <0|HFH|0>
  std::function<Mat2(double)> full;  // theta -> designed response (gap guidance)
  bool scalar = false;
};

// Real Laurent coefficients a_k (k = -l, -l+2, ..., l) of the design in w = e^{i theta/2}.
inline std::vector<double> laurent_coefficients(const Design& d, int l, int N = 4096) {
  while (N < 8 * l) N *= 2;
  std::vector<cplx> vals(N);
  const int sgn = (l % 2) ? -1 : 1;
  for (int i = 0; i < N; ++i) {
    double s = -kPi + 2 * kPi * i / N;
    double f = 1.0;
    if (s > kPi / 2) { s -= kPi; f = sgn; }
    if (s <= -kPi / 2) { s += kPi; f = sgn; }
    vals[i] = f * d.p(2 * s);
  }
  std::vector<double> a(l + 1);
  for (int j = 0; j <= l; ++j) {
    const int k = 2 * j - l;
    cplx acc = 0;
    for (int i = 0; i < N; ++i) {
      const double s = -kPi + 2 * kPi * i / N;
      acc += vals[i] * std::exp(-kI * double(k) * s);
    }
    a[j] = (acc / double(N)).real();
  }
  return a;
}

inline cplx laurent_eval(const std::vector<double>& a, int l, double theta) {
  cplx acc = 0;
  for (int j = 0; j <= l; ++j) acc += a[j] * std::exp(kI * double(2 * j - l) * theta / 2.0);
  return acc;
}

// Complementary real coefficients r with |p|^2 + |r|^2 = 1 on the circle.
inline std::vector<double> complete(const std::vector<double>& a, int l) {
  int N = 1 << 14;
  while (N < 32 * (l + 1)) N *= 2;
  Eigen::FFT<double> fft;
  std::vector<cplx> pc(N, 0.0), pu, lg(N), cep, ch(N, 0.0), hu, hv(N), hc;
  for (int j = 0; j <= l; ++j) pc[j] = a[j];
  fft.inv(pu, pc);
  for (int t = 0; t < N; ++t) {
    const double g = 1.0 - std::norm(pu[t] * double(N));
    if (!(g > 0)) throw SynthesisError("completion: design exceeds unit modulus", 1.0);
    lg[t] = std::log(g);
  }
  fft.fwd(cep, lg);
  for (auto& x : cep) x /= double(N);
  ch[0] = cep[0] / 2.0;
  for (int j = 1; j < N / 2; ++j) ch[j] = cep[j];
  fft.inv(hu, ch);
  for (int t = 0; t < N; ++t) hv[t] = std::exp(hu[t] * double(N));
  fft.fwd(hc, hv);
  std::vector<double> r(l + 1);
  for (int j = 0; j <= l; ++j) r[j] = (hc[j] / double(N)).real();
  return r;
}

// Peel rotation factors off the X-frame matrix polynomial [[p, ir], [ir*, p*]].
inline std::vector<double> strip(const std::vector<double>& a, const std::vector<double>& r, int l) {
  std::vector<Mat2> C(l + 1);
  for (int j = 0; j <= l; ++j) {
    const int jj = l - j;
    C[j] << a[j], kI * r[j], kI * r[jj], a[jj];
  }
  std::vector<double> phis;
  int deg = l;
  while (deg > 0) {
    const Mat2& top = C.back();
    const Mat2& bot = C.front();
    Eigen::Vector2cd v;
    if (top.norm() >= bot.norm()) {
      Eigen::JacobiSVD<Mat2> s(top, Eigen::ComputeFullV);
      v = s.matrixV().col(0);
    } else {
      Eigen::JacobiSVD<Mat2> s(bot, Eigen::ComputeFullV);
      v = s.matrixV().col(1);
    }
    Mat2 P = v * v.adjoint();
    const double cphi = 1.0 - 2.0 * P(0, 0).real();
    const double sphi = (2.0 * kI * P(0, 1)).real();
    phis.push_back(std::atan2(sphi, cphi));
    Mat2 Q = Mat2::Identity() - P;
    std::vector<Mat2> Cn(deg, Mat2::Zero());
    for (int j = 0; j <= deg; ++j) {
      // C_k w^k (w^-1 P + w Q): index j -> j-1 (P part), j (Q part) in the new degree.
      if (j - 1 >= 0) Cn[j - 1] += C[j] * P;
      if (j < deg) Cn[j] += C[j] * Q;
    }
    C = std::move(Cn);
    --deg;
  }
  return phis;
}

struct Sample {
  double theta;
  double weight;
  const TargetBand* band;      // null means gap guidance
  std::function<Mat2(double)> guide;
};

inline std::vector<Sample> samples(const PiecewiseTarget& t, const Design& d, int l, double gap_weight) {
  std::vector<Sample> out;
  const int nb = std::max(24, 3 * l / 2);
  for (auto& b : t.bands) {
    const double w = 1.0 / std::max(b.tolerance, 1e-300);
    for (int i = -1; i <= nb; ++i) {
      // Chebyshev nodes plus both endpoints
      const double x = i < 0 ? 0.0 : (i == nb ? 1.0 : 0.5 * (1 - std::cos(kPi * (i + 0.5) / nb)));
      out.push_back({b.lo + (b.hi - b.lo) * x, w, &b, {}});
    }
  }
  if (gap_weight > 0) {
    const int ng = std::max(32, 2 * l);
    for (int i = 0; i < ng; ++i) {
      const double th = -kPi + 2 * kPi * (i + 0.5) / ng;
      bool inside = false;
      for (auto& b : t.bands) inside |= (th >= b.lo && th <= b.hi);
      if (!inside) out.push_back({th, gap_weight, nullptr, d.full});
    }
  }
  return out;
}

inline int residual_size(const std::vector<Sample>& s) {
  int n = 0;
  for (auto& x : s) n += (x.band && x.band->is_scalar()) ? 2 : 8;
  return n;
}

inline Mat2 d_rotation(double phi, double theta) {
  const double s = std::sin(theta / 2);
  Mat2 m;
  // -i s (-sin phi X + cos phi Y)
  const cplx e = -kI * s;
  m << 0, e * (-std::sin(phi) - kI * std::cos(phi)), e * (-std::sin(phi) + kI * std::cos(phi)), 0;
  return m;
}

inline void residual_and_jacobian(const std::vector<double>& phis, const std::vector<Sample>& ss, RVec& res,
                                  RMat* jac) {
  const int l = static_cast<int>(phis.size());
  const int R = residual_size(ss);
  res.resize(R);
  if (jac) jac->resize(R, l);
  std::vector<Mat2> rot(l), pre(l + 1), suf(l + 1);
  int row = 0;
  for (auto& smp : ss) {
    const double th = smp.theta;
    for (int i = 0; i < l; ++i) rot[i] = rotation(phis[i], th);
    pre[0] = Mat2::Identity();
    for (int i = 0; i < l; ++i) pre[i + 1] = rot[i] * pre[i];
    suf[l] = Mat2::Identity();
    for (int i = l - 1; i >= 0; --i) suf[i] = suf[i + 1] * rot[i];
    const Mat2& U = pre[l];
    const bool sc = smp.band && smp.band->is_scalar();
    const double w = smp.weight;
    if (sc) {
      const cplx d = plus_element(U) - smp.band->scalar(th);
      res(row) = w * d.real();
      res(row + 1) = w * d.imag();
      if (jac)
        for (int i = 0; i < l; ++i) {
          const cplx g = plus_element(suf[i + 1] * d_rotation(phis[i], th) * pre[i]);
          (*jac)(row, i) = w * g.real();
          (*jac)(row + 1, i) = w * g.imag();
        }
      row += 2;
    } else {
      const Mat2 T = smp.band ? smp.band->full(th) : smp.guide(th);
      const Mat2 D = U - T;
      for (int e = 0; e < 4; ++e) {
        res(row + 2 * e) = w * D(e / 2, e % 2).real();
        res(row + 2 * e + 1) = w * D(e / 2, e % 2).imag();
      }
      if (jac)
        for (int i = 0; i < l; ++i) {
          const Mat2 G = suf[i + 1] * d_rotation(phis[i], th) * pre[i];
          for (int e = 0; e < 4; ++e) {
            (*jac)(row + 2 * e, i) = w * G(e / 2, e % 2).real();
            (*jac)(row + 2 * e + 1, i) = w * G(e / 2, e % 2).imag();
          }
        }
      row += 8;
    }
  }
}

// Levenberg-Marquardt on the sampled residual.
inline std::vector<double> polish(std::vector<double> phis, const std::vector<Sample>& ss, int max_iter = 300) {
  RVec r, rn;
  RMat J;
  residual_and_jacobian(phis, ss, r, &J);
  double cost = r.squaredNorm();
  double mu = 1e-3;
  const int l = static_cast<int>(phis.size());
  for (int it = 0; it < max_iter; ++it) {
    RMat A = J.transpose() * J;
    RVec g = J.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 12; ++tries) {
      RMat M = A;
      for (int i = 0; i < l; ++i) M(i, i) += mu * (A(i, i) + 1e-9);
      RVec step = -M.ldlt().solve(g);
      std::vector<double> cand(phis);
      for (int i = 0; i < l; ++i) cand[i] += step(i);
      residual_and_jacobian(cand, ss, rn, nullptr);
      const double cn = rn.squaredNorm();
      if (cn < cost) {
        const double rel = (cost - cn) / std::max(cost, 1e-300);
        phis = cand;
        cost = cn;
        mu = std::max(mu / 3, 1e-12);
        improved = true;
        if (rel < 1e-10) return phis;
        break;
      }
      mu *= 4;
    }
    if (!improved) break;
    residual_and_jacobian(phis, ss, r, &J);
  }
  return phis;
}

// Unweighted error of each sample, in the order of ss.
inline std::vector<double> sample_errors(const std::vector<double>& phis, const std::vector<Sample>& ss) {
  RVec r;
  residual_and_jacobian(phis, ss, r, nullptr);
  std::vector<double> e;
  e.reserve(ss.size());
  int row = 0;
  for (auto& x : ss) {
    const int k = (x.band && x.band->is_scalar()) ? 2 : 8;
    e.push_back(r.segment(row, k).norm() / x.weight);
    row += k;
  }
  return e;
}

// Lawson-style reweighting: push the least-squares fit towards the minimax
// one by growing weights where the error is largest.
inline std::vector<double> minimax_refine(std::vector<double> phis, std::vector<Sample> ss,
                                          const PiecewiseTarget& t, int rounds = 6) {
  std::vector<double> best = phis;
  double best_ratio = verify(PhaseSequence{phis}, t, 1024);
  std::vector<double> base(ss.size());
  for (std::size_t i = 0; i < ss.size(); ++i) base[i] = ss[i].weight;
  for (int k = 0; k < rounds; ++k) {
    auto e = sample_errors(phis, ss);
    double mx = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) mx = std::max(mx, e[i] * base[i]);
    if (!(mx > 0)) break;
    for (std::size_t i = 0; i < ss.size(); ++i) ss[i].weight *= std::sqrt(0.05 + e[i] * base[i] / mx);
    phis = polish(phis, ss, 60);
    const double ratio = verify(PhaseSequence{phis}, t, 1024);
    if (ratio < best_ratio) {
      best_ratio = ratio;
      best = phis;
    }
    if (best_ratio <= 0.9) break;
  }
  return best;
}

inline std::vector<double> construct(const Design& d, int l, double eta = 1e-3) {
  auto a = laurent_coefficients(d, l);
  double mx = 0.0;
  const int G = std::max(4096, 64 * l);
  for (int i = 0; i < G; ++i) mx = std::max(mx, std::abs(laurent_eval(a, l, -2 * kPi + 4 * kPi * i / G)));
  const double sc = (1 - eta) / std::max(mx, 1.0);
  for (auto& x : a) x *= sc;
  auto r = complete(a, l);
  return strip(a, r, l);
}

}  // namespace synth

struct SynthesisOptions {
  int min_degree = 2;
  int step = 4;
  double gap_weight = 0.0;
  double refine_window = 30.0;  // minimax refinement when within this factor of tolerance
  bool require = true;  // throw when the budget cannot meet the tolerance
};

// Degree search over even degrees: try the budget first; if it meets every
// band tolerance, bisect down to the smallest degree that still does (errors
// are close to monotone in degree). Otherwise the budget attempt is the best
// effort.
inline SynthesisResult synthesize(const PiecewiseTarget& t, const synth::Design& d, const std::string& kind,
                                  const SynthesisOptions& o = {}) {
  SynthesisResult best;
  best.target = t;
  best.kind = kind;
  best.achieved = std::numeric_limits<double>::infinity();
  double tol = std::numeric_limits<double>::infinity();
  for (auto& b : t.bands) tol = std::min(tol, b.tolerance);
  best.tolerance = tol;
  int l0 = std::max(2, o.min_degree);
  if (l0 % 2) ++l0;
  std::vector<int> degrees;
  for (int l = l0; l <= static_cast<int>(t.degree_budget); l += o.step) degrees.push_back(l);
  if (degrees.empty()) throw PreconditionError(kind + ": degree budget below the minimum degree");

  std::map<int, std::pair<double, std::vector<double>>> tried;
  auto attempt = [&](int l) -> double {
    auto it = tried.find(l);
    if (it != tried.end()) return it->second.first;
    std::vector<double> phis;
    double ratio = std::numeric_limits<double>::infinity();
    try {
      phis = synth::construct(d, l);
      auto ss = synth::samples(t, d, l, o.gap_weight);
      phis = synth::polish(phis, ss);
      ratio = verify(PhaseSequence{phis}, t);
      if (ratio > 1.0 && ratio < o.refine_window) {
        phis = synth::minimax_refine(phis, ss, t);
        ratio = verify(PhaseSequence{phis}, t);
      }
    } catch (const SynthesisError&) {
    }
    if (std::getenv("DQLS_SYNTH_TRACE")) std::fprintf(stderr, "[synth] %s l=%d ratio=%g\n", kind.c_str(), l, ratio);
    tried[l] = {ratio, phis};
    return ratio;
  };

  std::size_t lo = 0, hi = degrees.size() - 1;
  if (attempt(degrees[hi]) <= 1.0) {
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (attempt(degrees[mid]) <= 1.0)
        hi = mid;
      else
        lo = mid + 1;
    }
    const auto& r = tried[degrees[hi]];
    best.sequence = PhaseSequence{r.second};
    best.achieved = verify_abs(best.sequence, t);
    best.met = true;
    return best;
  }
  const auto& r = tried[degrees.back()];
  if (!r.second.empty()) {
    best.sequence = PhaseSequence{r.second};
    best.achieved = verify_abs(best.sequence, t);
  }
  if (o.require) {
    std::ostringstream os;
    os << kind << ": degree budget " << t.degree_budget << " reached, best error " << best.achieved
       << " vs tolerance " << tol;
    throw SynthesisError(os.str(), best.achieved);
  }
  return best;
}

namespace detail {
inline std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}
inline std::map<std::string, SynthesisResult>& cache() {
  static std::map<std::string, SynthesisResult> c;
  return c;
}
template <class F>
SynthesisResult cached(const std::string& key, F&& make) {
  {
    std::lock_guard<std::mutex> g(cache_mutex());
    auto it = cache().find(key);
    if (it != cache().end()) return it->second;
  }
  SynthesisResult r = make();
  std::lock_guard<std::mutex> g(cache_mutex());
  cache().emplace(key, r);
  return r;
}
inline Mat2 xrot(double beta) { return std::cos(beta) * pauli::I() + kI * std::sin(beta) * pauli::X(); }
}  // namespace detail

// Targets iX on [pi/3, 2pi/3] and -iX on the mirror interval.
inline PiecewiseTarget sign_target(double eps, std::size_t budget = 80) {
  PiecewiseTarget t;
  t.degree_budget = budget;
  const Mat2 ix = kI * pauli::X();
  t.bands.push_back({kPi / 3, 2 * kPi / 3, [ix](double) { return ix; }, {}, eps});
  t.bands.push_back({-2 * kPi / 3, -kPi / 3, [ix](double) { return Mat2(-ix); }, {}, eps});
  return t;
}

inline SynthesisResult sign_tuple(double eps, std::size_t budget = 80, bool require = true) {
  if (!(eps > 0 && eps < 1)) throw PreconditionError("sign_tuple: eps must lie in (0,1)");
  std::ostringstream key;
  key.precision(17);
  key << "sign/" << eps << "/" << budget << "/" << require;
  return detail::cached(key.str(), [&] {
    const double k = 1.0 + 0.9 * std::sqrt(std::log(1.0 / eps));
    auto beta = [k](double th) { return kPi / 2 * std::erf(k * std::sin(th)); };
    synth::Design d;
    d.p = [beta](double th) { return std::exp(kI * beta(th)); };
    d.full = [beta](double th) { return detail::xrot(beta(th)); };
    SynthesisOptions o;
    o.require = require;
    return synthesize(sign_target(eps, budget), d, "sign", o);
  });
}

struct GpeBands {
  double a1, a2;  // arccos(phi), arccos(phi/rho)
};

inline GpeBands gpe_bands(double phi, double rho) {
  return {std::acos(std::min(phi, 1.0)), std::acos(std::min(phi / rho, 1.0))};
}

// Where eigenphases may sit, in x = lambda/alpha_eff. With x_lo > 0 only
// |x| <= zero_width and x_lo <= |x| <= x_max are constrained; otherwise all of
// |x| <= x_max is.
struct SpectralSupport {
  double x_max = 1.0;
  double x_lo = 0.0;
  double zero_width = 1e-3;
};

// Bands on theta in (0, pi) and their mirror images.
inline PiecewiseTarget gpe_target(double phi, double rho, double eps, std::size_t budget = 80,
                                  const SpectralSupport& sup = {}) {
  PiecewiseTarget t;
  t.degree_budget = budget;
  const Mat2 id = pauli::I(), ix = kI * pauli::X();
  const double xm = std::min(sup.x_max, 1.0);
  // Positive-x interval [a, b] maps to theta in [acos b, acos a]; the negative
  // mirror to [pi - acos a, pi - acos b]. Both get copied onto theta < 0 with the
  // conjugate target.
  // Zero-width bands are kept: x = x_max may be a single guaranteed point.
  auto add = [&](double lo, double hi, Mat2 m) {
    if (hi < lo) return;
    t.bands.push_back({lo, hi, [m](double) { return m; }, {}, eps});
    const Mat2 mc = m.conjugate();
    t.bands.push_back({-hi, -lo, [mc](double) { return mc; }, {}, eps});
  };
  auto add_x = [&](double a, double b, Mat2 pos, Mat2 neg) {
    a = std::max(a, 0.0);
    b = std::min(b, xm);
    if (b < a) return;
    add(std::acos(b), std::acos(a), pos);
    add(kPi - std::acos(a), kPi - std::acos(b), neg);
  };
  auto add_mid = [&](double c) {
    c = std::min(c, xm);
    add(std::acos(c), kPi - std::acos(c), ix);
  };
  const double mid = phi / rho;
  if (sup.x_lo <= 0.0) {
    add_x(phi, xm, id, -id);
    add_mid(mid);
  } else {
    add_x(std::max(phi, sup.x_lo), xm, id, -id);
    add_mid(std::min(mid, sup.zero_width));
    add_x(sup.x_lo, mid, ix, ix);
  }
  return t;
}

inline SynthesisResult gpe_tuple(double phi, double rho, double eps, std::size_t budget = 80, bool require = true,
                                 const SpectralSupport& sup = {}) {
  if (!(phi > 0 && phi <= 1)) throw PreconditionError("gpe_tuple: phi must lie in (0,1]");
  if (!(rho > 1)) throw PreconditionError("gpe_tuple: rho must exceed 1");
  if (!(eps > 0)) throw PreconditionError("gpe_tuple: eps must be positive");
  std::ostringstream key;
  key.precision(17);
  key << "gpe/" << phi << "/" << rho << "/" << eps << "/" << budget << "/" << require << "/" << sup.x_max << "/" << sup.x_lo << "/"
      << sup.zero_width;
  return detail::cached(key.str(), [&] {
    // Put the design's transitions in the middle of the gaps actually left
    // between constrained bands.
    const double xm = std::min(sup.x_max, 1.0);
    const double mid = phi / rho;
    double x_mid = std::min(mid, xm);
    if (sup.x_lo > 0.0 && sup.x_lo > mid) x_mid = std::min(mid, sup.zero_width);
    double x_big = std::max(phi, sup.x_lo);
    if (x_big > xm) x_big = 0.5 * (1.0 + x_mid);
    const double e1 = std::acos(std::min(x_big, 1.0)), e2 = std::acos(x_mid);
    const double t1 = 0.5 * (e1 + e2), w = 0.5 * (e2 - e1), t2 = kPi - t1;
    const double k = (1.0 + 0.9 * std::sqrt(std::log(1.0 / eps))) / w;
    auto beta = [=](double th) {
      return kPi / 4 *
             (std::erf(k * (th - t1)) + std::erf(k * (th + t1)) + std::erf(k * (th - t2)) + std::erf(k * (th + t2)));
    };
    synth::Design d;
    d.p = [beta](double th) { return std::exp(kI * beta(th)); };
    d.full = [beta](double th) { return detail::xrot(beta(th)); };
    SynthesisOptions o;
    o.require = require;
    o.min_degree = 4;
    return synthesize(gpe_target(phi, rho, eps, budget, sup), d, "gpe", o);
  });
}

// Truncated inverse c/x (odd) or c/|x| (even) in x = cos(theta), constrained on
// phi <= |x| <= x_max, realized in <+|F|+>.
inline double inverse_profile(double x, double phi, double c, bool odd) {
  const double x0 = 0.75 * phi, k = 10.0 / phi;
  double g;
  if (std::abs(x) < 1e-12)
    g = c * k * 2.0 / std::sqrt(kPi) * std::exp(-k * k * x0 * x0);
  else
    g = c * (std::erf(k * (x - x0)) + std::erf(k * (x + x0))) / (2.0 * x);
  if (!odd) g *= std::erf(k * x);
  return g;
}

inline PiecewiseTarget inverse_target(double phi, double eps, double c_inv, bool odd, std::size_t budget = 80,
                                      double x_max = 0.5) {
  PiecewiseTarget t;
  t.degree_budget = budget;
  const double tol = eps * c_inv / phi;
  auto f = [c_inv, odd](double th) {
    const double x = std::cos(th);
    return cplx(odd ? c_inv / x : c_inv / std::abs(x), 0.0);
  };
  const double lo = std::acos(std::min(x_max, 1.0)), hi = std::acos(phi);
  // phi = x_max leaves a single guaranteed point, which is kept.
  if (hi >= lo - 1e-12) {
    t.bands.push_back({lo, hi, {}, f, tol});
    t.bands.push_back({kPi - hi, kPi - lo, {}, f, tol});
    t.bands.push_back({-hi, -lo, {}, f, tol});
    t.bands.push_back({-(kPi - lo), -(kPi - hi), {}, f, tol});
  }
  // Null-space components (theta = +-pi/2) must not leak into the flag.
  auto zero = [](double) { return cplx(0.0, 0.0); };
  const double zw = std::acos(1e-3);
  t.bands.push_back({zw, kPi - zw, {}, zero, tol});
  t.bands.push_back({-(kPi - zw), -zw, {}, zero, tol});
  return t;
}

inline SynthesisResult inverse_tuple(double phi, double eps, double c_inv, bool odd = true,
                                     std::size_t budget = 80, bool require = true, double x_max = 0.5) {
  if (!(phi > 0 && phi < 1)) throw PreconditionError("inverse_tuple: phi must lie in (0,1)");
  if (!(c_inv > 0 && c_inv <= phi / 2 * (1 + 1e-12)))
    throw PreconditionError("inverse_tuple: need 0 < c_inv <= phi/2");
  std::ostringstream key;
  key.precision(17);
  key << "inv/" << phi << "/" << eps << "/" << c_inv << "/" << odd << "/" << budget << "/" << require << "/"
      << x_max;
  return detail::cached(key.str(), [&] {
    const double xm = 0.5 * (x_max + 1.0);
    auto prof = [=](double th) {
      const double x = std::cos(th);
      const double s = 0.5 * (1 + std::erf(8.0 * (std::abs(x) - xm)));
      const double edge = odd ? (x >= 0 ? 1.0 : -1.0) : 1.0;
      return (1 - s) * inverse_profile(x, phi, c_inv, odd) + s * edge;
    };
    synth::Design d;
    d.scalar = true;
    d.p = [prof](double th) { return cplx(prof(th), 0.0); };
    // Gap guidance: real <+|F|+> with the rest put on Z.
    d.full = [prof](double th) {
      const double v = std::clamp(prof(th), -1.0, 1.0);
      return Mat2(v * pauli::I() + kI * std::sqrt(1 - v * v) * pauli::Z());
    };
    SynthesisOptions o;
    o.require = require;
    o.min_degree = 4;
    o.gap_weight = 0.0;
    return synthesize(inverse_target(phi, eps, c_inv, odd, budget, x_max), d, odd ? "inverse_odd" : "inverse_even",
                      o);
  });
}

}  // namespace dqls
