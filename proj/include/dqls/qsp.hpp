#pragma once

#include "dqls/coordinator.hpp"
#include "dqls/state.hpp"

#include <memory>

namespace dqls {

enum class ApplyMode { circuit, spectral };

inline const char* to_string(ApplyMode m) { return m == ApplyMode::circuit ? "circuit" : "spectral"; }

struct PhaseSequence {
  std::vector<double> angles;  // phi_1 is applied first
  std::size_t degree() const { return angles.size(); }
};

// aI + ibZ + icX + idY
struct Op {
  cplx a, b, c, d;
  static Op from(const Mat2& m) {
    return {(m(0, 0) + m(1, 1)) / 2.0, (m(0, 0) - m(1, 1)) / (2.0 * kI), (m(0, 1) + m(1, 0)) / (2.0 * kI),
            (m(0, 1) - m(1, 0)) / 2.0};
  }
  Mat2 matrix() const {
    Mat2 m;
    m << a + kI * b, kI * c + d, kI * c - d, a - kI * b;
    return m;
  }
};

inline Mat2 rotation(double phi, double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Mat2 m;
  // c I - i s (cos phi X + sin phi Y)
  m << c, -kI * s * std::exp(-kI * phi), -kI * s * std::exp(kI * phi), c;
  return m;
}

inline Mat2 response(const PhaseSequence& seq, double theta) {
  Mat2 m = Mat2::Identity();
  for (double phi : seq.angles) m = rotation(phi, theta) * m;
  return m;
}

class WalkError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

// Walk operator W = (2GG^dag - I) U together with its branch decomposition,
// derived from the eigendecomposition of the encoded Hermitian matrix.
struct WalkSpectrum {
  RVec lambdas;  // eigenvalues of the encoded matrix
  RVec theta;    // branch phases, + branches then - branches
  Mat vectors;   // columns are branch vectors, same order
  Mat phi0;      // G|phi_u>
  Mat phi1;
};

class Walk {
 public:
  explicit Walk(const BlockEncoding& be) : be_(&be) {
    if (!be.hermitian) throw WalkError("walk operator needs a Hermitian block encoding");
    const double tn = spectral_norm(be.target);
    if (be.alpha_eff < 2 * tn * (1 - 1e-12))
      throw WalkError("walk operator: alpha_eff must be at least twice the encoded norm");
    const auto N = be.U.rows();
    const auto sd = be.sys_dim;
    W_ = be.U;
    for (Eigen::Index r = sd; r < N; ++r) W_.row(r) *= -1.0;
    Wd_ = W_.adjoint();

    auto e = eigh(be.target);
    const auto k = sd;
    spec_.lambdas = e.values;
    spec_.phi0 = Mat::Zero(N, k);
    spec_.phi0.topRows(sd) = e.vectors;
    Mat uphi = be.U * spec_.phi0;
    spec_.phi1.resize(N, k);
    spec_.theta.resize(2 * k);
    spec_.vectors.resize(N, 2 * k);
    for (Eigen::Index u = 0; u < k; ++u) {
      const double x = e.values(u) / be.alpha_eff;
      const double s = std::sqrt(std::max(0.0, 1 - x * x));
      Vec v1 = (uphi.col(u) - x * spec_.phi0.col(u)) / s;
      spec_.phi1.col(u) = v1;
      const double th = std::acos(std::clamp(x, -1.0, 1.0));
      spec_.theta(u) = th;
      spec_.theta(u + k) = -th;
      spec_.vectors.col(u) = (spec_.phi0.col(u) + kI * v1) / std::sqrt(2.0);
      spec_.vectors.col(u + k) = (spec_.phi0.col(u) - kI * v1) / std::sqrt(2.0);
    }
  }

  const BlockEncoding& encoding() const { return *be_; }
  const Mat& W() const { return W_; }
  const Mat& Wdag() const { return Wd_; }
  const WalkSpectrum& spectrum() const { return spec_; }
  Eigen::Index dim() const { return W_.rows(); }

 private:
  const BlockEncoding* be_;
  Mat W_, Wd_;
  WalkSpectrum spec_;
};

// Registers that a walk-based QSP acts on: the encoded system, the encoding
// ancillas, and one signal-processing qubit.
struct QspRegisters {
  std::string sys = "I";
  std::string anc = "Q";
  std::string proc = "P";
};

namespace detail {

inline Mat2 rz(double phi) {
  Mat2 m = Mat2::Zero();
  m(0, 0) = std::exp(-kI * phi / 2.0);
  m(1, 1) = std::exp(kI * phi / 2.0);
  return m;
}

inline void apply_2x2_on_halves(Vec& v, Eigen::Index half, const Mat2& g) {
  for (Eigen::Index i = 0; i < half; ++i) {
    const cplx x0 = v(i), x1 = v(i + half);
    v(i) = g(0, 0) * x0 + g(0, 1) * x1;
    v(i + half) = g(1, 0) * x0 + g(1, 1) * x1;
  }
}

// which: 0 = identity, 1 = W, 2 = W^dag
inline void apply_walk_power(Vec& seg, const Walk& w, int which) {
  if (which == 1) seg = w.W() * seg;
  if (which == 2) seg = w.Wdag() * seg;
}

}  // namespace detail

// One controlled factor R_Z(phi) H (|0><0| (x) M0 + |1><1| (x) M1) H R_Z(phi)^dag on
// a slice laid out as [sys, anc, proc].
inline void controlled_factor(Vec& v, const Walk& w, double phi, int m0, int m1) {
  const Eigen::Index N = w.dim();
  const Mat2 h = pauli::H();
  detail::apply_2x2_on_halves(v, N, h * detail::rz(phi).adjoint());
  if (m0) {
    Vec seg = v.head(N);
    detail::apply_walk_power(seg, w, m0);
    v.head(N) = seg;
  }
  if (m1) {
    Vec seg = v.tail(N);
    detail::apply_walk_power(seg, w, m1);
    v.tail(N) = seg;
  }
  detail::apply_2x2_on_halves(v, N, detail::rz(phi) * h);
}

// Full-space matrix of a single factor using W on |1>; the textbook controlled-U_phi.
inline Mat controlled_u_phi(const Mat& W, double phi) {
  const auto N = W.rows();
  Mat out(2 * N, 2 * N);
  Mat id = Mat::Identity(N, N);
  Mat mid = Mat::Zero(2 * N, 2 * N);
  mid.topLeftCorner(N, N) = id;
  mid.bottomRightCorner(N, N) = W;
  Mat2 pre = pauli::H() * detail::rz(phi).adjoint();
  Mat2 post = detail::rz(phi) * pauli::H();
  auto lift = [&](const Mat2& g) {
    Mat m(2 * N, 2 * N);
    m << g(0, 0) * id, g(0, 1) * id, g(1, 0) * id, g(1, 1) * id;
    return m;
  };
  out = lift(post) * mid * lift(pre);
  return out;
}

struct QspOptions {
  bool adjoint = false;     // apply the inverse sequence
  bool reverse_walk = false;  // signal operator W^dag instead of W (response at -theta)
};

class QspError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Circuit mode: odd positions query W on |1>, even positions query W^dag on |0>,
// which cancels the e^{i theta/2} branch phase of each controlled query pairwise.
inline void qsp_circuit_kernel(Vec& v, const Walk& w, const PhaseSequence& seq, const QspOptions& o) {
  const auto l = seq.degree();
  const int fw = o.reverse_walk ? 2 : 1, bw = o.reverse_walk ? 1 : 2;
  auto factor = [&](std::size_t i, bool inv) {
    int m0 = 0, m1 = 0;
    if (i % 2 == 0) m1 = fw; else m0 = bw;
    if (inv) {
      auto flip = [&](int x) { return x == 0 ? 0 : (x == 1 ? 2 : 1); };
      m0 = flip(m0);
      m1 = flip(m1);
    }
    controlled_factor(v, w, seq.angles[i], m0, m1);
  };
  if (!o.adjoint)
    for (std::size_t i = 0; i < l; ++i) factor(i, false);
  else
    for (std::size_t i = l; i-- > 0;) factor(i, true);
}

// Spectral mode: any theta -> 2x2 response applied on the branch subspace;
// the orthogonal complement of the branch span is left untouched.
inline void spectral_kernel(Vec& v, const Walk& w, const std::function<Mat2(double)>& f) {
  const auto& sp = w.spectrum();
  const Eigen::Index N = w.dim();
  const Eigen::Index nb = sp.vectors.cols();
  Eigen::MatrixXcd psi(N, 2);
  psi.col(0) = v.head(N);
  psi.col(1) = v.tail(N);
  Eigen::MatrixXcd c = sp.vectors.adjoint() * psi;
  Eigen::MatrixXcd c2(nb, 2);
  for (Eigen::Index b = 0; b < nb; ++b) {
    const Mat2 g = f(sp.theta(b));
    c2(b, 0) = g(0, 0) * c(b, 0) + g(0, 1) * c(b, 1);
    c2(b, 1) = g(1, 0) * c(b, 0) + g(1, 1) * c(b, 1);
  }
  psi += sp.vectors * (c2 - c);
  v.head(N) = psi.col(0);
  v.tail(N) = psi.col(1);
}

inline void check_qsp_layout(const StateVector& s, const Walk& w, const QspRegisters& r) {
  const auto& lay = s.layout();
  const auto& be = w.encoding();
  if ((Eigen::Index{1} << lay.width(r.sys)) != be.sys_dim)
    throw LayoutError("register " + r.sys + " does not match the encoded dimension");
  if (lay.width(r.anc) != be.ancillas) throw LayoutError("register " + r.anc + " does not match encoding ancillas");
  if (lay.width(r.proc) != 1) throw LayoutError("processing register must be one qubit");
}

inline void apply_phase_sequence(const Walk& w, const PhaseSequence& seq, StateVector& s, ApplyMode mode,
                                 CommLedger* ledger, const QspRegisters& regs = {},
                                 const std::vector<Control>& controls = {}, QspOptions o = {}) {
  check_qsp_layout(s, w, regs);
  if (mode == ApplyMode::circuit) {
    if (seq.degree() % 2)
      throw QspError("circuit mode needs an even number of phases so the branch phases cancel");
    s.apply_kernel({regs.sys, regs.anc, regs.proc}, controls,
                   [&](Vec& v) { qsp_circuit_kernel(v, w, seq, o); });
  } else {
    auto f = [&](double th) {
      Mat2 m = response(seq, o.reverse_walk ? -th : th);
      return o.adjoint ? Mat2(m.adjoint()) : m;
    };
    s.apply_kernel({regs.sys, regs.anc, regs.proc}, controls, [&](Vec& v) { spectral_kernel(v, w, f); });
  }
  w.encoding().charge(ledger, seq.degree());
}

inline void spectral_apply(const Walk& w, const std::function<Mat2(double)>& f, StateVector& s,
                           CommLedger* ledger, std::size_t charge_degree, const QspRegisters& regs = {},
                           const std::vector<Control>& controls = {}) {
  check_qsp_layout(s, w, regs);
  s.apply_kernel({regs.sys, regs.anc, regs.proc}, controls, [&](Vec& v) { spectral_kernel(v, w, f); });
  w.encoding().charge(ledger, charge_degree);
}

}  // namespace dqls
