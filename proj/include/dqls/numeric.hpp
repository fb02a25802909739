// Copyright 2026 The dqls Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace dqls {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using Mat2 = Eigen::Matrix2cd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

// One place for the tolerances the tests lean on.
struct NumericPolicy {
  double residual = 1e-9;
  double unitarity = 1e-10;
  double block = 1e-10;
  double norm = 1e-9;
};

inline const NumericPolicy& policy() {
  static const NumericPolicy p{};
  return p;
}

class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LayoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline int ceil_log2(std::size_t x) {
  int k = 0;
  while ((std::size_t{1} << k) < x) ++k;
  return k;
}

inline std::size_t pow2_at_least(std::size_t x) {
  return std::size_t{1} << ceil_log2(std::max<std::size_t>(x, 1));
}

struct SpectralData {
  RVec singular_values;  // nonincreasing
  Mat left;              // columns x_k
  Mat right;             // columns y_k
};

inline SpectralData svd(const Mat& m) {
  if (!m.allFinite()) throw PreconditionError("svd: non-finite entries");
  Eigen::JacobiSVD<Mat> s(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SpectralData out;
  out.singular_values = s.singularValues();
  out.left = s.matrixU();
  out.right = s.matrixV();
  return out;
}

inline double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> s(m);
  return s.singularValues()(0);
}

inline double reconstruction_residual(const Mat& m, const SpectralData& sd) {
  Mat r = m;
  const auto k = sd.singular_values.size();
  for (Eigen::Index i = 0; i < k; ++i)
    r -= sd.singular_values(i) * sd.left.col(i) * sd.right.col(i).adjoint();
  return spectral_norm(r);
}

struct HermitianEigen {
  RVec values;  // ascending
  Mat vectors;
};

inline HermitianEigen eigh(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigh: no convergence");
  return {es.eigenvalues(), es.eigenvectors()};
}

inline Mat hermitian_dilation(const Mat& a) {
  const auto m = a.rows(), n = a.cols();
  Mat d = Mat::Zero(m + n, m + n);
  d.topRightCorner(m, n) = a;
  d.bottomLeftCorner(n, m) = a.adjoint();
  return d;
}

// Principal square root of a PSD matrix; tiny negative eigenvalues are clipped.
inline Mat psd_sqrt(const Mat& h) {
  auto e = eigh(0.5 * (h + h.adjoint()));
  RVec s = e.values.cwiseMax(0.0).cwiseSqrt();
  return e.vectors * s.asDiagonal() * e.vectors.adjoint();
}

inline bool is_hermitian(const Mat& m, double tol) {
  return m.rows() == m.cols() && (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline double unitarity_defect(const Mat& u) {
  return (u.adjoint() * u - Mat::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

// [[C, S1], [S2, -C^dag]] with S1 = sqrt(I - CC^dag), S2 = sqrt(I - C^dag C) after scaling.
// Square inputs only; callers pad first.
inline Mat unitary_completion(const Mat& c, double scale) {
  if (c.rows() != c.cols()) throw PreconditionError("unitary_completion: square input required");
  if (!(scale > 0)) throw PreconditionError("unitary_completion: scale must be positive");
  const double nrm = spectral_norm(c);
  if (nrm > scale * (1 + 1e-12))
    throw PreconditionError("unitary_completion: scale below operator norm");
  const auto d = c.rows();
  Mat m = c / scale;
  Mat id = Mat::Identity(d, d);
  Mat u(2 * d, 2 * d);
  const bool herm = is_hermitian(m, 1e-14);
  if (herm) {
    m = 0.5 * (m + m.adjoint());
    Mat s = psd_sqrt(id - m * m);
    u << m, s, s, -m;
  } else {
    // Polar form keeps M^dag sqrt(I - MM^dag) = sqrt(I - M^dag M) M^dag exact.
    Eigen::JacobiSVD<Mat> sv(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    RVec sig = sv.singularValues().cwiseMin(1.0);
    RVec cs = (RVec::Ones(d) - sig.cwiseAbs2()).cwiseMax(0.0).cwiseSqrt();
    Mat uu = sv.matrixU(), vv = sv.matrixV();
    Mat s1 = uu * cs.asDiagonal() * uu.adjoint();
    Mat s2 = vv * cs.asDiagonal() * vv.adjoint();
    u << m, s1, s2, -m.adjoint();
  }
  return u;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

inline Mat pad(const Mat& a, Eigen::Index rows, Eigen::Index cols) {
  Mat p = Mat::Zero(rows, cols);
  p.topLeftCorner(a.rows(), a.cols()) = a;
  return p;
}

namespace pauli {
inline Mat2 I() { return Mat2::Identity(); }
inline Mat2 X() { Mat2 m; m << 0, 1, 1, 0; return m; }
inline Mat2 Y() { Mat2 m; m << 0, -kI, kI, 0; return m; }
inline Mat2 Z() { Mat2 m; m << 1, 0, 0, -1; return m; }
inline Mat2 H() {
  Mat2 m;
  const double s = 1.0 / std::sqrt(2.0);
  m << s, s, s, -s;
  return m;
}
}  // namespace pauli

inline double fidelity(const Vec& a, const Vec& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0 || nb == 0) return 0.0;
  return std::abs(a.dot(b)) / (na * nb);
}

}  // namespace dqls
