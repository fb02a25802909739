// Copyright 2026 The dqls Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dqls/coordinator.hpp"

#include <random>

namespace dqls {

struct GenSpec {
  std::uint64_t seed = 1;
  Eigen::Index m = 4;
  Eigen::Index n = 2;
  std::size_t r = 2;
  double sigma_lo = 0.5;
  double sigma_hi = 1.0;
  std::vector<double> spectrum;  // explicit singular values; overrides the log-uniform draw
  double gamma = 1.0;
  double delta_margin = 0.9;     // delta = margin * smallest singular value
};

namespace detail {

inline RMat random_orthogonal(Eigen::Index k, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  RMat a(k, k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < k; ++i) a(i, j) = g(rng);
  Eigen::HouseholderQR<RMat> qr(a);
  RMat q = qr.householderQ();
  // Fix column signs against R so the draw is Haar and reproducible.
  const RMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < k; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

inline std::vector<double> draw_spectrum(const GenSpec& s, std::mt19937_64& rng) {
  if (!s.spectrum.empty()) {
    if (static_cast<Eigen::Index>(s.spectrum.size()) != s.n) throw ShapeError("gen: spectrum needs n values");
    for (double v : s.spectrum)
      if (!(v > 0)) throw PreconditionError("gen: singular values must be positive");
    auto out = s.spectrum;
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
  }
  if (!(s.sigma_lo > 0 && s.sigma_hi >= s.sigma_lo)) throw PreconditionError("gen: need 0 < sigma_lo <= sigma_hi");
  std::vector<double> out;
  if (s.n == 1) return {s.sigma_lo};
  out.push_back(s.sigma_hi);
  std::uniform_real_distribution<double> u(std::log(s.sigma_lo), std::log(s.sigma_hi));
  for (Eigen::Index k = 2; k < s.n; ++k) out.push_back(std::exp(u(rng)));
  out.push_back(s.sigma_lo);
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

inline RVec random_unit(Eigen::Index k, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  RVec v(k);
  for (Eigen::Index i = 0; i < k; ++i) v(i) = g(rng);
  return v / v.norm();
}

}  // namespace detail

// Row split as even as possible, earlier parties take the remainder.
inline std::vector<Eigen::Index> contiguous_partition(Eigen::Index m, std::size_t r) {
  if (r == 0 || static_cast<Eigen::Index>(r) > m) throw PreconditionError("gen: need 1 <= r <= m");
  std::vector<Eigen::Index> rows(r, m / static_cast<Eigen::Index>(r));
  for (Eigen::Index i = 0; i < m % static_cast<Eigen::Index>(r); ++i) rows[static_cast<std::size_t>(i)] += 1;
  return rows;
}

inline std::vector<Party> split_rows(const RMat& a, const RVec& b, std::size_t r) {
  std::vector<Party> parties;
  Eigen::Index off = 0;
  for (auto k : contiguous_partition(a.rows(), r)) {
    parties.push_back({a.middleRows(off, k), b.segment(off, k)});
    off += k;
  }
  return parties;
}

inline DistributedInstance gen_instance(const GenSpec& s) {
  if (s.n < 1 || s.m < s.n) throw ShapeError("gen: need m >= n >= 1");
  if (!(s.gamma >= 0 && s.gamma <= 1)) throw PreconditionError("gen: gamma must lie in [0,1]");
  if (s.gamma < 1 && s.m == s.n)
    throw PreconditionError("gen: gamma < 1 needs m > n (column space has no orthogonal complement)");
  if (s.gamma == 0) throw PreconditionError("gen: gamma = 0 leaves nothing to solve");
  std::mt19937_64 rng(s.seed);
  const auto sig = detail::draw_spectrum(s, rng);
  const RMat U = detail::random_orthogonal(s.m, rng);
  const RMat V = detail::random_orthogonal(s.n, rng);
  RVec sv(s.n);
  for (Eigen::Index k = 0; k < s.n; ++k) sv(k) = sig[static_cast<std::size_t>(k)];
  const RMat A = U.leftCols(s.n) * sv.asDiagonal() * V.transpose();

  RVec b = U.leftCols(s.n) * detail::random_unit(s.n, rng) * s.gamma;
  if (s.gamma < 1) b += U.rightCols(s.m - s.n) * detail::random_unit(s.m - s.n, rng) * std::sqrt(1 - s.gamma * s.gamma);
  return build_instance(split_rows(A, b, s.r), s.delta_margin * sig.back());
}

// Same A and in-column part of b with a different out-of-column share, for
// paired runs that differ only in gamma.
inline DistributedInstance with_gamma(const DistributedInstance& inst, double gamma, std::uint64_t seed) {
  Eigen::JacobiSVD<RMat> s(inst.A, Eigen::ComputeFullU);
  const auto n = inst.n(), m = inst.m();
  const RMat Uc = s.matrixU().leftCols(n);
  RVec in = Uc * (Uc.transpose() * inst.b);
  if (in.norm() == 0) throw PreconditionError("with_gamma: b has no column-space component");
  in /= in.norm();
  RVec b = gamma * in;
  if (gamma < 1) {
    if (m == n) throw PreconditionError("with_gamma: no orthogonal complement");
    std::mt19937_64 rng(seed);
    b += s.matrixU().rightCols(m - n) * detail::random_unit(m - n, rng) * std::sqrt(1 - gamma * gamma);
  }
  return build_instance(split_rows(inst.A, b, inst.r()), inst.delta);
}

}  // namespace dqls
