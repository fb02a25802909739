#pragma once

#include "dqls/ledger.hpp"
#include "dqls/numeric.hpp"
#include "dqls/state.hpp"

#include <numeric>

namespace dqls {

struct Party {
  RMat A;
  RVec b;
};

struct DistributedInstance {
  std::vector<Party> parties;
  double delta = 0.0;
  RMat A;  // stacked
  RVec b;

  std::size_t r() const { return parties.size(); }
  Eigen::Index m() const { return A.rows(); }
  Eigen::Index n() const { return A.cols(); }
};

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Smallest singular value above a relative noise floor; 0 when A is zero.
inline double min_nonzero_singular(const RMat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<RMat> s(a);
  const RVec sv = s.singularValues();
  const double floor = 1e-12 * std::max(1.0, sv(0));
  double best = 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > floor) best = sv(i);
  return best;
}

inline DistributedInstance build_instance(std::vector<Party> parties, double delta) {
  if (parties.empty()) throw ShapeError("build_instance: no parties");
  if (!(delta > 0)) throw PreconditionError("build_instance: delta must be positive");
  const auto n = parties.front().A.cols();
  Eigen::Index m = 0;
  for (auto& p : parties) {
    if (p.A.cols() != n) throw ShapeError("build_instance: parties disagree on column count");
    if (p.b.size() != p.A.rows()) throw ShapeError("build_instance: b_i length must equal rows of A_i");
    if (!p.A.allFinite() || !p.b.allFinite()) throw PreconditionError("build_instance: non-finite data");
    m += p.A.rows();
  }
  DistributedInstance inst;
  inst.A.resize(m, n);
  inst.b.resize(m);
  Eigen::Index off = 0;
  for (auto& p : parties) {
    inst.A.middleRows(off, p.A.rows()) = p.A;
    inst.b.segment(off, p.A.rows()) = p.b;
    off += p.A.rows();
  }
  const double smin = min_nonzero_singular(inst.A);
  if (smin == 0.0 || delta > smin * (1 + 1e-12))
    throw PreconditionError("build_instance: delta exceeds the smallest nonzero singular value (" +
                            std::to_string(smin) + ")");
  inst.parties = std::move(parties);
  inst.delta = delta;
  return inst;
}

struct PenaltySpec {
  double lambda = 1.0;
  RMat L;

  double delta_L() const {
    Eigen::JacobiSVD<RMat> s(L);
    return s.singularValues().minCoeff();
  }
  double kappa_L() const {
    Eigen::JacobiSVD<RMat> s(L);
    return s.singularValues().maxCoeff() / s.singularValues().minCoeff();
  }
  void validate(Eigen::Index n) const {
    if (!(lambda > 0)) throw PreconditionError("penalty: lambda must be positive");
    if (L.rows() != n || L.cols() != n) throw ShapeError("penalty: L must be n x n");
    if (!(delta_L() > 0)) throw PreconditionError("penalty: L is singular");
  }
};

struct BlockEncoding {
  Mat U;                 // index = sys + sys_dim * anc
  double alpha = 0.0;    // base scale before doubling
  double alpha_eff = 0.0;
  int ancillas = 0;
  double residual = 0.0;
  bool hermitian = false;
  std::string target_tag;
  Mat target;            // padded encoded matrix
  Eigen::Index sys_dim = 0;
  Primitive primitive = Primitive::be_A;
  double per_use = 0.0;  // qubits charged per query
  std::size_t parties = 0;

  Mat block() const { return U.topLeftCorner(sys_dim, sys_dim); }
  Eigen::Index anc_dim() const { return Eigen::Index{1} << ancillas; }
  void charge(CommLedger* ledger, std::uint64_t uses) const {
    if (ledger && uses) ledger->charge(primitive, uses, per_use);
  }
};

namespace detail {

// Unitary whose first column is v (unit norm), via a Householder reflection.
inline Mat column_completion(const Vec& v) {
  const auto d = v.size();
  Vec e = Vec::Zero(d);
  e(0) = 1.0;
  cplx ph = std::abs(v(0)) > 0 ? v(0) / std::abs(v(0)) : cplx(1.0);
  Vec w = v - ph * e;
  Mat id = Mat::Identity(d, d);
  if (w.norm() < 1e-15) return ph * id;
  w.normalize();
  Mat h = id - 2.0 * w * w.adjoint();  // h e = ph^* ... fix phase below
  Mat u = h * ph;
  // u e = ph * h e; h maps ph*e -> v so h e = v/ph.
  return u;
}

// Scale-doubling dilation [[U/2, cI], [cI, -U^dag/2]], new ancilla on top.
inline Mat double_scale(const Mat& u) {
  const auto d = u.rows();
  const double c = std::sqrt(3.0) / 2.0;
  Mat out(2 * d, 2 * d);
  out << 0.5 * u, c * Mat::Identity(d, d), c * Mat::Identity(d, d), -0.5 * u.adjoint();
  return out;
}

// Block encoding of the row-stacked blocks (each D-padded) with base scale
// sqrt(sum ||B_i||^2). Layout: sys (D) | completion (1 qubit) | party (ceil log p).
// Returns the undoubled unitary and alpha.
inline std::pair<Mat, double> stacked_encoding(const std::vector<RMat>& blocks, Eigen::Index D) {
  const std::size_t p = blocks.size();
  const int pq = ceil_log2(p);
  const Eigen::Index P = Eigen::Index{1} << pq;
  const Eigen::Index full = 2 * D * P;
  std::vector<double> norms(p);
  double a2 = 0;
  for (std::size_t i = 0; i < p; ++i) {
    norms[i] = spectral_norm(blocks[i].cast<cplx>());
    a2 += norms[i] * norms[i];
  }
  const double alpha = std::sqrt(a2);
  if (!(alpha > 0)) throw PreconditionError("block encoding: all blocks are zero");

  // Party state preparation.
  Vec amp = Vec::Zero(P);
  for (std::size_t i = 0; i < p; ++i) amp(static_cast<Eigen::Index>(i)) = norms[i] / alpha;
  Mat prep = column_completion(amp);

  // Select: party-controlled local completions.
  Mat sel = Mat::Zero(full, full);
  for (Eigen::Index i = 0; i < P; ++i) {
    Mat ui = Mat::Identity(2 * D, 2 * D);
    if (i < static_cast<Eigen::Index>(p) && norms[i] > 0)
      ui = unitary_completion(pad(blocks[i].cast<cplx>(), D, D), norms[i]);
    sel.block(i * 2 * D, i * 2 * D, 2 * D, 2 * D) = ui;
  }

  // Row routing permutation: (row s of party i, completion 0) -> stacked row.
  std::vector<Eigen::Index> dest(full, -1);
  std::vector<char> used(full, 0);
  Eigen::Index off = 0;
  std::vector<Eigen::Index> zero_src, other_src;
  for (Eigen::Index i = 0; i < P; ++i) {
    const Eigen::Index mi = i < static_cast<Eigen::Index>(p) ? blocks[i].rows() : 0;
    for (Eigen::Index s = 0; s < 2 * D; ++s) {
      const Eigen::Index src = s + i * 2 * D;
      if (s < mi) {
        dest[src] = off + s;
        used[off + s] = 1;
      } else if (s < D) {
        zero_src.push_back(src);  // padded rows: zero amplitude
      } else {
        other_src.push_back(src);
      }
    }
    off += mi;
  }
  if (off > D) throw ShapeError("block encoding: stacked rows exceed padded dimension");
  std::vector<Eigen::Index> free_dst;
  for (Eigen::Index t = 0; t < full; ++t)
    if (!used[t]) free_dst.push_back(t);  // ascending: remaining ancilla-0 rows first
  std::size_t k = 0;
  for (auto s : zero_src) dest[s] = free_dst[k++];
  for (auto s : other_src) dest[s] = free_dst[k++];
  Mat perm = Mat::Zero(full, full);
  for (Eigen::Index s = 0; s < full; ++s) perm(dest[s], s) = 1.0;

  Mat prep_full = kron(prep, Mat::Identity(2 * D, 2 * D));
  return {perm * sel * prep_full, alpha};
}

inline Mat dilate_unitary(const Mat& u, Eigen::Index D, int anc) {
  // sys index = s + D*dil, then ancillas above.
  const Eigen::Index A = Eigen::Index{1} << anc;
  const Eigen::Index full = 2 * D * A;
  Mat out = Mat::Zero(full, full);
  Mat ud = u.adjoint();
  auto idx = [&](Eigen::Index s, Eigen::Index dil, Eigen::Index a) { return s + D * dil + 2 * D * a; };
  for (Eigen::Index a1 = 0; a1 < A; ++a1)
    for (Eigen::Index s1 = 0; s1 < D; ++s1)
      for (Eigen::Index a2 = 0; a2 < A; ++a2)
        for (Eigen::Index s2 = 0; s2 < D; ++s2) {
          const cplx x = u(s1 + D * a1, s2 + D * a2);
          const cplx y = ud(s1 + D * a1, s2 + D * a2);
          out(idx(s1, 0, a1), idx(s2, 1, a2)) = x;
          out(idx(s1, 1, a1), idx(s2, 0, a2)) = y;
        }
  return out;
}

inline BlockEncoding finish(Mat u, double alpha, int anc, Mat target, Eigen::Index sys_dim, bool herm) {
  BlockEncoding be;
  be.U = double_scale(u);
  if (herm) be.U = 0.5 * (be.U + be.U.adjoint());
  be.alpha = alpha;
  be.alpha_eff = 2 * alpha;
  be.ancillas = anc + 1;
  be.hermitian = herm;
  be.sys_dim = sys_dim;
  be.target = std::move(target);
  be.residual = spectral_norm(be.target - be.alpha_eff * be.block());
  return be;
}

inline double log2_ceil_count(double x) { return x <= 1 ? 0.0 : std::ceil(std::log2(x) - 1e-12); }

}  // namespace detail

inline Eigen::Index padded_dim(const DistributedInstance& inst) {
  return static_cast<Eigen::Index>(pow2_at_least(static_cast<std::size_t>(std::max(inst.m(), inst.n()))));
}

inline std::vector<RMat> party_blocks(const DistributedInstance& inst) {
  std::vector<RMat> out;
  for (auto& p : inst.parties) out.push_back(p.A);
  return out;
}

inline double charge_be_A(const DistributedInstance& inst, const CostConstants& k) {
  return k.c_be * double(inst.r()) * detail::log2_ceil_count(double(inst.n()));
}
inline double charge_be_A_bar(const DistributedInstance& inst, const CostConstants& k) {
  return k.c_be * double(inst.r()) * detail::log2_ceil_count(double(inst.m()) * double(inst.n()));
}
inline double charge_b_prep(const DistributedInstance& inst, const CostConstants& k) {
  return k.c_b * double(inst.r()) * detail::log2_ceil_count(double(inst.m()));
}

inline BlockEncoding be_of_A(const DistributedInstance& inst, CommLedger* ledger = nullptr,
                             std::uint64_t uses = 0) {
  const auto D = padded_dim(inst);
  auto [u, alpha] = detail::stacked_encoding(party_blocks(inst), D);
  const int anc = ceil_log2(inst.r()) + 1;
  auto be = detail::finish(u, alpha, anc, pad(inst.A.cast<cplx>(), D, D), D, false);
  be.target_tag = "A";
  be.primitive = Primitive::be_A;
  be.per_use = charge_be_A(inst, ledger ? ledger->constants() : CostConstants{});
  be.parties = inst.r();
  be.charge(ledger, uses);
  return be;
}

inline BlockEncoding be_of_A_bar(const DistributedInstance& inst, CommLedger* ledger = nullptr,
                                 std::uint64_t uses = 0) {
  const auto D = padded_dim(inst);
  auto [u, alpha] = detail::stacked_encoding(party_blocks(inst), D);
  const int anc = ceil_log2(inst.r()) + 1;
  Mat ubar = detail::dilate_unitary(u, D, anc);
  auto be = detail::finish(ubar, alpha, anc, hermitian_dilation(pad(inst.A.cast<cplx>(), D, D)), 2 * D, true);
  be.target_tag = "A_bar";
  be.primitive = Primitive::be_A_bar;
  be.per_use = charge_be_A_bar(inst, ledger ? ledger->constants() : CostConstants{});
  be.parties = inst.r();
  be.charge(ledger, uses);
  return be;
}

// Augmented instance stack(A, sqrt(lambda) L); the referee holds the last block.
inline DistributedInstance augmented_instance(const DistributedInstance& inst, const PenaltySpec& pen) {
  pen.validate(inst.n());
  DistributedInstance aug;
  aug.parties = inst.parties;
  aug.parties.push_back({std::sqrt(pen.lambda) * pen.L, RVec::Zero(inst.n())});
  aug.A.resize(inst.m() + inst.n(), inst.n());
  aug.A << inst.A, std::sqrt(pen.lambda) * pen.L;
  aug.b.resize(inst.m() + inst.n());
  aug.b << inst.b, RVec::Zero(inst.n());
  aug.delta = std::sqrt(pen.lambda) * pen.delta_L();
  return aug;
}

// Encoding of A_L (or its dilation when hermitian = true). The referee block
// is local, so charges use the data-party count only.
inline BlockEncoding be_of_A_L(const DistributedInstance& inst, const PenaltySpec& pen,
                               CommLedger* ledger = nullptr, std::uint64_t uses = 0,
                               bool hermitian = false) {
  auto aug = augmented_instance(inst, pen);
  auto be = hermitian ? be_of_A_bar(aug) : be_of_A(aug);
  const auto k = ledger ? ledger->constants() : CostConstants{};
  be.per_use = hermitian ? charge_be_A_bar(inst, k) : charge_be_A(inst, k);
  be.target_tag = hermitian ? "A_L_bar" : "A_L";
  be.parties = inst.r();
  be.charge(ledger, uses);
  return be;
}

inline StateVector prepare_b(const DistributedInstance& inst, CommLedger* ledger = nullptr,
                             const RVec* b_override = nullptr) {
  const RVec& b = b_override ? *b_override : inst.b;
  const double nb = b.norm();
  if (!(nb > 0)) throw PreconditionError("prepare_b: b is zero");
  const auto D = padded_dim(inst);
  Vec v = Vec::Zero(2 * D);
  v.head(b.size()) = (b / nb).cast<cplx>();
  RegisterLayout lay{{"I", ceil_log2(static_cast<std::size_t>(2 * D))}};
  if (ledger) ledger->charge(Primitive::b_prep, 1, charge_b_prep(inst, ledger->constants()));
  return StateVector::with_register(lay, "I", v);
}

}  // namespace dqls
