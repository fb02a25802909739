// Copyright 2026 The dqls Authors
// SPDX-License-Identifier: Apache-2.0
#include "dqls/dqls.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace dqls;

namespace {

Mat random_complex(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

RVec sorted(RVec v) {
  std::sort(v.data(), v.data() + v.size());
  return v;
}

}  // namespace

TEST_CASE("svd of a diagonal matrix", "[core]") {
  Mat a = Mat::Zero(2, 2);
  a(0, 0) = 2;
  a(1, 1) = 1;
  auto s = svd(a);
  CHECK(s.singular_values(0) == Catch::Approx(2));
  CHECK(s.singular_values(1) == Catch::Approx(1));
  CHECK(std::abs(s.left(0, 0)) == Catch::Approx(1));
  CHECK(std::abs(s.right(1, 1)) == Catch::Approx(1));
}

TEST_CASE("svd of the zero matrix", "[core]") {
  auto s = svd(Mat::Zero(2, 3));
  REQUIRE(s.singular_values.size() == 2);
  CHECK(s.singular_values.norm() == 0.0);
}

TEST_CASE("svd reconstruction over seeded matrices", "[core]") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const auto r = 1 + static_cast<Eigen::Index>(rng() % 8), c = 1 + static_cast<Eigen::Index>(rng() % 8);
    Mat a = random_complex(r, c, rng);
    auto s = svd(a);
    for (Eigen::Index k = 1; k < s.singular_values.size(); ++k)
      REQUIRE(s.singular_values(k) <= s.singular_values(k - 1));
    REQUIRE(reconstruction_residual(a, s) <= 1e-9 * spectral_norm(a));
  }
}

TEST_CASE("hermitian dilation spectra", "[core]") {
  Mat a(1, 1);
  a << 3;
  Mat d = hermitian_dilation(a);
  CHECK(std::abs(d(0, 1) - 3.0) < 1e-15);
  CHECK((sorted(eigh(d).values) - RVec::Map(std::vector<double>{-3, 3}.data(), 2)).norm() < 1e-12);

  Mat b = Mat::Zero(2, 2);
  b(0, 0) = 1;
  b(1, 1) = 2;
  CHECK((sorted(eigh(hermitian_dilation(b)).values) - RVec::Map(std::vector<double>{-2, -1, 1, 2}.data(), 4)).norm() <
        1e-12);

  Mat col(2, 1);
  col << 1, 1;
  const RVec ev = sorted(eigh(hermitian_dilation(col)).values);
  CHECK(ev(0) == Catch::Approx(-std::sqrt(2.0)));
  CHECK(std::abs(ev(1)) < 1e-12);
  CHECK(ev(2) == Catch::Approx(std::sqrt(2.0)));

  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    Mat m = random_complex(3 + t % 4, 2 + t % 3, rng);
    const RVec sv = svd(m).singular_values;
    std::vector<double> want;
    for (Eigen::Index k = 0; k < sv.size(); ++k) want.push_back(sv(k)), want.push_back(-sv(k));
    while (static_cast<Eigen::Index>(want.size()) < m.rows() + m.cols()) want.push_back(0.0);
    std::sort(want.begin(), want.end());
    const RVec got = sorted(eigh(hermitian_dilation(m)).values);
    for (std::size_t i = 0; i < want.size(); ++i) REQUIRE(std::abs(got(static_cast<Eigen::Index>(i)) - want[i]) < 1e-9);
  }
}

TEST_CASE("unitary completion", "[core]") {
  Mat u0 = unitary_completion(Mat::Zero(2, 2), 1.0);
  CHECK(unitarity_defect(u0) < 1e-10);
  CHECK(u0.topLeftCorner(2, 2).norm() < 1e-14);

  Mat half = Mat::Identity(2, 2) / 2.0;
  Mat u1 = unitary_completion(half, 1.0);
  CHECK(unitarity_defect(u1) < 1e-10);
  CHECK((u1.topLeftCorner(2, 2) - half).norm() < 1e-12);
  CHECK(is_hermitian(u1, 1e-12));

  Mat c = Mat::Zero(2, 2);
  c(0, 0) = 1;
  c(1, 1) = 0.5;
  Mat u2 = unitary_completion(c, 2.0);
  CHECK(std::abs(u2(0, 0) - 0.5) < 1e-12);
  CHECK(std::abs(u2(1, 1) - 0.25) < 1e-12);

  CHECK_THROWS_AS(unitary_completion(c, 0.5), PreconditionError);
}

TEST_CASE("register layout and operators", "[core]") {
  RegisterLayout lay{{"A", 1}, {"B", 2}};
  CHECK(lay.total() == 3);
  CHECK(lay.offset("B") == 1);
  CHECK_THROWS(lay.add("A", 1));

  StateVector s(lay);
  const Vec before = s.amplitudes();
  s.apply_operator(Mat::Identity(4, 4), {"B"});
  CHECK((s.amplitudes() - before).norm() == 0.0);

  StateVector x(RegisterLayout{{"q", 1}});
  x.apply_operator(pauli::X(), {"q"});
  CHECK(std::abs(x.amplitudes()(1)) == Catch::Approx(1));

  StateVector cx(RegisterLayout{{"c", 1}, {"t", 1}});
  cx.apply_operator(pauli::X(), {"c"});
  const Vec prior = cx.amplitudes();
  cx.apply_operator(pauli::X(), {"t"}, {{"c", 0}});
  CHECK((cx.amplitudes() - prior).norm() == 0.0);
  CHECK_THROWS_AS(cx.apply_operator(Mat::Identity(4, 4), {"t"}), LayoutError);
}

TEST_CASE("controlled operators preserve the norm", "[core]") {
  std::mt19937_64 rng(3);
  RegisterLayout lay{{"a", 2}, {"b", 1}, {"c", 2}};
  StateVector s(lay);
  s.amplitudes() = random_complex(static_cast<Eigen::Index>(lay.dim()), 1, rng);
  s.amplitudes().normalize();
  for (int t = 0; t < 10; ++t) {
    Eigen::HouseholderQR<Mat> qr(random_complex(4, 4, rng));
    Mat u = qr.householderQ();
    s.apply_operator(u, {"c"}, {{"a", static_cast<std::size_t>(t % 4)}, {"b", static_cast<std::size_t>(t % 2)}});
    REQUIRE(std::abs(s.norm() - 1.0) < 1e-10);
  }
}

TEST_CASE("build_instance stacks parties", "[core]") {
  RMat a(2, 2);
  a << 2, 0, 0, 1;
  RVec b(2);
  b << 2, 1;
  auto one = build_instance({{a, b}}, 1.0);
  CHECK(one.r() == 1);
  CHECK(one.m() == 2);
  CHECK(one.n() == 2);

  RMat two(1, 1);
  two << 2;
  RVec bb(1);
  bb << 1;
  auto st = build_instance({{two, bb}, {two, bb}}, 1.0);
  CHECK(st.m() == 2);
  CHECK(st.n() == 1);
  CHECK(st.A(1, 0) == 2.0);

  CHECK_THROWS_AS(build_instance({{a, b}, {two, bb}}, 1.0), ShapeError);
  CHECK_THROWS_AS(build_instance({{a, b}}, 1.5), PreconditionError);

  GenSpec g;
  g.seed = 4;
  g.m = 9;
  g.n = 3;
  g.r = 3;
  g.sigma_lo = 0.3;
  auto gi = gen_instance(g);
  CHECK(gi.delta == Catch::Approx(0.9 * min_nonzero_singular(gi.A)));
}

TEST_CASE("block encoding of A", "[core]") {
  auto inst = build_instance({{RMat::Identity(2, 2), RVec::Ones(2)}}, 1.0);
  CommLedger led;
  auto be = be_of_A(inst, &led, 1);
  CHECK(be.alpha == Catch::Approx(1.0));
  CHECK(be.alpha_eff == Catch::Approx(2.0));
  CHECK((be.block() - Mat::Identity(2, 2) / 2.0).norm() < 1e-12);
  CHECK(unitarity_defect(be.U) < 1e-10);
  CHECK(led.line(Primitive::be_A).count == 1);

  RMat two(1, 1);
  two << 2;
  auto st = build_instance({{two, RVec::Ones(1)}, {two, RVec::Ones(1)}}, 1.0);
  auto be2 = be_of_A(st);
  CHECK(be2.alpha == Catch::Approx(2 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(be2.ancillas == ceil_log2(2) + 2);
  CHECK((be2.target - be2.alpha_eff * be2.block()).norm() <= 1e-10);
}

TEST_CASE("block encoding of the dilation", "[core]") {
  RMat one(1, 1);
  one << 1;
  auto inst = build_instance({{one, RVec::Ones(1)}}, 1.0);
  auto be = be_of_A_bar(inst);
  CHECK(be.hermitian);
  CHECK((be.U - be.U.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
  Mat want = Mat::Zero(2, 2);
  want(0, 1) = want(1, 0) = 0.5;
  CHECK((be.block() - want).norm() < 1e-12);

  GenSpec g;
  g.seed = 8;
  g.m = 6;
  g.n = 3;
  g.r = 3;
  auto gi = gen_instance(g);
  auto bg = be_of_A_bar(gi);
  const Walk w(bg);
  const auto& sp = w.spectrum();
  for (Eigen::Index u = 0; u < sp.lambdas.size(); ++u) {
    const cplx want_ph = std::exp(kI * std::acos(sp.lambdas(u) / bg.alpha_eff));
    const Vec v = sp.vectors.col(u);
    REQUIRE((w.W() * v - want_ph * v).norm() < 1e-9);
  }
}

TEST_CASE("prepare_b embeds the stacked vector", "[core]") {
  RVec e(2);
  e << 1, 0;
  auto inst = build_instance({{RMat::Identity(2, 2), e}}, 1.0);
  auto s = prepare_b(inst);
  CHECK(std::abs(s.amplitudes()(0) - 1.0) < 1e-15);

  RVec u(2);
  u << 1, 1;
  auto inst2 = build_instance({{RMat::Identity(2, 2), u}}, 1.0);
  CommLedger led;
  auto s2 = prepare_b(inst2, &led);
  CHECK(std::abs(s2.amplitudes()(1) - 1 / std::sqrt(2.0)) < 1e-15);
  CHECK(led.line(Primitive::b_prep).qubits == Catch::Approx(2.0 * 1 * 1));

  GenSpec g;
  g.seed = 2;
  g.m = 7;
  g.n = 2;
  g.r = 3;
  auto gi = gen_instance(g);
  auto s3 = prepare_b(gi);
  const Vec got = s3.amplitudes().head(gi.m());
  CHECK((got - (gi.b / gi.b.norm()).cast<cplx>()).norm() < 1e-12);

  const RVec zero = RVec::Zero(2);
  CHECK_THROWS_AS(prepare_b(inst, nullptr, &zero), PreconditionError);
}

TEST_CASE("block encoding of the augmented matrix", "[core]") {
  RMat one(1, 1);
  one << 1;
  auto inst = build_instance({{one, RVec::Ones(1)}}, 1.0);
  PenaltySpec pen{1.0, RMat::Identity(1, 1)};
  auto aug = augmented_instance(inst, pen);
  CHECK(min_nonzero_singular(aug.A) == Catch::Approx(std::sqrt(2.0)));

  CommLedger led;
  auto be = be_of_A_L(inst, pen, &led, 3);
  CHECK(be.alpha == Catch::Approx(std::sqrt(2.0)));
  CHECK(led.line(Primitive::be_A).qubits == Catch::Approx(3 * charge_be_A(inst, {})));

  std::mt19937_64 rng(17);
  for (int t = 0; t < 100; ++t) {
    GenSpec g;
    g.seed = 100 + static_cast<std::uint64_t>(t);
    g.m = 4 + t % 5;
    g.n = 1 + t % 4;
    g.r = 1 + static_cast<std::size_t>(t % 3);
    auto gi = gen_instance(g);
    RMat L = RMat::Identity(g.n, g.n) + 0.3 * random_complex(g.n, g.n, rng).real();
    const double lam = std::exp(std::uniform_real_distribution<double>(-4, 1)(rng));
    PenaltySpec p{lam, L};
    if (!(p.delta_L() > 1e-3)) continue;
    const double smin = min_nonzero_singular(augmented_instance(gi, p).A);
    REQUIRE(smin >= std::sqrt(lam) * p.delta_L() * (1 - 1e-12));
  }

  PenaltySpec tiny{1e-12, RMat::Identity(1, 1)};
  auto be0 = be_of_A_L(inst, tiny);
  auto bA = be_of_A(inst);
  CHECK(std::abs(be0.alpha - bA.alpha) < 1e-9);
}

TEST_CASE("ledger report", "[core]") {
  CommLedger fresh;
  auto r0 = fresh.report();
  CHECK(r0.total == 0.0);
  for (auto& [k, v] : r0.lines) CHECK(v.count == 0);

  CommLedger led;
  led.charge(Primitive::be_A_bar, 3, 5.0);
  CHECK(led.line(Primitive::be_A_bar).qubits == 15.0);

  RMat a(2, 2);
  a << 2, 0, 0, 1;
  RVec b(2);
  b << 2, 1;
  auto res = solve_ols(build_instance({{a, b}}, 0.5), 1e-2, ApplyMode::spectral);
  double sum = 0.0;
  for (auto& [k, v] : res.ledger.lines) sum += v.qubits;
  CHECK(res.ledger.total == Catch::Approx(sum).epsilon(1e-12));
}
