#include "dqls/dqls.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace dqls;

namespace {

DistributedInstance one_by_one(double a) {
  RMat m(1, 1);
  m << a;
  return build_instance({{m, RVec::Ones(1)}}, std::abs(a));
}

double phase_of(const Walk& w, const Vec& v) {
  const cplx ev = v.dot(w.W() * v);
  return std::arg(ev);
}

Vec random_state(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(g(rng), g(rng));
  return v.normalized();
}

// Random state on (I,Q,P) inside the span of the walk branches.
Vec random_branch_state(const Walk& w, std::mt19937_64& rng) {
  const auto& sp = w.spectrum();
  const auto N = w.dim();
  Vec v(2 * N);
  v.head(N) = sp.vectors * random_state(sp.vectors.cols(), rng);
  v.tail(N) = sp.vectors * random_state(sp.vectors.cols(), rng);
  return v.normalized();
}

}  // namespace

TEST_CASE("walk eigenphases on the 1x1 dilation", "[qsp]") {
  auto inst = one_by_one(1.0);
  auto be = be_of_A_bar(inst);
  REQUIRE(be.alpha_eff == Catch::Approx(2.0));
  const Walk w(be);
  Eigen::ComplexEigenSolver<Mat> es(w.W());
  std::vector<double> got;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double a = std::abs(std::arg(es.eigenvalues()(i)));
    if (a > 1e-6 && a < kPi - 1e-6) got.push_back(a);
  }
  std::sort(got.begin(), got.end());
  REQUIRE(got.size() == 4);
  CHECK(got[0] == Catch::Approx(kPi / 3));
  CHECK(got[1] == Catch::Approx(kPi / 3));
  CHECK(got[2] == Catch::Approx(2 * kPi / 3));
  CHECK(got[3] == Catch::Approx(2 * kPi / 3));
}

TEST_CASE("zero eigenvalue branches sit at +-pi/2", "[qsp]") {
  RMat a(2, 1);
  a << 1, 0;
  auto inst = build_instance({{a, RVec::Ones(2)}}, 1.0);
  auto be = be_of_A_bar(inst);
  const Walk w(be);
  const auto& sp = w.spectrum();
  bool seen = false;
  for (Eigen::Index u = 0; u < sp.lambdas.size(); ++u) {
    if (std::abs(sp.lambdas(u)) > 1e-12) continue;
    seen = true;
    CHECK(std::abs(std::abs(phase_of(w, sp.vectors.col(u))) - kPi / 2) < 1e-9);
  }
  CHECK(seen);
}

TEST_CASE("branch vectors are orthogonal", "[qsp]") {
  GenSpec g;
  g.seed = 12;
  g.m = 5;
  g.n = 3;
  g.r = 2;
  auto be = be_of_A_bar(gen_instance(g));
  const Walk w(be);
  const auto& sp = w.spectrum();
  const auto k = sp.lambdas.size();
  for (Eigen::Index u = 0; u < k; ++u) REQUIRE(std::abs(sp.vectors.col(u).dot(sp.vectors.col(u + k))) < 1e-9);
  CHECK_THROWS_AS(Walk(be_of_A(gen_instance(g))), WalkError);
}

TEST_CASE("controlled U_phi on a single branch", "[qsp]") {
  Mat id = Mat::Identity(1, 1);
  Mat u0 = controlled_u_phi(id, 0.3);
  CHECK((u0 - Mat::Identity(2, 2)).norm() < 1e-12);

  const double th = 0.7;
  Mat ph(1, 1);
  ph << std::exp(kI * th);
  // The factor carries an overall e^{i theta/2}; compare up to that phase.
  auto strip = [&](const Mat& m) { return Mat(m * std::exp(-kI * th / 2.0)); };
  Mat2 rx = std::cos(th / 2) * pauli::I() - kI * std::sin(th / 2) * pauli::X();
  Mat2 ry = std::cos(th / 2) * pauli::I() - kI * std::sin(th / 2) * pauli::Y();
  CHECK((strip(controlled_u_phi(ph, 0.0)) - Mat(rx)).norm() < 1e-12);
  CHECK((strip(controlled_u_phi(ph, kPi / 2)) - Mat(ry)).norm() < 1e-12);
  CHECK((rotation(0.0, th) - rx).norm() < 1e-12);
}

TEST_CASE("single phase response", "[qsp]") {
  PhaseSequence s{{0.0}};
  for (double th : {0.3, 1.1, -2.0}) {
    const Op o = Op::from(response(s, th));
    CHECK(std::abs(o.a - std::cos(th / 2)) < 1e-12);
    CHECK(std::abs(o.b) < 1e-12);
    CHECK(std::abs(o.c + std::sin(th / 2)) < 1e-12);
    CHECK(std::abs(o.d) < 1e-12);
  }
}

TEST_CASE("circuit and spectral application agree", "[qsp]") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int t = 0; t < 12; ++t) {
    GenSpec g;
    g.seed = 30 + static_cast<std::uint64_t>(t);
    g.m = 2 + t % 3;
    g.n = 1 + t % 2;
    g.r = 1 + static_cast<std::size_t>(t % 2);
    auto be = be_of_A_bar(gen_instance(g));
    const Walk w(be);
    RegisterLayout lay{{"I", ceil_log2(static_cast<std::size_t>(be.sys_dim))}, {"Q", be.ancillas}, {"P", 1}};
    PhaseSequence seq;
    const int l = 2 * (1 + t % 10);
    for (int i = 0; i < l; ++i) seq.angles.push_back(ang(rng));
    StateVector a(lay);
    a.amplitudes() = random_branch_state(w, rng);
    StateVector b = a;
    apply_phase_sequence(w, seq, a, ApplyMode::circuit, nullptr);
    apply_phase_sequence(w, seq, b, ApplyMode::spectral, nullptr);
    REQUIRE((a.amplitudes() - b.amplitudes()).norm() < 1e-9);
  }
}

TEST_CASE("odd degree is rejected in circuit mode", "[qsp]") {
  auto be = be_of_A_bar(one_by_one(1.0));
  const Walk w(be);
  StateVector s(RegisterLayout{{"I", 1}, {"Q", be.ancillas}, {"P", 1}});
  CHECK_THROWS_AS(apply_phase_sequence(w, PhaseSequence{{0.1, 0.2, 0.3}}, s, ApplyMode::circuit, nullptr), QspError);
}

TEST_CASE("QSP charging is linear in degree", "[qsp]") {
  GenSpec g;
  g.seed = 5;
  g.m = 4;
  g.n = 2;
  g.r = 2;
  auto inst = gen_instance(g);
  auto be = be_of_A_bar(inst);
  const Walk w(be);
  StateVector s(RegisterLayout{{"I", ceil_log2(static_cast<std::size_t>(be.sys_dim))}, {"Q", be.ancillas}, {"P", 1}});
  CommLedger led;
  apply_phase_sequence(w, PhaseSequence{std::vector<double>(6, 0.2)}, s, ApplyMode::circuit, &led);
  CHECK(led.total() == Catch::Approx(6 * 2.0 * 2 * std::ceil(std::log2(8.0))));

  CommLedger l2;
  spectral_apply(w, [](double) { return Mat2(Mat2::Identity()); }, s, &l2, 6);
  CHECK(l2.total() == Catch::Approx(led.total()));
}

TEST_CASE("identity response leaves the state alone", "[qsp]") {
  auto be = be_of_A_bar(one_by_one(0.5));
  const Walk w(be);
  std::mt19937_64 rng(4);
  RegisterLayout lay{{"I", 1}, {"Q", be.ancillas}, {"P", 1}};
  StateVector s(lay);
  s.amplitudes() = random_state(static_cast<Eigen::Index>(lay.dim()), rng);
  const Vec before = s.amplitudes();
  spectral_apply(w, [](double) { return Mat2(Mat2::Identity()); }, s, nullptr, 0);
  CHECK((s.amplitudes() - before).norm() < 1e-12);
}

TEST_CASE("sign tuple", "[qsp]") {
  auto t = sign_tuple(1e-2);
  REQUIRE(t.met);
  CHECK(t.sequence.degree() % 2 == 0);
  const Mat2 ix = kI * pauli::X();
  CHECK((response(t.sequence, kPi / 2) - ix).norm() <= 2e-2);
  for (double th = kPi / 3; th <= 2 * kPi / 3; th += 1e-3) {
    Eigen::JacobiSVD<Mat2> s(response(t.sequence, -th) + ix);
    REQUIRE(s.singularValues()(0) <= 1e-2);
  }
  auto lo = sign_tuple(1e-1), hi = sign_tuple(1e-3);
  CHECK(double(hi.sequence.degree()) <= 3.0 * double(lo.sequence.degree()));
}

TEST_CASE("gpe tuple bands", "[qsp]") {
  // Bands over the whole of |x| <= 1 need degree 100 at eps = 1e-2, above the
  // default cap of 80.
  auto t = gpe_tuple(0.5, 2.0, 1e-2, 120, true, SpectralSupport{1.0, 0.0, 1e-3});
  REQUIRE(t.met);
  auto err = [&](double th, const Mat2& want) {
    Eigen::JacobiSVD<Mat2> s(response(t.sequence, th) - want);
    return s.singularValues()(0);
  };
  CHECK(err(std::acos(0.6), pauli::I()) <= 1e-2);
  CHECK(err(kPi / 2, kI * pauli::X()) <= 1e-2);
  CHECK(err(kPi - std::acos(0.6), -pauli::I()) <= 1e-2);
  CHECK(verify_abs(t.sequence, t.target, 1000) <= 1e-2);
}

TEST_CASE("inverse tuple", "[qsp]") {
  const double phi = 0.25, c = 0.1, eps = 1e-2;
  auto t = inverse_tuple(phi, eps, c);
  REQUIRE(t.met);
  const double tol = eps * c / phi;
  CHECK(std::abs(plus_element(response(t.sequence, std::acos(phi))) - c / phi) <= tol);
  CHECK(std::abs(plus_element(response(t.sequence, std::acos(0.5))) - c / 0.5) <= tol);
  CHECK(std::abs(plus_element(response(t.sequence, kPi - std::acos(0.3))) + c / 0.3) <= tol);
  double worst = 0.0;
  for (double th = -kPi; th <= kPi; th += 1e-3) worst = std::max(worst, std::abs(plus_element(response(t.sequence, th))));
  CHECK(worst <= 1 + eps);
  CHECK_THROWS_AS(inverse_tuple(phi, eps, 0.2), PreconditionError);
}
