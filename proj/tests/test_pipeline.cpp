// Copyright 2026 The dqls Authors
// SPDX-License-Identifier: Apache-2.0
#include "dqls/dqls.hpp"

#include <catch_amalgamated.hpp>

using namespace dqls;

namespace {

VtRunResult run(const DistributedInstance& inst, ApplyMode mode = ApplyMode::spectral, double eps = 1e-2) {
  static std::vector<std::unique_ptr<BlockEncoding>> keep;
  keep.push_back(std::make_unique<BlockEncoding>(be_of_A_bar(inst)));
  VtProblem prob{&inst, keep.back().get(), inst.delta, inst.b};
  VtOptions o;
  o.mode = mode;
  o.eps = eps;
  CommLedger led;
  return run_variable_time(prob, o, led);
}

DistributedInstance diag2(double a, double b, RVec rhs) {
  RMat m = RMat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return build_instance({{m, rhs}}, std::min(a, b));
}

}  // namespace

TEST_CASE("schedule", "[vtaa]") {
  auto s = make_schedule(4.0, 0.25, 1e-2);
  CHECK(s.T == 5);
  CHECK(s.eps_step == Catch::Approx(1e-2 / 20));
  CHECK(s.phi.back() <= 0.25 / 4.0 * 2);
  CHECK_THROWS_AS(make_schedule(1.0, 2.0, 1e-2), PreconditionError);
}

TEST_CASE("rank one identity stops early with the exact output", "[vtaa]") {
  RMat one(1, 1);
  one << 1;
  auto inst = build_instance({{one, RVec::Ones(1)}}, 1.0);
  auto r = run(inst);
  REQUIRE_FALSE(r.failed);
  const auto D = padded_dim(inst);
  CHECK(std::abs(r.output(D)) == Catch::Approx(1.0));
  CHECK(r.stats.p.front() + r.stats.p.back() >= 0.0);
  double acc = 0.0;
  for (double p : r.stats.p) acc += p;
  CHECK(acc + r.stats.residual == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("two bands stop at the predicted steps", "[vtaa]") {
  auto inst = diag2(2.0, 0.25, RVec::Ones(2));
  auto r = run(inst);
  REQUIRE(r.schedule.T == 5);
  // x = 0.5 clears 2 phi_2, x = 1/16 clears 2 phi_5
  CHECK(r.stats.p[1] == Catch::Approx(0.5).margin(1e-9));
  CHECK(r.stats.p[4] == Catch::Approx(0.5).margin(1e-9));
  CHECK(r.stats.p[0] + r.stats.p[2] + r.stats.p[3] == Catch::Approx(0.0).margin(1e-9));
  const auto D = padded_dim(inst);
  Vec want = Vec::Zero(r.output.size());
  want(D) = 0.5;
  want(D + 1) = 4.0;
  CHECK(fidelity(r.output, want) == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("three party instance", "[vtaa]") {
  GenSpec g;
  g.seed = 21;
  g.m = 8;
  g.n = 4;
  g.r = 3;
  g.sigma_lo = 0.2;
  g.delta_margin = 1.0;
  auto inst = gen_instance(g);
  auto r = run(inst);
  const auto x = classical_oracle_ols(inst.A, inst.b, inst.delta).x;
  CHECK(fidelity(r.output.segment(padded_dim(inst), inst.n()), x.cast<cplx>()) >= 1 - 1e-2);
  CHECK(std::abs(r.stats.p_succ - r.stats.p_succ_predicted) <= 3e-2);
}

TEST_CASE("statistics identities", "[vtaa]") {
  GenSpec g;
  g.seed = 3;
  g.m = 6;
  g.n = 3;
  g.r = 2;
  auto r = run(gen_instance(g));
  double acc = 0.0, t2 = 0.0;
  for (std::size_t j = 0; j < r.stats.p.size(); ++j) {
    acc += r.stats.p[j];
    t2 += r.stats.p[j] * r.stats.t[j] * r.stats.t[j];
    if (j) CHECK(r.stats.t[j] > r.stats.t[j - 1]);
  }
  CHECK(acc + r.stats.residual == Catch::Approx(1.0).margin(1e-9));
  CHECK(r.stats.t_avg * r.stats.t_avg == Catch::Approx(t2).epsilon(1e-12));
  CHECK(r.stats.t_max_prime == Catch::Approx(2 * r.stats.t.back() / r.stats.t.front()));

  VtStats one;
  one.t = {5.0, 9.0};
  one.p = {0.0, 1.0};
  CHECK(vt_statistics(one).t_avg == Catch::Approx(9.0));
}

TEST_CASE("orthogonal b is declared a failure", "[vtaa]") {
  RMat a(2, 1);
  a << 1, 0;
  RVec b(2);
  b << 0, 1;
  auto inst = build_instance({{a, b}}, 1.0);
  auto r = run(inst);
  CHECK(r.failed);
  CHECK(r.stats.p_succ < 1e-12);
}

TEST_CASE("amplitude amplification", "[vtaa]") {
  CHECK(amplification_rounds(1.0) == 0);
  CHECK(amplification_rounds(0.05) >= 1);
  const int k = amplification_rounds(0.05);
  CHECK(std::pow(std::sin((2 * k + 1) * std::asin(std::sqrt(0.05))), 2) >= 0.9);

  GenSpec g;
  g.seed = 9;
  g.m = 6;
  g.n = 3;
  g.r = 2;
  auto inst = gen_instance(g);
  auto r = run(inst);
  const Vec before = r.output;
  const double t0 = r.ledger.total;
  CommLedger led;
  led.charge(Primitive::be_A_bar, 1, t0);
  const double target = amplitude_amplify(r, led);
  const double good = r.state.weight({{"F", 1}, {"Q", 0}});
  CHECK(good >= std::max(r.stats.p_succ, 0.9 * target));
  const Vec after = r.state.register_vector("I", detail::clean_sector(r.schedule.T));
  CHECK(fidelity(after, before) == Catch::Approx(1.0).margin(1e-9));
  CHECK(led.total() == Catch::Approx(t0 * (2 * r.stats.iterations + 1)));
}

TEST_CASE("cgj cost formula", "[vtaa]") {
  VtStats s;
  s.t = {1.0, 4.0};
  s.p = {0.0, 1.0};
  s.p_succ = 1.0;
  s.T_U = 0;
  s.k = 0;
  s = vt_statistics(s);
  const double lt = std::log2(s.t_max_prime);
  CHECK(cgj_cost(s) == Catch::Approx(s.t_max * (std::sqrt(lt) + lt)));
  VtStats q = s;
  q.p_succ = 0.25;
  CHECK(cgj_cost(q) - s.t_max * std::sqrt(lt) == Catch::Approx(2 * s.t_max * lt));
}

TEST_CASE("classical OLS oracle", "[regression]") {
  RMat a(2, 2);
  a << 2, 0, 0, 1;
  RVec b(2);
  b << 2, 1;
  auto o = classical_oracle_ols(a, b, 0.5);
  CHECK((o.x - RVec::Ones(2)).norm() < 1e-12);
  CHECK_FALSE(o.zero);

  RMat c(2, 1);
  c << 1, 0;
  RVec perp(2);
  perp << 0, 1;
  CHECK(classical_oracle_ols(c, perp, 0.5).zero);

  auto t = classical_oracle_ols(a, b, 1.5);
  CHECK(t.retained == 1);
  CHECK(t.x(0) == Catch::Approx(1.0));
  CHECK(t.x(1) == 0.0);
}

TEST_CASE("classical l2 oracle", "[regression]") {
  RMat a(2, 2);
  a << 2, 0, 0, 1;
  RVec b(2);
  b << 2, 1;
  auto tiny = classical_oracle_l2(a, b, 1e-12, RMat::Identity(2, 2));
  CHECK((tiny.x - classical_oracle_ols(a, b, 0.5).x).norm() < 1e-6);

  RMat one(1, 1);
  one << 1;
  CHECK(classical_oracle_l2(one, RVec::Ones(1), 1.0, one).x(0) == Catch::Approx(0.5));

  GenSpec g;
  g.seed = 14;
  g.m = 7;
  g.n = 4;
  g.r = 2;
  auto inst = gen_instance(g);
  RMat L = RMat::Identity(4, 4);
  L(0, 1) = 0.3;
  auto r = classical_oracle_l2(inst.A, inst.b, 0.4, L);
  CHECK(r.discrepancy <= 1e-9);
}

TEST_CASE("gamma metrics", "[regression]") {
  GenSpec g;
  g.seed = 2;
  g.m = 6;
  g.n = 3;
  g.r = 2;
  CHECK(gamma_metrics(gen_instance(g)).gamma == Catch::Approx(1.0));
  g.gamma = 0.6;
  auto inst = gen_instance(g);
  const double gm = gamma_metrics(inst).gamma;
  CHECK(gm == Catch::Approx(0.6).margin(1e-6));
  const RVec x = classical_oracle_ols(inst.A, inst.b, 0.0).x;
  const double res = (inst.A * x - inst.b).squaredNorm() / inst.b.squaredNorm();
  CHECK(gm * gm + res == Catch::Approx(1.0).margin(1e-9));

  RMat c(2, 1);
  c << 1, 0;
  RVec perp(2);
  perp << 0, 1;
  CHECK(detail::column_overlap(c, perp) == 0.0);
}

TEST_CASE("solve_ols on diag(2,1)", "[regression]") {
  RMat a(2, 2);
  a << 2, 0, 0, 1;
  RVec b(2);
  b << 2, 1;
  auto r = solve_ols(build_instance({{a, b}}, 0.5), 1e-2, ApplyMode::spectral);
  CHECK(r.feasible);
  CHECK(r.gamma == Catch::Approx(1.0));
  CHECK(r.direction(0) == Catch::Approx(1 / std::sqrt(2.0)));
  CHECK(r.direction(1) == Catch::Approx(1 / std::sqrt(2.0)));
  CHECK(r.fidelity >= 0.99);
}

TEST_CASE("gamma halves the success probability", "[regression]") {
  GenSpec g;
  g.seed = 31;
  g.m = 8;
  g.n = 3;
  g.r = 2;
  auto full = gen_instance(g);
  auto half = with_gamma(full, 1 / std::sqrt(2.0), 7);
  auto r1 = solve_ols(full, 1e-2, ApplyMode::spectral);
  auto r2 = solve_ols(half, 1e-2, ApplyMode::spectral);
  CHECK(r2.gamma == Catch::Approx(1 / std::sqrt(2.0)));
  CHECK(std::abs(r2.p_succ / r1.p_succ - 0.5) <= 3e-2);
}

TEST_CASE("infeasible gamma", "[regression]") {
  RMat c(2, 1);
  c << 1, 0;
  RVec perp(2);
  perp << 0, 1;
  auto r = solve_ols(build_instance({{c, perp}}, 1.0), 1e-2, ApplyMode::spectral);
  CHECK_FALSE(r.feasible);
}

TEST_CASE("partition invariance", "[regression]") {
  GenSpec g;
  g.seed = 44;
  g.m = 8;
  g.n = 3;
  g.r = 4;
  auto a = gen_instance(g);
  auto b = build_instance(split_rows(a.A, a.b, 1), a.delta);
  auto ra = solve_ols(a, 1e-2, ApplyMode::spectral);
  auto rb = solve_ols(b, 1e-2, ApplyMode::spectral);
  CHECK(std::abs(ra.direction.dot(rb.direction)) >= 1 - 1e-6);
  CHECK(ra.qubits_total != rb.qubits_total);
}

TEST_CASE("solve_l2 and ridge", "[regression]") {
  RMat one(1, 1);
  one << 1;
  auto scalar = build_instance({{one, RVec::Ones(1)}}, 1.0);
  auto rs = solve_l2(scalar, {1.0, one}, 1e-2, ApplyMode::spectral);
  CHECK(rs.direction(0) == Catch::Approx(1.0));
  CHECK(rs.delta_param == Catch::Approx(1.0));

  GenSpec g;
  g.seed = 71;
  g.m = 8;
  g.n = 4;
  g.r = 2;
  auto inst = gen_instance(g);
  RMat L = RMat::Zero(4, 4);
  L.diagonal() << 1, 2, 4, 8;
  auto rl = solve_l2(inst, {0.05, L}, 1e-2, ApplyMode::spectral);
  CHECK(rl.fidelity >= 1 - 1e-2);
  CHECK(rl.reg == "l2");

  auto rr = solve_ridge(inst, 0.3, 1e-2, ApplyMode::spectral);
  CHECK(rr.delta_param == Catch::Approx(std::sqrt(0.3)));
  auto ri = solve_l2(inst, {0.3, RMat::Identity(4, 4)}, 1e-2, ApplyMode::spectral);
  CHECK(rr.direction == ri.direction);
  CHECK(rr.reg == "ridge");
}
