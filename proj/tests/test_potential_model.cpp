#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "liouville/errors.hpp"
#include "liouville/potential_model.hpp"

using namespace liouville;
using std::numbers::pi;

namespace {

Impedance sine_q(int n, double amp, int k = 2) {
  // sin(k pi x) vanishes at both ends up to roundoff; pin the endpoints
  auto g = GridFunction::sample(n, [&](double x) { return amp * std::sin(k * pi * x); });
  std::vector<double> v(g.values().begin(), g.values().end());
  v.front() = v.back() = 0.0;
  return Impedance(GridFunction(v));
}

Impedance from_modes(int n, const std::vector<double>& c) {
  FourierRep r{FourierBasis::sine_pi, c};
  auto g = r.evaluate(n);
  std::vector<double> v(g.values().begin(), g.values().end());
  v.front() = v.back() = 0.0;
  return Impedance(GridFunction(v));
}

}  // namespace

TEST_CASE("type invariants") {
  CHECK_THROWS_AS(Impedance(GridFunction::constant(64, 1.0)), DomainError);
  CHECK_THROWS_AS(Potential(GridFunction::constant(64, 1e-3)), DomainError);
  CHECK_NOTHROW(Potential(GridFunction::sample(64, [](double x) { return std::cos(2 * pi * x); })));
  CHECK_THROWS(MonotoneBound({{0.0, 1.0}, {1.0, 0.5}}));
  auto mb = MonotoneBound::from_samples({{0.0, 1.0}, {2.0, 0.5}, {1.0, 3.0}});
  CHECK(mb.is_nondecreasing());
  CHECK(mb(1.5) == 3.0);
  CHECK(mb(2.5) == 3.0);
}

TEST_CASE("build rho") {
  auto z = build_rho(Impedance(GridFunction::zero(64)));
  CHECK(sup_norm(z.Q) == 0.0);
  CHECK(sup_norm(z.rho - GridFunction::constant(64, 1.0)) == 0.0);

  auto q = sine_q(1024, 1.0);
  auto prof = build_rho(q);
  double errQ = 0.0, errR = 0.0;
  for (int j = 0; j <= 1024; ++j) {
    double x = prof.Q.x(j), Q = (1 - std::cos(2 * pi * x)) / (2 * pi);
    errQ = std::max(errQ, std::abs(prof.Q[j] - Q));
    errR = std::max(errR, std::abs(prof.rho[j] - std::exp(Q)));
  }
  CHECK(errQ < 1e-10);
  CHECK(errR < 1e-10);
  CHECK(prof.rho[0] == 1.0);
  auto drho = differentiate(prof.rho);
  CHECK(std::abs(drho.front()) < 1e-8);
  CHECK(std::abs(drho.back()) < 1e-8);

  CHECK_THROWS_AS(build_rho(sine_q(256, 2000.0, 1)), RangeError);
}

TEST_CASE("evaluate u and c0") {
  auto q0 = Impedance(GridFunction::zero(128));
  CHECK(sup_norm(evaluate_u(q0, ConditionU::zero())) == 0.0);
  ConditionU ex({}, U2Term::exponential(2.5, 1.3));
  auto u = evaluate_u(q0, ex);
  CHECK(sup_norm(u - GridFunction::constant(128, 2.5)) < 1e-15);
  CHECK(compute_c0(q0, ConditionU::zero()) == 0.0);
  CHECK(compute_c0(q0, ex) == doctest::Approx(2.5).epsilon(1e-14));

  auto q = sine_q(1024, 1.0);
  CHECK(compute_c0(q, ConditionU::zero()) == doctest::Approx(0.5).epsilon(1e-12));

  ConditionU sq(Polynomial{{0.0, 0.0, 1.0}}, U2Term::exponential(1.0, 2.0));
  auto us = evaluate_u(q, sq);
  double err = 0.0;
  for (int j = 0; j <= 1024; ++j) {
    double x = j / 1024.0, s = std::sin(2 * pi * x), Q = (1 - std::cos(2 * pi * x)) / (2 * pi);
    err = std::max(err, std::abs(us[j] - (s * s + std::exp(-2 * Q))));
  }
  CHECK(err < 1e-10);

  // u2 increasing violates Condition U
  ConditionU bad({}, U2Term::polynomial({0.0, 1.0}));
  CHECK_THROWS_AS(evaluate_u(q, bad), ConditionUViolation);
  CHECK_FALSE(bad.holds_on_range(0.5));
  CHECK(ConditionU({}, U2Term::polynomial({0.0, 0.0, 1.0})).holds_on_range(0.0));
  CHECK_FALSE(ConditionU({}, U2Term::polynomial({0.0, 0.0, 1.0})).holds_on_range(0.1));
}

TEST_CASE("forward transform") {
  auto p0 = forward_transform(Impedance(GridFunction::zero(256)), ConditionU::zero());
  CHECK(sup_norm(p0.p()) == 0.0);

  auto p = forward_transform(sine_q(2048, 1.0), ConditionU::zero());
  double err = 0.0;
  for (int j = 0; j <= 2048; ++j) {
    double x = j / 2048.0;
    err = std::max(err, std::abs(p.p()[j] - (2 * pi * std::cos(2 * pi * x) - std::cos(4 * pi * x) / 2)));
  }
  CHECK(err < 1e-8);

  // independent oracle: trapezoid sums of the analytic terms give c0 and the mean
  double c0 = 0.0;
  const int m = 100000;
  for (int i = 0; i < m; ++i) {
    double s = std::sin(2 * pi * (i + 0.5) / m);
    c0 += s * s / m;
  }
  CHECK(c0 == doctest::Approx(compute_c0(sine_q(2048, 1.0), ConditionU::zero())).epsilon(1e-10));

  auto q = from_modes(1024, {0.0, 0.8, 0.0, -0.3, 0.0, 0.1});  // odd about 1/2
  CHECK(symmetry_defect(q.q(), Symmetry::odd) < 1e-14);
  CHECK(symmetry_defect(forward_transform(q, ConditionU::zero()).p(), Symmetry::even) <= 1e-10);
}

TEST_CASE("gauge exactness") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> c(-1.0, 1.0), E(0.0, 5.0), B(0.0, 4.0);
  for (int t = 0; t < 20; ++t) {
    auto q = from_modes(512, {c(rng), c(rng), c(rng), c(rng)});
    ConditionU cfg(Polynomial{{0.0, c(rng), c(rng)}}, U2Term::exponential(E(rng), B(rng)));
    auto p = forward_transform(q, cfg);
    CHECK(std::abs(integrate(p.p())) <= 1e-10 * (1 + l2_norm(p.p())));
  }
}

TEST_CASE("frechet derivative") {
  auto z = Impedance(GridFunction::zero(512));
  auto f = GridFunction::sample(512, [](double x) { return std::sin(pi * x) * std::sin(3 * pi * x); });
  auto df = frechet_apply(z, ConditionU::zero(), f);
  CHECK(sup_norm(df - differentiate(f)) < 1e-10);
  CHECK(sup_norm(frechet_apply(z, ConditionU::zero(), GridFunction::zero(512))) == 0.0);

  auto q = sine_q(2048, 1.0);
  ConditionU cfg(Polynomial{{0.0, 0.3, 0.5}}, U2Term::exponential(1.0, 1.5));
  auto probe = GridFunction::sample(2048, [](double x) { return std::sin(pi * x) * std::sin(pi * x) * std::sin(pi * x); });
  probe = GridFunction([&] {
    std::vector<double> v(probe.values().begin(), probe.values().end());
    v.front() = v.back() = 0.0;
    return v;
  }());
  const double eps = 1e-5;
  auto fd = (forward_transform(Impedance(q.q() + eps * probe), cfg).p() - forward_transform(q, cfg).p()) * (1 / eps);
  auto an = frechet_apply(q, cfg, probe);
  CHECK(l2_norm(fd - an) / l2_norm(an) <= 1e-4);
  CHECK(std::abs(integrate(an)) < 1e-10 * (1 + l2_norm(an)));

  auto g = GridFunction::sample(2048, [](double x) { return x * (1 - x); });
  auto lin = frechet_apply(q, cfg, 2.0 * probe - 3.0 * g);
  auto sep = 2.0 * an - 3.0 * frechet_apply(q, cfg, g);
  CHECK(sup_norm(lin - sep) < 1e-9);

  CHECK_THROWS_AS(frechet_apply(q, cfg, GridFunction::zero(64)), GridMismatchError);
}

TEST_CASE("estimate suite at q = 0") {
  auto rep = estimate_suite(Impedance(GridFunction::zero(256)), ConditionU::zero());
  CHECK(rep.all_hold());
  for (const auto& e : rep.entries) {
    CHECK(e.lhs == 0.0);
    CHECK(e.rhs == 0.0);
  }
}

TEST_CASE("estimate suite closed form") {
  auto rep = estimate_suite(sine_q(2048, 1.0), ConditionU::zero());
  CHECK(rep.all_hold());
  const auto& e = rep.at("Pe4.identity");
  CHECK(e.lhs == doctest::Approx(2 * pi * pi + 0.125).epsilon(1e-8));
  CHECK(e.rhs == doctest::Approx(2 * pi * pi + 3.0 / 8 - 0.25).epsilon(1e-8));
  CHECK(rep.at("Pe1.identity").margin <= 1e-8);
  CHECK(rep.cross_term == 0.0);
}

TEST_CASE("estimate suite on random admissible inputs") {
  std::mt19937 rng(20240611);
  std::uniform_real_distribution<double> c(-1.0, 1.0), E(0.0, 5.0), B(0.0, 4.0);
  for (int t = 0; t < 100; ++t) {
    auto q = from_modes(512, {c(rng), 0.5 * c(rng), 0.25 * c(rng), 0.1 * c(rng)});
    bool zero_u = t % 4 == 0;
    ConditionU cfg = zero_u ? ConditionU::zero() : ConditionU({}, U2Term::exponential(E(rng), B(rng)));
    auto rep = estimate_suite(q, cfg);
    INFO("sample " << t);
    CHECK(rep.all_hold());
    CHECK(rep.at("Pe1.identity").margin <= 1e-8);
    CHECK(rep.at("Pe1.lower").holds);
    CHECK(rep.cross_term <= 0.0);
    if (zero_u) CHECK(rep.at("Pe4.identity").holds);
  }
}

TEST_CASE("condition U json") {
  auto cfg = condition_u_from_json(nlohmann::json::parse(R"({"u1":[0,1],"u2":{"kind":"exp","E":2,"beta":0.5}})"));
  CHECK(cfg.u2().kind == U2Term::Kind::exponential);
  auto back = condition_u_from_json(to_json(cfg));
  CHECK(back.u1().coeffs == cfg.u1().coeffs);
  CHECK(back.u2().E == 2.0);
  CHECK_THROWS_AS(condition_u_from_json(nlohmann::json::parse(R"({"u2":{"kind":"sin"}})")), ParseError);
}
