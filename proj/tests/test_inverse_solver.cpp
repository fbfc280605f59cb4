#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "liouville/errors.hpp"
#include "liouville/inverse_solver.hpp"
#include "support.hpp"

using namespace liouville;
using namespace testing_support;
using std::numbers::pi;

namespace {

const auto inf = BoundaryParam::dirichlet();

GridFunction sines(int n, std::vector<double> amps) { return sine_impedance(n, std::move(amps)).q(); }

// Column-wise central differences of the grid transform, projected by Simpson quadrature.
std::vector<std::vector<double>> fd_jacobian(const Impedance& q, const ConditionU& cfg, int K) {
  const int n = q.cells();
  const double eps = 1e-6;
  std::vector<std::vector<double>> J(K, std::vector<double>(K));
  for (int l = 1; l <= K; ++l) {
    auto dir = pinned(n, [l](double x) { return std::sin(pi * l * x); });
    auto plus = forward_transform(Impedance(q.q() + eps * dir), cfg).p();
    auto minus = forward_transform(Impedance(q.q() - eps * dir), cfg).p();
    auto col = fourier_project((plus - minus) * (0.5 / eps), FourierBasis::cosine_pi, K);
    for (int k = 0; k < K; ++k) J[k][l - 1] = col.coefficients[k];
  }
  return J;
}

double fitted_error(const GridFunction& fit, const std::function<double(double)>& f) {
  return l2_norm(fit - GridFunction::sample(fit.cells(), f));
}

}  // namespace

TEST_CASE("inversion config validation") {
  InversionConfig c;
  c.K = 0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c.K = 4;
  c.tolerance = 0.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("invert zero") {
  auto r = invert_transform_report(Potential(GridFunction::zero(512)), ConditionU::zero());
  CHECK(r.report.converged);
  CHECK(sup_norm(r.q.q()) == 0.0);
}

TEST_CASE("inversion roundtrip") {
  for (auto cfg : {ConditionU::zero(), ConditionU(Polynomial{{0.0, 0.3, 0.5}}, U2Term::exponential(1.0, 1.0))}) {
    auto qs = sines(2048, {1.0, -0.2});
    auto r = invert_transform_report(forward_transform(Impedance(qs), cfg), cfg);
    CHECK(l2_norm(r.q.q() - qs) <= 1e-6);
    CHECK(r.q.q().front() == 0.0);
    CHECK(std::abs(r.q.q().back()) <= 1e-12);
    CHECK(r.report.final_residual <= 1e-10);
    CHECK(r.report.grid_residual <= 1e-8);
    CHECK_FALSE(r.report.homotopy);
  }
}

TEST_CASE("Newton contracts quadratically") {
  auto qs = sines(2048, {3.0, -0.6});
  auto r = invert_transform_report(forward_transform(Impedance(qs), ConditionU::zero()), ConditionU::zero());
  const auto& res = r.report.residuals;
  REQUIRE(res.size() >= 4);
  for (std::size_t k = res.size() - 3; k < res.size(); ++k) CHECK(res[k] <= 10 * res[k - 1] * res[k - 1] + 1e-13);
  for (double t : r.report.steps) CHECK(t > 0);
}

TEST_CASE("homotopy fallback") {
  auto qs = sines(2048, {40.0, -8.0});
  auto r = invert_transform_report(forward_transform(Impedance(qs), ConditionU::zero()), ConditionU::zero());
  CHECK(r.report.homotopy);
  CHECK(l2_norm(r.q.q() - qs) <= 1e-6);
}

TEST_CASE("inversion failure carries the residual history") {
  InversionConfig c;
  c.max_iterations = 1;
  c.homotopy_steps = 1;
  auto p = forward_transform(Impedance(sines(1024, {5.0})), ConditionU::zero());
  try {
    invert_transform(p, ConditionU::zero(), c);
    FAIL("expected InversionError");
  } catch (const InversionError& e) {
    CHECK(e.residual_history().size() >= 2);
    CHECK(std::string(e.what()).find("residual") != std::string::npos);
  }
}

TEST_CASE("inverse map keeps symmetry") {
  auto qs = pinned(2048, [](double x) { return std::sin(2 * pi * x) + 0.4 * std::sin(6 * pi * x); });
  auto p = forward_transform(Impedance(qs), ConditionU::zero());
  CHECK(symmetry_defect(p.p(), Symmetry::even) <= 1e-10);
  auto q = invert_transform(p, ConditionU::zero());
  CHECK(symmetry_defect(q.q(), Symmetry::odd) <= 1e-6);
}

TEST_CASE("Galerkin Jacobian") {
  const int K = 16;
  auto J0 = galerkin_jacobian(Impedance(GridFunction::zero(2048)), ConditionU::zero(), K);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l) {
      double expect = k == l ? pi * (k + 1) : 0.0;
      CHECK(std::abs(J0[k][l] - expect) <= 1e-12 * (1 + std::abs(expect)));
    }

  for (auto [q, cfg] : {std::pair{Impedance(sines(2048, {1.0})), ConditionU::zero()},
                        std::pair{Impedance(sines(2048, {0.5, 0.3})), ConditionU(Polynomial{{0.0, 0.0, 1.0}}, U2Term::exponential(1.0, 2.0))}}) {
    auto J = galerkin_jacobian(q, cfg, K);
    auto F = fd_jacobian(q, cfg, K);
    for (int l = 0; l < K; ++l) {
      double num = 0.0, den = 0.0;
      for (int k = 0; k < K; ++k) {
        num += std::pow(J[k][l] - F[k][l], 2);
        den += F[k][l] * F[k][l];
      }
      CHECK(std::sqrt(num / den) <= 1e-4);
    }
  }
}

TEST_CASE("fit target validation") {
  auto d = compute_spectral_data(ProblemKind::schrodinger(Potential(GridFunction::zero(512))), inf, inf, 6);
  CHECK_THROWS_AS(make_fit_target(FitRegime::dirichlet, d, 13), FitError);
  CHECK_THROWS_AS(make_fit_target(FitRegime::mixed, d, 6), FitError);
  auto bad = d;
  std::swap(bad.eigenvalues[2], bad.eigenvalues[3]);
  try {
    make_fit_target(FitRegime::dirichlet, bad, 6);
    FAIL("expected FitError");
  } catch (const FitError& e) {
    CHECK(e.stage() == "target");
  }
  auto t = make_fit_target(FitRegime::symmetric_dirichlet, d, 6);
  auto back = fit_target_from_json(nlohmann::json::parse(to_json(t).dump()));
  CHECK(back.regime == FitRegime::symmetric_dirichlet);
  CHECK(back.N == 6);
  CHECK(back.data.eigenvalues == d.eigenvalues);
  CHECK(fit_regime_from_string(to_string(FitRegime::generic)) == FitRegime::generic);
}

TEST_CASE("fit zero data") {
  auto d = compute_spectral_data(ProblemKind::schrodinger(Potential(GridFunction::zero(1024))), inf, inf, 4);
  auto p = fit_potential(make_fit_target(FitRegime::dirichlet, d, 4));
  CHECK(l2_norm(p.p()) <= 1e-6);

  auto di = compute_spectral_data(ProblemKind::impedance(Impedance(GridFunction::zero(1024)), ConditionU::zero()),
                                  inf, inf, 4);
  auto q = fit_impedance(make_fit_target(FitRegime::dirichlet, di, 4), ConditionU::zero());
  CHECK(l2_norm(q.q()) <= 1e-6);
}

TEST_CASE("symmetric eigenvalue-only fit") {
  auto f = [](double x) { return std::cos(2 * pi * x) - 0.3 * std::cos(4 * pi * x); };
  auto d = compute_spectral_data(ProblemKind::schrodinger(Potential(GridFunction::sample(2048, f))), inf, inf, 6);
  auto r = fit_potential_report(make_fit_target(FitRegime::symmetric_dirichlet, d, 6));
  CHECK(fitted_error(r.p.p(), f) <= 1e-4);
  CHECK(symmetry_defect(r.p.p(), Symmetry::even) <= 1e-12);
  CHECK(r.report.final_residual <= 1e-8);
}

TEST_CASE("generic fit with eigenvalues and norming constants") {
  auto f = [](double x) { return std::cos(2 * pi * x) + 0.5 * std::sin(2 * pi * x) - 0.3 * std::cos(4 * pi * x); };
  auto d = compute_spectral_data(ProblemKind::schrodinger(Potential(GridFunction::sample(2048, f))),
                                 BoundaryParam::robin(1.0), BoundaryParam::robin(-0.5), 7);
  auto t = make_fit_target(FitRegime::generic, d, 6);
  CHECK(t.required_count() == 7);
  auto r = fit_potential_report(t);
  CHECK(fitted_error(r.p.p(), f) <= 1e-3);
}

TEST_CASE("fit identifiability") {
  auto f = [](double x) { return std::cos(2 * pi * x) - 0.3 * std::cos(4 * pi * x); };
  auto d = compute_spectral_data(ProblemKind::schrodinger(Potential(GridFunction::sample(2048, f))), inf, inf, 6);
  auto base = fit_potential(make_fit_target(FitRegime::symmetric_dirichlet, d, 6));
  for (int i : {0, 3}) {
    auto moved = d;
    moved.eigenvalues[i] += 1e-3;
    auto p = fit_potential(make_fit_target(FitRegime::symmetric_dirichlet, moved, 6));
    CHECK(l2_norm(p.p() - base.p()) >= 1e-4);
  }
}

TEST_CASE("impedance fits") {
  auto f = [](double x) { return 0.4 * std::sin(2 * pi * x); };
  auto q = Impedance(pinned(2048, f));
  auto d = compute_spectral_data(ProblemKind::impedance(q, ConditionU::zero()), inf, inf, 6);
  auto r = fit_impedance_report(make_fit_target(FitRegime::dirichlet, d, 6), ConditionU::zero());
  CHECK(fitted_error(r.q.q(), f) <= 1e-3);
  CHECK(r.verify_residual <= 1e-6);

  ConditionU cfg({}, U2Term::exponential(0.5, 1.0));
  auto dm = compute_spectral_data(ProblemKind::impedance(q, cfg), inf, BoundaryParam::robin(1.0), 7);
  auto rm = fit_impedance_report(make_fit_target(FitRegime::mixed, dm, 6), cfg);
  CHECK(fitted_error(rm.q.q(), f) <= 1e-3);
}
