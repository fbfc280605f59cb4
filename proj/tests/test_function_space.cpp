#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "liouville/errors.hpp"
#include "liouville/function_space.hpp"

using namespace liouville;
using std::numbers::pi;

namespace {

double max_abs_diff(const GridFunction& f, const std::function<double(double)>& g) {
  double m = 0.0;
  for (int j = 0; j <= f.cells(); ++j) m = std::max(m, std::abs(f[j] - g(f.x(j))));
  return m;
}

}  // namespace

TEST_CASE("grid invariants") {
  CHECK_THROWS_AS(GridFunction{std::vector<double>(9, 0.0)}, DomainError);
  CHECK_THROWS_AS(GridFunction{std::vector<double>(18, 0.0)}, DomainError);  // odd n
  std::vector<double> v(17, 0.0);
  v[3] = std::nan("");
  CHECK_THROWS_AS(GridFunction{v}, DomainError);
  CHECK_THROWS_AS(GridFunction::zero(32) + GridFunction::zero(64), GridMismatchError);
  CHECK_THROWS_AS(inner_product(GridFunction::zero(32), GridFunction::zero(64)), GridMismatchError);
}

TEST_CASE("differentiate") {
  CHECK(sup_norm(differentiate(GridFunction::constant(64, 3.7))) < 1e-12);

  auto s = GridFunction::sample(2048, [](double x) { return std::sin(2 * pi * x); });
  double err = max_abs_diff(differentiate(s), [](double x) { return 2 * pi * std::cos(2 * pi * x); });
  CHECK(err / (2 * pi) <= 1e-6);

  // cubic and below are reproduced exactly by the 4th-order stencils
  auto par = GridFunction::sample(64, [](double x) { return x * (1 - x); });
  CHECK(max_abs_diff(differentiate(par), [](double x) { return 1 - 2 * x; }) < 1e-11);
}

TEST_CASE("cumulative integral") {
  auto g = cumulative_integral(GridFunction::constant(128, 1.0));
  CHECK(max_abs_diff(g, [](double x) { return x; }) < 1e-13);
  CHECK(sup_norm(cumulative_integral(GridFunction::zero(64))) == 0.0);

  auto s = GridFunction::sample(1024, [](double x) { return std::sin(2 * pi * x); });
  auto J = cumulative_integral(s);
  CHECK(J[0] == 0.0);
  CHECK(max_abs_diff(J, [](double x) { return (1 - std::cos(2 * pi * x)) / (2 * pi); }) < 1e-9);
  CHECK(J.back() == doctest::Approx(integrate(s)).epsilon(1e-15));
}

TEST_CASE("integral and derivative are compatible with second-order decay or better") {
  auto f = [](double x) { return std::exp(x) * std::cos(3 * x); };
  double prev = 0.0;
  for (int n : {64, 128, 256}) {
    auto g = GridFunction::sample(n, f);
    double e = l2_norm(differentiate(cumulative_integral(g)) - g);
    if (prev > 0) CHECK(prev / e > 3.5);
    prev = e;
  }
}

TEST_CASE("inner product and norms") {
  auto s = GridFunction::sample(512, [](double x) { return std::sin(pi * x); });
  CHECK(inner_product(s, s) == doctest::Approx(0.5).epsilon(1e-12));
  auto z = GridFunction::zero(64);
  CHECK(l2_norm(z) == 0.0);
  CHECK(sup_norm(z) == 0.0);

  for (int n : {64, 256, 1000}) {
    auto t = GridFunction::sample(n, [](double x) { return std::sin(2 * pi * x); });
    CHECK(sup_norm(t) <= 1.0 + 1e-15);
    CHECK(sup_norm(t) >= 1.0 - 10.0 / (double(n) * n));
  }

  auto a = GridFunction::sample(128, [](double x) { return x * x - 0.3; });
  auto b = GridFunction::sample(128, [](double x) { return std::cos(5 * x); });
  CHECK(inner_product(a, b) == inner_product(b, a));
  CHECK(inner_product(a, a) >= 0.0);
}

TEST_CASE("seq norm") {
  CHECK(seq_norm({{0, 0, 0}, 1.0}) == 0.0);
  CHECK(seq_norm({{1.0}, 0.0}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(seq_norm({{1.0}, 1.0}) == doctest::Approx(std::sqrt(2.0) * 2 * pi));
  // 2 * (1 + 4^2 * 0.25) with alpha = 1/2 weights (2 pi n)
  CHECK(seq_norm({{1.0, 0.5}, 0.5}) == doctest::Approx(std::sqrt(2 * (2 * pi + 4 * pi * 0.25))));
}

TEST_CASE("symmetry projection") {
  auto s = GridFunction::sample(256, [](double x) { return std::sin(2 * pi * x); });
  auto c = GridFunction::sample(256, [](double x) { return std::cos(2 * pi * x); });
  CHECK(symmetry_defect(s, Symmetry::odd) < 1e-14);
  CHECK(symmetry_defect(c, Symmetry::even) < 1e-14);
  CHECK(sup_norm(symmetry_project(s, Symmetry::even)) < 1e-14);

  auto f = GridFunction::sample(256, [](double x) { return std::exp(x) + x * x * x; });
  for (auto cls : {Symmetry::odd, Symmetry::even}) {
    auto p1 = symmetry_project(f, cls);
    auto p2 = symmetry_project(p1, cls);
    for (std::size_t j = 0; j < p1.size(); ++j) REQUIRE(p1[j] == p2[j]);
  }
  auto sum = symmetry_project(f, Symmetry::odd) + symmetry_project(f, Symmetry::even);
  CHECK(sup_norm(sum - f) < 1e-14);
}

TEST_CASE("Sobolev embeddings for endpoint-vanishing functions") {
  const std::vector<std::function<double(double)>> fs = {
      [](double x) { return std::sin(pi * x); },
      [](double x) { return x * (1 - x) * std::exp(3 * x); },
      [](double x) { return std::sin(2 * pi * x) - 0.7 * std::sin(9 * pi * x); },
  };
  for (const auto& f : fs) {
    auto g = GridFunction::sample(1024, f);
    CHECK(sup_norm(g) <= l2_norm(differentiate(g)));
    CHECK(sup_norm(cumulative_integral(g)) <= l2_norm(g));
  }
}

TEST_CASE("fourier representations") {
  FourierRep s{FourierBasis::sine_pi, {0.3, -1.2, 0.5}};
  auto gs = s.evaluate(128);
  CHECK(std::abs(gs.front()) < 1e-15);
  CHECK(std::abs(gs.back()) < 1e-14);

  FourierRep c{FourierBasis::cosine_pi, {1.0, 0.4}};
  CHECK(std::abs(mean(c.evaluate(128))) < 1e-14);

  FourierRep full{FourierBasis::full_2pi, {2.0, 0.5, -0.25, 0.1, 0.0}};
  CHECK(full.modes() == 2);
  CHECK(std::abs(mean(full.mean_stripped().evaluate(256))) < 1e-14);
  CHECK(mean(full.evaluate(256)) == doctest::Approx(2.0));

  auto back = fourier_project(full.evaluate(512), FourierBasis::full_2pi, 3);
  REQUIRE(back.coefficients.size() == 7);
  for (std::size_t i = 0; i < full.coefficients.size(); ++i)
    CHECK(back.coefficients[i] == doctest::Approx(full.coefficients[i]).epsilon(1e-10));
  CHECK(std::abs(back.coefficients[5]) < 1e-12);
}

TEST_CASE("csv roundtrip") {
  auto f = GridFunction::sample(64, [](double x) { return std::exp(-x) * std::sin(7 * x); });
  std::stringstream ss;
  write_csv(ss, f);
  CHECK(ss.str().rfind("x,value\n", 0) == 0);
  auto g = read_csv(ss);
  REQUIRE(g.cells() == 64);
  for (int j = 0; j <= 64; ++j) CHECK(g[j] == f[j]);

  std::stringstream bad("x,value\n0,1\n0.5,abc\n");
  CHECK_THROWS_AS(read_csv(bad), ParseError);
  CHECK_THROWS_AS(read_csv_file("/nonexistent/file.csv"), ParseError);
}
