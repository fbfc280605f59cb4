#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace liouville {

/// Real function on [0,1] sampled at x_j = j/n, j = 0..n.
///
/// Immutable after construction apart from the explicit arithmetic helpers,
/// which return new values. Requires n >= 16, n even, finite samples.
class GridFunction {
 public:
  explicit GridFunction(std::vector<double> values);

  static GridFunction constant(int cells, double value);
  static GridFunction zero(int cells) { return constant(cells, 0.0); }
  static GridFunction sample(int cells, const std::function<double(double)>& f);

  int cells() const { return static_cast<int>(values_.size()) - 1; }
  std::size_t size() const { return values_.size(); }
  double step() const { return 1.0 / cells(); }
  double x(int j) const { return static_cast<double>(j) / cells(); }

  double operator[](std::size_t j) const { return values_[j]; }
  double front() const { return values_.front(); }
  double back() const { return values_.back(); }
  std::span<const double> values() const { return values_; }

  /// Pointwise transform.
  GridFunction map(const std::function<double(double)>& f) const;

  /// Values at every `stride`-th node (stride must divide n).
  GridFunction subsample(int stride) const;

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  GridFunction& operator*=(double s);

 private:
  std::vector<double> values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(GridFunction a, double s);
GridFunction operator*(double s, GridFunction a);
/// Pointwise product.
GridFunction hadamard(const GridFunction& a, const GridFunction& b);

void require_same_grid(const GridFunction& a, const GridFunction& b);

/// Fourth-order central differences, one-sided fourth-order stencils at the ends.
GridFunction differentiate(const GridFunction& f);

/// g(x) = int_0^x f. Composite Simpson at even nodes (so g(1) == integrate(f)),
/// a four-point interval rule at odd nodes.
GridFunction cumulative_integral(const GridFunction& f);

/// Composite Simpson over [0,1].
double integrate(const GridFunction& f);
double mean(const GridFunction& f);

double inner_product(const GridFunction& f, const GridFunction& g);
double l2_norm(const GridFunction& f);
double sup_norm(const GridFunction& f);

enum class Symmetry { odd, even };

/// (f(x) -+ f(1-x)) / 2: odd keeps the part with f(x) = -f(1-x).
GridFunction symmetry_project(const GridFunction& f, Symmetry cls);
double symmetry_defect(const GridFunction& f, Symmetry cls);

enum class FourierBasis {
  sine_pi,    ///< sin(pi k x), k >= 1
  cosine_pi,  ///< cos(pi k x), k >= 1
  full_2pi,   ///< 1, sqrt2 cos(2 pi k x), sqrt2 sin(2 pi k x)
};

/// Coefficient vector over one of the trigonometric bases.
///
/// sine_pi / cosine_pi: coefficients[i] multiplies the mode k = i + 1.
/// full_2pi: [c0, a1, b1, a2, b2, ...] with a_k on sqrt2 cos, b_k on sqrt2 sin.
struct FourierRep {
  FourierBasis basis = FourierBasis::sine_pi;
  std::vector<double> coefficients;

  GridFunction evaluate(int cells) const;
  /// Same representation with the constant term removed (full_2pi only).
  FourierRep mean_stripped() const;
  /// Number of trigonometric modes k >= 1.
  int modes() const;
};

/// Projection of f on the first `modes` basis functions by composite Simpson.
FourierRep fourier_project(const GridFunction& f, FourierBasis basis, int modes);

/// Truncated weighted sequence h_1..h_N with norm^2 = 2 sum (2 pi n)^{2 alpha} h_n^2.
struct SequenceData {
  std::vector<double> entries;
  double alpha = 0.0;
};

double seq_norm(const SequenceData& h);

/// CSV with header `x,value` and n+1 rows.
void write_csv(std::ostream& out, const GridFunction& f);
GridFunction read_csv(std::istream& in);
GridFunction read_csv_file(const std::string& path);

}  // namespace liouville
