#include "liouville/function_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "liouville/errors.hpp"

namespace liouville {

GridFunction::GridFunction(std::vector<double> values) : values_(std::move(values)) {
  const int n = static_cast<int>(values_.size()) - 1;
  if (n < 16 || n % 2 != 0) {
    throw DomainError("GridFunction needs an even cell count >= 16, got " + std::to_string(n));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw DomainError("GridFunction sample is not finite");
  }
}

GridFunction GridFunction::constant(int cells, double value) {
  return GridFunction(std::vector<double>(static_cast<std::size_t>(cells) + 1, value));
}

GridFunction GridFunction::sample(int cells, const std::function<double(double)>& f) {
  std::vector<double> v(static_cast<std::size_t>(cells) + 1);
  for (int j = 0; j <= cells; ++j) v[j] = f(static_cast<double>(j) / cells);
  return GridFunction(std::move(v));
}

GridFunction GridFunction::map(const std::function<double(double)>& f) const {
  std::vector<double> v(values_.size());
  std::transform(values_.begin(), values_.end(), v.begin(), f);
  return GridFunction(std::move(v));
}

GridFunction GridFunction::subsample(int stride) const {
  if (stride < 1 || cells() % stride != 0) throw DomainError("subsample stride must divide n");
  std::vector<double> v;
  v.reserve(cells() / stride + 1);
  for (int j = 0; j <= cells(); j += stride) v.push_back(values_[j]);
  return GridFunction(std::move(v));
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  require_same_grid(*this, other);
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += other.values_[j];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  require_same_grid(*this, other);
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] -= other.values_[j];
  return *this;
}

GridFunction& GridFunction::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(GridFunction a, double s) { return a *= s; }
GridFunction operator*(double s, GridFunction a) { return a *= s; }

GridFunction hadamard(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b);
  std::vector<double> v(a.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = a[j] * b[j];
  return GridFunction(std::move(v));
}

void require_same_grid(const GridFunction& a, const GridFunction& b) {
  if (a.cells() != b.cells()) {
    throw GridMismatchError("grid mismatch: n = " + std::to_string(a.cells()) + " vs " +
                            std::to_string(b.cells()));
  }
}

GridFunction differentiate(const GridFunction& f) {
  const int n = f.cells();
  const double c = 1.0 / (12.0 * f.step());
  std::vector<double> d(f.size());
  d[0] = c * (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]);
  d[1] = c * (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]);
  for (int j = 2; j <= n - 2; ++j) d[j] = c * (f[j - 2] - 8 * f[j - 1] + 8 * f[j + 1] - f[j + 2]);
  d[n - 1] = c * (3 * f[n] + 10 * f[n - 1] - 18 * f[n - 2] + 6 * f[n - 3] - f[n - 4]);
  d[n] = c * (25 * f[n] - 48 * f[n - 1] + 36 * f[n - 2] - 16 * f[n - 3] + 3 * f[n - 4]);
  return GridFunction(std::move(d));
}

GridFunction cumulative_integral(const GridFunction& f) {
  const int n = f.cells();
  const double h = f.step();
  std::vector<double> g(f.size(), 0.0);
  for (int j = 2; j <= n; j += 2) g[j] = g[j - 2] + h / 3.0 * (f[j - 2] + 4 * f[j - 1] + f[j]);
  g[1] = h / 24.0 * (9 * f[0] + 19 * f[1] - 5 * f[2] + f[3]);
  for (int j = 3; j < n; j += 2) {
    g[j] = g[j - 1] + h / 24.0 * (-f[j - 2] + 13 * f[j - 1] + 13 * f[j] - f[j + 1]);
  }
  return GridFunction(std::move(g));
}

double integrate(const GridFunction& f) {
  const int n = f.cells();
  double odd = 0.0, even = 0.0;
  for (int j = 1; j < n; j += 2) odd += f[j];
  for (int j = 2; j < n; j += 2) even += f[j];
  return f.step() / 3.0 * (f[0] + f[n] + 4 * odd + 2 * even);
}

double mean(const GridFunction& f) { return integrate(f); }

double inner_product(const GridFunction& f, const GridFunction& g) {
  return integrate(hadamard(f, g));
}

double l2_norm(const GridFunction& f) { return std::sqrt(std::max(0.0, inner_product(f, f))); }

double sup_norm(const GridFunction& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

GridFunction symmetry_project(const GridFunction& f, Symmetry cls) {
  const int n = f.cells();
  const double sign = cls == Symmetry::even ? 1.0 : -1.0;
  std::vector<double> v(f.size());
  for (int j = 0; j <= n; ++j) v[j] = 0.5 * (f[j] + sign * f[n - j]);
  return GridFunction(std::move(v));
}

double symmetry_defect(const GridFunction& f, Symmetry cls) {
  return l2_norm(f - symmetry_project(f, cls));
}

GridFunction FourierRep::evaluate(int cells) const {
  using std::numbers::pi;
  const double r2 = std::numbers::sqrt2;
  return GridFunction::sample(cells, [&](double x) {
    double s = 0.0;
    switch (basis) {
      case FourierBasis::sine_pi:
        for (std::size_t i = 0; i < coefficients.size(); ++i) {
          s += coefficients[i] * std::sin(pi * (i + 1) * x);
        }
        break;
      case FourierBasis::cosine_pi:
        for (std::size_t i = 0; i < coefficients.size(); ++i) {
          s += coefficients[i] * std::cos(pi * (i + 1) * x);
        }
        break;
      case FourierBasis::full_2pi:
        if (!coefficients.empty()) s = coefficients[0];
        for (std::size_t i = 1; i < coefficients.size(); ++i) {
          const int k = static_cast<int>((i + 1) / 2);
          s += coefficients[i] * r2 * (i % 2 == 1 ? std::cos(2 * pi * k * x) : std::sin(2 * pi * k * x));
        }
        break;
    }
    return s;
  });
}

FourierRep FourierRep::mean_stripped() const {
  FourierRep r = *this;
  if (basis == FourierBasis::full_2pi && !r.coefficients.empty()) r.coefficients[0] = 0.0;
  return r;
}

int FourierRep::modes() const {
  if (basis == FourierBasis::full_2pi) return static_cast<int>(coefficients.size()) / 2;
  return static_cast<int>(coefficients.size());
}

FourierRep fourier_project(const GridFunction& f, FourierBasis basis, int modes) {
  using std::numbers::pi;
  FourierRep rep{basis, {}};
  const int n = f.cells();
  auto project = [&](const std::function<double(double)>& phi, double norm2) {
    return inner_product(f, GridFunction::sample(n, phi)) / norm2;
  };
  switch (basis) {
    case FourierBasis::sine_pi:
      for (int k = 1; k <= modes; ++k) {
        rep.coefficients.push_back(project([k](double x) { return std::sin(pi * k * x); }, 0.5));
      }
      break;
    case FourierBasis::cosine_pi:
      for (int k = 1; k <= modes; ++k) {
        rep.coefficients.push_back(project([k](double x) { return std::cos(pi * k * x); }, 0.5));
      }
      break;
    case FourierBasis::full_2pi: {
      const double r2 = std::numbers::sqrt2;
      rep.coefficients.push_back(integrate(f));
      for (int k = 1; k <= modes; ++k) {
        rep.coefficients.push_back(project([=](double x) { return r2 * std::cos(2 * pi * k * x); }, 1.0));
        rep.coefficients.push_back(project([=](double x) { return r2 * std::sin(2 * pi * k * x); }, 1.0));
      }
      break;
    }
  }
  return rep;
}

double seq_norm(const SequenceData& h) {
  double s = 0.0;
  for (std::size_t i = 0; i < h.entries.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    s += std::pow(2.0 * std::numbers::pi * n, 2.0 * h.alpha) * h.entries[i] * h.entries[i];
  }
  return std::sqrt(2.0 * s);
}

void write_csv(std::ostream& out, const GridFunction& f) {
  out << "x,value\n";
  char buf[96];
  for (int j = 0; j <= f.cells(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", f.x(j), f[j]);
    out << buf;
  }
}

GridFunction read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty grid CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,value") throw ParseError("grid CSV header must be `x,value`, got `" + line + "`");
  std::vector<double> xs, vs;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("grid CSV row without comma: " + line);
    try {
      xs.push_back(std::stod(line.substr(0, comma)));
      vs.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw ParseError("grid CSV row is not numeric: " + line);
    }
  }
  if (vs.size() < 17) throw ParseError("grid CSV has too few rows");
  const double n = static_cast<double>(vs.size() - 1);
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (std::abs(xs[j] - static_cast<double>(j) / n) > 1e-9) {
      throw ParseError("grid CSV abscissae are not the uniform grid j/n");
    }
  }
  try {
    return GridFunction(std::move(vs));
  } catch (const DomainError& e) {
    throw ParseError(std::string("grid CSV: ") + e.what());
  }
}

GridFunction read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_csv(in);
}

}  // namespace liouville
