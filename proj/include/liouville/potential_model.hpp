#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "liouville/function_space.hpp"

namespace liouville {

/// Impedance q = rho'/rho with q(0) = q(1) = 0.
class Impedance {
 public:
  explicit Impedance(GridFunction q);
  const GridFunction& q() const { return q_; }
  int cells() const { return q_.cells(); }

 private:
  GridFunction q_;
};

/// Zero-mean potential p of S_p = -d^2/dx^2 + p.
class Potential {
 public:
  explicit Potential(GridFunction p);
  const GridFunction& p() const { return p_; }
  int cells() const { return p_.cells(); }

 private:
  GridFunction p_;
};

struct Polynomial {
  std::vector<double> coeffs;  ///< c0 + c1 t + c2 t^2 + ...

  double operator()(double t) const;
  Polynomial derivative() const;
  bool is_zero() const;
};

/// u2 term of Condition U: zero, E exp(-beta t) or a polynomial.
struct U2Term {
  enum class Kind { zero, exponential, polynomial };
  Kind kind = Kind::zero;
  double E = 0.0;
  double beta = 0.0;
  Polynomial poly;

  double value(double t) const;
  double derivative(double t) const;
  bool is_zero() const;

  static U2Term zero() { return {}; }
  static U2Term exponential(double E, double beta);
  static U2Term polynomial(std::vector<double> coeffs);
};

/// Tabulated nondecreasing majorant F: [0, inf) -> [0, inf).
///
/// Evaluates as an upper step function: F(t) is the largest tabulated value
/// whose abscissa does not exceed t.
class MonotoneBound {
 public:
  MonotoneBound() = default;
  explicit MonotoneBound(std::vector<std::pair<double, double>> table);

  /// Running maxima of arbitrary (abscissa, value) samples.
  static MonotoneBound from_samples(std::vector<std::pair<double, double>> samples);

  double operator()(double t) const;
  bool is_nondecreasing() const;
  bool empty() const { return table_.empty(); }
  const std::vector<std::pair<double, double>>& table() const { return table_; }

 private:
  std::vector<std::pair<double, double>> table_;
};

/// u = u1(q) + u2(Q) with u2' <= 0 on the operating range.
class ConditionU {
 public:
  ConditionU();
  ConditionU(Polynomial u1, U2Term u2);

  static ConditionU zero() { return {}; }

  const Polynomial& u1() const { return u1_; }
  const U2Term& u2() const { return u2_; }
  bool is_zero() const { return u1_.is_zero() && u2_.is_zero(); }

  const std::optional<MonotoneBound>& F1() const { return F1_; }
  const std::optional<MonotoneBound>& F2() const { return F2_; }
  void set_bounds(MonotoneBound F1, MonotoneBound F2);

  /// Checks u2'(t) <= 0 on 1024 samples of [-R, R]. Verdicts are cached per R.
  bool holds_on_range(double R) const;
  /// Throws ConditionUViolation when holds_on_range(R) is false.
  void validate(double R) const;

 private:
  struct Cache;
  Polynomial u1_;
  U2Term u2_;
  std::optional<MonotoneBound> F1_, F2_;
  std::shared_ptr<Cache> cache_;
};

ConditionU condition_u_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ConditionU& cfg);

/// Q = int_0^x q and rho = exp(Q).
struct ImpedanceProfile {
  GridFunction Q;
  GridFunction rho;
};

ImpedanceProfile build_rho(const Impedance& q);

GridFunction evaluate_u(const Impedance& q, const ConditionU& cfg);
double compute_c0(const Impedance& q, const ConditionU& cfg);

/// p = q' + q^2 + u - c0, with the residual mean of the discrete derivative removed.
Potential forward_transform(const Impedance& q, const ConditionU& cfg);

/// Linearisation of forward_transform at q applied to f (f(0) = f(1) = 0).
GridFunction frechet_apply(const Impedance& q, const ConditionU& cfg, const GridFunction& f);

/// A function together with its derivative and antiderivative int_0^x.
/// Lets callers with analytic representations bypass grid differentiation.
struct ImpedanceJet {
  GridFunction value;
  GridFunction derivative;
  GridFunction antiderivative;

  static ImpedanceJet from_grid(const GridFunction& f);
};

/// q' + q^2 + u (no mean removal). Validates Condition U on sup|Q|.
GridFunction transform_unshifted(const ImpedanceJet& q, const ConditionU& cfg);
/// f' + 2qf + u1'(q) f + u2'(Q) Jf (no mean removal).
GridFunction frechet_unshifted(const ImpedanceJet& q, const ConditionU& cfg, const ImpedanceJet& f);

struct EstimateEntry {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool identity = false;  ///< lhs == rhs expected; otherwise lhs <= rhs
  bool holds = false;
  double margin = 0.0;    ///< identity: |lhs - rhs| / max(1, |rhs|); inequality: rhs - lhs
};

struct EstimateReport {
  std::vector<EstimateEntry> entries;
  double cross_term = 0.0;  ///< (q^2, u2'(Q)), <= 0 under Condition U

  bool all_hold() const;
  const EstimateEntry& at(const std::string& name) const;
};

/// Default majorants: running maxima of ||u1(sq)||, ||u1'(sq)|| against ||s q'|| and of
/// ||u2'(sQ)|| against ||s q|| over s in [0, 1].
std::pair<MonotoneBound, MonotoneBound> calibrate_bounds(const Impedance& q, const ConditionU& cfg);

EstimateReport estimate_suite(const Impedance& q, const ConditionU& cfg,
                              double identity_tolerance = 1e-8);

}  // namespace liouville
