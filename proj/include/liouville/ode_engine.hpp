#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "liouville/function_space.hpp"
#include "liouville/potential_model.hpp"

namespace liouville {

/// Boundary coefficient: finite real or the Dirichlet value infinity.
class BoundaryParam {
 public:
  static BoundaryParam dirichlet() { return BoundaryParam(); }
  static BoundaryParam robin(double value) { return BoundaryParam(value); }

  bool is_dirichlet() const { return !value_.has_value(); }
  /// Finite value; throws DomainError for Dirichlet.
  double value() const;
  std::string to_string() const;

  friend bool operator==(const BoundaryParam&, const BoundaryParam&) = default;

 private:
  BoundaryParam() = default;
  explicit BoundaryParam(double v);
  std::optional<double> value_;
};

void to_json(nlohmann::json& j, const BoundaryParam& b);
BoundaryParam boundary_from_json(const nlohmann::json& j);

enum class ProblemType { schrodinger, impedance };

namespace detail {
struct LevelTables;
}

/// Either S_p = -y'' + p y or the impedance operator -rho^-2 (rho^2 f')' + u f.
///
/// Impedance problems are integrated in the expanded form f'' = -2 q f' + (u - lambda) f.
/// The coefficient tables are computed once at construction.

class ProblemKind {
 public:
  static ProblemKind schrodinger(Potential p);
  static ProblemKind impedance(Impedance q, ConditionU cfg);

  ProblemType type() const { return type_; }
  int cells() const { return potential_.cells(); }

  /// rho(1); 1 for Schrodinger problems.
  double rho_end() const { return rho_end_; }
  /// int (q^2 + u) for impedance problems, int p (zero up to roundoff) for Schrodinger.
  double c0() const { return c0_; }

  /// Zero-order coefficient: p or u.
  const GridFunction& potential() const { return potential_; }
  /// First-order coefficient -2q; empty for Schrodinger problems.
  const std::optional<GridFunction>& drift() const { return drift_; }

  const std::optional<Potential>& schrodinger_potential() const { return p_; }
  const std::optional<Impedance>& impedance_function() const { return q_; }
  const std::optional<ConditionU>& condition() const { return cfg_; }
  const std::optional<ImpedanceProfile>& profile() const { return profile_; }

  /// Integration tables for a grid level (throws DomainError if the level is too coarse).
  const detail::LevelTables& tables(int level) const;
  int max_level() const;
  /// h * omega on a level, omega^2 = max(0, lambda - min potential) + sup(drift)^2 / 4.
  double step_phase(int level, double lambda) const;

 private:
  ProblemKind(ProblemType type, GridFunction potential);

  ProblemType type_;
  GridFunction potential_;
  std::optional<GridFunction> drift_;
  double rho_end_ = 1.0;
  double c0_ = 0.0;
  double min_potential_ = 0.0;
  double max_drift_sq_ = 0.0;
  std::optional<Potential> p_;
  std::optional<Impedance> q_;
  std::optional<ConditionU> cfg_;
  std::optional<ImpedanceProfile> profile_;
  std::shared_ptr<const std::vector<detail::LevelTables>> tables_;

  void build_tables();
};

struct ShootOptions {
  /// 0 integrates with step 1/n; level L uses every 2^L-th node (step 2^L/n).
  int level = 0;
  /// Also integrate z = dy/dlambda.
  bool variational = false;
};

/// Solution of the governing ODE at fixed lambda sampled on the integration grid.
///
/// Large solutions are renormalised on the fly: the true value at node j is
/// y[j] * exp(log_scale[j]) (log_scale empty when no rescaling happened).
struct StateTrace {
  double lambda = 0.0;
  GridFunction y;
  GridFunction dy;
  std::optional<GridFunction> dz_lambda;   ///< dy/dlambda when variational
  std::optional<GridFunction> ddz_lambda;  ///< d(y')/dlambda when variational
  std::vector<double> log_scale;

  double scale(int j) const { return log_scale.empty() ? 0.0 : log_scale[j]; }
  double y_at(int j) const;
  double dy_at(int j) const;
  /// Multiplies the whole trace by s (s != 0).
  StateTrace scaled(double s) const;
};

/// Initial data (y(0), y'(0)) = (y0, dy0).
StateTrace shoot_forward(const ProblemKind& prob, double lambda, double y0, double dy0,
                         const ShootOptions& opts = {});
/// Forward shot honouring the left boundary: (0, 1) for Dirichlet, (1, a) otherwise.
StateTrace shoot_left(const ProblemKind& prob, double lambda, const BoundaryParam& a,
                      const ShootOptions& opts = {});
/// Terminal data (y(1), y'(1)) = (-1, b), or (0, -1) for b = infinity.
StateTrace shoot_backward(const ProblemKind& prob, double lambda, const BoundaryParam& b,
                          const ShootOptions& opts = {});

/// Wronskian value split as mantissa * exp(log_scale).
struct WronskianValue {
  double mantissa = 0.0;
  double derivative_mantissa = 0.0;  ///< dw/dlambda on the same scale
  double log_scale = 0.0;

  double value() const;
  double derivative() const;
  int sign() const { return (mantissa > 0) - (mantissa < 0); }
};

/// rho(1) (Y'(1) + b Y(1)) for finite b and rho(1) Y(1) for b = infinity, where Y is the
/// left shot (phi for a = infinity, theta + a phi otherwise).
WronskianValue wronskian(const ProblemKind& prob, double lambda, const BoundaryParam& a,
                         const BoundaryParam& b, const ShootOptions& opts = {});

/// Scale of the Prufer angle atan2(S y, y'): S = sqrt(max(1, |lambda|)).
double prufer_scale(double lambda);

/// Continuous Prufer angle atan2(S y, y') at x = 1 of a trace, unwrapped from x = 0.
/// Multiples of pi are crossed exactly at the zeros of y, always upwards.
double prufer_angle_end(const StateTrace& trace);

/// Interior zeros of the left shot on (0, 1).
int oscillation_count(const ProblemKind& prob, double lambda, const BoundaryParam& a,
                      const ShootOptions& opts = {});

/// Number of eigenvalues strictly below lambda for boundary data (a, b).
int eigenvalues_below(const ProblemKind& prob, double lambda, const BoundaryParam& a,
                      const BoundaryParam& b, const ShootOptions& opts = {});

/// Target Prufer angle at x = 1 of the lowest eigenfunction: pi for Dirichlet,
/// atan2(S, -b) otherwise. Eigenvalue k sits where the end angle equals target + k pi.
double prufer_target(const BoundaryParam& b, double lambda);

/// End state of the left shot: what eigenvalue searches need without storing a trace.
struct ShotSummary {
  WronskianValue w;
  double end_angle = 0.0;  ///< unwrapped Prufer angle at x = 1
};

ShotSummary shoot_summary(const ProblemKind& prob, double lambda, const BoundaryParam& a,
                          const BoundaryParam& b, const ShootOptions& opts = {});

/// Entire extensions used for closed forms: cos sqrt(l), sin sqrt(l)/sqrt(l).
/// For l <= 0 they are summed from their power series.
double entire_cos_sqrt(double lambda);
double entire_sinc_sqrt(double lambda);

}  // namespace liouville
