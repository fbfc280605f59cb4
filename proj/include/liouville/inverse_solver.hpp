#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "liouville/potential_model.hpp"
#include "liouville/spectral_solver.hpp"

namespace liouville {

struct InversionConfig {
  int K = 32;                ///< sine modes of q / cosine modes of p
  int max_iterations = 40;
  double tolerance = 1e-10;  ///< on the projected residual
  int max_halvings = 20;
  int homotopy_steps = 4;    ///< continuation in t p, t = 1/steps, ..., 1
  int jobs = 1;

  void validate() const;
};

struct InversionReport {
  std::vector<double> residuals;  ///< projected residual before each Newton step and at the end
  std::vector<double> steps;      ///< accepted damping factor per iteration
  bool converged = false;
  bool homotopy = false;
  double final_residual = 0.0;
  double grid_residual = 0.0;  ///< l2 norm of P(q) - p on the grid
  std::vector<double> coefficients;
};

struct InversionResult {
  Impedance q;
  InversionReport report;
};

/// Newton iteration for P(q) = p with q in span{sin pi k x}.
InversionResult invert_transform_report(const Potential& p, const ConditionU& cfg,
                                        const InversionConfig& icfg = {});
Impedance invert_transform(const Potential& p, const ConditionU& cfg, const InversionConfig& icfg = {});

/// Matrix of cos(pi j x)-coefficients of dP(q)[sin(pi k x)], j, k = 1..K.
std::vector<std::vector<double>> galerkin_jacobian(const Impedance& q, const ConditionU& cfg, int K);

nlohmann::json to_json(const InversionReport& r);

enum class FitRegime { dirichlet, mixed, generic, symmetric_dirichlet };

std::string to_string(FitRegime r);
FitRegime fit_regime_from_string(const std::string& s);

/// Spectral data to reproduce. `data` may hold more entries than the fit uses.
struct FitTarget {
  FitRegime regime = FitRegime::dirichlet;
  SpectralData data;
  int N = 0;

  /// Array positions of the eigenvalues and norming constants entering the fit.
  std::vector<int> eigenvalue_positions() const;
  std::vector<int> norming_positions() const;
  /// Entries of `data` needed from a forward computation.
  int required_count() const;
};

FitTarget make_fit_target(FitRegime regime, SpectralData data, int N);
nlohmann::json to_json(const FitTarget& t);
FitTarget fit_target_from_json(const nlohmann::json& j);

struct FitOptions {
  int cells = 1024;
  double tolerance = 1e-8;  ///< weighted residual
  int max_iterations = 40;
  double fd_step = 1e-5;
  int jobs = 1;
};

struct FitReport {
  std::vector<double> residuals;
  double final_residual = 0.0;
  std::vector<double> coefficients;  ///< full-2pi layout [0, a1, b1, ...]
  int iterations = 0;
};

struct FitResult {
  Potential p;
  FitReport report;
};

/// Gauss-Newton / Levenberg-Marquardt fit of a trigonometric potential to the target.
FitResult fit_potential_report(const FitTarget& target, const InversionConfig& icfg = {},
                               const FitOptions& fopts = {});
Potential fit_potential(const FitTarget& target, const InversionConfig& icfg = {},
                        const FitOptions& fopts = {});

struct ImpedanceFitResult {
  Impedance q;
  FitReport fit;
  InversionReport inversion;
  double verify_residual = 0.0;  ///< max relative eigenvalue / absolute norming mismatch
};

/// invert_transform(fit_potential(target)) followed by a forward check on the impedance problem.
ImpedanceFitResult fit_impedance_report(const FitTarget& target, const ConditionU& cfg,
                                        const InversionConfig& icfg = {}, const FitOptions& fopts = {},
                                        double verify_tolerance = 1e-6);
Impedance fit_impedance(const FitTarget& target, const ConditionU& cfg, const InversionConfig& icfg = {},
                        const FitOptions& fopts = {});

nlohmann::json to_json(const FitReport& r);

}  // namespace liouville
