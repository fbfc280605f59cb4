#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "liouville/function_space.hpp"
#include "liouville/ode_engine.hpp"
#include "liouville/potential_model.hpp"

namespace liouville {

/// Boundary regimes and their index conventions.
///   dirichlet        a = b = inf     n >= 1   (pi n)^2
///   mixed            a = inf, b      n >= 0   pi^2 (n + 1/2)^2
///   generic          a, b finite     n >= 0   (pi n)^2
///   robin_dirichlet  a, b = inf      n >= 0   pi^2 (n + 1/2)^2
enum class Regime { dirichlet, mixed, generic, robin_dirichlet };

Regime regime_of(const BoundaryParam& a, const BoundaryParam& b);
std::string to_string(Regime r);
int index_base(Regime r);
double unperturbed_eigenvalue(Regime r, int n);
/// c0 + 2b, c0 + 2(a + b), ... : the constant part of the eigenvalue asymptotics.
double eigenvalue_shift(Regime r, const BoundaryParam& a, const BoundaryParam& b, double c0);
/// Norming constant of the unperturbed problem (p = 0 with a = b = 0 where finite).
double unperturbed_norming(Regime r, int n);

struct SolverOptions {
  int jobs = 1;            ///< < 1: hardware concurrency
  bool richardson = true;  ///< extrapolate from steps 1/n .. 8/n (coarse levels dropped at large lambda)
};

/// Wronskian and its lambda-derivative at a single point (Richardson extrapolated).
std::pair<double, double> wronskian_with_derivative(const ProblemKind& prob, double lambda,
                                                    const BoundaryParam& a, const BoundaryParam& b,
                                                    const SolverOptions& opts = {});
/// Central-difference dw/dlambda, kept as a cross-check of the variational value.
double wronskian_derivative_fd(const ProblemKind& prob, double lambda, const BoundaryParam& a,
                               const BoundaryParam& b, double step = 1e-4,
                               const SolverOptions& opts = {});

/// Lowest N eigenvalues in increasing order.
std::vector<double> compute_eigenvalues(const ProblemKind& prob, const BoundaryParam& a,
                                        const BoundaryParam& b, int N, const SolverOptions& opts = {});

/// Endpoint data of the forward-shot eigenfunctions at given eigenvalues.
struct EigenfunctionData {
  std::vector<double> norming;
  std::vector<double> normalizing;  ///< int y^2 with y = rho f
  std::vector<double> wdot;         ///< dw/dlambda at the eigenvalue
};

EigenfunctionData eigenfunction_data(const ProblemKind& prob, const BoundaryParam& a,
                                     const BoundaryParam& b, const std::vector<double>& eigenvalues,
                                     const SolverOptions& opts = {});

struct SpectralData {
  ProblemType kind = ProblemType::schrodinger;
  BoundaryParam a = BoundaryParam::dirichlet();
  BoundaryParam b = BoundaryParam::dirichlet();
  double c0 = 0.0;
  std::vector<double> eigenvalues;
  std::vector<double> norming;
  std::vector<double> normalizing;  ///< may be empty (data read from file)
  std::vector<double> wdot;         ///< may be empty (data read from file)
  SequenceData remainders{{}, 0.0};
  SequenceData norming_deviation{{}, 1.0};

  Regime regime() const { return regime_of(a, b); }
  int base() const { return index_base(regime()); }
  int N() const { return static_cast<int>(eigenvalues.size()); }
};

std::vector<double> norming_constants(const ProblemKind& prob, const SpectralData& data,
                                      const SolverOptions& opts = {});
std::vector<double> normalizing_constants(const ProblemKind& prob, const SpectralData& data,
                                          const SolverOptions& opts = {});

SpectralData compute_spectral_data(const ProblemKind& prob, const BoundaryParam& a,
                                   const BoundaryParam& b, int N, const SolverOptions& opts = {});

/// (eigenvalue remainders at alpha = 0, norming deviations at alpha = 1).
std::pair<SequenceData, SequenceData> extract_remainders(const SpectralData& data);

/// Entire prefactor of the product: sinc, cos or -sqrt(l) sin sqrt(l) per regime.
double hadamard_prefactor(Regime r, double lambda);
/// Prefactor times prod over the first M eigenvalues of (l - l_n) / (l - l_n^0).
double hadamard_wronskian(const SpectralData& data, double lambda, int M);

struct SeriesReport {
  std::vector<double> partial_sums;  ///< partial_sums[M - 1] = S_M
  int stopped_at = 0;                ///< terms used by the tail policy
  std::string stop_reason;           ///< "tail_converged" or "max_terms"
  double value = 0.0;                ///< partial sum at stopped_at

  double residual(double target) const;
};

/// Tail policy: stop after M_max terms or once the last 8 terms add < 1e-10 relative.
SeriesReport series_report(const std::vector<double>& terms, double offset);

/// b = sum (2 - e^{norming_n} / |wdot_n|) for the mixed regime.
SeriesReport identity_b(const SpectralData& data, int M);
/// (b, a) = -1 + sum (2 - e^{+-norming_n} / |wdot_n|) for the generic regime.
std::pair<SeriesReport, SeriesReport> identity_ab(const SpectralData& data, int M);

struct TailVerdict {
  bool finite = true;
  double slope = 0.0;          ///< log-log slope of the weighted terms over the upper half
  double tail_fraction = 0.0;  ///< share of the squared norm carried by the upper half
  double norm = 0.0;
};

/// Tail-trend test for membership in l^2_alpha on a truncation.
TailVerdict tail_trend(const SequenceData& h, double noise_floor);
/// Same with an index-dependent noise floor.
TailVerdict tail_trend(const SequenceData& h, const std::vector<double>& noise_floor);

struct CharacterizationReport {
  bool ordering = true;
  bool remainders_l2 = true;
  bool norming_l2 = true;
  std::optional<bool> normalizing_l2;  ///< Dirichlet data with normalizing constants only
  TailVerdict remainder_tail, norming_tail;
  std::optional<TailVerdict> normalizing_tail;
  int first_disorder = -1;  ///< array position where ordering first fails

  bool admissible() const;
};

CharacterizationReport characterize(const SpectralData& data);

struct EquivalenceRow {
  int n = 0;
  double impedance_eigenvalue = 0.0;
  double schrodinger_eigenvalue = 0.0;  ///< already shifted by c0
  double impedance_norming = 0.0;
  double schrodinger_norming = 0.0;
};

struct EquivalenceReport {
  double c0 = 0.0;
  std::vector<EquivalenceRow> rows;
  double max_eigenvalue_discrepancy = 0.0;  ///< |mu - sigma - c0| / (1 + |mu|)
  double max_norming_discrepancy = 0.0;
};

EquivalenceReport equivalence_report(const Impedance& q, const ConditionU& cfg, const BoundaryParam& a,
                                     const BoundaryParam& b, int N, const SolverOptions& opts = {});

nlohmann::json to_json(const SpectralData& data);
SpectralData spectral_data_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CharacterizationReport& r);
nlohmann::json to_json(const EquivalenceReport& r);
nlohmann::json to_json(const SeriesReport& r);

}  // namespace liouville
