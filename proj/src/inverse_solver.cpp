#include "liouville/inverse_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <Eigen/Dense>

#include "liouville/errors.hpp"
#include "liouville/parallel.hpp"

namespace liouville {

using std::numbers::pi;

namespace {

/// sin(pi k x), cos(pi k x) and int_0^x sin(pi k t) dt sampled on the grid, k = 1..K.
struct GalerkinBasis {
  int cells = 0, K = 0;
  std::vector<std::vector<double>> s, c, a;

  GalerkinBasis(int n, int modes) : cells(n), K(modes), s(modes), c(modes), a(modes) {
    for (int k = 1; k <= K; ++k) {
      auto& sk = s[k - 1];
      auto& ck = c[k - 1];
      auto& ak = a[k - 1];
      sk.resize(n + 1);
      ck.resize(n + 1);
      ak.resize(n + 1);
      for (int j = 0; j <= n; ++j) {
        // exact endpoint values keep q(0) = q(1) = 0 to the bit
        const long m = static_cast<long>(k) * j % (2L * n);
        const double x = pi * static_cast<double>(m) / n;
        sk[j] = (m == 0 || m == n) ? 0.0 : std::sin(x);
        ck[j] = std::cos(x);
        ak[j] = (1.0 - ck[j]) / (pi * k);
      }
    }
  }

  ImpedanceJet jet(const std::vector<double>& coef) const {
    std::vector<double> v(cells + 1, 0.0), d(cells + 1, 0.0), w(cells + 1, 0.0);
    for (int k = 1; k <= K; ++k) {
      const double ck = coef[k - 1];
      if (ck == 0.0) continue;
      for (int j = 0; j <= cells; ++j) {
        v[j] += ck * s[k - 1][j];
        d[j] += ck * pi * k * c[k - 1][j];
        w[j] += ck * a[k - 1][j];
      }
    }
    return {GridFunction(std::move(v)), GridFunction(std::move(d)), GridFunction(std::move(w))};
  }

  ImpedanceJet unit_jet(int k) const {
    std::vector<double> d(c[k - 1]);
    for (double& x : d) x *= pi * k;
    return {GridFunction(s[k - 1]), GridFunction(std::move(d)), GridFunction(a[k - 1])};
  }

  /// Trapezoid-weighted cosine coefficients; the weights make cos(pi k x) exactly orthogonal.
  std::vector<double> project(const GridFunction& r) const {
    std::vector<double> out(K);
    const double h = 1.0 / cells;
    for (int k = 1; k <= K; ++k) {
      const auto& ck = c[k - 1];
      double sum = 0.5 * (r[0] * ck[0] + r[cells] * ck[cells]);
      for (int j = 1; j < cells; ++j) sum += r[j] * ck[j];
      out[k - 1] = 2.0 * h * sum;
    }
    return out;
  }
};

double projected_norm(const std::vector<double>& R) {
  double s = 0.0;
  for (double v : R) s += v * v;
  return std::sqrt(0.5 * s);
}

struct NewtonState {
  const GalerkinBasis& basis;
  const ConditionU& cfg;
  const InversionConfig& icfg;
  InversionReport& report;

  std::vector<double> residual(const std::vector<double>& coef, const GridFunction& target) const {
    return basis.project(transform_unshifted(basis.jet(coef), cfg) - target);
  }

  Eigen::MatrixXd jacobian(const std::vector<double>& coef) const {
    const ImpedanceJet q = basis.jet(coef);
    Eigen::MatrixXd J(basis.K, basis.K);
    parallel_for(static_cast<std::size_t>(basis.K), icfg.jobs, [&](std::size_t l) {
      const auto col = basis.project(frechet_unshifted(q, cfg, basis.unit_jet(static_cast<int>(l) + 1)));
      for (int k = 0; k < basis.K; ++k) J(k, static_cast<Eigen::Index>(l)) = col[k];
    });
    return J;
  }

  /// Damped Newton from `coef` towards `target`; returns true on convergence.
  bool solve(std::vector<double>& coef, const GridFunction& target) const {
    std::vector<double> R = residual(coef, target);
    double r = projected_norm(R);
    report.residuals.push_back(r);
    for (int it = 0; it < icfg.max_iterations; ++it) {
      if (r <= icfg.tolerance) return true;
      const Eigen::MatrixXd J = jacobian(coef);
      const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(R.data(), basis.K);
      const Eigen::VectorXd delta = J.partialPivLu().solve(-rhs);
      if (!delta.allFinite()) return false;
      double t = 1.0;
      for (int halving = 0;; ++halving) {
        std::vector<double> trial(coef);
        for (int k = 0; k < basis.K; ++k) trial[k] += t * delta[k];
        std::vector<double> Rt = residual(trial, target);
        const double rt = projected_norm(Rt);
        if (rt < r) {
          coef = std::move(trial);
          R = std::move(Rt);
          r = rt;
          break;
        }
        if (halving >= icfg.max_halvings) return false;
        t *= 0.5;
      }
      report.steps.push_back(t);
      report.residuals.push_back(r);
    }
    return r <= icfg.tolerance;
  }
};

}  // namespace

void InversionConfig::validate() const {
  if (K < 1) throw DomainError("inversion basis size K must be >= 1");
  if (!(tolerance > 0)) throw DomainError("inversion tolerance must be > 0");
  if (max_iterations < 1 || max_halvings < 0 || homotopy_steps < 1) {
    throw DomainError("inversion iteration limits must be positive");
  }
}

InversionResult invert_transform_report(const Potential& p, const ConditionU& cfg, const InversionConfig& icfg) {
  icfg.validate();
  const int n = p.cells();
  if (icfg.K > n / 2) throw DomainError("inversion basis size K exceeds half the grid");
  const GalerkinBasis basis(n, icfg.K);
  InversionReport report;
  const NewtonState newton{basis, cfg, icfg, report};

  std::vector<double> coef(icfg.K, 0.0);
  bool ok = newton.solve(coef, p.p());
  if (!ok) {
    report.homotopy = true;
    std::fill(coef.begin(), coef.end(), 0.0);
    for (int s = 1; s <= icfg.homotopy_steps; ++s) {
      ok = newton.solve(coef, (static_cast<double>(s) / icfg.homotopy_steps) * p.p());
      if (!ok) break;
    }
  }
  report.final_residual = report.residuals.back();
  report.converged = ok;
  if (!ok) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", report.final_residual);
    throw InversionError(std::string("transform inversion did not converge: residual ") + buf, report.residuals);
  }
  const ImpedanceJet jet = basis.jet(coef);
  GridFunction pq = transform_unshifted(jet, cfg);
  pq -= GridFunction::constant(n, mean(pq));
  report.grid_residual = l2_norm(pq - p.p());
  report.coefficients = coef;
  return {Impedance(jet.value), std::move(report)};
}

Impedance invert_transform(const Potential& p, const ConditionU& cfg, const InversionConfig& icfg) {
  return invert_transform_report(p, cfg, icfg).q;
}

std::vector<std::vector<double>> galerkin_jacobian(const Impedance& q, const ConditionU& cfg, int K) {
  const GalerkinBasis basis(q.cells(), K);
  const ImpedanceJet jet = ImpedanceJet::from_grid(q.q());
  std::vector<std::vector<double>> J(K, std::vector<double>(K));
  for (int l = 1; l <= K; ++l) {
    const auto col = basis.project(frechet_unshifted(jet, cfg, basis.unit_jet(l)));
    for (int k = 0; k < K; ++k) J[k][l - 1] = col[k];
  }
  return J;
}

nlohmann::json to_json(const InversionReport& r) {
  return {{"converged", r.converged},
          {"homotopy", r.homotopy},
          {"residuals", r.residuals},
          {"steps", r.steps},
          {"final_residual", r.final_residual},
          {"grid_residual", r.grid_residual},
          {"coefficients", r.coefficients}};
}

std::string to_string(FitRegime r) {
  switch (r) {
    case FitRegime::dirichlet: return "dirichlet";
    case FitRegime::mixed: return "mixed";
    case FitRegime::generic: return "generic";
    case FitRegime::symmetric_dirichlet: return "symmetric_dirichlet";
  }
  return "";
}

FitRegime fit_regime_from_string(const std::string& s) {
  for (FitRegime r : {FitRegime::dirichlet, FitRegime::mixed, FitRegime::generic, FitRegime::symmetric_dirichlet}) {
    if (to_string(r) == s) return r;
  }
  throw ParseError("unknown fit regime \"" + s + "\"");
}

std::vector<int> FitTarget::eigenvalue_positions() const {
  std::vector<int> pos(N);
  const int first = (regime == FitRegime::mixed || regime == FitRegime::generic) ? 1 : 0;
  for (int i = 0; i < N; ++i) pos[i] = first + i;
  return pos;
}

std::vector<int> FitTarget::norming_positions() const {
  if (regime == FitRegime::symmetric_dirichlet) return {};
  std::vector<int> pos(N);
  const int first = regime == FitRegime::generic ? 1 : 0;
  for (int i = 0; i < N; ++i) pos[i] = first + i;
  return pos;
}

int FitTarget::required_count() const {
  int m = eigenvalue_positions().back();
  for (int p : norming_positions()) m = std::max(m, p);
  return m + 1;
}

FitTarget make_fit_target(FitRegime regime, SpectralData data, int N) {
  if (N < 1 || N > 12) throw FitError("target", "fit size N must be in [1, 12]", 0.0);
  const Regime bc = data.regime();
  const bool match = (regime == FitRegime::dirichlet || regime == FitRegime::symmetric_dirichlet)
                         ? bc == Regime::dirichlet
                         : (regime == FitRegime::mixed ? bc == Regime::mixed : bc == Regime::generic);
  if (!match) {
    throw FitError("target", "boundary data " + to_string(bc) + " do not match fit regime " + to_string(regime), 0.0);
  }
  FitTarget t{regime, std::move(data), N};
  if (t.data.N() < t.required_count()) {
    throw FitError("target", "target holds " + std::to_string(t.data.N()) + " eigenvalues, fit needs " +
                                 std::to_string(t.required_count()), 0.0);
  }
  const CharacterizationReport rep = characterize(t.data);
  if (!rep.admissible()) throw FitError("target", "target spectral data are not admissible", 0.0);
  return t;
}

nlohmann::json to_json(const FitTarget& t) {
  nlohmann::json j = to_json(t.data);
  j["regime"] = to_string(t.regime);
  j["fit_N"] = t.N;
  return j;
}

FitTarget fit_target_from_json(const nlohmann::json& j) {
  if (!j.contains("regime") || !j["regime"].is_string()) throw ParseError("fit target needs a \"regime\" string");
  const FitRegime regime = fit_regime_from_string(j["regime"].get<std::string>());
  SpectralData data = spectral_data_from_json(j);
  int N = 0;
  if (j.contains("fit_N")) {
    N = j["fit_N"].get<int>();
  } else {
    N = std::min(12, regime == FitRegime::dirichlet || regime == FitRegime::symmetric_dirichlet ? data.N()
                                                                                                 : data.N() - 1);
  }
  return make_fit_target(regime, std::move(data), N);
}

namespace {

struct FitProblem {
  const FitTarget& target;
  const FitOptions& fopts;

  int parameters() const { return target.regime == FitRegime::symmetric_dirichlet ? target.N : 2 * target.N; }

  std::vector<double> layout(const Eigen::VectorXd& x) const {
    std::vector<double> c(2 * target.N + 1, 0.0);
    if (target.regime == FitRegime::symmetric_dirichlet) {
      for (int k = 0; k < target.N; ++k) c[2 * k + 1] = x[k];
    } else {
      for (int i = 0; i < 2 * target.N; ++i) c[i + 1] = x[i];
    }
    return c;
  }

  Potential potential(const Eigen::VectorXd& x) const {
    return Potential(FourierRep{FourierBasis::full_2pi, layout(x)}.evaluate(fopts.cells));
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& x) const {
    const ProblemKind prob = ProblemKind::schrodinger(potential(x));
    const SpectralData& d = target.data;
    const std::vector<double> eig = compute_eigenvalues(prob, d.a, d.b, target.required_count());
    const auto epos = target.eigenvalue_positions();
    const auto npos = target.norming_positions();
    Eigen::VectorXd r(epos.size() + npos.size());
    for (std::size_t i = 0; i < epos.size(); ++i) r[i] = eig[epos[i]] - (d.eigenvalues[epos[i]] - d.c0);
    if (!npos.empty()) {
      const auto norming = eigenfunction_data(prob, d.a, d.b, eig).norming;
      for (std::size_t i = 0; i < npos.size(); ++i) {
        r[epos.size() + i] = 2 * pi * (i + 1) * (norming[npos[i]] - d.norming[npos[i]]);
      }
    }
    return r;
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, Eigen::Index rows) const {
    Eigen::MatrixXd J(rows, parameters());
    parallel_for(static_cast<std::size_t>(parameters()), fopts.jobs, [&](std::size_t i) {
      Eigen::VectorXd xp = x, xm = x;
      xp[i] += fopts.fd_step;
      xm[i] -= fopts.fd_step;
      J.col(static_cast<Eigen::Index>(i)) = (residual(xp) - residual(xm)) / (2 * fopts.fd_step);
    });
    return J;
  }
};

}  // namespace

FitResult fit_potential_report(const FitTarget& target, const InversionConfig& icfg, const FitOptions& fopts) {
  icfg.validate();
  const FitProblem fp{target, fopts};
  Eigen::VectorXd x = Eigen::VectorXd::Zero(fp.parameters());
  FitReport report;
  Eigen::VectorXd r = fp.residual(x);
  double res = r.norm();
  report.residuals.push_back(res);
  double mu = 1e-6;
  for (int it = 0; it < fopts.max_iterations && res > fopts.tolerance; ++it) {
    const Eigen::MatrixXd J = fp.jacobian(x, r.size());
    const Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    const Eigen::VectorXd scale = A.diagonal().cwiseMax(1e-12 * std::max(1.0, A.diagonal().maxCoeff()));
    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd M = A;
      M.diagonal() += mu * scale;
      const Eigen::VectorXd step = M.ldlt().solve(-g);
      const Eigen::VectorXd xt = x + step;
      try {
        const Eigen::VectorXd rt = fp.residual(xt);
        if (rt.norm() < res) {
          x = xt;
          r = rt;
          res = rt.norm();
          mu = std::max(mu / 10, 1e-12);
          accepted = true;
          continue;
        }
      } catch (const Error&) {
        // a trial potential the solver cannot handle counts as a rejected step
      }
      mu *= 10;
      if (mu > 1e8) throw FitError("fit", "Gauss-Newton stagnated", res);
    }
    report.residuals.push_back(res);
    report.iterations = it + 1;
  }
  report.final_residual = res;
  report.coefficients = fp.layout(x);
  if (res > fopts.tolerance) throw FitError("fit", "no convergence within the iteration limit", res);
  return {fp.potential(x), std::move(report)};
}

Potential fit_potential(const FitTarget& target, const InversionConfig& icfg, const FitOptions& fopts) {
  return fit_potential_report(target, icfg, fopts).p;
}

ImpedanceFitResult fit_impedance_report(const FitTarget& target, const ConditionU& cfg, const InversionConfig& icfg,
                                        const FitOptions& fopts, double verify_tolerance) {
  FitResult fit = fit_potential_report(target, icfg, fopts);
  InversionResult inv = [&] {
    try {
      return invert_transform_report(fit.p, cfg, icfg);
    } catch (const InversionError& e) {
      throw FitError("invert", e.what(), e.residual_history().empty() ? 0.0 : e.residual_history().back());
    } catch (const ConditionUViolation& e) {
      throw FitError("invert", e.what(), 0.0);
    }
  }();
  const SpectralData& d = target.data;
  double mismatch = 0.0;
  try {
    const ProblemKind prob = ProblemKind::impedance(inv.q, cfg);
    const std::vector<double> eig = compute_eigenvalues(prob, d.a, d.b, target.required_count());
    for (int pos : target.eigenvalue_positions()) {
      mismatch = std::max(mismatch, std::abs(eig[pos] - d.eigenvalues[pos]) / (1.0 + std::abs(d.eigenvalues[pos])));
    }
    const auto npos = target.norming_positions();
    if (!npos.empty()) {
      const auto norming = eigenfunction_data(prob, d.a, d.b, eig).norming;
      for (int pos : npos) mismatch = std::max(mismatch, std::abs(norming[pos] - d.norming[pos]));
    }
  } catch (const Error& e) {
    throw FitError("verify", e.what(), 0.0);
  }
  if (mismatch > verify_tolerance) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", mismatch);
    throw FitError("verify", std::string("impedance spectrum misses the target by ") + buf, mismatch);
  }
  return {std::move(inv.q), std::move(fit.report), std::move(inv.report), mismatch};
}

Impedance fit_impedance(const FitTarget& target, const ConditionU& cfg, const InversionConfig& icfg,
                        const FitOptions& fopts) {
  return fit_impedance_report(target, cfg, icfg, fopts).q;
}

nlohmann::json to_json(const FitReport& r) {
  return {{"residuals", r.residuals},
          {"final_residual", r.final_residual},
          {"iterations", r.iterations},
          {"coefficients", r.coefficients}};
}

}  // namespace liouville
