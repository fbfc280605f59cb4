#include "liouville/spectral_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "liouville/errors.hpp"
#include "liouville/parallel.hpp"

namespace liouville {

using std::numbers::pi;

namespace {

constexpr int kSeriesWindow = 8;
constexpr double kSeriesTolerance = 1e-10;
constexpr double kTrendSlope = -1.2;
constexpr double kTrendFraction = 0.01;

constexpr double kExtrapolationPhase = 1.0;

// RK4 leaves h^4 phase and h^5 amplitude errors with an h^6 term behind them; steps h .. 8h remove all three.
// Levels too coarse for lambda are dropped, lowering the order. Endpoint data of eigenfunctions stop at
// three levels: at large lambda the 8h level is outside the asymptotic range for them.
int levels_used(const ProblemKind& prob, const SolverOptions& opts, double lambda, int max_levels = 4) {
  if (!opts.richardson) return 1;
  int levels = 1;
  while (levels < std::min(prob.max_level() + 1, max_levels) && prob.step_phase(levels, lambda) <= kExtrapolationPhase) {
    ++levels;
  }
  return levels;
}

double extrapolate(const double* v, int levels) {
  switch (levels) {
    case 1: return v[0];
    case 2: return (16.0 * v[0] - v[1]) / 15.0;
    case 3: return (512.0 * v[0] - 48.0 * v[1] + v[2]) / 465.0;
    default: return (32768.0 * v[0] - 3584.0 * v[1] + 112.0 * v[2] - v[3]) / 29295.0;
  }
}

int count_below(const ProblemKind& prob, double lambda, const BoundaryParam& a, const BoundaryParam& b,
                int level) {
  return eigenvalues_below(prob, lambda, a, b, {level, false});
}

std::string bracket_diagnostics(int k, double lo, int clo, double hi, int chi) {
  std::ostringstream out;
  out << "eigenvalue " << k << ": bracket [" << lo << ", " << hi << "] has counts [" << clo << ", "
      << chi << "]";
  return out.str();
}

/// Eigenvalue at array position k of the discrete problem on one grid level.
double solve_on_level(const ProblemKind& prob, const BoundaryParam& a, const BoundaryParam& b, int k,
                      double guess, int level) {
  const double width = pi * pi * (k + 1);
  double lo = guess - width, hi = guess + width;
  int clo = count_below(prob, lo, a, b, level);
  int chi = count_below(prob, hi, a, b, level);
  double step = width;
  for (int it = 0; clo > k; ++it) {
    if (it > 60) throw SolverError(bracket_diagnostics(k, lo, clo, hi, chi));
    hi = lo;
    chi = clo;
    lo -= step;
    step *= 2;
    clo = count_below(prob, lo, a, b, level);
  }
  step = width;
  for (int it = 0; chi < k + 1; ++it) {
    if (it > 60) throw SolverError(bracket_diagnostics(k, lo, clo, hi, chi));
    lo = hi;
    clo = chi;
    hi += step;
    step *= 2;
    chi = count_below(prob, hi, a, b, level);
  }
  for (int it = 0; !(clo == k && chi == k + 1); ++it) {
    if (it > 200) throw SolverError(bracket_diagnostics(k, lo, clo, hi, chi));
    const double mid = 0.5 * (lo + hi);
    const int c = count_below(prob, mid, a, b, level);
    if (c <= k) {
      lo = mid;
      clo = c;
    } else {
      hi = mid;
      chi = c;
    }
  }

  const ShootOptions o{level, true};
  auto eval = [&](double x) { return shoot_summary(prob, x, a, b, o).w; };
  const WronskianValue wlo = eval(lo), whi = eval(hi);
  const int slo = wlo.sign();
  if (slo == 0) return lo;
  if (whi.sign() == slo) {
    // The count and the sign of w disagree only when an endpoint sits on the root to roundoff.
    for (const auto& [x, w] : {std::pair{lo, wlo}, std::pair{hi, whi}}) {
      const double dx = w.mantissa / w.derivative_mantissa;
      if (std::abs(dx) < 1e-11 * std::max(1.0, std::abs(x))) return x - dx;
    }
    throw SolverError(bracket_diagnostics(k, lo, clo, hi, chi) + " but no sign change of w");
  }
  double x = 0.5 * (lo + hi);
  double dx_old = hi - lo;
  for (int it = 0; it < 200; ++it) {
    const WronskianValue w = eval(x);
    if (w.mantissa == 0.0) return x;
    if (w.sign() == slo) lo = x;
    else hi = x;
    const double newton = w.derivative_mantissa != 0.0 ? w.mantissa / w.derivative_mantissa : 0.0;
    double next = x - newton;
    if (w.derivative_mantissa == 0.0 || !(next > lo && next < hi) || 2 * std::abs(newton) > dx_old) {
      next = 0.5 * (lo + hi);
      dx_old = hi - lo;
    } else {
      dx_old = std::abs(newton);
    }
    if (std::abs(next - x) <= 1e-14 * std::max(1.0, std::abs(x)) || hi - lo <= 4e-16 * std::max(1.0, std::abs(x))) {
      return next;
    }
    x = next;
  }
  throw SolverError("eigenvalue " + std::to_string(k) + ": refinement did not converge near " +
                    std::to_string(x));
}

struct EigenPoint {
  double norming, normalizing, wdot;
};

EigenPoint eigen_point(const ProblemKind& prob, const BoundaryParam& a, const BoundaryParam& b,
                       double lambda, int level) {
  const StateTrace t = shoot_left(prob, lambda, a, {level, true});
  const int m = t.y.cells();
  const double den = a.is_dirichlet() ? t.dy[0] : t.y[0];
  const double num = prob.rho_end() * (b.is_dirichlet() ? t.dy[m] : t.y[m]);
  if (den == 0.0 || num == 0.0) {
    throw DegenerateEigenfunctionError("vanishing endpoint data at lambda = " + std::to_string(lambda));
  }
  EigenPoint p;
  p.norming = std::log(std::abs(num)) + t.scale(m) - std::log(std::abs(den)) - t.scale(0);
  const double z = b.is_dirichlet() ? t.dz_lambda->values()[m]
                                    : t.ddz_lambda->values()[m] + b.value() * t.dz_lambda->values()[m];
  p.wdot = prob.rho_end() * z * std::exp(t.scale(m));
  std::vector<double> y2(m + 1);
  const int stride = prob.cells() / m;
  for (int j = 0; j <= m; ++j) {
    const double rho = prob.profile() ? prob.profile()->rho[j * stride] : 1.0;
    const double y = rho * t.y_at(j);
    y2[j] = y * y;
  }
  p.normalizing = integrate(GridFunction(std::move(y2)));
  return p;
}

double wdot_fd_raw(const ProblemKind& prob, double lambda, const BoundaryParam& a, const BoundaryParam& b,
                   double h, int level) {
  const double wp = wronskian(prob, lambda + h, a, b, {level, false}).value();
  const double wm = wronskian(prob, lambda - h, a, b, {level, false}).value();
  return (wp - wm) / (2 * h);
}

std::vector<double> deviations(const SpectralData& d) {
  std::vector<double> out(d.norming.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = d.norming[k] - unperturbed_norming(d.regime(), static_cast<int>(k) + d.base());
  }
  return out;
}

}  // namespace

Regime regime_of(const BoundaryParam& a, const BoundaryParam& b) {
  if (a.is_dirichlet()) return b.is_dirichlet() ? Regime::dirichlet : Regime::mixed;
  return b.is_dirichlet() ? Regime::robin_dirichlet : Regime::generic;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::dirichlet: return "dirichlet";
    case Regime::mixed: return "mixed";
    case Regime::generic: return "generic";
    case Regime::robin_dirichlet: return "robin_dirichlet";
  }
  return "";
}

int index_base(Regime r) { return r == Regime::dirichlet ? 1 : 0; }

double unperturbed_eigenvalue(Regime r, int n) {
  if (r == Regime::mixed || r == Regime::robin_dirichlet) return pi * pi * (n + 0.5) * (n + 0.5);
  return pi * pi * n * n;
}

double eigenvalue_shift(Regime r, const BoundaryParam& a, const BoundaryParam& b, double c0) {
  switch (r) {
    case Regime::dirichlet: return c0;
    case Regime::mixed: return c0 + 2 * b.value();
    case Regime::generic: return c0 + 2 * (a.value() + b.value());
    case Regime::robin_dirichlet: return c0 + 2 * a.value();
  }
  return c0;
}

double unperturbed_norming(Regime r, int n) {
  switch (r) {
    case Regime::mixed: return -std::log(pi * (n + 0.5));
    case Regime::robin_dirichlet: return std::log(pi * (n + 0.5));
    default: return 0.0;
  }
}

std::pair<double, double> wronskian_with_derivative(const ProblemKind& prob, double lambda,
                                                    const BoundaryParam& a, const BoundaryParam& b,
                                                    const SolverOptions& opts) {
  const int levels = levels_used(prob, opts, lambda);
  double w[4]{}, dw[4]{};
  for (int l = 0; l < levels; ++l) {
    const WronskianValue v = wronskian(prob, lambda, a, b, {l, true});
    w[l] = v.value();
    dw[l] = v.derivative();
  }
  return {extrapolate(w, levels), extrapolate(dw, levels)};
}

double wronskian_derivative_fd(const ProblemKind& prob, double lambda, const BoundaryParam& a,
                               const BoundaryParam& b, double step, const SolverOptions& opts) {
  const double h = step * std::max(1.0, std::abs(lambda));
  const int levels = levels_used(prob, opts, lambda + h);
  double d[4]{};
  for (int l = 0; l < levels; ++l) d[l] = wdot_fd_raw(prob, lambda, a, b, h, l);
  return extrapolate(d, levels);
}

std::vector<double> compute_eigenvalues(const ProblemKind& prob, const BoundaryParam& a,
                                        const BoundaryParam& b, int N, const SolverOptions& opts) {
  if (N < 1) throw DomainError("eigenvalue count N must be >= 1");
  const Regime r = regime_of(a, b);
  const double shift = eigenvalue_shift(r, a, b, prob.c0());
  std::vector<double> out(N);
  parallel_for(static_cast<std::size_t>(N), opts.jobs, [&](std::size_t i) {
    const int k = static_cast<int>(i);
    double e[4]{};
    e[0] = solve_on_level(prob, a, b, k, unperturbed_eigenvalue(r, k + index_base(r)) + shift, 0);
    // coarse levels bracket within e[0] +- 2 pi^2 (k + 1)
    const int levels = levels_used(prob, opts, e[0] + 2 * pi * pi * (k + 1));
    for (int l = 1; l < levels; ++l) e[l] = solve_on_level(prob, a, b, k, e[0], l);
    out[i] = extrapolate(e, levels);
  });
  for (int k = 1; k < N; ++k) {
    if (!(out[k] > out[k - 1])) {
      throw SolverError("computed eigenvalues " + std::to_string(k - 1) + " and " + std::to_string(k) +
                        " are not strictly increasing");
    }
  }
  return out;
}

EigenfunctionData eigenfunction_data(const ProblemKind& prob, const BoundaryParam& a,
                                     const BoundaryParam& b, const std::vector<double>& eigenvalues,
                                     const SolverOptions& opts) {
  const std::size_t N = eigenvalues.size();
  EigenfunctionData d{std::vector<double>(N), std::vector<double>(N), std::vector<double>(N)};
  parallel_for(N, opts.jobs, [&](std::size_t i) {
    const int levels = levels_used(prob, opts, eigenvalues[i], 3);
    double nm[4]{}, al[4]{}, wd[4]{};
    for (int l = 0; l < levels; ++l) {
      const EigenPoint p = eigen_point(prob, a, b, eigenvalues[i], l);
      nm[l] = p.norming;
      al[l] = p.normalizing;
      wd[l] = p.wdot;
    }
    d.norming[i] = extrapolate(nm, levels);
    d.normalizing[i] = extrapolate(al, levels);
    d.wdot[i] = extrapolate(wd, levels);
  });
  return d;
}

std::vector<double> norming_constants(const ProblemKind& prob, const SpectralData& data,
                                      const SolverOptions& opts) {
  return eigenfunction_data(prob, data.a, data.b, data.eigenvalues, opts).norming;
}

std::vector<double> normalizing_constants(const ProblemKind& prob, const SpectralData& data,
                                          const SolverOptions& opts) {
  return eigenfunction_data(prob, data.a, data.b, data.eigenvalues, opts).normalizing;
}

SpectralData compute_spectral_data(const ProblemKind& prob, const BoundaryParam& a,
                                   const BoundaryParam& b, int N, const SolverOptions& opts) {
  SpectralData d;
  d.kind = prob.type();
  d.a = a;
  d.b = b;
  d.c0 = prob.c0();
  d.eigenvalues = compute_eigenvalues(prob, a, b, N, opts);
  EigenfunctionData e = eigenfunction_data(prob, a, b, d.eigenvalues, opts);
  d.norming = std::move(e.norming);
  d.normalizing = std::move(e.normalizing);
  d.wdot = std::move(e.wdot);
  std::tie(d.remainders, d.norming_deviation) = extract_remainders(d);
  return d;
}

std::pair<SequenceData, SequenceData> extract_remainders(const SpectralData& data) {
  const Regime r = data.regime();
  const double shift = eigenvalue_shift(r, data.a, data.b, data.c0);
  SequenceData rem{std::vector<double>(data.eigenvalues.size()), 0.0};
  for (std::size_t k = 0; k < rem.entries.size(); ++k) {
    rem.entries[k] = data.eigenvalues[k] - unperturbed_eigenvalue(r, static_cast<int>(k) + data.base()) - shift;
  }
  return {std::move(rem), SequenceData{deviations(data), 1.0}};
}

double hadamard_prefactor(Regime r, double lambda) {
  switch (r) {
    case Regime::dirichlet: return entire_sinc_sqrt(lambda);
    case Regime::mixed:
    case Regime::robin_dirichlet: return entire_cos_sqrt(lambda);
    case Regime::generic: return -lambda * entire_sinc_sqrt(lambda);
  }
  return 0.0;
}

double hadamard_wronskian(const SpectralData& data, double lambda, int M) {
  if (M < 0 || M > data.N()) {
    throw DomainError("product length M = " + std::to_string(M) + " exceeds N = " + std::to_string(data.N()));
  }
  const Regime r = data.regime();
  double prod = hadamard_prefactor(r, lambda);
  for (int k = 0; k < M; ++k) {
    const double ln = data.eigenvalues[k];
    const double l0 = unperturbed_eigenvalue(r, k + data.base());
    for (double pole : {ln, l0}) {
      if (std::abs(lambda - pole) <= 1e-12 * std::max(1.0, std::abs(pole))) {
        throw PoleCollisionError("lambda = " + std::to_string(lambda) + " collides with " +
                                 std::to_string(pole) + " in the product");
      }
    }
    prod *= (lambda - ln) / (lambda - l0);
  }
  return prod;
}

double SeriesReport::residual(double target) const { return std::abs(value - target); }

SeriesReport series_report(const std::vector<double>& terms, double offset) {
  SeriesReport r;
  double s = offset;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    s += terms[i];
    r.partial_sums.push_back(s);
    if (r.stopped_at == 0 && static_cast<int>(i) + 1 >= kSeriesWindow) {
      double window = 0.0;
      for (int j = 0; j < kSeriesWindow; ++j) window += terms[i - j];
      if (std::abs(window) < kSeriesTolerance * std::max(1.0, std::abs(s))) {
        r.stopped_at = static_cast<int>(i) + 1;
        r.stop_reason = "tail_converged";
        r.value = s;
      }
    }
  }
  if (r.stopped_at == 0) {
    r.stopped_at = static_cast<int>(terms.size());
    r.stop_reason = "max_terms";
    r.value = s;
  }
  return r;
}

SeriesReport identity_b(const SpectralData& data, int M) {
  if (data.regime() != Regime::mixed) throw DomainError("identity_b needs mixed-regime data");
  if (M < 1 || M > data.N() || static_cast<int>(data.wdot.size()) < M) {
    throw DomainError("identity_b: M must be in [1, N] with dw/dlambda available");
  }
  std::vector<double> terms(M);
  for (int k = 0; k < M; ++k) terms[k] = 2.0 - std::exp(data.norming[k]) / std::abs(data.wdot[k]);
  return series_report(terms, 0.0);
}

std::pair<SeriesReport, SeriesReport> identity_ab(const SpectralData& data, int M) {
  if (data.regime() != Regime::generic) throw DomainError("identity_ab needs generic-regime data");
  if (M < 1 || M > data.N() || static_cast<int>(data.wdot.size()) < M) {
    throw DomainError("identity_ab: M must be in [1, N] with dw/dlambda available");
  }
  std::vector<double> tb(M), ta(M);
  for (int k = 0; k < M; ++k) {
    const double w = std::abs(data.wdot[k]);
    tb[k] = 2.0 - std::exp(data.norming[k]) / w;
    ta[k] = 2.0 - std::exp(-data.norming[k]) / w;
  }
  return {series_report(tb, -1.0), series_report(ta, -1.0)};
}

TailVerdict tail_trend(const SequenceData& h, double noise_floor) {
  return tail_trend(h, std::vector<double>(h.entries.size(), noise_floor));
}

TailVerdict tail_trend(const SequenceData& h, const std::vector<double>& noise_floor) {
  TailVerdict v;
  const std::size_t K = h.entries.size();
  std::vector<double> t(K, 0.0);
  SequenceData clamped{std::vector<double>(K, 0.0), h.alpha};
  for (std::size_t i = 0; i < K; ++i) {
    const double e = h.entries[i];
    if (!std::isfinite(e)) {
      v.finite = false;
      v.norm = std::numeric_limits<double>::infinity();
      return v;
    }
    if (std::abs(e) < noise_floor[i]) continue;
    clamped.entries[i] = e;
    t[i] = std::pow(static_cast<double>(i + 1), 2 * h.alpha) * e * e;
  }
  v.norm = seq_norm(clamped);
  double total = 0.0, upper = 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    total += t[i];
    if (i >= K / 2) upper += t[i];
  }
  v.tail_fraction = total > 0 ? upper / total : 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t i = K / 2; i < K; ++i) {
    if (t[i] <= 0) continue;
    const double x = std::log(static_cast<double>(i + 1)), y = std::log(t[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count >= 3) {
    v.slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  } else {
    v.slope = std::numeric_limits<double>::quiet_NaN();
  }
  v.finite = !(v.slope > kTrendSlope && v.tail_fraction > kTrendFraction);
  return v;
}

bool CharacterizationReport::admissible() const {
  return ordering && remainders_l2 && norming_l2 && normalizing_l2.value_or(true);
}

CharacterizationReport characterize(const SpectralData& data) {
  CharacterizationReport r;
  for (int k = 1; k < data.N(); ++k) {
    if (!(data.eigenvalues[k] > data.eigenvalues[k - 1])) {
      r.ordering = false;
      r.first_disorder = k - 1;
      break;
    }
  }
  const auto [rem, dev] = extract_remainders(data);
  std::vector<double> floor(rem.entries.size());
  for (std::size_t k = 0; k < floor.size(); ++k) {
    floor[k] = 1e-9 * std::max(1.0, unperturbed_eigenvalue(data.regime(), static_cast<int>(k) + data.base()));
  }
  r.remainder_tail = tail_trend(rem, floor);
  r.remainders_l2 = r.remainder_tail.finite;
  r.norming_tail = tail_trend(dev, 1e-9);
  r.norming_l2 = r.norming_tail.finite;
  if (data.regime() == Regime::dirichlet && !data.normalizing.empty()) {
    SequenceData h{std::vector<double>(data.normalizing.size()), 1.0};
    for (std::size_t k = 0; k < h.entries.size(); ++k) {
      const double n = static_cast<double>(k + 1);
      h.entries[k] = 2 * pi * pi * n * n * data.normalizing[k] - 1.0;
    }
    r.normalizing_tail = tail_trend(h, 1e-9);
    r.normalizing_l2 = r.normalizing_tail->finite;
  }
  return r;
}

EquivalenceReport equivalence_report(const Impedance& q, const ConditionU& cfg, const BoundaryParam& a,
                                     const BoundaryParam& b, int N, const SolverOptions& opts) {
  const ProblemKind imp = ProblemKind::impedance(q, cfg);
  const ProblemKind sch = ProblemKind::schrodinger(forward_transform(q, cfg));
  const SpectralData di = compute_spectral_data(imp, a, b, N, opts);
  const SpectralData ds = compute_spectral_data(sch, a, b, N, opts);
  EquivalenceReport rep;
  rep.c0 = imp.c0();
  for (int k = 0; k < N; ++k) {
    EquivalenceRow row{k + di.base(), di.eigenvalues[k], ds.eigenvalues[k] + rep.c0, di.norming[k],
                       ds.norming[k]};
    rep.max_eigenvalue_discrepancy =
        std::max(rep.max_eigenvalue_discrepancy, std::abs(row.impedance_eigenvalue - row.schrodinger_eigenvalue) /
                                                     (1.0 + std::abs(row.impedance_eigenvalue)));
    rep.max_norming_discrepancy =
        std::max(rep.max_norming_discrepancy, std::abs(row.impedance_norming - row.schrodinger_norming));
    rep.rows.push_back(row);
  }
  return rep;
}

nlohmann::json to_json(const SpectralData& d) {
  nlohmann::json j;
  j["kind"] = d.kind == ProblemType::schrodinger ? "schrodinger" : "impedance";
  j["a"] = d.a;
  j["b"] = d.b;
  j["c0"] = d.c0;
  j["index_base"] = d.base();
  j["N"] = d.N();
  j["eigenvalues"] = d.eigenvalues;
  j["norming"] = d.norming;
  j["remainders"] = d.remainders.entries;
  j["norming_deviation"] = d.norming_deviation.entries;
  if (!d.normalizing.empty()) j["normalizing"] = d.normalizing;
  if (!d.wdot.empty()) j["wdot"] = d.wdot;
  return j;
}

SpectralData spectral_data_from_json(const nlohmann::json& j) {
  try {
    SpectralData d;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "schrodinger") d.kind = ProblemType::schrodinger;
    else if (kind == "impedance") d.kind = ProblemType::impedance;
    else throw ParseError("unknown spectral data kind \"" + kind + "\"");
    d.a = boundary_from_json(j.at("a"));
    d.b = boundary_from_json(j.at("b"));
    d.c0 = j.at("c0").get<double>();
    d.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
    d.norming = j.at("norming").get<std::vector<double>>();
    if (j.contains("normalizing")) d.normalizing = j["normalizing"].get<std::vector<double>>();
    if (j.contains("wdot")) d.wdot = j["wdot"].get<std::vector<double>>();
    if (d.eigenvalues.empty()) throw ParseError("spectral data has no eigenvalues");
    if (d.norming.size() != d.eigenvalues.size()) throw ParseError("eigenvalue and norming counts differ");
    if (j.contains("N") && j["N"].get<int>() != d.N()) throw ParseError("N does not match the eigenvalue count");
    if ((!d.normalizing.empty() && d.normalizing.size() != d.eigenvalues.size()) ||
        (!d.wdot.empty() && d.wdot.size() != d.eigenvalues.size())) {
      throw ParseError("auxiliary sequences must match the eigenvalue count");
    }
    std::tie(d.remainders, d.norming_deviation) = extract_remainders(d);
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("spectral data: ") + e.what());
  }
}

namespace {

nlohmann::json to_json(const TailVerdict& v) {
  return {{"finite", v.finite}, {"slope", v.slope}, {"tail_fraction", v.tail_fraction}, {"norm", v.norm}};
}

}  // namespace

nlohmann::json to_json(const CharacterizationReport& r) {
  nlohmann::json j{{"admissible", r.admissible()},
                   {"ordering", r.ordering},
                   {"remainders_l2", r.remainders_l2},
                   {"norming_l2", r.norming_l2},
                   {"remainder_tail", to_json(r.remainder_tail)},
                   {"norming_tail", to_json(r.norming_tail)}};
  if (r.first_disorder >= 0) j["first_disorder"] = r.first_disorder;
  if (r.normalizing_l2) {
    j["normalizing_l2"] = *r.normalizing_l2;
    j["normalizing_tail"] = to_json(*r.normalizing_tail);
  }
  return j;
}

nlohmann::json to_json(const EquivalenceReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"n", row.n},
                    {"impedance_eigenvalue", row.impedance_eigenvalue},
                    {"schrodinger_eigenvalue_plus_c0", row.schrodinger_eigenvalue},
                    {"impedance_norming", row.impedance_norming},
                    {"schrodinger_norming", row.schrodinger_norming}});
  }
  return {{"c0", r.c0},
          {"max_eigenvalue_discrepancy", r.max_eigenvalue_discrepancy},
          {"max_norming_discrepancy", r.max_norming_discrepancy},
          {"rows", rows}};
}

nlohmann::json to_json(const SeriesReport& r) {
  return {{"value", r.value},
          {"stopped_at", r.stopped_at},
          {"stop_reason", r.stop_reason},
          {"partial_sums", r.partial_sums}};
}

}  // namespace liouville
