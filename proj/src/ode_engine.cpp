#include "liouville/ode_engine.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "liouville/errors.hpp"

namespace liouville {

namespace detail {

/// Coefficients on one integration level: node values and cubic midpoint values.
struct LevelTables {
  int cells = 0;
  double h = 0.0;
  std::vector<double> c, c_mid;
  std::vector<double> a, a_mid;  // empty when there is no drift term
};

}  // namespace detail

namespace {

using detail::LevelTables;

constexpr double kRescaleAbove = 1e100;
constexpr double kRescaleBelow = 1e-100;
constexpr double kMaxAngleStep = 0.75 * std::numbers::pi;
// RK4 on y'' = -w^2 y is stable for h w < 2.83; stay clear of it
constexpr double kMaxStepPhase = 2.5;
constexpr int kMaxPrecomputedLevel = 3;

std::vector<double> midpoints(const std::vector<double>& f) {
  const int m = static_cast<int>(f.size()) - 1;
  std::vector<double> mid(m);
  mid[0] = (5 * f[0] + 15 * f[1] - 5 * f[2] + f[3]) / 16.0;
  for (int j = 1; j < m - 1; ++j) mid[j] = (-f[j - 1] + 9 * f[j] + 9 * f[j + 1] - f[j + 2]) / 16.0;
  mid[m - 1] = (f[m - 3] - 5 * f[m - 2] + 15 * f[m - 1] + 5 * f[m]) / 16.0;
  return mid;
}

LevelTables make_level(const GridFunction& potential, const std::optional<GridFunction>& drift, int level) {
  const int stride = 1 << level;
  LevelTables t;
  const GridFunction c = potential.subsample(stride);
  t.cells = c.cells();
  t.h = 1.0 / t.cells;
  t.c.assign(c.values().begin(), c.values().end());
  t.c_mid = midpoints(t.c);
  if (drift) {
    const GridFunction a = drift->subsample(stride);
    t.a.assign(a.values().begin(), a.values().end());
    t.a_mid = midpoints(t.a);
  }
  return t;
}

struct State {
  double y = 0.0, v = 0.0, z = 0.0, w = 0.0;
};

template <bool Var, bool Drift>
inline State rhs(const State& s, double c, double a, double lambda) {
  State d;
  const double k = c - lambda;
  d.y = s.v;
  d.v = (Drift ? a * s.v : 0.0) + k * s.y;
  if constexpr (Var) {
    d.z = s.w;
    d.w = (Drift ? a * s.w : 0.0) + k * s.z - s.y;
  }
  return d;
}

inline State axpy(const State& s, double t, const State& d) {
  return {s.y + t * d.y, s.v + t * d.v, s.z + t * d.z, s.w + t * d.w};
}

/// Classical RK4 over the level grid. `observe(j, state, log_scale)` is called at
/// every node in integration order, starting with the initial node.
template <bool Var, bool Drift, class Observer>
void integrate(const LevelTables& t, double lambda, State s, bool backward, double scale_ref,
               Observer&& observe) {
  const int m = t.cells;
  const double h = backward ? -t.h : t.h;
  double log_scale = 0.0;
  int j = backward ? m : 0;
  observe(j, s, log_scale);
  for (int step = 0; step < m; ++step) {
    const int next = backward ? j - 1 : j + 1;
    const int mid = backward ? j - 1 : j;
    const double a0 = Drift ? t.a[j] : 0.0, am = Drift ? t.a_mid[mid] : 0.0, a1 = Drift ? t.a[next] : 0.0;
    const State k1 = rhs<Var, Drift>(s, t.c[j], a0, lambda);
    const State k2 = rhs<Var, Drift>(axpy(s, 0.5 * h, k1), t.c_mid[mid], am, lambda);
    const State k3 = rhs<Var, Drift>(axpy(s, 0.5 * h, k2), t.c_mid[mid], am, lambda);
    const State k4 = rhs<Var, Drift>(axpy(s, h, k3), t.c[next], a1, lambda);
    const double h6 = h / 6.0;
    s.y += h6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y);
    s.v += h6 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v);
    if constexpr (Var) {
      s.z += h6 * (k1.z + 2 * k2.z + 2 * k3.z + k4.z);
      s.w += h6 * (k1.w + 2 * k2.w + 2 * k3.w + k4.w);
    }
    const double mag = std::max(std::abs(s.y), std::abs(s.v) / scale_ref);
    if (!std::isfinite(mag)) {
      throw IntegrationError("integration overflow at lambda = " + std::to_string(lambda) +
                             " on a " + std::to_string(m) + "-cell grid");
    }
    if (mag > kRescaleAbove || (mag < kRescaleBelow && mag > 0.0)) {
      s.y /= mag;
      s.v /= mag;
      s.z /= mag;
      s.w /= mag;
      log_scale += std::log(mag);
    }
    j = next;
    observe(j, s, log_scale);
  }
}

template <class Observer>
void dispatch(const LevelTables& t, double lambda, const State& s, bool backward, bool var,
              Observer&& observe) {
  const double S = prufer_scale(lambda);
  const bool drift = !t.a.empty();
  if (var) {
    if (drift) integrate<true, true>(t, lambda, s, backward, S, observe);
    else integrate<true, false>(t, lambda, s, backward, S, observe);
  } else {
    if (drift) integrate<false, true>(t, lambda, s, backward, S, observe);
    else integrate<false, false>(t, lambda, s, backward, S, observe);
  }
}

/// Unwraps atan2(S y, y') node by node.
class AngleTracker {
 public:
  explicit AngleTracker(double S) : S_(S) {}

  void observe(double y, double v, double lambda) {
    const double raw = std::atan2(S_ * y, v);
    if (!started_) {
      angle_ = raw;
      started_ = true;
    } else {
      double d = raw - last_;
      if (d > std::numbers::pi) d -= 2 * std::numbers::pi;
      if (d <= -std::numbers::pi) d += 2 * std::numbers::pi;
      if (std::abs(d) > kMaxAngleStep) {
        throw IntegrationError("grid too coarse to resolve oscillations at lambda = " +
                               std::to_string(lambda));
      }
      angle_ += d;
    }
    last_ = raw;
  }
  double angle() const { return angle_; }

 private:
  double S_;
  double angle_ = 0.0;
  double last_ = 0.0;
  bool started_ = false;
};

State left_state(const BoundaryParam& a) {
  if (a.is_dirichlet()) return {0.0, 1.0, 0.0, 0.0};
  return {1.0, a.value(), 0.0, 0.0};
}

WronskianValue end_wronskian(const State& s, double log_scale, double rho_end, const BoundaryParam& b) {
  WronskianValue w;
  w.log_scale = log_scale;
  if (b.is_dirichlet()) {
    w.mantissa = rho_end * s.y;
    w.derivative_mantissa = rho_end * s.z;
  } else {
    w.mantissa = rho_end * (s.v + b.value() * s.y);
    w.derivative_mantissa = rho_end * (s.w + b.value() * s.z);
  }
  return w;
}

void require_resolved(const ProblemKind& prob, int level, double lambda) {
  const double hw = prob.step_phase(level, lambda);
  if (hw > kMaxStepPhase) {
    throw IntegrationError("grid too coarse to resolve oscillations at lambda = " + std::to_string(lambda) +
                           " (h * omega = " + std::to_string(hw) + ")");
  }
}


StateTrace record(const ProblemKind& prob, double lambda, const State& init, bool backward,
                  const ShootOptions& opts) {
  if (!std::isfinite(lambda) || !std::isfinite(init.y) || !std::isfinite(init.v)) {
    throw IntegrationError("non-finite shooting data");
  }
  require_resolved(prob, opts.level, lambda);
  const LevelTables& t = prob.tables(opts.level);
  const std::size_t size = static_cast<std::size_t>(t.cells) + 1;
  std::vector<double> y(size), v(size), z, w, ls(size);
  if (opts.variational) {
    z.resize(size);
    w.resize(size);
  }
  bool rescaled = false;
  dispatch(t, lambda, init, backward, opts.variational, [&](int j, const State& s, double log_scale) {
    y[j] = s.y;
    v[j] = s.v;
    if (opts.variational) {
      z[j] = s.z;
      w[j] = s.w;
    }
    ls[j] = log_scale;
    rescaled = rescaled || log_scale != 0.0;
  });
  StateTrace trace{lambda, GridFunction(std::move(y)), GridFunction(std::move(v)), std::nullopt,
                   std::nullopt, {}};
  if (opts.variational) {
    trace.dz_lambda = GridFunction(std::move(z));
    trace.ddz_lambda = GridFunction(std::move(w));
  }
  if (rescaled) trace.log_scale = std::move(ls);
  return trace;
}

double series_sum(double x, int offset) {
  // sum_k x^k / (2k + offset)!, x >= 0
  double term = 1.0;
  for (int i = 2; i <= offset; ++i) term /= i;
  double sum = term;
  for (int k = 1; k < 10000; ++k) {
    term *= x / ((2.0 * k + offset - 1) * (2.0 * k + offset));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

}  // namespace

BoundaryParam::BoundaryParam(double v) : value_(v) {
  if (!std::isfinite(v)) throw DomainError("finite boundary coefficient expected");
}

double BoundaryParam::value() const {
  if (!value_) throw DomainError("Dirichlet boundary has no finite coefficient");
  return *value_;
}

std::string BoundaryParam::to_string() const {
  if (!value_) return "infinity";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", *value_);
  return buf;
}

void to_json(nlohmann::json& j, const BoundaryParam& b) {
  if (b.is_dirichlet()) j = "infinity";
  else j = b.value();
}

BoundaryParam boundary_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "infinity" || s == "inf" || s == "dirichlet") return BoundaryParam::dirichlet();
    throw ParseError("boundary coefficient must be a number or \"infinity\", got \"" + s + "\"");
  }
  if (j.is_number()) return BoundaryParam::robin(j.get<double>());
  throw ParseError("boundary coefficient must be a number or \"infinity\"");
}

ProblemKind::ProblemKind(ProblemType type, GridFunction potential)
    : type_(type), potential_(std::move(potential)) {}

ProblemKind ProblemKind::schrodinger(Potential p) {
  ProblemKind prob(ProblemType::schrodinger, p.p());
  prob.c0_ = mean(p.p());
  prob.p_ = std::move(p);
  prob.build_tables();
  return prob;
}

ProblemKind ProblemKind::impedance(Impedance q, ConditionU cfg) {
  ImpedanceProfile profile = build_rho(q);
  ProblemKind prob(ProblemType::impedance, evaluate_u(q, cfg));
  prob.drift_ = -2.0 * q.q();
  prob.rho_end_ = profile.rho.back();
  prob.c0_ = compute_c0(q, cfg);
  prob.q_ = std::move(q);
  prob.cfg_ = std::move(cfg);
  prob.profile_ = std::move(profile);
  prob.build_tables();
  return prob;
}

void ProblemKind::build_tables() {
  min_potential_ = *std::min_element(potential_.values().begin(), potential_.values().end());
  if (drift_) {
    const double d = sup_norm(*drift_);
    max_drift_sq_ = d * d;
  }
  auto levels = std::make_shared<std::vector<detail::LevelTables>>();
  for (int level = 0; level <= kMaxPrecomputedLevel; ++level) {
    const int stride = 1 << level;
    if (cells() % stride != 0) break;
    const int m = cells() / stride;
    if (m < 16 || m % 2 != 0) break;
    levels->push_back(make_level(potential_, drift_, level));
  }
  tables_ = std::move(levels);
}

const detail::LevelTables& ProblemKind::tables(int level) const {
  if (level < 0 || level > max_level()) {
    throw DomainError("integration level " + std::to_string(level) + " unavailable for n = " +
                      std::to_string(cells()));
  }
  return (*tables_)[level];
}

int ProblemKind::max_level() const { return static_cast<int>(tables_->size()) - 1; }

double ProblemKind::step_phase(int level, double lambda) const {
  const double w2 = std::max(0.0, lambda - min_potential_) + 0.25 * max_drift_sq_;
  return tables(level).h * std::sqrt(w2);
}

double StateTrace::y_at(int j) const { return y[j] * std::exp(scale(j)); }
double StateTrace::dy_at(int j) const { return dy[j] * std::exp(scale(j)); }

StateTrace StateTrace::scaled(double s) const {
  StateTrace t = *this;
  t.y *= s;
  t.dy *= s;
  if (t.dz_lambda) *t.dz_lambda *= s;
  if (t.ddz_lambda) *t.ddz_lambda *= s;
  return t;
}

StateTrace shoot_forward(const ProblemKind& prob, double lambda, double y0, double dy0,
                         const ShootOptions& opts) {
  return record(prob, lambda, {y0, dy0, 0.0, 0.0}, false, opts);
}

StateTrace shoot_left(const ProblemKind& prob, double lambda, const BoundaryParam& a,
                      const ShootOptions& opts) {
  return record(prob, lambda, left_state(a), false, opts);
}

StateTrace shoot_backward(const ProblemKind& prob, double lambda, const BoundaryParam& b,
                          const ShootOptions& opts) {
  const State end = b.is_dirichlet() ? State{0.0, -1.0, 0.0, 0.0} : State{-1.0, b.value(), 0.0, 0.0};
  return record(prob, lambda, end, true, opts);
}

double WronskianValue::value() const { return mantissa * std::exp(log_scale); }
double WronskianValue::derivative() const { return derivative_mantissa * std::exp(log_scale); }

ShotSummary shoot_summary(const ProblemKind& prob, double lambda, const BoundaryParam& a,
                          const BoundaryParam& b, const ShootOptions& opts) {
  if (!std::isfinite(lambda)) throw IntegrationError("non-finite lambda");
  require_resolved(prob, opts.level, lambda);
  const LevelTables& t = prob.tables(opts.level);
  AngleTracker angle(prufer_scale(lambda));
  State last;
  double last_scale = 0.0;
  dispatch(t, lambda, left_state(a), false, opts.variational, [&](int, const State& s, double log_scale) {
    angle.observe(s.y, s.v, lambda);
    last = s;
    last_scale = log_scale;
  });
  return {end_wronskian(last, last_scale, prob.rho_end(), b), angle.angle()};
}

WronskianValue wronskian(const ProblemKind& prob, double lambda, const BoundaryParam& a,
                         const BoundaryParam& b, const ShootOptions& opts) {
  ShootOptions o = opts;
  o.variational = true;
  return shoot_summary(prob, lambda, a, b, o).w;
}

double prufer_scale(double lambda) { return std::sqrt(std::max(1.0, std::abs(lambda))); }

double prufer_angle_end(const StateTrace& trace) {
  AngleTracker angle(prufer_scale(trace.lambda));
  // Rescaling multiplies (y, y') jointly and leaves the angle unchanged.
  for (std::size_t j = 0; j < trace.y.size(); ++j) angle.observe(trace.y[j], trace.dy[j], trace.lambda);
  return angle.angle();
}

double prufer_target(const BoundaryParam& b, double lambda) {
  if (b.is_dirichlet()) return std::numbers::pi;
  return std::atan2(prufer_scale(lambda), -b.value());
}

int oscillation_count(const ProblemKind& prob, double lambda, const BoundaryParam& a,
                      const ShootOptions& opts) {
  ShootOptions o = opts;
  o.variational = false;
  const double theta = shoot_summary(prob, lambda, a, BoundaryParam::dirichlet(), o).end_angle;
  return std::max(0, static_cast<int>(std::ceil(theta / std::numbers::pi)) - 1);
}

int eigenvalues_below(const ProblemKind& prob, double lambda, const BoundaryParam& a,
                      const BoundaryParam& b, const ShootOptions& opts) {
  ShootOptions o = opts;
  o.variational = false;
  const double theta = shoot_summary(prob, lambda, a, b, o).end_angle;
  return std::max(0, static_cast<int>(std::ceil((theta - prufer_target(b, lambda)) / std::numbers::pi)));
}

double entire_cos_sqrt(double lambda) {
  if (lambda > 0.0) return std::cos(std::sqrt(lambda));
  return series_sum(-lambda, 0);
}

double entire_sinc_sqrt(double lambda) {
  if (lambda > 0.0) {
    const double r = std::sqrt(lambda);
    return std::sin(r) / r;
  }
  return series_sum(-lambda, 1);
}

}  // namespace liouville
