#include "liouville/potential_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <shared_mutex>

#include "liouville/errors.hpp"

namespace liouville {

namespace {

constexpr double kEndpointTolerance = 1e-12;
constexpr double kMeanTolerance = 1e-10;
constexpr int kValidationSamples = 1024;
constexpr double kMaxExponent = 700.0;

GridFunction pointwise(const GridFunction& f, auto&& fn) {
  std::vector<double> v(f.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = fn(f[j]);
  return GridFunction(std::move(v));
}

}  // namespace

Impedance::Impedance(GridFunction q) : q_(std::move(q)) {
  if (std::abs(q_.front()) > kEndpointTolerance || std::abs(q_.back()) > kEndpointTolerance) {
    throw DomainError("impedance must vanish at both endpoints");
  }
}

Potential::Potential(GridFunction p) : p_(std::move(p)) {
  if (std::abs(integrate(p_)) > kMeanTolerance * (1.0 + l2_norm(p_))) {
    throw DomainError("potential must have zero mean");
  }
}

double Polynomial::operator()(double t) const {
  double s = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) s = s * t + *it;
  return s;
}

Polynomial Polynomial::derivative() const {
  Polynomial d;
  for (std::size_t i = 1; i < coeffs.size(); ++i) d.coeffs.push_back(static_cast<double>(i) * coeffs[i]);
  return d;
}

bool Polynomial::is_zero() const {
  return std::all_of(coeffs.begin(), coeffs.end(), [](double c) { return c == 0.0; });
}

U2Term U2Term::exponential(double E, double beta) {
  U2Term t;
  t.kind = Kind::exponential;
  t.E = E;
  t.beta = beta;
  return t;
}

U2Term U2Term::polynomial(std::vector<double> coeffs) {
  U2Term t;
  t.kind = Kind::polynomial;
  t.poly.coeffs = std::move(coeffs);
  return t;
}

double U2Term::value(double t) const {
  switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::exponential: return E * std::exp(-beta * t);
    case Kind::polynomial: return poly(t);
  }
  return 0.0;
}

double U2Term::derivative(double t) const {
  switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::exponential: return -beta * E * std::exp(-beta * t);
    case Kind::polynomial: return poly.derivative()(t);
  }
  return 0.0;
}

bool U2Term::is_zero() const {
  switch (kind) {
    case Kind::zero: return true;
    case Kind::exponential: return E == 0.0;
    case Kind::polynomial: return poly.is_zero();
  }
  return true;
}

MonotoneBound::MonotoneBound(std::vector<std::pair<double, double>> table) : table_(std::move(table)) {
  std::sort(table_.begin(), table_.end());
  if (!is_nondecreasing()) throw DomainError("bound table must be nondecreasing");
  for (const auto& [x, v] : table_) {
    if (x < 0.0 || v < 0.0) throw DomainError("bound table must be nonnegative");
  }
}

MonotoneBound MonotoneBound::from_samples(std::vector<std::pair<double, double>> samples) {
  std::sort(samples.begin(), samples.end());
  double running = 0.0;
  for (auto& [x, v] : samples) {
    running = std::max(running, v);
    v = running;
  }
  return MonotoneBound(std::move(samples));
}

double MonotoneBound::operator()(double t) const {
  double v = 0.0;
  const double reach = t * (1.0 + 1e-12) + 1e-300;
  for (const auto& [x, fx] : table_) {
    if (x > reach) break;
    v = fx;
  }
  return v;
}

bool MonotoneBound::is_nondecreasing() const {
  for (std::size_t i = 1; i < table_.size(); ++i) {
    if (table_[i].second < table_[i - 1].second) return false;
  }
  return true;
}

struct ConditionU::Cache {
  std::shared_mutex mutex;
  std::map<double, bool> verdicts;
};

ConditionU::ConditionU() : cache_(std::make_shared<Cache>()) {}

ConditionU::ConditionU(Polynomial u1, U2Term u2)
    : u1_(std::move(u1)), u2_(std::move(u2)), cache_(std::make_shared<Cache>()) {}

void ConditionU::set_bounds(MonotoneBound F1, MonotoneBound F2) {
  F1_ = std::move(F1);
  F2_ = std::move(F2);
}

bool ConditionU::holds_on_range(double R) const {
  if (u2_.kind == U2Term::Kind::zero) return true;
  {
    std::shared_lock lock(cache_->mutex);
    if (auto it = cache_->verdicts.find(R); it != cache_->verdicts.end()) return it->second;
  }
  bool ok = true;
  for (int i = 0; i < kValidationSamples && ok; ++i) {
    const double t = -R + 2.0 * R * i / (kValidationSamples - 1);
    ok = u2_.derivative(t) <= 0.0;
  }
  std::unique_lock lock(cache_->mutex);
  cache_->verdicts.emplace(R, ok);
  return ok;
}

void ConditionU::validate(double R) const {
  if (!holds_on_range(R)) {
    throw ConditionUViolation("u2'(t) > 0 somewhere on [-" + std::to_string(R) + ", " +
                              std::to_string(R) + "]");
  }
}

ConditionU condition_u_from_json(const nlohmann::json& j) {
  try {
    Polynomial u1;
    if (j.contains("u1")) u1.coeffs = j.at("u1").get<std::vector<double>>();
    U2Term u2;
    if (j.contains("u2")) {
      const auto& t = j.at("u2");
      const auto kind = t.at("kind").get<std::string>();
      if (kind == "zero") {
        u2 = U2Term::zero();
      } else if (kind == "exp") {
        u2 = U2Term::exponential(t.at("E").get<double>(), t.at("beta").get<double>());
      } else if (kind == "poly") {
        u2 = U2Term::polynomial(t.at("coeffs").get<std::vector<double>>());
      } else {
        throw ParseError("unknown u2 kind `" + kind + "`");
      }
    }
    ConditionU cfg(std::move(u1), std::move(u2));
    if (j.contains("F1") && j.contains("F2")) {
      cfg.set_bounds(MonotoneBound(j.at("F1").get<std::vector<std::pair<double, double>>>()),
                     MonotoneBound(j.at("F2").get<std::vector<std::pair<double, double>>>()));
    }
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("condition U JSON: ") + e.what());
  } catch (const DomainError& e) {
    throw ParseError(std::string("condition U JSON: ") + e.what());
  }
}

nlohmann::json to_json(const ConditionU& cfg) {
  nlohmann::json j;
  j["u1"] = cfg.u1().coeffs;
  const auto& u2 = cfg.u2();
  switch (u2.kind) {
    case U2Term::Kind::zero: j["u2"] = {{"kind", "zero"}}; break;
    case U2Term::Kind::exponential: j["u2"] = {{"kind", "exp"}, {"E", u2.E}, {"beta", u2.beta}}; break;
    case U2Term::Kind::polynomial: j["u2"] = {{"kind", "poly"}, {"coeffs", u2.poly.coeffs}}; break;
  }
  if (cfg.F1() && cfg.F2()) {
    j["F1"] = cfg.F1()->table();
    j["F2"] = cfg.F2()->table();
  }
  return j;
}

ImpedanceProfile build_rho(const Impedance& q) {
  GridFunction Q = cumulative_integral(q.q());
  if (sup_norm(Q) > kMaxExponent) throw RangeError("sup|Q| exceeds 700, exp(Q) overflows");
  GridFunction rho = pointwise(Q, [](double t) { return std::exp(t); });
  return {std::move(Q), std::move(rho)};
}

GridFunction evaluate_u(const Impedance& q, const ConditionU& cfg) {
  const GridFunction Q = cumulative_integral(q.q());
  cfg.validate(sup_norm(Q));
  std::vector<double> u(q.q().size());
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = cfg.u1()(q.q()[j]) + cfg.u2().value(Q[j]);
  return GridFunction(std::move(u));
}

double compute_c0(const Impedance& q, const ConditionU& cfg) {
  return inner_product(q.q(), q.q()) + integrate(evaluate_u(q, cfg));
}

ImpedanceJet ImpedanceJet::from_grid(const GridFunction& f) {
  return {f, differentiate(f), cumulative_integral(f)};
}

GridFunction transform_unshifted(const ImpedanceJet& q, const ConditionU& cfg) {
  require_same_grid(q.value, q.derivative);
  require_same_grid(q.value, q.antiderivative);
  cfg.validate(sup_norm(q.antiderivative));
  std::vector<double> p(q.value.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double qj = q.value[j];
    p[j] = q.derivative[j] + qj * qj + cfg.u1()(qj) + cfg.u2().value(q.antiderivative[j]);
  }
  return GridFunction(std::move(p));
}

GridFunction frechet_unshifted(const ImpedanceJet& q, const ConditionU& cfg, const ImpedanceJet& f) {
  require_same_grid(q.value, f.value);
  const Polynomial du1 = cfg.u1().derivative();
  std::vector<double> g(q.value.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double qj = q.value[j];
    g[j] = f.derivative[j] + (2.0 * qj + du1(qj)) * f.value[j] +
           cfg.u2().derivative(q.antiderivative[j]) * f.antiderivative[j];
  }
  return GridFunction(std::move(g));
}

Potential forward_transform(const Impedance& q, const ConditionU& cfg) {
  GridFunction p = transform_unshifted(ImpedanceJet::from_grid(q.q()), cfg);
  const double m = mean(p);
  return Potential(p - GridFunction::constant(p.cells(), m));
}

GridFunction frechet_apply(const Impedance& q, const ConditionU& cfg, const GridFunction& f) {
  require_same_grid(q.q(), f);
  GridFunction g = frechet_unshifted(ImpedanceJet::from_grid(q.q()), cfg, ImpedanceJet::from_grid(f));
  const double m = mean(g);
  return g - GridFunction::constant(g.cells(), m);
}

bool EstimateReport::all_hold() const {
  return std::all_of(entries.begin(), entries.end(), [](const EstimateEntry& e) { return e.holds; });
}

const EstimateEntry& EstimateReport::at(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return e;
  }
  throw DomainError("no estimate named " + name);
}

std::pair<MonotoneBound, MonotoneBound> calibrate_bounds(const Impedance& q, const ConditionU& cfg) {
  constexpr int kSweep = 64;
  const ImpedanceJet jet = ImpedanceJet::from_grid(q.q());
  const Polynomial du1 = cfg.u1().derivative();
  std::vector<std::pair<double, double>> s1, s2;
  const double dq_norm = l2_norm(jet.derivative);
  const double q_norm = l2_norm(jet.value);
  for (int i = 0; i <= kSweep; ++i) {
    const double s = static_cast<double>(i) / kSweep;
    const GridFunction u1v = pointwise(jet.value, [&](double t) { return cfg.u1()(s * t); });
    const GridFunction du1v = pointwise(jet.value, [&](double t) { return du1(s * t); });
    const GridFunction du2v =
        pointwise(jet.antiderivative, [&](double t) { return cfg.u2().derivative(s * t); });
    s1.emplace_back(s * dq_norm, std::max(l2_norm(u1v), l2_norm(du1v)));
    s2.emplace_back(s * q_norm, l2_norm(du2v));
  }
  return {MonotoneBound::from_samples(std::move(s1)), MonotoneBound::from_samples(std::move(s2))};
}

EstimateReport estimate_suite(const Impedance& q, const ConditionU& cfg, double identity_tolerance) {
  const int n = q.cells();
  const ImpedanceJet jet = ImpedanceJet::from_grid(q.q());
  cfg.validate(sup_norm(jet.antiderivative));

  MonotoneBound F1, F2;
  if (cfg.F1() && cfg.F2()) {
    F1 = *cfg.F1();
    F2 = *cfg.F2();
  } else {
    std::tie(F1, F2) = calibrate_bounds(q, cfg);
  }

  const GridFunction& qv = jet.value;
  const GridFunction q2 = hadamard(qv, qv);
  const GridFunction u1v = pointwise(qv, [&](double t) { return cfg.u1()(t); });
  const GridFunction u2v = pointwise(jet.antiderivative, [&](double t) { return cfg.u2().value(t); });
  const GridFunction du2v = pointwise(jet.antiderivative, [&](double t) { return cfg.u2().derivative(t); });
  const GridFunction u = u1v + u2v;
  const double c0 = integrate(q2) + integrate(u);
  const GridFunction h = q2 + u - GridFunction::constant(n, c0);
  const GridFunction p = forward_transform(q, cfg).p();
  const GridFunction u_at_zero = GridFunction::constant(n, cfg.u1()(0.0) + cfg.u2().value(0.0));

  const double np = l2_norm(p);
  const double ndq = l2_norm(jet.derivative);
  const double nq = l2_norm(qv);
  const double nh = l2_norm(h);
  const double nq2 = l2_norm(q2);
  const double supq = sup_norm(qv);
  const double supQ = sup_norm(jet.antiderivative);
  const double f1 = F1(ndq);
  const double f2 = F2(nq);
  const double F = ndq * f1 + nq * f2;
  const double u_dev = l2_norm(u - u_at_zero);

  EstimateReport rep;
  rep.cross_term = inner_product(q2, du2v);

  auto identity = [&](std::string name, double lhs, double rhs) {
    const double margin = std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
    rep.entries.push_back({std::move(name), lhs, rhs, true, margin <= identity_tolerance, margin});
  };
  auto inequality = [&](std::string name, double lhs, double rhs) {
    const double slack = 1e-9 * std::max(1.0, std::abs(rhs));
    rep.entries.push_back({std::move(name), lhs, rhs, false, lhs <= rhs + slack, rhs - lhs});
  };

  identity("Pe1.identity", np * np, ndq * ndq + nh * nh - 2.0 * rep.cross_term);
  inequality("Pe1.lower", ndq * ndq + nh * nh, np * np);
  inequality("cross_term.sign", rep.cross_term, 0.0);
  inequality("Pu2.u2", l2_norm(u2v - GridFunction::constant(n, cfg.u2().value(0.0))), supQ * f2);
  inequality("Pu2.u1", l2_norm(u1v - GridFunction::constant(n, cfg.u1()(0.0))), supq * f1);
  inequality("Pu.mean", l2_norm(u - GridFunction::constant(n, integrate(u))), u_dev);
  inequality("Pu.F", u_dev, F);
  inequality("Pu.h", nh, nq2 + u_dev);
  inequality("Pu.h_F", nh, nq2 + F);
  inequality("Pe3", np, ndq + nh + std::sqrt(2.0 * nq2 * f2));
  inequality("eP1.lower", ndq, np);
  inequality("eP1.upper", np, ndq + nq2 + ndq * f1 + nq * f2 + std::sqrt(2.0 * nq2 * f2));
  inequality("embedding.sup_q", supq, ndq);
  inequality("embedding.l2_q", nq, ndq);
  inequality("embedding.sup_Q", supQ, nq);
  if (cfg.is_zero()) {
    identity("Pe4.c0", c0, nq * nq);
    identity("Pe4.identity", np * np, ndq * ndq + nq2 * nq2 - c0 * c0);
    inequality("Pe4.lower", ndq * ndq, np * np);
    inequality("Pe4.upper", np * np, ndq * ndq + nq2 * nq2);
  }
  return rep;
}

}  // namespace liouville
