#include "liouville/cli.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "liouville/errors.hpp"
#include "liouville/function_space.hpp"
#include "liouville/inverse_solver.hpp"
#include "liouville/ode_engine.hpp"
#include "liouville/potential_model.hpp"
#include "liouville/spectral_solver.hpp"

namespace liouville::cli {

using nlohmann::json;

namespace {

constexpr int kDefaultCells = 2048;
constexpr int kDefaultFitCells = 1024;

struct Options {
  std::string p, q, u = "zero", bc = "dirichlet", out = "-", report, target, spectral, emit_plot, what = "potential";
  std::optional<int> n;
  int N = 16;
  int jobs = 1;
  std::uint64_t seed = 0;
  int K = 32;
  int max_iterations = 40;
  double tolerance = 1e-10;
  double lambda = 0.0;
  int index = -1;
  int random_trials = 0;
};

int default_jobs() {
  if (const char* env = std::getenv("LIOUVILLE_SPEC_JOBS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      throw ParseError(std::string("LIOUVILLE_SPEC_JOBS is not an integer: ") + env);
    }
  }
  return 1;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int checked_cells(const Options& o) {
  const int n = o.n.value_or(kDefaultCells);
  if (n < 256 || n > 16384 || (n & (n - 1)) != 0) {
    throw ParseError("grid size n must be a power of two in [256, 16384], got " + std::to_string(n));
  }
  return n;
}

void check_count(int N) {
  if (N < 1 || N > 64) throw ParseError("truncation N must be in [1, 64], got " + std::to_string(N));
}

/// zero | fourier:[c1, c2, ...] | path to an x,value CSV.
GridFunction load_function(const std::string& spec, FourierBasis basis, const Options& o) {
  if (spec == "zero") return GridFunction::constant(checked_cells(o), 0.0);
  if (spec.rfind("fourier:", 0) == 0) {
    std::vector<double> coeffs;
    try {
      coeffs = json::parse(spec.substr(8)).get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw ParseError("bad inline fourier coefficients: " + spec);
    }
    return FourierRep{basis, coeffs}.evaluate(checked_cells(o));
  }
  GridFunction f = read_csv_file(spec);
  if (o.n && *o.n != f.cells()) {
    throw ParseError(spec + " has " + std::to_string(f.cells()) + " cells but --n is " + std::to_string(*o.n));
  }
  return f;
}

ConditionU load_condition(const std::string& spec) {
  if (spec == "zero") return ConditionU::zero();
  json j;
  try {
    if (!spec.empty() && spec.front() == '{') {
      j = json::parse(spec);
    } else {
      std::ifstream in(spec);
      if (!in) throw ParseError("cannot open " + spec);
      j = json::parse(in);
    }
  } catch (const json::exception& e) {
    throw ParseError("bad Condition U description: " + std::string(e.what()));
  }
  return condition_u_from_json(j);
}

double parse_number(const std::string& s) {
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ParseError("not a number: \"" + s + "\"");
  return v;
}

BoundaryParam boundary(double v) {
  return std::isinf(v) ? BoundaryParam::dirichlet() : BoundaryParam::robin(v);
}

/// dirichlet | mixed:b | generic:a,b | robin:a (Dirichlet at x = 1).
std::pair<BoundaryParam, BoundaryParam> parse_bc(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "dirichlet" && rest.empty()) return {BoundaryParam::dirichlet(), BoundaryParam::dirichlet()};
  if (kind == "mixed" && !rest.empty()) return {BoundaryParam::dirichlet(), boundary(parse_number(rest))};
  if (kind == "robin" && !rest.empty()) return {boundary(parse_number(rest)), BoundaryParam::dirichlet()};
  if (kind == "generic") {
    const auto comma = rest.find(',');
    if (comma != std::string::npos) {
      return {boundary(parse_number(rest.substr(0, comma))), boundary(parse_number(rest.substr(comma + 1)))};
    }
  }
  throw ParseError("boundary conditions must be dirichlet, mixed:b, generic:a,b or robin:a; got \"" + spec + "\"");
}

struct Problem {
  std::optional<Impedance> q;
  std::optional<Potential> p;
  ConditionU cfg;
  ProblemKind kind;
};

Problem load_problem(const Options& o) {
  if (o.p.empty() == o.q.empty()) throw ParseError("give exactly one of --p and --q");
  ConditionU cfg = load_condition(o.u);
  if (!o.q.empty()) {
    Impedance q(load_function(o.q, FourierBasis::sine_pi, o));
    return {q, std::nullopt, cfg, ProblemKind::impedance(q, cfg)};
  }
  Potential p(load_function(o.p, FourierBasis::cosine_pi, o));
  return {std::nullopt, p, cfg, ProblemKind::schrodinger(p)};
}

std::string csv_text(const GridFunction& f) {
  std::ostringstream s;
  write_csv(s, f);
  return s.str();
}

SolverOptions solver_options(const Options& o) { return {o.jobs, true}; }

void emit_plot(const Options& o, const GridFunction& coefficient, const std::vector<double>& eigenvalues, int base,
               std::ostream& out) {
  if (o.emit_plot.empty()) return;
  write_atomic(o.emit_plot + "_coefficient.csv", csv_text(coefficient), out);
  std::string s = "n,lambda\n";
  for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
    s += std::to_string(base + static_cast<int>(k)) + "," + format_number(eigenvalues[k]) + "\n";
  }
  write_atomic(o.emit_plot + "_spectrum.csv", s, out);
}

int cmd_spectrum(const Options& o, std::ostream& out) {
  check_count(o.N);
  const auto [a, b] = parse_bc(o.bc);
  const Problem prob = load_problem(o);
  const SpectralData data = compute_spectral_data(prob.kind, a, b, o.N, solver_options(o));
  write_atomic(o.out, to_json(data).dump(2) + "\n", out);
  emit_plot(o, prob.q ? prob.q->q() : prob.p->p(), data.eigenvalues, data.base(), out);
  return ok;
}

int cmd_transform(const Options& o, std::ostream& out) {
  if (o.q.empty() || !o.p.empty()) throw ParseError("transform needs --q");
  const Impedance q(load_function(o.q, FourierBasis::sine_pi, o));
  const Potential p = forward_transform(q, load_condition(o.u));
  write_atomic(o.out, csv_text(p.p()), out);
  return ok;
}

InversionConfig inversion_config(const Options& o) {
  InversionConfig icfg;
  icfg.K = o.K;
  icfg.max_iterations = o.max_iterations;
  icfg.tolerance = o.tolerance;
  icfg.jobs = o.jobs;
  return icfg;
}

int cmd_invert(const Options& o, std::ostream& out) {
  if (o.p.empty() || !o.q.empty()) throw ParseError("invert needs --p");
  const Potential p(load_function(o.p, FourierBasis::cosine_pi, o));
  const InversionResult r = invert_transform_report(p, load_condition(o.u), inversion_config(o));
  write_atomic(o.out, csv_text(r.q.q()), out);
  if (!o.report.empty()) write_atomic(o.report, to_json(r.report).dump(2) + "\n", out);
  return ok;
}

struct Checks {
  json list = json::array();
  bool all = true;

  void add(const std::string& name, bool pass, double value, double tolerance, json extra = json::object()) {
    json c{{"name", name}, {"pass", pass}, {"value", value}, {"tolerance", tolerance}, {"margin", tolerance - value}};
    c.update(extra);
    list.push_back(std::move(c));
    all = all && pass;
  }
};

std::vector<int> ladder(int N) {
  std::vector<int> out;
  for (int M : {8, 16, 32, 64}) {
    if (M <= N) out.push_back(M);
  }
  if (out.empty()) out.push_back(N);
  return out;
}

/// Decreasing up to a noise floor below which values are treated as converged.
bool decreasing(const std::vector<double>& v, double floor) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1] || v[i] <= floor)) return false;
  }
  return true;
}

void series_check(Checks& checks, const std::string& name, const SeriesReport& s, double target,
                  const std::vector<int>& Ms) {
  std::vector<double> res;
  for (int M : Ms) res.push_back(std::abs(s.partial_sums[M - 1] - target));
  const double tol = 2.0 / Ms.back();
  checks.add(name, decreasing(res, 1e-9) && res.back() <= tol, res.back(), tol,
             {{"ladder", Ms}, {"residuals", res}, {"target", target}});
}

void estimate_checks(Checks& checks, const std::string& prefix, const Impedance& q, const ConditionU& cfg) {
  const EstimateReport rep = estimate_suite(q, cfg);
  for (const auto& e : rep.entries) {
    const double tol = e.identity ? 1e-8 : e.rhs;
    const double value = e.identity ? e.margin : e.lhs;
    checks.add(prefix + e.name, e.holds, value, tol, {{"lhs", e.lhs}, {"rhs", e.rhs}});
  }
}

int cmd_verify(const Options& o, std::ostream& out) {
  check_count(o.N);
  const auto [a, b] = parse_bc(o.bc);
  const Problem prob = load_problem(o);
  const SolverOptions sopts = solver_options(o);
  Checks checks;

  if (prob.q) {
    estimate_checks(checks, "estimate.", *prob.q, prob.cfg);
    const EquivalenceReport eq = equivalence_report(*prob.q, prob.cfg, a, b, std::min(o.N, 15), sopts);
    checks.add("equivalence.eigenvalues", eq.max_eigenvalue_discrepancy <= 1e-6, eq.max_eigenvalue_discrepancy, 1e-6);
    checks.add("equivalence.norming", eq.max_norming_discrepancy <= 1e-6, eq.max_norming_discrepancy, 1e-6);
  }
  if (o.random_trials > 0) {
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    const int n = prob.kind.cells();
    int failures = 0;
    for (int t = 0; t < o.random_trials; ++t) {
      std::vector<double> c(4);
      for (int k = 0; k < 4; ++k) c[k] = coef(rng) / (k + 1);
      const Impedance q(FourierRep{FourierBasis::sine_pi, c}.evaluate(n));
      failures += estimate_suite(q, prob.cfg).all_hold() ? 0 : 1;
    }
    checks.add("estimate.random", failures == 0, failures, 0, {{"trials", o.random_trials}, {"seed", o.seed}});
  }

  const SpectralData data = compute_spectral_data(prob.kind, a, b, o.N, sopts);
  int sturm_misses = 0;
  for (int k = 0; k + 1 < data.N(); ++k) {
    const double mid = 0.5 * (data.eigenvalues[k] + data.eigenvalues[k + 1]);
    if (eigenvalues_below(prob.kind, mid, a, b) != k + 1) ++sturm_misses;
  }
  checks.add("sturm.count", sturm_misses == 0, sturm_misses, 0);

  const CharacterizationReport ch = characterize(data);
  checks.add("characterize.ordering", ch.ordering, ch.ordering ? 0 : 1, 0);
  checks.add("characterize.remainders_l2", ch.remainders_l2, ch.remainder_tail.norm, 0, {{"report", to_json(ch)}});
  checks.add("characterize.norming_l2", ch.norming_l2, ch.norming_tail.norm, 0);
  if (ch.normalizing_l2) checks.add("characterize.normalizing_l2", *ch.normalizing_l2, ch.normalizing_tail->norm, 0);

  const std::vector<int> Ms = ladder(data.N());
  const double shift = eigenvalue_shift(data.regime(), a, b, data.c0);
  std::vector<double> probes{std::min(data.eigenvalues[0], unperturbed_eigenvalue(data.regime(), data.base())) - 7.3};
  for (int k = 0; k + 1 < std::min(3, data.N()); ++k) {
    probes.push_back(0.5 * (data.eigenvalues[k] + data.eigenvalues[k + 1]));
  }
  for (double lambda : probes) {
    const double direct = wronskian_with_derivative(prob.kind, lambda, a, b, sopts).first;
    std::vector<double> err;
    for (int M : Ms) err.push_back(std::abs(hadamard_wronskian(data, lambda, M) - direct) / std::abs(direct));
    const double tol = 1e-3 + std::abs(shift) / Ms.back();
    checks.add("hadamard.lambda=" + format_number(lambda), decreasing(err, 1e-10) && err.back() <= tol, err.back(), tol,
               {{"ladder", Ms}, {"errors", err}});
  }
  if (data.regime() == Regime::mixed) {
    series_check(checks, "identity.b", identity_b(data, data.N()), b.value(), Ms);
  } else if (data.regime() == Regime::generic) {
    const auto [sb, sa] = identity_ab(data, data.N());
    series_check(checks, "identity.b", sb, b.value(), Ms);
    series_check(checks, "identity.a", sa, a.value(), Ms);
  }

  if (!o.spectral.empty()) {
    std::ifstream in(o.spectral);
    if (!in) throw ParseError("cannot open " + o.spectral);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ParseError(o.spectral + ": " + e.what());
    }
    const CharacterizationReport fc = characterize(spectral_data_from_json(j));
    checks.add("spectral_file.admissible", fc.admissible(), fc.admissible() ? 0 : 1, 0, {{"report", to_json(fc)}});
  }

  const json report{{"all_pass", checks.all}, {"checks", checks.list}};
  write_atomic(o.out, report.dump(2) + "\n", out);
  return checks.all ? ok : verify_failed;
}

int cmd_fit(const Options& o, std::ostream& out) {
  if (o.target.empty()) throw ParseError("fit needs --target");
  std::ifstream in(o.target);
  if (!in) throw ParseError("cannot open " + o.target);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(o.target + ": " + e.what());
  }
  const FitTarget target = fit_target_from_json(j);
  FitOptions fopts;
  fopts.cells = o.n ? checked_cells(o) : kDefaultFitCells;
  fopts.jobs = o.jobs;
  const InversionConfig icfg = inversion_config(o);
  json report;
  if (target.data.kind == ProblemType::impedance) {
    const ImpedanceFitResult r = fit_impedance_report(target, load_condition(o.u), icfg, fopts);
    write_atomic(o.out, csv_text(r.q.q()), out);
    report = {{"fit", to_json(r.fit)}, {"inversion", to_json(r.inversion)}, {"verify_residual", r.verify_residual}};
  } else {
    const FitResult r = fit_potential_report(target, icfg, fopts);
    write_atomic(o.out, csv_text(r.p.p()), out);
    report = {{"fit", to_json(r.report)}};
  }
  if (!o.report.empty()) write_atomic(o.report, report.dump(2) + "\n", out);
  return ok;
}

int cmd_export(const Options& o, std::ostream& out) {
  const auto [a, b] = parse_bc(o.bc);
  const Problem prob = load_problem(o);
  if (o.what == "potential") {
    const GridFunction f = prob.q ? forward_transform(*prob.q, prob.cfg).p() : prob.p->p();
    write_atomic(o.out, csv_text(f), out);
  } else if (o.what == "rho") {
    if (!prob.q) throw ParseError("--what rho needs --q");
    write_atomic(o.out, csv_text(build_rho(*prob.q).rho), out);
  } else if (o.what == "trace" || o.what == "eigenfunction") {
    double lambda = o.lambda;
    if (o.what == "eigenfunction") {
      if (o.index < 0) throw ParseError("--what eigenfunction needs --index");
      const int pos = o.index - index_base(regime_of(a, b));
      if (pos < 0 || pos >= 64) throw ParseError("eigenfunction index out of range");
      lambda = compute_eigenvalues(prob.kind, a, b, pos + 1, solver_options(o)).back();
    }
    write_atomic(o.out, csv_text(shoot_left(prob.kind, lambda, a).y), out);
  } else if (o.what == "spectrum") {
    check_count(o.N);
    const SpectralData data = compute_spectral_data(prob.kind, a, b, o.N, solver_options(o));
    std::string s = "n,lambda,norming\n";
    for (int k = 0; k < data.N(); ++k) {
      s += std::to_string(data.base() + k) + "," + format_number(data.eigenvalues[k]) + "," +
           format_number(data.norming[k]) + "\n";
    }
    write_atomic(o.out, s, out);
  } else {
    throw ParseError("--what must be potential, rho, trace, eigenfunction or spectrum");
  }
  return ok;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--n", o.n, "grid cells (power of two in [256, 16384])");
  sub->add_option("--jobs", o.jobs, "worker threads (default $LIOUVILLE_SPEC_JOBS or 1)");
  sub->add_option("--seed", o.seed, "seed for randomized suites");
  sub->add_option("--out,-o", o.out, "output file, - for stdout");
}

void add_problem(CLI::App* sub, Options& o) {
  sub->add_option("--p", o.p, "potential: zero, fourier:[c1,...] (cos pi k x) or CSV file");
  sub->add_option("--q", o.q, "impedance: zero, fourier:[c1,...] (sin pi k x) or CSV file");
  sub->add_option("--u", o.u, "Condition U: zero, inline JSON or JSON file");
  sub->add_option("--bc", o.bc, "dirichlet | mixed:b | generic:a,b | robin:a");
  sub->add_option("--N", o.N, "number of eigenvalues (1..64)");
}

void add_inversion(CLI::App* sub, Options& o) {
  sub->add_option("--K", o.K, "Galerkin basis size");
  sub->add_option("--max-iter", o.max_iterations, "Newton iteration cap");
  sub->add_option("--tol", o.tolerance, "projected residual tolerance");
  sub->add_option("--report", o.report, "JSON report path");
}

}  // namespace

void write_atomic(const std::string& path, const std::string& content, std::ostream& out) {
  if (path == "-") {
    out << content;
    out.flush();
    return;
  }
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ParseError("cannot write " + tmp.string());
    f << content;
    f.flush();
    if (!f) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw ParseError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ParseError("cannot move output into place at " + path);
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral tools for impedance and Schrodinger operators on [0, 1]", "liouville"};
  app.require_subcommand(1);
  Options o;
  try {
    o.jobs = default_jobs();
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return parse_error;
  }

  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues and norming constants as JSON");
  add_common(spectrum, o);
  add_problem(spectrum, o);
  spectrum->add_option("--emit-plot", o.emit_plot, "prefix for x,value and n,lambda CSV series");

  auto* transform = app.add_subcommand("transform", "p = P(q) as CSV");
  add_common(transform, o);
  transform->add_option("--q", o.q, "impedance: zero, fourier:[...] or CSV file")->required();
  transform->add_option("--u", o.u, "Condition U: zero, inline JSON or JSON file");

  auto* invert = app.add_subcommand("invert", "solve P(q) = p for q");
  add_common(invert, o);
  invert->add_option("--p", o.p, "potential: zero, fourier:[...] or CSV file")->required();
  invert->add_option("--u", o.u, "Condition U: zero, inline JSON or JSON file");
  add_inversion(invert, o);

  auto* verify = app.add_subcommand("verify", "run the verification suite");
  add_common(verify, o);
  add_problem(verify, o);
  verify->add_option("--spectral", o.spectral, "spectral data JSON to characterize");
  verify->add_option("--random-trials", o.random_trials, "randomized estimate-suite inputs");

  auto* fit = app.add_subcommand("fit", "fit a potential or impedance to spectral data");
  add_common(fit, o);
  fit->add_option("--target", o.target, "fit target JSON")->required();
  fit->add_option("--u", o.u, "Condition U for impedance targets");
  add_inversion(fit, o);

  auto* exp = app.add_subcommand("export", "CSV series: potential, rho, trace, eigenfunction, spectrum");
  add_common(exp, o);
  add_problem(exp, o);
  exp->add_option("--what", o.what, "potential | rho | trace | eigenfunction | spectrum");
  exp->add_option("--lambda", o.lambda, "spectral parameter for --what trace");
  exp->add_option("--index", o.index, "eigenvalue index for --what eigenfunction");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return parse_error;
  }

  try {
    if (o.jobs < 1) throw ParseError("--jobs must be >= 1");
    if (*spectrum) return cmd_spectrum(o, out);
    if (*transform) return cmd_transform(o, out);
    if (*invert) return cmd_invert(o, out);
    if (*verify) return cmd_verify(o, out);
    if (*fit) return cmd_fit(o, out);
    if (*exp) return cmd_export(o, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return parse_error;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return parse_error;
  } catch (const GridMismatchError& e) {
    err << "error: " << e.what() << "\n";
    return parse_error;
  } catch (const InversionError& e) {
    err << "inversion failed: " << e.what() << "\n";
    return inversion_error;
  } catch (const FitError& e) {
    err << "fit failed (" << e.stage() << "): " << e.what() << "\n";
    return fit_failed;
  } catch (const Error& e) {
    err << "solver error: " << e.what() << "\n";
    return solver_error;
  }
  return parse_error;
}

}  // namespace liouville::cli
