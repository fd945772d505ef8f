#include "conespec/report.hpp"

#include "conespec/error.hpp"
#include "conespec/graph.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

namespace conespec {

namespace {

constexpr double kQuarterPi = std::numbers::pi / 4;

BoundValue available(double v) { return {v, {}}; }
BoundValue unavailable(std::string reason) { return {std::nullopt, std::move(reason)}; }

std::string describe(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return std::string(to_string(err->kind())) + ": " + e.what();
  return e.what();
}

void check_counts(int n_clusters) {
  if (n_clusters < 2) throw Error(ErrorKind::invalid_argument, "need at least two components");
}

Feasibility infeasible(std::string why) {
  Feasibility f;
  f.failure = std::move(why);
  return f;
}

// Smallest t with t sin(s) / sqrt(N w_max) >= rhs_root.
Feasibility solve_t(double rhs_root, int n, double sigma, double w_max, double delta_star_value, bool refine) {
  const double span = kQuarterPi - sigma;
  double s = span / 2;
  if (refine) {
    const double top = span * (1 - 1e-3);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 256; ++i) {
      const double trial = top * i / 256;
      const double t = std::sqrt(n * w_max) * rhs_root / std::sin(trial);
      if (t < best) best = t, s = trial;
    }
  }
  Feasibility f;
  f.s = s;
  f.t = std::sqrt(n * w_max) * rhs_root / std::sin(s);
  f.cone_sigma = sigma + s;
  f.cone_delta = delta_star_value + f.t * f.t;
  f.cone_r = (1 - std::sin(s)) / std::sqrt(w_max);
  if (f.t * f.t >= 1 - delta_star_value) {
    f.failure = "t^2 >= 1 - delta*";
    return f;
  }
  f.feasible = true;
  return f;
}

// N ((tau - sqrt S)/2)^2 + 4 N^(3/2) (1/sqrt(1 - N tau) - 1), or a reason.
std::optional<double> cone_rhs(const BoundValue& tau_value, double S, int n, std::string& why) {
  if (!tau_value.value) {
    why = "tau unavailable: " + tau_value.reason;
    return std::nullopt;
  }
  const double t = *tau_value.value;
  const double root_s = std::sqrt(S);
  // tau equals sqrt(S) only in the limit C -> 0, where the bound still holds.
  if (!(t - root_s > 0) && !(t == root_s)) {
    why = "tau - sqrt(S) > 0 fails";
    return std::nullopt;
  }
  if (!(t * n < 1)) {
    why = "tau N < 1 fails";
    return std::nullopt;
  }
  const double half = (t - root_s) / 2;
  return n * half * half + 4 * std::pow(n, 1.5) * (1 / std::sqrt(1 - n * t) - 1);
}

std::string fmt(double v) {
  std::ostringstream o;
  o << std::setprecision(6) << v;
  return o.str();
}

std::string fmt(const BoundValue& b) { return b.value ? fmt(*b.value) : "unavailable (" + b.reason + ")"; }

nlohmann::json bound_json(const BoundValue& b) {
  nlohmann::json j;
  if (b.value) {
    j["value"] = *b.value;
  } else {
    j["value"] = nullptr;
    j["reason"] = b.reason;
  }
  return j;
}

nlohmann::json feasibility_json(const Feasibility& f) {
  nlohmann::json j{{"feasible", f.feasible}, {"s", f.s}, {"t", f.t}, {"rhs", f.rhs}};
  if (!f.failure.empty()) j["failure"] = f.failure;
  if (f.feasible || f.failure == "t^2 >= 1 - delta*")
    j["cone"] = {{"sigma", f.cone_sigma}, {"delta", f.cone_delta}, {"r", f.cone_r}};
  return j;
}

}  // namespace

BoundValue tau(double S, double C, double theta, int n_clusters) {
  check_counts(n_clusters);
  if (!(S >= 0 && C >= 0 && theta >= 0)) throw Error(ErrorKind::invalid_argument, "S, C and Theta must be non-negative");
  const double n = n_clusters;
  if (!(n * S < 1)) return unavailable("N S >= 1");
  if (C == 0) return available(std::sqrt(S));
  const double bracket = std::sqrt(theta * (1 - n * S) / C) - std::sqrt(n * S) / (1 - S);
  if (!(bracket > 0)) return unavailable("sqrt(Theta (1 - N S) / C) <= sqrt(N S) / (1 - S)");
  return available(4 / bracket + std::sqrt(S));
}

DeltaStar delta_star(double S, double sigma, const std::vector<double>& weights, int n_clusters) {
  check_counts(n_clusters);
  if (!(sigma > 0 && sigma < kQuarterPi)) throw Error(ErrorKind::invalid_argument, "sigma must lie in (0, pi/4)");
  if (weights.empty()) throw Error(ErrorKind::invalid_argument, "no weights");
  const double w_max = *std::max_element(weights.begin(), weights.end());
  const double w_min = *std::min_element(weights.begin(), weights.end());
  const double c2 = std::cos(sigma) * std::cos(sigma);
  const double s2 = 1 - c2;
  const double n2 = static_cast<double>(n_clusters) * n_clusters;
  DeltaStar d;
  d.value = w_max * c2 * n2 * S / (w_min * s2);
  d.threshold = w_min * s2 / (w_max * c2 * n2);
  d.gate = S < d.threshold;
  return d;
}

Feasibility feasibility(const BoundValue& tau_value, double S, int n_clusters, double sigma, double w_max,
                        double delta_star_value, bool refine) {
  check_counts(n_clusters);
  if (!(sigma > 0 && sigma < kQuarterPi)) throw Error(ErrorKind::invalid_argument, "sigma must lie in (0, pi/4)");
  std::string why;
  const auto rhs = cone_rhs(tau_value, S, n_clusters, why);
  if (!rhs) return infeasible(why);
  auto f = solve_t(std::sqrt(*rhs), n_clusters, sigma, w_max, delta_star_value, refine);
  f.rhs = *rhs;
  return f;
}

BoundValue phi(double S, double C, double theta, int n_clusters, double epsilon, double n, int m, double c_m) {
  check_counts(n_clusters);
  if (!(epsilon > 0)) throw Error(ErrorKind::invalid_argument, "epsilon must be positive");
  if (!(n > 1)) throw Error(ErrorKind::invalid_argument, "phi needs n > 1");
  if (!(c_m > 0)) throw Error(ErrorKind::invalid_argument, "c_M must be positive");
  const double k = n_clusters;
  if (!(1 - k * std::sqrt(S) > 0)) return unavailable("N sqrt(S) >= 1");
  if (!(k * S < 1)) return unavailable("N S >= 1");
  const double inner = std::sqrt(theta * (1 - k * S)) - std::sqrt(C * k * S) / (1 - S);
  if (!(inner > 0)) return unavailable("sqrt(Theta (1 - N S)) <= sqrt(C N S) / (1 - S)");
  const double upper = k * C / (1 - k * std::sqrt(S));
  const double denom = inner * inner - upper;
  if (!(denom > 0)) return unavailable("spectral gap bound is not positive");
  const double scale = epsilon + std::pow(std::log(n), epsilon_exponent(m)) / (epsilon * std::pow(n, 1.0 / m));
  return available(c_m * upper * scale / denom);
}

const char* verdict_name(SeparationReport::Verdict v) {
  switch (v) {
    case SeparationReport::Verdict::well_separated: return "well-separated";
    case SeparationReport::Verdict::not_separated: return "not";
    case SeparationReport::Verdict::indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

void decide_verdict(SeparationReport& r) {
  using V = SeparationReport::Verdict;
  r.violated.clear();
  for (const auto* b : {&r.S, &r.C, &r.theta}) {
    if (!b->value) {
      r.verdict = V::indeterminate;
      r.violated = "model parameters unavailable: " + b->reason;
      return;
    }
  }
  if (!r.tau.value) {
    r.verdict = V::not_separated;
    r.violated = "tau: " + r.tau.reason;
    return;
  }
  if (!r.tau_exceeds_sqrt_s) {
    r.verdict = V::not_separated;
    r.violated = "tau - sqrt(S) > 0";
    return;
  }
  if (!r.tau_n_below_one) {
    r.verdict = V::not_separated;
    r.violated = "tau N < 1";
    return;
  }
  bool any_gate = false;
  for (const auto& row : r.rows) {
    if (!row.delta_star.gate) continue;
    any_gate = true;
    if (row.continuum.feasible && row.continuum.cone_sigma < kQuarterPi) {
      r.verdict = V::well_separated;
      return;
    }
  }
  if (!any_gate) {
    r.verdict = V::not_separated;
    r.violated = "S < w_min sin^2(sigma) / (w_max cos^2(sigma) N^2) for every sigma";
    return;
  }
  r.verdict = V::indeterminate;
  r.violated = "(s, t) condition: t^2 >= 1 - delta* for every admissible sigma";
}

SeparationReport assemble_report(const MixtureModel& model, const ReportOptions& options) {
  options.quadrature.validate();
  SeparationReport r;
  r.n_clusters = static_cast<int>(model.size());
  r.weights = model.weights();
  r.resolution = options.resolution;
  r.graph = options.graph;
  r.c_m = options.c_m;
  const int n = r.n_clusters;
  const double w_max = model.w_max();

  try {
    r.S = available(overlap_parameter(model, options.quadrature).value);
  } catch (const std::exception& e) {
    r.S = unavailable(describe(e));
  }
  try {
    const auto c = coupling_parameter(model, options.quadrature);
    r.C = available(c.value);
    r.C_per_component = c.per_component;
  } catch (const std::exception& e) {
    r.C = unavailable(describe(e));
  }
  try {
    const auto t = indivisibility_parameter(model, options.resolution);
    r.theta = available(t.value);
    r.theta_per_component = t.per_component;
  } catch (const std::exception& e) {
    r.theta = unavailable(describe(e));
  }
  try {
    const auto spec = continuum_embedding_spectrum(model, n, options.resolution);
    r.lambda_n = available(spec.eigenvalues[n - 1]);
    r.lambda_n1 = available(spec.eigenvalues[n]);
  } catch (const std::exception& e) {
    r.lambda_n = r.lambda_n1 = unavailable(describe(e));
  }

  const bool have_params = r.S.value && r.C.value && r.theta.value;
  if (have_params) {
    const double S = *r.S.value, C = *r.C.value, theta = *r.theta.value;
    r.tau = tau(S, C, theta, n);
    if (r.tau.value) {
      r.tau_exceeds_sqrt_s = *r.tau.value - std::sqrt(S) > 0 || C == 0;
      r.tau_n_below_one = *r.tau.value * n < 1;
    }
    const auto bounds = eigenvalue_bounds(S, C, theta, n);
    r.lambda_n_upper = bounds.lambda_n_upper;
    r.lambda_n1_lower = bounds.lambda_n1_lower;
    r.s_below_inverse_n2 = S * n * n < 1;

    if (r.graph) {
      r.phi = phi(S, C, theta, n, r.graph->epsilon, r.graph->n, r.graph->m, r.c_m);
      if (r.lambda_n.value) {
        const double eps = r.graph->epsilon;
        const double lhs = eps * (1 + std::sqrt(std::max(0.0, *r.lambda_n.value))) +
                           std::pow(std::log(r.graph->n), epsilon_exponent(r.graph->m)) /
                               (std::pow(r.graph->n, 1.0 / r.graph->m) * eps);
        r.assumption_lhs = available(lhs);
        r.assumption_rhs = available((*r.lambda_n1.value - *r.lambda_n.value) / 2);
        r.assumption_holds = lhs <= *r.assumption_rhs.value;
      } else {
        r.assumption_lhs = r.assumption_rhs = unavailable(r.lambda_n.reason);
      }
    }

    std::vector<double> grid = options.sigma_grid;
    if (grid.empty())
      for (int k = 1; k <= 15; ++k) grid.push_back(std::numbers::pi * k / 64);
    for (double sigma : grid) {
      SigmaRow row;
      row.sigma = sigma;
      row.delta_star = delta_star(S, sigma, r.weights, n);
      row.continuum = feasibility(r.tau, S, n, sigma, w_max, row.delta_star.value, options.refine_s);
      if (r.graph) {
        std::string why;
        const auto rhs = cone_rhs(r.tau, S, n, why);
        if (!rhs) {
          row.discrete = infeasible(why);
        } else if (!r.s_below_inverse_n2) {
          row.discrete = infeasible("S < N^-2 fails");
        } else if (!r.phi.value) {
          row.discrete = infeasible("phi unavailable: " + r.phi.reason);
        } else {
          row.discrete = solve_t(std::sqrt(*rhs) + std::sqrt(n * *r.phi.value), n, sigma, w_max,
                                 row.delta_star.value, options.refine_s);
          row.discrete->rhs = *rhs;
        }
      }
      r.rows.push_back(row);
    }
  } else {
    r.tau = unavailable("model parameters unavailable");
  }

  r.notes.push_back("phi is computed up to the constant c_M");
  if (r.graph)
    r.notes.push_back("the sample-level statement holds with probability at least 1 - C_beta n^-beta, "
                      "C_beta and beta not computed");
  if (r.C.value && *r.C.value == 0)
    r.notes.push_back("C = 0: tau = sqrt(S) is taken as the limit C -> 0");
  decide_verdict(r);
  return r;
}

nlohmann::json to_json(const SeparationReport& r) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["N"] = r.n_clusters;
  j["weights"] = r.weights;
  j["S"] = bound_json(r.S);
  j["C"] = bound_json(r.C);
  j["C_per_component"] = r.C_per_component;
  j["Theta"] = bound_json(r.theta);
  j["Theta_per_component"] = r.theta_per_component;
  j["resolution"] = r.resolution;
  j["tau"] = bound_json(r.tau);
  j["flags"] = {{"tau_minus_sqrt_S_positive", r.tau_exceeds_sqrt_s},
                {"tau_N_below_one", r.tau_n_below_one},
                {"S_below_inverse_N_squared", r.s_below_inverse_n2}};
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json x{{"sigma", row.sigma},
                     {"delta_star", row.delta_star.value},
                     {"delta_star_threshold", row.delta_star.threshold},
                     {"delta_star_gate", row.delta_star.gate},
                     {"continuum", feasibility_json(row.continuum)}};
    if (row.discrete) x["discrete"] = feasibility_json(*row.discrete);
    rows.push_back(x);
  }
  j["sigma_table"] = rows;
  j["lambda"] = {{"N_upper_bound", bound_json(r.lambda_n_upper)},
                 {"N_plus_1_lower_bound", bound_json(r.lambda_n1_lower)},
                 {"N_computed", bound_json(r.lambda_n)},
                 {"N_plus_1_computed", bound_json(r.lambda_n1)}};
  if (r.graph) {
    j["graph"] = {{"epsilon", r.graph->epsilon},
                  {"n", r.graph->n},
                  {"m", r.graph->m},
                  {"c_M", r.c_m},
                  {"phi", bound_json(r.phi)},
                  {"assumption_lhs", bound_json(r.assumption_lhs)},
                  {"assumption_rhs", bound_json(r.assumption_rhs)},
                  {"assumption_holds", r.assumption_holds}};
  }
  j["verdict"] = verdict_name(r.verdict);
  if (!r.violated.empty()) j["violated"] = r.violated;
  j["notes"] = r.notes;
  return j;
}

std::string render_text(const SeparationReport& r) {
  std::ostringstream o;
  o << "verdict: " << verdict_name(r.verdict) << "\n";
  if (!r.violated.empty()) o << "violated: " << r.violated << "\n";
  o << "N = " << r.n_clusters << ", weights";
  for (double w : r.weights) o << " " << fmt(w);
  o << "\n";
  o << "S     = " << fmt(r.S) << "\n";
  o << "C     = " << fmt(r.C);
  if (!r.C_per_component.empty()) {
    o << "  (per component";
    for (double c : r.C_per_component) o << " " << fmt(c);
    o << ")";
  }
  o << "\n";
  o << "Theta = " << fmt(r.theta);
  if (!r.theta_per_component.empty()) {
    o << "  (per component";
    for (double t : r.theta_per_component) o << " " << fmt(t);
    o << ")";
  }
  o << "  [grid " << r.resolution << "]\n";
  o << "tau   = " << fmt(r.tau) << "  (tau - sqrt(S) > 0: " << (r.tau_exceeds_sqrt_s ? "yes" : "no")
    << ", tau N < 1: " << (r.tau_n_below_one ? "yes" : "no") << ")\n";
  o << "lambda_N     = " << fmt(r.lambda_n) << "  upper bound " << fmt(r.lambda_n_upper) << "\n";
  o << "lambda_{N+1} = " << fmt(r.lambda_n1) << "  lower bound " << fmt(r.lambda_n1_lower) << "\n";
  if (r.graph) {
    o << "graph: eps " << fmt(r.graph->epsilon) << ", n " << fmt(r.graph->n) << ", m " << r.graph->m << "\n";
    o << "phi   = " << fmt(r.phi) << "  (up to c_M = " << fmt(r.c_m) << ")\n";
    o << "assumption: " << fmt(r.assumption_lhs) << " <= " << fmt(r.assumption_rhs) << ": "
      << (r.assumption_holds ? "yes" : "no") << "\n";
  }
  if (!r.rows.empty()) {
    o << "\n  sigma      delta*     gate  s          t          cone (sigma, delta, r)\n";
    for (const auto& row : r.rows) {
      const auto& f = row.continuum;
      o << "  " << std::left << std::setw(10) << fmt(row.sigma) << " " << std::setw(10) << fmt(row.delta_star.value)
        << " " << std::setw(5) << (row.delta_star.gate ? "yes" : "no") << " ";
      if (f.feasible) {
        o << std::setw(10) << fmt(f.s) << " " << std::setw(10) << fmt(f.t) << " (" << fmt(f.cone_sigma) << ", "
          << fmt(f.cone_delta) << ", " << fmt(f.cone_r) << ")";
      } else {
        o << "infeasible: " << f.failure;
      }
      o << std::right << "\n";
    }
  }
  for (const auto& note : r.notes) o << "note: " << note << "\n";
  return o.str();
}

}  // namespace conespec
