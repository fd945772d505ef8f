#pragma once

#include "conespec/continuum.hpp"
#include "conespec/mixture.hpp"
#include "conespec/quadrature.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace conespec {

inline constexpr int kReportSchemaVersion = 1;

/// 4 (sqrt(Theta (1 - N S) / C) - sqrt(N S) / (1 - S))^-1 + sqrt(S).
BoundValue tau(double S, double C, double theta, int n_clusters);

struct DeltaStar {
  double value = 0.0;      // w_max cos^2 N^2 S / (w_min sin^2)
  double threshold = 0.0;  // w_min sin^2 / (w_max cos^2 N^2)
  bool gate = false;       // S < threshold
};

DeltaStar delta_star(double S, double sigma, const std::vector<double>& weights, int n_clusters);

struct Feasibility {
  bool feasible = false;
  std::string failure;  // named condition when infeasible
  double s = 0.0;
  double t = 0.0;
  double rhs = 0.0;  // right-hand side of the (s, t) condition
  // Cone parameters (sigma + s, delta* + t^2, (1 - sin s) / sqrt(w_max)).
  double cone_sigma = 0.0;
  double cone_delta = 0.0;
  double cone_r = 0.0;
};

/// s = (pi/4 - sigma)/2 and the smallest t it admits. With refine the search
/// runs over s in (0, pi/4 - sigma) instead; t decreases in s, so this only
/// pushes s toward the boundary, stopped 1e-3 (pi/4 - sigma) short of it.
Feasibility feasibility(const BoundValue& tau_value, double S, int n_clusters, double sigma, double w_max,
                        double delta_star_value, bool refine = false);

/// Up to the constant c_M.
BoundValue phi(double S, double C, double theta, int n_clusters, double epsilon, double n, int m,
               double c_m = 1.0);

struct GraphParameters {
  double epsilon = 0.0;
  double n = 0.0;
  int m = 1;
};

struct ReportOptions {
  QuadratureSpec quadrature;
  int resolution = 256;
  std::vector<double> sigma_grid;  // empty: k pi/64 for k = 1..15
  std::optional<GraphParameters> graph;
  double c_m = 1.0;
  bool refine_s = false;
};

struct SigmaRow {
  double sigma = 0.0;
  DeltaStar delta_star;
  Feasibility continuum;
  // Sample-level condition, present with graph parameters.
  std::optional<Feasibility> discrete;
};

struct SeparationReport {
  enum class Verdict { well_separated, not_separated, indeterminate };

  int n_clusters = 0;
  std::vector<double> weights;
  BoundValue S, C, theta;
  std::vector<double> C_per_component;
  std::vector<double> theta_per_component;
  int resolution = 0;

  BoundValue tau;
  bool tau_exceeds_sqrt_s = false;  // tau - sqrt(S) > 0
  bool tau_n_below_one = false;     // tau N < 1
  std::vector<SigmaRow> rows;

  BoundValue lambda_n_upper, lambda_n1_lower;
  BoundValue lambda_n, lambda_n1;  // computed on the grid

  std::optional<GraphParameters> graph;
  double c_m = 1.0;
  BoundValue phi;
  bool s_below_inverse_n2 = false;  // S < N^-2
  BoundValue assumption_lhs;        // eps (1 + sqrt(lambda_N)) + log(n)^p / (n^(1/m) eps)
  BoundValue assumption_rhs;        // (lambda_{N+1} - lambda_N) / 2
  bool assumption_holds = false;

  Verdict verdict = Verdict::indeterminate;
  std::string violated;  // empty when well separated
  std::vector<std::string> notes;
};

const char* verdict_name(SeparationReport::Verdict v);

/// Parameters, spectra and every certificate quantity of the model. Failures
/// of sub-computations become unavailable fields.
SeparationReport assemble_report(const MixtureModel& model, const ReportOptions& options);

/// Verdict from the computed fields alone (used by assemble_report).
void decide_verdict(SeparationReport& report);

nlohmann::json to_json(const SeparationReport& report);
std::string render_text(const SeparationReport& report);

}  // namespace conespec
