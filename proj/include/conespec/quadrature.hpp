#pragma once

#include "conespec/domain.hpp"

#include <array>
#include <vector>

namespace conespec {

struct QuadratureSpec {
  enum class Rule { composite_simpson, gauss_legendre };

  Rule rule = Rule::gauss_legendre;
  /// Target node count along each axis of the integration region; split
  /// across panels in proportion to their length.
  int nodes_per_axis = 4096;
  /// Nodes where the mixture density is below this fraction of its maximum
  /// are dropped; the mass they carry is reported.
  double truncation_threshold = 1e-14;

  void validate() const;
  QuadratureSpec refined() const;
};

struct QuadratureNodes {
  std::vector<Point> points;
  std::vector<double> weights;
  std::size_t size() const { return points.size(); }
};

/// Breakpoints per intrinsic axis where integrands may have kinks.
using Breakpoints = std::array<std::vector<double>, 2>;

/// Nodes and weights of a 1-D composite rule on [a, b] with about `count` nodes.
void rule_1d(double a, double b, int count, QuadratureSpec::Rule rule, std::vector<double>& nodes,
             std::vector<double>& weights);

/// Tensor/composite nodes over `region` intersected with the domain. Panels
/// are split at breakpoints so that piecewise-smooth integrands converge at
/// the rule's full order.
QuadratureNodes build_nodes(const Domain& domain, const Box& region, const Breakpoints& breakpoints,
                            const QuadratureSpec& spec);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace conespec
