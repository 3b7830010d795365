#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sparseglm {

struct L1 {
  double lambda;
};

/// lambda * (rho |x| + (1 - rho) x^2 / 2).
struct ElasticNet {
  double lambda;
  double rho;
};

/// Minimax concave penalty: lambda |x| - x^2 / (2 gamma) up to gamma * lambda,
/// constant gamma * lambda^2 / 2 beyond.
struct Mcp {
  double lambda;
  double gamma;
};

struct Scad {
  double lambda;
  double gamma;
};

/// lambda * sqrt(|x|).
struct LHalf {
  double lambda;
};

/// Indicator of [0, C].
struct BoxIndicator {
  double C;
};

using ScalarPenalty = std::variant<L1, ElasticNet, Mcp, Scad, LHalf, BoxIndicator>;

/// Throws std::invalid_argument when parameters violate the family's domain
/// (lambda >= 0, rho in [0, 1], MCP gamma > 1, SCAD gamma > 2, C > 0).
void validate(const ScalarPenalty& penalty);

std::string_view family_name(const ScalarPenalty& penalty);

/// A separable penalty sum_j g_j(beta_j) with identical g_j, or its row-wise
/// block version sum_j phi(||W_{j:}||) when `is_block()`.
class Penalty {
 public:
  explicit Penalty(ScalarPenalty kind);
  /// Row penalty phi(||.||); `inner` must be even (any family but the box).
  static Penalty block(ScalarPenalty inner);

  const ScalarPenalty& scalar() const { return kind_; }
  bool is_block() const { return block_; }
  std::string name() const;
  /// lambda of the family; 0 for the box indicator.
  double lambda() const;
  /// Same family and parameters with a different lambda.
  Penalty with_lambda(double lambda) const;
  bool is_convex() const;

  double value(double x) const;
  /// argmin_u (u - x)^2 / 2 + step * g(u). Global minimizer; ties go to the
  /// smaller |u|. Throws std::invalid_argument when step <= 0.
  double prox(double x, double step) const;
  /// False when the prox objective at this step may have several minimizers
  /// (MCP with step >= gamma, SCAD with step >= gamma - 1, l_0.5).
  bool prox_is_unique(double step) const;
  /// dist(neg_grad, dg(beta)) over the Frechet subdifferential. +inf when
  /// beta is outside the domain.
  double subdiff_distance(double beta, double neg_grad) const;
  /// |beta - prox_{g/L}(beta - grad / L)|.
  double fixed_point_score(double beta, double grad, double lipschitz) const;
  /// Membership in the generalized support (dg(beta) is a singleton).
  bool in_gsupp(double beta) const;
  /// g''(beta) for beta in the generalized support away from curvature kinks;
  /// throws std::domain_error otherwise.
  double second_derivative(double beta) const;

  // Row versions, used when coefficients are blocks of T > 1 values.
  double value_block(std::span<const double> x) const;
  void prox_block(std::span<const double> x, double step, std::span<double> out) const;
  double subdiff_distance_block(std::span<const double> beta, std::span<const double> neg_grad) const;
  double fixed_point_score_block(std::span<const double> beta, std::span<const double> grad,
                                 double lipschitz) const;
  bool in_gsupp_block(std::span<const double> beta) const;

 private:
  ScalarPenalty kind_;
  bool block_ = false;
};

/// prox of phi(||.||) at x: prox_phi(||x||) x / ||x||, and 0 at x = 0.
std::vector<double> block_prox(const ScalarPenalty& inner, std::span<const double> x, double step);

struct SemiconvexityGrid {
  double lo;
  double hi;
  int n_points = 4001;
};

struct SemiconvexityResult {
  double alpha;  // +inf when no finite alpha exists
  bool holds;    // alpha < 1 and the numerical convexity check passed
  std::string note;
};

/// Checks that g / L + alpha x^2 / 2 is convex via second differences on a
/// grid (>= -1e-10). alpha is analytic for MCP, searched for SCAD, 0 for the
/// convex families; l_0.5 is reported as not semi-convex.
SemiconvexityResult semiconvexity_check(const ScalarPenalty& penalty, double lipschitz,
                                        std::optional<SemiconvexityGrid> grid = std::nullopt);

}  // namespace sparseglm
