#include "sparseglm/penalty.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sparseglm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double sign(double x) { return (x > 0.0) - (x < 0.0); }

double soft_threshold(double x, double tau) {
  const double a = std::abs(x) - tau;
  return a > 0.0 ? std::copysign(a, x) : 0.0;
}

double norm2(std::span<const double> v) {
  double acc = 0.0;
  for (double e : v) acc += e * e;
  return std::sqrt(acc);
}

// ---- values --------------------------------------------------------------

double value_of(const L1& p, double x) { return p.lambda * std::abs(x); }
double value_of(const ElasticNet& p, double x) {
  return p.lambda * (p.rho * std::abs(x) + 0.5 * (1.0 - p.rho) * x * x);
}
double value_of(const Mcp& p, double x) {
  const double a = std::abs(x);
  if (a <= p.gamma * p.lambda) return p.lambda * a - x * x / (2.0 * p.gamma);
  return 0.5 * p.gamma * p.lambda * p.lambda;
}
double value_of(const Scad& p, double x) {
  const double a = std::abs(x), l = p.lambda, g = p.gamma;
  if (a <= l) return l * a;
  if (a <= g * l) return (2.0 * g * l * a - a * a - l * l) / (2.0 * (g - 1.0));
  return 0.5 * l * l * (g + 1.0);
}
double value_of(const LHalf& p, double x) { return p.lambda * std::sqrt(std::abs(x)); }
double value_of(const BoxIndicator& p, double x) { return (x >= 0.0 && x <= p.C) ? 0.0 : kInf; }

// ---- prox ----------------------------------------------------------------

// Among candidates, the one with the smallest prox objective; candidates
// must be listed by increasing |u| so ties resolve toward sparsity.
template <class P, std::size_t N>
double best_candidate(const P& p, double x, double step, const std::array<double, N>& cands) {
  double best_u = cands[0];
  double best = 0.5 * (best_u - x) * (best_u - x) + step * value_of(p, best_u);
  for (std::size_t k = 1; k < N; ++k) {
    const double u = cands[k];
    const double obj = 0.5 * (u - x) * (u - x) + step * value_of(p, u);
    if (obj < best) {
      best = obj;
      best_u = u;
    }
  }
  return best_u;
}

double prox_of(const L1& p, double x, double step) { return soft_threshold(x, step * p.lambda); }

double prox_of(const ElasticNet& p, double x, double step) {
  return soft_threshold(x, step * p.lambda * p.rho) / (1.0 + step * p.lambda * (1.0 - p.rho));
}

double prox_of(const Mcp& p, double x, double step) {
  const double a = std::abs(x), gl = p.gamma * p.lambda;
  if (step < p.gamma) {
    if (a <= step * p.lambda) return 0.0;
    if (a <= gl) return std::copysign((a - step * p.lambda) / (1.0 - step / p.gamma), x);
    return x;
  }
  // Concave on [0, gamma * lambda]: the minimum sits at an endpoint or at x.
  const double s = sign(x);
  return best_candidate(p, x, step, std::array{0.0, s * gl, a > gl ? x : s * gl});
}

double prox_of(const Scad& p, double x, double step) {
  const double a = std::abs(x), l = p.lambda, g = p.gamma;
  if (step < g - 1.0) {
    if (a <= l * (1.0 + step)) return soft_threshold(x, step * l);
    if (a <= g * l) return ((g - 1.0) * x - sign(x) * step * g * l) / (g - 1.0 - step);
    return x;
  }
  const double s = sign(x);
  const double first = std::clamp(soft_threshold(x, step * l), -l, l);
  return best_candidate(p, x, step, std::array{0.0, first, s * l, s * g * l, a > g * l ? x : s * g * l});
}

double prox_of(const LHalf& p, double x, double step) {
  const double a = std::abs(x), sl = step * p.lambda;
  if (a <= 1.5 * std::cbrt(sl * sl)) return 0.0;
  // Nonzero branch: t = sqrt(|u|) is the largest root of t^3 - |x| t + sl / 2.
  const double arg = -(0.75 * sl / a) * std::sqrt(3.0 / a);
  const double t = 2.0 * std::sqrt(a / 3.0) * std::cos(std::acos(std::clamp(arg, -1.0, 1.0)) / 3.0);
  return std::copysign(t * t, x);
}

double prox_of(const BoxIndicator& p, double x, double) { return std::clamp(x, 0.0, p.C); }

bool unique_of(const Mcp& p, double step) { return step < p.gamma; }
bool unique_of(const Scad& p, double step) { return step < p.gamma - 1.0; }
bool unique_of(const LHalf&, double) { return false; }
template <class P>
bool unique_of(const P&, double) {
  return true;
}

// ---- derivatives ---------------------------------------------------------

// phi'(r) for r > 0, with phi the even penalty restricted to [0, inf).
double slope_of(const L1& p, double) { return p.lambda; }
double slope_of(const ElasticNet& p, double r) { return p.lambda * (p.rho + (1.0 - p.rho) * r); }
double slope_of(const Mcp& p, double r) { return r < p.gamma * p.lambda ? p.lambda - r / p.gamma : 0.0; }
double slope_of(const Scad& p, double r) {
  if (r <= p.lambda) return p.lambda;
  if (r <= p.gamma * p.lambda) return (p.gamma * p.lambda - r) / (p.gamma - 1.0);
  return 0.0;
}
double slope_of(const LHalf& p, double r) { return 0.5 * p.lambda / std::sqrt(r); }

// Half-width of dg(0) = [-w, w].
double kink_width(const L1& p) { return p.lambda; }
double kink_width(const ElasticNet& p) { return p.lambda * p.rho; }
double kink_width(const Mcp& p) { return p.lambda; }
double kink_width(const Scad& p) { return p.lambda; }
double kink_width(const LHalf& p) { return p.lambda > 0.0 ? kInf : 0.0; }

double curvature_of(const L1&, double) { return 0.0; }
double curvature_of(const ElasticNet& p, double) { return p.lambda * (1.0 - p.rho); }
double curvature_of(const Mcp& p, double x) {
  const double a = std::abs(x), gl = p.gamma * p.lambda;
  if (a == gl) throw std::domain_error("MCP is not twice differentiable at |x| = gamma * lambda");
  return a < gl ? -1.0 / p.gamma : 0.0;
}
double curvature_of(const Scad& p, double x) {
  const double a = std::abs(x), l = p.lambda, gl = p.gamma * p.lambda;
  if (a == l || a == gl) throw std::domain_error("SCAD is not twice differentiable at this point");
  return (a > l && a < gl) ? -1.0 / (p.gamma - 1.0) : 0.0;
}
double curvature_of(const LHalf& p, double x) {
  const double a = std::abs(x);
  return -0.25 * p.lambda / (a * std::sqrt(a));
}
double curvature_of(const BoxIndicator&, double) { return 0.0; }

double lambda_of(const BoxIndicator&) { return 0.0; }
template <class P>
double lambda_of(const P& p) {
  return p.lambda;
}

}  // namespace

void validate(const ScalarPenalty& penalty) {
  std::visit(Overloaded{
                 [](const L1& p) {
                   if (!(p.lambda >= 0.0)) throw std::invalid_argument("L1: lambda must be >= 0");
                 },
                 [](const ElasticNet& p) {
                   if (!(p.lambda >= 0.0)) throw std::invalid_argument("elastic net: lambda must be >= 0");
                   if (!(p.rho >= 0.0 && p.rho <= 1.0))
                     throw std::invalid_argument("elastic net: rho must be in [0, 1]");
                 },
                 [](const Mcp& p) {
                   if (!(p.lambda >= 0.0)) throw std::invalid_argument("MCP: lambda must be >= 0");
                   if (!(p.gamma > 1.0)) throw std::invalid_argument("MCP: gamma must be > 1");
                 },
                 [](const Scad& p) {
                   if (!(p.lambda >= 0.0)) throw std::invalid_argument("SCAD: lambda must be >= 0");
                   if (!(p.gamma > 2.0)) throw std::invalid_argument("SCAD: gamma must be > 2");
                 },
                 [](const LHalf& p) {
                   if (!(p.lambda >= 0.0)) throw std::invalid_argument("l0.5: lambda must be >= 0");
                 },
                 [](const BoxIndicator& p) {
                   if (!(p.C > 0.0) || !std::isfinite(p.C)) throw std::invalid_argument("box: C must be > 0");
                 },
             },
             penalty);
}

std::string_view family_name(const ScalarPenalty& penalty) {
  return std::visit(Overloaded{
                        [](const L1&) { return "l1"; },
                        [](const ElasticNet&) { return "enet"; },
                        [](const Mcp&) { return "mcp"; },
                        [](const Scad&) { return "scad"; },
                        [](const LHalf&) { return "lhalf"; },
                        [](const BoxIndicator&) { return "box"; },
                    },
                    penalty);
}

Penalty::Penalty(ScalarPenalty kind) : kind_(kind) { validate(kind_); }

Penalty Penalty::block(ScalarPenalty inner) {
  if (std::holds_alternative<BoxIndicator>(inner))
    throw std::invalid_argument("block penalties need an even inner penalty; box is not even");
  Penalty p(inner);
  p.block_ = true;
  return p;
}

std::string Penalty::name() const {
  std::string base(family_name(kind_));
  return block_ ? "block_" + base : base;
}

double Penalty::lambda() const {
  return std::visit([](const auto& p) { return lambda_of(p); }, kind_);
}

Penalty Penalty::with_lambda(double lambda) const {
  ScalarPenalty k = kind_;
  std::visit(Overloaded{[](BoxIndicator&) {}, [&](auto& p) { p.lambda = lambda; }}, k);
  Penalty out(k);
  out.block_ = block_;
  return out;
}

bool Penalty::is_convex() const {
  return std::holds_alternative<L1>(kind_) || std::holds_alternative<ElasticNet>(kind_) ||
         std::holds_alternative<BoxIndicator>(kind_);
}

double Penalty::value(double x) const {
  return std::visit([x](const auto& p) { return value_of(p, x); }, kind_);
}

double Penalty::prox(double x, double step) const {
  if (!(step > 0.0)) throw std::invalid_argument("prox step must be > 0");
  return std::visit([=](const auto& p) { return prox_of(p, x, step); }, kind_);
}

bool Penalty::prox_is_unique(double step) const {
  return std::visit([=](const auto& p) { return unique_of(p, step); }, kind_);
}

double Penalty::subdiff_distance(double beta, double neg_grad) const {
  if (const auto* box = std::get_if<BoxIndicator>(&kind_)) {
    if (beta < 0.0 || beta > box->C) return kInf;
    if (beta == 0.0) return std::max(0.0, neg_grad);   // dg(0) = (-inf, 0]
    if (beta == box->C) return std::max(0.0, -neg_grad);  // dg(C) = [0, inf)
    return std::abs(neg_grad);
  }
  return std::visit(Overloaded{[](const BoxIndicator&) { return 0.0; },
                               [=](const auto& p) {
                                 if (beta == 0.0) return std::max(0.0, std::abs(neg_grad) - kink_width(p));
                                 return std::abs(neg_grad - sign(beta) * slope_of(p, std::abs(beta)));
                               }},
                    kind_);
}

double Penalty::fixed_point_score(double beta, double grad, double lipschitz) const {
  if (!(lipschitz > 0.0)) throw std::invalid_argument("fixed-point score needs a positive Lipschitz constant");
  return std::abs(beta - prox(beta - grad / lipschitz, 1.0 / lipschitz));
}

bool Penalty::in_gsupp(double beta) const {
  if (const auto* box = std::get_if<BoxIndicator>(&kind_)) return beta > 0.0 && beta < box->C;
  return beta != 0.0;
}

double Penalty::second_derivative(double beta) const {
  if (!in_gsupp(beta)) throw std::domain_error("second derivative requested outside the generalized support");
  return std::visit([beta](const auto& p) { return curvature_of(p, beta); }, kind_);
}

double Penalty::value_block(std::span<const double> x) const { return value(norm2(x)); }

void Penalty::prox_block(std::span<const double> x, double step, std::span<double> out) const {
  if (!(step > 0.0)) throw std::invalid_argument("prox step must be > 0");
  const double nrm = norm2(x);
  if (nrm == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double scale = prox(nrm, step) / nrm;
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = scale * x[k];
}

double Penalty::subdiff_distance_block(std::span<const double> beta,
                                       std::span<const double> neg_grad) const {
  const double nb = norm2(beta);
  return std::visit(Overloaded{[](const BoxIndicator&) -> double {
                                 throw std::logic_error("box indicator has no block form");
                               },
                               [&](const auto& p) {
                                 if (nb == 0.0) return std::max(0.0, norm2(neg_grad) - kink_width(p));
                                 const double s = slope_of(p, nb) / nb;
                                 double acc = 0.0;
                                 for (std::size_t k = 0; k < beta.size(); ++k) {
                                   const double d = neg_grad[k] - s * beta[k];
                                   acc += d * d;
                                 }
                                 return std::sqrt(acc);
                               }},
                    kind_);
}

double Penalty::fixed_point_score_block(std::span<const double> beta, std::span<const double> grad,
                                        double lipschitz) const {
  if (!(lipschitz > 0.0)) throw std::invalid_argument("fixed-point score needs a positive Lipschitz constant");
  std::vector<double> z(beta.size()), out(beta.size());
  for (std::size_t k = 0; k < beta.size(); ++k) z[k] = beta[k] - grad[k] / lipschitz;
  prox_block(z, 1.0 / lipschitz, out);
  double acc = 0.0;
  for (std::size_t k = 0; k < beta.size(); ++k) acc += (beta[k] - out[k]) * (beta[k] - out[k]);
  return std::sqrt(acc);
}

bool Penalty::in_gsupp_block(std::span<const double> beta) const { return norm2(beta) != 0.0; }

std::vector<double> block_prox(const ScalarPenalty& inner, std::span<const double> x, double step) {
  std::vector<double> out(x.size());
  Penalty::block(inner).prox_block(x, step, out);
  return out;
}

SemiconvexityResult semiconvexity_check(const ScalarPenalty& penalty, double lipschitz,
                                        std::optional<SemiconvexityGrid> grid) {
  validate(penalty);
  if (!(lipschitz > 0.0)) throw std::invalid_argument("semiconvexity check needs L > 0");
  if (std::holds_alternative<LHalf>(penalty))
    return {kInf, false, "not alpha-semi-convex: curvature is unbounded below near 0"};

  const Penalty pen(penalty);
  SemiconvexityGrid g;
  if (grid) {
    g = *grid;
  } else if (const auto* box = std::get_if<BoxIndicator>(&penalty)) {
    g = {0.0, box->C};
  } else {
    const double scale = std::visit(Overloaded{[](const Mcp& p) { return p.gamma * p.lambda; },
                                               [](const Scad& p) { return p.gamma * p.lambda; },
                                               [](const auto& p) { return lambda_of(p); }},
                                    penalty);
    g = {-2.0 * scale - 1.0, 2.0 * scale + 1.0};
  }
  if (g.n_points < 3 || !(g.hi > g.lo)) throw std::invalid_argument("semiconvexity grid is degenerate");

  const double h = (g.hi - g.lo) / (g.n_points - 1);
  auto convex_with = [&](double alpha) {
    auto f = [&](double x) { return pen.value(x) / lipschitz + 0.5 * alpha * x * x; };
    for (int k = 1; k + 1 < g.n_points; ++k) {
      const double x = g.lo + k * h;
      if (f(x - h) - 2.0 * f(x) + f(x + h) < -1e-10) return false;
    }
    return true;
  };

  if (const auto* mcp = std::get_if<Mcp>(&penalty)) {
    const double gl = mcp->gamma * lipschitz;
    const double alpha = 0.5 * (1.0 + 1.0 / gl);
    if (!(gl > 1.0))
      return {alpha, false, "precondition gamma > 1/L violated"};
    const bool ok = convex_with(alpha);
    return {alpha, ok && alpha < 1.0, ok ? "analytic alpha verified on grid" : "grid check failed"};
  }
  if (std::holds_alternative<Scad>(penalty)) {
    double lo = 0.0, hi = 1.0;
    while (!convex_with(hi)) {
      hi *= 2.0;
      if (hi > 1e8) return {kInf, false, "no finite alpha found on grid"};
    }
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (convex_with(mid) ? hi : lo) = mid;
    }
    return {hi, hi < 1.0, "alpha estimated by bisection on grid"};
  }
  const bool ok = convex_with(0.0);
  return {0.0, ok, ok ? "convex" : "grid check failed"};
}

}  // namespace sparseglm
