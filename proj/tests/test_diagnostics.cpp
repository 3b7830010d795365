#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sparseglm/datafit.hpp"
#include "sparseglm/diagnostics.hpp"
#include "sparseglm/solver.hpp"

using namespace sparseglm;
using namespace sparseglm::diagnostics;
using doctest::Approx;

namespace {

SyntheticProblem problem(std::uint64_t seed, int n, int p, int nnz) {
  SyntheticSpec spec;
  spec.n_samples = n;
  spec.n_features = p;
  spec.n_nonzero = nnz;
  spec.seed = seed;
  return generate_correlated_gaussian(spec);
}

FitResult solve(const Datafit& df, const Penalty& pen, double tol = 1e-12) {
  SolverConfig cfg;
  cfg.tol = tol;
  cfg.max_inner = 100000;
  return fit(df, pen, cfg);
}

}  // namespace

TEST_CASE("duality gap on the 1-D Lasso") {
  const Dataset d(DesignMatrix::dense(1, 1, {1.0}), Target{{1.0}, 1});
  const auto cert = duality_gap(d, Penalty(L1{0.3}), std::vector<double>{0.7});
  CHECK(std::abs(cert.gap) <= 1e-12);
  const auto zero = duality_gap(d, Penalty(L1{0.3}), std::vector<double>{0.0});
  CHECK(zero.gap >= 0.0);
  CHECK(zero.normalized_gap == 1.0);
}

TEST_CASE("duality gap bounds the suboptimality") {
  const auto prob = problem(1, 60, 100, 10);
  const auto D = oracle::to_dense(prob.data.X);
  const auto& y = prob.data.y.values;
  std::mt19937_64 rng(2);
  for (double rho : {1.0, 0.5}) {
    const double lam = lambda_max(prob.data) / 10;
    const Penalty pen = rho == 1.0 ? Penalty(L1{lam}) : Penalty(ElasticNet{lam, rho});
    const auto ref = oracle::enet_cd_reference(D, y, lam, rho);
    const double f_ref = oracle::enet_objective(D, y, ref, lam, rho);
    CHECK(duality_gap(prob.data, pen, ref).gap <= 1e-10);
    for (int k = 0; k < 50; ++k) {
      auto b = ref;
      for (double& v : b) v += std::normal_distribution<double>(0.0, 0.05)(rng);
      const auto cert = duality_gap(prob.data, pen, b);
      const double sub = oracle::enet_objective(D, y, b, lam, rho) - f_ref;
      CHECK(cert.gap >= -1e-12);
      CHECK(sub >= -1e-12);
      CHECK(sub <= cert.gap + 1e-12);
      CHECK(cert.primal == Approx(oracle::enet_objective(D, y, b, lam, rho)).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(duality_gap(prob.data, Penalty(Mcp{0.1, 3.0}), std::vector<double>(100, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("identification epoch") {
  using H = std::vector<std::vector<int>>;
  CHECK(identification_epoch(H{{1, 2}, {1, 2}, {1, 2}}) == 0);
  H flips(12, std::vector<int>{3});
  for (int k = 0; k < 7; ++k) flips[k] = k % 2 ? std::vector<int>{1} : std::vector<int>{2};
  CHECK(identification_epoch(flips) == 7);
  CHECK_FALSE(identification_epoch(H{}).has_value());
  CHECK_FALSE(identification_epoch(H{{1}, {1}, {2}}).has_value());
}

TEST_CASE("Jacobian on an orthogonal design is zero") {
  // X^T X / n = I: one CD sweep solves the quadratic exactly.
  const int n = 4;
  const Dataset d(DesignMatrix::dense(n, 2, {2, 0, 0, 0, 0, 2, 0, 0}), Target{{3, 2, 1, 0}, 1});
  const auto df = Datafit::quadratic(d);
  const Penalty pen(L1{0.1});
  const auto res = solve(df, pen);
  for (auto sweep : {Sweep::forward, Sweep::symmetric}) {
    const auto rep = cd_jacobian_spectral_radius(df, pen, res.beta, sweep);
    CHECK(rep.support.size() == 2);
    CHECK(rep.rho <= 1e-12);
    CHECK(rep.T.cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("both Jacobian constructions agree") {
  std::mt19937_64 rng(3);
  for (int inst = 0; inst < 10; ++inst) {
    const auto prob = problem(100 + inst, 30, 10, 4);
    const auto df = Datafit::quadratic(prob.data);
    for (const Penalty& pen : {Penalty(L1{lambda_max(prob.data) / 10}),
                               Penalty(ElasticNet{lambda_max(prob.data) / 10, 0.5})}) {
      const auto res = solve(df, pen);
      for (auto sweep : {Sweep::forward, Sweep::symmetric}) {
        const auto rep = cd_jacobian_spectral_radius(df, pen, res.beta, sweep);
        const auto direct = cd_jacobian_direct(df, pen, res.beta, sweep);
        CHECK((rep.T - direct).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK(rep.rho < 1.0);
        if (sweep == Sweep::symmetric) {
          Eigen::EigenSolver<Eigen::MatrixXd> es(rep.T);
          for (const auto& ev : es.eigenvalues()) {
            CHECK(std::abs(ev.imag()) <= 1e-10);
            CHECK(ev.real() >= -1e-10);
          }
        }
      }
    }
  }
}

TEST_CASE("Jacobian preconditions") {
  const auto prob = problem(4, 30, 10, 4);
  const auto df = Datafit::quadratic(prob.data);
  std::vector<double> kink(10, 0.0);
  kink[0] = 3.0 * 0.2;  // MCP with gamma * lambda = 0.6: curvature kink
  CHECK_THROWS_AS(cd_jacobian_spectral_radius(df, Penalty(Mcp{0.2, 3.0}), kink), std::domain_error);
  Dataset bin = prob.data;
  for (double& v : bin.y.values) v = v >= 0 ? 1 : -1;
  const auto logi = Datafit::logistic(bin);
  CHECK_THROWS_AS(cd_jacobian_spectral_radius(logi, Penalty(L1{0.1}), std::vector<double>(10, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("Anderson rate bound") {
  CHECK(anderson_rate_bound_kappa(4.0, 0.0, 2) == 0.0);
  const double zeta = 1.0 / 3.0;
  CHECK(anderson_rate_bound_kappa(1.0, 0.75, 5) ==
        Approx(std::pow(2 * std::pow(zeta, 4) / (1 + std::pow(zeta, 8)), 0.2)));
  double prev = 1e300;
  for (int M = 2; M <= 10; ++M) {
    const double b = anderson_rate_bound_kappa(3.0, 0.9, M);
    CHECK(b <= prev + 1e-15);
    prev = b;
  }
  CHECK_THROWS_AS(anderson_rate_bound_kappa(1.0, 1.0, 3), std::invalid_argument);
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(3, 3);
  H(0, 0) = 4.0;
  CHECK(anderson_rate_bound(H, 0.75, 5) == Approx(anderson_rate_bound_kappa(4.0, 0.75, 5)));
}

TEST_CASE("measured contraction is bounded by the spectral radius") {
  for (int inst = 0; inst < 5; ++inst) {
    const auto prob = problem(200 + inst, 30, 10, 4);
    const auto df = Datafit::quadratic(prob.data);
    const Penalty pen(L1{lambda_max(prob.data) / 10});
    const auto res = solve(df, pen, 1e-14);
    const auto rep = cd_jacobian_spectral_radius(df, pen, res.beta);
    const std::vector<double> start(10, 0.0);
    const double plain = measured_contraction(df, pen, res.beta, start, 400, false, Sweep::forward, 10, 1e-9);
    CHECK(plain <= rep.rho + 0.05);
    const double accel = measured_contraction(df, pen, res.beta, start, 400, true, Sweep::forward, 10, 1e-9);
    CHECK(accel <= plain + 1e-12);
  }
}
