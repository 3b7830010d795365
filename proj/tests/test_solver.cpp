#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "sparseglm/datafit.hpp"
#include "sparseglm/dataset.hpp"
#include "sparseglm/kernels.hpp"
#include "sparseglm/solver.hpp"

using namespace sparseglm;
using doctest::Approx;

namespace {

SyntheticProblem small_problem(std::uint64_t seed, int n = 200, int p = 400, int nnz = 40) {
  SyntheticSpec spec;
  spec.n_samples = n;
  spec.n_features = p;
  spec.n_nonzero = nnz;
  spec.seed = seed;
  return generate_correlated_gaussian(spec);
}

/// Cyclic proximal CD over all features, residual form, dense data.
std::vector<double> textbook_cd(const oracle::Dense& X, const std::vector<double>& y, const Penalty& pen,
                                int epochs) {
  const int n = X.n, p = X.p;
  std::vector<double> b(p, 0.0), r = y;
  for (int e = 0; e < epochs; ++e) {
    for (int j = 0; j < p; ++j) {
      double sq = 0, corr = 0;
      for (int i = 0; i < n; ++i) {
        sq += X(i, j) * X(i, j);
        corr += X(i, j) * r[i];
      }
      if (sq == 0) continue;
      const double L = sq / n, grad = -corr / n;
      const double next = pen.prox(b[j] - grad / L, 1.0 / L);
      const double d = next - b[j];
      for (int i = 0; i < n; ++i) r[i] -= d * X(i, j);
      b[j] = next;
    }
  }
  return b;
}

double fresh_violation(const Datafit& df, const Penalty& pen, const std::vector<double>& beta, ScoreKind kind) {
  const auto scores = kernels::scores_serial(df, pen, beta, df.init_cache(beta), kind);
  return *std::max_element(scores.begin(), scores.end());
}

}  // namespace

TEST_CASE("solver config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.tol = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.anderson_memory = 1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.initial_ws_size = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.max_total_epochs = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("one CD epoch solves the 1-D Lasso") {
  const Dataset d(DesignMatrix::dense(1, 1, {1.0}), Target{{1.0}, 1});
  const auto df = Datafit::quadratic(d);
  std::vector<double> beta{0.0};
  auto cache = df.init_cache(beta);
  CHECK(cd_epoch(df, Penalty(L1{0.3}), beta, cache, std::vector<int>{0}) == 1);
  CHECK(beta[0] == Approx(0.7).epsilon(1e-15));
  CHECK(cache[0] == beta[0]);
}

TEST_CASE("CD epoch is a no-op above lambda_max") {
  const auto prob = small_problem(1, 50, 80, 5);
  const auto df = Datafit::quadratic(prob.data);
  std::vector<double> beta(80, 0.0);
  auto cache = df.init_cache(beta);
  std::vector<int> all(80);
  std::iota(all.begin(), all.end(), 0);
  cd_epoch(df, Penalty(L1{lambda_max(prob.data) * 1.0001}), beta, cache, all);
  for (double v : beta) CHECK(v == 0.0);
}

TEST_CASE("CD epochs decrease convex objectives") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    const auto D = oracle::random_dense(6, 4, rng);
    const Dataset d(oracle::to_design(D), Target{oracle::random_vector(6, rng), 1});
    const auto df = Datafit::quadratic(d);
    const Penalty pen = trial % 2 ? Penalty(L1{0.2}) : Penalty(ElasticNet{0.2, 0.3});
    auto beta = oracle::random_vector(4, rng);
    auto cache = df.init_cache(beta);
    const double before = objective(df, pen, beta, cache);
    cd_epoch(df, pen, beta, cache, std::vector<int>{0, 1, 2, 3});
    CHECK(objective(df, pen, beta, cache) <= before + 1e-13);
  }
}

TEST_CASE("Anderson extrapolation") {
  SUBCASE("identical iterates fall back") {
    const std::vector<std::vector<double>> it(4, std::vector<double>{1.0, 2.0});
    CHECK_FALSE(anderson_extrapolate(it).has_value());
  }
  SUBCASE("affine iteration with more differences than dimensions is solved exactly") {
    // x <- T x + b with T = diag(0.5, 0.2), b = (1, 1); fixed point (2, 1.25).
    std::vector<std::vector<double>> it{{1.0, 1.0}};
    for (int k = 0; k < 3; ++k) {
      const auto& x = it.back();
      it.push_back({0.5 * x[0] + 1.0, 0.2 * x[1] + 1.0});
    }
    const auto e = anderson_extrapolate(it);
    REQUIRE(e.has_value());
    CHECK(std::abs((*e)[0] - 2.0) <= 1e-10);
    CHECK(std::abs((*e)[1] - 1.25) <= 1e-10);
  }
  SUBCASE("three iterates in 2-D do not determine the fixed point") {
    // Two affine maps sharing x0, x1, x2 but with different fixed points.
    const std::vector<std::vector<double>> it{{1.0, 1.0}, {1.5, 1.2}, {1.75, 1.24}};
    const auto e = anderson_extrapolate(it);
    REQUIRE(e.has_value());
    CHECK(std::abs((*e)[0] - 2.0) + std::abs((*e)[1] - 1.25) > 1e-3);
  }
  SUBCASE("1-D geometric iterates reach the fixed point") {
    const std::vector<std::vector<double>> it{{1.0}, {0.5}, {0.25}};
    const auto e = anderson_extrapolate(it);
    REQUIRE(e.has_value());
    CHECK(std::abs((*e)[0]) <= 1e-15);
  }
  SUBCASE("ill-conditioned full-rank differences fall back") {
    const std::vector<std::vector<double>> it{{0.0, 0.0}, {1.0, 0.0}, {2.0, 1e-9}};
    CHECK_FALSE(anderson_extrapolate(it).has_value());
  }
  SUBCASE("argument errors") {
    CHECK_THROWS_AS(anderson_extrapolate(std::vector<std::vector<double>>{{1.0}, {2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(anderson_extrapolate(std::vector<std::vector<double>>{{1.0}, {2.0, 3.0}, {1.0}}),
                    std::invalid_argument);
  }
}

TEST_CASE("working-set construction") {
  SUBCASE("ties go to the smaller index") {
    const std::vector<double> scores(20, 0.0);
    const auto u = build_working_set(scores, {}, 0, 10, 20);
    CHECK(u.ws_size == 10);
    CHECK(u.ws == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  }
  SUBCASE("size doubles the generalized support") {
    const std::vector<double> scores(30, 1.0);
    CHECK(build_working_set(scores, {}, 7, 10, 30).ws_size == 14);
    CHECK(build_working_set(scores, {}, 20, 10, 30).ws_size == 30);
  }
  SUBCASE("ineligible coordinates are never added") {
    std::vector<double> scores(5, kernels::kIneligibleScore);
    scores[3] = 0.0;
    CHECK(build_working_set(scores, {}, 0, 4, 5).ws == std::vector<int>{3});
  }
  SUBCASE("current working set is retained") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u;
    std::uniform_int_distribution<int> pick(0, 99);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> scores(100);
      for (double& s : scores) s = u(rng);
      std::set<int> cur;
      for (int k = 0; k < 15; ++k) cur.insert(pick(rng));
      const std::vector<int> current(cur.begin(), cur.end());
      const auto upd = build_working_set(scores, current, 5, 10, 100);
      CHECK(std::is_sorted(upd.ws.begin(), upd.ws.end()));
      for (int j : current) CHECK(std::binary_search(upd.ws.begin(), upd.ws.end(), j));
    }
  }
}

TEST_CASE("plain inner solve matches repeated CD epochs bitwise") {
  const auto prob = small_problem(4, 60, 90, 8);
  const auto df = Datafit::quadratic(prob.data);
  const Penalty pen(L1{lambda_max(prob.data) / 20});
  std::vector<int> ws(90);
  std::iota(ws.begin(), ws.end(), 0);
  std::vector<double> b1(90, 0.0), b2(90, 0.0);
  auto c1 = df.init_cache(b1), c2 = df.init_cache(b2);
  SolverConfig cfg;
  cfg.use_acceleration = false;
  const auto res = inner_solve(df, pen, b1, c1, ws, 17, 0.0, cfg);
  CHECK(res.epochs == 17);
  for (int e = 0; e < 17; ++e) cd_epoch(df, pen, b2, c2, ws);
  CHECK(b1 == b2);
  CHECK(c1 == c2);
}

TEST_CASE("without working sets and acceleration the fit reproduces textbook CD") {
  const auto prob = small_problem(5, 40, 60, 6);
  const auto D = oracle::to_dense(prob.data.X);
  const auto df = Datafit::quadratic(prob.data);
  for (const Penalty& pen : {Penalty(L1{lambda_max(prob.data) / 10}), Penalty(Mcp{lambda_max(prob.data) / 10, 3.0})}) {
    for (int k : {1, 3, 12}) {
      SolverConfig cfg;
      cfg.use_acceleration = false;
      cfg.use_working_sets = false;
      cfg.tol = 1e-300;
      cfg.max_total_epochs = k;
      const auto res = fit(df, pen, cfg);
      CHECK(res.n_epochs == k);
      const auto ref = textbook_cd(D, prob.data.y.values, pen, k);
      for (int j = 0; j < 60; ++j) CHECK(std::abs(res.beta[j] - ref[j]) <= 1e-12 * std::max(1.0, std::abs(ref[j])));
    }
  }
}

TEST_CASE("lambda at or above lambda_max returns zero in one outer iteration") {
  const auto prob = small_problem(6);
  const auto df = Datafit::quadratic(prob.data);
  const auto res = fit(df, Penalty(L1{lambda_max(prob.data) * 1.01}), SolverConfig{});
  CHECK(res.n_outer == 1);
  CHECK(res.stop_reason == StopReason::tolerance_met);
  for (double v : res.beta) CHECK(v == 0.0);
}

TEST_CASE("Lasso fit matches a long-run CD oracle") {
  const auto prob = small_problem(7);
  const auto df = Datafit::quadratic(prob.data);
  const double lam = lambda_max(prob.data) / 10;
  SolverConfig cfg;
  cfg.tol = 1e-8;
  const auto res = fit(df, Penalty(L1{lam}), cfg);
  CHECK(res.stop_reason == StopReason::tolerance_met);
  CHECK(res.kkt_violation <= 1e-8);
  const auto D = oracle::to_dense(prob.data.X);
  const auto ref = oracle::enet_cd_reference(D, prob.data.y.values, lam, 1.0);
  const double f_ref = oracle::enet_objective(D, prob.data.y.values, ref, lam, 1.0);
  const double f_fit = oracle::enet_objective(D, prob.data.y.values, res.beta, lam, 1.0);
  CHECK(std::abs(f_fit - f_ref) <= 1e-10 * std::abs(f_ref));
  CHECK(res.objective == Approx(f_fit).epsilon(1e-12));
}

TEST_CASE("termination contract and working-set nestedness") {
  const auto prob = small_problem(8);
  const auto df = Datafit::quadratic(prob.data);
  const double lam = lambda_max(prob.data) / 50;
  for (const Penalty& pen : {Penalty(L1{lam}), Penalty(Mcp{lam, 3.0}), Penalty(Scad{lam, 3.7})}) {
    for (int budget : {1, 1000}) {
      SolverConfig cfg;
      cfg.tol = 1e-7;
      cfg.max_inner = budget;
      cfg.max_outer = budget == 1 ? 2 : 50;
      const auto res = fit(df, pen, cfg);
      const double v = fresh_violation(df, pen, res.beta, res.score_kind);
      CHECK(res.kkt_violation == Approx(v).epsilon(1e-12).scale(1e-15));
      CHECK((res.stop_reason == StopReason::tolerance_met) == (v <= cfg.tol));
      for (std::size_t t = 1; t < res.ws_history.size(); ++t)
        CHECK(std::includes(res.ws_history[t].begin(), res.ws_history[t].end(), res.ws_history[t - 1].begin(),
                            res.ws_history[t - 1].end()));
      for (std::size_t k = 1; k < res.trace.records.size(); ++k)
        CHECK(res.trace.records[k].time_s >= res.trace.records[k - 1].time_s);
      for (const auto& ev : res.anderson_events)
        if (ev.accepted) CHECK(ev.objective_after < ev.objective_before);
    }
  }
}

TEST_CASE("MCP fit ends at a fixed point") {
  const auto prob = small_problem(9);
  const Dataset scaled = scale_columns_to_sqrt_n(prob.data);
  const auto df = Datafit::quadratic(scaled);
  const Penalty pen(Mcp{lambda_max(scaled) / 10, 3.0});
  SolverConfig cfg;
  cfg.tol = 1e-9;
  const auto res = fit(df, pen, cfg);
  CHECK(res.stop_reason == StopReason::tolerance_met);
  const auto cache = df.init_cache(res.beta);
  for (int j = 0; j < df.n_coords(); ++j) {
    const double L = df.lipschitz()[j];
    CHECK(pen.fixed_point_score(res.beta[j], df.gradient_coord(cache, j), L) * L <= 1e-8);
  }
}

TEST_CASE("record_epochs emits one record per epoch") {
  const auto prob = small_problem(10, 50, 100, 5);
  const auto df = Datafit::quadratic(prob.data);
  SolverConfig cfg;
  cfg.record_epochs = true;
  cfg.record_gsupp_history = true;
  int seen = 0;
  FitHooks hooks;
  hooks.on_record = [&](const TraceRecord&) { ++seen; };
  const auto res = fit(df, Penalty(L1{lambda_max(prob.data) / 10}), cfg, {}, hooks);
  CHECK(static_cast<int>(res.trace.records.size()) == res.n_epochs + 1);
  CHECK(seen == static_cast<int>(res.trace.records.size()));
  CHECK(static_cast<int>(res.gsupp_history.size()) == res.n_epochs + 1);
  for (int k = 0; k <= res.n_epochs; ++k) CHECK(res.trace.records[k].epoch == k);
}

TEST_CASE("warm starts with coefficients outside the working set") {
  const auto prob = small_problem(11);
  const auto df = Datafit::quadratic(prob.data);
  const double lam = lambda_max(prob.data) / 20;
  std::mt19937_64 rng(1);
  const auto start = oracle::random_vector(400, rng, 0.1);
  SolverConfig cfg;
  cfg.tol = 1e-9;
  const auto warm = fit(df, Penalty(L1{lam}), cfg, start);
  const auto cold = fit(df, Penalty(L1{lam}), cfg);
  CHECK(warm.stop_reason == StopReason::tolerance_met);
  CHECK(warm.objective == Approx(cold.objective).epsilon(1e-9));
  CHECK_THROWS_AS(fit(df, Penalty(L1{lam}), cfg, std::vector<double>(3, 0.0)), std::invalid_argument);
}

TEST_CASE("empty columns are settled and left alone") {
  auto prob = small_problem(12, 30, 20, 4);
  auto D = oracle::to_dense(prob.data.X);
  for (int i = 0; i < 30; ++i) D(i, 5) = 0.0;
  const Dataset d(oracle::to_design(D), prob.data.y);
  const auto df = Datafit::quadratic(d);
  std::vector<double> start(20, 0.0);
  start[5] = 3.0;
  const auto res = fit(df, Penalty(L1{lambda_max(d) / 10}), SolverConfig{}, start);
  CHECK(res.beta[5] == 0.0);
  CHECK(res.stop_reason == StopReason::tolerance_met);
}

TEST_CASE("other datafits converge") {
  const auto prob = small_problem(13, 80, 120, 10);
  SUBCASE("logistic") {
    Dataset d = prob.data;
    for (double& v : d.y.values) v = v >= 0 ? 1.0 : -1.0;
    const auto df = Datafit::logistic(d);
    SolverConfig cfg;
    cfg.tol = 1e-8;
    const auto res = fit(df, Penalty(L1{0.01}), cfg);
    CHECK(res.stop_reason == StopReason::tolerance_met);
  }
  SUBCASE("multitask with a block penalty") {
    SyntheticSpec spec;
    spec.n_samples = 60;
    spec.n_features = 100;
    spec.n_nonzero = 5;
    spec.n_tasks = 3;
    const auto mt = generate_correlated_gaussian(spec);
    const auto df = Datafit::multitask_quadratic(mt.data);
    SolverConfig cfg;
    cfg.tol = 1e-8;
    for (const Penalty& pen : {Penalty::block(L1{lambda_max(mt.data) / 10}),
                               Penalty::block(Mcp{lambda_max(mt.data) / 10, 3.0})}) {
      const auto res = fit(df, pen, cfg);
      CHECK(res.stop_reason == StopReason::tolerance_met);
    }
    CHECK_THROWS_AS(fit(df, Penalty(L1{0.1}), cfg), std::invalid_argument);
    const auto zero = fit(df, Penalty::block(L1{lambda_max(mt.data) * 1.001}), cfg);
    for (double v : zero.beta) CHECK(v == 0.0);
  }
  SUBCASE("elastic net and l0.5") {
    const auto df = Datafit::quadratic(prob.data);
    SolverConfig cfg;
    cfg.tol = 1e-8;
    CHECK(fit(df, Penalty(ElasticNet{lambda_max(prob.data) / 10, 0.5}), cfg).stop_reason ==
          StopReason::tolerance_met);
    const auto lh = fit(df, Penalty(LHalf{lambda_max(prob.data) / 10}), cfg);
    CHECK(lh.score_kind == ScoreKind::fixed_point);
    CHECK(lh.stop_reason == StopReason::tolerance_met);
  }
  SUBCASE("symmetric sweep") {
    const auto df = Datafit::quadratic(prob.data);
    SolverConfig cfg;
    cfg.tol = 1e-8;
    cfg.symmetric_sweep = true;
    CHECK(fit(df, Penalty(L1{lambda_max(prob.data) / 10}), cfg).stop_reason == StopReason::tolerance_met);
  }
}

TEST_CASE("regularization paths") {
  const auto prob = small_problem(14);
  const auto df = Datafit::quadratic(prob.data);
  const double lmax = lambda_max(prob.data);
  std::vector<double> grid;
  for (int k = 0; k < 8; ++k) grid.push_back(lmax * std::pow(0.01, k / 7.0));
  SolverConfig cfg;
  cfg.tol = 1e-7;
  const auto warm = path_fit(df, Penalty(L1{1.0}), grid, cfg, prob.true_coef, true);
  const auto cold = path_fit(df, Penalty(L1{1.0}), grid, cfg, prob.true_coef, false);
  CHECK(warm.front().support_size == 0);
  REQUIRE(warm.front().estimation_error.has_value());
  CHECK(*warm.front().estimation_error == Approx(std::sqrt(40.0)));
  int ew = 0, ec = 0;
  for (const auto& pt : warm) ew += pt.result.n_epochs;
  for (const auto& pt : cold) ec += pt.result.n_epochs;
  CHECK(ew < ec);

  const auto again = path_fit(df, Penalty(L1{1.0}), grid, cfg, prob.true_coef, true);
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(again[k].result.beta == warm[k].result.beta);

  std::vector<double> bad{1.0, 1.0};
  CHECK_THROWS_AS(path_fit(df, Penalty(L1{1.0}), bad, cfg), std::invalid_argument);
}

TEST_CASE("support F1") {
  CHECK(support_f1(std::vector<double>{1, 0, 1, 0}, std::vector<double>{1, 0, 1, 0}) == 1.0);
  CHECK(support_f1(std::vector<double>{1, 1, 0, 0}, std::vector<double>{1, 0, 1, 0}) == Approx(0.5));
  CHECK(support_f1(std::vector<double>{0, 0}, std::vector<double>{0, 0}) == 1.0);
  CHECK(support_f1(std::vector<double>{0, 0}, std::vector<double>{1, 0}) == 0.0);
  CHECK(support_f1(std::vector<double>{0, 1, 0, 0}, std::vector<double>{0, 2, 0, 0}, 2) == 1.0);
}
