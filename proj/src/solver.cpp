#include "sparseglm/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <numeric>
#include <stdexcept>

namespace sparseglm {

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  if (anderson_memory < 2) throw std::invalid_argument("anderson_memory must be >= 2");
  if (initial_ws_size < 1) throw std::invalid_argument("initial_ws_size must be >= 1");
  if (max_outer < 1 || max_inner < 1) throw std::invalid_argument("iteration budgets must be >= 1");
  if (max_total_epochs && *max_total_epochs < 1) throw std::invalid_argument("max_total_epochs must be >= 1");
  if (!(inner_tol_ratio >= 0.0)) throw std::invalid_argument("inner_tol_ratio must be >= 0");
}

std::string_view to_string(StopReason reason) {
  return reason == StopReason::tolerance_met ? "tolerance_met" : "budget_exhausted";
}

double objective(const Datafit& datafit, const Penalty& penalty, std::span<const double> beta,
                 std::span<const double> cache) {
  double pen = 0.0;
  const int T = datafit.block_size();
  if (T == 1) {
    for (double b : beta) pen += penalty.value(b);
  } else {
    for (int j = 0; j < datafit.n_coords(); ++j)
      pen += penalty.value_block(beta.subspan(static_cast<std::size_t>(j) * T, T));
  }
  return datafit.value(beta, cache) + pen;
}

ScoreKind default_score_kind(const Penalty& penalty) {
  return std::holds_alternative<LHalf>(penalty.scalar()) ? ScoreKind::fixed_point : ScoreKind::subdiff;
}

namespace {

class Stopwatch {
 public:
  void start() { t0_ = Clock::now(); }
  void stop() { elapsed_ += std::chrono::duration<double>(Clock::now() - t0_).count(); }
  double elapsed() const { return elapsed_; }

 private:
  using Clock = std::chrono::steady_clock;
  Clock::time_point t0_;
  double elapsed_ = 0.0;
};

void update_coordinate(const Datafit& datafit, const Penalty& penalty, std::span<double> beta,
                       std::span<double> cache, int j, std::span<double> scratch) {
  const double L = datafit.lipschitz()[j];
  if (L == 0.0) return;
  const int T = datafit.block_size();
  if (T == 1) {
    const double old = beta[j];
    const double g = datafit.gradient_coord(cache, j);
    beta[j] = penalty.prox(old - g / L, 1.0 / L);
    const double delta = beta[j] - old;
    if (delta != 0.0) datafit.update_cache(j, std::span<const double>(&delta, 1), cache);
    return;
  }
  auto row = beta.subspan(static_cast<std::size_t>(j) * T, T);
  auto grad = scratch.first(T);
  auto next = scratch.subspan(T, T);
  datafit.gradient_block(cache, j, grad);
  for (int t = 0; t < T; ++t) grad[t] = row[t] - grad[t] / L;
  penalty.prox_block(grad, 1.0 / L, next);
  bool moved = false;
  for (int t = 0; t < T; ++t) {
    grad[t] = next[t] - row[t];  // reuse as delta
    moved |= grad[t] != 0.0;
    row[t] = next[t];
  }
  if (moved) datafit.update_cache(j, grad, cache);
}

std::vector<double> restrict_to(std::span<const double> beta, std::span<const int> ws, int T) {
  std::vector<double> out;
  out.reserve(ws.size() * T);
  for (int j : ws)
    for (int t = 0; t < T; ++t) out.push_back(beta[static_cast<std::size_t>(j) * T + t]);
  return out;
}

double working_set_violation(const Datafit& datafit, const Penalty& penalty, std::span<const double> beta,
                             std::span<const double> cache, std::span<const int> ws, ScoreKind kind) {
  double worst = 0.0;
  for (int j : ws) worst = std::max(worst, kernels::coordinate_score(datafit, penalty, beta, cache, j, kind));
  return worst;
}

std::vector<int> gsupp_indices(const Penalty& penalty, std::span<const double> beta, int T) {
  std::vector<int> out;
  const int p = static_cast<int>(beta.size()) / T;
  for (int j = 0; j < p; ++j) {
    const bool in = T == 1 ? penalty.in_gsupp(beta[j])
                           : penalty.in_gsupp_block(beta.subspan(static_cast<std::size_t>(j) * T, T));
    if (in) out.push_back(j);
  }
  return out;
}

using EpochMonitor = std::function<void(bool accepted)>;

InnerResult inner_solve_impl(const Datafit& datafit, const Penalty& penalty, std::span<double> beta,
                             std::span<double> cache, std::span<const int> ws, int max_epochs, double eps_in,
                             const SolverConfig& config, std::vector<AndersonEvent>* events,
                             long long* n_updates, int* epoch_counter, const EpochMonitor& monitor) {
  const int T = datafit.block_size();
  const int M = config.anderson_memory;
  const ScoreKind kind = config.score_kind.value_or(default_score_kind(penalty));

  // X beta = X_ws beta_ws + frozen, where frozen holds the out-of-ws part.
  std::vector<double> frozen;
  std::deque<std::vector<double>> history;
  if (config.use_acceleration) {
    std::vector<double> outside(beta.begin(), beta.end());
    for (int j : ws)
      for (int t = 0; t < T; ++t) outside[static_cast<std::size_t>(j) * T + t] = 0.0;
    frozen = datafit.init_cache(outside);
    history.push_back(restrict_to(beta, ws, T));
  }

  InnerResult res;
  for (int k = 1; k <= max_epochs; ++k) {
    const long long updates = cd_epoch(datafit, penalty, beta, cache, ws, config.symmetric_sweep);
    if (n_updates) *n_updates += updates;
    if (epoch_counter) ++*epoch_counter;
    res.epochs = k;

    bool accepted = false;
    if (config.use_acceleration) {
      history.push_back(restrict_to(beta, ws, T));
      if (static_cast<int>(history.size()) == M + 1) {
        const std::vector<std::vector<double>> iterates(history.begin(), history.end());
        if (auto extr = anderson_extrapolate(iterates)) {
          std::vector<double> beta_extr(beta.begin(), beta.end());
          for (std::size_t s = 0; s < ws.size(); ++s)
            for (int t = 0; t < T; ++t)
              beta_extr[static_cast<std::size_t>(ws[s]) * T + t] = (*extr)[s * T + t];
          std::vector<double> cache_extr = frozen;
          for (std::size_t s = 0; s < ws.size(); ++s)
            datafit.update_cache(ws[s], std::span<const double>(*extr).subspan(s * T, T), cache_extr);
          const double before = objective(datafit, penalty, beta, cache);
          const double after = objective(datafit, penalty, beta_extr, cache_extr);
          accepted = after < before;
          if (accepted) {
            std::copy(beta_extr.begin(), beta_extr.end(), beta.begin());
            std::copy(cache_extr.begin(), cache_extr.end(), cache.begin());
          }
          if (events) events->push_back({epoch_counter ? *epoch_counter : k, before, after, accepted});
        }
        history.clear();
        history.push_back(restrict_to(beta, ws, T));
      }
    }
    if (monitor) monitor(accepted);

    res.violation = working_set_violation(datafit, penalty, beta, cache, ws, kind);
    if (res.violation <= eps_in) {
      res.converged = true;
      break;
    }
  }
  return res;
}

// Minimizer of grad_j * u + g(u) for a coordinate whose gradient never
// changes (zero column): a prox with a very long step.
double settle_constant_coordinate(const Penalty& penalty, double beta0, double grad) {
  constexpr double kLongStep = 1e12;
  return penalty.prox(beta0 - kLongStep * grad, kLongStep);
}

}  // namespace

long long cd_epoch(const Datafit& datafit, const Penalty& penalty, std::span<double> beta,
                   std::span<double> cache, std::span<const int> ws, bool symmetric) {
  std::vector<double> scratch(2 * static_cast<std::size_t>(datafit.block_size()));
  long long updates = 0;
  for (int j : ws) {
    if (datafit.lipschitz()[j] == 0.0) continue;
    update_coordinate(datafit, penalty, beta, cache, j, scratch);
    ++updates;
  }
  if (symmetric) {
    for (auto it = ws.rbegin(); it != ws.rend(); ++it) {
      if (datafit.lipschitz()[*it] == 0.0) continue;
      update_coordinate(datafit, penalty, beta, cache, *it, scratch);
      ++updates;
    }
  }
  return updates;
}

std::optional<std::vector<double>> anderson_extrapolate(std::span<const std::vector<double>> iterates) {
  if (iterates.size() < 3) throw std::invalid_argument("Anderson extrapolation needs at least 3 iterates");
  const std::size_t d = iterates[0].size();
  for (const auto& it : iterates)
    if (it.size() != d) throw std::invalid_argument("Anderson iterates must have equal lengths");
  const int M = static_cast<int>(iterates.size()) - 1;

  Eigen::MatrixXd U(d, M);
  for (int i = 0; i < M; ++i)
    for (std::size_t r = 0; r < d; ++r) U(r, i) = iterates[i + 1][r] - iterates[i][r];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(U, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double s_max = sv.size() > 0 ? sv(0) : 0.0;
  if (!(s_max > 0.0) || !std::isfinite(s_max)) return std::nullopt;

  // Numerically rank-deficient U: combinations in its null space cancel the
  // differences exactly, which is the exact fixed point for affine maps.
  const Eigen::MatrixXd& V = svd.matrixV();
  int rank = 0;
  while (rank < sv.size() && sv(rank) > 1e-10 * s_max) ++rank;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(M);
  Eigen::VectorXd c;
  if (rank < M) {
    const auto null = V.rightCols(M - rank);
    c = null * (null.transpose() * ones);
  } else {
    if (sv(M - 1) * 1e7 < s_max) return std::nullopt;  // Gram condition number above 1e14
    const Eigen::VectorXd inv_sq = sv.array().square().inverse();
    c = V * inv_sq.asDiagonal() * (V.transpose() * ones);
  }
  const double total = c.sum();
  if (!std::isfinite(total) || std::abs(total) <= 1e-12 * c.cwiseAbs().sum()) return std::nullopt;

  std::vector<double> out(d, 0.0);
  for (int i = 0; i < M; ++i) {
    const double w = c(i) / total;
    for (std::size_t r = 0; r < d; ++r) out[r] += w * iterates[i + 1][r];
  }
  return out;
}

InnerResult inner_solve(const Datafit& datafit, const Penalty& penalty, std::span<double> beta,
                        std::span<double> cache, std::span<const int> ws, int max_epochs, double eps_in,
                        const SolverConfig& config, std::vector<AndersonEvent>* events,
                        const std::function<void(int, bool)>& on_epoch) {
  int epoch = 0;
  EpochMonitor monitor;
  if (on_epoch) monitor = [&](bool accepted) { on_epoch(epoch, accepted); };
  return inner_solve_impl(datafit, penalty, beta, cache, ws, max_epochs, eps_in, config, events, nullptr,
                          &epoch, monitor);
}

WorkingSetUpdate build_working_set(std::span<const double> scores, std::span<const int> current_ws,
                                   int gsupp_size, int prev_ws_size, int p) {
  if (scores.size() != static_cast<std::size_t>(p))
    throw std::invalid_argument("score vector length must equal p");
  const int size = std::min(p, std::max(prev_ws_size, 2 * gsupp_size));
  std::vector<int> order(p);
  std::iota(order.begin(), order.end(), 0);
  auto better = [&](int a, int b) { return scores[a] > scores[b] || (scores[a] == scores[b] && a < b); };
  std::partial_sort(order.begin(), order.begin() + size, order.end(), better);

  std::vector<char> member(p, 0);
  for (int j : current_ws) member[j] = 1;
  for (int k = 0; k < size; ++k)
    if (scores[order[k]] != kernels::kIneligibleScore) member[order[k]] = 1;
  WorkingSetUpdate out{{}, size};
  for (int j = 0; j < p; ++j)
    if (member[j]) out.ws.push_back(j);
  return out;
}

FitResult fit(const Datafit& datafit, const Penalty& penalty, const SolverConfig& config,
              std::span<const double> beta0, const FitHooks& hooks) {
  config.validate();
  const int p = datafit.n_coords(), T = datafit.block_size();
  if (T > 1 && !penalty.is_block())
    throw std::invalid_argument("multitask datafits need a block (row) penalty");
  const std::size_t len = static_cast<std::size_t>(p) * T;
  if (!beta0.empty() && beta0.size() != len)
    throw std::invalid_argument("warm start length must equal n_coords * block_size");

  FitResult res;
  res.score_kind = config.score_kind.value_or(default_score_kind(penalty));
  res.beta.assign(len, 0.0);
  if (!beta0.empty()) std::copy(beta0.begin(), beta0.end(), res.beta.begin());
  std::span<double> beta(res.beta);

  Stopwatch clock;
  clock.start();

  const auto lips = datafit.lipschitz();
  std::vector<int> eligible;
  std::vector<int> empty_coords;
  for (int j = 0; j < p; ++j) (lips[j] > 0.0 ? eligible : empty_coords).push_back(j);
  if (!empty_coords.empty()) {
    // Zero columns have a constant gradient; settle them once and exclude them.
    std::vector<double> zero_cache = datafit.init_cache(std::vector<double>(len, 0.0));
    std::vector<double> g(T);
    for (int j : empty_coords) {
      datafit.gradient_block(zero_cache, j, g);
      if (T == 1) {
        beta[j] = settle_constant_coordinate(penalty, beta[j], g[0]);
      } else {
        for (int t = 0; t < T; ++t) beta[static_cast<std::size_t>(j) * T + t] = 0.0;
      }
    }
  }
  std::vector<double> cache = datafit.init_cache(beta);

  std::vector<int> ws;
  int ws_size = config.initial_ws_size;
  int epochs = 0;
  long long updates = 0;

  auto emit = [&](double violation, bool accepted) {
    clock.stop();
    TraceRecord rec;
    rec.time_s = clock.elapsed();
    rec.epoch = epochs;
    rec.objective = objective(datafit, penalty, beta, cache);
    rec.kkt_violation = violation;
    if (hooks.duality_gap) rec.duality_gap = hooks.duality_gap(beta);
    rec.ws_size = static_cast<int>(ws.size());
    rec.gsupp_size = kernels::gsupp_size(penalty, beta, T);
    rec.anderson_accepted = accepted;
    res.trace.records.push_back(rec);
    if (hooks.on_record) hooks.on_record(rec);
    clock.start();
  };
  auto max_score = [&](const std::vector<double>& scores) {
    double worst = 0.0;
    for (double s : scores) worst = std::max(worst, s);
    return worst;
  };
  auto snapshot_gsupp = [&] {
    if (config.record_gsupp_history) res.gsupp_history.push_back(gsupp_indices(penalty, beta, T));
  };
  snapshot_gsupp();

  EpochMonitor monitor = [&](bool accepted) {
    clock.stop();
    snapshot_gsupp();
    if (config.record_epochs) {
      const auto scores = kernels::scores_parallel(datafit, penalty, beta, cache, res.score_kind);
      clock.start();
      emit(max_score(scores), accepted);
    } else {
      clock.start();
    }
  };

  for (int t = 1; t <= config.max_outer; ++t) {
    res.n_outer = t;
    const auto scores = kernels::scores_parallel(datafit, penalty, beta, cache, res.score_kind);
    const double violation = max_score(scores);
    if (!config.record_epochs || t == 1) emit(violation, false);
    if (violation <= config.tol) break;

    if (config.use_working_sets) {
      auto update = build_working_set(scores, ws, kernels::gsupp_size(penalty, beta, T), ws_size, p);
      ws = std::move(update.ws);
      ws_size = update.ws_size;
    } else {
      ws = eligible;
    }
    res.ws_history.push_back(ws);
    int budget = config.max_inner;
    if (config.max_total_epochs) {
      if (epochs >= *config.max_total_epochs) break;
      budget = std::min(budget, *config.max_total_epochs - epochs);
    }
    const double eps_in = std::max(config.tol, config.inner_tol_ratio * violation);
    inner_solve_impl(datafit, penalty, beta, cache, ws, budget, eps_in, config, &res.anderson_events,
                     &updates, &epochs, monitor);
  }
  clock.stop();

  // Termination is judged on a freshly rebuilt cache, not the incremental one.
  cache = datafit.init_cache(beta);
  const auto final_scores = kernels::scores_parallel(datafit, penalty, beta, cache, res.score_kind);
  res.kkt_violation = max_score(final_scores);
  res.stop_reason = res.kkt_violation <= config.tol ? StopReason::tolerance_met : StopReason::budget_exhausted;
  res.objective = objective(datafit, penalty, beta, cache);
  res.n_epochs = epochs;
  res.n_coord_updates = updates;
  res.solve_time_s = clock.elapsed();
  return res;
}

double support_f1(std::span<const double> estimate, std::span<const double> truth, int block_size) {
  if (estimate.size() != truth.size()) throw std::invalid_argument("support_f1: length mismatch");
  const std::size_t p = estimate.size() / block_size;
  auto nonzero = [&](std::span<const double> v, std::size_t j) {
    for (int t = 0; t < block_size; ++t)
      if (v[j * block_size + t] != 0.0) return true;
    return false;
  };
  int tp = 0, fp = 0, fn = 0;
  for (std::size_t j = 0; j < p; ++j) {
    const bool e = nonzero(estimate, j), s = nonzero(truth, j);
    tp += e && s;
    fp += e && !s;
    fn += !e && s;
  }
  if (tp == 0) return (fp == 0 && fn == 0) ? 1.0 : 0.0;
  return 2.0 * tp / (2.0 * tp + fp + fn);
}

std::vector<PathPoint> path_fit(const Datafit& datafit, const Penalty& family, std::span<const double> lambdas,
                                const SolverConfig& config, std::span<const double> true_coef, bool warm_start) {
  for (std::size_t k = 1; k < lambdas.size(); ++k)
    if (!(lambdas[k] < lambdas[k - 1])) throw std::invalid_argument("lambdas must be strictly decreasing");
  const int T = datafit.block_size();
  const std::size_t len = static_cast<std::size_t>(datafit.n_coords()) * T;
  if (!true_coef.empty() && true_coef.size() != len)
    throw std::invalid_argument("true coefficients have the wrong length");

  std::vector<PathPoint> path;
  std::vector<double> start;
  for (double lambda : lambdas) {
    const Penalty pen = family.with_lambda(lambda);
    FitResult r = fit(datafit, pen, config, warm_start ? std::span<const double>(start) : std::span<const double>{});
    PathPoint pt{lambda, {}, kernels::gsupp_size(pen, r.beta, T), {}, {}, {}};
    if (!true_coef.empty()) {
      std::vector<double> diff(len);
      double est = 0.0;
      for (std::size_t k = 0; k < len; ++k) {
        diff[k] = r.beta[k] - true_coef[k];
        est += diff[k] * diff[k];
      }
      pt.estimation_error = std::sqrt(est);
      const auto fitted = datafit.init_cache(diff);
      double pred = 0.0;
      for (double v : fitted) pred += v * v;
      pt.prediction_error = pred / datafit.n_rows();
      pt.support_f1 = support_f1(r.beta, true_coef, T);
    }
    start = r.beta;
    pt.result = std::move(r);
    path.push_back(std::move(pt));
  }
  return path;
}

}  // namespace sparseglm
