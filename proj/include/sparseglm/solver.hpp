#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sparseglm/datafit.hpp"
#include "sparseglm/kernels.hpp"
#include "sparseglm/penalty.hpp"

namespace sparseglm {

using kernels::ScoreKind;

struct SolverConfig {
  double tol = 1e-6;           // absolute bound on the max score
  int max_outer = 50;
  int max_inner = 1000;        // CD epochs per working-set subproblem
  /// Optional cap on CD epochs summed over all outer iterations.
  std::optional<int> max_total_epochs;
  int anderson_memory = 5;     // M
  int initial_ws_size = 10;
  bool use_acceleration = true;
  bool use_working_sets = true;
  /// Unset: fixed-point score for l0.5, subdifferential distance otherwise.
  std::optional<ScoreKind> score_kind;
  /// Forward then backward pass over the working set in each epoch.
  bool symmetric_sweep = false;
  /// Subproblem tolerance is max(tol, inner_tol_ratio * outer violation).
  double inner_tol_ratio = 0.3;
  /// Record objective and global violation after every epoch instead of
  /// once per outer iteration. Costs one full gradient per epoch (excluded
  /// from the reported solver time).
  bool record_epochs = false;
  /// Keep the generalized support after every epoch in FitResult.
  bool record_gsupp_history = false;

  /// Throws std::invalid_argument on tol <= 0, M < 2, initial_ws_size < 1
  /// or non-positive budgets (including max_total_epochs).
  void validate() const;
};

enum class StopReason { tolerance_met, budget_exhausted };
std::string_view to_string(StopReason reason);

struct TraceRecord {
  double time_s = 0.0;  // solver time, monitoring excluded
  int epoch = 0;
  double objective = 0.0;
  double kkt_violation = 0.0;
  std::optional<double> duality_gap;
  int ws_size = 0;
  int gsupp_size = 0;
  bool anderson_accepted = false;
};

struct ConvergenceTrace {
  std::vector<TraceRecord> records;
};

struct AndersonEvent {
  int epoch;
  double objective_before;
  double objective_after;
  bool accepted;
};

struct FitResult {
  std::vector<double> beta;  // n_coords x block_size, row-major
  StopReason stop_reason = StopReason::budget_exhausted;
  double kkt_violation = 0.0;  // recomputed from a fresh cache after the loop
  double objective = 0.0;
  ScoreKind score_kind = ScoreKind::subdiff;
  int n_outer = 0;
  int n_epochs = 0;
  long long n_coord_updates = 0;
  double solve_time_s = 0.0;
  ConvergenceTrace trace;
  std::vector<AndersonEvent> anderson_events;
  /// Working set used by each outer iteration.
  std::vector<std::vector<int>> ws_history;
  /// Generalized support at epoch 0 (start) and after each epoch; only
  /// filled when `record_gsupp_history` is set.
  std::vector<std::vector<int>> gsupp_history;
};

/// Optional callbacks. `on_record` sees every trace record as it is produced;
/// `duality_gap` fills the record's gap column.
struct FitHooks {
  std::function<void(const TraceRecord&)> on_record;
  std::function<std::optional<double>(std::span<const double> beta)> duality_gap;
};

/// Phi(beta) = f(beta) + sum_j g_j(beta_j), using a consistent cache.
double objective(const Datafit& datafit, const Penalty& penalty, std::span<const double> beta,
                 std::span<const double> cache);

/// Score used when the config leaves it unset.
ScoreKind default_score_kind(const Penalty& penalty);

/// One pass of proximal coordinate descent over `ws` in order (forward then
/// backward when `symmetric`). Coordinates with L_j = 0 are skipped. Keeps
/// `cache` equal to the design applied to `beta`. Returns the number of
/// coordinate updates performed.
long long cd_epoch(const Datafit& datafit, const Penalty& penalty, std::span<double> beta,
                   std::span<double> cache, std::span<const int> ws, bool symmetric = false);

/// Combination sum_i c_i x_i of iterates x_1..x_M with c minimizing the norm
/// of the combined differences subject to sum c = 1. Returns nullopt when
/// the differences vanish, the difference Gram matrix is ill-conditioned
/// (> 1e14) without being numerically rank-deficient, or the normalization
/// vanishes. When the differences are rank-deficient (relative singular value
/// <= 1e-10) c is taken in their null space, which makes the combination
/// exact for affine iterations of dimension below the number of differences.
/// Throws std::invalid_argument on fewer than 3 iterates or unequal lengths.
std::optional<std::vector<double>> anderson_extrapolate(std::span<const std::vector<double>> iterates);

struct InnerResult {
  int epochs = 0;
  bool converged = false;
  double violation = 0.0;  // max score over the working set at exit
};

/// Accelerated coordinate descent restricted to `ws` until the working-set
/// violation drops below `eps_in` or `max_epochs` is spent. An extrapolated
/// point is kept only when it strictly lowers the objective. `on_epoch`, if
/// set, runs after every epoch with the epoch number and whether an
/// extrapolation was accepted at that epoch.
InnerResult inner_solve(const Datafit& datafit, const Penalty& penalty, std::span<double> beta,
                        std::span<double> cache, std::span<const int> ws, int max_epochs, double eps_in,
                        const SolverConfig& config, std::vector<AndersonEvent>* events = nullptr,
                        const std::function<void(int, bool)>& on_epoch = {});

struct WorkingSetUpdate {
  std::vector<int> ws;  // sorted by index
  int ws_size;
};

/// ws_size = min(p, max(prev_ws_size, 2 * gsupp_size)); the new set is the
/// current one united with the ws_size best-scored coordinates (ties broken
/// by smaller index). Coordinates scored kIneligibleScore are never added.
WorkingSetUpdate build_working_set(std::span<const double> scores, std::span<const int> current_ws,
                                   int gsupp_size, int prev_ws_size, int p);

/// Working-set solver. `beta0` (optional) warm-starts the fit.
FitResult fit(const Datafit& datafit, const Penalty& penalty, const SolverConfig& config,
              std::span<const double> beta0 = {}, const FitHooks& hooks = {});

struct PathPoint {
  double lambda;
  FitResult result;
  int support_size;
  std::optional<double> estimation_error;  // ||beta - beta*||
  std::optional<double> prediction_error;  // ||X (beta - beta*)||^2 / n
  std::optional<double> support_f1;
};

/// Fits `family.with_lambda(l)` for each l of a strictly decreasing grid,
/// warm-starting from the previous solution unless `warm_start` is false.
std::vector<PathPoint> path_fit(const Datafit& datafit, const Penalty& family,
                                std::span<const double> lambdas, const SolverConfig& config,
                                std::span<const double> true_coef = {}, bool warm_start = true);

/// F1 score between the supports (nonzero rows) of two coefficient vectors.
double support_f1(std::span<const double> estimate, std::span<const double> truth, int block_size = 1);

}  // namespace sparseglm
