#include "sparseglm/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <system_error>

#include "CLI11.hpp"
#include "json.hpp"
#include "sparseglm/datafit.hpp"
#include "sparseglm/dataset.hpp"
#include "sparseglm/diagnostics.hpp"
#include "sparseglm/kernels.hpp"
#include "sparseglm/penalty.hpp"
#include "sparseglm/solver.hpp"
#include "sparseglm/trace_io.hpp"

namespace sparseglm::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

/// Usage-level failure: reported with exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// File-level failure: reported with exit code 3.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  // data
  std::string data;
  int n = 200, p = 400, nnz = 40, tasks = 1;
  double corr = 0.6, snr = 5.0;
  std::uint64_t seed = 0;
  bool scale_columns = false;
  // model
  std::string datafit = "quadratic";
  std::string penalty = "l1";
  std::optional<double> lambda, lambda_ratio;
  double gamma = 3.0, rho = 0.5, C = 1.0;
  // solver
  SolverConfig config;
  bool no_acceleration = false, no_working_sets = false;
  std::string score = "auto";
  // output
  std::string output, coef_output;
  std::string format = "csv";
  bool record_epochs = false;
  // path
  int n_lambdas = 10;
  double lambda_min_ratio = 1e-2;
  bool cold_start = false;
  // bench
  std::vector<std::string> arms{"ws+aa", "ws", "aa", "plain"};
  std::vector<int> budgets{1, 2, 4, 8, 16, 32, 64, 128, 256, 512};
};

void add_common(CLI::App& sub, Options& o) {
  sub.add_option("--data", o.data, "libsvm file (relative paths also searched in $SPARSEGLM_DATA_DIR)");
  sub.add_option("--n", o.n, "synthetic: samples")->check(CLI::PositiveNumber);
  sub.add_option("--p", o.p, "synthetic: features")->check(CLI::PositiveNumber);
  sub.add_option("--corr", o.corr, "synthetic: AR(1) feature correlation")->check(CLI::Range(0.0, 0.999999));
  sub.add_option("--nnz", o.nnz, "synthetic: true support size")->check(CLI::NonNegativeNumber);
  sub.add_option("--snr", o.snr, "synthetic: ||X b*|| / ||noise||")->check(CLI::PositiveNumber);
  sub.add_option("--seed", o.seed, "synthetic: RNG seed");
  sub.add_option("--tasks", o.tasks, "synthetic: number of tasks")->check(CLI::PositiveNumber);
  sub.add_flag("--scale-columns", o.scale_columns, "rescale columns to norm sqrt(n)");

  sub.add_option("--datafit", o.datafit, "quadratic | logistic | multitask | svm");
  sub.add_option("--penalty", o.penalty, "l1 | enet | mcp | scad | lhalf | box");
  auto* lam = sub.add_option("--lambda", o.lambda, "regularization strength");
  auto* ratio = sub.add_option("--lambda-ratio", o.lambda_ratio, "lambda / lambda_max (default 0.1)");
  lam->excludes(ratio);
  ratio->excludes(lam);
  sub.add_option("--gamma", o.gamma, "MCP / SCAD concavity parameter");
  sub.add_option("--rho", o.rho, "elastic-net L1 share");
  sub.add_option("--C", o.C, "box upper bound (SVM dual)");

  sub.add_option("--tol", o.config.tol, "absolute KKT violation tolerance");
  sub.add_option("--max-outer", o.config.max_outer, "outer iterations");
  sub.add_option("--max-inner", o.config.max_inner, "CD epochs per subproblem");
  sub.add_option("--max-epochs", o.config.max_total_epochs, "cap on total CD epochs");
  sub.add_option("--anderson-memory", o.config.anderson_memory, "extrapolation memory M");
  sub.add_option("--ws-init", o.config.initial_ws_size, "initial working-set size");
  sub.add_flag("--no-acceleration", o.no_acceleration, "disable Anderson extrapolation");
  sub.add_flag("--no-working-sets", o.no_working_sets, "optimize all coordinates every epoch");
  sub.add_option("--score", o.score, "auto | subdiff | fixed-point");
  sub.add_flag("--symmetric-sweep", o.config.symmetric_sweep, "forward then backward CD passes");
}

void add_output(CLI::App& sub, Options& o, const char* what) {
  sub.add_option("--output", o.output, what);
  sub.add_option("--format", o.format, "csv | json");
}

// ---------------------------------------------------------------------------
// Problem assembly

struct Problem {
  Dataset data;
  std::vector<double> true_coef;  // empty for file data
  std::unique_ptr<Datafit> datafit;
  Penalty penalty{L1{0.0}};
  double lambda_max = 0.0;
  std::string description;
};

fs::path resolve_data_path(const std::string& name) {
  fs::path path(name);
  if (path.is_relative() && !fs::exists(path)) {
    if (const char* dir = std::getenv(kDataDirEnv); dir != nullptr && *dir != '\0') {
      fs::path candidate = fs::path(dir) / path;
      if (fs::exists(candidate)) return candidate;
    }
  }
  return path;
}

ScalarPenalty scalar_penalty(const Options& o, double lambda) {
  ScalarPenalty pen = L1{lambda};
  if (o.penalty == "l1")
    pen = L1{lambda};
  else if (o.penalty == "enet")
    pen = ElasticNet{lambda, o.rho};
  else if (o.penalty == "mcp")
    pen = Mcp{lambda, o.gamma};
  else if (o.penalty == "scad")
    pen = Scad{lambda, o.gamma};
  else if (o.penalty == "lhalf")
    pen = LHalf{lambda};
  else if (o.penalty == "box")
    pen = BoxIndicator{o.C};
  else
    throw UsageError("unknown penalty '" + o.penalty + "' (expected l1, enet, mcp, scad, lhalf or box)");
  try {
    validate(pen);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return pen;
}

Penalty make_penalty(const Options& o, DatafitKind kind, double lambda) {
  const ScalarPenalty pen = scalar_penalty(o, lambda);
  const bool box = std::holds_alternative<BoxIndicator>(pen);
  if (kind == DatafitKind::svm_dual) {
    if (!box) throw UsageError("the svm datafit (dual) needs --penalty box");
    return Penalty(pen);
  }
  if (box) throw UsageError("--penalty box is only supported with --datafit svm");
  if (kind == DatafitKind::multitask_quadratic) return Penalty::block(pen);
  return Penalty(pen);
}

void validate_options(const Options& o, bool check_pairing = true) {
  try {
    (void)parse_datafit_kind(o.datafit);
    (void)parse_trace_format(o.format);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (o.score != "auto" && o.score != "subdiff" && o.score != "fixed-point")
    throw UsageError("unknown score '" + o.score + "' (expected auto, subdiff or fixed-point)");
  if (o.lambda && !(*o.lambda >= 0.0)) throw UsageError("--lambda must be >= 0");
  if (o.lambda_ratio && !(*o.lambda_ratio >= 0.0)) throw UsageError("--lambda-ratio must be >= 0");
  if (o.nnz > o.p) throw UsageError("--nnz cannot exceed --p");
  // Penalty parameters and the datafit/penalty pairing are checked before any data is read.
  if (check_pairing)
    (void)make_penalty(o, parse_datafit_kind(o.datafit), 1.0);
  else
    (void)scalar_penalty(o, 1.0);
}

SolverConfig solver_config(const Options& o) {
  SolverConfig cfg = o.config;
  cfg.use_acceleration = !o.no_acceleration;
  cfg.use_working_sets = !o.no_working_sets;
  if (o.score == "subdiff") cfg.score_kind = ScoreKind::subdiff;
  if (o.score == "fixed-point") cfg.score_kind = ScoreKind::fixed_point;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

/// Smallest lambda for which 0 is a critical point of the L1-type penalty:
/// max_j ||grad_j f(0)||, divided by rho for the elastic net.
double lambda_max_of(const Datafit& datafit, const Options& o) {
  const std::vector<double> zero(static_cast<std::size_t>(datafit.n_coords()) * datafit.block_size(), 0.0);
  const auto grad = datafit.full_gradient(datafit.init_cache(zero));
  const int T = datafit.block_size();
  double best = 0.0;
  for (int j = 0; j < datafit.n_coords(); ++j) {
    double sq = 0.0;
    for (int t = 0; t < T; ++t) sq += grad[static_cast<std::size_t>(j) * T + t] * grad[static_cast<std::size_t>(j) * T + t];
    best = std::max(best, std::sqrt(sq));
  }
  if (o.penalty == "enet" && o.rho > 0.0) best /= o.rho;
  return best;
}

Problem load_problem(const Options& o) {
  const DatafitKind kind = parse_datafit_kind(o.datafit);
  Problem prob;
  std::ostringstream desc;
  if (!o.data.empty()) {
    const fs::path path = resolve_data_path(o.data);
    try {
      prob.data = read_libsvm(path);
    } catch (const ParseError& e) {
      throw IoError(path.string() + ": " + e.what());
    } catch (const std::system_error& e) {
      throw IoError(path.string() + ": " + e.what());
    }
    desc << "data=" << path.filename().string();
  } else {
    SyntheticSpec spec;
    spec.n_samples = o.n;
    spec.n_features = o.p;
    spec.correlation = o.corr;
    spec.n_nonzero = o.nnz;
    spec.snr = o.snr;
    spec.seed = o.seed;
    spec.n_tasks = o.tasks;
    SyntheticProblem sp = generate_correlated_gaussian(spec);
    prob.data = std::move(sp.data);
    prob.true_coef = std::move(sp.true_coef);
    if (kind == DatafitKind::logistic || kind == DatafitKind::svm_dual) {
      for (double& v : prob.data.y.values) v = v >= 0.0 ? 1.0 : -1.0;
    }
    desc << "synthetic n=" << o.n << " p=" << o.p << " corr=" << o.corr << " nnz=" << o.nnz << " snr=" << o.snr
         << " seed=" << o.seed << " tasks=" << o.tasks;
  }
  if (o.scale_columns) {
    std::vector<double> scales;
    prob.data = scale_columns_to_sqrt_n(prob.data, &scales);
    const int T = prob.data.y.n_tasks;
    for (std::size_t k = 0; k < prob.true_coef.size(); ++k) prob.true_coef[k] /= scales[k / T];
    desc << " scaled";
  }
  if (prob.data.y.n_tasks > 1 && kind != DatafitKind::multitask_quadratic)
    throw UsageError("--tasks > 1 needs --datafit multitask");
  try {
    prob.datafit = std::make_unique<Datafit>(Datafit::make(kind, prob.data));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (kind == DatafitKind::svm_dual) prob.true_coef.clear();

  prob.lambda_max = kind == DatafitKind::svm_dual ? 0.0 : lambda_max_of(*prob.datafit, o);
  const double lambda = o.lambda ? *o.lambda : o.lambda_ratio.value_or(0.1) * prob.lambda_max;
  prob.penalty = make_penalty(o, kind, lambda);
  desc << " datafit=" << to_string(kind) << " penalty=" << prob.penalty.name();
  prob.description = desc.str();
  return prob;
}

std::optional<std::function<std::optional<double>(std::span<const double>)>> gap_hook(const Problem& prob) {
  if (prob.datafit->kind() != DatafitKind::quadratic || prob.penalty.is_block()) return std::nullopt;
  const auto& s = prob.penalty.scalar();
  if (!std::holds_alternative<L1>(s) && !std::holds_alternative<ElasticNet>(s)) return std::nullopt;
  if (prob.penalty.lambda() <= 0.0) return std::nullopt;
  const Dataset* data = &prob.data;
  const Penalty pen = prob.penalty;
  return [data, pen](std::span<const double> beta) -> std::optional<double> {
    return diagnostics::duality_gap(*data, pen, beta).normalized_gap;
  };
}

int count_nonzero_rows(std::span<const double> beta, int T) {
  int count = 0;
  for (std::size_t j = 0; j < beta.size() / T; ++j) {
    bool nz = false;
    for (int t = 0; t < T; ++t) nz = nz || beta[j * T + t] != 0.0;
    count += nz;
  }
  return count;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << std::setprecision(17);
  return out;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

// ---------------------------------------------------------------------------
// Commands

int cmd_solve(const Options& o, std::ostream& out) {
  validate_options(o);
  SolverConfig cfg = solver_config(o);
  cfg.record_epochs = o.record_epochs;
  Problem prob = load_problem(o);
  const int T = prob.datafit->block_size();

  FitHooks hooks;
  if (auto gap = gap_hook(prob)) hooks.duality_gap = *gap;

  std::ofstream trace_file;
  std::unique_ptr<TraceWriter> writer;
  if (!o.output.empty()) {
    trace_file = open_output(o.output);
    std::string note = prob.description + " tol=" + fmt(cfg.tol) +
                       " duality_gap=normalized_by_gap_at_zero time_s=solver_time_excluding_monitoring";
    writer = std::make_unique<TraceWriter>(trace_file, parse_trace_format(o.format), note);
    hooks.on_record = [&writer](const TraceRecord& r) { writer->write(r); };
  }

  const auto wall_start = std::chrono::steady_clock::now();
  FitResult res = fit(*prob.datafit, prob.penalty, cfg, {}, hooks);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();

  // The loop stops recording after its last subproblem when the budget runs
  // out; close the trace with the final state and its post-hoc violation.
  if (writer && (res.trace.records.empty() || res.trace.records.back().epoch != res.n_epochs)) {
    TraceRecord last;
    last.time_s = res.solve_time_s;
    last.epoch = res.n_epochs;
    last.objective = res.objective;
    last.kkt_violation = res.kkt_violation;
    if (hooks.duality_gap) last.duality_gap = hooks.duality_gap(res.beta);
    last.ws_size = res.ws_history.empty() ? 0 : static_cast<int>(res.ws_history.back().size());
    last.gsupp_size = kernels::gsupp_size(prob.penalty, res.beta, T);
    writer->write(last);
  }

  if (!o.coef_output.empty()) {
    std::ofstream coef = open_output(o.coef_output);
    for (double v : res.beta) coef << v << '\n';
    if (!coef) throw IoError("failed writing '" + o.coef_output + "'");
  }

  const std::vector<double> zero(res.beta.size(), 0.0);
  const auto scores0 =
      kernels::scores_parallel(*prob.datafit, prob.penalty, zero, prob.datafit->init_cache(zero), res.score_kind);
  double violation0 = 0.0;
  for (double s : scores0) violation0 = std::max(violation0, s);

  out << std::setprecision(10);
  out << "stop_reason: " << to_string(res.stop_reason) << '\n'
      << "objective: " << res.objective << '\n'
      << "kkt_violation: " << res.kkt_violation << '\n'
      << "kkt_violation_normalized: " << (violation0 > 0.0 ? res.kkt_violation / violation0 : res.kkt_violation)
      << '\n'
      << "lambda: " << prob.penalty.lambda() << '\n'
      << "lambda_max: " << prob.lambda_max << '\n'
      << "nnz: " << count_nonzero_rows(res.beta, T) << '\n'
      << "outer_iterations: " << res.n_outer << '\n'
      << "epochs: " << res.n_epochs << '\n'
      << "coordinate_updates: " << res.n_coord_updates << '\n'
      << "solver_time_s: " << res.solve_time_s << '\n'
      << "wall_time_s: " << wall << '\n';
  return kExitOk;
}

std::vector<double> lambda_ratios(const Options& o) {
  if (o.n_lambdas < 1) throw UsageError("--n-lambdas must be >= 1");
  if (!(o.lambda_min_ratio > 0.0 && o.lambda_min_ratio < 1.0))
    throw UsageError("--lambda-min-ratio must lie in (0, 1)");
  std::vector<double> ratios(o.n_lambdas, 1.0);
  for (int k = 1; k < o.n_lambdas; ++k)
    ratios[k] = std::pow(o.lambda_min_ratio, static_cast<double>(k) / (o.n_lambdas - 1));
  return ratios;
}

int cmd_path(const Options& o, std::ostream& out) {
  validate_options(o);
  if (o.lambda || o.lambda_ratio) throw UsageError("path takes --n-lambdas / --lambda-min-ratio, not --lambda");
  if (o.datafit == "svm") throw UsageError("path needs a penalty with a lambda (not the svm box)");
  const SolverConfig cfg = solver_config(o);
  const auto ratios = lambda_ratios(o);
  Problem prob = load_problem(o);
  if (!(prob.lambda_max > 0.0)) throw UsageError("lambda_max is 0 for this data; the path is empty");
  std::vector<double> lambdas;
  for (double r : ratios) lambdas.push_back(r * prob.lambda_max);

  std::ofstream file;
  if (!o.output.empty()) file = open_output(o.output);
  std::ostream& dst = o.output.empty() ? out : file;

  const auto path = path_fit(*prob.datafit, prob.penalty, lambdas, cfg, prob.true_coef, !o.cold_start);
  dst << "# sparseglm-path v1 " << prob.description << '\n';
  dst << "lambda_ratio,lambda,nnz,objective,kkt_violation,est_error,pred_error,f1,epochs,time_s\n";
  for (std::size_t k = 0; k < path.size(); ++k) {
    const auto& pt = path[k];
    dst << fmt(ratios[k]) << ',' << fmt(pt.lambda) << ','
        << count_nonzero_rows(pt.result.beta, prob.datafit->block_size()) << ',' << fmt(pt.result.objective) << ','
        << fmt(pt.result.kkt_violation) << ',' << fmt_opt(pt.estimation_error) << ','
        << fmt_opt(pt.prediction_error) << ',' << fmt_opt(pt.support_f1) << ',' << pt.result.n_epochs << ','
        << fmt(pt.result.solve_time_s) << '\n';
    dst.flush();
  }
  return kExitOk;
}

int cmd_bench(const Options& o, std::ostream& out) {
  validate_options(o);
  const SolverConfig base = solver_config(o);
  for (const auto& arm : o.arms)
    if (arm != "ws+aa" && arm != "ws" && arm != "aa" && arm != "plain")
      throw UsageError("unknown arm '" + arm + "' (expected ws+aa, ws, aa or plain)");
  for (int b : o.budgets)
    if (b < 1) throw UsageError("budgets must be >= 1");
  Problem prob = load_problem(o);

  std::ofstream file;
  if (!o.output.empty()) file = open_output(o.output);
  std::ostream& dst = o.output.empty() ? out : file;
  dst << "# sparseglm-bench v1 " << prob.description << " tol=" << fmt(base.tol)
      << " note=independent runs per budget; curves across budgets need not be monotonic\n";
  dst << "arm,budget,time_s,objective,kkt_violation,epochs,coord_updates,stop_reason\n";
  for (const auto& arm : o.arms) {
    SolverConfig cfg = base;
    cfg.use_working_sets = arm == "ws+aa" || arm == "ws";
    cfg.use_acceleration = arm == "ws+aa" || arm == "aa";
    for (int budget : o.budgets) {
      cfg.max_total_epochs = budget;
      const FitResult r = fit(*prob.datafit, prob.penalty, cfg);
      dst << arm << ',' << budget << ',' << fmt(r.solve_time_s) << ',' << fmt(r.objective) << ','
          << fmt(r.kkt_violation) << ',' << r.n_epochs << ',' << r.n_coord_updates << ','
          << to_string(r.stop_reason) << '\n';
      dst.flush();
    }
  }
  return kExitOk;
}

ordered_json skipped(const std::string& reason) { return {{"status", "skipped"}, {"reason", reason}}; }

int cmd_diagnose(const Options& o, std::ostream& out) {
  validate_options(o, false);
  SolverConfig cfg = solver_config(o);
  cfg.record_gsupp_history = true;

  std::ofstream file;
  ordered_json report;
  report["schema"] = "sparseglm-diagnose v1";

  const bool supported = o.datafit == "quadratic" && o.penalty != "box";
  if (!supported) {
    const std::string why = "diagnostics need the quadratic datafit with a scalar penalty";
    report["problem"] = {{"datafit", o.datafit}, {"penalty", o.penalty}};
    report["identification"] = skipped(why);
    report["jacobian"] = skipped(why);
    report["rate_bound"] = skipped(why);
    report["semiconvexity"] = skipped(why);
  } else {
    Problem prob = load_problem(o);
    const FitResult res = fit(*prob.datafit, prob.penalty, cfg);
    report["problem"] = {{"description", prob.description}, {"lambda", prob.penalty.lambda()},
                         {"lambda_max", prob.lambda_max}};
    report["fit"] = {{"stop_reason", to_string(res.stop_reason)},
                     {"objective", res.objective},
                     {"kkt_violation", res.kkt_violation},
                     {"epochs", res.n_epochs}};

    const auto ident = diagnostics::identification_epoch(res.gsupp_history);
    if (ident)
      report["identification"] = {{"status", "ok"}, {"epoch", *ident}, {"n_epochs", res.n_epochs}};
    else
      report["identification"] = {{"status", "not_identified"}, {"n_epochs", res.n_epochs}};

    if (res.stop_reason != StopReason::tolerance_met) {
      report["jacobian"] = skipped("fit did not reach the tolerance");
      report["rate_bound"] = skipped("fit did not reach the tolerance");
    } else {
      try {
        const auto fwd = diagnostics::cd_jacobian_spectral_radius(*prob.datafit, prob.penalty, res.beta,
                                                                  diagnostics::Sweep::forward);
        const auto sym = diagnostics::cd_jacobian_spectral_radius(*prob.datafit, prob.penalty, res.beta,
                                                                  diagnostics::Sweep::symmetric);
        report["jacobian"] = {{"status", "ok"},
                              {"support_size", fwd.support.size()},
                              {"rho_forward", fwd.rho},
                              {"rho_symmetric", sym.rho}};
        if (sym.support.empty()) {
          report["rate_bound"] = skipped("empty generalized support");
        } else if (!(sym.rho < 1.0)) {
          report["rate_bound"] = skipped("rho(T) >= 1");
        } else {
          const double bound = diagnostics::anderson_rate_bound(sym.H, sym.rho, cfg.anderson_memory);
          report["rate_bound"] = {{"status", "ok"},
                                  {"anderson_memory", cfg.anderson_memory},
                                  {"rho_symmetric", sym.rho},
                                  {"bound", bound}};
        }
      } catch (const std::exception& e) {
        report["jacobian"] = skipped(e.what());
        report["rate_bound"] = skipped(e.what());
      }
    }

    double lmin = std::numeric_limits<double>::infinity();
    for (double L : prob.datafit->lipschitz())
      if (L > 0.0) lmin = std::min(lmin, L);
    if (!std::isfinite(lmin)) {
      report["semiconvexity"] = skipped("all columns are empty");
    } else {
      const auto sc = semiconvexity_check(prob.penalty.scalar(), lmin);
      ordered_json j = {{"status", sc.holds ? "ok" : "violated"}, {"lipschitz_min", lmin}};
      j["alpha"] = std::isfinite(sc.alpha) ? ordered_json(sc.alpha) : ordered_json(nullptr);
      j["note"] = sc.note;
      report["semiconvexity"] = j;
    }
  }

  if (!o.output.empty()) {
    file = open_output(o.output);
    file << report.dump(2) << '\n';
  } else {
    out << report.dump(2) << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse GLM solver: working sets, coordinate descent and Anderson extrapolation"};
  app.require_subcommand(1);
  Options o;

  auto* solve = app.add_subcommand("solve", "fit one problem and write its convergence trace");
  add_common(*solve, o);
  add_output(*solve, o, "trace file");
  solve->add_option("--coef-output", o.coef_output, "write the coefficients, one per line");
  solve->add_flag("--record-epochs", o.record_epochs, "one trace record per epoch instead of per outer iteration");

  auto* path = app.add_subcommand("path", "fit a geometric lambda grid from lambda_max down");
  add_common(*path, o);
  add_output(*path, o, "path table (default stdout)");
  path->add_option("--n-lambdas", o.n_lambdas, "grid size");
  path->add_option("--lambda-min-ratio", o.lambda_min_ratio, "last grid point / lambda_max");
  path->add_flag("--cold-start", o.cold_start, "do not warm-start along the path");

  auto* bench = app.add_subcommand("bench", "compare solver arms across epoch budgets");
  add_common(*bench, o);
  add_output(*bench, o, "long-format CSV (default stdout)");
  bench->add_option("--arms", o.arms, "subset of ws+aa, ws, aa, plain")->delimiter(',');
  bench->add_option("--budgets", o.budgets, "total epoch budgets")->delimiter(',');

  auto* diagnose = app.add_subcommand("diagnose", "identification, CD Jacobian and acceleration checks (JSON)");
  add_common(*diagnose, o);
  add_output(*diagnose, o, "JSON report (default stdout)");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (solve->parsed()) return cmd_solve(o, out);
    if (path->parsed()) return cmd_path(o, out);
    if (bench->parsed()) return cmd_bench(o, out);
    return cmd_diagnose(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::system_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace sparseglm::cli
