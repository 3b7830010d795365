#include "sparseglm/datafit.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sparseglm/kernels.hpp"

namespace sparseglm {

std::string_view to_string(DatafitKind kind) {
  switch (kind) {
    case DatafitKind::quadratic: return "quadratic";
    case DatafitKind::logistic: return "logistic";
    case DatafitKind::multitask_quadratic: return "multitask";
    case DatafitKind::svm_dual: return "svm_dual";
  }
  return "unknown";
}

DatafitKind parse_datafit_kind(std::string_view name) {
  if (name == "quadratic") return DatafitKind::quadratic;
  if (name == "logistic") return DatafitKind::logistic;
  if (name == "multitask" || name == "multitask_quadratic") return DatafitKind::multitask_quadratic;
  if (name == "svm_dual" || name == "svm") return DatafitKind::svm_dual;
  throw std::invalid_argument("unknown datafit '" + std::string(name) + "'");
}

namespace {

// log(1 + exp(-m)) without overflow.
double log1p_exp_neg(double m) {
  if (m > 30.0) return std::exp(-m);
  if (m < -30.0) return -m;
  return std::log1p(std::exp(-m));
}

// 1 / (1 + exp(m)) = sigmoid(-m).
double sigmoid_neg(double m) {
  if (m >= 0.0) {
    const double e = std::exp(-m);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(m));
}

std::vector<double> scaled_squared_norms(const DesignMatrix& X, double factor) {
  auto l = column_squared_norms(X);
  for (double& v : l) v *= factor;
  return l;
}

void require_binary(const Dataset& data, const char* what) {
  if (data.y.n_tasks != 1 || !data.y.is_binary())
    throw std::invalid_argument(std::string(what) + " datafit requires labels in {-1, +1}");
}

}  // namespace

Datafit Datafit::quadratic(const Dataset& data) {
  if (data.y.n_tasks != 1) throw std::invalid_argument("quadratic datafit requires a single task");
  Datafit df;
  df.kind_ = DatafitKind::quadratic;
  df.design_ = &data.X;
  df.targets_ = data.y.values;
  df.xty_ = data.X.transpose_multiply(data.y.values);
  df.lipschitz_ = scaled_squared_norms(data.X, 1.0 / data.n_samples());
  return df;
}

Datafit Datafit::logistic(const Dataset& data) {
  require_binary(data, "logistic");
  Datafit df;
  df.kind_ = DatafitKind::logistic;
  df.design_ = &data.X;
  df.targets_ = data.y.values;
  df.lipschitz_ = scaled_squared_norms(data.X, 0.25 / data.n_samples());
  return df;
}

Datafit Datafit::multitask_quadratic(const Dataset& data) {
  Datafit df;
  const int T = data.y.n_tasks, p = data.n_features();
  df.kind_ = DatafitKind::multitask_quadratic;
  df.n_tasks_ = T;
  df.design_ = &data.X;
  df.targets_ = data.y.values;
  df.xty_.resize(static_cast<std::size_t>(p) * T);
  for (int j = 0; j < p; ++j)
    for (int t = 0; t < T; ++t) df.xty_[static_cast<std::size_t>(j) * T + t] = data.X.col_dot(j, data.y.task(t));
  df.lipschitz_ = scaled_squared_norms(data.X, 1.0 / data.n_samples());
  return df;
}

Datafit Datafit::svm_dual(const Dataset& data) {
  require_binary(data, "SVM dual");
  Datafit df;
  df.kind_ = DatafitKind::svm_dual;
  df.owned_ = std::make_shared<const DesignMatrix>(data.X.scaled_transpose(data.y.values));
  df.design_ = df.owned_.get();
  df.targets_ = data.y.values;
  df.lipschitz_ = scaled_squared_norms(*df.design_, 1.0);
  return df;
}

Datafit Datafit::make(DatafitKind kind, const Dataset& data) {
  switch (kind) {
    case DatafitKind::quadratic: return quadratic(data);
    case DatafitKind::logistic: return logistic(data);
    case DatafitKind::multitask_quadratic: return multitask_quadratic(data);
    case DatafitKind::svm_dual: return svm_dual(data);
  }
  throw std::invalid_argument("unknown datafit kind");
}

std::vector<double> Datafit::init_cache(std::span<const double> beta) const {
  const int p = n_coords(), T = n_tasks_, rows = n_rows();
  if (beta.size() != static_cast<std::size_t>(p) * T)
    throw std::invalid_argument("coefficient length must be n_coords * block_size");
  std::vector<double> cache(cache_size(), 0.0);
  for (int j = 0; j < p; ++j)
    for (int t = 0; t < T; ++t)
      if (const double b = beta[static_cast<std::size_t>(j) * T + t]; b != 0.0)
        design_->col_axpy(j, b, std::span<double>(cache).subspan(static_cast<std::size_t>(t) * rows, rows));
  return cache;
}

void Datafit::update_cache(int j, std::span<const double> delta, std::span<double> cache) const {
  const auto rows = static_cast<std::size_t>(n_rows());
  for (int t = 0; t < n_tasks_; ++t)
    if (delta[t] != 0.0) design_->col_axpy(j, delta[t], cache.subspan(t * rows, rows));
}

double Datafit::value(std::span<const double> beta, std::span<const double> cache) const {
  const int rows = n_rows();
  switch (kind_) {
    case DatafitKind::quadratic:
    case DatafitKind::multitask_quadratic: {
      double acc = 0.0;
      for (std::size_t k = 0; k < cache.size(); ++k) {
        const double r = targets_[k] - cache[k];
        acc += r * r;
      }
      return acc / (2.0 * rows);
    }
    case DatafitKind::logistic: {
      double acc = 0.0;
      for (int i = 0; i < rows; ++i) acc += log1p_exp_neg(targets_[i] * cache[i]);
      return acc / rows;
    }
    case DatafitKind::svm_dual: {
      double sq = 0.0, lin = 0.0;
      for (double w : cache) sq += w * w;
      for (double a : beta) lin += a;
      return 0.5 * sq - lin;
    }
  }
  return 0.0;
}

double Datafit::gradient_coord(std::span<const double> cache, int j) const {
  if (j < 0 || j >= n_coords()) throw std::out_of_range("coordinate index out of range");
  const int rows = n_rows();
  switch (kind_) {
    case DatafitKind::quadratic:
    case DatafitKind::multitask_quadratic:
      return (design_->col_dot(j, cache.first(rows)) - xty_[static_cast<std::size_t>(j) * n_tasks_]) / rows;
    case DatafitKind::logistic: {
      const double s = design_->col_reduce(
          j, [&](int i) { return targets_[i] * sigmoid_neg(targets_[i] * cache[i]); });
      return -s / rows;
    }
    case DatafitKind::svm_dual:
      return design_->col_dot(j, cache) - 1.0;
  }
  return 0.0;
}

void Datafit::gradient_block(std::span<const double> cache, int j, std::span<double> out) const {
  if (n_tasks_ == 1) {
    out[0] = gradient_coord(cache, j);
    return;
  }
  if (j < 0 || j >= n_coords()) throw std::out_of_range("coordinate index out of range");
  const auto rows = static_cast<std::size_t>(n_rows());
  for (int t = 0; t < n_tasks_; ++t)
    out[t] = (design_->col_dot(j, cache.subspan(t * rows, rows)) -
              xty_[static_cast<std::size_t>(j) * n_tasks_ + t]) /
             static_cast<double>(rows);
}

std::vector<double> Datafit::full_gradient(std::span<const double> cache) const {
  return kernels::full_gradient_parallel(*this, cache);
}

}  // namespace sparseglm
