#include "sparseglm/kernels.hpp"

#include <array>
#include <stdexcept>

namespace sparseglm::kernels {

std::vector<double> column_squared_norms_serial(const DesignMatrix& X) {
  std::vector<double> out(X.n_features());
  for (int j = 0; j < X.n_features(); ++j) out[j] = X.col_squared_norm(j);
  return out;
}

std::vector<double> column_squared_norms_parallel(const DesignMatrix& X) {
  const int p = X.n_features();
  std::vector<double> out(p);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < p; ++j) out[j] = X.col_squared_norm(j);
  return out;
}

namespace {

void gradient_into(const Datafit& datafit, std::span<const double> cache, int j, double* out) {
  const int T = datafit.block_size();
  if (T == 1)
    *out = datafit.gradient_coord(cache, j);
  else
    datafit.gradient_block(cache, j, std::span<double>(out, T));
}

}  // namespace

std::vector<double> full_gradient_serial(const Datafit& datafit, std::span<const double> cache) {
  const int p = datafit.n_coords(), T = datafit.block_size();
  std::vector<double> grad(static_cast<std::size_t>(p) * T);
  for (int j = 0; j < p; ++j) gradient_into(datafit, cache, j, grad.data() + static_cast<std::size_t>(j) * T);
  return grad;
}

std::vector<double> full_gradient_parallel(const Datafit& datafit, std::span<const double> cache) {
  const int p = datafit.n_coords(), T = datafit.block_size();
  std::vector<double> grad(static_cast<std::size_t>(p) * T);
#pragma omp parallel for schedule(dynamic, 64)
  for (int j = 0; j < p; ++j) gradient_into(datafit, cache, j, grad.data() + static_cast<std::size_t>(j) * T);
  return grad;
}

double coordinate_score(const Datafit& datafit, const Penalty& penalty, std::span<const double> beta,
                        std::span<const double> cache, int j, ScoreKind kind) {
  const double L = datafit.lipschitz()[j];
  if (L == 0.0) return kIneligibleScore;
  const int T = datafit.block_size();
  if (T == 1) {
    const double g = datafit.gradient_coord(cache, j);
    if (kind == ScoreKind::subdiff) return penalty.subdiff_distance(beta[j], -g);
    return L * penalty.fixed_point_score(beta[j], g, L);
  }
  std::vector<double> g(T);
  datafit.gradient_block(cache, j, g);
  const auto row = beta.subspan(static_cast<std::size_t>(j) * T, T);
  if (kind == ScoreKind::subdiff) {
    for (double& v : g) v = -v;
    return penalty.subdiff_distance_block(row, g);
  }
  return L * penalty.fixed_point_score_block(row, g, L);
}

std::vector<double> scores_serial(const Datafit& datafit, const Penalty& penalty,
                                  std::span<const double> beta, std::span<const double> cache,
                                  ScoreKind kind) {
  const int p = datafit.n_coords();
  std::vector<double> scores(p);
  for (int j = 0; j < p; ++j) scores[j] = coordinate_score(datafit, penalty, beta, cache, j, kind);
  return scores;
}

std::vector<double> scores_parallel(const Datafit& datafit, const Penalty& penalty,
                                    std::span<const double> beta, std::span<const double> cache,
                                    ScoreKind kind) {
  const int p = datafit.n_coords();
  std::vector<double> scores(p);
#pragma omp parallel for schedule(dynamic, 64)
  for (int j = 0; j < p; ++j) scores[j] = coordinate_score(datafit, penalty, beta, cache, j, kind);
  return scores;
}

int gsupp_size(const Penalty& penalty, std::span<const double> beta, int block_size) {
  const int p = static_cast<int>(beta.size()) / block_size;
  int count = 0;
  for (int j = 0; j < p; ++j) {
    if (block_size == 1)
      count += penalty.in_gsupp(beta[j]);
    else
      count += penalty.in_gsupp_block(beta.subspan(static_cast<std::size_t>(j) * block_size, block_size));
  }
  return count;
}

}  // namespace sparseglm::kernels
