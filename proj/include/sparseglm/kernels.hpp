#pragma once

#include <span>
#include <vector>

#include "sparseglm/datafit.hpp"
#include "sparseglm/design_matrix.hpp"
#include "sparseglm/penalty.hpp"

/// Data-parallel kernels over coordinates. Each kernel has a serial
/// reference kept for testing and an OpenMP version used by the library.
/// Both evaluate the same per-coordinate expression, so their outputs agree
/// bit for bit.
namespace sparseglm::kernels {

enum class ScoreKind {
  subdiff,      // dist(-grad_j f, dg_j(beta_j))
  fixed_point,  // L_j * |beta_j - prox_{g_j/L_j}(beta_j - grad_j f / L_j)|
};

/// Score of a coordinate with zero Lipschitz constant; never selected.
inline constexpr double kIneligibleScore = -1.0;

std::vector<double> column_squared_norms_serial(const DesignMatrix& X);
std::vector<double> column_squared_norms_parallel(const DesignMatrix& X);

std::vector<double> full_gradient_serial(const Datafit& datafit, std::span<const double> cache);
std::vector<double> full_gradient_parallel(const Datafit& datafit, std::span<const double> cache);

/// Score of coordinate j (a block of T values when the datafit is multitask).
double coordinate_score(const Datafit& datafit, const Penalty& penalty, std::span<const double> beta,
                        std::span<const double> cache, int j, ScoreKind kind);

std::vector<double> scores_serial(const Datafit& datafit, const Penalty& penalty,
                                  std::span<const double> beta, std::span<const double> cache,
                                  ScoreKind kind);
std::vector<double> scores_parallel(const Datafit& datafit, const Penalty& penalty,
                                    std::span<const double> beta, std::span<const double> cache,
                                    ScoreKind kind);

/// Number of coordinates in the generalized support.
int gsupp_size(const Penalty& penalty, std::span<const double> beta, int block_size);

}  // namespace sparseglm::kernels
