#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

#include "sparseglm/datafit.hpp"
#include "sparseglm/dataset.hpp"
#include "sparseglm/penalty.hpp"
#include "sparseglm/solver.hpp"

namespace sparseglm::diagnostics {

struct GapCertificate {
  double primal;
  double dual;
  double gap;
  /// gap divided by the gap at beta = 0 (equal to `gap` when that is 0).
  double normalized_gap;
};

/// Duality gap for the quadratic datafit with an L1 or elastic-net penalty.
/// The dual point is the residual over n, rescaled into the dual feasible set
/// when the penalty has no ridge part. Throws std::invalid_argument for
/// other penalties or multitask targets.
GapCertificate duality_gap(const Dataset& data, const Penalty& penalty, std::span<const double> beta);

/// First index k such that gsupp_history[k..] are all equal. nullopt for an
/// empty history or when the last transition still changes the support.
std::optional<int> identification_epoch(const std::vector<std::vector<int>>& gsupp_history);

enum class Sweep { forward, symmetric };

struct JacobianReport {
  double rho;                 // spectral radius of T
  Eigen::MatrixXd T;          // Jacobian of one CD sweep restricted to the support
  Eigen::MatrixXd H;          // Hessian of Phi restricted to the support
  std::vector<int> support;   // generalized support used, in sweep order
};

/// Jacobian of the CD fixed-point map at a critical point of a quadratic
/// problem, built as M^{-1/2} (Id - B^(|S|)) ... (Id - B^(1)) M^{1/2} with
/// M the Hessian on the generalized support and B^(s) the rank-one factors
/// gamma_s / (1 + gamma_s g''(beta_s)) m_s m_s^T, gamma_s = 1 / L_s.
/// Throws std::invalid_argument for non-quadratic datafits and
/// std::domain_error when g is not twice differentiable on the support or M
/// is not positive definite.
JacobianReport cd_jacobian_spectral_radius(const Datafit& datafit, const Penalty& penalty,
                                           std::span<const double> beta_hat, Sweep sweep = Sweep::forward);

/// Same Jacobian composed directly from the linearized coordinate updates
/// Id - e_s e_s^T H / (L_s (1 + g''_s / L_s)); used to cross-check the
/// symmetrized construction.
Eigen::MatrixXd cd_jacobian_direct(const Datafit& datafit, const Penalty& penalty,
                                   std::span<const double> beta_hat, Sweep sweep = Sweep::forward);

double spectral_radius(const Eigen::MatrixXd& A);

/// Per-iteration factor (sqrt(kappa(H)) 2 zeta^{M-1} / (1 + zeta^{2(M-1)}))^{1/M}
/// with zeta = (1 - sqrt(1 - rho)) / (1 + sqrt(1 - rho)).
/// Throws std::invalid_argument when rho_T is outside [0, 1) or M < 1.
double anderson_rate_bound(const Eigen::MatrixXd& H, double rho_T, int M);
double anderson_rate_bound_kappa(double kappa, double rho_T, int M);

/// Runs `n_epochs` CD epochs from `beta_start` on all coordinates (plain or
/// with Anderson extrapolation) and returns the geometric-mean per-epoch
/// contraction of ||beta - beta_hat|| over the last `window` epochs whose
/// error stays above `floor`.
double measured_contraction(const Datafit& datafit, const Penalty& penalty, std::span<const double> beta_hat,
                            std::span<const double> beta_start, int n_epochs, bool accelerated,
                            Sweep sweep = Sweep::forward, int window = 10, double floor = 1e-11);

}  // namespace sparseglm::diagnostics
