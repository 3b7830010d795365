#include "sparseglm/diagnostics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sparseglm::diagnostics {

namespace {

struct GapTerms {
  double l1;     // weight of |beta|
  double ridge;  // weight of beta^2 / 2
};

GapTerms gap_terms(const Penalty& penalty) {
  if (penalty.is_block()) throw std::invalid_argument("duality gap: block penalties are not supported");
  if (const auto* l1 = std::get_if<L1>(&penalty.scalar())) return {l1->lambda, 0.0};
  if (const auto* en = std::get_if<ElasticNet>(&penalty.scalar()))
    return {en->lambda * en->rho, en->lambda * (1.0 - en->rho)};
  throw std::invalid_argument("duality gap is only available for L1 and elastic-net penalties");
}

GapCertificate gap_at(const Dataset& data, const Penalty& penalty, const GapTerms& terms,
                      std::span<const double> beta) {
  const int n = data.n_samples(), p = data.n_features();
  const auto& y = data.y.values;
  const auto fitted = data.X.multiply(beta);

  std::vector<double> u(n);
  double primal = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = y[i] - fitted[i];
    primal += r * r;
    u[i] = r / n;
  }
  primal /= 2.0 * n;
  for (int j = 0; j < p; ++j) primal += penalty.value(beta[j]);

  const auto corr = data.X.transpose_multiply(u);
  double conj = 0.0;
  if (terms.ridge > 0.0) {
    for (double c : corr) {
      const double excess = std::max(0.0, std::abs(c) - terms.l1);
      conj += excess * excess / (2.0 * terms.ridge);
    }
  } else {
    double worst = 0.0;
    for (double c : corr) worst = std::max(worst, std::abs(c));
    if (worst > 0.0 && !(terms.l1 > 0.0))
      throw std::invalid_argument("duality gap needs lambda > 0 without a ridge term");
    const double scale = std::max(1.0, worst / terms.l1);
    for (double& v : u) v /= scale;
  }
  double uy = 0.0, uu = 0.0;
  for (int i = 0; i < n; ++i) {
    uy += u[i] * y[i];
    uu += u[i] * u[i];
  }
  const double dual = uy - 0.5 * n * uu - conj;
  return {primal, dual, primal - dual, 0.0};
}

}  // namespace

GapCertificate duality_gap(const Dataset& data, const Penalty& penalty, std::span<const double> beta) {
  if (data.y.n_tasks != 1) throw std::invalid_argument("duality gap: single-task targets only");
  if (beta.size() != static_cast<std::size_t>(data.n_features()))
    throw std::invalid_argument("duality gap: beta length must equal n_features");
  const GapTerms terms = gap_terms(penalty);
  GapCertificate cert = gap_at(data, penalty, terms, beta);
  const std::vector<double> zero(data.n_features(), 0.0);
  const double gap0 = gap_at(data, penalty, terms, zero).gap;
  cert.normalized_gap = gap0 > 0.0 ? cert.gap / gap0 : cert.gap;
  return cert;
}

std::optional<int> identification_epoch(const std::vector<std::vector<int>>& gsupp_history) {
  if (gsupp_history.empty()) return std::nullopt;
  const auto& last = gsupp_history.back();
  const int n = static_cast<int>(gsupp_history.size());
  if (n >= 2 && gsupp_history[n - 2] != last) return std::nullopt;
  int k = n - 1;
  while (k > 0 && gsupp_history[k - 1] == last) --k;
  return k;
}

namespace {

struct SupportSystem {
  std::vector<int> support;
  Eigen::MatrixXd H;
  Eigen::VectorXd gamma;     // 1 / L_s
  Eigen::VectorXd curv;      // g''(beta_s)
};

SupportSystem support_system(const Datafit& datafit, const Penalty& penalty, std::span<const double> beta_hat) {
  if (datafit.kind() != DatafitKind::quadratic)
    throw std::invalid_argument("CD Jacobian diagnostic needs the quadratic datafit");
  if (beta_hat.size() != static_cast<std::size_t>(datafit.n_coords()))
    throw std::invalid_argument("beta_hat length must equal n_features");
  SupportSystem sys;
  for (int j = 0; j < datafit.n_coords(); ++j)
    if (penalty.in_gsupp(beta_hat[j]) && datafit.lipschitz()[j] > 0.0) sys.support.push_back(j);
  const int s = static_cast<int>(sys.support.size());
  const DesignMatrix& X = datafit.design();
  const int n = X.n_samples();

  sys.H.resize(s, s);
  sys.gamma.resize(s);
  sys.curv.resize(s);
  std::vector<double> col(n);
  for (int a = 0; a < s; ++a) {
    std::fill(col.begin(), col.end(), 0.0);
    X.col_axpy(sys.support[a], 1.0, col);
    for (int b = 0; b < s; ++b) sys.H(b, a) = X.col_dot(sys.support[b], col) / n;
    sys.gamma(a) = 1.0 / datafit.lipschitz()[sys.support[a]];
    sys.curv(a) = penalty.second_derivative(beta_hat[sys.support[a]]);
    if (!(1.0 + sys.gamma(a) * sys.curv(a) > 0.0))
      throw std::domain_error("prox is not differentiable on the support (1 + g''/L <= 0)");
  }
  sys.H += sys.curv.asDiagonal();
  return sys;
}

Eigen::MatrixXd sweep_product(const std::vector<Eigen::MatrixXd>& factors, Sweep sweep) {
  const Eigen::Index s = factors.empty() ? 0 : factors.front().rows();
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(s, s);
  for (const auto& F : factors) A = F * A;  // F_s ... F_1
  if (sweep == Sweep::symmetric) {
    Eigen::MatrixXd back = Eigen::MatrixXd::Identity(s, s);
    for (const auto& F : factors) back = back * F;  // F_1 ... F_s
    A = back * A;
  }
  return A;
}

}  // namespace

double spectral_radius(const Eigen::MatrixXd& A) {
  if (A.rows() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

JacobianReport cd_jacobian_spectral_radius(const Datafit& datafit, const Penalty& penalty,
                                           std::span<const double> beta_hat, Sweep sweep) {
  SupportSystem sys = support_system(datafit, penalty, beta_hat);
  const Eigen::Index s = sys.H.rows();
  JacobianReport rep;
  rep.support = sys.support;
  rep.H = sys.H;
  if (s == 0) {
    rep.rho = 0.0;
    return rep;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sys.H);
  if (!(eig.eigenvalues().minCoeff() > 0.0))
    throw std::domain_error("Hessian restricted to the generalized support is not positive definite");
  const Eigen::MatrixXd root = eig.operatorSqrt();
  const Eigen::MatrixXd inv_root = eig.operatorInverseSqrt();

  std::vector<Eigen::MatrixXd> factors;
  factors.reserve(s);
  for (Eigen::Index a = 0; a < s; ++a) {
    const double w = sys.gamma(a) / (1.0 + sys.gamma(a) * sys.curv(a));
    const Eigen::VectorXd m = root.col(a);
    factors.push_back(Eigen::MatrixXd::Identity(s, s) - w * m * m.transpose());
  }
  rep.T = inv_root * sweep_product(factors, sweep) * root;
  rep.rho = spectral_radius(rep.T);
  return rep;
}

Eigen::MatrixXd cd_jacobian_direct(const Datafit& datafit, const Penalty& penalty,
                                   std::span<const double> beta_hat, Sweep sweep) {
  SupportSystem sys = support_system(datafit, penalty, beta_hat);
  const Eigen::Index s = sys.H.rows();
  std::vector<Eigen::MatrixXd> factors;
  for (Eigen::Index a = 0; a < s; ++a) {
    const double w = sys.gamma(a) / (1.0 + sys.gamma(a) * sys.curv(a));
    Eigen::MatrixXd F = Eigen::MatrixXd::Identity(s, s);
    F.row(a) -= w * sys.H.row(a);
    factors.push_back(std::move(F));
  }
  return sweep_product(factors, sweep);
}

double anderson_rate_bound_kappa(double kappa, double rho_T, int M) {
  if (!(rho_T >= 0.0 && rho_T < 1.0)) throw std::invalid_argument("rho_T must lie in [0, 1)");
  if (M < 1) throw std::invalid_argument("M must be >= 1");
  if (!(kappa >= 1.0)) throw std::invalid_argument("condition number must be >= 1");
  const double root = std::sqrt(1.0 - rho_T);
  const double zeta = (1.0 - root) / (1.0 + root);
  const double zm = std::pow(zeta, M - 1);
  return std::pow(std::sqrt(kappa) * 2.0 * zm / (1.0 + zm * zm), 1.0 / M);
}

double anderson_rate_bound(const Eigen::MatrixXd& H, double rho_T, int M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  if (ev.size() == 0 || !(ev.minCoeff() > 0.0)) throw std::invalid_argument("H must be positive definite");
  return anderson_rate_bound_kappa(ev.maxCoeff() / ev.minCoeff(), rho_T, M);
}

double measured_contraction(const Datafit& datafit, const Penalty& penalty, std::span<const double> beta_hat,
                            std::span<const double> beta_start, int n_epochs, bool accelerated, Sweep sweep,
                            int window, double floor) {
  std::vector<double> beta(beta_start.begin(), beta_start.end());
  std::vector<double> cache = datafit.init_cache(beta);
  std::vector<int> all(datafit.n_coords());
  std::iota(all.begin(), all.end(), 0);

  auto error = [&] {
    double acc = 0.0;
    for (std::size_t k = 0; k < beta.size(); ++k) acc += (beta[k] - beta_hat[k]) * (beta[k] - beta_hat[k]);
    return std::sqrt(acc);
  };
  std::vector<double> errors{error()};
  SolverConfig cfg;
  cfg.use_acceleration = accelerated;
  cfg.symmetric_sweep = sweep == Sweep::symmetric;
  inner_solve(datafit, penalty, beta, cache, all, n_epochs, 0.0, cfg, nullptr,
              [&](int, bool) { errors.push_back(error()); });

  int last = static_cast<int>(errors.size()) - 1;
  while (last > 0 && !(errors[last] > floor)) --last;
  const int first = std::max(0, last - window);
  if (last == first || errors[first] == 0.0) return 0.0;
  return std::pow(errors[last] / errors[first], 1.0 / (last - first));
}

}  // namespace sparseglm::diagnostics
