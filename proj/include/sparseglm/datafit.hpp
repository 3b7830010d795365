#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "sparseglm/dataset.hpp"

namespace sparseglm {

enum class DatafitKind { quadratic, logistic, multitask_quadratic, svm_dual };

std::string_view to_string(DatafitKind kind);
/// Accepts "quadratic", "logistic", "multitask" / "multitask_quadratic", "svm_dual".
DatafitKind parse_datafit_kind(std::string_view name);

/// The smooth term f(beta) = F(X beta) together with its coordinate calculus.
///
/// Coefficients are a p x T matrix stored row-major (one block of T values per
/// coordinate); T = 1 outside the multitask case. The fitted-values cache is
/// owned by the caller and holds X beta column-major (n x T).
///
/// For the SVM dual the roles of samples and features swap: coordinates are
/// the n dual variables alpha_i, the working design is Z with columns
/// y_i X_{i:}, and the cache is the primal vector w = Z alpha in R^p.
///
/// The dataset passed to a factory must outlive the datafit (except for the
/// SVM dual, which owns its transposed design).
class Datafit {
 public:
  static Datafit quadratic(const Dataset& data);
  static Datafit logistic(const Dataset& data);
  static Datafit multitask_quadratic(const Dataset& data);
  static Datafit svm_dual(const Dataset& data);
  static Datafit make(DatafitKind kind, const Dataset& data);

  DatafitKind kind() const { return kind_; }
  /// Number of optimization coordinates (p, or n for the SVM dual).
  int n_coords() const { return design_->n_features(); }
  int block_size() const { return n_tasks_; }
  /// Rows of one cache column (n, or p for the SVM dual).
  int n_rows() const { return design_->n_samples(); }
  std::size_t cache_size() const { return static_cast<std::size_t>(n_rows()) * n_tasks_; }
  /// Matrix whose columns are updated by coordinate moves.
  const DesignMatrix& design() const { return *design_; }

  /// Per-coordinate Lipschitz constants, computed once at construction.
  std::span<const double> lipschitz() const { return lipschitz_; }

  /// Cache for `beta` computed from scratch.
  std::vector<double> init_cache(std::span<const double> beta) const;
  /// cache += design_{:j} delta^T, `delta` of length T.
  void update_cache(int j, std::span<const double> delta, std::span<double> cache) const;

  /// f(beta); `cache` must equal the design applied to `beta`.
  double value(std::span<const double> beta, std::span<const double> cache) const;
  /// grad_j f for single-block datafits (T = 1).
  double gradient_coord(std::span<const double> cache, int j) const;
  /// grad_j f as a block of T values.
  void gradient_block(std::span<const double> cache, int j, std::span<double> out) const;
  /// All coordinate gradients, p * T values; OpenMP-parallel over coordinates.
  std::vector<double> full_gradient(std::span<const double> cache) const;

 private:
  Datafit() = default;

  DatafitKind kind_ = DatafitKind::quadratic;
  int n_tasks_ = 1;
  std::shared_ptr<const DesignMatrix> owned_;  // only for the SVM dual
  const DesignMatrix* design_ = nullptr;
  std::vector<double> targets_;   // y (column-major n x T) or labels
  std::vector<double> xty_;       // X^T y for quadratic kinds, p x T row-major
  std::vector<double> lipschitz_;
};

}  // namespace sparseglm
