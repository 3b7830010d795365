#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sparseglm {

/// Compressed-sparse-column arrays. `col_ptr` has length p+1.
struct CscArrays {
  std::vector<int> col_ptr;
  std::vector<int> row_idx;
  std::vector<double> values;
};

/// Design matrix X (n x p), either dense column-major or CSC.
///
/// Coordinate descent only touches X through column operations, so both
/// layouts expose the same column-oriented kernel set. Instances are
/// immutable after construction.
class DesignMatrix {
 public:
  enum class Storage { dense, csc };

  DesignMatrix() = default;

  /// Dense column-major data, `data[j * n + i] = X(i, j)`.
  static DesignMatrix dense(int n_samples, int n_features, std::vector<double> data);
  /// Dense from row-major data, `data[i * p + j] = X(i, j)`.
  static DesignMatrix dense_from_row_major(int n_samples, int n_features,
                                           std::span<const double> data);
  /// Validates the CSC invariants and throws std::invalid_argument on failure.
  static DesignMatrix csc(int n_samples, int n_features, CscArrays arrays);

  Storage storage() const { return storage_; }
  bool is_sparse() const { return storage_ == Storage::csc; }
  int n_samples() const { return n_; }
  int n_features() const { return p_; }
  std::size_t nnz() const;

  double operator()(int i, int j) const;

  /// X_{:j}^T v, with v of length n.
  double col_dot(int j, std::span<const double> v) const;
  /// v += a * X_{:j}.
  void col_axpy(int j, double a, std::span<double> v) const;
  /// ||X_{:j}||^2.
  double col_squared_norm(int j) const;

  /// sum_i X_ij * f(i) over stored entries of column j.
  template <class F>
  double col_reduce(int j, F&& f) const {
    double acc = 0.0;
    if (storage_ == Storage::dense) {
      const double* col = dense_.data() + static_cast<std::size_t>(j) * n_;
      for (int i = 0; i < n_; ++i) acc += col[i] * f(i);
    } else {
      for (int k = csc_.col_ptr[j]; k < csc_.col_ptr[j + 1]; ++k)
        acc += csc_.values[k] * f(csc_.row_idx[k]);
    }
    return acc;
  }

  /// X * beta.
  std::vector<double> multiply(std::span<const double> beta) const;
  /// X^T v.
  std::vector<double> transpose_multiply(std::span<const double> v) const;

  /// Returns the p x n transpose with column i scaled by `row_scale[i]`
  /// (empty span means no scaling). Storage kind is preserved.
  DesignMatrix scaled_transpose(std::span<const double> row_scale = {}) const;
  /// Returns a copy with column j multiplied by `scale[j]`.
  DesignMatrix scale_columns(std::span<const double> scale) const;

  DesignMatrix to_csc() const;
  DesignMatrix to_dense() const;

  const std::vector<double>& dense_data() const { return dense_; }
  const CscArrays& csc_arrays() const { return csc_; }

 private:
  Storage storage_ = Storage::dense;
  int n_ = 0;
  int p_ = 0;
  std::vector<double> dense_;
  CscArrays csc_;
};

/// ||X_{:j}||^2 for every column.
std::vector<double> column_squared_norms(const DesignMatrix& X);

}  // namespace sparseglm
