#include "sparseglm/design_matrix.hpp"

#include <stdexcept>
#include <string>

#include "sparseglm/kernels.hpp"

namespace sparseglm {

namespace {

void check_dims(int n, int p) {
  if (n <= 0 || p <= 0)
    throw std::invalid_argument("design matrix dimensions must be positive");
}

}  // namespace

DesignMatrix DesignMatrix::dense(int n_samples, int n_features, std::vector<double> data) {
  check_dims(n_samples, n_features);
  if (data.size() != static_cast<std::size_t>(n_samples) * n_features)
    throw std::invalid_argument("dense data size does not match n * p");
  DesignMatrix X;
  X.storage_ = Storage::dense;
  X.n_ = n_samples;
  X.p_ = n_features;
  X.dense_ = std::move(data);
  return X;
}

DesignMatrix DesignMatrix::dense_from_row_major(int n_samples, int n_features,
                                                std::span<const double> data) {
  check_dims(n_samples, n_features);
  if (data.size() != static_cast<std::size_t>(n_samples) * n_features)
    throw std::invalid_argument("dense data size does not match n * p");
  std::vector<double> col_major(data.size());
  for (int i = 0; i < n_samples; ++i)
    for (int j = 0; j < n_features; ++j)
      col_major[static_cast<std::size_t>(j) * n_samples + i] =
          data[static_cast<std::size_t>(i) * n_features + j];
  return dense(n_samples, n_features, std::move(col_major));
}

DesignMatrix DesignMatrix::csc(int n_samples, int n_features, CscArrays arrays) {
  check_dims(n_samples, n_features);
  const auto& ptr = arrays.col_ptr;
  if (ptr.size() != static_cast<std::size_t>(n_features) + 1)
    throw std::invalid_argument("CSC col_ptr must have length p + 1");
  if (ptr.front() != 0) throw std::invalid_argument("CSC col_ptr must start at 0");
  if (arrays.row_idx.size() != arrays.values.size())
    throw std::invalid_argument("CSC row_idx and values differ in length");
  if (static_cast<std::size_t>(ptr.back()) != arrays.values.size())
    throw std::invalid_argument("CSC col_ptr last entry must equal nnz");
  for (int j = 0; j < n_features; ++j) {
    if (ptr[j + 1] < ptr[j]) throw std::invalid_argument("CSC col_ptr must be non-decreasing");
    for (int k = ptr[j]; k < ptr[j + 1]; ++k) {
      const int r = arrays.row_idx[k];
      if (r < 0 || r >= n_samples)
        throw std::invalid_argument("CSC row index out of range in column " + std::to_string(j));
      if (k > ptr[j] && arrays.row_idx[k - 1] >= r)
        throw std::invalid_argument("CSC row indices must be strictly increasing in column " +
                                    std::to_string(j));
    }
  }
  DesignMatrix X;
  X.storage_ = Storage::csc;
  X.n_ = n_samples;
  X.p_ = n_features;
  X.csc_ = std::move(arrays);
  return X;
}

std::size_t DesignMatrix::nnz() const {
  if (storage_ == Storage::csc) return csc_.values.size();
  std::size_t count = 0;
  for (double v : dense_) count += (v != 0.0);
  return count;
}

double DesignMatrix::operator()(int i, int j) const {
  if (storage_ == Storage::dense) return dense_[static_cast<std::size_t>(j) * n_ + i];
  for (int k = csc_.col_ptr[j]; k < csc_.col_ptr[j + 1]; ++k) {
    if (csc_.row_idx[k] == i) return csc_.values[k];
    if (csc_.row_idx[k] > i) break;
  }
  return 0.0;
}

double DesignMatrix::col_dot(int j, std::span<const double> v) const {
  return col_reduce(j, [&](int i) { return v[i]; });
}

void DesignMatrix::col_axpy(int j, double a, std::span<double> v) const {
  if (storage_ == Storage::dense) {
    const double* col = dense_.data() + static_cast<std::size_t>(j) * n_;
    for (int i = 0; i < n_; ++i) v[i] += a * col[i];
  } else {
    for (int k = csc_.col_ptr[j]; k < csc_.col_ptr[j + 1]; ++k)
      v[csc_.row_idx[k]] += a * csc_.values[k];
  }
}

double DesignMatrix::col_squared_norm(int j) const {
  double acc = 0.0;
  if (storage_ == Storage::dense) {
    const double* col = dense_.data() + static_cast<std::size_t>(j) * n_;
    for (int i = 0; i < n_; ++i) acc += col[i] * col[i];
  } else {
    for (int k = csc_.col_ptr[j]; k < csc_.col_ptr[j + 1]; ++k)
      acc += csc_.values[k] * csc_.values[k];
  }
  return acc;
}

std::vector<double> DesignMatrix::multiply(std::span<const double> beta) const {
  if (beta.size() != static_cast<std::size_t>(p_))
    throw std::invalid_argument("multiply: beta length must equal n_features");
  std::vector<double> out(n_, 0.0);
  for (int j = 0; j < p_; ++j)
    if (beta[j] != 0.0) col_axpy(j, beta[j], out);
  return out;
}

std::vector<double> DesignMatrix::transpose_multiply(std::span<const double> v) const {
  if (v.size() != static_cast<std::size_t>(n_))
    throw std::invalid_argument("transpose_multiply: vector length must equal n_samples");
  std::vector<double> out(p_);
  for (int j = 0; j < p_; ++j) out[j] = col_dot(j, v);
  return out;
}

DesignMatrix DesignMatrix::scaled_transpose(std::span<const double> row_scale) const {
  if (!row_scale.empty() && row_scale.size() != static_cast<std::size_t>(n_))
    throw std::invalid_argument("scaled_transpose: scale length must equal n_samples");
  auto scale = [&](int i) { return row_scale.empty() ? 1.0 : row_scale[i]; };
  if (storage_ == Storage::dense) {
    // Transposed column-major layout equals the original in row-major order.
    std::vector<double> data(dense_.size());
    for (int j = 0; j < p_; ++j)
      for (int i = 0; i < n_; ++i)
        data[static_cast<std::size_t>(i) * p_ + j] =
            scale(i) * dense_[static_cast<std::size_t>(j) * n_ + i];
    return dense(p_, n_, std::move(data));
  }
  CscArrays t;
  t.col_ptr.assign(n_ + 1, 0);
  for (int r : csc_.row_idx) ++t.col_ptr[r + 1];
  for (int i = 0; i < n_; ++i) t.col_ptr[i + 1] += t.col_ptr[i];
  t.row_idx.resize(csc_.row_idx.size());
  t.values.resize(csc_.values.size());
  std::vector<int> next(t.col_ptr.begin(), t.col_ptr.end() - 1);
  for (int j = 0; j < p_; ++j) {
    for (int k = csc_.col_ptr[j]; k < csc_.col_ptr[j + 1]; ++k) {
      const int i = csc_.row_idx[k];
      const int dst = next[i]++;
      t.row_idx[dst] = j;
      t.values[dst] = scale(i) * csc_.values[k];
    }
  }
  return csc(p_, n_, std::move(t));
}

DesignMatrix DesignMatrix::scale_columns(std::span<const double> scale) const {
  if (scale.size() != static_cast<std::size_t>(p_))
    throw std::invalid_argument("scale_columns: scale length must equal n_features");
  DesignMatrix out = *this;
  if (storage_ == Storage::dense) {
    for (int j = 0; j < p_; ++j)
      for (int i = 0; i < n_; ++i) out.dense_[static_cast<std::size_t>(j) * n_ + i] *= scale[j];
  } else {
    for (int j = 0; j < p_; ++j)
      for (int k = csc_.col_ptr[j]; k < csc_.col_ptr[j + 1]; ++k) out.csc_.values[k] *= scale[j];
  }
  return out;
}

DesignMatrix DesignMatrix::to_csc() const {
  if (storage_ == Storage::csc) return *this;
  CscArrays a;
  a.col_ptr.reserve(p_ + 1);
  a.col_ptr.push_back(0);
  for (int j = 0; j < p_; ++j) {
    for (int i = 0; i < n_; ++i) {
      const double v = dense_[static_cast<std::size_t>(j) * n_ + i];
      if (v != 0.0) {
        a.row_idx.push_back(i);
        a.values.push_back(v);
      }
    }
    a.col_ptr.push_back(static_cast<int>(a.values.size()));
  }
  return csc(n_, p_, std::move(a));
}

DesignMatrix DesignMatrix::to_dense() const {
  if (storage_ == Storage::dense) return *this;
  std::vector<double> data(static_cast<std::size_t>(n_) * p_, 0.0);
  for (int j = 0; j < p_; ++j)
    for (int k = csc_.col_ptr[j]; k < csc_.col_ptr[j + 1]; ++k)
      data[static_cast<std::size_t>(j) * n_ + csc_.row_idx[k]] = csc_.values[k];
  return dense(n_, p_, std::move(data));
}

std::vector<double> column_squared_norms(const DesignMatrix& X) {
  return kernels::column_squared_norms_parallel(X);
}

}  // namespace sparseglm
