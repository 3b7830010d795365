#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparseglm/design_matrix.hpp"

namespace sparseglm {

/// Targets: a length-n vector (single task) or an n x T matrix stored
/// column-major (`values[t * n + i]`).
struct Target {
  std::vector<double> values;
  int n_tasks = 1;

  int n_samples() const { return n_tasks > 0 ? static_cast<int>(values.size()) / n_tasks : 0; }
  std::span<const double> task(int t) const {
    const auto n = static_cast<std::size_t>(n_samples());
    return std::span<const double>(values).subspan(t * n, n);
  }
  /// True when every value is exactly -1 or +1.
  bool is_binary() const;
};

struct Dataset {
  DesignMatrix X;
  Target y;

  Dataset() = default;
  /// Throws std::invalid_argument when the row counts disagree.
  Dataset(DesignMatrix X, Target y);

  int n_samples() const { return X.n_samples(); }
  int n_features() const { return X.n_features(); }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Reads `<label> <idx>:<val> ...` lines with 1-based strictly increasing
/// indices into a CSC dataset. Blank lines and `#` comments are skipped.
Dataset read_libsvm(std::istream& in, std::optional<int> n_features = std::nullopt);
Dataset read_libsvm(const std::filesystem::path& path,
                    std::optional<int> n_features = std::nullopt);

/// Writes single-task data in libsvm format with full double precision.
void write_libsvm(std::ostream& out, const Dataset& data);
void write_libsvm(const std::filesystem::path& path, const Dataset& data);

struct SyntheticSpec {
  int n_samples = 200;
  int n_features = 400;
  double correlation = 0.6;  // rho in Sigma_{jk} = rho^|j-k|
  int n_nonzero = 40;
  double snr = 5.0;          // ||X beta*|| / ||eps||
  std::uint64_t seed = 0;
  int n_tasks = 1;
};

struct SyntheticProblem {
  Dataset data;
  /// p x T row-major (`true_coef[j * T + t]`); length p when T = 1.
  std::vector<double> true_coef;
};

/// Gaussian design with AR(1) feature correlation, evenly spaced unit
/// coefficients on `n_nonzero` features, and noise rescaled so that
/// ||X beta*|| / ||eps|| equals `snr` exactly. Deterministic given the seed.
SyntheticProblem generate_correlated_gaussian(const SyntheticSpec& spec);

/// Indices of the evenly spaced true support used by the generator.
std::vector<int> evenly_spaced_support(int n_features, int n_nonzero);

/// max_j |X_{:j}^T y| / n; for multitask targets max_j ||X_{:j}^T Y||_2 / n.
double lambda_max(const Dataset& data);

/// Rescales every non-empty column to have Euclidean norm sqrt(n).
/// Returns the scaled dataset; `scales` receives the multipliers if given.
Dataset scale_columns_to_sqrt_n(const Dataset& data, std::vector<double>* scales = nullptr);

}  // namespace sparseglm
