#include "sparseglm/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <system_error>

namespace sparseglm {

bool Target::is_binary() const {
  return !values.empty() &&
         std::all_of(values.begin(), values.end(), [](double v) { return v == 1.0 || v == -1.0; });
}

Dataset::Dataset(DesignMatrix X_, Target y_) : X(std::move(X_)), y(std::move(y_)) {
  if (y.n_tasks <= 0 || y.values.size() % y.n_tasks != 0)
    throw std::invalid_argument("target size is not a multiple of n_tasks");
  if (y.n_samples() != X.n_samples())
    throw std::invalid_argument("row count of X (" + std::to_string(X.n_samples()) +
                                ") does not match targets (" + std::to_string(y.n_samples()) + ")");
}

namespace {

double parse_double(std::string_view tok, int line) {
  // std::from_chars for double is unavailable on some libstdc++ versions.
  std::string s(tok);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
    throw ParseError("invalid number '" + s + "'", line);
  return v;
}

int parse_index(std::string_view tok, int line) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError("invalid feature index '" + std::string(tok) + "'", line);
  if (v < 1) throw ParseError("feature indices are 1-based, got " + std::to_string(v), line);
  return v;
}

}  // namespace

Dataset read_libsvm(std::istream& in, std::optional<int> n_features) {
  struct Entry {
    int row, col;
    double val;
  };
  std::vector<Entry> entries;
  std::vector<double> labels;
  int max_col = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;
    const int row = static_cast<int>(labels.size());
    labels.push_back(parse_double(tok, line_no));
    int prev = 0;
    while (ss >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) throw ParseError("expected <index>:<value>, got '" + tok + "'", line_no);
      const std::string_view sv(tok);
      const int idx = parse_index(sv.substr(0, colon), line_no);
      if (idx <= prev) throw ParseError("feature indices must be strictly increasing", line_no);
      prev = idx;
      entries.push_back({row, idx - 1, parse_double(sv.substr(colon + 1), line_no)});
      max_col = std::max(max_col, idx);
    }
  }
  if (labels.empty()) throw ParseError("no samples", 0);
  int p = max_col;
  if (n_features) {
    if (*n_features < max_col)
      throw ParseError("n_features override smaller than largest index " + std::to_string(max_col), 0);
    p = *n_features;
  }
  if (p == 0) throw ParseError("no features", 0);

  // Entries arrive row by row; a stable sort by column keeps rows increasing.
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.col < b.col; });
  CscArrays a;
  a.col_ptr.assign(p + 1, 0);
  a.row_idx.reserve(entries.size());
  a.values.reserve(entries.size());
  for (const auto& e : entries) {
    ++a.col_ptr[e.col + 1];
    a.row_idx.push_back(e.row);
    a.values.push_back(e.val);
  }
  for (int j = 0; j < p; ++j) a.col_ptr[j + 1] += a.col_ptr[j];
  const int n = static_cast<int>(labels.size());
  return Dataset(DesignMatrix::csc(n, p, std::move(a)), Target{std::move(labels), 1});
}

Dataset read_libsvm(const std::filesystem::path& path, std::optional<int> n_features) {
  std::ifstream in(path);
  if (!in) throw std::system_error(errno, std::generic_category(), "cannot open " + path.string());
  return read_libsvm(in, n_features);
}

void write_libsvm(std::ostream& out, const Dataset& data) {
  if (data.y.n_tasks != 1) throw std::invalid_argument("libsvm output supports a single task only");
  const DesignMatrix csr = data.X.scaled_transpose().to_csc();  // columns of X^T are rows of X
  const auto& a = csr.csc_arrays();
  out << std::setprecision(17);
  for (int i = 0; i < data.n_samples(); ++i) {
    out << data.y.values[i];
    for (int k = a.col_ptr[i]; k < a.col_ptr[i + 1]; ++k)
      out << ' ' << a.row_idx[k] + 1 << ':' << a.values[k];
    out << '\n';
  }
}

void write_libsvm(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::system_error(errno, std::generic_category(), "cannot open " + path.string());
  write_libsvm(out, data);
}

std::vector<int> evenly_spaced_support(int n_features, int n_nonzero) {
  std::vector<int> support;
  support.reserve(n_nonzero);
  for (int k = 0; k < n_nonzero; ++k)
    support.push_back(static_cast<int>((static_cast<long long>(k) * n_features) / n_nonzero));
  return support;
}

SyntheticProblem generate_correlated_gaussian(const SyntheticSpec& spec) {
  const int n = spec.n_samples, p = spec.n_features, T = spec.n_tasks;
  if (n <= 0 || p <= 0 || T <= 0) throw std::invalid_argument("dimensions must be positive");
  if (spec.n_nonzero < 0 || spec.n_nonzero > p) throw std::invalid_argument("n_nonzero must be in [0, p]");
  if (!(spec.correlation >= 0.0 && spec.correlation < 1.0))
    throw std::invalid_argument("correlation must be in [0, 1)");
  if (!(spec.snr > 0.0) || !std::isfinite(spec.snr)) throw std::invalid_argument("snr must be finite and > 0");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double rho = spec.correlation;
  const double innov = std::sqrt(1.0 - rho * rho);

  std::vector<double> data(static_cast<std::size_t>(n) * p);
  for (int i = 0; i < n; ++i) {
    double prev = normal(rng);
    data[i] = prev;
    for (int j = 1; j < p; ++j) {
      prev = rho * prev + innov * normal(rng);
      data[static_cast<std::size_t>(j) * n + i] = prev;
    }
  }
  DesignMatrix X = DesignMatrix::dense(n, p, std::move(data));

  std::vector<double> coef(static_cast<std::size_t>(p) * T, 0.0);
  for (int j : evenly_spaced_support(p, spec.n_nonzero))
    for (int t = 0; t < T; ++t) coef[static_cast<std::size_t>(j) * T + t] = 1.0;

  std::vector<double> y(static_cast<std::size_t>(n) * T, 0.0);
  for (int j = 0; j < p; ++j)
    for (int t = 0; t < T; ++t)
      if (double c = coef[static_cast<std::size_t>(j) * T + t]; c != 0.0)
        X.col_axpy(j, c, std::span<double>(y).subspan(static_cast<std::size_t>(t) * n, n));

  std::vector<double> noise(y.size());
  for (double& e : noise) e = normal(rng);
  double signal_sq = 0.0, noise_sq = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    signal_sq += y[k] * y[k];
    noise_sq += noise[k] * noise[k];
  }
  const double factor = std::sqrt(signal_sq) / (spec.snr * std::sqrt(noise_sq));
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += factor * noise[k];

  return {Dataset(std::move(X), Target{std::move(y), T}), std::move(coef)};
}

double lambda_max(const Dataset& data) {
  const int n = data.n_samples();
  double best = 0.0;
  for (int j = 0; j < data.n_features(); ++j) {
    double sq = 0.0;
    for (int t = 0; t < data.y.n_tasks; ++t) {
      const double d = data.X.col_dot(j, data.y.task(t));
      sq += d * d;
    }
    best = std::max(best, std::sqrt(sq));
  }
  return best / n;
}

Dataset scale_columns_to_sqrt_n(const Dataset& data, std::vector<double>* scales) {
  const auto norms = column_squared_norms(data.X);
  std::vector<double> s(norms.size(), 1.0);
  const double target = std::sqrt(static_cast<double>(data.n_samples()));
  for (std::size_t j = 0; j < norms.size(); ++j)
    if (norms[j] > 0.0) s[j] = target / std::sqrt(norms[j]);
  Dataset out(data.X.scale_columns(s), data.y);
  if (scales) *scales = std::move(s);
  return out;
}

}  // namespace sparseglm
