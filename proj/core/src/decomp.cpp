#include "modeshape/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "modeshape/errors.hpp"

namespace modeshape {

namespace {

// Eigenvalues at or below this fraction of the total variance count as zero
// when selecting by variance.
constexpr double kNegligibleVariance = 1e-12;

template <typename Matrix>
void check_input(const Matrix& x, const char* what) {
  if (x.cols() < 2) throw Error(ErrorCode::TooFewSamples, std::string(what) + " needs at least 2 samples");
  if (x.rows() < 1) throw Error(ErrorCode::EmptyInput, std::string(what) + " needs at least one row");
  if (!x.allFinite()) throw Error(ErrorCode::NonFiniteInput, std::string(what) + " input is not finite");
}

std::vector<double> descending(const Eigen::VectorXd& ascending) {
  std::vector<double> out(static_cast<std::size_t>(ascending.size()));
  for (Eigen::Index i = 0; i < ascending.size(); ++i) {
    out[static_cast<std::size_t>(i)] = std::max(0.0, ascending(ascending.size() - 1 - i));
  }
  return out;
}

std::vector<double> fractions(const std::vector<double>& eigenvalues, std::size_t kept) {
  double total = 0.0;
  for (const double v : eigenvalues) total += v;
  std::vector<double> out(kept, 0.0);
  for (std::size_t i = 0; i < kept && total > 0.0; ++i) out[i] = eigenvalues[i] / total;
  return out;
}

template <typename Vector>
Eigen::Index largest_entry(const Vector& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(best))) best = i;
  }
  return best;
}

}  // namespace

ComponentSelection ComponentSelection::count(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::NoComponentsKept, "component count must be at least 1");
  ComponentSelection s;
  s.by_count_ = true;
  s.count_ = n;
  return s;
}

ComponentSelection ComponentSelection::variance(double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "variance threshold must lie in (0, 1]");
  }
  ComponentSelection s;
  s.threshold_ = fraction;
  return s;
}

std::size_t ComponentSelection::resolve(const std::vector<double>& eigenvalues) const {
  double total = 0.0;
  for (const double v : eigenvalues) total += v;
  if (!(total > 0.0)) return 0;
  if (by_count_) return std::min(count_, eigenvalues.size());

  double cumulative = 0.0;
  std::size_t kept = 0;
  for (const double v : eigenvalues) {
    if (v <= kNegligibleVariance * total) break;
    cumulative += v;
    ++kept;
    if (cumulative >= (threshold_ - 1e-12) * total) break;
  }
  return kept;
}

PcaResult pca(const Eigen::Ref<const Eigen::MatrixXd>& x, const ComponentSelection& keep) {
  check_input(x, "PCA");
  const double n = static_cast<double>(x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).sum() / n;
    const double scale = x.row(i).cwiseAbs().maxCoeff();
    if (std::abs(mean) > 1e-9 * scale) {
      throw Error(ErrorCode::NonZeroMean, "PCA input row " + std::to_string(i) + " is not zero-mean");
    }
  }

  const Eigen::MatrixXd covariance = (x * x.transpose()) / (n - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::NonFiniteInput, "PCA eigensolver failed");

  PcaResult result;
  result.eigenvalues = descending(solver.eigenvalues());
  const std::size_t kept = keep.resolve(result.eigenvalues);
  if (kept == 0) throw Error(ErrorCode::NoComponentsKept, "input has no variance");

  const auto m = x.rows();
  result.components.resize(m, static_cast<Eigen::Index>(kept));
  for (std::size_t j = 0; j < kept; ++j) {
    Eigen::VectorXd v = solver.eigenvectors().col(m - 1 - static_cast<Eigen::Index>(j));
    if (v(largest_entry(v)) < 0.0) v = -v;
    result.components.col(static_cast<Eigen::Index>(j)) = v;
  }
  result.scores = result.components.transpose() * x;
  result.variance_fractions = fractions(result.eigenvalues, kept);
  return result;
}

CpcaResult cpca(const Eigen::Ref<const Eigen::MatrixXcd>& y, const ComponentSelection& keep) {
  check_input(y, "CPCA");
  const double n = static_cast<double>(y.cols());
  const Eigen::MatrixXcd covariance = (y * y.adjoint()) / (n - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(covariance);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::NonFiniteInput, "CPCA eigensolver failed");

  CpcaResult result;
  result.eigenvalues = descending(solver.eigenvalues());
  const std::size_t kept = keep.resolve(result.eigenvalues);
  if (kept == 0) throw Error(ErrorCode::NoComponentsKept, "input has no variance");

  const auto m = y.rows();
  result.components.resize(m, static_cast<Eigen::Index>(kept));
  for (std::size_t j = 0; j < kept; ++j) {
    Eigen::VectorXcd v = solver.eigenvectors().col(m - 1 - static_cast<Eigen::Index>(j));
    const std::complex<double> pivot = v(largest_entry(v));
    v *= std::conj(pivot) / std::abs(pivot);
    result.components.col(static_cast<Eigen::Index>(j)) = v;
  }
  result.scores = result.components.adjoint() * y;
  result.variance_fractions = fractions(result.eigenvalues, kept);
  return result;
}

TwoLayerResult two_layer(const Eigen::Ref<const Eigen::MatrixXd>& x, double sample_rate_hz,
                         const TwoLayerConfig& cfg) {
  TwoLayerResult result;
  result.pca = pca(x, cfg.keep_pca);

  const auto kept = result.pca.scores.rows();
  const auto n = result.pca.scores.cols();
  result.taper_offset = taper_count(static_cast<std::size_t>(n), cfg.taper_fraction);
  result.residuals.resize(kept, n);

  for (Eigen::Index j = 0; j < kept; ++j) {
    const Eigen::VectorXd score = result.pca.scores.row(j).transpose();
    const auto decomposition = emd(std::span<const double>(score.data(), static_cast<std::size_t>(n)),
                                   sample_rate_hz, cfg.emd);
    RealSeries detrended(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) {
      result.residuals(j, k) = decomposition.residual[static_cast<std::size_t>(k)];
      detrended[static_cast<std::size_t>(k)] = score(k) - decomposition.residual[static_cast<std::size_t>(k)];
    }
    const auto tapered = taper_ends(analytic_signal(detrended), cfg.taper_fraction);
    if (j == 0) result.analytic.resize(kept, static_cast<Eigen::Index>(tapered.size()));
    for (std::size_t k = 0; k < tapered.size(); ++k) {
      result.analytic(j, static_cast<Eigen::Index>(k)) = tapered[k];
    }
  }

  result.cpca = cpca(result.analytic, cfg.keep_cpca);
  result.w = result.pca.components.cast<std::complex<double>>() * result.cpca.components;
  result.z = result.cpca.scores;
  return result;
}

}  // namespace modeshape
