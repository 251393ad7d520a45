#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "modeshape/sigproc.hpp"

namespace modeshape {

/// How many leading components to keep: a fixed count, or the smallest
/// count whose cumulative variance fraction reaches a threshold. Components
/// with zero variance are never kept.
class ComponentSelection {
 public:
  static ComponentSelection count(std::size_t n);
  static ComponentSelection variance(double fraction);
  static ComponentSelection all() { return variance(1.0); }

  std::size_t resolve(const std::vector<double>& eigenvalues) const;

  bool is_count() const { return by_count_; }
  std::size_t fixed_count() const { return count_; }
  double threshold() const { return threshold_; }

 private:
  bool by_count_ = false;
  std::size_t count_ = 0;
  double threshold_ = 0.95;
};

struct PcaResult {
  Eigen::MatrixXd components;              // M x M_PC, orthonormal columns
  Eigen::MatrixXd scores;                  // M_PC x N
  std::vector<double> eigenvalues;         // descending, all M of them
  std::vector<double> variance_fractions;  // per kept component
};

struct CpcaResult {
  Eigen::MatrixXcd components;             // M_PC x M_CPC, unitary columns
  Eigen::MatrixXcd scores;                 // M_CPC x N'
  std::vector<double> eigenvalues;         // descending, all of them
  std::vector<double> variance_fractions;  // per kept component
};

struct TwoLayerResult {
  Eigen::MatrixXcd w;          // M x M_CPC, W = U V
  Eigen::MatrixXcd z;          // M_CPC x N'
  Eigen::MatrixXd residuals;   // M_PC x N, EMD trend of each kept score
  Eigen::MatrixXcd analytic;   // M_PC x N', tapered analytic scores fed to CPCA
  std::size_t taper_offset = 0;  // samples dropped at the start of the window
  PcaResult pca;
  CpcaResult cpca;
};

/// Real PCA of zero-mean rows via the covariance X X^T / (N - 1). Each
/// eigenvector is signed so its largest-magnitude entry is positive.
PcaResult pca(const Eigen::Ref<const Eigen::MatrixXd>& x,
              const ComponentSelection& keep = ComponentSelection::all());

/// Complex PCA via the Hermitian matrix Y Y^* / (N' - 1); scores Z = V^* Y.
/// Each eigenvector is rotated so its largest-magnitude entry is real positive.
CpcaResult cpca(const Eigen::Ref<const Eigen::MatrixXcd>& y,
                const ComponentSelection& keep = ComponentSelection::all());

struct TwoLayerConfig {
  ComponentSelection keep_pca = ComponentSelection::variance(0.95);
  ComponentSelection keep_cpca = ComponentSelection::variance(0.95);
  double taper_fraction = 0.10;
  EmdConfig emd;
};

/// PCA -> EMD detrend of each score -> analytic signal -> end taper -> CPCA.
/// Rows of x must be zero-mean.
TwoLayerResult two_layer(const Eigen::Ref<const Eigen::MatrixXd>& x, double sample_rate_hz,
                         const TwoLayerConfig& cfg = {});

}  // namespace modeshape
