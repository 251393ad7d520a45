#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "modeshape/observation.hpp"

namespace modeshape {

struct KMeansResult {
  std::vector<std::size_t> assignment;
  Eigen::MatrixXd centroids;        // k x D
  double wcss = 0.0;
  std::vector<double> wcss_history;  // after every assignment and update step
  int iterations = 0;
  bool converged = false;
};

/// k-means++ seeding, deterministic for a given seed.
Eigen::MatrixXd kmeans_plus_plus(const Eigen::Ref<const Eigen::MatrixXd>& points, std::size_t k,
                                 std::uint64_t seed);

/// Lloyd iterations from k-means++ seeding. Stops when no assignment
/// changes or after `max_iterations`. Empty clusters are re-seeded with the
/// point farthest from its centroid. Throws TooManyClusters if k > Q.
KMeansResult kmeans(const Eigen::Ref<const Eigen::MatrixXd>& points, std::size_t k, std::uint64_t seed,
                    int max_iterations = 300);

/// Lloyd iterations from explicit initial centroids (k x D).
KMeansResult kmeans_from(const Eigen::Ref<const Eigen::MatrixXd>& points,
                         const Eigen::MatrixXd& initial_centroids, int max_iterations = 300);

/// Mean silhouette with Euclidean distances; members of singleton clusters
/// score 0. Throws UndefinedSilhouette with fewer than two clusters.
double silhouette_score(const Eigen::Ref<const Eigen::MatrixXd>& points,
                        const std::vector<std::size_t>& assignment);

/// Per-dimension affine map x -> (x - center) / scale used before k-means.
struct DimensionScaling {
  Eigen::VectorXd center;
  Eigen::VectorXd scale;

  Eigen::MatrixXd apply(const Eigen::Ref<const Eigen::MatrixXd>& points) const;
  Eigen::VectorXd invert(const Eigen::Ref<const Eigen::VectorXd>& scaled) const;
};

/// Q x (2M+2) matrix of observation points plus the scaling applied to it.
struct ObservationMatrix {
  Eigen::MatrixXd points;
  DimensionScaling scaling;

  /// Standardizes each column to zero mean and unit variance; a column's
  /// scale is never taken below `scale_floor`.
  static ObservationMatrix build(const ObservationSet& observations, double scale_floor);
  Eigen::MatrixXd scaled() const { return scaling.apply(points); }
};

struct ModeEstimate {
  double frequency_hz = 0.0;
  double decay_rate = 0.0;
  std::vector<std::complex<double>> shape;
  std::size_t member_count = 0;
  std::vector<std::size_t> member_indices;  // into the ObservationSet
  std::vector<double> dispersion;           // per-dimension std of members
  Eigen::MatrixXd members;                  // member points, original units

  std::vector<double> as_point() const;
};

struct ClusteringConfig {
  std::size_t k_min = 2;
  std::size_t k_max = 10;
  std::size_t n_init = 10;
  std::uint64_t seed = 0;
  int max_iterations = 300;
  double min_silhouette = 0.25;  // below this, everything is one cluster
  double scale_floor = 1e-2;
};

struct ClusteringResult {
  std::vector<ModeEstimate> estimates;  // member_count descending
  std::size_t chosen_k = 0;
  std::vector<std::pair<std::size_t, double>> silhouette_by_k;
  bool low_confidence = false;
  DimensionScaling scaling;
};

/// Part II: k-means for every k in [k_min, min(k_max, Q-1)], keep the best
/// of n_init restarts per k, pick the k with the highest mean silhouette.
/// Throws NoObservations when the set is empty.
ClusteringResult select_and_cluster(const ObservationSet& observations, const ClusteringConfig& cfg = {});

/// Merges estimates whose frequencies differ by less than freq_tol_hz and
/// whose shapes agree within angle_tol_deg per phasor after the best global
/// rotation. Repeats until no pair merges.
std::vector<ModeEstimate> merge_replicates(std::vector<ModeEstimate> estimates, double angle_tol_deg = 15.0,
                                           double freq_tol_hz = 0.05);

/// Optimal e^{j theta} minimizing sum |a_i - e^{j theta} b_i|^2.
std::complex<double> best_rotation(const std::vector<std::complex<double>>& a,
                                   const std::vector<std::complex<double>>& b);

/// Estimate index per observation, or SIZE_MAX if unassigned.
std::vector<std::size_t> assignment_of(const std::vector<ModeEstimate>& estimates, std::size_t q);

struct EstimatesDocument {
  std::vector<std::string> channel_ids;
  ClusteringResult result;
  bool merged = false;
  std::string generated_at;  // omitted when empty
};

void write_estimates(const EstimatesDocument& doc, std::ostream& out);

/// Reads back the fields needed for reporting (members are not stored).
EstimatesDocument read_estimates(std::istream& in);

}  // namespace modeshape
