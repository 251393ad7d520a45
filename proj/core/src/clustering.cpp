#include "modeshape/clustering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>

#include "json.hpp"
#include "modeshape/errors.hpp"

namespace modeshape {

namespace {

using OrderedJson = nlohmann::ordered_json;

constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();
constexpr int kHistogramBins = 10;
// Phasors shorter than this fraction of the longest are too small for a
// meaningful angle comparison.
constexpr double kAngleMagnitudeFloor = 0.1;
// Largest distance from the mean, in scaled units, still treated as a single point.
constexpr double kDegenerateSpread = 1e-6;

double squared_distance(const Eigen::Ref<const Eigen::MatrixXd>& points, Eigen::Index row,
                        const Eigen::MatrixXd& centroids, Eigen::Index c) {
  return (points.row(row) - centroids.row(c)).squaredNorm();
}

// Nearest centroid per point; ties go to the lowest centroid index.
double assign(const Eigen::Ref<const Eigen::MatrixXd>& points, const Eigen::MatrixXd& centroids,
              std::vector<std::size_t>& assignment) {
  double wcss = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    Eigen::Index best = 0;
    double best_d = squared_distance(points, i, centroids, 0);
    for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
      const double d = squared_distance(points, i, centroids, c);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    assignment[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
    wcss += best_d;
  }
  return wcss;
}

double wcss_of(const Eigen::Ref<const Eigen::MatrixXd>& points, const Eigen::MatrixXd& centroids,
               const std::vector<std::size_t>& assignment) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    total += squared_distance(points, i, centroids, static_cast<Eigen::Index>(assignment[static_cast<std::size_t>(i)]));
  }
  return total;
}

// Means of the current assignment. An empty cluster takes over the point
// farthest from its own centroid; that point moves with it.
Eigen::MatrixXd update_centroids(const Eigen::Ref<const Eigen::MatrixXd>& points, std::size_t k,
                                 std::vector<std::size_t>& assignment) {
  const auto d = points.cols();
  Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), d);
  std::vector<std::size_t> counts(k, 0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const auto c = assignment[static_cast<std::size_t>(i)];
    centroids.row(static_cast<Eigen::Index>(c)) += points.row(i);
    ++counts[c];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) centroids.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(counts[c]);
  }

  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) continue;
    Eigen::Index farthest = -1;
    double farthest_d = -1.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      const auto owner = assignment[static_cast<std::size_t>(i)];
      if (counts[owner] <= 1) continue;
      const double dist = squared_distance(points, i, centroids, static_cast<Eigen::Index>(owner));
      if (dist > farthest_d) {
        farthest_d = dist;
        farthest = i;
      }
    }
    if (farthest < 0) continue;
    const auto old_owner = assignment[static_cast<std::size_t>(farthest)];
    // Remove the point from its old cluster's mean.
    const double old_count = static_cast<double>(counts[old_owner]);
    centroids.row(static_cast<Eigen::Index>(old_owner)) =
        (centroids.row(static_cast<Eigen::Index>(old_owner)) * old_count - points.row(farthest)) / (old_count - 1.0);
    --counts[old_owner];
    centroids.row(static_cast<Eigen::Index>(c)) = points.row(farthest);
    counts[c] = 1;
    assignment[static_cast<std::size_t>(farthest)] = c;
  }
  return centroids;
}

std::uint64_t sub_seed(std::uint64_t seed, std::size_t k, std::size_t restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(restart)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::vector<double> column_std(const Eigen::MatrixXd& rows) {
  std::vector<double> out(static_cast<std::size_t>(rows.cols()), 0.0);
  if (rows.rows() == 0) return out;
  for (Eigen::Index c = 0; c < rows.cols(); ++c) {
    const double mean = rows.col(c).mean();
    out[static_cast<std::size_t>(c)] = std::sqrt((rows.col(c).array() - mean).square().mean());
  }
  return out;
}

void set_from_point(ModeEstimate& est, const Eigen::VectorXd& point) {
  est.frequency_hz = point(0);
  est.decay_rate = point(1);
  est.shape.clear();
  for (Eigen::Index k = 2; k + 1 < point.size(); k += 2) est.shape.emplace_back(point(k), point(k + 1));
}

void rotate_members(Eigen::MatrixXd& members, std::complex<double> rotation) {
  for (Eigen::Index r = 0; r < members.rows(); ++r) {
    for (Eigen::Index k = 2; k + 1 < members.cols(); k += 2) {
      const auto g = std::complex<double>(members(r, k), members(r, k + 1)) * rotation;
      members(r, k) = g.real();
      members(r, k + 1) = g.imag();
    }
  }
}

void sort_estimates(std::vector<ModeEstimate>& estimates) {
  std::stable_sort(estimates.begin(), estimates.end(), [](const ModeEstimate& a, const ModeEstimate& b) {
    if (a.member_count != b.member_count) return a.member_count > b.member_count;
    return a.frequency_hz < b.frequency_hz;
  });
}

bool are_replicates(const ModeEstimate& a, const ModeEstimate& b, double angle_tol_deg, double freq_tol_hz,
                    std::complex<double>& rotation) {
  if (!(std::abs(a.frequency_hz - b.frequency_hz) < freq_tol_hz)) return false;
  if (a.shape.size() != b.shape.size() || a.shape.empty()) return false;
  rotation = best_rotation(a.shape, b.shape);
  double longest = 0.0;
  for (std::size_t i = 0; i < a.shape.size(); ++i) {
    longest = std::max({longest, std::abs(a.shape[i]), std::abs(b.shape[i])});
  }
  for (std::size_t i = 0; i < a.shape.size(); ++i) {
    if (std::max(std::abs(a.shape[i]), std::abs(b.shape[i])) < kAngleMagnitudeFloor * longest) continue;
    const double diff = std::abs(std::arg(a.shape[i] * std::conj(rotation * b.shape[i]))) * 180.0 / std::numbers::pi;
    if (diff > angle_tol_deg) return false;
  }
  return true;
}

ModeEstimate merge_pair(const ModeEstimate& a, const ModeEstimate& b, std::complex<double> rotation) {
  ModeEstimate merged;
  merged.member_count = a.member_count + b.member_count;
  merged.member_indices = a.member_indices;
  merged.member_indices.insert(merged.member_indices.end(), b.member_indices.begin(), b.member_indices.end());
  std::sort(merged.member_indices.begin(), merged.member_indices.end());

  const bool have_members = a.members.rows() == static_cast<Eigen::Index>(a.member_count) &&
                            b.members.rows() == static_cast<Eigen::Index>(b.member_count) &&
                            a.members.rows() > 0 && b.members.rows() > 0;
  Eigen::VectorXd centroid;
  if (have_members) {
    Eigen::MatrixXd rotated_b = b.members;
    rotate_members(rotated_b, rotation);
    merged.members.resize(a.members.rows() + rotated_b.rows(), a.members.cols());
    merged.members << a.members, rotated_b;
    centroid = merged.members.colwise().mean().transpose();
  } else {
    // Only centroids are known: member-count weighted average.
    ModeEstimate rb = b;
    for (auto& g : rb.shape) g *= rotation;
    const auto pa = a.as_point();
    const auto pb = rb.as_point();
    centroid.resize(static_cast<Eigen::Index>(pa.size()));
    const double wa = static_cast<double>(a.member_count) / static_cast<double>(merged.member_count);
    for (std::size_t k = 0; k < pa.size(); ++k) {
      centroid(static_cast<Eigen::Index>(k)) = wa * pa[k] + (1.0 - wa) * pb[k];
    }
  }
  set_from_point(merged, centroid);

  // Keep the convention that the longest phasor sits at zero angle.
  std::size_t ref = 0;
  for (std::size_t i = 1; i < merged.shape.size(); ++i) {
    if (std::abs(merged.shape[i]) > std::abs(merged.shape[ref])) ref = i;
  }
  if (std::abs(merged.shape[ref]) > 0.0) {
    const auto back = std::polar(1.0, -std::arg(merged.shape[ref]));
    for (auto& g : merged.shape) g *= back;
    if (have_members) rotate_members(merged.members, back);
  }
  merged.dispersion = have_members ? column_std(merged.members)
                                   : std::vector<double>(a.dispersion.size(), 0.0);
  if (!have_members) {
    for (std::size_t k = 0; k < merged.dispersion.size() && k < b.dispersion.size(); ++k) {
      merged.dispersion[k] = std::max(a.dispersion[k], b.dispersion[k]);
    }
  }
  return merged;
}

OrderedJson histogram(const Eigen::Ref<const Eigen::VectorXd>& values) {
  OrderedJson h;
  if (values.size() == 0) {
    h["edges"] = OrderedJson::array();
    h["counts"] = OrderedJson::array();
    return h;
  }
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  const int bins = hi > lo ? kHistogramBins : 1;
  const double width = hi > lo ? (hi - lo) / bins : 1.0;
  std::vector<double> edges;
  for (int b = 0; b <= bins; ++b) edges.push_back(hi > lo ? lo + width * b : lo + (b == 0 ? -0.5 : 0.5));
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    int b = hi > lo ? static_cast<int>((values(i) - lo) / width) : 0;
    b = std::clamp(b, 0, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  h["edges"] = edges;
  h["counts"] = counts;
  return h;
}

}  // namespace

Eigen::MatrixXd kmeans_plus_plus(const Eigen::Ref<const Eigen::MatrixXd>& points, std::size_t k,
                                 std::uint64_t seed) {
  const auto q = static_cast<std::size_t>(points.rows());
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  if (k > q) throw Error(ErrorCode::TooManyClusters, "k = " + std::to_string(k) + " exceeds " + std::to_string(q) + " points");

  std::mt19937_64 rng(seed);
  Eigen::MatrixXd centroids(static_cast<Eigen::Index>(k), points.cols());
  std::vector<bool> chosen(q, false);
  std::uniform_int_distribution<std::size_t> pick(0, q - 1);
  std::size_t first = pick(rng);
  centroids.row(0) = points.row(static_cast<Eigen::Index>(first));
  chosen[first] = true;

  std::vector<double> nearest(q);
  for (std::size_t i = 0; i < q; ++i) nearest[i] = (points.row(static_cast<Eigen::Index>(i)) - centroids.row(0)).squaredNorm();

  for (std::size_t c = 1; c < k; ++c) {
    const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
    std::size_t next = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      next = q - 1;
      for (std::size_t i = 0; i < q; ++i) {
        target -= nearest[i];
        if (target < 0.0 && nearest[i] > 0.0) {
          next = i;
          break;
        }
      }
    } else {
      // All remaining points coincide with a centroid; take the first unused.
      while (next < q && chosen[next]) ++next;
      if (next == q) next = 0;
    }
    chosen[next] = true;
    centroids.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(next));
    for (std::size_t i = 0; i < q; ++i) {
      nearest[i] = std::min(nearest[i], (points.row(static_cast<Eigen::Index>(i)) - centroids.row(static_cast<Eigen::Index>(c))).squaredNorm());
    }
  }
  return centroids;
}

KMeansResult kmeans_from(const Eigen::Ref<const Eigen::MatrixXd>& points, const Eigen::MatrixXd& initial_centroids,
                         int max_iterations) {
  const auto k = static_cast<std::size_t>(initial_centroids.rows());
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  if (k > static_cast<std::size_t>(points.rows())) {
    throw Error(ErrorCode::TooManyClusters, "k = " + std::to_string(k) + " exceeds " +
                                                std::to_string(points.rows()) + " points");
  }
  if (initial_centroids.cols() != points.cols()) {
    throw Error(ErrorCode::InvalidArgument, "centroid dimension differs from the points");
  }

  KMeansResult result;
  result.centroids = initial_centroids;
  result.assignment.assign(static_cast<std::size_t>(points.rows()), 0);
  result.wcss_history.push_back(assign(points, result.centroids, result.assignment));

  while (result.iterations < max_iterations) {
    ++result.iterations;
    auto updated_assignment = result.assignment;
    result.centroids = update_centroids(points, k, updated_assignment);
    result.wcss_history.push_back(wcss_of(points, result.centroids, updated_assignment));

    std::vector<std::size_t> next(updated_assignment.size());
    result.wcss_history.push_back(assign(points, result.centroids, next));
    const bool unchanged = next == result.assignment;
    result.assignment = std::move(next);
    if (unchanged) {
      result.converged = true;
      break;
    }
  }
  // Leave centroids equal to the means of the final assignment.
  result.centroids = update_centroids(points, k, result.assignment);
  result.wcss = wcss_of(points, result.centroids, result.assignment);
  result.wcss_history.push_back(result.wcss);
  return result;
}

KMeansResult kmeans(const Eigen::Ref<const Eigen::MatrixXd>& points, std::size_t k, std::uint64_t seed,
                    int max_iterations) {
  if (k > static_cast<std::size_t>(points.rows())) {
    throw Error(ErrorCode::TooManyClusters, "k = " + std::to_string(k) + " exceeds " +
                                                std::to_string(points.rows()) + " points");
  }
  return kmeans_from(points, kmeans_plus_plus(points, k, seed), max_iterations);
}

double silhouette_score(const Eigen::Ref<const Eigen::MatrixXd>& points, const std::vector<std::size_t>& assignment) {
  const auto q = static_cast<std::size_t>(points.rows());
  if (assignment.size() != q) throw Error(ErrorCode::InvalidArgument, "assignment length differs from point count");
  std::size_t k = 0;
  for (const auto a : assignment) k = std::max(k, a + 1);
  std::vector<std::size_t> sizes(k, 0);
  for (const auto a : assignment) ++sizes[a];
  const auto populated = std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; });
  if (populated < 2) throw Error(ErrorCode::UndefinedSilhouette, "silhouette needs at least two clusters");

  double total = 0.0;
  std::vector<double> sums(k);
  for (std::size_t i = 0; i < q; ++i) {
    const auto own = assignment[i];
    if (sizes[own] <= 1) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < q; ++j) {
      if (j == i) continue;
      sums[assignment[j]] += (points.row(static_cast<Eigen::Index>(i)) - points.row(static_cast<Eigen::Index>(j))).norm();
    }
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c == own || sizes[c] == 0) continue;
      b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(q);
}

Eigen::MatrixXd DimensionScaling::apply(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
  return (points.rowwise() - center.transpose()).array().rowwise() / scale.transpose().array();
}

Eigen::VectorXd DimensionScaling::invert(const Eigen::Ref<const Eigen::VectorXd>& scaled) const {
  return center + scaled.cwiseProduct(scale);
}

ObservationMatrix ObservationMatrix::build(const ObservationSet& observations, double scale_floor) {
  if (observations.empty()) throw Error(ErrorCode::NoObservations, "no observations to cluster");
  const std::size_t dims = 2 * observations.front().channel_count() + 2;
  ObservationMatrix om;
  om.points.resize(static_cast<Eigen::Index>(observations.size()), static_cast<Eigen::Index>(dims));
  for (std::size_t r = 0; r < observations.size(); ++r) {
    const auto p = observations[r].as_point();
    if (p.size() != dims) throw Error(ErrorCode::InvalidArgument, "observations disagree on channel count");
    for (std::size_t c = 0; c < dims; ++c) om.points(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = p[c];
  }
  om.scaling.center = om.points.colwise().mean().transpose();
  const auto spread = column_std(om.points);
  om.scaling.scale.resize(static_cast<Eigen::Index>(dims));
  for (std::size_t c = 0; c < dims; ++c) om.scaling.scale(static_cast<Eigen::Index>(c)) = std::max(spread[c], scale_floor);
  return om;
}

std::vector<double> ModeEstimate::as_point() const {
  std::vector<double> p{frequency_hz, decay_rate};
  for (const auto& g : shape) {
    p.push_back(g.real());
    p.push_back(g.imag());
  }
  return p;
}

ClusteringResult select_and_cluster(const ObservationSet& observations, const ClusteringConfig& cfg) {
  if (observations.empty()) throw Error(ErrorCode::NoObservations, "no observations to cluster");
  if (cfg.k_min < 2 || cfg.k_max < cfg.k_min) throw Error(ErrorCode::InvalidArgument, "need 2 <= k_min <= k_max");
  if (cfg.n_init == 0) throw Error(ErrorCode::InvalidArgument, "n_init must be at least 1");

  const auto om = ObservationMatrix::build(observations, cfg.scale_floor);
  const Eigen::MatrixXd scaled = om.scaled();
  const std::size_t q = observations.size();

  ClusteringResult result;
  result.scaling = om.scaling;

  std::vector<std::size_t> best_assignment(q, 0);
  Eigen::MatrixXd best_centroids = scaled.colwise().mean();
  double best_score = -std::numeric_limits<double>::infinity();
  std::size_t best_k = 1;

  // Points that coincide up to rounding form one cluster; the silhouette
  // would otherwise find structure in the noise.
  const bool degenerate = scaled.rowwise().norm().maxCoeff() < kDegenerateSpread;
  const std::size_t k_hi = degenerate ? 0 : std::min(cfg.k_max, q - 1);
  for (std::size_t k = cfg.k_min; k <= k_hi; ++k) {
    KMeansResult best_run;
    bool have = false;
    for (std::size_t r = 0; r < cfg.n_init; ++r) {
      auto run = kmeans(scaled, k, sub_seed(cfg.seed, k, r), cfg.max_iterations);
      if (!have || run.wcss < best_run.wcss) {
        best_run = std::move(run);
        have = true;
      }
    }
    double score = 0.0;
    try {
      score = silhouette_score(scaled, best_run.assignment);
    } catch (const Error&) {
      continue;
    }
    result.silhouette_by_k.emplace_back(k, score);
    if (score > best_score) {
      best_score = score;
      best_k = k;
      best_assignment = best_run.assignment;
      best_centroids = best_run.centroids;
    }
  }

  if (best_k == 1 || best_score < cfg.min_silhouette) {
    result.low_confidence = !degenerate;
    best_k = 1;
    std::fill(best_assignment.begin(), best_assignment.end(), 0);
    best_centroids = scaled.colwise().mean();
  }
  result.chosen_k = best_k;

  for (std::size_t c = 0; c < best_k; ++c) {
    ModeEstimate est;
    for (std::size_t i = 0; i < q; ++i) {
      if (best_assignment[i] == c) est.member_indices.push_back(i);
    }
    if (est.member_indices.empty()) continue;
    est.member_count = est.member_indices.size();
    est.members.resize(static_cast<Eigen::Index>(est.member_count), om.points.cols());
    for (std::size_t r = 0; r < est.member_count; ++r) {
      est.members.row(static_cast<Eigen::Index>(r)) = om.points.row(static_cast<Eigen::Index>(est.member_indices[r]));
    }
    set_from_point(est, om.scaling.invert(best_centroids.row(static_cast<Eigen::Index>(c)).transpose()));
    est.dispersion = column_std(est.members);
    result.estimates.push_back(std::move(est));
  }
  sort_estimates(result.estimates);
  return result;
}

std::complex<double> best_rotation(const std::vector<std::complex<double>>& a,
                                   const std::vector<std::complex<double>>& b) {
  std::complex<double> cross = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) cross += a[i] * std::conj(b[i]);
  if (std::abs(cross) == 0.0) return 1.0;
  return cross / std::abs(cross);
}

std::vector<ModeEstimate> merge_replicates(std::vector<ModeEstimate> estimates, double angle_tol_deg,
                                           double freq_tol_hz) {
  sort_estimates(estimates);
  bool merged_any = true;
  while (merged_any) {
    merged_any = false;
    for (std::size_t i = 0; i < estimates.size() && !merged_any; ++i) {
      for (std::size_t j = i + 1; j < estimates.size(); ++j) {
        std::complex<double> rotation;
        if (!are_replicates(estimates[i], estimates[j], angle_tol_deg, freq_tol_hz, rotation)) continue;
        estimates[i] = merge_pair(estimates[i], estimates[j], rotation);
        estimates.erase(estimates.begin() + static_cast<std::ptrdiff_t>(j));
        merged_any = true;
        break;
      }
    }
    if (merged_any) sort_estimates(estimates);
  }
  return estimates;
}

std::vector<std::size_t> assignment_of(const std::vector<ModeEstimate>& estimates, std::size_t q) {
  std::vector<std::size_t> out(q, kUnassigned);
  for (std::size_t e = 0; e < estimates.size(); ++e) {
    for (const auto idx : estimates[e].member_indices) {
      if (idx < q) out[idx] = e;
    }
  }
  return out;
}

void write_estimates(const EstimatesDocument& doc, std::ostream& out) {
  const auto& ids = doc.channel_ids;
  OrderedJson root;
  root["format"] = "modeshape-estimates/1";
  if (!doc.generated_at.empty()) root["generated_at"] = doc.generated_at;
  root["channel_ids"] = ids;
  root["chosen_k"] = doc.result.chosen_k;
  root["low_confidence"] = doc.result.low_confidence;
  root["merged_replicates"] = doc.merged;
  auto sil = OrderedJson::array();
  for (const auto& [k, s] : doc.result.silhouette_by_k) sil.push_back({{"k", k}, {"score", s}});
  root["silhouette_by_k"] = std::move(sil);
  OrderedJson scaling;
  scaling["center"] = std::vector<double>(doc.result.scaling.center.data(),
                                          doc.result.scaling.center.data() + doc.result.scaling.center.size());
  scaling["scale"] = std::vector<double>(doc.result.scaling.scale.data(),
                                         doc.result.scaling.scale.data() + doc.result.scaling.scale.size());
  root["scaling"] = std::move(scaling);

  auto list = OrderedJson::array();
  for (const auto& est : doc.result.estimates) {
    if (est.shape.size() != ids.size()) {
      throw Error(ErrorCode::InvalidArgument, "estimate shape length differs from channel ids");
    }
    OrderedJson e;
    e["frequency_hz"] = est.frequency_hz;
    e["decay_rate"] = est.decay_rate;
    OrderedJson shape;
    for (std::size_t i = 0; i < ids.size(); ++i) shape[ids[i]] = {est.shape[i].real(), est.shape[i].imag()};
    e["shape"] = std::move(shape);
    e["member_count"] = est.member_count;
    e["member_indices"] = est.member_indices;

    OrderedJson dispersion;
    if (est.dispersion.size() == 2 * ids.size() + 2) {
      dispersion["frequency_hz"] = est.dispersion[0];
      dispersion["decay_rate"] = est.dispersion[1];
      OrderedJson dshape;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        dshape[ids[i]] = {est.dispersion[2 + 2 * i], est.dispersion[3 + 2 * i]};
      }
      dispersion["shape"] = std::move(dshape);
    }
    e["dispersion"] = std::move(dispersion);

    OrderedJson plot;
    OrderedJson magnitude;
    OrderedJson angle;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      magnitude[ids[i]] = std::abs(est.shape[i]);
      angle[ids[i]] = std::arg(est.shape[i]) * 180.0 / std::numbers::pi;
    }
    plot["phasor_magnitude"] = std::move(magnitude);
    plot["phasor_angle_deg"] = std::move(angle);
    OrderedJson hist;
    if (est.members.rows() > 0) {
      hist["frequency_hz"] = histogram(est.members.col(0));
      hist["decay_rate"] = histogram(est.members.col(1));
      for (std::size_t i = 0; i < ids.size(); ++i) {
        hist[ids[i] + ".re"] = histogram(est.members.col(static_cast<Eigen::Index>(2 + 2 * i)));
        hist[ids[i] + ".im"] = histogram(est.members.col(static_cast<Eigen::Index>(3 + 2 * i)));
      }
    }
    plot["histograms"] = std::move(hist);
    e["plot"] = std::move(plot);
    list.push_back(std::move(e));
  }
  root["estimates"] = std::move(list);
  out << root.dump(2) << '\n';
}

EstimatesDocument read_estimates(std::istream& in) {
  EstimatesDocument doc;
  try {
    const auto root = nlohmann::json::parse(in);
    if (!root.is_object() || root.value("format", std::string{}) != "modeshape-estimates/1") {
      throw Error(ErrorCode::MalformedInput, "not a modeshape estimates document");
    }
    doc.channel_ids = root.at("channel_ids").get<std::vector<std::string>>();
    doc.generated_at = root.value("generated_at", std::string{});
    doc.result.chosen_k = root.at("chosen_k").get<std::size_t>();
    doc.result.low_confidence = root.at("low_confidence").get<bool>();
    doc.merged = root.at("merged_replicates").get<bool>();
    for (const auto& s : root.at("silhouette_by_k")) {
      doc.result.silhouette_by_k.emplace_back(s.at("k").get<std::size_t>(), s.at("score").get<double>());
    }
    for (const auto& e : root.at("estimates")) {
      ModeEstimate est;
      est.frequency_hz = e.at("frequency_hz").get<double>();
      est.decay_rate = e.at("decay_rate").get<double>();
      const auto& shape = e.at("shape");
      for (const auto& id : doc.channel_ids) {
        const auto& pair = shape.at(id);
        est.shape.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
      }
      est.member_count = e.at("member_count").get<std::size_t>();
      est.member_indices = e.at("member_indices").get<std::vector<std::size_t>>();
      const auto& d = e.at("dispersion");
      if (!d.empty()) {
        est.dispersion.push_back(d.at("frequency_hz").get<double>());
        est.dispersion.push_back(d.at("decay_rate").get<double>());
        for (const auto& id : doc.channel_ids) {
          est.dispersion.push_back(d.at("shape").at(id).at(0).get<double>());
          est.dispersion.push_back(d.at("shape").at(id).at(1).get<double>());
        }
      }
      doc.result.estimates.push_back(std::move(est));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("bad estimates document: ") + e.what());
  }
  return doc;
}

}  // namespace modeshape
