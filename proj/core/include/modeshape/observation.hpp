#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "modeshape/decomp.hpp"
#include "modeshape/timeseries.hpp"

namespace modeshape {

/// One accepted CPC from one window: a point [f, sigma, Re G1, Im G1, ...].
struct ModeObservation {
  double frequency_hz = 0.0;
  double decay_rate = 0.0;  // 1/s, negative = decaying
  std::vector<std::complex<double>> phasors;
  std::size_t window_index = 0;
  double window_t_start = 0.0;
  std::size_t cpc_index = 0;
  double regression_mse = 0.0;

  std::size_t channel_count() const { return phasors.size(); }

  /// Exactly 2M+2 values in the order [f, sigma, Re G1, Im G1, ..., Re GM, Im GM].
  std::vector<double> as_point() const;

  /// Inverse of as_point(); provenance fields are left at their defaults.
  static ModeObservation from_point(std::span<const double> point);

  bool operator==(const ModeObservation&) const = default;
};

using ObservationSet = std::vector<ModeObservation>;

struct PipelineConfig {
  double window_length_s = 10.0;
  double window_step_s = 1.0;
  double window_min_s = 5.0;
  double window_max_s = 10.0;
  double taper_fraction = 0.10;
  ComponentSelection keep_pca = ComponentSelection::variance(0.95);
  ComponentSelection keep_cpca = ComponentSelection::variance(0.95);
  double band_min_hz = 0.1;
  double band_max_hz = 2.0;
  double mse_max = 4e-3;
  EmdConfig emd;

  /// Throws InvalidArgument for out-of-range settings.
  void validate() const;
  TwoLayerConfig two_layer() const;
};

/// Multiplies all phasors by e^{-j arg(G_max)} so the largest-magnitude
/// phasor is real positive. Throws ZeroShape when all phasors are zero.
std::vector<std::complex<double>> rotate_to_reference(std::span<const std::complex<double>> phasors);

/// Band and regression-error gates, checked from stored fields.
bool passes_gates(const ModeObservation& obs, const PipelineConfig& cfg);

/// Part I for a single window. A window without coherent oscillation yields
/// an empty list, not an error.
ObservationSet extract_observations(const MeasurementWindow& window, const PipelineConfig& cfg = {});

/// Part I over all sliding windows, ordered by (window_index, cpc_index).
ObservationSet run_part1(const ChannelSet& cs, const PipelineConfig& cfg = {});

/// JSON-lines: one observation per line with a fixed field order.
void write_observations(const ObservationSet& observations, std::ostream& out);
ObservationSet read_observations(std::istream& in);

}  // namespace modeshape
