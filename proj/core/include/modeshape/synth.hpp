#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "modeshape/timeseries.hpp"

namespace modeshape {

/// A ground-truth mode: eigenvalue sigma + j 2 pi f, shape Phi (one complex
/// entry per channel) and excitation c.
struct ModeSpec {
  double frequency_hz = 0.0;
  double sigma = 0.0;
  std::vector<std::complex<double>> shape;
  std::complex<double> excitation{1.0, 0.0};

  std::complex<double> eigenvalue() const;
};

/// Re-excites every mode at `time_s` (seconds from the start of the record).
/// `multipliers` scales each mode's excitation for this event; empty means 1.
struct ScenarioEvent {
  double time_s = 0.0;
  std::vector<std::complex<double>> multipliers;
};

struct StepChange {
  double time_s = 0.0;
  std::vector<double> amplitude;  // per channel
};

/// Per-channel drift added on top of the modal response.
struct ChannelTrend {
  std::vector<double> offset;  // per channel; empty = 0
  std::vector<double> slope;   // per channel, units per second; empty = 0
  std::vector<StepChange> steps;
};

struct ScenarioSpec {
  std::vector<ModeSpec> modes;
  std::vector<ScenarioEvent> events;
  double duration_s = 0.0;
  double sample_rate_hz = 0.0;
  double t0 = 0.0;
  double noise_std = 0.0;
  std::optional<ChannelTrend> trend;
  std::uint64_t rng_seed = 0;
  std::size_t channels = 0;  // only needed when there are no modes
  std::vector<std::string> channel_ids;

  std::size_t channel_count() const;
  /// Throws InvalidArgument for inconsistent specs and SamplingTooSlow when
  /// the sample rate does not exceed twice the highest mode frequency.
  void validate() const;
};

/// Sum over events and modes of Re(Phi_ij c_j m_ej e^{lambda_j (t - t_e)})
/// for t >= t_e, plus trend and white Gaussian noise. Deterministic per seed.
ChannelSet generate(const ScenarioSpec& spec);

/// JSON scenario files; unknown keys are rejected.
ScenarioSpec parse_scenario(std::istream& in);
ScenarioSpec load_scenario_file(const std::string& path);

}  // namespace modeshape
