#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "modeshape/clustering.hpp"
#include "modeshape/observation.hpp"

namespace modeshape::cli {

struct PlotInputs {
  std::vector<std::string> channel_ids;
  const ObservationSet* observations = nullptr;
  const std::vector<ModeEstimate>* estimates = nullptr;  // may be empty
  double band_min_hz = 0.1;
  double band_max_hz = 2.0;
  std::string generated_at;  // omitted when empty
};

/// Plot-ready JSON: frequency and decay histograms with per-cluster shares,
/// a 2-D (Re, Im) phasor histogram per channel, and the detection track.
void write_plot_data(const PlotInputs& in, std::ostream& out);

}  // namespace modeshape::cli
