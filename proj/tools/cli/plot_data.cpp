#include "plot_data.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "json.hpp"

namespace modeshape::cli {

namespace {

using OrderedJson = nlohmann::ordered_json;

constexpr double kFrequencyBinHz = 0.02;
constexpr int kMaxFrequencyBins = 200;
constexpr int kDecayBins = 40;
constexpr int kPhasorBins = 20;

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  int bins = 1;

  std::vector<double> edges() const {
    std::vector<double> e(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b) e[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / bins;
    return e;
  }
  int bin(double v) const {
    const int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
    return std::clamp(b, 0, bins - 1);
  }
};

// Membership column per observation: estimate index, or one extra slot for
// observations no estimate claims.
std::vector<std::size_t> columns(const PlotInputs& in, std::size_t& n_columns) {
  const std::size_t q = in.observations->size();
  const std::size_t k = in.estimates->size();
  auto assignment = assignment_of(*in.estimates, q);
  n_columns = k + 1;
  for (auto& a : assignment) {
    if (a >= k) a = k;
  }
  return assignment;
}

OrderedJson shares(const std::vector<std::vector<std::size_t>>& per_column, const std::vector<std::size_t>& totals) {
  auto out = OrderedJson::array();
  for (const auto& counts : per_column) {
    std::vector<double> s(counts.size(), 0.0);
    for (std::size_t b = 0; b < counts.size(); ++b) {
      if (totals[b] > 0) s[b] = static_cast<double>(counts[b]) / static_cast<double>(totals[b]);
    }
    out.push_back(s);
  }
  return out;
}

OrderedJson histogram_1d(const Axis& axis, const std::vector<double>& values, const std::vector<std::size_t>& column,
                         std::size_t n_columns) {
  const auto nb = static_cast<std::size_t>(axis.bins);
  std::vector<std::size_t> totals(nb, 0);
  std::vector<std::vector<std::size_t>> per_column(n_columns, std::vector<std::size_t>(nb, 0));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto b = static_cast<std::size_t>(axis.bin(values[i]));
    ++totals[b];
    ++per_column[column[i]][b];
  }
  OrderedJson h;
  h["edges"] = axis.edges();
  h["counts"] = totals;
  per_column.pop_back();
  std::vector<std::size_t> unassigned(nb, 0);
  for (std::size_t b = 0; b < nb; ++b) {
    std::size_t claimed = 0;
    for (const auto& c : per_column) claimed += c[b];
    unassigned[b] = totals[b] - claimed;
  }
  h["cluster_shares"] = shares(per_column, totals);
  h["unassigned_counts"] = unassigned;
  return h;
}

}  // namespace

void write_plot_data(const PlotInputs& in, std::ostream& out) {
  const auto& obs = *in.observations;
  std::size_t n_columns = 0;
  const auto column = columns(in, n_columns);

  OrderedJson root;
  root["format"] = "modeshape-plot/1";
  if (!in.generated_at.empty()) root["generated_at"] = in.generated_at;
  root["channel_ids"] = in.channel_ids;

  auto clusters = OrderedJson::array();
  for (std::size_t e = 0; e < in.estimates->size(); ++e) {
    const auto& est = (*in.estimates)[e];
    clusters.push_back({{"index", e},
                        {"frequency_hz", est.frequency_hz},
                        {"decay_rate", est.decay_rate},
                        {"member_count", est.member_count}});
  }
  root["clusters"] = std::move(clusters);

  std::vector<double> freq;
  std::vector<double> decay;
  for (const auto& o : obs) {
    freq.push_back(o.frequency_hz);
    decay.push_back(o.decay_rate);
  }

  Axis f_axis{in.band_min_hz, in.band_max_hz,
              std::clamp(static_cast<int>(std::ceil((in.band_max_hz - in.band_min_hz) / kFrequencyBinHz - 1e-9)), 1,
                         kMaxFrequencyBins)};
  root["frequency_histogram"] = histogram_1d(f_axis, freq, column, n_columns);

  Axis d_axis;
  if (!decay.empty()) {
    const auto [lo, hi] = std::minmax_element(decay.begin(), decay.end());
    d_axis = *hi > *lo ? Axis{*lo, *hi, kDecayBins} : Axis{*lo - 0.5, *lo + 0.5, 1};
  }
  root["decay_histogram"] = histogram_1d(d_axis, decay, column, n_columns);

  const Axis p_axis{-1.0, 1.0, kPhasorBins};
  const auto nb = static_cast<std::size_t>(kPhasorBins);
  OrderedJson phasors;
  for (std::size_t ch = 0; ch < in.channel_ids.size(); ++ch) {
    using Grid = std::vector<std::vector<std::size_t>>;
    Grid totals(nb, std::vector<std::size_t>(nb, 0));
    std::vector<Grid> per_cluster(n_columns - 1, totals);
    for (std::size_t i = 0; i < obs.size(); ++i) {
      if (ch >= obs[i].phasors.size()) continue;
      const auto g = obs[i].phasors[ch];
      const auto r = static_cast<std::size_t>(p_axis.bin(g.real()));
      const auto c = static_cast<std::size_t>(p_axis.bin(g.imag()));
      ++totals[r][c];
      if (column[i] + 1 < n_columns) ++per_cluster[column[i]][r][c];
    }
    auto cluster_shares = OrderedJson::array();
    for (const auto& grid : per_cluster) {
      std::vector<std::vector<double>> s(nb, std::vector<double>(nb, 0.0));
      for (std::size_t r = 0; r < nb; ++r) {
        for (std::size_t c = 0; c < nb; ++c) {
          if (totals[r][c] > 0) s[r][c] = static_cast<double>(grid[r][c]) / static_cast<double>(totals[r][c]);
        }
      }
      cluster_shares.push_back(s);
    }
    OrderedJson h;
    h["re_edges"] = p_axis.edges();
    h["im_edges"] = p_axis.edges();
    h["counts"] = totals;
    h["cluster_shares"] = std::move(cluster_shares);
    phasors[in.channel_ids[ch]] = std::move(h);
  }
  root["phasor_histograms"] = std::move(phasors);

  auto track = OrderedJson::array();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    OrderedJson point;
    point["t"] = obs[i].window_t_start;
    point["window_index"] = obs[i].window_index;
    point["cpc_index"] = obs[i].cpc_index;
    point["frequency_hz"] = obs[i].frequency_hz;
    point["decay_rate"] = obs[i].decay_rate;
    if (column[i] + 1 < n_columns) {
      point["cluster"] = column[i];
    } else {
      point["cluster"] = nullptr;
    }
    track.push_back(std::move(point));
  }
  root["detection_track"] = std::move(track);

  out << root.dump() << '\n';
}

}  // namespace modeshape::cli
