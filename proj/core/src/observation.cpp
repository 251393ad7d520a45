#include "modeshape/observation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"
#include "modeshape/errors.hpp"

namespace modeshape {

namespace {

using OrderedJson = nlohmann::ordered_json;

Eigen::MatrixXd centered_rows(const Eigen::Ref<const Eigen::MatrixXd>& x) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    // A constant row becomes exactly zero rather than mean-subtraction dust.
    if (x.row(i).maxCoeff() == x.row(i).minCoeff()) {
      out.row(i).setZero();
    } else {
      out.row(i) = x.row(i).array() - x.row(i).mean();
    }
  }
  return out;
}

}  // namespace

std::vector<double> ModeObservation::as_point() const {
  std::vector<double> point;
  point.reserve(2 * phasors.size() + 2);
  point.push_back(frequency_hz);
  point.push_back(decay_rate);
  for (const auto& g : phasors) {
    point.push_back(g.real());
    point.push_back(g.imag());
  }
  return point;
}

ModeObservation ModeObservation::from_point(std::span<const double> point) {
  if (point.size() < 4 || point.size() % 2 != 0) {
    throw Error(ErrorCode::InvalidArgument, "a point has 2M+2 entries with M >= 1");
  }
  ModeObservation obs;
  obs.frequency_hz = point[0];
  obs.decay_rate = point[1];
  for (std::size_t k = 2; k < point.size(); k += 2) obs.phasors.emplace_back(point[k], point[k + 1]);
  return obs;
}

void PipelineConfig::validate() const {
  const auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (!(window_min_s > 0.0) || window_min_s > window_max_s) fail("window bounds are inconsistent");
  if (window_length_s < window_min_s || window_length_s > window_max_s) {
    fail("window length must lie in [" + std::to_string(window_min_s) + ", " +
         std::to_string(window_max_s) + "] s");
  }
  if (!(window_step_s > 0.0)) fail("window step must be positive");
  if (!(taper_fraction >= 0.0) || !(taper_fraction < 0.5)) fail("taper fraction must lie in [0, 0.5)");
  if (!(band_min_hz >= 0.0) || !(band_max_hz > band_min_hz)) fail("frequency band is empty");
  if (!(mse_max > 0.0)) fail("mse threshold must be positive");
}

TwoLayerConfig PipelineConfig::two_layer() const {
  TwoLayerConfig cfg;
  cfg.keep_pca = keep_pca;
  cfg.keep_cpca = keep_cpca;
  cfg.taper_fraction = taper_fraction;
  cfg.emd = emd;
  return cfg;
}

std::vector<std::complex<double>> rotate_to_reference(std::span<const std::complex<double>> phasors) {
  std::size_t ref = 0;
  for (std::size_t i = 1; i < phasors.size(); ++i) {
    if (std::abs(phasors[i]) > std::abs(phasors[ref])) ref = i;
  }
  if (phasors.empty() || std::abs(phasors[ref]) == 0.0) {
    throw Error(ErrorCode::ZeroShape, "mode shape has no nonzero phasor");
  }
  const auto rotation = std::polar(1.0, -std::arg(phasors[ref]));
  std::vector<std::complex<double>> out(phasors.size());
  for (std::size_t i = 0; i < phasors.size(); ++i) out[i] = phasors[i] * rotation;
  out[ref] = std::abs(phasors[ref]);
  return out;
}

bool passes_gates(const ModeObservation& obs, const PipelineConfig& cfg) {
  return obs.frequency_hz >= cfg.band_min_hz && obs.frequency_hz <= cfg.band_max_hz &&
         obs.regression_mse < cfg.mse_max;
}

ObservationSet extract_observations(const MeasurementWindow& window, const PipelineConfig& cfg) {
  const double fs = window.sample_rate_hz();
  const Eigen::MatrixXd x = centered_rows(window.samples());

  TwoLayerResult decomposition;
  try {
    decomposition = two_layer(x, fs, cfg.two_layer());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NoComponentsKept) return {};
    throw;
  }

  ObservationSet out;
  const auto n_tapered = decomposition.z.cols();
  std::vector<double> times(static_cast<std::size_t>(n_tapered));
  for (Eigen::Index k = 0; k < n_tapered; ++k) {
    times[static_cast<std::size_t>(k)] =
        static_cast<double>(decomposition.taper_offset + static_cast<std::size_t>(k)) / fs;
  }

  for (Eigen::Index j = 0; j < decomposition.z.rows(); ++j) {
    const Eigen::VectorXcd zj = decomposition.z.row(j).transpose();
    const std::span<const std::complex<double>> series(zj.data(), static_cast<std::size_t>(zj.size()));

    std::vector<double> envelope(series.size());
    std::transform(series.begin(), series.end(), envelope.begin(),
                   [](const std::complex<double>& v) { return std::abs(v); });
    const double peak = *std::max_element(envelope.begin(), envelope.end());
    if (!(peak > 0.0)) continue;
    for (auto& v : envelope) v /= peak;
    if (std::any_of(envelope.begin(), envelope.end(), [](double v) { return !(v > 0.0); })) continue;

    ModeObservation obs;
    obs.frequency_hz = mean_frequency(series, fs);
    const auto fit = fit_exponential(times, envelope);
    obs.decay_rate = fit.beta;
    obs.regression_mse = fit.mse;
    if (!passes_gates(obs, cfg)) continue;

    const Eigen::VectorXcd column = decomposition.w.col(j);
    auto shape = rotate_to_reference(std::span<const std::complex<double>>(
        column.data(), static_cast<std::size_t>(column.size())));
    double largest = 0.0;
    for (const auto& g : shape) largest = std::max(largest, std::abs(g));
    for (auto& g : shape) g /= largest;

    obs.phasors = std::move(shape);
    obs.window_index = window.window_index();
    obs.window_t_start = window.t_start();
    obs.cpc_index = static_cast<std::size_t>(j);
    out.push_back(std::move(obs));
  }
  return out;
}

ObservationSet run_part1(const ChannelSet& cs, const PipelineConfig& cfg) {
  cfg.validate();
  cs.validate();
  ObservationSet all;
  for (const auto& window : sliding_windows(cs, cfg.window_length_s, cfg.window_step_s)) {
    auto found = extract_observations(window, cfg);
    all.insert(all.end(), std::make_move_iterator(found.begin()), std::make_move_iterator(found.end()));
  }
  return all;
}

void write_observations(const ObservationSet& observations, std::ostream& out) {
  for (const auto& obs : observations) {
    OrderedJson line;
    line["window_index"] = obs.window_index;
    line["window_t_start"] = obs.window_t_start;
    line["cpc_index"] = obs.cpc_index;
    line["frequency_hz"] = obs.frequency_hz;
    line["decay_rate"] = obs.decay_rate;
    line["regression_mse"] = obs.regression_mse;
    auto phasors = OrderedJson::array();
    for (const auto& g : obs.phasors) phasors.push_back({g.real(), g.imag()});
    line["phasors"] = std::move(phasors);
    out << line.dump() << '\n';
  }
}

ObservationSet read_observations(std::istream& in) {
  static const std::vector<std::string> kFields = {"window_index",   "window_t_start", "cpc_index",
                                                   "frequency_hz",   "decay_rate",     "regression_mse",
                                                   "phasors"};
  ObservationSet out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "observation line " + std::to_string(line_no);
    try {
      const auto doc = nlohmann::json::parse(line);
      if (!doc.is_object() || doc.size() != kFields.size()) {
        throw Error(ErrorCode::MalformedInput, where + ": unexpected fields");
      }
      for (const auto& f : kFields) {
        if (!doc.contains(f)) throw Error(ErrorCode::MalformedInput, where + ": missing '" + f + "'");
      }
      ModeObservation obs;
      obs.window_index = doc.at("window_index").get<std::size_t>();
      obs.window_t_start = doc.at("window_t_start").get<double>();
      obs.cpc_index = doc.at("cpc_index").get<std::size_t>();
      obs.frequency_hz = doc.at("frequency_hz").get<double>();
      obs.decay_rate = doc.at("decay_rate").get<double>();
      obs.regression_mse = doc.at("regression_mse").get<double>();
      for (const auto& pair : doc.at("phasors")) {
        if (!pair.is_array() || pair.size() != 2) {
          throw Error(ErrorCode::MalformedInput, where + ": phasors must be [re, im] pairs");
        }
        obs.phasors.emplace_back(pair[0].get<double>(), pair[1].get<double>());
      }
      if (obs.phasors.empty()) throw Error(ErrorCode::MalformedInput, where + ": no phasors");
      if (!out.empty() && out.front().phasors.size() != obs.phasors.size()) {
        throw Error(ErrorCode::MalformedInput, where + ": channel count differs from earlier lines");
      }
      out.push_back(std::move(obs));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedInput, where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace modeshape
