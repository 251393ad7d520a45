#include "modeshape/synth.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

#include "json.hpp"
#include "modeshape/errors.hpp"

namespace modeshape {

namespace {

using Json = nlohmann::json;

void reject_unknown_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::MalformedInput, where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) throw Error(ErrorCode::MalformedInput, "unknown key '" + key + "' in " + where);
  }
}

// Accepts 1.5, [re, im] or {"magnitude": m, "angle_deg": a}.
std::complex<double> parse_complex(const Json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2) return {v[0].get<double>(), v[1].get<double>()};
  if (v.is_object()) {
    reject_unknown_keys(v, {"magnitude", "angle_deg"}, where);
    return std::polar(v.at("magnitude").get<double>(),
                      v.at("angle_deg").get<double>() * std::numbers::pi / 180.0);
  }
  throw Error(ErrorCode::MalformedInput, where + ": expected a number, [re, im] or {magnitude, angle_deg}");
}

std::vector<std::complex<double>> parse_complex_list(const Json& v, const std::string& where) {
  if (!v.is_array()) throw Error(ErrorCode::MalformedInput, where + " must be an array");
  std::vector<std::complex<double>> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(parse_complex(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<double> per_channel(const std::vector<double>& v, std::size_t m, const char* what) {
  if (v.empty()) return std::vector<double>(m, 0.0);
  if (v.size() != m) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " needs one value per channel");
  }
  return v;
}

}  // namespace

std::complex<double> ModeSpec::eigenvalue() const {
  return {sigma, 2.0 * std::numbers::pi * frequency_hz};
}

std::size_t ScenarioSpec::channel_count() const {
  if (!modes.empty()) return modes.front().shape.size();
  if (!channel_ids.empty()) return channel_ids.size();
  return channels;
}

void ScenarioSpec::validate() const {
  const auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (!(duration_s > 0.0)) fail("duration_s must be positive");
  if (!(sample_rate_hz > 0.0)) fail("sample_rate_hz must be positive");
  if (!(noise_std >= 0.0)) fail("noise_std must be nonnegative");
  const std::size_t m = channel_count();
  if (m == 0) fail("scenario has no channels");
  if (!channel_ids.empty() && channel_ids.size() != m) fail("channel_ids length differs from the mode shapes");
  if (channels != 0 && channels != m) fail("channels differs from the mode shapes");
  double f_max = 0.0;
  for (std::size_t j = 0; j < modes.size(); ++j) {
    const auto& mode = modes[j];
    if (!(mode.frequency_hz > 0.0)) fail("mode " + std::to_string(j) + " needs a positive frequency");
    if (mode.shape.size() != m) fail("mode " + std::to_string(j) + " shape has the wrong channel count");
    bool nonzero = false;
    for (const auto& phi : mode.shape) nonzero = nonzero || std::abs(phi) > 0.0;
    if (!nonzero) fail("mode " + std::to_string(j) + " has an all-zero shape");
    f_max = std::max(f_max, mode.frequency_hz);
  }
  for (const auto& e : events) {
    if (!e.multipliers.empty() && e.multipliers.size() != modes.size()) {
      fail("event multipliers need one value per mode");
    }
  }
  if (trend) {
    per_channel(trend->offset, m, "trend.offset");
    per_channel(trend->slope, m, "trend.slope");
    for (const auto& s : trend->steps) per_channel(s.amplitude, m, "trend step amplitude");
  }
  if (!(sample_rate_hz > 2.0 * f_max)) {
    throw Error(ErrorCode::SamplingTooSlow, "sample rate " + std::to_string(sample_rate_hz) +
                                                " Hz does not exceed twice the highest mode frequency " +
                                                std::to_string(f_max) + " Hz");
  }
}

ChannelSet generate(const ScenarioSpec& spec) {
  spec.validate();
  const std::size_t m = spec.channel_count();
  const auto n = static_cast<Eigen::Index>(samples_for_duration(spec.duration_s, spec.sample_rate_hz));
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "scenario yields fewer than 2 samples");

  ChannelSet cs;
  cs.sample_rate_hz = spec.sample_rate_hz;
  cs.t0 = spec.t0;
  cs.channel_ids = spec.channel_ids;
  if (cs.channel_ids.empty()) {
    for (std::size_t i = 0; i < m; ++i) cs.channel_ids.push_back("ch" + std::to_string(i + 1));
  }
  cs.samples = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), n);

  for (const auto& event : spec.events) {
    for (std::size_t j = 0; j < spec.modes.size(); ++j) {
      const auto& mode = spec.modes[j];
      const auto lambda = mode.eigenvalue();
      const auto gain = mode.excitation * (event.multipliers.empty() ? 1.0 : event.multipliers[j]);
      for (Eigen::Index k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / spec.sample_rate_hz;
        if (t < event.time_s) continue;
        const auto response = gain * std::exp(lambda * (t - event.time_s));
        for (std::size_t i = 0; i < m; ++i) {
          cs.samples(static_cast<Eigen::Index>(i), k) += (mode.shape[i] * response).real();
        }
      }
    }
  }

  if (spec.trend) {
    const auto offset = per_channel(spec.trend->offset, m, "trend.offset");
    const auto slope = per_channel(spec.trend->slope, m, "trend.slope");
    for (Eigen::Index k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) / spec.sample_rate_hz;
      for (std::size_t i = 0; i < m; ++i) {
        double drift = offset[i] + slope[i] * t;
        for (const auto& step : spec.trend->steps) {
          if (t >= step.time_s) drift += step.amplitude[i];
        }
        cs.samples(static_cast<Eigen::Index>(i), k) += drift;
      }
    }
  }

  if (spec.noise_std > 0.0) {
    std::mt19937_64 rng(spec.rng_seed);
    std::normal_distribution<double> noise(0.0, spec.noise_std);
    for (std::size_t i = 0; i < m; ++i) {
      for (Eigen::Index k = 0; k < n; ++k) cs.samples(static_cast<Eigen::Index>(i), k) += noise(rng);
    }
  }
  return cs;
}

ScenarioSpec parse_scenario(std::istream& in) {
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("invalid scenario JSON: ") + e.what());
  }

  ScenarioSpec spec;
  try {
    reject_unknown_keys(doc, {"modes", "events", "duration_s", "sample_rate_hz", "t0", "noise_std",
                              "trend", "rng_seed", "channels", "channel_ids"},
                        "scenario");
    spec.duration_s = doc.at("duration_s").get<double>();
    spec.sample_rate_hz = doc.at("sample_rate_hz").get<double>();
    spec.t0 = doc.value("t0", 0.0);
    spec.noise_std = doc.value("noise_std", 0.0);
    spec.rng_seed = doc.value("rng_seed", std::uint64_t{0});
    spec.channels = doc.value("channels", std::size_t{0});
    spec.channel_ids = doc.value("channel_ids", std::vector<std::string>{});

    for (const auto& mode : doc.value("modes", Json::array())) {
      reject_unknown_keys(mode, {"frequency_hz", "sigma", "shape", "excitation"}, "mode");
      ModeSpec ms;
      ms.frequency_hz = mode.at("frequency_hz").get<double>();
      ms.sigma = mode.at("sigma").get<double>();
      ms.shape = parse_complex_list(mode.at("shape"), "mode.shape");
      if (mode.contains("excitation")) ms.excitation = parse_complex(mode.at("excitation"), "mode.excitation");
      spec.modes.push_back(std::move(ms));
    }
    for (const auto& event : doc.value("events", Json::array())) {
      reject_unknown_keys(event, {"time_s", "multipliers"}, "event");
      ScenarioEvent ev;
      ev.time_s = event.at("time_s").get<double>();
      if (event.contains("multipliers")) ev.multipliers = parse_complex_list(event.at("multipliers"), "event.multipliers");
      spec.events.push_back(std::move(ev));
    }
    if (doc.contains("trend")) {
      const auto& t = doc.at("trend");
      reject_unknown_keys(t, {"offset", "slope", "steps"}, "trend");
      ChannelTrend trend;
      trend.offset = t.value("offset", std::vector<double>{});
      trend.slope = t.value("slope", std::vector<double>{});
      for (const auto& s : t.value("steps", Json::array())) {
        reject_unknown_keys(s, {"time_s", "amplitude"}, "trend step");
        trend.steps.push_back({s.at("time_s").get<double>(), s.at("amplitude").get<std::vector<double>>()});
      }
      spec.trend = std::move(trend);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("bad scenario field: ") + e.what());
  }
  spec.validate();
  return spec;
}

ScenarioSpec load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open scenario '" + path + "'");
  return parse_scenario(in);
}

}  // namespace modeshape
