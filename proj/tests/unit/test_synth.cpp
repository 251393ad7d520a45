#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "modeshape/errors.hpp"
#include "modeshape/synth.hpp"

using namespace modeshape;

namespace {

constexpr double kPi = std::numbers::pi;

ScenarioSpec base_spec() {
  ScenarioSpec s;
  s.duration_s = 10.0;
  s.sample_rate_hz = 50.0;
  s.modes.push_back({0.5, -0.3, {1.0, -1.0}, {1.0, 0.0}});
  s.events.push_back({0.0, {}});
  return s;
}

}  // namespace

TEST(Generate, ClosedFormSingleMode) {
  const auto cs = generate(base_spec());
  ASSERT_EQ(cs.channel_count(), 2u);
  ASSERT_EQ(cs.sample_count(), 500u);
  for (std::size_t k = 0; k < cs.sample_count(); ++k) {
    const double t = static_cast<double>(k) / 50.0;
    const double expected = std::exp(-0.3 * t) * std::cos(2 * kPi * 0.5 * t);
    EXPECT_NEAR(cs.samples(0, static_cast<Eigen::Index>(k)), expected, 1e-12);
    EXPECT_NEAR(cs.samples(1, static_cast<Eigen::Index>(k)), -expected, 1e-12);
  }
}

TEST(Generate, EventStartsAtItsTime) {
  auto s = base_spec();
  s.events = {{2.0, {}}};
  const auto cs = generate(s);
  for (std::size_t k = 0; k < 100; ++k) EXPECT_EQ(cs.samples(0, static_cast<Eigen::Index>(k)), 0.0);
  EXPECT_NEAR(cs.samples(0, 100), 1.0, 1e-12);
}

TEST(Generate, NoiseOnlyStd) {
  ScenarioSpec s;
  s.duration_s = 100.0;
  s.sample_rate_hz = 50.0;
  s.channels = 3;
  s.noise_std = 0.01;
  s.rng_seed = 5;
  const auto cs = generate(s);
  for (Eigen::Index i = 0; i < 3; ++i) {
    const double mean = cs.samples.row(i).mean();
    const double sd = std::sqrt((cs.samples.row(i).array() - mean).square().sum() / static_cast<double>(cs.sample_count() - 1));
    EXPECT_NEAR(sd, 0.01, 0.001);
  }
}

TEST(Generate, Superposition) {
  ScenarioSpec a = base_spec();
  ScenarioSpec b = base_spec();
  b.modes = {{0.9, -0.1, {0.3, std::polar(0.8, 1.2)}, {0.5, -0.5}}};
  ScenarioSpec both = a;
  both.modes.push_back(b.modes.front());
  const Eigen::MatrixXd sum = generate(a).samples + generate(b).samples;
  EXPECT_LT((generate(both).samples - sum).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Generate, SameSeedSameOutput) {
  auto s = base_spec();
  s.noise_std = 0.05;
  s.rng_seed = 42;
  EXPECT_TRUE(generate(s) == generate(s));
  auto t = s;
  t.rng_seed = 43;
  EXPECT_FALSE(generate(s) == generate(t));
}

TEST(Generate, ChannelIsModalEnvelopeTimesCosine) {
  auto s = base_spec();
  s.modes.front().shape = {std::polar(0.8, 0.4), 1.0};
  s.modes.front().excitation = {0.0, 1.5};
  const auto cs = generate(s);
  const std::complex<double> a = s.modes.front().shape[0] * s.modes.front().excitation;
  for (std::size_t k = 0; k < cs.sample_count(); ++k) {
    const double t = static_cast<double>(k) / 50.0;
    const double expected = std::abs(a) * std::exp(-0.3 * t) * std::cos(2 * kPi * 0.5 * t + std::arg(a));
    EXPECT_NEAR(cs.samples(0, static_cast<Eigen::Index>(k)), expected, 1e-12);
  }
}

TEST(Generate, TrendAndSteps) {
  auto s = base_spec();
  s.modes.clear();
  s.channels = 2;
  s.trend = ChannelTrend{{1.0, 2.0}, {0.1, 0.0}, {{5.0, {0.0, -1.0}}}};
  const auto cs = generate(s);
  EXPECT_NEAR(cs.samples(0, 100), 1.0 + 0.1 * 2.0, 1e-12);
  EXPECT_NEAR(cs.samples(1, 100), 2.0, 1e-12);
  EXPECT_NEAR(cs.samples(1, 300), 1.0, 1e-12);
}

TEST(Validate, Nyquist) {
  auto s = base_spec();
  s.sample_rate_hz = 0.9;
  try {
    s.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SamplingTooSlow);
  }
}

TEST(Validate, ShapeLengthMismatch) {
  auto s = base_spec();
  s.modes.push_back({0.7, -0.1, {1.0, 0.5, 0.2}, {1.0, 0.0}});
  EXPECT_THROW(s.validate(), Error);
  s = base_spec();
  s.modes.front().shape = {0.0, 0.0};
  EXPECT_THROW(s.validate(), Error);
}

TEST(ParseScenario, AllShapeForms) {
  std::istringstream in(R"({
    "duration_s": 5, "sample_rate_hz": 20, "channel_ids": ["a", "b", "c"], "rng_seed": 3,
    "modes": [{"frequency_hz": 0.5, "sigma": -0.2,
               "shape": [1.0, [0.0, -0.5], {"magnitude": 0.5, "angle_deg": 90}]}],
    "events": [{"time_s": 1, "multipliers": [2.0]}]
  })");
  const auto s = parse_scenario(in);
  ASSERT_EQ(s.modes.size(), 1u);
  EXPECT_EQ(s.modes[0].shape[1], std::complex<double>(0.0, -0.5));
  EXPECT_NEAR(std::abs(s.modes[0].shape[2] - std::complex<double>(0.0, 0.5)), 0.0, 1e-15);
  EXPECT_EQ(s.channel_ids.size(), 3u);
  EXPECT_EQ(generate(s).channel_ids[2], "c");
}

TEST(ParseScenario, UnknownKeyRejected) {
  std::istringstream in(R"({"duration_s": 5, "sample_rate_hz": 20, "channels": 1, "bogus": 1})");
  try {
    parse_scenario(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedInput);
  }
}

TEST(ModeSpec, Eigenvalue) {
  const ModeSpec m{0.7, -0.18, {1.0}, {1.0, 0.0}};
  EXPECT_EQ(m.eigenvalue(), std::complex<double>(-0.18, 2 * kPi * 0.7));
}
