#include <cmath>
#include <functional>
#include <sstream>

#include <gtest/gtest.h>

#include "modeshape/errors.hpp"
#include "modeshape/timeseries.hpp"

using namespace modeshape;

namespace {

std::string csv_with_time(std::size_t channels, double seconds, double fs) {
  std::ostringstream s;
  s << "t";
  for (std::size_t i = 0; i < channels; ++i) s << ",ch" << i;
  s << "\n";
  const auto n = static_cast<std::size_t>(std::llround(seconds * fs));
  for (std::size_t k = 0; k < n; ++k) {
    s << static_cast<double>(k) / fs;
    for (std::size_t i = 0; i < channels; ++i) s << "," << std::sin(0.1 * static_cast<double>(k + i));
    s << "\n";
  }
  return s.str();
}

ChannelSet make_set(std::size_t channels, std::size_t samples, double fs) {
  ChannelSet cs;
  cs.sample_rate_hz = fs;
  cs.samples.resize(static_cast<Eigen::Index>(channels), static_cast<Eigen::Index>(samples));
  for (std::size_t i = 0; i < channels; ++i) {
    cs.channel_ids.push_back("c" + std::to_string(i));
    for (std::size_t k = 0; k < samples; ++k)
      cs.samples(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          std::cos(0.37 * static_cast<double>(k) + static_cast<double>(i)) / 3.0;
  }
  return cs;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Ingest, FourChannelCsvAt50Hz) {
  std::istringstream in(csv_with_time(4, 20.0, 50.0));
  const auto cs = ingest(in, SeriesFormat::Csv);
  EXPECT_EQ(cs.channel_count(), 4u);
  EXPECT_EQ(cs.sample_count(), 1000u);
  EXPECT_NEAR(cs.sample_rate_hz, 50.0, 1e-9);
}

TEST(Ingest, EightChannelCsvAt10Hz) {
  std::istringstream in(csv_with_time(8, 30.0, 10.0));
  const auto cs = ingest(in, SeriesFormat::Csv);
  EXPECT_EQ(cs.channel_count(), 8u);
  EXPECT_NEAR(cs.sample_rate_hz, 10.0, 1e-9);
}

TEST(Ingest, MissingCellIsGap) {
  std::istringstream in("t,a,b\n0,1,2\n0.1,,3\n0.2,1,2\n");
  try {
    ingest(in, SeriesFormat::Csv);
    FAIL() << "expected GapDetected";
  } catch (const GapError& e) {
    EXPECT_EQ(e.code(), ErrorCode::GapDetected);
    EXPECT_EQ(e.row(), 1u);
    EXPECT_EQ(e.column(), 0u);
  }
}

TEST(Ingest, GapRepairedWhenAllowed) {
  std::istringstream in("t,a\n0,1\n0.1,\n0.2,3\n0.3,4\n");
  const auto cs = ingest(in, SeriesFormat::Csv, IngestOptions{1});
  EXPECT_DOUBLE_EQ(cs.samples(0, 1), 2.0);
}

TEST(Ingest, RaggedRowIsMalformed) {
  std::istringstream in("t,a,b\n0,1,2\n0.1,3\n");
  EXPECT_EQ(code_of([&] { ingest(in, SeriesFormat::Csv); }), ErrorCode::MalformedInput);
}

TEST(Ingest, NonMonotonicTimeIsRejected) {
  std::istringstream in("t,a\n0,1\n0.2,2\n0.1,3\n");
  EXPECT_EQ(code_of([&] { ingest(in, SeriesFormat::Csv); }), ErrorCode::TimeOrderError);
}

TEST(Ingest, DuplicateChannelIdsRejected) {
  std::istringstream in("t,a,a\n0,1,2\n0.1,3,4\n");
  EXPECT_EQ(code_of([&] { ingest(in, SeriesFormat::Csv); }), ErrorCode::MalformedInput);
}

TEST(Ingest, MissingFileNamesPath) {
  try {
    ingest_file("/nonexistent/data.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/data.csv"), std::string::npos);
  }
}

TEST(Serialize, RoundTripBothFormats) {
  auto cs = make_set(3, 257, 10.0);
  cs.t0 = 12.5;
  for (auto fmt : {SeriesFormat::Csv, SeriesFormat::Json}) {
    std::stringstream buf;
    serialize(cs, buf, fmt);
    const auto back = ingest(buf, fmt);
    EXPECT_TRUE(back == cs) << (fmt == SeriesFormat::Csv ? "csv" : "json");
  }
}

TEST(Windows, TwentySecondsGivesEleven) {
  const auto cs = make_set(2, 1000, 50.0);
  EXPECT_EQ(sliding_windows(cs, 10.0, 1.0).size(), 11u);
}

TEST(Windows, ExactFitGivesOne) {
  const auto cs = make_set(2, 500, 50.0);
  EXPECT_EQ(sliding_windows(cs, 10.0, 1.0).size(), 1u);
}

TEST(Windows, TooLong) {
  const auto cs = make_set(2, 250, 50.0);
  EXPECT_EQ(code_of([&] { sliding_windows(cs, 10.0, 1.0); }), ErrorCode::WindowTooLong);
}

TEST(Windows, CountFormulaHolds) {
  for (std::size_t n : {100u, 173u, 640u, 999u}) {
    const auto cs = make_set(1, n, 20.0);
    for (double len : {1.0, 2.5, 5.0}) {
      for (double step : {0.5, 1.0, 1.35}) {
        const std::size_t nw = samples_for_duration(len, 20.0);
        const std::size_t ns = samples_for_duration(step, 20.0);
        if (nw > n) continue;
        EXPECT_EQ(sliding_windows(cs, len, step).size(), (n - nw) / ns + 1) << n << " " << len << " " << step;
      }
    }
  }
}

TEST(Windows, ContiguousWindowsReproduceSource) {
  const auto cs = make_set(3, 1000, 50.0);
  const auto windows = sliding_windows(cs, 2.0, 2.0);
  Eigen::MatrixXd joined(3, static_cast<Eigen::Index>(windows.size() * 100));
  for (std::size_t w = 0; w < windows.size(); ++w) {
    EXPECT_EQ(windows[w].window_index(), w);
    joined.middleCols(static_cast<Eigen::Index>(w * 100), 100) = windows[w].samples();
  }
  EXPECT_TRUE((joined.array() == cs.samples.leftCols(joined.cols()).array()).all());
}

TEST(Merge, JoinsChannelsAndRejectsRateMismatch) {
  auto a = make_set(2, 100, 10.0);
  auto b = make_set(1, 100, 10.0);
  b.channel_ids = {"other"};
  const auto m = merge_channels({a, b});
  EXPECT_EQ(m.channel_count(), 3u);
  EXPECT_EQ(m.channel_ids.back(), "other");
  b.sample_rate_hz = 20.0;
  EXPECT_THROW(merge_channels({a, b}), Error);
}
