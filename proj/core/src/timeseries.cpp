#include "modeshape/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "modeshape/errors.hpp"

namespace modeshape {

namespace {

using Json = nlohmann::json;

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
// Relative jitter allowed between consecutive timestamps.
constexpr double kTimeJitter = 1e-3;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

// Empty, "nan" or non-finite cells come back as NaN; garbage throws.
double parse_cell(std::string_view cell, std::size_t line_no) {
  if (cell.empty()) return kMissing;
  std::string lowered(cell);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lowered == "nan" || lowered == "na" || lowered == "null") return kMissing;
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw Error(ErrorCode::MalformedInput,
                "line " + std::to_string(line_no) + ": cannot parse '" + std::string(cell) + "'");
  }
  return std::isfinite(value) ? value : kMissing;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void repair_gaps(ChannelSet& cs, std::size_t max_gap) {
  const auto m = cs.samples.rows();
  const auto n = cs.samples.cols();
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::Index k = 0;
    while (k < n) {
      if (std::isfinite(cs.samples(i, k))) {
        ++k;
        continue;
      }
      Eigen::Index end = k;
      while (end < n && !std::isfinite(cs.samples(i, end))) ++end;
      const auto run = static_cast<std::size_t>(end - k);
      const bool at_edge = k == 0 || end == n;
      if (at_edge || run > max_gap) {
        throw GapError(static_cast<std::size_t>(k), static_cast<std::size_t>(i),
                       "missing value at sample " + std::to_string(k) + " of channel '" +
                           cs.channel_ids[static_cast<std::size_t>(i)] + "' (gap of " +
                           std::to_string(run) + " samples" +
                           (at_edge ? ", touches the series edge)" : ")"));
      }
      const double left = cs.samples(i, k - 1);
      const double right = cs.samples(i, end);
      for (Eigen::Index j = k; j < end; ++j) {
        const double frac = static_cast<double>(j - k + 1) / static_cast<double>(run + 1);
        cs.samples(i, j) = left + frac * (right - left);
      }
      k = end;
    }
  }
}

// Validates timestamps and returns (sample rate, first time).
std::pair<double, double> rate_from_times(const std::vector<double>& times) {
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) {
      throw Error(ErrorCode::TimeOrderError, "time column is not strictly increasing at row " +
                                                 std::to_string(k));
    }
  }
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (std::abs((times[k] - times[k - 1]) - dt) > kTimeJitter * dt) {
      throw Error(ErrorCode::MalformedInput,
                  "non-uniform sampling at row " + std::to_string(k) + " (channels are never resampled)");
    }
  }
  return {1.0 / dt, times.front()};
}

ChannelSet ingest_csv(std::istream& in) {
  std::optional<double> meta_rate;
  std::optional<double> meta_t0;
  std::vector<std::string> header;
  bool has_time = false;
  std::vector<double> times;
  std::vector<std::vector<double>> rows;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      auto body = trim(view.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const auto key = trim(body.substr(0, eq));
      const double value = parse_cell(trim(body.substr(eq + 1)), line_no);
      if (key == "rate_hz") meta_rate = value;
      if (key == "t0") meta_t0 = value;
      continue;
    }
    const auto cells = split_commas(view);
    if (header.empty()) {
      for (const auto c : cells) header.emplace_back(c);
      has_time = header.front() == "t";
      if (header.size() < (has_time ? 2u : 1u)) {
        throw Error(ErrorCode::MalformedInput, "header declares no channels");
      }
      continue;
    }
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::MalformedInput, "line " + std::to_string(line_no) + " has " +
                                                 std::to_string(cells.size()) + " cells, header has " +
                                                 std::to_string(header.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto c : cells) row.push_back(parse_cell(c, line_no));
    if (has_time) {
      if (!std::isfinite(row.front())) {
        throw Error(ErrorCode::MalformedInput, "line " + std::to_string(line_no) + ": missing time");
      }
      times.push_back(row.front());
      row.erase(row.begin());
    }
    rows.push_back(std::move(row));
  }

  if (header.empty()) throw Error(ErrorCode::MalformedInput, "missing header row");
  if (rows.size() < 2) throw Error(ErrorCode::MalformedInput, "need at least 2 samples per channel");

  ChannelSet cs;
  cs.channel_ids.assign(header.begin() + (has_time ? 1 : 0), header.end());
  if (has_time) {
    const auto [rate, first] = rate_from_times(times);
    if (meta_rate && std::abs(*meta_rate - rate) > kTimeJitter * *meta_rate) {
      throw Error(ErrorCode::MalformedInput, "time column disagrees with declared rate_hz");
    }
    cs.sample_rate_hz = meta_rate.value_or(rate);
    cs.t0 = meta_t0.value_or(first);
  } else {
    if (!meta_rate) {
      throw Error(ErrorCode::MalformedInput, "CSV needs a 't' column or a '# rate_hz=' line");
    }
    cs.sample_rate_hz = *meta_rate;
    cs.t0 = meta_t0.value_or(0.0);
  }

  const auto m = static_cast<Eigen::Index>(cs.channel_ids.size());
  const auto n = static_cast<Eigen::Index>(rows.size());
  cs.samples.resize(m, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < m; ++i) cs.samples(i, k) = rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
  }
  return cs;
}

ChannelSet ingest_json(std::istream& in) {
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::MalformedInput, "expected a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "channel_ids" && key != "sample_rate_hz" && key != "t0" && key != "samples") {
      throw Error(ErrorCode::MalformedInput, "unknown key '" + key + "'");
    }
  }
  ChannelSet cs;
  try {
    cs.channel_ids = doc.at("channel_ids").get<std::vector<std::string>>();
    cs.sample_rate_hz = doc.at("sample_rate_hz").get<double>();
    cs.t0 = doc.value("t0", 0.0);
    const auto& rows = doc.at("samples");
    if (!rows.is_array() || rows.size() != cs.channel_ids.size()) {
      throw Error(ErrorCode::MalformedInput, "samples must have one row per channel id");
    }
    const auto m = static_cast<Eigen::Index>(rows.size());
    const auto n = m == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(rows[0].size());
    cs.samples.resize(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& row = rows[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
        throw Error(ErrorCode::MalformedInput, "ragged samples row " + std::to_string(i));
      }
      for (Eigen::Index k = 0; k < n; ++k) {
        const auto& cell = row[static_cast<std::size_t>(k)];
        cs.samples(i, k) = cell.is_number() ? cell.get<double>() : kMissing;
        if (!cell.is_number() && !cell.is_null()) {
          throw Error(ErrorCode::MalformedInput, "non-numeric sample in row " + std::to_string(i));
        }
      }
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("bad field: ") + e.what());
  }
  return cs;
}

}  // namespace

void ChannelSet::validate() const {
  if (channel_ids.empty() || static_cast<std::size_t>(samples.rows()) != channel_ids.size()) {
    throw Error(ErrorCode::MalformedInput, "channel ids do not match sample rows");
  }
  std::set<std::string> seen;
  for (const auto& id : channel_ids) {
    if (id.empty()) throw Error(ErrorCode::MalformedInput, "empty channel id");
    if (!seen.insert(id).second) throw Error(ErrorCode::MalformedInput, "duplicate channel id '" + id + "'");
  }
  if (samples.cols() < 2) throw Error(ErrorCode::MalformedInput, "need at least 2 samples per channel");
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw Error(ErrorCode::MalformedInput, "sample rate must be positive");
  }
  if (!std::isfinite(t0)) throw Error(ErrorCode::MalformedInput, "t0 must be finite");
  if (!samples.allFinite()) throw Error(ErrorCode::NonFiniteInput, "samples contain non-finite values");
}

bool ChannelSet::operator==(const ChannelSet& other) const {
  return channel_ids == other.channel_ids && sample_rate_hz == other.sample_rate_hz &&
         t0 == other.t0 && samples.rows() == other.samples.rows() &&
         samples.cols() == other.samples.cols() && samples == other.samples;
}

MeasurementWindow::MeasurementWindow(const ChannelSet& source, std::size_t first_sample,
                                     std::size_t sample_count, std::size_t window_index)
    : source_(&source), first_(first_sample), count_(sample_count), window_index_(window_index) {
  if (count_ < 4) throw Error(ErrorCode::InvalidArgument, "window needs at least 4 samples");
  if (first_ + count_ > source.sample_count()) {
    throw Error(ErrorCode::InvalidArgument, "window exceeds source data");
  }
}

ChannelSet ingest(std::istream& in, SeriesFormat format, const IngestOptions& options) {
  ChannelSet cs = format == SeriesFormat::Csv ? ingest_csv(in) : ingest_json(in);
  if (!cs.samples.allFinite()) repair_gaps(cs, options.fill_max_gap);
  cs.validate();
  return cs;
}

SeriesFormat format_for_path(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos) {
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == "json") return SeriesFormat::Json;
  }
  return SeriesFormat::Csv;
}

ChannelSet ingest_file(const std::string& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open '" + path + "'");
  return ingest(in, format_for_path(path), options);
}

void serialize(const ChannelSet& cs, std::ostream& out, SeriesFormat format) {
  cs.validate();
  if (format == SeriesFormat::Json) {
    nlohmann::ordered_json doc;
    doc["channel_ids"] = cs.channel_ids;
    doc["sample_rate_hz"] = cs.sample_rate_hz;
    doc["t0"] = cs.t0;
    auto rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < cs.samples.rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(cs.samples.cols()));
      for (Eigen::Index k = 0; k < cs.samples.cols(); ++k) row[static_cast<std::size_t>(k)] = cs.samples(i, k);
      rows.push_back(std::move(row));
    }
    doc["samples"] = std::move(rows);
    out << doc.dump() << '\n';
    return;
  }

  for (const auto& id : cs.channel_ids) {
    if (id.find_first_of(",\n#") != std::string::npos || id == "t") {
      throw Error(ErrorCode::InvalidArgument, "channel id '" + id + "' cannot be written to CSV");
    }
  }
  out << "# rate_hz=" << format_double(cs.sample_rate_hz) << '\n';
  out << "# t0=" << format_double(cs.t0) << '\n';
  out << 't';
  for (const auto& id : cs.channel_ids) out << ',' << id;
  out << '\n';
  for (std::size_t k = 0; k < cs.sample_count(); ++k) {
    out << format_double(cs.time_at(k));
    for (Eigen::Index i = 0; i < cs.samples.rows(); ++i) {
      out << ',' << format_double(cs.samples(i, static_cast<Eigen::Index>(k)));
    }
    out << '\n';
  }
}

ChannelSet merge_channels(const std::vector<ChannelSet>& parts) {
  if (parts.empty()) throw Error(ErrorCode::EmptyInput, "no channel sets to merge");
  ChannelSet merged;
  merged.sample_rate_hz = parts.front().sample_rate_hz;
  merged.t0 = parts.front().t0;
  const auto n = parts.front().samples.cols();
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    if (p.sample_rate_hz != merged.sample_rate_hz) {
      throw Error(ErrorCode::MalformedInput, "mixed sample rates across inputs");
    }
    if (p.samples.cols() != n || p.t0 != merged.t0) {
      throw Error(ErrorCode::MalformedInput, "inputs are not time-aligned");
    }
    rows += p.samples.rows();
  }
  merged.samples.resize(rows, n);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    merged.samples.middleRows(at, p.samples.rows()) = p.samples;
    at += p.samples.rows();
    merged.channel_ids.insert(merged.channel_ids.end(), p.channel_ids.begin(), p.channel_ids.end());
  }
  merged.validate();
  return merged;
}

std::size_t samples_for_duration(double seconds, double sample_rate_hz) {
  return static_cast<std::size_t>(std::llround(seconds * sample_rate_hz));
}

std::vector<MeasurementWindow> sliding_windows(const ChannelSet& cs, double length_s, double step_s) {
  if (!(length_s > 0.0) || !(step_s > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "window length and step must be positive");
  }
  const std::size_t n_total = cs.sample_count();
  const std::size_t n_win = samples_for_duration(length_s, cs.sample_rate_hz);
  const std::size_t n_step = std::max<std::size_t>(1, samples_for_duration(step_s, cs.sample_rate_hz));
  if (n_win > n_total) {
    throw Error(ErrorCode::WindowTooLong, "window of " + format_double(length_s) + " s exceeds " +
                                              format_double(cs.duration_s()) + " s of data");
  }
  const std::size_t count = (n_total - n_win) / n_step + 1;
  std::vector<MeasurementWindow> windows;
  windows.reserve(count);
  for (std::size_t w = 0; w < count; ++w) windows.emplace_back(cs, w * n_step, n_win, w);
  return windows;
}

}  // namespace modeshape
