#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace modeshape {

enum class SeriesFormat { Csv, Json };

/// Uniformly sampled, time-aligned multi-channel data. Row i of `samples`
/// holds channel i. Values may be absolute frequency or frequency deviation;
/// the pipeline removes the per-window mean, so either works.
struct ChannelSet {
  std::vector<std::string> channel_ids;
  double sample_rate_hz = 0.0;
  double t0 = 0.0;
  Eigen::MatrixXd samples;

  std::size_t channel_count() const { return static_cast<std::size_t>(samples.rows()); }
  std::size_t sample_count() const { return static_cast<std::size_t>(samples.cols()); }
  double duration_s() const { return static_cast<double>(sample_count()) / sample_rate_hz; }
  double time_at(std::size_t k) const { return t0 + static_cast<double>(k) / sample_rate_hz; }

  /// Throws MalformedInput / NonFiniteInput if an invariant is broken.
  void validate() const;

  bool operator==(const ChannelSet& other) const;
};

/// A read-only view of a contiguous sample range of a ChannelSet. The view
/// does not own the data; the source must outlive it.
class MeasurementWindow {
 public:
  MeasurementWindow(const ChannelSet& source, std::size_t first_sample, std::size_t sample_count,
                    std::size_t window_index);

  const ChannelSet& source() const { return *source_; }
  std::size_t window_index() const { return window_index_; }
  std::size_t first_sample() const { return first_; }
  std::size_t sample_count() const { return count_; }
  std::size_t channel_count() const { return source_->channel_count(); }
  double sample_rate_hz() const { return source_->sample_rate_hz; }
  double t_start() const { return source_->time_at(first_); }
  double length_s() const { return static_cast<double>(count_) / source_->sample_rate_hz; }

  Eigen::Block<const Eigen::MatrixXd, Eigen::Dynamic, Eigen::Dynamic, true> samples() const {
    return source_->samples.middleCols(static_cast<Eigen::Index>(first_),
                                       static_cast<Eigen::Index>(count_));
  }

 private:
  const ChannelSet* source_;
  std::size_t first_;
  std::size_t count_;
  std::size_t window_index_;
};

struct IngestOptions {
  // Runs of missing cells up to this many samples are filled by linear
  // interpolation. Zero disables repair: any gap is an error.
  std::size_t fill_max_gap = 0;
};

ChannelSet ingest(std::istream& in, SeriesFormat format, const IngestOptions& options = {});
ChannelSet ingest_file(const std::string& path, const IngestOptions& options = {});

/// Format from the file extension (".json" → Json, anything else → Csv).
SeriesFormat format_for_path(const std::string& path);

void serialize(const ChannelSet& cs, std::ostream& out, SeriesFormat format);

/// Joins channels from several sources. All sources must share sample rate,
/// start time and length; sources are never resampled.
ChannelSet merge_channels(const std::vector<ChannelSet>& parts);

std::size_t samples_for_duration(double seconds, double sample_rate_hz);

/// Windows ordered by start time; a trailing partial window is dropped.
std::vector<MeasurementWindow> sliding_windows(const ChannelSet& cs, double length_s,
                                               double step_s);

}  // namespace modeshape
