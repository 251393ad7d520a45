#include "app.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "modeshape/clustering.hpp"
#include "modeshape/errors.hpp"
#include "modeshape/observation.hpp"
#include "modeshape/synth.hpp"
#include "modeshape/timeseries.hpp"
#include "outputs.hpp"
#include "plot_data.hpp"

namespace modeshape::cli {

namespace {

namespace fs = std::filesystem;

constexpr const char* kSeedEnv = "MODESHAPE_SEED";
constexpr const char* kObservationsFile = "observations.jsonl";
constexpr const char* kEstimatesFile = "estimates.json";
constexpr const char* kPlotFile = "plot_data.json";

// Bad flags, bad config values, missing files: exit 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw UsageError(std::string(what) + " not found: " + path);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t parse_seed(const std::string& text, const std::string& where) {
  std::uint64_t value = 0;
  std::size_t used = 0;
  try {
    if (!text.empty() && text.front() != '-') value = std::stoull(text, &used, 10);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw UsageError(where + ": seed must be a nonnegative integer, got '" + text + "'");
  return value;
}

std::pair<double, double> parse_band(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("--band expects LO:HI, got '" + text + "'");
  try {
    std::size_t a = 0;
    std::size_t b = 0;
    const std::string lo_text = text.substr(0, colon);
    const std::string hi_text = text.substr(colon + 1);
    const double lo = std::stod(lo_text, &a);
    const double hi = std::stod(hi_text, &b);
    if (a != lo_text.size() || b != hi_text.size()) throw std::invalid_argument("trailing characters");
    return {lo, hi};
  } catch (const std::exception&) {
    throw UsageError("--band expects LO:HI, got '" + text + "'");
  }
}

struct AnalyzeOptions {
  std::vector<std::string> inputs;
  std::string out_dir = ".";
  std::string config_path;
  PipelineConfig pipeline;
  ClusteringConfig clustering;
  std::size_t fill_gaps = 0;
  bool part1_only = false;
  bool reproducible = false;
  bool merge = true;
  double merge_angle_deg = 15.0;
  double merge_freq_hz = 0.05;
};

// Keys mirror the long flag names with '-' replaced by '_'.
void apply_config_file(const std::string& path, AnalyzeOptions& opt) {
  require_file(path, "config file");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(slurp(path));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config file " + path + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw UsageError("config file " + path + " must hold a JSON object");

  static const std::set<std::string> kKeys = {
      "window",   "step",    "taper",        "band",        "mse_max",    "keep_pca",
      "keep_cpca", "kmin",   "kmax",         "n_init",      "max_iter",   "min_silhouette",
      "seed",     "merge",   "merge_angle",  "merge_freq",  "fill_gaps"};
  for (const auto& [key, _] : doc.items()) {
    if (!kKeys.contains(key)) throw UsageError("config file " + path + ": unknown key '" + key + "'");
  }
  try {
    auto& p = opt.pipeline;
    auto& c = opt.clustering;
    if (doc.contains("window")) p.window_length_s = doc["window"].get<double>();
    if (doc.contains("step")) p.window_step_s = doc["step"].get<double>();
    if (doc.contains("taper")) p.taper_fraction = doc["taper"].get<double>();
    if (doc.contains("band")) {
      const auto& band = doc["band"];
      if (band.is_string()) {
        std::tie(p.band_min_hz, p.band_max_hz) = parse_band(band.get<std::string>());
      } else {
        const auto v = band.get<std::vector<double>>();
        if (v.size() != 2) throw UsageError("config file " + path + ": band needs two values");
        p.band_min_hz = v[0];
        p.band_max_hz = v[1];
      }
    }
    if (doc.contains("mse_max")) p.mse_max = doc["mse_max"].get<double>();
    if (doc.contains("keep_pca")) p.keep_pca = ComponentSelection::variance(doc["keep_pca"].get<double>());
    if (doc.contains("keep_cpca")) p.keep_cpca = ComponentSelection::variance(doc["keep_cpca"].get<double>());
    if (doc.contains("kmin")) c.k_min = doc["kmin"].get<std::size_t>();
    if (doc.contains("kmax")) c.k_max = doc["kmax"].get<std::size_t>();
    if (doc.contains("n_init")) c.n_init = doc["n_init"].get<std::size_t>();
    if (doc.contains("max_iter")) c.max_iterations = doc["max_iter"].get<int>();
    if (doc.contains("min_silhouette")) c.min_silhouette = doc["min_silhouette"].get<double>();
    if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("merge")) opt.merge = doc["merge"].get<bool>();
    if (doc.contains("merge_angle")) opt.merge_angle_deg = doc["merge_angle"].get<double>();
    if (doc.contains("merge_freq")) opt.merge_freq_hz = doc["merge_freq"].get<double>();
    if (doc.contains("fill_gaps")) opt.fill_gaps = doc["fill_gaps"].get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config file " + path + ": " + e.what());
  } catch (const Error& e) {
    throw UsageError("config file " + path + ": " + e.what());
  }
}

void validate_options(const AnalyzeOptions& opt) {
  try {
    opt.pipeline.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const auto& c = opt.clustering;
  if (c.k_min < 2 || c.k_max < c.k_min) throw UsageError("cluster range needs 2 <= kmin <= kmax");
  if (c.n_init == 0) throw UsageError("n_init must be at least 1");
  if (c.max_iterations < 1) throw UsageError("max_iter must be at least 1");
  if (!(opt.merge_angle_deg > 0.0) || !(opt.merge_freq_hz > 0.0)) {
    throw UsageError("merge tolerances must be positive");
  }
}

ChannelSet load_inputs(const AnalyzeOptions& opt) {
  IngestOptions ingest_options;
  ingest_options.fill_max_gap = opt.fill_gaps;
  std::vector<ChannelSet> parts;
  for (const auto& path : opt.inputs) parts.push_back(ingest_file(path, ingest_options));
  return parts.size() == 1 ? std::move(parts.front()) : merge_channels(parts);
}

int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out) {
  const ChannelSet data = load_inputs(opt);
  const ObservationSet observations = run_part1(data, opt.pipeline);
  const auto windows = sliding_windows(data, opt.pipeline.window_length_s, opt.pipeline.window_step_s).size();
  if (observations.empty()) {
    throw Error(ErrorCode::NoObservations, "no window produced an observation inside the band with mse below " +
                                               std::to_string(opt.pipeline.mse_max) + " (" +
                                               std::to_string(windows) + " windows analysed)");
  }

  const std::string stamp = opt.reproducible ? std::string{} : utc_timestamp();
  const fs::path dir(opt.out_dir);
  OutputBatch batch;
  {
    std::ostringstream ss;
    write_observations(observations, ss);
    batch.add(dir / kObservationsFile, ss.str());
  }

  out << observations.size() << " observations from " << windows << " windows, " << data.channel_count()
      << " channels\n";

  if (opt.part1_only) {
    batch.commit();
    out << "wrote " << (dir / kObservationsFile).string() << '\n';
    return kExitOk;
  }

  ClusteringResult result = select_and_cluster(observations, opt.clustering);
  if (opt.merge) result.estimates = merge_replicates(std::move(result.estimates), opt.merge_angle_deg, opt.merge_freq_hz);

  EstimatesDocument doc;
  doc.channel_ids = data.channel_ids;
  doc.result = result;
  doc.merged = opt.merge;
  doc.generated_at = stamp;
  {
    std::ostringstream ss;
    write_estimates(doc, ss);
    batch.add(dir / kEstimatesFile, ss.str());
  }
  {
    PlotInputs plot;
    plot.channel_ids = data.channel_ids;
    plot.observations = &observations;
    plot.estimates = &result.estimates;
    plot.band_min_hz = opt.pipeline.band_min_hz;
    plot.band_max_hz = opt.pipeline.band_max_hz;
    plot.generated_at = stamp;
    std::ostringstream ss;
    write_plot_data(plot, ss);
    batch.add(dir / kPlotFile, ss.str());
  }
  batch.commit();

  out << "k = " << result.chosen_k << (result.low_confidence ? " (low confidence)" : "") << ", "
      << result.estimates.size() << " mode estimates\n";
  for (const auto& est : result.estimates) {
    char line[128];
    std::snprintf(line, sizeof(line), "  f = %.4f Hz  sigma = %+.4f 1/s  members = %zu\n", est.frequency_hz,
                  est.decay_rate, est.member_count);
    out << line;
  }
  out << "wrote " << dir.string() << '\n';
  return kExitOk;
}

struct SynthOptions {
  std::string spec_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
};

int cmd_synth(const SynthOptions& opt, std::ostream& out) {
  require_file(opt.spec_path, "scenario spec");
  ScenarioSpec spec = load_scenario_file(opt.spec_path);
  if (opt.seed) spec.rng_seed = *opt.seed;
  const ChannelSet data = generate(spec);

  std::ostringstream ss;
  serialize(data, ss, format_for_path(opt.out_path));
  OutputBatch batch;
  batch.add(opt.out_path, ss.str());
  batch.commit();

  out << "wrote " << opt.out_path << ": " << data.channel_count() << " channels, " << data.sample_count()
      << " samples at " << data.sample_rate_hz << " Hz, " << spec.modes.size() << " modes, "
      << spec.events.size() << " events\n";
  return kExitOk;
}

std::string phasor_text(const std::string& id, std::complex<double> g) {
  char buf[96];
  double degrees = std::round(std::arg(g) * 180.0 / std::numbers::pi);
  if (degrees == 0.0) degrees = 0.0;  // no "-0"
  std::snprintf(buf, sizeof(buf), "%s %.2f@%.0f", id.c_str(), std::abs(g), degrees);
  return buf;
}

void print_estimates(const EstimatesDocument& doc, std::ostream& out) {
  const auto& r = doc.result;
  out << r.estimates.size() << " mode estimates, " << doc.channel_ids.size() << " channels, k = " << r.chosen_k
      << (r.low_confidence ? " (low confidence)" : "") << (doc.merged ? ", replicates merged" : "") << '\n';
  char line[256];
  std::snprintf(line, sizeof(line), "%4s  %8s  %11s  %8s  %7s  %s\n", "mode", "f [Hz]", "sigma [1/s]", "zeta [%]",
                "members", "largest phasors");
  out << line;
  for (std::size_t e = 0; e < r.estimates.size(); ++e) {
    const auto& est = r.estimates[e];
    const double omega = 2.0 * std::numbers::pi * est.frequency_hz;
    const double zeta = -est.decay_rate / std::hypot(est.decay_rate, omega) * 100.0;

    std::vector<std::size_t> order(est.shape.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(est.shape[a]) > std::abs(est.shape[b]); });
    std::string top;
    for (std::size_t i = 0; i < std::min<std::size_t>(3, order.size()); ++i) {
      if (i > 0) top += ", ";
      top += phasor_text(doc.channel_ids[order[i]], est.shape[order[i]]);
    }
    std::snprintf(line, sizeof(line), "%4zu  %8.4f  %11.4f  %8.2f  %7zu  ", e + 1, est.frequency_hz, est.decay_rate,
                  zeta, est.member_count);
    out << line << top << '\n';
  }
}

int cmd_inspect(const std::string& path, std::ostream& out) {
  require_file(path, "file");
  const std::string content = slurp(path);

  const auto first = content.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw Error(ErrorCode::MalformedInput, path + " is empty");

  const auto whole = nlohmann::json::parse(content, nullptr, false);
  if (!whole.is_discarded() && whole.is_object() && whole.contains("format")) {
    if (whole["format"] != "modeshape-estimates/1") {
      throw Error(ErrorCode::MalformedInput, path + ": unsupported document format " + whole["format"].dump());
    }
    std::istringstream in(content);
    print_estimates(read_estimates(in), out);
    return kExitOk;
  }

  std::istringstream in(content);
  const ObservationSet obs = read_observations(in);
  const std::size_t m = obs.empty() ? 0 : obs.front().channel_count();
  out << obs.size() << " observations, " << m << " channels\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mode and mode-shape estimation from multi-channel oscillation measurements"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "modeshape 0.1.0");

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic multi-channel ringdown from a scenario spec");
  synth_cmd->add_option("--spec", synth.spec_path, "Scenario spec (JSON)")->required();
  synth_cmd->add_option("--out", synth.out_path, "Output file; .json writes JSON, anything else CSV")->required();
  std::uint64_t synth_seed = 0;
  auto* synth_seed_opt = synth_cmd->add_option("--seed", synth_seed, "Override the scenario's noise seed");

  AnalyzeOptions analyze;
  std::string band_text;
  double keep_pca = 0.95;
  double keep_cpca = 0.95;
  std::uint64_t seed_flag = 0;
  auto* analyze_cmd = app.add_subcommand("analyze", "Run Part I (observations) and Part II (clustering)");
  analyze_cmd->add_option("--input,-i", analyze.inputs, "Input CSV/JSON; repeat to merge channel sets")->required();
  analyze_cmd->add_option("--out-dir,-o", analyze.out_dir, "Directory for the output files");
  auto* config_opt = analyze_cmd->add_option("--config", analyze.config_path, "JSON file with option defaults");
  auto* band_opt = analyze_cmd->add_option("--band", band_text, "Accepted frequency band LO:HI in Hz (0.1:2.0)");
  auto* mse_opt = analyze_cmd->add_option("--mse-max", analyze.pipeline.mse_max, "Regression error threshold (4e-3)");
  auto* window_opt = analyze_cmd->add_option("--window", analyze.pipeline.window_length_s, "Window length in s (10)");
  auto* step_opt = analyze_cmd->add_option("--step", analyze.pipeline.window_step_s, "Window step in s (1)");
  auto* taper_opt = analyze_cmd->add_option("--taper", analyze.pipeline.taper_fraction, "Taper fraction per end (0.10)");
  auto* keep_pca_opt = analyze_cmd->add_option("--keep-pca", keep_pca, "PCA variance fraction kept (0.95)");
  auto* keep_cpca_opt = analyze_cmd->add_option("--keep-cpca", keep_cpca, "CPCA variance fraction kept (0.95)");
  auto* kmin_opt = analyze_cmd->add_option("--kmin", analyze.clustering.k_min, "Smallest k tried (2)");
  auto* kmax_opt = analyze_cmd->add_option("--kmax", analyze.clustering.k_max, "Largest k tried (10)");
  auto* ninit_opt = analyze_cmd->add_option("--n-init", analyze.clustering.n_init, "k-means restarts per k (10)");
  auto* seed_opt = analyze_cmd->add_option("--seed", seed_flag, std::string("Clustering seed (default from ") + kSeedEnv + ", else 0)");
  auto* fill_opt = analyze_cmd->add_option("--fill-gaps", analyze.fill_gaps, "Interpolate interior gaps up to N samples (0)");
  analyze_cmd->add_flag("--part1-only", analyze.part1_only, "Stop after writing observations");
  analyze_cmd->add_flag("--reproducible", analyze.reproducible, "Omit timestamps so reruns are byte-identical");
  bool no_merge = false;
  auto* merge_opt = analyze_cmd->add_flag("--no-merge", no_merge, "Keep replicate clusters separate");

  std::string inspect_path;
  auto* inspect_cmd = app.add_subcommand("inspect", "Summarize an estimates or observations file");
  inspect_cmd->add_option("file", inspect_path, "estimates.json or observations.jsonl")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth_cmd->parsed()) {
      if (synth_seed_opt->count() > 0) synth.seed = synth_seed;
      return cmd_synth(synth, out);
    }
    if (analyze_cmd->parsed()) {
      // Precedence: defaults < environment seed < config file < flags.
      AnalyzeOptions opt;
      opt.inputs = analyze.inputs;
      opt.out_dir = analyze.out_dir;
      opt.part1_only = analyze.part1_only;
      opt.reproducible = analyze.reproducible;
      if (const char* env = std::getenv(kSeedEnv); env != nullptr && *env != '\0') {
        opt.clustering.seed = parse_seed(env, kSeedEnv);
      }
      if (config_opt->count() > 0) apply_config_file(analyze.config_path, opt);
      if (band_opt->count() > 0) std::tie(opt.pipeline.band_min_hz, opt.pipeline.band_max_hz) = parse_band(band_text);
      if (mse_opt->count() > 0) opt.pipeline.mse_max = analyze.pipeline.mse_max;
      if (window_opt->count() > 0) opt.pipeline.window_length_s = analyze.pipeline.window_length_s;
      if (step_opt->count() > 0) opt.pipeline.window_step_s = analyze.pipeline.window_step_s;
      if (taper_opt->count() > 0) opt.pipeline.taper_fraction = analyze.pipeline.taper_fraction;
      try {
        if (keep_pca_opt->count() > 0) opt.pipeline.keep_pca = ComponentSelection::variance(keep_pca);
        if (keep_cpca_opt->count() > 0) opt.pipeline.keep_cpca = ComponentSelection::variance(keep_cpca);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      if (kmin_opt->count() > 0) opt.clustering.k_min = analyze.clustering.k_min;
      if (kmax_opt->count() > 0) opt.clustering.k_max = analyze.clustering.k_max;
      if (ninit_opt->count() > 0) opt.clustering.n_init = analyze.clustering.n_init;
      if (seed_opt->count() > 0) opt.clustering.seed = seed_flag;
      if (fill_opt->count() > 0) opt.fill_gaps = analyze.fill_gaps;
      if (merge_opt->count() > 0) opt.merge = false;
      validate_options(opt);
      for (const auto& path : opt.inputs) require_file(path, "input file");
      return cmd_analyze(opt, out);
    }
    if (inspect_cmd->parsed()) return cmd_inspect(inspect_path, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace modeshape::cli
