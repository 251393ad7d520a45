// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "app.hpp"
#include "modeshape/clustering.hpp"
#include "modeshape/decomp.hpp"
#include "modeshape/errors.hpp"
#include "modeshape/observation.hpp"
#include "modeshape/sigproc.hpp"
#include "modeshape/synth.hpp"
#include "oracles.hpp"

using namespace modeshape;
using Shape = std::vector<std::complex<double>>;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

int cli(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "modeshape");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return code;
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

std::string shape_json(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += (i ? ", " : "") + std::string("[") + fmt("%.17g", s[i].real()) + ", " + fmt("%.17g", s[i].imag()) + "]";
  }
  return out + "]";
}

struct ModeTruth {
  double f;
  double sigma;
  Shape shape;
};

std::string scenario_json(const std::vector<ModeTruth>& modes, const std::vector<std::pair<double, std::vector<double>>>& events,
                          double duration, double fs, double noise_std, std::uint64_t seed) {
  std::string s = "{\"duration_s\": " + fmt("%.17g", duration) + ", \"sample_rate_hz\": " + fmt("%.17g", fs) +
                  ", \"noise_std\": " + fmt("%.17g", noise_std) + ", \"rng_seed\": " + std::to_string(seed) +
                  ", \"modes\": [";
  for (std::size_t j = 0; j < modes.size(); ++j) {
    s += (j ? ", " : "") + std::string("{\"frequency_hz\": ") + fmt("%.17g", modes[j].f) +
         ", \"sigma\": " + fmt("%.17g", modes[j].sigma) + ", \"shape\": " + shape_json(modes[j].shape) + "}";
  }
  s += "], \"events\": [";
  for (std::size_t e = 0; e < events.size(); ++e) {
    s += (e ? ", " : "") + std::string("{\"time_s\": ") + fmt("%.17g", events[e].first);
    if (!events[e].second.empty()) {
      s += ", \"multipliers\": [";
      for (std::size_t j = 0; j < events[e].second.size(); ++j) s += (j ? ", " : "") + fmt("%.17g", events[e].second[j]);
      s += "]";
    }
    s += "}";
  }
  return s + "]}";
}

EstimatesDocument load_estimates(const std::string& path) {
  std::istringstream in(oracle::read_file(path));
  return read_estimates(in);
}

ObservationSet load_observations(const std::string& path) {
  std::istringstream in(oracle::read_file(path));
  return read_observations(in);
}

// Criterion 2 scenario: three modes, one emphasized per event.
const std::vector<ModeTruth> kThreeModes{
    {0.3, -0.12, {1.0, 0.9, 0.8, 0.9}},
    {0.5, -0.15, {-0.6, -0.55, 1.0, 0.9}},
    {0.7, -0.18, {1.0, -0.9, std::polar(0.6, kPi / 3), std::polar(0.5, -2 * kPi / 3)}},
};
const std::vector<std::pair<double, std::vector<double>>> kThreeModeEvents{
    {5.0, {1.0, 0.1, 0.1}}, {25.0, {0.1, 1.0, 0.1}}, {45.0, {0.1, 0.1, 1.0}}, {65.0, {0.1, 1.0, 0.1}}};

void write_three_mode_data(const oracle::TempDir& dir, std::uint64_t seed) {
  // Noise is 2% of the clean signal's peak.
  std::istringstream clean_spec(scenario_json(kThreeModes, kThreeModeEvents, 85.0, 10.0, 0.0, seed));
  const double peak = generate(parse_scenario(clean_spec)).samples.cwiseAbs().maxCoeff();
  oracle::write_file(dir.file("three.json"), scenario_json(kThreeModes, kThreeModeEvents, 85.0, 10.0, 0.02 * peak, seed));
  if (cli({"synth", "--spec", dir.file("three.json"), "--out", dir.file("three.csv")}) != 0)
    throw std::runtime_error("synth failed for the three-mode scenario");
}

Verdict single_mode_recovery() {
  Verdict v;
  oracle::TempDir dir;
  const ModeTruth truth{0.5, -0.3, {1.0, std::polar(0.8, kPi), 0.9, -0.7}};
  oracle::write_file(dir.file("spec.json"), scenario_json({truth}, {{0.0, {}}}, 20.0, 50.0, 0.0, 1));

  const auto start = std::chrono::steady_clock::now();
  v.require(cli({"synth", "--spec", dir.file("spec.json"), "--out", dir.file("data.csv")}) == 0, "synth failed");
  std::string err;
  v.require(cli({"analyze", "-i", dir.file("data.csv"), "-o", dir.file("out"), "--reproducible"}, &err) == 0,
            "analyze failed: " + err);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!v.pass) return v;

  const auto doc = load_estimates(dir.file("out/estimates.json"));
  v.require(doc.result.estimates.size() == 1, std::to_string(doc.result.estimates.size()) + " estimates");
  if (doc.result.estimates.empty()) return v;
  const auto& e = doc.result.estimates.front();
  double mag_err = 0;
  const double angle_err = oracle::shape_angle_error_deg(e.shape, truth.shape, &mag_err);
  const double sigma_rel = std::abs(e.decay_rate - truth.sigma) / std::abs(truth.sigma);
  v.require(std::abs(e.frequency_hz - truth.f) <= 0.05, "frequency " + fmt("%.4f", e.frequency_hz));
  v.require(sigma_rel <= 0.30, "sigma " + fmt("%.4f", e.decay_rate));
  v.require(angle_err <= 10.0, "angle error " + fmt("%.2f", angle_err));
  v.require(mag_err <= 0.10, "magnitude error " + fmt("%.3f", mag_err));
  v.require(elapsed < 5.0, "runtime " + fmt("%.2f s", elapsed));
  if (v.pass) {
    v.detail = "f=" + fmt("%.4f", e.frequency_hz) + " sigma=" + fmt("%.4f", e.decay_rate) + " angle_err=" +
               fmt("%.2f deg", angle_err) + " mag_err=" + fmt("%.3f", mag_err) + " runtime=" + fmt("%.2f s", elapsed);
  }
  return v;
}

Verdict multi_mode_separation(const oracle::TempDir& dir) {
  Verdict v;
  std::string err;
  v.require(cli({"analyze", "-i", dir.file("three.csv"), "-o", dir.file("three_out"), "--reproducible", "--seed", "1"},
                &err) == 0,
            "analyze failed: " + err);
  if (!v.pass) return v;
  const auto doc = load_estimates(dir.file("three_out/estimates.json"));
  const auto& est = doc.result.estimates;
  v.require(doc.result.chosen_k >= 3, "chosen k " + std::to_string(doc.result.chosen_k));
  v.require(est.size() >= 3, std::to_string(est.size()) + " estimates");
  if (est.size() < 3) return v;

  std::vector<const ModeEstimate*> dominant;
  for (const auto& e : est) dominant.push_back(&e);
  std::stable_sort(dominant.begin(), dominant.end(),
                   [](const ModeEstimate* a, const ModeEstimate* b) { return a->member_count > b->member_count; });
  dominant.resize(3);

  std::vector<bool> used(kThreeModes.size(), false);
  std::string summary;
  for (const auto* e : dominant) {
    std::size_t best = kThreeModes.size();
    for (std::size_t j = 0; j < kThreeModes.size(); ++j) {
      if (used[j] || std::abs(e->frequency_hz - kThreeModes[j].f) > 0.05) continue;
      if (best == kThreeModes.size() ||
          std::abs(e->frequency_hz - kThreeModes[j].f) < std::abs(e->frequency_hz - kThreeModes[best].f))
        best = j;
    }
    if (best == kThreeModes.size()) {
      v.require(false, "no injected mode near " + fmt("%.4f Hz", e->frequency_hz));
      continue;
    }
    used[best] = true;
    const double angle = oracle::shape_angle_error_deg(e->shape, kThreeModes[best].shape);
    v.require(angle <= 15.0, "shape of " + fmt("%.1f Hz", kThreeModes[best].f) + " off by " + fmt("%.1f deg", angle));
    summary += (summary.empty() ? "" : ", ") + fmt("%.3f Hz", e->frequency_hz) + "/" + fmt("%.1f deg", angle);
  }
  if (v.pass) v.detail = "k=" + std::to_string(doc.result.chosen_k) + " dominant: " + summary;
  return v;
}

Verdict decay_band() {
  Verdict v;
  oracle::TempDir dir;
  const ModeTruth truth{1.0, -0.9, {1.0, -0.6, 0.8, 0.4}};
  oracle::write_file(dir.file("spec.json"),
                     scenario_json({truth}, {{0.0, {}}, {20.0, {}}, {40.0, {}}, {60.0, {}}}, 80.0, 50.0, 0.0, 1));
  v.require(cli({"synth", "--spec", dir.file("spec.json"), "--out", dir.file("data.csv")}) == 0, "synth failed");
  std::string err;
  v.require(cli({"analyze", "-i", dir.file("data.csv"), "-o", dir.file("out"), "--window", "5", "--reproducible"},
                &err) == 0,
            "analyze failed: " + err);
  if (!v.pass) return v;
  const auto doc = load_estimates(dir.file("out/estimates.json"));
  v.require(!doc.result.estimates.empty(), "no estimate");
  if (!v.pass) return v;
  const auto& e = doc.result.estimates.front();
  v.require(std::abs(e.frequency_hz - truth.f) <= 0.05, "dominant estimate at " + fmt("%.4f Hz", e.frequency_hz));
  v.require(e.decay_rate >= -1.3 && e.decay_rate <= -0.25, "sigma " + fmt("%.4f", e.decay_rate));
  if (v.pass) v.detail = "sigma=" + fmt("%.4f", e.decay_rate) + " from " + std::to_string(e.member_count) + " observations";
  return v;
}

Verdict gate_fidelity(const oracle::TempDir& dir) {
  Verdict v;
  std::size_t noise_obs = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ScenarioSpec s;
    s.duration_s = 60.0;
    s.sample_rate_hz = 50.0;
    s.channels = 4;
    s.noise_std = 0.01;
    s.rng_seed = seed;
    noise_obs += run_part1(generate(s)).size();
  }
  v.require(noise_obs == 0, std::to_string(noise_obs) + " observations from noise");

  std::istringstream high(scenario_json({{3.0, -0.2, {1.0, -0.5, 0.7, std::polar(0.6, 1.0)}}},
                                        {{0.0, {}}, {20.0, {}}, {40.0, {}}}, 60.0, 50.0, 0.0, 1));
  const auto high_obs = run_part1(generate(parse_scenario(high))).size();
  v.require(high_obs == 0, std::to_string(high_obs) + " observations from the 3 Hz mode");

  const auto stored = load_observations(dir.file("three_out/observations.jsonl"));
  v.require(!stored.empty(), "no stored observations to re-validate");
  std::size_t bad = 0;
  for (const auto& o : stored) {
    if (!(o.frequency_hz >= 0.1 && o.frequency_hz <= 2.0 && o.regression_mse < 4e-3)) ++bad;
  }
  v.require(bad == 0, std::to_string(bad) + " stored observations fail a gate");
  if (v.pass) v.detail = "noise 0, 3 Hz 0, " + std::to_string(stored.size()) + " stored observations re-validated";
  return v;
}

Verdict numerical_identities() {
  Verdict v;
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g(0, 1);

  Eigen::MatrixXd x(6, 400);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index k = 0; k < x.cols(); ++k) x(i, k) = g(rng) * (1.0 + 0.5 * static_cast<double>(i));
  x.row(3) += 0.7 * x.row(0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i).array() -= x.row(i).mean();
  const auto p = pca(x);
  const double ortho = (p.components.transpose() * p.components - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff();
  const double recon = (p.components * p.scores - x).norm() / x.norm();
  const double trace = (x * x.transpose()).trace() / 399.0;
  double sum = 0;
  for (double e : p.eigenvalues) sum += e;
  v.require(p.components.cols() == 6 && ortho <= 1e-10, "PCA orthonormality " + fmt("%.2e", ortho));
  v.require(recon <= 1e-8, "PCA reconstruction " + fmt("%.2e", recon));
  v.require(std::abs(sum - trace) <= 1e-10 * trace, "PCA trace identity");

  Eigen::MatrixXcd y(5, 300);
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    for (Eigen::Index k = 0; k < y.cols(); ++k) y(i, k) = {g(rng), g(rng)};
  for (Eigen::Index i = 0; i < y.rows(); ++i) y.row(i).array() -= y.row(i).mean();
  const auto c = cpca(y);
  const double unit = (c.components.adjoint() * c.components - Eigen::MatrixXcd::Identity(5, 5)).cwiseAbs().maxCoeff();
  const double crecon = oracle::relative_frobenius(c.components * c.scores, y);
  const Eigen::MatrixXcd cov = y * y.adjoint() / 299.0;
  const auto oracle_eigs = oracle::hermitian_eigenvalues(cov);
  double csum = 0, worst_eig = 0;
  for (std::size_t i = 0; i < c.eigenvalues.size(); ++i) {
    csum += c.eigenvalues[i];
    worst_eig = std::max(worst_eig, std::abs(c.eigenvalues[i] - oracle_eigs[i]));
  }
  const double ctrace = cov.trace().real();
  v.require(c.components.cols() == 5 && unit <= 1e-10, "CPCA unitarity " + fmt("%.2e", unit));
  v.require(crecon <= 1e-8, "CPCA reconstruction " + fmt("%.2e", crecon));
  v.require(std::abs(csum - ctrace) <= 1e-10 * ctrace, "CPCA trace identity");
  v.require(worst_eig <= 1e-8 * oracle_eigs.front(), "CPCA eigenvalues disagree with the embedding oracle");

  const auto t = oracle::time_axis(10.0, 50.0);
  std::vector<double> cosine(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) cosine[k] = std::cos(2 * kPi * 0.5 * t[k]);
  const auto a = analytic_signal(cosine);
  double hilbert_err = 0;
  for (std::size_t k = t.size() / 10; k < t.size() - t.size() / 10; ++k)
    hilbert_err = std::max(hilbert_err, std::abs(a[k].imag() - std::sin(2 * kPi * 0.5 * t[k])));
  v.require(hilbert_err < 0.02, "H(cos) error " + fmt("%.4f", hilbert_err));

  std::vector<double> ys(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) ys[k] = 2.0 * std::exp(-0.3 * t[k]);
  const auto fit = fit_exponential(t, ys);
  v.require(std::abs(fit.alpha - 2.0) <= 1e-10 && std::abs(fit.beta + 0.3) <= 1e-10 && fit.mse < 1e-20,
            "exponential fit " + fmt("%.3e", fit.mse));

  std::vector<double> mixed(t.size());
  for (std::size_t k = 0; k < t.size(); ++k)
    mixed[k] = std::sin(2 * kPi * 1.3 * t[k]) + 0.6 * std::cos(2 * kPi * 0.3 * t[k]) + 0.05 * t[k] + 0.2 * g(rng);
  const auto d = emd(mixed, 50.0);
  double emd_err = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    double s = d.residual[k];
    for (const auto& imf : d.imfs) s += imf[k];
    emd_err = std::max(emd_err, std::abs(s - mixed[k]));
  }
  v.require(emd_err <= 1e-9, "EMD reconstruction " + fmt("%.2e", emd_err));

  if (v.pass) {
    v.detail = "ortho " + fmt("%.1e", std::max(ortho, unit)) + ", recon " + fmt("%.1e", std::max(recon, crecon)) +
               ", H err " + fmt("%.4f", hilbert_err) + ", EMD " + fmt("%.1e", emd_err);
  }
  return v;
}

// Three isotropic unit-spread Gaussian blobs in the 2M+2 = 8 dimensional
// observation space; centres are random with pairwise separation >= 10.
ObservationSet three_blob_observations(std::uint64_t seed) {
  constexpr int kDim = 8;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  std::vector<Eigen::VectorXd> centres;
  while (centres.size() < 3) {
    Eigen::VectorXd c(kDim);
    for (int d = 0; d < kDim; ++d) c(d) = 6.0 * g(rng);
    bool far = true;
    for (const auto& other : centres) far = far && (c - other).norm() >= 10.0;
    if (far) centres.push_back(c);
  }
  ObservationSet out;
  for (const auto& c : centres) {
    for (int n = 0; n < 15; ++n) {
      std::vector<double> p(kDim);
      for (int d = 0; d < kDim; ++d) p[static_cast<std::size_t>(d)] = c(d) + g(rng);
      out.push_back(ModeObservation::from_point(p));
    }
  }
  return out;
}

Verdict clustering_suite() {
  Verdict v;

  const auto blobs = oracle::gaussian_blobs(3, 40, 5, 100.0, 1.0, 99);
  const auto fit = kmeans(blobs.points, 3, 7);
  bool exact = true;
  for (std::size_t i = 0; i < blobs.labels.size(); ++i)
    for (std::size_t j = i + 1; j < blobs.labels.size(); ++j)
      if ((fit.assignment[i] == fit.assignment[j]) != (blobs.labels[i] == blobs.labels[j])) exact = false;
  v.require(exact, "blob recovery at separation/spread 100 is not exact");

  int correct_k = 0;
  std::size_t wcss_violations = 0, wcss_steps = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const auto obs = three_blob_observations(1000 + trial);
    ClusteringConfig cfg;
    cfg.seed = trial;
    const auto r = select_and_cluster(obs, cfg);
    if (r.chosen_k == 3 && !r.low_confidence) ++correct_k;

    const Eigen::MatrixXd scaled = ObservationMatrix::build(obs, cfg.scale_floor).scaled();
    for (std::size_t k = 2; k <= 10; ++k) {
      for (std::uint64_t restart = 0; restart < 10; ++restart) {
        const auto km = kmeans(scaled, k, trial * 1000 + k * 10 + restart);
        for (std::size_t s = 1; s < km.wcss_history.size(); ++s, ++wcss_steps)
          if (km.wcss_history[s] > km.wcss_history[s - 1] * (1 + 1e-12)) ++wcss_violations;
      }
    }
  }
  v.require(correct_k >= 95, "true k selected in " + std::to_string(correct_k) + "/100 trials");
  v.require(wcss_violations == 0, std::to_string(wcss_violations) + " WCSS increases");

  ModeEstimate a;
  a.frequency_hz = 0.5;
  a.decay_rate = -0.2;
  a.shape = {1.0, std::polar(0.7, 2.5), std::polar(0.4, -1.0)};
  a.member_count = 8;
  ModeEstimate b = a;
  for (auto& s : b.shape) s = -s;
  b.member_count = 5;
  const auto merged = merge_replicates({a, b});
  v.require(merged.size() == 1 && merged.front().member_count == 13, "180-degree replicate not merged");

  if (v.pass) {
    v.detail = "k=3 in " + std::to_string(correct_k) + "/100, " + std::to_string(wcss_steps) +
               " WCSS steps monotone, replicate merged";
  }
  return v;
}

Verdict reproducibility(const oracle::TempDir& dir) {
  Verdict v;
  for (const char* sub : {"rep_a", "rep_b"}) {
    v.require(cli({"analyze", "-i", dir.file("three.csv"), "-o", dir.file(sub), "--reproducible", "--seed", "11"}) == 0,
              std::string("analyze failed for ") + sub);
  }
  if (!v.pass) return v;
  for (const char* f : {"observations.jsonl", "estimates.json", "plot_data.json"}) {
    const auto lhs = oracle::read_file(dir.file(std::string("rep_a/") + f));
    const auto rhs = oracle::read_file(dir.file(std::string("rep_b/") + f));
    v.require(lhs == rhs, std::string(f) + " differs");
  }
  if (v.pass) v.detail = "3 output files byte-identical";
  return v;
}

Verdict guarded(const std::function<Verdict()>& check) {
  try {
    return check();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

int main() {
  oracle::TempDir shared;
  bool data_ready = true;
  try {
    write_three_mode_data(shared, 1);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    data_ready = false;
  }
  const auto needs_data = [&](const std::function<Verdict()>& check) {
    return data_ready ? guarded(check) : Verdict{false, "three-mode data unavailable"};
  };

  const std::vector<std::pair<std::string, Verdict>> results{
      {"single-mode recovery", guarded(single_mode_recovery)},
      {"multi-mode separation", needs_data([&] { return multi_mode_separation(shared); })},
      {"decay-rate tolerance band", guarded(decay_band)},
      {"filter-gate fidelity", needs_data([&] { return gate_fidelity(shared); })},
      {"numerical identities", guarded(numerical_identities)},
      {"clustering suite", guarded(clustering_suite)},
      {"reproducibility", needs_data([&] { return reproducibility(shared); })},
  };

  int failures = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& [name, verdict] = results[i];
    std::cout << "criterion " << i + 1 << " (" << name << "): " << (verdict.pass ? "PASS" : "FAIL");
    if (!verdict.detail.empty()) std::cout << " - " << verdict.detail;
    std::cout << '\n';
    failures += verdict.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
