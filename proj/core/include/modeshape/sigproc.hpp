#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace modeshape {

using RealSeries = std::vector<double>;
using ComplexSeries = std::vector<std::complex<double>>;

/// x minus its arithmetic mean. Throws EmptyInput for an empty series.
RealSeries remove_mean(std::span<const double> x);

/// Huang-style sifting parameters. Envelopes are natural cubic splines
/// through the extrema with mirror-symmetric extension at both ends.
struct EmdConfig {
  double sd_threshold = 0.2;        // stop sifting when SD drops below this
  int max_sift_iterations = 50;
  int max_imfs = 16;
  std::size_t mirror_extrema = 2;   // extrema reflected at each boundary
};

struct EmdResult {
  std::vector<RealSeries> imfs;     // fastest oscillation first
  RealSeries residual;
  std::vector<int> n_sift_iterations;
};

/// Empirical mode decomposition. Inputs with fewer than three extrema are
/// their own trend: no IMFs, residual == x.
EmdResult emd(std::span<const double> x, double sample_rate_hz, const EmdConfig& cfg = {});

/// x minus the EMD residual, i.e. the sum of all IMFs.
RealSeries detrend_by_emd(std::span<const double> x, double sample_rate_hz,
                          const EmdConfig& cfg = {});

/// x + jH(x) via the one-sided spectrum: negative-frequency bins zeroed,
/// positive bins doubled, DC and Nyquist kept. The real part is x exactly.
ComplexSeries analytic_signal(std::span<const double> x);

/// Number of samples removed from each end by taper_ends.
std::size_t taper_count(std::size_t n, double fraction);

/// Drops the first and last ceil(fraction * N) samples. Throws
/// WindowTooShortAfterTaper when fewer than 4 samples would remain.
ComplexSeries taper_ends(std::span<const std::complex<double>> y, double fraction = 0.10);

/// Power-weighted mean frequency over the one-sided bins [0, fs/2] of a
/// Hamming-windowed periodogram. Throws ZeroPower for an all-zero input.
double mean_frequency(std::span<const std::complex<double>> z, double sample_rate_hz);

struct ExpFit {
  double alpha = 0.0;  // amplitude at x = 0
  double beta = 0.0;   // rate, 1/s; negative means decaying
  double mse = 0.0;    // mean of (alpha e^{beta x} - y)^2 in the original domain
};

/// Ordinary least squares of ln(y) on x. Throws NonPositiveAmplitude if any
/// y <= 0 and SingularRegression if all x coincide.
ExpFit fit_exponential(std::span<const double> xs, std::span<const double> ys);

/// Count of interior local maxima plus minima (plateaus count once).
std::size_t count_extrema(std::span<const double> x);

}  // namespace modeshape
