#include "modeshape/sigproc.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>

#include <fftw3.h>

#include "modeshape/errors.hpp"
#include "spline.hpp"

namespace modeshape {

namespace {

using Index = std::vector<std::size_t>;

// FFTW's planner is not re-entrant; execution is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class FftPlan {
 public:
  FftPlan(ComplexSeries& buffer, int sign) {
    auto* data = reinterpret_cast<fftw_complex*>(buffer.data());
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(buffer.size()), data, data, sign, FFTW_ESTIMATE);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

void fft_in_place(ComplexSeries& buffer, int sign) {
  FftPlan plan(buffer, sign);
  plan.execute();
}

struct Extrema {
  Index maxima;
  Index minima;
};

Extrema find_extrema(std::span<const double> x) {
  Extrema e;
  const std::size_t n = x.size();
  std::size_t i = 1;
  while (i + 1 < n) {
    if (x[i] == x[i - 1]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && x[j + 1] == x[i]) ++j;
    if (j + 1 >= n) break;
    const std::size_t mid = (i + j) / 2;
    if (x[i] > x[i - 1] && x[j + 1] < x[i]) e.maxima.push_back(mid);
    if (x[i] < x[i - 1] && x[j + 1] > x[i]) e.minima.push_back(mid);
    i = j + 1;
  }
  return e;
}

// Elements first..last (1-based, inclusive) of v, reversed. Out-of-range
// bounds are clamped; an inverted range is empty.
Index flipped_range(const Index& v, long first, long last) {
  Index out;
  first = std::max(first, 1L);
  last = std::min(last, static_cast<long>(v.size()));
  for (long k = last; k >= first; --k) out.push_back(v[static_cast<std::size_t>(k - 1)]);
  return out;
}

struct Knots {
  std::vector<double> t;
  std::vector<double> z;
};

Knots assemble_knots(const std::vector<double>& t_left, const Index& left,
                     const Index& interior, const std::vector<double>& t_right,
                     const Index& right, std::span<const double> time,
                     std::span<const double> x) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < left.size(); ++k) pts.emplace_back(t_left[k], x[left[k]]);
  for (const auto idx : interior) pts.emplace_back(time[idx], x[idx]);
  for (std::size_t k = 0; k < right.size(); ++k) pts.emplace_back(t_right[k], x[right[k]]);
  std::sort(pts.begin(), pts.end());
  Knots knots;
  for (const auto& [tk, zk] : pts) {
    if (!knots.t.empty() && tk <= knots.t.back()) continue;
    knots.t.push_back(tk);
    knots.z.push_back(zk);
  }
  return knots;
}

std::vector<double> reflect(double axis, const Index& idx, std::span<const double> time) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (const auto k : idx) out.push_back(2.0 * axis - time[k]);
  return out;
}

// Mirror-symmetric boundary extension of the extrema sets (the Rilling et
// al. scheme): reflect about the outermost extremum, or about the end sample
// when the signal overshoots that extremum.
std::pair<Knots, Knots> envelope_knots(const Extrema& e, std::span<const double> time,
                                       std::span<const double> x, std::size_t nbsym_u) {
  const Index& imax = e.maxima;
  const Index& imin = e.minima;
  const long nb = static_cast<long>(nbsym_u);
  const long nmax = static_cast<long>(imax.size());
  const long nmin = static_cast<long>(imin.size());
  const std::size_t first = 0;
  const std::size_t last = x.size() - 1;

  Index lmax, lmin, rmax, rmin;
  std::size_t lsym = first;
  std::size_t rsym = last;

  if (imax.front() < imin.front()) {
    if (x[first] > x[imin.front()]) {
      lmax = flipped_range(imax, 2, std::min(nmax, nb + 1));
      lmin = flipped_range(imin, 1, std::min(nmin, nb));
      lsym = imax.front();
    } else {
      lmax = flipped_range(imax, 1, std::min(nmax, nb));
      lmin = flipped_range(imin, 1, std::min(nmin, nb - 1));
      lmin.push_back(first);
      lsym = first;
    }
  } else {
    if (x[first] < x[imax.front()]) {
      lmax = flipped_range(imax, 1, std::min(nmax, nb));
      lmin = flipped_range(imin, 2, std::min(nmin, nb + 1));
      lsym = imin.front();
    } else {
      lmax = flipped_range(imax, 1, std::min(nmax, nb - 1));
      lmax.push_back(first);
      lmin = flipped_range(imin, 1, std::min(nmin, nb));
      lsym = first;
    }
  }

  if (imax.back() < imin.back()) {
    if (x[last] < x[imax.back()]) {
      rmax = flipped_range(imax, std::max(nmax - nb + 1, 1L), nmax);
      rmin = flipped_range(imin, std::max(nmin - nb, 1L), nmin - 1);
      rsym = imin.back();
    } else {
      rmax = flipped_range(imax, std::max(nmax - nb + 2, 1L), nmax);
      rmax.insert(rmax.begin(), last);
      rmin = flipped_range(imin, std::max(nmin - nb + 1, 1L), nmin);
      rsym = last;
    }
  } else {
    if (x[last] > x[imin.back()]) {
      rmax = flipped_range(imax, std::max(nmax - nb, 1L), nmax - 1);
      rmin = flipped_range(imin, std::max(nmin - nb + 1, 1L), nmin);
      rsym = imax.back();
    } else {
      rmax = flipped_range(imax, std::max(nmax - nb + 1, 1L), nmax);
      rmin = flipped_range(imin, std::max(nmin - nb + 2, 1L), nmin);
      rmin.insert(rmin.begin(), last);
      rsym = last;
    }
  }

  auto tlmin = reflect(time[lsym], lmin, time);
  auto tlmax = reflect(time[lsym], lmax, time);
  auto trmin = reflect(time[rsym], rmin, time);
  auto trmax = reflect(time[rsym], rmax, time);

  // If the reflected extrema do not reach past the ends, reflect about the
  // end samples instead.
  const auto short_left = [&](const std::vector<double>& v) { return !v.empty() && v.front() > time[first]; };
  const auto short_right = [&](const std::vector<double>& v) { return !v.empty() && v.back() < time[last]; };
  if ((short_left(tlmin) || short_left(tlmax)) && lsym != first) {
    if (lsym == imax.front()) {
      lmax = flipped_range(imax, 1, std::min(nmax, nb));
    } else {
      lmin = flipped_range(imin, 1, std::min(nmin, nb));
    }
    lsym = first;
    tlmin = reflect(time[lsym], lmin, time);
    tlmax = reflect(time[lsym], lmax, time);
  }
  if ((short_right(trmin) || short_right(trmax)) && rsym != last) {
    if (rsym == imax.back()) {
      rmax = flipped_range(imax, std::max(nmax - nb + 1, 1L), nmax);
    } else {
      rmin = flipped_range(imin, std::max(nmin - nb + 1, 1L), nmin);
    }
    rsym = last;
    trmin = reflect(time[rsym], rmin, time);
    trmax = reflect(time[rsym], rmax, time);
  }

  return {assemble_knots(tlmax, lmax, imax, trmax, rmax, time, x),
          assemble_knots(tlmin, lmin, imin, trmin, rmin, time, x)};
}

bool has_enough_extrema(const Extrema& e) {
  return !e.maxima.empty() && !e.minima.empty() && e.maxima.size() + e.minima.size() >= 3;
}

double sum_of_squares(std::span<const double> x) {
  return std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
}

}  // namespace

RealSeries remove_mean(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorCode::EmptyInput, "cannot remove the mean of an empty series");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  RealSeries out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [mean](double v) { return v - mean; });
  return out;
}

std::size_t count_extrema(std::span<const double> x) {
  const auto e = find_extrema(x);
  return e.maxima.size() + e.minima.size();
}

EmdResult emd(std::span<const double> x, double sample_rate_hz, const EmdConfig& cfg) {
  if (x.size() < 4) throw Error(ErrorCode::TooFewSamples, "EMD needs at least 4 samples");
  if (!(sample_rate_hz > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) {
    throw Error(ErrorCode::NonFiniteInput, "EMD input contains non-finite values");
  }

  const std::size_t n = x.size();
  std::vector<double> time(n);
  for (std::size_t k = 0; k < n; ++k) time[k] = static_cast<double>(k) / sample_rate_hz;

  EmdResult result;
  result.residual.assign(x.begin(), x.end());

  while (static_cast<int>(result.imfs.size()) < cfg.max_imfs) {
    if (!has_enough_extrema(find_extrema(result.residual))) break;

    RealSeries h = result.residual;
    int iterations = 0;
    while (iterations < cfg.max_sift_iterations) {
      const auto ext = find_extrema(h);
      if (!has_enough_extrema(ext)) break;
      const auto [upper_knots, lower_knots] = envelope_knots(ext, time, h, cfg.mirror_extrema);
      const auto upper = detail::natural_cubic_spline(upper_knots.t, upper_knots.z, time);
      const auto lower = detail::natural_cubic_spline(lower_knots.t, lower_knots.z, time);

      RealSeries next(n);
      double diff_sq = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        next[k] = h[k] - 0.5 * (upper[k] + lower[k]);
        diff_sq += (h[k] - next[k]) * (h[k] - next[k]);
      }
      const double prev_sq = sum_of_squares(h);
      ++iterations;
      h = std::move(next);
      if (prev_sq == 0.0 || diff_sq / prev_sq < cfg.sd_threshold) break;
    }

    for (std::size_t k = 0; k < n; ++k) result.residual[k] -= h[k];
    result.imfs.push_back(std::move(h));
    result.n_sift_iterations.push_back(iterations);
  }
  return result;
}

RealSeries detrend_by_emd(std::span<const double> x, double sample_rate_hz, const EmdConfig& cfg) {
  const auto decomposition = emd(x, sample_rate_hz, cfg);
  RealSeries out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] - decomposition.residual[k];
  return out;
}

ComplexSeries analytic_signal(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 4) throw Error(ErrorCode::TooFewSamples, "analytic signal needs at least 4 samples");

  ComplexSeries spectrum(x.begin(), x.end());
  fft_in_place(spectrum, FFTW_FORWARD);

  // Bins 1..ceil(n/2)-1 are strictly positive frequencies; for even n the
  // Nyquist bin n/2 is shared and stays unscaled.
  const std::size_t positive_end = (n + 1) / 2;
  for (std::size_t k = 1; k < positive_end; ++k) spectrum[k] *= 2.0;
  for (std::size_t k = n / 2 + 1; k < n; ++k) spectrum[k] = 0.0;

  fft_in_place(spectrum, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) spectrum[k] = {x[k], spectrum[k].imag() * scale};
  return spectrum;
}

std::size_t taper_count(std::size_t n, double fraction) {
  if (!(fraction >= 0.0) || !(fraction < 0.5)) {
    throw Error(ErrorCode::InvalidArgument, "taper fraction must lie in [0, 0.5)");
  }
  // Guard against fraction * n landing a hair above an integer.
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

ComplexSeries taper_ends(std::span<const std::complex<double>> y, double fraction) {
  const std::size_t cut = taper_count(y.size(), fraction);
  if (y.size() < 2 * cut + 4) {
    throw Error(ErrorCode::WindowTooShortAfterTaper,
                std::to_string(y.size()) + " samples leave fewer than 4 after tapering");
  }
  return ComplexSeries(y.begin() + static_cast<std::ptrdiff_t>(cut),
                       y.end() - static_cast<std::ptrdiff_t>(cut));
}

double mean_frequency(std::span<const std::complex<double>> z, double sample_rate_hz) {
  const std::size_t n = z.size();
  if (n < 4) throw Error(ErrorCode::TooFewSamples, "mean frequency needs at least 4 samples");
  if (!(sample_rate_hz > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");

  ComplexSeries buffer(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) /
                                            static_cast<double>(n - 1));
    buffer[k] = w * z[k];
  }
  fft_in_place(buffer, FFTW_FORWARD);

  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double power = std::norm(buffer[k]);
    weighted += power * static_cast<double>(k) * sample_rate_hz / static_cast<double>(n);
    total += power;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroPower, "series has no spectral power");
  return weighted / total;
}

ExpFit fit_exponential(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error(ErrorCode::InvalidArgument, "xs and ys differ in length");
  if (xs.size() < 2) throw Error(ErrorCode::TooFewSamples, "exponential fit needs at least 2 points");
  const std::size_t n = xs.size();

  std::vector<double> log_y(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(ys[k] > 0.0)) {
      throw Error(ErrorCode::NonPositiveAmplitude, "amplitude at index " + std::to_string(k) + " is not positive");
    }
    log_y[k] = std::log(ys[k]);
  }

  const double x_mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
  const double ly_mean = std::accumulate(log_y.begin(), log_y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = xs[k] - x_mean;
    sxx += dx * dx;
    sxy += dx * (log_y[k] - ly_mean);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::SingularRegression, "all abscissae coincide");

  ExpFit fit;
  fit.beta = sxy / sxx;
  fit.alpha = std::exp(ly_mean - fit.beta * x_mean);
  double err = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = fit.alpha * std::exp(fit.beta * xs[k]) - ys[k];
    err += r * r;
  }
  fit.mse = err / static_cast<double>(n);
  return fit;
}

}  // namespace modeshape
