#include "tcpsync/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "tcpsync/errors.hpp"

namespace tcpsync {

namespace {

constexpr double kPi = std::numbers::pi;

// FFTW's planner is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

class Plan {
 public:
  explicit Plan(fftw_plan p) : p_(p) {}
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p_);
  }
  void execute() const { fftw_execute(p_); }

 private:
  fftw_plan p_;
};

// FFTW_ESTIMATE keeps the chosen algorithm, and hence the rounding, independent of timing.
std::vector<std::complex<double>> forward_real(std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  std::unique_ptr<double, FftwFree> in(fftw_alloc_real(x.size()));
  std::unique_ptr<fftw_complex, FftwFree> out(fftw_alloc_complex(x.size() / 2 + 1));
  std::unique_ptr<Plan> plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = std::make_unique<Plan>(fftw_plan_dft_r2c_1d(n, in.get(), out.get(), FFTW_ESTIMATE));
  }
  std::copy(x.begin(), x.end(), in.get());
  plan->execute();
  std::vector<std::complex<double>> result(x.size() / 2 + 1);
  for (std::size_t k = 0; k < result.size(); ++k) {
    result[k] = {out.get()[k][0], out.get()[k][1]};
  }
  return result;
}

std::vector<std::complex<double>> inverse_complex(std::vector<std::complex<double>> spec) {
  const int n = static_cast<int>(spec.size());
  std::unique_ptr<fftw_complex, FftwFree> buf(fftw_alloc_complex(spec.size()));
  std::unique_ptr<Plan> plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = std::make_unique<Plan>(
        fftw_plan_dft_1d(n, buf.get(), buf.get(), FFTW_BACKWARD, FFTW_ESTIMATE));
  }
  for (std::size_t k = 0; k < spec.size(); ++k) {
    buf.get()[k][0] = spec[k].real();
    buf.get()[k][1] = spec[k].imag();
  }
  plan->execute();
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    spec[k] = {buf.get()[k][0] * scale, buf.get()[k][1] * scale};
  }
  return spec;
}

std::vector<double> demeaned(std::span<const double> x) {
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  std::vector<double> y(x.begin(), x.end());
  for (double& v : y) v -= mean;
  return y;
}

std::span<const double> after_transient(const std::vector<double>& x, double fraction) {
  const auto skip = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(x.size())));
  return std::span<const double>(x).subspan(skip);
}

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  return a <= -kPi ? a + 2.0 * kPi : a;
}

void require_samples(std::span<const double> x) {
  if (x.size() < 8) throw std::invalid_argument("series too short for spectral estimation");
}

void check_horizon(const Trace& trace, double frequency, std::size_t analysed,
                   const EstimatorOptions& opt) {
  if (frequency <= 0.0) return;
  const double span = trace.dt * static_cast<double>(analysed);
  const double needed = opt.min_periods * 2.0 * kPi / frequency;
  if (span < needed) {
    const double required = needed / (1.0 - opt.transient_fraction);
    throw HorizonTooShort("trace covers " + format_double(span) + " s after the transient, " +
                              format_double(needed) + " s needed; use a horizon of at least " +
                              format_double(required) + " s",
                          required);
  }
}

struct OrderStats {
  double r_mean = 0.0;
  double r_min = 1.0;
  double phi0 = 0.0;
};

OrderStats order_stats(std::span<const double> a, std::span<const double> b) {
  OrderStats s;
  double sum_r = 0.0;
  std::complex<double> mean_diff{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double r = std::abs(std::cos(0.5 * (a[i] - b[i])));
    sum_r += r;
    s.r_min = std::min(s.r_min, r);
    mean_diff += std::polar(1.0, a[i] - b[i]);
  }
  s.r_mean = sum_r / static_cast<double>(a.size());
  s.phi0 = wrap_angle(std::arg(mean_diff));
  return s;
}

}  // namespace

SpectralPeak dominant_frequency(std::span<const double> x, double dt) {
  require_samples(x);
  const std::size_t n = x.size();
  std::vector<double> y = demeaned(x);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] *= 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  const auto spec = forward_real(y);
  std::vector<double> power(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) power[k] = std::norm(spec[k]);

  SpectralPeak peak;
  peak.bin_width = 2.0 * kPi / (static_cast<double>(n) * dt);
  std::size_t best = 1;
  double total = 0.0;
  for (std::size_t k = 1; k < power.size(); ++k) {
    total += power[k];
    if (power[k] > power[best]) best = k;
  }
  if (total <= 0.0) return peak;

  double delta = 0.0;
  if (best + 1 < power.size() && power[best - 1] > 0.0 && power[best + 1] > 0.0) {
    const double a = std::log(power[best - 1]);
    const double b = std::log(power[best]);
    const double c = std::log(power[best + 1]);
    const double den = a - 2.0 * b + c;
    if (den < 0.0) delta = std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
  }
  peak.omega = (static_cast<double>(best) + delta) * peak.bin_width;
  double local = power[best];
  if (best > 1) local += power[best - 1];
  if (best + 1 < power.size()) local += power[best + 1];
  peak.power_fraction = local / total;
  return peak;
}

std::vector<std::complex<double>> analytic_signal(std::span<const double> x) {
  require_samples(x);
  const std::size_t n = x.size();
  const auto half = forward_real(x);
  std::vector<std::complex<double>> full(n, {0.0, 0.0});
  full[0] = half[0];
  for (std::size_t k = 1; k < half.size(); ++k) full[k] = 2.0 * half[k];
  if (n % 2 == 0) full[n / 2] = half[n / 2];
  return inverse_complex(std::move(full));
}

std::vector<double> unwrap(std::span<const double> phase) {
  std::vector<double> out(phase.begin(), phase.end());
  double offset = 0.0;
  for (std::size_t i = 1; i < out.size(); ++i) {
    const double jump = phase[i] - phase[i - 1];
    offset -= 2.0 * kPi * std::round(jump / (2.0 * kPi));
    out[i] = phase[i] + offset;
  }
  return out;
}

std::vector<double> instantaneous_phase(std::span<const double> x) {
  const auto z = analytic_signal(demeaned(x));
  std::vector<double> wrapped(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) wrapped[i] = std::arg(z[i]);
  return unwrap(wrapped);
}

double fit_slope(std::span<const double> y, double dt) {
  const double n = static_cast<double>(y.size());
  if (y.size() < 2) throw std::invalid_argument("slope fit needs at least two samples");
  const double t_mean = 0.5 * (n - 1.0) * dt;
  const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double dt_i = static_cast<double>(i) * dt - t_mean;
    num += dt_i * (y[i] - y_mean);
    den += dt_i * dt_i;
  }
  return num / den;
}

LimitCycleEstimate estimate_limit_cycle(const Trace& trace, const std::string& variable,
                                        const EstimatorOptions& opt) {
  const auto x = after_transient(trace.column(variable), opt.transient_fraction);
  require_samples(x);
  LimitCycleEstimate est;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  est.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  est.amplitude = *hi - *lo;
  if (est.amplitude <= 1e-12 * std::max(1.0, std::abs(est.mean))) {
    est.amplitude = 0.0;
    return est;
  }
  est.frequency = dominant_frequency(x, trace.dt).omega;
  check_horizon(trace, est.frequency, x.size(), opt);
  return est;
}

LockEstimate estimate_lock(const Trace& trace, const std::string& first, const std::string& second,
                           const EstimatorOptions& opt) {
  LockEstimate lock;
  lock.first = estimate_limit_cycle(trace, first, opt);
  lock.second = estimate_limit_cycle(trace, second, opt);
  if (lock.first.amplitude == 0.0 || lock.second.amplitude == 0.0) return lock;

  const auto a = instantaneous_phase(after_transient(trace.column(first), opt.transient_fraction));
  const auto b = instantaneous_phase(after_transient(trace.column(second), opt.transient_fraction));
  const auto trim = static_cast<std::size_t>(opt.edge_trim * static_cast<double>(a.size()));
  const std::span<const double> ca = std::span(a).subspan(trim, a.size() - 2 * trim);
  const std::span<const double> cb = std::span(b).subspan(trim, b.size() - 2 * trim);

  lock.Omega = fit_slope(ca, trace.dt);
  const auto stats = order_stats(ca, cb);
  lock.r_mean = stats.r_mean;
  lock.r_min = stats.r_min;
  lock.phi0 = stats.phi0;
  const double f1 = lock.first.frequency;
  const double f2 = lock.second.frequency;
  lock.locked = std::abs(f1 - f2) <= opt.lock_frequency_tolerance * std::max(f1, f2) &&
                lock.r_mean > opt.lock_order_threshold;
  lock.first.locked = lock.second.locked = lock.locked;
  return lock;
}

LockEstimate measure_phase_lock(const Trace& trace, const std::string& first,
                                const std::string& second, const EstimatorOptions& opt) {
  const auto a = after_transient(trace.column(first), opt.transient_fraction);
  const auto b = after_transient(trace.column(second), opt.transient_fraction);
  if (a.size() < 2) throw std::invalid_argument("phase trace too short");
  LockEstimate lock;
  lock.first.frequency = fit_slope(a, trace.dt);
  lock.second.frequency = fit_slope(b, trace.dt);
  lock.Omega = lock.first.frequency;
  check_horizon(trace, std::abs(lock.Omega), a.size(), opt);
  const auto stats = order_stats(a, b);
  lock.r_mean = stats.r_mean;
  lock.r_min = stats.r_min;
  lock.phi0 = stats.phi0;
  const double f1 = std::abs(lock.first.frequency);
  const double f2 = std::abs(lock.second.frequency);
  lock.locked = std::abs(lock.first.frequency - lock.second.frequency) <=
                    opt.lock_frequency_tolerance * std::max(f1, f2) &&
                lock.r_mean > opt.lock_order_threshold;
  lock.first.locked = lock.second.locked = lock.locked;
  return lock;
}

}  // namespace tcpsync
