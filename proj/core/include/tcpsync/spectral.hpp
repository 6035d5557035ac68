#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "tcpsync/trace.hpp"

namespace tcpsync {

struct SpectralPeak {
  double omega = 0.0;      // rad/s
  double bin_width = 0.0;  // rad/s, 2π / (N dt)
  double power_fraction = 0.0;  // share of non-DC power in the three bins around the peak
};

/// Dominant non-DC frequency of a uniformly sampled series: Hann window on the
/// mean-removed samples, real FFT, parabolic refinement of the log-magnitude
/// peak (the refinement never moves the estimate by more than half a bin).
SpectralPeak dominant_frequency(std::span<const double> x, double dt);

/// Analytic signal x + j H[x] computed spectrally (one-sided spectrum doubling).
std::vector<std::complex<double>> analytic_signal(std::span<const double> x);

/// Removes 2π jumps from a wrapped phase series.
std::vector<double> unwrap(std::span<const double> phase);

/// Unwrapped phase of the analytic signal of the mean-removed series.
std::vector<double> instantaneous_phase(std::span<const double> x);

/// Least-squares slope of y against t = i dt.
double fit_slope(std::span<const double> y, double dt);

struct EstimatorOptions {
  double transient_fraction = 0.3;  // leading share of the trace discarded
  double min_periods = 20.0;        // required periods after the transient
  double edge_trim = 0.05;          // share trimmed at both ends of analytic-signal phases
  double lock_frequency_tolerance = 0.01;
  double lock_order_threshold = 0.95;
};

struct LimitCycleEstimate {
  double amplitude = 0.0;  // peak to peak, units of the variable
  double frequency = 0.0;  // rad/s, 0 for a constant series
  double mean = 0.0;
  bool locked = false;     // only meaningful for two-variable estimates
};

/// Amplitude and dominant frequency of one variable after the transient.
/// Throws HorizonTooShort when fewer than `min_periods` periods remain.
LimitCycleEstimate estimate_limit_cycle(const Trace& trace, const std::string& variable,
                                        const EstimatorOptions& opt = {});

struct LockEstimate {
  LimitCycleEstimate first;
  LimitCycleEstimate second;
  double Omega = 0.0;   // slope of the first variable's unwrapped phase
  double phi0 = 0.0;    // mean phase lead of the first variable, wrapped to (-π, π]
  double r_mean = 0.0;  // mean order parameter of the two phases
  double r_min = 0.0;
  bool locked = false;
};

/// Lock detection between two oscillating variables (fluid windows, queues):
/// phases from the analytic signal, locked when the dominant frequencies
/// agree within the tolerance and the mean order parameter exceeds the threshold.
LockEstimate estimate_lock(const Trace& trace, const std::string& first, const std::string& second,
                           const EstimatorOptions& opt = {});

/// Same measurements for variables that already are unwrapped phases.
LockEstimate measure_phase_lock(const Trace& trace, const std::string& first,
                                const std::string& second, const EstimatorOptions& opt = {});

}  // namespace tcpsync
