#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <utility>
#include <vector>

namespace ionsim::photon {

// Single-shot readout parameters (per readout sequence).
struct ReadoutModel {
  double p_f = 0.0;      // per-excitation shelving probability, 1 - beta_eff
  double p_tot = 0.0;    // detection efficiency per successful cycle
  double gamma_bg = 0.0; // background count rate, counts/s
  int n_pulses = 1;      // read pulses per sequence (N_max)
  double t_r = 0.0;      // integration window per pulse, s

  void validate() const;
  double mean_background() const { return gamma_bg * n_pulses * t_r; }
};

// Reconstructed model reproducing the reported F0 = 96.1% / F1 = 64.0% at
// n_c = 1 with 400 read pulses. Background rate and shelving probability are
// calibrated to those fidelities, not independently measured.
ReadoutModel device_readout_model();

// Probability mass function over detected photon number. Index = count.
struct CountDistribution {
  std::vector<double> pmf;

  int support_cap() const { return static_cast<int>(pmf.size()) - 1; }
  double at(int k) const {
    return (k >= 0 && k < static_cast<int>(pmf.size())) ? pmf[static_cast<std::size_t>(k)] : 0.0;
  }
  double total() const;
  double mean() const;
  // P(X >= k)
  double tail(int k) const;

  static CountDistribution point_mass(int k);
  static CountDistribution poisson(double mean_counts);
};

enum class Truncation {
  untruncated, // pure geometric with p_n = p_f / (p_tot + p_f - p_tot p_f)
  truncated,   // exact finite-pulse-train stopped process, N_r <= n_pulses
};

// Ion-only count distribution for the ion prepared in the bright state.
CountDistribution ion_count_distribution(const ReadoutModel& model,
                                         Truncation mode = Truncation::truncated);

// Poisson background counts over the full readout sequence.
CountDistribution background_distribution(const ReadoutModel& model);

CountDistribution convolve(const CountDistribution& a, const CountDistribution& b);

struct FidelityReport {
  int n_c = 1;
  double epsilon_0 = 0.0, epsilon_1 = 0.0;
  double f_0 = 0.0, f_1 = 0.0, f_avg = 0.0;
};

// Threshold assignment: >= n_c counts -> state 1.
FidelityReport assignment_errors(const CountDistribution& dist0,
                                 const CountDistribution& dist1, int n_c);

// Scans n_c and returns the report maximizing F_avg (ties -> smaller n_c).
FidelityReport optimal_threshold(const CountDistribution& dist0,
                                 const CountDistribution& dist1);

struct ConditionalReport {
  double f_cond = 0.0;
  double p_success = 0.0;
  // rows: outcomes |00>,|01>,|10>,|11>; columns: prepared |0>,|1>
  std::array<std::array<double, 2>, 4> outcome_matrix{};
};

// Two-readout conditional protocol, identical readout fidelities assumed.
ConditionalReport conditional_fidelity(double f0, double f1);

struct BranchingFit {
  double beta_eff = 0.0;
  double p_exc = 0.0;
  double beta_parallel = 0.0;
  double amplitude = 0.0;
  std::vector<std::pair<double, double>> cumulative_curve; // (N_p, N_c)
};

// Fits N_c(N_p) = amp (1 - beta^N_p) / (1 - beta); beta searched in
// [0.5, 1) by bounded scalar optimization, amplitude eliminated in closed
// form. beta_parallel = 1 - (1 - beta_eff)/p_exc.
BranchingFit fit_branching_from_cumulative(
    const std::vector<std::pair<double, double>>& curve, double p_exc);

// Two-column CSV (count, occurrences); '#' lines ignored. Normalized.
CountDistribution load_count_histogram(std::istream& in);

} // namespace ionsim::photon
