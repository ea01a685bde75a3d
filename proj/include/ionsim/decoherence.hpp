#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace ionsim::decoherence {

enum class SequenceKind { ramsey, hahn, cpmg, xy8 };

// Pi-pulse train with CPMG timing: pulses at t_j = (2j-1) t / (2N), i.e.
// edge delay tau and inter-pulse spacing 2 tau with t = 2 N tau. XY-8 uses
// the same timing; the phase pattern does not enter the dephasing filter.
struct DDSequence {
  SequenceKind kind = SequenceKind::ramsey;
  int n_pi = 0;
  double tau = 0.0; // half pulse spacing, s (bookkeeping for scans)

  void validate() const;
  double total_time() const; // 2 N tau (tau itself for Ramsey)
  // pulse positions as fractions of the total evolution time
  std::vector<double> pulse_fractions() const;

  static DDSequence ramsey(double t);
  static DDSequence hahn(double tau);
  static DDSequence cpmg(int n, double tau);
  static DDSequence xy8(int n, double tau);
};

struct OUComponent {
  double sigma = 0.0; // stationary std of the detuning, rad/s
  double tau_c = 0.0; // correlation time, s
};

struct NarrowbandComponent {
  double f0 = 0.0;        // Hz
  double amplitude = 0.0; // detuning amplitude, rad/s (random phase per shot)
};

// S(omega) = amplitude * omega^-exponent (two-sided PSD, rad^2/s / (rad/s)).
struct PowerLawComponent {
  double amplitude = 0.0;
  double exponent = 2.0;
};

struct NoiseModel {
  std::vector<OUComponent> ou;
  std::vector<NarrowbandComponent> narrowband;
  std::vector<PowerLawComponent> power_law;

  void validate() const;
  // Two-sided PSD evaluated at omega > 0. Narrowband lines enter as
  // Lorentzians of half-width 2 pi f0 / 1000 to keep chi integrable.
  double psd(double omega) const;
  bool empty() const {
    return ou.empty() && narrowband.empty() && power_law.empty();
  }
};

struct CoherencePoint {
  double t = 0.0;
  double w = 1.0;
  double chi = 0.0;
};

struct CoherenceCurve {
  std::vector<CoherencePoint> points;
};

struct StretchedExpFit {
  double t2 = 0.0;
  double exponent = 1.0;
  double amplitude = 1.0;
  double chi2 = 0.0;
};

// |y~(omega t)|^2 for the sequence's sign-switching function.
// Ramsey: 4 sin^2(wt/2); Hahn: 16 sin^4(wt/4); CPMG-N / XY-8: closed form
// from the switching-function Fourier sum.
double filter_function(const DDSequence& seq, double omega, double t);

// Gaussian-phase coherence W = exp(-chi), chi = (1/2pi) Int_0^inf S(w) F(wt)/w^2 dw
// by adaptive quadrature on log panels over [1e-3/t, 1e3 max(N,1)/t].
double coherence_from_psd(const NoiseModel& noise, const DDSequence& seq, double t);

// 1/e crossing of coherence_from_psd vs t, located by bisection.
double t2_from_psd(const NoiseModel& noise, SequenceKind kind, int n_pi);

// Exact discrete OU update with stationary initialization.
std::vector<double> ou_trajectory(double sigma, double tau_c, double dt,
                                  std::size_t n_steps, std::uint64_t seed);

// Monte Carlo coherence: W(t) = |<exp(i Int y delta)>| over sampled noise
// paths; narrowband components carry a uniform random phase per shot.
CoherenceCurve mc_coherence(const NoiseModel& noise, const DDSequence& seq,
                            const std::vector<double>& times, std::uint64_t shots,
                            std::uint64_t seed);

// Least-squares W = A exp(-(t/T2)^x), A in [0.9,1.1], x in [0.5,4].
StretchedExpFit fit_stretched_exp(const CoherenceCurve& curve);

struct ScalingFit {
  double exponent = 0.0;
  double std_error = 0.0;
};

// log-log slope of T2 vs pulse number.
ScalingFit scaling_exponent(const std::vector<std::pair<double, double>>& t2_vs_n);

// Quasi-static optical spectral diffusion with probe post-selection.
struct SpectralDiffusionModel {
  double sigma = 0.0;             // per-shot Gaussian detuning std, Hz
  double homogeneous_linewidth = 0.0; // FWHM of the probe resonance, Hz
  int probe_pulses = 30;
  double p_det_resonant = 0.05;   // per-pulse detection probability on resonance

  void validate() const;
  double unconditioned_t2star() const; // sqrt(2)/(2 pi sigma)
};

struct PostselectionEntry {
  int n_c = 0;
  double t2_star = 0.0;
  double keep_fraction = 1.0;
};

// Ramsey T2* after keeping only shots with >= n_c probe detections, for
// n_c = 0 .. n_c_max.
std::vector<PostselectionEntry> postselected_ramsey(const SpectralDiffusionModel& model,
                                                    int n_c_max, std::uint64_t shots,
                                                    std::uint64_t seed);

} // namespace ionsim::decoherence
