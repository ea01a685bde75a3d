#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace ionsim::pulse {

// 5-level system: qubit pair |0>_g, |1>_g, shelving pair |aux>_g (collapsed
// to one label), and the two lowest excited states.
enum class Level : int { g0 = 0, g1 = 1, aux = 2, e0 = 3, e1 = 4 };
inline constexpr int kNumLevels = 5;

struct LevelModel {
  // cavity-coupled branching ratios; the complement shelves into |aux>
  double beta_e0 = 0.997; // |0>_e -> |1>_g (transition A, detectable)
  double beta_e1 = 0.994; // |1>_e -> |0>_g (transition E, detectable)
  double p_det = 0.01;    // detection probability per cavity photon
  double bg_per_pulse = 0.0; // mean background counts per recorded pulse

  // ground-state relaxation
  double t1_fast = 54e-3;        // |0>_g <-> |1>_g thermalization, s
  double t1_slow = 26.0;         // qubit subspace <-> |aux> exchange, s
  double qubit_frequency = 674.48e6; // Hz
  double device_temperature = 59e-3; // K

  double epsilon_pi = 0.01; // microwave pi-pulse flip error

  void validate() const;
  double boltzmann_ratio() const; // equilibrium p1/p0 = exp(-hf/kT)
};

enum class Channel {
  optical_a,   // |1>_g -> |0>_e
  optical_e,   // |0>_g -> |1>_e
  optical_f,   // |aux>  -> |1>_e (effective single pumping channel)
  optical_c,   // |aux>  -> |0>_e
  optical_afe, // A + f_e two-photon drive, |1>_g -> |1>_e
  mw_pi,       // pi pulse on |0>_g <-> |1>_g
  wait,        // free evolution, spin T1 only
};

struct Pulse {
  Channel channel = Channel::wait;
  double duration = 2.5e-6; // s
  double p_exc = 1.0;       // excitation probability (optical channels)
  bool record = false;      // detected photons from this pulse are counted
};

struct PulseSequence {
  std::vector<Pulse> pulses;
  void validate() const;
  int recorded_pulses() const;

  static PulseSequence readout_train(int n_pulses, double p_exc,
                                     double pulse_len = 2.5e-6);
  // F pumping out of |aux>, then A+f_e pumping into |0>_g
  static PulseSequence initialization(int n_f, int n_afe, double p_exc_f,
                                      double p_exc_afe);
};

enum class InitialState {
  ground_thermal, // uniform over the 4 ground states (|aux> weight 1/2)
  g0,
  g1,
  aux,
};

struct TrajectoryRecord {
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> counts_per_pulse;   // summed over shots
  std::vector<std::uint64_t> count_histogram;    // per-shot recorded totals
  // occupancy[pulse][level]: state tallies after each pulse, summed over shots
  std::vector<std::array<std::uint64_t, 5>> occupancy;
  std::array<std::uint64_t, 5> final_state{};

  double mean_counts() const;
  double final_fraction(Level s) const;
};

TrajectoryRecord simulate_sequence(const LevelModel& model, const PulseSequence& seq,
                                   std::uint64_t shots, std::uint64_t seed,
                                   InitialState initial = InitialState::ground_thermal);

struct G2Result {
  std::vector<double> g2;       // index = pulse lag
  double zero_lag = 0.0;
  double bunching_amplitude = 0.0; // g2[1] - 1
  double mean_counts_per_pulse = 0.0;
};

// Pulsewise autocorrelation of detected readout counts for a repeated
// [init?, readout] cycle. `cycles` alternating cycles are simulated.
G2Result g2_pulsewise(const LevelModel& model, const std::vector<Pulse>& init_pulses,
                      const Pulse& readout_pulse, std::uint64_t cycles,
                      std::uint64_t seed, int max_lag = 50,
                      InitialState initial = InitialState::ground_thermal);

struct SpinT1Result {
  std::vector<double> wait_times;
  std::vector<double> p0, p1, paux;
  double t_fast = 0.0;
  double t_slow = 0.0;
  double equilibrium_ratio = 0.0; // p1/p0 on the intermediate plateau
};

// Populations vs wait time after preparing |0>_g, with a bi-exponential fit.
SpinT1Result spin_t1_curves(const LevelModel& model,
                            const std::vector<double>& wait_times,
                            std::uint64_t shots_per_point, std::uint64_t seed);

// T = (hf/kB) / ln(1/ratio); inverse of the Boltzmann population map.
double temperature_from_ratio(double ratio, double frequency_hz);

} // namespace ionsim::pulse
