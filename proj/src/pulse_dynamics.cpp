#include "ionsim/pulse_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>
#include <stdexcept>

#include "ionsim/constants.hpp"
#include "ionsim/numerics.hpp"
#include "ionsim/rng.hpp"

namespace ionsim::pulse {

namespace k = ionsim::constants;

void LevelModel::validate() const {
  auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in01(beta_e0) || !in01(beta_e1) || !in01(p_det) || !in01(epsilon_pi)) {
    throw std::domain_error("level model: probabilities must lie in [0,1]");
  }
  if (bg_per_pulse < 0.0) throw std::domain_error("level model: negative background");
  if (!(qubit_frequency > 0.0)) throw std::domain_error("level model: qubit frequency must be > 0");
  if (!(device_temperature > 0.0)) throw std::domain_error("level model: temperature must be > 0");
}

double LevelModel::boltzmann_ratio() const {
  return std::exp(-k::h_planck * qubit_frequency /
                  (k::k_boltzmann * device_temperature));
}

void PulseSequence::validate() const {
  for (const auto& p : pulses) {
    if (!(p.duration > 0.0)) throw std::domain_error("pulse: duration must be > 0");
    if (p.p_exc < 0.0 || p.p_exc > 1.0) {
      throw std::domain_error("pulse: excitation probability outside [0,1]");
    }
  }
}

int PulseSequence::recorded_pulses() const {
  int n = 0;
  for (const auto& p : pulses) n += p.record ? 1 : 0;
  return n;
}

PulseSequence PulseSequence::readout_train(int n_pulses, double p_exc, double pulse_len) {
  PulseSequence seq;
  seq.pulses.assign(static_cast<std::size_t>(n_pulses),
                    Pulse{Channel::optical_a, pulse_len, p_exc, true});
  return seq;
}

PulseSequence PulseSequence::initialization(int n_f, int n_afe, double p_exc_f,
                                            double p_exc_afe) {
  PulseSequence seq;
  for (int i = 0; i < n_f; ++i) {
    seq.pulses.push_back(Pulse{Channel::optical_f, 2.5e-6, p_exc_f, false});
  }
  for (int i = 0; i < n_afe; ++i) {
    seq.pulses.push_back(Pulse{Channel::optical_afe, 2.5e-6, p_exc_afe, false});
  }
  return seq;
}

double TrajectoryRecord::mean_counts() const {
  double s = 0.0;
  for (std::size_t i = 0; i < count_histogram.size(); ++i) {
    s += static_cast<double>(i) * static_cast<double>(count_histogram[i]);
  }
  return shots ? s / static_cast<double>(shots) : 0.0;
}

double TrajectoryRecord::final_fraction(Level s) const {
  return shots ? static_cast<double>(final_state[static_cast<int>(s)]) /
                     static_cast<double>(shots)
               : 0.0;
}

namespace {

struct GroundRates {
  double g1_to_g0 = 0.0;
  double g0_to_g1 = 0.0;
  double q_to_aux = 0.0;  // per qubit state
  double aux_to_q = 0.0;  // per qubit target state
};

// t1 <= 0 or infinite disables the corresponding relaxation channel.
GroundRates make_rates(const LevelModel& m) {
  GroundRates r;
  const double ratio = m.boltzmann_ratio();
  if (m.t1_fast > 0.0 && std::isfinite(m.t1_fast)) {
    r.g1_to_g0 = 1.0 / (m.t1_fast * (1.0 + ratio));
    r.g0_to_g1 = ratio / (m.t1_fast * (1.0 + ratio));
  }
  if (m.t1_slow > 0.0 && std::isfinite(m.t1_slow)) {
    // |aux> is doubly degenerate: equilibrium puts half the population there
    r.aux_to_q = 1.0 / (4.0 * m.t1_slow);
    r.q_to_aux = 1.0 / (2.0 * m.t1_slow);
  }
  return r;
}

void evolve_ground(Level& state, double dt, const GroundRates& r,
                   std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  while (dt > 0.0) {
    double r_a = 0.0, r_b = 0.0; // two exit channels of the current state
    Level dest_a = state, dest_b = state;
    switch (state) {
      case Level::g0:
        r_a = r.g0_to_g1; dest_a = Level::g1;
        r_b = r.q_to_aux; dest_b = Level::aux;
        break;
      case Level::g1:
        r_a = r.g1_to_g0; dest_a = Level::g0;
        r_b = r.q_to_aux; dest_b = Level::aux;
        break;
      case Level::aux:
        r_a = r.aux_to_q; dest_a = Level::g0;
        r_b = r.aux_to_q; dest_b = Level::g1;
        break;
      default:
        return; // excited states do not free-evolve here
    }
    const double total = r_a + r_b;
    if (total <= 0.0) return;
    const double jump_at = -std::log(1.0 - uni(rng)) / total;
    if (jump_at > dt) return;
    dt -= jump_at;
    state = (uni(rng) * total < r_a) ? dest_a : dest_b;
  }
}

Level draw_initial(InitialState init, std::mt19937_64& rng) {
  switch (init) {
    case InitialState::g0: return Level::g0;
    case InitialState::g1: return Level::g1;
    case InitialState::aux: return Level::aux;
    case InitialState::ground_thermal: {
      std::uniform_real_distribution<double> uni(0.0, 1.0);
      const double u = uni(rng);
      if (u < 0.25) return Level::g0;
      if (u < 0.5) return Level::g1;
      return Level::aux; // two degenerate states
    }
  }
  return Level::g0;
}

// One pulse acting on one trajectory; returns detected counts.
int apply_pulse(Level& state, const Pulse& p, const LevelModel& m,
                const GroundRates& rates, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  int detected = 0;
  bool photon = false;

  auto excite = [&](Level from, Level to) {
    if (state == from && uni(rng) < p.p_exc) state = to;
  };

  switch (p.channel) {
    case Channel::optical_a: excite(Level::g1, Level::e0); break;
    case Channel::optical_e: excite(Level::g0, Level::e1); break;
    case Channel::optical_f: excite(Level::aux, Level::e1); break;
    case Channel::optical_c: excite(Level::aux, Level::e0); break;
    case Channel::optical_afe: excite(Level::g1, Level::e1); break;
    case Channel::mw_pi:
      if (state == Level::g0 || state == Level::g1) {
        if (uni(rng) >= m.epsilon_pi) {
          state = (state == Level::g0) ? Level::g1 : Level::g0;
        }
      }
      return 0;
    case Channel::wait:
      evolve_ground(state, p.duration, rates, rng);
      return 0;
  }

  // optical decay applied at pulse end (pulse length ~ excited lifetime;
  // only pulse-binned counts are observed)
  if (state == Level::e0) {
    if (uni(rng) < m.beta_e0) {
      state = Level::g1;
      photon = true;
    } else {
      state = Level::aux;
    }
  } else if (state == Level::e1) {
    if (uni(rng) < m.beta_e1) {
      state = Level::g0;
      photon = true;
    } else {
      state = Level::aux;
    }
  }

  if (p.record) {
    if (photon && uni(rng) < m.p_det) ++detected;
    if (m.bg_per_pulse > 0.0) {
      std::poisson_distribution<int> bg(m.bg_per_pulse);
      detected += bg(rng);
    }
  }
  // the spin relaxation clock also runs during optical pulses
  evolve_ground(state, p.duration, rates, rng);
  return detected;
}

} // namespace

TrajectoryRecord simulate_sequence(const LevelModel& model, const PulseSequence& seq,
                                   std::uint64_t shots, std::uint64_t seed,
                                   InitialState initial) {
  model.validate();
  seq.validate();
  if (shots < 1) throw std::domain_error("simulate_sequence: shots must be >= 1");

  const GroundRates rates = make_rates(model);
  const std::size_t n_pulses = seq.pulses.size();

  struct BlockAccum {
    std::vector<std::uint64_t> counts_per_pulse;
    std::vector<std::uint64_t> histogram;
    std::vector<std::array<std::uint64_t, 5>> occupancy;
    std::array<std::uint64_t, 5> final_state{};
  };
  std::vector<BlockAccum> blocks(rng::block_count(shots));

  rng::parallel_shot_blocks(shots, seed, [&](std::size_t b, std::size_t n,
                                             std::mt19937_64& eng) {
    BlockAccum& acc = blocks[b];
    acc.counts_per_pulse.assign(n_pulses, 0);
    acc.occupancy.assign(n_pulses, std::array<std::uint64_t, 5>{});
    for (std::size_t s = 0; s < n; ++s) {
      Level state = draw_initial(initial, eng);
      std::uint64_t total = 0;
      for (std::size_t i = 0; i < n_pulses; ++i) {
        const int c = apply_pulse(state, seq.pulses[i], model, rates, eng);
        acc.counts_per_pulse[i] += static_cast<std::uint64_t>(c);
        acc.occupancy[i][static_cast<int>(state)]++;
        total += static_cast<std::uint64_t>(c);
      }
      if (total >= acc.histogram.size()) acc.histogram.resize(total + 1, 0);
      acc.histogram[total]++;
      acc.final_state[static_cast<int>(state)]++;
    }
  });

  TrajectoryRecord rec;
  rec.shots = shots;
  rec.seed = seed;
  rec.counts_per_pulse.assign(n_pulses, 0);
  rec.occupancy.assign(n_pulses, std::array<std::uint64_t, 5>{});
  for (const auto& acc : blocks) {
    for (std::size_t i = 0; i < n_pulses; ++i) {
      rec.counts_per_pulse[i] += acc.counts_per_pulse[i];
      for (int l = 0; l < kNumLevels; ++l) rec.occupancy[i][l] += acc.occupancy[i][l];
    }
    if (acc.histogram.size() > rec.count_histogram.size()) {
      rec.count_histogram.resize(acc.histogram.size(), 0);
    }
    for (std::size_t i = 0; i < acc.histogram.size(); ++i) {
      rec.count_histogram[i] += acc.histogram[i];
    }
    for (int l = 0; l < kNumLevels; ++l) rec.final_state[l] += acc.final_state[l];
  }
  return rec;
}

G2Result g2_pulsewise(const LevelModel& model, const std::vector<Pulse>& init_pulses,
                      const Pulse& readout_pulse, std::uint64_t cycles,
                      std::uint64_t seed, int max_lag, InitialState initial) {
  model.validate();
  if (!readout_pulse.record) {
    throw std::invalid_argument("g2_pulsewise: readout pulse must be recorded");
  }
  if (max_lag < 1) throw std::invalid_argument("g2_pulsewise: max_lag must be >= 1");

  const GroundRates rates = make_rates(model);
  const std::size_t lag = static_cast<std::size_t>(max_lag);

  // Independent chains, one per shot block; pulsewise correlations are
  // accumulated within each chain and merged across chains.
  struct BlockAccum {
    double sum_c = 0.0;
    std::uint64_t n_cycles = 0;
    std::vector<double> pair_sum;     // lag 1..max_lag
    std::vector<std::uint64_t> pair_n;
    double zero_lag_sum = 0.0;
  };
  std::vector<BlockAccum> blocks(rng::block_count(cycles));

  rng::parallel_shot_blocks(cycles, seed, [&](std::size_t b, std::size_t n,
                                              std::mt19937_64& eng) {
    BlockAccum& acc = blocks[b];
    acc.pair_sum.assign(lag, 0.0);
    acc.pair_n.assign(lag, 0);
    std::vector<int> counts(n, 0);
    Level state = draw_initial(initial, eng);
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& p : init_pulses) {
        apply_pulse(state, p, model, rates, eng);
      }
      counts[i] = apply_pulse(state, readout_pulse, model, rates, eng);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double c = counts[i];
      acc.sum_c += c;
      acc.zero_lag_sum += c * (c - 1.0);
      for (std::size_t t = 1; t <= lag && i + t < n; ++t) {
        acc.pair_sum[t - 1] += c * counts[i + t];
        acc.pair_n[t - 1]++;
      }
    }
    acc.n_cycles = n;
  });

  double sum_c = 0.0, zero_sum = 0.0;
  std::uint64_t n_total = 0;
  std::vector<double> pair_sum(lag, 0.0);
  std::vector<std::uint64_t> pair_n(lag, 0);
  for (const auto& acc : blocks) {
    sum_c += acc.sum_c;
    zero_sum += acc.zero_lag_sum;
    n_total += acc.n_cycles;
    for (std::size_t t = 0; t < lag; ++t) {
      pair_sum[t] += acc.pair_sum[t];
      pair_n[t] += acc.pair_n[t];
    }
  }
  if (sum_c <= 0.0) {
    throw std::runtime_error("g2_pulsewise: insufficient statistics (zero detected events)");
  }
  const double mean = sum_c / static_cast<double>(n_total);

  G2Result out;
  out.mean_counts_per_pulse = mean;
  out.zero_lag = (zero_sum / static_cast<double>(n_total)) / (mean * mean);
  out.g2.resize(lag + 1);
  out.g2[0] = out.zero_lag;
  for (std::size_t t = 1; t <= lag; ++t) {
    out.g2[t] = pair_n[t - 1]
                    ? (pair_sum[t - 1] / static_cast<double>(pair_n[t - 1])) / (mean * mean)
                    : 0.0;
  }
  out.bunching_amplitude = out.g2[1] - 1.0;
  return out;
}

SpinT1Result spin_t1_curves(const LevelModel& model,
                            const std::vector<double>& wait_times,
                            std::uint64_t shots_per_point, std::uint64_t seed) {
  model.validate();
  if (wait_times.size() < 5) {
    throw std::invalid_argument("spin_t1_curves: need >= 5 wait times");
  }
  const GroundRates rates = make_rates(model);

  SpinT1Result out;
  out.wait_times = wait_times;
  out.p0.resize(wait_times.size());
  out.p1.resize(wait_times.size());
  out.paux.resize(wait_times.size());

  for (std::size_t w = 0; w < wait_times.size(); ++w) {
    const double tau = wait_times[w];
    std::vector<std::array<std::uint64_t, 3>> tallies(rng::block_count(shots_per_point));
    rng::parallel_shot_blocks(
        shots_per_point, rng::derive_seed(seed, w),
        [&](std::size_t b, std::size_t n, std::mt19937_64& eng) {
          auto& t = tallies[b];
          t = {0, 0, 0};
          for (std::size_t s = 0; s < n; ++s) {
            Level state = Level::g0;
            evolve_ground(state, tau, rates, eng);
            t[static_cast<int>(state)]++;
          }
        });
    std::array<std::uint64_t, 3> total{};
    for (const auto& t : tallies) {
      for (int l = 0; l < 3; ++l) total[l] += t[l];
    }
    const double n = static_cast<double>(shots_per_point);
    out.p0[w] = static_cast<double>(total[0]) / n;
    out.p1[w] = static_cast<double>(total[1]) / n;
    out.paux[w] = static_cast<double>(total[2]) / n;
  }

  // bi-exponential fit p(tau) = c + a exp(-tau/tf) + b exp(-tau/ts)
  auto biexp = [](const std::vector<double>& p, double tau) {
    return p[0] + p[1] * std::exp(-tau / p[3]) + p[2] * std::exp(-tau / p[4]);
  };
  const double t_lo = wait_times.front(), t_hi = wait_times.back();
  auto fit_curve = [&](const std::vector<double>& y) {
    const std::size_t n = y.size();
    const double p_mid = y[n / 2];
    std::vector<double> p0 = {y.back(), y.front() - p_mid, p_mid - y.back(),
                              wait_times[n / 4], wait_times[3 * n / 4]};
    std::vector<double> lo = {0.0, -1.0, -1.0, t_lo / 10.0, t_lo};
    std::vector<double> hi = {1.0, 1.0, 1.0, t_hi, t_hi * 10.0};
    return ionsim::numerics::fit_least_squares(biexp, wait_times, y, p0, lo, hi);
  };

  auto f0 = fit_curve(out.p0);
  auto f1 = fit_curve(out.p1);
  if (!f0.converged || !f1.converged) {
    throw std::runtime_error("spin_t1_curves: bi-exponential fit did not converge");
  }
  out.t_fast = std::min(f0.params[3], f0.params[4]);
  out.t_slow = std::max(f0.params[3], f0.params[4]);
  // plateau after the fast process, before aux exchange: c + b
  const bool fast_is_3 = f0.params[3] <= f0.params[4];
  const double p0_plateau = f0.params[0] + (fast_is_3 ? f0.params[2] : f0.params[1]);
  const bool fast1_is_3 = f1.params[3] <= f1.params[4];
  const double p1_plateau = f1.params[0] + (fast1_is_3 ? f1.params[2] : f1.params[1]);
  out.equilibrium_ratio = (p0_plateau > 0.0) ? p1_plateau / p0_plateau : 0.0;
  return out;
}

double temperature_from_ratio(double ratio, double frequency_hz) {
  if (!(frequency_hz > 0.0)) {
    throw std::domain_error("temperature_from_ratio: frequency must be > 0");
  }
  if (ratio <= 0.0) throw std::domain_error("temperature_from_ratio: ratio must be > 0");
  if (ratio >= 1.0) {
    throw std::domain_error("temperature_from_ratio: ratio >= 1 (infinite temperature)");
  }
  return k::h_planck * frequency_hz / (k::k_boltzmann * std::log(1.0 / ratio));
}

} // namespace ionsim::pulse
