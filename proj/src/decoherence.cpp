#include "ionsim/decoherence.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include "ionsim/constants.hpp"
#include "ionsim/numerics.hpp"
#include "ionsim/rng.hpp"

namespace ionsim::decoherence {

namespace k = ionsim::constants;
namespace num = ionsim::numerics;

void DDSequence::validate() const {
  if (n_pi < 0) throw std::domain_error("dd sequence: n_pi must be >= 0");
  if (!(tau > 0.0)) throw std::domain_error("dd sequence: tau must be > 0");
  switch (kind) {
    case SequenceKind::ramsey:
      if (n_pi != 0) throw std::domain_error("dd sequence: ramsey has no pi pulses");
      break;
    case SequenceKind::hahn:
      if (n_pi != 1) throw std::domain_error("dd sequence: hahn has one pi pulse");
      break;
    case SequenceKind::cpmg:
      if (n_pi < 1) throw std::domain_error("dd sequence: cpmg needs n_pi >= 1");
      break;
    case SequenceKind::xy8:
      if (n_pi < 8 || n_pi % 8 != 0) {
        throw std::domain_error("dd sequence: xy8 needs n_pi a positive multiple of 8");
      }
      break;
  }
}

double DDSequence::total_time() const {
  return (kind == SequenceKind::ramsey) ? tau : 2.0 * n_pi * tau;
}

std::vector<double> DDSequence::pulse_fractions() const {
  std::vector<double> f;
  f.reserve(static_cast<std::size_t>(n_pi));
  for (int j = 1; j <= n_pi; ++j) {
    f.push_back((2.0 * j - 1.0) / (2.0 * n_pi));
  }
  return f;
}

namespace {

DDSequence checked(SequenceKind kind, int n, double tau) {
  DDSequence s{kind, n, tau};
  s.validate();
  return s;
}

} // namespace

DDSequence DDSequence::ramsey(double t) { return checked(SequenceKind::ramsey, 0, t); }
DDSequence DDSequence::hahn(double tau) { return checked(SequenceKind::hahn, 1, tau); }
DDSequence DDSequence::cpmg(int n, double tau) { return checked(SequenceKind::cpmg, n, tau); }
DDSequence DDSequence::xy8(int n, double tau) { return checked(SequenceKind::xy8, n, tau); }

void NoiseModel::validate() const {
  for (const auto& c : ou) {
    if (c.sigma < 0.0) throw std::domain_error("noise: OU sigma must be >= 0");
    if (!(c.tau_c > 0.0)) throw std::domain_error("noise: OU tau_c must be > 0");
  }
  for (const auto& c : narrowband) {
    if (c.amplitude < 0.0) throw std::domain_error("noise: narrowband amplitude must be >= 0");
    if (!(c.f0 > 0.0)) throw std::domain_error("noise: narrowband f0 must be > 0");
  }
  for (const auto& c : power_law) {
    if (c.amplitude < 0.0) throw std::domain_error("noise: power-law amplitude must be >= 0");
  }
}

double NoiseModel::psd(double omega) const {
  double s = 0.0;
  for (const auto& c : ou) {
    s += c.sigma * c.sigma * 2.0 * c.tau_c / (1.0 + omega * omega * c.tau_c * c.tau_c);
  }
  for (const auto& c : narrowband) {
    const double w0 = k::two_pi * c.f0;
    const double hw = w0 / 1000.0; // delta line approximated as a Lorentzian
    const double a2 = 0.5 * c.amplitude * c.amplitude;
    const double dm = omega - w0, dp = omega + w0;
    s += a2 * (hw / (dm * dm + hw * hw) + hw / (dp * dp + hw * hw));
  }
  for (const auto& c : power_law) {
    s += c.amplitude * std::pow(omega, -c.exponent);
  }
  return s;
}

double filter_function(const DDSequence& seq, double omega, double t) {
  seq.validate();
  if (omega < 0.0) throw std::domain_error("filter_function: omega must be >= 0");
  if (!(t > 0.0)) throw std::domain_error("filter_function: t must be > 0");
  const int n = seq.n_pi;
  std::complex<double> y(1.0, 0.0);
  const double sgn_end = (n % 2 == 0) ? -1.0 : 1.0; // (-1)^(N+1)
  y += sgn_end * std::polar(1.0, omega * t);
  double sgn = -2.0;
  for (const double f : seq.pulse_fractions()) {
    y += sgn * std::polar(1.0, omega * t * f);
    sgn = -sgn;
  }
  return std::norm(y);
}

double coherence_from_psd(const NoiseModel& noise, const DDSequence& seq, double t) {
  noise.validate();
  seq.validate();
  if (t < 0.0) throw std::domain_error("coherence_from_psd: t must be >= 0");
  if (t == 0.0 || noise.empty()) return 1.0;
  const double lo = 1e-3 / t;
  const double hi = 1e3 * std::max(seq.n_pi, 1) / t;
  const auto integrand = [&](double w) {
    return noise.psd(w) * filter_function(seq, w, t) / (w * w);
  };
  // <phi^2> = (1/pi) Int_0^inf S F / w^2; W = exp(-<phi^2>/2) for Gaussian noise
  const double chi = num::integrate_log_panels(integrand, lo, hi, 1e-6) / (2.0 * k::pi);
  if (!std::isfinite(chi) || chi < 0.0) {
    throw std::runtime_error("coherence_from_psd: quadrature failed (chi non-finite)");
  }
  return std::exp(-chi);
}

double t2_from_psd(const NoiseModel& noise, SequenceKind kind, int n_pi) {
  auto seq_at = [&](double t) {
    DDSequence s;
    s.kind = kind;
    s.n_pi = n_pi;
    s.tau = (kind == SequenceKind::ramsey) ? t : t / (2.0 * std::max(n_pi, 1));
    return s;
  };
  auto w_of = [&](double t) { return coherence_from_psd(noise, seq_at(t), t); };
  const double target = std::exp(-1.0);
  double t_hi = 1e-9;
  int tries = 0;
  while (w_of(t_hi) > target) {
    t_hi *= 2.0;
    if (++tries > 100) throw std::runtime_error("t2_from_psd: no 1/e crossing found");
  }
  const double t_lo = (tries == 0) ? 1e-12 : t_hi / 2.0;
  return num::bisect([&](double t) { return w_of(t) - target; }, t_lo, t_hi,
                     1e-6 * t_hi);
}

std::vector<double> ou_trajectory(double sigma, double tau_c, double dt,
                                  std::size_t n_steps, std::uint64_t seed) {
  if (sigma < 0.0 || !(tau_c > 0.0) || !(dt > 0.0)) {
    throw std::domain_error("ou_trajectory: need sigma >= 0, tau_c > 0, dt > 0");
  }
  std::mt19937_64 eng = rng::make_engine(seed, 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double decay = std::exp(-dt / tau_c);
  const double kick = sigma * std::sqrt(1.0 - decay * decay);
  std::vector<double> path(n_steps);
  double x = sigma * gauss(eng); // stationary start
  for (std::size_t i = 0; i < n_steps; ++i) {
    path[i] = x;
    x = x * decay + kick * gauss(eng);
  }
  return path;
}

namespace {

// Precomputed integration plan for one evolution time.
struct Segment {
  double start = 0.0;
  double length = 0.0;
  double sign = 1.0;
  int n_steps = 1;
  double dt = 0.0;
};

std::vector<Segment> build_segments(const DDSequence& seq, double t,
                                    const NoiseModel& noise) {
  std::vector<double> edges{0.0};
  for (const double f : seq.pulse_fractions()) edges.push_back(f * t);
  edges.push_back(t);

  double dt_target = t / 400.0;
  for (const auto& c : noise.ou) dt_target = std::min(dt_target, c.tau_c / 30.0);

  std::vector<Segment> segs;
  double sign = 1.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    Segment s;
    s.start = edges[i];
    s.length = edges[i + 1] - edges[i];
    s.sign = sign;
    s.n_steps = std::max(1, static_cast<int>(std::ceil(s.length / dt_target)));
    s.dt = s.length / s.n_steps;
    segs.push_back(s);
    sign = -sign;
  }
  return segs;
}

} // namespace

CoherenceCurve mc_coherence(const NoiseModel& noise, const DDSequence& seq,
                            const std::vector<double>& times, std::uint64_t shots,
                            std::uint64_t seed) {
  noise.validate();
  seq.validate();
  if (shots < 1000) throw std::domain_error("mc_coherence: shots must be >= 1000");

  CoherenceCurve curve;
  curve.points.reserve(times.size());

  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    const double t = times[ti];
    if (t < 0.0) throw std::domain_error("mc_coherence: negative time");
    if (t == 0.0 || noise.empty()) {
      curve.points.push_back({t, 1.0, 0.0});
      continue;
    }
    const auto segs = build_segments(seq, t, noise);
    // per-segment OU propagator constants
    struct OUStep {
      double decay, kick;
    };
    std::vector<std::vector<OUStep>> ou_steps(noise.ou.size());
    for (std::size_t c = 0; c < noise.ou.size(); ++c) {
      ou_steps[c].reserve(segs.size());
      for (const auto& s : segs) {
        const double d = std::exp(-s.dt / noise.ou[c].tau_c);
        ou_steps[c].push_back({d, noise.ou[c].sigma * std::sqrt(1.0 - d * d)});
      }
    }

    struct BlockSum {
      double c = 0.0, s = 0.0;
    };
    std::vector<BlockSum> blocks(rng::block_count(shots));

    rng::parallel_shot_blocks(
        shots, rng::derive_seed(seed, ti),
        [&](std::size_t b, std::size_t n, std::mt19937_64& eng) {
          std::normal_distribution<double> gauss(0.0, 1.0);
          std::uniform_real_distribution<double> uni(0.0, k::two_pi);
          double sum_c = 0.0, sum_s = 0.0;
          std::vector<double> x(noise.ou.size());
          for (std::size_t shot = 0; shot < n; ++shot) {
            double phi = 0.0;
            for (std::size_t c = 0; c < noise.ou.size(); ++c) {
              x[c] = noise.ou[c].sigma * gauss(eng);
            }
            // narrowband phase integral is analytic per segment
            std::vector<std::pair<double, double>> nb; // (omega0, phase)
            nb.reserve(noise.narrowband.size());
            for (const auto& cmp : noise.narrowband) {
              nb.emplace_back(k::two_pi * cmp.f0, uni(eng));
            }
            for (std::size_t si = 0; si < segs.size(); ++si) {
              const Segment& s = segs[si];
              for (std::size_t c = 0; c < noise.ou.size(); ++c) {
                const OUStep& st = ou_steps[c][si];
                for (int step = 0; step < s.n_steps; ++step) {
                  const double x_new = x[c] * st.decay + st.kick * gauss(eng);
                  phi += s.sign * 0.5 * (x[c] + x_new) * s.dt;
                  x[c] = x_new;
                }
              }
              for (std::size_t c = 0; c < nb.size(); ++c) {
                const double w0 = nb[c].first, ph = nb[c].second;
                const double amp = noise.narrowband[c].amplitude;
                phi += s.sign * amp / w0 *
                       (std::sin(w0 * (s.start + s.length) + ph) -
                        std::sin(w0 * s.start + ph));
              }
            }
            sum_c += std::cos(phi);
            sum_s += std::sin(phi);
          }
          blocks[b].c = sum_c;
          blocks[b].s = sum_s;
        });

    double sc = 0.0, ss = 0.0;
    for (const auto& bsum : blocks) {
      sc += bsum.c;
      ss += bsum.s;
    }
    const double w = std::hypot(sc, ss) / static_cast<double>(shots);
    curve.points.push_back({t, w, (w > 0.0) ? -std::log(w) : 50.0});
  }
  return curve;
}

StretchedExpFit fit_stretched_exp(const CoherenceCurve& curve) {
  const auto& pts = curve.points;
  if (pts.size() < 5) {
    throw std::invalid_argument("fit_stretched_exp: need >= 5 points");
  }
  if (!(pts.back().w < pts.front().w)) {
    throw std::invalid_argument("fit_stretched_exp: curve is not decreasing overall");
  }
  std::vector<double> ts, ws;
  double t_min_pos = 0.0, t_max = 0.0;
  for (const auto& p : pts) {
    ts.push_back(p.t);
    ws.push_back(p.w);
    if (p.t > 0.0 && (t_min_pos == 0.0 || p.t < t_min_pos)) t_min_pos = p.t;
    t_max = std::max(t_max, p.t);
  }
  // initial T2: time nearest the 1/e level
  double t2_guess = t_max / 2.0;
  double best = 1e300;
  for (const auto& p : pts) {
    const double d = std::abs(p.w - std::exp(-1.0));
    if (p.t > 0.0 && d < best) {
      best = d;
      t2_guess = p.t;
    }
  }
  auto model = [](const std::vector<double>& p, double t) {
    return p[0] * std::exp(-std::pow(t / p[1], p[2]));
  };
  std::vector<double> p0 = {1.0, t2_guess, 1.5};
  std::vector<double> lo = {0.9, t_min_pos / 10.0, 0.5};
  std::vector<double> hi = {1.1, t_max * 100.0, 4.0};
  auto fit = num::fit_least_squares(model, ts, ws, p0, lo, hi);
  if (!fit.converged) {
    throw std::runtime_error("fit_stretched_exp: fit did not converge");
  }
  StretchedExpFit out;
  out.amplitude = fit.params[0];
  out.t2 = fit.params[1];
  out.exponent = fit.params[2];
  out.chi2 = fit.chi2;
  return out;
}

ScalingFit scaling_exponent(const std::vector<std::pair<double, double>>& t2_vs_n) {
  if (t2_vs_n.size() < 4) {
    throw std::invalid_argument("scaling_exponent: need >= 4 points");
  }
  std::vector<double> ln_n, ln_t2;
  for (const auto& [n, t2] : t2_vs_n) {
    if (!(n >= 1.0) || !(t2 > 0.0)) {
      throw std::domain_error("scaling_exponent: need N >= 1 and T2 > 0");
    }
    ln_n.push_back(std::log(n));
    ln_t2.push_back(std::log(t2));
  }
  const auto line = num::linear_regression(ln_n, ln_t2);
  return {line.slope, line.slope_stderr};
}

void SpectralDiffusionModel::validate() const {
  if (sigma < 0.0) throw std::domain_error("spectral diffusion: sigma must be >= 0");
  if (!(homogeneous_linewidth > 0.0)) {
    throw std::domain_error("spectral diffusion: linewidth must be > 0");
  }
  if (probe_pulses < 1) throw std::domain_error("spectral diffusion: probe_pulses must be >= 1");
  if (p_det_resonant < 0.0 || p_det_resonant > 1.0) {
    throw std::domain_error("spectral diffusion: p_det outside [0,1]");
  }
}

double SpectralDiffusionModel::unconditioned_t2star() const {
  return std::sqrt(2.0) / (k::two_pi * sigma);
}

std::vector<PostselectionEntry> postselected_ramsey(const SpectralDiffusionModel& model,
                                                    int n_c_max, std::uint64_t shots,
                                                    std::uint64_t seed) {
  model.validate();
  if (shots < 10000) throw std::domain_error("postselected_ramsey: shots must be >= 1e4");
  if (n_c_max < 0) throw std::domain_error("postselected_ramsey: n_c_max must be >= 0");

  std::mt19937_64 eng = rng::make_engine(seed, 0);
  std::normal_distribution<double> gauss(0.0, model.sigma);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double hw = 0.5 * model.homogeneous_linewidth;

  std::vector<double> detunings(shots);
  std::vector<int> photons(shots);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double d = gauss(eng);
    detunings[s] = d;
    const double p = model.p_det_resonant * hw * hw / (d * d + hw * hw);
    int n = 0;
    for (int pulse = 0; pulse < model.probe_pulses; ++pulse) {
      if (uni(eng) < p) ++n;
    }
    photons[s] = n;
  }

  auto t2_of_subset = [&](int n_c, double& keep_fraction) {
    std::vector<double> kept;
    for (std::uint64_t s = 0; s < shots; ++s) {
      if (photons[s] >= n_c) kept.push_back(detunings[s]);
    }
    keep_fraction = static_cast<double>(kept.size()) / static_cast<double>(shots);
    if (kept.empty()) {
      throw std::runtime_error("postselected_ramsey: zero surviving shots");
    }
    auto w_of = [&](double t) {
      double c = 0.0, s2 = 0.0;
      for (const double d : kept) {
        c += std::cos(k::two_pi * d * t);
        s2 += std::sin(k::two_pi * d * t);
      }
      return std::hypot(c, s2) / static_cast<double>(kept.size());
    };
    // bracket the 1/e time, then fit the Gaussian envelope
    double t_e = model.unconditioned_t2star();
    int tries = 0;
    while (w_of(t_e) > std::exp(-1.0) && tries++ < 60) t_e *= 1.5;
    std::vector<double> ts, ws;
    for (int i = 0; i <= 24; ++i) {
      const double t = t_e * 1.5 * i / 24.0;
      ts.push_back(t);
      ws.push_back(w_of(t));
    }
    auto gaussian = [](const std::vector<double>& p, double t) {
      return std::exp(-(t / p[0]) * (t / p[0]));
    };
    auto fit = num::fit_least_squares(gaussian, ts, ws, {t_e}, {t_e / 100.0},
                                      {t_e * 100.0});
    return fit.params[0];
  };

  std::vector<PostselectionEntry> table;
  for (int n_c = 0; n_c <= n_c_max; ++n_c) {
    PostselectionEntry e;
    e.n_c = n_c;
    e.t2_star = t2_of_subset(n_c, e.keep_fraction);
    table.push_back(e);
  }
  return table;
}

} // namespace ionsim::decoherence
