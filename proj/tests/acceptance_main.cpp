// Acceptance suite: one pass/fail line per criterion. The CLI binary path is
// passed as argv[1] and is used for the determinism checks.
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ionsim/cavity_qed.hpp"
#include "ionsim/constants.hpp"
#include "ionsim/decoherence.hpp"
#include "ionsim/photon_stats.hpp"
#include "ionsim/pulse_dynamics.hpp"
#include "ionsim/rng.hpp"
#include "ionsim/spin_hamiltonian.hpp"

namespace k = ionsim::constants;
namespace cav = ionsim::cavity;
namespace ph = ionsim::photon;
namespace pl = ionsim::pulse;
namespace deco = ionsim::decoherence;
namespace spin = ionsim::spin;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int idx, const std::string& desc, bool ok, const std::string& detail = "") {
  std::printf("%s: criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", idx, desc.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++g_failures;
}

bool close(double x, double ref, double tol) { return std::abs(x - ref) <= tol; }

cav::CavityParams device_cavity() {
  cav::CavityParams c;
  c.kappa = k::two_pi * 30.7e9;
  c.kappa_in_ratio = 0.5;
  c.mode_volume = 0.095e-18;
  c.refractive_index = 2.17;
  c.wavelength = 984.5e-9;
  return c;
}

cav::EmitterParams device_emitter() {
  const double gamma0 = 1.0 / 267e-6;
  const double rp = 1.0 / 763e-6;
  return cav::EmitterParams::from_partition(1.06e-31, rp, 0.5 * (gamma0 - rp),
                                            0.5 * (gamma0 - rp));
}

// ---- criteria 1-3: rate algebra ------------------------------------------

void criterion_1() {
  const auto c = device_cavity();
  const auto e = device_emitter();
  const double g = cav::single_photon_coupling(e, c);
  const auto r = cav::purcell_enhancement(g, c, e);
  const bool ok = close(g / k::two_pi, 25.5e6, 0.01 * 25.5e6) &&
                  close(r.eta, 143.0, 2.0) && close(r.t1_cav, 1.87e-6, 0.02 * 1.87e-6);
  std::ostringstream d;
  d << "g/2pi=" << g / k::two_pi << " eta=" << r.eta << " t1=" << r.t1_cav;
  report(1, "coupling/enhancement chain from device constants", ok, d.str());
}

void criterion_2() {
  const double eta = cav::eta_from_lifetimes(2.27e-6, 267e-6);
  const double pcav = cav::emission_fraction(eta);
  const double bcav =
      cav::cavity_branching_ratio(device_emitter().beta_parallel(), 2.3e-6, 267e-6);
  const bool ok = close(eta, 117.0, 1.0) && close(pcav, 0.991, 0.001) && bcav >= 0.994;
  std::ostringstream d;
  d << "eta=" << eta << " p_cav=" << pcav << " beta_cav=" << bcav;
  report(2, "enhancement and emission fraction from measured lifetimes", ok, d.str());
}

void criterion_3() {
  const double bp = device_emitter().beta_parallel();
  const double bp_fit = 1.0 - (1.0 - 0.997) / 0.94;
  const bool ok = close(bp, 0.350, 0.001) && close(bp_fit, 0.9968, 0.0005);
  std::ostringstream d;
  d << "beta_par=" << bp << " beta_par(cavity)=" << bp_fit;
  report(3, "branching ratios from rate partition and pumping fit", ok, d.str());
}

// ---- criterion 4: photon statistics oracle -------------------------------

std::vector<double> mc_ion_histogram(const ph::ReadoutModel& m, std::size_t trials,
                                     std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::poisson_distribution<int> bg(m.mean_background());
  std::vector<double> hist;
  for (std::size_t t = 0; t < trials; ++t) {
    int counts = 0;
    for (int p = 0; p < m.n_pulses; ++p) {
      if (uni(gen) < m.p_f) break;
      if (uni(gen) < m.p_tot) ++counts;
    }
    counts += bg(gen);
    if (counts >= static_cast<int>(hist.size())) hist.resize(counts + 1, 0.0);
    hist[counts] += 1.0;
  }
  for (double& h : hist) h /= static_cast<double>(trials);
  return hist;
}

double total_variation(const ph::CountDistribution& d, const std::vector<double>& emp) {
  double tv = 0.0;
  const int kmax = std::max(d.support_cap(), static_cast<int>(emp.size()) - 1);
  for (int kk = 0; kk <= kmax; ++kk) {
    const double e = kk < static_cast<int>(emp.size()) ? emp[kk] : 0.0;
    tv += std::abs(d.at(kk) - e);
  }
  return 0.5 * tv;
}

void criterion_4() {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    ph::ReadoutModel m;
    m.p_f = 0.001 + 0.02 * uni(gen);
    m.p_tot = 0.005 + 0.05 * uni(gen);
    m.gamma_bg = 100.0 * uni(gen);
    m.n_pulses = 50 + static_cast<int>(400 * uni(gen));
    m.t_r = 2.5e-6;
    const auto d = ph::convolve(ph::ion_count_distribution(m, ph::Truncation::truncated),
                                ph::background_distribution(m));
    const auto emp = mc_ion_histogram(m, 1000000, ionsim::rng::derive_seed(4, trial));
    worst = std::max(worst, total_variation(d, emp));
  }
  std::ostringstream det;
  det << "worst TV=" << worst << " over 20 tuples at 1e6 trials";
  report(4, "analytic count distribution matches Monte Carlo", worst < 0.01, det.str());
}

// ---- criteria 5-6: fidelity algebra and branching fit --------------------

void criterion_5() {
  const auto r = ph::conditional_fidelity(0.961, 0.640);
  const bool ok = close(r.p_success, 0.629, 0.001) && close(r.f_cond, 0.978, 0.001);
  std::ostringstream d;
  d << "p_success=" << r.p_success << " f_cond=" << r.f_cond;
  report(5, "conditional readout fidelity algebra", ok, d.str());
}

void criterion_6() {
  const double beta = 0.997;
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> noise(0.0, 0.01);
  int failures = 0;
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    std::vector<std::pair<double, double>> curve;
    for (int np = 20; np <= 800; np += 20) {
      const double ideal = (1.0 - std::pow(beta, np)) / (1.0 - beta);
      curve.emplace_back(np, ideal * (1.0 + noise(gen)));
    }
    const auto fit = ph::fit_branching_from_cumulative(curve, 0.94);
    worst = std::max(worst, std::abs(fit.beta_eff - beta));
    if (std::abs(fit.beta_eff - beta) > 0.001) ++failures;
  }
  std::ostringstream d;
  d << failures << "/100 seeds outside +-0.001, worst dev " << worst;
  report(6, "branching fit recovers beta_eff on noisy synthetic curves", failures == 0,
         d.str());
}

// ---- criteria 7-9: decoherence -------------------------------------------

deco::NoiseModel ou_noise(double sigma, double tau_c) {
  deco::NoiseModel n;
  n.ou.push_back({sigma, tau_c});
  return n;
}

void criterion_7() {
  struct Cfg {
    double sigma, tau_c;
    int n_pi;
  };
  const Cfg grid[] = {{k::two_pi * 20e3, 1e-3, 1},
                      {k::two_pi * 40e3, 0.2e-3, 1},
                      {k::two_pi * 20e3, 50e-6, 2},
                      {k::two_pi * 10e3, 1e-3, 4},
                      {k::two_pi * 60e3, 2e-3, 8}};
  double worst = 0.0;
  int idx = 0;
  for (const auto& c : grid) {
    const auto noise = ou_noise(c.sigma, c.tau_c);
    const auto kind = c.n_pi == 1 ? deco::SequenceKind::hahn : deco::SequenceKind::cpmg;
    const double t2 = deco::t2_from_psd(noise, kind, c.n_pi);
    const std::vector<double> times = {0.5 * t2, t2, 1.5 * t2};
    const auto seq = c.n_pi == 1 ? deco::DDSequence::hahn(t2 / 2.0)
                                 : deco::DDSequence::cpmg(c.n_pi, t2 / (2.0 * c.n_pi));
    const auto mc = deco::mc_coherence(noise, seq, times, 100000, 1000 + idx);
    for (std::size_t i = 0; i < times.size(); ++i) {
      const auto s = c.n_pi == 1
                         ? deco::DDSequence::hahn(times[i] / 2.0)
                         : deco::DDSequence::cpmg(c.n_pi, times[i] / (2.0 * c.n_pi));
      worst = std::max(worst,
                       std::abs(mc.points[i].w - deco::coherence_from_psd(noise, s, times[i])));
    }
    ++idx;
  }
  std::ostringstream d;
  d << "worst |W_mc - W_quad| = " << worst << " over 5 configs x 3 times";
  report(7, "filter-function quadrature agrees with Monte Carlo", worst < 0.02, d.str());
}

void criterion_8() {
  deco::NoiseModel n23, n20;
  n23.power_law.push_back({1e4, 2.3});
  n20.power_law.push_back({1e4, 2.0});
  std::vector<std::pair<double, double>> t2n_23, t2n_20;
  for (const int n : {1, 2, 4, 8, 16, 32}) {
    t2n_23.emplace_back(n, deco::t2_from_psd(n23, deco::SequenceKind::cpmg, n));
    t2n_20.emplace_back(n, deco::t2_from_psd(n20, deco::SequenceKind::cpmg, n));
  }
  const double e23 = deco::scaling_exponent(t2n_23).exponent;
  const double e20 = deco::scaling_exponent(t2n_20).exponent;
  const bool ok = close(e23, 0.70, 0.03) && close(e20, 2.0 / 3.0, 0.05);
  std::ostringstream d;
  d << "exponents " << e23 << " (w^-2.3), " << e20 << " (w^-2)";
  report(8, "coherence-time scaling with pulse number", ok, d.str());
}

void criterion_9() {
  deco::NoiseModel noise;
  noise.ou.push_back({k::two_pi * 15e3, 1e-3});
  noise.narrowband.push_back({340e3, k::two_pi * 60e3});
  const int n_pi = 8;
  std::vector<double> two_tau, w;
  for (double x = 0.6e-6; x <= 6.4e-6; x += 0.05e-6) {
    two_tau.push_back(x);
    const auto seq = deco::DDSequence::cpmg(n_pi, x / 2.0);
    w.push_back(deco::coherence_from_psd(noise, seq, n_pi * x));
  }
  // successive deep collapses sit at (k+1/2)/f0; their spacing is the revival
  // period, with recovery in between
  std::size_t imin1 = 0, imin2 = 0, imax = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (two_tau[i] < 2.2e-6 && w[i] < w[imin1]) imin1 = i;
    if (two_tau[i] > 3.7e-6 && two_tau[i] < 5.0e-6 && w[i] < w[imin2]) imin2 = i;
  }
  imax = imin1;
  for (std::size_t i = imin1; i <= imin2; ++i) {
    if (w[i] > w[imax]) imax = i;
  }
  const double period = 1.0 / 340e3; // 2.94 us revival spacing in 2 tau
  const bool ok = w[imin1] < 0.3 && w[imin2] < 0.3 && w[imax] > 0.9 &&
                  close(two_tau[imin1], 0.5 * period, 0.05 * period) &&
                  close(two_tau[imin2] - two_tau[imin1], period, 0.05 * period);
  std::ostringstream d;
  d << "collapses at 2tau=" << two_tau[imin1] << ", " << two_tau[imin2]
    << " (spacing " << two_tau[imin2] - two_tau[imin1] << "), recovery W=" << w[imax];
  report(9, "narrowband revivals in the CPMG tau scan", ok, d.str());
}

void criterion_10() {
  const double lw = 1.0 / (k::pi * 370e-9);
  const double t2 = 1.0 / (k::pi * 48e3);
  const bool ok = close(lw, 860e3, 0.02 * 860e3) && close(t2, 6.6e-6, 0.02 * 6.6e-6);
  std::ostringstream d;
  d << "1/(pi 370ns)=" << lw << " Hz, 1/(pi 48kHz)=" << t2 << " s";
  report(10, "linewidth/coherence-time duals", ok, d.str());
}

// ---- criterion 11: spin Hamiltonian property suite -----------------------

void criterion_11() {
  const auto sys = spin::SpinSystem::ion_x_ground();
  const auto nb = spin::default_neighbors();

  const auto h = spin::assemble_hamiltonian(sys, nb, Eigen::Vector3d(1e-4, 0.0, 2e-4));
  const double herm = (h - h.adjoint()).norm() / h.norm();

  double worst_dfdb = 0.0;
  for (const auto& axis :
       {Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(), Eigen::Vector3d::UnitZ()}) {
    const auto s = spin::field_sensitivity(sys, Eigen::Vector3d::Zero(), axis);
    worst_dfdb = std::max(worst_dfdb, std::abs(s.dfdb));
  }

  const Eigen::Vector3d r1(0.0, 0.0, 3.145e-10);
  std::vector<spin::NuclearNeighbor> nearn = {spin::NuclearNeighbor::vanadium(r1)};
  std::vector<spin::NuclearNeighbor> farn = {spin::NuclearNeighbor::vanadium(2.0 * r1)};
  const double ratio =
      spin::dipolar_term(sys, nearn, 0).norm() / spin::dipolar_term(sys, farn, 0).norm();

  const auto spec = spin::odmr_spectrum(sys, nb, 2e3);
  const double fwhm = spec.envelope_fwhm();
  double wsum = 0.0, mean = 0.0;
  for (const auto& l : spec.lines) {
    wsum += l.strength;
    mean += l.strength * l.frequency;
  }
  mean /= wsum;
  double m2 = 0.0, m3 = 0.0;
  for (const auto& l : spec.lines) {
    const double d = l.frequency - mean;
    m2 += l.strength * d * d;
    m3 += l.strength * d * d * d;
  }
  const double skew = (m3 / wsum) / std::pow(m2 / wsum, 1.5);

  const bool ok = herm < 1e-12 && worst_dfdb < 1e3 && std::abs(ratio - 8.0) < 1e-9 &&
                  fwhm <= 60e3 && std::abs(skew) > 0.02;
  std::ostringstream d;
  d << "herm=" << herm << " |df/dB|=" << worst_dfdb << " Hz/T, r^-3 ratio=" << ratio
    << ", FWHM=" << fwhm << " Hz, skew=" << skew;
  report(11, "spin Hamiltonian and simulated ODMR multiplet properties", ok, d.str());
}

// ---- criterion 12: level dynamics ----------------------------------------

void criterion_12() {
  pl::LevelModel m;
  std::vector<double> waits;
  for (int i = 0; i < 24; ++i) waits.push_back(1e-3 * std::pow(200.0 / 1e-3, i / 23.0));
  const auto t1 = pl::spin_t1_curves(m, waits, 10000, 31);
  const bool t1_ok = close(t1.t_fast, 54e-3, 0.10 * 54e-3) && close(t1.t_slow, 26.0, 2.6);

  const double ratio = m.boltzmann_ratio();
  const double temp = pl::temperature_from_ratio(ratio, m.qubit_frequency);
  const bool boltz_ok = std::abs(temp / m.device_temperature - 1.0) < 1e-6 &&
                        close(ratio, 0.578, 1e-3);

  pl::LevelModel cyc;
  cyc.t1_fast = 0.0;
  cyc.t1_slow = 0.0;
  cyc.beta_e0 = 1.0;
  cyc.p_det = 0.2;
  pl::Pulse read;
  read.channel = pl::Channel::optical_a;
  read.p_exc = 0.94;
  read.record = true;
  const auto flat = pl::g2_pulsewise(cyc, {}, read, 1000000, 3, 20, pl::InitialState::g1);
  bool g2_ok = true;
  for (int t = 1; t <= 20; ++t) g2_ok = g2_ok && close(flat.g2[t], 1.0, 0.02);

  pl::LevelModel shelf;
  shelf.p_det = 0.2;
  pl::Pulse flip;
  flip.channel = pl::Channel::mw_pi;
  auto init = pl::PulseSequence::initialization(20, 20, 0.9, 0.9);
  init.pulses.push_back(flip);
  const auto with_init = pl::g2_pulsewise(shelf, init.pulses, read, 60000, 9, 20);
  const auto no_init = pl::g2_pulsewise(shelf, {}, read, 600000, 9, 20);
  const bool bunch_ok = no_init.bunching_amplitude > with_init.bunching_amplitude &&
                        no_init.bunching_amplitude > 0.5;

  std::ostringstream d;
  d << "t_fast=" << t1.t_fast << " t_slow=" << t1.t_slow << " T=" << temp
    << " g2(cycling) in [" << *std::min_element(flat.g2.begin() + 1, flat.g2.end()) << ","
    << *std::max_element(flat.g2.begin() + 1, flat.g2.end()) << "], bunching "
    << with_init.bunching_amplitude << " -> " << no_init.bunching_amplitude;
  report(12, "relaxation fit, Boltzmann round-trip, pulsewise g2",
         t1_ok && boltz_ok && g2_ok && bunch_ok, d.str());
}

// ---- criterion 13: CLI determinism ---------------------------------------

int run_cli(const std::string& bin, const std::string& args, const fs::path& out) {
  fs::create_directories(out);
  const std::string cmd = bin + " " + args + " --out " + out.string() + " >/dev/null 2>&1";
  return std::system(cmd.c_str());
}

bool dirs_have_identical_csvs(const fs::path& a, const fs::path& b) {
  int compared = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    if (e.path().extension() != ".csv") continue;
    std::ifstream fa(e.path(), std::ios::binary);
    std::ifstream fb(b / e.path().filename(), std::ios::binary);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    if (!fb || sa.str() != sb.str() || sa.str().empty()) return false;
    ++compared;
  }
  return compared > 0;
}

void criterion_13(const std::string& bin) {
  const fs::path root = fs::temp_directory_path() / "ionsim_acceptance";
  std::error_code ec;
  fs::remove_all(root, ec);
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"ssro", "ssro --seed 11"},
      {"g2", "g2 --seed 7 --shots 30000"},
      {"init", "init --seed 5 --shots 5000"},
      {"t1", "t1 --seed 9 --shots 300"},
      {"dd", "dd --seed 3 --shots 2000"},
      {"ramsey-ps", "ramsey-ps --seed 13 --shots 30000"},
      {"sweep", "sweep ssro n_c 1..4 --seed 21"},
  };
  bool ok = true;
  std::string bad;
  for (const auto& [name, args] : runs) {
    const fs::path da = root / (name + "_a"), db = root / (name + "_b");
    if (run_cli(bin, args, da) != 0 || run_cli(bin, args, db) != 0 ||
        !dirs_have_identical_csvs(da, db)) {
      ok = false;
      bad += " " + name;
    }
  }
  report(13, "same-seed re-runs give byte-identical CSVs",
         ok, ok ? "7 subcommands compared" : ("mismatch in:" + bad));
}

} // namespace

int main(int argc, char** argv) {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  criterion_12();
  if (argc > 1) {
    criterion_13(argv[1]);
  } else {
    report(13, "same-seed re-runs give byte-identical CSVs", false,
           "CLI binary path not supplied");
  }
  std::printf("%s (%d/13 criteria)\n", g_failures == 0 ? "ACCEPTED" : "REJECTED",
              13 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
