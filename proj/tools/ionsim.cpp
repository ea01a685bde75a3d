// Command-line front end: each subcommand reproduces one simulated dataset
// (enhancement report, readout histograms, g2, pumping sweeps, spin T1,
// ODMR multiplet, decoupling curves, post-selected Ramsey) as CSV plus a
// JSON run manifest.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ionsim/cavity_qed.hpp"
#include "ionsim/constants.hpp"
#include "ionsim/decoherence.hpp"
#include "ionsim/io.hpp"
#include "ionsim/photon_stats.hpp"
#include "ionsim/pulse_dynamics.hpp"
#include "ionsim/rng.hpp"
#include "ionsim/spin_hamiltonian.hpp"

namespace k = ionsim::constants;
namespace cavity = ionsim::cavity;
namespace photon = ionsim::photon;
namespace pulse = ionsim::pulse;
namespace deco = ionsim::decoherence;
namespace spin = ionsim::spin;
namespace io = ionsim::io;
namespace fs = std::filesystem;

namespace {

const std::map<std::string, std::vector<std::string>> kSchema = {
    {"run", {"seed", "out", "shots"}},
    {"cavity", {"kappa_hz", "kappa_in_ratio", "mode_volume_um3", "refractive_index",
                "wavelength_nm"}},
    {"emitter", {"dipole_moment", "t1_bulk_us", "rate_parallel", "rate_perp", "rate_other",
                 "t1_cav_us"}},
    {"readout", {"preset", "p_f", "p_tot", "gamma_bg_hz", "n_pulses", "t_r_us", "n_c",
                 "p_exc"}},
    {"levels", {"beta_e0", "beta_e1", "p_det", "bg_per_pulse", "t1_fast_s", "t1_slow_s",
                "qubit_frequency_hz", "device_temperature_k", "epsilon_pi"}},
    {"noise", {"ou_sigma_rad", "ou_tau_c_s", "narrowband_f0_hz", "narrowband_amp_rad",
               "power_law_amp", "power_law_exp"}},
    {"dd", {"sequence", "n_pi", "t_max_s", "n_times", "n_list"}},
    {"ramsey", {"sigma_hz", "homogeneous_linewidth_hz", "probe_pulses", "p_det_resonant",
                "n_c_max"}},
    {"odmr", {"preset", "broadening_fwhm_hz", "neighbors"}},
    {"t1", {"t_min_s", "t_max_s", "n_points"}},
    {"init", {"n_f", "n_afe_max", "p_exc_f", "p_exc_afe"}},
};

struct Context {
  io::Config cfg;
  std::uint64_t seed = 1;
  std::uint64_t shots = 100000;
  fs::path out_dir = "out";
  std::string config_hash;
};

struct OutputFile {
  fs::path name;
  std::string contents;
};

void finish(const Context& ctx, const std::string& subcommand, const std::string& target,
            std::vector<OutputFile> files) {
  io::RunManifest man;
  man.subcommand = subcommand;
  man.target = target;
  man.seed = ctx.seed;
  man.config_hash = ctx.config_hash;
  man.version = io::kToolkitVersion;
  for (const auto& f : files) man.outputs.push_back(f.name.string());
  // everything is rendered before the first write: a failure above leaves
  // no partial outputs
  for (const auto& f : files) io::atomic_write(ctx.out_dir / f.name, f.contents);
  io::atomic_write(ctx.out_dir / (subcommand + "_manifest.json"), man.to_json());
}

cavity::CavityParams cavity_from(const io::Config& c) {
  cavity::CavityParams p;
  p.kappa = k::two_pi * c.get_double("cavity", "kappa_hz", 30.7e9);
  p.kappa_in_ratio = c.get_double("cavity", "kappa_in_ratio", 0.5);
  p.mode_volume = c.get_double("cavity", "mode_volume_um3", 0.095) * 1e-18;
  p.refractive_index = c.get_double("cavity", "refractive_index", 2.17);
  p.wavelength = c.get_double("cavity", "wavelength_nm", 984.5) * 1e-9;
  return p;
}

cavity::EmitterParams emitter_from(const io::Config& c) {
  const double t1_bulk = c.get_double("emitter", "t1_bulk_us", 267.0) * 1e-6;
  const double gamma0 = 1.0 / t1_bulk;
  // default partition: parallel rate from the 763 us selective measurement
  const double rp = c.get_double("emitter", "rate_parallel", 1.0 / 763e-6);
  const double rest = gamma0 - rp;
  cavity::EmitterParams e;
  e.dipole_moment = c.get_double("emitter", "dipole_moment", 1.06e-31);
  e.gamma_0 = gamma0;
  e.rate_parallel = rp;
  e.rate_perp = c.get_double("emitter", "rate_perp", 0.5 * rest);
  e.rate_other = c.get_double("emitter", "rate_other", rest - e.rate_perp);
  return e;
}

photon::ReadoutModel readout_from(const io::Config& c) {
  photon::ReadoutModel m = photon::device_readout_model();
  if (c.get_string("readout", "preset", "device") != "device") {
    throw io::ConfigError("unknown readout preset: " +
                          c.get_string("readout", "preset", ""));
  }
  m.p_f = c.get_double("readout", "p_f", m.p_f);
  m.p_tot = c.get_double("readout", "p_tot", m.p_tot);
  m.gamma_bg = c.get_double("readout", "gamma_bg_hz", m.gamma_bg);
  m.n_pulses = c.get_int("readout", "n_pulses", m.n_pulses);
  m.t_r = c.get_double("readout", "t_r_us", m.t_r * 1e6) * 1e-6;
  m.validate();
  return m;
}

pulse::LevelModel levels_from(const io::Config& c) {
  pulse::LevelModel m;
  m.beta_e0 = c.get_double("levels", "beta_e0", m.beta_e0);
  m.beta_e1 = c.get_double("levels", "beta_e1", m.beta_e1);
  m.p_det = c.get_double("levels", "p_det", m.p_det);
  m.bg_per_pulse = c.get_double("levels", "bg_per_pulse", m.bg_per_pulse);
  m.t1_fast = c.get_double("levels", "t1_fast_s", m.t1_fast);
  m.t1_slow = c.get_double("levels", "t1_slow_s", m.t1_slow);
  m.qubit_frequency = c.get_double("levels", "qubit_frequency_hz", m.qubit_frequency);
  m.device_temperature = c.get_double("levels", "device_temperature_k", m.device_temperature);
  m.epsilon_pi = c.get_double("levels", "epsilon_pi", m.epsilon_pi);
  m.validate();
  return m;
}

deco::NoiseModel noise_from(const io::Config& c) {
  deco::NoiseModel n;
  const double sigma = c.get_double("noise", "ou_sigma_rad", k::two_pi * 25e3);
  const double tau_c = c.get_double("noise", "ou_tau_c_s", 1e-3);
  if (sigma > 0.0) n.ou.push_back({sigma, tau_c});
  const double nb_amp = c.get_double("noise", "narrowband_amp_rad", 0.0);
  if (nb_amp > 0.0) {
    n.narrowband.push_back({c.get_double("noise", "narrowband_f0_hz", 340e3), nb_amp});
  }
  const double pl_amp = c.get_double("noise", "power_law_amp", 0.0);
  if (pl_amp > 0.0) n.power_law.push_back({pl_amp, c.get_double("noise", "power_law_exp", 2.0)});
  n.validate();
  return n;
}

int run_purcell(const Context& ctx) {
  const auto cav = cavity_from(ctx.cfg);
  const auto emit = emitter_from(ctx.cfg);
  const double g = cavity::single_photon_coupling(emit, cav);
  const auto res = cavity::purcell_enhancement(g, cav, emit);

  const double t1_bulk = 1.0 / emit.gamma_0;
  const double t1_meas = ctx.cfg.get_double("emitter", "t1_cav_us", 2.27) * 1e-6;
  const double eta_meas = cavity::eta_from_lifetimes(t1_meas, t1_bulk);

  io::CsvWriter csv("cavity enhancement report", {"quantity", "value", "unit"}, {"", "", ""});
  auto put = [&](const std::string& name, double v, const std::string& unit) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    csv.row_mixed({name, buf, unit});
  };
  put("g_over_2pi", g / k::two_pi, "Hz");
  put("eta_design", res.eta, "");
  put("purcell_factor", res.purcell_factor, "");
  put("t1_cav_design", res.t1_cav, "s");
  put("eta_measured", eta_meas, "");
  put("p_cav_measured", cavity::emission_fraction(eta_meas), "");
  put("beta_parallel", emit.beta_parallel(), "");
  put("beta_cav_bound", cavity::cavity_branching_ratio(emit.beta_parallel(), t1_meas, t1_bulk), "");
  finish(ctx, "purcell", "enhancement-chain", {{"purcell.csv", csv.serialize(ctx.config_hash)}});
  std::cout << "eta_design " << res.eta << "  eta_measured " << eta_meas << "  p_cav "
            << cavity::emission_fraction(eta_meas) << "\n";
  return 0;
}

int run_ssro(const Context& ctx, int pulses_override, int nc_override) {
  auto model = readout_from(ctx.cfg);
  if (pulses_override > 0) model.n_pulses = pulses_override;
  model.validate();
  const auto bg = photon::background_distribution(model);
  const auto ion = photon::ion_count_distribution(model);
  const auto dist1 = photon::convolve(ion, bg);

  int n_c = nc_override > 0 ? nc_override : ctx.cfg.get_int("readout", "n_c", 0);
  const auto rep = (n_c > 0) ? photon::assignment_errors(bg, dist1, n_c)
                             : photon::optimal_threshold(bg, dist1);
  const auto cond = photon::conditional_fidelity(rep.f_0, rep.f_1);

  io::CsvWriter hist("readout count histograms", {"count", "p_state0", "p_state1"},
                     {"", "", ""});
  const int kmax = std::max(bg.support_cap(), dist1.support_cap());
  for (int kk = 0; kk <= kmax; ++kk) {
    hist.row({static_cast<double>(kk), bg.at(kk), dist1.at(kk)});
  }
  io::CsvWriter fid("threshold fidelity report", {"quantity", "value"}, {"", ""});
  fid.row_mixed({"n_c", std::to_string(rep.n_c)});
  auto putf = [&](const std::string& name, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    fid.row_mixed({name, buf});
  };
  putf("f_0", rep.f_0);
  putf("f_1", rep.f_1);
  putf("f_avg", rep.f_avg);
  putf("f_cond", cond.f_cond);
  putf("p_success", cond.p_success);
  finish(ctx, "ssro", "readout-histograms",
         {{"ssro_hist.csv", hist.serialize(ctx.config_hash)},
          {"ssro_fidelity.csv", fid.serialize(ctx.config_hash)}});
  std::cout << "n_c " << rep.n_c << "  F0 " << rep.f_0 << "  F1 " << rep.f_1 << "  F_avg "
            << rep.f_avg << "\n";
  return 0;
}

int run_g2(const Context& ctx) {
  const auto model = levels_from(ctx.cfg);
  pulse::Pulse read;
  read.channel = pulse::Channel::optical_a;
  read.p_exc = ctx.cfg.get_double("readout", "p_exc", 0.94);
  read.record = true;

  auto init_seq = pulse::PulseSequence::initialization(
      ctx.cfg.get_int("init", "n_f", 40), ctx.cfg.get_int("init", "n_afe_max", 40),
      ctx.cfg.get_double("init", "p_exc_f", 0.9), ctx.cfg.get_double("init", "p_exc_afe", 0.9));
  // re-initialization pumps into |0>_g; flip to the bright state before reading
  pulse::Pulse flip;
  flip.channel = pulse::Channel::mw_pi;
  init_seq.pulses.push_back(flip);

  const auto with_init =
      pulse::g2_pulsewise(model, init_seq.pulses, read, ctx.shots, ctx.seed);
  const auto no_init = pulse::g2_pulsewise(model, {}, read, ctx.shots,
                                           ionsim::rng::derive_seed(ctx.seed, 1));

  io::CsvWriter csv("pulsewise g2 of the readout photon stream",
                    {"lag", "g2_with_init", "g2_no_init"}, {"pulses", "", ""});
  csv.comment("zero_lag_with_init: " + std::to_string(with_init.zero_lag));
  csv.comment("bunching_with_init: " + std::to_string(with_init.bunching_amplitude));
  csv.comment("bunching_no_init: " + std::to_string(no_init.bunching_amplitude));
  const std::size_t n = std::min(with_init.g2.size(), no_init.g2.size());
  for (std::size_t i = 1; i < n; ++i) {
    csv.row({static_cast<double>(i), with_init.g2[i], no_init.g2[i]});
  }
  finish(ctx, "g2", "photon-autocorrelation", {{"g2.csv", csv.serialize(ctx.config_hash)}});
  std::cout << "bunching with init " << with_init.bunching_amplitude << "  without "
            << no_init.bunching_amplitude << "\n";
  return 0;
}

int run_init(const Context& ctx) {
  const auto model = levels_from(ctx.cfg);
  const int n_f = ctx.cfg.get_int("init", "n_f", 40);
  const int n_afe_max = ctx.cfg.get_int("init", "n_afe_max", 60);
  const double pf = ctx.cfg.get_double("init", "p_exc_f", 0.9);
  const double pa = ctx.cfg.get_double("init", "p_exc_afe", 0.9);

  io::CsvWriter csv("state preparation vs pump pulse number",
                    {"n_afe", "p_g0", "p_g1", "p_aux"}, {"", "", "", ""});
  for (int n = 0; n <= n_afe_max; n += std::max(1, n_afe_max / 30)) {
    const auto seq = pulse::PulseSequence::initialization(n_f, n, pf, pa);
    const auto rec = pulse::simulate_sequence(model, seq, ctx.shots,
                                              ionsim::rng::derive_seed(ctx.seed, n));
    csv.row({static_cast<double>(n), rec.final_fraction(pulse::Level::g0),
             rec.final_fraction(pulse::Level::g1), rec.final_fraction(pulse::Level::aux)});
  }
  finish(ctx, "init", "pumping-sweep", {{"init.csv", csv.serialize(ctx.config_hash)}});
  return 0;
}

int run_t1(const Context& ctx) {
  const auto model = levels_from(ctx.cfg);
  const double tmin = ctx.cfg.get_double("t1", "t_min_s", 1e-3);
  const double tmax = ctx.cfg.get_double("t1", "t_max_s", 200.0);
  const int n_pts = ctx.cfg.get_int("t1", "n_points", 25);
  std::vector<double> times;
  for (int i = 0; i < n_pts; ++i) {
    times.push_back(tmin * std::pow(tmax / tmin, static_cast<double>(i) / (n_pts - 1)));
  }
  const auto res = pulse::spin_t1_curves(model, times, ctx.shots, ctx.seed);
  const double temp = pulse::temperature_from_ratio(res.equilibrium_ratio, model.qubit_frequency);

  io::CsvWriter csv("spin relaxation curves", {"t", "p0", "p1", "paux"}, {"s", "", "", ""});
  csv.comment("t_fast_fit: " + std::to_string(res.t_fast) + " s");
  csv.comment("t_slow_fit: " + std::to_string(res.t_slow) + " s");
  csv.comment("equilibrium_ratio: " + std::to_string(res.equilibrium_ratio));
  csv.comment("temperature_fit: " + std::to_string(temp) + " K");
  for (std::size_t i = 0; i < res.wait_times.size(); ++i) {
    csv.row({res.wait_times[i], res.p0[i], res.p1[i], res.paux[i]});
  }
  finish(ctx, "t1", "spin-relaxation", {{"t1.csv", csv.serialize(ctx.config_hash)}});
  std::cout << "t_fast " << res.t_fast << " s  t_slow " << res.t_slow << " s  T " << temp
            << " K\n";
  return 0;
}

int run_odmr(const Context& ctx) {
  spin::SpinSystem sys;
  const std::string preset = ctx.cfg.get_string("odmr", "preset", "ion_x_ground");
  if (preset == "ion_x_ground") sys = spin::SpinSystem::ion_x_ground();
  else if (preset == "ion_y_ground") sys = spin::SpinSystem::ion_y_ground();
  else throw io::ConfigError("unknown spin preset: " + preset);

  auto neighbors = spin::default_neighbors();
  const int n_nb = ctx.cfg.get_int("odmr", "neighbors", static_cast<int>(neighbors.size()));
  if (n_nb < 0 || n_nb > static_cast<int>(neighbors.size())) {
    throw io::ConfigError("odmr.neighbors out of range");
  }
  neighbors.resize(static_cast<std::size_t>(n_nb));
  const double fwhm = ctx.cfg.get_double("odmr", "broadening_fwhm_hz", 2e3);
  const auto spec = spin::odmr_spectrum(sys, neighbors, fwhm);

  io::CsvWriter csv("simulated qubit transition multiplet", {"frequency", "intensity"},
                    {"Hz", "1/Hz"});
  csv.comment("envelope_fwhm: " + std::to_string(spec.envelope_fwhm()) + " Hz");
  csv.comment("lines: " + std::to_string(spec.lines.size()));
  for (std::size_t i = 0; i < spec.freq_grid.size(); ++i) {
    csv.row({spec.freq_grid[i], spec.intensity[i]});
  }
  finish(ctx, "odmr", "spin-multiplet", {{"odmr.csv", csv.serialize(ctx.config_hash)}});
  std::cout << "envelope FWHM " << spec.envelope_fwhm() << " Hz over " << spec.lines.size()
            << " lines\n";
  return 0;
}

deco::DDSequence sequence_from(const std::string& kind, int n_pi, double tau) {
  if (kind == "ramsey") return deco::DDSequence::ramsey(tau);
  if (kind == "hahn") return deco::DDSequence::hahn(tau);
  if (kind == "cpmg") return deco::DDSequence::cpmg(n_pi, tau);
  if (kind == "xy8") return deco::DDSequence::xy8(n_pi, tau);
  throw io::ConfigError("unknown sequence kind: " + kind);
}

int run_dd(const Context& ctx) {
  const auto noise = noise_from(ctx.cfg);
  const std::string kind = ctx.cfg.get_string("dd", "sequence", "cpmg");
  const int n_pi = ctx.cfg.get_int("dd", "n_pi", 8);
  const double t_max = ctx.cfg.get_double("dd", "t_max_s", 5e-3);
  const int n_times = ctx.cfg.get_int("dd", "n_times", 40);

  std::vector<double> times;
  for (int i = 1; i <= n_times; ++i) times.push_back(t_max * i / n_times);

  io::CsvWriter csv("decoupled coherence decay", {"t", "w_filter", "w_mc"}, {"s", "", ""});
  deco::CoherenceCurve quad;
  for (const double t : times) {
    const auto seq = sequence_from(kind, n_pi, (kind == "ramsey" || kind == "hahn")
                                                   ? t / std::max(1, 2 * n_pi)
                                                   : t / (2.0 * n_pi));
    quad.points.push_back({t, deco::coherence_from_psd(noise, seq, t), 0.0});
  }
  const auto seq0 = sequence_from(kind, n_pi, t_max / std::max(1, 2 * n_pi));
  const auto mc = deco::mc_coherence(noise, seq0, times, ctx.shots, ctx.seed);
  for (std::size_t i = 0; i < times.size(); ++i) {
    csv.row({times[i], quad.points[i].w, mc.points[i].w});
  }

  // T2 vs pulse number and the power-law exponent of the scaling
  io::CsvWriter sc("coherence time vs pulse number", {"n_pi", "t2"}, {"", "s"});
  std::vector<std::pair<double, double>> t2n;
  for (const int n : {1, 2, 4, 8, 16, 32}) {
    const double t2 = deco::t2_from_psd(noise, deco::SequenceKind::cpmg, n);
    t2n.emplace_back(n, t2);
    sc.row({static_cast<double>(n), t2});
  }
  const auto fit = deco::scaling_exponent(t2n);
  sc.comment("scaling_exponent: " + std::to_string(fit.exponent) + " +- " +
             std::to_string(fit.std_error));

  finish(ctx, "dd", "decoupling-curves",
         {{"dd_coherence.csv", csv.serialize(ctx.config_hash)},
          {"dd_scaling.csv", sc.serialize(ctx.config_hash)}});
  std::cout << "scaling exponent " << fit.exponent << " +- " << fit.std_error << "\n";
  return 0;
}

int run_ramsey_ps(const Context& ctx) {
  deco::SpectralDiffusionModel model;
  model.sigma = ctx.cfg.get_double("ramsey", "sigma_hz", 860e3 / 2.0);
  model.homogeneous_linewidth = ctx.cfg.get_double("ramsey", "homogeneous_linewidth_hz", 200e3);
  model.probe_pulses = ctx.cfg.get_int("ramsey", "probe_pulses", 30);
  model.p_det_resonant = ctx.cfg.get_double("ramsey", "p_det_resonant", 0.05);
  model.validate();
  const int n_c_max = ctx.cfg.get_int("ramsey", "n_c_max", 4);

  const auto table = deco::postselected_ramsey(model, n_c_max, ctx.shots, ctx.seed);
  io::CsvWriter csv("post-selected dephasing times", {"n_c", "t2_star", "keep_fraction"},
                    {"", "s", ""});
  csv.comment("unconditioned_t2star: " + std::to_string(model.unconditioned_t2star()) + " s");
  for (const auto& e : table) {
    csv.row({static_cast<double>(e.n_c), e.t2_star, e.keep_fraction});
  }
  finish(ctx, "ramsey-ps", "postselected-ramsey",
         {{"ramsey_ps.csv", csv.serialize(ctx.config_hash)}});
  return 0;
}

int run_sweep(const Context& ctx, const std::string& sub, const std::string& param,
              const std::string& grid, int step) {
  if (sub != "ssro") throw io::ConfigError("sweep: only the ssro subcommand is sweepable");
  const std::size_t dots = grid.find("..");
  if (dots == std::string::npos) throw io::ConfigError("sweep: grid must be START..STOP");
  const int lo = std::stoi(grid.substr(0, dots));
  const int hi = std::stoi(grid.substr(dots + 2));
  if (lo <= 0 || hi < lo) throw io::ConfigError("sweep: bad grid bounds");
  if (param != "n_pulses" && param != "n_c") {
    throw io::ConfigError("sweep: parameter must be n_pulses or n_c");
  }

  io::CsvWriter csv("threshold fidelity vs " + param,
                    {param, "f_0", "f_1", "f_avg", "f_cond", "p_success"},
                    {"", "", "", "", "", ""});
  int index = 0;
  for (int v = lo; v <= hi; v += step, ++index) {
    auto model = readout_from(ctx.cfg);
    int n_c = ctx.cfg.get_int("readout", "n_c", 0);
    if (param == "n_pulses") model.n_pulses = v;
    else n_c = v;
    model.validate();
    (void)ionsim::rng::derive_seed(ctx.seed, static_cast<std::uint64_t>(index));
    const auto bg = photon::background_distribution(model);
    const auto dist1 = photon::convolve(photon::ion_count_distribution(model), bg);
    const auto rep = (n_c > 0) ? photon::assignment_errors(bg, dist1, n_c)
                               : photon::optimal_threshold(bg, dist1);
    const auto cond = photon::conditional_fidelity(rep.f_0, rep.f_1);
    csv.row({static_cast<double>(v), rep.f_0, rep.f_1, rep.f_avg, cond.f_cond,
             cond.p_success});
  }
  finish(ctx, "sweep", "fidelity-sweep", {{"sweep_ssro.csv", csv.serialize(ctx.config_hash)}});
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"trapped-ion cavity readout simulation toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::uint64_t seed = 1;
  std::uint64_t shots = 100000;
  app.add_option("--config", config_path, "config file (INI-style)");
  app.add_option("--seed", seed, "global 64-bit seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--shots", shots, "Monte Carlo shots");

  auto* c_purcell = app.add_subcommand("purcell", "cavity enhancement report");
  auto* c_ssro = app.add_subcommand("ssro", "readout histograms and fidelities");
  int pulses_override = 0, nc_override = 0;
  c_ssro->add_option("--pulses", pulses_override, "read pulses per sequence");
  c_ssro->add_option("--nc", nc_override, "detection threshold");
  auto* c_g2 = app.add_subcommand("g2", "pulsewise photon autocorrelation");
  auto* c_init = app.add_subcommand("init", "state preparation sweep");
  auto* c_t1 = app.add_subcommand("t1", "spin relaxation curves");
  auto* c_odmr = app.add_subcommand("odmr", "simulated spin multiplet");
  auto* c_dd = app.add_subcommand("dd", "dynamical decoupling curves");
  auto* c_ramsey = app.add_subcommand("ramsey-ps", "post-selected dephasing table");
  auto* c_sweep = app.add_subcommand("sweep", "metric vs parameter grid");
  std::string sweep_sub, sweep_param, sweep_grid;
  int sweep_step = 25;
  c_sweep->add_option("subcommand", sweep_sub)->required();
  c_sweep->add_option("parameter", sweep_param)->required();
  c_sweep->add_option("grid", sweep_grid, "START..STOP")->required();
  c_sweep->add_option("--step", sweep_step);

  for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
    sub->fallthrough(); // accept the global flags after the subcommand name
  }

  CLI11_PARSE(app, argc, argv);

  try {
    Context ctx;
    if (!config_path.empty()) {
      ctx.cfg = io::Config::load(config_path);
      ctx.cfg.check_schema(kSchema);
      if (!ctx.cfg.has_section("run")) {
        throw io::ConfigError(config_path + ": missing required section [run]");
      }
    }
    ctx.seed = ctx.cfg.has("run", "seed") && app.count("--seed") == 0
                   ? ctx.cfg.get_u64("run", "seed")
                   : seed;
    ctx.shots = ctx.cfg.has("run", "shots") && app.count("--shots") == 0
                    ? ctx.cfg.get_u64("run", "shots")
                    : shots;
    ctx.out_dir = app.count("--out") ? out_dir : ctx.cfg.get_string("run", "out", out_dir);
    ctx.config_hash = [&] {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%016llx",
                    static_cast<unsigned long long>(
                        io::fnv1a64(ctx.cfg.serialize() + std::to_string(ctx.seed))));
      return std::string(buf);
    }();

    if (c_purcell->parsed()) return run_purcell(ctx);
    if (c_ssro->parsed()) return run_ssro(ctx, pulses_override, nc_override);
    if (c_g2->parsed()) return run_g2(ctx);
    if (c_init->parsed()) return run_init(ctx);
    if (c_t1->parsed()) return run_t1(ctx);
    if (c_odmr->parsed()) return run_odmr(ctx);
    if (c_dd->parsed()) return run_dd(ctx);
    if (c_ramsey->parsed()) return run_ramsey_ps(ctx);
    if (c_sweep->parsed()) return run_sweep(ctx, sweep_sub, sweep_param, sweep_grid, sweep_step);
    return 2;
  } catch (const io::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 1;
  }
}
