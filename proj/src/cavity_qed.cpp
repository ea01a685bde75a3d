#include "ionsim/cavity_qed.hpp"

#include <cmath>
#include <stdexcept>

#include "ionsim/constants.hpp"

namespace ionsim::cavity {

namespace k = ionsim::constants;

void CavityParams::validate() const {
  if (!(kappa > 0.0)) throw std::domain_error("cavity: kappa must be > 0");
  if (!(mode_volume > 0.0)) throw std::domain_error("cavity: mode volume must be > 0");
  if (!(refractive_index >= 1.0)) throw std::domain_error("cavity: n must be >= 1");
  if (!(wavelength > 0.0)) throw std::domain_error("cavity: wavelength must be > 0");
  if (kappa_in_ratio < 0.0 || kappa_in_ratio > 1.0) {
    throw std::domain_error("cavity: kappa_in/kappa must lie in [0,1]");
  }
}

double CavityParams::omega() const { return k::two_pi * k::c_light / wavelength; }

void EmitterParams::validate() const {
  if (!(gamma_0 > 0.0)) throw std::domain_error("emitter: gamma_0 must be > 0");
  if (dipole_moment < 0.0) throw std::domain_error("emitter: dipole moment must be >= 0");
  if (rate_parallel < 0.0 || rate_perp < 0.0 || rate_other < 0.0) {
    throw std::domain_error("emitter: decay rates must be >= 0");
  }
  const double sum = rate_parallel + rate_perp + rate_other;
  if (std::abs(sum - gamma_0) > 1e-12 * gamma_0) {
    throw std::domain_error("emitter: decay partition does not sum to gamma_0");
  }
}

EmitterParams EmitterParams::from_partition(double dipole_moment, double rate_parallel,
                                            double rate_perp, double rate_other) {
  EmitterParams p;
  p.dipole_moment = dipole_moment;
  p.rate_parallel = rate_parallel;
  p.rate_perp = rate_perp;
  p.rate_other = rate_other;
  p.gamma_0 = rate_parallel + rate_perp + rate_other;
  p.validate();
  return p;
}

double single_photon_coupling(const EmitterParams& emitter, const CavityParams& cavity) {
  cavity.validate();
  if (emitter.dipole_moment < 0.0) {
    throw std::domain_error("single_photon_coupling: negative dipole moment");
  }
  const double w = cavity.omega();
  const double n2 = cavity.refractive_index * cavity.refractive_index;
  const double field = std::sqrt(k::hbar * w / (2.0 * k::eps0 * n2 * cavity.mode_volume));
  return emitter.dipole_moment / k::hbar * field;
}

CouplingResult purcell_enhancement(double g, const CavityParams& cavity,
                                   const EmitterParams& emitter) {
  cavity.validate();
  emitter.validate();
  if (g < 0.0) throw std::domain_error("purcell_enhancement: g must be >= 0");
  CouplingResult r;
  r.g = g;
  r.eta = 4.0 * g * g / (cavity.kappa * emitter.gamma_0);
  const double beta = emitter.beta_parallel();
  r.purcell_factor = (beta > 0.0) ? r.eta / beta : 0.0;
  r.t1_cav = 1.0 / (emitter.gamma_0 * (1.0 + r.eta));
  r.p_cav = emission_fraction(r.eta);
  const double t1_bulk = 1.0 / emitter.gamma_0;
  r.beta_cav = cavity_branching_ratio(beta, r.t1_cav, t1_bulk);
  return r;
}

double eta_from_lifetimes(double t1_cav, double t1_bulk) {
  if (!(t1_cav > 0.0) || !(t1_bulk > 0.0)) {
    throw std::domain_error("eta_from_lifetimes: lifetimes must be > 0");
  }
  if (t1_cav > t1_bulk) {
    throw std::domain_error("eta_from_lifetimes: t1_cav > t1_bulk (inhibition not modeled)");
  }
  return t1_bulk / t1_cav - 1.0;
}

double emission_fraction(double beta_fp) {
  if (beta_fp < 0.0) throw std::domain_error("emission_fraction: negative argument");
  return beta_fp / (1.0 + beta_fp);
}

double cavity_branching_ratio(double beta_parallel, double t1_cav, double t1_bulk) {
  if (beta_parallel < 0.0 || beta_parallel > 1.0) {
    throw std::domain_error("cavity_branching_ratio: beta_parallel outside [0,1]");
  }
  eta_from_lifetimes(t1_cav, t1_bulk); // range checks
  return 1.0 - (1.0 - beta_parallel) * (t1_cav / t1_bulk);
}

} // namespace ionsim::cavity
