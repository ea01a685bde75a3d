#pragma once

namespace ionsim::cavity {

// Resonator parameters. All angular frequencies in rad/s.
struct CavityParams {
  double kappa = 0.0;          // energy decay rate (rad/s)
  double kappa_in_ratio = 0.0; // kappa_in / kappa, in [0,1]
  double mode_volume = 0.0;    // m^3
  double refractive_index = 1.0;
  double wavelength = 0.0;     // m

  void validate() const;
  double omega() const; // transition angular frequency, 2 pi c / lambda
};

// Emitter constants: transition dipole and bulk decay partition.
struct EmitterParams {
  double dipole_moment = 0.0; // C m
  double gamma_0 = 0.0;       // total bulk decay rate, 1/s
  double rate_parallel = 0.0; // decay on the c-polarized (cavity) transition
  double rate_perp = 0.0;
  double rate_other = 0.0;

  void validate() const;
  double beta_parallel() const { return rate_parallel / gamma_0; }

  static EmitterParams from_partition(double dipole_moment, double rate_parallel,
                                      double rate_perp, double rate_other);
};

struct CouplingResult {
  double g = 0.0;              // rad/s
  double eta = 0.0;            // effective Purcell factor, beta * F_p
  double purcell_factor = 0.0; // F_p = eta / beta_parallel
  double t1_cav = 0.0;         // s
  double p_cav = 0.0;          // fraction emitted into the cavity mode
  double beta_cav = 0.0;       // cavity-enhanced branching ratio (lower bound)
};

// g = (mu/hbar) sqrt(hbar w / (2 eps0 n^2 V)), ion at field maximum with
// optimal polarization alignment; cavity on resonance.
double single_photon_coupling(const EmitterParams& emitter, const CavityParams& cavity);

// eta = 4 g^2 / (kappa gamma0); valid on resonance only.
CouplingResult purcell_enhancement(double g, const CavityParams& cavity,
                                   const EmitterParams& emitter);

// eta = t1_bulk / t1_cav - 1 from measured lifetimes.
double eta_from_lifetimes(double t1_cav, double t1_bulk);

// P_cav = bFp / (1 + bFp).
double emission_fraction(double beta_fp);

// beta_cav = 1 - (1 - beta_parallel) t1_cav / t1_bulk (lower bound).
double cavity_branching_ratio(double beta_parallel, double t1_cav, double t1_bulk);

} // namespace ionsim::cavity
