#include "ionsim/spin_hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <lapacke.h>

#include "ionsim/constants.hpp"

namespace ionsim::spin {

namespace k = ionsim::constants;
using Eigen::MatrixXcd;
using Eigen::Vector3d;
using Eigen::VectorXd;
using cd = std::complex<double>;

void SpinSystem::validate() const {
  if (g_nuc == 0.0 && g_par == 0.0 && g_perp == 0.0 && a_par == 0.0 && a_perp == 0.0) {
    throw std::domain_error("spin system: all tensors zero");
  }
  for (const double v : {g_par, g_perp, a_par, a_perp, g_nuc, offset}) {
    if (!std::isfinite(v)) throw std::domain_error("spin system: non-finite tensor entry");
  }
  // a_perp sets the zero-field qubit splitting; the sign convention is fixed
  if (!(a_perp > 0.0)) throw std::domain_error("spin system: a_perp must be > 0");
}

SpinSystem SpinSystem::ion_x_ground() {
  // a_perp calibrated to the 674.48 MHz qubit splitting of ion X
  return {-6.08, 0.85, -4.82e9, 674.48e6, 0.987, 0.0};
}

SpinSystem SpinSystem::ion_y_ground() {
  return {-6.08, 0.85, -4.82e9, 673.24e6, 0.987, 0.0};
}

SpinSystem SpinSystem::ion_x_excited() {
  // excited-state tensors are free preset parameters (not reported for this
  // site); bounded by the < 50 kHz optical SHF broadening target
  return {2.51, 1.70, -1.30e9, 3.37e9, 0.987, 0.0};
}

void NuclearNeighbor::validate() const {
  if (position.norm() <= 0.1e-9) {
    throw std::domain_error("neighbor: |position| must exceed 0.1 nm");
  }
  if (spin < 0.5) throw std::domain_error("neighbor: spin must be >= 1/2");
}

NuclearNeighbor NuclearNeighbor::vanadium(const Vector3d& pos_m) {
  NuclearNeighbor n;
  n.species = Species::vanadium;
  n.spin = 3.5;
  n.g_nuc = 1.5;
  n.position = pos_m;
  return n;
}

NuclearNeighbor NuclearNeighbor::yttrium(const Vector3d& pos_m) {
  NuclearNeighbor n;
  n.species = Species::yttrium;
  n.spin = 0.5;
  n.g_nuc = -0.27;
  n.position = pos_m;
  return n;
}

std::vector<NuclearNeighbor> default_neighbors() {
  // zircon YVO lattice: a = 7.12 A, c = 6.29 A. Two nearest V along c at
  // c/2, one next-shell V, and the nearest Y.
  const double A = 1e-10;
  return {
      NuclearNeighbor::vanadium(Vector3d(0, 0, 3.145 * A)),
      NuclearNeighbor::vanadium(Vector3d(0, 0, -3.145 * A)),
      NuclearNeighbor::vanadium(Vector3d(3.56 * A, 0, 1.573 * A)),
      NuclearNeighbor::yttrium(Vector3d(0, 3.56 * A, -1.573 * A)),
  };
}

MatrixXcd spin_x(double j) {
  const int d = static_cast<int>(2.0 * j + 1.5);
  MatrixXcd m = MatrixXcd::Zero(d, d);
  for (int i = 0; i + 1 < d; ++i) {
    const double mval = j - (i + 1);
    const double amp = 0.5 * std::sqrt(j * (j + 1.0) - mval * (mval + 1.0));
    m(i, i + 1) = amp;
    m(i + 1, i) = amp;
  }
  return m;
}

MatrixXcd spin_y(double j) {
  const int d = static_cast<int>(2.0 * j + 1.5);
  MatrixXcd m = MatrixXcd::Zero(d, d);
  for (int i = 0; i + 1 < d; ++i) {
    const double mval = j - (i + 1);
    const double amp = 0.5 * std::sqrt(j * (j + 1.0) - mval * (mval + 1.0));
    m(i, i + 1) = cd(0.0, -amp);
    m(i + 1, i) = cd(0.0, amp);
  }
  return m;
}

MatrixXcd spin_z(double j) {
  const int d = static_cast<int>(2.0 * j + 1.5);
  MatrixXcd m = MatrixXcd::Zero(d, d);
  for (int i = 0; i < d; ++i) m(i, i) = j - i;
  return m;
}

namespace {

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

MatrixXcd identity(int d) { return MatrixXcd::Identity(d, d); }

int total_dim(const std::vector<NuclearNeighbor>& neighbors) {
  long dim = 4;
  for (const auto& n : neighbors) dim *= n.multiplicity();
  if (dim > kMaxHilbertDim) {
    throw std::domain_error("spin hamiltonian: Hilbert dimension exceeds 16384");
  }
  return static_cast<int>(dim);
}

// Kronecker chain with one or two non-identity factors. Slots: 0 electron,
// 1 own nucleus, 2+j neighbor j. Building each Hamiltonian term as a single
// chain keeps the cost at O(dim^2) instead of dense operator products.
MatrixXcd slot_chain(const std::vector<std::pair<int, const MatrixXcd*>>& ops,
                     const std::vector<NuclearNeighbor>& neighbors) {
  auto factor = [&](int slot, int d) -> MatrixXcd {
    for (const auto& [s, op] : ops) {
      if (s == slot) return *op;
    }
    return identity(d);
  };
  MatrixXcd out = factor(0, 2);
  out = kron(out, factor(1, 2));
  for (std::size_t j = 0; j < neighbors.size(); ++j) {
    out = kron(out, factor(static_cast<int>(2 + j), neighbors[j].multiplicity()));
  }
  return out;
}

MatrixXcd embed(const MatrixXcd& op, int slot,
                const std::vector<NuclearNeighbor>& neighbors) {
  return slot_chain({{slot, &op}}, neighbors);
}

// electron g factor per axis: (g_perp, g_perp, g_par)
std::array<double, 3> g_axes(const SpinSystem& sys) {
  return {sys.g_perp, sys.g_perp, sys.g_par};
}

} // namespace

MatrixXcd dipolar_term(const SpinSystem& sys,
                       const std::vector<NuclearNeighbor>& neighbors,
                       std::size_t which) {
  if (which >= neighbors.size()) {
    throw std::out_of_range("dipolar_term: neighbor index");
  }
  const NuclearNeighbor& nb = neighbors[which];
  nb.validate();
  const int dim = total_dim(neighbors);
  const double r = nb.position.norm();
  const Vector3d rhat = nb.position / r;
  const auto ge = g_axes(sys);

  // m1 = -muB g.S, m2 = g_n muN I; H = (mu0/4pi) [m1.m2 - 3(m1.rhat)(m2.rhat)]/r^3
  const double pref =
      -k::mu0_over_4pi * k::mu_bohr * k::mu_nuclear * nb.g_nuc / (r * r * r) / k::h_planck;

  const std::array<MatrixXcd, 3> s_small = {spin_x(0.5), spin_y(0.5), spin_z(0.5)};
  const double j_nb = nb.spin;
  const std::array<MatrixXcd, 3> i_small = {spin_x(j_nb), spin_y(j_nb), spin_z(j_nb)};
  const int nb_slot = static_cast<int>(2 + which);

  MatrixXcd h = MatrixXcd::Zero(dim, dim);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const double geom = (a == b ? 1.0 : 0.0) - 3.0 * rhat(a) * rhat(b);
      if (geom == 0.0) continue;
      h += (pref * ge[static_cast<std::size_t>(a)] * geom) *
           slot_chain({{0, &s_small[static_cast<std::size_t>(a)]},
                       {nb_slot, &i_small[static_cast<std::size_t>(b)]}},
                      neighbors);
    }
  }
  return h;
}

MatrixXcd assemble_hamiltonian(const SpinSystem& sys,
                               const std::vector<NuclearNeighbor>& neighbors,
                               const Vector3d& b_field) {
  sys.validate();
  for (const auto& n : neighbors) n.validate();
  const int dim = total_dim(neighbors);

  const std::array<MatrixXcd, 3> s_small = {spin_x(0.5), spin_y(0.5), spin_z(0.5)};
  const std::array<double, 3> hf = {sys.a_perp, sys.a_perp, sys.a_par};

  MatrixXcd h = MatrixXcd::Zero(dim, dim);
  // hyperfine S.A.I (axial)
  for (int a = 0; a < 3; ++a) {
    h += hf[static_cast<std::size_t>(a)] *
         slot_chain({{0, &s_small[static_cast<std::size_t>(a)]},
                     {1, &s_small[static_cast<std::size_t>(a)]}},
                    neighbors);
  }
  if (sys.offset != 0.0) h += sys.offset * MatrixXcd::Identity(dim, dim);

  // Zeeman terms
  const auto ge = g_axes(sys);
  for (int a = 0; a < 3; ++a) {
    if (b_field(a) == 0.0) continue;
    const MatrixXcd& sa = s_small[static_cast<std::size_t>(a)];
    h += (k::mu_bohr / k::h_planck * ge[static_cast<std::size_t>(a)] * b_field(a)) *
         embed(sa, 0, neighbors);
    h -= (k::mu_nuclear / k::h_planck * sys.g_nuc * b_field(a)) * embed(sa, 1, neighbors);
  }
  for (std::size_t j = 0; j < neighbors.size(); ++j) {
    for (int a = 0; a < 3; ++a) {
      if (b_field(a) == 0.0) continue;
      MatrixXcd op = (a == 0)   ? embed(spin_x(neighbors[j].spin), static_cast<int>(2 + j), neighbors)
                     : (a == 1) ? embed(spin_y(neighbors[j].spin), static_cast<int>(2 + j), neighbors)
                                : embed(spin_z(neighbors[j].spin), static_cast<int>(2 + j), neighbors);
      h.noalias() -= (k::mu_nuclear / k::h_planck * neighbors[j].g_nuc * b_field(a)) * op;
    }
  }

  // superhyperfine couplings
  for (std::size_t j = 0; j < neighbors.size(); ++j) {
    h += dipolar_term(sys, neighbors, j);
  }
  return h;
}

void hermitian_eigensystem(const MatrixXcd& h, VectorXd& evals, MatrixXcd& evecs) {
  const int n = static_cast<int>(h.rows());
  if (h.cols() != n) throw std::invalid_argument("hermitian_eigensystem: non-square");
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-6 * std::max(1.0, h.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("hermitian_eigensystem: matrix not Hermitian");
  }
  if (n < 64) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(h);
    evals = solver.eigenvalues();
    evecs = solver.eigenvectors();
    return;
  }
  evecs = h;
  evals.resize(n);
  const int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                                  reinterpret_cast<lapack_complex_double*>(evecs.data()),
                                  n, evals.data());
  if (info != 0) {
    throw std::runtime_error("hermitian_eigensystem: zheevd failed, info=" +
                             std::to_string(info));
  }
}

namespace {

// analytic zero-field eigenvectors in the |e,n> product basis
// (order: up-Up, up-Down, down-Up, down-Down)
Eigen::Vector4cd ket_q0() {
  Eigen::Vector4cd v;
  v << 0.0, 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0), 0.0;
  return v;
}
Eigen::Vector4cd ket_q1() {
  Eigen::Vector4cd v;
  v << 0.0, 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;
  return v;
}

} // namespace

LevelTable zero_field_levels(const SpinSystem& sys) {
  const MatrixXcd h = assemble_hamiltonian(sys, {}, Vector3d::Zero());
  LevelTable t;
  hermitian_eigensystem(h, t.energies, t.states);

  double best0 = -1.0, best1 = -1.0;
  std::vector<int> rest;
  for (int i = 0; i < 4; ++i) {
    const double o0 = std::norm(ket_q0().dot(t.states.col(i)));
    const double o1 = std::norm(ket_q1().dot(t.states.col(i)));
    if (o0 > best0) { best0 = o0; t.idx_q0 = i; }
    if (o1 > best1) { best1 = o1; t.idx_q1 = i; }
  }
  for (int i = 0; i < 4; ++i) {
    if (i != t.idx_q0 && i != t.idx_q1) rest.push_back(i);
  }
  if (t.idx_q0 == t.idx_q1 || rest.size() != 2) {
    throw std::runtime_error("zero_field_levels: qubit states not identifiable");
  }
  t.aux_idx = {rest[0], rest[1]};
  t.qubit_splitting = t.energies(t.idx_q1) - t.energies(t.idx_q0);
  return t;
}

namespace {

// qubit transition frequency at a given field, levels tracked by overlap
// with the zero-field qubit eigenvectors
double qubit_frequency_at(const SpinSystem& sys, const Vector3d& b) {
  const MatrixXcd h = assemble_hamiltonian(sys, {}, b);
  VectorXd evals;
  MatrixXcd evecs;
  hermitian_eigensystem(h, evals, evecs);
  int i0 = -1, i1 = -1;
  double best0 = -1.0, best1 = -1.0;
  for (int i = 0; i < 4; ++i) {
    const double o0 = std::norm(ket_q0().dot(evecs.col(i)));
    const double o1 = std::norm(ket_q1().dot(evecs.col(i)));
    if (o0 > best0) { best0 = o0; i0 = i; }
    if (o1 > best1) { best1 = o1; i1 = i; }
  }
  if (i0 == i1 || best0 < 0.5 || best1 < 0.5) {
    throw std::runtime_error("level crossing");
  }
  return evals(i1) - evals(i0);
}

} // namespace

FieldSensitivity field_sensitivity(const SpinSystem& sys, const Vector3d& b_field,
                                   const Vector3d& axis) {
  if (b_field.norm() >= 1.0) {
    throw std::domain_error("field_sensitivity: |B| must be < 1 T");
  }
  const Vector3d u = axis.normalized();
  const double h1 = 1e-5; // T
  auto f = [&](double db) { return qubit_frequency_at(sys, b_field + db * u); };

  const double f0 = f(0.0);
  auto d1 = [&](double h) { return (f(h) - f(-h)) / (2.0 * h); };
  auto d2 = [&](double h) { return (f(h) - 2.0 * f0 + f(-h)) / (h * h); };

  FieldSensitivity out;
  out.dfdb = (4.0 * d1(0.5 * h1) - d1(h1)) / 3.0;
  out.d2fdb2 = (4.0 * d2(0.5 * h1) - d2(h1)) / 3.0;
  return out;
}

double Spectrum::total_strength() const {
  double s = 0.0;
  for (const auto& l : lines) s += l.strength;
  return s;
}

double Spectrum::trace_integral() const {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < freq_grid.size(); ++i) {
    s += 0.5 * (intensity[i] + intensity[i + 1]) * (freq_grid[i + 1] - freq_grid[i]);
  }
  return s;
}

double Spectrum::envelope_fwhm() const {
  if (intensity.empty()) return 0.0;
  std::size_t imax = 0;
  for (std::size_t i = 1; i < intensity.size(); ++i) {
    if (intensity[i] > intensity[imax]) imax = i;
  }
  const double half = 0.5 * intensity[imax];
  // outermost half-maximum crossings, linear interpolation
  double lo = freq_grid.front(), hi = freq_grid.back();
  for (std::size_t i = 0; i + 1 < intensity.size(); ++i) {
    if (intensity[i] < half && intensity[i + 1] >= half) {
      lo = freq_grid[i] + (freq_grid[i + 1] - freq_grid[i]) *
                              (half - intensity[i]) / (intensity[i + 1] - intensity[i]);
      break;
    }
  }
  for (std::size_t i = intensity.size(); i-- > 1;) {
    if (intensity[i] < half && intensity[i - 1] >= half) {
      hi = freq_grid[i] - (freq_grid[i] - freq_grid[i - 1]) *
                              (half - intensity[i]) / (intensity[i - 1] - intensity[i]);
      break;
    }
  }
  return hi - lo;
}

namespace {

// Lorentzian trace with per-line renormalization over the grid window, so
// the trapezoid integral reproduces the total line strength.
void broaden_lines(Spectrum& spec, double fwhm, int grid_points) {
  if (spec.lines.empty()) return;
  double fmin = spec.lines.front().frequency, fmax = fmin;
  for (const auto& l : spec.lines) {
    fmin = std::min(fmin, l.frequency);
    fmax = std::max(fmax, l.frequency);
  }
  const double hw = 0.5 * fwhm;
  const double lo = fmin - 10.0 * fwhm, hi = fmax + 10.0 * fwhm;
  int n = grid_points;
  if (n <= 0) {
    n = static_cast<int>((hi - lo) / (fwhm / 50.0)) + 1;
    n = std::clamp(n, 2001, 400001);
  }
  spec.freq_grid.resize(static_cast<std::size_t>(n));
  spec.intensity.assign(static_cast<std::size_t>(n), 0.0);
  const double df = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) spec.freq_grid[static_cast<std::size_t>(i)] = lo + df * i;
  for (const auto& l : spec.lines) {
    const double mass =
        (std::atan((hi - l.frequency) / hw) - std::atan((lo - l.frequency) / hw)) / k::pi;
    const double norm = l.strength / (mass * k::pi);
    for (int i = 0; i < n; ++i) {
      const double d = spec.freq_grid[static_cast<std::size_t>(i)] - l.frequency;
      spec.intensity[static_cast<std::size_t>(i)] += norm * hw / (d * d + hw * hw);
    }
  }
  spec.broadening_fwhm = fwhm;
}

} // namespace

Spectrum odmr_spectrum(const SpinSystem& sys,
                       const std::vector<NuclearNeighbor>& neighbors,
                       double broadening_fwhm_hz, int grid_points) {
  if (!(broadening_fwhm_hz > 0.0)) {
    throw std::domain_error("odmr_spectrum: broadening must be > 0");
  }
  const int dim = total_dim(neighbors);
  const int nb_dim = dim / 4;

  const MatrixXcd h = assemble_hamiltonian(sys, neighbors, Vector3d::Zero());
  VectorXd evals;
  MatrixXcd evecs;
  hermitian_eigensystem(h, evals, evecs);

  // classify eigenstates by ion-qubit content: amplitude of <q_i (x) nb|psi>
  const Eigen::Vector4cd q0 = ket_q0(), q1 = ket_q1();
  std::vector<int> manifold0, manifold1;
  for (int i = 0; i < dim; ++i) {
    double w0 = 0.0, w1 = 0.0;
    for (int nbi = 0; nbi < nb_dim; ++nbi) {
      cd a0 = 0.0, a1 = 0.0;
      for (int ion = 0; ion < 4; ++ion) {
        const cd amp = evecs(ion * nb_dim + nbi, i);
        a0 += std::conj(q0(ion)) * amp;
        a1 += std::conj(q1(ion)) * amp;
      }
      w0 += std::norm(a0);
      w1 += std::norm(a1);
    }
    if (w0 > 0.5) manifold0.push_back(i);
    else if (w1 > 0.5) manifold1.push_back(i);
  }
  if (manifold0.empty() || manifold1.empty()) {
    throw std::runtime_error("odmr_spectrum: qubit manifolds not identifiable");
  }

  // drive field along c: magnetic-dipole operator, diagonal in this basis
  VectorXd drive(dim);
  {
    std::vector<double> nb_iz(static_cast<std::size_t>(nb_dim), 0.0);
    // accumulate neighbor g_n * m_I per product-basis index
    std::vector<int> radix;
    for (const auto& n : neighbors) radix.push_back(n.multiplicity());
    for (int nbi = 0; nbi < nb_dim; ++nbi) {
      int rem = nbi;
      double val = 0.0;
      for (std::size_t j2 = neighbors.size(); j2-- > 0;) {
        const int d = radix[j2];
        const int idx = rem % d;
        rem /= d;
        val += neighbors[j2].g_nuc * (neighbors[j2].spin - idx);
      }
      nb_iz[static_cast<std::size_t>(nbi)] = val;
    }
    for (int ion = 0; ion < 4; ++ion) {
      const double sz = (ion < 2) ? 0.5 : -0.5;   // electron first factor
      const double iz = (ion % 2 == 0) ? 0.5 : -0.5;
      for (int nbi = 0; nbi < nb_dim; ++nbi) {
        drive(ion * nb_dim + nbi) =
            -sys.g_par * sz + (k::mu_nuclear / k::mu_bohr) *
                                  (sys.g_nuc * iz + nb_iz[static_cast<std::size_t>(nbi)]);
      }
    }
  }

  // strengths |<f| D |i>|^2 for i in manifold0, f in manifold1
  MatrixXcd v0(dim, static_cast<int>(manifold0.size()));
  for (std::size_t c = 0; c < manifold0.size(); ++c) {
    v0.col(static_cast<int>(c)) = drive.asDiagonal() * evecs.col(manifold0[c]);
  }
  MatrixXcd v1(dim, static_cast<int>(manifold1.size()));
  for (std::size_t c = 0; c < manifold1.size(); ++c) {
    v1.col(static_cast<int>(c)) = evecs.col(manifold1[c]);
  }
  const MatrixXcd overlap = v1.adjoint() * v0;

  Spectrum spec;
  const double weight = 1.0 / static_cast<double>(manifold0.size());
  double max_s = 0.0;
  for (int c = 0; c < overlap.cols(); ++c) {
    for (int r = 0; r < overlap.rows(); ++r) {
      max_s = std::max(max_s, std::norm(overlap(r, c)));
    }
  }
  for (int c = 0; c < overlap.cols(); ++c) {
    for (int r = 0; r < overlap.rows(); ++r) {
      const double s = std::norm(overlap(r, c)) * weight;
      if (s < 1e-8 * max_s * weight) continue;
      spec.lines.push_back({evals(manifold1[static_cast<std::size_t>(r)]) -
                                evals(manifold0[static_cast<std::size_t>(c)]),
                            s});
    }
  }
  std::sort(spec.lines.begin(), spec.lines.end(),
            [](const SpectralLine& a, const SpectralLine& b) {
              return a.frequency < b.frequency;
            });
  broaden_lines(spec, broadening_fwhm_hz, grid_points);
  return spec;
}

OpticalBroadening shf_optical_broadening(const SpinSystem& ground,
                                         const SpinSystem& excited,
                                         const std::vector<NuclearNeighbor>& neighbors,
                                         double kernel_fwhm_hz) {
  const int dim = total_dim(neighbors);
  const int nb_dim = dim / 4;

  VectorXd eg, ee;
  MatrixXcd vg, ve;
  hermitian_eigensystem(assemble_hamiltonian(ground, neighbors, Vector3d::Zero()), eg, vg);
  hermitian_eigensystem(assemble_hamiltonian(excited, neighbors, Vector3d::Zero()), ee, ve);

  // transition A: |1>_g -> |0>_e, spin-conserving optical operator
  const LevelTable tg = zero_field_levels(ground);
  const LevelTable te = zero_field_levels(excited);
  const Eigen::Vector4cd kg = tg.states.col(tg.idx_q1);
  const Eigen::Vector4cd ke = te.states.col(te.idx_q0);

  // O = |0_e><1_g| (x) identity on the neighbors
  MatrixXcd pg(nb_dim, dim), pe(nb_dim, dim);
  // <1_g| psi> per neighbor index and likewise for the excited manifold
  auto project = [&](const Eigen::Vector4cd& ion_ket, const MatrixXcd& v, MatrixXcd& out) {
    out.setZero();
    for (int col = 0; col < dim; ++col) {
      for (int nbi = 0; nbi < nb_dim; ++nbi) {
        cd a = 0.0;
        for (int ion = 0; ion < 4; ++ion) {
          a += std::conj(ion_ket(ion)) * v(ion * nb_dim + nbi, col);
        }
        out(nbi, col) = a;
      }
    }
  };
  project(kg, vg, pg);
  project(ke, ve, pe);

  // initial states: |1>_g manifold (largest qubit-1 content), uniform weights
  std::vector<int> init_states;
  for (int i = 0; i < dim; ++i) {
    if (pg.col(i).squaredNorm() > 0.5) init_states.push_back(i);
  }
  if (init_states.empty()) {
    throw std::runtime_error("shf_optical_broadening: |1>_g manifold not identifiable");
  }

  OpticalBroadening out;
  const double weight = 1.0 / static_cast<double>(init_states.size());
  double mean = 0.0, norm = 0.0;
  std::vector<SpectralLine> raw;
  for (const int i : init_states) {
    for (int f = 0; f < dim; ++f) {
      // <f_e| O |i_g> = <nb part of f in 0_e> . <nb part of i in 1_g>
      const cd amp = pe.col(f).dot(pg.col(i));
      const double s = std::norm(amp) * weight;
      if (s < 1e-10) continue;
      const double freq = ee(f) - eg(i);
      raw.push_back({freq, s});
      mean += s * freq;
      norm += s;
    }
  }
  if (raw.empty() || norm <= 0.0) {
    throw std::runtime_error("shf_optical_broadening: no allowed lines");
  }
  mean /= norm;
  double var = 0.0;
  for (auto& l : raw) {
    l.frequency -= mean; // report relative positions
    var += l.strength / norm * l.frequency * l.frequency;
  }
  out.weighted_std = std::sqrt(var);
  out.lines = std::move(raw);
  std::sort(out.lines.begin(), out.lines.end(),
            [](const SpectralLine& a, const SpectralLine& b) {
              return a.frequency < b.frequency;
            });

  Spectrum spec;
  spec.lines = out.lines;
  broaden_lines(spec, kernel_fwhm_hz, 0);
  out.fwhm = spec.envelope_fwhm();
  return out;
}

std::vector<TransitionRule> selection_rules(Polarization pol) {
  static const std::vector<TransitionRule> parallel = {
      {"A", "1g", "0e", Polarization::parallel_c},
      {"E", "0g", "1e", Polarization::parallel_c},
      {"I", "aux", "aux", Polarization::parallel_c},
  };
  static const std::vector<TransitionRule> perpendicular = {
      {"B", "0g", "aux", Polarization::perpendicular_c},
      {"C", "aux", "0e", Polarization::perpendicular_c},
      {"F", "aux", "1e", Polarization::perpendicular_c},
      {"G", "1g", "aux", Polarization::perpendicular_c},
  };
  return (pol == Polarization::parallel_c) ? parallel : perpendicular;
}

bool transition_forbidden(const std::string& ground, const std::string& excited) {
  // forbidden at zero field by symmetry
  return (ground == "0g" && excited == "0e") || (ground == "1g" && excited == "1e");
}

double g4_scaling_ratio() {
  const double r = 6.08 / 0.85;
  return r * r * r * r;
}

} // namespace ionsim::spin
