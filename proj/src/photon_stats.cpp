#include "ionsim/photon_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ionsim/numerics.hpp"

namespace ionsim::photon {

namespace {

// pmf storage cut at the smallest k with cumulative mass > 1 - 1e-12
constexpr double kTailEps = 1e-12;

void trim_support(std::vector<double>& pmf) {
  double cum = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    cum += pmf[k];
    if (cum > 1.0 - kTailEps) {
      pmf.resize(k + 1);
      return;
    }
  }
}

} // namespace

void ReadoutModel::validate() const {
  if (p_f < 0.0 || p_f > 1.0) throw std::domain_error("readout: p_f outside [0,1]");
  if (p_tot < 0.0 || p_tot > 1.0) throw std::domain_error("readout: p_tot outside [0,1]");
  if (gamma_bg < 0.0) throw std::domain_error("readout: gamma_bg must be >= 0");
  if (n_pulses < 1) throw std::domain_error("readout: n_pulses must be >= 1");
  if (t_r < 0.0) throw std::domain_error("readout: t_r must be >= 0");
}

ReadoutModel device_readout_model() {
  ReadoutModel m;
  m.p_f = 5.928046393202638e-3;
  m.p_tot = 0.01;
  m.gamma_bg = 39.7808700118446; // counts/s -> mean 0.0398 over the sequence
  m.n_pulses = 400;
  m.t_r = 2.5e-6;
  return m;
}

double CountDistribution::total() const {
  double s = 0.0;
  for (double p : pmf) s += p;
  return s;
}

double CountDistribution::mean() const {
  double s = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) s += static_cast<double>(k) * pmf[k];
  return s;
}

double CountDistribution::tail(int k) const {
  if (k <= 0) return total();
  double s = 0.0;
  for (std::size_t i = static_cast<std::size_t>(k); i < pmf.size(); ++i) s += pmf[i];
  return s;
}

CountDistribution CountDistribution::point_mass(int k) {
  if (k < 0) throw std::domain_error("point_mass: negative count");
  CountDistribution d;
  d.pmf.assign(static_cast<std::size_t>(k) + 1, 0.0);
  d.pmf.back() = 1.0;
  return d;
}

CountDistribution CountDistribution::poisson(double mean_counts) {
  if (mean_counts < 0.0 || !std::isfinite(mean_counts)) {
    throw std::domain_error("poisson: mean must be finite and >= 0");
  }
  CountDistribution d;
  double p = std::exp(-mean_counts);
  d.pmf.push_back(p);
  double cum = p;
  for (int k = 1; cum <= 1.0 - kTailEps && k < 100000; ++k) {
    p *= mean_counts / k;
    d.pmf.push_back(p);
    cum += p;
  }
  return d;
}

CountDistribution ion_count_distribution(const ReadoutModel& model, Truncation mode) {
  model.validate();
  CountDistribution d;
  if (mode == Truncation::untruncated) {
    const double denom = model.p_tot + model.p_f - model.p_tot * model.p_f;
    if (denom <= 0.0) {
      throw std::domain_error("ion_count_distribution: non-normalizable (p_f = 0 with untruncated pulses)");
    }
    const double p_n = model.p_f / denom;
    if (!(p_n > 0.0)) {
      throw std::domain_error("ion_count_distribution: non-normalizable geometric");
    }
    double p = p_n, cum = p_n;
    d.pmf.push_back(p);
    while (cum <= 1.0 - kTailEps) {
      p *= (1.0 - p_n);
      d.pmf.push_back(p);
      cum += p;
    }
    return d;
  }

  // Finite pulse train: the number of successful cycles before shelving is
  // N_r = min(G, N_max) with G geometric(p_f); counts are Binomial(N_r, p_tot).
  // The compound pmf is accumulated by walking the binomial row recurrence.
  const int nmax = model.n_pulses;
  const double q = 1.0 - model.p_tot;
  std::vector<double> binom_row{1.0}; // Binomial(m, p_tot) pmf, updated in m
  std::vector<double> pmf(static_cast<std::size_t>(nmax) + 1, 0.0);
  double geom_weight = model.p_f; // P(G = 0)
  double survive = 1.0;           // P(G >= m)
  for (int m = 0; m <= nmax; ++m) {
    if (m > 0) {
      // convolve with a single Bernoulli(p_tot) trial
      binom_row.push_back(0.0);
      for (int k = m; k >= 1; --k) {
        binom_row[static_cast<std::size_t>(k)] =
            binom_row[static_cast<std::size_t>(k)] * q +
            binom_row[static_cast<std::size_t>(k - 1)] * model.p_tot;
      }
      binom_row[0] *= q;
    }
    const double w = (m < nmax) ? geom_weight : survive; // leftover mass at N_max
    if (w > 0.0) {
      for (int k = 0; k <= m; ++k) {
        pmf[static_cast<std::size_t>(k)] += w * binom_row[static_cast<std::size_t>(k)];
      }
    }
    survive *= (1.0 - model.p_f);
    geom_weight = survive * model.p_f; // P(G = m+1)
  }
  trim_support(pmf);
  d.pmf = std::move(pmf);
  return d;
}

CountDistribution background_distribution(const ReadoutModel& model) {
  model.validate();
  return CountDistribution::poisson(model.mean_background());
}

CountDistribution convolve(const CountDistribution& a, const CountDistribution& b) {
  CountDistribution d;
  d.pmf.assign(a.pmf.size() + b.pmf.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.pmf.size(); ++i) {
    if (a.pmf[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.pmf.size(); ++j) {
      d.pmf[i + j] += a.pmf[i] * b.pmf[j];
    }
  }
  trim_support(d.pmf);
  return d;
}

FidelityReport assignment_errors(const CountDistribution& dist0,
                                 const CountDistribution& dist1, int n_c) {
  if (n_c < 1) {
    throw std::domain_error("assignment_errors: n_c must be >= 1 (n_c = 0 assigns everything to |1>)");
  }
  FidelityReport r;
  r.n_c = n_c;
  r.epsilon_0 = dist0.tail(n_c);
  r.epsilon_1 = dist1.total() - dist1.tail(n_c);
  r.f_0 = 1.0 - r.epsilon_0;
  r.f_1 = 1.0 - r.epsilon_1;
  r.f_avg = 0.5 * (r.f_0 + r.f_1);
  return r;
}

FidelityReport optimal_threshold(const CountDistribution& dist0,
                                 const CountDistribution& dist1) {
  const int n_max = std::max(dist0.support_cap(), dist1.support_cap()) + 1;
  FidelityReport best = assignment_errors(dist0, dist1, 1);
  for (int n_c = 2; n_c <= n_max; ++n_c) {
    FidelityReport r = assignment_errors(dist0, dist1, n_c);
    if (r.f_avg > best.f_avg) best = r; // strict: ties keep the smaller n_c
  }
  return best;
}

ConditionalReport conditional_fidelity(double f0, double f1) {
  if (f0 < 0.0 || f0 > 1.0 || f1 < 0.0 || f1 > 1.0) {
    throw std::domain_error("conditional_fidelity: fidelities must lie in [0,1]");
  }
  ConditionalReport r;
  const double hit = f0 * f1;
  const double miss = (1.0 - f0) * (1.0 - f1);
  r.p_success = hit + miss;
  r.f_cond = (r.p_success > 0.0) ? hit / r.p_success : 0.0;
  // outcome |ab| rows 00,01,10,11; prepared |0> and |1| columns
  r.outcome_matrix[0] = {f0 * (1.0 - f1), (1.0 - f1) * f0};
  r.outcome_matrix[1] = {f0 * f1, (1.0 - f1) * (1.0 - f0)};
  r.outcome_matrix[2] = {(1.0 - f0) * (1.0 - f1), f1 * f0};
  r.outcome_matrix[3] = {(1.0 - f0) * f1, f1 * (1.0 - f0)};
  return r;
}

namespace {

// (1 - beta^n) / (1 - beta), stable at beta -> 1
double pump_curve(double beta, double n) {
  const double one_minus = 1.0 - beta;
  if (one_minus < 1e-12) return n * (1.0 - 0.5 * (n - 1.0) * one_minus);
  return (1.0 - std::pow(beta, n)) / one_minus;
}

} // namespace

BranchingFit fit_branching_from_cumulative(
    const std::vector<std::pair<double, double>>& curve, double p_exc) {
  if (curve.size() < 3) {
    throw std::invalid_argument("fit_branching_from_cumulative: need >= 3 points");
  }
  if (!(p_exc > 0.0) || p_exc > 1.0) {
    throw std::domain_error("fit_branching_from_cumulative: p_exc must lie in (0,1]");
  }
  // nondecreasing up to measurement noise (cumulative data can dip slightly
  // on the plateau)
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].second < 0.9 * curve[i - 1].second) {
      throw std::invalid_argument("fit_branching_from_cumulative: counts must be nondecreasing");
    }
  }

  // amplitude is linear: for fixed beta, amp = sum(f y)/sum(f^2)
  auto sse = [&](double beta) {
    double sfy = 0.0, sff = 0.0;
    for (const auto& [np, y] : curve) {
      const double f = pump_curve(beta, np);
      sfy += f * y;
      sff += f * f;
    }
    const double amp = (sff > 0.0) ? sfy / sff : 0.0;
    double s = 0.0;
    for (const auto& [np, y] : curve) {
      const double r = y - amp * pump_curve(beta, np);
      s += r * r;
    }
    return s;
  };

  const auto min = ionsim::numerics::brent_minimize(sse, 0.5, 1.0 - 1e-9, 1e-12);
  if (!std::isfinite(min.fx)) {
    std::ostringstream os;
    os << "fit_branching_from_cumulative: divergent fit, residual sum " << min.fx;
    throw std::runtime_error(os.str());
  }

  BranchingFit fit;
  fit.beta_eff = min.x;
  fit.p_exc = p_exc;
  fit.beta_parallel = 1.0 - (1.0 - fit.beta_eff) / p_exc;
  double sfy = 0.0, sff = 0.0;
  for (const auto& [np, y] : curve) {
    const double f = pump_curve(fit.beta_eff, np);
    sfy += f * y;
    sff += f * f;
  }
  fit.amplitude = (sff > 0.0) ? sfy / sff : 0.0;
  fit.cumulative_curve = curve;
  return fit;
}

CountDistribution load_count_histogram(std::istream& in) {
  std::vector<double> occ;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    long k;
    double n;
    if (!(ls >> k >> n)) {
      throw std::runtime_error("histogram CSV: expected 'count, occurrences' got: " + line);
    }
    if (k < 0 || n < 0.0) throw std::runtime_error("histogram CSV: negative entry");
    if (static_cast<std::size_t>(k) >= occ.size()) occ.resize(static_cast<std::size_t>(k) + 1, 0.0);
    occ[static_cast<std::size_t>(k)] += n;
  }
  double total = 0.0;
  for (double v : occ) total += v;
  if (total <= 0.0) throw std::runtime_error("histogram CSV: no counts");
  CountDistribution d;
  d.pmf.resize(occ.size());
  for (std::size_t k = 0; k < occ.size(); ++k) d.pmf[k] = occ[k] / total;
  return d;
}

} // namespace ionsim::photon
