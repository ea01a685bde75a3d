#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "ionsim/photon_stats.hpp"
#include "ionsim/rng.hpp"

using namespace ionsim::photon;

namespace {

// Brute-force per-pulse trial oracle: each pulse either shelves the ion
// (probability p_f, fluorescence stops) or emits a detectable photon that
// is counted with probability p_tot; background counts are Poissonian.
std::vector<double> mc_ion_histogram(const ReadoutModel& m, std::size_t trials,
                                     std::uint64_t seed, bool with_background = false) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::poisson_distribution<int> bg(m.mean_background());
  std::vector<double> hist;
  for (std::size_t t = 0; t < trials; ++t) {
    int counts = 0;
    for (int p = 0; p < m.n_pulses; ++p) {
      if (uni(gen) < m.p_f) break; // shelved: dark for the rest of the train
      if (uni(gen) < m.p_tot) ++counts;
    }
    if (with_background) counts += bg(gen);
    if (counts >= static_cast<int>(hist.size())) hist.resize(counts + 1, 0.0);
    hist[counts] += 1.0;
  }
  for (double& h : hist) h /= static_cast<double>(trials);
  return hist;
}

double total_variation(const CountDistribution& d, const std::vector<double>& emp) {
  double tv = 0.0;
  const int kmax = std::max(d.support_cap(), static_cast<int>(emp.size()) - 1);
  for (int kk = 0; kk <= kmax; ++kk) {
    const double e = kk < static_cast<int>(emp.size()) ? emp[kk] : 0.0;
    tv += std::abs(d.at(kk) - e);
  }
  return 0.5 * tv;
}

ReadoutModel make_model(double p_f, double p_tot, double gamma_bg, int n_pulses) {
  ReadoutModel m;
  m.p_f = p_f;
  m.p_tot = p_tot;
  m.gamma_bg = gamma_bg;
  m.n_pulses = n_pulses;
  m.t_r = 2.5e-6;
  return m;
}

} // namespace

TEST_CASE("untruncated ion distribution is geometric in the detected counts") {
  const auto m = make_model(0.003, 0.01, 0.0, 400);
  const auto d = ion_count_distribution(m, Truncation::untruncated);
  const double p_n = 0.003 / (0.01 + 0.003 - 0.01 * 0.003);
  CHECK(p_n == doctest::Approx(0.23130).epsilon(1e-4));
  CHECK(d.at(0) == doctest::Approx(p_n).epsilon(1e-9));
  CHECK(d.at(3) == doctest::Approx(p_n * std::pow(1 - p_n, 3)).epsilon(1e-9));
  CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-9));
  // geometric mean identity
  CHECK(d.mean() == doctest::Approx((1.0 - p_n) / p_n).epsilon(1e-9));
}

TEST_CASE("perfect detection reduces to the shelving geometric") {
  const auto d = ion_count_distribution(make_model(0.5, 1.0, 0.0, 400),
                                        Truncation::untruncated);
  for (int kk = 0; kk < 8; ++kk) {
    CHECK(d.at(kk) == doctest::Approx(std::pow(0.5, kk + 1)).epsilon(1e-9));
  }
}

TEST_CASE("non-normalizable request is rejected") {
  auto m = make_model(0.0, 0.01, 0.0, 400);
  CHECK_THROWS_WITH_AS(ion_count_distribution(m, Truncation::untruncated),
                       doctest::Contains("non-normalizable"), std::domain_error);
  // finite pulse train is fine even at p_f = 0
  CHECK_NOTHROW(ion_count_distribution(m, Truncation::truncated));
}

TEST_CASE("truncated distribution matches the per-pulse Monte Carlo oracle") {
  const auto m = make_model(0.003, 0.01, 0.0, 400);
  const auto d = ion_count_distribution(m, Truncation::truncated);
  CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-9));
  const auto emp = mc_ion_histogram(m, 1000000, 12345);
  CHECK(total_variation(d, emp) < 0.01);
}

TEST_CASE("oracle equivalence over random parameter tuples") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double p_f = 0.001 + 0.02 * uni(gen);
    const double p_tot = 0.005 + 0.05 * uni(gen);
    const double gbg = 100.0 * uni(gen);
    const int n_pulses = 50 + static_cast<int>(400 * uni(gen));
    const auto m = make_model(p_f, p_tot, gbg, n_pulses);
    const auto d = convolve(ion_count_distribution(m, Truncation::truncated),
                            background_distribution(m));
    const auto emp = mc_ion_histogram(m, 200000, ionsim::rng::derive_seed(4, trial), true);
    CAPTURE(p_f);
    CAPTURE(p_tot);
    CAPTURE(n_pulses);
    CHECK(total_variation(d, emp) < 0.015);
  }
}

TEST_CASE("background distribution") {
  CHECK(background_distribution(make_model(0.003, 0.01, 0.0, 400)).at(0) ==
        doctest::Approx(1.0));
  auto m = make_model(0.003, 0.01, 40.0, 400); // mean 0.04
  const auto d = background_distribution(m);
  CHECK(d.at(0) == doctest::Approx(std::exp(-0.04)).epsilon(1e-9));
  CHECK(d.at(0) == doctest::Approx(0.9608).epsilon(1e-4));
  const auto p1 = CountDistribution::poisson(1.0);
  CHECK(p1.at(0) == doctest::Approx(p1.at(1)).epsilon(1e-12));
  CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("convolution identities") {
  const auto m = make_model(0.003, 0.01, 40.0, 400);
  const auto ion = ion_count_distribution(m, Truncation::untruncated);
  const auto idd = convolve(ion, CountDistribution::point_mass(0));
  for (int kk = 0; kk <= ion.support_cap(); ++kk) {
    CHECK(idd.at(kk) == doctest::Approx(ion.at(kk)).epsilon(1e-12));
  }
  const auto pp = convolve(CountDistribution::poisson(0.7), CountDistribution::poisson(1.1));
  const auto ref = CountDistribution::poisson(1.8);
  for (int kk = 0; kk <= 12; ++kk) {
    CHECK(pp.at(kk) == doctest::Approx(ref.at(kk)).epsilon(1e-9));
  }
  // geometric (x) Poisson background vs brute-force oracle
  const auto tot = convolve(ion, background_distribution(m));
  CHECK(tot.total() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(tot.mean() == doctest::Approx(ion.mean() + 0.04).epsilon(1e-9));
}

TEST_CASE("threshold fidelities on the calibrated model") {
  const auto m = device_readout_model();
  const auto bg = background_distribution(m);
  const auto d1 = convolve(ion_count_distribution(m, Truncation::truncated), bg);
  const auto rep = assignment_errors(bg, d1, 1);
  CHECK(rep.f_0 == doctest::Approx(0.961).epsilon(1e-3));
  CHECK(rep.f_1 == doctest::Approx(0.640).epsilon(1e-3));
  CHECK(rep.f_avg == doctest::Approx(0.800).epsilon(1e-3));
  CHECK(rep.f_0 == doctest::Approx(1.0 - rep.epsilon_0).epsilon(1e-12));

  CHECK(optimal_threshold(bg, d1).n_c == 1);
}

TEST_CASE("assignment error edge cases and monotonicity") {
  const auto p0 = CountDistribution::point_mass(0);
  CountDistribution d1;
  d1.pmf = {0.0, 0.3, 0.7};
  const auto rep = assignment_errors(p0, d1, 1);
  CHECK(rep.f_0 == doctest::Approx(1.0));
  CHECK(rep.f_1 == doctest::Approx(1.0));
  CHECK_THROWS(assignment_errors(p0, d1, 0));

  const auto m = device_readout_model();
  const auto bg = background_distribution(m);
  const auto dd = convolve(ion_count_distribution(m, Truncation::truncated), bg);
  double prev_f0 = -1.0, prev_f1 = 2.0;
  for (int nc = 1; nc <= 25; ++nc) {
    const auto r = assignment_errors(bg, dd, nc);
    CHECK(r.f_0 >= prev_f0);
    CHECK(r.f_1 <= prev_f1);
    prev_f0 = r.f_0;
    prev_f1 = r.f_1;
  }
  // large threshold limit
  const auto rinf = assignment_errors(bg, dd, 10000);
  CHECK(rinf.f_0 == doctest::Approx(1.0));
  CHECK(rinf.f_1 == doctest::Approx(0.0));
}

TEST_CASE("optimal threshold tie-breaking") {
  CountDistribution a = CountDistribution::point_mass(0);
  CountDistribution b = CountDistribution::point_mass(5);
  CHECK(optimal_threshold(a, b).n_c == 1); // every n_c in 1..5 is perfect
  CHECK(optimal_threshold(a, a).n_c == 1);
  CHECK(optimal_threshold(a, a).f_avg == doctest::Approx(0.5));
}

TEST_CASE("conditional protocol") {
  const auto r = conditional_fidelity(0.961, 0.640);
  CHECK(r.p_success == doctest::Approx(0.629).epsilon(0.001 / 0.629));
  CHECK(r.f_cond == doctest::Approx(0.978).epsilon(0.001 / 0.978));
  CHECK(conditional_fidelity(1.0, 1.0).f_cond == doctest::Approx(1.0));
  CHECK(conditional_fidelity(0.5, 0.5).f_cond == doctest::Approx(0.5));
  CHECK(conditional_fidelity(0.5, 0.5).p_success == doctest::Approx(0.5));

  // outcome matrix columns are probability distributions
  for (int col = 0; col < 2; ++col) {
    double s = 0.0;
    for (int row = 0; row < 4; ++row) s += r.outcome_matrix[row][col];
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("conditional fidelity dominates single readout above 0.5") {
  for (double f0 = 0.55; f0 < 1.0; f0 += 0.05) {
    for (double f1 = 0.55; f1 < 1.0; f1 += 0.05) {
      const auto r = conditional_fidelity(f0, f1);
      CHECK(r.f_cond >= std::max(f0, f1) - 1e-12);
    }
  }
}

TEST_CASE("branching ratio fit on synthetic pumping curves") {
  const double beta = 0.997;
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> noise(0.0, 0.01);
  int failures = 0;
  for (int s = 0; s < 100; ++s) {
    std::vector<std::pair<double, double>> curve;
    for (int np = 20; np <= 800; np += 20) {
      const double ideal = (1.0 - std::pow(beta, np)) / (1.0 - beta);
      curve.emplace_back(np, ideal * (1.0 + noise(gen)));
    }
    const auto fit = fit_branching_from_cumulative(curve, 0.94);
    if (std::abs(fit.beta_eff - beta) > 0.001) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("branching fit identities and edge cases") {
  std::vector<std::pair<double, double>> curve;
  const double beta = 0.997;
  for (int np = 25; np <= 800; np += 25) {
    curve.emplace_back(np, 5.0 * (1.0 - std::pow(beta, np)) / (1.0 - beta));
  }
  const auto fit = fit_branching_from_cumulative(curve, 0.94);
  CHECK(fit.beta_eff == doctest::Approx(0.997).epsilon(1e-4));
  CHECK(fit.beta_parallel == doctest::Approx(0.9968).epsilon(0.0005 / 0.9968));
  CHECK(fit.beta_parallel ==
        doctest::Approx(1.0 - (1.0 - fit.beta_eff) / 0.94).epsilon(1e-12));

  // exactly linear curve: no pumping, beta -> 1
  std::vector<std::pair<double, double>> lin;
  for (int np = 25; np <= 800; np += 25) lin.emplace_back(np, 3.0 * np);
  CHECK(fit_branching_from_cumulative(lin, 0.94).beta_eff >= 0.9999);

  CHECK_THROWS(fit_branching_from_cumulative({{1.0, 1.0}, {2.0, 2.0}}, 0.94));
  CHECK_THROWS(fit_branching_from_cumulative(curve, 0.0));
}

TEST_CASE("histogram CSV loader") {
  std::istringstream in("# counts\n0, 800\n1, 150\n2, 50\n");
  const auto d = load_count_histogram(in);
  CHECK(d.at(0) == doctest::Approx(0.8));
  CHECK(d.at(1) == doctest::Approx(0.15));
  CHECK(d.at(2) == doctest::Approx(0.05));
  CHECK(d.total() == doctest::Approx(1.0));
}
