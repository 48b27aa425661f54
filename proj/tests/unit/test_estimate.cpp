#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "qls/estimate.hpp"
#include "qls/random.hpp"
#include "test_support.hpp"

using namespace qls;
using qlstest::cavity_params;
using qlstest::draw_system;
using qlstest::driven_cavity_params;
using qlstest::rel_gap;

namespace {

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> grid(points);
  for (int k = 0; k < points; ++k)
    grid[k] = lo * std::pow(hi / lo, static_cast<double>(k) / (points - 1));
  return grid;
}

// Worst relative gap of the fitted strictly proper part against exact
// samples, matching the floor normalization used below.
double fit_gap(const LoewnerFit& fit, const SpectrumDataset& exact) {
  const Index m = exact.channels();
  const Mat j = j_matrix(m);
  const Mat vac = vacuum_covariance(m);
  const auto& r = fit.realization;
  double worst = 0.0;
  for (std::size_t k = 0; k < exact.omegas.size(); ++k) {
    const Mat fe = exact.samples[k] * j - vac;
    Mat fh = Mat::Zero(2 * m, 2 * m);
    if (r.order() > 0) {
      const Cplx s(0.0, -exact.omegas[k]);
      fh = r.c * (s * Mat::Identity(r.order(), r.order()) - r.a).partialPivLu().solve(r.b);
    }
    worst = std::max(worst, (fh - fe).norm() / std::max(1.0, fe.norm()));
  }
  return worst;
}

double noise_floor(const SpectrumDataset& noisy, const SpectrumDataset& exact) {
  const Index m = exact.channels();
  const Mat j = j_matrix(m);
  const Mat vac = vacuum_covariance(m);
  double floor_val = 0.0;
  for (std::size_t k = 0; k < exact.omegas.size(); ++k) {
    const Mat fe = exact.samples[k] * j - vac;
    const Mat fn = noisy.samples[k] * j - vac;
    floor_val = std::max(floor_val, (fn - fe).norm() / std::max(1.0, fe.norm()));
  }
  return floor_val;
}

}  // namespace

TEST_CASE("dataset validation enforces ordering and shapes") {
  const StateSpace ss = build_state_space(cavity_params());
  const GaussianInput vac = GaussianInput::vacuum(1);
  SpectrumDataset data = exact_dataset(ss, vac, {0.5, 1.0, 2.0});
  CHECK_NOTHROW(validate_dataset(data));

  SpectrumDataset unordered = data;
  std::swap(unordered.omegas[0], unordered.omegas[1]);
  CHECK_THROWS_AS(validate_dataset(unordered), StructureError);

  SpectrumDataset short_samples = data;
  short_samples.samples.pop_back();
  CHECK_THROWS_AS(validate_dataset(short_samples), DimensionError);

  SpectrumDataset odd_shape = data;
  odd_shape.samples[1] = Mat::Zero(3, 3);
  CHECK_THROWS_AS(validate_dataset(odd_shape), DimensionError);

  SpectrumDataset poisoned = data;
  poisoned.samples[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(validate_dataset(poisoned), StructureError);

  SpectrumDataset negative = data;
  negative.shots = -1;
  CHECK_THROWS_AS(validate_dataset(negative), StructureError);
}

TEST_CASE("exact datasets sample the spectrum") {
  const StateSpace ss = build_state_space(cavity_params());
  const SpectrumDataset data = exact_dataset(ss, GaussianInput::vacuum(1), {0.5, 1.0, 2.0});
  CHECK(data.shots == 0);
  CHECK(data.channels() == 1);
  for (const Mat& sample : data.samples) CHECK(rel_gap(sample, vacuum_covariance(1)) < 1e-14);
}

TEST_CASE("synthesized datasets are reproducible streams with the right mean") {
  const StateSpace ss = build_state_space(driven_cavity_params(0.3, 0.2));
  const GaussianInput vac = GaussianInput::vacuum(1);
  const std::vector<double> grid{0.4, 0.9, 1.7, 3.1};

  const SpectrumDataset a = synthesize_dataset(ss, vac, grid, 500, 77);
  const SpectrumDataset b = synthesize_dataset(ss, vac, grid, 500, 77);
  for (std::size_t k = 0; k < grid.size(); ++k)
    CHECK((a.samples[k] - b.samples[k]).norm() == 0.0);

  const SpectrumDataset c = synthesize_dataset(ss, vac, grid, 500, 78);
  CHECK((a.samples[0] - c.samples[0]).norm() > 0.0);

  // Streams are indexed by grid position, so a prefix reproduces exactly.
  const SpectrumDataset prefix =
      synthesize_dataset(ss, vac, {grid[0], grid[1]}, 500, 77);
  CHECK((prefix.samples[0] - a.samples[0]).norm() == 0.0);
  CHECK((prefix.samples[1] - a.samples[1]).norm() == 0.0);

  // Entrywise agreement with the true spectrum within three standard errors.
  const long shots = 10000;
  const SpectrumDataset big = synthesize_dataset(ss, vac, {1.3}, shots, 79);
  const Mat psi = spectrum_at(ss, vac.covariance(), Cplx(0.0, -1.3)).psi;
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) {
      const double se = std::sqrt(psi(i, i).real() * psi(j, j).real() /
                                  static_cast<double>(shots));
      CHECK(std::abs(big.samples[0](i, j) - psi(i, j)) <= 3.0 * se);
    }
}

TEST_CASE("heavily averaged passive samples concentrate on the vacuum") {
  const StateSpace ss = build_state_space(cavity_params());
  const SpectrumDataset data =
      synthesize_dataset(ss, GaussianInput::vacuum(1), {0.5, 2.0}, 1000000, 80);
  for (const Mat& sample : data.samples)
    CHECK((sample - vacuum_covariance(1)).cwiseAbs().maxCoeff() < 5e-3);
}

TEST_CASE("exact fit recovers the cascade poles and order") {
  const StateSpace ss = build_state_space(driven_cavity_params(0.3, 0.2));
  const SpectrumDataset data =
      exact_dataset(ss, GaussianInput::vacuum(1), log_grid(0.05, 20.0, 40));
  const LoewnerFit fit = fit_realization(data);

  CHECK(fit.detected_order == 4);
  CHECK(fit_gap(fit, data) < 1e-6);

  const Vec cascade_eigs = build_cascade(ss).a.eigenvalues();
  for (const Cplx pole : fit.poles) {
    double best = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < cascade_eigs.size(); ++k)
      best = std::min(best, std::abs(pole - cascade_eigs(k)));
    CHECK(best < 1e-6);
  }

  // The pole set inherits the reflection symmetry of the spectrum.
  for (const Cplx pole : fit.poles) {
    double best = std::numeric_limits<double>::infinity();
    for (const Cplx other : fit.poles) best = std::min(best, std::abs(-std::conj(pole) - other));
    CHECK(best < 1e-7);
  }

  // Frequencies never seen by the fit get the same transfer values.
  const Mat vac = vacuum_covariance(1);
  const Mat j = j_matrix(1);
  for (double w : {0.0731, 0.91, 3.7, 11.3}) {
    const Cplx s(0.0, -w);
    const Mat target = spectrum_at(ss, vac, s).psi * j;
    CHECK(rel_gap(fit.realization.transfer_at(s), target) < 1e-6);
  }
}

TEST_CASE("constant vacuum samples detect order zero") {
  const StateSpace ss = build_state_space(cavity_params());
  const SpectrumDataset data =
      exact_dataset(ss, GaussianInput::vacuum(1), log_grid(0.05, 20.0, 21));
  const LoewnerFit fit = fit_realization(data);
  CHECK(fit.detected_order == 0);
  CHECK(fit.realization.order() == 0);
  CHECK(rel_gap(fit.realization.d, vacuum_covariance(1)) < 1e-15);
  CHECK(fit.poles.empty());
}

TEST_CASE("order expectation mismatches carry the detected rank") {
  const StateSpace ss = build_state_space(driven_cavity_params(0.3, 0.2));
  const SpectrumDataset data =
      exact_dataset(ss, GaussianInput::vacuum(1), log_grid(0.05, 20.0, 40));
  try {
    fit_realization(data, 8);
    FAIL("expected an order error");
  } catch (const OrderError& e) {
    CHECK(e.detected == 4);
  }
}

TEST_CASE("padded systems fit at the reduced order") {
  const RandomSystem sys = draw_system(81, 1, 1);
  const StateSpace padded = build_state_space(pad_with_passive_mode(sys.params));
  const SpectrumDataset data = exact_dataset(padded, GaussianInput::vacuum(padded.channels()),
                                             log_grid(0.05, 20.0, 41));
  const LoewnerFit fit = fit_realization(data);
  CHECK(fit.detected_order == 4);  // one mode of dynamics, not two
}

TEST_CASE("noisy fits recover the order and stay near the noise floor") {
  const StateSpace ss = draw_system(2160, 2, 2, true, 0.05).ss;
  const std::vector<double> grid = log_grid(0.05, 20.0, 41);
  const GaussianInput vac = GaussianInput::vacuum(2);
  const SpectrumDataset exact = exact_dataset(ss, vac, grid);
  const SpectrumDataset noisy = synthesize_dataset(ss, vac, grid, 10000, 502160);

  const LoewnerFit fit = fit_realization(noisy);
  CHECK(fit.detected_order == 8);

  const double floor_val = noise_floor(noisy, exact);
  CHECK(floor_val > 0.0);
  CHECK(fit_gap(fit, exact) < 3.0 * floor_val);
}

TEST_CASE("noisy fitting needs enough frequencies") {
  const StateSpace ss = build_state_space(driven_cavity_params(0.3, 0.2));
  const GaussianInput vac = GaussianInput::vacuum(1);
  const SpectrumDataset tiny = synthesize_dataset(ss, vac, {0.5, 1.0, 2.0, 4.0, 8.0}, 100, 84);
  CHECK_THROWS_AS(fit_realization(tiny), NumericalError);
}
