// Acceptance gate: ten release criteria checked end to end against the
// installed library and the qlsid binary. Each criterion prints one
// [PASS]/[FAIL] line; the exit status is the number of failures.

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qls/analysis.hpp"
#include "qls/cascade.hpp"
#include "qls/errors.hpp"
#include "qls/estimate.hpp"
#include "qls/identify.hpp"
#include "qls/io.hpp"
#include "qls/model.hpp"
#include "qls/random.hpp"
#include "subprocess.hpp"
#include "test_support.hpp"

using namespace qls;
using nlohmann::json;
using qlstest::qlsid_binary;
using qlstest::read_file;
using qlstest::rel_gap;
using qlstest::run_command;
using qlstest::scratch_dir;
using qlstest::write_file;

namespace {

// Criterion tolerances, pinned here so a change is a visible diff.
constexpr double kSymplecticTol = 1e-10;            // 1: flat(Xi) Xi - I
constexpr double kBuiltRealizabilityTol = 1e-12;    // 2: built systems
constexpr double kIdentifiedRealizabilityTol = 1e-8;  // 2: identified systems
constexpr double kConjugationTol = 1e-9;            // 3: transfer invariance
constexpr double kWitnessTol = 1e-6;                // 3, 7: relation residuals
constexpr double kLbtTol = 1e-8;                    // 6: relative upper-right block
constexpr double kRoundTripTol = 1e-7;              // 7: held-out transfer match
constexpr double kGilbertTol = 1e-8;                // 8: transfer and structure
constexpr double kVacuumTol = 1e-12;                // 9: spectrum flatness
constexpr double kPoleTol = 1e-6;                   // 10: exact pole recovery
constexpr double kNoiseFactor = 3.0;                // 10: fit error vs floor
constexpr long kShots = 10000;                      // 10: averaged draws

struct Outcome {
  bool pass = false;
  std::string detail = "not run";
};

std::array<Outcome, 10> g_results;

const std::array<const char*, 10> g_labels = {
    "transfer function is symplectic along the imaginary axis",
    "realizability identity holds for built and identified systems",
    "symplectic conjugation preserves transfer samples and equiv finds a witness",
    "the three global-minimality criteria agree on minimal and padded systems",
    "cascade minimality matches global minimality",
    "similarities between proper lower-triangular pairs keep the zero block",
    "identification from exact spectra round trips through a verified symplectic",
    "diagonal realizations reproduce the spectrum and reject real poles",
    "passive systems under vacuum give a flat spectrum and exit code 3",
    "frequency-domain fits recover order and poles and track the noise floor"};

// Residual accumulators feeding criterion 2.
double g_worst_built = 0.0;
int g_built_count = 0;
double g_worst_identified = -1.0;
int g_identified_count = 0;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

void record_built(const StateSpace& ss) {
  g_worst_built = std::max(g_worst_built, check_realizability(ss));
  ++g_built_count;
}

std::string path_of(const std::string& name) { return (scratch_dir() / name).string(); }

RandomSystem draw(std::mt19937_64& rng, Index modes, Index channels, bool globally_minimal,
                  double mixing_margin = 0.01) {
  RandomSystemOptions opt;
  opt.modes = modes;
  opt.channels = channels;
  opt.require_globally_minimal = globally_minimal;
  opt.mixing_margin = mixing_margin;
  return random_realizable_system(rng, opt);
}

Outcome c1_transfer_symplectic() {
  std::mt19937_64 rng(11001);
  const std::array<std::pair<Index, Index>, 5> sizes{{{1, 1}, {2, 1}, {2, 2}, {3, 2}, {1, 2}}};
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto [n, m] = sizes[i % sizes.size()];
    const RandomSystem sys = draw(rng, n, m, false);
    record_built(sys.ss);
    const Mat eye = Mat::Identity(2 * m, 2 * m);
    for (double w : probe_frequencies(spectral_scale(sys.ss), 10)) {
      const Mat xi = transfer_at(sys.ss, Cplx(0.0, -w)).xi;
      worst = std::max(worst, (flat(xi) * xi - eye).norm());
    }
  }
  return {worst <= kSymplecticTol,
          "worst deviation " + fmt(worst) + " over 100 systems x 10 frequencies"};
}

void c45_minimality_agreement() {
  std::mt19937_64 rng(11004);
  const std::array<std::pair<Index, Index>, 4> sizes{{{1, 1}, {2, 1}, {2, 2}, {1, 2}}};
  int total = 0, agree = 0, cascade_agree = 0, verdict_true = 0;
  std::string first_error;
  for (int i = 0; i < 100; ++i) {
    const auto [n, m] = sizes[i % sizes.size()];
    const RandomSystem sys = draw(rng, n, m, true);
    const QlsParams padded = pad_with_passive_mode(sys.params);
    for (const QlsParams* p : {&sys.params, &padded}) {
      const StateSpace ss = build_state_space(*p);
      record_built(ss);
      const GlobalMinimalityReport gm = is_globally_minimal(ss);
      ++total;
      if (gm.by_covariance == gm.by_controllability && gm.by_covariance == gm.by_observability)
        ++agree;
      if (gm.verdict()) ++verdict_true;
      try {
        const CascadeMinimalityReport cm = cascade_minimality_check(ss);
        if (cm.cascade_minimal == gm.verdict()) ++cascade_agree;
      } catch (const std::exception& e) {
        if (first_error.empty()) first_error = e.what();
      }
    }
  }
  g_results[3] = {agree == total, std::to_string(agree) + "/" + std::to_string(total) +
                                      " consistent (" + std::to_string(verdict_true) +
                                      " globally minimal, " +
                                      std::to_string(total - verdict_true) + " not)"};
  std::string detail5 =
      std::to_string(cascade_agree) + "/" + std::to_string(total) + " matching verdicts";
  if (!first_error.empty()) detail5 += "; first error: " + first_error;
  g_results[4] = {cascade_agree == total, detail5};
}

// Similarity between a1 and a2 solved from scratch by pairing eigenvectors
// of equal eigenvalues. Valid for simple spectra only.
Mat similarity_by_eigensort(const Mat& a1, const Mat& a2) {
  const auto sorted_vectors = [](const Mat& a) {
    Eigen::ComplexEigenSolver<Mat> es(a);
    std::vector<Index> idx(a.rows());
    std::iota(idx.begin(), idx.end(), Index{0});
    std::sort(idx.begin(), idx.end(), [&](Index p, Index q) {
      const Cplx zp = es.eigenvalues()(p), zq = es.eigenvalues()(q);
      if (std::abs(zp.real() - zq.real()) > 1e-9) return zp.real() < zq.real();
      return zp.imag() < zq.imag();
    });
    Mat v(a.rows(), a.cols());
    for (Index k = 0; k < a.cols(); ++k) v.col(k) = es.eigenvectors().col(idx[k]);
    return v;
  };
  const Mat v1 = sorted_vectors(a1);
  const Mat v2 = sorted_vectors(a2);
  return v2 * v1.partialPivLu().inverse();
}

Outcome c6_lbt_similarity() {
  std::mt19937_64 rng(11006);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const RandomSystem sys = draw(rng, 1 + i % 2, 1 + (i / 2) % 2, false);
    const Mat a1 = build_cascade(sys.ss).a;
    const Index h = a1.rows() / 2;
    Mat t = Mat::Zero(2 * h, 2 * h);
    t.topLeftCorner(h, h) = Mat::Identity(h, h) + 0.3 * random_complex_matrix(rng, h, h);
    t.bottomRightCorner(h, h) = Mat::Identity(h, h) + 0.3 * random_complex_matrix(rng, h, h);
    t.bottomLeftCorner(h, h) = 0.5 * random_complex_matrix(rng, h, h);
    const Mat a2 = t * a1 * t.partialPivLu().inverse();
    if (!is_proper_lbt(a1, 1e-8) || !is_proper_lbt(a2, 1e-6))
      return {false, "constructed pair is not proper lower block triangular"};

    const Mat s = similarity_by_eigensort(a1, a2);
    if (rel_gap(a2 * s, s * a1) > 1e-8)
      return {false, "independently solved similarity does not relate the pair"};
    if (!check_lbt_similarity(a1, a2, s, kLbtTol))
      return {false, "solved similarity has a nonzero upper-right block"};
    worst = std::max(worst, lbt_upper_right_defect(s));
  }
  return {worst <= kLbtTol, "worst relative upper-right block " + fmt(worst) + " over 50 pairs"};
}

Outcome c7_round_trip() {
  std::mt19937_64 rng(11007);
  const std::array<std::pair<Index, Index>, 5> sizes{{{1, 1}, {2, 1}, {2, 2}, {3, 1}, {3, 2}}};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_transfer = 0.0, worst_witness = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto [n, m] = sizes[i % sizes.size()];
    const RandomSystem sys = draw(rng, n, m, true);
    const ModelIdentification mi =
        identify_from_model(sys.ss, GaussianInput::vacuum(m), tol::structure);
    const StateSpace& found = mi.result.system;
    g_worst_identified = std::max(g_worst_identified, mi.result.residuals.realizability);
    ++g_identified_count;

    const double scale = spectral_scale(sys.ss);
    for (int k = 0; k < 50; ++k) {
      const double w = 0.02 * scale * std::pow(2500.0, unit(rng));
      const Cplx s(0.0, -w);
      const Mat expected = transfer_at(sys.ss, s).xi;
      worst_transfer = std::max(
          worst_transfer, (transfer_at(found, s).xi - expected).norm() /
                              std::max(1.0, expected.norm()));
    }

    const std::optional<Mat> t = find_symplectic_between(sys.ss, found);
    if (!t) return {false, "no relating symplectic found on trial " + std::to_string(i)};
    if (!is_symplectic(*t, kWitnessTol))
      return {false, "relating transformation is not symplectic on trial " + std::to_string(i)};
    worst_witness = std::max(worst_witness,
                             rel_gap(found.a_full(), *t * sys.ss.a_full() * flat(*t)));
    worst_witness = std::max(worst_witness, rel_gap(found.c_full(), sys.ss.c_full() * flat(*t)));
  }
  const bool pass = worst_transfer <= kRoundTripTol && worst_witness <= kWitnessTol;
  return {pass, "worst held-out transfer gap " + fmt(worst_transfer) + ", worst witness residual " +
                    fmt(worst_witness) + " over 50 systems"};
}

Outcome c2_realizability() {
  if (g_identified_count == 0) return {false, "no identification outputs were recorded"};
  const bool pass = g_worst_built <= kBuiltRealizabilityTol &&
                    g_worst_identified <= kIdentifiedRealizabilityTol;
  return {pass, "built residual " + fmt(g_worst_built) + " over " +
                    std::to_string(g_built_count) + " systems; identified residual " +
                    fmt(g_worst_identified) + " over " + std::to_string(g_identified_count) +
                    " outputs"};
}

Outcome c3_conjugation_equivalence() {
  std::mt19937_64 rng(11003);
  const std::array<std::pair<Index, Index>, 4> sizes{{{1, 1}, {2, 1}, {2, 2}, {1, 2}}};
  double worst_transfer = 0.0, worst_witness = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto [n, m] = sizes[i % sizes.size()];
    RandomSystem sys = draw(rng, n, m, false);
    while (!is_minimal(sys.ss)) sys = draw(rng, n, m, false);
    const Mat t = random_symplectic(rng, n);
    const StateSpace conj =
        make_state_space(t * sys.ss.a_full() * flat(t), sys.ss.c_full() * flat(t), 1e-8);

    for (double w : probe_frequencies(spectral_scale(sys.ss), 10)) {
      const Cplx s(0.0, -w);
      const Mat expected = transfer_at(sys.ss, s).xi;
      worst_transfer = std::max(worst_transfer, (transfer_at(conj, s).xi - expected).norm() /
                                                   std::max(1.0, expected.norm()));
    }

    const QlsParams conj_params = params_from_state_space(conj);
    const StateSpace rebuilt = build_state_space(conj_params);
    const std::string pa = path_of("c3_a.json");
    const std::string pb = path_of("c3_b.json");
    write_file(pa, system_to_json(sys.params));
    write_file(pb, system_to_json(conj_params));
    const auto r = run_command(qlsid_binary() + " equiv " + pa + " " + pb);
    if (r.exit_code != 0) return {false, "equiv exited " + std::to_string(r.exit_code)};
    const json report = json::parse(r.out);
    if (!report["equivalent"].get<bool>())
      return {false, "equiv missed the conjugation on trial " + std::to_string(i)};
    const auto& tj = report["symplectic"];
    Mat found(2 * n, 2 * n);
    for (Index a = 0; a < 2 * n; ++a)
      for (Index b = 0; b < 2 * n; ++b)
        found(a, b) = Cplx(tj[a][b][0].get<double>(), tj[a][b][1].get<double>());
    if (!is_symplectic(found, kWitnessTol))
      return {false, "returned witness is not symplectic on trial " + std::to_string(i)};
    worst_witness = std::max(worst_witness,
                             rel_gap(rebuilt.a_full(), found * sys.ss.a_full() * flat(found)));
    worst_witness =
        std::max(worst_witness, rel_gap(rebuilt.c_full(), sys.ss.c_full() * flat(found)));
  }
  const bool pass = worst_transfer <= kConjugationTol && worst_witness <= kWitnessTol;
  return {pass, "worst transfer gap " + fmt(worst_transfer) + ", worst witness residual " +
                    fmt(worst_witness) + " over 100 conjugations"};
}

Outcome c8_gilbert() {
  std::mt19937_64 rng(11008);
  const std::array<std::pair<Index, Index>, 3> sizes{{{1, 1}, {2, 1}, {2, 2}}};
  double worst_transfer = 0.0, worst_structure = 0.0;
  for (int i = 0; i < 9; ++i) {
    const auto [n, m] = sizes[i % sizes.size()];
    const RandomSystem sys = draw(rng, n, m, true);
    const GilbertRealization g = gilbert_realization(build_cascade(sys.ss));
    const StateSpaceRealization r = g.realization();
    const Mat j = j_matrix(m);
    const Mat v = vacuum_covariance(m);
    for (double w : probe_frequencies(spectral_scale(sys.ss), 50)) {
      const Cplx s(0.0, -w);
      const Mat expected = spectrum_at(sys.ss, v, s).psi * j;
      worst_transfer = std::max(worst_transfer, (r.transfer_at(s) - expected).norm() /
                                                    std::max(1.0, expected.norm()));
    }
    if (!is_doubled_up(g.b1(), kGilbertTol) || !is_doubled_up(g.c2(), kGilbertTol))
      worst_structure = 1.0;
  }

  bool rejected = false;
  try {
    const StateSpace real_poles =
        build_state_space(qlstest::driven_cavity_params(0.0, 0.2));
    gilbert_realization(build_cascade(real_poles));
  } catch (const GenericityError&) {
    rejected = true;
  }
  const bool pass = worst_transfer <= kGilbertTol && worst_structure == 0.0 && rejected;
  return {pass, "worst spectrum gap " + fmt(worst_transfer) + " over 9 systems x 50 probes; " +
                    std::string(rejected ? "real poles rejected" : "real poles NOT rejected")};
}

Outcome c9_vacuum_passive() {
  std::mt19937_64 rng(11009);
  std::vector<QlsParams> ensemble;
  ensemble.push_back(qlstest::cavity_params());
  const std::array<Index, 5> dims{1, 1, 2, 2, 2};
  for (Index n : dims) {
    for (;;) {
      const Mat h = random_complex_matrix(rng, n, n);
      const Mat omega = ((h + h.adjoint()) / 2.0).eval();
      const Mat c = Mat::Identity(n, n) + 0.5 * random_complex_matrix(rng, n, n);
      const QlsParams p(omega, Mat::Zero(n, n), c, Mat::Zero(n, n));
      if (is_hurwitz(build_state_space(p))) {
        ensemble.push_back(p);
        break;
      }
    }
  }

  double worst_flat = 0.0;
  int identify_ok = 0;
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    const QlsParams& p = ensemble[k];
    if (!is_passive(p)) return {false, "ensemble member is not passive"};
    const StateSpace ss = build_state_space(p);
    record_built(ss);
    const Index m = p.channels();
    const Mat v = vacuum_covariance(m);
    for (double w : probe_frequencies(spectral_scale(ss), 10))
      worst_flat = std::max(worst_flat, (spectrum_at(ss, v, Cplx(0.0, -w)).psi - v).norm());
    if (is_globally_minimal(ss).verdict())
      return {false, "passive system was classified globally minimal"};

    const std::string path = path_of("c9_sys.json");
    write_file(path, system_to_json(p));
    const auto r = run_command(qlsid_binary() + " identify " + path + " -o /dev/null");
    if (r.exit_code == 3) ++identify_ok;
  }
  const bool pass = worst_flat <= kVacuumTol && identify_ok == 6;
  return {pass, "worst spectrum deviation " + fmt(worst_flat) + "; identify exit 3 on " +
                    std::to_string(identify_ok) + "/6 systems"};
}

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> omegas(points);
  for (int i = 0; i < points; ++i)
    omegas[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
  return omegas;
}

Outcome c10_estimation() {
  const std::array<std::pair<Index, Index>, 6> sizes{
      {{1, 1}, {1, 1}, {1, 2}, {2, 1}, {2, 2}, {2, 2}}};
  const std::array<std::uint64_t, 6> system_seeds{2101, 2102, 2121, 2140, 2160, 2162};
  const std::array<std::uint64_t, 6> noise_seeds{502101, 502102, 502121, 502140, 502160, 502162};
  const std::vector<double> omegas = log_grid(0.05, 20.0, 41);

  double worst_pole = 0.0, worst_ratio = 0.0;
  for (int i = 0; i < 6; ++i) {
    const auto [n, m] = sizes[i];
    std::mt19937_64 rng(system_seeds[i]);
    const RandomSystem sys = draw(rng, n, m, true, 0.05);
    const GaussianInput vac = GaussianInput::vacuum(m);
    const Index full = 4 * n;

    const SpectrumDataset exact = exact_dataset(sys.ss, vac, omegas);
    const LoewnerFit exact_fit = fit_realization(exact);
    if (exact_fit.detected_order != full)
      return {false, "exact fit detected order " + std::to_string(exact_fit.detected_order) +
                         " instead of " + std::to_string(full) + " on system " +
                         std::to_string(i)};
    const Eigen::VectorXcd cascade_eigs = build_cascade(sys.ss).a.eigenvalues();
    for (Cplx pole : exact_fit.poles) {
      double best = 1e300;
      for (Index k = 0; k < cascade_eigs.size(); ++k)
        best = std::min(best, std::abs(pole - cascade_eigs(k)) /
                                  std::max(1.0, std::abs(cascade_eigs(k))));
      worst_pole = std::max(worst_pole, best);
    }

    const SpectrumDataset noisy = synthesize_dataset(sys.ss, vac, omegas, kShots, noise_seeds[i]);
    const Mat j = j_matrix(m);
    const Mat d = vacuum_covariance(m);
    double floor_val = 0.0;
    for (std::size_t k = 0; k < omegas.size(); ++k) {
      const Mat fe = exact.samples[k] * j - d;
      floor_val = std::max(floor_val, ((noisy.samples[k] * j - d) - fe).norm() /
                                          std::max(1.0, fe.norm()));
    }
    const LoewnerFit noisy_fit = fit_realization(noisy);
    if (noisy_fit.detected_order != full)
      return {false, "noisy fit detected order " + std::to_string(noisy_fit.detected_order) +
                         " instead of " + std::to_string(full) + " on system " +
                         std::to_string(i)};
    const StateSpaceRealization& r = noisy_fit.realization;
    double err = 0.0;
    for (std::size_t k = 0; k < omegas.size(); ++k) {
      const Mat fe = exact.samples[k] * j - d;
      const Mat fh =
          r.c *
          (Cplx(0.0, -omegas[k]) * Mat::Identity(r.order(), r.order()) - r.a)
              .partialPivLu()
              .solve(r.b);
      err = std::max(err, (fh - fe).norm() / std::max(1.0, fe.norm()));
    }
    worst_ratio = std::max(worst_ratio, err / floor_val);
  }
  const bool pass = worst_pole <= kPoleTol && worst_ratio <= kNoiseFactor;
  return {pass, "worst pole gap " + fmt(worst_pole) + ", worst fit/floor ratio " +
                    fmt(worst_ratio) + " over 6 systems"};
}

template <typename F>
void run(int number, F&& f) {
  try {
    g_results[number - 1] = f();
  } catch (const std::exception& e) {
    g_results[number - 1] = {false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

int main() {
  run(1, c1_transfer_symplectic);
  try {
    c45_minimality_agreement();
  } catch (const std::exception& e) {
    g_results[3] = g_results[4] = {false, std::string("exception: ") + e.what()};
  }
  run(6, c6_lbt_similarity);
  run(7, c7_round_trip);
  run(2, c2_realizability);
  run(3, c3_conjugation_equivalence);
  run(8, c8_gilbert);
  run(9, c9_vacuum_passive);
  run(10, c10_estimation);

  int failures = 0;
  for (int i = 0; i < 10; ++i) {
    const Outcome& o = g_results[i];
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << (i + 1) << " " << g_labels[i] << " ("
              << o.detail << ")\n";
  }
  std::cout << (10 - failures) << "/10 criteria passed\n";
  return failures;
}
