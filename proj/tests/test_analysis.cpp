#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ehtk/analysis.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <numbers>

using namespace ehtk;

namespace {

Sites range(int a, int b) {
  Sites s;
  for (int i = a; i < b; ++i) s.push_back(i);
  return s;
}

CMatrix random_density(int n, std::uint64_t seed, int rank = 0) {
  auto rng = make_stream(seed, {});
  const auto d = static_cast<Eigen::Index>(dim_of(n));
  const Eigen::Index r = rank > 0 ? rank : d;
  CMatrix a(d, r);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < r; ++j) a(i, j) = cplx(uniform01(rng) - 0.5, uniform01(rng) - 0.5);
  CMatrix m = a * a.adjoint();
  return m / m.trace();
}

ProbabilityTable exact_table(const CMatrix& rho, int n) {
  return exact_probabilities(DensityMatrix{range(0, n), rho}, window_settings(n, n));
}

}  // namespace

TEST_CASE("von Neumann entropy") {
  CVector psi = CVector::Random(8);
  psi.normalize();
  CHECK(std::abs(vn_entropy(CMatrix(psi * psi.adjoint()))) < 1e-12);
  CHECK(vn_entropy(DensityMatrix::maximally_mixed(range(0, 3))) == doctest::Approx(3 * std::log(2.0)).epsilon(1e-14));

  // Schmidt coefficients of the ground state across the cut 3|7 (window 3..6 is bulk; use a half-chain cut).
  const PureState gs = ground_state(build_xxz(10, 1, 1)).state;
  const Eigen::Map<const CMatrix> m(gs.amplitudes().data(), 64, 16);  // column-major: rows = last 6 sites
  Eigen::JacobiSVD<CMatrix> svd(m);
  double oracle = 0;
  for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) {
    const double p = svd.singularValues()(k) * svd.singularValues()(k);
    if (p > 1e-14) oracle -= p * std::log(p);
  }
  CHECK(vn_entropy(reduced_density_matrix(gs, range(0, 4))) == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("entropy from the entanglement Hamiltonian") {
  CHECK(entropy_from_eh(gibbs_state(CMatrix::Zero(8, 8), range(0, 3))) == doctest::Approx(3 * std::log(2.0)));
  auto rng = make_stream(3, {});
  for (int t = 0; t < 10; ++t) {
    const auto a = EHAnsatz::local_links(range(0, 4), 0.5 + uniform01(rng));
    RVector x(3);
    for (int k = 0; k < 3; ++k) x(k) = 4 * uniform01(rng) - 1;
    const GibbsState g = gibbs_state(build_eh(a, x), range(0, 4));
    CHECK(std::abs(entropy_from_eh(g) - vn_entropy(g.rho)) < 1e-10);
  }
}

TEST_CASE("mutual information") {
  const CMatrix ra = random_density(1, 1), rb = random_density(2, 2);
  const CMatrix prod = Eigen::kroneckerProduct(ra, rb);
  CHECK(std::abs(mutual_information({range(0, 3), prod}, {{0}, ra}, {{1, 2}, rb})) < 1e-12);

  CVector bell = CVector::Zero(4);
  bell(0) = bell(3) = std::sqrt(0.5);
  const DensityMatrix rab = DensityMatrix::from_pure(PureState(2, bell));
  const PureState ps(2, bell);
  CHECK(mutual_information(rab, reduced_density_matrix(ps, {0}), reduced_density_matrix(ps, {1})) ==
        doctest::Approx(2 * std::log(2.0)));
}

TEST_CASE("Uhlmann fidelity") {
  CVector a = CVector::Random(4), b = CVector::Random(4);
  a.normalize();
  b.normalize();
  const double overlap = std::norm(a.dot(b));
  CHECK(uhlmann_fidelity(CMatrix(a * a.adjoint()), CMatrix(b * b.adjoint())) == doctest::Approx(overlap).epsilon(1e-8));
  const CMatrix r1 = random_density(3, 4), r2 = random_density(3, 5);
  CHECK(uhlmann_fidelity(r1, r1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(uhlmann_fidelity(r1, r2) == doctest::Approx(uhlmann_fidelity(r2, r1)).epsilon(1e-10));

  // Oracle: sum of square roots of the eigenvalues of sqrt(r1) r2 sqrt(r1), with
  // sqrt(r1) = V diag(sqrt(l)) V^dagger.
  Eigen::SelfAdjointEigenSolver<CMatrix> e1(r1);
  const CMatrix s1 = e1.eigenvectors() * e1.eigenvalues().cwiseMax(0).cwiseSqrt().asDiagonal() * e1.eigenvectors().adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> e2(s1 * r2 * s1);
  const double root = e2.eigenvalues().cwiseMax(0).cwiseSqrt().sum();
  CHECK(uhlmann_fidelity(r1, r2) == doctest::Approx(root * root).epsilon(1e-10));
  CHECK(uhlmann_fidelity(r1, r2) < 1.0);
}

TEST_CASE("Hamming overlap estimator") {
  const CMatrix basis = [] {
    CMatrix m = CMatrix::Zero(8, 8);
    m(5, 5) = 1;
    return m;
  }();
  CHECK(hs_overlap_from_samples(exact_table(basis, 3), exact_table(basis, 3)) == doctest::Approx(1.0).epsilon(1e-14));

  const CMatrix r = random_density(2, 6);
  CHECK(hs_overlap_from_samples(exact_table(r, 2), exact_table(CMatrix::Identity(4, 4) / 4.0, 2)) ==
        doctest::Approx(0.25).epsilon(1e-14));

  for (int n = 1; n <= 5; ++n) {
    const CMatrix a = random_density(n, 10 + n, 1), b = random_density(n, 20 + n);
    const double dense = (a * b).trace().real();
    CHECK(std::abs(hs_overlap_from_samples(exact_table(a, n), exact_table(b, n)) - dense) < 1e-10);
  }

  // Finite shots: the error shrinks with the number of shots.
  const int n = 3;
  const CMatrix rho = random_density(n, 40, 1);
  const auto exact = exact_table(rho, n);
  const double purity = (rho * rho).trace().real();
  std::vector<double> errs;
  for (long long shots : {100, 1000, 10000}) {
    double acc = 0;
    for (int rep = 0; rep < 32; ++rep) {
      const auto d = sample_dataset(DensityMatrix{range(0, n), rho}, window_settings(n, n), shots, std::nullopt,
                                    static_cast<std::uint64_t>(100 * rep + shots), "r");
      const double est = hs_overlap_from_samples(empirical_probabilities(d, range(0, n)), exact);
      acc += (est - purity) * (est - purity);
    }
    errs.push_back(std::sqrt(acc / 32));
  }
  CHECK(errs[1] < errs[0] / 2);
  CHECK(errs[2] < errs[1] / 2);
  CHECK(errs[2] < 0.02);

  auto short_table = exact_table(rho, n);
  short_table.axes.pop_back();
  short_table.probs.pop_back();
  CHECK_THROWS_AS(hs_overlap_from_samples(exact, short_table), ValidationError);
}

TEST_CASE("Hilbert-Schmidt fidelities") {
  const HsFidelities same = hs_fidelities(0.3, 0.3, 0.3);
  CHECK(same.f_max == doctest::Approx(1.0));
  CHECK(same.f_mean == doctest::Approx(1.0));
  const HsFidelities pm = hs_fidelities(1.0, 0.5, 0.5);
  CHECK(pm.f_max == doctest::Approx(0.5));
  CHECK(pm.f_mean == doctest::Approx(1 / std::sqrt(2.0)));
  for (int t = 0; t < 100; ++t) {
    const CMatrix a = random_density(2, 200 + t, 1 + t % 4), b = random_density(2, 400 + t, 1 + (t / 4) % 4);
    const HsFidelities f = hs_fidelities((a * a).trace().real(), (b * b).trace().real(), (a * b).trace().real());
    CHECK(f.f_mean >= f.f_max - 1e-15);
  }
  CHECK_THROWS_AS(hs_fidelities(0.0, 0.5, 0.1), ValidationError);
}

TEST_CASE("windowed fidelity") {
  const PureState gs = ground_state(build_xxz(8, 1, 1)).state;
  const Sites g = range(2, 6);
  const auto a = EHAnsatz::local_links(g, 1.0);
  const auto settings = window_settings(8, 4);
  const auto fit_data = sample_dataset(gs, range(0, 8), settings, 400, std::nullopt, 1, "fit");
  const auto holdout = sample_dataset(gs, range(0, 8), settings, 4000, std::nullopt, 2, "holdout");
  const FitResult fit = fit_eh(fit_data, a, {});
  const GibbsState s = fitted_state(a, fit);

  CHECK_THROWS_AS(windowed_fidelity(s, fit_data, 4, fit_data.tag()), ValidationError);

  const WindowedFidelity w3 = windowed_fidelity(s, holdout, 3, fit_data.tag());
  CHECK(w3.windows.size() == 2);
  CHECK(w3.windows[0].window_start == 2);
  CHECK(w3.f_mean > 0.8);
  for (const auto& w : w3.windows) {
    CHECK(w.err > 0);
    CHECK(w.f_mean >= w.f_max - 1e-12);
  }

  // One window over the whole subsystem reduces to hs_fidelities of the split estimator.
  const WindowedFidelity w4 = windowed_fidelity(s, holdout, 4);
  REQUIRE(w4.windows.size() == 1);
  const auto [h0, h1] = split_dataset(holdout, holdout.seed ^ 0x5eedf00dULL);
  const double t11 = hs_overlap_from_samples(empirical_probabilities(h0, g), empirical_probabilities(h1, g));
  const auto p = empirical_probabilities(holdout, g);
  const double t12 = hs_overlap_from_samples(p, exact_probabilities(s.rho, p.axes));
  const HsFidelities f = hs_fidelities(t11, (s.rho.matrix * s.rho.matrix).trace().real(), t12);
  CHECK(w4.f_mean == doctest::Approx(f.f_mean).epsilon(1e-12));
  CHECK(w4.f_max == doctest::Approx(f.f_max).epsilon(1e-12));

  // Data from a different state verifies worse.
  const PureState other = neel_state(8);
  const auto wrong = sample_dataset(other, range(0, 8), settings, 4000, std::nullopt, 3, "other");
  CHECK(windowed_fidelity(s, wrong, 3).f_mean < w3.f_mean);
}

TEST_CASE("reference profiles") {
  const ProfileGeometry ball{2.0, 0, 1};
  CHECK(profile_value(ProfileKind::CftBall, ball, 0.0) == doctest::Approx(std::numbers::pi * 2.0));
  CHECK(profile_value(ProfileKind::CftBall, ball, 2.0) == 0.0);
  CHECK(profile_value(ProfileKind::CftBall, ball, -1.3) >= 0.0);
  CHECK(profile_value(ProfileKind::BwHalfSpace, ball, 0.0) == 0.0);
  CHECK(profile_value(ProfileKind::BwHalfSpace, ball, 0.5) == doctest::Approx(std::numbers::pi));

  // Bilocal weight vanishes for widely separated intervals of fixed width.
  const double r = 0.5;
  double prev = 1e300;
  for (double a : {1.0, 10.0, 1e3, 1e6}) {
    const ProfileGeometry g{1, a, a + 2 * r};
    const double v = profile_value(ProfileKind::DiracBilocal, g, a + r);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < 1e-6);

  const ProfileGeometry g12{1, 1, 2};
  double best = -1, arg = 0;
  for (int i = 1; i < 200000; ++i) {
    const double x = 1 + i / 200000.0;
    const double v = profile_value(ProfileKind::DiracLocal, g12, x);
    if (v > best) best = v, arg = x;
  }
  CHECK(dirac_local_peak(g12) == doctest::Approx(arg).epsilon(1e-4));
  CHECK(profile_value(ProfileKind::DiracLocal, g12, -1.5) == profile_value(ProfileKind::DiracLocal, g12, 1.5));
  CHECK_THROWS_AS(profile_value(ProfileKind::DiracLocal, {1, 2, 1}, 1.5), ValidationError);

  CHECK(lattice_cft_profile(6) == std::vector<double>{5, 8, 9, 8, 5});
  CHECK(lattice_bw_profile(3) == std::vector<double>{1, 2, 3});
  const auto prof = reference_profile(ProfileKind::CftBall, ball, {0.0, 1.0});
  CHECK(prof.values.size() == 2);
  CHECK(profile_kind_from_string(to_string(ProfileKind::DiracBilocal)) == ProfileKind::DiracBilocal);
}

TEST_CASE("quadratic fits") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double v : x) y.push_back(2 - 3 * v + 0.5 * v * v);
  const QuadraticFit q = fit_quadratic(x, y);
  CHECK(q.c0 == doctest::Approx(2));
  CHECK(q.c1 == doctest::Approx(-3));
  CHECK(q.c2 == doctest::Approx(0.5));
  CHECK(q.r_squared == doctest::Approx(1.0));
  const auto ref = lattice_cft_profile(6);
  std::vector<double> scaled;
  for (double v : ref) scaled.push_back(0.3 * v);
  CHECK(scaled_match_r2(scaled, ref) == doctest::Approx(1.0));
}

TEST_CASE("entropy scaling classification") {
  std::vector<ScalingPoint> flat, mixed;
  for (int l = 2; l <= 6; ++l) {
    flat.push_back({l, 0.0});
    mixed.push_back({l, l * std::log(2.0)});
  }
  const auto a = entropy_scaling(flat);
  CHECK(a.slope == 0.0);
  CHECK(a.classification == "area-like");
  const auto v = entropy_scaling(mixed);
  CHECK(v.slope == doctest::Approx(std::log(2.0)));
  CHECK(v.classification == "volume-like");
  CHECK(entropy_scaling({{2, 0}, {3, 0.2}, {4, 0.4}}).classification == "intermediate");
  CHECK_THROWS_AS(entropy_scaling({{2, 0}, {3, 0}}), ValidationError);
}

TEST_CASE("Schmidt vector energy profiles") {
  const SpinModel model = build_xxz(12, 1, 1);
  const PureState product = neel_state(12);
  const auto p = schmidt_energy_profile(model, product, range(3, 9), 1);
  for (double d : p.differences[0]) CHECK(d == 0.0);

  const PureState gs = ground_state(model).state;
  const Sites sub = range(3, 9);
  const auto s = schmidt_energy_profile(model, gs, sub, 3);
  REQUIRE(s.links.size() == 5);
  for (const auto& diff : s.differences) {
    const auto at = std::max_element(diff.begin(), diff.end()) - diff.begin();
    CHECK((at == 0 || at == 4));
  }
  // Spectral resolution over all Schmidt vectors.
  const auto all = schmidt_energy_profile(model, gs, sub, 64);
  for (std::size_t j = 0; j < all.links.size(); ++j) {
    double acc = 0;
    for (std::size_t k = 0; k < all.weights.size(); ++k) acc += all.weights[k] * all.vectors[k][j];
    CHECK(acc == doctest::Approx(all.global[j]).epsilon(1e-10));
  }
}
