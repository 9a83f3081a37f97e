#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ehtk/measurement.hpp"
#include "ehtk/noise.hpp"
#include "ehtk/pauli.hpp"

#include <cmath>

using namespace ehtk;

namespace {

CMatrix random_density(int n, std::uint64_t seed) {
  auto rng = make_stream(seed, {});
  const auto d = static_cast<Eigen::Index>(dim_of(n));
  CMatrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = cplx(uniform01(rng) - 0.5, uniform01(rng) - 0.5);
  CMatrix r = a * a.adjoint();
  return r / r.trace();
}

// Direct sum over all 5^n products of single-site Kraus operators.
CMatrix kraus_oracle(const CMatrix& rho, int n, const NoiseParams& p) {
  const auto k = kraus_operators(p);
  CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
  int total = 1;
  for (int i = 0; i < n; ++i) total *= 5;
  for (int c = 0; c < total; ++c) {
    CMatrix e = CMatrix::Identity(1, 1);
    int rest = c;
    for (int i = 0; i < n; ++i) {
      const CMatrix ki = k[static_cast<std::size_t>(rest % 5)];
      rest /= 5;
      CMatrix next(e.rows() * 2, e.cols() * 2);
      for (Eigen::Index a = 0; a < e.rows(); ++a)
        for (Eigen::Index b = 0; b < e.cols(); ++b) next.block(2 * a, 2 * b, 2, 2) = e(a, b) * ki;
      e = next;
    }
    out += e * rho * e.adjoint();
  }
  return out;
}

}  // namespace

TEST_CASE("Kraus completeness over the valid region") {
  auto rng = make_stream(5, {});
  for (int t = 0; t < 100; ++t) {
    const double p2 = uniform01(rng);
    const double p1 = uniform01(rng) * (1 - p2) * 4.0 / 3.0;
    const auto k = kraus_operators({p1, p2});
    Mat2 sum = Mat2::Zero();
    for (const auto& e : k) sum += e.adjoint() * e;
    CHECK((sum - Mat2::Identity()).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("channel limits") {
  const CMatrix rho = random_density(3, 1);
  CHECK((apply_channel(rho, 3, {0, 0}) - rho).norm() == 0.0);
  DensityMatrix up{{0}, CMatrix::Zero(2, 2)};
  up.matrix(1, 1) = 1;
  const DensityMatrix out = apply_channel(up, {0, 1});
  CHECK(std::abs(out.matrix(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(out.matrix(1, 1)) < 1e-15);
  CHECK_THROWS_AS(apply_channel(up, {1.0, 0.5}), ValidationError);
  CHECK_THROWS_AS(apply_channel(up, {-0.1, 0.0}), ValidationError);
}

TEST_CASE("channel matches the Kraus-sum oracle") {
  const CMatrix rho = random_density(3, 2);
  const NoiseParams p{0.05, 0.02};
  const CMatrix out = apply_channel(rho, 3, p);
  CHECK((out - kraus_oracle(rho, 3, p)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(out.trace() - 1.0) < 1e-14);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(out);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("adjoint channel and Pauli transfer matrix") {
  const NoiseParams p{0.07, 0.04};
  const CMatrix rho = random_density(2, 3);
  const CMatrix w = random_density(2, 4) - random_density(2, 5);
  const cplx lhs = (w * apply_channel(rho, 2, p)).trace();
  const cplx rhs = (adjoint_channel(w, 2, p) * rho).trace();
  CHECK(std::abs(lhs - rhs) < 1e-14);

  RVector c = pauli_expectations(rho, 2);
  apply_pauli_site_map(c, 2, pauli_transfer_matrix(p));
  CHECK((c - pauli_expectations(apply_channel(rho, 2, p), 2)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("site maps commute") {
  const CMatrix rho = random_density(2, 6);
  const auto k = kraus_operators({0.1, 0.2});
  auto on_site = [&](CMatrix r, int site) {
    CMatrix out = CMatrix::Zero(4, 4);
    for (const auto& e : k) {
      CMatrix t = r;
      apply_site_left(t, 2, site, e);
      apply_site_right_adjoint(t, 2, site, e);
      out += t;
    }
    return out;
  };
  CHECK((on_site(on_site(rho, 0), 1) - on_site(on_site(rho, 1), 0)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("magnetization moments against Monte Carlo") {
  const NoiseParams p{0.04, 0.03};
  const auto [qu, qd] = flip_probabilities(p);
  auto rng = make_stream(17, {});
  const int n_up = 4, n_down = 6, trials = 200000;
  double s1 = 0, s2 = 0;
  for (int t = 0; t < trials; ++t) {
    int ups = 0;
    for (int i = 0; i < n_up; ++i) ups += uniform01(rng) >= qu;
    for (int i = 0; i < n_down; ++i) ups += uniform01(rng) < qd;
    s1 += ups;
    s2 += ups * ups;
  }
  const double mean = s1 / trials, var = s2 / trials - mean * mean;
  const auto [m, v] = up_count_moments(p, n_up, n_down);
  CHECK(std::abs(mean - m) < 5 * std::sqrt(v / trials));
  CHECK(std::abs(var - v) < 0.01);

  // The flip probabilities follow from the Kraus operators directly.
  DensityMatrix up{{0}, CMatrix::Zero(2, 2)}, down{{0}, CMatrix::Zero(2, 2)};
  up.matrix(1, 1) = 1;
  down.matrix(0, 0) = 1;
  CHECK(apply_channel(up, p).matrix(0, 0).real() == doctest::Approx(qu).epsilon(1e-14));
  CHECK(apply_channel(down, p).matrix(1, 1).real() == doctest::Approx(qd).epsilon(1e-14));
}

TEST_CASE("calibration") {
  const PureState neel = neel_state(8);
  const Sites reg{0, 1, 2, 3, 4, 5, 6, 7};
  const MeasurementDataset clean = sample_dataset(neel, reg, {"ZZZZZZZZ"}, 20000, std::nullopt, 3, "neel");
  const NoiseParams zero = calibrate_noise(clean, 0);
  CHECK(zero.p1 == doctest::Approx(0.0));
  CHECK(zero.p2 == doctest::Approx(0.0));

  const NoiseParams planted{0.04, 0.03};
  const MeasurementDataset noisy = sample_dataset(neel, reg, {"ZZZZZZZZ"}, 100000, planted, 4, "neel");
  const NoiseParams got = calibrate_noise(noisy, 0);
  CHECK(std::abs(got.p1 - planted.p1) <= 0.005);
  CHECK(std::abs(got.p2 - planted.p2) <= 0.005);

  CHECK_THROWS_AS(calibrate_noise(noisy, 8), ValidationError);
}
