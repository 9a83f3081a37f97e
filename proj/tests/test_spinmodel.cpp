#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ehtk/spinmodel.hpp"

#include <cmath>
#include <numbers>
#include <unsupported/Eigen/KroneckerProduct>

using namespace ehtk;

namespace {

// Brute-force Kronecker embedding used as an independent oracle.
CMatrix kron_chain(const std::vector<Mat2>& ops) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (const auto& o : ops) out = Eigen::kroneckerProduct(out, CMatrix(o)).eval();
  return out;
}

CMatrix two_site(int n, int i, int j, const Mat2& a, const Mat2& b) {
  std::vector<Mat2> ops(static_cast<std::size_t>(n), Mat2::Identity());
  ops[static_cast<std::size_t>(i)] = a;
  ops[static_cast<std::size_t>(j)] = b;
  return kron_chain(ops);
}

CMatrix xxz_oracle(int n, double j, double delta) {
  const auto d = static_cast<Eigen::Index>(dim_of(n));
  CMatrix h = CMatrix::Zero(d, d);
  for (int i = 0; i + 1 < n; ++i) {
    h += 0.5 * j * (two_site(n, i, i + 1, op::splus(), op::sminus()) + two_site(n, i, i + 1, op::sminus(), op::splus()));
    h += j * delta * two_site(n, i, i + 1, op::sz(), op::sz());
  }
  return h;
}

RVector spectrum(const CMatrix& h) { return Eigen::SelfAdjointEigenSolver<CMatrix>(h).eigenvalues(); }

}  // namespace

TEST_CASE("two-site Heisenberg spectrum") {
  const SpinModel m = build_xxz(2, 1, 1);
  const RVector e = spectrum(m.hamiltonian());
  CHECK(e(0) == doctest::Approx(-0.75).epsilon(1e-14));
  for (int k = 1; k < 4; ++k) CHECK(e(k) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("Hamiltonian matches the Kronecker oracle and its links") {
  for (int n : {3, 4, 5}) {
    const SpinModel m = build_xxz(n, 1.3, 0.7);
    const CMatrix h = m.hamiltonian();
    CHECK((h - xxz_oracle(n, 1.3, 0.7)).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE(m.links().size() == static_cast<std::size_t>(n - 1));
    CMatrix sum = CMatrix::Zero(h.rows(), h.cols());
    for (const auto& l : m.links()) {
      CHECK(l.site_pair.second == l.site_pair.first + 1);
      CHECK(hermiticity_defect(l.matrix) < 1e-15);
      add_embedded(sum, n, {l.site_pair.first, l.site_pair.second}, l.matrix);
    }
    CHECK((sum - h).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("three-site ground energy from dense diagonalization") {
  // Dense 8x8 oracle: the open 3-site Heisenberg chain has E0 = -1.
  CHECK(spectrum(xxz_oracle(3, 1, 1))(0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(spectrum(build_xxz(3, 1, 1).hamiltonian())(0) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("XX chain ground energy matches free fermions") {
  // Jordan-Wigner: single-particle energies J cos(k pi/(n+1)), k = 1..n.
  const int n = 4;
  double e0 = 0;
  for (int k = 1; k <= n; ++k) e0 += std::min(0.0, std::cos(k * std::numbers::pi / (n + 1)));
  CHECK(spectrum(build_xxz(n, 1, 0).hamiltonian())(0) == doctest::Approx(e0).epsilon(1e-12));
}

TEST_CASE("symmetries: magnetization and global spin flip") {
  const int n = 6;
  const CMatrix h = build_xxz(n, 1, 1.7).hamiltonian();
  const auto d = h.rows();
  CMatrix mz = CMatrix::Zero(d, d), flip = CMatrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (int s = 0; s < n; ++s) mz(i, i) += bit_at(static_cast<std::uint64_t>(i), n, s) ? 0.5 : -0.5;
    flip(d - 1 - i, i) = 1;
  }
  CHECK((h * mz - mz * h).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((h * flip - flip * h).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sector Hamiltonians reproduce the full spectrum") {
  const int n = 6;
  const SpinModel m = build_xxz(n, 1, 0.4);
  std::vector<double> all;
  for (int u = 0; u <= n; ++u) {
    const RSparse hs = m.sector_hamiltonian(u);
    const RVector e = Eigen::SelfAdjointEigenSolver<RMatrix>(RMatrix(hs)).eigenvalues();
    all.insert(all.end(), e.data(), e.data() + e.size());
  }
  std::sort(all.begin(), all.end());
  const RVector ref = spectrum(m.hamiltonian());
  for (std::size_t k = 0; k < all.size(); ++k) CHECK(all[k] == doctest::Approx(ref(static_cast<Eigen::Index>(k))).epsilon(1e-12));
}

TEST_CASE("matrix-free apply and link energies") {
  const int n = 5;
  const SpinModel m = build_xxz(n, 1, 1.2);
  CVector psi = CVector::Random(static_cast<Eigen::Index>(dim_of(n)));
  psi.normalize();
  CHECK((m.apply(psi) - m.hamiltonian() * psi).norm() < 1e-12);
  const auto le = m.link_energies(psi);
  double total = 0;
  for (double e : le) total += e;
  CHECK(total == doctest::Approx(psi.dot(m.hamiltonian() * psi).real()).epsilon(1e-12));
}

TEST_CASE("invalid sizes are rejected") {
  CHECK_THROWS_AS(build_xxz(1, 1, 1), ValidationError);
  CHECK_THROWS_AS(power_law_couplings(1, 1, 1), ValidationError);
  CHECK_THROWS_AS(power_law_couplings(3, -1, 1), ValidationError);
  CHECK_THROWS_AS(up_count_for(4, 1), ValidationError);
}

TEST_CASE("power-law couplings") {
  const CouplingMatrix c = power_law_couplings(3, 1, 0.82);
  CHECK(c.values(0, 2) / c.values(0, 1) == doctest::Approx(std::pow(2.0, -0.82)).epsilon(1e-14));
  CHECK(c.values(0, 2) / c.values(0, 1) == doctest::Approx(0.5664).epsilon(1e-4));
  const CouplingMatrix u = power_law_couplings(6, 2.5, 0);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      CHECK(u.values(i, j) == (i == j ? 0.0 : 2.5));
      CHECK(u.values(i, j) == u.values(j, i));
    }
  const CouplingMatrix big = power_law_couplings(51, 1, 0.82);
  for (int i = 0; i < 51; ++i)
    for (int j = i + 1; j < 51; ++j) {
      const double r = big.values(i, j) * std::pow(j - i, 0.82);
      CHECK(r >= 0.999);
      CHECK(r <= 1.001);
    }
}

TEST_CASE("assemble_operator") {
  const SpinModel m2 = build_xxz(2, 1, 1);
  std::vector<OperatorTerm> one{{1.0, {0, 1}, m2.links()[0].matrix}};
  CHECK((assemble_operator(2, one) - CMatrix(m2.links()[0].matrix)).cwiseAbs().maxCoeff() < 1e-15);

  const SpinModel m4 = build_xxz(4, 1, 1);
  std::vector<OperatorTerm> all;
  for (const auto& l : m4.links()) all.push_back({1.0, {l.site_pair.first, l.site_pair.second}, l.matrix});
  CHECK((assemble_operator(4, all) - m4.hamiltonian()).cwiseAbs().maxCoeff() < 1e-12);

  const SpinModel m3 = build_xxz(3, 1, 1);
  std::vector<OperatorTerm> beta{{2.0, {0, 1}, m3.links()[0].matrix}, {3.0, {1, 2}, m3.links()[1].matrix}};
  const CMatrix h1 = 0.5 * (two_site(3, 0, 1, op::splus(), op::sminus()) + two_site(3, 0, 1, op::sminus(), op::splus())) +
                     two_site(3, 0, 1, op::sz(), op::sz());
  const CMatrix h2 = 0.5 * (two_site(3, 1, 2, op::splus(), op::sminus()) + two_site(3, 1, 2, op::sminus(), op::splus())) +
                     two_site(3, 1, 2, op::sz(), op::sz());
  CHECK((assemble_operator(3, beta) - (2 * h1 + 3 * h2)).cwiseAbs().maxCoeff() < 1e-12);

  std::vector<OperatorTerm> outside{{1.0, {2, 3}, m2.links()[0].matrix}};
  CHECK_THROWS_AS(assemble_operator(3, outside), ValidationError);
  CHECK_THROWS_AS(assemble_operator(kDenseSiteCap + 1, all), ValidationError);
}

TEST_CASE("equilibrium positions and transverse modes") {
  const RVector u = equilibrium_positions(2);
  // Two ions: u = +-(1/4)^(1/3).
  CHECK(u(1) == doctest::Approx(std::cbrt(0.25)).epsilon(1e-12));
  CHECK(u(0) == doctest::Approx(-std::cbrt(0.25)).epsilon(1e-12));

  const double wz = 2 * std::numbers::pi * 0.3e6;
  const TrapParams trap = reference_trap(7, wz);
  const TrapModes modes = trap_modes(trap);
  // COM mode: highest transverse frequency, equal amplitudes 1/sqrt(N).
  Eigen::Index com;
  modes.frequencies.head(7).maxCoeff(&com);
  CHECK(modes.frequencies(com) == doctest::Approx(trap.omega_transverse[0]).epsilon(1e-12));
  for (int i = 0; i < 7; ++i) CHECK(std::abs(modes.amplitudes(i, com)) == doctest::Approx(1 / std::sqrt(7.0)).epsilon(1e-10));
  const RMatrix gram = modes.amplitudes.leftCols(7).transpose() * modes.amplitudes.leftCols(7);
  CHECK((gram - RMatrix::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-12);

  TrapParams unstable = trap;
  unstable.omega_transverse = {wz * 0.5, wz * 0.5};
  CHECK_THROWS_AS(trap_modes(unstable), NumericalError);
}

TEST_CASE("mode-sum couplings against an independent three-ion oracle") {
  // Independent oracle: closed-form 3-ion equilibrium u = (-(5/4)^(1/3), 0, (5/4)^(1/3)),
  // Hessian built directly, 6-mode sum evaluated term by term.
  const double wz = 2 * std::numbers::pi * 1.0e6;
  TrapParams t = reference_trap(3, wz);
  t.rabi_red = {1.0e5, 1.2e5, 0.9e5};
  t.rabi_blue = {1.1e5, 0.8e5, 1.0e5};
  t.rabi_comp = {0.5e5, 0.6e5, 0.7e5};
  t.omega_comp = 2 * std::numbers::pi * 3.5e6;
  t.omega_transverse = {2 * std::numbers::pi * 2.93e6, 2 * std::numbers::pi * 2.97e6};

  const double x = std::cbrt(1.25);
  const double pos[3] = {-x, 0, x};
  constexpr double hbar = 1.054571817e-34;
  RMatrix ref = RMatrix::Zero(3, 3);
  for (int b = 0; b < 2; ++b) {
    const double r = t.omega_transverse[static_cast<std::size_t>(b)] / wz;
    RMatrix k(3, 3);
    for (int i = 0; i < 3; ++i) {
      double diag = r * r;
      for (int j = 0; j < 3; ++j)
        if (j != i) {
          const double c = 1.0 / std::pow(std::abs(pos[i] - pos[j]), 3);
          diag -= c;
          k(i, j) = c;
        }
      k(i, i) = diag;
    }
    Eigen::SelfAdjointEigenSolver<RMatrix> es(k);
    for (int m = 0; m < 3; ++m) {
      const double w2 = wz * wz * es.eigenvalues()(m);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          if (i == j) continue;
          const double mm = es.eigenvectors()(i, m) * es.eigenvectors()(j, m);
          const double blue_red =
              0.5 * (t.rabi_blue[i] * t.rabi_red[j] + t.rabi_red[i] * t.rabi_blue[j]) * 0.5 *
              (1 / (t.omega_blue * t.omega_blue - w2) + 1 / (t.omega_red * t.omega_red - w2));
          const double comp = 0.5 * t.rabi_comp[i] * t.rabi_comp[j] / (t.omega_comp * t.omega_comp - w2);
          ref(i, j) += hbar * t.wavenumber * t.wavenumber / (4 * t.ion_mass) * mm * (blue_red + comp);
        }
    }
  }
  const CouplingMatrix c = mode_sum_couplings(t);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(c.values(i, j) == doctest::Approx(ref(i, j)).epsilon(1e-9));
}

TEST_CASE("mode-sum couplings follow an approximate power law far from resonance") {
  const int n = 12;
  TrapParams t = reference_trap(n, 2 * std::numbers::pi * 0.25e6);
  t.omega_blue = t.omega_transverse[0] + 2 * std::numbers::pi * 200e3;
  t.omega_red = -t.omega_blue;
  const CouplingMatrix c = mode_sum_couplings(t);
  // Log-log regression over pairs within the central third.
  std::vector<double> lx, ly;
  for (int i = n / 3; i < 2 * n / 3; ++i)
    for (int j = i + 1; j < 2 * n / 3; ++j) {
      REQUIRE(c.values(i, j) > 0);
      lx.push_back(std::log(j - i));
      ly.push_back(std::log(c.values(i, j)));
    }
  const auto k = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t q = 0; q < lx.size(); ++q) {
    mx += lx[q] / k;
    my += ly[q] / k;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t q = 0; q < lx.size(); ++q) {
    sxy += (lx[q] - mx) * (ly[q] - my);
    sxx += (lx[q] - mx) * (lx[q] - mx);
    syy += (ly[q] - my) * (ly[q] - my);
  }
  const double r2 = sxy * sxy / (sxx * syy);
  CHECK(r2 >= 0.95);
  CHECK(-sxy / sxx > 0);
}
