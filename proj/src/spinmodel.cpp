#include "ehtk/spinmodel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

namespace ehtk {

Eigen::Matrix4cd xxz_link_block(double j, double delta) {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  // basis dd=0, du=1, ud=2, uu=3
  m(0, 0) = m(3, 3) = 0.25 * j * delta;
  m(1, 1) = m(2, 2) = -0.25 * j * delta;
  m(1, 2) = m(2, 1) = 0.5 * j;
  return m;
}

Eigen::Matrix4cd weighted_dot_block(double delta) { return xxz_link_block(1.0, delta); }

SpinModel::SpinModel(int n_sites, double coupling_j, double anisotropy_delta)
    : n_(n_sites), j_(coupling_j), delta_(anisotropy_delta) {
  if (n_sites < 2) throw ValidationError("invalid size: an XXZ chain needs at least 2 sites");
  require(n_sites <= kStateSiteCap, "invalid size: chain longer than the state-vector cap");
  links_.reserve(static_cast<std::size_t>(n_ - 1));
  for (int s = 0; s + 1 < n_; ++s) links_.push_back({{s, s + 1}, xxz_link_block(j_, delta_)});
}

SpinModel build_xxz(int n, double j, double delta) { return SpinModel(n, j, delta); }

CMatrix SpinModel::hamiltonian() const {
  require(n_ <= kDenseSiteCap, "dense Hamiltonian requested above the dense size cap");
  const auto d = static_cast<Eigen::Index>(dim_of(n_));
  CMatrix h = CMatrix::Zero(d, d);
  for (const auto& link : links_)
    add_embedded(h, n_, {link.site_pair.first, link.site_pair.second}, link.matrix);
  return h;
}

std::vector<std::uint64_t> sector_basis(int n_sites, int n_up) {
  require(n_up >= 0 && n_up <= n_sites, "up-spin count outside [0, n]");
  std::vector<std::uint64_t> basis;
  const std::uint64_t d = dim_of(n_sites);
  for (std::uint64_t s = 0; s < d; ++s)
    if (std::popcount(s) == n_up) basis.push_back(s);
  return basis;
}

int up_count_for(int n_sites, int m) {
  require((m + n_sites) % 2 == 0 && std::abs(m) <= n_sites,
          "magnetization sector " + std::to_string(m) + " is not attainable on " +
              std::to_string(n_sites) + " sites");
  return (m + n_sites) / 2;
}

namespace {
Eigen::Index sector_position(const std::vector<std::uint64_t>& basis, std::uint64_t s) {
  auto it = std::lower_bound(basis.begin(), basis.end(), s);
  return static_cast<Eigen::Index>(it - basis.begin());
}
}  // namespace

RSparse SpinModel::sector_hamiltonian(int n_up) const {
  const auto basis = sector_basis(n_, n_up);
  const auto dim = static_cast<Eigen::Index>(basis.size());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(basis.size() * static_cast<std::size_t>(n_));
  for (Eigen::Index k = 0; k < dim; ++k) {
    const std::uint64_t s = basis[static_cast<std::size_t>(k)];
    double diag = 0;
    for (int i = 0; i + 1 < n_; ++i) {
      const bool a = bit_at(s, n_, i), b = bit_at(s, n_, i + 1);
      diag += (a == b ? 0.25 : -0.25) * j_ * delta_;
      if (a != b) {
        const std::uint64_t t = s ^ (std::uint64_t{1} << bit_of(n_, i)) ^ (std::uint64_t{1} << bit_of(n_, i + 1));
        trips.emplace_back(sector_position(basis, t), k, 0.5 * j_);
      }
    }
    trips.emplace_back(k, k, diag);
  }
  RSparse h(dim, dim);
  h.setFromTriplets(trips.begin(), trips.end());
  return h;
}

CVector SpinModel::apply(const CVector& psi) const {
  const std::uint64_t d = dim_of(n_);
  require(static_cast<std::uint64_t>(psi.size()) == d, "state dimension does not match the model");
  CVector out = CVector::Zero(psi.size());
  for (std::uint64_t s = 0; s < d; ++s) {
    const cplx a = psi(static_cast<Eigen::Index>(s));
    if (a == cplx(0.0)) continue;
    for (int i = 0; i + 1 < n_; ++i) {
      const bool x = bit_at(s, n_, i), y = bit_at(s, n_, i + 1);
      out(static_cast<Eigen::Index>(s)) += (x == y ? 0.25 : -0.25) * j_ * delta_ * a;
      if (x != y) {
        const std::uint64_t t = s ^ (std::uint64_t{1} << bit_of(n_, i)) ^ (std::uint64_t{1} << bit_of(n_, i + 1));
        out(static_cast<Eigen::Index>(t)) += 0.5 * j_ * a;
      }
    }
  }
  return out;
}

std::vector<double> SpinModel::link_energies(const CVector& psi) const {
  const std::uint64_t d = dim_of(n_);
  require(static_cast<std::uint64_t>(psi.size()) == d, "state dimension does not match the model");
  std::vector<double> e(static_cast<std::size_t>(n_ - 1), 0.0);
  for (std::uint64_t s = 0; s < d; ++s) {
    const cplx a = psi(static_cast<Eigen::Index>(s));
    if (a == cplx(0.0)) continue;
    for (int i = 0; i + 1 < n_; ++i) {
      const bool x = bit_at(s, n_, i), y = bit_at(s, n_, i + 1);
      e[static_cast<std::size_t>(i)] += (x == y ? 0.25 : -0.25) * j_ * delta_ * std::norm(a);
      if (x != y) {
        const std::uint64_t t = s ^ (std::uint64_t{1} << bit_of(n_, i)) ^ (std::uint64_t{1} << bit_of(n_, i + 1));
        e[static_cast<std::size_t>(i)] += 0.5 * j_ * std::real(std::conj(psi(static_cast<Eigen::Index>(t))) * a);
      }
    }
  }
  return e;
}

CouplingMatrix power_law_couplings(int n, double j0, double alpha) {
  require(n >= 2, "invalid size: couplings need at least 2 sites");
  require(j0 > 0, "power-law amplitude J0 must be positive");
  require(alpha >= 0, "power-law exponent must be non-negative");
  CouplingMatrix c{n, RMatrix::Zero(n, n)};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) c.values(i, j) = j0 / std::pow(std::abs(i - j), alpha);
  return c;
}

RVector equilibrium_positions(int n_ions, double tolerance, int max_iterations) {
  require(n_ions >= 1, "ion chain needs at least one ion");
  RVector u(n_ions);
  // Approximate extent of a harmonic Coulomb crystal as a starting point.
  const double half = n_ions > 1 ? 0.9 * std::pow(n_ions, 0.56) : 0.0;
  for (int i = 0; i < n_ions; ++i)
    u(i) = n_ions > 1 ? -half + 2.0 * half * i / (n_ions - 1) : 0.0;

  auto forces = [n_ions](const RVector& x) {
    RVector f = -x;
    for (int i = 0; i < n_ions; ++i)
      for (int j = 0; j < n_ions; ++j)
        if (i != j) {
          const double dx = x(i) - x(j);
          f(i) += (dx > 0 ? 1.0 : -1.0) / (dx * dx);
        }
    return f;
  };
  auto ordered = [n_ions](const RVector& x) {
    for (int i = 0; i + 1 < n_ions; ++i)
      if (!(x(i) < x(i + 1))) return false;
    return true;
  };

  RVector f = forces(u);
  double residual = f.cwiseAbs().maxCoeff();
  for (int it = 0; it < max_iterations && residual >= tolerance; ++it) {
    RMatrix jac = RMatrix::Zero(n_ions, n_ions);
    for (int i = 0; i < n_ions; ++i) {
      jac(i, i) = -1.0;
      for (int j = 0; j < n_ions; ++j)
        if (i != j) {
          const double k = 2.0 / std::pow(std::abs(u(i) - u(j)), 3);
          jac(i, i) -= k;
          jac(i, j) += k;
        }
    }
    const RVector step = jac.lu().solve(-f);
    double damping = 1.0;
    for (int k = 0; k < 60; ++k, damping *= 0.5) {
      const RVector trial = u + damping * step;
      if (!ordered(trial)) continue;
      const RVector ft = forces(trial);
      const double rt = ft.cwiseAbs().maxCoeff();
      if (rt < residual || k == 59) {
        u = trial;
        f = ft;
        residual = rt;
        break;
      }
    }
  }
  if (!(residual < tolerance)) throw NumericalError("equilibrium solve did not converge", residual);
  return u;
}

TrapModes trap_modes(const TrapParams& trap) {
  const int n = trap.n_ions;
  require(n >= 1, "trap needs at least one ion");
  require(trap.omega_axial > 0 && trap.omega_transverse[0] > 0 && trap.omega_transverse[1] > 0,
          "trap frequencies must be positive");
  TrapModes out;
  out.positions = equilibrium_positions(n);
  RMatrix coulomb = RMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) {
        const double k = 1.0 / std::pow(std::abs(out.positions(i) - out.positions(j)), 3);
        coulomb(i, i) -= k;
        coulomb(i, j) += k;
      }
  out.frequencies.resize(2 * n);
  out.amplitudes.resize(n, 2 * n);
  for (int b = 0; b < 2; ++b) {
    const double ratio = trap.omega_transverse[static_cast<std::size_t>(b)] / trap.omega_axial;
    RMatrix hess = coulomb;
    hess.diagonal().array() += ratio * ratio;
    Eigen::SelfAdjointEigenSolver<RMatrix> es(hess);
    for (int m = 0; m < n; ++m) {
      const double lam = es.eigenvalues()(m);
      if (lam <= 0) throw NumericalError("unstable chain: imaginary transverse mode frequency", lam);
      out.frequencies(b * n + m) = trap.omega_axial * std::sqrt(lam);
      RVector v = es.eigenvectors().col(m);
      // fix the sign so the largest component is positive
      Eigen::Index arg;
      v.cwiseAbs().maxCoeff(&arg);
      if (v(arg) < 0) v = -v;
      out.amplitudes.col(b * n + m) = v;
    }
  }
  return out;
}

CouplingMatrix mode_sum_couplings(const TrapParams& trap) {
  const int n = trap.n_ions;
  require(n >= 2, "invalid size: couplings need at least 2 ions");
  auto sized = [n](const std::vector<double>& v) { return static_cast<int>(v.size()) == n; };
  require(sized(trap.rabi_red) && sized(trap.rabi_blue) && sized(trap.rabi_comp),
          "Rabi-frequency lists must have one entry per ion");
  require(trap.wavenumber > 0 && trap.ion_mass > 0, "wavenumber and ion mass must be positive");
  const TrapModes modes = trap_modes(trap);
  constexpr double hbar = 1.054571817e-34;
  const double prefactor = hbar * trap.wavenumber * trap.wavenumber / (4.0 * trap.ion_mass);
  CouplingMatrix c{n, RMatrix::Zero(n, n)};
  for (int m = 0; m < 2 * n; ++m) {
    const double w2 = modes.frequencies(m) * modes.frequencies(m);
    const double bichromatic =
        0.5 * (1.0 / (trap.omega_blue * trap.omega_blue - w2) + 1.0 / (trap.omega_red * trap.omega_red - w2));
    const double compensation = 1.0 / (trap.omega_comp * trap.omega_comp - w2);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const auto si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
        const double br = 0.5 * (trap.rabi_blue[si] * trap.rabi_red[sj] + trap.rabi_red[si] * trap.rabi_blue[sj]);
        const double cc = trap.rabi_comp[si] * trap.rabi_comp[sj];
        c.values(i, j) += prefactor * modes.amplitudes(i, m) * modes.amplitudes(j, m) *
                          (br * bichromatic + 0.5 * cc * compensation);
      }
  }
  return c;
}

TrapParams reference_trap(int n_ions, double omega_axial) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  TrapParams t;
  t.n_ions = n_ions;
  t.omega_axial = omega_axial;
  const double com = two_pi * 2.93e6;
  t.omega_transverse = {com, com};
  t.omega_blue = com + two_pi * 25e3;
  t.omega_red = -t.omega_blue;
  t.omega_comp = 0.0;
  const auto sz = static_cast<std::size_t>(n_ions);
  t.rabi_red.assign(sz, two_pi * 100e3);
  t.rabi_blue.assign(sz, two_pi * 100e3);
  t.rabi_comp.assign(sz, 0.0);
  t.wavenumber = two_pi / 729e-9;
  t.ion_mass = 39.962591 * 1.66053906660e-27;
  return t;
}

CMatrix assemble_operator(int n_sites, std::span<const OperatorTerm> terms) {
  require(n_sites >= 1 && n_sites <= kDenseSiteCap, "operator dimension exceeds the dense size cap");
  const auto d = static_cast<Eigen::Index>(dim_of(n_sites));
  CMatrix h = CMatrix::Zero(d, d);
  for (const auto& t : terms) add_embedded(h, n_sites, t.sites, t.block, t.coefficient);
  return h;
}

RSparse xy_sector_hamiltonian(const CouplingMatrix& couplings, int n_up) {
  const int n = couplings.n_sites;
  const auto basis = sector_basis(n, n_up);
  const auto dim = static_cast<Eigen::Index>(basis.size());
  std::vector<Eigen::Triplet<double>> trips;
  for (Eigen::Index k = 0; k < dim; ++k) {
    const std::uint64_t s = basis[static_cast<std::size_t>(k)];
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        if (bit_at(s, n, i) == bit_at(s, n, j)) continue;
        const double jij = couplings.values(i, j);
        if (jij == 0.0) continue;
        const std::uint64_t t = s ^ (std::uint64_t{1} << bit_of(n, i)) ^ (std::uint64_t{1} << bit_of(n, j));
        trips.emplace_back(sector_position(basis, t), k, jij);
      }
  }
  RSparse h(dim, dim);
  h.setFromTriplets(trips.begin(), trips.end());
  return h;
}

}  // namespace ehtk
