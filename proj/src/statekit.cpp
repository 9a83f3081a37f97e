#include "ehtk/statekit.hpp"

#include "ehtk/optim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numbers>

namespace ehtk {

// ---------------------------------------------------------------- states

PureState::PureState(int n_sites, CVector amplitudes) : n_(n_sites), amp_(std::move(amplitudes)) {
  require(n_sites >= 1 && n_sites <= kStateSiteCap, "state size outside [1, cap]");
  require(static_cast<std::uint64_t>(amp_.size()) == dim_of(n_sites), "amplitude vector has the wrong length");
  const double norm2 = amp_.squaredNorm();
  require(std::abs(norm2 - 1.0) <= 1e-10, "state is not normalized (|psi|^2 = " + std::to_string(norm2) + ")");
}

PureState PureState::basis_state(std::string_view bits) {
  const int n = static_cast<int>(bits.size());
  CVector a = CVector::Zero(static_cast<Eigen::Index>(dim_of(n)));
  a(static_cast<Eigen::Index>(bits_to_index(bits))) = 1.0;
  return PureState(n, std::move(a));
}

cplx PureState::amplitude(std::string_view bits) const {
  require(static_cast<int>(bits.size()) == n_, "bitstring length does not match the state");
  return amp_(static_cast<Eigen::Index>(bits_to_index(bits)));
}

PureState PureState::flipped() const {
  PureState out = *this;
  const Eigen::Index d = amp_.size();
  for (Eigen::Index i = 0; i < d; ++i) out.amp_(i) = amp_(d - 1 - i);
  return out;
}

double PureState::total_sz() const {
  double m = 0;
  for (Eigen::Index i = 0; i < amp_.size(); ++i)
    m += std::norm(amp_(i)) * (std::popcount(static_cast<std::uint64_t>(i)) - 0.5 * n_);
  return m;
}

std::map<int, double> PureState::sector_weights() const {
  std::map<int, double> w;
  for (Eigen::Index i = 0; i < amp_.size(); ++i) {
    const double p = std::norm(amp_(i));
    if (p > 0) w[sector_label(n_, std::popcount(static_cast<std::uint64_t>(i)))] += p;
  }
  return w;
}

void DensityMatrix::validate(double tol) const {
  require(is_sorted_unique(sites), "density-matrix sites must be sorted and unique");
  const auto d = static_cast<Eigen::Index>(dim_of(n_sites()));
  require(matrix.rows() == d && matrix.cols() == d, "density matrix has the wrong dimension");
  require(hermiticity_defect(matrix) <= tol, "density matrix is not Hermitian");
  require(std::abs(matrix.trace().real() - 1.0) <= tol, "density matrix trace is not 1");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(matrix, Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() >= -1e-9, "density matrix has a negative eigenvalue");
}

DensityMatrix DensityMatrix::maximally_mixed(Sites sites) {
  const auto d = static_cast<Eigen::Index>(dim_of(static_cast<int>(sites.size())));
  return {std::move(sites), CMatrix::Identity(d, d) / static_cast<double>(d)};
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  require(psi.n_sites() <= kDenseSiteCap, "density matrix requested above the dense size cap");
  Sites s(static_cast<std::size_t>(psi.n_sites()));
  for (int i = 0; i < psi.n_sites(); ++i) s[static_cast<std::size_t>(i)] = i;
  return {std::move(s), psi.amplitudes() * psi.amplitudes().adjoint()};
}

PureState neel_state(int n) {
  require(n >= 1, "Neel state needs at least one site");
  std::string bits(static_cast<std::size_t>(n), '0');
  for (int i = 1; i < n; i += 2) bits[static_cast<std::size_t>(i)] = '1';
  return PureState::basis_state(bits);
}

// ---------------------------------------------------------------- eigensolvers

namespace {

using LinOp = std::function<RVector(const RVector&)>;

struct Ritz {
  double value = 0;
  RVector vector;
  double residual = 0;
};

void fix_sign(RVector& v) {
  Eigen::Index arg;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0) v = -v;
}

// Lowest eigenpair of a symmetric operator: Lanczos with full
// reorthogonalization and explicit restarts from the current Ritz vector.
Ritz lanczos_lowest(const LinOp& op, Eigen::Index dim, std::uint64_t seed, double tol = 1e-10,
                    int krylov = 120, int max_restarts = 200) {
  auto rng = make_stream(seed, {0x1a2c});
  RVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = uniform01(rng) - 0.5;
  v.normalize();
  const int m_max = static_cast<int>(std::min<Eigen::Index>(krylov, dim));
  Ritz best;
  for (int restart = 0; restart < max_restarts; ++restart) {
    RMatrix basis(dim, m_max);
    std::vector<double> alpha, beta;
    basis.col(0) = v;
    int m = 0;
    for (int j = 0; j < m_max; ++j) {
      RVector w = op(basis.col(j));
      const double a = basis.col(j).dot(w);
      alpha.push_back(a);
      ++m;
      for (int pass = 0; pass < 2; ++pass) w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
      const double b = w.norm();
      if (j + 1 == m_max || b < 1e-13) break;
      beta.push_back(b);
      basis.col(j + 1) = w / b;
    }
    RMatrix t = RMatrix::Zero(m, m);
    for (int i = 0; i < m; ++i) t(i, i) = alpha[static_cast<std::size_t>(i)];
    for (int i = 0; i + 1 < m; ++i) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    Eigen::SelfAdjointEigenSolver<RMatrix> es(t);
    RVector x = basis.leftCols(m) * es.eigenvectors().col(0);
    x.normalize();
    const RVector hx = op(x);
    const double theta = x.dot(hx);
    best = {theta, x, (hx - theta * x).norm()};
    if (best.residual <= tol * std::max(1.0, std::abs(theta))) {
      fix_sign(best.vector);
      return best;
    }
    v = x;
  }
  throw NumericalError("Lanczos did not converge", best.residual);
}

constexpr Eigen::Index kDenseSectorDim = 1500;

// Lowest eigenpair of a real symmetric sparse matrix.
Ritz lowest_of(const RSparse& h, std::uint64_t seed, bool allow_dense) {
  if (allow_dense || h.rows() <= 64) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es{RMatrix(h)};
    RVector v = es.eigenvectors().col(0);
    fix_sign(v);
    return {es.eigenvalues()(0), v, 0.0};
  }
  return lanczos_lowest([&h](const RVector& x) -> RVector { return h * x; }, h.rows(), seed);
}

CVector embed_sector(int n, const std::vector<std::uint64_t>& basis, const RVector& v) {
  CVector full = CVector::Zero(static_cast<Eigen::Index>(dim_of(n)));
  for (std::size_t k = 0; k < basis.size(); ++k) full(static_cast<Eigen::Index>(basis[k])) = v(static_cast<Eigen::Index>(k));
  return full;
}

// Real sparse Hamiltonian on the whole 2^N space.
RSparse full_sparse(const SpinModel& model) {
  const int n = model.n_sites();
  const std::uint64_t d = dim_of(n);
  std::vector<Eigen::Triplet<double>> trips;
  for (std::uint64_t s = 0; s < d; ++s) {
    double diag = 0;
    for (int i = 0; i + 1 < n; ++i) {
      const bool a = bit_at(s, n, i), b = bit_at(s, n, i + 1);
      diag += (a == b ? 0.25 : -0.25) * model.coupling_j() * model.anisotropy_delta();
      if (a != b) {
        const std::uint64_t t = s ^ (std::uint64_t{1} << bit_of(n, i)) ^ (std::uint64_t{1} << bit_of(n, i + 1));
        trips.emplace_back(static_cast<int>(t), static_cast<int>(s), 0.5 * model.coupling_j());
      }
    }
    trips.emplace_back(static_cast<int>(s), static_cast<int>(s), diag);
  }
  RSparse h(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  h.setFromTriplets(trips.begin(), trips.end());
  return h;
}

}  // namespace

EigenPair ground_state(const SpinModel& model, std::optional<int> sector) {
  const int n = model.n_sites();
  const bool dense = n <= kDenseSiteCap;
  std::vector<int> ups;
  if (sector) {
    ups.push_back(up_count_for(n, *sector));
  } else {
    for (int u = 0; u <= n; ++u) ups.push_back(u);
  }
  std::optional<EigenPair> best;
  for (int u : ups) {
    const RSparse h = model.sector_hamiltonian(u);
    const Ritz r = lowest_of(h, static_cast<std::uint64_t>(u) + 17, dense);
    if (!best || r.value < best->energy - 1e-10) {
      const auto basis = sector_basis(n, u);
      best = EigenPair{r.value, PureState(n, embed_sector(n, basis, r.vector))};
    }
  }
  return *best;
}

std::pair<double, double> spectral_bounds(const SpinModel& model) {
  const int n = model.n_sites();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int u = 0; u <= n; ++u) {
    const RSparse h = model.sector_hamiltonian(u);
    if (h.rows() <= kDenseSectorDim) {
      Eigen::SelfAdjointEigenSolver<RMatrix> es{RMatrix(h), Eigen::EigenvaluesOnly};
      lo = std::min(lo, es.eigenvalues()(0));
      hi = std::max(hi, es.eigenvalues()(h.rows() - 1));
    } else {
      lo = std::min(lo, lowest_of(h, 3, false).value);
      const RSparse neg = -h;
      hi = std::max(hi, -lowest_of(neg, 5, false).value);
    }
  }
  return {lo, hi};
}

std::vector<EigenPair> excited_states(const SpinModel& model, int count, std::optional<double> weight,
                                      std::optional<int> sector) {
  require(count >= 1, "excited_states needs count >= 1");
  const int n = model.n_sites();
  std::vector<std::uint64_t> basis;
  RSparse h;
  if (sector) {
    const int u = up_count_for(n, *sector);
    basis = sector_basis(n, u);
    h = model.sector_hamiltonian(u);
  } else {
    h = full_sparse(model);
  }
  const Eigen::Index dim = h.rows();
  require(count <= dim, "excited_states: more states requested than the space holds");
  double w;
  if (weight) {
    w = *weight;
  } else {
    const auto [lo, hi] = spectral_bounds(model);
    w = 10.0 * (hi - lo);
  }
  require(w > 0, "deflation weight must be positive");

  std::vector<RVector> found;
  std::vector<EigenPair> out;
  const bool dense = dim <= 400;
  const RMatrix hd = dense ? RMatrix(h) : RMatrix();
  for (int k = 0; k < count; ++k) {
    Ritz r;
    if (dense) {
      RMatrix a = hd;
      for (const auto& phi : found) a.noalias() += w * phi * phi.transpose();
      Eigen::SelfAdjointEigenSolver<RMatrix> es(a);
      r.vector = es.eigenvectors().col(0);
      fix_sign(r.vector);
    } else {
      auto op = [&](const RVector& x) -> RVector {
        RVector y = h * x;
        for (const auto& phi : found) y += (w * phi.dot(x)) * phi;
        return y;
      };
      r = lanczos_lowest(op, dim, 1000 + static_cast<std::uint64_t>(k), 1e-11);
    }
    // Orthogonalize against earlier states to remove residual leakage.
    for (const auto& phi : found) r.vector -= phi.dot(r.vector) * phi;
    r.vector.normalize();
    const double energy = r.vector.dot(h * r.vector);
    if (!out.empty() && energy < out.back().energy - 1e-9)
      throw NumericalError("deflation failed: weight too small, energy fell below a previous state",
                           out.back().energy - energy);
    found.push_back(r.vector);
    CVector full = sector ? embed_sector(n, basis, r.vector) : CVector(r.vector.cast<cplx>());
    out.push_back({energy, PureState(n, std::move(full))});
  }
  return out;
}

// ---------------------------------------------------------------- circuits

struct XYPropagator::Sector {
  std::vector<std::uint64_t> basis;
  bool dense = false;
  RMatrix vectors;
  RVector values;
  RSparse h;
  double norm_bound = 0;
};

XYPropagator::XYPropagator(CouplingMatrix couplings) : couplings_(std::move(couplings)) {
  require(couplings_.values.rows() == couplings_.n_sites && couplings_.values.cols() == couplings_.n_sites,
          "coupling matrix shape does not match n_sites");
}

const XYPropagator::Sector& XYPropagator::sector(int n_up) const {
  auto it = cache_.find(n_up);
  if (it != cache_.end()) return *it->second;
  auto s = std::make_shared<Sector>();
  s->basis = sector_basis(couplings_.n_sites, n_up);
  s->h = xy_sector_hamiltonian(couplings_, n_up);
  if (s->h.rows() <= kDenseSectorDim) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es{RMatrix(s->h)};
    s->vectors = es.eigenvectors();
    s->values = es.eigenvalues();
    s->dense = true;
  } else {
    for (Eigen::Index c = 0; c < s->h.outerSize(); ++c) {
      double col = 0;
      for (RSparse::InnerIterator itr(s->h, c); itr; ++itr) col += std::abs(itr.value());
      s->norm_bound = std::max(s->norm_bound, col);
    }
  }
  return *cache_.emplace(n_up, std::move(s)).first->second;
}

CVector XYPropagator::apply(const CVector& psi, double theta) const {
  const int n = couplings_.n_sites;
  require(static_cast<std::uint64_t>(psi.size()) == dim_of(n), "state dimension does not match the couplings");
  if (theta == 0.0) return psi;
  CVector out = CVector::Zero(psi.size());
  for (int u = 0; u <= n; ++u) {
    const Sector& s = sector(u);
    const auto dim = static_cast<Eigen::Index>(s.basis.size());
    CVector x(dim);
    double weight = 0;
    for (Eigen::Index k = 0; k < dim; ++k) {
      x(k) = psi(static_cast<Eigen::Index>(s.basis[static_cast<std::size_t>(k)]));
      weight += std::norm(x(k));
    }
    if (weight == 0.0) continue;
    CVector y;
    if (s.dense) {
      CVector coeff = s.vectors.transpose().cast<cplx>() * x;
      for (Eigen::Index k = 0; k < dim; ++k) coeff(k) *= std::exp(cplx(0, -theta * s.values(k)));
      y = s.vectors.cast<cplx>() * coeff;
    } else {
      // Taylor series on substeps with |tau| * norm_bound <= 1.
      const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(theta) * s.norm_bound)));
      const double tau = theta / steps;
      y = x;
      for (int st = 0; st < steps; ++st) {
        CVector term = y, acc = y;
        for (int k = 1; k < 60; ++k) {
          term = (cplx(0, -tau) / static_cast<double>(k)) * (s.h.cast<cplx>() * term);
          acc += term;
          if (term.norm() < 1e-17 * acc.norm()) break;
        }
        y = acc;
      }
    }
    for (Eigen::Index k = 0; k < dim; ++k) out(static_cast<Eigen::Index>(s.basis[static_cast<std::size_t>(k)])) = y(k);
  }
  return out;
}

PureState apply_xy_evolution(const PureState& state, const CouplingMatrix& couplings, double theta) {
  require(state.n_sites() == couplings.n_sites, "state and couplings disagree on the number of sites");
  return PureState(state.n_sites(), XYPropagator(couplings).apply(state.amplitudes(), theta));
}

PureState apply_z_rotation(const PureState& state, double theta) {
  const int n = state.n_sites();
  CVector a = state.amplitudes();
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    int z = 0;
    for (int site = 1; site < n; site += 2) z += bit_at(static_cast<std::uint64_t>(i), n, site) ? 1 : -1;
    a(i) *= std::exp(cplx(0, -0.5 * theta * z));
  }
  return PureState(n, std::move(a));
}

void CircuitParams::validate() const { require(!thetas.empty(), "circuit needs at least one layer"); }

PureState run_circuit(const PureState& initial, const CircuitParams& params, const XYPropagator& propagator) {
  params.validate();
  require(initial.n_sites() == propagator.n_sites(), "state and couplings disagree on the number of sites");
  const int n = initial.n_sites();
  CVector a = initial.amplitudes();
  if (params.heating_quench) a = propagator.apply(a, *params.heating_quench);
  for (std::size_t k = 0; k < params.thetas.size(); ++k) {
    if (k % 2 == 0) {
      a = propagator.apply(a, params.thetas[k]);
    } else {
      a = apply_z_rotation(PureState(n, std::move(a)), params.thetas[k]).amplitudes();
    }
  }
  a.normalize();
  return PureState(n, std::move(a));
}

PureState run_circuit(const PureState& initial, const CircuitParams& params, const CouplingMatrix& couplings) {
  return run_circuit(initial, params, XYPropagator(couplings));
}

double estimate_energy(const SpinModel& model, const PureState& psi, int shots, std::uint64_t seed) {
  require(psi.n_sites() == model.n_sites(), "state and model disagree on the number of sites");
  require(shots >= 0, "shots must be non-negative");
  if (shots == 0) return psi.amplitudes().dot(model.apply(psi.amplitudes())).real();
  const int n = psi.n_sites();
  const double weights[3] = {1.0, 1.0, model.anisotropy_delta()};
  const char axes[3] = {'X', 'Y', 'Z'};
  double energy = 0;
  for (int b = 0; b < 3; ++b) {
    CVector rotated = psi.amplitudes();
    if (axes[b] != 'Z')
      for (int s = 0; s < n; ++s) apply_site(rotated, n, s, op::basis_rotation(axes[b]));
    auto rng = make_stream(seed, {static_cast<std::uint64_t>(b)});
    const auto hist = sample_histogram(rotated.cwiseAbs2(), shots, rng);
    double corr = 0;
    for (const auto& [idx, cnt] : hist)
      for (int i = 0; i + 1 < n; ++i)
        corr += static_cast<double>(cnt) * (bit_at(idx, n, i) == bit_at(idx, n, i + 1) ? 0.25 : -0.25);
    energy += model.coupling_j() * weights[b] * corr / static_cast<double>(shots);
  }
  return energy;
}

VqeResult vqe_optimize(const SpinModel& model, const CouplingMatrix& couplings, int layers, int shots_per_basis,
                       std::uint64_t seed, const VqeOptions& opts) {
  require(layers >= 1, "VQE needs at least one layer");
  require(couplings.n_sites == model.n_sites(), "couplings and model disagree on the number of sites");
  require(opts.iterations >= 0, "iteration budget must be non-negative");
  const int n = model.n_sites();
  const auto m = static_cast<Eigen::Index>(2 * layers);

  RVector theta(m);
  if (opts.initial) {
    require(static_cast<Eigen::Index>(opts.initial->size()) == m, "initial parameters have the wrong length");
    for (Eigen::Index i = 0; i < m; ++i) theta(i) = (*opts.initial)[static_cast<std::size_t>(i)];
  } else if (opts.warm_start_sites >= 2) {
    // Exact optimization on a shorter chain with the leading block of the couplings.
    const int w = std::min(n, opts.warm_start_sites);
    const SpinModel sub = build_xxz(w, model.coupling_j(), model.anisotropy_delta());
    const XYPropagator prop(CouplingMatrix{w, couplings.values.topLeftCorner(w, w)});
    const PureState start = neel_state(w);
    auto energy = [&](const RVector& x) {
      CircuitParams p{{x.data(), x.data() + x.size()}, std::nullopt};
      return estimate_energy(sub, run_circuit(start, p, prop), 0, 0);
    };
    auto rng = make_stream(seed, {0x3a7});
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(1, opts.warm_start_restarts); ++r) {
      RVector x0(m);
      for (Eigen::Index i = 0; i < m; ++i) x0(i) = std::numbers::pi * uniform01(rng);
      BfgsOptions bo;
      bo.max_iterations = 200;
      bo.gradient_tolerance = 1e-7;
      const BfgsResult res = minimize_bfgs(with_numeric_gradient(energy), x0, bo);
      if (res.value < best) {
        best = res.value;
        theta = res.x;
      }
    }
  } else {
    theta.setConstant(0.5);
  }

  const XYPropagator prop(couplings);
  const PureState start = neel_state(n);
  std::uint64_t evaluation = 0;
  auto estimate = [&](const RVector& x) {
    CircuitParams p{{x.data(), x.data() + x.size()}, std::nullopt};
    return estimate_energy(model, run_circuit(start, p, prop), shots_per_basis,
                           make_stream(seed, {0x5e7, evaluation++})());
  };

  VqeResult res;
  const double big_a = opts.stability >= 0 ? opts.stability : 0.1 * opts.iterations;
  double current = estimate(theta);
  res.energy_trace.push_back(current);
  RVector best_theta = theta;
  double best_energy = current;
  auto rng = make_stream(seed, {0x59a});
  for (int k = 0; k < opts.iterations; ++k) {
    const double ak = opts.gain_a / std::pow(k + 1 + big_a, 0.602);
    const double ck = opts.gain_c / std::pow(k + 1, 0.101);
    RVector delta(m);
    for (Eigen::Index i = 0; i < m; ++i) delta(i) = (rng() & 1u) ? 1.0 : -1.0;
    const double fp = estimate(theta + ck * delta);
    const double fm = estimate(theta - ck * delta);
    theta -= ak * ((fp - fm) / (2 * ck)) * delta;
    current = estimate(theta);
    res.energy_trace.push_back(current);
    if (current < best_energy) {
      best_energy = current;
      best_theta = theta;
    }
  }
  res.params.thetas.assign(best_theta.data(), best_theta.data() + best_theta.size());
  res.best_energy = best_energy;
  return res;
}

// ---------------------------------------------------------------- reduced states

DensityMatrix reduced_density_matrix(const PureState& state, const Sites& sites) {
  const int n = state.n_sites();
  require(!sites.empty(), "reduced density matrix needs at least one site");
  require(is_sorted_unique(sites), "subsystem sites must be sorted and unique");
  require(sites.front() >= 0 && sites.back() < n, "subsystem site outside the chain");
  require(static_cast<int>(sites.size()) <= kDenseSiteCap, "subsystem larger than the partial-trace cap");
  const Sites env = complement(n, sites);
  const auto da = static_cast<Eigen::Index>(dim_of(static_cast<int>(sites.size())));
  const auto de = static_cast<Eigen::Index>(dim_of(static_cast<int>(env.size())));
  CMatrix psi(da, de);
  const auto& amp = state.amplitudes();
  for (Eigen::Index x = 0; x < amp.size(); ++x) {
    const auto ux = static_cast<std::uint64_t>(x);
    psi(static_cast<Eigen::Index>(gather_bits(ux, n, sites)), static_cast<Eigen::Index>(gather_bits(ux, n, env))) = amp(x);
  }
  CMatrix rho = psi * psi.adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return {sites, std::move(rho)};
}

DensityMatrix reduced_density_matrix(const DensityMatrix& rho, const Sites& sites) {
  require(is_sorted_unique(sites) && !sites.empty(), "subsystem sites must be sorted, unique and non-empty");
  const int n = rho.n_sites();
  const auto pos = positions_in(rho.sites, sites);
  Sites keep(pos.begin(), pos.end());
  const Sites env = complement(n, keep);
  const auto da = static_cast<Eigen::Index>(dim_of(static_cast<int>(keep.size())));
  const std::uint64_t de = dim_of(static_cast<int>(env.size()));
  CMatrix out = CMatrix::Zero(da, da);
  for (Eigen::Index a = 0; a < da; ++a)
    for (Eigen::Index b = 0; b < da; ++b) {
      const std::uint64_t ra = scatter_bits(static_cast<std::uint64_t>(a), n, keep);
      const std::uint64_t rb = scatter_bits(static_cast<std::uint64_t>(b), n, keep);
      cplx acc = 0;
      for (std::uint64_t e = 0; e < de; ++e) {
        const std::uint64_t re = scatter_bits(e, n, env);
        acc += rho.matrix(static_cast<Eigen::Index>(ra | re), static_cast<Eigen::Index>(rb | re));
      }
      out(a, b) = acc;
    }
  return {sites, std::move(out)};
}

DensityMatrix symmetrized_rdm(const DensityMatrix& rho) {
  const Eigen::Index d = rho.matrix.rows();
  CMatrix flipped(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) flipped(a, b) = rho.matrix(d - 1 - a, d - 1 - b);
  return {rho.sites, 0.5 * (rho.matrix + flipped)};
}

}  // namespace ehtk
