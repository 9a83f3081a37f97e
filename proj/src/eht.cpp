#include "ehtk/eht.hpp"

#include "ehtk/pauli.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace ehtk {

std::string to_string(AnsatzVariant v) {
  switch (v) {
    case AnsatzVariant::LocalLinks: return "local-links";
    case AnsatzVariant::PolynomialProfile: return "polynomial-profile";
    case AnsatzVariant::BilocalPairs: return "bilocal-pairs";
  }
  return "?";
}

AnsatzVariant variant_from_string(const std::string& s) {
  if (s == "local-links") return AnsatzVariant::LocalLinks;
  if (s == "polynomial-profile") return AnsatzVariant::PolynomialProfile;
  if (s == "bilocal-pairs") return AnsatzVariant::BilocalPairs;
  throw ValidationError("unknown ansatz variant '" + s + "'");
}

namespace {

bool contiguous(const Sites& s) {
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i] != s[i - 1] + 1) return false;
  return !s.empty() && s.front() >= 0;
}

RSparse pair_generator(int n, int pa, int pb, double delta) {
  const CMatrix block = weighted_dot_block(delta);
  const CSparse g = embed_sparse(n, {pa, pb}, block);
  return g.real();
}

}  // namespace

void EHAnsatz::build_generators(const std::vector<std::vector<double>>& weights) {
  const int n = n_sites();
  require(n <= kDenseSiteCap, "ansatz register larger than the dense cap");
  std::vector<RSparse> elementary;
  for (const auto& [a, b] : pairs_) {
    const auto pos = positions_in(geometry_, {a, b});
    elementary.push_back(pair_generator(n, pos[0], pos[1], delta_));
  }
  generators_.clear();
  for (const auto& w : weights) {
    RSparse g(static_cast<Eigen::Index>(dim_of(n)), static_cast<Eigen::Index>(dim_of(n)));
    for (std::size_t k = 0; k < w.size(); ++k)
      if (w[k] != 0.0) g += w[k] * elementary[k];
    g.prune(0.0);
    generators_.push_back(std::move(g));
  }
}

EHAnsatz EHAnsatz::local_links(Sites geometry, double delta) {
  require(geometry.size() >= 2, "local-links ansatz needs at least two sites");
  require(contiguous(geometry), "local-links geometry must be a contiguous block");
  EHAnsatz a;
  a.variant_ = AnsatzVariant::LocalLinks;
  a.geometry_ = std::move(geometry);
  a.delta_ = delta;
  std::vector<std::vector<double>> w;
  for (std::size_t j = 0; j + 1 < a.geometry_.size(); ++j) {
    a.pairs_.emplace_back(a.geometry_[j], a.geometry_[j + 1]);
    std::vector<double> row(a.geometry_.size() - 1, 0.0);
    row[j] = 1.0;
    w.push_back(std::move(row));
  }
  a.build_generators(w);
  return a;
}

EHAnsatz EHAnsatz::polynomial_profile(Sites geometry, double delta) {
  require(geometry.size() >= 2, "polynomial ansatz needs at least two sites");
  require(contiguous(geometry), "polynomial-profile geometry must be a contiguous block");
  EHAnsatz a;
  a.variant_ = AnsatzVariant::PolynomialProfile;
  a.geometry_ = std::move(geometry);
  a.delta_ = delta;
  const std::size_t links = a.geometry_.size() - 1;
  std::vector<std::vector<double>> w(3, std::vector<double>(links));
  for (std::size_t j = 0; j < links; ++j) {
    a.pairs_.emplace_back(a.geometry_[j], a.geometry_[j + 1]);
    const double x = static_cast<double>(j + 1);
    w[0][j] = 1.0;
    w[1][j] = x;
    w[2][j] = x * x;
  }
  a.build_generators(w);
  return a;
}

EHAnsatz EHAnsatz::bilocal_pairs(Sites interval_a, Sites interval_b, double delta, bool cross_links) {
  require(contiguous(interval_a) && contiguous(interval_b), "bilocal intervals must be contiguous blocks");
  require(interval_a.back() < interval_b.front(), "interval A must lie left of interval B without overlap");
  EHAnsatz a;
  a.variant_ = AnsatzVariant::BilocalPairs;
  a.interval_a_ = interval_a;
  a.interval_b_ = interval_b;
  a.geometry_ = interval_a;
  a.geometry_.insert(a.geometry_.end(), interval_b.begin(), interval_b.end());
  a.delta_ = delta;
  a.cross_ = cross_links;
  for (const Sites* iv : {&a.interval_a_, &a.interval_b_})
    for (std::size_t j = 0; j + 1 < iv->size(); ++j) a.pairs_.emplace_back((*iv)[j], (*iv)[j + 1]);
  if (cross_links)
    for (int i : a.interval_a_)
      for (int j : a.interval_b_) a.pairs_.emplace_back(i, j);
  require(!a.pairs_.empty(), "bilocal ansatz has no terms");
  std::vector<std::vector<double>> w;
  for (std::size_t k = 0; k < a.pairs_.size(); ++k) {
    std::vector<double> row(a.pairs_.size(), 0.0);
    row[k] = 1.0;
    w.push_back(std::move(row));
  }
  a.build_generators(w);
  return a;
}

RVector EHAnsatz::pair_coefficients(const RVector& params) const {
  require(params.size() == n_params(), "parameter count does not match the ansatz");
  if (variant_ != AnsatzVariant::PolynomialProfile) return params;
  RVector out(static_cast<Eigen::Index>(pairs_.size()));
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    const double x = static_cast<double>(j + 1);
    out(j) = params(0) + params(1) * x + params(2) * x * x;
  }
  return out;
}

RVector EHAnsatz::initial_guess() const {
  auto parabola = [](int links, int j) {  // j = 1..links, block length links+1
    const double l = links + 1;
    const double peak = std::floor(l / 2) * (l - std::floor(l / 2));
    return j * (l - j) / peak;
  };
  RVector x = RVector::Zero(n_params());
  const int links = n_sites() - 1;
  switch (variant_) {
    case AnsatzVariant::LocalLinks:
      for (int j = 1; j <= links; ++j) x(j - 1) = parabola(links, j);
      break;
    case AnsatzVariant::PolynomialProfile: {
      const double l = n_sites();
      const double peak = std::floor(l / 2) * (l - std::floor(l / 2));
      x << 0.0, l / peak, -1.0 / peak;
      break;
    }
    case AnsatzVariant::BilocalPairs: {
      Eigen::Index k = 0;
      for (const Sites* iv : {&interval_a_, &interval_b_}) {
        const int m = static_cast<int>(iv->size()) - 1;
        for (int j = 1; j <= m; ++j) x(k++) = parabola(m, j);
      }
      break;
    }
  }
  return x;
}

CMatrix build_eh(const EHAnsatz& ansatz, const RVector& params) {
  require(params.size() == ansatz.n_params(), "parameter count does not match the ansatz");
  const auto d = static_cast<Eigen::Index>(dim_of(ansatz.n_sites()));
  RMatrix h = RMatrix::Zero(d, d);
  for (int k = 0; k < ansatz.n_params(); ++k) h += params(k) * RMatrix(ansatz.generators()[static_cast<std::size_t>(k)]);
  return h.cast<cplx>();
}

GibbsState gibbs_state(const CMatrix& eh, Sites sites) {
  require(eh.rows() == eh.cols(), "entanglement Hamiltonian must be square");
  require(eh.rows() == static_cast<Eigen::Index>(dim_of(static_cast<int>(sites.size()))),
          "entanglement Hamiltonian dimension does not match the sites");
  require(static_cast<int>(sites.size()) <= kDenseSiteCap, "Gibbs state above the dense cap");
  require(hermiticity_defect(eh) <= 1e-10, "entanglement Hamiltonian is not Hermitian");
  GibbsState g;
  g.eh_matrix = 0.5 * (eh + eh.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(g.eh_matrix);
  g.eigenvalues = es.eigenvalues();
  g.eigenvectors = es.eigenvectors();
  const double lmin = g.eigenvalues(0);
  const RVector w = (-(g.eigenvalues.array() - lmin)).exp();
  const double z = w.sum();
  g.log_partition = std::log(z) - lmin;
  CMatrix rho = g.eigenvectors * (w / z).cast<cplx>().asDiagonal() * g.eigenvectors.adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  g.rho = {std::move(sites), std::move(rho)};
  return g;
}

RVector entanglement_spectrum(const GibbsState& gibbs) {
  return gibbs.eigenvalues.array() + gibbs.log_partition;
}

// ---------------------------------------------------------------- cost

ChiSquared::ChiSquared(const EHAnsatz& ansatz, const ProbabilityTable& data, NoiseParams noise)
    : ansatz_(ansatz), noise_(noise), n_(ansatz.n_sites()) {
  noise_.validate();
  require(data.sites == ansatz.geometry(), "probability table sites differ from the ansatz geometry");
  require(!data.axes.empty(), "no measurement settings to fit");
  std::map<std::string, int> slot;
  for (std::size_t k = 0; k < data.axes.size(); ++k) {
    require(data.probs[k].size() == static_cast<Eigen::Index>(dim_of(n_)), "probability vector has the wrong length");
    auto [it, inserted] = slot.emplace(data.axes[k], static_cast<int>(unique_axes_.size()));
    if (inserted) {
      unique_axes_.push_back(data.axes[k]);
      groups_.emplace_back();
      indices_.push_back(setting_pauli_indices(data.axes[k]));
    }
    groups_[static_cast<std::size_t>(it->second)].push_back(data.probs[k]);
  }
  transfer_ = pauli_transfer_matrix(noise_);
}

double ChiSquared::operator()(const RVector& params, RVector* grad) const {
  require(params.size() == ansatz_.n_params(), "parameter count does not match the ansatz");
  const auto d = static_cast<Eigen::Index>(dim_of(n_));
  const auto& gens = ansatz_.generators();

  RMatrix h = RMatrix::Zero(d, d);
  for (std::size_t k = 0; k < gens.size(); ++k) h += params(static_cast<Eigen::Index>(k)) * gens[k];
  Eigen::SelfAdjointEigenSolver<RMatrix> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed in the cost function", 0.0);
  const RVector lam = es.eigenvalues().array() - es.eigenvalues()(0);
  const RVector e = (-lam.array()).exp();
  const double z = e.sum();
  const RMatrix& v = es.eigenvectors();
  const RMatrix rho = v * (e / z).asDiagonal() * v.transpose();

  RVector c = pauli_expectations(rho.cast<cplx>(), n_);
  const bool noisy = !noise_.is_identity();
  if (noisy) apply_pauli_site_map(c, n_, transfer_);

  double chi2 = 0;
  RVector dc;
  if (grad) dc = RVector::Zero(c.size());
  for (std::size_t u = 0; u < unique_axes_.size(); ++u) {
    const RVector q = setting_probabilities(c, indices_[u], n_);
    RVector r = RVector::Zero(q.size());
    for (const RVector& p : groups_[u]) {
      const RVector diff = p - q;
      chi2 += diff.squaredNorm();
      r += diff;
    }
    if (grad) accumulate_setting_adjoint(-2.0 * r, indices_[u], n_, dc);
  }
  if (!grad) return chi2;

  // dchi2 = Tr(W drho) with W = sum_P dchi2/dc_P P.
  if (noisy) apply_pauli_site_map(dc, n_, transfer_.transpose());
  const RMatrix w = pauli_sum(dc, n_).real();
  const RMatrix wp = v.transpose() * w * v;
  RMatrix phi(d, d);
  for (Eigen::Index m = 0; m < d; ++m)
    for (Eigen::Index nn = 0; nn < d; ++nn) {
      const double gap = lam(nn) - lam(m);
      phi(m, nn) = std::abs(gap) < 1e-9 ? e(m) * (1.0 - 0.5 * gap) : e(m) * (-std::expm1(-gap) / gap);
    }
  const RMatrix b = v * phi.cwiseProduct(wp) * v.transpose();
  const double w_rho = w.cwiseProduct(rho).sum();
  grad->resize(params.size());
  for (std::size_t k = 0; k < gens.size(); ++k) {
    double tb = 0, tr = 0;
    for (Eigen::Index col = 0; col < gens[k].outerSize(); ++col)
      for (RSparse::InnerIterator it(gens[k], col); it; ++it) {
        tb += b(it.row(), it.col()) * it.value();
        tr += rho(it.row(), it.col()) * it.value();
      }
    (*grad)(static_cast<Eigen::Index>(k)) = -tb / z + w_rho * tr;
  }
  return chi2;
}

double chi_squared(const RVector& params, const MeasurementDataset& data, const EHAnsatz& ansatz,
                   const NoiseParams& noise) {
  return ChiSquared(ansatz, empirical_probabilities(data, ansatz.geometry()), noise)(params);
}

FitResult fit_eh(const ProbabilityTable& table, const EHAnsatz& ansatz, const NoiseParams& noise,
                 const FitOptions& opts) {
  const ChiSquared cost(ansatz, table, noise);
  RVector x0 = opts.init ? *opts.init : ansatz.initial_guess();
  require(x0.size() == ansatz.n_params(), "initial parameters have the wrong length");
  BfgsOptions bo;
  bo.max_iterations = opts.max_iterations;
  bo.gradient_tolerance = opts.gradient_tolerance;
  const BfgsResult r = minimize_bfgs([&cost](const RVector& x, RVector& g) { return cost(x, &g); }, x0, bo);
  FitResult fit;
  fit.variant = ansatz.variant();
  fit.geometry = ansatz.geometry();
  fit.beta = r.x;
  fit.chi2 = r.value;
  fit.iterations = r.iterations;
  fit.gradient_norm = r.gradient_norm;
  fit.converged = r.converged;
  fit.noise = noise;
  fit.xi = entanglement_spectrum(fitted_state(ansatz, fit));
  return fit;
}

FitResult fit_eh(const MeasurementDataset& data, const EHAnsatz& ansatz, const NoiseParams& noise,
                 const FitOptions& opts) {
  data.validate();
  FitResult fit = fit_eh(empirical_probabilities(data, ansatz.geometry()), ansatz, noise, opts);
  fit.data_tag = data.tag();
  return fit;
}

GibbsState fitted_state(const EHAnsatz& ansatz, const FitResult& fit) {
  return gibbs_state(build_eh(ansatz, fit.beta), ansatz.geometry());
}

}  // namespace ehtk
