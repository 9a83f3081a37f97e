#include "ehtk/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace ehtk {

double vn_entropy(const CMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
  double s = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = es.eigenvalues()(i);
    if (l > 1e-14) s -= l * std::log(l);
  }
  return s;
}

double vn_entropy(const DensityMatrix& rho) { return vn_entropy(rho.matrix); }

double entropy_from_eh(const GibbsState& gibbs) {
  return (gibbs.rho.matrix * gibbs.eh_matrix).trace().real() + gibbs.log_partition;
}

double mutual_information(const DensityMatrix& rho_ab, const DensityMatrix& rho_a, const DensityMatrix& rho_b) {
  require(rho_a.n_sites() + rho_b.n_sites() == rho_ab.n_sites(), "subsystem sizes do not add up");
  return vn_entropy(rho_a) + vn_entropy(rho_b) - vn_entropy(rho_ab);
}

namespace {

CMatrix psd_sqrt(const CMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (rho + rho.adjoint()));
  const RVector s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * s.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double uhlmann_fidelity(const CMatrix& rho1, const CMatrix& rho2) {
  require(rho1.rows() == rho2.rows() && rho1.cols() == rho2.cols(), "density matrices differ in dimension");
  const CMatrix s = psd_sqrt(rho1);
  const CMatrix m = s * rho2 * s;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  const double tr = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(tr * tr, 0.0, 1.0);
}

double uhlmann_fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  return uhlmann_fidelity(rho1.matrix, rho2.matrix);
}

RVector hs_overlap_terms(const ProbabilityTable& p1, const ProbabilityTable& p2) {
  require(p1.sites.size() == p2.sites.size(), "probability tables cover different registers");
  require(p1.axes == p2.axes, "probability tables cover different settings");
  require(!p1.axes.empty(), "probability tables are empty");
  const int n = static_cast<int>(p1.sites.size());
  const auto d = static_cast<std::size_t>(dim_of(n));
  RVector terms(static_cast<Eigen::Index>(p1.axes.size()));
  for (std::size_t a = 0; a < p1.axes.size(); ++a) {
    // Apply the per-site kernel [[1, -1/2], [-1/2, 1]] to P2.
    RVector k = p2.probs[a];
    for (int j = 0; j < n; ++j) {
      const std::size_t bit = std::size_t{1} << (n - 1 - j);
      for (std::size_t x = 0; x < d; ++x) {
        if (x & bit) continue;
        const double u = k(static_cast<Eigen::Index>(x)), v = k(static_cast<Eigen::Index>(x | bit));
        k(static_cast<Eigen::Index>(x)) = u - 0.5 * v;
        k(static_cast<Eigen::Index>(x | bit)) = v - 0.5 * u;
      }
    }
    terms(static_cast<Eigen::Index>(a)) = static_cast<double>(d) * p1.probs[a].dot(k);
  }
  return terms;
}

double hs_overlap_from_samples(const ProbabilityTable& p1, const ProbabilityTable& p2) {
  return hs_overlap_terms(p1, p2).mean();
}

HsFidelities hs_fidelities(double t11, double t22, double t12) {
  require(t11 > 0 && t22 > 0, "purities must be positive");
  return {t12 / std::max(t11, t22), t12 / std::sqrt(t11 * t22)};
}

WindowedFidelity windowed_fidelity(const GibbsState& fitted, const MeasurementDataset& holdout, int window,
                                   const std::optional<DataTag>& fit_tag) {
  if (fit_tag)
    require(!(holdout.tag() == *fit_tag), "holdout dataset is the fit dataset; verification needs independent data");
  holdout.validate();
  const Sites& geom = fitted.rho.sites;
  const int l = static_cast<int>(geom.size());
  require(window >= 1 && window <= l, "window must lie in [1, subsystem size]");
  const auto [half0, half1] = split_dataset(holdout, holdout.seed ^ 0x5eedf00dULL);

  WindowedFidelity out;
  for (int start = 0; start + window <= l; ++start) {
    const Sites sites(geom.begin() + start, geom.begin() + start + window);
    const DensityMatrix model = reduced_density_matrix(fitted.rho, sites);
    const ProbabilityTable p = empirical_probabilities(holdout, sites);
    const ProbabilityTable pa = empirical_probabilities(half0, sites);
    const ProbabilityTable pb = empirical_probabilities(half1, sites);
    const ProbabilityTable q = exact_probabilities(model, p.axes);
    const RVector c11 = hs_overlap_terms(pa, pb);
    const RVector c12 = hs_overlap_terms(p, q);
    const double t22 = (model.matrix * model.matrix).trace().real();
    const auto n = static_cast<double>(c11.size());
    const double t11 = c11.mean(), t12 = c12.mean();
    require(t11 > 0, "estimated purity of the holdout data is not positive");
    const HsFidelities f = hs_fidelities(t11, t22, t12);

    // Leave-one-setting-out jackknife for f_mean.
    double err = 0;
    if (c11.size() > 1) {
      std::vector<double> loo(static_cast<std::size_t>(c11.size()));
      for (Eigen::Index k = 0; k < c11.size(); ++k) {
        const double a = (c11.sum() - c11(k)) / (n - 1), b = (c12.sum() - c12(k)) / (n - 1);
        loo[static_cast<std::size_t>(k)] = a > 0 ? b / std::sqrt(a * t22) : f.f_mean;
      }
      const double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / n;
      for (double v : loo) err += (v - mean) * (v - mean);
      err = std::sqrt((n - 1) / n * err);
    }
    out.windows.push_back({geom[static_cast<std::size_t>(start)], f.f_max, f.f_mean, err});
  }
  for (const auto& w : out.windows) {
    out.f_max += w.f_max;
    out.f_mean += w.f_mean;
  }
  out.f_max /= static_cast<double>(out.windows.size());
  out.f_mean /= static_cast<double>(out.windows.size());
  return out;
}

// ---------------------------------------------------------------- profiles

std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::BwHalfSpace: return "bw-half-space";
    case ProfileKind::CftBall: return "cft-ball";
    case ProfileKind::DiracLocal: return "dirac-two-interval-local";
    case ProfileKind::DiracBilocal: return "dirac-two-interval-bilocal";
  }
  return "?";
}

ProfileKind profile_kind_from_string(const std::string& s) {
  for (auto k : {ProfileKind::BwHalfSpace, ProfileKind::CftBall, ProfileKind::DiracLocal, ProfileKind::DiracBilocal})
    if (to_string(k) == s) return k;
  throw ValidationError("unknown profile kind '" + s + "'");
}

double profile_value(ProfileKind kind, const ProfileGeometry& g, double x) {
  constexpr double two_pi = 2 * std::numbers::pi;
  switch (kind) {
    case ProfileKind::BwHalfSpace: return x > 0 ? two_pi * x : 0.0;
    case ProfileKind::CftBall:
      require(g.radius > 0, "ball radius must be positive");
      return std::abs(x) <= g.radius ? two_pi * (g.radius * g.radius - x * x) / (2 * g.radius) : 0.0;
    case ProfileKind::DiracLocal:
    case ProfileKind::DiracBilocal: {
      require(g.a > 0 && g.b > g.a, "two-interval geometry needs 0 < a < b");
      const double y = std::abs(x);
      if (y <= g.a || y >= g.b) return 0.0;
      const double loc = (g.b * g.b - y * y) * (y * y - g.a * g.a) / (2 * (g.b - g.a) * (g.a * g.b + y * y));
      if (kind == ProfileKind::DiracLocal) return loc;
      return g.a * g.b / (y * (g.a * g.b + y * y)) * loc;
    }
  }
  return 0.0;
}

ReferenceProfile reference_profile(ProfileKind kind, const ProfileGeometry& g, const std::vector<double>& x) {
  ReferenceProfile p{kind, g, x, {}};
  p.values.reserve(x.size());
  for (double xi : x) p.values.push_back(profile_value(kind, g, xi));
  return p;
}

std::vector<double> lattice_bw_profile(int links) {
  std::vector<double> v;
  for (int n = 1; n <= links; ++n) v.push_back(n);
  return v;
}

std::vector<double> lattice_cft_profile(int block_length) {
  std::vector<double> v;
  for (int n = 1; n < block_length; ++n) v.push_back(static_cast<double>(n) * (block_length - n));
  return v;
}

double dirac_local_peak(const ProfileGeometry& g, int grid) {
  require(grid >= 2, "grid needs at least two points");
  double best_x = g.a, best = -1;
  for (int i = 1; i < grid; ++i) {
    const double x = g.a + (g.b - g.a) * i / grid;
    const double v = profile_value(ProfileKind::DiracLocal, g, x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  return best_x;
}

QuadraticFit fit_quadratic(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 3, "quadratic fit needs at least three points");
  const auto n = static_cast<Eigen::Index>(x.size());
  RMatrix a(n, 3);
  RVector b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    a.row(i) << 1.0, xi, xi * xi;
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const RVector c = a.colPivHouseholderQr().solve(b);
  const double ss_res = (a * c - b).squaredNorm();
  const double ss_tot = (b.array() - b.mean()).square().sum();
  return {c(0), c(1), c(2), ss_tot > 0 ? 1.0 - ss_res / ss_tot : (ss_res == 0 ? 1.0 : 0.0)};
}

double scaled_match_r2(const std::vector<double>& y, const std::vector<double>& ref) {
  require(y.size() == ref.size() && !y.empty(), "profiles differ in length");
  double yr = 0, rr = 0, mean = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    yr += y[i] * ref[i];
    rr += ref[i] * ref[i];
    mean += y[i];
  }
  mean /= static_cast<double>(y.size());
  const double s = rr > 0 ? yr / rr : 0.0;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - s * ref[i]) * (y[i] - s * ref[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  return ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0;
}

EntropyScaling entropy_scaling(std::vector<ScalingPoint> points) {
  require(points.size() >= 3, "entropy scaling needs at least three subsystem sizes");
  std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.subsystem_size < b.subsystem_size; });
  double mx = 0, my = 0;
  for (const auto& p : points) {
    mx += p.subsystem_size;
    my += p.entropy;
  }
  const auto n = static_cast<double>(points.size());
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (const auto& p : points) {
    sxy += (p.subsystem_size - mx) * (p.entropy - my);
    sxx += (p.subsystem_size - mx) * (p.subsystem_size - mx);
  }
  require(sxx > 0, "entropy scaling needs distinct subsystem sizes");
  EntropyScaling out{std::move(points), sxy / sxx, {}};
  const double ln2 = std::numbers::ln2;
  out.classification = out.slope <= 0.05 * ln2 ? "area-like" : out.slope >= 0.5 * ln2 ? "volume-like" : "intermediate";
  return out;
}

SchmidtEnergyProfile schmidt_energy_profile(const SpinModel& model, const PureState& state, const Sites& subsystem,
                                            int n_vectors) {
  require(model.n_sites() == state.n_sites(), "model and state disagree on the number of sites");
  require(n_vectors >= 1, "need at least one Schmidt vector");
  const DensityMatrix rho = reduced_density_matrix(state, subsystem);
  const int l = rho.n_sites();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.matrix);
  const Eigen::Index d = es.eigenvalues().size();
  const int count = static_cast<int>(std::min<Eigen::Index>(n_vectors, d));

  SchmidtEnergyProfile out;
  const CMatrix block = xxz_link_block(model.coupling_j(), model.anisotropy_delta());
  std::vector<CMatrix> h;
  for (int p = 0; p + 1 < l; ++p) {
    if (subsystem[static_cast<std::size_t>(p + 1)] != subsystem[static_cast<std::size_t>(p)] + 1) continue;
    out.links.emplace_back(subsystem[static_cast<std::size_t>(p)], subsystem[static_cast<std::size_t>(p + 1)]);
    CMatrix m = CMatrix::Zero(d, d);
    add_embedded(m, l, {p, p + 1}, block);
    h.push_back(std::move(m));
  }
  for (const auto& m : h) out.global.push_back((rho.matrix * m).trace().real());
  for (int k = 0; k < count; ++k) {
    const Eigen::Index col = d - 1 - k;  // eigenvalues ascending
    const CVector phi = es.eigenvectors().col(col);
    out.weights.push_back(std::max(0.0, es.eigenvalues()(col)));
    std::vector<double> e, diff;
    for (std::size_t j = 0; j < h.size(); ++j) {
      e.push_back(phi.dot(h[j] * phi).real());
      diff.push_back(std::abs(e.back() - out.global[j]));
    }
    out.vectors.push_back(std::move(e));
    out.differences.push_back(std::move(diff));
  }
  return out;
}

}  // namespace ehtk
