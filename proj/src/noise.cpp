#include "ehtk/noise.hpp"

#include "ehtk/measurement.hpp"

#include <algorithm>
#include <cmath>

namespace ehtk {

void NoiseParams::validate() const {
  require(std::isfinite(p1) && std::isfinite(p2), "noise rates must be finite");
  require(p1 >= 0 && p2 >= 0, "noise rates must be non-negative");
  require(p2 <= 1, "decay probability must not exceed 1");
  require(1.0 - 0.75 * p1 - p2 >= -1e-15, "noise rates leave E0 without a real square root (1 - 3p1/4 - p2 < 0)");
}

std::array<Mat2, 5> kraus_operators(const NoiseParams& params) {
  params.validate();
  std::array<Mat2, 5> e;
  const double s = std::sqrt(params.p1 / 4.0);
  e[0] = Mat2::Zero();
  // (down, up) ordering: decay acts only on |up>.
  e[0](0, 0) = std::sqrt(1.0 - 0.75 * params.p1);
  e[0](1, 1) = std::sqrt(std::max(0.0, 1.0 - 0.75 * params.p1 - params.p2));
  e[1] = s * op::pauli('X');
  e[2] = s * op::pauli('Y');
  e[3] = s * op::pauli('Z');
  e[4] = Mat2::Zero();
  e[4](0, 1) = std::sqrt(params.p2);
  return e;
}

namespace {

CMatrix site_map(const CMatrix& rho, int n, int site, const std::array<Mat2, 5>& kraus, bool adjoint) {
  CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
  for (const Mat2& k : kraus) {
    if (k.isZero(0)) continue;
    const Mat2 a = adjoint ? Mat2(k.adjoint()) : k;
    CMatrix t = rho;
    apply_site_left(t, n, site, a);
    apply_site_right_adjoint(t, n, site, a);
    out += t;
  }
  return out;
}

}  // namespace

CMatrix apply_channel(const CMatrix& rho, int n_sites, const NoiseParams& params) {
  const auto kraus = kraus_operators(params);
  if (params.is_identity()) return rho;
  CMatrix out = rho;
  for (int s = 0; s < n_sites; ++s) out = site_map(out, n_sites, s, kraus, false);
  return out;
}

DensityMatrix apply_channel(const DensityMatrix& rho, const NoiseParams& params) {
  return {rho.sites, apply_channel(rho.matrix, rho.n_sites(), params)};
}

CMatrix adjoint_channel(const CMatrix& w, int n_sites, const NoiseParams& params) {
  const auto kraus = kraus_operators(params);
  if (params.is_identity()) return w;
  CMatrix out = w;
  for (int s = 0; s < n_sites; ++s) out = site_map(out, n_sites, s, kraus, true);
  return out;
}

Eigen::Matrix4d pauli_transfer_matrix(const NoiseParams& params) {
  const auto kraus = kraus_operators(params);
  const Mat2 basis[4] = {Mat2::Identity(), op::pauli('X'), op::pauli('Y'), op::pauli('Z')};
  Eigen::Matrix4d r;
  for (int q = 0; q < 4; ++q) {
    Mat2 out = Mat2::Zero();
    for (const Mat2& k : kraus) out += k * basis[q] * k.adjoint();
    for (int p = 0; p < 4; ++p) r(p, q) = 0.5 * (basis[p] * out).trace().real();
  }
  return r;
}

std::pair<double, double> flip_probabilities(const NoiseParams& params) {
  return {0.5 * params.p1 + params.p2, 0.5 * params.p1};
}

std::pair<double, double> up_count_moments(const NoiseParams& params, int n_up, int n_down) {
  const auto [qu, qd] = flip_probabilities(params);
  const double mean = n_up * (1 - qu) + n_down * qd;
  const double var = n_up * qu * (1 - qu) + n_down * qd * (1 - qd);
  return {mean, var};
}

NoiseParams calibrate_noise(const MeasurementDataset& z_data, int ideal_magnetization) {
  const int n = static_cast<int>(z_data.register_sites.size());
  require(n >= 1, "calibration data has an empty register");
  require((n + ideal_magnetization) % 2 == 0 && std::abs(ideal_magnetization) < n,
          "ideal magnetization must be attainable and leave both up and down spins");
  const int n_up = (n + ideal_magnetization) / 2, n_down = n - n_up;

  double w = 0, s1 = 0, s2 = 0;
  const std::string all_z(static_cast<std::size_t>(n), 'Z');
  for (const auto& rec : z_data.records) {
    if (rec.axes != all_z) continue;
    for (const auto& [bits, c] : rec.counts) {
      const double u = static_cast<double>(std::count(bits.begin(), bits.end(), '1'));
      w += c;
      s1 += c * u;
      s2 += c * u * u;
    }
  }
  require(w >= 2, "calibration needs at least two all-Z shots");
  const double mean = s1 / w;
  const double var = (s2 - w * mean * mean) / (w - 1);

  // Newton iteration in the flip probabilities (qu, qd).
  double qu = 0.01, qd = 0.01;
  double residual = 0;
  for (int it = 0; it < 100; ++it) {
    const double f1 = n_up * (1 - qu) + n_down * qd - mean;
    const double f2 = n_up * qu * (1 - qu) + n_down * qd * (1 - qd) - var;
    residual = std::hypot(f1, f2);
    if (residual < 1e-13) break;
    Eigen::Matrix2d jac;
    jac << -n_up, n_down, n_up * (1 - 2 * qu), n_down * (1 - 2 * qd);
    const Eigen::Vector2d step = jac.fullPivLu().solve(Eigen::Vector2d(f1, f2));
    qu -= step(0);
    qd -= step(1);
  }
  if (residual > 1e-9) throw NumericalError("noise calibration: moment equations did not converge", residual);

  NoiseParams p{2 * qd, qu - qd};
  // Sampling noise can push a vanishing rate slightly negative.
  constexpr double kClamp = 5e-3;
  if (p.p1 < 0 && p.p1 > -kClamp) p.p1 = 0;
  if (p.p2 < 0 && p.p2 > -kClamp) p.p2 = 0;
  if (p.p1 < 0 || p.p2 < 0 || 1.0 - 0.75 * p.p1 - p.p2 < 0)
    throw NumericalError("noise calibration: no solution inside the valid parameter region",
                         std::min({p.p1, p.p2, 1.0 - 0.75 * p.p1 - p.p2}));
  return p;
}

}  // namespace ehtk
