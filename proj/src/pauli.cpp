#include "ehtk/pauli.hpp"

namespace ehtk {

namespace {

std::size_t pow4(int n) { return std::size_t{1} << (2 * n); }

// Applies a 4x4 matrix to base-4 digit `site` of a length-4^n vector.
template <class Vec, class Mat>
void apply_digit(Vec& v, int n, int site, const Mat& m) {
  const std::size_t stride = std::size_t{1} << (2 * (n - 1 - site));
  const std::size_t total = pow4(n);
  for (std::size_t hi = 0; hi < total; hi += 4 * stride)
    for (std::size_t lo = 0; lo < stride; ++lo) {
      const std::size_t b = hi + lo;
      const auto x0 = v[b], x1 = v[b + stride], x2 = v[b + 2 * stride], x3 = v[b + 3 * stride];
      for (int r = 0; r < 4; ++r)
        v[b + static_cast<std::size_t>(r) * stride] = m(r, 0) * x0 + m(r, 1) * x1 + m(r, 2) * x2 + m(r, 3) * x3;
    }
}

// Tr(rho P) = sum_ab rho_ab P_ba: row P holds P_ba at element digit 2a+b,
// in the (down, up) single-site ordering.
Eigen::Matrix4cd to_pauli() {
  const cplx i(0, 1);
  Eigen::Matrix4cd t;
  t << 1, 0, 0, 1,
       0, 1, 1, 0,
       0, -i, i, 0,
       -1, 0, 0, 1;
  return t;
}

}  // namespace

RVector pauli_expectations(const CMatrix& rho, int n_sites) {
  require(rho.rows() == static_cast<Eigen::Index>(dim_of(n_sites)) && rho.cols() == rho.rows(),
          "matrix dimension does not match the register");
  require(n_sites <= kDenseSiteCap, "register too large for Pauli coordinates");
  const std::size_t d = dim_of(n_sites);
  std::vector<cplx> v(pow4(n_sites));
  // Interleave row and column bits so each site owns one base-4 digit 2a+b.
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      std::size_t k = 0;
      for (int j = 0; j < n_sites; ++j) {
        const int sh = n_sites - 1 - j;
        k = (k << 2) | (((a >> sh) & 1u) << 1) | ((b >> sh) & 1u);
      }
      v[k] = rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
  const Eigen::Matrix4cd t = to_pauli();
  for (int j = 0; j < n_sites; ++j) apply_digit(v, n_sites, j, t);
  RVector c(static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) c(static_cast<Eigen::Index>(k)) = v[k].real();
  return c;
}

CMatrix pauli_sum(const RVector& w, int n_sites) {
  require(static_cast<std::size_t>(w.size()) == pow4(n_sites), "coefficient vector has the wrong length");
  std::vector<cplx> v(static_cast<std::size_t>(w.size()));
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = w(static_cast<Eigen::Index>(k));
  // Element digit 2a+b of P is P_ab = to_pauli()(P, 2b+a).
  const Eigen::Matrix4cd t = to_pauli();
  Eigen::Matrix4cd m;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int p = 0; p < 4; ++p) m(2 * a + b, p) = t(p, 2 * b + a);
  for (int j = 0; j < n_sites; ++j) apply_digit(v, n_sites, j, m);
  const std::size_t d = dim_of(n_sites);
  CMatrix out(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      std::size_t k = 0;
      for (int j = 0; j < n_sites; ++j) {
        const int sh = n_sites - 1 - j;
        k = (k << 2) | (((a >> sh) & 1u) << 1) | ((b >> sh) & 1u);
      }
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v[k];
    }
  return out;
}

void apply_pauli_site_map(RVector& c, int n_sites, const Eigen::Matrix4d& m) {
  require(static_cast<std::size_t>(c.size()) == pow4(n_sites), "coefficient vector has the wrong length");
  for (int j = 0; j < n_sites; ++j) apply_digit(c, n_sites, j, m);
}

std::vector<std::uint32_t> setting_pauli_indices(const std::string& axes) {
  const int n = static_cast<int>(axes.size());
  std::vector<std::uint32_t> idx(dim_of(n));
  for (std::size_t t = 0; t < idx.size(); ++t) {
    std::uint32_t k = 0;
    for (int j = 0; j < n; ++j) {
      std::uint32_t digit = 0;
      if ((t >> (n - 1 - j)) & 1u) {
        switch (axes[static_cast<std::size_t>(j)]) {
          case 'X': digit = 1; break;
          case 'Y': digit = 2; break;
          case 'Z': digit = 3; break;
          default: throw ValidationError("setting has an axis other than X/Y/Z");
        }
      }
      k = (k << 2) | digit;
    }
    idx[t] = k;
  }
  return idx;
}

namespace {

// In-place transform with the per-site kernel [[1, -1], [1, 1]] (rows: outcome
// 0/1, columns: identity / Pauli factor); `transpose` applies its transpose.
void sign_transform(RVector& v, int n, bool transpose) {
  const auto d = static_cast<std::size_t>(v.size());
  for (int j = 0; j < n; ++j) {
    const std::size_t bit = std::size_t{1} << (n - 1 - j);
    for (std::size_t x = 0; x < d; ++x) {
      if (x & bit) continue;
      const double a = v(static_cast<Eigen::Index>(x)), b = v(static_cast<Eigen::Index>(x | bit));
      if (!transpose) {
        v(static_cast<Eigen::Index>(x)) = a - b;
        v(static_cast<Eigen::Index>(x | bit)) = a + b;
      } else {
        v(static_cast<Eigen::Index>(x)) = a + b;
        v(static_cast<Eigen::Index>(x | bit)) = b - a;
      }
    }
  }
}

}  // namespace

RVector setting_probabilities(const RVector& c, const std::vector<std::uint32_t>& indices, int n_sites) {
  RVector g(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t t = 0; t < indices.size(); ++t) g(static_cast<Eigen::Index>(t)) = c(indices[t]);
  sign_transform(g, n_sites, false);
  return g / static_cast<double>(indices.size());
}

void accumulate_setting_adjoint(const RVector& r, const std::vector<std::uint32_t>& indices, int n_sites,
                                RVector& dc) {
  RVector g = r;
  sign_transform(g, n_sites, true);
  const double scale = 1.0 / static_cast<double>(indices.size());
  for (std::size_t t = 0; t < indices.size(); ++t) dc(indices[t]) += scale * g(static_cast<Eigen::Index>(t));
}

}  // namespace ehtk
