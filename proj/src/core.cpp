#include "ehtk/core.hpp"

#include <algorithm>
#include <cmath>

namespace ehtk {

std::string index_to_bits(std::uint64_t index, int n_sites) {
  std::string s(static_cast<std::size_t>(n_sites), '0');
  for (int i = 0; i < n_sites; ++i)
    if (bit_at(index, n_sites, i)) s[static_cast<std::size_t>(i)] = '1';
  return s;
}

std::uint64_t bits_to_index(std::string_view bits) {
  std::uint64_t idx = 0;
  for (char c : bits) {
    require(c == '0' || c == '1', "bitstring contains a character other than 0/1");
    idx = (idx << 1) | static_cast<std::uint64_t>(c == '1');
  }
  return idx;
}

std::vector<int> positions_in(const Sites& reg, const Sites& subset) {
  std::vector<int> pos;
  pos.reserve(subset.size());
  for (int s : subset) {
    auto it = std::find(reg.begin(), reg.end(), s);
    require(it != reg.end(), "site " + std::to_string(s) + " is not part of the register");
    pos.push_back(static_cast<int>(it - reg.begin()));
  }
  return pos;
}

bool is_sorted_unique(const Sites& s) {
  return std::adjacent_find(s.begin(), s.end(), std::greater_equal<>()) == s.end();
}

namespace op {
Mat2 identity() { return Mat2::Identity(); }
Mat2 sx() {
  Mat2 m;
  m << 0, 0.5, 0.5, 0;
  return m;
}
Mat2 sy() {
  // S^y = (S^+ - S^-)/(2i); with S^+ = |up><down| at (1,0).
  Mat2 m;
  m << 0, cplx(0, 0.5), cplx(0, -0.5), 0;
  return m;
}
Mat2 sz() {
  Mat2 m;
  m << -0.5, 0, 0, 0.5;
  return m;
}
Mat2 splus() {
  Mat2 m;
  m << 0, 0, 1, 0;
  return m;
}
Mat2 sminus() {
  Mat2 m;
  m << 0, 1, 0, 0;
  return m;
}
Mat2 basis_rotation(char axis) {
  // In the (up, down) ordering these are H = [[1,1],[1,-1]]/sqrt2 and
  // [[1,-i],[1,i]]/sqrt2; conjugating by the swap gives the (down, up) form.
  const double r = 1.0 / std::sqrt(2.0);
  Mat2 m;
  switch (axis) {
    case 'Z': return Mat2::Identity();
    case 'X': m << -r, r, r, r; return m;
    case 'Y': m << cplx(0, r), r, cplx(0, -r), r; return m;
    default: throw ValidationError(std::string("unknown measurement axis '") + axis + "'");
  }
}
Mat2 pauli(char axis) {
  switch (axis) {
    case 'X': return 2.0 * sx();
    case 'Y': return 2.0 * sy();
    case 'Z': return 2.0 * sz();
    default: throw ValidationError(std::string("unknown Pauli axis '") + axis + "'");
  }
}
}  // namespace op

namespace {
// Scatter the bits of `local` (k bits, first site most significant) onto the
// chosen site positions of a full index.
std::uint64_t scatter(std::uint64_t local, int n_sites, const Sites& sites) {
  std::uint64_t out = 0;
  const int k = static_cast<int>(sites.size());
  for (int t = 0; t < k; ++t)
    if ((local >> (k - 1 - t)) & 1u) out |= std::uint64_t{1} << bit_of(n_sites, sites[t]);
  return out;
}

std::uint64_t gather(std::uint64_t full, int n_sites, const Sites& sites) {
  std::uint64_t out = 0;
  for (int s : sites) out = (out << 1) | ((full >> bit_of(n_sites, s)) & 1u);
  return out;
}

}  // namespace

std::uint64_t gather_bits(std::uint64_t full, int n_sites, const Sites& sites) {
  return gather(full, n_sites, sites);
}
std::uint64_t scatter_bits(std::uint64_t local, int n_sites, const Sites& sites) {
  return scatter(local, n_sites, sites);
}

Sites complement(int n_sites, const Sites& sites) {
  Sites out;
  for (int s = 0; s < n_sites; ++s)
    if (std::find(sites.begin(), sites.end(), s) == sites.end()) out.push_back(s);
  return out;
}

std::mt19937_64 make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> labels) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  for (auto l : labels) {
    words.push_back(static_cast<std::uint32_t>(l));
    words.push_back(static_cast<std::uint32_t>(l >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::map<std::uint64_t, long long> sample_histogram(const RVector& probs, long long shots,
                                                    std::mt19937_64& rng) {
  require(shots >= 1, "shots must be at least 1");
  std::vector<double> cdf(static_cast<std::size_t>(probs.size()));
  double acc = 0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += std::max(probs(i), 0.0);
    cdf[static_cast<std::size_t>(i)] = acc;
  }
  if (!(acc > 0)) throw NumericalError("cannot sample from an all-zero distribution", acc);
  std::map<std::uint64_t, long long> hist;
  for (long long k = 0; k < shots; ++k) {
    const double u = uniform01(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    // skip zero-probability bins sitting on the boundary
    while (it != cdf.begin() && *(it - 1) == *it) --it;
    ++hist[static_cast<std::uint64_t>(it - cdf.begin())];
  }
  return hist;
}

namespace {

void check_block(int n_sites, const Sites& sites, const CMatrix& block) {
  require(!sites.empty(), "operator block acts on no sites");
  for (int s : sites) require(s >= 0 && s < n_sites, "operator site outside the register");
  const auto k = static_cast<Eigen::Index>(dim_of(static_cast<int>(sites.size())));
  require(block.rows() == k && block.cols() == k, "operator block has the wrong dimension");
  for (std::size_t a = 0; a < sites.size(); ++a)
    for (std::size_t b = a + 1; b < sites.size(); ++b)
      require(sites[a] != sites[b], "operator block lists a site twice");
}

}  // namespace

void add_embedded(CMatrix& out, int n_sites, const Sites& sites, const CMatrix& block,
                  cplx coeff) {
  check_block(n_sites, sites, block);
  const std::uint64_t d = dim_of(n_sites);
  const auto k = static_cast<std::uint64_t>(block.rows());
  std::uint64_t mask = 0;
  for (int s : sites) mask |= std::uint64_t{1} << bit_of(n_sites, s);
  std::vector<std::uint64_t> spread(k);
  for (std::uint64_t l = 0; l < k; ++l) spread[l] = scatter(l, n_sites, sites);
  for (std::uint64_t col = 0; col < d; ++col) {
    const std::uint64_t lc = gather(col, n_sites, sites);
    const std::uint64_t rest = col & ~mask;
    for (std::uint64_t lr = 0; lr < k; ++lr) {
      const cplx v = block(static_cast<Eigen::Index>(lr), static_cast<Eigen::Index>(lc));
      if (v != cplx(0.0)) out(static_cast<Eigen::Index>(rest | spread[lr]), static_cast<Eigen::Index>(col)) += coeff * v;
    }
  }
}

CSparse embed_sparse(int n_sites, const Sites& sites, const CMatrix& block) {
  check_block(n_sites, sites, block);
  const std::uint64_t d = dim_of(n_sites);
  const auto k = static_cast<std::uint64_t>(block.rows());
  std::uint64_t mask = 0;
  for (int s : sites) mask |= std::uint64_t{1} << bit_of(n_sites, s);
  std::vector<Eigen::Triplet<cplx>> trips;
  for (std::uint64_t col = 0; col < d; ++col) {
    const std::uint64_t lc = gather(col, n_sites, sites);
    const std::uint64_t rest = col & ~mask;
    for (std::uint64_t lr = 0; lr < k; ++lr) {
      const cplx v = block(static_cast<Eigen::Index>(lr), static_cast<Eigen::Index>(lc));
      if (v != cplx(0.0))
        trips.emplace_back(static_cast<int>(rest | scatter(lr, n_sites, sites)), static_cast<int>(col), v);
    }
  }
  CSparse m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

void apply_site_left(CMatrix& m, int n_sites, int site, const Mat2& u) {
  const std::uint64_t d = dim_of(n_sites);
  const std::uint64_t bit = std::uint64_t{1} << bit_of(n_sites, site);
  for (std::uint64_t r = 0; r < d; ++r) {
    if (r & bit) continue;
    auto r0 = m.row(static_cast<Eigen::Index>(r));
    auto r1 = m.row(static_cast<Eigen::Index>(r | bit));
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const cplx a = r0(c), b = r1(c);
      r0(c) = u(0, 0) * a + u(0, 1) * b;
      r1(c) = u(1, 0) * a + u(1, 1) * b;
    }
  }
}

void apply_site_right_adjoint(CMatrix& m, int n_sites, int site, const Mat2& u) {
  const std::uint64_t d = dim_of(n_sites);
  const std::uint64_t bit = std::uint64_t{1} << bit_of(n_sites, site);
  const Mat2 ua = u.adjoint();
  for (std::uint64_t c = 0; c < d; ++c) {
    if (c & bit) continue;
    auto c0 = m.col(static_cast<Eigen::Index>(c));
    auto c1 = m.col(static_cast<Eigen::Index>(c | bit));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const cplx a = c0(r), b = c1(r);
      c0(r) = a * ua(0, 0) + b * ua(1, 0);
      c1(r) = a * ua(0, 1) + b * ua(1, 1);
    }
  }
}

void apply_site(CVector& v, int n_sites, int site, const Mat2& u) {
  const std::uint64_t d = dim_of(n_sites);
  const std::uint64_t bit = std::uint64_t{1} << bit_of(n_sites, site);
  for (std::uint64_t r = 0; r < d; ++r) {
    if (r & bit) continue;
    const auto i0 = static_cast<Eigen::Index>(r), i1 = static_cast<Eigen::Index>(r | bit);
    const cplx a = v(i0), b = v(i1);
    v(i0) = u(0, 0) * a + u(0, 1) * b;
    v(i1) = u(1, 0) * a + u(1, 1) * b;
  }
}

double hermiticity_defect(const CMatrix& h) {
  if (h.size() == 0) return 0.0;
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace ehtk
