// Shared numeric types, error types and bit/site helpers.
//
// Conventions used throughout the library:
//   * sites are 0-based; site 0 is the leftmost character of a bitstring and
//     the most significant bit of a computational-basis index;
//   * bit '1' is |up> (sigma^z = +1), bit '0' is |down>;
//   * single-site matrices are written in the (down, up) index order.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <initializer_list>
#include <map>
#include <random>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ehtk {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using CSparse = Eigen::SparseMatrix<cplx>;
using RSparse = Eigen::SparseMatrix<double>;
using Mat2 = Eigen::Matrix2cd;
using Sites = std::vector<int>;

/// Largest register (in sites) for which dense 2^L x 2^L matrices are built.
inline constexpr int kDenseSiteCap = 12;
/// Largest chain handled by full state vectors.
inline constexpr int kStateSiteCap = 20;

/// Bad input: wrong sizes, parameters outside their domain, malformed files.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to converge or produced an unusable result.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

inline std::size_t dim_of(int n_sites) { return std::size_t{1} << n_sites; }

/// Bit position of `site` inside an index over `n_sites` sites.
inline int bit_of(int n_sites, int site) { return n_sites - 1 - site; }

inline bool bit_at(std::uint64_t index, int n_sites, int site) {
  return (index >> bit_of(n_sites, site)) & 1u;
}

std::string index_to_bits(std::uint64_t index, int n_sites);
std::uint64_t bits_to_index(std::string_view bits);

/// Position of each requested site inside `reg`; throws if one is missing.
std::vector<int> positions_in(const Sites& reg, const Sites& subset);

bool is_sorted_unique(const Sites& s);

/// Extracts the bits of `full` at `sites` into a compact index (first site most significant).
std::uint64_t gather_bits(std::uint64_t full, int n_sites, const Sites& sites);
/// Inverse of gather_bits for the chosen sites (other bits zero).
std::uint64_t scatter_bits(std::uint64_t local, int n_sites, const Sites& sites);

/// Sites of 0..n_sites-1 not contained in `sites`.
Sites complement(int n_sites, const Sites& sites);

/// Independent RNG stream derived from a master seed and integer labels.
std::mt19937_64 make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> labels);
/// Uniform double in [0, 1) built from the top 53 bits of one draw.
double uniform01(std::mt19937_64& rng);
/// Draws `shots` outcomes from a discrete distribution and returns a histogram.
std::map<std::uint64_t, long long> sample_histogram(const RVector& probs, long long shots,
                                                    std::mt19937_64& rng);

/// Single-site operators in the (down, up) basis.
namespace op {
Mat2 identity();
Mat2 sx();  ///< spin-1/2 S^x
Mat2 sy();
Mat2 sz();
Mat2 splus();   ///< |up><down|
Mat2 sminus();  ///< |down><up|
Mat2 pauli(char axis);  ///< sigma^x/y/z for 'X','Y','Z'
/// Measurement rotation u^(axis): maps the +1 eigenstate of the Pauli axis
/// to |up> (bit 1) and the -1 eigenstate to |down>.
Mat2 basis_rotation(char axis);
}  // namespace op

/// Embeds `block` (acting on `sites`, first site most significant) into the
/// 2^n_sites space and accumulates `coeff * block` into `out`.
void add_embedded(CMatrix& out, int n_sites, const Sites& sites, const CMatrix& block,
                  cplx coeff = 1.0);
CSparse embed_sparse(int n_sites, const Sites& sites, const CMatrix& block);

/// Applies a single-site 2x2 matrix from the left (rows) of `m`.
void apply_site_left(CMatrix& m, int n_sites, int site, const Mat2& u);
/// Right-multiplies the columns of `m` by u^dagger on `site`.
void apply_site_right_adjoint(CMatrix& m, int n_sites, int site, const Mat2& u);
void apply_site(CVector& v, int n_sites, int site, const Mat2& u);

/// Hermitian-part check: max |H - H^dagger|.
double hermiticity_defect(const CMatrix& h);

}  // namespace ehtk
