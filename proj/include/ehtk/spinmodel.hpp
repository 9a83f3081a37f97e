// XXZ chain, its link decomposition, and XY coupling matrices.
#pragma once

#include "ehtk/core.hpp"

#include <array>
#include <span>
#include <utility>

namespace ehtk {

/// Two-site term h_j acting on (first, second); 4x4 in the basis dd, du, ud, uu.
struct LinkTerm {
  std::pair<int, int> site_pair;
  Eigen::Matrix4cd matrix;
};

/// (J/2)(S+S- + S-S+) + J*Delta SzSz on two sites.
Eigen::Matrix4cd xxz_link_block(double j, double delta);

/// S_1.S_2 with the z component weighted by delta: SxSx + SySy + delta SzSz.
Eigen::Matrix4cd weighted_dot_block(double delta);

class SpinModel {
 public:
  SpinModel(int n_sites, double coupling_j, double anisotropy_delta);

  int n_sites() const { return n_; }
  double coupling_j() const { return j_; }
  double anisotropy_delta() const { return delta_; }
  const std::vector<LinkTerm>& links() const { return links_; }

  /// Dense Hamiltonian on the full chain (n_sites <= kDenseSiteCap).
  CMatrix hamiltonian() const;
  /// Real sparse Hamiltonian restricted to the sector with `n_up` up spins,
  /// in the basis returned by `sector_basis(n, n_up)`.
  RSparse sector_hamiltonian(int n_up) const;
  /// Matrix-free H|psi> on the full 2^N space.
  CVector apply(const CVector& psi) const;
  /// <psi|h_j|psi> for every link.
  std::vector<double> link_energies(const CVector& psi) const;

 private:
  int n_;
  double j_;
  double delta_;
  std::vector<LinkTerm> links_;
};

SpinModel build_xxz(int n, double j, double delta);

/// Computational-basis indices with exactly `n_up` up spins, ascending.
std::vector<std::uint64_t> sector_basis(int n_sites, int n_up);

/// Sector label m = N_up - N_down for a given up count.
inline int sector_label(int n_sites, int n_up) { return 2 * n_up - n_sites; }
/// Up count for label m; throws if m is not attainable on n_sites.
int up_count_for(int n_sites, int m);

/// Symmetric real N x N XY coupling matrix J_ij with zero diagonal.
struct CouplingMatrix {
  int n_sites = 0;
  RMatrix values;
};

CouplingMatrix power_law_couplings(int n, double j0, double alpha);

/// Trap and laser parameters; all frequencies are angular (rad/s).
struct TrapParams {
  int n_ions = 0;
  double omega_axial = 0;
  std::array<double, 2> omega_transverse{0, 0};  ///< both radial branches
  double omega_red = 0;    ///< detuning of the red tone
  double omega_blue = 0;   ///< detuning of the blue tone
  double omega_comp = 0;   ///< detuning of the compensation tone
  std::vector<double> rabi_red, rabi_blue, rabi_comp;
  double wavenumber = 0;   ///< 1/m
  double ion_mass = 0;     ///< kg
};

/// Equilibrium positions and transverse normal modes of a linear ion chain.
struct TrapModes {
  RVector positions;            ///< dimensionless, in units of the Coulomb length
  RVector frequencies;          ///< 2N transverse mode frequencies (rad/s)
  RMatrix amplitudes;           ///< N x 2N, column n = mode vector M^(n)
  double max_force_residual = 0;
};

/// Solves the dimensionless force balance u_i = sum_j sgn(u_i-u_j)/(u_i-u_j)^2.
RVector equilibrium_positions(int n_ions, double tolerance = 1e-12, int max_iterations = 200);
TrapModes trap_modes(const TrapParams& trap);
CouplingMatrix mode_sum_couplings(const TrapParams& trap);

/// Trap template reproducing the experiment's tone placement:
/// transverse COM at 2pi x 2.93 MHz and tones at +-(omega_COM + 2pi x 25 kHz).
TrapParams reference_trap(int n_ions, double omega_axial);

/// One term of an operator sum: coeff * (block on sites).
struct OperatorTerm {
  cplx coefficient{1.0};
  Sites sites;
  CMatrix block;
};

/// Sum of embedded terms as a dense 2^n x 2^n matrix (n <= kDenseSiteCap).
CMatrix assemble_operator(int n_sites, std::span<const OperatorTerm> terms);

/// Hamiltonian H_XY = sum_{i<j} J_ij (s+_i s-_j + h.c.) restricted to a
/// magnetization sector (real symmetric), in `sector_basis` order.
RSparse xy_sector_hamiltonian(const CouplingMatrix& couplings, int n_up);

}  // namespace ehtk
