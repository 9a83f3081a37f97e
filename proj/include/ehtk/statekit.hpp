// State preparation: eigenstates, variational circuits, heated states, and
// reduced density matrices.
#pragma once

#include "ehtk/core.hpp"
#include "ehtk/spinmodel.hpp"

#include <map>
#include <memory>
#include <optional>

namespace ehtk {

/// Normalized state vector over 2^n_sites computational-basis states.
class PureState {
 public:
  PureState() = default;
  /// Validates the dimension and the norm (1 within 1e-10).
  PureState(int n_sites, CVector amplitudes);

  static PureState basis_state(std::string_view bits);

  int n_sites() const { return n_; }
  const CVector& amplitudes() const { return amp_; }
  cplx amplitude(std::string_view bits) const;

  /// Global spin flip (tensor product of sigma^x on every site).
  PureState flipped() const;
  /// Sum_j <S^z_j>.
  double total_sz() const;
  /// Probability weight carried by each magnetization sector (label m -> weight).
  std::map<int, double> sector_weights() const;

 private:
  int n_ = 0;
  CVector amp_;
};

/// Hermitian, unit-trace, positive semidefinite matrix over `sites`.
struct DensityMatrix {
  Sites sites;
  CMatrix matrix;

  int n_sites() const { return static_cast<int>(sites.size()); }
  /// Throws ValidationError when the matrix violates the invariants.
  void validate(double tol = 1e-10) const;
  static DensityMatrix maximally_mixed(Sites sites);
  static DensityMatrix from_pure(const PureState& psi);
};

struct EigenPair {
  double energy = 0;
  PureState state;
};

PureState neel_state(int n);

/// Lowest eigenpair, optionally inside the sector with label m = N_up - N_down.
/// Without a sector the lowest over all sectors is returned; ties resolve to
/// the most negative m.
EigenPair ground_state(const SpinModel& model, std::optional<int> sector = std::nullopt);

/// Extremal eigenvalues of the model.
std::pair<double, double> spectral_bounds(const SpinModel& model);

/// Lowest `count` eigenpairs by deflation with projector weight `weight`
/// (default 10 x spectral range), optionally inside one sector.
std::vector<EigenPair> excited_states(const SpinModel& model, int count,
                                      std::optional<double> weight = std::nullopt,
                                      std::optional<int> sector = std::nullopt);

/// exp(-i theta H_XY) with H_XY = sum_{i<j} J_ij (s+_i s-_j + h.c.), evaluated
/// sector by sector. Small sectors cache an eigendecomposition so repeated
/// evolutions (circuits, VQE) are cheap.
class XYPropagator {
 public:
  explicit XYPropagator(CouplingMatrix couplings);
  CVector apply(const CVector& psi, double theta) const;
  int n_sites() const { return couplings_.n_sites; }

 private:
  struct Sector;
  const Sector& sector(int n_up) const;

  CouplingMatrix couplings_;
  mutable std::map<int, std::shared_ptr<const Sector>> cache_;
};

PureState apply_xy_evolution(const PureState& state, const CouplingMatrix& couplings, double theta);

/// exp(-i theta/2 sum_k sigma^z) over the odd 0-based sites (every second site).
PureState apply_z_rotation(const PureState& state, double theta);

/// Alternating circuit U_Z(t_M) U_XY(t_{M-1}) ... U_Z(t_2) U_XY(t_1); even
/// positions of `thetas` are XY layers. An optional heating quench
/// exp(-i theta_q H_XY) acts on the initial state first.
struct CircuitParams {
  std::vector<double> thetas;
  std::optional<double> heating_quench;
  void validate() const;
};

PureState run_circuit(const PureState& initial, const CircuitParams& params, const CouplingMatrix& couplings);
PureState run_circuit(const PureState& initial, const CircuitParams& params, const XYPropagator& propagator);

struct VqeOptions {
  int iterations = 200;
  double gain_a = 0.15;
  double gain_c = 0.1;
  /// Stability constant A; negative means 10% of the iteration budget.
  double stability = -1;
  std::optional<std::vector<double>> initial;
  /// Exact warm start on the leading `warm_start_sites` sites (0 disables).
  int warm_start_sites = 8;
  int warm_start_restarts = 12;
};

struct VqeResult {
  CircuitParams params;
  double best_energy = 0;           ///< estimate at the returned parameters
  std::vector<double> energy_trace; ///< per-iteration estimate at theta_k
};

/// Energy of `psi` estimated from `shots` samples in each of the global X, Y
/// and Z bases; shots == 0 returns the exact expectation value.
double estimate_energy(const SpinModel& model, const PureState& psi, int shots, std::uint64_t seed);

/// SPSA minimization of the shot-estimated energy of the Neel-initialized
/// circuit with `layers` (XY, Z) pairs. shots_per_basis == 0 uses exact
/// expectation values. Deterministic in `seed`.
VqeResult vqe_optimize(const SpinModel& model, const CouplingMatrix& couplings, int layers,
                       int shots_per_basis, std::uint64_t seed, const VqeOptions& opts = {});

/// Partial trace onto `sites` (sorted, unique, at most kDenseSiteCap).
DensityMatrix reduced_density_matrix(const PureState& state, const Sites& sites);
/// Partial trace of a density matrix onto a subset of its sites.
DensityMatrix reduced_density_matrix(const DensityMatrix& rho, const Sites& sites);

/// (rho + P rho P)/2 with P the product of sigma^x over the register.
DensityMatrix symmetrized_rdm(const DensityMatrix& rho);

}  // namespace ehtk
