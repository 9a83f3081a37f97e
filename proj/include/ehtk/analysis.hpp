// Entropies, fidelities, sample-based overlap estimators, reference
// temperature profiles and entropy-scaling diagnostics.
#pragma once

#include "ehtk/eht.hpp"

#include <string>
#include <vector>

namespace ehtk {

/// -Tr(rho log rho) in nats; eigenvalues below 1e-14 are skipped.
double vn_entropy(const DensityMatrix& rho);
double vn_entropy(const CMatrix& rho);
/// <H> + log Z of a Gibbs state.
double entropy_from_eh(const GibbsState& gibbs);

double mutual_information(const DensityMatrix& rho_ab, const DensityMatrix& rho_a, const DensityMatrix& rho_b);

/// (Tr sqrt(sqrt(r1) r2 sqrt(r1)))^2, clipped to [0, 1].
double uhlmann_fidelity(const CMatrix& rho1, const CMatrix& rho2);
double uhlmann_fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2);

/// Per-setting terms of the Hamming-kernel overlap estimator; their mean
/// times 2^L estimates Tr(rho1 rho2).
RVector hs_overlap_terms(const ProbabilityTable& p1, const ProbabilityTable& p2);
/// (2^L / N_settings) sum_a sum_{s,s'} (-2)^{-D[s,s']} P1_a(s) P2_a(s').
double hs_overlap_from_samples(const ProbabilityTable& p1, const ProbabilityTable& p2);

struct HsFidelities {
  double f_max = 0;
  double f_mean = 0;
};
HsFidelities hs_fidelities(double t11, double t22, double t12);

struct WindowFidelity {
  int window_start = 0;  ///< first chain site of the window
  double f_max = 0;
  double f_mean = 0;
  double err = 0;        ///< jackknife error of f_mean over settings
};

struct WindowedFidelity {
  double f_max = 0;   ///< averaged over windows
  double f_mean = 0;
  std::vector<WindowFidelity> windows;
};

/// Cross-checks a fitted state against independent data on every contiguous
/// `window`-site block of its register. The holdout is split in two halves
/// for the unbiased purity estimate. Refuses a holdout that carries the fit
/// dataset's tag.
WindowedFidelity windowed_fidelity(const GibbsState& fitted, const MeasurementDataset& holdout, int window = 5,
                                   const std::optional<DataTag>& fit_tag = std::nullopt);

// ---------------------------------------------------------------- profiles

enum class ProfileKind { BwHalfSpace, CftBall, DiracLocal, DiracBilocal };

std::string to_string(ProfileKind k);
ProfileKind profile_kind_from_string(const std::string& s);

struct ProfileGeometry {
  double radius = 1;  ///< R for the ball
  double a = 0;       ///< inner edge of the two intervals (+-a, +-b)
  double b = 1;
};

struct ReferenceProfile {
  ProfileKind kind = ProfileKind::BwHalfSpace;
  ProfileGeometry geometry;
  std::vector<double> x;
  std::vector<double> values;
};

/// Continuum formulas: 2 pi x, 2 pi (R^2 - x^2)/(2R), and the massless Dirac
/// two-interval local / bilocal weights. The Dirac forms are odd-symmetric
/// in x and evaluated with |x|.
double profile_value(ProfileKind kind, const ProfileGeometry& g, double x);
ReferenceProfile reference_profile(ProfileKind kind, const ProfileGeometry& g, const std::vector<double>& x);

/// Lattice forms: n for the half space, n (L - n) for a block of L sites,
/// evaluated on links n = 1..L-1.
std::vector<double> lattice_bw_profile(int links);
std::vector<double> lattice_cft_profile(int block_length);

/// Location of the maximum of the local Dirac weight on (a, b) by grid search.
double dirac_local_peak(const ProfileGeometry& g, int grid = 100000);

/// Least-squares fit of y = c0 + c1 x + c2 x^2 and its R^2.
struct QuadraticFit {
  double c0 = 0, c1 = 0, c2 = 0;
  double r_squared = 0;
};
QuadraticFit fit_quadratic(const std::vector<double>& x, const std::vector<double>& y);
/// R^2 of the best scaled match y ~ s * ref (through the origin).
double scaled_match_r2(const std::vector<double>& y, const std::vector<double>& ref);

// ---------------------------------------------------------------- scaling

struct ScalingPoint {
  int subsystem_size = 0;
  double entropy = 0;  ///< nats
};

struct EntropyScaling {
  std::vector<ScalingPoint> points;
  double slope = 0;  ///< nats per site
  std::string classification;  ///< "area-like", "volume-like" or "intermediate"
};

/// Least-squares slope of S vs L_A; area-like when slope <= 0.05 log 2,
/// volume-like when slope >= 0.5 log 2.
EntropyScaling entropy_scaling(std::vector<ScalingPoint> points);

// ---------------------------------------------------------------- Schmidt vectors

struct SchmidtEnergyProfile {
  std::vector<std::pair<int, int>> links;    ///< chain links inside the subsystem
  std::vector<double> global;                ///< <psi|h_j|psi>
  std::vector<double> weights;               ///< Schmidt weights e^{-xi}
  std::vector<std::vector<double>> vectors;  ///< <Phi_a|h_j|Phi_a> per leading vector
  std::vector<std::vector<double>> differences;  ///< |vector - global|
};

/// Energy density of the leading `n_vectors` Schmidt vectors of a contiguous
/// subsystem, compared with that of the full state.
SchmidtEnergyProfile schmidt_energy_profile(const SpinModel& model, const PureState& state, const Sites& subsystem,
                                            int n_vectors);

}  // namespace ehtk
