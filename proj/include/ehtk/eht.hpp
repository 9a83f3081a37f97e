// Entanglement-Hamiltonian ansatz families, Gibbs states, the least-squares
// cost against Pauli-basis data, and its minimization.
#pragma once

#include "ehtk/measurement.hpp"
#include "ehtk/noise.hpp"
#include "ehtk/optim.hpp"

#include <string>
#include <utility>
#include <vector>

namespace ehtk {

enum class AnsatzVariant { LocalLinks, PolynomialProfile, BilocalPairs };

std::string to_string(AnsatzVariant v);
AnsatzVariant variant_from_string(const std::string& s);

class EHAnsatz {
 public:
  /// One parameter per nearest-neighbour link of a contiguous block.
  static EHAnsatz local_links(Sites geometry, double delta);
  /// beta_j = q0 + q1 j + q2 j^2 on links j = 1..L-1.
  static EHAnsatz polynomial_profile(Sites geometry, double delta);
  /// Two disjoint contiguous intervals; one parameter per intra-interval
  /// link, plus one per (i in A, j in B) pair when `cross_links` is set.
  static EHAnsatz bilocal_pairs(Sites interval_a, Sites interval_b, double delta, bool cross_links);

  AnsatzVariant variant() const { return variant_; }
  const Sites& geometry() const { return geometry_; }
  double anisotropy_delta() const { return delta_; }
  int n_sites() const { return static_cast<int>(geometry_.size()); }
  int n_params() const { return static_cast<int>(generators_.size()); }
  bool cross_links() const { return cross_; }

  /// Site pairs (chain indices) coupled by each elementary term. For the
  /// polynomial family these are the links the profile is evaluated on.
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
  /// Real symmetric generator G_k with H = sum_k params_k G_k.
  const std::vector<RSparse>& generators() const { return generators_; }

  /// Coefficient of each elementary pair term for the given parameters.
  RVector pair_coefficients(const RVector& params) const;
  /// Default starting point: the discrete parabola j(L-j) scaled to max 1
  /// (per interval for the bilocal family, cross terms zero).
  RVector initial_guess() const;

 private:
  EHAnsatz() = default;
  void build_generators(const std::vector<std::vector<double>>& weights);

  AnsatzVariant variant_ = AnsatzVariant::LocalLinks;
  Sites geometry_;
  Sites interval_a_, interval_b_;
  double delta_ = 1.0;
  bool cross_ = false;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<RSparse> generators_;
};

/// Sum_k params_k G_k as a dense matrix over the ansatz register.
CMatrix build_eh(const EHAnsatz& ansatz, const RVector& params);

/// rho = exp(-H)/Z with cached eigendecomposition.
struct GibbsState {
  CMatrix eh_matrix;
  DensityMatrix rho;
  double log_partition = 0;
  RVector eigenvalues;    ///< of eh_matrix, ascending
  CMatrix eigenvectors;
};

/// Throws ValidationError when `eh` is not Hermitian within 1e-10.
GibbsState gibbs_state(const CMatrix& eh, Sites sites);

/// xi_a = eigenvalues of H + log Z, ascending.
RVector entanglement_spectrum(const GibbsState& gibbs);

/// Forward model and cost over a fixed probability table. Precomputes the
/// distinct restricted settings once so repeated evaluations are cheap.
class ChiSquared {
 public:
  ChiSquared(const EHAnsatz& ansatz, const ProbabilityTable& data, NoiseParams noise);

  /// Cost; writes the analytic gradient when `grad` is non-null.
  double operator()(const RVector& params, RVector* grad = nullptr) const;
  const EHAnsatz& ansatz() const { return ansatz_; }

 private:
  EHAnsatz ansatz_;
  NoiseParams noise_;
  int n_ = 0;
  Eigen::Matrix4d transfer_;
  std::vector<std::string> unique_axes_;
  std::vector<std::vector<std::uint32_t>> indices_;
  std::vector<std::vector<RVector>> groups_;  ///< data vectors sharing a restriction
};

double chi_squared(const RVector& params, const MeasurementDataset& data, const EHAnsatz& ansatz,
                   const NoiseParams& noise);

struct FitResult {
  AnsatzVariant variant = AnsatzVariant::LocalLinks;
  Sites geometry;
  RVector beta;
  double chi2 = 0;
  int iterations = 0;
  double gradient_norm = 0;
  bool converged = false;
  NoiseParams noise;
  RVector xi;        ///< entanglement spectrum of the noiseless rho(beta)
  DataTag data_tag;  ///< dataset the fit used
};

struct FitOptions {
  std::optional<RVector> init;
  int max_iterations = 2000;
  double gradient_tolerance = 1e-8;
};

FitResult fit_eh(const MeasurementDataset& data, const EHAnsatz& ansatz, const NoiseParams& noise,
                 const FitOptions& opts = {});
/// Fit against a probability table (e.g. exact Born probabilities).
FitResult fit_eh(const ProbabilityTable& table, const EHAnsatz& ansatz, const NoiseParams& noise,
                 const FitOptions& opts = {});

/// Gibbs state of a fit's noiseless ansatz.
GibbsState fitted_state(const EHAnsatz& ansatz, const FitResult& fit);

}  // namespace ehtk
