// Site-local depolarizing + decay channel and its calibration from Z-basis
// magnetization statistics.
#pragma once

#include "ehtk/statekit.hpp"

#include <array>

namespace ehtk {

struct MeasurementDataset;

struct NoiseParams {
  double p1 = 0;  ///< depolarizing probability per site
  double p2 = 0;  ///< decay (up -> down) probability per site

  bool is_identity() const { return p1 == 0 && p2 == 0; }
  /// Throws ValidationError unless p1, p2 >= 0 and 1 - 3 p1/4 - p2 >= 0.
  void validate() const;
};

/// The five single-site Kraus operators E0..E4.
std::array<Mat2, 5> kraus_operators(const NoiseParams& params);

/// Applies the channel to every site of the register.
DensityMatrix apply_channel(const DensityMatrix& rho, const NoiseParams& params);
CMatrix apply_channel(const CMatrix& rho, int n_sites, const NoiseParams& params);
/// Heisenberg-picture (adjoint) channel: sum_k E_k^dagger W E_k on every site.
CMatrix adjoint_channel(const CMatrix& w, int n_sites, const NoiseParams& params);

/// Single-site transfer matrix R_PQ = Tr(P E(Q))/2 in (I, X, Y, Z) coordinates.
Eigen::Matrix4d pauli_transfer_matrix(const NoiseParams& params);

/// Flip probabilities of a Z-basis population: (up -> down, down -> up).
std::pair<double, double> flip_probabilities(const NoiseParams& params);

/// Mean and variance of the measured up-count for an input with a fixed
/// number of up (`n_up`) and down (`n_down`) spins.
std::pair<double, double> up_count_moments(const NoiseParams& params, int n_up, int n_down);

/// Solves the moment equations for (p1, p2) from the all-Z records of
/// `z_data`, assuming the noiseless state has magnetization label
/// `ideal_magnetization` (N_up - N_down) on the register.
NoiseParams calibrate_noise(const MeasurementDataset& z_data, int ideal_magnetization);

}  // namespace ehtk
