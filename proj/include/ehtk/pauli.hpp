// Pauli-string coordinates of operators on a small register.
//
// Coefficient vectors have length 4^L; site j contributes a base-4 digit
// (I=0, X=1, Y=2, Z=3), site 0 most significant.
#pragma once

#include "ehtk/core.hpp"

#include <string>
#include <vector>

namespace ehtk {

/// c_P = Tr(rho P) for every Pauli string P.
RVector pauli_expectations(const CMatrix& rho, int n_sites);
/// sum_P w_P P as a dense matrix.
CMatrix pauli_sum(const RVector& w, int n_sites);

/// Applies a per-site 4x4 map (in I, X, Y, Z coordinates) to every site.
void apply_pauli_site_map(RVector& c, int n_sites, const Eigen::Matrix4d& m);

/// Index of the Pauli string that places the axes of `axes` on the subset
/// t of sites (bit j of t, site 0 most significant) and identity elsewhere.
std::vector<std::uint32_t> setting_pauli_indices(const std::string& axes);

/// Born table of a setting from Pauli expectations c (length 4^L).
RVector setting_probabilities(const RVector& c, const std::vector<std::uint32_t>& indices, int n_sites);
/// Adjoint of setting_probabilities: accumulates sum_s r(s) d q(s)/d c into dc.
void accumulate_setting_adjoint(const RVector& r, const std::vector<std::uint32_t>& indices, int n_sites,
                                RVector& dc);

}  // namespace ehtk
