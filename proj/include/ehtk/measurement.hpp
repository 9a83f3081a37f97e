// Pauli measurement settings, shot sampling, Z2 data symmetrization and
// empirical probability tables.
#pragma once

#include "ehtk/noise.hpp"
#include "ehtk/statekit.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ehtk {

/// Histogram of bitstrings observed in one measurement setting. Counts are
/// real so that the Z2 transformation can split shots into half weights.
struct SettingRecord {
  std::string axes;  ///< one of X/Y/Z per register site
  std::map<std::string, double> counts;

  double total() const;
};

/// Identifies the random draw a dataset came from.
struct DataTag {
  std::uint64_t seed = 0;
  std::string source;
  bool operator==(const DataTag&) const = default;
};

struct MeasurementDataset {
  Sites register_sites;
  long long shots = 0;  ///< nominal shots per setting
  std::uint64_t seed = 0;
  std::string source;
  std::vector<SettingRecord> records;

  int n_sites() const { return static_cast<int>(register_sites.size()); }
  DataTag tag() const { return {seed, source}; }
  /// Throws ValidationError on malformed axes, bitstrings or counts.
  void validate() const;
};

/// 3^window settings over n_sites: the axis at site i is digit (i mod window)
/// of the setting index in base 3 (X=0, Y=1, Z=2, first digit most
/// significant). Every contiguous block of `window` sites sees each of the
/// 3^window Pauli strings exactly once.
std::vector<std::string> window_settings(int n_sites, int window = 5);

/// Characters of `axes` at the given positions.
std::string restrict_axes(const std::string& axes, const std::vector<int>& positions);

/// Born probabilities (index = computational basis index over the register)
/// of a density matrix measured in the setting `axes`.
RVector rotated_probabilities(const CMatrix& rho, int n_sites, const std::string& axes);
/// Same for a pure state: probabilities over the marginal on `register_sites`.
RVector rotated_probabilities(const PureState& psi, const Sites& register_sites, const std::string& axes);

/// Draws `shots` bitstrings per setting from the (optionally noisy) source
/// restricted to `register_sites`. Setting k uses an RNG stream derived from
/// (seed, k), so the result does not depend on evaluation order.
MeasurementDataset sample_dataset(const PureState& source, const Sites& register_sites,
                                  const std::vector<std::string>& settings, long long shots,
                                  const std::optional<NoiseParams>& noise, std::uint64_t seed,
                                  std::string source_label);
MeasurementDataset sample_dataset(const DensityMatrix& source, const std::vector<std::string>& settings,
                                  long long shots, const std::optional<NoiseParams>& noise, std::uint64_t seed,
                                  std::string source_label);

/// Replaces every record (axes, s, c) by (axes, s, c/2) and (axes, s', c/2)
/// where s' flips the bits measured along Y or Z.
MeasurementDataset z2_symmetrize_dataset(const MeasurementDataset& data);

/// Splits each setting's shots into two disjoint halves using a shuffle
/// seeded by `seed`. Requires integer counts.
std::pair<MeasurementDataset, MeasurementDataset> split_dataset(const MeasurementDataset& data,
                                                                std::uint64_t seed);

/// Per-setting probability vectors over a subsystem. Settings stay separate
/// even when their restrictions coincide.
struct ProbabilityTable {
  Sites sites;
  std::vector<std::string> axes;  ///< restricted to `sites`
  std::vector<RVector> probs;     ///< length 2^|sites| each
};

ProbabilityTable empirical_probabilities(const MeasurementDataset& data, const Sites& subsystem);
/// Exact Born table of `rho` for the given settings (strings over rho.sites).
ProbabilityTable exact_probabilities(const DensityMatrix& rho, const std::vector<std::string>& axes);

}  // namespace ehtk
