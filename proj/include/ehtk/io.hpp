// File formats: binary state vectors, JSON-lines datasets, JSON documents
// for models, couplings, noise and fits, CSV tables and SHA-256 digests.
#pragma once

#include "ehtk/analysis.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace ehtk {

using Json = nlohmann::ordered_json;

std::string read_text(const std::filesystem::path& path);
/// Writes bytes verbatim, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);
Json read_json(const std::filesystem::path& path);
/// Two-space indented JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const Json& j);

/// "EHTSTATE1", u32 LE n_sites, then 2^n (re, im) LE f64 pairs.
std::string encode_state(const PureState& psi);
PureState decode_state(const std::string& bytes);
void write_state_file(const std::filesystem::path& path, const PureState& psi);
PureState read_state_file(const std::filesystem::path& path);

/// Header line {"register","shots","seed","source"}, then one
/// {"axes","counts"} line per setting. Integral counts are written as integers.
std::string encode_dataset(const MeasurementDataset& data);
MeasurementDataset decode_dataset(const std::string& text);
void write_dataset(const std::filesystem::path& path, const MeasurementDataset& data);
MeasurementDataset read_dataset(const std::filesystem::path& path);

Json to_json(const SpinModel& model);
SpinModel spin_model_from_json(const Json& j);
Json to_json(const CouplingMatrix& c);
CouplingMatrix coupling_matrix_from_json(const Json& j);
Json to_json(const NoiseParams& p);
NoiseParams noise_from_json(const Json& j);
Json to_json(const FitResult& fit);
FitResult fit_result_from_json(const Json& j);

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::string str() const;
};

/// (L_A, S, slope)
CsvTable scaling_table(const EntropyScaling& s);
/// (site, beta, beta_ref)
CsvTable profile_table(const std::vector<int>& sites, const std::vector<double>& beta, const std::vector<double>& ref);
/// (window_start, f_max, f_mean, err)
CsvTable verification_table(const WindowedFidelity& f);

std::string sha256_hex(const std::string& bytes);

}  // namespace ehtk
