// Experiment configuration, presets and the staged end-to-end workflow:
// model -> prepare -> sample -> fit -> verify -> analyze.
#pragma once

#include "ehtk/io.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ehtk {

struct CouplingSource {
  std::string kind = "power-law";  ///< "power-law" or "trap"
  double j0 = 1;
  double alpha = 1;
  double omega_axial = 2 * 3.141592653589793 * 0.2e6;  ///< rad/s, trap only
};

struct StateRecipe {
  std::string kind = "ground";  ///< "ground", "excited", "vqe" or "heated"
  std::optional<int> sector;    ///< ground / excited
  int k = 0;                    ///< excited: 0-based level
  int layers = 2;               ///< vqe / heated
  int iterations = 100;
  int shots_per_basis = 0;      ///< 0 = exact energies inside VQE
  double theta_q = 0;           ///< heated: quench duration in units of 1/J0
};

struct MeasurementPlan {
  int window = 5;
  long long shots = 1000;
  std::uint64_t seed = 1;
  bool z2 = false;  ///< symmetrize the fit data under the global spin flip
};

struct NoisePlan {
  NoiseParams params;               ///< channel applied to the synthetic data
  bool calibrate = false;           ///< fit with parameters calibrated from Neel Z data
  long long calibration_shots = 100000;
};

/// A contiguous block (`b` empty) or two disjoint intervals.
struct Geometry {
  Sites a, b;
  bool bilocal() const { return !b.empty(); }
  Sites sites() const;
  /// Sites strictly between the intervals.
  int separation() const;
};

struct FitPlan {
  AnsatzVariant variant = AnsatzVariant::LocalLinks;
  bool cross_links = true;
  std::vector<Geometry> geometries;
  std::optional<std::vector<double>> init;
};

struct ExperimentConfig {
  std::string name = "experiment";
  int n = 6;
  double j = 1;
  double delta = 1;
  CouplingSource couplings;
  StateRecipe state;
  MeasurementPlan measurement;
  NoisePlan noise;
  FitPlan fit;

  void validate() const;
};

/// Parses and validates a config document. Geometries may be listed
/// explicitly ([sites...] or {"a":[...],"b":[...]}) or generated with
/// {"sizes":[...]} (centered blocks) and {"separations":[...],"interval":w}
/// (centered interval pairs). Unknown keys are rejected.
ExperimentConfig config_from_json(const Json& j);
Json to_json(const ExperimentConfig& c);

/// Centered block of `size` sites on an n-site chain.
Geometry centered_block(int n, int size);
/// Two `width`-site intervals with `gap` sites between them, centered.
Geometry centered_pair(int n, int width, int gap);

/// Named presets: "minimal", "figure1c-desk" (two runs: ground, heated),
/// "figure3-desk".
std::vector<std::string> preset_names();
std::vector<ExperimentConfig> preset(const std::string& name);

/// Seeds of the independent random streams of one run.
struct SeedPlan {
  std::uint64_t master = 0;
  std::uint64_t fit = 0;
  std::uint64_t holdout = 0;
  std::uint64_t calibration = 0;
  std::uint64_t vqe = 0;
};
SeedPlan seed_plan(std::uint64_t master);

CouplingMatrix build_couplings(const ExperimentConfig& c);
EHAnsatz make_ansatz(const ExperimentConfig& c, const Geometry& g);

/// Stages read their inputs from, and write their outputs to, `out`. Each
/// returns a summary that is merged into out/manifest.json.
Json stage_model(const ExperimentConfig& c, const std::filesystem::path& out);
Json stage_prepare(const ExperimentConfig& c, const std::filesystem::path& out);
Json stage_sample(const ExperimentConfig& c, const std::filesystem::path& out);
Json stage_fit(const ExperimentConfig& c, const std::filesystem::path& out);
Json stage_verify(const ExperimentConfig& c, const std::filesystem::path& out);
Json stage_analyze(const ExperimentConfig& c, const std::filesystem::path& out);

/// Runs one named stage and records it (or its failure) in the manifest;
/// failures are rethrown after the manifest is written.
Json run_stage(const std::string& stage, const ExperimentConfig& c, const std::filesystem::path& out);

/// All stages in order. The manifest holds the config, seeds, per-stage
/// summaries and the SHA-256 of every artifact; reruns are byte-identical.
Json run_pipeline(const ExperimentConfig& c, const std::filesystem::path& out);

}  // namespace ehtk
