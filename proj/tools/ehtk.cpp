// Command-line front end: one subcommand per pipeline stage plus `run`.
#include "ehtk/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace fs = std::filesystem;
using namespace ehtk;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

/// A config file, a file holding {"preset": name}, or a bare preset name.
/// Multi-run presets write each run into out/<name>.
std::vector<std::pair<ExperimentConfig, fs::path>> load(const Options& o) {
  std::vector<ExperimentConfig> configs;
  if (fs::exists(o.config)) {
    const Json j = read_json(o.config);
    if (j.is_object() && j.contains("preset")) {
      require(j.size() == 1, "a preset file holds only the 'preset' key");
      configs = preset(j["preset"].get<std::string>());
    } else {
      configs = {config_from_json(j)};
    }
  } else {
    const auto names = preset_names();
    require(std::find(names.begin(), names.end(), o.config) != names.end(),
            "config '" + o.config + "' is neither a file nor a preset");
    configs = preset(o.config);
  }
  std::vector<std::pair<ExperimentConfig, fs::path>> runs;
  for (auto& c : configs) {
    if (o.seed) c.measurement.seed = *o.seed;
    c.validate();
    runs.emplace_back(c, configs.size() == 1 ? fs::path(o.out) : fs::path(o.out) / c.name);
  }
  return runs;
}

int run_guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entanglement Hamiltonian tomography toolkit"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"model", "write the spin model and coupling matrix"},
      {"prepare", "prepare the configured state"},
      {"sample", "draw fit and holdout measurement datasets"},
      {"fit", "fit the entanglement Hamiltonian ansatz"},
      {"verify", "cross-check fits against holdout data"},
      {"analyze", "entropies, profiles and mutual information"},
      {"run", "all stages in order"}};
  std::string chosen;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "config JSON file or preset name")->required();
    sub->add_option("--out", opt.out, "output directory")->required();
    CLI::Option* s = sub->add_option("--seed", seed, "master seed (overrides measurement.seed)");
    if (name == "sample" || name == "run") s->required();
    sub->callback([&chosen, name = name, s, &opt, &seed] {
      chosen = name;
      if (s->count() > 0) opt.seed = seed;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  return run_guarded([&] {
    for (const auto& [config, out] : load(opt)) {
      const Json result = chosen == "run" ? run_pipeline(config, out) : run_stage(chosen, config, out);
      Json brief = result;
      if (chosen == "run") brief = result["stages"];
      std::cout << config.name << " " << chosen << " " << brief.dump() << "\n";
    }
  });
}
