#include "ehtk/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>

namespace ehtk {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kStages{"model", "prepare", "sample", "fit", "verify", "analyze"};

void check_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  require(j.is_object(), where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    require(ok, "unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read_opt(const Json& j, const char* key, T& dst) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(std::string("field '") + key + "' has the wrong type");
  }
}

Sites contiguous_range(int start, int size) {
  Sites s;
  for (int i = start; i < start + size; ++i) s.push_back(i);
  return s;
}

bool is_contiguous(const Sites& s) {
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i] != s[i - 1] + 1) return false;
  return !s.empty();
}

Json geometry_json(const Geometry& g) {
  if (!g.bilocal()) return g.a;
  Json j;
  j["a"] = g.a;
  j["b"] = g.b;
  return j;
}

Geometry geometry_from_json(const Json& j) {
  Geometry g;
  try {
    if (j.is_array()) {
      g.a = j.get<Sites>();
    } else {
      check_keys(j, "geometry", {"a", "b"});
      g.a = j.at("a").get<Sites>();
      g.b = j.at("b").get<Sites>();
    }
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("a geometry must be a site list or {\"a\": [...], \"b\": [...]}");
  }
  return g;
}

std::uint64_t derive(std::uint64_t seed, std::uint64_t label) { return make_stream(seed, {label})(); }

fs::path need(const fs::path& out, const std::string& rel, const std::string& stage) {
  const fs::path p = out / rel;
  require(fs::exists(p), "missing " + rel + " in " + out.string() + "; run the '" + stage + "' stage first");
  return p;
}

std::string fit_file(std::size_t k) { return "fits/fit_" + std::to_string(k) + ".json"; }

/// Contiguous geometries share one dataset over the hull of their sites;
/// each interval pair gets its own dataset over its two intervals.
struct DataPlan {
  std::string fit_file, holdout_file;
  Sites register_sites;
  int window = 1;
  std::uint64_t fit_seed = 0, holdout_seed = 0;
};

Sites contiguous_hull(const ExperimentConfig& c) {
  int lo = c.n, hi = -1;
  for (const auto& g : c.fit.geometries)
    if (!g.bilocal()) {
      lo = std::min(lo, g.a.front());
      hi = std::max(hi, g.a.back());
    }
  return hi < 0 ? Sites{} : contiguous_range(lo, hi - lo + 1);
}

DataPlan data_plan(const ExperimentConfig& c, std::size_t k) {
  const SeedPlan seeds = seed_plan(c.measurement.seed);
  const Geometry& g = c.fit.geometries[k];
  DataPlan p;
  if (g.bilocal()) {
    p.register_sites = g.sites();
    p.fit_file = "data/fit_" + std::to_string(k) + ".jsonl";
    p.holdout_file = "data/holdout_" + std::to_string(k) + ".jsonl";
    p.fit_seed = derive(seeds.fit, k + 1);
    p.holdout_seed = derive(seeds.holdout, k + 1);
  } else {
    p.register_sites = contiguous_hull(c);
    p.fit_file = "data/fit.jsonl";
    p.holdout_file = "data/holdout.jsonl";
    p.fit_seed = seeds.fit;
    p.holdout_seed = seeds.holdout;
  }
  p.window = std::min(c.measurement.window, static_cast<int>(p.register_sites.size()));
  return p;
}

std::string source_label(const ExperimentConfig& c, const std::string& half) {
  return c.name + "/" + c.state.kind + "/" + half;
}

Json manifest_skeleton(const ExperimentConfig& c) {
  const SeedPlan s = seed_plan(c.measurement.seed);
  Json m;
  m["config"] = to_json(c);
  m["seeds"] = {{"master", s.master}, {"fit", s.fit}, {"holdout", s.holdout}, {"calibration", s.calibration}, {"vqe", s.vqe}};
  m["stages"] = Json::object();
  return m;
}

Json load_manifest(const ExperimentConfig& c, const fs::path& out) {
  Json fresh = manifest_skeleton(c);
  const fs::path p = out / "manifest.json";
  if (!fs::exists(p)) return fresh;
  try {
    Json old = read_json(p);
    if (old.contains("config") && old["config"] == fresh["config"] && old.contains("stages")) {
      fresh["stages"] = old["stages"];
      if (old.contains("error")) fresh["error"] = old["error"];
    }
  } catch (const ValidationError&) {
  }
  return fresh;
}

void write_manifest(Json m, const fs::path& out) {
  // Stages are listed in pipeline order, artifacts sorted by path.
  Json stages = Json::object();
  std::set<std::string> outputs;
  for (const auto& name : kStages) {
    if (!m["stages"].contains(name)) continue;
    const Json& s = m["stages"][name];
    stages[name] = s;
    if (s.contains("outputs"))
      for (const auto& f : s["outputs"]) outputs.insert(f.get<std::string>());
  }
  m["stages"] = stages;
  Json files = Json::object();
  for (const auto& f : outputs)
    if (fs::exists(out / f)) files[f] = sha256_hex(read_text(out / f));
  m["files"] = files;
  write_json(out / "manifest.json", m);
}

double normalized_energy(double e, const std::pair<double, double>& bounds) {
  return (e - bounds.first) / (bounds.second - bounds.first);
}

std::vector<double> to_std(const RVector& v) { return {v.begin(), v.end()}; }

}  // namespace

Sites Geometry::sites() const {
  Sites s = a;
  s.insert(s.end(), b.begin(), b.end());
  std::sort(s.begin(), s.end());
  return s;
}

int Geometry::separation() const { return bilocal() ? b.front() - a.back() - 1 : 0; }

void ExperimentConfig::validate() const {
  require(!name.empty(), "config name is empty");
  require(n >= 2 && n <= 16, "chain length n must lie in [2, 16]");
  require(std::isfinite(j) && j > 0, "coupling j must be positive");
  require(std::isfinite(delta), "anisotropy delta must be finite");
  require(couplings.kind == "power-law" || couplings.kind == "trap", "couplings kind must be 'power-law' or 'trap'");
  require(couplings.j0 > 0 && couplings.alpha >= 0, "couplings need j0 > 0 and alpha >= 0");
  require(couplings.kind != "trap" || couplings.omega_axial > 0, "trap couplings need omega_axial > 0");

  const std::set<std::string> recipes{"ground", "excited", "vqe", "heated"};
  require(recipes.count(state.kind) == 1, "state recipe must be one of ground, excited, vqe, heated");
  require(state.k >= 0, "excited level k must be non-negative");
  require(state.layers >= 1 && state.iterations >= 0 && state.shots_per_basis >= 0,
          "vqe needs layers >= 1, iterations >= 0, shots_per_basis >= 0");
  require(state.theta_q >= 0, "heating quench duration must be non-negative");
  if (state.sector) up_count_for(n, *state.sector);

  require(measurement.window >= 1 && measurement.window <= 8, "measurement window must lie in [1, 8]");
  require(measurement.shots >= 1, "shots must be at least 1");
  noise.params.validate();
  require(noise.calibration_shots >= 2, "calibration needs at least 2 shots");
  require(n >= 2, "calibration needs at least 2 sites");

  require(!fit.geometries.empty(), "fit plan lists no geometries");
  for (const auto& g : fit.geometries) {
    require(is_contiguous(g.a) && (g.b.empty() || is_contiguous(g.b)), "geometry intervals must be contiguous site runs");
    const Sites s = g.sites();
    require(s.front() >= 0 && s.back() < n, "geometry lies outside the chain");
    require(static_cast<int>(s.size()) >= 2 && static_cast<int>(s.size()) <= 10, "geometry size must lie in [2, 10]");
    if (g.bilocal()) {
      require(g.separation() >= 1, "the two intervals must be separated by at least one site");
      require(fit.variant == AnsatzVariant::BilocalPairs, "interval pairs need the bilocal-pairs variant");
    } else {
      require(fit.variant != AnsatzVariant::BilocalPairs, "the bilocal-pairs variant needs interval pairs");
    }
  }
  if (!contiguous_hull(*this).empty())
    require(contiguous_hull(*this).size() <= static_cast<std::size_t>(kDenseSiteCap), "measured register too large");
}

ExperimentConfig config_from_json(const Json& j) {
  check_keys(j, "config", {"name", "model", "couplings", "state", "measurement", "noise", "fit"});
  ExperimentConfig c;
  read_opt(j, "name", c.name);
  require(j.contains("model"), "config needs a 'model' section");
  {
    const Json& m = j["model"];
    check_keys(m, "model", {"n", "j", "delta"});
    require(m.contains("n"), "model needs 'n'");
    read_opt(m, "n", c.n);
    read_opt(m, "j", c.j);
    read_opt(m, "delta", c.delta);
  }
  if (j.contains("couplings")) {
    const Json& m = j["couplings"];
    check_keys(m, "couplings", {"kind", "j0", "alpha", "omega_axial"});
    read_opt(m, "kind", c.couplings.kind);
    read_opt(m, "j0", c.couplings.j0);
    read_opt(m, "alpha", c.couplings.alpha);
    read_opt(m, "omega_axial", c.couplings.omega_axial);
  }
  if (j.contains("state")) {
    const Json& m = j["state"];
    check_keys(m, "state", {"recipe", "sector", "k", "layers", "iterations", "shots_per_basis", "theta_q"});
    read_opt(m, "recipe", c.state.kind);
    if (m.contains("sector") && !m["sector"].is_null()) {
      int s = 0;
      read_opt(m, "sector", s);
      c.state.sector = s;
    }
    read_opt(m, "k", c.state.k);
    read_opt(m, "layers", c.state.layers);
    read_opt(m, "iterations", c.state.iterations);
    read_opt(m, "shots_per_basis", c.state.shots_per_basis);
    read_opt(m, "theta_q", c.state.theta_q);
  }
  if (j.contains("measurement")) {
    const Json& m = j["measurement"];
    check_keys(m, "measurement", {"window", "shots", "seed", "z2"});
    read_opt(m, "window", c.measurement.window);
    read_opt(m, "shots", c.measurement.shots);
    read_opt(m, "seed", c.measurement.seed);
    read_opt(m, "z2", c.measurement.z2);
  }
  if (j.contains("noise")) {
    const Json& m = j["noise"];
    check_keys(m, "noise", {"p1", "p2", "calibrate", "calibration_shots"});
    read_opt(m, "p1", c.noise.params.p1);
    read_opt(m, "p2", c.noise.params.p2);
    read_opt(m, "calibrate", c.noise.calibrate);
    read_opt(m, "calibration_shots", c.noise.calibration_shots);
  }
  require(j.contains("fit"), "config needs a 'fit' section");
  {
    const Json& m = j["fit"];
    check_keys(m, "fit", {"variant", "cross_links", "geometries", "sizes", "separations", "interval", "init"});
    std::string variant = to_string(c.fit.variant);
    read_opt(m, "variant", variant);
    c.fit.variant = variant_from_string(variant);
    read_opt(m, "cross_links", c.fit.cross_links);
    if (m.contains("geometries")) {
      require(m["geometries"].is_array(), "geometries must be a list");
      for (const auto& g : m["geometries"]) c.fit.geometries.push_back(geometry_from_json(g));
    }
    std::vector<int> sizes, seps;
    int interval = 2;
    read_opt(m, "sizes", sizes);
    read_opt(m, "separations", seps);
    read_opt(m, "interval", interval);
    for (int s : sizes) c.fit.geometries.push_back(centered_block(c.n, s));
    for (int d : seps) c.fit.geometries.push_back(centered_pair(c.n, interval, d));
    if (m.contains("init") && !m["init"].is_null()) {
      std::vector<double> init;
      read_opt(m, "init", init);
      c.fit.init = init;
    }
  }
  c.validate();
  return c;
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["name"] = c.name;
  j["model"] = {{"n", c.n}, {"j", c.j}, {"delta", c.delta}};
  j["couplings"] = {{"kind", c.couplings.kind}, {"j0", c.couplings.j0}, {"alpha", c.couplings.alpha},
                    {"omega_axial", c.couplings.omega_axial}};
  Json s;
  s["recipe"] = c.state.kind;
  s["sector"] = c.state.sector ? Json(*c.state.sector) : Json(nullptr);
  s["k"] = c.state.k;
  s["layers"] = c.state.layers;
  s["iterations"] = c.state.iterations;
  s["shots_per_basis"] = c.state.shots_per_basis;
  s["theta_q"] = c.state.theta_q;
  j["state"] = s;
  j["measurement"] = {{"window", c.measurement.window}, {"shots", c.measurement.shots}, {"seed", c.measurement.seed},
                      {"z2", c.measurement.z2}};
  j["noise"] = {{"p1", c.noise.params.p1}, {"p2", c.noise.params.p2}, {"calibrate", c.noise.calibrate},
                {"calibration_shots", c.noise.calibration_shots}};
  Json f;
  f["variant"] = to_string(c.fit.variant);
  f["cross_links"] = c.fit.cross_links;
  f["geometries"] = Json::array();
  for (const auto& g : c.fit.geometries) f["geometries"].push_back(geometry_json(g));
  f["init"] = c.fit.init ? Json(*c.fit.init) : Json(nullptr);
  j["fit"] = f;
  return j;
}

Geometry centered_block(int n, int size) {
  require(size >= 1 && size <= n, "block size must lie in [1, n]");
  return {contiguous_range((n - size) / 2, size), {}};
}

Geometry centered_pair(int n, int width, int gap) {
  require(width >= 1 && gap >= 1 && 2 * width + gap <= n, "interval pair does not fit on the chain");
  const int start = (n - 2 * width - gap) / 2;
  return {contiguous_range(start, width), contiguous_range(start + width + gap, width)};
}

std::vector<std::string> preset_names() { return {"minimal", "figure1c-desk", "figure3-desk"}; }

std::vector<ExperimentConfig> preset(const std::string& name) {
  if (name == "minimal") {
    ExperimentConfig c;
    c.name = "minimal";
    c.n = 6;
    c.measurement.shots = 1000;
    c.fit.geometries = {centered_block(6, 2), centered_block(6, 3)};
    return {c};
  }
  if (name == "figure1c-desk") {
    ExperimentConfig g;
    g.name = "figure1c-desk-ground";
    g.n = 12;
    for (int l = 2; l <= 6; ++l) g.fit.geometries.push_back(centered_block(12, l));
    ExperimentConfig h = g;
    h.name = "figure1c-desk-heated";
    h.state.kind = "heated";
    h.state.theta_q = 4;
    return {g, h};
  }
  if (name == "figure3-desk") {
    ExperimentConfig c;
    c.name = "figure3-desk";
    c.n = 12;
    c.fit.variant = AnsatzVariant::BilocalPairs;
    for (int d = 1; d <= 6; ++d) c.fit.geometries.push_back(centered_pair(12, 2, d));
    return {c};
  }
  throw ValidationError("unknown preset '" + name + "'");
}

SeedPlan seed_plan(std::uint64_t master) {
  return {master, derive(master, 1), derive(master, 2), derive(master, 3), derive(master, 4)};
}

CouplingMatrix build_couplings(const ExperimentConfig& c) {
  if (c.couplings.kind == "power-law") return power_law_couplings(c.n, c.couplings.j0, c.couplings.alpha);
  // Trap couplings are rescaled so the largest |J_ij| equals j0 (time unit 1/J0).
  CouplingMatrix m = mode_sum_couplings(reference_trap(c.n, c.couplings.omega_axial));
  const double scale = m.values.cwiseAbs().maxCoeff();
  if (scale <= 0) throw NumericalError("trap couplings vanish", scale);
  m.values *= c.couplings.j0 / scale;
  return m;
}

EHAnsatz make_ansatz(const ExperimentConfig& c, const Geometry& g) {
  switch (c.fit.variant) {
    case AnsatzVariant::LocalLinks: return EHAnsatz::local_links(g.a, c.delta);
    case AnsatzVariant::PolynomialProfile: return EHAnsatz::polynomial_profile(g.a, c.delta);
    case AnsatzVariant::BilocalPairs: return EHAnsatz::bilocal_pairs(g.a, g.b, c.delta, c.fit.cross_links);
  }
  throw ValidationError("unknown ansatz variant");
}

Json stage_model(const ExperimentConfig& c, const fs::path& out) {
  const SpinModel model = build_xxz(c.n, c.j, c.delta);
  const CouplingMatrix couplings = build_couplings(c);
  write_json(out / "model.json", to_json(model));
  write_json(out / "couplings.json", to_json(couplings));
  const auto [lo, hi] = spectral_bounds(model);
  Json s;
  s["spectral_bounds"] = {lo, hi};
  s["outputs"] = {"couplings.json", "model.json"};
  return s;
}

Json stage_prepare(const ExperimentConfig& c, const fs::path& out) {
  const SpinModel model = spin_model_from_json(read_json(need(out, "model.json", "model")));
  const CouplingMatrix couplings = coupling_matrix_from_json(read_json(need(out, "couplings.json", "model")));
  require(model.n_sites() == c.n && couplings.n_sites == c.n, "model files do not match the config");
  const SeedPlan seeds = seed_plan(c.measurement.seed);
  Json s;
  s["recipe"] = c.state.kind;
  s["outputs"] = {"state.bin"};
  PureState psi;
  double energy = 0;
  if (c.state.kind == "ground") {
    const EigenPair gs = ground_state(model, c.state.sector);
    psi = gs.state;
    energy = gs.energy;
  } else if (c.state.kind == "excited") {
    const auto states = excited_states(model, c.state.k + 1, std::nullopt, c.state.sector);
    psi = states.back().state;
    energy = states.back().energy;
  } else {
    VqeOptions opts;
    opts.iterations = c.state.iterations;
    const VqeResult v = vqe_optimize(model, couplings, c.state.layers, c.state.shots_per_basis, seeds.vqe, opts);
    CircuitParams params = v.params;
    if (c.state.kind == "heated") params.heating_quench = c.state.theta_q;
    psi = run_circuit(neel_state(c.n), params, couplings);
    energy = estimate_energy(model, psi, 0, 0);
    Json circ;
    circ["thetas"] = params.thetas;
    circ["heating_quench"] = params.heating_quench ? Json(*params.heating_quench) : Json(nullptr);
    circ["energy_trace"] = v.energy_trace;
    write_json(out / "circuit.json", circ);
    s["outputs"].push_back("circuit.json");
  }
  write_state_file(out / "state.bin", psi);
  s["energy"] = energy;
  s["normalized_energy"] = normalized_energy(energy, spectral_bounds(model));
  return s;
}

Json stage_sample(const ExperimentConfig& c, const fs::path& out) {
  const PureState psi = read_state_file(need(out, "state.bin", "prepare"));
  require(psi.n_sites() == c.n, "state file does not match the config");
  const SeedPlan seeds = seed_plan(c.measurement.seed);
  const std::optional<NoiseParams> noise =
      c.noise.params.is_identity() ? std::nullopt : std::optional<NoiseParams>(c.noise.params);
  Json s;
  s["datasets"] = Json::array();
  std::set<std::string> outputs;
  std::set<std::string> done;
  for (std::size_t k = 0; k < c.fit.geometries.size(); ++k) {
    const DataPlan p = data_plan(c, k);
    if (!done.insert(p.fit_file).second) continue;
    require(p.fit_seed != p.holdout_seed, "fit and holdout streams coincide");
    const auto settings = window_settings(static_cast<int>(p.register_sites.size()), p.window);
    const auto fit = sample_dataset(psi, p.register_sites, settings, c.measurement.shots, noise, p.fit_seed,
                                    source_label(c, "fit"));
    const auto hold = sample_dataset(psi, p.register_sites, settings, c.measurement.shots, noise, p.holdout_seed,
                                     source_label(c, "holdout"));
    write_dataset(out / p.fit_file, fit);
    write_dataset(out / p.holdout_file, hold);
    outputs.insert(p.fit_file);
    outputs.insert(p.holdout_file);
    s["datasets"].push_back({{"register", p.register_sites},
                             {"settings", settings.size()},
                             {"fit_seed", p.fit_seed},
                             {"holdout_seed", p.holdout_seed}});
  }

  NoiseParams model_noise = c.noise.params;
  if (c.noise.calibrate) {
    const Sites all = contiguous_range(0, c.n);
    const auto cal = sample_dataset(neel_state(c.n), all, {std::string(static_cast<std::size_t>(c.n), 'Z')},
                                    c.noise.calibration_shots, noise, seeds.calibration, source_label(c, "calibration"));
    write_dataset(out / "data/calibration.jsonl", cal);
    outputs.insert("data/calibration.jsonl");
    model_noise = calibrate_noise(cal, c.n % 2 == 0 ? 0 : -1);
  }
  write_json(out / "noise.json", to_json(model_noise));
  outputs.insert("noise.json");
  s["model_noise"] = to_json(model_noise);
  s["outputs"] = outputs;
  return s;
}

Json stage_fit(const ExperimentConfig& c, const fs::path& out) {
  const NoiseParams noise = noise_from_json(read_json(need(out, "noise.json", "sample")));
  Json s;
  s["fits"] = Json::array();
  s["outputs"] = Json::array();
  std::map<std::string, MeasurementDataset> cache;
  for (std::size_t k = 0; k < c.fit.geometries.size(); ++k) {
    const DataPlan p = data_plan(c, k);
    auto it = cache.find(p.fit_file);
    if (it == cache.end()) {
      MeasurementDataset d = read_dataset(need(out, p.fit_file, "sample"));
      if (c.measurement.z2) d = z2_symmetrize_dataset(d);
      it = cache.emplace(p.fit_file, std::move(d)).first;
    }
    const EHAnsatz ansatz = make_ansatz(c, c.fit.geometries[k]);
    FitOptions opts;
    if (c.fit.init) {
      require(static_cast<int>(c.fit.init->size()) == ansatz.n_params(), "fit init has the wrong length");
      opts.init = Eigen::Map<const RVector>(c.fit.init->data(), ansatz.n_params());
    }
    const FitResult fit = fit_eh(it->second, ansatz, noise, opts);
    write_json(out / fit_file(k), to_json(fit));
    s["outputs"].push_back(fit_file(k));
    s["fits"].push_back({{"geometry", geometry_json(c.fit.geometries[k])},
                         {"chi2", fit.chi2},
                         {"iterations", fit.iterations},
                         {"converged", fit.converged}});
  }
  return s;
}

Json stage_verify(const ExperimentConfig& c, const fs::path& out) {
  Json s;
  s["windows"] = Json::array();
  s["outputs"] = Json::array();
  std::map<std::string, MeasurementDataset> cache;
  for (std::size_t k = 0; k < c.fit.geometries.size(); ++k) {
    const DataPlan p = data_plan(c, k);
    auto it = cache.find(p.holdout_file);
    if (it == cache.end()) it = cache.emplace(p.holdout_file, read_dataset(need(out, p.holdout_file, "sample"))).first;
    const FitResult fit = fit_result_from_json(read_json(need(out, fit_file(k), "fit")));
    const EHAnsatz ansatz = make_ansatz(c, c.fit.geometries[k]);
    require(fit.geometry == ansatz.geometry() && fit.beta.size() == ansatz.n_params(), "fit file does not match the config");
    const GibbsState state = fitted_state(ansatz, fit);
    const int window = std::min(c.measurement.window, ansatz.n_sites());
    const WindowedFidelity f = windowed_fidelity(state, it->second, window, fit.data_tag);
    const std::string file = "verify/verify_" + std::to_string(k) + ".csv";
    write_text(out / file, verification_table(f).str());
    s["outputs"].push_back(file);
    s["windows"].push_back({{"geometry", geometry_json(c.fit.geometries[k])},
                            {"window", window},
                            {"f_max", f.f_max},
                            {"f_mean", f.f_mean}});
  }
  return s;
}

Json stage_analyze(const ExperimentConfig& c, const fs::path& out) {
  const PureState psi = read_state_file(need(out, "state.bin", "prepare"));
  Json s;
  s["geometries"] = Json::array();
  s["outputs"] = Json::array();
  std::map<int, std::pair<double, double>> by_size;  // L_A -> (S fit, S exact)
  struct MiRow {
    int d12;
    double exact, fitted, chi2;
  };
  std::vector<MiRow> mi;

  for (std::size_t k = 0; k < c.fit.geometries.size(); ++k) {
    const Geometry& g = c.fit.geometries[k];
    const FitResult fit = fit_result_from_json(read_json(need(out, fit_file(k), "fit")));
    const EHAnsatz ansatz = make_ansatz(c, g);
    require(fit.geometry == ansatz.geometry() && fit.beta.size() == ansatz.n_params(), "fit file does not match the config");
    const GibbsState state = fitted_state(ansatz, fit);
    const DensityMatrix exact = reduced_density_matrix(psi, ansatz.geometry());
    const double s_fit = entropy_from_eh(state), s_exact = vn_entropy(exact);
    Json row{{"geometry", geometry_json(g)},
             {"uhlmann_fidelity", uhlmann_fidelity(state.rho, exact)},
             {"entropy_fit", s_fit},
             {"entropy_exact", s_exact}};

    const RVector coeff = ansatz.pair_coefficients(fit.beta);
    if (!g.bilocal()) {
      by_size.emplace(ansatz.n_sites(), std::make_pair(s_fit, s_exact));
      std::vector<int> sites;
      for (const auto& pr : ansatz.pairs()) sites.push_back(pr.first);
      const std::vector<double> beta = to_std(coeff);
      const std::vector<double> cft = lattice_cft_profile(ansatz.n_sites());
      double br = 0, rr = 0;
      for (std::size_t i = 0; i < cft.size(); ++i) {
        br += beta[i] * cft[i];
        rr += cft[i] * cft[i];
      }
      std::vector<double> ref;
      for (double v : cft) ref.push_back(rr > 0 ? v * br / rr : 0.0);
      const std::string file = "analysis/profile_" + std::to_string(k) + ".csv";
      write_text(out / file, profile_table(sites, beta, ref).str());
      s["outputs"].push_back(file);
      if (beta.size() >= 3) {
        std::vector<double> x;
        for (int i = 1; i <= static_cast<int>(beta.size()); ++i) x.push_back(i);
        row["parabola_r2"] = fit_quadratic(x, beta).r_squared;
      }
    } else {
      CsvTable t{{"site_i", "site_j", "beta"}, {}};
      for (std::size_t i = 0; i < ansatz.pairs().size(); ++i)
        t.rows.push_back({static_cast<double>(ansatz.pairs()[i].first), static_cast<double>(ansatz.pairs()[i].second),
                          coeff(static_cast<Eigen::Index>(i))});
      const std::string file = "analysis/pairs_" + std::to_string(k) + ".csv";
      write_text(out / file, t.str());
      s["outputs"].push_back(file);
      const double i_exact = mutual_information(exact, reduced_density_matrix(psi, g.a), reduced_density_matrix(psi, g.b));
      const double i_fit = mutual_information(state.rho, reduced_density_matrix(state.rho, g.a), reduced_density_matrix(state.rho, g.b));
      mi.push_back({g.separation(), i_exact, i_fit, fit.chi2});
    }
    s["geometries"].push_back(row);
  }

  if (by_size.size() >= 3) {
    std::vector<ScalingPoint> fit_pts, exact_pts;
    for (const auto& [l, v] : by_size) {
      fit_pts.push_back({l, v.first});
      exact_pts.push_back({l, v.second});
    }
    const EntropyScaling sf = entropy_scaling(fit_pts), se = entropy_scaling(exact_pts);
    write_text(out / "analysis/entropy_scaling.csv", scaling_table(sf).str());
    write_text(out / "analysis/entropy_scaling_exact.csv", scaling_table(se).str());
    s["outputs"].push_back("analysis/entropy_scaling.csv");
    s["outputs"].push_back("analysis/entropy_scaling_exact.csv");
    s["scaling"] = {{"slope_fit", sf.slope},
                    {"classification_fit", sf.classification},
                    {"slope_exact", se.slope},
                    {"classification_exact", se.classification}};
  }
  if (!mi.empty()) {
    std::sort(mi.begin(), mi.end(), [](const MiRow& x, const MiRow& y) { return x.d12 < y.d12; });
    CsvTable t{{"d12", "mutual_information_exact", "mutual_information_fit", "chi2"}, {}};
    for (const auto& r : mi) t.rows.push_back({static_cast<double>(r.d12), r.exact, r.fitted, r.chi2});
    write_text(out / "analysis/mutual_information.csv", t.str());
    s["outputs"].push_back("analysis/mutual_information.csv");
  }
  return s;
}

Json run_stage(const std::string& stage, const ExperimentConfig& c, const fs::path& out) {
  static const std::map<std::string, std::function<Json(const ExperimentConfig&, const fs::path&)>> table{
      {"model", stage_model}, {"prepare", stage_prepare}, {"sample", stage_sample},
      {"fit", stage_fit},     {"verify", stage_verify},   {"analyze", stage_analyze}};
  const auto it = table.find(stage);
  require(it != table.end(), "unknown stage '" + stage + "'");
  c.validate();
  fs::create_directories(out);
  Json manifest = load_manifest(c, out);
  try {
    Json summary = it->second(c, out);
    summary["status"] = "ok";
    manifest["stages"][stage] = summary;
    if (manifest.contains("error") && manifest["error"]["stage"] == stage) manifest.erase("error");
    write_manifest(manifest, out);
    return summary;
  } catch (const std::exception& e) {
    manifest["stages"][stage] = {{"status", "failed"}};
    manifest["error"] = {{"stage", stage}, {"message", e.what()}};
    write_manifest(manifest, out);
    throw;
  }
}

Json run_pipeline(const ExperimentConfig& c, const fs::path& out) {
  c.validate();
  fs::create_directories(out);
  // A full run starts from a clean record so stale stage entries never leak in.
  if (fs::exists(out / "manifest.json")) fs::remove(out / "manifest.json");
  for (const auto& stage : kStages) run_stage(stage, c, out);
  return read_json(out / "manifest.json");
}

}  // namespace ehtk
