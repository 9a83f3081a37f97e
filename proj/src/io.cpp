#include "ehtk/io.hpp"

#include <openssl/evp.h>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ehtk {

namespace {

constexpr char kMagic[] = "EHTSTATE1";
constexpr std::size_t kMagicLen = sizeof(kMagic) - 1;

template <class T>
void put_le(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get_le(const std::string& in, std::size_t pos) {
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  return value;
}

template <class T>
T field(const Json& j, const char* key) {
  require(j.is_object() && j.contains(key), std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(std::string("field '") + key + "' has the wrong type");
  }
}

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("malformed JSON in " + what + ": " + e.what());
  }
}

Json count_value(double c) {
  if (c == std::floor(c) && std::abs(c) < 9e15) return static_cast<long long>(c);
  return c;
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  require(static_cast<bool>(out), "write failed for " + path.string());
}

Json read_json(const std::filesystem::path& path) { return parse_json(read_text(path), path.string()); }

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

std::string encode_state(const PureState& psi) {
  std::string out(kMagic, kMagicLen);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(psi.n_sites()));
  for (const cplx& a : psi.amplitudes()) {
    put_le<double>(out, a.real());
    put_le<double>(out, a.imag());
  }
  return out;
}

PureState decode_state(const std::string& bytes) {
  require(bytes.size() >= kMagicLen + 4 && bytes.compare(0, kMagicLen, kMagic) == 0, "not a state file (bad magic)");
  const auto n = get_le<std::uint32_t>(bytes, kMagicLen);
  require(n >= 1 && n <= static_cast<std::uint32_t>(kStateSiteCap), "state file site count out of range");
  const std::size_t d = dim_of(static_cast<int>(n));
  require(bytes.size() == kMagicLen + 4 + 16 * d, "state file length does not match its site count");
  CVector amp(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t pos = kMagicLen + 4 + 16 * i;
    amp(static_cast<Eigen::Index>(i)) = cplx(get_le<double>(bytes, pos), get_le<double>(bytes, pos + 8));
  }
  return PureState(static_cast<int>(n), std::move(amp));
}

void write_state_file(const std::filesystem::path& path, const PureState& psi) { write_text(path, encode_state(psi)); }

PureState read_state_file(const std::filesystem::path& path) { return decode_state(read_text(path)); }

std::string encode_dataset(const MeasurementDataset& data) {
  data.validate();
  Json header;
  header["register"] = data.register_sites;
  header["shots"] = data.shots;
  header["seed"] = data.seed;
  header["source"] = data.source;
  std::string out = header.dump() + "\n";
  for (const auto& rec : data.records) {
    Json line;
    line["axes"] = rec.axes;
    Json counts = Json::object();
    for (const auto& [bits, c] : rec.counts) counts[bits] = count_value(c);
    line["counts"] = std::move(counts);
    out += line.dump() + "\n";
  }
  return out;
}

MeasurementDataset decode_dataset(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "dataset is empty");
  const Json header = parse_json(line, "dataset header");
  MeasurementDataset d;
  d.register_sites = field<Sites>(header, "register");
  d.shots = field<long long>(header, "shots");
  d.seed = field<std::uint64_t>(header, "seed");
  d.source = field<std::string>(header, "source");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const Json j = parse_json(line, "dataset line " + std::to_string(line_no));
    SettingRecord rec{field<std::string>(j, "axes"), {}};
    const Json& counts = j.at("counts");
    require(counts.is_object(), "counts must be an object");
    for (const auto& [bits, c] : counts.items()) {
      require(c.is_number(), "count for '" + bits + "' is not a number");
      rec.counts[bits] = c.get<double>();
    }
    d.records.push_back(std::move(rec));
  }
  d.validate();
  return d;
}

void write_dataset(const std::filesystem::path& path, const MeasurementDataset& data) {
  write_text(path, encode_dataset(data));
}

MeasurementDataset read_dataset(const std::filesystem::path& path) { return decode_dataset(read_text(path)); }

Json to_json(const SpinModel& model) {
  Json j;
  j["n"] = model.n_sites();
  j["j"] = model.coupling_j();
  j["delta"] = model.anisotropy_delta();
  return j;
}

SpinModel spin_model_from_json(const Json& j) {
  return build_xxz(field<int>(j, "n"), field<double>(j, "j"), field<double>(j, "delta"));
}

Json to_json(const CouplingMatrix& c) {
  Json j;
  j["n"] = c.n_sites;
  std::vector<double> values;
  for (int r = 0; r < c.n_sites; ++r)
    for (int k = 0; k < c.n_sites; ++k) values.push_back(c.values(r, k));
  j["values"] = values;
  return j;
}

CouplingMatrix coupling_matrix_from_json(const Json& j) {
  const int n = field<int>(j, "n");
  const auto values = field<std::vector<double>>(j, "values");
  require(n >= 1 && values.size() == static_cast<std::size_t>(n) * static_cast<std::size_t>(n),
          "coupling matrix needs n*n values");
  CouplingMatrix c{n, RMatrix(n, n)};
  for (int r = 0; r < n; ++r)
    for (int k = 0; k < n; ++k) c.values(r, k) = values[static_cast<std::size_t>(r * n + k)];
  require((c.values - c.values.transpose()).cwiseAbs().maxCoeff() <= 1e-12, "coupling matrix must be symmetric");
  require(c.values.diagonal().cwiseAbs().maxCoeff() == 0.0, "coupling matrix must have a zero diagonal");
  return c;
}

Json to_json(const NoiseParams& p) {
  Json j;
  j["p1"] = p.p1;
  j["p2"] = p.p2;
  return j;
}

NoiseParams noise_from_json(const Json& j) {
  NoiseParams p{field<double>(j, "p1"), field<double>(j, "p2")};
  p.validate();
  return p;
}

Json to_json(const FitResult& fit) {
  Json j;
  j["variant"] = to_string(fit.variant);
  j["geometry"] = fit.geometry;
  j["beta"] = std::vector<double>(fit.beta.begin(), fit.beta.end());
  j["chi2"] = fit.chi2;
  j["noise"] = to_json(fit.noise);
  j["xi"] = std::vector<double>(fit.xi.begin(), fit.xi.end());
  j["iterations"] = fit.iterations;
  j["gradient_norm"] = fit.gradient_norm;
  j["converged"] = fit.converged;
  j["data"] = {{"seed", fit.data_tag.seed}, {"source", fit.data_tag.source}};
  return j;
}

FitResult fit_result_from_json(const Json& j) {
  FitResult f;
  f.variant = variant_from_string(field<std::string>(j, "variant"));
  f.geometry = field<Sites>(j, "geometry");
  const auto beta = field<std::vector<double>>(j, "beta");
  f.beta = Eigen::Map<const RVector>(beta.data(), static_cast<Eigen::Index>(beta.size()));
  f.chi2 = field<double>(j, "chi2");
  require(f.chi2 >= 0, "chi2 must be non-negative");
  f.noise = noise_from_json(j.at("noise"));
  const auto xi = field<std::vector<double>>(j, "xi");
  f.xi = Eigen::Map<const RVector>(xi.data(), static_cast<Eigen::Index>(xi.size()));
  if (j.contains("iterations")) f.iterations = field<int>(j, "iterations");
  if (j.contains("gradient_norm")) f.gradient_norm = field<double>(j, "gradient_norm");
  if (j.contains("converged")) f.converged = field<bool>(j, "converged");
  if (j.contains("data")) f.data_tag = {field<std::uint64_t>(j["data"], "seed"), field<std::string>(j["data"], "source")};
  return f;
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += "\n";
  for (const auto& row : rows) {
    require(row.size() == header.size(), "CSV row width does not match the header");
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_double(row[i]);
    out += "\n";
  }
  return out;
}

CsvTable scaling_table(const EntropyScaling& s) {
  CsvTable t{{"L_A", "S", "slope"}, {}};
  for (const auto& p : s.points) t.rows.push_back({static_cast<double>(p.subsystem_size), p.entropy, s.slope});
  return t;
}

CsvTable profile_table(const std::vector<int>& sites, const std::vector<double>& beta, const std::vector<double>& ref) {
  require(sites.size() == beta.size() && beta.size() == ref.size(), "profile columns differ in length");
  CsvTable t{{"site", "beta", "beta_ref"}, {}};
  for (std::size_t i = 0; i < sites.size(); ++i) t.rows.push_back({static_cast<double>(sites[i]), beta[i], ref[i]});
  return t;
}

CsvTable verification_table(const WindowedFidelity& f) {
  CsvTable t{{"window_start", "f_max", "f_mean", "err"}, {}};
  for (const auto& w : f.windows) t.rows.push_back({static_cast<double>(w.window_start), w.f_max, w.f_mean, w.err});
  return t;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw NumericalError("SHA-256 digest failed", 0);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

}  // namespace ehtk
