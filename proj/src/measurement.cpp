#include "ehtk/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace ehtk {

double SettingRecord::total() const {
  double t = 0;
  for (const auto& [_, c] : counts) t += c;
  return t;
}

void MeasurementDataset::validate() const {
  require(!register_sites.empty(), "dataset register is empty");
  require(is_sorted_unique(register_sites), "dataset register must be sorted and unique");
  require(register_sites.front() >= 0, "dataset register has a negative site");
  require(shots >= 1, "dataset shots must be at least 1");
  const auto n = register_sites.size();
  for (const auto& rec : records) {
    require(rec.axes.size() == n, "setting '" + rec.axes + "' does not match the register size");
    require(rec.axes.find_first_not_of("XYZ") == std::string::npos, "setting '" + rec.axes + "' has an axis other than X/Y/Z");
    for (const auto& [bits, c] : rec.counts) {
      require(bits.size() == n && bits.find_first_not_of("01") == std::string::npos,
              "bitstring '" + bits + "' is malformed");
      require(c > 0 && std::isfinite(c), "counts must be positive");
    }
  }
}

std::vector<std::string> window_settings(int n_sites, int window) {
  require(window >= 1, "window must be at least 1");
  require(window <= n_sites, "window larger than the register");
  require(window <= 12, "window too large to enumerate");
  const char axis[3] = {'X', 'Y', 'Z'};
  int count = 1;
  for (int i = 0; i < window; ++i) count *= 3;
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    std::vector<int> digit(static_cast<std::size_t>(window));
    int rest = k;
    for (int t = window - 1; t >= 0; --t) {
      digit[static_cast<std::size_t>(t)] = rest % 3;
      rest /= 3;
    }
    std::string s(static_cast<std::size_t>(n_sites), 'Z');
    for (int i = 0; i < n_sites; ++i) s[static_cast<std::size_t>(i)] = axis[digit[static_cast<std::size_t>(i % window)]];
    out.push_back(std::move(s));
  }
  return out;
}

std::string restrict_axes(const std::string& axes, const std::vector<int>& positions) {
  std::string out;
  out.reserve(positions.size());
  for (int p : positions) out.push_back(axes.at(static_cast<std::size_t>(p)));
  return out;
}

RVector rotated_probabilities(const CMatrix& rho, int n_sites, const std::string& axes) {
  require(static_cast<int>(axes.size()) == n_sites, "setting length does not match the register");
  CMatrix m = rho;
  for (int s = 0; s < n_sites; ++s) {
    const char a = axes[static_cast<std::size_t>(s)];
    if (a == 'Z') continue;
    const Mat2 u = op::basis_rotation(a);
    apply_site_left(m, n_sites, s, u);
    apply_site_right_adjoint(m, n_sites, s, u);
  }
  RVector p = m.diagonal().real().cwiseMax(0.0);
  return p / p.sum();
}

RVector rotated_probabilities(const PureState& psi, const Sites& register_sites, const std::string& axes) {
  const int n = psi.n_sites();
  require(axes.size() == register_sites.size(), "setting length does not match the register");
  CVector v = psi.amplitudes();
  for (std::size_t k = 0; k < register_sites.size(); ++k)
    if (axes[k] != 'Z') apply_site(v, n, register_sites[k], op::basis_rotation(axes[k]));
  RVector p = RVector::Zero(static_cast<Eigen::Index>(dim_of(static_cast<int>(register_sites.size()))));
  for (Eigen::Index x = 0; x < v.size(); ++x)
    p(static_cast<Eigen::Index>(gather_bits(static_cast<std::uint64_t>(x), n, register_sites))) += std::norm(v(x));
  return p / p.sum();
}

namespace {

MeasurementDataset sample_from(const std::function<RVector(const std::string&)>& born, Sites reg,
                               const std::vector<std::string>& settings, long long shots, std::uint64_t seed,
                               std::string source) {
  require(shots >= 1, "shots must be at least 1");
  MeasurementDataset data{std::move(reg), shots, seed, std::move(source), {}};
  const int n = data.n_sites();
  data.records.reserve(settings.size());
  for (std::size_t k = 0; k < settings.size(); ++k) {
    require(static_cast<int>(settings[k].size()) == n, "setting length does not match the register");
    auto rng = make_stream(seed, {k});
    SettingRecord rec{settings[k], {}};
    for (const auto& [idx, c] : sample_histogram(born(settings[k]), shots, rng))
      rec.counts[index_to_bits(idx, n)] = static_cast<double>(c);
    data.records.push_back(std::move(rec));
  }
  data.validate();
  return data;
}

}  // namespace

MeasurementDataset sample_dataset(const PureState& source, const Sites& register_sites,
                                  const std::vector<std::string>& settings, long long shots,
                                  const std::optional<NoiseParams>& noise, std::uint64_t seed,
                                  std::string source_label) {
  require(!register_sites.empty() && is_sorted_unique(register_sites), "register must be sorted, unique and non-empty");
  require(register_sites.front() >= 0 && register_sites.back() < source.n_sites(),
          "register larger than the source state");
  if (noise && !noise->is_identity()) {
    DensityMatrix rho = reduced_density_matrix(source, register_sites);
    return sample_dataset(rho, settings, shots, noise, seed, std::move(source_label));
  }
  return sample_from([&](const std::string& axes) { return rotated_probabilities(source, register_sites, axes); },
                     register_sites, settings, shots, seed, std::move(source_label));
}

MeasurementDataset sample_dataset(const DensityMatrix& source, const std::vector<std::string>& settings,
                                  long long shots, const std::optional<NoiseParams>& noise, std::uint64_t seed,
                                  std::string source_label) {
  source.validate(1e-8);
  const CMatrix rho = noise ? apply_channel(source.matrix, source.n_sites(), *noise) : source.matrix;
  const int n = source.n_sites();
  return sample_from([&](const std::string& axes) { return rotated_probabilities(rho, n, axes); }, source.sites,
                     settings, shots, seed, std::move(source_label));
}

MeasurementDataset z2_symmetrize_dataset(const MeasurementDataset& data) {
  MeasurementDataset out = data;
  for (auto& rec : out.records) {
    std::map<std::string, double> sym;
    for (const auto& [bits, c] : rec.counts) {
      std::string flipped = bits;
      for (std::size_t i = 0; i < bits.size(); ++i)
        if (rec.axes[i] != 'X') flipped[i] = bits[i] == '1' ? '0' : '1';
      sym[bits] += 0.5 * c;
      sym[flipped] += 0.5 * c;
    }
    rec.counts = std::move(sym);
  }
  return out;
}

std::pair<MeasurementDataset, MeasurementDataset> split_dataset(const MeasurementDataset& data, std::uint64_t seed) {
  MeasurementDataset a = data, b = data;
  a.records.clear();
  b.records.clear();
  a.shots = data.shots / 2;
  b.shots = data.shots - a.shots;
  a.seed = b.seed = seed;
  a.source = data.source + "/half0";
  b.source = data.source + "/half1";
  for (std::size_t k = 0; k < data.records.size(); ++k) {
    const auto& rec = data.records[k];
    std::vector<const std::string*> shots;
    for (const auto& [bits, c] : rec.counts) {
      require(c == std::floor(c), "split_dataset needs integer counts");
      for (long long i = 0; i < static_cast<long long>(c); ++i) shots.push_back(&bits);
    }
    auto rng = make_stream(seed, {k});
    // Fisher-Yates with the library's own uniform draw keeps the split
    // identical across standard-library implementations.
    for (std::size_t i = shots.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
      std::swap(shots[i - 1], shots[std::min(j, i - 1)]);
    }
    SettingRecord ra{rec.axes, {}}, rb{rec.axes, {}};
    const std::size_t half = shots.size() / 2;
    for (std::size_t i = 0; i < shots.size(); ++i) (i < half ? ra : rb).counts[*shots[i]] += 1.0;
    a.records.push_back(std::move(ra));
    b.records.push_back(std::move(rb));
  }
  return {std::move(a), std::move(b)};
}

ProbabilityTable empirical_probabilities(const MeasurementDataset& data, const Sites& subsystem) {
  require(!subsystem.empty(), "subsystem is empty");
  require(is_sorted_unique(subsystem), "subsystem sites must be sorted and unique");
  const auto pos = positions_in(data.register_sites, subsystem);
  const int l = static_cast<int>(subsystem.size());
  require(l <= kDenseSiteCap, "subsystem larger than the dense cap");
  ProbabilityTable t{subsystem, {}, {}};
  for (const auto& rec : data.records) {
    const double total = rec.total();
    if (!(total > 0)) continue;
    RVector p = RVector::Zero(static_cast<Eigen::Index>(dim_of(l)));
    for (const auto& [bits, c] : rec.counts) {
      std::uint64_t idx = 0;
      for (int q : pos) idx = (idx << 1) | static_cast<std::uint64_t>(bits[static_cast<std::size_t>(q)] == '1');
      p(static_cast<Eigen::Index>(idx)) += c;
    }
    t.axes.push_back(restrict_axes(rec.axes, pos));
    t.probs.push_back(p / total);
  }
  return t;
}

ProbabilityTable exact_probabilities(const DensityMatrix& rho, const std::vector<std::string>& axes) {
  ProbabilityTable t{rho.sites, axes, {}};
  std::map<std::string, RVector> cache;
  for (const auto& a : axes) {
    auto it = cache.find(a);
    if (it == cache.end()) it = cache.emplace(a, rotated_probabilities(rho.matrix, rho.n_sites(), a)).first;
    t.probs.push_back(it->second);
  }
  return t;
}

}  // namespace ehtk
