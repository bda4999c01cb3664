#include "beamlearn/channel.hpp"

#include "beamlearn/errors.hpp"
#include "beamlearn/parallel.hpp"
#include "beamlearn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <string>

namespace beamlearn {

CVector steering_vector(const SteeringConfig& cfg, double omega) {
  const auto b = static_cast<Eigen::Index>(cfg.antennas);
  const double w = std::remainder(omega, kTwoPi);
  CVector p(b);
  for (Eigen::Index n = 0; n < b; ++n) p(n) = std::polar(1.0, w * static_cast<double>(n));
  return p;
}

SampleSet::SampleSet(CMatrix samples)
    : SampleSet(samples, RVector::Constant(samples.cols(), 1.0)) {}

SampleSet::SampleSet(CMatrix samples, RVector weights)
    : samples_(std::move(samples)), weights_(std::move(weights)) {
  if (samples_.rows() == 0 || samples_.cols() == 0)
    throw DimensionError("sample set must contain at least one non-empty sample");
  if (weights_.size() != samples_.cols())
    throw DimensionError("sample set has " + std::to_string(samples_.cols()) + " samples but " +
                         std::to_string(weights_.size()) + " weights");
  if (!all_finite(samples_)) throw ParseError("sample set has non-finite entries");
  for (Eigen::Index s = 0; s < weights_.size(); ++s)
    if (!std::isfinite(weights_(s)) || weights_(s) < 0.0)
      throw ParseError("weight " + std::to_string(s) + " is negative or non-finite");
  const double total = weights_.sum();
  if (!(total > 0.0)) throw ParseError("sample weights sum to zero");
  weights_ /= total;
}

bool SampleSet::uniform_weights() const {
  const double w0 = 1.0 / static_cast<double>(size());
  return (weights_.array() - w0).abs().maxCoeff() <= 1e-15;
}

SampleSet SampleSet::select(const std::vector<std::size_t>& columns) const {
  CMatrix out(samples_.rows(), static_cast<Eigen::Index>(columns.size()));
  RVector w(static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] >= size()) throw IndexError("sample index out of range");
    out.col(static_cast<Eigen::Index>(j)) = samples_.col(static_cast<Eigen::Index>(columns[j]));
    w(static_cast<Eigen::Index>(j)) = weights_(static_cast<Eigen::Index>(columns[j]));
  }
  return SampleSet(std::move(out), std::move(w));
}

MultiPath MultiPath::unit_energy(std::size_t antennas, std::size_t paths) {
  if (paths == 0) throw ConfigError("multipath model needs at least one path");
  return MultiPath{antennas, paths, 1.0 / static_cast<double>(paths)};
}

std::size_t model_dim(const ChannelModel& model) {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Empirical>)
          return m.set.dim();
        else
          return m.antennas;
      },
      model);
}

namespace {

CVector draw_one(const UniformSinglePath& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  return steering_vector({m.antennas}, angle(rng));
}

CVector draw_one(const MultiPath& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::normal_distribution<double> gain(0.0, std::sqrt(m.gain_scale / 2.0));
  CVector h = CVector::Zero(static_cast<Eigen::Index>(m.antennas));
  for (std::size_t l = 0; l < m.paths; ++l) {
    const double re = gain(rng);
    const double im = gain(rng);
    const double omega = angle(rng);
    h += Complex(re, im) * steering_vector({m.antennas}, omega);
  }
  return h;
}

void validate(const UniformSinglePath& m) {
  if (m.antennas < 1) throw ConfigError("channel model needs at least one antenna");
}

void validate(const MultiPath& m) {
  if (m.antennas < 1) throw ConfigError("channel model needs at least one antenna");
  if (m.paths < 1) throw ConfigError("multipath model needs L >= 1");
  if (!(m.gain_scale > 0.0)) throw ConfigError("multipath gain scale must be positive");
}

}  // namespace

SampleSet sample(const ChannelModel& model, std::size_t count, std::uint64_t seed,
                 unsigned threads) {
  if (const auto* e = std::get_if<Empirical>(&model)) return e->set;
  if (count == 0) throw ConfigError("sample count must be >= 1");
  return std::visit(
      [&](const auto& m) -> SampleSet {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Empirical>) {
          return m.set;
        } else {
          validate(m);
          CMatrix out(static_cast<Eigen::Index>(m.antennas), static_cast<Eigen::Index>(count));
          parallel_for(count, threads, [&](std::size_t s) {
            auto rng = make_rng(seed, {s});
            out.col(static_cast<Eigen::Index>(s)) = draw_one(m, rng);
          });
          return SampleSet(std::move(out));
        }
      },
      model);
}

std::filesystem::path weights_sidecar(const std::filesystem::path& path) {
  auto p = path;
  p += ".weights.csv";
  return p;
}

SampleSet load_samples(const std::filesystem::path& path, MatrixFormat format) {
  CMatrix data = load_matrix(path, format);
  const auto sidecar = weights_sidecar(path);
  if (!std::filesystem::exists(sidecar)) return SampleSet(std::move(data));

  std::ifstream is(sidecar);
  if (!is) throw IoError("cannot open weights file '" + sidecar.string() + "'");
  std::vector<double> w;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line.front() == '#') continue;
    try {
      std::size_t used = 0;
      w.push_back(std::stod(line, &used));
    } catch (const std::exception&) {
      throw ParseError(sidecar.string() + ": bad weight on line " + std::to_string(w.size() + 1));
    }
  }
  if (w.size() != static_cast<std::size_t>(data.cols()))
    throw ParseError(sidecar.string() + ": " + std::to_string(w.size()) + " weights for " +
                     std::to_string(data.cols()) + " samples");
  return SampleSet(std::move(data), Eigen::Map<RVector>(w.data(), static_cast<Eigen::Index>(w.size())));
}

SampleSet load_samples(const std::filesystem::path& path) {
  return load_samples(path, format_from_path(path));
}

void save_samples(const SampleSet& set, const std::filesystem::path& path, MatrixFormat format) {
  save_matrix(set.samples(), path, format);
  const auto sidecar = weights_sidecar(path);
  if (set.uniform_weights()) {
    std::error_code ec;
    std::filesystem::remove(sidecar, ec);
    return;
  }
  std::ofstream os(sidecar);
  if (!os) throw IoError("cannot write weights file '" + sidecar.string() + "'");
  os.precision(17);
  for (Eigen::Index s = 0; s < set.weights().size(); ++s) os << set.weights()(s) << '\n';
}

void save_samples(const SampleSet& set, const std::filesystem::path& path) {
  save_samples(set, path, format_from_path(path));
}

std::pair<SampleSet, SampleSet> split_train_test(const SampleSet& set, double train_fraction,
                                                 std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train fraction must lie in (0, 1)");
  const std::size_t s = set.size();
  if (s < 2) throw ConfigError("splitting needs at least two samples");
  std::vector<std::size_t> order(s);
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_rng(seed, {0x5b117});
  for (std::size_t i = s - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(order[i], order[j]);
  }
  auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(s)));
  n_train = std::clamp<std::size_t>(n_train, 1, s - 1);
  const std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  const std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return {set.select(train), set.select(test)};
}

void apply_power_control(CMatrix& h) {
  if (h.cols() == 0) return;
  const Eigen::VectorXd energy = h.colwise().squaredNorm().transpose();
  const double cap = energy.minCoeff() * kPowerControlRatio;
  for (Eigen::Index u = 0; u < h.cols(); ++u)
    if (energy(u) > cap) h.col(u) *= std::sqrt(cap / energy(u));
}

CMatrix synthesize_mimo_channel(std::size_t antennas, std::size_t users,
                                const ChannelModel& model, std::uint64_t seed,
                                bool power_control) {
  if (model_dim(model) != antennas)
    throw DimensionError("channel model dimension " + std::to_string(model_dim(model)) +
                         " does not match B=" + std::to_string(antennas));
  if (users == 0) throw ConfigError("need at least one user");
  CMatrix h(static_cast<Eigen::Index>(antennas), static_cast<Eigen::Index>(users));
  if (const auto* e = std::get_if<Empirical>(&model)) {
    const auto& set = e->set;
    auto rng = make_rng(seed, {0xc01});
    std::discrete_distribution<std::size_t> pick(set.weights().data(),
                                                 set.weights().data() + set.weights().size());
    std::set<std::size_t> taken;
    for (std::size_t u = 0; u < users; ++u) {
      std::size_t idx = pick(rng);
      // distinct columns whenever the set is large enough
      for (int retry = 0; taken.count(idx) && taken.size() < set.size() && retry < 1000; ++retry)
        idx = pick(rng);
      taken.insert(idx);
      h.col(static_cast<Eigen::Index>(u)) = set.samples().col(static_cast<Eigen::Index>(idx));
    }
  } else {
    for (std::size_t u = 0; u < users; ++u) {
      const auto col = sample(model, 1, derive_seed(seed, {u}));
      h.col(static_cast<Eigen::Index>(u)) = col.samples().col(0);
    }
  }
  if (power_control) apply_power_control(h);
  return h;
}

SampleSet zero_pad_antennas(const SampleSet& set, const std::vector<std::size_t>& dead,
                            std::size_t full_dim) {
  const std::set<std::size_t> dead_set(dead.begin(), dead.end());
  if (dead_set.size() != dead.size() || set.dim() + dead.size() != full_dim)
    throw DimensionError("zero padding: working + dead antennas must equal the full array size");
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(full_dim),
                              static_cast<Eigen::Index>(set.size()));
  Eigen::Index src = 0;
  for (std::size_t r = 0; r < full_dim; ++r) {
    if (dead_set.count(r)) continue;
    out.row(static_cast<Eigen::Index>(r)) = set.samples().row(src++);
  }
  if (static_cast<std::size_t>(src) != set.dim())
    throw DimensionError("zero padding: dead antenna index out of range");
  return SampleSet(std::move(out), set.weights());
}

UnitaryTransform embed_transform(const UnitaryTransform& a, const std::vector<std::size_t>& dead,
                                 std::size_t full_dim) {
  const std::set<std::size_t> dead_set(dead.begin(), dead.end());
  if (dead_set.size() != dead.size() || a.dim() + dead.size() != full_dim)
    throw DimensionError("embed: working + dead antennas must equal the full array size");
  std::vector<Eigen::Index> working;
  for (std::size_t r = 0; r < full_dim; ++r)
    if (!dead_set.count(r)) working.push_back(static_cast<Eigen::Index>(r));
  if (working.size() != a.dim()) throw DimensionError("embed: dead antenna index out of range");
  const auto n = static_cast<Eigen::Index>(full_dim);
  CMatrix out = CMatrix::Identity(n, n);
  for (std::size_t r = 0; r < working.size(); ++r)
    for (std::size_t c = 0; c < working.size(); ++c)
      out(working[r], working[c]) = a.matrix()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  return UnitaryTransform(std::move(out));
}

}  // namespace beamlearn
