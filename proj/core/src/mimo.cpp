#include "beamlearn/mimo.hpp"

#include "beamlearn/errors.hpp"
#include "beamlearn/objective.hpp"
#include "beamlearn/parallel.hpp"
#include "beamlearn/rng.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

namespace beamlearn {

namespace {

// levels per axis, indexed by position; Gray label of position p is p ^ (p >> 1)
double axis_scale(Constellation c) { return c == Constellation::Qpsk ? 1.0 / std::sqrt(2.0) : 1.0 / std::sqrt(10.0); }
unsigned axis_levels(Constellation c) { return c == Constellation::Qpsk ? 2 : 4; }
unsigned axis_bits(Constellation c) { return c == Constellation::Qpsk ? 1 : 2; }

unsigned gray(unsigned p) { return p ^ (p >> 1); }

unsigned axis_label(Constellation c, double v) {
  const unsigned m = axis_levels(c);
  // positions sit at 2p - (m - 1) in units of axis_scale
  const double u = (v / axis_scale(c) + static_cast<double>(m - 1)) / 2.0;
  const double p = std::clamp(std::round(u), 0.0, static_cast<double>(m - 1));
  return gray(static_cast<unsigned>(p));
}

}  // namespace

std::size_t bits_per_symbol(Constellation c) { return 2 * axis_bits(c); }

std::vector<Complex> constellation_points(Constellation c) {
  const unsigned m = axis_levels(c);
  const unsigned b = axis_bits(c);
  std::vector<Complex> pts(static_cast<std::size_t>(m) * m);
  for (unsigned pi = 0; pi < m; ++pi)
    for (unsigned pq = 0; pq < m; ++pq) {
      const double re = (2.0 * pi - (m - 1)) * axis_scale(c);
      const double im = (2.0 * pq - (m - 1)) * axis_scale(c);
      pts[(gray(pi) << b) | gray(pq)] = Complex(re, im);
    }
  return pts;
}

unsigned slice(Constellation c, Complex z) {
  return (axis_label(c, z.real()) << axis_bits(c)) | axis_label(c, z.imag());
}

void validate(const SimConfig& cfg) {
  if (cfg.users == 0) throw ConfigError("need at least one user");
  if (cfg.users > cfg.antennas)
    throw ConfigError("users (" + std::to_string(cfg.users) + ") must not exceed antennas (" +
                      std::to_string(cfg.antennas) + ")");
  if (cfg.trials_per_snr == 0) throw ConfigError("trials per SNR must be >= 1");
  if (cfg.snr_grid_db.empty()) throw ConfigError("SNR grid is empty");
  for (const double s : cfg.snr_grid_db)
    if (!std::isfinite(s)) throw ConfigError("SNR grid has a non-finite entry");
  if (cfg.detector.kind == Detector::Kind::BeamspaceLe &&
      !(cfg.detector.density > 0.0 && cfg.detector.density <= 1.0))
    throw ConfigError("LE density must be in (0, 1]");
  if (cfg.transform.dim() != cfg.antennas)
    throw DimensionError("transform is " + std::to_string(cfg.transform.dim()) +
                         "-dimensional, expected B=" + std::to_string(cfg.antennas));
}

CVector lmmse_estimate(const CMatrix& h, const CVector& r, double n0, double es) {
  if (h.rows() != r.size()) throw DimensionError("LMMSE: channel rows do not match receive vector");
  if (!(es > 0.0) || n0 < 0.0) throw ConfigError("LMMSE: need Es > 0 and N0 >= 0");
  const auto u = h.cols();
  CMatrix gram = h.adjoint() * h;
  gram.diagonal().array() += n0 / es;
  Eigen::LLT<CMatrix> llt(gram);
  if (llt.info() != Eigen::Success) throw SingularInputError("LMMSE: regularized Gram matrix is singular");
  CVector s = llt.solve(h.adjoint() * r);
  if (s.size() != u || !all_finite(s)) throw SingularInputError("LMMSE: solve produced non-finite values");
  return s;
}

std::vector<unsigned> lmmse_detect(const CMatrix& h, const CVector& r, double n0, double es,
                                   Constellation c) {
  const CVector s = lmmse_estimate(h, r, n0, es);
  std::vector<unsigned> labels(static_cast<std::size_t>(s.size()));
  for (Eigen::Index u = 0; u < s.size(); ++u) labels[static_cast<std::size_t>(u)] = slice(c, s(u));
  return labels;
}

std::size_t le_kept_rows(std::size_t rows, double density) {
  if (!(density > 0.0 && density <= 1.0)) throw ConfigError("LE density must be in (0, 1]");
  const auto keep = static_cast<std::size_t>(std::ceil(density * static_cast<double>(rows) - 1e-9));
  return std::clamp<std::size_t>(keep, 1, rows);
}

LeReduction le_reduce(const CMatrix& h, const CVector& r, double density) {
  if (h.rows() != r.size()) throw DimensionError("LE: channel rows do not match receive vector");
  const auto n = static_cast<std::size_t>(h.rows());
  const std::size_t keep = le_kept_rows(n, density);
  const Eigen::VectorXd energy = h.rowwise().squaredNorm();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return energy(static_cast<Eigen::Index>(a)) > energy(static_cast<Eigen::Index>(b));
  });
  order.resize(keep);
  std::sort(order.begin(), order.end());
  LeReduction out;
  out.h.resize(static_cast<Eigen::Index>(keep), h.cols());
  out.r.resize(static_cast<Eigen::Index>(keep));
  for (std::size_t j = 0; j < keep; ++j) {
    out.h.row(static_cast<Eigen::Index>(j)) = h.row(static_cast<Eigen::Index>(order[j]));
    out.r(static_cast<Eigen::Index>(j)) = r(static_cast<Eigen::Index>(order[j]));
  }
  out.rows = std::move(order);
  return out;
}

double sure_threshold(const CVector& z, double sigma2) {
  const auto n = static_cast<std::size_t>(z.size());
  if (n == 0 || !(sigma2 > 0.0)) return 0.0;
  std::vector<double> mag(n);
  for (std::size_t j = 0; j < n; ++j) mag[j] = std::abs(z(static_cast<Eigen::Index>(j)));
  std::sort(mag.begin(), mag.end());
  // suffix sums of 1/|z| over entries strictly above the candidate
  std::vector<double> inv_suffix(n + 1, 0.0);
  for (std::size_t j = n; j-- > 0;) inv_suffix[j] = inv_suffix[j + 1] + (mag[j] > 0.0 ? 1.0 / mag[j] : 0.0);
  const double dn = static_cast<double>(n);

  std::size_t nonzero = 0;
  for (const double m : mag) nonzero += m > 0.0;
  double best_tau = 0.0;
  double best = -dn * sigma2 + sigma2 * 2.0 * static_cast<double>(nonzero);

  double below_sq = 0.0;  // sum of |z|^2 over entries <= tau
  for (std::size_t j = 0; j < n; ++j) {
    below_sq += mag[j] * mag[j];
    if (j + 1 < n && mag[j + 1] == mag[j]) continue;  // evaluate once per distinct magnitude
    const double tau = mag[j];
    const double above = static_cast<double>(n - j - 1);
    const double risk = -dn * sigma2 + below_sq + above * tau * tau +
                        sigma2 * (2.0 * above - tau * inv_suffix[j + 1]);
    if (risk < best) {
      best = risk;
      best_tau = tau;
    }
  }
  return best_tau;
}

CVector soft_threshold(const CVector& z, double tau) {
  CVector out(z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    const double m = std::abs(z(j));
    out(j) = m > tau ? z(j) * (1.0 - tau / m) : Complex{};
  }
  return out;
}

CMatrix estimate_channel_pilot(const CMatrix& h, const UnitaryTransform& a, double n0,
                               Estimator mode, std::mt19937_64& rng) {
  if (mode == Estimator::PerfectCsi) return h;
  const auto b = static_cast<std::size_t>(h.rows());
  const auto u = static_cast<std::size_t>(h.cols());
  if (u > b) throw DimensionError("pilot estimation needs U <= B");
  const CMatrix p = dft_matrix(u).matrix();
  CMatrix y = h * p;
  if (n0 > 0.0) y += complex_gaussian(b, u, rng, n0);
  CMatrix est = y * p.adjoint();
  if (mode == Estimator::PilotLsDenoise) {
    if (a.dim() != b) throw DimensionError("denoising transform dimension does not match B");
    for (Eigen::Index c = 0; c < est.cols(); ++c) {
      const CVector beam = a.matrix() * est.col(c);
      const CVector clean = soft_threshold(beam, sure_threshold(beam, n0));
      est.col(c) = a.matrix().adjoint() * clean;
    }
  }
  return est;
}

namespace {

struct TrialResult {
  std::uint64_t errors = 0;
  double signal = 0.0;
  double noise = 0.0;
};

TrialResult run_trial(const SimConfig& cfg, const ChannelModel& source,
                      const std::vector<Complex>& points, double snr_lin, std::size_t snr_idx,
                      std::size_t trial) {
  const CMatrix h = synthesize_mimo_channel(cfg.antennas, cfg.users, source,
                                            derive_seed(cfg.seed, {snr_idx, trial, 0}),
                                            cfg.power_control);
  auto rng = make_rng(cfg.seed, {snr_idx, trial, 1});
  const double energy = h.squaredNorm();
  if (!(energy > 0.0)) throw SingularInputError("channel draw has zero energy");
  const double n0 = energy / (static_cast<double>(cfg.antennas) * snr_lin);

  std::uniform_int_distribution<unsigned> pick(0, static_cast<unsigned>(points.size() - 1));
  std::vector<unsigned> sent(cfg.users);
  CVector s(static_cast<Eigen::Index>(cfg.users));
  for (std::size_t k = 0; k < cfg.users; ++k) {
    sent[k] = pick(rng);
    s(static_cast<Eigen::Index>(k)) = points[sent[k]];
  }
  const CVector hs = h * s;
  const CVector noise = complex_gaussian(cfg.antennas, 1, rng, n0).col(0);
  const CVector r = hs + noise;

  const CMatrix est = estimate_channel_pilot(h, cfg.transform, n0, cfg.estimator, rng);
  std::vector<unsigned> got;
  switch (cfg.detector.kind) {
    case Detector::Kind::AntennaLmmse:
      got = lmmse_detect(est, r, n0, 1.0, cfg.constellation);
      break;
    case Detector::Kind::BeamspaceLmmse:
      got = lmmse_detect(cfg.transform.matrix() * est, cfg.transform.matrix() * r, n0, 1.0,
                         cfg.constellation);
      break;
    case Detector::Kind::BeamspaceLe: {
      const auto red = le_reduce(cfg.transform.matrix() * est, cfg.transform.matrix() * r,
                                 cfg.detector.density);
      got = lmmse_detect(red.h, red.r, n0, 1.0, cfg.constellation);
      break;
    }
  }
  TrialResult out;
  for (std::size_t k = 0; k < cfg.users; ++k)
    out.errors += static_cast<std::uint64_t>(std::popcount(sent[k] ^ got[k]));
  out.signal = hs.squaredNorm();
  out.noise = noise.squaredNorm();
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

BerReport simulate_ber(const SimConfig& cfg, const ChannelModel& source) {
  validate(cfg);
  if (model_dim(source) != cfg.antennas)
    throw DimensionError("channel source dimension " + std::to_string(model_dim(source)) +
                         " does not match B=" + std::to_string(cfg.antennas));
  const auto points = constellation_points(cfg.constellation);
  BerReport report;
  std::string grid;
  for (const double s : cfg.snr_grid_db) grid += (grid.empty() ? "" : ",") + format_double(s);
  report.metadata = {
      {"B", std::to_string(cfg.antennas)},
      {"U", std::to_string(cfg.users)},
      {"constellation", to_string(cfg.constellation)},
      {"detector", to_string(cfg.detector)},
      {"estimator", to_string(cfg.estimator)},
      {"transform", cfg.transform_name},
      {"snr_db", grid},
      {"trials", std::to_string(cfg.trials_per_snr)},
      {"seed", std::to_string(cfg.seed)},
      {"power_control", cfg.power_control ? "true" : "false"},
  };
  const std::uint64_t bits_per_trial = cfg.users * bits_per_symbol(cfg.constellation);
  std::vector<TrialResult> results(cfg.trials_per_snr);
  for (std::size_t si = 0; si < cfg.snr_grid_db.size(); ++si) {
    const double snr_lin = std::pow(10.0, cfg.snr_grid_db[si] / 10.0);
    parallel_for(cfg.trials_per_snr, cfg.threads, [&](std::size_t t) {
      results[t] = run_trial(cfg, source, points, snr_lin, si, t);
    });
    BerPoint p;
    p.snr_db = cfg.snr_grid_db[si];
    p.bits = bits_per_trial * cfg.trials_per_snr;
    for (const auto& r : results) {
      p.errors += r.errors;
      p.signal_energy += r.signal;
      p.noise_energy += r.noise;
    }
    p.ber = static_cast<double>(p.errors) / static_cast<double>(p.bits);
    report.points.push_back(p);
  }
  return report;
}

BerReport simulate_ber(const SimConfig& cfg, const SampleSet& source) {
  return simulate_ber(cfg, ChannelModel{Empirical{source}});
}

SparsityReport sparsity_report(const SampleSet& test,
                               const std::vector<std::pair<std::string, UnitaryTransform>>& transforms,
                               unsigned threads) {
  if (transforms.empty()) throw ConfigError("sparsity report needs at least one transform");
  const auto ev = ObjectiveEvaluator::empirical(test, threads);
  const double baseline = ev.objective(dft_matrix(test.dim()).matrix());
  if (!(baseline > 0.0)) throw SingularInputError("test set has zero energy");
  SparsityReport report;
  report.metadata = {{"B", std::to_string(test.dim())}, {"samples", std::to_string(test.size())},
                     {"dft_l4", format_double(baseline)}};
  for (const auto& [name, a] : transforms) {
    if (a.dim() != test.dim())
      throw DimensionError("transform '" + name + "' is " + std::to_string(a.dim()) +
                           "-dimensional, test set is " + std::to_string(test.dim()));
    const double l4 = ev.objective(a.matrix());
    report.rows.push_back({name, l4, l4 / baseline});
  }
  return report;
}

namespace {

void write_metadata(std::ostream& os, const std::vector<std::pair<std::string, std::string>>& md) {
  for (const auto& [k, v] : md) os << "# " << k << '=' << v << '\n';
}

}  // namespace

void write_ber_csv(std::ostream& os, const BerReport& report) {
  write_metadata(os, report.metadata);
  const auto precision = os.precision(17);
  os << "snr_db,bits,errors,ber\n";
  for (const auto& p : report.points)
    os << p.snr_db << ',' << p.bits << ',' << p.errors << ',' << p.ber << '\n';
  os.precision(precision);
}

void write_sparsity_csv(std::ostream& os, const SparsityReport& report) {
  write_metadata(os, report.metadata);
  const auto precision = os.precision(17);
  os << "transform,l4,ratio\n";
  for (const auto& r : report.rows) os << r.name << ',' << r.l4 << ',' << r.ratio << '\n';
  os.precision(precision);
}

const char* to_string(Constellation c) { return c == Constellation::Qpsk ? "qpsk" : "16qam"; }

const char* to_string(Estimator e) {
  switch (e) {
    case Estimator::PerfectCsi: return "perfect";
    case Estimator::PilotLs: return "ls";
    case Estimator::PilotLsDenoise: return "ls+denoise";
  }
  return "?";
}

std::string to_string(const Detector& d) {
  switch (d.kind) {
    case Detector::Kind::AntennaLmmse: return "antenna";
    case Detector::Kind::BeamspaceLmmse: return "lmmse";
    case Detector::Kind::BeamspaceLe: return "le:" + format_double(d.density);
  }
  return "?";
}

}  // namespace beamlearn
