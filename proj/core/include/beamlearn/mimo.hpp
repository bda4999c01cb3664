#pragma once

#include "beamlearn/channel.hpp"
#include "beamlearn/linalg.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace beamlearn {

enum class Constellation { Qpsk, Qam16 };

/// Gray-labeled, unit average energy. Label bits are (I bits, Q bits), MSB first.
std::size_t bits_per_symbol(Constellation c);
std::vector<Complex> constellation_points(Constellation c);
/// Nearest constellation point's label.
unsigned slice(Constellation c, Complex z);

struct Detector {
  enum class Kind { AntennaLmmse, BeamspaceLmmse, BeamspaceLe };
  Kind kind = Kind::AntennaLmmse;
  double density = 1.0;  // BeamspaceLe only
};

enum class Estimator { PerfectCsi, PilotLs, PilotLsDenoise };

struct SimConfig {
  std::size_t antennas = 64;
  std::size_t users = 8;
  Constellation constellation = Constellation::Qpsk;
  std::vector<double> snr_grid_db;
  std::size_t trials_per_snr = 1000;
  Detector detector;
  Estimator estimator = Estimator::PerfectCsi;
  UnitaryTransform transform = UnitaryTransform::identity(1);
  std::string transform_name = "identity";  // echoed in report headers
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool power_control = false;
};

/// Throws ConfigError / DimensionError for an invalid configuration.
void validate(const SimConfig& cfg);

struct BerPoint {
  double snr_db = 0.0;
  std::uint64_t bits = 0;
  std::uint64_t errors = 0;
  double ber = 0.0;
  /// Sums over trials of ||H s||^2 and ||n||^2 for the data vector.
  double signal_energy = 0.0;
  double noise_energy = 0.0;
};

struct BerReport {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<BerPoint> points;
};

/// Per trial (sub-seed derived from seed, SNR index and trial index): draw a
/// B x U channel, send uniform random symbols through r = H s + n with
/// N0 = ||H||_F^2 / (B * snr), estimate the channel, detect, count bit errors.
/// Results do not depend on cfg.threads.
BerReport simulate_ber(const SimConfig& cfg, const ChannelModel& source);
BerReport simulate_ber(const SimConfig& cfg, const SampleSet& source);

/// s = (H^H H + (N0 / Es) I)^{-1} H^H r before slicing.
CVector lmmse_estimate(const CMatrix& h, const CVector& r, double n0, double es = 1.0);
/// Sliced labels of lmmse_estimate.
std::vector<unsigned> lmmse_detect(const CMatrix& h, const CVector& r, double n0, double es,
                                   Constellation c);

struct LeReduction {
  CMatrix h;
  CVector r;
  std::vector<std::size_t> rows;  // kept rows in ascending order
};

/// Keeps the ceil(density * B) rows of h with the largest energy (ties to the
/// lower index), in their original order, and the same entries of r.
LeReduction le_reduce(const CMatrix& h, const CVector& r, double density);
std::size_t le_kept_rows(std::size_t rows, double density);

/// SURE-optimal threshold for complex soft-thresholding of z under CN(0, sigma2)
/// noise. Candidates are 0 and every |z_j|; ties resolve to the smaller threshold.
double sure_threshold(const CVector& z, double sigma2);
/// z_j * max(0, 1 - tau / |z_j|).
CVector soft_threshold(const CVector& z, double tau);

/// Pilots P = unitary U x U DFT; Y = H P + N, H_ls = Y P^H. With PilotLsDenoise
/// each column is soft-thresholded in the beamspace of `a` with a SURE threshold.
/// PerfectCsi returns H.
CMatrix estimate_channel_pilot(const CMatrix& h, const UnitaryTransform& a, double n0,
                               Estimator mode, std::mt19937_64& rng);

struct SparsityRow {
  std::string name;
  double l4 = 0.0;
  double ratio = 0.0;  // l4 / l4 of the DFT
};

struct SparsityReport {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<SparsityRow> rows;
};

/// Weighted mean ||A y||_4^4 over the test set for each named transform, with
/// ratios normalized by the DFT of the same size.
SparsityReport sparsity_report(const SampleSet& test,
                               const std::vector<std::pair<std::string, UnitaryTransform>>& transforms,
                               unsigned threads = 1);

void write_ber_csv(std::ostream& os, const BerReport& report);
void write_sparsity_csv(std::ostream& os, const SparsityReport& report);

const char* to_string(Constellation c);
const char* to_string(Estimator e);
std::string to_string(const Detector& d);

}  // namespace beamlearn
