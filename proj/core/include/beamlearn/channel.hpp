#pragma once

#include "beamlearn/linalg.hpp"
#include "beamlearn/matrix_io.hpp"

#include <cstdint>
#include <filesystem>
#include <utility>
#include <variant>
#include <vector>

namespace beamlearn {

/// Uniform linear array with `antennas` elements at half-wavelength spacing.
struct SteeringConfig {
  std::size_t antennas = 2;
};

/// Response [1, e^{jw}, ..., e^{j(B-1)w}]^T of the array to angular frequency w.
CVector steering_vector(const SteeringConfig& cfg, double omega);

/// Finite weighted collection of complex vectors, stored one sample per column.
class SampleSet {
 public:
  /// Uniform weights 1/S.
  explicit SampleSet(CMatrix samples);
  /// Weights must be nonnegative with a positive sum; they are renormalized to sum to 1.
  SampleSet(CMatrix samples, RVector weights);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(samples_.rows()); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(samples_.cols()); }
  const CMatrix& samples() const noexcept { return samples_; }
  const RVector& weights() const noexcept { return weights_; }
  bool uniform_weights() const;

  /// Subset in the given column order, renormalized.
  SampleSet select(const std::vector<std::size_t>& columns) const;

 private:
  CMatrix samples_;
  RVector weights_;
};

/// y(Omega) = exp(j Omega b), Omega ~ Unif(0, 2 pi), b = [0, ..., B-1].
struct UniformSinglePath {
  std::size_t antennas = 2;
};

/// y = sum_l alpha_l p(w_l) with alpha_l ~ CN(0, gain_scale) and w_l ~ Unif(0, 2 pi).
struct MultiPath {
  std::size_t antennas = 2;
  std::size_t paths = 1;
  double gain_scale = 1.0;

  /// Unit average path energy: gain_scale = 1 / paths.
  static MultiPath unit_energy(std::size_t antennas, std::size_t paths);
};

/// Stored samples; sampling passes the set through unchanged.
struct Empirical {
  SampleSet set;
};

using ChannelModel = std::variant<UniformSinglePath, MultiPath, Empirical>;

std::size_t model_dim(const ChannelModel& model);

/// Draws `count` samples with uniform weights. Sample s uses the sub-seed
/// derive_seed(seed, {s}), so the result does not depend on `threads`.
/// For Empirical models `count` is ignored and the stored set is returned.
SampleSet sample(const ChannelModel& model, std::size_t count, std::uint64_t seed,
                 unsigned threads = 1);

/// Weights are read from the sidecar "<path>.weights.csv" when it exists.
SampleSet load_samples(const std::filesystem::path& path, MatrixFormat format);
SampleSet load_samples(const std::filesystem::path& path);
/// Writes the sidecar only for non-uniform weights (and removes a stale one otherwise).
void save_samples(const SampleSet& set, const std::filesystem::path& path, MatrixFormat format);
void save_samples(const SampleSet& set, const std::filesystem::path& path);
std::filesystem::path weights_sidecar(const std::filesystem::path& path);

/// Seeded shuffle split; train gets round(fraction * S) samples (at least 1 each side).
std::pair<SampleSet, SampleSet> split_train_test(const SampleSet& set, double train_fraction,
                                                 std::uint64_t seed);

/// Per-column power control: columns stronger than the weakest by more than
/// 6 dB are scaled down to exactly the cap.
inline constexpr double kPowerControlRatio = 3.9810717055349722;  // 10^0.6

/// B x U matrix whose columns are independent draws from `model`.
CMatrix synthesize_mimo_channel(std::size_t antennas, std::size_t users,
                                const ChannelModel& model, std::uint64_t seed,
                                bool power_control = false);

void apply_power_control(CMatrix& h);

/// Inserts zero rows at the listed (full-array) antenna indices. `full_dim`
/// must equal set.dim() + dead.size().
SampleSet zero_pad_antennas(const SampleSet& set, const std::vector<std::size_t>& dead,
                            std::size_t full_dim);

/// Extends a transform learned on the working antennas to the full array by
/// acting as the identity on the dead antenna coordinates.
UnitaryTransform embed_transform(const UnitaryTransform& a, const std::vector<std::size_t>& dead,
                                 std::size_t full_dim);

}  // namespace beamlearn
