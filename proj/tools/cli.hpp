#pragma once

#include "beamlearn/channel.hpp"
#include "beamlearn/mimo.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace beamlearn::cli {

inline constexpr int kOk = 0;
inline constexpr int kNotConverged = 2;
inline constexpr int kUsage = 64;
inline constexpr int kInputFile = 66;
inline constexpr int kNumeric = 70;

/// Bad flag values; maps to kUsage.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// args[0] is the subcommand. Output tables go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Subcommand entry points; `args` excludes the subcommand name.
int cmd_learn(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmd_verify_dft(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmd_eval_sparsity(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmd_simulate_ber(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmd_gen_channels(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "start:step:stop" (inclusive, step may be negative) or a comma list.
std::vector<double> parse_snr_grid(std::string_view text);
/// "antenna" | "lmmse" | "le:DENSITY".
Detector parse_detector(std::string_view text);
/// "perfect" | "ls" | "ls+denoise".
Estimator parse_estimator(std::string_view text);
Constellation parse_constellation(std::string_view text);
/// "uniform" | "multipath" | "file:PATH".
ChannelModel parse_model(std::string_view text, std::size_t dim, std::size_t paths);
/// "dft" | "identity" | PATH.
UnitaryTransform parse_transform(std::string_view text, std::size_t dim);
std::vector<std::size_t> parse_index_list(std::string_view text);

/// Reads a flat key=value file into "--key=value" tokens ('#' comments, blank lines skipped).
std::vector<std::string> read_config_tokens(const std::string& path);
/// Inserts the tokens of a --config file ahead of the explicit flags so that the
/// flags take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

}  // namespace beamlearn::cli
