#include "cli.hpp"

#include "beamlearn/errors.hpp"
#include "beamlearn/learn.hpp"
#include "beamlearn/matrix_io.hpp"
#include "beamlearn/optimality.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace beamlearn::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view text, std::string_view what) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v))
    throw UsageError("invalid " + std::string(what) + ": '" + std::string(text) + "'");
  return v;
}

std::size_t to_size(std::string_view text, std::string_view what) {
  const std::string t = trim(text);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
    throw UsageError("invalid " + std::string(what) + ": '" + std::string(text) + "'");
  return v;
}

void require_input(const fs::path& p) {
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) throw IoError("input file not found: " + p.string());
}

void require_output(const fs::path& p) {
  if (p.empty()) return;
  const auto parent = p.parent_path();
  std::error_code ec;
  if (!parent.empty() && !fs::is_directory(parent, ec))
    throw IoError("output directory does not exist: " + parent.string());
}

std::ofstream open_output(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw IoError("cannot open " + p.string() + " for writing");
  return os;
}

struct Common {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string config;
  std::string out;
};

void add_common(CLI::App& app, Common& c) {
  app.add_option("--seed", c.seed, "Base RNG seed");
  app.add_option("--threads", c.threads, "Worker cap (0 = all cores)");
  app.add_option("--config", c.config, "Flat key=value file; explicit flags override it");
  app.add_option("--out", c.out, "Output path");
}

/// Parses args with CLI11; returns -1 to continue, otherwise an exit code.
int parse(CLI::App& app, const std::vector<std::string>& args, std::ostream& out,
          std::ostream& err) {
  std::vector<std::string> reversed = expand_config(args);
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  }
  return -1;
}

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const DimensionError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const IndexError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ModeMismatchError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    err << "file error: " << e.what() << '\n';
    return kInputFile;
  } catch (const ParseError& e) {
    err << "file error: " << e.what() << '\n';
    return kInputFile;
  } catch (const NotUnitaryError& e) {
    err << "file error: " << e.what() << '\n';
    return kInputFile;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  }
}

// repeated options (config file first, then flags) keep the last value
void take_last(CLI::App& app) {
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

}  // namespace

// ---------------------------------------------------------------- parsing helpers

std::vector<double> parse_snr_grid(std::string_view text) {
  const std::string t = trim(text);
  if (t.empty()) throw UsageError("empty SNR grid");
  if (t.find(':') != std::string::npos) {
    const auto parts = split(t, ':');
    if (parts.size() != 3) throw UsageError("SNR grid must be start:step:stop, got '" + t + "'");
    const double start = to_double(parts[0], "SNR start");
    const double step = to_double(parts[1], "SNR step");
    const double stop = to_double(parts[2], "SNR stop");
    if (step == 0.0) throw UsageError("SNR step must be nonzero");
    const double span = (stop - start) / step;
    if (span < -1e-9) throw UsageError("SNR grid '" + t + "' is empty");
    const auto n = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
    if (n > 100000) throw UsageError("SNR grid too long");
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) grid[i] = start + static_cast<double>(i) * step;
    return grid;
  }
  std::vector<double> grid;
  for (const auto& p : split(t, ',')) grid.push_back(to_double(p, "SNR value"));
  return grid;
}

Detector parse_detector(std::string_view text) {
  const std::string t = trim(text);
  if (t == "antenna") return {Detector::Kind::AntennaLmmse, 1.0};
  if (t == "lmmse") return {Detector::Kind::BeamspaceLmmse, 1.0};
  if (t.rfind("le:", 0) == 0) {
    const double d = to_double(t.substr(3), "LE density");
    if (!(d > 0.0 && d <= 1.0)) throw UsageError("LE density must be in (0, 1]");
    return {Detector::Kind::BeamspaceLe, d};
  }
  throw UsageError("detector must be antenna, lmmse or le:DENSITY, got '" + t + "'");
}

Estimator parse_estimator(std::string_view text) {
  const std::string t = trim(text);
  if (t == "perfect") return Estimator::PerfectCsi;
  if (t == "ls") return Estimator::PilotLs;
  if (t == "ls+denoise") return Estimator::PilotLsDenoise;
  throw UsageError("estimator must be perfect, ls or ls+denoise, got '" + t + "'");
}

Constellation parse_constellation(std::string_view text) {
  const std::string t = trim(text);
  if (t == "qpsk") return Constellation::Qpsk;
  if (t == "16qam") return Constellation::Qam16;
  throw UsageError("constellation must be qpsk or 16qam, got '" + t + "'");
}

ChannelModel parse_model(std::string_view text, std::size_t dim, std::size_t paths) {
  const std::string t = trim(text);
  if (t == "uniform") return UniformSinglePath{dim};
  if (t == "multipath") {
    if (paths == 0) throw UsageError("multipath model needs --L >= 1");
    return MultiPath::unit_energy(dim, paths);
  }
  if (t.rfind("file:", 0) == 0) {
    const fs::path p = t.substr(5);
    require_input(p);
    return Empirical{load_samples(p)};
  }
  throw UsageError("model must be uniform, multipath or file:PATH, got '" + t + "'");
}

UnitaryTransform parse_transform(std::string_view text, std::size_t dim) {
  const std::string t = trim(text);
  if (t == "dft") return dft_matrix(dim);
  if (t == "identity") return UnitaryTransform::identity(dim);
  require_input(t);
  auto a = UnitaryTransform::reprojected(load_matrix(t));
  if (a.dim() != dim)
    throw DimensionError("transform " + t + " is " + std::to_string(a.dim()) +
                         "-dimensional, expected " + std::to_string(dim));
  return a;
}

std::vector<std::size_t> parse_index_list(std::string_view text) {
  std::vector<std::size_t> out;
  if (trim(text).empty()) return out;
  for (const auto& p : split(text, ',')) out.push_back(to_size(p, "index"));
  return out;
}

std::vector<std::string> read_config_tokens(const std::string& path) {
  require_input(path);
  std::ifstream is(path);
  if (!is) throw IoError("cannot read config file " + path);
  std::vector<std::string> tokens;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos || trim(t.substr(0, eq)).empty())
      throw UsageError("config " + path + " line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(t.substr(0, eq));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (key == "config") throw UsageError("config files cannot include other config files");
    tokens.push_back("--" + key + "=" + trim(t.substr(eq + 1)));
  }
  return tokens;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::vector<std::string> out = read_config_tokens(path);
  out.insert(out.end(), args.begin(), args.end());
  return out;
}

// ---------------------------------------------------------------- learn

int cmd_learn(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    CLI::App app("Learn a unitary sparsifying transform", "learn");
    take_last(app);
    Common common;
    add_common(app, common);
    std::string algo, model_text, init = "dft", trace_path, report_path, dead_text,
                pad_mode = "after";
    std::size_t dim = 0, paths = 3, samples = 10000;
    LearnConfig cfg;
    app.add_option("--algo", algo, "msp | ca")->required();
    app.add_option("--model", model_text, "uniform | multipath | file:PATH")->required();
    app.add_option("--dim", dim, "Number of antennas B")->required();
    app.add_option("--init", init, "dft | identity | random | PATH");
    app.add_option("--max-iter", cfg.max_iterations, "MSP iterations / CA sweeps");
    app.add_option("--tol", cfg.convergence_tol, "Convergence tolerance");
    app.add_option("--grid", cfg.grid_points, "CA angle grid size");
    app.add_option("--L,--paths", paths, "Paths of the multipath model");
    app.add_option("--samples", samples, "Monte-Carlo samples for the multipath model");
    app.add_option("--trace", trace_path, "Objective trace CSV");
    app.add_option("--report", report_path, "Key=value report file");
    app.add_option("--dead-antennas", dead_text, "Comma list of malfunctioning antenna indices");
    app.add_option("--pad-mode", pad_mode,
                   "after: learn on working antennas, embed; before: zero-pad samples first");
    if (const int rc = parse(app, args, out, err); rc >= 0) return rc;

    if (algo == "msp") cfg.algorithm = Algorithm::Msp;
    else if (algo == "ca") cfg.algorithm = Algorithm::Ca;
    else throw UsageError("--algo must be msp or ca");
    if (dim == 0) throw UsageError("--dim must be >= 1");
    if (pad_mode != "after" && pad_mode != "before") throw UsageError("--pad-mode must be before or after");
    cfg.seed = common.seed;
    if (init == "dft") cfg.init = InitKind::Dft;
    else if (init == "identity") cfg.init = InitKind::Identity;
    else if (init == "random") cfg.init = InitKind::RandomUnitary;
    else {
      require_input(init);
      cfg.init = InitKind::FromFile;
      cfg.init_path = init;
    }
    validate(cfg);
    for (const auto& p : {common.out, trace_path, report_path}) require_output(p);

    const auto dead = parse_index_list(dead_text);
    std::size_t work_dim = dim;
    std::optional<ObjectiveEvaluator> ev;
    if (!dead.empty()) {
      if (model_text.rfind("file:", 0) != 0)
        throw UsageError("--dead-antennas needs a file:PATH model");
      if (dead.size() >= dim) throw UsageError("every antenna is marked dead");
      const ChannelModel m = parse_model(model_text, dim - dead.size(), paths);
      const auto& set = std::get<Empirical>(m).set;
      if (set.dim() != dim - dead.size())
        throw DimensionError("sample set has " + std::to_string(set.dim()) +
                             " antennas, expected " + std::to_string(dim - dead.size()) +
                             " working antennas");
      if (pad_mode == "before") {
        ev = ObjectiveEvaluator::empirical(zero_pad_antennas(set, dead, dim), common.threads);
      } else {
        work_dim = dim - dead.size();
        ev = ObjectiveEvaluator::empirical(set, common.threads);
      }
    } else {
      const ChannelModel m = parse_model(model_text, dim, paths);
      if (model_dim(m) != dim)
        throw DimensionError("model has " + std::to_string(model_dim(m)) + " antennas, --dim is " +
                             std::to_string(dim));
      if (std::holds_alternative<UniformSinglePath>(m)) ev = ObjectiveEvaluator::exact(m);
      else ev = ObjectiveEvaluator::sampled(m, samples, common.seed, common.threads);
    }

    const UnitaryTransform start = initial_transform(cfg, work_dim);
    LearnReport report = cfg.algorithm == Algorithm::Msp ? learn_msp(*ev, cfg, start)
                                                         : learn_ca(*ev, cfg, start);
    if (work_dim != dim) report.final_transform = embed_transform(report.final_transform, dead, dim);

    std::ostringstream text;
    text << "model=" << model_text << '\n';
    if (!dead.empty()) text << "dead_antennas=" << dead_text << "\npad_mode=" << pad_mode << '\n';
    if (!std::holds_alternative<UniformSinglePath>(ev->model()) && model_text == "multipath")
      text << "paths=" << paths << "\nsamples=" << samples << '\n';
    write_report(text, report, cfg);
    out << text.str();
    if (!common.out.empty()) save_matrix(report.final_transform.matrix(), common.out);
    if (!report_path.empty()) open_output(report_path) << text.str();
    if (!trace_path.empty()) {
      auto os = open_output(trace_path);
      os << "# algorithm=" << to_string(cfg.algorithm) << "\n# model=" << model_text
         << "\n# dim=" << dim << "\n# seed=" << cfg.seed << '\n';
      write_trace_csv(os, report);
    }
    return report.converged ? kOk : kNotConverged;
  });
}

// ---------------------------------------------------------------- verify-dft

int cmd_verify_dft(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    CLI::App app("Check DFT stationarity and local optimality", "verify-dft");
    take_last(app);
    Common common;
    add_common(app, common);
    std::string dims_text;
    app.add_option("--dims", dims_text, "Comma list of array sizes (each >= 2)")->required();
    if (const int rc = parse(app, args, out, err); rc >= 0) return rc;
    const auto dims = parse_index_list(dims_text);
    if (dims.empty()) throw UsageError("--dims is empty");
    for (const auto b : dims)
      if (b < 2) throw UsageError("--dims entries must be >= 2");
    require_output(common.out);

    const auto entries = verify_dft_suite(dims, common.threads);
    std::ostringstream table;
    table << "# command=verify-dft\n# dims=" << dims_text << "\n# tol=" << kSuiteTol << '\n';
    write_suite_csv(table, entries);
    out << table.str();
    if (!common.out.empty()) open_output(common.out) << table.str();
    const bool all = std::all_of(entries.begin(), entries.end(), [](const SuiteEntry& e) { return e.pass; });
    if (!all) err << "verification failed for at least one B\n";
    return all ? kOk : kNumeric;
  });
}

// ---------------------------------------------------------------- eval-sparsity

int cmd_eval_sparsity(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    CLI::App app("Mean l4 of a test set under several transforms", "eval-sparsity");
    take_last(app);
    Common common;
    add_common(app, common);
    std::string test_path, transforms_text = "dft";
    app.add_option("--test", test_path, "Test sample set")->required();
    app.add_option("--transforms", transforms_text, "Comma list of dft | identity | PATH");
    if (const int rc = parse(app, args, out, err); rc >= 0) return rc;
    require_input(test_path);
    require_output(common.out);
    const SampleSet test = load_samples(test_path);
    std::vector<std::pair<std::string, UnitaryTransform>> transforms;
    for (const auto& name : split(transforms_text, ','))
      transforms.emplace_back(name, parse_transform(name, test.dim()));

    auto report = sparsity_report(test, transforms, common.threads);
    report.metadata.insert(report.metadata.begin(), {"test", test_path});
    report.metadata.insert(report.metadata.begin(), {"command", "eval-sparsity"});
    std::ostringstream table;
    write_sparsity_csv(table, report);
    out << table.str();
    if (!common.out.empty()) open_output(common.out) << table.str();
    return kOk;
  });
}

// ---------------------------------------------------------------- simulate-ber

int cmd_simulate_ber(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    CLI::App app("Uncoded BER of an uplink MU-MIMO system", "simulate-ber");
    take_last(app);
    Common common;
    add_common(app, common);
    SimConfig cfg;
    std::string constellation = "qpsk", detector = "lmmse", estimator = "perfect",
                transform = "dft", snr, model_text = "multipath";
    std::size_t paths = 3;
    app.add_option("--B,--antennas", cfg.antennas, "BS antennas");
    app.add_option("--U,--users", cfg.users, "Single-antenna users");
    app.add_option("--constellation", constellation, "qpsk | 16qam");
    app.add_option("--detector", detector, "antenna | lmmse | le:DENSITY");
    app.add_option("--estimator", estimator, "perfect | ls | ls+denoise");
    app.add_option("--transform", transform, "dft | identity | PATH");
    app.add_option("--snr", snr, "start:step:stop in dB, or a comma list")->required();
    app.add_option("--trials", cfg.trials_per_snr, "Trials per SNR point");
    app.add_option("--model", model_text, "uniform | multipath | file:PATH");
    app.add_option("--L,--paths", paths, "Paths of the multipath model");
    app.add_flag("--power-control", cfg.power_control, "Cap user power spread at 6 dB");
    if (const int rc = parse(app, args, out, err); rc >= 0) return rc;

    cfg.constellation = parse_constellation(constellation);
    cfg.detector = parse_detector(detector);
    cfg.estimator = parse_estimator(estimator);
    cfg.snr_grid_db = parse_snr_grid(snr);
    cfg.seed = common.seed;
    cfg.threads = common.threads;
    if (cfg.antennas == 0) throw UsageError("--B must be >= 1");
    require_output(common.out);
    const ChannelModel source = parse_model(model_text, cfg.antennas, paths);
    cfg.transform = parse_transform(transform, cfg.antennas);
    cfg.transform_name = transform;

    auto report = simulate_ber(cfg, source);
    report.metadata.insert(report.metadata.begin(), {"model", model_text});
    if (model_text == "multipath") report.metadata.insert(report.metadata.begin() + 1, {"L", std::to_string(paths)});
    report.metadata.insert(report.metadata.begin(), {"command", "simulate-ber"});
    std::ostringstream table;
    write_ber_csv(table, report);
    out << table.str();
    if (!common.out.empty()) open_output(common.out) << table.str();
    return kOk;
  });
}

// ---------------------------------------------------------------- gen-channels

int cmd_gen_channels(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    CLI::App app("Draw channel vectors from a stochastic model", "gen-channels");
    take_last(app);
    Common common;
    add_common(app, common);
    std::string model_text, test_out;
    std::size_t dim = 0, count = 0, paths = 3;
    double train_fraction = 0.0;
    app.add_option("--model", model_text, "uniform | multipath")->required();
    app.add_option("--dim", dim, "Number of antennas B")->required();
    app.add_option("--count", count, "Number of samples")->required();
    app.add_option("--L,--paths", paths, "Paths of the multipath model");
    app.add_option("--train-fraction", train_fraction,
                   "Split into train (--out) and test (--test-out) sets");
    app.add_option("--test-out", test_out, "Test split output path");
    if (const int rc = parse(app, args, out, err); rc >= 0) return rc;
    if (common.out.empty()) throw UsageError("--out is required");
    if (dim == 0 || count == 0) throw UsageError("--dim and --count must be >= 1");
    if (model_text != "uniform" && model_text != "multipath")
      throw UsageError("gen-channels --model must be uniform or multipath");
    const bool split_sets = train_fraction > 0.0;
    if (split_sets && (train_fraction >= 1.0 || test_out.empty() || count < 2))
      throw UsageError("--train-fraction needs a value in (0, 1), --test-out and --count >= 2");
    require_output(common.out);
    require_output(test_out);

    const ChannelModel m = parse_model(model_text, dim, paths);
    const SampleSet set = sample(m, count, common.seed, common.threads);
    if (split_sets) {
      const auto [train, test] = split_train_test(set, train_fraction, common.seed);
      save_samples(train, common.out);
      save_samples(test, test_out);
      out << "# wrote " << train.size() << " train samples to " << common.out << " and "
          << test.size() << " test samples to " << test_out << '\n';
    } else {
      save_samples(set, common.out);
      out << "# wrote " << set.size() << " samples of dimension " << set.dim() << " to "
          << common.out << '\n';
    }
    return kOk;
  });
}

// ---------------------------------------------------------------- dispatch

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  static const char* usage =
      "usage: beamlearn <learn|verify-dft|eval-sparsity|simulate-ber|gen-channels> [options]\n"
      "       beamlearn <subcommand> --help\n";
  if (args.empty()) {
    err << usage;
    return kUsage;
  }
  const std::vector<std::string> rest(args.begin() + 1, args.end());
  const std::string& sub = args[0];
  if (sub == "learn") return cmd_learn(rest, out, err);
  if (sub == "verify-dft") return cmd_verify_dft(rest, out, err);
  if (sub == "eval-sparsity") return cmd_eval_sparsity(rest, out, err);
  if (sub == "simulate-ber") return cmd_simulate_ber(rest, out, err);
  if (sub == "gen-channels") return cmd_gen_channels(rest, out, err);
  if (sub == "--help" || sub == "-h") {
    out << usage;
    return kOk;
  }
  err << "unknown subcommand '" << sub << "'\n" << usage;
  return kUsage;
}

}  // namespace beamlearn::cli
