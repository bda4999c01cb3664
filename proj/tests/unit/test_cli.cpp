#include "helpers.hpp"

#include "cli.hpp"

#include "beamlearn/channel.hpp"
#include "beamlearn/matrix_io.hpp"

#include <fstream>
#include <sstream>

using namespace beamlearn;
namespace bc = beamlearn::cli;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = bc::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<double> trace_values(const std::string& csv) {
  std::vector<double> v;
  std::istringstream is(csv);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("iteration", 0) == 0) continue;
    v.push_back(std::stod(line.substr(line.find(',') + 1)));
  }
  return v;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("value parsers") {
  const auto g = bc::parse_snr_grid("-10:2:20");
  CHECK(g.size() == 16);
  CHECK(g.front() == -10.0);
  CHECK(g.back() == 20.0);
  CHECK(bc::parse_snr_grid("20:-5:10") == std::vector<double>{20, 15, 10});
  CHECK(bc::parse_snr_grid("1.5, 3") == std::vector<double>{1.5, 3});
  CHECK_THROWS_AS(bc::parse_snr_grid("0:0:5"), bc::UsageError);
  CHECK_THROWS_AS(bc::parse_snr_grid("5:1:0"), bc::UsageError);
  CHECK_THROWS_AS(bc::parse_snr_grid("a:b"), bc::UsageError);

  CHECK(bc::parse_detector("le:0.125").kind == Detector::Kind::BeamspaceLe);
  CHECK(bc::parse_detector("le:0.125").density == 0.125);
  CHECK(bc::parse_detector("antenna").kind == Detector::Kind::AntennaLmmse);
  CHECK_THROWS_AS(bc::parse_detector("le:0"), bc::UsageError);
  CHECK_THROWS_AS(bc::parse_detector("zf"), bc::UsageError);
  CHECK(bc::parse_estimator("ls+denoise") == Estimator::PilotLsDenoise);
  CHECK(bc::parse_constellation("16qam") == Constellation::Qam16);
  CHECK(bc::parse_index_list("3, 1,7") == std::vector<std::size_t>{3, 1, 7});
}

TEST_CASE("learn msp on the single-path model returns the DFT") {
  const auto dir = testing::scratch_dir("cli_learn");
  const auto out = (dir / "A.blrn").string();
  const auto r = run({"learn", "--algo", "msp", "--model", "uniform", "--dim", "8", "--init", "dft",
                      "--out", out});
  CHECK(r.code == bc::kOk);
  CHECK(r.out.find("iterations_run=1\n") != std::string::npos);
  CHECK(testing::max_abs_diff(load_matrix(out), dft_matrix(8).matrix()) < 1e-9);
}

TEST_CASE("learn ca on a sample file has a non-decreasing trace") {
  const auto dir = testing::scratch_dir("cli_ca");
  const auto train = (dir / "train.blrn").string();
  CHECK(run({"gen-channels", "--model", "multipath", "--L", "3", "--dim", "16", "--count", "1500",
             "--out", train, "--seed", "4"})
            .code == bc::kOk);
  const auto trace = (dir / "trace.csv").string();
  const auto r = run({"learn", "--algo", "ca", "--model", "file:" + train, "--dim", "16", "--init",
                      "dft", "--trace", trace, "--tol", "1e-6"});
  CHECK((r.code == bc::kOk || r.code == bc::kNotConverged));
  const auto v = trace_values(slurp(trace));
  REQUIRE(v.size() >= 2);
  for (std::size_t t = 1; t < v.size(); ++t) CHECK(v[t] >= v[t - 1] - 1e-12);
  CHECK(slurp(trace).rfind("# algorithm=ca\n", 0) == 0);
}

TEST_CASE("learn reports non-convergence with exit code 2") {
  const auto r = run({"learn", "--algo", "msp", "--model", "multipath", "--dim", "8", "--init",
                      "random", "--samples", "500", "--max-iter", "1"});
  CHECK(r.code == bc::kNotConverged);
  CHECK(r.out.find("converged=false") != std::string::npos);
}

TEST_CASE("usage and file errors") {
  CHECK(run({"learn", "--algo", "msp", "--model", "uniform"}).code == bc::kUsage);
  CHECK(run({"learn", "--algo", "sgd", "--model", "uniform", "--dim", "4"}).code == bc::kUsage);
  CHECK(run({"learn", "--algo", "msp", "--model", "file:/nonexistent.blrn", "--dim", "4"}).code ==
        bc::kInputFile);
  CHECK(run({"learn", "--algo", "msp", "--model", "uniform", "--dim", "4", "--bogus"}).code == bc::kUsage);
  CHECK(run({"verify-dft", "--dims", "0"}).code == bc::kUsage);
  CHECK(run({"frobnicate"}).code == bc::kUsage);
  CHECK(run({}).code == bc::kUsage);
  CHECK(run({"eval-sparsity", "--test", "/nonexistent.blrn"}).code == bc::kInputFile);
  CHECK(run({"simulate-ber", "--snr", "0:1:2", "--out", "/nonexistent/dir/x.csv"}).code == bc::kInputFile);
  CHECK(run({"learn", "--help"}).code == bc::kOk);
}

TEST_CASE("verify-dft") {
  const auto ok = run({"verify-dft", "--dims", "2,4,8,16"});
  CHECK(ok.code == bc::kOk);
  CHECK(ok.out.rfind("# command=verify-dft\n", 0) == 0);
  CHECK(run({"verify-dft", "--dims", "3,5,7"}).code == bc::kOk);
}

TEST_CASE("eval-sparsity reports the DFT ratio as one") {
  const auto dir = testing::scratch_dir("cli_eval");
  const auto test = (dir / "test.blrn").string();
  save_samples(sample(MultiPath::unit_energy(8, 2), 300, 1), test);
  save_matrix(dft_matrix(8).matrix(), dir / "A.blrn");
  const auto r = run({"eval-sparsity", "--test", test, "--transforms",
                      "dft,identity," + (dir / "A.blrn").string()});
  CHECK(r.code == bc::kOk);
  CHECK(r.out.find("\ndft,") != std::string::npos);
  CHECK(r.out.find(",1\n") != std::string::npos);
  CHECK(run({"eval-sparsity", "--test", test, "--transforms", (dir / "missing.blrn").string()}).code ==
        bc::kInputFile);
}

TEST_CASE("simulate-ber is reproducible") {
  const auto dir = testing::scratch_dir("cli_sim");
  const std::vector<std::string> args{"simulate-ber", "--B", "16", "--U", "4", "--detector", "le:0.125",
                                      "--transform", "dft", "--snr", "-10:5:10", "--trials", "100",
                                      "--seed", "7"};
  auto a = args;
  a.insert(a.end(), {"--out", (dir / "a.csv").string()});
  auto b = args;
  b.insert(b.end(), {"--out", (dir / "b.csv").string(), "--threads", "2"});
  CHECK(run(a).code == bc::kOk);
  CHECK(run(b).code == bc::kOk);
  const auto ca = slurp(dir / "a.csv");
  CHECK(ca == slurp(dir / "b.csv"));
  CHECK(ca.find("# seed=7\n") != std::string::npos);
  CHECK(ca.find("snr_db,bits,errors,ber\n-10,") != std::string::npos);
  CHECK(run({"simulate-ber", "--snr", "0", "--detector", "mmse"}).code == bc::kUsage);
}

TEST_CASE("config files are overridden by explicit flags") {
  const auto dir = testing::scratch_dir("cli_config");
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "# sweep\nB=16\nU=2\nsnr=0:5:10\ntrials=50\nseed=3\ndetector=antenna\n";
  }
  const auto cfg_path = (dir / "run.cfg").string();
  const auto from_cfg = run({"simulate-ber", "--config", cfg_path});
  CHECK(from_cfg.code == bc::kOk);
  CHECK(from_cfg.out.find("# detector=antenna\n") != std::string::npos);
  const auto overridden = run({"simulate-ber", "--config", cfg_path, "--detector", "lmmse", "--seed", "4"});
  CHECK(overridden.code == bc::kOk);
  CHECK(overridden.out.find("# detector=lmmse\n") != std::string::npos);
  CHECK(overridden.out.find("# seed=4\n") != std::string::npos);
  CHECK(run({"simulate-ber", "--config", (dir / "missing.cfg").string()}).code == bc::kInputFile);
  {
    std::ofstream bad(dir / "bad.cfg");
    bad << "no equals sign\n";
  }
  CHECK(run({"simulate-ber", "--config", (dir / "bad.cfg").string()}).code == bc::kUsage);
}

TEST_CASE("gen-channels writes loadable sample sets") {
  const auto dir = testing::scratch_dir("cli_gen");
  const auto out = (dir / "train.blrn").string();
  CHECK(run({"gen-channels", "--model", "multipath", "--L", "4", "--dim", "64", "--count", "1000",
             "--out", out})
            .code == bc::kOk);
  const auto set = load_samples(out);
  CHECK(set.dim() == 64);
  CHECK(set.size() == 1000);

  const auto test = (dir / "test.csv").string();
  CHECK(run({"gen-channels", "--model", "uniform", "--dim", "8", "--count", "100", "--out", out,
             "--train-fraction", "0.8", "--test-out", test})
            .code == bc::kOk);
  CHECK(load_samples(out).size() == 80);
  CHECK(load_samples(test).size() == 20);
  CHECK(run({"gen-channels", "--model", "uniform", "--dim", "8", "--count", "10"}).code == bc::kUsage);
}

TEST_CASE("dead antennas are embedded into the full array") {
  const auto dir = testing::scratch_dir("cli_dead");
  const auto train = (dir / "train.blrn").string();
  save_samples(sample(MultiPath::unit_energy(6, 2), 800, 2), train);
  const auto out = (dir / "A.blrn").string();
  const auto r = run({"learn", "--algo", "msp", "--model", "file:" + train, "--dim", "8",
                      "--dead-antennas", "2,5", "--out", out, "--tol", "1e-6"});
  CHECK((r.code == bc::kOk || r.code == bc::kNotConverged));
  const CMatrix a = load_matrix(out);
  CHECK(a.rows() == 8);
  CHECK(a(2, 2) == Complex(1.0));
  CHECK(a(5, 5) == Complex(1.0));
  CHECK(a.row(2).norm() == doctest::Approx(1.0));
  CHECK(run({"learn", "--algo", "msp", "--model", "file:" + train, "--dim", "9",
             "--dead-antennas", "2,5"})
            .code == bc::kUsage);
}

}
