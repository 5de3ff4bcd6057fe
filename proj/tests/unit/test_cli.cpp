#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("affect_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(AFFECT_CLI_PATH) + " " + args + " > " +
                          log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kQuick =
    " --set tcn.epochs=20 --set tcn.kernel=4 --set tcn.dilation=4"
    " --set lstm.hidden=8 --set lstm.epochs=15 --set lstm.patience=4"
    " --set pad_length=48";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("synth, ingest-check, abfs, train, predict chain") {
  TempDir dir("chain");
  const auto log = dir.path / "log.txt";
  const auto dataset = (dir.path / "ds").string();

  // a small, quickly learnable dataset
  {
    std::ofstream spec(dir.path / "spec.json");
    spec << R"({"n_domains": 2, "samples_per_domain": 6, "dim": 6,
                "len": 40, "causal_indices": [0, 1], "lags": [1, 2],
                "weights": [1.8, -1.5], "spurious_indices": [3],
                "noise_sigma": 0.05, "seed": 3})";
  }
  REQUIRE(run_cli("synth --spec " + (dir.path / "spec.json").string() +
                      " --out " + dataset,
                  log) == 0);
  const std::string manifest = dataset + "/manifest.json";
  REQUIRE(fs::exists(manifest));

  CHECK(run_cli("ingest-check --manifest " + manifest, log) == 0);

  const auto report = (dir.path / "abfs").string();
  REQUIRE(run_cli("abfs --manifest " + manifest + " --domain dom0 --out " +
                      report + kQuick,
                  log) == 0);
  REQUIRE(fs::exists(report + "/selection.json"));
  REQUIRE(fs::exists(report + "/selection.csv"));
  CHECK(slurp(report + "/selection.csv").find("source_domain,target,") == 0);

  const auto ckpt = (dir.path / "model.json").string();
  REQUIRE(run_cli("train --manifest " + manifest +
                      " --domain dom0 --selection " + report +
                      "/selection.json --out " + ckpt + kQuick,
                  log) == 0);
  REQUIRE(fs::exists(ckpt));

  const auto preds = (dir.path / "preds.csv").string();
  REQUIRE(run_cli("predict --checkpoint " + ckpt + " --manifest " + manifest +
                      " --out " + preds,
                  log) == 0);
  const std::string out = slurp(preds);
  CHECK(out.find("sample_id,frame,valence,arousal,valid") == 0);
  CHECK(out.find("dom1_s00") != std::string::npos);
}

TEST_CASE("predict rejects width mismatches with a nonzero exit") {
  TempDir dir("width");
  const auto log = dir.path / "log.txt";
  const auto ds_a = (dir.path / "a").string();
  const auto ds_b = (dir.path / "b").string();
  {
    std::ofstream spec(dir.path / "a.json");
    spec << R"({"n_domains": 1, "samples_per_domain": 5, "dim": 6, "len": 30,
                "causal_indices": [0], "lags": [1], "weights": [2.0],
                "spurious_indices": [], "seed": 4})";
  }
  {
    std::ofstream spec(dir.path / "b.json");
    spec << R"({"n_domains": 1, "samples_per_domain": 3, "dim": 9, "len": 30,
                "causal_indices": [0], "lags": [1], "weights": [2.0],
                "spurious_indices": [], "seed": 5})";
  }
  REQUIRE(run_cli("synth --spec " + (dir.path / "a.json").string() + " --out " + ds_a, log) == 0);
  REQUIRE(run_cli("synth --spec " + (dir.path / "b.json").string() + " --out " + ds_b, log) == 0);

  const auto report = (dir.path / "abfs").string();
  REQUIRE(run_cli("abfs --manifest " + ds_a + "/manifest.json --domain dom0 --out " +
                      report + kQuick,
                  log) == 0);
  const auto ckpt = (dir.path / "m.json").string();
  REQUIRE(run_cli("train --manifest " + ds_a + "/manifest.json --domain dom0"
                      " --selection " + report + "/selection.json --out " +
                      ckpt + kQuick,
                  log) == 0);

  CHECK(run_cli("predict --checkpoint " + ckpt + " --manifest " + ds_b +
                    "/manifest.json --out " + (dir.path / "p.csv").string(),
                log) != 0);
  CHECK(slurp(log).find("width mismatch") != std::string::npos);
}

TEST_CASE("grid runs end to end and report rebuilds its outputs") {
  TempDir dir("grid");
  const auto log = dir.path / "log.txt";
  const auto run = (dir.path / "run").string();
  REQUIRE(run_cli("grid --synth default3 --seed 2 --out " + run + kQuick +
                      " --set lstm.epochs=10 --set tcn.epochs=10",
                  log) == 0);
  REQUIRE(fs::exists(run + "/matrix.csv"));
  const std::string csv = slurp(run + "/matrix.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);

  fs::remove(run + "/matrix.csv");
  REQUIRE(run_cli("report --run " + run, log) == 0);
  CHECK(slurp(run + "/matrix.csv") == csv);
}

TEST_CASE("unknown override keys are rejected") {
  TempDir dir("badkey");
  const auto log = dir.path / "log.txt";
  CHECK(run_cli("grid --synth default3 --out " + (dir.path / "r").string() +
                    " --set nonsense=1",
                log) != 0);
  CHECK(slurp(log).find("unknown override key") != std::string::npos);
}

TEST_CASE("gradcheck subcommand passes on a fresh build") {
  TempDir dir("gc");
  const auto log = dir.path / "log.txt";
  CHECK(run_cli("gradcheck --seeds 1", log) == 0);
  CHECK(slurp(log).find("all cases passed") != std::string::npos);
}

}  // TEST_SUITE
