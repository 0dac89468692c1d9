#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hee/cli.hpp"
#include "hee/data.hpp"
#include "hee/error.hpp"
#include "hee/parallel.hpp"

using namespace hee;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run hee_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "hee");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "hee_test_cli";
  fs::create_directories(dir);
  return dir;
}

fs::path write(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

const char* kSmokeConfig = R"({
  "version": 1,
  "spec": {"sizes": [2, 4, 2], "families": "sigmoid", "activation": "tanh"},
  "sampler": {"m": 0},
  "train": {"epochs": 2, "batch_size": 16, "inference_steps": 20, "eval_every": 10,
            "eval_size": 16, "seed": 1},
  "data": {"generator": "mog4", "n": 512, "seed": 3}
})";

fs::path trained_model() {
  static const fs::path model = [] {
    const fs::path cfg = write("smoke.json", kSmokeConfig);
    const fs::path m = scratch() / "model.json";
    REQUIRE(hee_cli({"train", "--config", cfg.string(), "--out", m.string()}).code == 0);
    return m;
  }();
  return model;
}

}  // namespace

TEST_CASE("train smoke run and determinism") {
  const fs::path m = trained_model();
  CHECK(fs::exists(m));
  const CsvTable log = read_csv(m.string() + ".log.csv");
  CHECK(log.rows.rows() > 0);
  CHECK(log.header[1] == "heldout_energy");

  const fs::path cfg = scratch() / "smoke.json";
  const fs::path again = scratch() / "model2.json";
  REQUIRE(hee_cli({"train", "--config", cfg.string(), "--out", again.string()}).code == 0);
  CHECK(slurp(m) == slurp(again));
  const fs::path other = scratch() / "model3.json";
  REQUIRE(hee_cli({"train", "--config", cfg.string(), "--out", other.string(), "--seed", "9"}).code == 0);
  CHECK(slurp(m) != slurp(other));
}

TEST_CASE("config errors name the key") {
  const fs::path bad = write("bad.json", R"({"version": 1, "spec": {"families": "linear"}})");
  Run r = hee_cli({"train", "--config", bad.string(), "--out", (scratch() / "x.json").string()});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("spec.sizes") != std::string::npos);

  const fs::path unknown = write("unknown.json", R"({"version": 1, "sampler": {"dtt": 0.01}})");
  r = hee_cli({"train", "--config", unknown.string(), "--out", (scratch() / "x.json").string()});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("sampler.dtt") != std::string::npos);

  const fs::path top = write("top.json", R"({"version": 1, "extra": {}})");
  CHECK_THROWS_WITH_AS(RunConfig::load(top.string()), doctest::Contains("extra"), ConfigError);
}

TEST_CASE("config parsing") {
  const RunConfig rc = RunConfig::parse(R"({
    "version": 1,
    "spec": {"L": 2, "sizes": [3, 2, 1], "families": ["linear", "sigmoid", "sigmoid"],
             "activation": "identity"},
    "sampler": {"m": 2.5, "dt": 0.005, "seed": 4},
    "train": {"lr": 0.02, "update_mode": "online"},
    "generate": {"stage_steps": 30, "many_chains": true},
    "quadrature": {"count": 301}
  })");
  CHECK(rc.spec.depth() == 2);
  CHECK(rc.spec.families[0] == Family::Linear);
  CHECK(rc.spec.activation == Activation::Identity);
  CHECK(rc.sampler.m == 2.5);
  CHECK(rc.train.sampler.dt == 0.005);
  CHECK(rc.train.update_mode == UpdateMode::Online);
  CHECK(rc.generate.stage_steps == 30);
  CHECK(rc.generate.sampler.seed == 4);
  CHECK(rc.quadrature.count == 301);
  CHECK_THROWS_AS(RunConfig::parse(R"({"version": 2})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse(R"({"version": 1, "train": {"lr": "fast"}})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("{"), ConfigError);
}

TEST_CASE("generate") {
  const fs::path m = trained_model();
  const fs::path out = scratch() / "anc.csv";
  Run r = hee_cli({"generate", "--model", m.string(), "--mode", "ancestral", "--n", "100", "--out",
                   out.string(), "--seed", "5"});
  REQUIRE(r.code == 0);
  CHECK(read_csv(out.string()).rows.rows() == 100);

  r = hee_cli({"generate", "--model", m.string(), "--mode", "sideways", "--out", out.string()});
  CHECK(r.code == kExitUsage);

  const fs::path img = scratch() / "img.csv";
  r = hee_cli({"generate", "--model", m.string(), "--mode", "marginal", "--staged", "--n", "5",
               "--image", "2x1", "--out", img.string()});
  CHECK(r.code == 0);
  CHECK(fs::exists(img.string() + ".json"));

  r = hee_cli({"generate", "--model", (scratch() / "nope.json").string(), "--mode", "joint",
               "--out", out.string()});
  CHECK(r.code == kExitIo);
}

TEST_CASE("analyze commands") {
  const fs::path m = trained_model();
  const fs::path samples = scratch() / "s.csv";
  write_csv(samples.string(), column_names(2), generate_dataset(Generator::MoG4, 400, 1).points);

  Run r = hee_cli({"analyze", "modes", "--samples", samples.string(), "--target", "mog4"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("covered,", 0) == 0);
  CHECK(r.out.find("\n4,") != std::string::npos);

  r = hee_cli({"analyze", "kl", "--samples", samples.string(), "--seed", "2"});
  CHECK(r.code == 0);

  const fs::path dw = scratch() / "dw.csv";
  r = hee_cli({"analyze", "depthwidth", "--units", "8", "--depths", "1,2,4,8", "--trials", "2",
               "--observed", "2", "--out", dw.string()});
  REQUIRE(r.code == 0);
  CHECK(read_csv(dw.string()).rows.rows() == 4);
  CHECK(fs::exists(scratch() / "dw.svg"));

  const fs::path clamp = write("clamp.csv", "x0,x1\n2,2\n-2,2\n");
  const fs::path h = scratch() / "h.csv";
  r = hee_cli({"analyze", "hessian", "--model", m.string(), "--clamp", clamp.string(), "--out",
               h.string()});
  REQUIRE(r.code == 0);
  const CsvTable t = read_csv(h.string());
  CHECK(t.rows.rows() == 2);
  CHECK(t.header[1] == "lambda_min");

  r = hee_cli({"analyze", "transient", "--model", m.string(), "--clamp", clamp.string(), "--m", "8",
               "--window", "5"});
  CHECK(r.code == 0);
  const fs::path sp = scratch() / "sp.csv";
  r = hee_cli({"analyze", "spectrum", "--model", m.string(), "--clamp", clamp.string(), "--window",
               "20", "--out", sp.string()});
  CHECK(r.code == 0);
  CHECK(read_csv(sp.string()).rows.rows() == 12);

  r = hee_cli({"analyze", "iact", "--samples", samples.string()});
  CHECK(r.code == 0);
}

TEST_CASE("bench sampler") {
  const fs::path out = scratch() / "bench.csv";
  const Run r = hee_cli({"bench", "sampler", "--m", "0,2,4,8", "--seeds", "3", "--steps", "3000",
                         "--explore-steps", "1000", "--out", out.string()});
  REQUIRE(r.code == 0);
  const CsvTable t = read_csv(out.string());
  CHECK(t.header == std::vector<std::string>{"m", "seed", "iact", "modes_visited", "wallclock_s"});
  REQUIRE(t.rows.rows() == 12);
  CHECK(t.rows(0, 0) == 0.0);
  CHECK(t.rows(11, 0) == 8.0);
}

TEST_CASE("usage, divergence and threads") {
  CHECK(hee_cli({"--help"}).code == 0);
  CHECK(hee_cli({}).code == kExitUsage);
  CHECK(hee_cli({"train", "--bogus"}).code == kExitUsage);

  const fs::path cfg = write("diverge.json", R"({
    "version": 1,
    "spec": {"sizes": [2, 2], "families": "linear", "activation": "identity"},
    "train": {"lr": 50, "batch_size": 8, "inference_steps": 20, "eval_every": 1, "eval_size": 8},
    "data": {"generator": "mog4", "n": 200}
  })");
  const Run r = hee_cli({"train", "--config", cfg.string(), "--out", (scratch() / "d.json").string()});
  CHECK(r.code == kExitDiverged);

  set_thread_count(3);
  CHECK(thread_count() == 3);
  setenv("HEE_THREADS", "2", 1);
  CHECK(thread_count() == 2);
  unsetenv("HEE_THREADS");
}
