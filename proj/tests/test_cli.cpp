#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "doctest.h"
#include "json.hpp"
#include "manifest.hpp"
#include "runner.hpp"
#include "worker_pool.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Scratch {
  fs::path root = fs::temp_directory_path() / ("sle_cli_" + std::to_string(::getpid()));
  Scratch() { fs::create_directories(root); }
  ~Scratch() { fs::remove_all(root); }
  std::string dir(const std::string& name) const { return (root / name).string(); }
};

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = sle::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("trace of the constant driver ends at 2i") {
  Scratch s;
  const auto r = cli({"trace", "--driver", "constant", "--level", "0", "--T", "1", "--out", s.dir("a")});
  REQUIRE(r.code == 0);
  std::ifstream csv(s.dir("a") + "/trace.csv");
  std::string line, last;
  while (std::getline(csv, line)) last = line;
  std::stringstream row(last);
  std::string t, re, im;
  std::getline(row, t, ',');
  std::getline(row, re, ',');
  std::getline(row, im, ',');
  CHECK(std::stod(t) == 1.0);
  CHECK(std::abs(std::stod(re)) < 1e-6);
  CHECK(std::abs(std::stod(im) - 2.0) < 1e-6);
  CHECK(fs::exists(s.dir("a") + "/hull.svg"));
  CHECK(fs::exists(s.dir("a") + "/manifest.json"));
}

TEST_CASE("seeded runs are byte-identical") {
  Scratch s;
  for (const char* name : {"a", "b"}) {
    REQUIRE(cli({"trace", "--seed", "42", "--alpha", "1.3", "--n-steps", "100", "--resolution", "1e-3",
                 "--out", s.dir(name)})
                .code == 0);
  }
  for (const char* f : {"path.csv", "trace.csv", "trace.json", "hull.svg"}) {
    CHECK(slurp(s.dir("a") + "/" + f) == slurp(s.dir("b") + "/" + f));
  }
  REQUIRE(cli({"trace", "--seed", "43", "--alpha", "1.3", "--n-steps", "100", "--out", s.dir("c")}).code == 0);
  CHECK(slurp(s.dir("a") + "/path.csv") != slurp(s.dir("c") + "/path.csv"));
}

TEST_CASE("experiments do not depend on the thread count") {
  Scratch s;
  for (const auto& [name, threads] : {std::pair{"one", "1"}, std::pair{"four", "4"}}) {
    REQUIRE(cli({"hull-scaling", "--threads", threads, "--n-paths", "6", "--n-steps", "50", "--s", "0.2",
                 "0.1", "--out", s.dir(name)})
                .code == 0);
    REQUIRE(cli({"height-reach", "--threads", threads, "--n-paths", "40", "--t-max", "2", "--out",
                 s.dir(std::string(name) + "h")})
                .code == 0);
  }
  CHECK(slurp(s.dir("one") + "/hull_scaling.json") == slurp(s.dir("four") + "/hull_scaling.json"));
  CHECK(slurp(s.dir("oneh") + "/height_reach.json") == slurp(s.dir("fourh") + "/height_reach.json"));
}

TEST_CASE("dimension subcommand") {
  Scratch s;
  const auto r = cli({"dimension", "--alpha", "1", "--kappa", "1", "--T", "1", "--eps-min", "1e-3",
                      "--eps-max", "1e-1", "--out", s.dir("d")});
  REQUIRE(r.code == 0);
  const json j = json::parse(slurp(s.dir("d") + "/dimension.json"));
  REQUIRE(j.at("slope").is_number());
  CHECK(j.at("slope").get<double>() >= 0.85);
  CHECK(j.at("slope").get<double>() <= 1.25);
}

TEST_CASE("config files and manifests") {
  Scratch s;
  const auto cfg = s.root / "cfg.json";
  std::ofstream(cfg) << R"({"alpha": 1.5, "n_paths": 30, "t-max": 3, "z-im": 0.25})";
  REQUIRE(cli({"height-reach", "--config", cfg.string(), "--n-paths", "20", "--out", s.dir("h")}).code == 0);
  const json m = json::parse(slurp(s.dir("h") + "/manifest.json"));
  CHECK(m.at("command") == "height-reach");
  CHECK(m.at("config").at("alpha") == "1.5");
  CHECK(m.at("config").at("n-paths") == "20");
  CHECK(m.at("config").at("z-im") == "0.25");
  CHECK(json::parse(slurp(s.dir("h") + "/height_reach.json")).at("n") == 20);

  // Replaying the manifest reproduces the outputs.
  REQUIRE(cli({"height-reach", "--config", s.dir("h") + "/manifest.json", "--out", s.dir("h2")}).code == 0);
  CHECK(slurp(s.dir("h") + "/height_reach.json") == slurp(s.dir("h2") + "/height_reach.json"));

  CHECK(cli({"--verify", s.dir("h")}).code == 0);
  std::ofstream(s.dir("h") + "/height_reach.json", std::ios::app) << " ";
  const auto tampered = cli({"--verify", s.dir("h")});
  CHECK(tampered.code == 1);
  CHECK(json::parse(tampered.out).at("mismatched").size() == 1);

  std::ofstream(s.root / "bad.json") << R"({"no_such_option": 1})";
  CHECK(cli({"trace", "--config", (s.root / "bad.json").string(), "--out", s.dir("x")}).code == 2);
}

TEST_CASE("exit codes") {
  Scratch s;
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({}).code == 2);
  CHECK(cli({"no-such-command"}).code == 2);
  CHECK(cli({"trace", "--alpha", "abc"}).code == 2);
  const auto bad_alpha = cli({"trace", "--alpha", "2.5", "--out", s.dir("a")});
  CHECK(bad_alpha.code == 2);
  CHECK(json::parse(bad_alpha.err).at("type") == "ParameterError");
  const auto numeric = cli({"modulus", "--driver", "constant", "--x-min", "0", "--x-max", "0.1", "--y-min", "0",
                            "--y-max", "0.1", "--mesh", "0.05", "--out", s.dir("m")});
  CHECK(numeric.code == 3);
  CHECK(json::parse(numeric.err).at("error") == "numerical");
  CHECK(cli({"frac-laplacian", "--tol", "1e-30", "--out", s.dir("f")}).code == 3);
  CHECK(cli({"trace", "--driver", "custom-file", "--out", s.dir("c")}).code == 2);
}

TEST_CASE("custom driver files") {
  Scratch s;
  std::ofstream(s.root / "w.csv") << "t,W\n0,0\n0.5,3\n1,3\n";
  const auto r = cli({"rcll-check", "--driver", "custom-file", "--driver-file", (s.root / "w.csv").string(),
                      "--out", s.dir("r")});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("ok") == true);
  CHECK(j.at("jumps").size() == 1);
}

TEST_CASE("thread count resolution") {
  CHECK(sle::cli::resolve_thread_count(3) == 3);
  ::setenv("STABLE_LOEWNER_THREADS", "2", 1);
  CHECK(sle::cli::resolve_thread_count(0) == 2);
  ::setenv("STABLE_LOEWNER_THREADS", "many", 1);
  CHECK_THROWS(sle::cli::resolve_thread_count(0));
  CHECK(cli({"sample-path", "--out", (fs::temp_directory_path() / "sle_cli_env").string()}).code == 2);
  ::unsetenv("STABLE_LOEWNER_THREADS");
  fs::remove_all(fs::temp_directory_path() / "sle_cli_env");
}

TEST_CASE("worker pool") {
  sle::cli::WorkerPool pool(4);
  const auto policy = pool.policy();
  REQUIRE(policy);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<int> hits(1000, 0);
    policy(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
  CHECK_THROWS_AS(policy(10, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
  std::atomic<int> after{0};
  policy(10, [&](std::size_t) { ++after; });
  CHECK(after == 10);
  CHECK(!sle::cli::WorkerPool(1).policy());
}

TEST_CASE("digests") {
  Scratch s;
  std::ofstream(s.root / "abc.txt", std::ios::binary) << "abc";
  CHECK(sle::cli::sha256_file(s.root / "abc.txt") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
