#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path workdir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "h4g_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Run h4g(const std::string& args) {
  const fs::path out = workdir() / "stdout.txt", err = workdir() / "stderr.txt";
  const std::string cmd = std::string("cd '") + workdir().string() + "' && '" + H4G_CLI_PATH + "' " + args + " > '" +
                          out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(h4g("--help").code == 0);
  CHECK(h4g("").code == 1);
  CHECK(h4g("train --preset homo --data x.tag").code == 1);
  CHECK(h4g("train --epochs 1").code == 1);
  CHECK(h4g("--kernels sse9 generate --out x.tag").code == 1);
  const Run bad = h4g("generate --preset mixed --out x.tag");
  CHECK(bad.code == 1);
  CHECK(bad.err.find("homo") != std::string::npos);
  CHECK(bad.err.find("hetero") != std::string::npos);
}

TEST_CASE("generate is deterministic and loadable") {
  REQUIRE(h4g("generate --preset homo --seed 4 --out a.tag").code == 0);
  REQUIRE(h4g("generate --preset homo --seed 4 --out b.tag").code == 0);
  const std::string a = slurp(workdir() / "a.tag");
  CHECK(a == slurp(workdir() / "b.tag"));
  CHECK(a.rfind("H4G-TAG v1 300 3\n", 0) == 0);
  CHECK(h4g("generate --nodes 20 --classes 2 --mean-degree 25 --out c.tag").code == 1);
  CHECK(h4g("generate --out /nonexistent/dir/x.tag").code == 1);
}

TEST_CASE("train, eval and radius-report") {
  REQUIRE(h4g("generate --preset hetero --seed 1 --out train.tag").code == 0);
  REQUIRE(h4g("generate --preset hetero --seed 1001 --out test.tag").code == 0);
  const Run t = h4g("train --data train.tag --epochs 2 --seed 1 --out run1");
  REQUIRE(t.code == 0);
  CHECK(t.out.find("parameters") != std::string::npos);
  CHECK(fs::exists(workdir() / "run1" / "model.h4g"));
  CHECK(fs::exists(workdir() / "run1" / "config.json"));

  const Run e1 = h4g("eval --model run1/model.h4g --data test.tag");
  const Run e2 = h4g("eval --model run1/model.h4g --data test.tag");
  REQUIRE(e1.code == 0);
  CHECK(e1.out == e2.out);
  CHECK(nlohmann::json::parse(e1.out).contains("accuracy"));

  REQUIRE(h4g("train --data train.tag --epochs 1 --seed 1 --seed 2 --seed 3 --out multi").code == 0);
  const Run em = h4g("eval --model multi/seed-1/model.h4g --model multi/seed-2/model.h4g "
                     "--model multi/seed-3/model.h4g --data test.tag --out eval.json");
  REQUIRE(em.code == 0);
  const auto j = nlohmann::json::parse(slurp(workdir() / "eval.json"));
  CHECK(j.contains("mean"));
  CHECK(j.contains("std"));

  REQUIRE(h4g("train --data train.tag --epochs 0 --d-t 32 --out narrow").code == 0);
  const Run mismatch = h4g("eval --model run1/model.h4g --model narrow/model.h4g --data test.tag");
  CHECK(mismatch.code == 1);
  CHECK(mismatch.err.find("d_t=64") != std::string::npos);
  CHECK(mismatch.err.find("d_t=32") != std::string::npos);

  std::ofstream(workdir() / "broken.h4g") << "H4G-MODEL v1\nd 64\n";
  CHECK(h4g("eval --model broken.h4g --data test.tag").code == 1);

  REQUIRE(h4g("radius-report --model run1/model.h4g --data test.tag --out radius").code == 0);
  CHECK(slurp(workdir() / "radius" / "graph_after.csv").rfind("bin_lower,count\n", 0) == 0);
}

TEST_CASE("config file precedence") {
  std::ofstream(workdir() / "cfg.toml") << "[train]\nepochs = 3\nbatch-size = 64\n";
  REQUIRE(h4g("--config cfg.toml train --preset homo --out cfg_run").code == 0);
  auto j = nlohmann::json::parse(slurp(workdir() / "cfg_run" / "config.json"));
  CHECK(j["train"]["epochs"] == 3);
  CHECK(j["train"]["batch_size"] == 64);
  REQUIRE(h4g("--config cfg.toml train --preset homo --epochs 1 --out cfg_run2").code == 0);
  j = nlohmann::json::parse(slurp(workdir() / "cfg_run2" / "config.json"));
  CHECK(j["train"]["epochs"] == 1);
  CHECK(j["train"]["batch_size"] == 64);
}

TEST_CASE("numerical failure exits with code 2 and keeps the report") {
  const Run r = h4g("train --preset homo --epochs 2 --temperature 1e-320 --out diverged");
  CHECK(r.code == 2);
  CHECK(fs::exists(workdir() / "diverged" / "report.csv"));
  CHECK(fs::exists(workdir() / "diverged" / "summary.json"));
}

TEST_CASE("kernel choice does not change results") {
  REQUIRE(h4g("--kernels scalar train --preset homo --epochs 2 --out k_scalar").code == 0);
  REQUIRE(h4g("--kernels auto train --preset homo --epochs 2 --out k_auto").code == 0);
  CHECK(slurp(workdir() / "k_scalar" / "model.h4g") == slurp(workdir() / "k_auto" / "model.h4g"));
  CHECK(slurp(workdir() / "k_scalar" / "report.csv") == slurp(workdir() / "k_auto" / "report.csv"));
}

TEST_CASE("full default sweep on the homophilic preset") {
  const Run r = h4g("sweep --preset homo --out sweep");
  REQUIRE(r.code == 0);
  std::istringstream in(slurp(workdir() / "sweep" / "sweep.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "block_size,curvature,seed,accuracy,note");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    CHECK(line.back() == ',');  // no note: every default point is valid
    ++rows;
  }
  CHECK(rows == 12);
}
