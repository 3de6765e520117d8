#include "hoi/cli.hpp"
#include "hoi/csv.hpp"
#include "hoi/synthetic.hpp"

#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using hoi::cli::run;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("hoi_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

std::size_t columns(const std::string& line) {
  return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

const char* kSpec = R"({"blocks":[{"kind":"R","n_sources":3,"c":1.0},{"kind":"S","n_sources":2,"c":1.0},{"kind":"independent","n_sources":2,"c":1.0}]})";

}  // namespace

TEST_CASE("synth is deterministic and round-trips through scan") {
  TempDir tmp;
  write(tmp / "pgm.json", kSpec);
  REQUIRE(run({"hoi", "synth", "--spec", tmp / "pgm.json", "--samples", "5000", "--seed", "42",
               "--out", tmp / "a.csv", "--cov-out", tmp / "cov.csv"}) == 0);
  REQUIRE(run({"hoi", "synth", "--spec", tmp / "pgm.json", "--samples", "5000", "--seed", "42",
               "--out", tmp / "b.csv"}) == 0);
  CHECK(slurp(tmp / "a.csv") == slurp(tmp / "b.csv"));
  const auto data = lines(slurp(tmp / "a.csv"));
  CHECK(data.size() == 5001);
  CHECK(data[0] == "b0_R_x1,b0_R_x2,b0_R_x3,b0_R_y,b1_S_x1,b1_S_x2,b1_S_y,b2_I_x1,b2_I_x2");

  REQUIRE(run({"hoi", "synth", "--spec", tmp / "pgm.json", "--samples", "5000", "--seed", "43",
               "--out", tmp / "c.csv"}) == 0);
  CHECK(slurp(tmp / "a.csv") != slurp(tmp / "c.csv"));

  // Whole R block: sample Ω vs the analytic value.
  REQUIRE(run({"hoi", "scan", "-i", tmp / "a.csv", "--orders", "4:4", "--reduce", "top:1:max:o",
               "--bias-correct", "-o", tmp / "top.csv"}) == 0);
  const auto top = lines(slurp(tmp / "top.csv"));
  REQUIRE(top.size() == 2);
  CHECK(top[0] == "dataset,rank,order,nplet,mask,tc,dtc,o,s");
  CHECK(top[1].find("\"b0_R_x1,b0_R_x2,b0_R_x3,b0_R_y\"") != std::string::npos);
  const double omega = std::stod(top[1].substr(top[1].rfind(',', top[1].rfind(',') - 1) + 1));
  const auto truth = hoi::synthetic::ground_truth_hoi(hoi::synthetic::r_system_cov(3, 1.0),
                                                      std::vector<int>{0, 1, 2, 3});
  CHECK(std::abs(omega - truth.o) < 0.05);

  // Analytic covariance input reproduces ground truth exactly.
  REQUIRE(run({"hoi", "scan", "-i", tmp / "cov.csv", "--covariance", "--orders", "4:4",
               "--reduce", "top:1:max:o", "-o", tmp / "top_cov.csv"}) == 0);
  const auto exact = lines(slurp(tmp / "top_cov.csv"));
  CHECK(exact[1].find("0.34657359027997") != std::string::npos);
}

TEST_CASE("scan output shapes") {
  TempDir tmp;
  write(tmp / "pgm.json", kSpec);
  REQUIRE(run({"hoi", "synth", "--spec", tmp / "pgm.json", "--samples", "300", "--seed", "1",
               "--out", tmp / "x.csv"}) == 0);
  REQUIRE(run({"hoi", "scan", "--input", tmp / "x.csv", "--orders", "3:all", "--reduce",
               "top:10:max:o", "--batch-size", "10000", "--bias-correct", "--out",
               tmp / "res.csv"}) == 0);
  const auto top = lines(slurp(tmp / "res.csv"));
  CHECK(top.size() == 11);

  REQUIRE(run({"hoi", "scan", "-i", tmp / "x.csv", "--reduce", "hist:o:10:-1:1", "-o",
               tmp / "hist.csv"}) == 0);
  const auto hist = lines(slurp(tmp / "hist.csv"));
  CHECK(hist[0] == "dataset,bin,lo,hi,count");
  CHECK(hist.size() == 13);  // under + 10 + over
  std::uint64_t total = 0;
  for (std::size_t i = 1; i < hist.size(); ++i) total += std::stoull(hist[i].substr(hist[i].rfind(',') + 1));
  CHECK(total == 466);  // 2^9 − 1 − 9 − 36

  REQUIRE(run({"hoi", "scan", "-i", tmp / "x.csv", "--orders", "3:3", "--reduce", "all", "-o",
               tmp / "all.csv"}) == 0);
  const auto all = lines(slurp(tmp / "all.csv"));
  CHECK(all[0] == "dataset,order,nplet,mask,tc,dtc,o,s");
  CHECK(all.size() == 85);
}

TEST_CASE("features over a directory") {
  TempDir tmp;
  fs::create_directories(tmp.path / "data");
  write(tmp / "pgm.json", kSpec);
  for (int s = 0; s < 3; ++s)
    REQUIRE(run({"hoi", "synth", "--spec", tmp / "pgm.json", "--samples", "400", "--seed",
                 std::to_string(s), "--out", (tmp.path / "data" / ("d" + std::to_string(s) + ".csv")).string()}) == 0);
  REQUIRE(run({"hoi", "features", "--input", (tmp.path / "data").string(), "--out",
               tmp / "features.csv"}) == 0);
  const auto f = lines(slurp(tmp / "features.csv"));
  REQUIRE(f.size() == 4);
  for (const auto& l : f) CHECK(columns(l) == 22);
  CHECK(f[0].rfind("dataset,tc_max,", 0) == 0);
  CHECK(f[1].rfind("d0,", 0) == 0);
  CHECK(f[3].rfind("d2,", 0) == 0);
}

TEST_CASE("greedy, anneal and count") {
  TempDir tmp;
  write(tmp / "pgm.json", kSpec);
  REQUIRE(run({"hoi", "synth", "--spec", tmp / "pgm.json", "--samples", "300", "--seed", "3",
               "--cov-out", tmp / "cov.csv", "--out", tmp / "x.csv"}) == 0);
  REQUIRE(run({"hoi", "greedy", "-i", tmp / "cov.csv", "--covariance", "--measure", "o",
               "--direction", "max", "--target-order", "4", "--kappa", "3", "-o",
               tmp / "g.csv"}) == 0);
  const auto g = lines(slurp(tmp / "g.csv"));
  CHECK(g[0] == "order,rank,nplet,mask,objective");
  CHECK(g.size() == 7);
  CHECK(g[4].rfind("4,1,\"b0_R_x1,b0_R_x2,b0_R_x3,b0_R_y\",00f,", 0) == 0);

  REQUIRE(run({"hoi", "anneal", "-i", tmp / "x.csv", "--direction", "min", "--kappa", "4",
               "--iters", "50", "--seed", "5", "-o", tmp / "a.csv"}) == 0);
  const auto a = lines(slurp(tmp / "a.csv"));
  CHECK(a[0] == "kind,chain,order,nplet,mask,objective");
  CHECK(a.size() == 6);
  CHECK(a[1].rfind("best,", 0) == 0);

  REQUIRE(run({"hoi", "count", "--n", "30", "--orders", "3:30", "-o", tmp / "n.txt"}) == 0);
  CHECK(slurp(tmp / "n.txt").find("1073741358") != std::string::npos);
}

TEST_CASE("exit codes") {
  TempDir tmp;
  CHECK(run({"hoi", "scan"}) == 1);
  CHECK(run({"hoi", "scan", "-i", tmp / "missing.csv"}) == 1);
  CHECK(run({"hoi", "frobnicate"}) == 1);
  CHECK(run({"hoi", "count", "--n", "4", "--orders", "5:6"}) == 1);
  write(tmp / "const.csv", "a,b,c\n1,2,3\n1,5,6\n1,7,9\n");
  CHECK(run({"hoi", "scan", "-i", tmp / "const.csv"}) == 1);
  write(tmp / "nan.csv", "a,b,c\n1,2,3\nx,5,6\n2,7,9\n");
  CHECK(run({"hoi", "scan", "-i", tmp / "nan.csv"}) == 1);
  write(tmp / "bad_cov.csv", "a,b,c\n1,2,0\n2,1,0\n0,0,1\n");
  CHECK(run({"hoi", "scan", "-i", tmp / "bad_cov.csv", "--covariance", "-o", tmp / "o.csv"}) == 2);
  write(tmp / "pgm.json", "{\"blocks\":[{\"kind\":\"Q\",\"n_sources\":2}]}");
  CHECK(run({"hoi", "synth", "--spec", tmp / "pgm.json", "-o", tmp / "o.csv"}) == 1);
  CHECK(run({"hoi", "anneal", "-i", tmp / "const.csv", "--alpha", "1.5"}) == 1);
}

TEST_CASE("progress lines and worker independence through the binary") {
  const char* exe = std::getenv("HOI_CLI");
  if (!exe) {
    MESSAGE("HOI_CLI not set; skipping subprocess checks");
    return;
  }
  TempDir tmp;
  write(tmp / "pgm.json", kSpec);
  const std::string base = std::string(exe) + " synth --spec " + (tmp / "pgm.json") +
                           " --samples 200 --seed 9 --out " + (tmp / "x.csv");
  REQUIRE(std::system(base.c_str()) == 0);
  for (const char* w : {"1", "4"}) {
    const std::string cmd = std::string(exe) + " scan -i " + (tmp / "x.csv") +
                            " --reduce top:5:min:o --progress --workers " + w + " -o " +
                            (tmp / (std::string("w") + w + ".csv")) + " 2> " +
                            (tmp / (std::string("err") + w + ".txt"));
    REQUIRE(std::system(cmd.c_str()) == 0);
  }
  CHECK(slurp(tmp / "w1.csv") == slurp(tmp / "w4.csv"));
  const auto err = lines(slurp(tmp / "err1.txt"));
  REQUIRE_FALSE(err.empty());
  CHECK(err.front().rfind("{\"event\":\"batch\",\"visited\":", 0) == 0);
  CHECK(err.front().find("\"elapsed\"") != std::string::npos);

  const std::string bad = std::string(exe) + " count --n 3 --orders 4:4 2>/dev/null";
  CHECK(WEXITSTATUS(std::system(bad.c_str())) == 1);
}
