#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace {

std::string g_binary;

struct Run {
  int code;
  std::string out;
};

Run run_cli(const std::string& args, bool merge_stderr = false) {
  std::string cmd = g_binary + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, ""};
  std::string out;
  char buf[4096];
  size_t nr;
  while ((nr = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, nr);
  int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty() && line[0] != '#') out.push_back(line);
  return out;
}

std::vector<int> mults(const std::vector<std::string>& records) {
  std::vector<int> out;
  for (const auto& r : records) {
    size_t pos = r.find(" mult=");
    REQUIRE(pos != std::string::npos);
    out.push_back(std::atoi(r.c_str() + pos + 6));
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

TEST_CASE("tree listing carries the counting weights") {
  auto r = run_cli("trees --order 1 --p 3");
  REQUIRE(r.code == 0);
  auto recs = data_lines(r.out);
  REQUIRE(recs.size() == 4);
  CHECK(mults(recs) == std::vector<int>{1, 1, 3, 3});
  CHECK(r.out.find("# total 4") != std::string::npos);

  auto bare = run_cli("trees --order=0 --p=3");
  REQUIRE(bare.code == 0);
  CHECK(data_lines(bare.out).size() == 2);

  auto no_init = run_cli("trees --order 1 --p 3 --init-leaves false");
  REQUIRE(no_init.code == 0);
  CHECK(data_lines(no_init.out).size() == 1);
}

TEST_CASE("graph listing honors the filter flags") {
  auto all = run_cli("graphs --order 1 --n 2 --p 3 --equilibrium");
  REQUIRE(all.code == 0);
  CHECK(data_lines(all.out).size() == 30);

  auto even = run_cli("graphs --order 1 --n 2 --p 3 --equilibrium --connected --even-only");
  REQUIRE(even.code == 0);
  auto recs = data_lines(even.out);
  CHECK(recs.size() == 8);
  for (const auto& rec : recs) CHECK(rec.find("connected=1") != std::string::npos);

  auto melons = run_cli(
      "graphs --order 1 --n 2 --p 3 --equilibrium --connected --even-only --drop-tadpoles");
  REQUIRE(melons.code == 0);
  for (const auto& rec : data_lines(melons.out))
    CHECK(rec.find("tadpole=0") != std::string::npos);
  CHECK(data_lines(melons.out).size() == 2);
}

TEST_CASE("vanishing cumulants evaluate to an all-zero table") {
  auto r = run_cli("eval --L 4 --sigma2 0 --order 1 --no-timestamp --method momentum");
  REQUIRE(r.code == 0);
  auto rows = data_lines(r.out);
  REQUIRE(rows.size() > 1);
  CHECK(rows[0] == "order,graph,x0,value");
  for (size_t i = 1; i < rows.size(); ++i) {
    size_t comma = rows[i].rfind(',');
    REQUIRE(comma != std::string::npos);
    CHECK(std::atof(rows[i].c_str() + comma + 1) == 0.0);
  }
}

TEST_CASE("repeated runs emit byte-identical output without timestamps") {
  std::string args = "eval --L 4 --sigma2 1 --order 1 --no-timestamp --method momentum";
  auto a = run_cli(args);
  auto b = run_cli(args);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(!a.out.empty());
  CHECK(a.out == b.out);
}

TEST_CASE("effective configuration round-trips through a file") {
  auto first = run_cli("pipeline --L 8 --sigma2 1 --batches 5 --dump-config");
  REQUIRE(first.code == 0);
  CHECK(first.out.find("batches = 5") != std::string::npos);
  CHECK(first.out.find("L = 8") != std::string::npos);

  std::string path = "cli_roundtrip_cfg.txt";
  {
    std::ofstream f(path);
    f << first.out;
  }
  auto second = run_cli("pipeline --config " + path + " --dump-config");
  REQUIRE(second.code == 0);
  CHECK(second.out == first.out);
  std::remove(path.c_str());
}

TEST_CASE("unknown or malformed options exit with the configuration code") {
  CHECK(run_cli("trees --bogus 3").code == 2);
  CHECK(run_cli("eval --method nope").code == 2);
  CHECK(run_cli("fit --L 8").code == 2); // no input given
  CHECK(run_cli("simulate --dt oops --samples 10").code == 2);
}

TEST_CASE("missing files exit with the io code") {
  CHECK(run_cli("fit --input no_such_file_here.csv --L 8").code == 4);
  CHECK(run_cli("trees --config no_such_config_here.txt").code == 4);
}

TEST_CASE("numeric failures exit with the numeric code") {
  std::string path = "cli_flat_corr.csv";
  {
    std::ofstream f(path);
    f << "x0,value\n";
    for (int x = -7; x <= 8; ++x) f << x << ",1\n";
  }
  // lambda 0 removes the quartic kernel from the design entirely
  auto r = run_cli("fit --input " + path + " --L 16 --lambda 0", true);
  CHECK(r.code == 3);
  CHECK(r.out.find("numeric error:") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("simulated correlations feed straight into the fitter") {
  std::string path = "cli_sim_corr.csv";
  auto sim = run_cli("simulate --L 8 --sigma2 1 --samples 200 --burn-in 100 --thinning 2"
                     " --seed 7 --no-timestamp --output " + path);
  REQUIRE(sim.code == 0);
  CHECK(sim.out.find("simulation summary") != std::string::npos);

  auto fit = run_cli("fit --input " + path + " --L 8 --kernels discrete --dt 0.05");
  CHECK(fit.code == 0);
  CHECK(fit.out.find("first-order fit") != std::string::npos);
  CHECK(fit.out.find("c2") != std::string::npos);
  std::remove(path.c_str());
}

int main(int argc, char** argv) {
  doctest::Context ctx;
  std::vector<char*> pass;
  for (int i = 0; i < argc; ++i) {
    if (i > 0 && argv[i][0] != '-' && g_binary.empty()) {
      g_binary = argv[i];
      continue;
    }
    pass.push_back(argv[i]);
  }
  ctx.applyCommandLine((int)pass.size(), pass.data());
  if (g_binary.empty()) {
    std::fprintf(stderr, "usage: test_cli <path to levypw binary>\n");
    return 1;
  }
  return ctx.run();
}
