#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gibbs/cli.hpp"
#include "gibbs/sampler.hpp"

using namespace gibbs;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "gibbs_partitions");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

json error_json(const Result& r) { return json::parse(r.err); }

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("gibbs_cli_test_" + name);
}

}  // namespace

TEST_CASE("classify") {
  auto r = run({"classify", "--energy", "const", "--beta", "1"});
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j.at("scenario") == "S3");
  CHECK(j.at("regime") == "ii");
  CHECK(j.at("limit_shape") == "dilog");
  CHECK(j.at("config").at("energy").at("kind") == "const");

  r = run({"classify", "--energy", R"({"kind":"decay","alpha":0.5,"beta":1})"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out).at("limit_shape") == "classical");

  r = run({"classify", "--energy", "log", "--beta", "1"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out).at("limit_shape") == "indeterminate");
}

TEST_CASE("expect approaches the lambda law") {
  auto r = run({"expect", "--energy", "const", "--beta", "0", "--mu", "0.01"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  const double pi2_6 = M_PI * M_PI / 6.0;
  CHECK(std::abs(j.at("scaled_expected_monomers").get<double>() - pi2_6) / pi2_6 < 0.02);
  CHECK(j.at("points").size() == 4);
}

TEST_CASE("shape csv") {
  auto r = run({"shape", "--energy", "log", "--beta", "0.5", "--x", "0.5"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string header, cols, row;
  std::getline(in, header);
  std::getline(in, cols);
  std::getline(in, row);
  CHECK(header.rfind("# gibbs_partitions", 0) == 0);
  CHECK(cols == "x,F");
  const double F = std::stod(row.substr(row.find(',') + 1));
  CHECK(F == doctest::Approx(0.634621).epsilon(1e-6));

  r = run({"shape", "--energy", "log", "--beta", "1.5"});
  CHECK(r.code == 3);
  CHECK(error_json(r).at("error").at("code") == "domain");
  CHECK(run({"shape", "--energy", "log", "--beta", "1.5", "--formal", "--x", "1"}).code == 0);
}

TEST_CASE("sample is reproducible and readable") {
  const std::vector<std::string> args{"sample", "--energy", "const", "--beta", "1", "--mu", "0.1",
                                      "--samples", "50", "--seed", "99"};
  const auto a = run(args);
  const auto b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  std::istringstream in(a.out);
  const SampleDump d = read_ndjson(in);
  CHECK(d.samples.size() == 50);
  CHECK(d.header.at("seed") == 99);

  auto args2 = args;
  args2.back() = "100";
  CHECK(run(args2).out != a.out);

  const auto c = run({"sample", "--ensemble", "canonical", "--target-mass", "8", "--samples", "20", "--seed", "1"});
  REQUIRE(c.code == 0);
  std::istringstream cin(c.out);
  for (const auto& p : read_ndjson(cin).samples) CHECK(p.mass() == 8);
}

TEST_CASE("environment seed is a fallback") {
  const std::vector<std::string> base{"sample", "--mu", "0.2", "--samples", "10"};
  setenv("GIBBS_PARTITIONS_SEED", "4242", 1);
  const auto env = run(base);
  unsetenv("GIBBS_PARTITIONS_SEED");
  auto explicit_args = base;
  explicit_args.insert(explicit_args.end(), {"--seed", "4242"});
  const auto flag = run(explicit_args);
  REQUIRE(env.code == 0);
  CHECK(json::parse(env.out.substr(0, env.out.find('\n'))).at("seed") == 4242);
  std::istringstream a(env.out), b(flag.out);
  CHECK(read_ndjson(a).samples == read_ndjson(b).samples);

  setenv("GIBBS_PARTITIONS_SEED", "abc", 1);
  const auto bad = run(base);
  unsetenv("GIBBS_PARTITIONS_SEED");
  CHECK(bad.code == 2);
}

TEST_CASE("errors go to stderr as JSON with mapped exit codes") {
  auto r = run({"expect", "--energy", "quadratic", "--mu", "0.1"});
  CHECK(r.code == 2);
  CHECK(error_json(r).at("error").at("code") == "config");
  CHECK(r.out.empty());

  r = run({"expect", "--mu", "-1"});
  CHECK(r.code == 5);
  CHECK(error_json(r).at("error").at("code") == "non_convergent");

  r = run({"shape", "--energy", "power", "--p", "2"});
  CHECK(r.code == 3);
  CHECK(error_json(r).at("error").at("code") == "domain");

  r = run({"sample", "--ensemble", "canonical", "--strategy", "rejection", "--target-mass", "30", "--max-attempts",
           "1", "--samples", "5"});
  CHECK(r.code == 4);
  CHECK(error_json(r).at("error").at("code") == "cap_exceeded");

  r = run({"nonsense"});
  CHECK(r.code == 2);
  r = run({"classify", "--no-such-flag"});
  CHECK(r.code == 2);
}

TEST_CASE("a report replays through --config") {
  const auto path = temp_file("report.json");
  auto r = run({"converge", "--energy", "const", "--beta", "1", "--mu-seq", "0.1", "--samples", "40", "--seed", "5",
                "--y", "0.2", "--epsilon", "1", "--out", path.string()});
  REQUIRE(r.code == 0);
  std::ifstream in(path);
  const json first = json::parse(in);
  const auto again = run({"converge", "--config", path.string()});
  REQUIRE(again.code == 0);
  const json second = json::parse(again.out);
  CHECK(second.at("runs") == first.at("runs"));
  CHECK(second.at("config") == first.at("config"));
  std::filesystem::remove(path);
}

TEST_CASE("condense, critical and bell subcommands") {
  auto r = run({"condense", "--energy", R"({"kind":"table","table":[0],"tail":{"kind":"power","c":1,"p":1},"beta":1})",
                "--mu", "0.05", "--samples", "2000", "--seed", "3"});
  CHECK(r.code == 0);
  CHECK(json::parse(r.out).at("report") == "condensation");
  CHECK(run({"condense", "--mu", "0.05", "--samples", "10"}).code == 3);

  r = run({"critical", "--mu", "0.05", "--samples", "2000", "--seed", "3"});
  CHECK((r.code == 0 || r.code == 1));
  CHECK(json::parse(r.out).at("runs").size() == 1);

  r = run({"bell", "--masses", "50", "--samples", "500", "--seed", "3"});
  CHECK((r.code == 0 || r.code == 1));
  CHECK(json::parse(r.out).contains("monte_carlo_consistent"));
}

TEST_CASE("installed binary") {
  const char* bin = std::getenv("GIBBS_PARTITIONS_BIN");
  if (!bin) return;
  const std::string cmd = std::string(bin) + " classify --energy loglog --beta 1 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string text;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) text.append(buf, n);
  CHECK(pclose(pipe) == 0);
  CHECK(json::parse(text).at("limit_shape") == "exponential");
}
