#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <json.hpp>

#include "qguess/cli.hpp"
#include "support.hpp"

using namespace qguess;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "qguess");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<double> parse_row(const std::string& row) {
  std::vector<double> out;
  std::istringstream in(row);
  for (std::string cell; std::getline(in, cell, ',');) out.push_back(std::stod(cell));
  return out;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"verify", "--d", "1"}).code == 2);
  CHECK(run({"verify", "--count", "0"}).code == 2);
  CHECK(run({"verify", "--tol", "-1"}).code == 2);
  CHECK(run({"verify", "--bogus"}).code == 2);
  CHECK(run({"region", "--grid", "1"}).code == 2);
  CHECK(run({"demo", "--state", "nope"}).code == 2);
  CHECK(run({"demo", "--format", "xml"}).code == 2);
  CHECK(run({"region", "-o", "/nonexistent-dir/x.csv"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("verify writes one JSON line per state and relation") {
  const Result r = run({"verify", "--d", "3", "--count", "2", "--seed", "1"});
  CHECK(r.code == 0);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 18);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < ls.size(); ++i) {
    const auto j = nlohmann::json::parse(ls[i]);
    CHECK(j["pass"] == true);
    CHECK(j["state"] == static_cast<int>(i / 9));
    if (i < 9) ids.push_back(j["relation_id"]);
  }
  CHECK(ids == std::vector<std::string>{"EQ3", "THM1", "LEMMA1", "THM2A", "THM2B", "THM3A",
                                        "THM3B", "EQ13", "DUALITY"});
  CHECK(r.err.find("fail 0") != std::string::npos);

  // Byte-identical reruns, whatever the thread count.
  CHECK(run({"verify", "--d", "3", "--count", "2", "--seed", "1"}).out == r.out);
  setenv("QGUESS_THREADS", "1", 1);
  CHECK(run({"verify", "--d", "3", "--count", "2", "--seed", "1"}).out == r.out);
  unsetenv("QGUESS_THREADS");
  CHECK(run({"verify", "--d", "3", "--count", "2", "--seed", "2"}).out != r.out);
}

TEST_CASE("verify on qubits adds the circle and passes a larger sweep") {
  const Result r = run({"verify", "--d", "2", "--dim-b", "2", "--count", "200", "--seed", "7"});
  CHECK(r.code == 0);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 200 * 9 + 1);
  CHECK(nlohmann::json::parse(ls.back())["relation_id"] == "QUBIT_CIRCLE");
  CHECK(r.err.find("fail 0") != std::string::npos);
}

TEST_CASE("verify csv and file output") {
  const std::string path = "qguess_test_verify.csv";
  const Result r = run({"verify", "--d", "2", "--count", "1", "--format", "csv", "-o", path});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream f(path, std::ios::binary);
  std::stringstream buf;
  buf << f.rdbuf();
  const auto ls = lines(buf.str());
  REQUIRE(ls.size() == 1 + 9 + 1);
  CHECK(ls[0] == "state,relation_id,lhs_lo,lhs_hi,rhs_lo,rhs_hi,slack,pass,seed,status");
  CHECK(buf.str().find('\r') == std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("region for d = 64") {
  const Result r = run({"region", "--d", "64"});
  CHECK(r.code == 0);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 258);
  CHECK(ls[0] == "theta,p_z,p_x,thm3_pz_cap,thm3_px_cap");
  const auto first = parse_row(ls[1]);
  const auto last = parse_row(ls.back());
  CHECK(std::abs(first[1] - 1.0) <= 1e-12);
  CHECK(std::abs(first[2] - 1.0 / 64) <= 1e-12);
  CHECK(std::abs(last[1] - 1.0 / 64) <= 1e-12);
  CHECK(std::abs(last[2] - 1.0) <= 1e-12);
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto row = parse_row(ls[i]);
    CHECK(row[1] <= row[3] + 1e-12);
    CHECK(row[2] <= row[4] + 1e-12);
  }
}

TEST_CASE("region for qubits lies on the circle") {
  const Result r = run({"region", "--d", "2", "--grid", "33"});
  CHECK(r.code == 0);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 34);
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto row = parse_row(ls[i]);
    const double c = (2 * row[1] - 1) * (2 * row[1] - 1) + (2 * row[2] - 1) * (2 * row[2] - 1);
    // Twelve significant digits in the file bound the round trip.
    CHECK(std::abs(c - 1.0) <= 1e-9);
  }
  const Result j = run({"region", "--d", "2", "--grid", "3", "--format", "json"});
  CHECK(nlohmann::json::parse(lines(j.out)[1])["theta"].get<double>() ==
        doctest::Approx(std::acos(0.0) / 2));
}

TEST_CASE("demo") {
  const Result phi = run({"demo", "--state", "phi", "--d", "2"});
  CHECK(phi.code == 0);
  for (const char* key : {"Z stage fidelity       1.000000", "X stage fidelity       1.000000",
                          "circuit fidelity       1.000000", "guaranteed bound       1.000000"}) {
    CHECK(phi.out.find(key) != std::string::npos);
  }
  const Result prod = run({"demo", "--state", "product", "--d", "4"});
  CHECK(prod.code == 0);
  CHECK(prod.out.find("guaranteed bound       0.250000") != std::string::npos);
  for (const char* s : {"ghz", "theta", "random"}) {
    CHECK(run({"demo", "--state", s, "--d", "3", "--theta", "0.3"}).code == 0);
  }
}

TEST_CASE("the installed binary runs") {
  const std::string cmd = std::string(QGUESS_BINARY) + " region --d 2 --grid 2 > /dev/null";
  CHECK(std::system(cmd.c_str()) == 0);
  const std::string bad = std::string(QGUESS_BINARY) + " verify --d 1 2> /dev/null";
  const int status = std::system(bad.c_str());
  CHECK(WEXITSTATUS(status) == 2);
}
