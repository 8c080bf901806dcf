#include <sys/wait.h>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "testutil.hpp"

namespace {

struct RunResult {
  int code = -1;
  std::string output;  // stdout and stderr interleaved
};

RunResult run_cli(const std::string& args) {
  std::string cmd = std::string(SECAN_CLI_BIN) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string proto(const char* name) {
  return "\"" + testutil::protocol_path(name) + "\"";
}

std::string write_temp(const std::string& name, const std::string& content) {
  std::string path = "/tmp/" + name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("analyze exit codes and verdict rendering") {
  auto ok = run_cli("analyze --metric witness " + proto("keyserver.proto"));
  CHECK(ok.code == 0);
  CHECK(ok.output.find("result: Increasing") != std::string::npos);

  auto dek = run_cli("analyze --metric dek " + proto("keyserver.proto"));
  CHECK(dek.code == 2);
  CHECK(dek.output.find("result: NotProvedIncreasing") != std::string::npos);
  CHECK(dek.output.find("FAILS") != std::string::npos);
}

TEST_CASE("analyze json reports") {
  auto r = run_cli("analyze --metric witness --format json " +
                   proto("keyserver.proto"));
  CHECK(r.code == 0);
  auto doc = nlohmann::json::parse(r.output);
  CHECK(doc["schema"] == 1);
  CHECK(doc["metric"] == "witness");
  CHECK(doc["increasing"] == true);
  CHECK(doc["verdicts"].size() == 18);
  for (const auto& v : doc["verdicts"]) CHECK(v["holds"] == true);
}

TEST_CASE("roles are printable and round-trip through the override") {
  auto r = run_cli("roles --format json " + proto("keyserver.proto"));
  REQUIRE(r.code == 0);
  auto doc = nlohmann::json::parse(r.output);
  REQUIRE(doc["roles"].size() == 3);
  CHECK(doc["roles"][0]["agent"] == "A");
  CHECK(doc["roles"][0]["rules"][0]["send"] == "enc(A . Na^i . S . B, ks)");
  CHECK(doc["roles"][1]["agent"] == "B");
  CHECK(doc["roles"][1]["variables"].size() == 2);

  std::string path = write_temp("secan_roles_roundtrip.json", r.output);
  auto again = run_cli("analyze --metric witness --explicit-roles \"" + path +
                       "\" " + proto("keyserver.proto"));
  CHECK(again.code == 0);
  CHECK(again.output.find("result: Increasing") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("patterns listing") {
  auto r = run_cli("patterns " + proto("keyserver.proto"));
  REQUIRE(r.code == 0);
  int numbered = 0;
  std::istringstream lines(r.output);
  std::string line;
  while (std::getline(lines, line))
    if (!line.empty() && isdigit(static_cast<unsigned char>(line[0])))
      ++numbered;
  CHECK(numbered == 8);
  CHECK(r.output.find("1. {A_1.Na_1.S_1.B_1}_K_S_1") != std::string::npos);
  CHECK(r.output.find("(role A, rule 1, send)") != std::string::npos);
}

TEST_CASE("probe command") {
  auto r = run_cli("oracle probe --metric fmax --trials 300 " +
                   proto("keyserver.proto"));
  CHECK(r.code == 0);
  CHECK(r.output.find("300 trials, 0 violations") != std::string::npos);

  auto j = run_cli("oracle probe --metric dekan --trials 200 --format json " +
                   proto("keyserver.proto"));
  CHECK(j.code == 0);
  auto doc = nlohmann::json::parse(j.output);
  CHECK(doc["metric"] == "dekan");
  CHECK(doc["trials"] == 200);
  CHECK(doc["violations"] == 0);
  CHECK(doc["examples"].empty());
}

TEST_CASE("attack command") {
  auto safe = run_cli("oracle attack --secret sec --sessions 1 " +
                      proto("keyserver.proto"));
  CHECK(safe.code == 0);
  CHECK(safe.output.find("no attack found within 1 sessions per role") !=
        std::string::npos);

  auto leak = run_cli("oracle attack --secret sec --sessions 1 " +
                      proto("keyserver_broken.proto"));
  CHECK(leak.code == 3);
  CHECK(leak.output.find("secret sec leaked after 2 steps") !=
        std::string::npos);

  auto j = run_cli("oracle attack --secret sec --sessions 1 --format json " +
                   proto("keyserver_broken.proto"));
  CHECK(j.code == 3);
  auto doc = nlohmann::json::parse(j.output);
  CHECK(doc["found"] == true);
  REQUIRE(doc["trace"].size() == 2);
  CHECK(doc["trace"][0]["agent"] == "A");
  CHECK(doc["trace"][1]["agent"] == "S");
  CHECK(doc["trace"][1]["rule"] == 1);
}

TEST_CASE("errors are reported with a nonzero exit") {
  auto missing = run_cli("analyze --metric dek /no/such/file.proto");
  CHECK(missing.code == 1);
  CHECK(missing.output.find("error: cannot open") != std::string::npos);

  auto secret = run_cli("oracle attack --secret nosuch " +
                        proto("keyserver.proto"));
  CHECK(secret.code == 1);
  CHECK(secret.output.find("unknown secret 'nosuch'") != std::string::npos);

  std::string bad = write_temp("secan_bad.proto", "principals A;\n");
  auto parse = run_cli("analyze --metric dek \"" + bad + "\"");
  CHECK(parse.code == 1);
  CHECK(parse.output.find("error: line 2, col 1: missing intruder") !=
        std::string::npos);
  std::remove(bad.c_str());

  auto nometric = run_cli("analyze " + proto("keyserver.proto"));
  CHECK(nometric.code == 1);
  CHECK(nometric.output.find("--metric") != std::string::npos);

  auto badflag = run_cli("roles --bogus " + proto("keyserver.proto"));
  CHECK(badflag.code == 1);
}
