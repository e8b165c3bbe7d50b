#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "sostest/json_io.hpp"

namespace {

const std::string kCli = SOSTEST_CLI_PATH;

struct RunResult {
  int exit_code;
  std::string stdout_text;
};

RunResult run(const std::string& args) {
  std::string out_path = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                         "/sostest_cli_out.txt";
  std::string cmd = kCli + " " + args + " > " + out_path + " 2>/dev/null";
  int rc = std::system(cmd.c_str());
  std::ifstream in(out_path);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WEXITSTATUS(rc), ss.str()};
}

std::string write_temp(const std::string& name, const std::string& content) {
  std::string path = std::string("/tmp/") + name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("usage errors exit with code 2", "[cli]") {
  REQUIRE(run("definitely-not-a-command").exit_code == 2);
  REQUIRE(run("interp-sweep").exit_code == 2);              // missing --n
  REQUIRE(run("nonneg-test /tmp/does-not-exist.json").exit_code == 2);
  auto bad = write_temp("bad_poly.json", "{\"n\": 2, \"oops\": 1}");
  REQUIRE(run("nonneg-test " + bad).exit_code == 2);
  auto empty = write_temp("empty_poly.json",
                          R"({"n": 1, "basis": "monomial", "terms": []})");
  REQUIRE(run("sos-check " + empty).exit_code == 2);
}

TEST_CASE("sweep reruns are byte identical", "[cli]") {
  std::string args = "interp-sweep --n 8,12 --m-exp 0.8 --d 2 --seeds 3,4 --values unit";
  auto a = run(args);
  auto b = run(args);
  REQUIRE(a.exit_code == 0);
  REQUIRE(a.stdout_text == b.stdout_text);
  REQUIRE(a.stdout_text.find("seed,n,m,d,C,M_dev,H_norm,g_norm,gsq_norm,residual") !=
          std::string::npos);
  // 2 n's x 2 seeds = 4 data rows + comment + header
  int lines = 0;
  for (char ch : a.stdout_text)
    if (ch == '\n') ++lines;
  REQUIRE(lines == 6);

  auto c = run(args + " --seeds 5");
  REQUIRE(c.stdout_text != a.stdout_text);
}

TEST_CASE("sweep emits valid json when asked", "[cli]") {
  auto r = run("interp-sweep --n 6 --m 3 --d 2 --seeds 1 --format json");
  REQUIRE(r.exit_code == 0);
  auto j = sostest::Json::parse(r.stdout_text);
  REQUIRE(j["rows"].size() == 1);
  REQUIRE(j["rows"][0]["n"] == 6);
  REQUIRE(j["config"]["d"] == 2);
}

TEST_CASE("sos-check accepts a known square and emits its decomposition", "[cli]") {
  auto poly = write_temp("sq_poly.json", R"({
    "n": 1, "basis": "monomial",
    "terms": [ {"vars": [[1,2]], "coeff": 1.0},
               {"vars": [[1,1]], "coeff": -2.0},
               {"vars": [],      "coeff": 1.0} ] })");
  auto r = run("sos-check " + poly);
  REQUIRE(r.exit_code == 0);
  auto j = sostest::Json::parse(r.stdout_text);
  REQUIRE(j["verdict"] == "YES");
  REQUIRE(j["squares"].size() >= 1);
  auto gram = sostest::gram_from_json(j["gram"]);
  REQUIRE(gram.index.size() == 2);
}

TEST_CASE("sos-check rejects the Motzkin polynomial", "[cli]") {
  auto poly = write_temp("motzkin_poly.json", R"({
    "n": 2, "basis": "monomial",
    "terms": [ {"vars": [[1,4],[2,2]], "coeff": 1.0},
               {"vars": [[1,2],[2,4]], "coeff": 1.0},
               {"vars": [[1,2],[2,2]], "coeff": -3.0},
               {"vars": [],            "coeff": 1.0} ] })");
  auto r = run("sos-check " + poly + " --max-iter 20000");
  REQUIRE(r.exit_code == 1);
  auto j = sostest::Json::parse(r.stdout_text);
  REQUIRE(j["verdict"] == "NO");
  REQUIRE(j["report"]["feasible"] == false);
}

TEST_CASE("sos-check runs on sample files", "[cli]") {
  auto samples = write_temp("samples.json", R"({
    "n": 2,
    "points": [[0.3, -0.4], [1.1, 0.2]],
    "values": [0.25, 0.5] })");
  auto r = run("sos-check " + samples + " --half-degree 2");
  REQUIRE(r.exit_code == 0);
  auto j = sostest::Json::parse(r.stdout_text);
  REQUIRE(j["verdict"]["verdict"] == "YES");

  auto neg = write_temp("samples_neg.json", R"({
    "n": 2,
    "points": [[0.3, -0.4]],
    "values": [-0.5] })");
  auto rn = run("sos-check " + neg + " --half-degree 2");
  REQUIRE(rn.exit_code == 1);
}

TEST_CASE("certify motzkin emits the full report", "[cli]") {
  auto r = run("certify --family motzkin --r 2 --c 0");
  REQUIRE(r.exit_code == 0);
  auto j = sostest::Json::parse(r.stdout_text);
  REQUIRE(j["ef"] == -3.0);
  REQUIRE(j["psd"]["pass"] == true);
  REQUIRE(j["distance"]["log2_bound"].get<double>() < 0);
  REQUIRE(j["certificate"]["kind"] == "motzkin");

  REQUIRE(run("certify --family motzkin --r 3").exit_code == 2);
  REQUIRE(run("certify --family unknown").exit_code == 2);
}

TEST_CASE("certify xor reports E~[p] = -m", "[cli]") {
  auto r = run("certify --family xor --n 16 --m 40 --seed 2");
  REQUIRE(r.exit_code == 0);
  auto j = sostest::Json::parse(r.stdout_text);
  REQUIRE(j["ep"] == -40.0);
  REQUIRE(j["psd"]["pass"] == true);
  REQUIRE(j["certificate"]["equations"].size() == 40);
}

TEST_CASE("nonneg-test verdicts and exit codes", "[cli]") {
  auto sq = write_temp("nn_sq.json",
                       R"({"n": 1, "basis": "monomial", "terms": [{"vars": [[1,2]], "coeff": 1.0}]})");
  auto r = run("nonneg-test " + sq + " --epsilon 0.5 --seed 11");
  REQUIRE(r.exit_code == 0);
  auto j = sostest::Json::parse(r.stdout_text);
  REQUIRE(j["verdict"]["verdict"] == "YES");

  auto negx = write_temp("nn_negx.json",
                         R"({"n": 1, "basis": "monomial", "terms": [{"vars": [[1,1]], "coeff": -1.0}]})");
  auto rn = run("nonneg-test " + negx + " --epsilon 0.5 --seed 11");
  REQUIRE(rn.exit_code == 1);
  auto jn = sostest::Json::parse(rn.stdout_text);
  REQUIRE(jn["verdict"]["verdict"] == "NO");
  REQUIRE(jn["verdict"].contains("witness_point"));
}

TEST_CASE("lowerbound-demo inside and outside the sampling regime", "[cli]") {
  auto r = run("lowerbound-demo --n 10 --r 2 --c 1 --m 8 --seed 7");
  REQUIRE(r.exit_code == 0);
  auto j = sostest::Json::parse(r.stdout_text);
  REQUIRE(j["far"] == true);
  REQUIRE(j["tester"] == "YES");
  REQUIRE(j["outside_lower_bound_regime"] == false);

  auto r2 = run("lowerbound-demo --n 10 --r 2 --c 1 --m 9000 --seed 7");
  REQUIRE(r2.exit_code == 1);
  auto j2 = sostest::Json::parse(r2.stdout_text);
  REQUIRE(j2["outside_lower_bound_regime"] == true);
  REQUIRE(j2["tester"] == "NO");
}

TEST_CASE("config file values yield to explicit flags", "[cli]") {
  auto cfg = write_temp("sweep.ini", "format=json\nseed=9\n");
  auto r = run("--config " + cfg + " interp-sweep --n 6 --m 2 --d 2");
  REQUIRE(r.exit_code == 0);
  auto j = sostest::Json::parse(r.stdout_text);  // json came from the config file
  REQUIRE(j["config"]["seeds"][0] == 9);
  auto r2 = run("--config " + cfg + " --format csv interp-sweep --n 6 --m 2 --d 2");
  REQUIRE(r2.stdout_text.rfind("# command=interp-sweep", 0) == 0);  // flag wins
}

TEST_CASE("--out writes the file instead of stdout", "[cli]") {
  std::string path = "/tmp/sostest_out_test.json";
  std::remove(path.c_str());
  auto r = run("certify --family motzkin --r 2 --c 0 --out " + path);
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.stdout_text.empty());
  std::ifstream in(path);
  REQUIRE(in.good());
  sostest::Json j;
  in >> j;
  REQUIRE(j["ef"] == -3.0);
}
