#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

using json = nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " BETASPLIT_CLI_PATH " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
  return out;
}

// Checks required keys, declared types and no extra keys.
void check_against_schema(const json& doc, const std::string& schema_file) {
  std::ifstream in(std::string(BETASPLIT_SCHEMA_DIR) + "/" + schema_file);
  REQUIRE(in.good());
  const json schema = json::parse(in);
  for (const auto& key : schema["required"]) CHECK(doc.contains(key.get<std::string>()));
  for (const auto& [key, value] : doc.items()) {
    CAPTURE(key);
    REQUIRE(schema["properties"].contains(key));
    const json& type = schema["properties"][key]["type"];
    std::vector<std::string> allowed;
    if (type.is_array()) {
      for (const auto& t : type) allowed.push_back(t);
    } else {
      allowed.push_back(type);
    }
    bool ok = false;
    for (const auto& t : allowed) {
      ok |= (t == "integer" && value.is_number_integer()) || (t == "number" && value.is_number()) ||
            (t == "string" && value.is_string()) || (t == "boolean" && value.is_boolean()) ||
            (t == "null" && value.is_null()) || (t == "array" && value.is_array());
    }
    CHECK(ok);
  }
}

}  // namespace

TEST_CASE("constants command") {
  const Run r = run("constants");
  REQUIRE(r.code == 0);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() > 4);
  CHECK(ls[0].rfind("# betasplit ", 0) == 0);
  CHECK(ls[1] == "name,formula,value");
  bool saw_a = false, saw_b = false, saw_zeta = false;
  for (const auto& l : ls) {
    if (l.rfind("A,1/(2*zeta2),0.303963", 0) == 0) saw_a = true;
    const auto cells = split(l);
    if (cells.size() == 2 && cells[0] == "Bstar-A*X") {
      saw_b = true;
      CHECK(std::abs(std::stod(cells[1])) < 1e-14);
    }
    if (cells.size() == 2 && cells[0] == "8*A^2*zeta3-3*zeta2*Astar") {
      saw_zeta = true;
      CHECK(std::abs(std::stod(cells[1])) < 1e-14);
    }
  }
  CHECK(saw_a);
  CHECK(saw_b);
  CHECK(saw_zeta);
}

TEST_CASE("moments command") {
  const Run d = run("moments --max-n 3");
  REQUIRE(d.code == 0);
  auto ls = lines(d.out);
  REQUIRE(ls.size() == 5);
  CHECK(ls[1] == "n,mu,sigma2");
  CHECK(ls[2] == "1,0,0");
  CHECK(ls[3] == "2,1,0");
  auto row = split(ls[4]);
  CHECK(std::stod(row[1]) == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
  CHECK(std::stod(row[2]) == doctest::Approx(2.0 / 9.0).epsilon(1e-13));

  const Run c = run("moments --max-n 3 --variant continuous");
  ls = lines(c.out);
  CHECK(ls[1] == "n,mu_hat,sigma2_hat");
  row = split(ls[4]);
  CHECK(std::stod(row[1]) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(std::stod(row[2]) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));

  for (const char* variant : {"discrete", "continuous"}) {
    const auto naive = lines(run(std::string("moments --max-n 3000 --variant ") + variant).out);
    const auto fast = lines(run(std::string("moments --max-n 3000 --fast --variant ") + variant).out);
    REQUIRE(naive.size() == fast.size());
    double worst = 0.0;
    for (std::size_t k = 2; k < naive.size(); ++k) {
      const auto a = split(naive[k]), b = split(fast[k]);
      for (int col : {1, 2}) {
        worst = std::max(worst, std::abs(std::stod(a[col]) - std::stod(b[col])));
      }
    }
    CHECK(worst < 1e-9);
  }

  const Run j = run("moments --max-n 50 --format json");
  REQUIRE(j.code == 0);
  const json doc = json::parse(j.out);
  check_against_schema(doc, "moments.schema.json");
  CHECK(doc["mu"].size() == 50);
}

TEST_CASE("pmf and tree commands") {
  const Run p = run("pmf --n 3");
  REQUIRE(p.code == 0);
  const auto ls = lines(p.out);
  REQUIRE(ls.size() == 4);
  CHECK(ls[1] == "h,prob");
  CHECK(std::stod(split(ls[2])[1]) == doctest::Approx(1.0 / 3.0));
  CHECK(std::stod(split(ls[3])[1]) == doctest::Approx(2.0 / 3.0));

  const Run t = run("tree --n 2 --newick");
  REQUIRE(t.code == 0);
  CHECK(lines(t.out)[1] == "(1:1,2:1);");
  const Run big = run("tree --n 200 --variant continuous --seed 3 --newick");
  CHECK(big.code == 0);
  CHECK(lines(big.out)[1].back() == ';');
  const Run table = run("tree --n 50 --seed 3");
  CHECK(table.code == 0);
  CHECK(lines(table.out).size() == 52);
}

TEST_CASE("sample command is deterministic and matches the schema") {
  const Run a = run("sample --n 2 --reps 5 --seed 7");
  const Run b = run("sample --n 2 --reps 5 --seed 7");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);

  const Run j1 = run("sample --n 5000 --reps 3000 --seed 7 --variant continuous --format json --workers 1");
  const Run j4 = run("sample --n 5000 --reps 3000 --seed 7 --variant continuous --format json --workers 4");
  REQUIRE(j1.code == 0);
  CHECK(j1.out == j4.out);
  const json doc = json::parse(j1.out);
  check_against_schema(doc, "summary.schema.json");
  CHECK(doc["n"] == 5000);
  CHECK(doc["reps"] == 3000);
  CHECK(doc["seed"] == 7);
  CHECK(doc["variant"] == "continuous");
  CHECK(doc["ks"].get<double>() < 0.1);

  const json deg = json::parse(run("sample --n 2 --reps 5 --format json").out);
  check_against_schema(deg, "summary.schema.json");
  CHECK(deg["ks"].is_null());
  CHECK(deg["mean"] == 1.0);
}

TEST_CASE("sample values file") {
  const std::string path = "cli_values_test.csv";
  const Run r = run("sample --n 100 --reps 40 --values " + path);
  REQUIRE(r.code == 0);
  std::ifstream in(path);
  std::vector<std::string> ls;
  for (std::string l; std::getline(in, l);) ls.push_back(l);
  REQUIRE(ls.size() == 41);
  CHECK(ls[0] == "value");
  std::remove(path.c_str());
}

TEST_CASE("verify command") {
  const Run sums = run("verify --which sums");
  CHECK(sums.code == 0);
  CHECK(sums.out.find("verdict=bounded") != std::string::npos);
  CHECK(sums.out.find("verdict=diverging") == std::string::npos);

  const Run contraction = run("verify --which contraction --contraction-lo 8 --contraction-hi 11");
  CHECK(contraction.code == 0);
  CHECK(contraction.out.find("n,term1,term2,term3,term4,term5,term6,total,scaled") != std::string::npos);
}

TEST_CASE("clt command") {
  const Run ok = run("clt --n-grid 1000,10000,100000");
  CHECK(ok.code == 0);
  CHECK(ok.out.find("ks_strictly_decreasing=yes") != std::string::npos);

  // n = 3 is a two-point law, far from normal.
  const Run bad = run("clt --n-grid 10000,3 --reps 2000");
  CHECK(bad.code == 1);
}

TEST_CASE("exit codes") {
  CHECK(run("").code == 2);
  CHECK(run("nonsense").code == 2);
  CHECK(run("moments").code == 2);
  CHECK(run("moments --max-n 5 --variant sideways").code == 2);
  CHECK(run("moments --max-n 11", "BETASPLIT_MAX_N=10").code == 2);
  CHECK(run("moments --max-n 10", "BETASPLIT_MAX_N=10").code == 0);
  CHECK(run("moments --max-n 5", "BETASPLIT_MAX_N=zero").code == 2);
  CHECK(run("pmf --n 30000").code == 2);
  CHECK(run("tree --n 20", "BETASPLIT_MAX_N=10").code == 2);
  CHECK(run("clt --n-grid 1000").code == 2);
  CHECK(run("--help").code == 0);
  CHECK(run("--version").code == 0);
}
