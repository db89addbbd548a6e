// End-to-end checks of the installed command surface: exit codes, report
// shape, and the simulate resume contract. The binary path arrives via the
// WINSCRT_CLI environment variable (set by ctest).

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli() {
  const char* p = std::getenv("WINSCRT_CLI");
  REQUIRE_MESSAGE(p != nullptr, "WINSCRT_CLI must point at the CLI binary");
  return p;
}

int run(const std::string& args, const std::string& out_file = "/dev/null") {
  const std::string cmd = "'" + cli() + "' " + args + " >" + out_file + " 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "winscrt_cli_XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    REQUIRE(mkdtemp(buf.data()) != nullptr);
    path = buf.data();
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

const char* kLog =
    "clu,id,trt,t,st\n"
    "c1,p1,1,3,1\nc1,p2,1,5,0\nc2,p1,1,2,1\nc2,p2,1,6,1\n"
    "c3,p1,0,1,1\nc3,p2,0,4,0\nc4,p1,0,2.5,1\nc4,p2,0,7,1\n";

}  // namespace

TEST_CASE("cli: analyze happy path emits a parseable report, exit 0") {
  TempDir dir;
  write_file(dir.path / "log.csv", kLog);
  const auto report = dir.path / "report.json";
  CHECK(run("analyze -i '" + (dir.path / "log.csv").string() + "' -m wald_score -e WD",
            report.string()) == 0);
  const json j = json::parse(slurp(report));
  CHECK(j["method"] == "wald_score");
  CHECK(j["estimand"] == "WD");
  CHECK(j.contains("p_value"));
}

TEST_CASE("cli: data errors exit 2, infeasible methods exit 3") {
  TempDir dir;
  CHECK(run("analyze -i /no/such/file.csv -m wald_score -e WD") == 2);

  write_file(dir.path / "bad.csv", "clu,id,trt,t,st\nc1,p1,1,oops,1\n");
  CHECK(run("analyze -i '" + (dir.path / "bad.csv").string() + "' -m wald_score -e WD") == 2);

  // single treated cluster: cluster-level variance is infeasible
  write_file(dir.path / "lone.csv",
             "clu,id,trt,t,st\nc1,p1,1,1,1\nc2,p1,0,2,1\nc3,p1,0,3,1\n");
  CHECK(run("analyze -i '" + (dir.path / "lone.csv").string() + "' -m wald_u -e WD") == 3);

  // jel has no one-sided form
  write_file(dir.path / "log.csv", kLog);
  CHECK(run("analyze -i '" + (dir.path / "log.csv").string() +
            "' -m jel -e WD --alternative greater") == 3);
}

TEST_CASE("cli: custom null value flows through on the original scale") {
  TempDir dir;
  write_file(dir.path / "log.csv", kLog);
  const auto report = dir.path / "report.json";
  CHECK(run("analyze -i '" + (dir.path / "log.csv").string() +
            "' -m wald_score -e WR --null 1.5",
            report.string()) == 0);
  const json j = json::parse(slurp(report));
  CHECK(j["null_value"] == doctest::Approx(1.5));
}

TEST_CASE("cli: exact permutation flag") {
  TempDir dir;
  write_file(dir.path / "log.csv", kLog);
  const auto report = dir.path / "report.json";
  CHECK(run("analyze -i '" + (dir.path / "log.csv").string() + "' -m perm -e WD --exact",
            report.string()) == 0);
  const json j = json::parse(slurp(report));
  CHECK(j["permutation"]["mode"] == "full_enumeration");
  CHECK(j["permutation"]["replicates"] == 6);
}

TEST_CASE("cli: simulate writes results and resumes without recomputation") {
  TempDir dir;
  write_file(dir.path / "grid.csv",
             "name,M,q,nbar,cv,alpha1,alpha2,eta,theta1,theta2,kappa1,kappa2,lambda1,lambda2,"
             "xi,tau_c\n"
             "mini,6,0.5,6,0.3,2,2,1,0,0,1,1,0.1,0.2,0.03,80\n");
  const auto out = dir.path / "out";
  const std::string base = "simulate -g '" + (dir.path / "grid.csv").string() + "' -o '" +
                           out.string() + "' -r 8 -B 40 --seed 3 -w 1";
  const auto summary1 = dir.path / "s1.json", summary2 = dir.path / "s2.json";
  CHECK(run(base, summary1.string()) == 0);
  CHECK(fs::exists(out / "results_mini.csv"));
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(json::parse(slurp(summary1))["completed"] == 1);

  // second run: the manifest hash matches, so the scenario is skipped
  CHECK(run(base, summary2.string()) == 0);
  const json s2 = json::parse(slurp(summary2));
  CHECK(s2["skipped"] == 1);
  CHECK(s2["completed"] == 0);

  // results CSV has one row per estimand x procedure
  std::istringstream csv(slurp(out / "results_mini.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 1 + 6 * 4);
}

TEST_CASE("cli: procedure and estimand subsets filter the result rows") {
  TempDir dir;
  write_file(dir.path / "grid.csv",
             "name,M,q,nbar,cv,alpha1,alpha2,eta,theta1,theta2,kappa1,kappa2,lambda1,lambda2,"
             "xi,tau_c\n"
             "mini,6,0.5,6,0.3,2,2,1,0,0,1,1,0.1,0.2,0.03,80\n");
  const auto out = dir.path / "out";
  CHECK(run("simulate -g '" + (dir.path / "grid.csv").string() + "' -o '" + out.string() +
            "' -r 5 -B 30 --seed 3 -w 1 --procedures fs,perm --estimands WD,DOOR") == 0);
  std::istringstream csv(slurp(out / "results_mini.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 1 + 2 * 2);
}

TEST_CASE("cli: corrupt grid row exits 2 and names the row") {
  TempDir dir;
  write_file(dir.path / "grid.csv",
             "name,M,q,nbar,cv,alpha1,alpha2,eta,theta1,theta2,kappa1,kappa2,lambda1,lambda2,"
             "xi,tau_c\n"
             "bad,6,0.5,6,0.3,2,2,NOT_A_NUMBER,0,0,1,1,0.1,0.2,0.03,80\n");
  const std::string cmd = "'" + cli() + "' simulate -g '" + (dir.path / "grid.csv").string() +
                          "' -o '" + (dir.path / "out").string() + "' -r 2 2>'" +
                          (dir.path / "err.txt").string() + "' >/dev/null";
  const int rc = WEXITSTATUS(std::system(cmd.c_str()));
  CHECK(rc == 2);
  CHECK(slurp(dir.path / "err.txt").find("row 2") != std::string::npos);
}

TEST_CASE("cli: calibrate reports xi and the iteration trace") {
  TempDir dir;
  write_file(dir.path / "grid.csv",
             "name,M,q,nbar,cv,alpha1,alpha2,eta,theta1,theta2,kappa1,kappa2,lambda1,lambda2,"
             "xi,tau_c\n"
             "cal,10,0.5,10,0.3,2,2,1,0,0,1,1,0.1,0.2,0.03,80\n");
  const auto report = dir.path / "cal.json";
  CHECK(run("calibrate -g '" + (dir.path / "grid.csv").string() +
            "' --row 1 -t 0.5 -r 5 --tol 0.03 --seed 4",
            report.string()) == 0);
  const json j = json::parse(slurp(report));
  CHECK(j["xi"].get<double>() > 0.0);
  CHECK(std::abs(j["achieved_pi_tie"].get<double>() - 0.5) < 0.03);
  CHECK(j["trace"].is_array());
  CHECK(j["trace"].size() >= 2);
}
