#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hermlet/expansion.hpp"
#include "hermlet/report.hpp"
#include "hermlet/weights.hpp"

using namespace hermlet;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("hermlet_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string("\"") + HERMLET_CLI_PATH + "\" " + args + " 2>/dev/null";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream is(p);
  REQUIRE(is.good());
  nlohmann::json j;
  is >> j;
  return j;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("expansion JSON is strict") {
  nlohmann::json good = {
      {"n", 1},
      {"N", 3},
      {"coeffs", {{{"xi", {2}}, {"re", 1.5}, {"im", 0.0}}}}};
  HermiteExpansion f = HermiteExpansion::from_json(good);
  std::vector<int> xi{2};
  CHECK(f.at(xi).real() == 1.5);
  // unknown top-level field
  nlohmann::json unk = good;
  unk["extra"] = 1;
  CHECK_THROWS_AS(HermiteExpansion::from_json(unk), validation_error);
  // unknown entry field
  nlohmann::json unk2 = good;
  unk2["coeffs"][0]["tag"] = "x";
  CHECK_THROWS_AS(HermiteExpansion::from_json(unk2), validation_error);
  // duplicate index
  nlohmann::json dup = good;
  dup["coeffs"].push_back({{"xi", {2}}, {"re", 0.25}, {"im", 0.0}});
  CHECK_THROWS_AS(HermiteExpansion::from_json(dup), validation_error);
  // degree beyond the declared bound
  nlohmann::json over = good;
  over["coeffs"][0]["xi"] = {4};
  CHECK_THROWS_AS(HermiteExpansion::from_json(over), validation_error);
  // missing imaginary part
  nlohmann::json noim = good;
  noim["coeffs"][0].erase("im");
  CHECK_THROWS_AS(HermiteExpansion::from_json(noim), validation_error);
  // round trip through the writer
  nlohmann::json back = nlohmann::json::parse(f.to_json().dump());
  HermiteExpansion g = HermiteExpansion::from_json(back);
  CHECK(g.at(xi) == f.at(xi));
}

TEST_CASE("cli: grid export") {
  fs::path out = work_dir() / "g.json";
  int rc = run_cli("--out " + out.string() + " grid --n 1 --J 2 --delta-star 0.025");
  REQUIRE(rc == 0);
  nlohmann::json g = read_json(out);
  CHECK(g["n"] == 1);
  CHECK(g["levels"]["0"]["N_j"] == 5);
  CHECK(g["levels"]["1"]["N_j"] == 11);
  CHECK(g["config"]["default_delta_star"] == 0.025);
}

TEST_CASE("cli: analyze and synthesize round trip") {
  HermiteExpansion f = random_expansion(1, 4, 123);
  fs::path fpath = work_dir() / "f.json";
  atomic_write(fpath, f.to_json().dump(2));
  fs::path spath = work_dir() / "s.json";
  fs::path rpath = work_dir() / "r.json";
  REQUIRE(run_cli("--out " + spath.string() + " analyze --in " + fpath.string() +
                  " --system partition --J 1") == 0);
  REQUIRE(run_cli("--out " + rpath.string() + " synthesize --in " + spath.string() +
                  " --system partition") == 0);
  HermiteExpansion back = HermiteExpansion::from_json(read_json(rpath));
  double err = 0.0, nrm = 0.0;
  for (int k = 0; k <= 4; ++k) {
    std::vector<int> xi{k};
    err += std::norm(back.at(xi) - f.at(xi));
    nrm += std::norm(f.at(xi));
  }
  CHECK(std::sqrt(err / nrm) < 1e-8);
}

TEST_CASE("cli: norms on both input kinds") {
  HermiteExpansion h0(1, 0);
  std::vector<int> xi{0};
  h0.at(xi) = 1.0;
  fs::path fpath = work_dir() / "h0.json";
  atomic_write(fpath, h0.to_json().dump(2));
  fs::path out1 = work_dir() / "n1.json";
  REQUIRE(run_cli("--out " + out1.string() + " norm --kind besov --space a=0,p=2,q=2 --in " +
                  fpath.string()) == 0);
  nlohmann::json n1 = read_json(out1);
  CHECK(n1["input"] == "function");
  CHECK(std::fabs(n1["value"].get<double>() - 1.0) < 1e-9);
  // analyze first, then a sequence norm
  fs::path spath = work_dir() / "s0.json";
  REQUIRE(run_cli("--out " + spath.string() + " analyze --in " + fpath.string() + " --J 0") == 0);
  fs::path out2 = work_dir() / "n2.json";
  REQUIRE(run_cli("--out " + out2.string() + " norm --kind triebel --space a=0.5,p=2,q=2 --in " +
                  spath.string()) == 0);
  nlohmann::json n2 = read_json(out2);
  CHECK(n2["input"] == "sequence");
  CHECK(n2["value"].get<double>() > 0.0);
}

TEST_CASE("cli: weight certificate") {
  fs::path wpath = work_dir() / "w1.json";
  atomic_write(wpath, Weight::constant(1.0).to_json().dump(2));
  fs::path out = work_dir() / "cert.json";
  REQUIRE(run_cli("--out " + out.string() + " weight certify --weight " + wpath.string() +
                  " --p 2 --eta 0 --scan-depth 4") == 0);
  nlohmann::json cert = read_json(out);
  CHECK(std::fabs(cert["max_ratio"].get<double>() - 1.0) < 1e-9);
  fs::path out4 = work_dir() / "cert4.json";
  REQUIRE(run_cli("--out " + out4.string() + " weight certify --weight " + wpath.string() +
                  " --p 2 --eta 4 --scan-depth 4") == 0);
  nlohmann::json cert4 = read_json(out4);
  double r4 = cert4["max_ratio"].get<double>();
  CHECK(r4 <= 1.0);
  CHECK(r4 > 0.5);  // attained near the smallest scanned cube at the origin
}

TEST_CASE("cli: embedding report and determinism") {
  fs::path out1 = work_dir() / "e1.json";
  fs::path out2 = work_dir() / "e2.json";
  std::string args =
      " embed check --source a=1,p=1,q=1 --target a=0.5,p=2,q=2 --gamma 1 --J 2 "
      "--trials 40";
  REQUIRE(run_cli("--seed 7 --out " + out1.string() + args) == 0);
  REQUIRE(run_cli("--seed 7 --out " + out2.string() + args) == 0);
  CHECK(read_bytes(out1) == read_bytes(out2));  // byte-identical reports
  nlohmann::json rep = read_json(out1);
  CHECK(rep["lower_bound_tiles"]["verdict"] == "PASS");
  CHECK(rep["lower_bound_balls"]["verdict"] == "PASS");
  CHECK(rep["necessity"]["verdict"] == "PASS");
  CHECK(rep["sufficiency"]["empirical_constant"].get<double>() > 0.0);
  // csv export alongside
  fs::path csv = work_dir() / "hist.csv";
  REQUIRE(run_cli("--seed 7 --out " + (work_dir() / "e3.json").string() + args +
                  " --csv " + csv.string()) == 0);
  std::string head = read_bytes(csv).substr(0, 10);
  CHECK(head.rfind("bin_log10", 0) == 0);
}

TEST_CASE("cli: diagnostics") {
  fs::path out = work_dir() / "orth.json";
  REQUIRE(run_cli("--out " + out.string() + " diagnose orthogonality --j 2 --k 5") == 0);
  nlohmann::json rep = read_json(out);
  CHECK(rep["max_abs"].get<double>() == 0.0);
  CHECK(rep["pass"] == true);
  fs::path gout = work_dir() / "geo.json";
  REQUIRE(run_cli("--out " + gout.string() + " diagnose geometry --J 2") == 0);
  CHECK(read_json(gout)["pass"] == true);
}

TEST_CASE("cli: exit codes") {
  CHECK(run_cli("--bogus-flag grid") == 2);
  CHECK(run_cli("grid --delta-star 0.5 --out " + (work_dir() / "x.json").string()) == 2);
  CHECK(run_cli("norm --in " + (work_dir() / "missing.json").string()) == 2);
}

TEST_CASE("cli: remaining diagnostics run clean") {
  struct Case {
    const char* name;
    std::string args;
  };
  std::vector<Case> cases{
      {"kernel-decay", "diagnose kernel-decay --j 3 --N 6"},
      {"fefferman-stein", "diagnose fefferman-stein --p 2 --q 2 --s 1"},
      {"peetre", "diagnose peetre --j 2 --sigma 3"},
      {"plancherel-polya", "diagnose plancherel-polya --j 2 --p 2"}};
  for (const auto& c : cases) {
    fs::path out = work_dir() / (std::string("diag_") + c.name + ".json");
    CAPTURE(c.name);
    REQUIRE(run_cli("--out " + out.string() + " " + c.args) == 0);
    nlohmann::json rep = read_json(out);
    CHECK(rep["pass"] == true);
  }
}

TEST_CASE("cli: grid reports are byte-identical across runs") {
  fs::path a = work_dir() / "ga.json";
  fs::path b = work_dir() / "gb.json";
  REQUIRE(run_cli("grid --n 1 --J 1 --out " + a.string()) == 0);
  REQUIRE(run_cli("grid --n 1 --J 1 --out " + b.string()) == 0);
  CHECK(read_bytes(a) == read_bytes(b));
}

TEST_CASE("cli: triebel-scale embedding report") {
  fs::path out = work_dir() / "ef.json";
  REQUIRE(run_cli("--seed 3 embed check --source a=1,p=1,q=3 --target a=0.5,p=2,q=2 "
                  "--gamma 1 --J 2 --trials 10 --scale f --out " +
                  out.string()) == 0);
  nlohmann::json rep = read_json(out);
  CHECK(rep["scale"] == "f");
  CHECK(rep["sufficiency"]["empirical_constant"].get<double>() > 0.0);
}
