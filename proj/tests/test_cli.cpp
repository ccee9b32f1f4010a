#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kWork = SPECREG_TEST_WORKDIR;
const fs::path kGolden = SPECREG_GOLDEN_DIR;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

// Runs the CLI with the scalar kernels pinned so byte-level comparisons do
// not depend on the host's vector unit.
Run cli(const std::string& args) {
  fs::create_directories(kWork);
  const fs::path out = kWork / "stdout.txt", err = kWork / "stderr.txt";
  const std::string cmd = "SPECREG_KERNELS=scalar '" + std::string(SPECREG_CLI_PATH) + "' " + args + " >'" + out.string() +
                          "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    rows.push_back(fields);
  }
  return rows;
}

std::string config_file(const std::string& name, const json& j) {
  const fs::path p = kWork / name;
  write(p, j.dump(2));
  return "'" + p.string() + "'";
}

const json kSmall = json::parse(R"({
  "name": "small",
  "spectrum": {"kind": "polynomial", "n": 8, "beta": 1},
  "family": {"kind": "tikhonov", "order": 1},
  "grid": {"kind": "geometric", "count": 6},
  "gamma": 0.5, "sigma": 0.1, "signal": {"kind": "power", "s": 1},
  "n_reps": 40, "seed": 5})");

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(cli("").code == 1);
  CHECK(cli("frobnicate").code == 1);
  CHECK(cli("penalty --bogus").code == 1);
  CHECK(cli("select --config builtin:default").code == 1);
  CHECK(cli("penalty --config builtin:no-such-config").code == 1);
  CHECK(cli("--help").code == 0);
}

TEST_CASE("validation and I/O failures map to distinct codes") {
  json bad = kSmall;
  bad["gamma"] = 0.0;
  const Run r = cli("penalty --config " + config_file("gamma0.json", bad));
  CHECK(r.code == 1);
  CHECK(r.err.find("gamma") != std::string::npos);

  CHECK(cli("penalty --config '" + (kWork / "absent.json").string() + "'").code == 2);
  CHECK(cli("select --config builtin:default --data '" + (kWork / "absent.csv").string() + "'").code == 2);
  write(kWork / "blocker", "a file, not a directory");
  CHECK(cli("penalty --config builtin:identity-cutoff --out '" + (kWork / "blocker" / "sub").string() + "'").code == 2);
}

TEST_CASE("penalty table on a three-point identity spectrum") {
  const json j = json::parse(R"({"spectrum": {"kind": "identity", "n": 3}, "family": {"kind": "cutoff"},
                                 "grid": {"kind": "natural"}, "gamma": 0.5})");
  const Run r = cli("penalty --config " + config_file("id3.json", j));
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("# config=", 0) == 0);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"g", "alpha", "D", "mu", "qcirc", "pen"});
  const double want_d[] = {std::sqrt(2.0), 2.0, std::sqrt(6.0)};
  for (int g = 0; g < 3; ++g) {
    CHECK(rows[g + 1][0] == std::to_string(g + 1));
    CHECK(std::stod(rows[g + 1][2]) == doctest::Approx(want_d[g]).epsilon(1e-15));
  }
  CHECK(std::stod(rows[1][3]) == 0.0);
  CHECK(std::stod(rows[1][5]) == doctest::Approx(2.0));
  // pen = 2 * (number of kept coordinates) + 1.5 qcirc
  for (int g = 1; g < 3; ++g)
    CHECK(std::stod(rows[g + 1][5]) == doctest::Approx(2.0 * (g + 1) + 1.5 * std::stod(rows[g + 1][4])));

  const fs::path dir = kWork / "penalty_out";
  fs::remove_all(dir);
  REQUIRE(cli("penalty --config " + config_file("id3.json", j) + " --out '" + dir.string() + "'").code == 0);
  CHECK(slurp(dir / "penalty.csv") == r.out);
}

TEST_CASE("select reproduces the risk curve from the penalty table") {
  const std::string config = config_file("small.json", kSmall);
  const std::vector<double> y{1.1, 0.45, 0.4, 0.2, 0.3, -0.1, 0.25, 0.05};
  std::string csv = "k,y\n";
  for (std::size_t k = 0; k < y.size(); ++k) csv += std::to_string(k + 1) + "," + std::to_string(y[k]) + "\n";
  write(kWork / "y.csv", csv);

  const Run pen = cli("penalty --config " + config);
  REQUIRE(pen.code == 0);
  const Run sel = cli("select --config " + config + " --data '" + (kWork / "y.csv").string() + "'");
  REQUIRE(sel.code == 0);
  const json out = json::parse(sel.out);
  const auto rows = csv_rows(pen.out);
  REQUIRE(out["risk_curve"].size() == rows.size() - 1);

  std::size_t best = 0;
  std::vector<double> risks;
  for (std::size_t g = 1; g < rows.size(); ++g) {
    const double alpha = std::stod(rows[g][1]);
    double risk = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double lambda = 1.0 / (k + 1.0);
      const double h = lambda / (lambda + alpha);
      risk += (1 - h) * (1 - h) * y[k] * y[k];
    }
    risk += 0.01 * std::stod(rows[g][5]);
    risks.push_back(risk);
    CHECK(out["risk_curve"][g - 1].get<double>() == doctest::Approx(risk).epsilon(1e-12));
    if (risk < risks[best]) best = g - 1;
  }
  CHECK(out["g_hat"] == best + 1);
  CHECK(out["grid_size"] == 6);
  CHECK(out["sigma"] == 0.1);
  CHECK(out["alpha_hat"].get<double>() == std::stod(rows[best + 1][1]));

  const Run sigma = cli("select --config " + config + " --sigma 0 --data '" + (kWork / "y.csv").string() + "'");
  CHECK(json::parse(sigma.out)["g_hat"] == 6);
}

TEST_CASE("select output matches the stored golden file") {
  const std::string config = config_file("small.json", kSmall);
  write(kWork / "golden_y.csv", "k,y\n1,1.2\n2,0.4\n3,0.35\n4,0.3\n5,-0.2\n6,0.1\n7,0.15\n8,-0.05\n");
  const Run sel = cli("select --config " + config + " --data '" + (kWork / "golden_y.csv").string() + "'");
  REQUIRE(sel.code == 0);
  const std::string golden = slurp(kGolden / "select_small.json");
  REQUIRE(!golden.empty());
  CHECK(sel.out == golden);
}

TEST_CASE("zero observations select the maximal-smoothing row") {
  write(kWork / "zeros.csv", "k,y\n1,0\n2,0\n3,0\n4,0\n5,0\n6,0\n7,0\n8,0\n");
  const Run sel = cli("select --config " + config_file("small.json", kSmall) + " --data '" +
                      (kWork / "zeros.csv").string() + "'");
  REQUIRE(sel.code == 0);
  CHECK(json::parse(sel.out)["g_hat"] == 1);
}

TEST_CASE("malformed observation rows are named in the error") {
  write(kWork / "bad.csv", "k,y\n1,0.5\n2,abc\n");
  Run r = cli("select --config builtin:default --data '" + (kWork / "bad.csv").string() + "'");
  CHECK(r.code == 1);
  CHECK(r.err.find("bad.csv:3") != std::string::npos);
  CHECK(r.err.find("abc") != std::string::npos);

  write(kWork / "skip.csv", "k,y\n1,0.5\n3,0.1\n");
  r = cli("select --config builtin:default --data '" + (kWork / "skip.csv").string() + "'");
  CHECK(r.code == 1);
  CHECK(r.err.find("skip.csv:3") != std::string::npos);

  write(kWork / "short.csv", "k,y\n1,0.5\n");
  r = cli("select --config builtin:default --data '" + (kWork / "short.csv").string() + "'");
  CHECK(r.code == 1);
  CHECK(r.err.find("coefficients") != std::string::npos);
}

TEST_CASE("simulate writes both outputs deterministically") {
  const std::string config = config_file("small.json", kSmall);
  const fs::path a = kWork / "sim_a", b = kWork / "sim_b", c = kWork / "sim_c";
  for (const auto& d : {a, b, c}) fs::remove_all(d);
  const Run ra = cli("simulate --config " + config + " --out '" + a.string() + "'");
  REQUIRE(ra.code == 0);
  CHECK(ra.out.find("small: reps=40") == 0);
  REQUIRE(cli("simulate --config " + config + " --out '" + b.string() + "'").code == 0);
  REQUIRE(cli("simulate --config " + config + " --threads 3 --out '" + c.string() + "'").code == 0);
  const std::string report = slurp(a / "report.json");
  CHECK(!report.empty());
  CHECK(report == slurp(b / "report.json"));
  CHECK(report == slurp(c / "report.json"));
  CHECK(slurp(a / "risk_curve.csv") == slurp(c / "risk_curve.csv"));
  CHECK(report == slurp(kGolden / "simulate_small_report.json"));

  const json j = json::parse(report);
  CHECK(j["n_reps"] == 40);
  CHECK(j["seed"] == 5);
  std::size_t total = 0;
  for (const auto& v : j["selection_counts"]) total += v.get<std::size_t>();
  CHECK(total == 40);

  // overrides reach the report
  const fs::path d = kWork / "sim_d";
  REQUIRE(cli("simulate --config " + config + " --seed 6 --reps 7 --out '" + d.string() + "'").code == 0);
  const json o = json::parse(slurp(d / "report.json"));
  CHECK(o["n_reps"] == 7);
  CHECK(o["seed"] == 6);
  CHECK(o["config"]["seed"] == 6);
}

TEST_CASE("verify passes on the default config and fails on an injected crossing") {
  Run r = cli("verify --config builtin:default");
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);

  const json crossing = json::parse(R"({"name": "crossing",
    "spectrum": {"kind": "values", "values": [1.0, 0.5]},
    "family": {"kind": "cutoff"},
    "grid": {"kind": "explicit", "alphas": [2.0, 1.0]},
    "weights": [[0.9, 0.1], [0.5, 0.5]]})");
  const fs::path out = kWork / "verify_out";
  r = cli("verify --config " + config_file("crossing.json", crossing) + " --out '" + out.string() + "'");
  CHECK(r.code == 3);
  CHECK(r.out.find("FAIL [crossing] ordered smoother -- rows cross: h[1][2] < h[2][2] but h[1][1] > h[2][1]") !=
        std::string::npos);
  const json report = json::parse(slurp(out / "verify.json"));
  CHECK(report["passed"] == false);
}

TEST_CASE("first-order Tikhonov inflates the oracle more than second order") {
  const fs::path q1 = kWork / "tik_q1", q2 = kWork / "tik_q2";
  REQUIRE(cli("simulate --config builtin:tikhonov-failure --reps 4 --out '" + q1.string() + "'").code == 0);
  REQUIRE(cli("simulate --config builtin:tikhonov-q2 --reps 4 --out '" + q2.string() + "'").code == 0);
  const double i1 = json::parse(slurp(q1 / "report.json"))["oracle_inflation"];
  const double i2 = json::parse(slurp(q2 / "report.json"))["oracle_inflation"];
  MESSAGE("inflation q=1 " << i1 << ", q=2 " << i2);
  CHECK(i1 > i2);
}

TEST_CASE("decompose writes the spectrum and basis") {
  write(kWork / "a.csv", "2,0\n0,1\n0,0\n");
  const fs::path out = kWork / "dec_out";
  fs::remove_all(out);
  Run r = cli("decompose --data '" + (kWork / "a.csv").string() + "' --out '" + out.string() + "'");
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(slurp(out / "spectrum.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"k", "lambda"});
  CHECK(std::stod(rows[1][1]) == doctest::Approx(4.0));
  CHECK(std::stod(rows[2][1]) == doctest::Approx(1.0));
  CHECK(csv_rows(slurp(out / "basis.csv")).size() == 2);

  write(kWork / "ragged.csv", "1,2\n3\n");
  r = cli("decompose --data '" + (kWork / "ragged.csv").string() + "'");
  CHECK(r.code == 1);
  CHECK(r.err.find("ragged.csv:2") != std::string::npos);
  CHECK(cli("decompose --data '" + (kWork / "nothing.csv").string() + "'").code == 2);
}
