#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

#ifndef SUBPOISSON_CLI_PATH
#error "SUBPOISSON_CLI_PATH must point at the CLI binary"
#endif

const std::string kCli = SUBPOISSON_CLI_PATH;

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("subpoisson_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::ofstream params(dir / "params.json");
    params << R"({"Mp": 270, "Bp": 0.032, "Ms": 0.01, "Bs": 7.6, "Mi": 0.026, "Bi": 5.3})";
    std::ofstream dets(dir / "detectors.json");
    dets << R"({"signal": {"N": 6528, "eta": 0.230, "d": 0.04},)"
         << R"( "idler": {"N": 6784, "eta": 0.220, "d": 0.04}})";
    std::ofstream ident(dir / "identity.json");
    ident << R"({"idler": {"identity": true}})";
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string p(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("simulate: empty run, determinism, manifest") {
  Workspace ws;
  CHECK(run("simulate --params " + ws.p("params.json") + " --detectors " +
            ws.p("detectors.json") + " --shots 0 --seed 1 -o " + ws.p("empty.csv")) == 0);
  CHECK(slurp(ws.p("empty.csv")) == "cs,ci,count\n");

  const std::string base = "simulate --params " + ws.p("params.json") + " --detectors " +
                           ws.p("detectors.json") + " --shots 30000 --seed 7 -o ";
  CHECK(run(base + ws.p("a.csv")) == 0);
  CHECK(run(base + ws.p("b.csv")) == 0);
  CHECK(slurp(ws.p("a.csv")) == slurp(ws.p("b.csv")));
  CHECK(fs::exists(ws.p("a.csv") + ".manifest.json"));
  CHECK(slurp(ws.p("a.csv") + ".manifest.json").find("quasi_laguerre_argument") !=
        std::string::npos);
}

TEST_CASE("malformed or missing configuration exits with code 2") {
  Workspace ws;
  std::ofstream bad(ws.dir / "bad.json");
  bad << "{ not json";
  bad.close();
  CHECK(run("simulate --params " + ws.p("bad.json") + " --detectors " + ws.p("detectors.json") +
            " --shots 10 -o " + ws.p("x.csv")) == 2);
  CHECK(run("simulate --params " + ws.p("nope.json") + " --detectors " + ws.p("detectors.json") +
            " --shots 10 -o " + ws.p("x.csv")) == 2);
  CHECK(run("bogus-subcommand") == 2);
}

TEST_CASE("analyze: figure files, element order sweep, empty-slice exit code") {
  Workspace ws;
  REQUIRE(run("simulate --params " + ws.p("params.json") + " --detectors " +
              ws.p("detectors.json") + " --shots 60000 --seed 3 -o " + ws.p("joint.csv")) == 0);
  CHECK(run("analyze --joint " + ws.p("joint.csv") + " --detectors " + ws.p("detectors.json") +
            " --params " + ws.p("params.json") + " --kmax 9 --cs-min 1 --cs-max 6 --seed 5 -o " +
            ws.p("out")) == 0);
  for (const char* name : {"fig2a.csv", "fig2b.csv", "fig3.csv", "fig4.csv", "fig5.csv",
                           "fig6.csv", "sweep.json", "manifest.json"}) {
    CHECK(fs::exists(ws.dir / "out" / name));
  }
  const auto fig6 = slurp(ws.dir / "out" / "fig6.csv");
  CHECK(fig6.find("\n1,9,") != std::string::npos);  // family V reported to order 9

  // A c_s range reaching past the recorded data trips the data exit code.
  CHECK(run("analyze --joint " + ws.p("joint.csv") + " --detectors " + ws.p("detectors.json") +
            " --cs-min 1 --cs-max 30 -o " + ws.p("out2")) == 3);
}

TEST_CASE("reconstruct with the identity detector returns the histogram") {
  Workspace ws;
  REQUIRE(run("simulate --params " + ws.p("params.json") + " --detectors " +
              ws.p("detectors.json") + " --shots 40000 --seed 9 -o " + ws.p("joint.csv")) == 0);
  REQUIRE(run("reconstruct --joint " + ws.p("joint.csv") + " --detectors " +
              ws.p("identity.json") + " --cs 2 -o " + ws.p("rec")) == 0);
  // reconstructed.csv equals photocount.csv up to the header names
  std::istringstream rec(slurp(ws.dir / "rec" / "reconstructed.csv"));
  std::istringstream hist(slurp(ws.dir / "rec" / "photocount.csv"));
  std::string line_r, line_h;
  std::getline(rec, line_r);
  std::getline(hist, line_h);
  int rows = 0;
  while (std::getline(hist, line_h)) {
    REQUIRE(std::getline(rec, line_r));
    const double pr = std::stod(line_r.substr(line_r.find(',') + 1));
    const double ph = std::stod(line_h.substr(line_h.find(',') + 1));
    CHECK(pr == doctest::Approx(ph).epsilon(1e-9));
    ++rows;
  }
  CHECK(rows > 3);
}

TEST_CASE("depth of a Poissonian distribution is zero") {
  Workspace ws;
  {
    std::ofstream out(ws.dir / "pois.csv");
    out << "n,p\n";
    double logp = -3.0;
    for (int n = 0; n <= 40; ++n) {
      if (n > 0) logp += std::log(3.0) - std::log(static_cast<double>(n));
      out << n << ',' << std::exp(logp) << '\n';
    }
  }
  const std::string cmd = kCli + " depth --dist " + ws.p("pois.csv") + " --kmax 4 -o " +
                          ws.p("tau.json") + " > " + ws.p("depth.txt") + " 2>&1";
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  const auto text = slurp(ws.p("depth.txt"));
  CHECK(text.find("tau(2) = 0.000000") != std::string::npos);
  CHECK(text.find("tau(4) = 0.000000") != std::string::npos);
}

TEST_CASE("quasidist at s = 0.9 on the heralded reconstruction reports a negative minimum") {
  Workspace ws;
  REQUIRE(run("simulate --params " + ws.p("params.json") + " --detectors " +
              ws.p("detectors.json") + " --shots 200000 --seed 41 -o " + ws.p("joint.csv")) == 0);
  REQUIRE(run("reconstruct --joint " + ws.p("joint.csv") + " --detectors " +
              ws.p("detectors.json") + " --cs 5 -o " + ws.p("rec5")) == 0);
  REQUIRE(run("quasidist --dist " + ws.p("rec5/reconstructed.csv") + " --s 0.9 -o " +
              ws.p("q09")) == 0);
  const auto meta = slurp(ws.dir / "q09" / "quasi.json");
  const auto pos = meta.find("\"min_value\": ");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(meta.substr(pos + 13)) < 0.0);
  CHECK(fs::exists(ws.dir / "q09" / "quasi.csv"));
}

TEST_SUITE_END();
