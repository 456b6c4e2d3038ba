#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fima/commands.hpp"
#include "fima/config.hpp"
#include "fima/image.hpp"
#include "fima/trace.hpp"
#include "json.hpp"

using namespace fima;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fima");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string l;
  while (std::getline(ss, l)) out.push_back(l);
  return out;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("fima_cli_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& s) const { return (path / s).string(); }
};

/// Writes a seeded 32x32 instance into dir.
void synth(const TempDir& dir, const std::string& seed = "1",
           const std::string& kind = "gaussian") {
  const Run r = cli({"make-synthetic", "--seed", seed, "-o", dir.path.string(), "--set", "size=32",
                     "--set", "kernel_kind=" + kind, "--set", "synth_kernel_size=7"});
  REQUIRE(r.code == kExitOk);
}

}  // namespace

TEST_CASE("make-synthetic writes the instance") {
  TempDir d("synth");
  synth(d);
  CHECK(fs::exists(d / "z_true.pgm"));
  CHECK(read_image(d / "y.pgm").height == 32);
  CHECK(read_kernel(d / "b_true.txt").height == 7);
  TempDir e("synth2");
  synth(e);
  CHECK(slurp(d / "y.pgm") == slurp(e / "y.pgm"));
}

TEST_CASE("solve-nonblind writes artifacts and reruns are byte identical") {
  TempDir d("nb");
  synth(d);
  auto run = [&](const std::string& out) {
    return cli({"solve-nonblind", "-i", d / "y.pgm", "-k", d / "b_true.txt", "--truth",
                d / "z_true.pgm", "-o", d / out, "--set", "max_iters=15"});
  };
  const Run a = run("a"), b = run("b");
  REQUIRE(a.code == kExitOk);
  REQUIRE(b.code == kExitOk);
  for (const char* f : {"restored.pgm", "trace.csv", "trace.json", "metrics.json"}) {
    CHECK(fs::exists(d.path / "a" / f));
    CHECK(slurp(d.path / "a" / f) == slurp(d.path / "b" / f));
  }
  const auto m = nlohmann::json::parse(slurp(d.path / "a" / "metrics.json"));
  CHECK(m["psnr"].get<double>() > m["psnr_input"].get<double>());
  std::ifstream csv(d.path / "a" / "trace.csv");
  CHECK(parse_trace_csv(csv).size() == m["iterations"].get<std::size_t>());
}

TEST_CASE("input errors map to exit code 2") {
  TempDir d("err");
  synth(d);
  Run r = cli({"solve-nonblind", "-i", d / "y.pgm", "-k", d / "nope.txt", "-o", d / "x"});
  CHECK(r.code == kExitInput);
  CHECK(r.err.rfind("E_INPUT:", 0) == 0);
  CHECK_FALSE(fs::exists(d.path / "x" / "restored.pgm"));

  r = cli({"solve-nonblind", "-i", d / "y.pgm", "-o", d / "x"});
  CHECK(r.code == kExitInput);

  r = cli({"solve-nonblind", "-i", d / "y.pgm", "-k", d / "b_true.txt", "--set", "bogus=1"});
  CHECK(r.code == kExitInput);
  CHECK(r.err.rfind("E_CONFIG:", 0) == 0);

  r = cli({"frobnicate"});
  CHECK(r.code == kExitInput);
}

TEST_CASE("validation rejects inconsistent step and error-control settings") {
  TempDir d("val");
  synth(d);
  for (const char* bad : {"gamma_factor=1.0", "gamma_factor=0", "c_ratio=0.5", "c_ratio=0",
                          "mu_factor=-1", "tau=0", "scheme=sgd", "module=unet", "penalty=simplex",
                          "module=external", "max_iters=0"}) {
    const Run r = cli({"solve-nonblind", "-i", d / "y.pgm", "-k", d / "b_true.txt", "-o",
                       d / "v", "--set", bad});
    CHECK_MESSAGE(r.code == kExitInput, bad);
    CHECK_MESSAGE(r.err.rfind("E_CONFIG:", 0) == 0, bad);
  }
  CHECK_FALSE(fs::exists(d.path / "v" / "trace.csv"));
}

TEST_CASE("a failing external module surfaces as fallbacks, not a crash") {
  TempDir d("ext");
  synth(d);
  const Run r = cli({"solve-nonblind", "-i", d / "y.pgm", "-k", d / "b_true.txt", "-o", d / "o",
                     "--set", "module=external", "--set", "external_command=false {in} {out}",
                     "--set", "max_iters=5", "--set", "tol=0"});
  REQUIRE(r.code == kExitOk);
  std::ifstream csv(d.path / "o" / "trace.csv");
  const IterateTrace t = parse_trace_csv(csv);
  CHECK(t.size() == 5);
  for (const auto& rec : t.records) CHECK(rec.policy == Policy::Fallback);
}

TEST_CASE("config precedence: command line over file over defaults") {
  TempDir d("prec");
  synth(d);
  {
    std::ofstream cfg(d.path / "run.cfg");
    cfg << "# test config\nmax_iters = 5\ntol = 0\nscheme = pg\n";
  }
  auto iters = [&](std::vector<std::string> extra) {
    std::vector<std::string> args{"solve-nonblind", "-c", d / "run.cfg", "-i", d / "y.pgm",
                                  "-k", d / "b_true.txt", "-o", d / "p"};
    args.insert(args.end(), extra.begin(), extra.end());
    REQUIRE(cli(args).code == kExitOk);
    std::ifstream csv(d.path / "p" / "trace.csv");
    return parse_trace_csv(csv).size();
  };
  CHECK(iters({}) == 5);
  CHECK(iters({"--set", "max_iters=7"}) == 7);

  const ExperimentConfig def = load_config({}, {});
  CHECK(def.max_iters == 80);
  const ExperimentConfig f = load_config(d.path / "run.cfg", {});
  CHECK(f.max_iters == 5);
  CHECK(f.scheme == "pg");
  CHECK(f.module == def.module);
  CHECK_THROWS_AS(load_config(d.path / "missing.cfg", {}), InputError);
  CHECK_THROWS_AS(load_config({}, {"max_iters"}), ConfigError);
  CHECK_THROWS_AS(load_config({}, {"max_iters=abc"}), ConfigError);
}

TEST_CASE("bench matrix shapes") {
  TempDir d("bench");
  Run r = cli({"bench", "-o", d.path.string(), "--set", "bench_schemes=pg,efima", "--set",
               "bench_modules=identity,tv", "--set", "bench_instances=1", "--set", "size=32",
               "--set", "max_iters=10", "--set", "tol=0"});
  REQUIRE(r.code == kExitOk);
  auto rows = lines(slurp(d.path / "bench.csv"));
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == kBenchHeader);
  // eFIMA with the identity module reproduces PG exactly
  auto digest = [](const std::string& row) { return row.substr(row.rfind(',') + 1); };
  CHECK(rows[1].rfind("pg,identity,1,ok,", 0) == 0);
  CHECK(rows[3].rfind("efima,identity,1,ok,", 0) == 0);
  CHECK(digest(rows[1]) == digest(rows[3]));
  CHECK(digest(rows[1]) != digest(rows[4]));

  r = cli({"bench", "-o", d.path.string(), "--set", "bench_schemes="});
  REQUIRE(r.code == kExitOk);
  rows = lines(slurp(d.path / "bench.csv"));
  REQUIRE(rows.size() == 1);
  CHECK(rows[0] == kBenchHeader);
}

TEST_CASE("solve-blind at one and three scales") {
  TempDir d("blind");
  synth(d, "2", "motion");
  for (const char* scales : {"1", "3"}) {
    const std::string out = d / (std::string("s") + scales);
    const Run r = cli({"solve-blind", "-i", d / "y.pgm", "--true-kernel", d / "b_true.txt",
                       "--truth", d / "z_true.pgm", "-o", out, "--set",
                       std::string("scales=") + scales, "--set", "kernel_size=7", "--set",
                       "max_iters=10"});
    REQUIRE(r.code == kExitOk);
    const KernelField k = read_kernel(fs::path(out) / "kernel.txt");
    CHECK(k.height == 7);
    CHECK(on_simplex(k, 1e-9));
    for (const char* f : {"gradient_x.pgm", "gradient_y.pgm", "trace.csv", "trace.json",
                          "latent.pgm"})
      CHECK(fs::exists(fs::path(out) / f));
    const auto m = nlohmann::json::parse(slurp(fs::path(out) / "metrics.json"));
    CHECK(m.contains("kernel_similarity"));
    CHECK(m.contains("error_rate"));
  }
  const Run bad = cli({"solve-blind", "-i", d / "y.pgm", "--set", "kernel_size=8"});
  CHECK(bad.code == kExitInput);
}

TEST_CASE("the installed executable behaves like run_cli") {
  TempDir d("exe");
  const std::string base = std::string(FIMA_CLI_PATH) + " ";
  CHECK(std::system((base + "make-synthetic --set size=32 -o " + d.path.string()).c_str()) == 0);
  const int st = std::system((base + "solve-nonblind -i " + (d / "y.pgm") + " -k " +
                              (d / "missing.txt") + " -o " + d.path.string() + " 2>" +
                              (d / "err.txt"))
                                 .c_str());
  REQUIRE(WIFEXITED(st));
  CHECK(WEXITSTATUS(st) == kExitInput);
  CHECK(slurp(d.path / "err.txt").rfind("E_INPUT:", 0) == 0);
  CHECK(std::system((base + "--help >/dev/null").c_str()) == 0);
}
