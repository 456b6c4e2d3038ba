#include "fima/commands.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fima/metrics.hpp"
#include "json.hpp"

namespace fima {
namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

fs::path out_dir(const ExperimentConfig& cfg) {
  fs::path d = cfg.output_dir.empty() ? fs::path(".") : fs::path(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) throw InputError(d.string() + ": cannot create output directory");
  return d;
}

void require_path(const std::string& p, const char* what) {
  if (p.empty()) throw InputError(std::string("missing ") + what + " path");
}

void write_traces(IterateTrace trace, const ExperimentConfig& cfg, const fs::path& dir) {
  if (!cfg.timing)
    for (auto& r : trace.records) r.wall_ms = 0.0;
  std::ostringstream csv, json;
  write_trace_csv(trace, csv);
  write_trace_json(trace, json);
  write_file_atomically(dir / "trace.csv", csv.str());
  write_file_atomically(dir / "trace.json", json.str());
}

void write_json(const ojson& j, const fs::path& path) {
  write_file_atomically(path, j.dump(2) + "\n");
}

double final_objective(const IterateTrace& t) { return t.empty() ? NAN : t.back().objective; }

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::uint64_t fnv1a(std::uint64_t h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Maps a signed gradient in [-1, 1] to [0, 1] for viewing.
ImageField gradient_image(const Vec& g, std::size_t c, kernels::Dims d) {
  ImageField img(d.height, d.width);
  for (std::size_t i = 0; i < d.size(); ++i) img.pixels[i] = 0.5 + 0.5 * g[c * d.size() + i];
  return img;
}

}  // namespace

void cmd_solve_nonblind(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.scheme == "mfima") throw ConfigError("scheme mfima is only available for solve-blind");
  const NonblindOptions opt = nonblind_options(cfg);
  require_path(cfg.input, "input");
  require_path(cfg.kernel, "kernel");
  const ImageField y = read_image(cfg.input);
  const KernelField kernel = read_kernel(cfg.kernel);
  std::optional<ImageField> truth;
  if (!cfg.truth.empty()) truth = read_image(cfg.truth);
  const fs::path dir = out_dir(cfg);

  const NonblindResult res = solve_nonblind(y, kernel, opt);

  ojson m;
  m["scheme"] = cfg.scheme;
  m["module"] = cfg.module;
  m["penalty"] = cfg.penalty;
  m["lambda"] = cfg.lambda;
  m["iterations"] = res.trace.size();
  m["stop"] = std::string(to_string(res.trace.stop));
  m["final_objective"] = final_objective(res.trace);
  m["lipschitz"] = res.lipschitz;
  if (truth) {
    m["psnr"] = psnr(res.image, *truth, cfg.peak);
    m["ssim"] = ssim(res.image, *truth, cfg.peak);
    m["psnr_input"] = psnr(y, *truth, cfg.peak);
  }
  write_pgm(res.image, dir / "restored.pgm");
  write_traces(res.trace, cfg, dir);
  write_json(m, dir / "metrics.json");
  log << "solve-nonblind: " << res.trace.size() << " iterations (" << to_string(res.trace.stop)
      << "), objective " << fmt17(final_objective(res.trace));
  if (truth) log << ", psnr " << fmt6(m["psnr"].get<double>());
  log << "\n";
}

void cmd_solve_blind(const ExperimentConfig& cfg, std::ostream& log) {
  const BlindOptions opt = blind_options(cfg);
  require_path(cfg.input, "input");
  const ImageField y = read_image(cfg.input);
  std::optional<KernelField> true_kernel;
  if (!cfg.true_kernel.empty()) true_kernel = read_kernel(cfg.true_kernel);
  std::optional<ImageField> truth;
  if (!cfg.truth.empty()) truth = read_image(cfg.truth);
  const fs::path dir = out_dir(cfg);

  const BlindResult res = solve_blind(y, cfg.kernel_size, opt);

  ojson m;
  m["kernel_size"] = cfg.kernel_size;
  m["scales"] = cfg.scales;
  m["records"] = res.trace.size();
  m["final_objective"] = final_objective(res.trace);
  m["kernel_on_simplex"] = on_simplex(res.kernel);
  if (true_kernel) {
    m["kernel_similarity"] = kernel_similarity(res.kernel, *true_kernel);
    m["kernel_similarity_uniform"] = kernel_similarity(
        KernelField::uniform(res.kernel.height, res.kernel.width), *true_kernel);
  }
  if (truth && true_kernel) {
    const NonblindOptions nb = nonblind_options(cfg);
    const ImageField latent = solve_nonblind(y, res.kernel, nb).image;
    m["psnr"] = psnr(latent, *truth, cfg.peak);
    m["ssim"] = ssim(latent, *truth, cfg.peak);
    m["error_rate"] = error_rate(latent, *truth, y, *true_kernel, nb);
    write_pgm(latent, dir / "latent.pgm");
  }
  write_kernel(res.kernel, dir / "kernel.txt");
  write_pgm(gradient_image(res.gradients, 0, y.dims()), dir / "gradient_x.pgm");
  write_pgm(gradient_image(res.gradients, 1, y.dims()), dir / "gradient_y.pgm");
  write_traces(res.trace, cfg, dir);
  write_json(m, dir / "metrics.json");
  log << "solve-blind: " << res.trace.size() << " block updates, objective "
      << fmt17(final_objective(res.trace));
  if (true_kernel) log << ", KS " << fmt6(m["kernel_similarity"].get<double>());
  log << "\n";
}

namespace {

struct BenchRow {
  std::string scheme, module;
  int instances = 0;
  bool ok = true;
  double psnr = 0, ssim = 0, iterations = 0, seconds = 0;
  std::uint64_t digest = 0xcbf29ce484222325ULL;
};

BenchRow run_cell(const ExperimentConfig& base, const std::string& scheme,
                  const std::string& module) {
  BenchRow row{scheme, module, base.bench_instances};
  try {
    ExperimentConfig c = base;
    c.scheme = scheme;
    c.module = module;
    const NonblindOptions opt = nonblind_options(c);
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < base.bench_instances; ++i) {
      SyntheticSpec spec = synthetic_spec(base);
      spec.seed = base.seed + static_cast<std::uint64_t>(i);
      const SyntheticInstance inst = make_synthetic(spec);
      const NonblindResult r = solve_nonblind(inst.y, inst.b_true, opt);
      row.psnr += psnr(r.image, inst.z_true, base.peak);
      row.ssim += ssim(r.image, inst.z_true, base.peak);
      row.iterations += static_cast<double>(r.trace.size());
      for (const auto& rec : r.trace.records) row.digest = fnv1a(row.digest, fmt17(rec.objective) + ";");
      row.digest = fnv1a(row.digest, "|");
    }
    row.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (row.instances > 0) {
      row.psnr /= row.instances;
      row.ssim /= row.instances;
      row.iterations /= row.instances;
    }
  } catch (const std::exception&) {
    row.ok = false;
  }
  return row;
}

}  // namespace

void cmd_bench(const ExperimentConfig& cfg, std::ostream& log) {
  validate(cfg);
  const fs::path dir = out_dir(cfg);
  std::vector<std::pair<std::string, std::string>> cells;
  for (const auto& s : cfg.bench_schemes)
    for (const auto& m : cfg.bench_modules) cells.emplace_back(s, m);

  std::vector<BenchRow> rows(cells.size());
  const std::size_t jobs = static_cast<std::size_t>(cfg.bench_jobs);
  for (std::size_t start = 0; start < cells.size(); start += jobs) {
    std::vector<std::future<BenchRow>> batch;
    for (std::size_t i = start; i < std::min(cells.size(), start + jobs); ++i)
      batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, run_cell,
                                 std::cref(cfg), cells[i].first, cells[i].second));
    for (std::size_t i = 0; i < batch.size(); ++i) rows[start + i] = batch[i].get();
  }

  std::ostringstream csv;
  csv << kBenchHeader << "\n";
  for (const BenchRow& r : rows) {
    csv << r.scheme << ',' << r.module << ',' << r.instances << ',' << (r.ok ? "ok" : "failed");
    if (r.ok) {
      char digest[17];
      std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(r.digest));
      csv << ',' << fmt6(r.psnr) << ',' << fmt6(r.ssim) << ',' << fmt6(r.iterations) << ','
          << fmt6(r.seconds) << ',' << digest;
    } else {
      csv << ",,,,,";
    }
    csv << "\n";
  }
  write_file_atomically(dir / "bench.csv", csv.str());
  log << "bench: " << rows.size() << " cells written to " << (dir / "bench.csv").string() << "\n";
}

void cmd_make_synthetic(const ExperimentConfig& cfg, std::ostream& log) {
  const SyntheticSpec spec = synthetic_spec(cfg);
  SyntheticInstance inst;
  try {
    inst = make_synthetic(spec);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  const fs::path dir = out_dir(cfg);
  write_pgm(inst.z_true, dir / "z_true.pgm");
  write_pgm(inst.y, dir / "y.pgm");
  write_kernel(inst.b_true, dir / "b_true.txt");
  log << "make-synthetic: wrote " << spec.size << "x" << spec.size << " instance (seed "
      << spec.seed << ", " << to_string(spec.kernel) << " kernel) to " << dir.string() << "\n";
}

std::pair<int, std::string> classify_exception(std::exception_ptr e, std::string& message) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError& x) {
    message = x.what();
    return {kExitInput, "E_CONFIG"};
  } catch (const InputError& x) {
    message = x.what();
    return {kExitInput, "E_INPUT"};
  } catch (const InvalidArgument& x) {
    message = x.what();
    return {kExitInput, "E_INPUT"};
  } catch (const ModuleError& x) {
    message = x.what();
    return {kExitModule, "E_MODULE"};
  } catch (const ModuleUnavailable& x) {
    message = x.what();
    return {kExitModule, "E_MODULE"};
  } catch (const SolverError& x) {
    message = x.what();
    return {kExitSolver, "E_SOLVER"};
  } catch (const std::exception& x) {
    message = x.what();
    return {kExitSolver, "E_SOLVER"};
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"FIMA deconvolution experiments"};
  app.require_subcommand(1);

  std::string config_file;
  std::vector<std::string> overrides;
  std::string input, kernel, truth, true_kernel, output_dir, seed;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_file, "key=value config file");
    sub->add_option("--set", overrides, "override a config key (key=value)");
    sub->add_option("-o,--output-dir", output_dir, "directory for artifacts");
  };
  auto* nb = app.add_subcommand("solve-nonblind", "non-blind deconvolution");
  auto* bl = app.add_subcommand("solve-blind", "blind kernel estimation");
  auto* be = app.add_subcommand("bench", "scheme x module comparison table");
  auto* ms = app.add_subcommand("make-synthetic", "write a seeded synthetic instance");
  for (auto* s : {nb, bl, be, ms}) add_common(s);
  for (auto* s : {nb, bl}) {
    s->add_option("-i,--input", input, "observed image (PGM or PNG)");
    s->add_option("--truth", truth, "ground-truth image for metrics");
  }
  nb->add_option("-k,--kernel", kernel, "blur kernel file");
  bl->add_option("--true-kernel", true_kernel, "true kernel for KS / ER");
  for (auto* s : {be, ms}) s->add_option("--seed", seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "E_CONFIG: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    // flags are command-line settings, applied after --set in flag order
    std::vector<std::string> all = overrides;
    if (!input.empty()) all.push_back("input=" + input);
    if (!kernel.empty()) all.push_back("kernel=" + kernel);
    if (!truth.empty()) all.push_back("truth=" + truth);
    if (!true_kernel.empty()) all.push_back("true_kernel=" + true_kernel);
    if (!output_dir.empty()) all.push_back("output_dir=" + output_dir);
    if (!seed.empty()) all.push_back("seed=" + seed);
    const ExperimentConfig cfg = load_config(config_file, all);
    if (nb->parsed()) cmd_solve_nonblind(cfg, out);
    else if (bl->parsed()) cmd_solve_blind(cfg, out);
    else if (be->parsed()) cmd_bench(cfg, out);
    else cmd_make_synthetic(cfg, out);
  } catch (...) {
    std::string msg;
    const auto [code, tag] = classify_exception(std::current_exception(), msg);
    err << tag << ": " << msg << "\n";
    return code;
  }
  return kExitOk;
}

}  // namespace fima
