// Command-line surface: simulate twin-beam photocount histograms, run the
// post-selection analysis sweep, reconstruct conditional photon-number
// distributions, and evaluate nonclassicality depths and intensity
// quasi-distributions. Every command writes a JSON manifest next to its
// outputs and is deterministic for a fixed --seed.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "subpoisson/criteria.hpp"
#include "subpoisson/detector.hpp"
#include "subpoisson/distributions.hpp"
#include "subpoisson/io.hpp"
#include "subpoisson/parallel.hpp"
#include "subpoisson/pipeline.hpp"
#include "subpoisson/reconstruction.hpp"

namespace fs = std::filesystem;
using namespace subpoisson;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

std::vector<std::string> collect_argv(int argc, char** argv) {
  std::vector<std::string> out;
  for (int i = 0; i < argc; ++i) out.emplace_back(argv[i]);
  return out;
}

struct SimulateOptions {
  std::string params_file;
  std::string detectors_file;
  long long shots = 0;
  std::uint64_t seed = 1;
  std::string output;
};

int cmd_simulate(const SimulateOptions& opt, const std::vector<std::string>& argv) {
  const TwinBeamParams params = io::read_twb_params(opt.params_file);
  const auto detectors = io::read_detectors(opt.detectors_file);
  if (detectors.signal.is_identity() || detectors.idler.is_identity()) {
    throw ParameterDomainError("simulate requires physical detector parameters");
  }
  const JointHistogram joint =
      simulate_joint(params, *detectors.signal.params, *detectors.idler.params, opt.shots, opt.seed);
  io::write_joint_csv(joint, opt.output);

  io::Manifest manifest("simulate", argv);
  manifest.set_seed(opt.seed);
  manifest.add_input("params", opt.params_file);
  manifest.add_input("detectors", opt.detectors_file);
  manifest.add_output(opt.output);
  manifest.add_note("shots", std::to_string(opt.shots));
  manifest.write(opt.output + ".manifest.json");

  const auto fs_marg = joint.signal_marginal();
  const auto fi_marg = joint.idler_marginal();
  if (joint.shots() > 0) {
    std::printf("shots %lld  <c_s> = %.6f  <c_i> = %.6f\n", joint.shots(), fs_marg.mean(),
                fi_marg.mean());
  } else {
    std::printf("shots 0  (empty histogram)\n");
  }
  return kExitOk;
}

struct AnalyzeOptions {
  std::string joint_file;
  std::string detectors_file;
  std::string params_file;
  int k_max = 9;
  int k_max_moments = 5;
  int bootstrap = 0;
  int cs_min = 1;
  int cs_max = 10;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string outdir;
};

int cmd_analyze(const AnalyzeOptions& opt, const std::vector<std::string>& argv) {
  const JointHistogram joint = io::read_joint_csv(opt.joint_file);
  const auto detectors = io::read_detectors(opt.detectors_file);
  if (detectors.idler.is_identity()) {
    throw ParameterDomainError("analyze requires physical idler detector parameters");
  }

  SweepConfig config;
  config.cs_min = opt.cs_min;
  config.cs_max = opt.cs_max;
  config.report.k_max = opt.k_max_moments;
  config.report.k_max_elements = opt.k_max;
  config.bootstrap_replicas = opt.bootstrap;
  config.seed = opt.seed;
  config.threads = opt.threads;

  std::optional<TwinBeamParams> model;
  std::optional<DetectorParams> det_s;
  if (!opt.params_file.empty()) {
    model = io::read_twb_params(opt.params_file);
    if (detectors.signal.is_identity()) {
      throw ParameterDomainError("model track requires physical signal detector parameters");
    }
    det_s = *detectors.signal.params;
  }

  const SweepResult sweep =
      sweep_postselect(joint, *detectors.idler.params, config, model, det_s);

  fs::create_directories(opt.outdir);
  io::Manifest manifest("analyze", argv);
  manifest.set_seed(opt.seed);
  manifest.add_input("joint", opt.joint_file);
  manifest.add_input("detectors", opt.detectors_file);
  if (!opt.params_file.empty()) manifest.add_input("params", opt.params_file);

  for (const auto& id : known_figures()) {
    const fs::path file = fs::path(opt.outdir) / (id + ".csv");
    std::ofstream out(file);
    emit_figure_data(sweep, id, out);
    manifest.add_output(file);
  }

  // Per-slice machine-readable summary.
  {
    const fs::path file = fs::path(opt.outdir) / "sweep.json";
    std::ofstream out(file);
    out << "{\n  \"slices\": [\n";
    for (std::size_t i = 0; i < sweep.slices.size(); ++i) {
      const auto& s = sweep.slices[i];
      out << "    {\"cs\": " << s.cs << ", \"conditioned\": " << (s.conditioned ? "true" : "false")
          << ", \"shots\": " << s.shots << ", \"fs\": " << s.fs
          << ", \"low_statistics\": " << (s.low_statistics ? "true" : "false");
      if (s.conditioned) {
        out << ",\n     \"photocount\": " << io::criteria_report_json(s.photocount)
            << ",\n     \"reconstructed\": " << io::criteria_report_json(s.reconstructed);
        if (s.model.has_value()) {
          out << ",\n     \"model\": " << io::criteria_report_json(*s.model);
        }
      }
      out << "}" << (i + 1 < sweep.slices.size() ? "," : "") << "\n";
    }
    out << "  ]\n}\n";
    manifest.add_output(file);
  }
  manifest.write(fs::path(opt.outdir) / "manifest.json");

  std::vector<int> failed;
  for (const auto& s : sweep.slices) {
    if (!s.conditioned) failed.push_back(s.cs);
  }
  if (!failed.empty()) {
    std::ostringstream msg;
    msg << "conditioning failed at c_s =";
    for (int cs : failed) msg << ' ' << cs;
    std::fprintf(stderr, "%s\n", msg.str().c_str());
    return kExitData;
  }
  std::printf("analyzed %zu slices -> %s\n", sweep.slices.size(), opt.outdir.c_str());
  return kExitOk;
}

struct ReconstructOptions {
  std::string joint_file;
  std::string detectors_file;
  int cs = 5;
  int em_iters = 10000;
  double em_tol = 1e-10;
  std::string outdir;
};

int cmd_reconstruct(const ReconstructOptions& opt, const std::vector<std::string>& argv) {
  const JointHistogram joint = io::read_joint_csv(opt.joint_file);
  const auto det = io::read_single_detector(opt.detectors_file, "idler");
  auto [hist, shots] = condition_histogram(joint, opt.cs);

  DetectionMatrix mat;
  if (det.is_identity()) {
    mat = DetectionMatrix::identity(hist.size());
  } else {
    const int n_max = reconstruction_support(hist, det.params->eta);
    const int c_max = std::max(suggest_c_max(*det.params, n_max, 1e-13), hist.n_max());
    mat = detection_matrix(*det.params, c_max, n_max);
  }

  EMConfig config;
  config.max_iters = opt.em_iters;
  config.tol = opt.em_tol;
  auto [rec, diag] = em_reconstruct(hist, mat, config);

  fs::create_directories(opt.outdir);
  const fs::path rec_file = fs::path(opt.outdir) / "reconstructed.csv";
  const fs::path hist_file = fs::path(opt.outdir) / "photocount.csv";
  const fs::path pois_file = fs::path(opt.outdir) / "poisson_reference.csv";
  io::write_distribution_csv(rec, rec_file, "n", "p");
  io::write_distribution_csv(hist, hist_file, "c", "f");
  io::write_distribution_csv(CountDistribution::poisson(rec.mean(), 1e-12, 4096), pois_file, "n",
                             "p");

  const fs::path diag_file = fs::path(opt.outdir) / "diagnostics.json";
  {
    std::ofstream out(diag_file);
    out << "{\n  \"cs\": " << opt.cs << ",\n  \"shots\": " << shots
        << ",\n  \"iterations\": " << diag.iterations << ",\n  \"converged\": "
        << (diag.converged ? "true" : "false") << ",\n  \"monotone\": "
        << (diag.monotone ? "true" : "false") << ",\n  \"log_likelihood\": "
        << diag.log_likelihood << ",\n  \"mean\": " << rec.mean() << "\n}\n";
  }

  io::Manifest manifest("reconstruct", argv);
  manifest.add_input("joint", opt.joint_file);
  manifest.add_input("detectors", opt.detectors_file);
  manifest.add_output(rec_file);
  manifest.add_output(hist_file);
  manifest.add_output(pois_file);
  manifest.add_output(diag_file);
  manifest.write(fs::path(opt.outdir) / "manifest.json");

  std::printf("cs=%d shots=%lld iterations=%d mean=%.6f converged=%s\n", opt.cs, shots,
              diag.iterations, rec.mean(), diag.converged ? "yes" : "no");
  return kExitOk;
}

struct DepthOptions {
  std::string dist_file;
  int k_max = 5;
  std::string output;
};

int cmd_depth(const DepthOptions& opt, const std::vector<std::string>& argv) {
  const CountDistribution dist = io::read_distribution_csv(opt.dist_file).normalized();
  std::ostringstream json;
  json << "{\n  \"tau\": {";
  bool first = true;
  for (int k = 2; k <= opt.k_max; ++k) {
    auto depth = nonclassicality_depth(dist, k);
    std::printf("tau(%d) = %.6f%s\n", k, depth.tau,
                depth.multiple_roots ? "  [multiple roots: smallest-noise root]" : "");
    json << (first ? "" : ", ") << "\"" << k << "\": " << depth.tau;
    first = false;
  }
  json << "}\n}\n";
  if (!opt.output.empty()) {
    std::ofstream out(opt.output);
    out << json.str();
    io::Manifest manifest("depth", argv);
    manifest.add_input("dist", opt.dist_file);
    manifest.add_output(opt.output);
    manifest.write(opt.output + ".manifest.json");
  }
  return kExitOk;
}

struct QuasiOptions {
  std::string dist_file;
  double s = 0.0;
  int order = 10;
  int grid_points = 2000;
  double grid_span = 5.0;
  std::string outdir;
};

int cmd_quasidist(const QuasiOptions& opt, const std::vector<std::string>& argv) {
  const CountDistribution dist = io::read_distribution_csv(opt.dist_file).normalized();
  QuasiConfig config;
  config.order = opt.order;
  config.grid_points = opt.grid_points;
  config.grid_span = opt.grid_span;
  const QuasiDistribution q = quasi_distribution(dist, opt.s, config);

  fs::create_directories(opt.outdir);
  const fs::path grid_file = fs::path(opt.outdir) / "quasi.csv";
  {
    std::ofstream out(grid_file);
    out << "W,reference,delta,total\n";
    out.precision(14);
    for (std::size_t i = 0; i < q.grid.size(); ++i) {
      out << q.grid[i] << ',' << q.reference[i] << ',' << q.delta[i] << ',' << q.total[i] << '\n';
    }
  }
  const fs::path meta_file = fs::path(opt.outdir) / "quasi.json";
  {
    std::ofstream out(meta_file);
    out << "{\n  \"s\": " << q.s << ",\n  \"order\": " << q.order
        << ",\n  \"min_value\": " << q.min_value << ",\n  \"min_at\": " << q.min_at
        << ",\n  \"negative\": " << (q.negative ? "true" : "false")
        << ",\n  \"series_step\": " << q.series_step << "\n}\n";
  }
  io::Manifest manifest("quasidist", argv);
  manifest.add_input("dist", opt.dist_file);
  manifest.add_output(grid_file);
  manifest.add_output(meta_file);
  manifest.write(fs::path(opt.outdir) / "manifest.json");

  std::printf("s=%.3f order=%d min=%.6e at W=%.4f negative=%s\n", q.s, q.order, q.min_value,
              q.min_at, q.negative ? "yes" : "no");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Twin-beam photocount statistics: simulation, post-selection, "
               "detector inversion and sub-Poissonian nonclassicality criteria"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: all cores)");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Sample a joint photocount histogram");
  simulate->add_option("--params", sim.params_file, "Twin-beam parameters JSON")->required();
  simulate->add_option("--detectors", sim.detectors_file, "Detector pair JSON")->required();
  simulate->add_option("--shots", sim.shots, "Number of repetitions")->required();
  simulate->add_option("--seed", sim.seed, "RNG seed");
  simulate->add_option("-o,--output", sim.output, "Output joint CSV")->required();

  AnalyzeOptions ana;
  auto* analyze = app.add_subcommand("analyze", "Post-selection sweep with criteria and errors");
  analyze->add_option("--joint", ana.joint_file, "Joint histogram CSV")->required();
  analyze->add_option("--detectors", ana.detectors_file, "Detector pair JSON")->required();
  analyze->add_option("--params", ana.params_file, "Twin-beam parameters JSON (model track)");
  analyze->add_option("--kmax", ana.k_max, "Highest order for the element criteria");
  analyze->add_option("--kmax-moments", ana.k_max_moments, "Highest order for moment criteria");
  analyze->add_option("--bootstrap", ana.bootstrap, "Bootstrap replicas (0 = no error bars)");
  analyze->add_option("--cs-min", ana.cs_min, "First post-selection photocount");
  analyze->add_option("--cs-max", ana.cs_max, "Last post-selection photocount");
  analyze->add_option("--seed", ana.seed, "RNG seed");
  analyze->add_option("-o,--outdir", ana.outdir, "Output directory")->required();

  ReconstructOptions rec;
  auto* reconstruct =
      app.add_subcommand("reconstruct", "Detector inversion of one conditional histogram");
  reconstruct->add_option("--joint", rec.joint_file, "Joint histogram CSV")->required();
  reconstruct->add_option("--detectors", rec.detectors_file, "Detector JSON")->required();
  reconstruct->add_option("--cs", rec.cs, "Signal photocount to condition on")->required();
  reconstruct->add_option("--em-iters", rec.em_iters, "Iteration cap");
  reconstruct->add_option("--em-tol", rec.em_tol, "Relative log-likelihood tolerance");
  reconstruct->add_option("-o,--outdir", rec.outdir, "Output directory")->required();

  DepthOptions dep;
  auto* depth = app.add_subcommand("depth", "Nonclassicality depth of a distribution");
  depth->add_option("--dist", dep.dist_file, "Distribution CSV (n,p)")->required();
  depth->add_option("--kmax", dep.k_max, "Highest order");
  depth->add_option("-o,--output", dep.output, "Optional JSON output");

  QuasiOptions qua;
  auto* quasi = app.add_subcommand("quasidist", "s-ordered intensity quasi-distribution");
  quasi->add_option("--dist", qua.dist_file, "Distribution CSV (n,p)")->required();
  quasi->add_option("--s", qua.s, "Ordering parameter in [-1, 1)")->required();
  quasi->add_option("--order", qua.order, "Series order");
  quasi->add_option("--grid-points", qua.grid_points, "Grid points");
  quasi->add_option("--grid-span", qua.grid_span, "Grid upper edge in units of the mean");
  quasi->add_option("-o,--outdir", qua.outdir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (threads > 0) {
    ana.threads = threads;
  }

  const auto argv_list = collect_argv(argc, argv);
  try {
    if (simulate->parsed()) return cmd_simulate(sim, argv_list);
    if (analyze->parsed()) return cmd_analyze(ana, argv_list);
    if (reconstruct->parsed()) return cmd_reconstruct(rec, argv_list);
    if (depth->parsed()) return cmd_depth(dep, argv_list);
    if (quasi->parsed()) return cmd_quasidist(qua, argv_list);
  } catch (const ParameterDomainError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const ConditioningError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const DimensionError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const TruncationError& e) {
    std::fprintf(stderr, "numerical failure: %s (suggested bound %d)\n", e.what(),
                 e.suggested_bound);
    return kExitNumerical;
  } catch (const Error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitConfig;
}
