// initcap: sweeps, certificate verification, Rademacher estimates,
// concentration checks, power-law fits and plots.
//
// Exit codes: 0 success, 1 verification failure, 2 usage error,
// 3 I/O or format error.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "initcap/capacity.hpp"
#include "initcap/concentration.hpp"
#include "initcap/experiment.hpp"
#include "initcap/plot.hpp"
#include "initcap/rademacher.hpp"

using namespace initcap;

namespace {

constexpr int kOk = 0, kVerifyFailed = 1, kUsage = 2, kIo = 3;

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
  return out;
}

struct SweepArgs {
  std::string config;
  std::map<std::string, std::vector<std::string>> values;
  bool quiet = false;
};

void add_sweep(CLI::App& app, SweepArgs& args) {
  auto* sweep = app.add_subcommand("sweep", "Train a grid of networks and record capacity measurements");
  sweep->add_option("--config", args.config, "Flat key=value file; flags override its keys");
  sweep->add_flag("--quiet", args.quiet, "No per-point progress on stderr");
  const std::pair<const char*, const char*> opts[] = {
      {"profile", "A, B, C, noise-full or noise-partial"},
      {"dataset", "'synthetic' or a directory of MNIST IDX / CIFAR-10 binary files"},
      {"H", "Hidden widths"},
      {"m", "Training set sizes"},
      {"noise", "Label noise levels in [0,1]"},
      {"seeds", "Replicate seeds"},
      {"out", "Output directory"},
      {"jobs", "Worker threads"},
      {"lr", "Learning rate"},
      {"momentum", "Momentum"},
      {"batch", "Batch size"},
      {"max-epochs", "Epoch limit"},
      {"stop", "loss<x | fraction:x | margin:m@f | epochs"},
      {"loss", "squared or cross-entropy"},
      {"depth", "Weight layers"},
      {"input-dim", "Synthetic input dimension"},
      {"classes", "Synthetic classes"},
      {"separation", "Synthetic cluster separation"},
      {"test-size", "Synthetic test points"},
      {"checkpoints", "Save checkpoints (true/false)"},
  };
  for (const auto& [key, help] : opts)
    sweep->add_option(std::string("--") + key, args.values[key], help)->delimiter(',')->allow_extra_args();
}

int run_sweep_cmd(const SweepArgs& args) {
  std::map<std::string, std::string> file;
  if (!args.config.empty()) {
    std::ifstream in(args.config);
    if (!in) throw IoError("cannot open config " + args.config);
    std::stringstream ss;
    ss << in.rdbuf();
    file = parse_config_text(ss.str());
  }
  std::map<std::string, std::string> flags;
  for (const auto& [k, v] : args.values)
    if (!v.empty()) flags[k] = join(v);
  const SweepConfig cfg = resolve_sweep_config(file, flags);

  const auto records = run_sweep(cfg, [&](const SweepRecord& r) {
    if (args.quiet) return;
    std::cerr << "H=" << r.H << " m=" << r.m << " noise=" << r.noise << " seed=" << r.seed << "  " << r.status;
    if (r.ok()) std::cerr << " epochs=" << r.epochs << " r=" << r.r << " loss=" << r.final_train_loss;
    if (!r.error.empty()) std::cerr << " (" << r.error << ")";
    std::cerr << "  " << r.wall_time_s << "s\n";
  });
  int errors = 0;
  for (const auto& r : records) errors += r.ok() ? 0 : 1;
  std::cout << "wrote " << records.size() << " rows to " << (cfg.out_dir / "sweep.csv").string();
  if (errors) std::cout << " (" << errors << " failed points)";
  std::cout << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Initialization-dependent capacity measurements"};
  app.require_subcommand(1);

  SweepArgs sweep_args;
  add_sweep(app, sweep_args);

  std::string verify_dir;
  int verify_probes = 32;
  bool verify_verbose = false;
  auto* verify = app.add_subcommand("verify-bounds", "Recheck every certificate from saved checkpoints");
  verify->add_option("dir", verify_dir, "Sweep output directory")->required();
  verify->add_option("--probes", verify_probes, "Random probe inputs per checkpoint");
  verify->add_flag("--verbose", verify_verbose, "List passing checks too");

  double rad_r = 1.0;
  std::string rad_activation = "linear";
  int rad_H = 16, rad_depth = 3, rad_m = 16, rad_n = 8, rad_trials = 20;
  AscentOptions ascent;
  std::uint64_t rad_seed = 0;
  auto* rad = app.add_subcommand("estimate-rademacher", "Monte-Carlo Rademacher estimate over the ball around an init");
  rad->add_option("--r", rad_r, "Ball radius")->required();
  rad->add_option("--activation", rad_activation, "relu or linear");
  rad->add_option("--H", rad_H, "Hidden width");
  rad->add_option("--depth", rad_depth, "Weight layers");
  rad->add_option("--m", rad_m, "Number of inputs");
  rad->add_option("--input-dim", rad_n, "Input dimension");
  rad->add_option("--trials", rad_trials, "Sign vectors");
  rad->add_option("--restarts", ascent.restarts, "Ascent restarts per sign vector");
  rad->add_option("--steps", ascent.steps, "Ascent steps per restart");
  rad->add_option("--seed", rad_seed, "Seed");

  std::uint64_t conc_seed = 0;
  std::string conc_csv;
  auto* conc = app.add_subcommand("verify-concentration", "Simulate the concentration facts behind the bounds");
  conc->add_option("--seed", conc_seed, "Seed");
  conc->add_option("--csv", conc_csv, "Also write the tail table here");

  std::string fit_csv, fit_x, fit_y;
  auto* fit = app.add_subcommand("fit", "Power-law fit of per-x means of y against x");
  fit->add_option("--csv", fit_csv, "Sweep CSV")->required();
  fit->add_option("--x", fit_x, "x column")->required();
  fit->add_option("--y", fit_y, "y column")->required();

  std::string plot_csv_path, plot_out;
  PlotOptions plot_opts;
  auto* plot = app.add_subcommand("plot", "SVG line plot of a CSV");
  plot->add_option("--csv", plot_csv_path, "Input CSV")->required();
  plot->add_option("--x", plot_opts.x, "x column")->required();
  plot->add_option("--y", plot_opts.y, "y column")->required();
  plot->add_option("--group", plot_opts.group, "One line per value of this column");
  plot->add_option("--out", plot_out, "Output SVG")->required();
  plot->add_option("--title", plot_opts.title, "Title");
  plot->add_flag("--log-x", plot_opts.log_x, "Log-scale x");
  plot->add_flag("--log-y", plot_opts.log_y, "Log-scale y");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (app.got_subcommand("sweep")) return run_sweep_cmd(sweep_args);

    if (app.got_subcommand("verify-bounds")) {
      const VerifyReport rep = verify_bounds(verify_dir, verify_probes);
      print_verify_report(std::cout, rep, verify_verbose);
      return rep.exit_code();
    }

    if (app.got_subcommand("estimate-rademacher")) {
      const NetShape shape{rad_n, rad_H, rad_depth, 1, parse_activation(rad_activation)};
      Rng rng(rad_seed);
      const InitSnapshot z(xavier_init(rng, shape));
      DenseMatrix xs(rad_m, rad_n);
      for (Index i = 0; i < xs.rows(); ++i)
        for (Index j = 0; j < xs.cols(); ++j) xs(i, j) = rng.uniform();
      const RadEstimate est = estimate(z, rad_r, xs, rad_trials, ascent, rng.split(1));
      std::cout << "estimate " << est.mean << " ± " << est.std_error << " (" << est.trials << " trials, "
                << est.discarded << " discarded)\n";
      if (shape.activation == Activation::Linear) {
        const double bound = linear_rademacher_bound(z, rad_r, xs);
        const bool ok = est.mean - 3.0 * est.std_error <= bound;
        std::cout << "linear certificate " << bound << "  " << (ok ? "PASS" : "FAIL") << '\n';
        return ok ? kOk : kVerifyFailed;
      }
      return kOk;
    }

    if (app.got_subcommand("verify-concentration")) {
      const ConcentrationSuite suite = run_concentration_suite(conc_seed);
      print_suite_table(std::cout, suite);
      if (!conc_csv.empty()) {
        std::ofstream out(conc_csv);
        if (!out) throw IoError("cannot open for writing: " + conc_csv);
        write_tail_csv(out, suite.cells);
      }
      return suite.all_pass() ? kOk : kVerifyFailed;
    }

    if (app.got_subcommand("fit")) {
      const CsvTable t = CsvTable::read(fit_csv);
      const auto pts = mean_by_x(t.numeric(fit_x, true), t.numeric(fit_y, true));
      std::vector<double> xs, ys;
      for (const auto& [x, y] : pts) xs.push_back(x), ys.push_back(y);
      const PowerLawFit f = fit_power_law(xs, ys);
      std::cout << "exponent " << f.exponent << "\nintercept " << f.intercept << "\nr_squared " << f.r_squared
                << '\n';
      return kOk;
    }

    if (app.got_subcommand("plot")) {
      plot_csv(plot_csv_path, plot_opts, plot_out);
      return kOk;
    }
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kIo;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kVerifyFailed;
  }
  return kUsage;
}
