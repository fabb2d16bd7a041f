#pragma once

// Sweep runner: trains one network per grid point from a fresh Xavier init,
// measures capacity against the frozen init, and writes CSV rows plus
// checkpoints. Also re-verifies the certificates from saved checkpoints.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "initcap/capacity.hpp"
#include "initcap/stats.hpp"
#include "initcap/training.hpp"

namespace initcap {

enum class ProfileId { A, B, C, NoiseFull, NoisePartial };

std::string to_string(ProfileId id);
/// Accepts "A", "B", "C", "noise-full", "noise-partial" (case-insensitive).
ProfileId parse_profile(const std::string& s);

enum class DatasetKind { Mnist, Cifar10 };

struct ExperimentProfile {
  ProfileId id = ProfileId::C;
  DatasetKind dataset = DatasetKind::Mnist;
  TrainConfig train;
  int depth = 5;  ///< 4 hidden layers plus the output layer
  std::vector<int> H_grid;
  std::vector<Index> m_grid;
  std::vector<double> noise_grid;
};

ExperimentProfile make_profile(ProfileId id);

struct SyntheticSpec {
  int input_dim = 32;
  int num_classes = 10;
  double separation = 1.0;
  Index test_size = 2048;
};

struct SweepConfig {
  ExperimentProfile profile = make_profile(ProfileId::C);
  /// "synthetic", or a directory holding MNIST IDX files or CIFAR-10 batches.
  std::string dataset = "synthetic";
  SyntheticSpec synthetic;
  std::vector<int> H_grid;
  std::vector<Index> m_grid;
  std::vector<double> noise_grid;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::filesystem::path out_dir;
  int jobs = 1;
  bool save_checkpoints = true;

  /// Empty grids fall back to the profile defaults.
  void apply_profile_defaults();
  void validate() const;
};

inline constexpr int kSweepSchemaVersion = 1;

struct SweepRecord {
  std::string experiment;
  std::string profile;
  std::string dataset;
  std::uint64_t seed = 0;
  std::uint64_t point_seed = 0;
  int H = 0;
  Index m = 0;
  double noise = 0.0;
  std::string loss;
  std::string stop_rule;
  std::string status;  ///< a TrainStatus, or "error"
  std::string error;
  int epochs = 0;
  double initial_loss = 0.0;
  double final_train_loss = 0.0;
  double train_error = 0.0;
  double test_error = 0.0;
  double r = 0.0;
  double l2_product = 0.0;
  double spectral_product = 0.0;
  double spectral_measure = 0.0;
  double spectral_from_distance = 0.0;
  double output_bound = 0.0;
  double initial_loss_bound = 0.0;
  double grad_bound_first = 0.0;
  double grad_bound_last = 0.0;
  double wall_time_s = 0.0;
  std::string checkpoint;  ///< relative to the output directory

  bool ok() const { return status != "error"; }
};

/// Column names, in file order.
const std::vector<std::string>& sweep_csv_columns();
void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records);

using SweepProgress = std::function<void(const SweepRecord&)>;

/// Runs every grid point (H × m × noise × seed) and writes `sweep.csv` and,
/// when enabled, `checkpoints/<point>/{init.icap, final.icap, meta.json}`
/// under `out_dir`. Throws IoError before training if `out_dir` is unusable.
/// Point failures become "error" rows; the sweep continues.
std::vector<SweepRecord> run_sweep(const SweepConfig& cfg, const SweepProgress& progress = {});

/// Flat `key = value` text; '#' starts a comment. Throws ArgumentError on a
/// malformed line or a repeated key.
std::map<std::string, std::string> parse_config_text(const std::string& text);

/// Keys accepted by apply_sweep_setting.
const std::vector<std::string>& sweep_setting_keys();

/// Applies one setting. "profile" resets the profile (and so its training
/// defaults); lists are comma- or space-separated.
void apply_sweep_setting(SweepConfig& cfg, const std::string& key, const std::string& value);

/// Layers settings in precedence order: profile defaults, then `file`, then
/// `flags`. The profile named by the highest-precedence layer is applied first.
SweepConfig resolve_sweep_config(const std::map<std::string, std::string>& file,
                                 const std::map<std::string, std::string>& flags);

/// Experiment id used in seed derivation and in the CSV `experiment` column.
std::string experiment_id(const SweepConfig& cfg);

// Certificate re-verification ------------------------------------------------

struct BoundCheck {
  std::string point;
  std::string check;  ///< r, spectral, output, gradient, initial-loss
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct VerifyReport {
  int checkpoints = 0;
  std::vector<BoundCheck> checks;
  std::vector<std::string> errors;  ///< missing or unreadable checkpoints

  int failures() const;
  /// 0 all pass, 1 a dominance failure or nothing to check, 3 unreadable input.
  int exit_code() const;
};

/// Recomputes every certificate for each `<dir>/**/init.icap` + `final.icap`
/// pair (with `meta.json`) and compares it against the measured quantity on
/// `probes` random inputs in [0,1]^n.
VerifyReport verify_bounds(const std::filesystem::path& dir, int probes = 32);

void print_verify_report(std::ostream& os, const VerifyReport& rep, bool verbose = false);

// Fitting -------------------------------------------------------------------

/// Means of y grouped by distinct x, in ascending x order.
std::vector<std::pair<double, double>> mean_by_x(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace initcap
