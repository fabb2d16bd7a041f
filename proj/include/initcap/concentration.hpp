#pragma once

// Empirical checks of the random-matrix facts behind the width-independence
// arguments: chi-square concentration, Gaussian spectral-norm concentration,
// norm scalings of a Xavier initialization, and the Rademacher second-moment
// identity.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "initcap/linalg.hpp"

namespace initcap {

struct TailCell {
  std::string check;        ///< "chisq" or "gauss-spectral"
  int k_or_n1 = 0;
  int n2 = 0;               ///< unused for chisq
  double t = 0.0;           ///< unused for gauss-spectral
  int samples = 0;
  double empirical = 0.0;   ///< exceedance frequency, or median deviation
  double bound = 0.0;       ///< theoretical bound, or K·√(n2/n1)
  double slack = 0.0;       ///< binomial 3σ allowance (chisq only)
  double median_ratio = 0.0;  ///< median ‖W‖₂/√n1 (gauss-spectral only)
  bool pass = false;
};

/// Frequency of |(1/k) Σ z_i² - 1| >= t over `samples` repetitions, against
/// 2e^{-kt²/8} plus a 3σ binomial allowance computed at the bound.
TailCell verify_chisq_tail(int k, double t, int samples, Rng& rng);

inline constexpr double kSpectralCalibration = 5.0;

/// Median of |‖W‖₂²/n1 - 1| for standard Gaussian n1×n2 matrices against K√(n2/n1).
TailCell verify_gaussian_spectral(int n1, int n2, int samples, Rng& rng, double K = kSpectralCalibration);

struct ScalingPoint {
  int H;
  double hidden_frobenius;   ///< mean over hidden square layers and reps
  double hidden_spectral;
  double output_frobenius;   ///< ‖Z_d‖_F
  double first_frobenius;    ///< ‖Z_1‖_F
};

struct ScalingReport {
  std::vector<ScalingPoint> points;
  int input_dim = 0;
  double hidden_frobenius_slope = 0.0;
  double hidden_spectral_slope = 0.0;
  double output_frobenius_slope = 0.0;
  double worst_first_layer_ratio = 0.0;  ///< max |‖Z_1‖_F/√n - 1| over the grid
};

/// Regresses log-norms of fresh Xavier initializations on log H.
/// Requires an ascending grid of >= 4 widths and depth >= 3.
ScalingReport verify_init_scalings(const std::vector<int>& H_grid, int depth, int reps, Rng& rng,
                                   int input_dim = 16, double spectral_tol = 1e-8);

struct KhintchineReport {
  Index m = 0;
  double sum_sq = 0.0;               ///< Σ‖x_i‖²
  double mc_second_moment = 0.0;
  double mc_std_error = 0.0;
  double mc_first_moment = 0.0;
  bool mc_pass = false;              ///< |mc - Σ‖x‖²| <= 3σ
  std::optional<double> exact_second_moment;  ///< by enumeration, m <= 15
  std::optional<double> exact_first_moment;
  bool jensen_pass = false;          ///< E‖Σξx‖ <= √(Σ‖x‖²)
};

inline constexpr Index kMaxEnumeration = 15;

/// `vectors` holds one x_i per row.
KhintchineReport verify_kk_identity(const DenseMatrix& vectors, int trials, Rng& rng);

/// Exact E_ξ‖Σξ_i x_i‖^p over all 2^m sign patterns (p = 1 or 2).
double enumerate_rademacher_moment(const DenseMatrix& vectors, int p);

struct ConcentrationSuite {
  std::vector<TailCell> cells;
  ScalingReport scalings;
  KhintchineReport khintchine_exact;
  KhintchineReport khintchine_mc;
  bool scalings_pass = false;
  bool all_pass() const;
};

/// The default verification grid used by the CLI and the acceptance suite.
ConcentrationSuite run_concentration_suite(std::uint64_t seed);

void write_tail_csv(std::ostream& os, const std::vector<TailCell>& cells);
void print_suite_table(std::ostream& os, const ConcentrationSuite& suite);

}  // namespace initcap
