#include "initcap/concentration.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "initcap/network.hpp"
#include "initcap/stats.hpp"

namespace initcap {

TailCell verify_chisq_tail(int k, double t, int samples, Rng& rng) {
  if (!(t > 0.0 && t < 1.0)) throw ArgumentError("verify_chisq_tail: t must be in (0, 1)");
  if (k < 1 || samples < 1) throw ArgumentError("verify_chisq_tail: k and samples must be >= 1");
  int exceed = 0;
  for (int s = 0; s < samples; ++s) {
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      const double z = rng.normal();
      sum += z * z;
    }
    if (std::abs(sum / k - 1.0) >= t) ++exceed;
  }
  TailCell cell;
  cell.check = "chisq";
  cell.k_or_n1 = k;
  cell.t = t;
  cell.samples = samples;
  cell.empirical = static_cast<double>(exceed) / samples;
  cell.bound = 2.0 * std::exp(-k * t * t / 8.0);
  const double p = std::min(cell.bound, 1.0);
  cell.slack = 3.0 * std::sqrt(p * (1.0 - p) / samples);
  cell.pass = cell.empirical <= cell.bound + cell.slack;
  return cell;
}

TailCell verify_gaussian_spectral(int n1, int n2, int samples, Rng& rng, double K) {
  if (n2 < 1 || samples < 1) throw ArgumentError("verify_gaussian_spectral: n2 and samples must be >= 1");
  if (n1 < n2) throw ArgumentError("verify_gaussian_spectral: requires n1 >= n2");
  std::vector<double> dev, ratio;
  for (int s = 0; s < samples; ++s) {
    const DenseMatrix w = gaussian_matrix(rng, n1, n2, 1.0);
    const double sigma = spectral_norm(w, 1e-9).value;
    dev.push_back(std::abs(sigma * sigma / n1 - 1.0));
    ratio.push_back(sigma / std::sqrt(static_cast<double>(n1)));
  }
  TailCell cell;
  cell.check = "gauss-spectral";
  cell.k_or_n1 = n1;
  cell.n2 = n2;
  cell.samples = samples;
  cell.empirical = median(dev);
  cell.bound = K * std::sqrt(static_cast<double>(n2) / n1);
  cell.median_ratio = median(ratio);
  cell.pass = cell.empirical <= cell.bound;
  return cell;
}

ScalingReport verify_init_scalings(const std::vector<int>& H_grid, int depth, int reps, Rng& rng, int input_dim,
                                   double spectral_tol) {
  if (H_grid.size() < 4) throw ArgumentError("verify_init_scalings: need at least 4 widths");
  for (std::size_t i = 1; i < H_grid.size(); ++i)
    if (H_grid[i] <= H_grid[i - 1]) throw ArgumentError("verify_init_scalings: widths must ascend");
  if (depth < 3) throw ArgumentError("verify_init_scalings: depth must be >= 3 to have hidden square layers");
  if (reps < 1) throw ArgumentError("verify_init_scalings: reps must be >= 1");

  ScalingReport rep;
  rep.input_dim = input_dim;
  std::vector<double> hs, hf, hsp, of;
  for (int H : H_grid) {
    const NetShape shape{input_dim, H, depth, 1, Activation::ReLU};
    ScalingPoint pt{H, 0.0, 0.0, 0.0, 0.0};
    int hidden_count = 0;
    for (int r = 0; r < reps; ++r) {
      const NetParams z = xavier_init(rng, shape);
      for (int k = 2; k < depth; ++k) {
        const auto& w = z.weights[static_cast<std::size_t>(k - 1)];
        pt.hidden_frobenius += w.norm();
        pt.hidden_spectral += spectral_norm(w, spectral_tol).value;
        ++hidden_count;
      }
      pt.output_frobenius += z.weights.back().norm() / reps;
      pt.first_frobenius += z.weights.front().norm() / reps;
    }
    pt.hidden_frobenius /= hidden_count;
    pt.hidden_spectral /= hidden_count;
    rep.points.push_back(pt);
    hs.push_back(H);
    hf.push_back(pt.hidden_frobenius);
    hsp.push_back(pt.hidden_spectral);
    of.push_back(pt.output_frobenius);
    rep.worst_first_layer_ratio = std::max(
        rep.worst_first_layer_ratio, std::abs(pt.first_frobenius / std::sqrt(static_cast<double>(input_dim)) - 1.0));
  }
  rep.hidden_frobenius_slope = fit_power_law(hs, hf).exponent;
  rep.hidden_spectral_slope = fit_power_law(hs, hsp).exponent;
  rep.output_frobenius_slope = fit_power_law(hs, of).exponent;
  return rep;
}

double enumerate_rademacher_moment(const DenseMatrix& vectors, int p) {
  const Index m = vectors.rows();
  if (m < 1) throw ArgumentError("enumerate_rademacher_moment: no vectors");
  if (m > kMaxEnumeration) throw ArgumentError("enumerate_rademacher_moment: m too large to enumerate");
  if (p != 1 && p != 2) throw ArgumentError("enumerate_rademacher_moment: p must be 1 or 2");
  const std::uint64_t patterns = std::uint64_t(1) << m;
  double total = 0.0;
  Eigen::RowVectorXd s(vectors.cols());
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    s.setZero();
    for (Index i = 0; i < m; ++i) {
      if ((mask >> i) & 1)
        s += vectors.row(i);
      else
        s -= vectors.row(i);
    }
    total += p == 2 ? s.squaredNorm() : s.norm();
  }
  return total / static_cast<double>(patterns);
}

KhintchineReport verify_kk_identity(const DenseMatrix& vectors, int trials, Rng& rng) {
  if (vectors.rows() < 1) throw ArgumentError("verify_kk_identity: no vectors");
  if (trials < 2) throw ArgumentError("verify_kk_identity: need at least 2 trials");
  KhintchineReport rep;
  rep.m = vectors.rows();
  rep.sum_sq = vectors.squaredNorm();
  const double root = std::sqrt(rep.sum_sq);

  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  Eigen::RowVectorXd s(vectors.cols());
  for (int t = 0; t < trials; ++t) {
    s.setZero();
    for (Index i = 0; i < rep.m; ++i) s += rng.sign() * vectors.row(i);
    const double q = s.squaredNorm();
    s1 += std::sqrt(q);
    s2 += q;
    s4 += q * q;
  }
  rep.mc_second_moment = s2 / trials;
  rep.mc_first_moment = s1 / trials;
  const double var = std::max(0.0, (s4 - trials * rep.mc_second_moment * rep.mc_second_moment) / (trials - 1));
  rep.mc_std_error = std::sqrt(var / trials);
  rep.mc_pass = std::abs(rep.mc_second_moment - rep.sum_sq) <= 3.0 * rep.mc_std_error + 1e-12 * rep.sum_sq;

  if (rep.m <= kMaxEnumeration) {
    rep.exact_second_moment = enumerate_rademacher_moment(vectors, 2);
    rep.exact_first_moment = enumerate_rademacher_moment(vectors, 1);
    rep.jensen_pass = *rep.exact_first_moment <= root * (1.0 + 1e-12);
  } else {
    rep.jensen_pass = rep.mc_first_moment <= root * (1.0 + 1e-12) + 3.0 * rep.mc_std_error;
  }
  return rep;
}

bool ConcentrationSuite::all_pass() const {
  for (const auto& c : cells)
    if (!c.pass) return false;
  const bool exact_ok = khintchine_exact.exact_second_moment &&
                        std::abs(*khintchine_exact.exact_second_moment - khintchine_exact.sum_sq) <=
                            1e-9 * std::max(1.0, khintchine_exact.sum_sq);
  return scalings_pass && exact_ok && khintchine_exact.jensen_pass && khintchine_mc.mc_pass &&
         khintchine_mc.jensen_pass;
}

ConcentrationSuite run_concentration_suite(std::uint64_t seed) {
  ConcentrationSuite suite;
  Rng root(seed);
  std::uint64_t stream = 0;
  for (int k : {1, 10, 100, 1000}) {
    for (double t : {0.1, 0.25, 0.5, 0.9}) {
      Rng rng = root.split(stream++);
      suite.cells.push_back(verify_chisq_tail(k, t, 10000, rng));
    }
  }
  const std::pair<int, int> shapes[] = {{256, 256}, {512, 128}, {1024, 64}, {1024, 1}, {10000, 1}};
  for (auto [n1, n2] : shapes) {
    Rng rng = root.split(stream++);
    suite.cells.push_back(verify_gaussian_spectral(n1, n2, 25, rng));
  }
  {
    Rng rng = root.split(stream++);
    suite.scalings = verify_init_scalings({64, 128, 256, 512, 1024}, 4, 4, rng);
    const auto& s = suite.scalings;
    suite.scalings_pass = s.hidden_frobenius_slope >= 0.45 && s.hidden_frobenius_slope <= 0.55 &&
                          std::abs(s.hidden_spectral_slope) <= 0.05 && std::abs(s.output_frobenius_slope) <= 0.05 &&
                          s.worst_first_layer_ratio <= 0.15;
  }
  {
    Rng rng = root.split(stream++);
    const DenseMatrix xs = gaussian_matrix(rng, 12, 8, 1.0);
    suite.khintchine_exact = verify_kk_identity(xs, 20000, rng);
    const DenseMatrix big = gaussian_matrix(rng, 100, 8, 1.0);
    suite.khintchine_mc = verify_kk_identity(big, 20000, rng);
  }
  return suite;
}

void write_tail_csv(std::ostream& os, const std::vector<TailCell>& cells) {
  os << "check,k_or_n1,n2,t,samples,empirical,bound,slack,median_ratio,pass\n";
  os << std::setprecision(17);
  for (const auto& c : cells)
    os << c.check << ',' << c.k_or_n1 << ',' << c.n2 << ',' << c.t << ',' << c.samples << ',' << c.empirical << ','
       << c.bound << ',' << c.slack << ',' << c.median_ratio << ',' << (c.pass ? "PASS" : "FAIL") << '\n';
}

void print_suite_table(std::ostream& os, const ConcentrationSuite& suite) {
  const auto flags = os.flags();
  os << std::left << std::setw(16) << "check" << std::setw(14) << "params" << std::setw(14) << "empirical"
     << std::setw(14) << "bound" << "result\n";
  for (const auto& c : suite.cells) {
    std::ostringstream params;
    if (c.check == "chisq")
      params << "k=" << c.k_or_n1 << " t=" << c.t;
    else
      params << c.k_or_n1 << "x" << c.n2;
    os << std::setw(16) << c.check << std::setw(14) << params.str() << std::setw(14) << std::setprecision(6)
       << c.empirical << std::setw(14) << c.bound << (c.pass ? "PASS" : "FAIL") << '\n';
  }
  const auto& s = suite.scalings;
  os << "init scalings: hidden ‖Z‖_F slope " << s.hidden_frobenius_slope << ", hidden ‖Z‖₂ slope "
     << s.hidden_spectral_slope << ", ‖Z_d‖_F slope " << s.output_frobenius_slope << ", ‖Z_1‖_F/√n deviation "
     << s.worst_first_layer_ratio << "  " << (suite.scalings_pass ? "PASS" : "FAIL") << '\n';
  const auto& e = suite.khintchine_exact;
  os << "Rademacher second moment (m=" << e.m << ", enumerated): " << e.exact_second_moment.value_or(NAN)
     << " vs Σ‖x‖² " << e.sum_sq << '\n';
  const auto& mc = suite.khintchine_mc;
  os << "Rademacher second moment (m=" << mc.m << ", Monte Carlo): " << mc.mc_second_moment << " ± "
     << mc.mc_std_error << " vs " << mc.sum_sq << "  " << (mc.mc_pass ? "PASS" : "FAIL") << '\n';
  os.flags(flags);
}

}  // namespace initcap
