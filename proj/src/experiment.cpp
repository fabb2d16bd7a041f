#include "initcap/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "initcap/plot.hpp"
#include "json.hpp"

namespace initcap {

namespace fs = std::filesystem;

std::string to_string(ProfileId id) {
  switch (id) {
    case ProfileId::A: return "A";
    case ProfileId::B: return "B";
    case ProfileId::C: return "C";
    case ProfileId::NoiseFull: return "noise-full";
    case ProfileId::NoisePartial: return "noise-partial";
  }
  return "unknown";
}

ProfileId parse_profile(const std::string& s) {
  std::string l = s;
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "a") return ProfileId::A;
  if (l == "b") return ProfileId::B;
  if (l == "c") return ProfileId::C;
  if (l == "noise-full" || l == "noisefull") return ProfileId::NoiseFull;
  if (l == "noise-partial" || l == "noisepartial") return ProfileId::NoisePartial;
  throw ArgumentError("unknown profile '" + s + "' (expected A, B, C, noise-full, noise-partial)");
}

ExperimentProfile make_profile(ProfileId id) {
  ExperimentProfile p;
  p.id = id;
  p.train.batch_size = 64;
  p.train.max_epochs = 2000;
  p.train.loss = LossKind::Squared;
  p.H_grid = {32, 64, 128, 256, 512};
  p.m_grid = {1024};
  p.noise_grid = {0.0};
  switch (id) {
    case ProfileId::A:
      p.train.learning_rate = 0.01;
      p.train.momentum = 0.9;
      p.train.stop = LossBelow{0.001};
      break;
    case ProfileId::B:
      p.dataset = DatasetKind::Cifar10;
      p.train.learning_rate = 0.5;
      p.train.stop = LossBelow{0.02};
      break;
    case ProfileId::C:
      p.train.learning_rate = 1.0;
      p.train.stop = LossFractionOfInitial{0.1};
      break;
    case ProfileId::NoiseFull:
      p.train.learning_rate = 0.01;
      p.train.stop = LossBelow{0.1};
      p.H_grid = {256};
      p.noise_grid = {0.0, 1.0};
      break;
    case ProfileId::NoisePartial:
      p.train.learning_rate = 0.01;
      p.train.stop = LossBelow{0.1};
      p.H_grid = {256};
      p.noise_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
      break;
  }
  return p;
}

void SweepConfig::apply_profile_defaults() {
  if (H_grid.empty()) H_grid = profile.H_grid;
  if (m_grid.empty()) m_grid = profile.m_grid;
  if (noise_grid.empty()) noise_grid = profile.noise_grid;
}

void SweepConfig::validate() const {
  if (H_grid.empty() || m_grid.empty() || noise_grid.empty() || seeds.empty())
    throw ArgumentError("sweep: H, m, noise and seed grids must be nonempty");
  for (int H : H_grid)
    if (H < 1) throw ArgumentError("sweep: H must be >= 1");
  for (Index m : m_grid)
    if (m < 1) throw ArgumentError("sweep: m must be >= 1");
  for (double v : noise_grid)
    if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("sweep: noise levels must be in [0, 1]");
  if (profile.depth < 2) throw ArgumentError("sweep: depth must be >= 2");
  if (jobs < 1) throw ArgumentError("sweep: jobs must be >= 1");
  if (out_dir.empty()) throw ArgumentError("sweep: output directory required");
  if (dataset == "synthetic") {
    if (synthetic.input_dim < 1 || synthetic.num_classes < 2 || synthetic.test_size < 1)
      throw ArgumentError("sweep: invalid synthetic settings");
    if (!(synthetic.separation >= 0.0)) throw ArgumentError("sweep: separation must be >= 0");
  }
  profile.train.validate();
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ArgumentError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ArgumentError("config line " + std::to_string(line_no) + ": empty key");
    if (!out.emplace(key, trim(line.substr(eq + 1))).second)
      throw ArgumentError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }
  return out;
}

const std::vector<std::string>& sweep_setting_keys() {
  static const std::vector<std::string> keys = {
      "profile", "dataset", "H",       "m",          "noise",      "seeds",      "out",
      "jobs",    "lr",      "momentum", "batch",     "max-epochs", "stop",       "loss",
      "depth",   "input-dim", "classes", "separation", "test-size", "checkpoints"};
  return keys;
}

namespace {

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  std::istringstream in(v);
  in.imbue(std::locale::classic());
  T out{};
  in >> out;
  if (!in || !(in >> std::ws).eof()) throw ArgumentError("setting '" + key + "': cannot parse '" + v + "'");
  return out;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& v) {
  std::vector<T> out;
  for (const auto& item : split_list(v)) out.push_back(parse_number<T>(key, item));
  if (out.empty()) throw ArgumentError("setting '" + key + "': empty list");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ArgumentError("setting '" + key + "': expected a boolean, got '" + v + "'");
}

}  // namespace

void apply_sweep_setting(SweepConfig& cfg, const std::string& key, const std::string& value) {
  auto& tc = cfg.profile.train;
  if (key == "profile") {
    cfg.profile = make_profile(parse_profile(value));
  } else if (key == "dataset") {
    cfg.dataset = value;
  } else if (key == "H") {
    cfg.H_grid = parse_list<int>(key, value);
  } else if (key == "m") {
    cfg.m_grid = parse_list<Index>(key, value);
  } else if (key == "noise") {
    cfg.noise_grid = parse_list<double>(key, value);
  } else if (key == "seeds") {
    cfg.seeds = parse_list<std::uint64_t>(key, value);
  } else if (key == "out") {
    cfg.out_dir = value;
  } else if (key == "jobs") {
    cfg.jobs = parse_number<int>(key, value);
  } else if (key == "lr") {
    tc.learning_rate = parse_number<double>(key, value);
  } else if (key == "momentum") {
    tc.momentum = parse_number<double>(key, value);
  } else if (key == "batch") {
    tc.batch_size = parse_number<int>(key, value);
  } else if (key == "max-epochs") {
    tc.max_epochs = parse_number<int>(key, value);
  } else if (key == "stop") {
    tc.stop = parse_stop_rule(value);
  } else if (key == "loss") {
    tc.loss = parse_loss(value);
  } else if (key == "depth") {
    cfg.profile.depth = parse_number<int>(key, value);
  } else if (key == "input-dim") {
    cfg.synthetic.input_dim = parse_number<int>(key, value);
  } else if (key == "classes") {
    cfg.synthetic.num_classes = parse_number<int>(key, value);
  } else if (key == "separation") {
    cfg.synthetic.separation = parse_number<double>(key, value);
  } else if (key == "test-size") {
    cfg.synthetic.test_size = parse_number<Index>(key, value);
  } else if (key == "checkpoints") {
    cfg.save_checkpoints = parse_bool(key, value);
  } else {
    throw ArgumentError("unknown setting '" + key + "'");
  }
}

SweepConfig resolve_sweep_config(const std::map<std::string, std::string>& file,
                                 const std::map<std::string, std::string>& flags) {
  std::map<std::string, std::string> merged = file;
  for (const auto& [k, v] : flags) merged[k] = v;
  SweepConfig cfg;
  if (const auto it = merged.find("profile"); it != merged.end()) apply_sweep_setting(cfg, it->first, it->second);
  for (const auto& [k, v] : merged)
    if (k != "profile") apply_sweep_setting(cfg, k, v);
  cfg.apply_profile_defaults();
  return cfg;
}

std::string experiment_id(const SweepConfig& cfg) {
  return to_string(cfg.profile.id) + "/" + (cfg.dataset == "synthetic" ? "synthetic" : "dataset");
}

const std::vector<std::string>& sweep_csv_columns() {
  static const std::vector<std::string> cols = {
      "schema_version", "experiment",       "profile",          "dataset",          "seed",
      "point_seed",     "H",                "m",                "noise",            "loss",
      "stop_rule",      "status",           "error",            "epochs",           "initial_loss",
      "final_train_loss", "train_error",    "test_error",       "r",                "l2_product",
      "spectral_product", "spectral_measure", "spectral_from_distance", "output_bound", "initial_loss_bound",
      "grad_bound_first", "grad_bound_last", "wall_time_s",     "checkpoint"};
  return cols;
}

namespace {

std::string num(double v) {
  if (!std::isfinite(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string noise_label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  const auto& cols = sweep_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : records) {
    const bool ok = r.ok();
    auto metric = [&](double v) { return ok ? num(v) : std::string(); };
    const std::vector<std::string> f = {std::to_string(kSweepSchemaVersion),
                                        csv_escape(r.experiment),
                                        csv_escape(r.profile),
                                        csv_escape(r.dataset),
                                        std::to_string(r.seed),
                                        std::to_string(r.point_seed),
                                        std::to_string(r.H),
                                        std::to_string(r.m),
                                        num(r.noise),
                                        r.loss,
                                        csv_escape(r.stop_rule),
                                        r.status,
                                        csv_escape(r.error),
                                        ok ? std::to_string(r.epochs) : std::string(),
                                        metric(r.initial_loss),
                                        metric(r.final_train_loss),
                                        metric(r.train_error),
                                        metric(r.test_error),
                                        metric(r.r),
                                        metric(r.l2_product),
                                        metric(r.spectral_product),
                                        metric(r.spectral_measure),
                                        metric(r.spectral_from_distance),
                                        metric(r.output_bound),
                                        metric(r.initial_loss_bound),
                                        metric(r.grad_bound_first),
                                        metric(r.grad_bound_last),
                                        num(r.wall_time_s),
                                        csv_escape(r.checkpoint)};
    for (std::size_t i = 0; i < f.size(); ++i) os << (i ? "," : "") << f[i];
    os << '\n';
  }
}

namespace {

enum SeedTag : std::uint64_t { kDistribution = 1, kSample, kNoise, kInit, kTest, kPoint };

std::uint64_t id_hash(const std::string& s) { return detail::hash_bytes(s.data(), s.size()); }

// Even classes become +1, odd classes -1.
Dataset parity_signs(const Dataset& d) {
  Dataset out = d;
  for (int& l : out.labels) l = l % 2;
  out.num_classes = 2;
  out.encoding = LabelEncoding::SignScalar;
  return out;
}

Dataset relabel_for_profile(const Dataset& d, ProfileId id) {
  if (id == ProfileId::NoisePartial) return two_class_filter(d, 0, 1);
  if (id == ProfileId::NoiseFull) return parity_signs(d);
  return d;
}

struct DataSource {
  // Dataset-backed
  std::optional<Dataset> pool;
  std::optional<Dataset> test;
  std::string name;
};

DataSource load_source(const SweepConfig& cfg) {
  DataSource src;
  if (cfg.dataset == "synthetic") {
    src.name = "synthetic";
    return src;
  }
  const fs::path dir(cfg.dataset);
  if (!fs::is_directory(dir)) throw IoError("dataset directory not found: " + dir.string());
  src.name = dir.filename().string().empty() ? dir.string() : dir.filename().string();
  Dataset train, test;
  bool have_test = false;
  if (cfg.profile.dataset == DatasetKind::Mnist) {
    train = load_mnist(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
    if (fs::exists(dir / "t10k-images-idx3-ubyte") && fs::exists(dir / "t10k-labels-idx1-ubyte")) {
      test = load_mnist(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte");
      have_test = true;
    }
  } else {
    std::vector<fs::path> batches;
    for (int b = 1; b <= 5; ++b) {
      const auto p = dir / ("data_batch_" + std::to_string(b) + ".bin");
      if (fs::exists(p)) batches.push_back(p);
    }
    if (batches.empty()) throw IoError("no CIFAR-10 data_batch_*.bin files in " + dir.string());
    train = load_cifar10(batches);
    if (fs::exists(dir / "test_batch.bin")) {
      test = load_cifar10({dir / "test_batch.bin"});
      have_test = true;
    }
  }
  if (!have_test) {
    // Hold out the tail of the training pool.
    const Index hold = std::min<Index>(10000, train.size() / 2);
    std::vector<Index> head, tail;
    for (Index i = 0; i < train.size(); ++i) (i < train.size() - hold ? head : tail).push_back(i);
    test = select_rows(train, tail);
    train = select_rows(train, head);
  } else if (test.size() > 10000) {
    std::vector<Index> rows(10000);
    for (Index i = 0; i < 10000; ++i) rows[static_cast<std::size_t>(i)] = i;
    test = select_rows(test, rows);
  }
  src.pool = relabel_for_profile(train, cfg.profile.id);
  src.test = relabel_for_profile(test, cfg.profile.id);
  return src;
}

struct GridPoint {
  int H;
  Index m;
  double noise;
  std::uint64_t seed;
};

std::string point_name(const GridPoint& g) {
  return "H" + std::to_string(g.H) + "_m" + std::to_string(g.m) + "_noise" + noise_label(g.noise) + "_seed" +
         std::to_string(g.seed);
}

std::pair<Dataset, Dataset> point_data(const SweepConfig& cfg, const DataSource& src, const GridPoint& g,
                                       std::uint64_t exp) {
  Dataset train, test;
  if (!src.pool) {
    const auto& s = cfg.synthetic;
    const ProfileId id = cfg.profile.id;
    const int classes = id == ProfileId::NoisePartial ? 2 : s.num_classes;
    Rng dist_rng(derive_seed(exp, kDistribution, g.seed));
    const SyntheticClusters clusters(dist_rng, s.input_dim, classes, s.separation);
    Rng sample_rng(derive_seed(exp, kSample, g.m, g.seed));
    Rng test_rng(derive_seed(exp, kTest, g.seed));
    train = relabel_for_profile(clusters.draw(sample_rng, g.m), id);
    test = relabel_for_profile(clusters.draw(test_rng, s.test_size), id);
  } else {
    if (g.m > src.pool->size())
      throw ArgumentError("m = " + std::to_string(g.m) + " exceeds the training pool (" +
                          std::to_string(src.pool->size()) + ")");
    Rng sample_rng(derive_seed(exp, kSample, g.m, g.seed));
    train = subset(*src.pool, g.m, sample_rng);
    test = *src.test;
  }
  if (g.noise > 0.0) {
    Rng noise_rng(derive_seed(exp, kNoise, g.m, std::bit_cast<std::uint64_t>(g.noise), g.seed));
    const bool full = cfg.profile.id == ProfileId::NoiseFull && g.noise == 1.0;
    train = corrupt_labels(train, full ? CorruptionMode::FullRandomSign : CorruptionMode::PartialFlip, g.noise,
                           noise_rng);
  }
  return {std::move(train), std::move(test)};
}

void write_meta(const fs::path& path, const SweepRecord& r, const TrainConfig& tc) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSweepSchemaVersion;
  j["experiment"] = r.experiment;
  j["H"] = r.H;
  j["m"] = r.m;
  j["noise"] = r.noise;
  j["seed"] = r.seed;
  j["point_seed"] = r.point_seed;
  j["loss"] = to_string(tc.loss);
  j["stop_rule"] = r.stop_rule;
  j["status"] = r.status;
  j["epochs"] = r.epochs;
  j["r"] = r.r;
  j["initial_loss"] = r.initial_loss;
  j["initial_loss_bound"] = r.initial_loss_bound;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

SweepRecord run_point(const SweepConfig& cfg, const DataSource& src, const GridPoint& g) {
  const auto start = std::chrono::steady_clock::now();
  const std::string exp_name = experiment_id(cfg);
  const std::uint64_t exp = id_hash(exp_name);

  SweepRecord rec;
  rec.experiment = exp_name;
  rec.profile = to_string(cfg.profile.id);
  rec.dataset = src.name;
  rec.seed = g.seed;
  rec.H = g.H;
  rec.m = g.m;
  rec.noise = g.noise;
  rec.point_seed = derive_seed(exp, kPoint, g.H, g.m, std::bit_cast<std::uint64_t>(g.noise), g.seed);
  rec.loss = to_string(cfg.profile.train.loss);
  rec.stop_rule = to_string(cfg.profile.train.stop);

  try {
    auto [train, test] = point_data(cfg, src, g, exp);
    const NetShape shape{train.input_dim(), g.H, cfg.profile.depth, train.target_dim(), Activation::ReLU};
    // The init depends on (H, replicate) only, so noise and m sweeps share it.
    Rng init_rng(derive_seed(exp, kInit, g.H, g.seed));
    const InitSnapshot z(xavier_init(init_rng, shape));
    NetParams p = z.params();

    TrainConfig tc = cfg.profile.train;
    tc.seed = rec.point_seed;
    const TrainTrace trace = sgd_train(p, z, train, tc);

    rec.status = to_string(trace.status);
    rec.epochs = trace.final().epoch;
    rec.initial_loss = trace.initial_loss();
    rec.final_train_loss = trace.final().train_loss;
    rec.train_error = trace.final().train_error;
    rec.initial_loss_bound = initial_loss_bound(z, train);

    if (p.all_finite()) {
      rec.test_error = evaluate(p, test, tc.loss).error;
      const CapacityReport cap = capacity_report(p, z, train.inputs);
      rec.r = cap.r;
      rec.l2_product = cap.l2_product;
      rec.spectral_product = cap.spectral_product;
      rec.spectral_measure = cap.spectral_measure;
      rec.spectral_from_distance = cap.spectral_from_distance;
      rec.output_bound = cap.output_bound;
      rec.grad_bound_first = cap.gradient_bounds.front();
      rec.grad_bound_last = cap.gradient_bounds.back();
      if (cfg.save_checkpoints) {
        const fs::path rel = fs::path("checkpoints") / point_name(g);
        const fs::path dir = cfg.out_dir / rel;
        fs::create_directories(dir);
        save_checkpoint(z.params(), dir / "init.icap");
        save_checkpoint(p, dir / "final.icap");
        write_meta(dir / "meta.json", rec, tc);
        rec.checkpoint = rel.generic_string();
      }
    } else {
      const double nan = std::nan("");
      rec.test_error = rec.r = rec.l2_product = rec.spectral_product = rec.spectral_measure = nan;
      rec.spectral_from_distance = rec.output_bound = rec.grad_bound_first = rec.grad_bound_last = nan;
    }
  } catch (const std::exception& e) {
    rec.status = "error";
    rec.error = e.what();
  }
  rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace

std::vector<SweepRecord> run_sweep(const SweepConfig& cfg_in, const SweepProgress& progress) {
  SweepConfig cfg = cfg_in;
  cfg.apply_profile_defaults();
  cfg.validate();

  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (!fs::is_directory(cfg.out_dir)) throw IoError("cannot create output directory " + cfg.out_dir.string());
  const fs::path csv_path = cfg.out_dir / "sweep.csv";
  {
    std::ofstream probe(csv_path, std::ios::trunc);
    if (!probe) throw IoError("output not writable: " + csv_path.string());
  }
  const DataSource src = load_source(cfg);

  std::vector<GridPoint> grid;
  for (int H : cfg.H_grid)
    for (Index m : cfg.m_grid)
      for (double noise : cfg.noise_grid)
        for (std::uint64_t seed : cfg.seeds) grid.push_back({H, m, noise, seed});
  std::sort(grid.begin(), grid.end(), [](const GridPoint& a, const GridPoint& b) {
    return std::tie(a.H, a.m, a.noise, a.seed) < std::tie(b.H, b.m, b.noise, b.seed);
  });
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](const GridPoint& a, const GridPoint& b) {
                           return std::tie(a.H, a.m, a.noise, a.seed) == std::tie(b.H, b.m, b.noise, b.seed);
                         }),
             grid.end());

  std::vector<SweepRecord> records(grid.size());
  std::atomic<std::size_t> next{0};
  std::mutex report_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      records[i] = run_point(cfg, src, grid[i]);
      if (progress) {
        std::lock_guard lock(report_mu);
        progress(records[i]);
      }
    }
  };
  const int jobs = std::min<int>(cfg.jobs, static_cast<int>(grid.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ofstream out(csv_path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + csv_path.string());
  write_sweep_csv(out, records);
  if (!out) throw IoError("write failed: " + csv_path.string());
  return records;
}

// Verification ---------------------------------------------------------------

int VerifyReport::failures() const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const BoundCheck& c) { return !c.pass; }));
}

int VerifyReport::exit_code() const {
  if (!errors.empty()) return 3;
  if (checkpoints == 0 || failures() > 0) return 1;
  return 0;
}

namespace {

// Power iteration converges from below, so certificates built from measured
// spectral norms get a small relative allowance.
constexpr double kCertRelTol = 1e-8;

bool dominated(double measured, double bound) { return measured <= bound * (1.0 + kCertRelTol) + 1e-12; }

struct Worst {
  double measured = 0.0;
  double bound = 0.0;
  double ratio = -1.0;
  void add(double m, double b) {
    const double q = b > 0.0 ? m / b : (m > 0.0 ? INFINITY : 0.0);
    if (q > ratio) ratio = q, measured = m, bound = b;
  }
};

void verify_point(const fs::path& dir, const std::string& name, int probes, VerifyReport& rep) {
  const NetParams zp = load_checkpoint(dir / "init.icap");
  const NetParams p = load_checkpoint(dir / "final.icap");
  if (!p.same_shape(zp)) throw FormatError("final.icap", 0, "shape differs from init.icap");
  std::ifstream meta_in(dir / "meta.json");
  if (!meta_in) throw IoError("missing meta.json in " + dir.string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("meta.json", 0, e.what());
  }
  auto field = [&](const char* key) {
    if (!meta.contains(key) || !meta[key].is_number()) throw FormatError("meta.json", 0, std::string("missing ") + key);
    return meta[key].get<double>();
  };
  const double r_recorded = field("r");

  const InitSnapshot z(zp);
  const OutputBoundCert cert(p, z);
  auto push = [&](const char* check, double m, double b, bool pass) {
    rep.checks.push_back({name, check, m, b, pass});
  };

  push("r", std::abs(cert.r() - r_recorded), 1e-9 * std::max(1.0, r_recorded),
       std::abs(cert.r() - r_recorded) <= 1e-9 * std::max(1.0, r_recorded));

  const double sp = spectral_product(p);
  const double sb = spectral_from_distance_bound(z, r_recorded);
  push("spectral", sp, sb, dominated(sp, sb));

  Rng rng(derive_seed(id_hash(name), probes));
  DenseMatrix xs(probes, p.shape.input_dim);
  for (Index i = 0; i < xs.rows(); ++i)
    for (Index j = 0; j < xs.cols(); ++j) xs(i, j) = i == 0 ? 1.0 : rng.uniform();

  Worst out, grad, bias;
  const int k = p.shape.output_dim;
  for (Index i = 0; i < xs.rows(); ++i) {
    const DenseMatrix x = xs.row(i);
    const auto chain = cert.chain(x.norm());
    out.add(forward(p, x.row(0).transpose()).norm(), chain.back());
    for (int j = 0; j < k; ++j) {
      DenseMatrix e = DenseMatrix::Zero(1, k);
      e(0, j) = 1.0;
      const NetParams g = backprop_output_gradient(p, x, e);
      for (int l = 1; l <= p.shape.depth; ++l) {
        const auto li = static_cast<std::size_t>(l - 1);
        grad.add(g.weights[li].norm(), chain[li] * cert.downstream(l));
        bias.add(g.biases[li].norm(), cert.downstream(l));
      }
    }
  }
  push("output", out.measured, out.bound, dominated(out.measured, out.bound));
  push("gradient", grad.measured, grad.bound, dominated(grad.measured, grad.bound));
  push("bias-gradient", bias.measured, bias.bound, dominated(bias.measured, bias.bound));

  if (meta.value("loss", std::string("squared")) == "squared") {
    const double il = field("initial_loss"), ib = field("initial_loss_bound");
    push("initial-loss", il, ib, dominated(il, ib));
  }
}

}  // namespace

VerifyReport verify_bounds(const fs::path& dir, int probes) {
  if (probes < 1) throw ArgumentError("verify_bounds: probes must be >= 1");
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> points;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    const auto fname = entry.path().filename();
    if (fname == "init.icap" || fname == "final.icap" || fname == "meta.json") points.push_back(entry.path().parent_path());
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  VerifyReport rep;
  for (const auto& pdir : points) {
    ++rep.checkpoints;
    const std::string name = fs::relative(pdir, dir).generic_string();
    try {
      verify_point(pdir, name, probes, rep);
    } catch (const std::exception& e) {
      rep.errors.push_back(name + ": " + e.what());
    }
  }
  return rep;
}

void print_verify_report(std::ostream& os, const VerifyReport& rep, bool verbose) {
  if (rep.checkpoints == 0) {
    os << "no checkpoints found\n";
    return;
  }
  for (const auto& c : rep.checks) {
    if (!verbose && c.pass) continue;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-5s %-40s %-14s measured %.6g  bound %.6g\n", c.pass ? "PASS" : "FAIL",
                  c.point.c_str(), c.check.c_str(), c.measured, c.bound);
    os << buf;
  }
  for (const auto& e : rep.errors) os << "ERROR " << e << '\n';
  os << rep.checkpoints << " checkpoints, " << rep.checks.size() << " checks, " << rep.failures() << " failures, "
     << rep.errors.size() << " unreadable\n";
}

std::vector<std::pair<double, double>> mean_by_x(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ArgumentError("mean_by_x: length mismatch");
  std::map<double, std::pair<double, int>> acc;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) continue;
    auto& a = acc[xs[i]];
    a.first += ys[i];
    a.second += 1;
  }
  std::vector<std::pair<double, double>> out;
  for (const auto& [x, a] : acc) out.emplace_back(x, a.first / a.second);
  return out;
}

}  // namespace initcap
