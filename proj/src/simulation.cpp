#include "msvc/simulation.hpp"

#include "msvc/error.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>
#include <tuple>

namespace msvc {

namespace {

using Clock = std::chrono::steady_clock;

struct Draws {
  std::mt19937_64 rng;
  std::normal_distribution<double> normal{0.0, 1.0};
  explicit Draws(std::uint64_t seed) : rng(seed) {}
  double operator()() { return normal(rng); }
  Eigen::VectorXd vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
    return v;
  }
};

void check_config(const SimConfig& c) {
  if (c.k < 1) throw Error(ErrorCode::InvalidArgument, "K must be at least 1");
  if (c.n < c.k + 1) throw Error(ErrorCode::InsufficientData, "N must exceed K");
  if (!(c.noise_ratio > 0.0)) throw Error(ErrorCode::InvalidArgument, "noise ratio must be positive");
}

// Coordinates and covariates shared by both generators: x_1 = 1, others N(0, 1).
void draw_sites(Draws& draw, const SimConfig& c, SpatialDataset& data) {
  Eigen::MatrixX2d p(c.n, 2);
  for (Eigen::Index i = 0; i < c.n; ++i) {
    p(i, 0) = draw();
    p(i, 1) = draw();
  }
  data.coords = CoordinateSet(p);
  data.X.resize(c.n, c.k);
  data.X.col(0).setOnes();
  for (Eigen::Index j = 1; j < c.k; ++j) data.X.col(j) = draw.vector(c.n);
  data.svc.assign(static_cast<std::size_t>(c.k), true);
  data.names.clear();
  for (Eigen::Index j = 0; j < c.k; ++j) data.names.push_back(j == 0 ? "intercept" : "x" + std::to_string(j + 1));
}

double sample_variance(const Eigen::VectorXd& v) {
  return (v.array() - v.mean()).square().mean();
}

void add_noise(Draws& draw, const SimConfig& c, SimInstance& out) {
  const Eigen::VectorXd signal = (out.dataset.X.array() * out.true_beta.array()).rowwise().sum();
  out.true_sigma2 = c.noise_ratio * sample_variance(signal);
  out.dataset.y = signal + std::sqrt(out.true_sigma2) * draw.vector(c.n);
}

}  // namespace

std::vector<double> default_alphas(Eigen::Index k) {
  std::vector<double> a(static_cast<std::size_t>(k), 0.5);
  for (Eigen::Index j = 0; j < (k + 1) / 2; ++j) a[static_cast<std::size_t>(j)] = 2.0;
  return a;
}

SimInstance gen_small(const SimConfig& config) {
  check_config(config);
  if (config.n > config.small_size_guard)
    throw Error(ErrorCode::SizeGuardExceeded,
                "small generator limited to N <= " + std::to_string(config.small_size_guard));
  Draws draw(config.seed);
  SimInstance out;
  draw_sites(draw, config, out.dataset);

  Eigen::MatrixXd c = proximity(out.dataset.coords, out.dataset.coords, 1.0,
                                config.zero_diagonal ? DiagonalPolicy::zero : DiagonalPolicy::kernel);
  c.array().colwise() /= c.rowwise().sum().array();

  out.true_beta.resize(config.n, config.k);
  for (Eigen::Index j = 0; j < config.k; ++j)
    out.true_beta.col(j) = (c * draw.vector(config.n)).array() + 1.0;
  add_noise(draw, config, out);
  return out;
}

SimInstance gen_large(const SimConfig& config) {
  check_config(config);
  std::vector<double> alphas = config.alphas.empty() ? default_alphas(config.k) : config.alphas;
  if (static_cast<Eigen::Index>(alphas.size()) != config.k)
    throw Error(ErrorCode::DimensionMismatch, "need one alpha per coefficient");
  const Eigen::Index knots = config.knot_count > 0 ? config.knot_count : std::min<Eigen::Index>(2000, config.n);
  if (knots > 2000) throw Error(ErrorCode::InvalidKnotCount, "generator knot count above 2000");

  Draws draw(config.seed);
  SimInstance out;
  out.alphas = alphas;
  draw_sites(draw, config, out.dataset);

  BasisOptions opts;
  opts.max_rank = 2000;
  opts.knot_guard = 2000;
  const KnotSet knot_set = kmeans_knots(out.dataset.coords, knots, config.seed);
  const EigenBasis basis = nystrom_basis(out.dataset.coords, knot_set, 1.0, opts);
  out.generator_rank = basis.rank();

  out.true_beta.resize(config.n, config.k);
  for (Eigen::Index j = 0; j < config.k; ++j) {
    const Eigen::VectorXd sd = basis.lambda.array().pow(0.5 * alphas[static_cast<std::size_t>(j)]);
    const Eigen::VectorXd gamma = sd.cwiseProduct(draw.vector(basis.rank()));
    out.true_beta.col(j) = (basis.E * gamma).array() + 1.0;
  }
  add_noise(draw, config, out);
  return out;
}

SimInstance generate(const SimConfig& config) {
  return config.generator == Generator::small ? gen_small(config) : gen_large(config);
}

double realized_r2(const SimInstance& instance) {
  const auto& d = instance.dataset;
  const Eigen::VectorXd signal = (d.X.array() * instance.true_beta.array()).rowwise().sum();
  const Eigen::VectorXd noise = d.y - signal;
  return 1.0 - sample_variance(noise) / sample_variance(d.y);
}

namespace {
void check_shapes(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.size() == 0)
    throw Error(ErrorCode::ShapeMismatch, "truth and estimate must have the same nonempty shape");
}
}  // namespace

double rmse(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate) {
  check_shapes(truth, estimate);
  return std::sqrt((truth - estimate).array().square().mean());
}

double bias(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate) {
  check_shapes(truth, estimate);
  return (truth - estimate).mean();
}

double corr(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate) {
  check_shapes(truth, estimate);
  const Eigen::ArrayXXd a = truth.array() - truth.mean();
  const Eigen::ArrayXXd b = estimate.array() - estimate.mean();
  const double den = std::sqrt((a * a).sum() * (b * b).sum());
  if (!(den > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return (a * b).sum() / den;
}

std::uint64_t replication_seed(std::uint64_t base, std::size_t size_index, int rep) {
  return base + 1000003ULL * size_index + 7919ULL * static_cast<std::uint64_t>(rep);
}

namespace {

std::string group_label(double alpha) {
  std::ostringstream s;
  s << alpha;
  return s.str();
}

// Coefficient columns grouped by their generating alpha ("all" for the small generator).
std::vector<std::pair<std::string, std::vector<Eigen::Index>>> alpha_groups(const SimInstance& inst) {
  std::vector<std::pair<std::string, std::vector<Eigen::Index>>> groups;
  const Eigen::Index k = inst.true_beta.cols();
  if (inst.alphas.empty()) {
    std::vector<Eigen::Index> all;
    for (Eigen::Index j = 0; j < k; ++j) all.push_back(j);
    groups.emplace_back("all", all);
    return groups;
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    const std::string label = group_label(inst.alphas[static_cast<std::size_t>(j)]);
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == label; });
    if (it == groups.end()) groups.emplace_back(label, std::vector<Eigen::Index>{j});
    else it->second.push_back(j);
  }
  return groups;
}

// rmse and bias pooled over the group's columns; corr averaged over columns.
void score_group(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& est, const std::vector<Eigen::Index>& cols,
                 ReportRow& row) {
  const Eigen::MatrixXd t = truth(Eigen::all, cols);
  const Eigen::MatrixXd e = est(Eigen::all, cols);
  row.rmse = rmse(t, e);
  row.bias = bias(t, e);
  double c = 0.0;
  for (Eigen::Index j = 0; j < t.cols(); ++j) c += corr(t.col(j), e.col(j));
  row.corr = c / static_cast<double>(t.cols());
}

struct Task {
  std::size_t size_index;
  int rep;
};

std::vector<ReportRow> run_task(const ExperimentSpec& spec, const Task& task) {
  const Eigen::Index n = spec.sizes[task.size_index];
  SimConfig config;
  config.n = n;
  config.k = spec.k;
  config.seed = replication_seed(spec.seed, task.size_index, task.rep);
  config.generator = spec.generator;
  config.knot_count = spec.generator_knots;

  std::vector<ReportRow> rows;
  auto failed = [&](const std::string& method, const std::string& what) {
    ReportRow row;
    row.method = method;
    row.n = n;
    row.k = spec.k;
    row.rep = task.rep;
    row.alpha_group = "all";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.rmse = row.bias = row.corr = nan;
    row.t_basis_s = row.t_compress_s = row.t_estimate_s = row.t_total_s = nan;
    row.error = what;
    rows.push_back(row);
  };

  SimInstance inst;
  try {
    inst = generate(config);
  } catch (const std::exception& e) {
    for (const auto& m : spec.methods) failed(m, e.what());
    return rows;
  }

  for (const auto& method : spec.methods) {
    Eigen::MatrixXd est;
    StageTimes times;
    try {
      if (method == "msvc") {
        FitOptions opts = spec.fit;
        opts.seed = config.seed;
        const SvcFit f = fit(inst.dataset, opts);
        est = f.beta;
        times = f.times;
      } else if (method == "gwr") {
        const auto start = Clock::now();
        est = gwr_fit(inst.dataset, spec.gwr_grid).beta;
        times.estimate_s = std::chrono::duration<double>(Clock::now() - start).count();
      } else {
        throw Error(ErrorCode::InvalidArgument, "unknown method " + method);
      }
    } catch (const std::exception& e) {
      failed(method, e.what());
      continue;
    }
    for (const auto& [label, cols] : alpha_groups(inst)) {
      ReportRow row;
      row.method = method;
      row.n = n;
      row.k = spec.k;
      row.rep = task.rep;
      row.alpha_group = label;
      score_group(inst.true_beta, est, cols, row);
      row.t_basis_s = times.basis_s;
      row.t_compress_s = times.compress_s;
      row.t_estimate_s = times.estimate_s;
      row.t_total_s = times.total();
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace

std::vector<ReportRow> run_experiment(const ExperimentSpec& spec) {
  std::vector<ReportRow> rows;
  if (spec.methods.empty()) return rows;
  for (const auto& m : spec.methods)
    if (m != "msvc" && m != "gwr") throw Error(ErrorCode::InvalidArgument, "unknown method " + m);
  if (spec.reps < 0) throw Error(ErrorCode::InvalidArgument, "reps must be nonnegative");

  std::vector<Task> tasks;
  for (std::size_t s = 0; s < spec.sizes.size(); ++s)
    for (int r = 0; r < spec.reps; ++r) tasks.push_back({s, r});

  std::mutex mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      std::vector<ReportRow> part = run_task(spec, tasks[i]);
      const std::lock_guard<std::mutex> lock(mutex);
      rows.insert(rows.end(), part.begin(), part.end());
    }
  };
  const int threads = std::max(1, std::min<int>(spec.threads, static_cast<int>(tasks.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return std::tie(a.method, a.n, a.rep, a.alpha_group) < std::tie(b.method, b.n, b.rep, b.alpha_group);
  });
  return rows;
}

}  // namespace msvc
