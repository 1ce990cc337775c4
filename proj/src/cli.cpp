#include "msvc/cli.hpp"

#include "msvc/error.hpp"
#include "msvc/gwr.hpp"
#include "msvc/io.hpp"
#include "msvc/model.hpp"
#include "msvc/simulation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <ostream>

namespace msvc {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

struct DataArgs {
  std::string input;
  std::string y;
  std::string x;
  std::string coords = "px,py";
  std::string svc;
  bool svc_given = false;
};

struct FitArgs {
  DataArgs data;
  std::string basis = "auto";
  Eigen::Index knots = 0;
  std::uint64_t seed = 0;
  double range = 0.0;
  double tol = 1e-5;
  int max_sweeps = 30;
  double alpha_min = 0.0;
  double alpha_max = 4.0;
  std::string out = "msvc";
};

struct GwrArgs {
  DataArgs data;
  double bandwidth = 0.0;
  double bw_min = 0.0;
  double bw_max = 0.0;
  int grid_points = 20;
  std::string out = "gwr";
};

struct SimArgs {
  std::string generator = "small";
  Eigen::Index n = 1000;
  Eigen::Index k = 2;
  std::uint64_t seed = 0;
  Eigen::Index knots = 0;
  double noise_ratio = 0.3;
  bool zero_diagonal = false;
  std::string out = "sim";
};

struct BenchArgs {
  std::string methods = "msvc";
  std::string sizes = "1000";
  Eigen::Index k = 2;
  int reps = 20;
  std::uint64_t seed = 1;
  std::string generator = "large";
  Eigen::Index gen_knots = 0;
  std::string basis = "auto";
  Eigen::Index knots = 0;
  int threads = 1;
  std::string out = "benchmark.csv";
};

struct EigenArgs {
  std::string input;
  std::string coords = "px,py";
  std::string basis = "auto";
  Eigen::Index knots = 0;
  std::uint64_t seed = 0;
  double range = 0.0;
  std::string out = "eigen";
};

void add_data_options(CLI::App* cmd, DataArgs& a) {
  cmd->add_option("--input", a.input, "CSV file with a header row")->required();
  cmd->add_option("--y", a.y, "response column")->required();
  cmd->add_option("--x", a.x, "comma separated covariate columns (intercept is implicit)");
  cmd->add_option("--coords", a.coords, "coordinate columns PX,PY")->capture_default_str();
  cmd->add_option("--svc", a.svc, "covariates with varying coefficients (default: all)");
}

BasisChoice parse_basis(const std::string& s) {
  if (s == "exact") return BasisChoice::exact;
  if (s == "nystrom") return BasisChoice::nystrom;
  if (s == "auto") return BasisChoice::automatic;
  throw InputError("--basis must be exact, nystrom or auto, got '" + s + "'");
}

std::pair<std::string, std::string> coord_names(const std::string& spec) {
  const auto names = split_list(spec);
  if (names.size() != 2) throw InputError("--coords needs exactly two column names, got '" + spec + "'");
  return {names[0], names[1]};
}

CoordinateSet read_coords(const Table& t, const std::string& spec, const std::string& source) {
  const auto [px, py] = coord_names(spec);
  Eigen::MatrixX2d p(t.rows(), 2);
  p.col(0) = t.column(px);
  p.col(1) = t.column(py);
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (int c = 0; c < 2; ++c)
      if (!std::isfinite(p(i, c)))
        throw InputError(source + ": row " + std::to_string(i + 2) + ", column '" + (c ? py : px) +
                         "': non-finite value");
  if (p.rows() < 2) throw InputError(source + ": need at least 2 rows");
  return CoordinateSet(p);
}

SpatialDataset read_dataset(const DataArgs& a) {
  const Table t = read_csv_file(a.input);
  SpatialDataset d;
  d.coords = read_coords(t, a.coords, a.input);

  const auto xs = split_list(a.x);
  const Eigen::Index n = t.rows();
  const auto k = static_cast<Eigen::Index>(xs.size()) + 1;
  if (n < k + 2)
    throw InputError(a.input + ": " + std::to_string(n) + " rows is too few for " + std::to_string(k) +
                     " coefficients (need K + 2)");
  d.y = t.column(a.y);
  d.X.resize(n, k);
  d.X.col(0).setOnes();
  d.names = {"intercept"};
  for (std::size_t j = 0; j < xs.size(); ++j) {
    d.X.col(static_cast<Eigen::Index>(j) + 1) = t.column(xs[j]);
    d.names.push_back(xs[j]);
  }
  auto check_finite = [&](const Eigen::VectorXd& v, const std::string& name) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (!std::isfinite(v(i)))
        throw InputError(a.input + ": row " + std::to_string(i + 2) + ", column '" + name + "': non-finite value");
  };
  check_finite(d.y, a.y);
  for (std::size_t j = 0; j < xs.size(); ++j) check_finite(d.X.col(static_cast<Eigen::Index>(j) + 1), xs[j]);

  d.svc.assign(static_cast<std::size_t>(k), true);
  if (a.svc_given) {
    const auto varying = split_list(a.svc);
    for (const auto& v : varying)
      if (std::find(xs.begin(), xs.end(), v) == xs.end())
        throw InputError("--svc column '" + v + "' is not listed in --x");
    for (std::size_t j = 0; j < xs.size(); ++j)
      d.svc[j + 1] = std::find(varying.begin(), varying.end(), xs[j]) != varying.end();
  }
  return d;
}

std::vector<std::string> beta_header(const std::string& coords, const std::vector<std::string>& names) {
  const auto [px, py] = coord_names(coords);
  std::vector<std::string> h = {px, py};
  for (const auto& n : names) h.push_back("beta_" + n);
  return h;
}

Eigen::MatrixXd with_coords(const CoordinateSet& c, const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out(m.rows(), m.cols() + 2);
  out << c.points(), m;
  return out;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

const char* kind_name(BasisKind k) { return k == BasisKind::exact ? "exact" : "nystrom"; }

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const SpatialDataset data = read_dataset(a.data);
  FitOptions opts;
  opts.basis = parse_basis(a.basis);
  opts.knot_count = a.knots;
  opts.seed = a.seed;
  opts.range = a.range;
  opts.sequential.tol = a.tol;
  opts.sequential.max_sweeps = a.max_sweeps;
  opts.sequential.alpha_min = a.alpha_min;
  opts.sequential.alpha_max = a.alpha_max;
  if (a.knots < 0 || a.max_sweeps < 1 || !(a.tol > 0.0) || !(a.alpha_max > a.alpha_min))
    throw InputError("invalid fit options: need knots >= 0, max-sweeps >= 1, tol > 0, alpha-min < alpha-max");

  const SvcFit f = fit(data, opts);
  write_csv_file(a.out + ".beta.csv", beta_header(a.data.coords, data.names), with_coords(data.coords, f.beta));

  json s;
  s["n"] = data.size();
  s["k"] = data.X.cols();
  s["covariates"] = data.names;
  s["svc"] = data.svc;
  s["basis"] = {{"kind", kind_name(f.basis.kind)},
                {"rank", f.basis.rank()},
                {"range", f.basis.r},
                {"knots", f.basis.knots ? json(f.basis.knots->size()) : json(nullptr)}};
  json b = json::object();
  for (Eigen::Index j = 0; j < f.b_hat.size(); ++j) b[data.names[static_cast<std::size_t>(j)]] = f.b_hat(j);
  s["b_hat"] = b;
  json rho = json::object();
  json alpha = json::object();
  json collapsed = json::array();
  for (std::size_t j = 0; j < f.varying.size(); ++j) {
    const std::string& name = data.names[static_cast<std::size_t>(f.varying[j])];
    rho[name] = f.params.rho[j];
    alpha[name] = f.params.alpha[j];
    if (f.params.rho[j] == 0.0) collapsed.push_back(name);
  }
  s["rho"] = rho;
  s["alpha"] = alpha;
  s["collapsed"] = collapsed;
  s["sigma2_hat"] = f.sigma2_hat;
  s["loglik"] = f.loglik;
  s["sweeps"] = f.trace.sweeps;
  s["converged"] = f.trace.converged;
  s["stop_reason"] = f.trace.reason;
  s["times"] = {{"basis_s", f.times.basis_s},
                {"compress_s", f.times.compress_s},
                {"estimate_s", f.times.estimate_s},
                {"total_s", f.times.total()}};
  write_json(a.out + ".summary.json", s);
  out << "wrote " << a.out << ".beta.csv and " << a.out << ".summary.json\n";
  return exit_ok;
}

int cmd_gwr(const GwrArgs& a, std::ostream& out) {
  const SpatialDataset data = read_dataset(a.data);
  if (a.bandwidth < 0.0 || a.bw_min < 0.0 || a.bw_max < 0.0 || a.grid_points < 2)
    throw InputError("bandwidths must be nonnegative and grid-points >= 2");
  const auto start = Clock::now();
  GwrFit g;
  if (a.bandwidth > 0.0) {
    g.bandwidth = a.bandwidth;
    g.cv_score = gwr_cv_score(data, a.bandwidth);
    g.beta = gwr_fit_at(data, a.bandwidth);
  } else {
    BandwidthGrid grid;
    grid.lower = a.bw_min;
    grid.upper = a.bw_max;
    grid.points = a.grid_points;
    g = gwr_fit(data, grid);
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  write_csv_file(a.out + ".beta.csv", beta_header(a.data.coords, data.names), with_coords(data.coords, g.beta));
  json s;
  s["n"] = data.size();
  s["k"] = data.X.cols();
  s["covariates"] = data.names;
  s["bandwidth"] = g.bandwidth;
  s["cv_score"] = g.cv_score;
  s["selected"] = a.bandwidth <= 0.0;
  s["times"] = {{"total_s", elapsed}};
  write_json(a.out + ".summary.json", s);
  out << "wrote " << a.out << ".beta.csv and " << a.out << ".summary.json\n";
  return exit_ok;
}

Generator parse_generator(const std::string& s) {
  if (s == "small") return Generator::small;
  if (s == "large") return Generator::large;
  throw InputError("--generator must be small or large, got '" + s + "'");
}

int cmd_simulate(const SimArgs& a, std::ostream& out) {
  SimConfig c;
  c.generator = parse_generator(a.generator);
  c.n = a.n;
  c.k = a.k;
  c.seed = a.seed;
  c.knot_count = a.knots;
  c.noise_ratio = a.noise_ratio;
  c.zero_diagonal = a.zero_diagonal;
  const SimInstance inst = generate(c);
  const auto& d = inst.dataset;

  std::vector<std::string> header = {"px", "py", "y"};
  Eigen::MatrixXd table(d.size(), 2 + d.X.cols());
  table << d.coords.points(), d.y, d.X.rightCols(d.X.cols() - 1);
  for (Eigen::Index j = 1; j < d.X.cols(); ++j) header.push_back(d.names[static_cast<std::size_t>(j)]);
  write_csv_file(a.out + ".data.csv", header, table);
  write_csv_file(a.out + ".beta.csv", beta_header("px,py", d.names), with_coords(d.coords, inst.true_beta));

  json s;
  s["generator"] = a.generator;
  s["n"] = c.n;
  s["k"] = c.k;
  s["seed"] = c.seed;
  s["sigma2"] = inst.true_sigma2;
  s["r2"] = realized_r2(inst);
  if (c.generator == Generator::large) {
    s["alpha"] = inst.alphas;
    s["generator_rank"] = inst.generator_rank;
  }
  write_json(a.out + ".truth.json", s);
  out << "wrote " << a.out << ".data.csv, " << a.out << ".beta.csv and " << a.out << ".truth.json\n";
  return exit_ok;
}

int cmd_benchmark(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  ExperimentSpec spec;
  spec.methods = split_list(a.methods);
  for (const auto& m : spec.methods)
    if (m != "msvc" && m != "gwr") throw InputError("--methods accepts msvc and gwr, got '" + m + "'");
  spec.sizes.clear();
  for (const auto& s : split_list(a.sizes)) {
    double v = 0.0;
    try {
      v = std::stod(s);
    } catch (const std::exception&) {
      throw InputError("--n: not a number: '" + s + "'");
    }
    if (v < 2 || v != std::floor(v)) throw InputError("--n: sizes must be integers >= 2, got '" + s + "'");
    spec.sizes.push_back(static_cast<Eigen::Index>(v));
  }
  if (a.reps < 0 || a.k < 1 || a.threads < 1) throw InputError("need reps >= 0, k >= 1, threads >= 1");
  spec.k = a.k;
  spec.reps = a.reps;
  spec.seed = a.seed;
  spec.generator = parse_generator(a.generator);
  spec.generator_knots = a.gen_knots;
  spec.fit.basis = parse_basis(a.basis);
  spec.fit.knot_count = a.knots;
  spec.threads = a.threads;

  const auto rows = run_experiment(spec);
  std::ofstream f(a.out);
  if (!f) throw InputError("cannot write '" + a.out + "'");
  f << "method,N,K,rep,alpha_group,rmse,bias,corr,t_basis_s,t_compress_s,t_estimate_s,t_total_s\n";
  for (const auto& r : rows) {
    f << r.method << ',' << r.n << ',' << r.k << ',' << r.rep << ',' << r.alpha_group << ',' << format_double(r.rmse)
      << ',' << format_double(r.bias) << ',' << format_double(r.corr) << ',' << format_double(r.t_basis_s) << ','
      << format_double(r.t_compress_s) << ',' << format_double(r.t_estimate_s) << ',' << format_double(r.t_total_s)
      << '\n';
    if (!r.error.empty()) err << "warning: " << r.method << " N=" << r.n << " rep " << r.rep << ": " << r.error << '\n';
  }
  out << "wrote " << rows.size() << " rows to " << a.out << '\n';
  return exit_ok;
}

int cmd_eigen(const EigenArgs& a, std::ostream& out) {
  const Table t = read_csv_file(a.input);
  const CoordinateSet coords = read_coords(t, a.coords, a.input);
  FitOptions opts;
  opts.basis = parse_basis(a.basis);
  opts.knot_count = a.knots;
  opts.seed = a.seed;
  opts.range = a.range;
  const EigenBasis b = build_basis(coords, opts);

  std::vector<std::string> header;
  for (Eigen::Index l = 0; l < b.rank(); ++l) header.push_back("e" + std::to_string(l + 1));
  write_csv_file(a.out + ".E.csv", header, b.E);
  Eigen::MatrixXd lam(b.rank(), 2);
  for (Eigen::Index l = 0; l < b.rank(); ++l) lam.row(l) << static_cast<double>(l + 1), b.lambda(l);
  write_csv_file(a.out + ".lambda.csv", {"l", "lambda"}, lam);
  out << "wrote " << a.out << ".E.csv and " << a.out << ".lambda.csv (" << kind_name(b.kind) << ", L=" << b.rank()
      << ", r=" << format_double(b.r) << ")\n";
  return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moran eigenvector spatially varying coefficient regression"};
  app.set_config("--config", "", "key = value configuration file; [section] per subcommand");
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "fit the M-SVC model to a CSV dataset");
  add_data_options(fit_cmd, fit_args.data);
  fit_cmd->add_option("--basis", fit_args.basis, "exact, nystrom or auto (exact iff N <= 1000)")->capture_default_str();
  fit_cmd->add_option("--knots", fit_args.knots, "Nystrom knot count (0: min(200, N))");
  fit_cmd->add_option("--seed", fit_args.seed, "k-means seed");
  fit_cmd->add_option("--range", fit_args.range, "kernel range (0: longest MST edge)");
  fit_cmd->add_option("--tol", fit_args.tol, "sweep log-likelihood gain tolerance")->capture_default_str();
  fit_cmd->add_option("--max-sweeps", fit_args.max_sweeps)->capture_default_str();
  fit_cmd->add_option("--alpha-min", fit_args.alpha_min)->capture_default_str();
  fit_cmd->add_option("--alpha-max", fit_args.alpha_max)->capture_default_str();
  fit_cmd->add_option("--out", fit_args.out, "output prefix")->capture_default_str();

  GwrArgs gwr_args;
  auto* gwr_cmd = app.add_subcommand("gwr", "geographically weighted regression with LOO-CV bandwidth");
  add_data_options(gwr_cmd, gwr_args.data);
  gwr_cmd->add_option("--bandwidth", gwr_args.bandwidth, "fixed bandwidth (0: select by cross-validation)");
  gwr_cmd->add_option("--bw-min", gwr_args.bw_min, "grid lower end (0: extent * 1e-3)");
  gwr_cmd->add_option("--bw-max", gwr_args.bw_max, "grid upper end (0: extent * 10)");
  gwr_cmd->add_option("--grid-points", gwr_args.grid_points)->capture_default_str();
  gwr_cmd->add_option("--out", gwr_args.out, "output prefix")->capture_default_str();

  SimArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic dataset with known coefficients");
  sim_cmd->add_option("--generator", sim_args.generator, "small or large")->capture_default_str();
  sim_cmd->add_option("--n", sim_args.n)->capture_default_str();
  sim_cmd->add_option("--k", sim_args.k)->capture_default_str();
  sim_cmd->add_option("--seed", sim_args.seed)->capture_default_str();
  sim_cmd->add_option("--knots", sim_args.knots, "large generator knots (0: min(2000, N))");
  sim_cmd->add_option("--noise-ratio", sim_args.noise_ratio)->capture_default_str();
  sim_cmd->add_flag("--zero-diagonal", sim_args.zero_diagonal, "small generator: zero kernel diagonal");
  sim_cmd->add_option("--out", sim_args.out, "output prefix")->capture_default_str();

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("benchmark", "Monte Carlo comparison of M-SVC and GWR");
  bench_cmd->add_option("--methods", bench_args.methods, "comma list of msvc, gwr")->capture_default_str();
  bench_cmd->add_option("--n", bench_args.sizes, "comma list of sample sizes")->capture_default_str();
  bench_cmd->add_option("--k", bench_args.k)->capture_default_str();
  bench_cmd->add_option("--reps", bench_args.reps)->capture_default_str();
  bench_cmd->add_option("--seed", bench_args.seed)->capture_default_str();
  bench_cmd->add_option("--generator", bench_args.generator)->capture_default_str();
  bench_cmd->add_option("--gen-knots", bench_args.gen_knots, "large generator knots (0: min(2000, N))");
  bench_cmd->add_option("--basis", bench_args.basis)->capture_default_str();
  bench_cmd->add_option("--knots", bench_args.knots, "model knots (0: min(200, N))");
  bench_cmd->add_option("--threads", bench_args.threads)->capture_default_str();
  bench_cmd->add_option("--out", bench_args.out, "report CSV path")->capture_default_str();

  EigenArgs eigen_args;
  auto* eigen_cmd = app.add_subcommand("eigen", "export the Moran eigenbasis of a coordinate table");
  eigen_cmd->add_option("--input", eigen_args.input)->required();
  eigen_cmd->add_option("--coords", eigen_args.coords)->capture_default_str();
  eigen_cmd->add_option("--basis", eigen_args.basis)->capture_default_str();
  eigen_cmd->add_option("--knots", eigen_args.knots);
  eigen_cmd->add_option("--seed", eigen_args.seed);
  eigen_cmd->add_option("--range", eigen_args.range);
  eigen_cmd->add_option("--out", eigen_args.out, "output prefix")->capture_default_str();

  std::vector<const char*> argv = {"msvc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_input;
  }
  fit_args.data.svc_given = fit_cmd->count("--svc") > 0;
  gwr_args.data.svc_given = gwr_cmd->count("--svc") > 0;

  try {
    if (*fit_cmd) return cmd_fit(fit_args, out);
    if (*gwr_cmd) return cmd_gwr(gwr_args, out);
    if (*sim_cmd) return cmd_simulate(sim_args, out);
    if (*bench_cmd) return cmd_benchmark(bench_args, out, err);
    if (*eigen_cmd) return cmd_eigen(eigen_args, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return exit_input;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_input_error(e.code()) ? exit_input : exit_numerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_numerical;
  }
  return exit_input;
}

}  // namespace msvc
