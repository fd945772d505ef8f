#include "cli.hpp"

#include "CLI11.hpp"
#include "conespec/config.hpp"
#include "conespec/embedding.hpp"
#include "conespec/error.hpp"
#include "conespec/graph.hpp"
#include "conespec/parallel.hpp"
#include "conespec/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

namespace conespec::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kPi = std::numbers::pi;

struct StageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runs f, prefixing any failure with the module it came from.
template <class F>
auto stage(const char* module, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(std::string(module) + ": " + to_string(e.kind()) + ": " + e.what());
  } catch (const std::exception& e) {
    throw StageError(std::string(module) + ": " + e.what());
  }
}

struct Options {
  std::string config, preset;
  double gamma = 6.0;
  double laplacian_gamma = 0.0;
  double vartheta = 0.01, width = 0.1;
  std::string partition = "good";
  int n = 2000;
  std::uint64_t seed = 0;
  double epsilon = 0.0, eps_multiplier = 1.0;
  std::string kernel = "tent";
  int clusters = 0;
  int resolution = 256;
  int nodes = 4096;
  std::string out = ".";
  std::vector<double> sigma_grid, r_grid;
  double c_m = 1.0;
  bool refine_s = false;
  std::string points, embedding;
  bool masses = false, fq = false;
  int eigs = 0;
  std::string param;
  std::vector<double> values;
  double sigma = kPi / 8, r = 0.5;
  bool skip_embedding = false;

  // Set when the option was given on the command line.
  bool has_epsilon = false, has_laplacian_gamma = false, has_clusters = false, has_c_m = false;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c == '\n' ? ' ' : c;
  }
  return q + "\"";
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw StageError("cli: cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw StageError("cli: failed writing '" + path.string() + "'");
}

fs::path output_dir(const Options& o) {
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) throw StageError("cli: cannot create output directory '" + o.out + "': " + ec.message());
  return o.out;
}

PresetOptions preset_options(const Options& o) {
  PresetOptions p;
  p.gamma = o.gamma;
  p.vartheta = o.vartheta;
  p.width = o.width;
  p.partition = o.partition;
  return p;
}

struct LoadedModel {
  MixtureModel model;
  json config;
};

std::optional<LoadedModel> load_model(const Options& o) {
  return stage("mixture_models", [&]() -> std::optional<LoadedModel> {
    if (!o.preset.empty()) {
      auto config = preset_config(o.preset, preset_options(o));
      return LoadedModel{parse_model(config), config};
    }
    if (!o.config.empty()) {
      auto config = read_config(o.config);
      return LoadedModel{parse_model(config, fs::path(o.config).parent_path()), config};
    }
    return std::nullopt;
  });
}

const LoadedModel& require_model(const std::optional<LoadedModel>& m, const char* command) {
  if (!m) throw StageError(std::string("cli: ") + command + " needs --config or --preset");
  return *m;
}

double c_m_for(const Options& o, const std::optional<LoadedModel>& m) {
  if (o.has_c_m) return o.c_m;
  if (m && m->config.contains("c_M")) return m->config["c_M"].get<double>();
  return 1.0;
}

double resolve_epsilon(const Options& o, double n, int m) {
  if (o.has_epsilon) return o.epsilon;
  return stage("graph_laplacian", [&] { return default_epsilon(n, m, o.eps_multiplier); });
}

KernelProfile kernel_for(const Options& o, int m) {
  return o.kernel == "indicator" ? KernelProfile::indicator(m) : KernelProfile::tent(m);
}

struct Points {
  Eigen::MatrixXd ambient;
  std::vector<Point> intrinsic;
  int m = 1;
};

Points load_points(const Options& o, const std::optional<LoadedModel>& model, int n, std::uint64_t seed) {
  Points p;
  if (!o.points.empty()) {
    std::ifstream in(o.points);
    if (!in) throw StageError("cli: cannot open points '" + o.points + "'");
    p.ambient = stage("embedding_geometry", [&] { return read_cloud_csv(in, false).points; });
    p.m = model ? model->model.domain().intrinsic_dim() : static_cast<int>(p.ambient.cols());
    return p;
  }
  const auto& lm = require_model(model, "sampling");
  auto s = stage("mixture_models", [&] { return sample(lm.model, n, seed); });
  p.ambient = std::move(s.ambient);
  p.intrinsic = std::move(s.intrinsic);
  p.m = lm.model.domain().intrinsic_dim();
  return p;
}

struct GraphRun {
  double epsilon = 0.0;
  int components = 0;
  EmbeddedCloud cloud;
  EigenResult spectrum;
};

GraphRun graph_embedding(const Options& o, const Points& pts, double epsilon, int n_clusters, int spectrum_count) {
  GraphRun run;
  run.epsilon = epsilon;
  const auto kernel = kernel_for(o, pts.m);
  const auto lap = stage("graph_laplacian", [&] {
    return o.has_laplacian_gamma ? gamma_laplacian(pts.ambient, epsilon, kernel, o.laplacian_gamma)
                                 : kernelized_weights(pts.ambient, epsilon, kernel);
  });
  run.components = lap.components;
  if (lap.components > n_clusters) {
    const double threshold = connecting_epsilon(pts.ambient);
    std::ostringstream msg;
    msg << "graph_laplacian: disconnected: the eps-graph at eps = " << num(epsilon) << " has " << lap.components
        << " connected components but N = " << n_clusters << "; the smallest eps that connects it is "
        << num(threshold) << " (any eps above it)";
    throw StageError(msg.str());
  }
  run.cloud = stage("eigensolver", [&] {
    return discrete_embedding(lap, n_clusters, o.seed, 1e-9, &run.spectrum, spectrum_count);
  });
  return run;
}

std::vector<double> sigma_grid_or(const Options& o, std::vector<double> fallback) {
  const auto& g = o.sigma_grid.empty() ? fallback : o.sigma_grid;
  for (double s : g)
    if (!(s > 0 && s < kPi / 4)) throw StageError("cli: sigma " + num(s) + " is outside (0, pi/4)");
  return g;
}

json cone_json(const ConeStructure& c) {
  json basis = json::array();
  for (Eigen::Index j = 0; j < c.basis.cols(); ++j) {
    std::vector<double> col(c.basis.col(j).data(), c.basis.col(j).data() + c.basis.rows());
    basis.push_back(col);
  }
  return {{"basis", basis}, {"sigma", c.sigma}, {"r", c.r}, {"delta", c.delta}, {"per_cone_mass", c.per_cone_mass}};
}

// ---------------------------------------------------------------- analyze

int cmd_analyze(const Options& o, std::ostream& out) {
  const auto model = load_model(o);
  const auto& lm = require_model(model, "analyze");
  const int k = static_cast<int>(lm.model.size());
  if (o.has_clusters && o.clusters != k)
    throw StageError("cli: --N " + std::to_string(o.clusters) + " differs from the model's " + std::to_string(k) +
                     " components");
  const int m = lm.model.domain().intrinsic_dim();
  ReportOptions ro;
  ro.quadrature.nodes_per_axis = o.nodes;
  ro.resolution = o.resolution;
  ro.sigma_grid = sigma_grid_or(o, {});
  ro.graph = GraphParameters{resolve_epsilon(o, o.n, m), static_cast<double>(o.n), m};
  ro.c_m = c_m_for(o, model);
  ro.refine_s = o.refine_s;
  const auto report = stage("separation_report", [&] { return assemble_report(lm.model, ro); });
  const auto dir = output_dir(o);
  const std::string text = render_text(report);
  write_file(dir / "report.json", to_json(report).dump(2) + "\n");
  write_file(dir / "report.txt", text);
  out << text;
  return report.verdict == SeparationReport::Verdict::indeterminate ? indeterminate : ok;
}

// ---------------------------------------------------------------- embed

int cmd_embed(const Options& o, std::ostream& out) {
  const auto model = load_model(o);
  const auto pts = load_points(o, model, o.n, o.seed);
  const int n = static_cast<int>(pts.ambient.rows());
  const int clusters = o.has_clusters ? o.clusters : model ? static_cast<int>(model->model.size()) : 2;
  const double eps = resolve_epsilon(o, n, pts.m);
  const int count = std::min(n, o.eigs > 0 ? o.eigs : clusters + 4);
  const auto run = graph_embedding(o, pts, eps, clusters, count);

  const auto dir = output_dir(o);
  std::ostringstream csv;
  write_cloud_csv(csv, run.cloud, false);
  write_file(dir / "embedding.csv", csv.str());

  const auto& sp = run.spectrum;
  bool converged = true;
  for (bool c : sp.converged) converged = converged && c;
  json j{{"schema_version", 1},
         {"n", n},
         {"N", clusters},
         {"epsilon", eps},
         {"kernel", o.kernel},
         {"laplacian", o.has_laplacian_gamma ? "gamma" : "kernelized"},
         {"components", run.components},
         {"solver", sp.dense ? "dense" : "lobpcg"},
         {"converged", converged},
         {"eigenvalues", std::vector<double>(sp.values.data(), sp.values.data() + sp.values.size())},
         {"residuals", std::vector<double>(sp.residuals.data(), sp.residuals.data() + sp.residuals.size())}};
  if (o.has_laplacian_gamma) j["laplacian_gamma"] = o.laplacian_gamma;
  write_file(dir / "eigenvalues.json", j.dump(2) + "\n");

  out << "n " << n << ", eps " << num(eps) << ", components " << run.components << "\neigenvalues";
  for (Eigen::Index i = 0; i < sp.values.size(); ++i) out << ' ' << num(sp.values[i]);
  out << "\n";
  return ok;
}

// ---------------------------------------------------------------- cones

int cmd_cones(const Options& o, std::ostream& out) {
  const auto model = load_model(o);
  EmbeddedCloud cloud;
  if (!o.embedding.empty()) {
    std::ifstream in(o.embedding);
    if (!in) throw StageError("cli: cannot open embedding '" + o.embedding + "'");
    cloud = stage("embedding_geometry", [&] { return read_cloud_csv(in, o.masses); });
  } else if (o.fq) {
    const auto& lm = require_model(model, "cones --fq");
    const auto s = stage("mixture_models", [&] { return sample(lm.model, o.n, o.seed); });
    cloud = stage("embedding_geometry", [&] { return fq_embedding(lm.model, s.intrinsic); });
  } else {
    const auto pts = load_points(o, model, o.n, o.seed);
    const int clusters = o.has_clusters ? o.clusters : model ? static_cast<int>(model->model.size()) : 2;
    cloud = graph_embedding(o, pts, resolve_epsilon(o, pts.ambient.rows(), pts.m), clusters, 0).cloud;
  }
  const int clusters = o.has_clusters ? o.clusters : model ? static_cast<int>(model->model.size()) : cloud.dimension();
  if (clusters > cloud.dimension())
    throw StageError("cli: N = " + std::to_string(clusters) + " exceeds the embedding dimension " +
                     std::to_string(cloud.dimension()));

  const auto sigmas = sigma_grid_or(o, {kPi / 16, kPi / 8, 3 * kPi / 16});
  const auto rs = o.r_grid.empty() ? std::vector<double>{0.25, 0.5, 0.75} : o.r_grid;
  for (double r : rs)
    if (!(r >= 0)) throw StageError("cli: r " + num(r) + " is negative");
  const auto found = stage("embedding_geometry", [&] { return detect_cone_structure(cloud, clusters, sigmas, rs); });

  const ConeCandidate* best = nullptr;
  for (const auto& c : found) {
    if (!c.detected) continue;
    if (!best || c.cones.delta < best->cones.delta ||
        (c.cones.delta == best->cones.delta && (c.sigma < best->sigma || (c.sigma == best->sigma && c.r > best->r))))
      best = &c;
  }

  json j{{"schema_version", 1}, {"N", clusters}, {"n", cloud.size()}, {"detected", best != nullptr}};
  if (best) {
    j["best"] = cone_json(best->cones);
  } else {
    j["best"] = nullptr;
    std::string reason = "no (sigma, r) cell produced a cone structure";
    if (!found.empty() && !found.front().failure.empty()) reason += ": " + found.front().failure;
    j["failure"] = reason;
  }
  json cells = json::array();
  std::ostringstream csv;
  csv << "sigma,r,delta,detected,pareto\n";
  for (const auto& c : found) {
    json cell{{"sigma", c.sigma}, {"r", c.r}, {"detected", c.detected}, {"pareto", c.pareto}};
    if (c.detected) {
      cell["delta"] = c.cones.delta;
    } else {
      cell["delta"] = nullptr;
      cell["failure"] = c.failure;
    }
    cells.push_back(cell);
    csv << num(c.sigma) << ',' << num(c.r) << ',' << (c.detected ? num(c.cones.delta) : "") << ','
        << (c.detected ? 1 : 0) << ',' << (c.pareto ? 1 : 0) << '\n';
  }
  j["candidates"] = cells;
  if (model && static_cast<int>(model->model.size()) == clusters) {
    QuadratureSpec q;
    q.nodes_per_axis = o.nodes;
    const double S = stage("mixture_models", [&] { return overlap_parameter(model->model, q).value; });
    json ds = json::array();
    for (double s : sigmas) {
      const auto d = delta_star(S, s, model->model.weights(), clusters);
      ds.push_back({{"sigma", s}, {"value", d.value}, {"gate", d.gate}});
    }
    j["delta_star"] = ds;
  }

  const auto dir = output_dir(o);
  write_file(dir / "cones.json", j.dump(2) + "\n");
  write_file(dir / "pareto.csv", csv.str());
  if (!best) {
    out << "no cone structure detected\n";
    return indeterminate;
  }
  out << "best: sigma " << num(best->sigma) << ", r " << num(best->r) << ", delta " << num(best->cones.delta) << "\n";
  return ok;
}

// ---------------------------------------------------------------- sweep

const char* const kSweepHeader = "key,param,value,S,C,Theta,tau,delta_star,phi,achieved_delta,verdict,error";

std::string sweep_row(const Options& base, const std::string& param, double value) {
  Options o = base;
  std::vector<std::string> errors;
  std::string S, C, Theta, tau_s, dstar, phi_s, achieved, verdict;
  auto value_of = [&](const BoundValue& b, const char* name) {
    if (b.value) return num(*b.value);
    errors.push_back(std::string(name) + ": " + b.reason);
    return std::string();
  };
  try {
    if (param == "gamma") {
      o.preset = "gaussian-pair", o.config.clear(), o.gamma = value;
    } else if (param == "vartheta") {
      o.preset = "dumbbell", o.config.clear(), o.vartheta = value;
    } else if (param == "width") {
      o.preset = "dumbbell", o.config.clear(), o.width = value;
    } else if (param == "epsilon") {
      o.epsilon = value, o.has_epsilon = true;
    } else if (param == "n") {
      o.n = static_cast<int>(value);
    }
    const auto model = load_model(o);
    const auto& lm = require_model(model, "sweep");
    const int m = lm.model.domain().intrinsic_dim();
    const double eps = resolve_epsilon(o, o.n, m);
    ReportOptions ro;
    ro.quadrature.nodes_per_axis = o.nodes;
    ro.resolution = o.resolution;
    ro.sigma_grid = {o.sigma};
    ro.graph = GraphParameters{eps, static_cast<double>(o.n), m};
    ro.c_m = c_m_for(o, model);
    const auto rep = stage("separation_report", [&] { return assemble_report(lm.model, ro); });
    S = value_of(rep.S, "S");
    C = value_of(rep.C, "C");
    Theta = value_of(rep.theta, "Theta");
    tau_s = value_of(rep.tau, "tau");
    if (!rep.rows.empty()) dstar = num(rep.rows.front().delta_star.value);
    phi_s = value_of(rep.phi, "phi");
    verdict = verdict_name(rep.verdict);
    if (!o.skip_embedding) {
      try {
        const auto pts = load_points(o, model, o.n, o.seed);
        const auto run = graph_embedding(o, pts, eps, static_cast<int>(lm.model.size()), 0);
        const auto found = stage("embedding_geometry", [&] {
          return detect_cone_structure(run.cloud, static_cast<int>(lm.model.size()), {o.sigma}, {o.r});
        });
        if (found.front().detected)
          achieved = num(found.front().cones.delta);
        else
          errors.push_back("detection: " + found.front().failure);
      } catch (const std::exception& e) {
        errors.push_back(e.what());
      }
    }
  } catch (const std::exception& e) {
    errors.push_back(e.what());
  }
  std::string err;
  for (const auto& e : errors) err += (err.empty() ? "" : "; ") + e;
  const std::string key = param + "=" + num(value);
  return key + ',' + param + ',' + num(value) + ',' + S + ',' + C + ',' + Theta + ',' + tau_s + ',' + dstar + ',' +
         phi_s + ',' + achieved + ',' + verdict + ',' + csv_field(err) + '\n';
}

int cmd_sweep(const Options& o, std::ostream& out) {
  if (o.values.empty()) throw StageError("cli: --values is empty");
  if (o.values.size() > 10000) throw StageError("cli: sweep grids are limited to 10^4 cells");
  if (!(o.sigma > 0 && o.sigma < kPi / 4)) throw StageError("cli: --sigma must lie in (0, pi/4)");
  if (o.param == "n")
    for (double v : o.values)
      if (!(v >= 2) || v != std::floor(v)) throw StageError("cli: sweep values for n must be integers >= 2");
  if ((o.param == "epsilon" || o.param == "n") && o.preset.empty() && o.config.empty())
    throw StageError("cli: sweeping " + o.param + " needs --config or --preset");

  const auto dir = output_dir(o);
  const fs::path path = dir / "sweep.csv";
  std::set<std::string> done;
  const bool resume = fs::exists(path);
  if (resume) {
    std::ifstream in(path);
    std::string line;
    if (!std::getline(in, line) || line != kSweepHeader)
      throw StageError("cli: '" + path.string() + "' exists with a different header");
    while (std::getline(in, line))
      if (!line.empty()) done.insert(line.substr(0, line.find(',')));
  }
  std::vector<double> pending;
  for (double v : o.values)
    if (!done.count(o.param + "=" + num(v))) pending.push_back(v);

  std::ofstream f(path, std::ios::binary | std::ios::app);
  if (!f) throw StageError("cli: cannot write '" + path.string() + "'");
  if (!resume) f << kSweepHeader << '\n';
  const std::size_t workers = std::max(1, worker_count());
  for (std::size_t start = 0; start < pending.size(); start += workers) {
    const std::size_t count = std::min(workers, pending.size() - start);
    std::vector<std::string> rows(count);
    if (count == 1) {
      rows[0] = sweep_row(o, o.param, pending[start]);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t i = 0; i < count; ++i)
        pool.emplace_back([&, i] { rows[i] = sweep_row(o, o.param, pending[start + i]); });
      for (auto& t : pool) t.join();
    }
    for (const auto& row : rows) f << row;
    f.flush();
  }
  out << "sweep: " << pending.size() << " cells computed, " << o.values.size() - pending.size()
      << " already present in " << path.string() << "\n";
  return ok;
}

// ---------------------------------------------------------------- parser

using Flags = std::vector<std::pair<CLI::Option*, bool*>>;

void add_common(CLI::App* sub, Options& o, Flags& flags) {
  auto* config = sub->add_option("--config", o.config, "Model config (JSON)")->check(CLI::ExistingFile);
  auto* preset = sub->add_option("--preset", o.preset, "Built-in model")->check(CLI::IsMember(preset_names()));
  config->excludes(preset);
  sub->add_option("--gamma", o.gamma, "Offset of the gaussian-pair preset")->check(CLI::NonNegativeNumber);
  flags.emplace_back(sub->add_option("--laplacian-gamma", o.laplacian_gamma, "Use the gamma-normalized Laplacian")
                         ->check(CLI::Range(0.0, 1.0)),
                     &o.has_laplacian_gamma);
  sub->add_option("--vartheta", o.vartheta, "Dumbbell preset bar scale")->check(CLI::PositiveNumber);
  sub->add_option("--width", o.width, "Dumbbell preset crossover width")->check(CLI::PositiveNumber);
  sub->add_option("--partition", o.partition, "Dumbbell preset partition")->check(CLI::IsMember({"good", "bad"}));
  sub->add_option("--n", o.n, "Sample size")->check(CLI::Range(2, 10000000));
  sub->add_option("--seed", o.seed, "Sampling seed");
  auto* eps = sub->add_option("--epsilon", o.epsilon, "Graph length scale")->check(CLI::PositiveNumber);
  auto* mult = sub->add_option("--eps-multiplier", o.eps_multiplier, "Multiplier on the default length scale")
                   ->check(CLI::PositiveNumber);
  eps->excludes(mult);
  flags.emplace_back(eps, &o.has_epsilon);
  sub->add_option("--kernel", o.kernel, "Kernel profile")->check(CLI::IsMember({"tent", "indicator"}));
  flags.emplace_back(sub->add_option("--N", o.clusters, "Number of clusters")->check(CLI::Range(1, 64)), &o.has_clusters);
  sub->add_option("--resolution", o.resolution, "Continuum grid resolution")->check(CLI::Range(8, 65536));
  sub->add_option("--nodes", o.nodes, "Quadrature nodes per axis")->check(CLI::Range(16, 1 << 24));
  sub->add_option("--out", o.out, "Output directory");
  sub->add_option("--sigma-grid", o.sigma_grid, "Cone angles")->delimiter(',');
  sub->add_option("--r-grid", o.r_grid, "Cone radii")->delimiter(',');
  flags.emplace_back(sub->add_option("--c-m", o.c_m, "Constant c_M in phi")->check(CLI::PositiveNumber), &o.has_c_m);
  sub->add_flag("--refine-s", o.refine_s, "Search s instead of the midpoint");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Spectral separation certificates for mixture models"};
  app.name("conespec");
  app.require_subcommand(1, 1);
  Flags flags;

  auto* analyze = app.add_subcommand("analyze", "Separation report for a model");
  add_common(analyze, o, flags);

  auto* embed = app.add_subcommand("embed", "Graph Laplacian embedding of a sample");
  add_common(embed, o, flags);
  embed->add_option("--points", o.points, "Points CSV instead of sampling")->check(CLI::ExistingFile);
  embed->add_option("--eigs", o.eigs, "Eigenvalues to report")->check(CLI::Range(1, 1000));

  auto* cones = app.add_subcommand("cones", "Cone detection on an embedding");
  add_common(cones, o, flags);
  cones->add_option("--points", o.points, "Points CSV instead of sampling")->check(CLI::ExistingFile);
  auto* emb = cones->add_option("--embedding", o.embedding, "Embedding CSV")->check(CLI::ExistingFile);
  cones->add_flag("--masses", o.masses, "Last embedding column holds masses");
  cones->add_flag("--fq", o.fq, "Embed with the model's likelihood map")->excludes(emb);

  auto* sweep = app.add_subcommand("sweep", "Parameters and certificates over a grid");
  add_common(sweep, o, flags);
  sweep->add_option("--param", o.param, "Swept parameter")
      ->required()
      ->check(CLI::IsMember({"gamma", "vartheta", "width", "epsilon", "n"}));
  sweep->add_option("--values", o.values, "Grid values")->required()->delimiter(',');
  sweep->add_option("--sigma", o.sigma, "Cone angle for delta* and detection");
  sweep->add_option("--r", o.r, "Cone radius for detection")->check(CLI::NonNegativeNumber);
  sweep->add_flag("--skip-embedding", o.skip_embedding, "Leave achieved delta empty");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : failure;
  }
  for (auto [opt, given] : flags)
    if (opt->count()) *given = true;

  try {
    if (analyze->parsed()) return cmd_analyze(o, out);
    if (embed->parsed()) return cmd_embed(o, out);
    if (cones->parsed()) return cmd_cones(o, out);
    return cmd_sweep(o, out);
  } catch (const std::exception& e) {
    err << "conespec: " << e.what() << "\n";
    return failure;
  }
}

}  // namespace conespec::cli
