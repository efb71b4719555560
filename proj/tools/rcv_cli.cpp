// rcv: command-line front end for the realized copula of volatility.

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rcv/copula_models.hpp"
#include "rcv/errors.hpp"
#include "rcv/inference.hpp"
#include "rcv/io.hpp"
#include "rcv/occupation.hpp"
#include "rcv/spot_vol.hpp"
#include "rcv/study.hpp"
#include "rcv/sv_simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rcv;

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  int threads = 0;
  bool overwrite = false;
  std::string resolved_config;
};

struct PanelInput {
  std::string input;
  int obs_per_day = 390;
  std::string session_start = "09:30";
  std::string session_end = "16:00";
  bool keep_short_days = false;
  std::optional<int> block_size;
  std::optional<double> truncation_scale;
  double truncation_exponent = 0.49;

  void add(CLI::App* cmd) {
    cmd->add_option("--input", input, "Tick or panel CSV")->required();
    cmd->add_option("--obs-per-day", obs_per_day, "Equidistant observations per session")->capture_default_str();
    cmd->add_option("--session-start", session_start)->capture_default_str();
    cmd->add_option("--session-end", session_end)->capture_default_str();
    cmd->add_flag("--keep-short-days", keep_short_days, "Keep days that end before the session close");
    cmd->add_option("--block-size", block_size, "Increments per spot-variance block (default by frequency)");
    cmd->add_option("--truncation-scale", truncation_scale, "Fixed alpha (default: per-day bipower proxy)");
    cmd->add_option("--truncation-exponent", truncation_exponent)->capture_default_str();
  }

  IngestReport ingest() const {
    IngestOptions options;
    options.session_start = session_start;
    options.session_end = session_end;
    options.obs_per_day = obs_per_day;
    options.drop_short_days = !keep_short_days;
    return ingest_ticks_file(input, options);
  }

  SpotVolConfig spot_config() const {
    SpotVolConfig config;
    config.block_size = block_size.value_or(default_block_size(obs_per_day));
    config.truncation_scale = truncation_scale;
    config.truncation_exponent = truncation_exponent;
    return config;
  }
};

class Outputs {
public:
  explicit Outputs(const Common& common) : common_(common) {
    fs::create_directories(common.out_dir);
  }

  std::ofstream open(const std::string& name) {
    const fs::path path = fs::path(common_.out_dir) / name;
    if (fs::exists(path) && !common_.overwrite) {
      throw ConfigError("output '" + path.string() + "' exists; pass --overwrite to replace it");
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    written_.push_back(path.string());
    return out;
  }

  std::ofstream open_csv(const std::string& name) {
    auto out = open(name);
    out << comment_block(common_.resolved_config);
    return out;
  }

  void summary(const std::string& name, json body) {
    body["config"] = common_.resolved_config;
    body["outputs"] = written_;
    auto out = open(name);
    out << std::setw(2) << body << '\n';
    for (const auto& p : written_) std::cout << p << '\n';
  }

private:
  const Common& common_;
  std::vector<std::string> written_;
};

std::uint64_t require_seed(const Common& common, const char* command) {
  if (!common.seed) throw ConfigError(std::string("seed: ") + command + " needs an explicit --seed");
  return *common.seed;
}

// Global keys plus the active subcommand's, without unset optionals.
std::string resolved_config(const CLI::App& app, const std::string& active) {
  std::istringstream in(app.config_to_str(true, false));
  std::string line;
  std::string out;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos || line.substr(eq + 1) == "\"\"") continue;
    const auto dot = line.find('.');
    if (dot != std::string::npos && dot < eq && line.compare(0, dot, active) != 0) continue;
    // Defaults of vector options come back as quoted "[a,b]"; echo them as arrays
    // in the same form CLI11 uses for values given on the command line.
    std::string value = line.substr(eq + 1);
    if (value.size() > 3 && value.starts_with("\"[") && value.ends_with("]\"")) {
      std::string array;
      for (char c : value.substr(1, value.size() - 2)) {
        array += c;
        if (c == ',') array += ' ';
      }
      line = line.substr(0, eq + 1) + array;
    }
    out += line + '\n';
  }
  return out;
}

CopulaModel parse_model(const std::string& family, double param) {
  return CopulaModel::make(parse_family(family), param);
}

json model_json(const CopulaModel& m) {
  return {{"family", to_string(m.family())}, {"param", m.param()}, {"kendall_tau", m.kendall_tau()},
          {"lambda_lower", m.tail_params().lower}, {"lambda_upper", m.tail_params().upper}};
}

json ingest_json(const IngestReport& r) {
  return {{"days", r.panel.days()},
          {"obs_per_day", r.panel.obs_per_day},
          {"assets", {r.panel.assets[0], r.panel.assets[1]}},
          {"ticks_read", r.ticks_read},
          {"ticks_outside_session", r.ticks_outside_session},
          {"empty_days_dropped", r.empty_days_dropped},
          {"short_days_dropped", r.short_days_dropped}};
}

std::vector<double> parse_grid(const std::string& spec) {
  if (spec == "inference") return inference_lattice();
  if (spec == "interior") return interior_lattice();
  std::vector<double> out;
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("grid: cannot parse '" + item + "'");
    }
  }
  if (out.empty() || !std::is_sorted(out.begin(), out.end())) throw ConfigError("grid: need increasing values");
  return out;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string family = "gumbel";
  double param = 2.0;
  int days = 500;
  int inner_steps = 23400;
  int obs_per_day = 390;
  double kappa = 10.0;
  double leverage = -std::sqrt(0.5);
  double price_correlation = 0.0;
  bool true_variance = false;
};

void run_simulate(const Common& common, const SimulateArgs& a) {
  SimConfig config;
  config.copula = parse_model(a.family, a.param);
  config.days = a.days;
  config.inner_steps_per_day = a.inner_steps;
  config.obs_per_day = a.obs_per_day;
  config.mean_reversion = a.kappa;
  config.leverage = a.leverage;
  config.price_shock_correlation = a.price_correlation;
  config.seed = require_seed(common, "simulate");
  config.validate();

  const SimPath path = simulate(config);
  const HighFreqPanel panel = observe(path, a.obs_per_day);
  Outputs out(common);
  {
    auto f = out.open_csv("ticks.csv");
    write_panel_csv(f, panel);
  }
  if (a.true_variance) {
    auto f = out.open_csv("true_variance.csv");
    const int stride = a.inner_steps / a.obs_per_day;
    f << "day,index,variance_" << panel.assets[0] << ",variance_" << panel.assets[1] << '\n' << std::setprecision(12);
    for (std::size_t j = 0; j < path.inner_points(); j += static_cast<std::size_t>(stride)) {
      const std::size_t day = j / static_cast<std::size_t>(a.inner_steps);
      f << day << ',' << (j % static_cast<std::size_t>(a.inner_steps)) / static_cast<std::size_t>(stride) << ','
        << path.variance[0][j] << ',' << path.variance[1][j] << '\n';
    }
  }
  out.summary("simulate.json", {{"command", "simulate"},
                                {"copula", model_json(config.copula)},
                                {"days", a.days},
                                {"inner_steps_per_day", a.inner_steps},
                                {"obs_per_day", a.obs_per_day},
                                {"seed", config.seed},
                                {"acceptance_rate", path.acceptance_rate}});
}

// ---------------------------------------------------------------- spotvol

void run_spotvol(const Common& common, const PanelInput& in) {
  const IngestReport report = in.ingest();
  const SpotVolConfig spot = in.spot_config();
  const SpotVolPath path = spot_variance_path(report.panel, spot);
  Outputs out(common);
  {
    auto f = out.open_csv("spot_vol.csv");
    f << "day,start,end,spot_" << report.panel.assets[0] << ",spot_" << report.panel.assets[1] << ",truncated_"
      << report.panel.assets[0] << ",truncated_" << report.panel.assets[1] << '\n'
      << std::setprecision(12);
    for (const auto& b : path.blocks) {
      f << report.panel.day_labels[b.day] << ',' << b.start << ',' << b.end << ',' << b.value[0] << ','
        << b.value[1] << ',' << b.truncated[0] << ',' << b.truncated[1] << '\n';
    }
  }
  out.summary("spotvol.json", {{"command", "spotvol"},
                               {"panel", ingest_json(report)},
                               {"block_size", spot.block_size},
                               {"blocks", path.blocks.size()},
                               {"truncated", {path.total_truncated(0), path.total_truncated(1)}}});
}

// ---------------------------------------------------------------- copula

void run_copula(const Common& common, const PanelInput& in, double step) {
  const IngestReport report = in.ingest();
  const VolPairSeries series = series_from_spot(spot_variance_path(report.panel, in.spot_config()));
  std::vector<double> grid = interior_lattice(step);
  grid.push_back(1.0);
  const EmpiricalCopulaGrid copula = realized_copula(series, grid, grid);
  const PseudoObservations fit_obs = fitting_observations(series);
  const MleFit gumbel = fit_mle(fit_obs, CopulaFamily::kGumbel);
  const MleFit clayton = fit_mle(fit_obs, CopulaFamily::kClayton);

  Outputs out(common);
  {
    auto f = out.open_csv("copula_grid.csv");
    write_copula_matrix(f, copula);
  }
  out.summary("copula.json", {{"command", "copula"},
                              {"panel", ingest_json(report)},
                              {"cells", series.size()},
                              {"span_days", series.span()},
                              {"kendall_tau", kendall_tau_sample(fit_obs)},
                              {"kendall_tau_adjusted", kendall_tau_sample(fit_obs, true)},
                              {"mle_gumbel", {{"theta", gumbel.param}, {"log_likelihood", gumbel.log_likelihood},
                                              {"lambda_upper", gumbel.model().tail_params().upper}}},
                              {"mle_clayton", {{"alpha", clayton.param}, {"log_likelihood", clayton.log_likelihood},
                                               {"lambda_lower", clayton.model().tail_params().lower}}}});
}

// ---------------------------------------------------------------- gof / band

struct InferenceArgs {
  double xi = kDefaultXi;
  std::optional<double> bandwidth;
  int draws = 5000;
  std::string grid = "inference";

  void add(CLI::App* cmd) {
    cmd->add_option("--xi", xi, "Lag horizon exponent in (0, 1/3)")->capture_default_str();
    cmd->add_option("--bandwidth", bandwidth, "Kernel bandwidth h (default max(0.05, T^-1/6))");
    cmd->add_option("--draws", draws, "Monte Carlo draws")->capture_default_str();
    cmd->add_option("--grid", grid, "inference, interior, or comma-separated levels")->capture_default_str();
  }
};

struct GofArgs {
  std::string family = "gumbel";
  double param = 2.0;
  bool composite = false;
  std::optional<double> split;
};

void run_gof(const Common& common, const PanelInput& in, const InferenceArgs& inf, const GofArgs& g) {
  const IngestReport report = in.ingest();
  const VolPairSeries series = series_from_spot(spot_variance_path(report.panel, in.spot_config()));
  const std::vector<double> grid = parse_grid(inf.grid);
  GofOptions options;
  options.xi = inf.xi;
  options.bandwidth = inf.bandwidth;
  options.draws = inf.draws;
  options.seed = require_seed(common, "gof");
  options.composite = g.composite;
  options.split_exponent = g.split;
  const CopulaModel null_model =
      g.composite ? CopulaModel::make(parse_family(g.family), parse_family(g.family) == CopulaFamily::kGumbel ? 1.0 : 0.0)
                  : parse_model(g.family, g.param);
  const GofResult result = gof_test(series, grid, grid, null_model, options);

  Outputs out(common);
  {
    auto f = out.open_csv("gof_grid.csv");
    f << "u,v,estimate,null\n" << std::setprecision(12);
    for (std::size_t k = 0; k < result.points.size(); ++k) {
      f << result.points[k].x << ',' << result.points[k].y << ',' << result.estimate[k] << ','
        << result.null_values[k] << '\n';
    }
  }
  {
    auto f = out.open_csv("gof_eigenvalues.csv");
    f << "k,eigenvalue\n" << std::setprecision(15);
    for (std::size_t k = 0; k < result.eigenvalues.size(); ++k) f << k + 1 << ',' << result.eigenvalues[k] << '\n';
  }
  json body{{"command", "gof"},
            {"panel", ingest_json(report)},
            {"null", result.null_description},
            {"statistic", result.statistic},
            {"p_value", result.p_value},
            {"draws", result.draws},
            {"seed", result.seed},
            {"span_days", result.span},
            {"eigenvalues_retained", result.eigenvalues.size()}};
  if (result.fit) body["fitted_param"] = result.fit->param;
  out.summary("gof.json", body);
}

void run_band(const Common& common, const PanelInput& in, const InferenceArgs& inf, double level) {
  const IngestReport report = in.ingest();
  const VolPairSeries series = series_from_spot(spot_variance_path(report.panel, in.spot_config()));
  const std::vector<double> grid = parse_grid(inf.grid);
  const EmpiricalCopulaGrid estimate = realized_copula(series, grid, grid);
  AvarCOptions options;
  options.xi = inf.xi;
  options.bandwidth = inf.bandwidth;
  const GridCovariance cov = avar_C(series, grid_pairs(grid, grid), options);
  const BandResult band =
      uniform_band(estimate.values, cov, series.span(), level, inf.draws, require_seed(common, "band"));

  Outputs out(common);
  {
    auto f = out.open_csv("band.csv");
    f << "u,v,estimate,lower,upper,avar\n" << std::setprecision(12);
    for (std::size_t k = 0; k < band.points.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      f << band.points[k].x << ',' << band.points[k].y << ',' << band.estimate[k] << ',' << band.lower[k] << ','
        << band.upper[k] << ',' << cov.matrix(i, i) << '\n';
    }
  }
  out.summary("band.json", {{"command", "band"},
                            {"panel", ingest_json(report)},
                            {"level", band.level},
                            {"quantile", band.quantile},
                            {"half_width", band.half_width},
                            {"draws", band.draws},
                            {"seed", band.seed},
                            {"bandwidth", cov.bandwidth},
                            {"xi", cov.xi},
                            {"nonpositive_diagonal", cov.has_nonpositive_diagonal()}});
}

// ---------------------------------------------------------------- mc-study

struct StudyArgs {
  std::string study = "all";
  int replications = 200;
  std::vector<int> obs_per_day{78};
  std::vector<int> spans{250, 500};
  int inner_steps = 390;
  int draws = 5000;
  double level = 0.95;
  int pivot_obs_per_day = 390;
  int pivot_days = 500;
  std::vector<double> pivot_levels{0.10, 0.25, 0.50, 0.75, 0.90};
};

void run_mc_study(const Common& common, const StudyArgs& a) {
  const std::vector<std::string> studies{"all", "rmse", "pivot", "size", "coverage"};
  if (std::find(studies.begin(), studies.end(), a.study) == studies.end()) {
    throw ConfigError("study: expected all, rmse, pivot, size or coverage");
  }
  const bool all = a.study == "all";
  StudyDesign design;
  design.base.inner_steps_per_day = a.inner_steps;
  design.base.seed = require_seed(common, "mc-study");
  design.replications = a.replications;
  design.base.validate();
  json body{{"command", "mc-study"}, {"replications", a.replications}, {"inner_steps_per_day", a.inner_steps}};
  Outputs out(common);

  if (all || a.study == "rmse") {
    const RmseStudy r = rmse_study(design, a.obs_per_day, a.spans);
    auto f = out.open_csv("rmse.csv");
    f << "estimator,obs_per_day,days,rmse,sd,replications\n" << std::setprecision(10);
    for (const auto& row : r.rows) {
      f << row.estimator << ',' << row.obs_per_day << ',' << row.days << ',' << row.rmse << ',' << row.sd << ','
        << row.replications << '\n';
    }
  }
  if (all || a.study == "pivot") {
    const PivotStudy p = pivot_study(design, a.pivot_obs_per_day, a.pivot_days, a.pivot_levels);
    auto f = out.open_csv("pivot_summary.csv");
    f << "u,v,mean,sd,count\n" << std::setprecision(10);
    for (const auto& pt : p.points) f << pt.u << ',' << pt.v << ',' << pt.mean << ',' << pt.sd << ',' << pt.z.size() << '\n';
    auto d = out.open_csv("pivot_density.csv");
    d << "u,x,density,normal\n" << std::setprecision(10);
    auto q = out.open_csv("pivot_qq.csv");
    q << "u,probability,normal,sample\n" << std::setprecision(10);
    for (const auto& pt : p.points) {
      if (pt.z.size() < 2) continue;
      for (const auto& row : density_table(pt.z)) d << pt.u << ',' << row.x << ',' << row.density << ',' << row.normal << '\n';
      for (const auto& row : qq_table(pt.z)) q << pt.u << ',' << row.probability << ',' << row.normal << ',' << row.sample << '\n';
    }
    body["pivot_skipped"] = p.skipped;
  }
  if (all || a.study == "size") {
    const std::vector<double> grid = inference_lattice();
    GofOptions options;
    options.draws = a.draws;
    options.seed = design.base.seed;
    const std::vector<std::pair<std::string, CopulaModel>> truths{{"gumbel(2)", CopulaModel::gumbel(2.0)},
                                                                  {"independence", CopulaModel::independence()},
                                                                  {"clayton(2)", CopulaModel::clayton(2.0)},
                                                                  {"gumbel(1.5)", CopulaModel::gumbel(1.5)}};
    auto f = out.open_csv("size_power.csv");
    f << "truth,null,obs_per_day,days,replications,failed,reject_1pct,reject_5pct,reject_10pct\n"
      << std::setprecision(6);
    for (int n : a.obs_per_day) {
      for (int days : a.spans) {
        for (const auto& [label, truth] : truths) {
          const GofScenario scenario{label, truth, CopulaModel::gumbel(2.0), days, n};
          const RejectionRow row = rejection_study(design, scenario, grid, grid, options);
          f << label << ",gumbel(2)," << n << ',' << days << ',' << row.replications << ',' << row.failed << ','
            << row.rate(0.01) << ',' << row.rate(0.05) << ',' << row.rate(0.10) << '\n';
        }
      }
    }
  }
  if (all || a.study == "coverage") {
    const std::vector<double> grid = inference_lattice();
    auto f = out.open_csv("coverage.csv");
    f << "obs_per_day,days,level,replications,failed,coverage,mean_half_width\n" << std::setprecision(8);
    for (int n : a.obs_per_day) {
      for (int days : a.spans) {
        const CoverageStudy c =
            band_coverage_study(design, n, days, grid, grid, a.level, a.draws, design.base.seed);
        double mean_hw = 0.0;
        for (double h : c.half_widths) mean_hw += h;
        if (!c.half_widths.empty()) mean_hw /= static_cast<double>(c.half_widths.size());
        f << n << ',' << days << ',' << c.level << ',' << c.replications << ',' << c.failed << ',' << c.coverage() << ','
          << mean_hw << '\n';
      }
    }
  }
  out.summary("mc_study.json", body);
}

// ---------------------------------------------------------------- plot

struct PlotArgs {
  std::string kind;
  std::string model;  // family:param, instead of --input
  double step = 0.01;
  int points = 500;
  int bins = 40;
};

CopulaModel parse_model_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string family = spec.substr(0, colon);
  const double param = colon == std::string::npos ? 0.0 : std::stod(spec.substr(colon + 1));
  return CopulaModel::make(parse_family(family), param);
}

void run_plot(const Common& common, const PanelInput& in, const PlotArgs& a) {
  const auto& kinds = plot_kinds();
  if (std::find(kinds.begin(), kinds.end(), a.kind) == kinds.end()) {
    std::string list;
    for (const auto& k : kinds) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError("kind: unknown plot kind '" + a.kind + "' (supported: " + list + ")");
  }
  if (in.input.empty() == a.model.empty()) throw ConfigError("plot: pass exactly one of --input or --model");

  std::optional<CopulaModel> model;
  std::optional<VolPairSeries> series;
  if (!a.model.empty()) {
    model = parse_model_spec(a.model);
  } else {
    series = series_from_spot(spot_variance_path(in.ingest().panel, in.spot_config()));
  }
  if (model && (a.kind == "scatter" || a.kind == "histogram")) {
    throw ConfigError("kind: " + a.kind + " needs --input data");
  }
  std::vector<double> z;
  for (int i = 1; i < 100; ++i) z.push_back(i / 100.0);

  Outputs out(common);
  if (a.kind == "contours") {
    const std::vector<double> grid = interior_lattice(a.step);
    EmpiricalCopulaGrid g;
    if (model) {
      g.u = grid;
      g.v = grid;
      for (double u : grid) {
        for (double v : grid) g.values.push_back(model->cdf(u, v));
      }
    } else {
      g = realized_copula(*series, grid, grid);
    }
    auto f = out.open_csv("contours.csv");
    f << "level,u1,v1,u2,v2\n" << std::setprecision(8);
    for (const auto& s : decile_contours(g)) {
      f << s.level << ',' << s.from.u << ',' << s.from.v << ',' << s.to.u << ',' << s.to.v << '\n';
    }
  } else if (a.kind == "tail") {
    const CopulaCdf cdf = model ? model->cdf_evaluator() : empirical_copula_evaluator(pseudo_observations(*series));
    auto f = out.open_csv("tail.csv");
    f << "z,L,U,T\n" << std::setprecision(10);
    for (const auto& r : tail_table(cdf, z)) f << r.z << ',' << r.lower << ',' << r.upper << ',' << r.tail << '\n';
  } else if (a.kind == "kendall") {
    std::vector<double> k;
    if (model) {
      for (double v : z) k.push_back(model->kendall_function(v));
    } else {
      const EmpiricalKendall kf(pseudo_observations(*series));
      for (double v : z) k.push_back(kf(v));
    }
    auto f = out.open_csv("kendall.csv");
    f << "z,K,diagonal\n" << std::setprecision(10);
    for (const auto& r : kendall_table(z, k)) f << r.z << ',' << r.k << ',' << r.diagonal << '\n';
  } else if (a.kind == "scatter") {
    const PseudoObservations p = pseudo_observations(*series);
    const std::size_t stride = std::max<std::size_t>(1, p.size() / static_cast<std::size_t>(std::max(1, a.points)));
    auto f = out.open_csv("scatter.csv");
    f << "u,v\n" << std::setprecision(8);
    for (std::size_t t = 0; t < p.size(); t += stride) f << p.u[t] << ',' << p.v[t] << '\n';
  } else {
    auto f = out.open_csv("histogram.csv");
    f << "asset,bin_lo,bin_hi,count\n" << std::setprecision(8);
    for (int asset = 0; asset < 2; ++asset) {
      const auto& values = asset == 0 ? series->x : series->y;
      std::vector<double> logs;
      for (double v : values) {
        if (v > 0.0) logs.push_back(std::log(v));
      }
      if (logs.empty()) continue;
      const auto [lo_it, hi_it] = std::minmax_element(logs.begin(), logs.end());
      const double lo = *lo_it;
      const double width = std::max(*hi_it - lo, 1e-12) / a.bins;
      std::vector<long> counts(static_cast<std::size_t>(a.bins), 0);
      for (double l : logs) {
        const auto b = std::min(static_cast<std::size_t>((l - lo) / width), counts.size() - 1);
        ++counts[b];
      }
      for (int b = 0; b < a.bins; ++b) {
        f << asset << ',' << lo + b * width << ',' << lo + (b + 1) * width << ',' << counts[static_cast<std::size_t>(b)] << '\n';
      }
    }
  }
  out.summary("plot.json", {{"command", "plot"}, {"kind", a.kind}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Realized copula of volatility: simulation, estimation, inference and Monte Carlo studies"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML-style configuration file");
  Common common;
  app.add_option("--seed", common.seed, "Seed for every Monte Carlo layer");
  app.add_option("--out-dir", common.out_dir, "Directory for result files")->capture_default_str();
  app.add_option("--threads", common.threads, "OpenMP threads (0 keeps the runtime default)");
  app.add_flag("--overwrite", common.overwrite, "Replace existing result files");

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate the bivariate SV model and write a tick panel");
  simulate_cmd->add_option("--family", sim.family)->capture_default_str();
  simulate_cmd->add_option("--param", sim.param)->capture_default_str();
  simulate_cmd->add_option("--days", sim.days)->capture_default_str();
  simulate_cmd->add_option("--inner-steps", sim.inner_steps, "Simulation steps per day")->capture_default_str();
  simulate_cmd->add_option("--obs-per-day", sim.obs_per_day)->capture_default_str();
  simulate_cmd->add_option("--kappa", sim.kappa)->capture_default_str();
  simulate_cmd->add_option("--leverage", sim.leverage)->capture_default_str();
  simulate_cmd->add_option("--price-correlation", sim.price_correlation)->capture_default_str();
  simulate_cmd->add_flag("--true-variance", sim.true_variance, "Also write the latent variance on the grid");

  PanelInput spot_in;
  auto* spot_cmd = app.add_subcommand("spotvol", "Estimate spot variances from a tick file");
  spot_in.add(spot_cmd);

  PanelInput copula_in;
  double copula_step = 0.01;
  auto* copula_cmd = app.add_subcommand("copula", "Realized copula grid, Kendall tau and MLE fits");
  copula_in.add(copula_cmd);
  copula_cmd->add_option("--step", copula_step, "Grid spacing")->capture_default_str();

  PanelInput gof_in;
  InferenceArgs gof_inf;
  GofArgs gof_args;
  auto* gof_cmd = app.add_subcommand("gof", "Goodness-of-fit test against a parametric copula");
  gof_in.add(gof_cmd);
  gof_inf.add(gof_cmd);
  gof_cmd->add_option("--family", gof_args.family)->capture_default_str();
  gof_cmd->add_option("--param", gof_args.param)->capture_default_str();
  gof_cmd->add_flag("--composite", gof_args.composite, "Fit the family by MLE first");
  gof_cmd->add_option("--split", gof_args.split, "Composite null: test on the leading T^eta days");

  PanelInput band_in;
  InferenceArgs band_inf;
  double band_level = 0.95;
  auto* band_cmd = app.add_subcommand("band", "Uniform confidence band for the copula");
  band_in.add(band_cmd);
  band_inf.add(band_cmd);
  band_cmd->add_option("--level", band_level)->capture_default_str();

  StudyArgs study;
  auto* study_cmd = app.add_subcommand("mc-study", "Monte Carlo study on simulated paths");
  study_cmd->add_option("--study", study.study, "all, rmse, pivot, size or coverage")->capture_default_str();
  study_cmd->add_option("--replications", study.replications)->capture_default_str();
  study_cmd->add_option("--obs-per-day", study.obs_per_day)->capture_default_str()->delimiter(',');
  study_cmd->add_option("--spans", study.spans, "Days")->capture_default_str()->delimiter(',');
  study_cmd->add_option("--inner-steps", study.inner_steps)->capture_default_str();
  study_cmd->add_option("--draws", study.draws)->capture_default_str();
  study_cmd->add_option("--level", study.level)->capture_default_str();
  study_cmd->add_option("--pivot-obs-per-day", study.pivot_obs_per_day)->capture_default_str();
  study_cmd->add_option("--pivot-days", study.pivot_days)->capture_default_str();
  study_cmd->add_option("--pivot-levels", study.pivot_levels)->capture_default_str()->delimiter(',');

  PanelInput plot_in;
  PlotArgs plot;
  auto* plot_cmd = app.add_subcommand("plot", "Plot-ready tables");
  plot_cmd->add_option("--kind", plot.kind, "contours, tail, kendall, scatter or histogram")->required();
  plot_cmd->add_option("--input", plot_in.input, "Tick or panel CSV");
  plot_cmd->add_option("--model", plot.model, "family:param instead of data, e.g. gumbel:2");
  plot_cmd->add_option("--obs-per-day", plot_in.obs_per_day)->capture_default_str();
  plot_cmd->add_option("--step", plot.step)->capture_default_str();
  plot_cmd->add_option("--points", plot.points, "Scatter points")->capture_default_str();
  plot_cmd->add_option("--bins", plot.bins)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (common.threads > 0) omp_set_num_threads(common.threads);
    common.resolved_config = resolved_config(app, app.get_subcommands().front()->get_name());
    if (*simulate_cmd) run_simulate(common, sim);
    if (*spot_cmd) run_spotvol(common, spot_in);
    if (*copula_cmd) run_copula(common, copula_in, copula_step);
    if (*gof_cmd) run_gof(common, gof_in, gof_inf, gof_args);
    if (*band_cmd) run_band(common, band_in, band_inf, band_level);
    if (*study_cmd) run_mc_study(common, study);
    if (*plot_cmd) run_plot(common, plot_in, plot);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
