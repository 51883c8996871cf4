// gwlim: config-driven runner for the Galton-Watson scaling-limit
// verification experiments, plus small sampling utilities.
//
// Exit codes: 0 pass, 1 fail, 2 usage or configuration error,
// 3 inconclusive.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gwlim/contour.hpp"
#include "gwlim/experiments.hpp"
#include "gwlim/format.hpp"
#include "gwlim/gwtree.hpp"
#include "gwlim/io.hpp"
#include "gwlim/mechanism.hpp"
#include "gwlim/offspring.hpp"
#include "gwlim/scaling.hpp"
#include "gwlim/stats.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInconclusive = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Options shared by the experiment subcommands; flags override the config
// file, which overrides the built-in defaults.
struct CommonOptions {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> reps;
  std::optional<std::string> out;
  std::optional<unsigned> jobs;
  std::optional<std::vector<std::int64_t>> n_list;
  std::optional<double> horizon;
  bool include_wall_clock = false;
};

void add_common_options(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.config_path, "JSON config file");
  cmd->add_option("--seed", opt.seed, "master seed (mandatory here or in the config)");
  cmd->add_option("--reps", opt.reps, "Monte Carlo replicates");
  cmd->add_option("--out", opt.out, "output directory");
  cmd->add_option("--jobs", opt.jobs, "worker threads (0 = all cores)");
  cmd->add_option("--n-list", opt.n_list, "grid of n values")->delimiter(',');
  cmd->add_option("--horizon", opt.horizon, "censoring horizon (limit time units)");
  cmd->add_flag("--include-wall-clock", opt.include_wall_clock,
                "embed wall-clock time in the report JSON (off by default "
                "to keep reports byte-stable)");
}

json load_config(const CommonOptions& opt) {
  if (!opt.config_path) {
    return json::object();
  }
  const json j = json::parse(gwlim::read_text_file(*opt.config_path), nullptr,
                             /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw UsageError("config is not a JSON object: " + *opt.config_path);
  }
  return j;
}

template <typename T>
T config_or(const json& cfg, const char* key, T fallback) {
  if (cfg.contains(key)) {
    return cfg.at(key).get<T>();
  }
  return fallback;
}

std::uint64_t require_seed(const CommonOptions& opt, const json& cfg) {
  if (opt.seed) {
    return *opt.seed;
  }
  if (cfg.contains("seed")) {
    return cfg.at("seed").get<std::uint64_t>();
  }
  throw UsageError("a seed is mandatory: pass --seed or put \"seed\" in the config");
}

fs::path resolve_out_dir(const CommonOptions& opt, const json& cfg) {
  const std::string dir =
      opt.out ? *opt.out : config_or<std::string>(cfg, "out", "out");
  fs::create_directories(dir);
  return dir;
}

gwlim::McOptions mc_options(const CommonOptions& opt, const json& cfg,
                            std::uint64_t default_reps) {
  gwlim::McOptions mc;
  mc.seed = require_seed(opt, cfg);
  mc.replicates =
      opt.reps ? *opt.reps
               : config_or<std::uint64_t>(cfg, "reps", default_reps);
  mc.jobs = opt.jobs ? *opt.jobs : config_or<unsigned>(cfg, "jobs", 0);
  return mc;
}

std::vector<std::int64_t> resolve_n_list(const CommonOptions& opt,
                                         const json& cfg,
                                         std::vector<std::int64_t> fallback) {
  if (opt.n_list) {
    return *opt.n_list;
  }
  if (cfg.contains("n_list")) {
    return cfg.at("n_list").get<std::vector<std::int64_t>>();
  }
  return fallback;
}

gwlim::OffspringDistribution offspring_from(const json& cfg,
                                            const std::optional<std::string>& flag) {
  if (flag) {
    return gwlim::offspring_from_json(*flag);
  }
  if (cfg.contains("offspring")) {
    return gwlim::offspring_from_json(cfg.at("offspring").dump());
  }
  throw UsageError("an offspring law is required (--offspring or config key)");
}

gwlim::BranchingMechanism mechanism_from(const json& cfg,
                                         const std::optional<std::string>& flag) {
  if (flag) {
    return gwlim::mechanism_from_json(*flag);
  }
  if (cfg.contains("mechanism")) {
    return gwlim::mechanism_from_json(cfg.at("mechanism").dump());
  }
  throw UsageError("a mechanism is required (--mechanism or config key)");
}

gwlim::ScalingFamily family_from(const json& cfg,
                                 const std::optional<double>& drift_flag,
                                 bool conjugated) {
  gwlim::ScalingFamily fam = [&] {
    if (drift_flag) {
      return gwlim::near_critical_binary_family(*drift_flag);
    }
    if (!cfg.contains("family")) {
      throw UsageError("a family is required (--drift or config key \"family\")");
    }
    const json& f = cfg.at("family");
    const std::string kind = f.at("family").get<std::string>();
    if (kind == "near_critical_binary") {
      return gwlim::near_critical_binary_family(f.at("drift").get<double>());
    }
    if (kind == "explicit") {
      // table: [{"n": .., "probs": [..], "gamma": ..}, ..], target mechanism
      struct Row {
        std::vector<double> probs;
        double gamma;
      };
      auto table = std::make_shared<std::map<std::int64_t, Row>>();
      for (const auto& row : f.at("table")) {
        (*table)[row.at("n").get<std::int64_t>()] = {
            row.at("probs").get<std::vector<double>>(),
            row.at("gamma").get<double>()};
      }
      auto lookup = [table](std::int64_t n) -> const Row& {
        const auto it = table->find(n);
        if (it == table->end()) {
          throw std::domain_error("explicit family has no entry for n = " +
                                  std::to_string(n));
        }
        return it->second;
      };
      return gwlim::ScalingFamily{
          .name = "explicit",
          .offspring_for =
              [lookup](std::int64_t n) {
                return gwlim::OffspringDistribution(lookup(n).probs);
              },
          .gamma_for = [lookup](std::int64_t n) { return lookup(n).gamma; },
          .target = gwlim::mechanism_from_json(f.at("target").dump()),
          .target_shift = 0.0};
    }
    throw UsageError("unknown family kind: " + kind);
  }();
  if (conjugated || config_or<bool>(cfg, "conjugate", false)) {
    fam = gwlim::conjugate_family(fam);
  }
  return fam;
}

void write_report(const gwlim::ExperimentReport& report, const fs::path& dir,
                  bool include_wall_clock) {
  gwlim::write_text_file(dir / (report.experiment + "_report.json"),
                         gwlim::report_to_json(report, include_wall_clock));
  gwlim::write_text_file(dir / (report.experiment + "_summary.csv"),
                         gwlim::report_to_csv(report));
  if (!report.curves.empty()) {
    std::string csv = "curve,x,y\n";
    std::vector<gwlim::SvgCurve> svg;
    for (const auto& c : report.curves) {
      for (std::size_t i = 0; i < c.xs.size(); ++i) {
        csv += c.name + "," + gwlim::format_double(c.xs[i]) + "," +
               gwlim::format_double(c.ys[i]) + "\n";
      }
      svg.push_back({c.name, c.xs, c.ys});
    }
    gwlim::write_text_file(dir / (report.experiment + "_curves.csv"), csv);
    gwlim::write_text_file(dir / (report.experiment + "_curves.svg"),
                           gwlim::curves_to_svg(svg));
  }
}

int exit_code_of(const gwlim::ExperimentReport& report) {
  switch (report.verdict) {
    case gwlim::Verdict::kPass:
      return kExitPass;
    case gwlim::Verdict::kFail:
      return kExitFail;
    case gwlim::Verdict::kInconclusive:
      return kExitInconclusive;
  }
  return kExitUsage;
}

int finish(const gwlim::ExperimentReport& report, const fs::path& dir,
           bool include_wall_clock) {
  write_report(report, dir, include_wall_clock);
  std::cout << report.experiment << ": " << gwlim::to_string(report.verdict)
            << " (" << report.statistics.size() << " statistics, "
            << gwlim::format_double(report.wall_clock_seconds) << " s)\n";
  return exit_code_of(report);
}

// ----------------------------------------------------------------- verify

int run_verify(const std::string& name, const CommonOptions& common,
               const std::optional<std::string>& offspring_flag,
               const std::optional<std::string>& mechanism_flag,
               std::optional<double> height, std::optional<double> x,
               std::optional<double> a, std::optional<std::uint64_t> cap,
               const std::optional<std::string>& functional_name) {
  const json cfg = load_config(common);
  const fs::path dir = resolve_out_dir(common, cfg);

  if (name == "girsanov-exact") {
    const auto p = offspring_from(cfg, offspring_flag);
    const auto h = static_cast<std::uint32_t>(
        height ? *height : config_or<double>(cfg, "height", 3));
    gwlim::ExperimentReport report = gwlim::verify_girsanov_exact(p, h);
    return finish(report, dir, common.include_wall_clock);
  }
  if (name == "martingale") {
    const auto p = offspring_from(cfg, offspring_flag);
    gwlim::MartingaleOptions options;
    options.cap = cap ? *cap : config_or<std::uint64_t>(cfg, "cap", 4096);
    options.max_generation =
        config_or<std::uint64_t>(cfg, "max_generation", 20);
    gwlim::ExperimentReport report = gwlim::verify_martingale(p, options);
    return finish(report, dir, common.include_wall_clock);
  }
  if (name == "girsanov-mc") {
    const auto p = offspring_from(cfg, offspring_flag);
    const auto h = static_cast<std::uint32_t>(
        height ? *height : config_or<double>(cfg, "height", 2));
    const gwlim::McOptions mc = mc_options(common, cfg, 100'000);
    const std::string fname =
        functional_name ? *functional_name
                        : config_or<std::string>(cfg, "functional", "sup");
    const auto catalog = gwlim::default_functional_catalog(h);
    for (const auto& f : catalog) {
      if (f.name == fname) {
        return finish(gwlim::verify_girsanov_mc(p, h, f, mc), dir,
                      common.include_wall_clock);
      }
    }
    throw UsageError("unknown functional: " + fname);
  }
  if (name == "two-law") {
    const auto p = offspring_from(cfg, offspring_flag);
    const double level = a ? *a : config_or<double>(cfg, "a", 2.0);
    const gwlim::McOptions mc = mc_options(common, cfg, 100'000);
    gwlim::ExperimentReport report = gwlim::contour_two_law_test(
        p, level, gwlim::default_functional_catalog(level), mc);
    return finish(report, dir, common.include_wall_clock);
  }
  if (name == "gircon-mean") {
    const auto m = mechanism_from(cfg, mechanism_flag);
    const double xx = x ? *x : config_or<double>(cfg, "x", 1.0);
    const double aa = a ? *a : config_or<double>(cfg, "a", 0.5);
    const gwlim::McOptions mc = mc_options(common, cfg, 1'000'000);
    gwlim::ExperimentReport report = gwlim::verify_gircon_mean(m, xx, aa, mc);
    return finish(report, dir, common.include_wall_clock);
  }
  throw UsageError("unknown verify experiment: " + name);
}

// ---------------------------------------------------------------- converge

gwlim::ExperimentReport synth_report(const std::string& name,
                                     std::uint64_t seed) {
  gwlim::ExperimentReport report;
  report.experiment = name;
  report.master_seed = seed;
  return report;
}

int run_converge(const std::string& name, const CommonOptions& common,
                 std::optional<double> drift, bool conjugated,
                 std::optional<double> x, std::optional<double> a) {
  const json cfg = load_config(common);
  const fs::path dir = resolve_out_dir(common, cfg);
  const gwlim::ScalingFamily family = family_from(cfg, drift, conjugated);
  const double xx = x ? *x : config_or<double>(cfg, "x", 1.0);

  if (name == "extinction") {
    gwlim::ExtinctionConvergenceOptions options;
    options.x = xx;
    options.n_list = resolve_n_list(common, cfg, {100, 400, 1600});
    options.horizon =
        common.horizon ? *common.horizon : config_or<double>(cfg, "horizon", 5.0);
    options.mc = mc_options(common, cfg, 10'000);
    return finish(gwlim::converge_extinction(family, options), dir,
                  common.include_wall_clock);
  }
  if (name == "laplace") {
    gwlim::LaplaceConvergenceOptions options;
    options.x = xx;
    options.a = a ? *a : config_or<double>(cfg, "a", 1.0);
    options.n = config_or<std::int64_t>(cfg, "n", 500);
    if (common.n_list && !common.n_list->empty()) {
      options.n = common.n_list->front();
    }
    if (cfg.contains("lambda_grid")) {
      options.lambdas = cfg.at("lambda_grid").get<std::vector<double>>();
    }
    options.mc = mc_options(common, cfg, 10'000);
    return finish(gwlim::converge_laplace(family, options), dir,
                  common.include_wall_clock);
  }

  // The remaining studies are exact evaluations; a seed is still recorded
  // for uniform report handling but no randomness is consumed.
  const std::uint64_t seed =
      common.seed ? *common.seed : config_or<std::uint64_t>(cfg, "seed", 0);
  const auto n_list = resolve_n_list(common, cfg, {100, 1000, 10000});

  if (name == "A1") {
    const double lambda_max = config_or<double>(cfg, "lambda_max", 10.0);
    const int grid_size = config_or<int>(cfg, "grid_size", 256);
    const auto check = gwlim::check_uniform_convergence(family, lambda_max,
                                                        grid_size, n_list);
    auto report = synth_report("converge-A1", seed);
    report.add_parameter("family", family.name);
    report.add_parameter("lambda_max", gwlim::format_double(lambda_max));
    gwlim::ReportCurve deviations{.name = "sup_deviation", .xs = {}, .ys = {}};
    for (const auto& row : check.rows) {
      gwlim::Statistic s;
      s.name = "sup_deviation_n" + std::to_string(row.n);
      s.estimate = row.sup_deviation;
      s.exact = true;
      report.statistics.push_back(std::move(s));
      deviations.xs.push_back(static_cast<double>(row.n));
      deviations.ys.push_back(row.sup_deviation);
    }
    // overlay of the discrete exponents against the target on the grid
    for (const std::int64_t n : n_list) {
      gwlim::ReportCurve c{.name = "G_n" + std::to_string(n), .xs = {}, .ys = {}};
      for (int i = 0; i < grid_size; ++i) {
        const double lambda = lambda_max * i / (grid_size - 1);
        c.xs.push_back(lambda);
        c.ys.push_back(gwlim::discrete_laplace_exponent(family, n, lambda));
      }
      report.curves.push_back(std::move(c));
    }
    gwlim::ReportCurve target{.name = "psi", .xs = {}, .ys = {}};
    for (int i = 0; i < grid_size; ++i) {
      const double lambda = lambda_max * i / (grid_size - 1);
      target.xs.push_back(lambda);
      target.ys.push_back(family.target_psi(lambda));
    }
    report.curves.push_back(std::move(target));
    report.curves.push_back(std::move(deviations));
    gwlim::Statistic trend;
    trend.name = "deviations_decreasing";
    trend.estimate = check.decreasing ? 1.0 : 0.0;
    trend.exact = true;
    trend.ok = check.decreasing;
    report.statistics.push_back(std::move(trend));
    report.settle_verdict();
    return finish(report, dir, common.include_wall_clock);
  }
  if (name == "A3") {
    const std::vector<double> lambdas =
        cfg.contains("lambda_grid")
            ? cfg.at("lambda_grid").get<std::vector<double>>()
            : std::vector<double>{0.5, 1.0, 2.0, 4.0};
    auto report = synth_report("converge-A3", seed);
    report.add_parameter("family", family.name);
    std::vector<double> sup_by_n;
    for (const std::int64_t n : n_list) {
      double sup = 0.0;
      for (const double lambda : lambdas) {
        const auto point = gwlim::check_laplace_convergence(family, n, lambda);
        gwlim::Statistic s;
        s.name = "log_laplace_n" + std::to_string(n) + "_lambda_" +
                 gwlim::format_double(lambda);
        s.estimate = point.log_laplace;
        s.error = std::fabs(point.log_laplace - point.target);
        s.exact = true;
        s.ok = point.in_domain;
        s.note = "target " + gwlim::format_double(point.target);
        sup = std::max(sup, s.error);
        report.statistics.push_back(std::move(s));
      }
      sup_by_n.push_back(sup);
    }
    gwlim::Statistic trend;
    trend.name = "gaps_decreasing";
    trend.ok = std::is_sorted(sup_by_n.rbegin(), sup_by_n.rend());
    trend.estimate = trend.ok ? 1.0 : 0.0;
    trend.exact = true;
    report.statistics.push_back(std::move(trend));
    report.settle_verdict();
    return finish(report, dir, common.include_wall_clock);
  }
  if (name == "main1") {
    const std::vector<double> deltas =
        cfg.contains("delta_grid")
            ? cfg.at("delta_grid").get<std::vector<double>>()
            : std::vector<double>{0.25, 0.5, 1.0};
    auto report = synth_report("converge-main1", seed);
    report.add_parameter("family", family.name);
    for (const double delta : deltas) {
      const auto rows = gwlim::check_small_time_mass(family, delta, n_list);
      gwlim::ReportCurve curve{
          .name = "mass_delta_" + gwlim::format_double(delta),
          .xs = {},
          .ys = {}};
      double prev_valid = -1.0;
      for (const auto& row : rows) {
        gwlim::Statistic s;
        s.name = "mass_delta_" + gwlim::format_double(delta) + "_n" +
                 std::to_string(row.n);
        s.estimate = row.value;
        s.exact = true;
        if (!row.valid) {
          s.gating = false;
          s.note = "[delta gamma_n] = 0, excluded";
        } else {
          // the liminf must stay away from 0: no collapse along the tail
          const bool no_collapse =
              prev_valid < 0.0 || row.value >= 0.5 * prev_valid;
          s.ok = row.value > 1e-12 &&
                 (row.n != n_list.back() || no_collapse);
          prev_valid = row.value;
          curve.xs.push_back(static_cast<double>(row.n));
          curve.ys.push_back(row.value);
        }
        report.statistics.push_back(std::move(s));
      }
      report.curves.push_back(std::move(curve));
    }
    report.settle_verdict();
    return finish(report, dir, common.include_wall_clock);
  }
  if (name == "survival-mass") {
    const auto rows = gwlim::survival_mass_limit(family, xx, n_list);
    auto report = synth_report("converge-survival-mass", seed);
    report.add_parameter("family", family.name);
    report.add_parameter("x", gwlim::format_double(xx));
    gwlim::ReportCurve curve{.name = "survival_mass", .xs = {}, .ys = {}};
    std::vector<double> deviations;
    for (const auto& row : rows) {
      gwlim::Statistic s;
      s.name = "mass_n" + std::to_string(row.n);
      s.estimate = row.mass;
      s.error = row.deviation;
      s.exact = true;
      report.statistics.push_back(std::move(s));
      curve.xs.push_back(static_cast<double>(row.n));
      curve.ys.push_back(row.mass);
      deviations.push_back(row.deviation);
    }
    report.curves.push_back(std::move(curve));
    gwlim::Statistic trend;
    trend.name = "deviations_decreasing";
    trend.ok = std::is_sorted(deviations.rbegin(), deviations.rend());
    trend.estimate = trend.ok ? 1.0 : 0.0;
    trend.exact = true;
    report.statistics.push_back(std::move(trend));
    report.settle_verdict();
    return finish(report, dir, common.include_wall_clock);
  }
  throw UsageError("unknown converge experiment: " + name);
}

// ------------------------------------------------------------- sample-tree

int run_sample_tree(const CommonOptions& common,
                    const std::optional<std::string>& offspring_flag,
                    std::optional<double> height, std::uint64_t forest_size,
                    std::uint64_t node_budget) {
  const json cfg = load_config(common);
  const fs::path dir = resolve_out_dir(common, cfg);
  const auto p = offspring_from(cfg, offspring_flag);
  const std::uint64_t seed = require_seed(common, cfg);
  const auto h = static_cast<std::uint32_t>(
      height ? *height : config_or<double>(cfg, "height", 3));

  gwlim::CounterRng rng = gwlim::CounterRng::keyed({seed, 0x5eedULL});
  gwlim::SampleOptions sample_options;
  sample_options.node_budget = node_budget;

  if (forest_size <= 1) {
    const auto tree = gwlim::sample_truncated(p, h, rng, sample_options);
    const auto path = gwlim::contour_of(tree);
    gwlim::write_text_file(dir / "tree.json", gwlim::tree_to_json(tree) + "\n");
    gwlim::write_text_file(dir / "contour.csv", gwlim::contour_to_csv(path));
    gwlim::write_text_file(dir / "contour.svg", gwlim::contour_to_svg(path));
  } else {
    const auto forest =
        gwlim::sample_forest(p, forest_size, h, rng, sample_options);
    std::string trees = "[";
    for (std::size_t i = 0; i < forest.trees().size(); ++i) {
      if (i > 0) {
        trees += ",";
      }
      trees += "\n  " + gwlim::tree_to_json(forest.trees()[i]);
    }
    trees += "\n]\n";
    const auto path = gwlim::forest_contour(forest);
    gwlim::write_text_file(dir / "tree.json", trees);
    gwlim::write_text_file(dir / "contour.csv", gwlim::contour_to_csv(path));
    gwlim::write_text_file(dir / "contour.svg", gwlim::contour_to_svg(path));
  }
  std::cout << "sample-tree: wrote tree.json, contour.csv, contour.svg to "
            << dir.string() << "\n";
  return kExitPass;
}

// ---------------------------------------------------------- mechanism-info

int run_mechanism_info(const CommonOptions& common,
                       const std::optional<std::string>& mechanism_flag) {
  const json cfg = load_config(common);
  const auto m = mechanism_from(cfg, mechanism_flag);

  json out;
  out["mechanism"] = json::parse(gwlim::mechanism_to_json(m));
  const auto crit = gwlim::classify(m);
  out["criticality"] = crit == gwlim::Criticality::kSubcritical ? "subcritical"
                       : crit == gwlim::Criticality::kCritical  ? "critical"
                                                                : "supercritical";
  out["largest_root"] = gwlim::largest_root(m);
  if (crit == gwlim::Criticality::kSupercritical) {
    out["critical_shift"] = gwlim::critical_shift(m);
  }
  const auto grey = gwlim::check_grey(m);
  out["grey"] = {{"verdict", grey.verdict == gwlim::IntegralVerdict::kHolds
                                 ? "holds"
                                 : grey.verdict == gwlim::IntegralVerdict::kFails
                                       ? "fails"
                                       : "inconclusive"},
                 {"tail_integral", grey.estimate}};
  const auto cons = gwlim::check_conservative(m);
  out["conservative"] = {
      {"verdict", cons.verdict == gwlim::IntegralVerdict::kHolds ? "holds"
                  : cons.verdict == gwlim::IntegralVerdict::kFails
                      ? "fails"
                      : "inconclusive"},
      {"probed_integral", cons.estimate}};
  std::cout << out.dump(2) << "\n";

  if (common.out) {
    const fs::path dir = resolve_out_dir(common, cfg);
    gwlim::write_text_file(dir / "mechanism_info.json", out.dump(2) + "\n");
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Galton-Watson scaling-limit simulation and verification"};
  app.require_subcommand(1);

  CommonOptions common;
  std::optional<std::string> offspring_flag;
  std::optional<std::string> mechanism_flag;
  std::optional<std::string> functional_name;
  std::optional<double> height;
  std::optional<double> x_value;
  std::optional<double> a_value;
  std::optional<double> drift;
  std::optional<std::uint64_t> cap;
  bool conjugated = false;
  std::uint64_t forest_size = 1;
  std::uint64_t node_budget = 100'000'000;

  auto* sample = app.add_subcommand("sample-tree",
                                    "sample a truncated tree or forest and "
                                    "write tree JSON + contour CSV/SVG");
  add_common_options(sample, common);
  sample->add_option("--offspring", offspring_flag,
                     "offspring law as a JSON array");
  sample->add_option("--height", height, "truncation height");
  sample->add_option("--forest", forest_size, "number of trees (default 1)");
  sample->add_option("--budget", node_budget, "node budget per tree");

  auto* verify = app.add_subcommand("verify", "run a verification experiment");
  std::string verify_name;
  verify
      ->add_option("name", verify_name,
                   "girsanov-exact | girsanov-mc | martingale | gircon-mean | "
                   "two-law")
      ->required();
  add_common_options(verify, common);
  verify->add_option("--offspring", offspring_flag,
                     "offspring law as a JSON array");
  verify->add_option("--mechanism", mechanism_flag, "mechanism as JSON");
  verify->add_option("--height", height, "truncation height");
  verify->add_option("--x", x_value, "initial mass");
  verify->add_option("--a", a_value, "truncation level / observation time");
  verify->add_option("--cap", cap, "population cap for the DP");
  verify->add_option("--functional", functional_name,
                     "catalog functional for girsanov-mc");

  auto* converge = app.add_subcommand("converge", "run a convergence study");
  std::string converge_name;
  converge
      ->add_option("name", converge_name,
                   "extinction | laplace | A1 | A3 | main1 | survival-mass")
      ->required();
  add_common_options(converge, common);
  converge->add_option("--drift", drift,
                       "use the near-critical binary family with this drift");
  converge->add_flag("--conjugate", conjugated,
                     "study the conjugate of the selected family");
  converge->add_option("--x", x_value, "initial mass");
  converge->add_option("--a", a_value, "observation time (laplace)");

  auto* info = app.add_subcommand("mechanism-info",
                                  "classification, roots and integral checks");
  add_common_options(info, common);
  info->add_option("--mechanism", mechanism_flag, "mechanism as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (sample->parsed()) {
      return run_sample_tree(common, offspring_flag, height, forest_size,
                             node_budget);
    }
    if (verify->parsed()) {
      return run_verify(verify_name, common, offspring_flag, mechanism_flag,
                        height, x_value, a_value, cap, functional_name);
    }
    if (converge->parsed()) {
      return run_converge(converge_name, common, drift, conjugated, x_value,
                          a_value);
    }
    if (info->parsed()) {
      return run_mechanism_info(common, mechanism_flag);
    }
    std::cerr << "no subcommand selected\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
}
