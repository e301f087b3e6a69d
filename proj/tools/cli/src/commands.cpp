#include "qhit_app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "json.hpp"
#include "qhit/error.hpp"
#include "qhit/measures.hpp"
#include "qhit/random.hpp"
#include "qhit/short_returns.hpp"
#include "qhit/transfer.hpp"
#include "qhit_app/output.hpp"

namespace qhit::app {

using Json = nlohmann::ordered_json;

const char* to_string(LawMode mode) noexcept { return mode == LawMode::hitting ? "hitting" : "return"; }

LawMode law_mode_from_string(const std::string& s) {
  if (s == "hitting") return LawMode::hitting;
  if (s == "return") return LawMode::returns;
  throw ConfigError("--mode must be 'hitting' or 'return', got '" + s + "'");
}

double LawRun::worst_ks(std::size_t rho_index) const {
  double worst = 0.0;
  for (const auto& c : centers)
    if (c.rho_index == rho_index) worst = std::max(worst, c.ks.value());
  return worst;
}

namespace {

constexpr double kProductHorizon = 3.0;

// Stream tags keep the seeds of different experiment parts apart.
constexpr std::uint64_t kCenterStream = 0xC3;
constexpr std::uint64_t kLawStream = 0x1A;
constexpr std::uint64_t kKacStream = 0x4AC;
constexpr std::uint64_t kShortStream = 0x5E7;

Json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

void log(std::ostream* progress, const std::string& line) {
  if (progress) *progress << line << std::endl;
}

std::vector<double> draw_centers(const ExperimentConfig& config, const DensityGrid& h, std::size_t rho_index) {
  if (!config.law.centers.empty()) return config.law.centers;
  const double margin = config.law.center_margin;
  CounterRng rng = CounterRng(hash2(config.driving.seed, kCenterStream)).substream(rho_index);
  std::vector<double> out;
  std::size_t attempts = 0;
  while (out.size() < config.law.n_centers) {
    if (++attempts > 1000 * config.law.n_centers)
      throw DomainError("cannot draw centers at distance >= center_margin from the boundary");
    const double x = sample_point(h, rng);
    if (x >= margin && x <= 1.0 - margin) out.push_back(x);
  }
  return out;
}

void finish(OutputDir& out, const ExperimentConfig& config, const std::string& command, Json results,
            const Timings& timings) {
  const std::string config_text = serialize_config(config);
  out.write("config.ini", config_text);
  Json summary;
  summary["command"] = command;
  summary["seed"] = config.driving.seed;
  summary["results"] = std::move(results);
  auto& t = summary["timings"] = Json::object();
  for (const auto& [phase, s] : timings.entries()) t[phase] = s;
  out.write("summary.json", summary.dump(2) + "\n", false);
  write_manifest(out, command, config_text, config.driving.seed, timings);
}

}  // namespace

LawRun run_law(const ExperimentConfig& config, LawMode mode, std::ostream* progress) {
  config.validate();
  const MapSystem system = config.make_system();
  const Realisation omega(config.driving);
  const UlamFamily family(system, config.grid.bins);
  const QuenchedDensity q = quenched_density(family, omega, config.grid.n_pull);
  const DensityGrid marginal = marginal_density(family, config.driving, config.grid.n_omega, config.grid.n_pull);
  const std::vector<double> t_grid = config.law.t_grid();

  LawRun run;
  run.mode = mode;
  run.density_convergence = q.convergence;
  for (std::size_t ri = 0; ri < config.law.rho.size(); ++ri) {
    const double rho = config.law.rho[ri];
    const auto centers = draw_centers(config, q.density, ri);
    for (std::size_t ci = 0; ci < centers.size(); ++ci) {
      CenterLaw c;
      c.rho_index = ri;
      c.center_index = ci;
      c.rho = rho;
      c.center = centers[ci];
      const Ball b(c.center, rho);
      c.mu_b = ball_measure(marginal, b);
      if (!(c.mu_b > 0.0)) throw DomainError("ball around " + format_double(c.center) + " has zero marginal mass");

      LawConfig lc;
      lc.t_grid = t_grid;
      lc.n_samples = config.law.n_samples;
      lc.max_iter_factor = config.law.max_iter_factor;
      lc.seed = hash2(hash2(config.driving.seed, kLawStream), ri * 0x10000 + ci);
      lc.threads = config.threads;
      c.law = mode == LawMode::hitting ? hitting_law(system, omega, b, c.mu_b, q.density, lc)
                                       : return_law(system, omega, b, c.mu_b, q.density, lc);
      c.ks = ks_to_exponential(c.law);

      const auto masses = fiber_masses(family, omega, q.density, b, c.law.steps.back());
      for (std::size_t i = 0; i < c.law.t.size(); ++i) {
        c.product.push_back(product_law(masses, c.law.steps[i]));
        if (c.law.t[i] <= kProductHorizon)
          c.product_gap = std::max(c.product_gap, std::abs(c.law.survival[i] - c.product.back()));
      }
      c.kac = kac_check(system, omega, b, c.mu_b, q.density, config.law.kac_samples,
                        hash2(hash2(config.driving.seed, kKacStream), ri * 0x10000 + ci), config.threads);
      log(progress, std::string(to_string(mode)) + " rho=" + format_double(rho) + " x=" + format_double(c.center) +
                        " ks=" + format_double(c.ks.value()) + " kac=" + format_double(c.kac.ratio));
      run.centers.push_back(std::move(c));
    }
  }
  return run;
}

void cmd_density(const ExperimentConfig& config, std::ostream* progress) {
  config.validate();
  Timings timings;
  Stopwatch total;
  OutputDir out(config.out_dir);
  const MapSystem system = config.make_system();
  const Realisation omega(config.driving);
  const UlamFamily family(system, config.grid.bins);

  Json fibers = Json::array();
  Csv convergence({"fiber", "convergence", "invariance_residual"});
  Stopwatch sw;
  for (std::int64_t j : config.grid.fibers) {
    const Realisation w = omega.shift(j);
    const QuenchedDensity q = quenched_density(family, w, config.grid.n_pull);
    const double residual = invariance_residual(family, w, config.grid.n_pull);
    Csv csv({"bin_center", "value"});
    double max_dev = 0.0;
    for (std::size_t k = 0; k < q.density.bins(); ++k) {
      csv.add(q.density.bin_center(k)).add(q.density[k]).end_row();
      max_dev = std::max(max_dev, std::abs(q.density[k] - 1.0));
    }
    out.write("density_fiber_" + std::to_string(j) + ".csv", csv.text());
    convergence.add(std::to_string(j)).add(q.convergence).add(residual).end_row();
    fibers.push_back({{"fiber", j},
                      {"convergence", number(q.convergence)},
                      {"invariance_residual", number(residual)},
                      {"first_bin", number(q.density[0])},
                      {"last_bin", number(q.density[q.density.bins() - 1])},
                      {"max_deviation_from_uniform", number(max_dev)}});
    log(progress, "fiber " + std::to_string(j) + " convergence=" + format_double(q.convergence));
  }
  timings.add("fibers", sw.seconds());

  Stopwatch sm;
  const DensityGrid marginal = marginal_density(family, config.driving, config.grid.n_omega, config.grid.n_pull);
  Csv mcsv({"bin_center", "value"});
  for (std::size_t k = 0; k < marginal.bins(); ++k) mcsv.add(marginal.bin_center(k)).add(marginal[k]).end_row();
  out.write("marginal.csv", mcsv.text());
  out.write("convergence.csv", convergence.text());
  timings.add("marginal", sm.seconds());
  timings.add("total", total.seconds());

  Json results;
  results["bins"] = config.grid.bins;
  results["n_pull"] = config.grid.n_pull;
  results["fibers"] = std::move(fibers);
  results["marginal"] = {{"first_bin", number(marginal[0])}, {"last_bin", number(marginal[marginal.bins() - 1])}};
  finish(out, config, "density", std::move(results), timings);
}

LawRun cmd_law(const ExperimentConfig& config, LawMode mode, std::ostream* progress) {
  config.validate();
  Timings timings;
  Stopwatch total;
  OutputDir out(config.out_dir);
  LawRun run = run_law(config, mode, progress);
  timings.add("law", total.seconds());

  const std::string prefix = std::string("law_") + to_string(mode);
  Csv table({"rho", "center_index", "center", "mu_b", "ks", "censored_fraction", "product_gap", "kac_ratio",
             "mean_return", "kac_censored", "max_iter"});
  Json per_rho = Json::array();
  for (std::size_t ri = 0; ri < config.law.rho.size(); ++ri) {
    Json centers = Json::array();
    for (const auto& c : run.centers) {
      if (c.rho_index != ri) continue;
      Csv csv({"t", "F_hat", "e_minus_t", "n_eff", "censored", "product_law"});
      for (std::size_t i = 0; i < c.law.t.size(); ++i)
        csv.add(c.law.t[i])
            .add(c.law.survival[i])
            .add(std::exp(-c.law.t[i]))
            .add(c.law.n_eff[i])
            .add(c.law.censored)
            .add(c.product[i])
            .end_row();
      out.write(prefix + "_rho" + std::to_string(ri) + "_c" + std::to_string(c.center_index) + ".csv", csv.text());
      table.add(c.rho)
          .add(c.center_index)
          .add(c.center)
          .add(c.mu_b)
          .add(c.ks.value())
          .add(c.ks.censored_fraction)
          .add(c.product_gap)
          .add(c.kac.ratio)
          .add(c.kac.mean_return)
          .add(c.kac.censored)
          .add(c.law.max_iter)
          .end_row();
      centers.push_back({{"center", number(c.center)},
                         {"mu_b", number(c.mu_b)},
                         {"ks", number(c.ks.value())},
                         {"censored_fraction", number(c.ks.censored_fraction)},
                         {"product_gap", number(c.product_gap)},
                         {"kac_ratio", number(c.kac.ratio)},
                         {"kac_lower_bound", c.kac.lower_bound}});
    }
    per_rho.push_back({{"rho", number(config.law.rho[ri])},
                       {"worst_ks", number(run.worst_ks(ri))},
                       {"centers", std::move(centers)}});
  }
  out.write(prefix + "_centers.csv", table.text());
  timings.add("total", total.seconds());

  Json results;
  results["mode"] = to_string(mode);
  results["density_convergence"] = number(run.density_convergence);
  results["rho"] = std::move(per_rho);
  finish(out, config, std::string("law ") + to_string(mode), std::move(results), timings);
  return run;
}

void cmd_short_returns(const ExperimentConfig& config, std::ostream* progress) {
  config.validate();
  const MapSystem system = config.make_system();
  ShortReturnConfig src;
  src.a = config.short_returns.a > 0.0 ? config.short_returns.a : ShortReturnConfig::default_a(system);
  src.b = config.short_returns.b;
  src.rho_grid = config.short_returns.rho;
  src.n_centers = config.short_returns.n_centers;
  src.seed = hash2(config.driving.seed, kShortStream);
  src.threads = config.threads;
  try {
    src.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("short_returns: ") + e.what());
  }

  Timings timings;
  Stopwatch total;
  OutputDir out(config.out_dir);
  const Realisation omega(config.driving);
  const DensityGrid f = quenched_density(system, omega, config.grid.n_pull, config.grid.bins).density;

  Csv table({"rho", "J", "estimate", "std_error", "n_centers"});
  std::vector<Estimate> estimates;
  Json rows = Json::array();
  for (std::size_t ri = 0; ri < src.rho_grid.size(); ++ri) {
    const double rho = src.rho_grid[ri];
    const std::size_t J = short_return_horizon(src.a, rho);
    const Estimate e = very_short_set_measure(system, omega, rho, src, f);
    estimates.push_back(e);
    table.add(rho).add(J).add(e.value).add(e.std_error).add(e.n_centers).end_row();

    const auto profile = short_return_profile(system, omega, rho, config.short_returns.n_max, f, src.n_centers,
                                              hash2(src.seed, ri + 1), src.threads);
    Csv pcsv({"n", "estimate", "std_error", "n_centers"});
    for (std::size_t n = 0; n < profile.size(); ++n)
      pcsv.add(n + 1).add(profile[n].value).add(profile[n].std_error).add(profile[n].n_centers).end_row();
    out.write("short_return_profile_rho" + std::to_string(ri) + ".csv", pcsv.text());
    rows.push_back({{"rho", number(rho)}, {"J", J}, {"estimate", number(e.value)}, {"std_error", number(e.std_error)}});
    log(progress, "rho=" + format_double(rho) + " J=" + std::to_string(J) + " V=" + format_double(e.value));
  }
  out.write("short_returns.csv", table.text());

  Json results;
  results["a"] = number(src.a);
  results["expansion_constant"] = number(expansion_constant(system));
  results["rho"] = std::move(rows);
  if (src.rho_grid.size() >= 2) {
    const auto fit = fit_short_return_scaling(src.rho_grid, estimates);
    Csv fcsv({"model", "log_c", "rate", "rms_residual"});
    fcsv.add("sqrt_log").add(fit.sqrt_log.log_c).add(fit.sqrt_log.rate).add(fit.sqrt_log.rms_residual).end_row();
    fcsv.add("power").add(fit.power.log_c).add(fit.power.rate).add(fit.power.rms_residual).end_row();
    out.write("short_return_fit.csv", fcsv.text());
    results["fit"] = {{"sqrt_log", {{"log_c", number(fit.sqrt_log.log_c)}, {"c", number(fit.sqrt_log.rate)},
                                    {"rms_residual", number(fit.sqrt_log.rms_residual)}}},
                      {"power", {{"log_c", number(fit.power.log_c)}, {"q", number(fit.power.rate)},
                                 {"rms_residual", number(fit.power.rms_residual)}}},
                      {"sqrt_log_no_worse", fit.sqrt_log_no_worse},
                      {"floored", fit.floored}};
  }
  timings.add("total", total.seconds());
  finish(out, config, "short-returns", std::move(results), timings);
}

CaseVerdict cmd_audit(const ExperimentConfig& config, std::ostream* progress) {
  config.validate();
  Timings timings;
  Stopwatch total;
  OutputDir out(config.out_dir);
  const MapSystem system = config.make_system();
  const AssumptionReport report = run_audit(system, config.driving, config.audit);
  const CaseVerdict verdict = theorem_case_check(report);
  out.write("audit_report.txt", render_text(report, verdict));
  out.write("audit_report.json", to_json(report) + "\n");
  out.write("verdict.json", to_json(verdict) + "\n");
  timings.add("total", total.seconds());

  Json statuses = Json::object();
  for (const auto& e : report.entries) statuses[e.id] = qhit::to_string(e.status);
  log(progress, "verdict: " + verdict.verdict);
  Json results;
  results["system"] = report.system;
  results["status"] = std::move(statuses);
  results["verdict"] = verdict.verdict;
  results["satisfied"] = verdict.satisfied;
  finish(out, config, "audit", std::move(results), timings);
  return verdict;
}

}  // namespace qhit::app
