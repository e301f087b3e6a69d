#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qhit/error.hpp"
#include "qhit_app/accept.hpp"
#include "qhit_app/commands.hpp"
#include "qhit_app/config.hpp"
#include "qhit_app/output.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitResource = 3;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> threads;
  std::string mode = "hitting";
  bool pm_clamped_coefficient = false;
};

qhit::app::ExperimentConfig resolve(const Flags& f) {
  qhit::app::ExperimentConfig c;
  if (!f.config.empty()) c = qhit::app::load_config(f.config);
  if (f.seed) {
    c.driving.seed = *f.seed;
    c.audit.seed = *f.seed;
  }
  if (f.out) c.out_dir = *f.out;
  if (f.threads) c.threads = *f.threads;
  if (f.pm_clamped_coefficient) c.system.coefficient = qhit::PmCoefficient::clamped;
  c.validate();
  for (const auto& w : c.warnings()) std::cerr << "warning: " << w << "\n";
  return c;
}

void add_common(CLI::App* cmd, Flags& f, bool config_required) {
  auto* opt = cmd->add_option("--config", f.config, "INI experiment configuration");
  if (config_required) opt->required();
  cmd->add_option("--seed", f.seed, "Driving seed (overrides the config)");
  cmd->add_option("--out", f.out, "Output directory (overrides the config)");
  cmd->add_option("--threads", f.threads, "Worker threads; results do not depend on it");
  cmd->add_flag("--pm-paper-coefficient", f.pm_clamped_coefficient,
                "Use the clamped PM left branch x + 2^(1+a) x^(1+a)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quenched hitting and return time statistics for random interval maps"};
  app.set_version_flag("--version", qhit::app::version_tag());
  app.require_subcommand(1);
  Flags f;
  auto* density = app.add_subcommand("density", "Quenched and marginal densities");
  auto* law = app.add_subcommand("law", "Hitting or return time laws against e^-t");
  auto* short_returns = app.add_subcommand("short-returns", "Short-return set measures");
  auto* audit = app.add_subcommand("audit", "Assumption audit and case verdict");
  auto* accept = app.add_subcommand("accept", "Acceptance criteria suite");
  for (auto* cmd : {density, law, short_returns, audit}) add_common(cmd, f, true);
  add_common(accept, f, false);
  law->add_option("--mode", f.mode, "hitting or return")->check(CLI::IsMember({"hitting", "return"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const auto config = resolve(f);
    if (density->parsed()) {
      qhit::app::cmd_density(config, &std::cerr);
    } else if (law->parsed()) {
      qhit::app::cmd_law(config, qhit::app::law_mode_from_string(f.mode), &std::cerr);
    } else if (short_returns->parsed()) {
      qhit::app::cmd_short_returns(config, &std::cerr);
    } else if (audit->parsed()) {
      const auto verdict = qhit::app::cmd_audit(config, &std::cerr);
      std::cout << "verdict: " << verdict.verdict << "\n";
    } else {
      qhit::app::AcceptOptions options;
      options.seed = f.seed.value_or(options.seed);
      options.threads = config.threads;
      options.scratch = std::filesystem::path(config.out_dir) / "accept_scratch";
      const auto results = qhit::app::run_acceptance(options, &std::cerr);
      std::cout << qhit::app::render_acceptance(results);
      bool all = true;
      for (const auto& r : results) {
        if (!r.pass) std::cerr << "failed: criterion " << r.id << " (" << r.name << ")\n";
        all = all && r.pass;
      }
      return all ? 0 : kExitFailure;
    }
    return 0;
  } catch (const qhit::app::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const qhit::ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kExitResource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
