#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tcpsync_cli/commands.hpp"
#include "tcpsync_cli/config.hpp"
#include "tcpsync_cli/presets.hpp"

namespace cli = tcpsync::cli;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string preset;
  std::string variant;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
  std::optional<int> jobs;
};

void add_common(CLI::App* sub, CommonFlags& f, bool sweep) {
  auto* config = sub->add_option("--config", f.config_path, "JSON configuration file");
  auto* preset = sub->add_option("--preset", f.preset, "built-in preset name");
  config->excludes(preset);
  sub->add_option("--variant", f.variant, "preset variant")->needs(preset);
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--seed", f.seed, "random seed (packet simulations)");
  sub->add_option("--format", f.format, "trace format")->check(CLI::IsMember({"csv", "json"}));
  if (sweep) sub->add_option("--jobs", f.jobs, "concurrent sweep jobs")->check(CLI::PositiveNumber);
}

cli::ExperimentConfig resolve(const CommonFlags& f) {
  cli::ExperimentConfig cfg;
  if (!f.config_path.empty()) {
    cfg = cli::load_config(f.config_path);
  } else if (!f.preset.empty()) {
    std::optional<std::string> variant;
    if (!f.variant.empty()) variant = f.variant;
    cfg = cli::config_from_json(cli::resolve_preset(f.preset, variant));
  }
  if (f.seed) cfg.seed = *f.seed;
  cfg.validate();
  return cfg;
}

int fail(const cli::ErrorReport& e) {
  std::cerr << nlohmann::json{{"error", e.body}}.dump() << '\n';
  return e.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synchronisation analysis and simulation of competing TCP flow sets"};
  app.require_subcommand(1);

  CommonFlags flags;
  struct Sub {
    const char* name;
    const char* help;
    nlohmann::json (*run)(const cli::ExperimentConfig&, const cli::RunOptions&);
  };
  const Sub subs[] = {
      {"analyze", "equilibria, intrinsic frequencies, coupling and locked states", cli::cmd_analyze},
      {"simulate-fluid", "integrate the fluid model", cli::cmd_simulate_fluid},
      {"simulate-phase", "integrate the delayed phase-oscillator model", cli::cmd_simulate_phase},
      {"simulate-packets", "packet-level dumbbell simulation", cli::cmd_simulate_packets},
      {"sweep", "run a command over a parameter range", cli::cmd_sweep},
  };
  std::vector<std::pair<CLI::App*, const Sub*>> commands;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, flags, std::string(s.name) == "sweep");
    commands.emplace_back(sub, &s);
  }

  auto* preset = app.add_subcommand("preset", "inspect built-in presets");
  preset->require_subcommand(1);
  auto* list = preset->add_subcommand("list", "list presets and their variants");
  auto* show = preset->add_subcommand("show", "print a resolved preset configuration");
  std::string show_name;
  std::string show_variant;
  show->add_option("name", show_name, "preset name")->required();
  show->add_option("--variant", show_variant, "preset variant");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 1;
  }

  try {
    if (*list) {
      for (const auto& p : cli::presets()) {
        std::cout << p.name << "  [" << p.command << "]  " << p.description << '\n';
        const auto names = p.variant_names();
        if (!names.empty()) {
          std::cout << "    variants:";
          for (const auto& n : names) std::cout << ' ' << n;
          std::cout << '\n';
        }
      }
      return 0;
    }
    if (*show) {
      std::optional<std::string> variant;
      if (!show_variant.empty()) variant = show_variant;
      const auto& p = cli::find_preset(show_name);
      const auto cfg = cli::config_from_json(cli::resolve_preset(show_name, variant));
      nlohmann::json out{{"preset", p.name},
                         {"description", p.description},
                         {"scaling", p.scaling},
                         {"command", p.command},
                         {"variants", p.variant_names()},
                         {"config", cli::to_json(cfg)}};
      std::cout << out.dump(2) << '\n';
      return 0;
    }
    for (const auto& [sub, s] : commands) {
      if (!*sub) continue;
      const auto cfg = resolve(flags);
      cli::RunOptions opt;
      if (!flags.out.empty()) opt.out_dir = flags.out;
      opt.format = cli::parse_trace_format(flags.format);
      opt.jobs = flags.jobs;
      const auto report = s->run(cfg, opt);
      if (!opt.out_dir) std::cout << report.dump(2) << '\n';
      return 0;
    }
  } catch (...) {
    return fail(cli::describe_current_exception());
  }
  return 1;
}
