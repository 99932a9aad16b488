#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pvlab/experiments.hpp"

namespace {

// exit categories: 0 ok, 1 unexpected, 2 config parse, 3 refused by
// validation/budget, 4 trust floor
constexpr int kExitParse = 2;
constexpr int kExitRefused = 3;
constexpr int kExitTrustFloor = 4;

int do_validate(const std::string& path, bool override_floor) {
  const auto config = pvlab::ExperimentConfig::from_file(path);
  const auto findings = pvlab::validate(config, override_floor);
  for (const auto& f : findings) {
    std::cout << "finding: " << f.where << ": " << f.message << "\n";
  }
  if (findings.empty()) {
    std::cout << "ok: " << path << " (kind=" << config.kind() << ")\n";
    return 0;
  }
  std::cout << findings.size() << " finding(s)\n";
  return kExitRefused;
}

int do_run(const std::string& path, const pvlab::RunOverrides& overrides) {
  const auto config = pvlab::ExperimentConfig::from_file(path);
  const auto manifest = pvlab::run(config, overrides);
  std::cout << "ran " << manifest.kind << " -> " << manifest.out_dir << " ("
            << manifest.output_checksums.size() << " outputs, "
            << manifest.wall_seconds << " s)\n";
  for (const auto& [name, sum] : manifest.output_checksums) {
    std::cout << "  " << name << "  fnv1a64=" << sum << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pvlab: singular integrals of discrete measures, as experiments"};
  app.require_subcommand(1);

  std::string config_path;
  pvlab::RunOverrides overrides;

  auto* run_cmd = app.add_subcommand("run", "run an experiment config");
  run_cmd->add_option("config", config_path, "experiment config file")->required();
  run_cmd->add_option("--out", overrides.out_dir, "override the output directory");
  run_cmd->add_flag("--plot", overrides.plot, "emit one SVG per CSV");
  run_cmd->add_flag("--override-trust-floor", overrides.override_trust_floor,
                    "allow scales below 2 x resolution");

  auto* validate_cmd = app.add_subcommand("validate", "check a config without running");
  validate_cmd->add_option("config", config_path, "experiment config file")->required();
  validate_cmd->add_flag("--override-trust-floor", overrides.override_trust_floor,
                         "allow scales below 2 x resolution");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("validate")) {
      return do_validate(config_path, overrides.override_trust_floor);
    }
    return do_run(config_path, overrides);
  } catch (const pvlab::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const pvlab::ValidationRefusal& e) {
    std::cerr << "refused: " << e.what() << "\n";
    for (const auto& f : e.findings()) {
      std::cerr << "  finding: " << f.where << ": " << f.message << "\n";
    }
    return kExitRefused;
  } catch (const pvlab::TrustFloorError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kExitTrustFloor;
  } catch (const std::invalid_argument& e) {
    // bad parameter combinations that only surface once the atoms exist,
    // e.g. a signed density where a weighted measure is required
    std::cerr << "refused: " << e.what() << "\n";
    return kExitRefused;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
