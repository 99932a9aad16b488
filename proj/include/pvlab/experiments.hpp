#ifndef PVLAB_EXPERIMENTS_HPP
#define PVLAB_EXPERIMENTS_HPP

#include <map>
#include <string>
#include <vector>

#include "pvlab/config.hpp"
#include "pvlab/diagnostics.hpp"
#include "pvlab/martingale.hpp"

namespace pvlab {

/// One experiment per file. Sections and keys:
///   [experiment] kind, seed, summation (compensated|plain)
///   [measure]    type = segment|cantor|cube|file plus family parameters
///   [kernel]     kernel = riesz m=.. i=.. | hilbert | huovinen-power k=..
///                part=re|im | huovinen-combo
///   [h]          h = power c=.. s=.. | table r=a,b,.. v=..
///   [grid]       eps_max, eps_ratio, eps_count, r_max, r_ratio, r_count,
///                t_count, t_min_frac, depth, partition = dyadic|ifs,
///                override_trust_floor
///   [query]      mode = explicit|random-atoms|all-atoms, points, count,
///                interior_margin
///   [classify]   tail_fraction, tol_cauchy (auto|number), tol_drift
///   [density]    f = one | affine c0=.. cx=.. cy=.. cz=.. |
///                indicator axis=.. below=.., vanish_threshold
///   [limits]     atom_budget, cases
///   [output]     dir, plot, save_measure
struct ExperimentConfig {
  KeyValueConfig cfg;

  static ExperimentConfig from_text(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);

  std::string kind() const { return cfg.get_or("experiment", "kind", ""); }
  std::uint64_t seed() const {
    return static_cast<std::uint64_t>(cfg.get_int("experiment", "seed", 1));
  }
};

struct ValidationFinding {
  std::string where;    // "[section] key" or descriptor token
  std::string message;  // what is wrong, with the offending numbers
};

/// Static checks only (budgets, trust floors, descriptor syntax); empty iff
/// run() would start.
std::vector<ValidationFinding> validate(const ExperimentConfig& config,
                                        bool override_trust_floor = false);

struct RunOverrides {
  std::string out_dir;  // empty: use [output] dir
  bool plot = false;
  bool override_trust_floor = false;
};

struct RunManifest {
  std::string kind;
  std::string out_dir;
  std::uint64_t config_checksum = 0;
  double wall_seconds = 0.0;
  std::map<std::string, std::string> output_checksums;  // file -> fnv1a-64 hex

  std::string to_json() const;
};

/// Refusal carrying the validation findings (exit category 3 in the CLI).
class ValidationRefusal : public std::runtime_error {
 public:
  ValidationRefusal(std::string what, std::vector<ValidationFinding> findings)
      : std::runtime_error(std::move(what)), findings_(std::move(findings)) {}
  const std::vector<ValidationFinding>& findings() const { return findings_; }

 private:
  std::vector<ValidationFinding> findings_;
};

/// Runs the experiment, writes its CSV outputs plus summary.txt and
/// manifest.json under the output directory, and returns the manifest.
/// Identical config + seed reproduce the CSV bytes exactly.
RunManifest run(const ExperimentConfig& config, const RunOverrides& overrides = {});

}  // namespace pvlab

#endif
