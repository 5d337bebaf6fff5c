#pragma once

// Run configuration for the command-line pipeline.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cfflow/abelian.hpp"
#include "cfflow/cftower.hpp"

namespace cfflow {

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GroupSpec {
  std::vector<long> orders;
  std::vector<Element> v_images;
  std::vector<Element> subgroup;  // generators of H; empty means trivial
};

/// A test function: a column of level k (optionally chi-twisted) or an explicit interval of F_k.
struct FunctionSpec {
  int level = 1;
  long column = 0;
  bool twisted = false;
  std::optional<std::pair<std::string, std::string>> interval;
};

struct WeakLimitProbe {
  std::string label;
  Element chi;
  long j = 1;
  int max_level = 0;  // report only labeled levels <= max_level; 0 keeps all
};

struct SingularityProbe {
  Element chi, eta;
};

struct EigenGrid {
  double from = -10, to = 10, step = 0.01;
  int levels_per_class = 1;
};

struct CyclicityProbe {
  FunctionSpec f;
  Element chi;
  std::optional<FunctionSpec> g;  // tensor probe when present
  std::optional<Element> chi2;
  std::string t0 = "0", dt = "1";
  long count = 1;
  long dimension = 0;
};

struct PeriodogramProbe {
  FunctionSpec f;
  Element chi;
  std::string t0 = "0", dt = "1";
  long count = 64;
  double omega_from = 0, omega_to = 3.14159, omega_step = 0.01;
};

struct CorrelationProbe {
  FunctionSpec f, g;
  Element chi;
  std::vector<std::string> times;
};

struct Thresholds {
  double weak_limit = 0.25;
  double singularity = 0.5;
  double eigenvalue = 0.05;
  double rigidity = 0.3;
};

struct ProbeConfig {
  std::vector<WeakLimitProbe> weak_limits;
  std::vector<SingularityProbe> singularity;
  std::optional<EigenGrid> eigenvalue;
  std::vector<int> rigidity;
  std::vector<CyclicityProbe> cyclicity;
  std::vector<PeriodogramProbe> periodogram;
  std::vector<CorrelationProbe> correlations;
  bool strong_residual = false;
  Thresholds thresholds;
  bool empty() const {
    return weak_limits.empty() && singularity.empty() && !eigenvalue && rigidity.empty() && cyclicity.empty() &&
           periodogram.empty() && correlations.empty();
  }
};

struct InduceConfig {
  long induction_instances = 100;
  long cross_section_instances = 20;
  long product_instances = 50;
  long max_order = 24;
  long max_index = 6;
  long max_dim = 8;
};

struct RunConfig {
  std::set<long> target;
  std::optional<GroupSpec> group;
  SearchBounds search;
  Variant variant = Variant::WN;
  int depth = 5;
  std::optional<std::pair<std::string, std::string>> xi;
  bool strict = false;
  std::vector<std::string> assignment;  // empty: round-robin
  ProbeConfig probes;
  InduceConfig induce;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  bool csv = true;
  bool json = true;
  std::string schedule_path;  // validate: a dumped schedule to re-check instead of building

  /// Structural checks that need no group: depth, target, formats.
  void check() const;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

}  // namespace cfflow
