// cfflow: realize | build | validate | spectra | induce | report
//
// Exit codes: 0 success, 1 validation or probe failure, 2 configuration error.

#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "cfflow/pipeline.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<int> depth;
  std::optional<std::string> variant;
  bool strict = false;
  bool repair = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> schedule;
};

cfflow::RunConfig resolve(const Overrides& o) {
  cfflow::RunConfig c = o.config.empty() ? cfflow::RunConfig{} : cfflow::load_config(o.config);
  if (o.depth) c.depth = *o.depth;
  if (o.variant) {
    try {
      c.variant = cfflow::parse_variant(*o.variant);
    } catch (const std::exception& e) {
      throw cfflow::ConfigError(e.what());
    }
  }
  if (o.strict) c.strict = true;
  if (o.repair) c.strict = false;
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.output_dir = *o.out;
  if (o.schedule) c.schedule_path = *o.schedule;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cocycle extensions of (C,F) flows: witnesses, towers and spectral probes"};
  app.require_subcommand(1, 1);
  Overrides o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", o.config, "JSON run configuration");
    sub->add_option("-o,--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "seed for randomized instances");
  };
  auto add_tower = [&](CLI::App* sub) {
    sub->add_option("-d,--depth", o.depth, "tower depth (>= 2)");
    sub->add_option("--variant", o.variant, "schedule variant: wn | nm");
    auto* strict = sub->add_flag("--strict", o.strict, "keep N levels of the nm variant without the +1 spacer");
    sub->add_flag("--repair", o.repair, "add the +1 spacer at N levels of the nm variant (default)")->excludes(strict);
  };

  auto* realize = app.add_subcommand("realize", "find a group witness for the target set E");
  add_common(realize);
  auto* build = app.add_subcommand("build", "build and dump the schedule and cocycle, then validate them");
  add_common(build);
  add_tower(build);
  auto* validate = app.add_subcommand("validate", "validate a dumped tower or a fresh build");
  add_common(validate);
  add_tower(validate);
  validate->add_option("--schedule", o.schedule, "schedule.json written by build");
  auto* spectra = app.add_subcommand("spectra", "run the selected spectral probes");
  add_common(spectra);
  add_tower(spectra);
  auto* induce = app.add_subcommand("induce", "exact induced-representation and product checks");
  add_common(induce);
  auto* report = app.add_subcommand("report", "all stages into one directory");
  add_common(report);
  add_tower(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    cfflow::RunConfig c = resolve(o);
    c.check();
    cfflow::CommandResult r;
    if (realize->parsed()) r = cfflow::cmd_realize(c);
    else if (build->parsed()) r = cfflow::cmd_build(c);
    else if (validate->parsed()) r = cfflow::cmd_validate(c);
    else if (spectra->parsed()) r = cfflow::cmd_spectra(c);
    else if (induce->parsed()) r = cfflow::cmd_induce(c);
    else r = cfflow::cmd_report(c);
    std::cout << r.summary << "\n";
    for (const auto& f : r.files) std::cout << "  " << c.output_dir << "/" << f << "\n";
    return r.exit_code;
  } catch (const cfflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
