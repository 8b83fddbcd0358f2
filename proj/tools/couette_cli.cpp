// couette: command-line front end for the experiment runner.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "couette/experiment.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<double> nu, t_end;
  std::optional<int> grid_n;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void add_run_flags(CLI::App* sub, Overrides& o) {
  sub->add_option("-c,--config", o.config, "YAML configuration file");
  sub->add_option("--nu", o.nu, "viscosity");
  sub->add_option("--grid-n", o.grid_n, "grid points per axis");
  sub->add_option("--t-end", o.t_end, "final time");
  sub->add_option("--seed", o.seed, "random seed");
  sub->add_option("--out", o.out, "output directory");
}

couette::RunConfig load(const Overrides& o, couette::Mode mode) {
  couette::RunConfig cfg;
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw couette::ConfigError("cannot read config file " + o.config);
    std::stringstream ss;
    ss << in.rdbuf();
    cfg = couette::parse_config(ss.str());
  }
  cfg.mode = mode;
  if (o.nu) cfg.nu = *o.nu;
  if (o.t_end) cfg.t_end = *o.t_end;
  if (o.grid_n) cfg.n = *o.grid_n;
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.output_dir = *o.out;
  couette::validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vorticity near Couette flow: simulation and diagnostics"};
  app.require_subcommand(1);
  Overrides o;
  const std::pair<const char*, couette::Mode> modes[] = {{"simulate", couette::Mode::simulate},
                                                         {"linear", couette::Mode::linear},
                                                         {"fp-decay", couette::Mode::fp_decay},
                                                         {"picard", couette::Mode::picard},
                                                         {"probe", couette::Mode::probe}};
  std::vector<std::pair<CLI::App*, couette::Mode>> run_subs;
  for (const auto& [name, mode] : modes) {
    auto* sub = app.add_subcommand(name, std::string("run in ") + name + " mode");
    add_run_flags(sub, o);
    run_subs.push_back({sub, mode});
  }
  std::string snap_base;
  auto* info = app.add_subcommand("snapshot-info", "print snapshot metadata and verify the checksum");
  info->add_option("base", snap_base, "snapshot path without extension")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (info->parsed()) {
      for (const auto& [k, v] : couette::read_snapshot_meta(snap_base)) std::cout << k << ": " << v << "\n";
      const auto s = couette::read_snapshot(snap_base);
      std::cout << "checksum: ok\nmass: " << couette::detail::fmt(couette::mass(s.field)) << "\n";
      return 0;
    }
    for (const auto& [sub, mode] : run_subs) {
      if (!sub->parsed()) continue;
      const auto cfg = load(o, mode);
      couette::run_experiment(cfg, &std::cerr);
      std::cout << "wrote " << couette::resolve_output_dir(cfg) << "\n";
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return couette::exit_code_for(e);
  }
}
