#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "afrelay/errors.hpp"
#include "afrelay/reporting.hpp"

namespace {

// Flag values live in optionals so that only flags actually given override
// the config file.
struct Flags {
  std::string config;
  std::optional<int> K, M, trials, bins;
  std::optional<double> mu_db, nu_db, zeta2_db, alpha, start, stop, step;
  std::optional<std::string> model, out_dir, axis, zeta2_scale;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  bool bits = false, quick = false, as_printed = false;
};

void add_flags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file or a previous manifest")->check(CLI::ExistingFile);
  app->add_option("--K", f.K, "receive antennas (= relay antennas)");
  app->add_option("--M", f.M, "users; defaults to K");
  app->add_option("--mu-db", f.mu_db, "first-hop power mu in dB");
  app->add_option("--nu-db", f.nu_db, "second-hop power nu in dB");
  app->add_option("--zeta2-db", f.zeta2_db, "second-hop condition number zeta^2 in dB");
  app->add_option("--alpha", f.alpha, "normalized rank for --model rank");
  app->add_option("--model", f.model, "second-hop model")
      ->check(CLI::IsMember({"tsl", "uniform", "rank", "identity"}));
  app->add_option("--trials", f.trials, "Monte Carlo trials (0: analytic only)");
  app->add_option("--seed", f.seed, "master seed");
  app->add_option("--out-dir", f.out_dir, "output directory");
  app->add_option("--axis", f.axis, "sweep axis")->check(CLI::IsMember({"zeta2_db", "alpha", "nu_db", "mu_db"}));
  app->add_option("--start", f.start, "sweep / compare range start");
  app->add_option("--stop", f.stop, "sweep / compare range stop");
  app->add_option("--step", f.step, "sweep / compare range step");
  app->add_option("--zeta2-scale", f.zeta2_scale, "dB reading of zeta^2: power (zeta = 10^(dB/20)) or amplitude (10^(dB/40))")
      ->check(CLI::IsMember({"power", "amplitude"}));
  app->add_option("--bins", f.bins, "histogram bins for aepdf");
  app->add_option("--workers", f.workers, "worker threads, 0 = all cores");
  app->add_flag("--bits", f.bits, "report rates in bits instead of nats");
  app->add_flag("--quick", f.quick, "validate: skip the K=512 oracles");
  app->add_flag("--as-printed-transforms", f.as_printed, "validate: use the printed eta/R forms");
}

afrelay::Config resolve(const std::string& command, const Flags& f) {
  afrelay::Config c = f.config.empty() ? afrelay::Config{} : afrelay::load_config_file(f.config);
  c.command = command;
  auto set = [](auto& dst, const auto& src) {
    if (src) dst = *src;
  };
  set(c.K, f.K);
  set(c.M, f.M);
  set(c.trials, f.trials);
  set(c.bins, f.bins);
  set(c.mu_db, f.mu_db);
  set(c.nu_db, f.nu_db);
  set(c.zeta2_db, f.zeta2_db);
  set(c.alpha, f.alpha);
  set(c.model, f.model);
  set(c.out_dir, f.out_dir);
  set(c.axis, f.axis);
  set(c.zeta2_scale, f.zeta2_scale);
  set(c.seed, f.seed);
  set(c.workers, f.workers);
  if (f.start) c.start = f.start;
  if (f.stop) c.stop = f.stop;
  if (f.step) c.step = f.step;
  if (f.bits) c.bits = true;
  if (f.quick) c.quick = true;
  if (f.as_printed) c.as_printed_transforms = true;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-hop amplify-and-forward relay network: spectra, capacity, MMSE"};
  app.set_version_flag("--version", afrelay::tool_version());
  app.require_subcommand(1);
  Flags flags;
  const std::pair<const char*, const char*> cmds[] = {
      {"aepdf", "eigenvalue densities of K and M vs Monte Carlo histograms"},
      {"sweep", "capacity and MMSE along one parameter axis"},
      {"compare", "proposed vs conventional system over zeta^2, crossing points"},
      {"validate", "run the invariant suite"},
  };
  for (const auto& [name, help] : cmds) add_flags(app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : afrelay::kExitConfig;
  }

  afrelay::Config cfg;
  try {
    cfg = resolve(app.get_subcommands().front()->get_name(), flags);
  } catch (const afrelay::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return afrelay::kExitConfig;
  }
  return afrelay::run_command(cfg, std::cerr);
}
