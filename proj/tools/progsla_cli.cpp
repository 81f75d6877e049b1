// Copyright 2026 The progsla Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// progsla command line: every pipeline stage as a subcommand plus `pipeline`.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "progsla/progsla.hpp"

namespace fs = std::filesystem;
using namespace progsla;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string seed;
  std::string out = ".";
};

void add_common(CLI::App* cmd, Common& c, bool needs_out = true) {
  cmd->add_option("--config", c.config, "key = value config file (see `progsla config`)")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.sets, "override a config key, e.g. --set users.n=500")->take_all();
  cmd->add_option("--seed", c.seed, "master seed (overrides the config)");
  if (needs_out) cmd->add_option("--out", c.out, "output directory")->capture_default_str();
}

Config make_config(const Common& c) {
  Config cfg;
  if (!c.config.empty()) cfg.merge_file(c.config);
  for (const auto& s : c.sets) cfg.set_assignment(s);
  if (!c.seed.empty()) cfg.set("seed", c.seed);
  cfg.validate();
  return cfg;
}

std::string in_dir(const std::string& flag, const std::string& out, const char* name) {
  return flag.empty() ? (fs::path(out) / name).string() : flag;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"progressive SLA specification toolkit"};
  app.require_subcommand(1);

  Common common;
  std::string geo_csv, trace_csv, energy_csv, ci_csv, catalog_json, population_json;

  auto* config_cmd = app.add_subcommand("config", "print every config key with its effective value and description");
  add_common(config_cmd, common, false);

  auto* geo_cmd = app.add_subcommand("synth-geo", "synthesize (or normalize) geotemporal series -> geo.csv");
  add_common(geo_cmd, common);

  auto* sim_cmd = app.add_subcommand("simulate", "run static, migration and pauser treatments -> traces, costs, energy summary");
  add_common(sim_cmd, common);
  sim_cmd->add_option("--geo", geo_csv, "geotemporal CSV (default <out>/geo.csv)");

  auto* an_cmd = app.add_subcommand("analyze", "migration-rate histogram, aggregated worst case and bootstrap CI");
  add_common(an_cmd, common);
  an_cmd->add_option("--trace", trace_csv, "migration event CSV (default <out>/trace_migration.csv)");

  auto* dt_cmd = app.add_subcommand("downtime", "pre-copy downtime surface and grid worst case");
  add_common(dt_cmd, common);

  auto* cat_cmd = app.add_subcommand("catalog", "build the SLA catalog -> catalog.json");
  add_common(cat_cmd, common);
  cat_cmd->add_option("--energy", energy_csv, "energy summary CSV (default <out>/energy_summary.csv)");
  cat_cmd->add_option("--ci", ci_csv, "migration CI CSV (default <out>/migration_ci.csv)");

  auto* users_cmd = app.add_subcommand("users", "requirements, fitted models and sampled population");
  add_common(users_cmd, common);

  auto* sel_cmd = app.add_subcommand("select", "simulate catalog selection for the population");
  add_common(sel_cmd, common);
  sel_cmd->add_option("--catalog", catalog_json, "catalog JSON (default <out>/catalog.json)");
  sel_cmd->add_option("--population", population_json, "population JSON (default <out>/population.json)");

  auto* sweep_cmd = app.add_subcommand("sweep", "conversion over catalog sizes and the optimal-size CI");
  add_common(sweep_cmd, common);
  sweep_cmd->add_option("--energy", energy_csv, "energy summary CSV (default <out>/energy_summary.csv)");
  sweep_cmd->add_option("--ci", ci_csv, "migration CI CSV (default <out>/migration_ci.csv)");
  sweep_cmd->add_option("--population", population_json, "population JSON (default <out>/population.json)");

  auto* sum_cmd = app.add_subcommand("summarize", "write summary.txt for a directory holding every stage output");
  add_common(sum_cmd, common);

  auto* pipe_cmd = app.add_subcommand("pipeline", "run every stage into a fresh report bundle");
  add_common(pipe_cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const Config cfg = make_config(common);
    const fs::path out = common.out;
    namespace p = pipeline;
    namespace f = pipeline::files;
    if (*config_cmd) {
      for (const auto& k : progsla::config_keys()) std::cout << k.key << " = " << cfg.str(k.key) << "  # " << k.help << '\n';
      return 0;
    }
    if (!*pipe_cmd) fs::create_directories(out);
    if (*geo_cmd) p::stage_geo(cfg, out);
    else if (*sim_cmd) p::stage_simulate(cfg, in_dir(geo_csv, common.out, f::kGeo), out);
    else if (*an_cmd) p::stage_analyze(cfg, in_dir(trace_csv, common.out, f::kTraceMigration), out);
    else if (*dt_cmd) p::stage_downtime(cfg, out);
    else if (*cat_cmd)
      p::stage_catalog(cfg, in_dir(energy_csv, common.out, f::kEnergySummary), in_dir(ci_csv, common.out, f::kMigrationCi),
                       out);
    else if (*users_cmd) p::stage_users(cfg, out);
    else if (*sel_cmd)
      p::stage_select(cfg, in_dir(catalog_json, common.out, f::kCatalogJson),
                      in_dir(population_json, common.out, f::kPopulationJson), out);
    else if (*sweep_cmd)
      p::stage_sweep(cfg, in_dir(energy_csv, common.out, f::kEnergySummary), in_dir(ci_csv, common.out, f::kMigrationCi),
                     in_dir(population_json, common.out, f::kPopulationJson), out);
    else if (*sum_cmd) {
      write_file(out / f::kConfig, cfg.dump());
      p::stage_summary(cfg, out);
    } else if (*pipe_cmd) {
      p::run_pipeline(cfg, out);
      std::cout << read_file(out / f::kSummary);
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 4;
  }
}
