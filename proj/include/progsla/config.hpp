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

#pragma once

// Key-value pipeline configuration.
//
// File format: one `key = value` per line; `#` starts a comment; blank lines
// are ignored. Keys are dotted (`ga.w_mig`). Unknown keys are rejected so a
// typo cannot silently fall back to a default. Later settings override
// earlier ones, and command-line `--set key=value` overrides the file.

#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "progsla/error.hpp"
#include "progsla/geotemporal.hpp"
#include "progsla/io.hpp"

namespace progsla {

struct ConfigKey {
  const char* key;
  const char* value;
  const char* help;
};

// clang-format off
inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"seed", "42", "master seed; every stage seed derives from it"},
      {"horizon_hours", "2160", "simulated hours (3 months)"},
      {"geo.input", "", "geotemporal CSV to load instead of synthesizing"},
      {"geo.locations", "", "id:offset_h:price_mean:temp_mean;... (empty = six built-in sites)"},
      {"geo.start", "2014-01-01T00:00:00Z", "first hour of synthesized series"},
      {"geo.price_amplitude", "0.3", "relative daily price swing"},
      {"geo.price_noise", "0.1", "sigma of relative hourly price noise"},
      {"geo.temp_daily_amplitude", "4", "daily temperature swing, C"},
      {"geo.temp_annual_amplitude", "10", "annual temperature swing, C"},
      {"geo.temp_noise", "1", "sigma of hourly temperature noise, C"},
      {"cloud.pms", "20", "PMs, split as evenly as possible over the locations"},
      {"cloud.pm_capacity", "8", "VM slots per PM"},
      {"cloud.vm_count", "80", "VMs per treatment category"},
      {"cloud.vm_memory_bytes", "4e9", "VM memory"},
      {"power.p_idle", "100", "PM idle draw, W"},
      {"power.p_peak", "200", "PM peak draw, W"},
      {"ga.population", "20", "GA population"},
      {"ga.generations", "50", "GA generations per hour"},
      {"ga.tournament", "3", "tournament size"},
      {"ga.mutation_rate", "0", "per-gene mutation rate (0 = 1/VMs)"},
      {"ga.elitism", "1", "elite individuals kept per generation"},
      {"ga.w_mig", "4.5e-4", "migration penalty, USD per migration"},
      {"pauser.placement", "packed", "home placement of paused VMs: 'spread' or 'packed'"},
      {"pauser.slots", "per_dc", "pause-slot ranking: 'global' (shared by all DCs) or 'per_dc'"},
      {"pauser.window_days", "7", "trailing days used to rank hour slots"},
      {"downtime.v_mem_bits", "32e9", "VM memory, bits"},
      {"downtime.v_thd_bits", "8e9", "pre-copy stop threshold, bits"},
      {"downtime.t_resume_s", "5", "resume time, s"},
      {"downtime.r_points", "41", "transfer-rate grid points (10 Mbit/s .. 1 Gbit/s)"},
      {"downtime.d_points", "121", "dirty-rate grid points (1 kbit/s .. 1 Gbit/s)"},
      {"downtime.d_mig_s", "400", "downtime per migration used for the SLA guarantee, s"},
      {"stats.interval_hours", "24", "aggregation interval"},
      {"stats.ci_level", "0.95", "bootstrap confidence level"},
      {"stats.resamples", "10000", "bootstrap resamples"},
      {"sla.migration_rate", "ci", "'ci' = bootstrap CI high end, or a fixed migrations/day"},
      {"sla.pauser_savings", "simulated", "'simulated' or 'heuristic'"},
      {"sla.idle_share", "1", "heuristic pauser savings = fraction * idle_share"},
      {"sla.catalog", "8", "'8' for the fixed catalog or 'n'"},
      {"sla.catalog_n", "8", "catalog size when sla.catalog = n"},
      {"sla.base_price", "0.28", "base VM price, USD/h"},
      {"sla.base_availability", "0.9995", "base VM availability"},
      {"sla.service_cost", "0.1", "service component, USD/h"},
      {"users.n", "1000", "population size"},
      {"users.web_ratio", "1", "web share of the web:HPC ratio"},
      {"users.hpc_ratio", "1.5", "HPC share of the web:HPC ratio"},
      {"users.noise_sigma", "0.05", "sigma of WTP noise, USD/h"},
      {"users.web_threshold", "100", "tolerated missed requests per hour"},
      {"users.hpc_floor", "0.5", "minimum HPC availability requirement"},
      {"users.web_csv", "", "web workload CSV (empty = synthesize)"},
      {"users.hpc_csv", "", "HPC workload CSV (empty = synthesize)"},
      {"users.web_sites", "38", "synthetic web sites"},
      {"users.web_hours", "720", "synthetic web trace length, h"},
      {"users.web_requirement_scale", "0.03", "mean 1 - requirement of synthetic sites"},
      {"users.hpc_users", "481", "synthetic HPC users"},
      {"users.hpc_span_hours", "2160", "synthetic HPC trace span, h"},
      {"users.hpc_load_log_mean", "-4", "log median of synthetic HPC loads"},
      {"users.hpc_load_log_sigma", "2", "log sigma of synthetic HPC loads"},
      {"selection.check_cost", "0.015", "stop probability after the first check"},
      {"selection.alpha", "60", "satisfaction slope"},
      {"selection.beta", "0.01", "satisfaction beta"},
      {"selection.gamma", "0.99", "satisfaction gamma"},
      {"sweep.min", "1", "smallest catalog size"},
      {"sweep.max", "60", "largest catalog size"},
      {"sweep.runs", "100", "runs per catalog size"},
  };
  return keys;
}
// clang-format on

class Config {
 public:
  Config() {
    for (const auto& k : config_keys()) values_[k.key] = k.value;
  }

  static Config from_file(const std::filesystem::path& path) {
    Config c;
    c.merge_file(path);
    return c;
  }

  void merge_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    require_config(static_cast<bool>(in), "cannot open config " + path.string());
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
      ++no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      const auto t = trim(line);
      if (t.empty()) continue;
      const auto eq = t.find('=');
      require_config(eq != std::string_view::npos, path.string() + ":" + std::to_string(no) + ": expected key = value");
      set(std::string(trim(t.substr(0, eq))), std::string(trim(t.substr(eq + 1))));
    }
  }

  /// Applies `key=value`.
  void set_assignment(std::string_view kv) {
    const auto eq = kv.find('=');
    require_config(eq != std::string_view::npos, "expected key=value, got '" + std::string(kv) + "'");
    set(std::string(trim(kv.substr(0, eq))), std::string(trim(kv.substr(eq + 1))));
  }

  void set(const std::string& key, const std::string& value) {
    require_config(values_.count(key) == 1, "unknown config key '" + key + "'");
    values_[key] = value;
  }

  [[nodiscard]] const std::string& str(const std::string& key) const {
    auto it = values_.find(key);
    ensure(it != values_.end(), "config key not registered: " + key);
    return it->second;
  }

  [[nodiscard]] double num(const std::string& key) const {
    const auto v = parse_double(str(key));
    require_config(v.has_value(), "config " + key + ": expected a number, got '" + str(key) + "'");
    return *v;
  }

  [[nodiscard]] long long integer(const std::string& key) const {
    const auto v = parse_int(str(key));
    require_config(v.has_value(), "config " + key + ": expected an integer, got '" + str(key) + "'");
    return *v;
  }

  [[nodiscard]] std::size_t count(const std::string& key) const {
    const auto v = integer(key);
    require_config(v >= 0, "config " + key + ": must be >= 0");
    return static_cast<std::size_t>(v);
  }

  [[nodiscard]] std::uint64_t seed() const {
    const auto v = parse_int(str("seed"));
    require_config(v.has_value() && *v >= 0, "config seed: expected a non-negative integer");
    return static_cast<std::uint64_t>(*v);
  }

  [[nodiscard]] std::vector<geo::Location> locations() const {
    const auto& spec = str("geo.locations");
    if (spec.empty()) return geo::default_locations();
    std::vector<geo::Location> out;
    std::string_view rest = spec;
    while (!rest.empty()) {
      const auto semi = rest.find(';');
      const auto item = trim(rest.substr(0, semi));
      rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
      if (item.empty()) continue;
      std::vector<std::string_view> parts;
      std::size_t start = 0;
      while (true) {
        const auto c = item.find(':', start);
        parts.push_back(item.substr(start, c == std::string_view::npos ? std::string_view::npos : c - start));
        if (c == std::string_view::npos) break;
        start = c + 1;
      }
      require_config(parts.size() == 4, "geo.locations: expected id:offset:price:temp, got '" + std::string(item) + "'");
      const auto off = parse_int(parts[1]);
      const auto price = parse_double(parts[2]);
      const auto temp = parse_double(parts[3]);
      require_config(off && price && temp, "geo.locations: bad number in '" + std::string(item) + "'");
      geo::Location loc{std::string(trim(parts[0])), static_cast<int>(*off), *price, *temp};
      loc.validate();
      out.push_back(loc);
    }
    require_config(!out.empty(), "geo.locations: no locations");
    return out;
  }

  /// Keys whose default is numeric must stay numeric; catches typos before
  /// any stage runs.
  void validate() const {
    for (const auto& k : config_keys()) {
      if (!parse_double(k.value)) continue;
      require_config(parse_double(str(k.key)).has_value(),
                     "config " + std::string(k.key) + ": expected a number, got '" + str(k.key) + "'");
    }
    (void)seed();
  }

  /// Every key with its effective value, one `key = value` per line.
  [[nodiscard]] std::string dump() const {
    std::ostringstream out;
    for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
    return out.str();
  }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace progsla
