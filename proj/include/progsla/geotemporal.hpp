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

// Hourly electricity price and outdoor temperature per data-center location.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "progsla/error.hpp"
#include "progsla/io.hpp"
#include "progsla/rng.hpp"

namespace progsla::geo {

struct Location {
  std::string id;
  int region_offset_hours = 0;  // time-zone shift of the local day
  double price_mean = 0.05;     // USD/kWh
  double temp_mean = 12.0;      // degrees C

  void validate() const {
    require_config(!id.empty(), "location id must not be empty");
    require_config(price_mean > 0.0, "location " + id + ": price_mean must be > 0");
    require_config(region_offset_hours >= -12 && region_offset_hours <= 14,
                   "location " + id + ": region_offset_hours must lie in [-12, 14]");
  }
};

/// Six sites: two US, two shifted to an Asian time zone, two to a European one.
inline std::vector<Location> default_locations() {
  return {
      {"indianapolis", -5, 0.045, 12.0}, {"detroit", -5, 0.050, 10.0},
      {"mankato", 8, 0.060, 16.0},       {"duluth", 9, 0.065, 14.0},
      {"alton", 1, 0.085, 11.0},         {"madison", 1, 0.080, 9.0},
  };
}

inline TimePoint default_start() { return *parse_iso_utc("2014-01-01T00:00:00Z"); }

struct GeotemporalSeries {
  std::string location;
  TimePoint start;
  std::vector<double> prices;        // USD/kWh
  std::vector<double> temperatures;  // degrees C

  [[nodiscard]] std::size_t hours() const noexcept { return prices.size(); }

  [[nodiscard]] TimePoint time_at(std::size_t hour) const {
    return start + std::chrono::hours{static_cast<long long>(hour)};
  }

  void validate() const {
    require_data(!prices.empty(), location + ": series must not be empty");
    require_data(prices.size() == temperatures.size(), location + ": prices and temperatures differ in length");
    require_data(start.time_since_epoch().count() % 3600 == 0, location + ": start not aligned to the hour");
    for (double p : prices) require_data(p >= 0.0 && std::isfinite(p), location + ": negative price");
    for (double t : temperatures) require_data(std::isfinite(t), location + ": non-finite temperature");
  }
};

using SeriesSet = std::map<std::string, GeotemporalSeries>;

inline constexpr std::string_view kCsvHeader = "timestamp,location,price_usd_per_kwh,temperature_c";

/// Reads every location from a geotemporal CSV. Rows of one location must be
/// contiguous in time (one hour apart) but locations may interleave.
inline SeriesSet load_all_series(const std::filesystem::path& path) {
  LineReader reader(path);
  std::string line;
  if (!reader.next(line)) reader.fail("empty file");
  if (trim(line) != kCsvHeader) reader.fail("expected header '" + std::string(kCsvHeader) + "'");

  SeriesSet out;
  while (reader.next(line)) {
    const auto cols = split_csv(line);
    if (cols.size() != 4) reader.fail("malformed row: expected 4 columns");
    const auto ts = parse_iso_utc(cols[0]);
    if (!ts) reader.fail("malformed row: bad timestamp '" + std::string(cols[0]) + "'");
    if (ts->time_since_epoch().count() % 3600 != 0) reader.fail("timestamp not aligned to the hour");
    const std::string loc{trim(cols[1])};
    if (loc.empty()) reader.fail("malformed row: empty location");
    const auto price = parse_double(cols[2]);
    const auto temp = parse_double(cols[3]);
    if (!price || !temp) reader.fail("malformed row: non-numeric value");
    if (*price < 0.0) reader.fail("negative price");

    auto [it, inserted] = out.try_emplace(loc);
    auto& s = it->second;
    if (inserted) {
      s.location = loc;
      s.start = *ts;
    } else if (*ts != s.time_at(s.hours())) {
      reader.fail("non-contiguous timestamps for location " + loc);
    }
    s.prices.push_back(*price);
    s.temperatures.push_back(*temp);
  }
  return out;
}

inline GeotemporalSeries load_series(const std::filesystem::path& path, const std::string& location) {
  auto all = load_all_series(path);
  auto it = all.find(location);
  require_data(it != all.end(), path.string() + ": no rows for location " + location);
  return std::move(it->second);
}

/// Writes series hour-major so locations interleave, matching the reader.
inline std::string series_to_csv(const SeriesSet& set) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  std::size_t max_hours = 0;
  for (const auto& [_, s] : set) max_hours = std::max(max_hours, s.hours());
  for (std::size_t h = 0; h < max_hours; ++h) {
    for (const auto& [id, s] : set) {
      if (h >= s.hours()) continue;
      out << format_iso_utc(s.time_at(h)) << ',' << id << ',' << fmt_double(s.prices[h]) << ','
          << fmt_double(s.temperatures[h]) << '\n';
    }
  }
  return out.str();
}

struct SynthParams {
  double price_amplitude = 0.3;   // relative daily swing
  double price_noise = 0.1;       // sigma of the relative hourly noise
  double temp_daily_amplitude = 4.0;
  double temp_annual_amplitude = 10.0;
  double temp_noise = 1.0;
  int local_peak_hour = 18;       // local hour of the daily price and temperature peak
  TimePoint start = default_start();
};

/// Daily-peak phase in UTC hours: the sinusoid peaks at `local_peak_hour`
/// local time, so two sites whose offsets differ by d hours are shifted by d.
inline double daily_phase(const Location& loc, const SynthParams& p) {
  return static_cast<double>(loc.region_offset_hours + 6 - p.local_peak_hour);
}

inline GeotemporalSeries synth_series(const Location& loc, std::size_t hours, std::uint64_t seed,
                                      const SynthParams& p = {}) {
  loc.validate();
  require_config(hours >= 24, "synth_series: hours must be >= 24");
  using std::numbers::pi;

  GeotemporalSeries s;
  s.location = loc.id;
  s.start = p.start;
  s.prices.resize(hours);
  s.temperatures.resize(hours);

  const auto epoch_hours = std::chrono::floor<std::chrono::hours>(p.start).time_since_epoch().count();
  const auto year_start = std::chrono::sys_days{std::chrono::year_month_day{std::chrono::floor<std::chrono::days>(p.start)}.year() / 1 / 1};
  const double hour_of_year0 =
      std::chrono::duration<double, std::ratio<3600>>(p.start - year_start).count();
  const double phase = daily_phase(loc, p);

  Rng rng(seed);
  std::normal_distribution<double> price_noise(0.0, 1.0);
  std::normal_distribution<double> temp_noise(0.0, 1.0);
  for (std::size_t t = 0; t < hours; ++t) {
    const double utc_hour = static_cast<double>((epoch_hours + static_cast<long long>(t)) % 24);
    const double daily = std::sin(2.0 * pi * (utc_hour + phase) / 24.0);
    const double eps = p.price_noise > 0.0 ? p.price_noise * price_noise(rng) : 0.0;
    s.prices[t] = std::max(0.0, loc.price_mean * (1.0 + p.price_amplitude * daily + eps));

    // Coldest around mid-January.
    const double hoy = hour_of_year0 + static_cast<double>(t);
    const double annual = -std::cos(2.0 * pi * (hoy - 15.0 * 24.0) / 8760.0);
    const double tn = p.temp_noise > 0.0 ? p.temp_noise * temp_noise(rng) : 0.0;
    s.temperatures[t] = loc.temp_mean + p.temp_annual_amplitude * annual + p.temp_daily_amplitude * daily + tn;
  }
  return s;
}

/// Synthesizes one series per location, each on its own derived seed.
inline SeriesSet synth_all(const std::vector<Location>& locations, std::size_t hours, std::uint64_t seed,
                           const SynthParams& p = {}) {
  SeriesSet out;
  for (std::size_t i = 0; i < locations.size(); ++i)
    out.emplace(locations[i].id, synth_series(locations[i], hours, derive_seed(seed, i), p));
  return out;
}

}  // namespace progsla::geo
