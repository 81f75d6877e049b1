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


// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "progsla/progsla.hpp"

using namespace progsla;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", n, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// Round-by-round pre-copy: send what is dirty, the guest dirties D * (time
// spent sending), stop once the remainder fits under the threshold.
double iterative_downtime(double v_mem, double v_thd, double r, double d, double t_resume) {
  double remaining = v_mem;
  while (remaining > v_thd) remaining = d * (remaining / r);
  return remaining / r + t_resume;
}

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2024);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int worst_index = -1;
  double worst_rel = 0.0;
  for (int i = 0; i < 10000; ++i) {
    downtime::DowntimeParams p;
    p.v_mem = std::pow(10.0, 9.0 + 2.0 * u01(rng));
    p.v_thd = p.v_mem * (0.01 + 0.99 * u01(rng));
    p.t_resume = 10.0 * u01(rng);
    const double r = std::pow(10.0, 6.0 + 4.0 * u01(rng));
    const double d = r * (0.001 + 0.989 * u01(rng));
    const double a = downtime::downtime(p, r, d);
    const double b = iterative_downtime(p.v_mem, p.v_thd, r, d, p.t_resume);
    const double rel = std::abs(a - b) / std::abs(b);
    if (rel > worst_rel) {
      worst_rel = rel;
      worst_index = i;
    }
  }
  const auto p = downtime::reference_params();
  bool bound = true;
  for (double r : p.r_grid)
    for (double d : p.d_grid)
      if (d < r && downtime::downtime(p, r, d) > p.v_thd / r + p.t_resume) bound = false;
  const double t = seconds_since(t0);
  report(1, worst_rel <= 1e-9 && bound && t < 1.0,
         "max relative error " + sci(worst_rel) + " (tuple " + std::to_string(worst_index) +
             ") over 10000 tuples; grid bound " + (bound ? "holds" : "violated") + "; " + num(t, 3) + " s");
}

void criterion2() {
  const double av = sla::migration_availability(4.0, 400.0);
  const auto c = sla::build_catalog_8(sla::BaseVm{}, sla::MigrationStats{av, 0.4}, sla::PauserSavings::heuristic());
  bool has_875 = false, has_third = false;
  for (const auto& o : c) {
    has_875 = has_875 || o.availability == 0.875;
    has_third = has_third || std::round(o.availability * 1e5) == 33333.0;
  }
  const bool ok = std::round(av * 1e5) == 98148.0 && std::abs(av - 0.9812) <= 0.0005 && has_875 && has_third;
  report(2, ok, "availability " + num(av) + " vs reference 0.9812 (diff " + num(std::abs(av - 0.9812) * 100, 4) +
                    " pp); catalog has 0.875: " + (has_875 ? "yes" : "no") + ", 0.33333: " + (has_third ? "yes" : "no"));
}

void criterion3() {
  const sla::BaseVm base;
  const double price = sla::vm_price(base.en_cost(), base.availability, base.service_cost);
  report(3, std::round(price * 1e4) == 2800.0, "en_cost " + num(base.en_cost(), 5) + " -> price " + num(price, 4) + " USD/h");
}

void criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  for (double x = 0.0; x <= 1.0; x += 0.001) ok = ok && selection::satisfaction(x, x) == 0.99;
  const bool identities = ok;
  ok = ok && selection::quit_probability(1) == 0.0 && std::abs(selection::quit_probability(2) - 0.015) <= 1e-12 &&
       std::abs(selection::quit_probability(3) - 0.04455) <= 1e-12;
  Rng rng(7);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  bool monotone = true;
  for (int trial = 0; trial < 2000; ++trial) {
    selection::SatisfactionParams p;
    p.alpha = 1.0 + 100.0 * u01(rng);
    p.beta = 0.001 + 0.1 * u01(rng);
    p.gamma = 0.5 + 0.5 * u01(rng);
    const double o = u01(rng);
    double a1 = u01(rng), a2 = u01(rng);
    if (a1 > a2) std::swap(a1, a2);
    monotone = monotone && selection::satisfaction(o, a1, p) <= selection::satisfaction(o, a2, p);
    const double cc = 0.05 * u01(rng);
    const int m = 1 + static_cast<int>(100 * u01(rng));
    monotone = monotone && selection::quit_probability(m, cc) <= selection::quit_probability(m + 1, cc) + 1e-15;
  }
  const double t = seconds_since(t0);
  report(4, ok && monotone && t < 1.0,
         std::string("satisfaction(x,x)=0.99 ") + (identities ? "exact" : "not exact") + "; quit(1,2,3) = " +
             num(selection::quit_probability(1), 5) + ", " + num(selection::quit_probability(2), 5) + ", " +
             num(selection::quit_probability(3), 5) + "; monotonicity " + (monotone ? "holds" : "violated") + "; " +
             num(t, 3) + " s");
}

void criterion5() {
  const std::vector<double> x{3, 3, 3, 4};
  const std::size_t b = 10000;
  const auto dist = stats::bootstrap_distribution(x, stats::Statistic::max(), b, 99);
  double hits = 0;
  for (double v : dist) hits += v == 3.0;
  const double p = std::pow(0.75, 4);
  const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(b));
  const double emp = hits / static_cast<double>(b);
  const auto ci = stats::bootstrap_ci({5, 5, 5, 5, 5}, stats::Statistic::max(), 0.95, b, 3);
  report(5, std::abs(emp - p) <= 3 * sigma && ci.low == ci.high,
         "P(max=3) empirical " + num(emp, 4) + " vs exact " + num(p, 4) + " (3 sigma = " + num(3 * sigma, 4) +
             "); constant input CI [" + num(ci.low, 1) + ", " + num(ci.high, 1) + "]");
}

std::map<std::string, std::string> read_bundle(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = read_file(e.path());
  return files;
}

void criterion6(const fs::path& bundle, double seconds) {
  namespace f = pipeline::files;
  const auto pop = users::load_population(bundle / f::kPopulationJson);
  const auto catalog = sla::load_catalog(bundle / f::kCatalogJson);
  const auto outcome = nlohmann::json::parse(read_file(bundle / f::kOutcomeJson));
  const auto& per_user = outcome.at("per_user");
  const auto& agg = outcome.at("aggregates");

  std::vector<int> web(catalog.size() + 1, 0), hpc(catalog.size() + 1, 0);
  double wtp_matched = 0, wtp_unmatched = 0;
  int n_matched = 0, n_unmatched = 0;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const auto status = per_user[i].at("status").get<std::string>();
    if (status == "chosen") {
      const int id = per_user[i].at("offer").get<int>();
      (pop[i].kind == users::Kind::kWeb ? web : hpc)[static_cast<std::size_t>(id)]++;
      wtp_matched += pop[i].wtp;
      ++n_matched;
    } else if (status == "unmatched") {
      wtp_unmatched += pop[i].wtp;
      ++n_unmatched;
    }
  }
  int web_mode = 1;
  for (std::size_t id = 1; id <= catalog.size(); ++id)
    if (web[id] > web[static_cast<std::size_t>(web_mode)]) web_mode = static_cast<int>(id);
  int hpc_total = 0;
  for (int v : hpc) hpc_total += v;
  const int hpc_low = hpc[catalog.size()] + hpc[catalog.size() - 1];
  const double unmatched_frac = static_cast<double>(n_unmatched) / static_cast<double>(pop.size());
  const double mean_unmatched = n_unmatched ? wtp_unmatched / n_unmatched : 0.0;
  const double mean_matched = n_matched ? wtp_matched / n_matched : 0.0;
  const double savings = agg.at("weighted_en_savings").get<double>();

  const bool ok = unmatched_frac < 0.10 && web_mode == 2 && 2 * hpc_low > hpc_total &&
                  (n_unmatched == 0 || mean_unmatched < mean_matched) && savings > 0.0 && seconds < 30.0;
  report(6, ok,
         "unmatched " + num(100 * unmatched_frac, 1) + "% (reference < 5%); web mode SLA" + std::to_string(web_mode) +
             "; HPC at SLA" + std::to_string(catalog.size() - 1) + "+" + std::to_string(catalog.size()) + " " +
             std::to_string(hpc_low) + "/" + std::to_string(hpc_total) + "; mean WTP unmatched " +
             num(mean_unmatched, 4) + " < matched " + num(mean_matched, 4) + "; weighted en_savings " +
             num(100 * savings, 1) + "% (reference 39%); pipeline " + num(seconds, 1) + " s");
}

void criterion7(const fs::path& bundle) {
  namespace f = pipeline::files;
  const Config c;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = pipeline::run_sweep(c, pipeline::sla_inputs(c, bundle / f::kEnergySummary, bundle / f::kMigrationCi),
                                     users::load_population(bundle / f::kPopulationJson));
  const double t = seconds_since(t0);
  const auto mean = selection::mean_conversion(r);
  bool rising = true, falling = true;
  int first_dip = 0, first_rise = 0;
  for (std::size_t s = 1; s < r.sizes.size(); ++s) {
    if (r.sizes[s] <= 6 && mean[s] < mean[s - 1]) {
      rising = false;
      if (!first_dip) first_dip = r.sizes[s];
    }
    if (r.sizes[s - 1] >= 30 && mean[s] > mean[s - 1]) {
      falling = false;
      if (!first_rise) first_rise = r.sizes[s];
    }
  }
  const auto& ci = r.optimal_ci;
  const bool ci_ok = ci.high - ci.low <= 8.0 && ci.low >= 4.0 && ci.high <= 20.0;
  const bool same_as_bundle = selection::sweep_ci_to_csv(r) == read_file(bundle / f::kSweepCi);
  std::string detail = "sizes " + std::to_string(r.sizes.front()) + ".." + std::to_string(r.sizes.back()) + " x " +
                       std::to_string(r.runs) + " runs; non-decreasing through 6: " +
                       (rising ? "yes" : "no (dip at " + std::to_string(first_dip) + ")") +
                       "; non-increasing from 30: " +
                       (falling ? "yes" : "no (rise at " + std::to_string(first_rise) + ")") + "; argmax CI [" +
                       num(ci.low, 0) + ", " + num(ci.high, 0) + "] (reference [8, 10]); " + num(t, 1) + " s";
  report(7, rising && falling && ci_ok && same_as_bundle && t < 300.0 && r.sizes.size() == 60 && r.runs == 100, detail);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();

  const fs::path root = fs::temp_directory_path() / ("progsla_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  try {
    const Config c;
    auto t0 = std::chrono::steady_clock::now();
    pipeline::run_pipeline(c, root / "run1");
    const double seconds = seconds_since(t0);
    criterion6(root / "run1", seconds);
    criterion7(root / "run1");
    pipeline::run_pipeline(c, root / "run2");
    const auto a = read_bundle(root / "run1");
    const auto b = read_bundle(root / "run2");
    std::string first_diff;
    for (const auto& [name, content] : a) {
      auto it = b.find(name);
      if ((it == b.end() || it->second != content) && first_diff.empty()) first_diff = name;
    }
    const bool same = a == b;
    report(8, same && !a.empty(),
           std::to_string(a.size()) + " files, " + (same ? "byte-identical" : "first difference in " + first_diff));
  } catch (const std::exception& e) {
    std::printf("FAIL pipeline error: %s\n", e.what());
    ++failures;
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
