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


#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "progsla/users.hpp"
#include "test_support.hpp"

using namespace progsla;
using namespace progsla::users;

namespace {

WebWorkload flat_site(double rate, std::size_t hours = 24) { return {"s", std::vector<double>(hours, rate)}; }

}  // namespace

TEST(Users, WebRequirementExamples) {
  EXPECT_NEAR(web_requirement(flat_site(120000.0)), 0.99917, 5e-6);
  EXPECT_EQ(web_requirement(flat_site(100.0)), 0.0);
  EXPECT_EQ(web_requirement(flat_site(40.0)), 0.0);
  EXPECT_EQ(web_requirement(flat_site(0.0)), 0.0);
  EXPECT_NEAR(web_requirement(flat_site(667.0)), 0.850, 5e-4);
  // Uses the mean, not the peak.
  EXPECT_DOUBLE_EQ(web_requirement({"s", {0.0, 400.0}}), 0.5);
}

TEST(Users, WebRequirementRejects) {
  EXPECT_THROW(web_requirement(flat_site(100.0), 0.0), ConfigError);
  EXPECT_THROW(web_requirement({"s", {}}), DataError);
  EXPECT_THROW(web_requirement({"s", {10.0, -1.0}}), DataError);
}

TEST(Users, WebRequirementMonotoneInRate) {
  double prev = -1.0;
  for (double rate = 1.0; rate < 1e7; rate *= 1.3) {
    const double r = web_requirement(flat_site(rate));
    EXPECT_GE(r, prev);
    EXPECT_GE(r, 0.0);
    EXPECT_LT(r, 1.0);
    prev = r;
  }
}

TEST(Users, HpcRequirementExamples) {
  EXPECT_EQ(hpc_requirement(0.0, 0.2), 0.5);
  EXPECT_EQ(hpc_requirement(0.2, 0.2), 1.0);
  EXPECT_EQ(hpc_requirement(0.1, 0.2), 0.75);
  EXPECT_EQ(hpc_requirement(5.0, 0.2), 1.0);
  double prev = 0.0;
  for (double load = 0.0; load < 0.5; load += 0.01) {
    const double r = hpc_requirement(load, 0.2);
    EXPECT_GE(r, prev);
    prev = r;
  }
}

TEST(Users, HpcLoadIsDurationTimesRate) {
  HpcWorkload w{"u", {{0.0, 2.0}, {10.0, 4.0}}};
  // mean duration 3 h, 2 jobs over 100 h.
  EXPECT_DOUBLE_EQ(hpc_load(w, 100.0), 0.06);
  EXPECT_EQ(hpc_load({"empty", {}}, 100.0), 0.0);
  EXPECT_THROW(hpc_load({"bad", {{0.0, 0.0}}}, 10.0), DataError);
  EXPECT_DOUBLE_EQ(hpc_lease_weight(0.06), 0.06);
  EXPECT_EQ(hpc_lease_weight(3.0), 1.0);
}

TEST(Users, HpcRequirementsExcludeUsersWithoutJobs) {
  std::vector<HpcWorkload> ws{{"a", {{0.0, 10.0}}}, {"idle", {}}, {"b", {{0.0, 1.0}, {50.0, 50.0}}}};
  const auto set = hpc_requirements(ws);
  ASSERT_EQ(set.users.size(), 2u);
  EXPECT_EQ(set.users[0], "a");
  EXPECT_EQ(set.users[1], "b");
  // Span is 0..100 h.
  EXPECT_DOUBLE_EQ(set.loads[0], 0.1);
  EXPECT_DOUBLE_EQ(set.loads[1], 0.51);
  for (double a : set.av_offsets) {
    EXPECT_GE(a, 0.5);
    EXPECT_LE(a, 1.0);
  }
  EXPECT_THROW(hpc_requirements({{"idle", {}}}), DataError);
}

TEST(Users, ExponentialFitRecoversScale) {
  Rng rng(9);
  const ExpFit truth{0.5, 1.0, 0.04};
  std::vector<double> xs;
  for (int i = 0; i < 20000; ++i) xs.push_back(truth.sample(rng));
  const auto fit = fit_exponential(xs, 0.5, 1.0);
  EXPECT_NEAR(fit.scale, 0.04, 0.04 * 0.05);
  for (double x : xs) {
    EXPECT_GE(x, 0.5);
    EXPECT_LE(x, 1.0);
  }
}

TEST(Users, PopulationSplitAndInvariants) {
  const auto pop = sample_population(PopulationParams{}, RequirementModel{}, 42);
  ASSERT_EQ(pop.size(), 1000u);
  const auto n_web = std::count_if(pop.begin(), pop.end(), [](const auto& u) { return u.kind == Kind::kWeb; });
  EXPECT_EQ(n_web, 400);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    EXPECT_NO_THROW(pop[i].validate());
    EXPECT_GT(pop[i].wtp, 0.0);
    if (pop[i].kind == Kind::kWeb) EXPECT_EQ(pop[i].lease_weight, 1.0);
    if (i > 0) EXPECT_FALSE(pop[i - 1].kind == Kind::kHpc && pop[i].kind == Kind::kWeb);
  }
}

TEST(Users, ZeroNoiseGivesExactWtp) {
  PopulationParams p;
  p.noise_sigma = 0.0;
  for (const auto& u : sample_population(p, RequirementModel{}, 3)) EXPECT_EQ(u.wtp, u.av_offset * 0.28);
}

TEST(Users, PopulationDeterministicUnderSeed) {
  const auto a = sample_population(PopulationParams{}, RequirementModel{}, 11);
  const auto b = sample_population(PopulationParams{}, RequirementModel{}, 11);
  const auto c = sample_population(PopulationParams{}, RequirementModel{}, 12);
  EXPECT_EQ(to_json(a), to_json(b));
  EXPECT_NE(to_json(a), to_json(c));
}

TEST(Users, WebUsersRequireMoreThanHpcUsers) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto pop = sample_population(PopulationParams{}, RequirementModel{}, seed);
    double web = 0.0, hpc = 0.0;
    int nw = 0, nh = 0;
    for (const auto& u : pop) (u.kind == Kind::kWeb ? (web += u.av_offset, ++nw) : (hpc += u.av_offset, ++nh));
    EXPECT_GT(web / nw, hpc / nh) << "seed " << seed;
  }
}

TEST(Users, WtpSupportsOverlap) {
  for (std::uint64_t seed : {1ULL, 42ULL, 99ULL}) {
    const auto pop = sample_population(PopulationParams{}, RequirementModel{}, seed);
    double web_lo = 1e9, web_hi = 0.0, hpc_lo = 1e9, hpc_hi = 0.0;
    for (const auto& u : pop) {
      auto& lo = u.kind == Kind::kWeb ? web_lo : hpc_lo;
      auto& hi = u.kind == Kind::kWeb ? web_hi : hpc_hi;
      lo = std::min(lo, u.wtp);
      hi = std::max(hi, u.wtp);
    }
    EXPECT_LT(std::max(web_lo, hpc_lo), std::min(web_hi, hpc_hi));
  }
}

TEST(Users, PopulationRejectsBadParams) {
  PopulationParams p;
  p.n = 0;
  EXPECT_THROW(sample_population(p, RequirementModel{}, 1), ConfigError);
  p = PopulationParams{};
  p.noise_sigma = -0.1;
  EXPECT_THROW(sample_population(p, RequirementModel{}, 1), ConfigError);
}

TEST(Users, SyntheticWorkloadsYieldPlausibleRequirements) {
  const auto web = synth_web_workloads(WebSynthParams{}, 5);
  ASSERT_EQ(web.size(), 38u);
  double sum = 0.0;
  for (const auto& w : web) sum += web_requirement(w);
  EXPECT_GT(sum / 38.0, 0.9);

  HpcSynthParams hp;
  hp.users = 100;
  const auto hpc = synth_hpc_workloads(hp, 5);
  ASSERT_EQ(hpc.size(), 100u);
  const auto set = hpc_requirements(hpc);
  double m = 0.0;
  for (double a : set.av_offsets) m += a;
  EXPECT_LT(m / static_cast<double>(set.av_offsets.size()), 0.75);
}

TEST(Users, WorkloadCsvRoundTrip) {
  TempDir dir;
  WebSynthParams wp;
  wp.sites = 3;
  wp.hours = 48;
  const auto web = synth_web_workloads(wp, 8);
  const TimePoint start = *parse_iso_utc("2014-01-01T00:00:00Z");
  write_file(dir / "web.csv", web_workloads_to_csv(web, start));
  const auto web2 = load_web_workloads(dir / "web.csv");
  ASSERT_EQ(web2.size(), web.size());
  for (std::size_t i = 0; i < web.size(); ++i) {
    EXPECT_EQ(web2[i].site, web[i].site);
    EXPECT_EQ(web2[i].hourly_request_rates, web[i].hourly_request_rates);
  }

  const std::vector<HpcWorkload> hpc{{"u1", {{0.5, 1.25}, {3.0, 2.0}}}, {"u2", {{1.0, 0.75}}}};
  write_file(dir / "hpc.csv", hpc_workloads_to_csv(hpc));
  const auto hpc2 = load_hpc_workloads(dir / "hpc.csv");
  ASSERT_EQ(hpc2.size(), 2u);
  EXPECT_EQ(hpc2[0].jobs.size(), 2u);
  EXPECT_EQ(hpc2[0].jobs[1].duration_h, 2.0);
  EXPECT_EQ(hpc2[1].user, "u2");

  write_file(dir / "bad.csv", "user,submit_ts,duration_h\nu1,0,-2\n");
  EXPECT_THROW(load_hpc_workloads(dir / "bad.csv"), DataError);
}

TEST(Users, PopulationJsonRoundTrip) {
  TempDir dir;
  PopulationParams p;
  p.n = 50;
  const auto pop = sample_population(p, RequirementModel{}, 2);
  write_file(dir / "pop.json", to_json(pop).dump());
  const auto back = load_population(dir / "pop.json");
  ASSERT_EQ(back.size(), pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    EXPECT_EQ(back[i].kind, pop[i].kind);
    EXPECT_EQ(back[i].av_offset, pop[i].av_offset);
    EXPECT_EQ(back[i].wtp, pop[i].wtp);
    EXPECT_EQ(back[i].lease_weight, pop[i].lease_weight);
  }
  write_file(dir / "bad.json", R"([{"kind":"gpu","av_offset":0.5,"wtp":0.1,"lease_weight":1}])");
  EXPECT_THROW(load_population(dir / "bad.json"), DataError);
  write_file(dir / "trunc.json", "[{");
  EXPECT_THROW(load_population(dir / "trunc.json"), DataError);
}
