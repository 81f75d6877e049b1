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


#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "progsla/selection.hpp"
#include "progsla/slamodel.hpp"
#include "progsla/users.hpp"

using namespace progsla;
using namespace progsla::selection;
using users::Kind;
using users::UserProfile;

namespace {

// Direct evaluation of the chain sum with the product written out.
double quit_oracle(int m, double c) {
  double total = 0.0;
  for (int j = 1; j <= m - 1; ++j) {
    double prod = 1.0;
    for (int k = 1; k <= j - 1; ++k) prod *= 1.0 - std::min(1.0, k * c);
    total += std::min(1.0, j * c) * prod;
  }
  return total;
}

sla::Catalog default_catalog() {
  std::vector<double> s(25);
  for (int k = 0; k <= 24; ++k) s[static_cast<std::size_t>(k)] = k / 24.0 * 0.95;
  return sla::build_catalog_8(sla::BaseVm{}, sla::MigrationStats{0.981481, 0.47}, sla::PauserSavings::simulated(s));
}

}  // namespace

TEST(Selection, SatisfactionExamples) {
  for (double x : {0.0, 0.3, 0.5, 0.9, 1.0}) EXPECT_NEAR(satisfaction(x, x), 0.99, 1e-15);
  EXPECT_NEAR(satisfaction(0.9, 0.8), 0.99 / (0.99 + 0.01 * std::exp(4.86)), 1e-15);
  EXPECT_NEAR(satisfaction(0.9, 0.8), 0.4342, 5e-5);
  EXPECT_NEAR(satisfaction(0.5, 1.0), 0.999994, 5e-7);
}

TEST(Selection, SatisfactionMonotoneAndBounded) {
  for (double o = 0.0; o <= 1.0; o += 0.05) {
    const double upper = 0.99 / (0.99 + 0.01 * std::exp(-o * o * 60.0));
    double prev = 0.0;
    for (double a = 0.0; a <= 1.0; a += 0.01) {
      const double s = satisfaction(o, a);
      EXPECT_GE(s, prev);
      EXPECT_GT(s, 0.0);
      EXPECT_LE(s, upper + 1e-15);
      prev = s;
    }
  }
}

TEST(Selection, UtilityExamples) {
  UserProfile u{Kind::kWeb, 0.9, 0.28, 1.0};
  sla::SlaOffer o{1, 1, 0.9, 0.0, 0.27};
  EXPECT_NEAR(utility(u, o), 0.0072, 1e-12);
  o.price = 0.5;
  EXPECT_LT(utility(u, o), 0.0);
  o.price = 0.0;
  EXPECT_GT(utility(u, o), 0.0);
}

TEST(Selection, QuitProbabilityExamples) {
  EXPECT_EQ(quit_probability(1), 0.0);
  EXPECT_NEAR(quit_probability(2), 0.015, 1e-12);
  EXPECT_NEAR(quit_probability(3), 0.04455, 1e-12);
}

TEST(Selection, QuitProbabilityMatchesOracleAndIsMonotone) {
  for (double c : {0.0, 0.005, 0.015, 0.05, 0.2, 0.6}) {
    double prev = 0.0;
    for (int m = 1; m <= 80; ++m) {
      const double q = quit_probability(m, c);
      EXPECT_NEAR(q, quit_oracle(m, c), 1e-12);
      EXPECT_GE(q, prev - 1e-15);
      EXPECT_GE(q, 0.0);
      EXPECT_LE(q, 1.0 + 1e-12);
      prev = q;
    }
  }
  for (int m = 1; m <= 40; ++m) {
    double prev = 0.0;
    for (double c = 0.0; c <= 0.3; c += 0.01) {
      const double q = quit_probability(m, c);
      EXPECT_GE(q, prev - 1e-15);
      prev = q;
    }
  }
}

TEST(Selection, EmpiricalQuitFrequencyMatchesProbability) {
  // A user whose first positive offer is the fifth one.
  sla::Catalog c;
  for (int i = 0; i < 6; ++i) c.push_back({i + 1, i + 1, 1.0, 0.0, i < 4 ? 10.0 : 0.01});
  const UserProfile u{Kind::kWeb, 0.5, 0.28, 1.0};
  const auto scan = scan_user(u, c, SatisfactionParams{});
  ASSERT_EQ(scan.first_positive, 4);
  const int runs = 20000;
  int quits = 0;
  for (int r = 0; r < runs; ++r)
    quits += resolve_user(scan, c.size(), 0, 0.015, derive_seed(77, static_cast<std::uint64_t>(r))).status == Status::kQuit;
  const double p = quit_probability(5);
  const double sd = std::sqrt(p * (1 - p) / runs);
  EXPECT_NEAR(static_cast<double>(quits) / runs, p, 3 * sd);
}

TEST(Selection, BaseOnlyCatalogLeavesPoorUserUnmatched) {
  const users::Population pop{{Kind::kHpc, 0.5, 0.05, 0.3}};
  const auto out = simulate_selection(pop, {sla::base_offer(sla::BaseVm{})}, SelectionParams{}, 1);
  EXPECT_EQ(out.per_user[0].status, Status::kUnmatched);
  EXPECT_EQ(out.aggregates.unmatched, 1);
  EXPECT_EQ(out.aggregates.conversion, 0);
  EXPECT_EQ(out.aggregates.weighted_en_savings, 0.0);
  EXPECT_NEAR(out.per_user[0].p_quit, quit_probability(2), 1e-15);
}

TEST(Selection, ZeroCheckCostMeansNoQuits) {
  const auto pop = users::sample_population(users::PopulationParams{}, users::RequirementModel{}, 5);
  const auto cat = default_catalog();
  SelectionParams p;
  p.check_cost = 0.0;
  const auto out = simulate_selection(pop, cat, p, 9);
  EXPECT_EQ(out.aggregates.quit, 0);
  int positive = 0;
  for (const auto& u : pop) positive += scan_user(u, cat, p.satisfaction).first_positive >= 0;
  EXPECT_EQ(out.aggregates.conversion, positive);
}

TEST(Selection, ChosenOfferIsArgmaxWithLowestIdOnTies) {
  sla::Catalog c{{1, 1, 0.99, 0.0, 0.20}, {2, 2, 0.99, 0.0, 0.10}, {3, 3, 0.99, 0.0, 0.10}};
  const users::Population pop{{Kind::kWeb, 0.9, 0.28, 1.0}};
  const auto out = simulate_selection(pop, c, SelectionParams{}, 3);
  ASSERT_EQ(out.per_user[0].status, Status::kChosen);
  EXPECT_EQ(out.per_user[0].offer, 2);
}

TEST(Selection, AggregatesRecomputeFromRecords) {
  const auto pop = users::sample_population(users::PopulationParams{}, users::RequirementModel{}, 21);
  const auto cat = default_catalog();
  const SelectionParams params;
  const auto out = simulate_selection(pop, cat, params, 4);
  const auto& a = out.aggregates;
  int conv = 0, unm = 0, quit = 0;
  double lw = 0.0, sv = 0.0, rev = 0.0, pq = 0.0;
  std::vector<int> hist(cat.size(), 0);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const auto& o = out.per_user[i];
    pq += o.p_quit;
    if (o.status == Status::kUnmatched) ++unm;
    if (o.status == Status::kQuit) ++quit;
    if (o.status != Status::kChosen) continue;
    ++conv;
    ++hist[static_cast<std::size_t>(o.offer - 1)];
    const auto& offer = cat[static_cast<std::size_t>(o.offer - 1)];
    lw += pop[i].lease_weight;
    sv += pop[i].lease_weight * offer.en_savings;
    rev += offer.availability * 0.1 * 8760.0 * pop[i].lease_weight;
  }
  EXPECT_EQ(a.conversion, conv);
  EXPECT_EQ(a.unmatched, unm);
  EXPECT_EQ(a.quit, quit);
  EXPECT_EQ(conv + unm + quit, static_cast<int>(pop.size()));
  EXPECT_EQ(a.histogram, hist);
  EXPECT_EQ(std::accumulate(hist.begin(), hist.end(), 0), conv);
  EXPECT_NEAR(a.weighted_en_savings, sv / lw, 1e-12);
  EXPECT_NEAR(a.revenue_usd_year, rev, 1e-6);
  EXPECT_NEAR(a.mean_p_quit, pq / static_cast<double>(pop.size()), 1e-12);
}

TEST(Selection, ScalingPricesAndWtpKeepsChoices) {
  auto pop = users::sample_population(users::PopulationParams{}, users::RequirementModel{}, 8);
  auto cat = default_catalog();
  SelectionParams p;
  p.check_cost = 0.0;
  const auto before = simulate_selection(pop, cat, p, 1);
  for (double k : {0.5, 3.0, 10.0}) {
    auto pop2 = pop;
    auto cat2 = cat;
    for (auto& u : pop2) u.wtp *= k;
    for (auto& o : cat2) o.price *= k;
    const auto after = simulate_selection(pop2, cat2, p, 1);
    for (std::size_t i = 0; i < pop.size(); ++i) {
      EXPECT_EQ(after.per_user[i].status, before.per_user[i].status);
      EXPECT_EQ(after.per_user[i].offer, before.per_user[i].offer);
    }
  }
}

TEST(Selection, DeterministicUnderSeed) {
  const auto pop = users::sample_population(users::PopulationParams{}, users::RequirementModel{}, 2);
  const auto cat = default_catalog();
  EXPECT_EQ(to_json(simulate_selection(pop, cat, SelectionParams{}, 6), pop),
            to_json(simulate_selection(pop, cat, SelectionParams{}, 6), pop));
}

TEST(Selection, RejectsBadParams) {
  const users::Population pop{{Kind::kWeb, 0.9, 0.28, 1.0}};
  SelectionParams p;
  p.check_cost = -0.1;
  EXPECT_THROW(simulate_selection(pop, default_catalog(), p, 1), ConfigError);
  EXPECT_THROW(simulate_selection(pop, {}, SelectionParams{}, 1), ConfigError);
  p = SelectionParams{};
  p.satisfaction.gamma = 1.5;
  EXPECT_THROW(simulate_selection(pop, default_catalog(), p, 1), ConfigError);
}

TEST(Selection, SweepSizeTwoDominatesSizeOneWithoutSearchCost) {
  const auto pop = users::sample_population(users::PopulationParams{}, users::RequirementModel{}, 4);
  SelectionParams p;
  p.check_cost = 0.0;
  SweepParams sw;
  sw.sizes = {1, 2};
  sw.runs = 3;
  sw.ci_resamples = 1000;
  const auto r = sweep_catalog_sizes(pop, sla::BaseVm{}, sla::MigrationStats{}, sla::PauserSavings::heuristic(), p, sw, 1);
  for (std::size_t run = 0; run < sw.runs; ++run) EXPECT_GE(r.conversion[1][run], r.conversion[0][run]);
}

TEST(Selection, SweepShapeAndCsv) {
  users::PopulationParams pp;
  pp.n = 200;
  const auto pop = users::sample_population(pp, users::RequirementModel{}, 4);
  SweepParams sw;
  for (int n = 1; n <= 12; ++n) sw.sizes.push_back(n);
  sw.runs = 7;
  sw.ci_resamples = 1000;
  const auto r = sweep_catalog_sizes(pop, sla::BaseVm{}, sla::MigrationStats{}, sla::PauserSavings::heuristic(0.9),
                                     SelectionParams{}, sw, 10);
  ASSERT_EQ(r.conversion.size(), 12u);
  ASSERT_EQ(r.argmax_size.size(), 7u);
  for (std::size_t run = 0; run < sw.runs; ++run) {
    int best = 0;
    for (std::size_t s = 0; s < 12; ++s) best = std::max(best, r.conversion[s][run]);
    const auto idx = static_cast<std::size_t>(r.argmax_size[run] - 1);
    EXPECT_EQ(r.conversion[idx][run], best);
    for (std::size_t s = 0; s < idx; ++s) EXPECT_LT(r.conversion[s][run], best);
  }
  EXPECT_LE(r.optimal_ci.low, r.optimal_ci.high);
  const auto csv = sweep_to_csv(r);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 12 * 7);
  EXPECT_EQ(csv.rfind("n_slas,run,conversion\n", 0), 0u);
  EXPECT_EQ(sweep_ci_to_csv(r).rfind("optimal_ci_low,optimal_ci_high\n", 0), 0u);
  const auto summary = sweep_summary_to_csv(r);
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 13);
  // Mean quit probability grows with the catalog.
  EXPECT_GE(r.mean_p_quit.back(), r.mean_p_quit.front());
}
