#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "aprs/errors.hpp"
#include "aprs/evaluation.hpp"
#include "aprs/rng.hpp"
#include "oracles.hpp"

using namespace aprs;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no aprs::Error thrown";
  return ErrorCode::Io;
}

ReportRow row(std::string pop, double raw, double adj) {
  ReportRow r;
  r.sample_id = pop + std::to_string(raw);
  r.population = std::move(pop);
  r.raw_prs = raw;
  r.adjusted_prs = adj;
  return r;
}

}  // namespace

TEST(LabelObesity, StrictBoundaryAndMissing) {
  EXPECT_FALSE(is_obese(27.0));
  EXPECT_TRUE(is_obese(27.000001));
  std::vector<SampleRecord> recs(3);
  recs[0].sample_id = "a";
  recs[0].bmi = 27.0;
  recs[1].sample_id = "b";
  recs[1].bmi = 31.0;
  recs[2].sample_id = "c";
  const auto out = label_obesity(recs);
  EXPECT_EQ(out.records[0].obese, false);
  EXPECT_EQ(out.records[1].obese, true);
  EXPECT_FALSE(out.records[2].obese);
  EXPECT_EQ(out.labeled, 2u);
  EXPECT_EQ(out.excluded, 1u);
}

TEST(Percentile, OneToHundred) {
  std::vector<double> s(100);
  std::iota(s.begin(), s.end(), 1.0);
  const double t = percentile_threshold(s, 76);
  EXPECT_EQ(t, 76.0);
  EXPECT_EQ(count_above(s, t), 24u);
}

TEST(Percentile, DegenerateInputs) {
  const std::vector<double> same(10, 3.0);
  EXPECT_EQ(count_above(same, percentile_threshold(same, 76)), 0u);
  const std::vector<double> one = {4.5};
  EXPECT_EQ(percentile_threshold(one, 76), 4.5);
  EXPECT_EQ(count_above(one, 4.5), 0u);
  EXPECT_EQ(code_of([] { percentile_threshold(std::vector<double>{}, 50); }), ErrorCode::EmptyInput);
  EXPECT_EQ(code_of([] { percentile_threshold(std::vector<double>{1}, 100); }), ErrorCode::ConfigInvalid);
  EXPECT_EQ(code_of([] { percentile_threshold(std::vector<double>{1}, 0); }), ErrorCode::ConfigInvalid);
}

TEST(Percentile, MatchesNearestRankOracle) {
  Rng rng(99, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.next_u64() % 150;
    std::vector<double> s(n);
    for (auto& v : s) v = std::round(rng.normal() * 4) / 4;  // ties
    const double pct = rng.uniform(0.5, 99.5);
    EXPECT_EQ(percentile_threshold(s, pct), oracle::nearest_rank(s, pct)) << n << " " << pct;
  }
}

TEST(Stratify, SinglePopulationEqualsPooled) {
  std::vector<ReportRow> rows;
  for (int i = 0; i < 50; ++i) rows.push_back(row("A", i, 49 - i));
  const auto r = stratify_by_population(rows, 76);
  ASSERT_EQ(r.strata.size(), 1u);
  EXPECT_DOUBLE_EQ(r.strata[0].fraction_raw(), static_cast<double>(r.highrisk_raw) / 50.0);
  EXPECT_DOUBLE_EQ(r.strata[0].fraction_adjusted(), static_cast<double>(r.highrisk_adjusted) / 50.0);
}

TEST(Stratify, ShiftedGaussiansRebalanceAfterMeanAdjustment) {
  Rng rng(7, 0);
  std::vector<ReportRow> rows;
  std::vector<double> noise_a, noise_b;
  for (int i = 0; i < 500; ++i) {
    const double e = rng.normal();
    rows.push_back(row("A", e, e));
    noise_a.push_back(e);
  }
  for (int i = 0; i < 500; ++i) {
    const double e = rng.normal();
    rows.push_back(row("B", e + 10.0, e));  // adjusted = perfect mean removal
    noise_b.push_back(e);
  }
  const auto r = stratify_by_population(rows, 76);
  // Brute force: raw threshold falls inside B, so A has no high-risk members.
  std::vector<double> raw;
  for (const auto& x : rows) raw.push_back(x.raw_prs);
  const double t = oracle::nearest_rank(raw, 76);
  std::size_t b_above = 0;
  for (int i = 500; i < 1000; ++i) b_above += rows[static_cast<std::size_t>(i)].raw_prs > t;
  EXPECT_EQ(r.strata[0].highrisk_raw, 0u);
  EXPECT_EQ(r.strata[1].highrisk_raw, b_above);
  EXPECT_GT(r.strata[1].fraction_raw(), 0.45);
  EXPECT_NEAR(r.strata[0].fraction_adjusted(), 0.24, 0.05);
  EXPECT_NEAR(r.strata[1].fraction_adjusted(), 0.24, 0.05);
}

TEST(Stratify, MedianOfSymmetricScores) {
  std::vector<ReportRow> rows;
  for (int i = -50; i < 50; ++i) rows.push_back(row("A", i + 0.5, i + 0.5));
  const auto r = stratify_by_population(rows, 50);
  EXPECT_EQ(r.highrisk_raw, 50u);
}

TEST(Stratify, FirstSeenOrderAndUnlabeled) {
  std::vector<ReportRow> rows = {row("Z", 1, 1), row("A", 2, 2), row("Z", 3, 3)};
  rows.push_back(ReportRow{"u", std::nullopt, {}, 4, 4, std::nullopt});
  const auto r = stratify_by_population(rows, 50);
  ASSERT_EQ(r.strata.size(), 3u);
  EXPECT_EQ(r.strata[0].population, "Z");
  EXPECT_EQ(r.strata[1].population, "A");
  EXPECT_EQ(r.strata[2].population, ".");
  const auto s = summarize_populations(rows, 50);
  EXPECT_DOUBLE_EQ(s[0].mean_raw, 2.0);
  EXPECT_DOUBLE_EQ(s[0].sd_raw, std::sqrt(2.0));
  EXPECT_TRUE(std::isnan(s[1].sd_raw));
}

TEST(RocAuc, PerfectAndTied) {
  const std::vector<double> s = {0.1, 0.2, 0.8, 0.9};
  const std::vector<bool> y = {false, false, true, true};
  const auto perfect = roc_auc(s, y);
  EXPECT_EQ(perfect.auc, 1.0);
  EXPECT_EQ(perfect.points.front().fpr, 0.0);
  EXPECT_EQ(perfect.points.back().tpr, 1.0);
  const std::vector<double> tied(4, 1.0);
  EXPECT_EQ(roc_auc(tied, y).auc, 0.5);
}

TEST(RocAuc, EqualsPairwiseStatistic) {
  Rng rng(1234, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng.next_u64() % 199;
    std::vector<double> s(n);
    std::vector<bool> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = rng.uniform();
      y[i] = rng.bernoulli(0.4);
    }
    y[0] = true;
    y[1] = false;
    EXPECT_EQ(roc_auc(s, y).auc, oracle::pairwise_auc(s, y));
  }
}

TEST(RocAuc, DegenerateLabels) {
  const std::vector<double> s = {1, 2};
  EXPECT_EQ(code_of([&] { roc_auc(s, std::vector<bool>{true, true}); }), ErrorCode::DegenerateLabels);
  EXPECT_EQ(code_of([&] { roc_auc(s, std::vector<bool>{false, false}); }), ErrorCode::DegenerateLabels);
}

TEST(CompareModels, RankInvariantDelta) {
  PrsVector raw{{"a", "b", "c", "d"}, {0.3, 0.1, 0.9, 0.5}, 1, {}, {}};
  std::vector<std::optional<bool>> labels = {false, true, true, std::nullopt};
  const auto same = compare_models(raw, raw, labels);
  EXPECT_EQ(same.delta, 0.0);
  EXPECT_EQ(same.excluded, 1u);
  PrsVector shifted = raw;
  for (auto& x : shifted.scores) x += 7.5;
  EXPECT_EQ(compare_models(raw, shifted, labels).delta, 0.0);
}

TEST(CompareModels, SampleMismatch) {
  PrsVector a{{"a", "b"}, {1, 2}, 1, {}, {}};
  PrsVector b{{"b", "a"}, {1, 2}, 1, {}, {}};
  std::vector<std::optional<bool>> labels = {true, false};
  EXPECT_EQ(code_of([&] { compare_models(a, b, labels); }), ErrorCode::SampleMismatch);
}

TEST(Writers, MetricsAndRocLayout) {
  EvaluationMetrics m;
  m.auc_raw = 0.5;
  m.auc_adjusted = 0.75;
  m.delta = 0.25;
  m.threshold_raw = 1;
  m.threshold_adjusted = 2;
  m.n_pos = 3;
  m.n_neg = 4;
  std::ostringstream out;
  write_metrics(m, out);
  EXPECT_EQ(out.str(),
            "auc_raw=0.5\nauc_adjusted=0.75\ndelta=0.25\nthreshold_raw=1\nthreshold_adjusted=2\nn_pos=3\nn_neg=4\n");
  std::ostringstream roc;
  write_roc_csv(roc_auc(std::vector<double>{1, 2}, std::vector<bool>{false, true}), roc);
  EXPECT_EQ(roc.str(), "fpr,tpr\n0,0\n0,1\n1,1\n");
}
