// Randomized invariants over seeded inputs.

#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "aprs/adjust.hpp"
#include "aprs/evaluation.hpp"
#include "aprs/ingestion.hpp"
#include "aprs/pca.hpp"
#include "aprs/prs.hpp"
#include "aprs/rng.hpp"
#include "builders.hpp"
#include "oracles.hpp"

using namespace aprs;

namespace {

constexpr int kTrials = 25;

GenotypeMatrix random_matrix(Rng& rng, std::size_t n, std::size_t m, double missing_rate, bool fractional) {
  std::vector<std::string> samples;
  for (std::size_t i = 0; i < n; ++i) samples.push_back("s" + std::to_string(i));
  std::vector<Variant> variants;
  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < m; ++j) {
    variants.push_back(Variant{"v" + std::to_string(j), "2", static_cast<std::int64_t>(10 * j + 1), "C", "T"});
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0 && rng.bernoulli(missing_rate)) {
        c[i] = std::numeric_limits<double>::quiet_NaN();
      } else {
        c[i] = fractional ? std::round(rng.uniform(0, 2) * 1000) / 1000 : static_cast<double>(rng.next_u64() % 3);
      }
    }
    cols.push_back(std::move(c));
  }
  return testutil::make_matrix(samples, variants, cols);
}

ScoreWeightTable random_weights(Rng& rng, const GenotypeMatrix& m) {
  ScoreWeightTable t;
  for (const auto& v : m.variants()) t.rows.push_back({v.id, v.alt_allele, v.ref_allele, rng.normal(0, 0.2)});
  return t;
}

double column_mean(const GenotypeMatrix& m, std::size_t j) {
  double s = 0;
  std::size_t c = 0;
  for (std::size_t i = 0; i < m.n_samples(); ++i) {
    if (!m.is_missing(i, j)) {
      s += m.dosage(i, j);
      ++c;
    }
  }
  return s / static_cast<double>(c);
}

}  // namespace

TEST(Property, FillIsIdempotentAndPreservesObservedMean) {
  Rng rng(1, 0);
  for (int t = 0; t < kTrials; ++t) {
    const auto m = random_matrix(rng, 12, 6, 0.3, true);
    const auto once = fill_missing_mean(m);
    EXPECT_EQ(fill_missing_mean(once), once);
    for (std::size_t j = 0; j < m.n_variants(); ++j) EXPECT_NEAR(column_mean(once, j), column_mean(m, j), 1e-12);
  }
}

TEST(Property, FlipIsAnInvolution) {
  Rng rng(2, 0);
  for (int t = 0; t < kTrials; ++t) {
    const auto m = random_matrix(rng, 8, 5, 0.2, false);
    std::vector<std::string> ids;
    for (const auto& v : m.variants()) {
      if (rng.bernoulli(0.5)) ids.push_back(v.id);
    }
    const auto twice = flip_alleles(flip_alleles(m, ids), ids);
    EXPECT_EQ(twice, m);
  }
}

TEST(Property, AlignedScoreEqualsFlippedWeightScore) {
  // Declaring REF as effect allele with weight -w shifts every score by the
  // same constant 2w.
  Rng rng(3, 0);
  for (int t = 0; t < kTrials; ++t) {
    const auto m = random_matrix(rng, 10, 6, 0.0, false);
    const auto w = random_weights(rng, m);
    ScoreWeightTable swapped = w;
    double offset = 0;
    for (auto& r : swapped.rows) {
      std::swap(r.effect_allele, *r.other_allele);
      offset += 2 * r.weight;
      r.weight = -r.weight;
    }
    const auto a = compute_raw_prs(align_effect_alleles(m, w).matrix, w);
    const auto b = compute_raw_prs(align_effect_alleles(m, swapped).matrix, swapped);
    for (std::size_t i = 0; i < a.scores.size(); ++i) EXPECT_NEAR(b.scores[i], a.scores[i] - offset, 1e-12);
  }
}

TEST(Property, PrsIsLinearInWeights) {
  Rng rng(4, 0);
  for (int t = 0; t < kTrials; ++t) {
    const auto m = random_matrix(rng, 10, 8, 0.0, true);
    const auto w1 = random_weights(rng, m);
    auto w2 = random_weights(rng, m);
    auto sum = w1;
    const double c = rng.uniform(-3, 3);
    for (std::size_t r = 0; r < sum.rows.size(); ++r) sum.rows[r].weight = w1.rows[r].weight + c * w2.rows[r].weight;
    const auto s1 = compute_raw_prs(m, w1).scores;
    const auto s2 = compute_raw_prs(m, w2).scores;
    const auto s = compute_raw_prs(m, sum).scores;
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(s[i], s1[i] + c * s2[i], 1e-12);
  }
}

TEST(Property, StandardizeIgnoresAffineDosageRescaling) {
  Rng rng(5, 0);
  for (int t = 0; t < kTrials; ++t) {
    const auto m = random_matrix(rng, 15, 4, 0.0, true);
    std::vector<std::vector<double>> cols;
    for (std::size_t j = 0; j < 4; ++j) {
      std::vector<double> c;
      for (double d : m.column(j)) c.push_back(0.5 * d + 0.25);
      cols.push_back(c);
    }
    const auto scaled = testutil::make_matrix(m.sample_ids(), m.variants(), cols);
    EXPECT_TRUE(standardize(m).x.isApprox(standardize(scaled).x, 1e-12));
  }
}

TEST(Property, PcaSpectrumIgnoresSampleOrder) {
  Rng rng(6, 0);
  for (int t = 0; t < kTrials; ++t) {
    const auto m = random_matrix(rng, 20, 7, 0.0, false);
    const auto s = standardize(m);
    Eigen::MatrixXd shuffled = s.x;
    for (Eigen::Index i = shuffled.rows() - 1; i > 0; --i) {
      shuffled.row(i).swap(shuffled.row(static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(i + 1))));
    }
    const auto k = std::min<std::size_t>(5, s.params.size());
    const auto a = fit_pca(s.x, k);
    const auto b = fit_pca(shuffled, k);
    EXPECT_TRUE(a.eigenvalues.isApprox(b.eigenvalues, 1e-10));
    const Eigen::MatrixXd z = s.x * a.loadings;
    const Eigen::MatrixXd cov = z.transpose() * z / static_cast<double>(z.rows() - 1);
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
      for (Eigen::Index j = 0; j < cov.cols(); ++j) {
        if (i != j) EXPECT_NEAR(cov(i, j), 0.0, 1e-10 * a.eigenvalues(0));
      }
    }
  }
}

TEST(Property, AdjustmentIsAffineEquivariant) {
  Rng rng(7, 0);
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t n = 30;
    PcScores pcs;
    pcs.scores.resize(n, 3);
    PrsVector prs;
    for (std::size_t i = 0; i < n; ++i) {
      prs.sample_ids.push_back("s" + std::to_string(i));
      prs.scores.push_back(rng.normal());
      for (Eigen::Index j = 0; j < 3; ++j) pcs.scores(static_cast<Eigen::Index>(i), j) = rng.normal();
    }
    const double a = rng.uniform(0.5, 3), b = rng.uniform(-10, 10);
    PrsVector moved = prs;
    for (auto& s : moved.scores) s = a * s + b;
    const auto adj = apply_adjustment(fit_adjustment(prs, pcs), prs, pcs).scores;
    const auto adj_moved = apply_adjustment(fit_adjustment(moved, pcs), moved, pcs).scores;
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(adj_moved[i], a * adj[i], 1e-10);
    // Residuals are orthogonal to the intercept and every PC.
    EXPECT_NEAR(oracle::mean(adj), 0.0, 1e-12);
    for (Eigen::Index j = 0; j < 3; ++j) {
      double dot = 0;
      for (std::size_t i = 0; i < n; ++i) dot += adj[i] * pcs.scores(static_cast<Eigen::Index>(i), j);
      EXPECT_NEAR(dot, 0.0, 1e-10);
    }
  }
}

TEST(Property, AucIsRankInvariantAndAntisymmetric) {
  Rng rng(8, 0);
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t n = 20 + rng.next_u64() % 100;
    std::vector<double> s(n), mono(n), neg(n);
    std::vector<bool> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = std::round(rng.normal() * 5) / 5;
      mono[i] = std::exp(s[i]) * 3 + 1;
      neg[i] = -s[i];
      y[i] = rng.bernoulli(0.3);
    }
    y[0] = true;
    y[1] = false;
    const double auc = roc_auc(s, y).auc;
    EXPECT_EQ(roc_auc(mono, y).auc, auc);
    EXPECT_NEAR(roc_auc(neg, y).auc, 1.0 - auc, 1e-15);
  }
}

TEST(Property, HighRiskCountNeverExceedsTail) {
  Rng rng(9, 0);
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t n = 1 + rng.next_u64() % 300;
    std::vector<double> s(n);
    for (auto& v : s) v = std::round(rng.normal() * 3);
    const double pct = rng.uniform(1, 99);
    const auto above = count_above(s, percentile_threshold(s, pct));
    EXPECT_LE(static_cast<double>(above), static_cast<double>(n) * (1 - pct / 100) + 1e-9);
  }
}

TEST(Property, VcfRoundTripOnRandomMatrices) {
  Rng rng(10, 0);
  for (int t = 0; t < kTrials; ++t) {
    const auto m = random_matrix(rng, 1 + rng.next_u64() % 9, 1 + rng.next_u64() % 9, 0.2, rng.bernoulli(0.5));
    std::ostringstream out;
    write_vcf(m, out);
    std::istringstream in(out.str());
    EXPECT_EQ(parse_vcf(in).matrix, m);
  }
}
