#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aprs/genotype.hpp"
#include "aprs/prs.hpp"

namespace aprs {

// Obesity label cut-off on BMI (kg/m^2); obese means strictly greater.
inline constexpr double kObeseBmiThreshold = 27.0;
inline constexpr double kDefaultRiskPercentile = 76.0;

inline bool is_obese(double bmi) { return bmi > kObeseBmiThreshold; }

struct ReportRow {
  std::string sample_id;
  std::optional<std::string> population;
  std::vector<double> pcs;
  double raw_prs = 0.0;
  double adjusted_prs = 0.0;
  std::optional<bool> obese;
};

struct CohortReport {
  std::size_t k = 0;  // number of PC columns per row
  std::vector<ReportRow> rows;
};

struct PopulationSummary {
  std::string population;  // "." for samples without a label
  std::size_t n = 0;
  double mean_raw = 0.0;
  double sd_raw = 0.0;  // sample sd; NaN when n < 2
  double mean_adjusted = 0.0;
  double sd_adjusted = 0.0;
  double highrisk_raw = 0.0;  // fraction above the pooled threshold
  double highrisk_adjusted = 0.0;
};

struct LabeledRecords {
  std::vector<SampleRecord> records;
  std::size_t labeled = 0;
  std::size_t excluded = 0;  // no BMI; left unlabeled
};

/// Sets obese = bmi > 27 wherever bmi is present; others get no label.
LabeledRecords label_obesity(std::vector<SampleRecord> records);

/// Nearest-rank percentile: the ceil(pct/100 * n)-th smallest score (1-based).
/// Throws EmptyInput on an empty vector and ConfigInvalid for pct outside (0,100).
double percentile_threshold(std::span<const double> scores, double pct);

/// Scores strictly above the threshold.
std::size_t count_above(std::span<const double> scores, double threshold);

struct PopulationStratum {
  std::string population;
  std::size_t n = 0;
  std::size_t highrisk_raw = 0;
  std::size_t highrisk_adjusted = 0;

  double fraction_raw() const { return n == 0 ? 0.0 : static_cast<double>(highrisk_raw) / static_cast<double>(n); }
  double fraction_adjusted() const {
    return n == 0 ? 0.0 : static_cast<double>(highrisk_adjusted) / static_cast<double>(n);
  }
};

struct StratificationResult {
  double percentile = kDefaultRiskPercentile;
  double threshold_raw = 0.0;
  double threshold_adjusted = 0.0;
  std::size_t n = 0;
  std::size_t highrisk_raw = 0;
  std::size_t highrisk_adjusted = 0;
  std::vector<PopulationStratum> strata;  // first-seen population order
};

/// One pooled threshold per score type, then per-population high-risk counts.
StratificationResult stratify_by_population(std::span<const ReportRow> rows, double pct);

/// Per-population mean/sd and high-risk fractions (pooled thresholds).
std::vector<PopulationSummary> summarize_populations(std::span<const ReportRow> rows, double pct);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocResult {
  std::vector<RocPoint> points;  // (0,0) ... (1,1)
  double auc = 0.5;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

/// ROC swept over distinct score values from high to low; trapezoidal AUC.
/// Tied scores contribute a diagonal step, i.e. half credit per tied pair.
RocResult roc_auc(std::span<const double> scores, const std::vector<bool>& labels);

struct ModelComparison {
  RocResult raw;
  RocResult adjusted;
  double auc_raw = 0.5;
  double auc_adjusted = 0.5;
  double delta = 0.0;  // auc_adjusted - auc_raw
  std::size_t excluded = 0;
};

/// Compares raw and adjusted scores on the labeled samples; unlabeled
/// (nullopt) samples are left out of both curves.
ModelComparison compare_models(const PrsVector& raw, const PrsVector& adjusted,
                               std::span<const std::optional<bool>> labels);

struct EvaluationMetrics {
  double auc_raw = 0.5;
  double auc_adjusted = 0.5;
  double delta = 0.0;
  double threshold_raw = 0.0;
  double threshold_adjusted = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

void write_roc_csv(const RocResult& roc, std::ostream& out);
void write_population_summary_csv(std::span<const PopulationSummary> summaries, std::ostream& out);
void write_metrics(const EvaluationMetrics& metrics, std::ostream& out);

}  // namespace aprs
