#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aprs/genotype.hpp"
#include "aprs/pca.hpp"
#include "aprs/prs.hpp"

namespace aprs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;

struct PipelineConfig {
  // simulate
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> sample_stream;
  std::optional<double> fst;
  std::optional<std::size_t> samples_per_population;
  // fit / score / evaluate inputs
  std::string train_vcf;
  std::string test_vcf;
  std::string panel;
  std::string weights;
  std::string phenotypes;
  std::string model_dir;
  std::string report;
  std::string out;
  // parameters
  std::size_t k = 4;  // 0 selects k from the cumulative threshold
  std::size_t max_components = 20;
  double threshold = 0.80;
  double percentile = 76.0;
  std::string prs_mode = "sum";
  std::string scale = "sample-sd";
  std::string strand_policy = "exclude";
  bool refit_adjustment = false;
};

PrsMode prs_mode_from_string(const std::string& name);
StrandPolicy strand_policy_from_string(const std::string& name);

/// Entry point shared by the `aprs` binary and the tests. Data goes to `out`
/// or to files, diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_simulate(const PipelineConfig& config, std::ostream& out, std::ostream& err);
int cmd_fit(const PipelineConfig& config, std::ostream& out, std::ostream& err);
int cmd_score(const PipelineConfig& config, std::ostream& out, std::ostream& err);
int cmd_evaluate(const PipelineConfig& config, std::ostream& out, std::ostream& err);

// File names inside output directories.
inline constexpr const char* kPcaModelFile = "pca_model.txt";
inline constexpr const char* kAdjustmentModelFile = "adjustment_model.txt";
inline constexpr const char* kExplainedVarianceFile = "explained_variance.csv";
inline constexpr const char* kTrainReportFile = "train_report.csv";
inline constexpr const char* kCohortReportFile = "cohort_report.csv";
inline constexpr const char* kParseReportFile = "parse_report.csv";
inline constexpr const char* kParseDetailFile = "parse_detail.csv";
inline constexpr const char* kRocRawFile = "roc_raw.csv";
inline constexpr const char* kRocAdjustedFile = "roc_adjusted.csv";
inline constexpr const char* kPopulationSummaryFile = "population_summary.csv";
inline constexpr const char* kMetricsFile = "metrics.txt";
inline constexpr const char* kRunConfigFile = "run_config.txt";

}  // namespace aprs::cli
