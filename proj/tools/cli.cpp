#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "aprs/adjust.hpp"
#include "aprs/errors.hpp"
#include "aprs/evaluation.hpp"
#include "aprs/ingestion.hpp"
#include "aprs/synthgen.hpp"
#include "aprs/text.hpp"

namespace aprs::cli {

namespace fs = std::filesystem;

namespace {

std::ifstream open_input(const std::string& path, std::string_view what) {
  if (path.empty()) throw Error(ErrorCode::ConfigInvalid, fmt::format("{}: path is required", what));
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open {} '{}'", what, path));
  return in;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

fs::path prepare_out_dir(const std::string& out) {
  if (out.empty()) throw Error(ErrorCode::ConfigInvalid, "out: an output directory is required");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(ErrorCode::Io, fmt::format("cannot create '{}': {}", out, ec.message()));
  return fs::path(out);
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
  if (!out) throw Error(ErrorCode::Io, fmt::format("cannot write '{}'", path.string()));
}

template <typename Writer>
void write_with(const fs::path& path, Writer&& writer) {
  std::ostringstream buf;
  writer(buf);
  write_file(path, buf.str());
}

void write_run_config(const fs::path& dir, std::string_view command, const PipelineConfig& c,
                      std::string_view extra = {}) {
  const auto opt_num = [](const auto& v) { return v ? fmt::format("{}", *v) : std::string("."); };
  std::string s = fmt::format("command={}\n", command);
  s += fmt::format("scenario={}\nseed={}\nsample_stream={}\nfst={}\nsamples_per_population={}\n", c.scenario,
                   opt_num(c.seed), opt_num(c.sample_stream),
                   c.fst ? text::format_real(*c.fst, 17) : std::string("."), opt_num(c.samples_per_population));
  s += fmt::format("train_vcf={}\ntest_vcf={}\npanel={}\nweights={}\nphenotypes={}\nmodel_dir={}\nreport={}\nout={}\n",
                   c.train_vcf, c.test_vcf, c.panel, c.weights, c.phenotypes, c.model_dir, c.report, c.out);
  s += fmt::format("k={}\nmax_components={}\nthreshold={}\npercentile={}\nprs_mode={}\nscale={}\nstrand_policy={}\n"
                   "refit_adjustment={}\n",
                   c.k, c.max_components, text::format_real(c.threshold, 17), text::format_real(c.percentile, 17),
                   c.prs_mode, c.scale, c.strand_policy, c.refit_adjustment ? "true" : "false");
  s += extra;
  write_file(dir / kRunConfigFile, s);
}

VcfParseResult load_vcf(const std::string& path, const fs::path& out_dir, std::ostream& err) {
  auto in = open_input(path, "genotype VCF");
  VcfParseResult parsed = parse_vcf(in);
  write_with(out_dir / kParseReportFile, [&](std::ostream& o) { write_parse_report(parsed.report, o); });
  write_with(out_dir / kParseDetailFile, [&](std::ostream& o) { write_parse_detail(parsed.report, o); });
  err << fmt::format("genotypes: {} samples, {} variants parsed, {} rows skipped\n", parsed.matrix.n_samples(),
                     parsed.report.rows_parsed, parsed.report.rows_skipped());
  return parsed;
}

// Weighted variants only, effect-aligned and mean-filled.
GenotypeMatrix trait_matrix(const GenotypeMatrix& matrix, const ScoreWeightTable& weights, StrandPolicy policy,
                            std::ostream& err) {
  std::vector<std::size_t> columns;
  std::unordered_set<std::size_t> taken;
  for (const auto& row : weights.rows) {
    if (const auto col = matrix.find_variant(row.variant_id); col && taken.insert(*col).second) columns.push_back(*col);
  }
  if (columns.empty()) {
    throw Error(ErrorCode::NoUsableVariants,
                fmt::format("none of the {} weighted variants is present in the genotypes", weights.rows.size()));
  }
  auto aligned = align_effect_alleles(select_variants(matrix, columns), weights, policy);
  err << fmt::format("weights: {} rows, {} matched, {} flipped, {} strand-ambiguous excluded\n", weights.rows.size(),
                     columns.size(), aligned.report.flipped.size(), aligned.report.excluded.size());
  return fill_missing_mean(aligned.matrix);
}

// Model variants only, mean-filled. Absent ones are reported by project().
GenotypeMatrix ancestry_matrix(const GenotypeMatrix& matrix, const std::vector<std::string>& ids) {
  std::vector<std::size_t> columns;
  for (const auto& id : ids) {
    if (const auto col = matrix.find_variant(id)) columns.push_back(*col);
  }
  return fill_missing_mean(select_variants(matrix, columns));
}

std::unordered_map<std::string, SampleRecord> load_phenotypes(const std::string& path) {
  std::unordered_map<std::string, SampleRecord> by_id;
  if (path.empty()) return by_id;
  auto in = open_input(path, "phenotype file");
  for (auto& r : label_obesity(parse_phenotypes(in)).records) by_id.emplace(r.sample_id, std::move(r));
  return by_id;
}

CohortReport build_report(const PcScores& pcs, const PrsVector& raw, const PrsVector& adjusted,
                          const std::unordered_map<std::string, SampleRecord>& phenotypes) {
  CohortReport report;
  report.k = pcs.k();
  for (std::size_t i = 0; i < raw.sample_ids.size(); ++i) {
    ReportRow row;
    row.sample_id = raw.sample_ids[i];
    if (const auto it = phenotypes.find(row.sample_id); it != phenotypes.end()) {
      row.population = it->second.population;
      row.obese = it->second.obese;
    }
    for (std::size_t j = 0; j < pcs.k(); ++j) {
      row.pcs.push_back(pcs.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    row.raw_prs = raw.scores[i];
    row.adjusted_prs = adjusted.scores[i];
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string file_manifest_line(const fs::path& path) {
  const std::string bytes = read_file(path);
  return fmt::format("{}\t{}\t{}\n", path.filename().string(), bytes.size(), text::sha256_hex(bytes));
}

}  // namespace

PrsMode prs_mode_from_string(const std::string& name) {
  if (name == "sum") return PrsMode::sum;
  if (name == "mean") return PrsMode::mean;
  throw Error(ErrorCode::ConfigInvalid, fmt::format("prs-mode: unknown mode '{}' (sum|mean)", name));
}

StrandPolicy strand_policy_from_string(const std::string& name) {
  if (name == "exclude") return StrandPolicy::exclude;
  if (name == "keep") return StrandPolicy::keep;
  throw Error(ErrorCode::ConfigInvalid, fmt::format("strand-policy: unknown policy '{}' (exclude|keep)", name));
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_simulate(const PipelineConfig& c, std::ostream& out, std::ostream& err) {
  ScenarioConfig scenario = ScenarioConfig::confounded_default();
  if (!c.scenario.empty()) {
    auto in = open_input(c.scenario, "scenario");
    scenario = parse_scenario_config(in);
  }
  if (c.seed) scenario.seed = *c.seed;
  if (c.sample_stream) scenario.sample_stream = *c.sample_stream;
  if (c.fst) {
    for (auto& p : scenario.populations) p.fst = *c.fst;
  }
  if (c.samples_per_population) {
    for (auto& p : scenario.populations) p.n_samples = *c.samples_per_population;
  }
  scenario.validate();
  const fs::path dir = prepare_out_dir(c.out);

  const SyntheticCohort cohort = generate_cohort(scenario);
  const ScenarioFiles files = write_scenario(cohort, dir);

  std::ostringstream echo;
  write_scenario_config(scenario, echo);
  write_run_config(dir, "simulate", c, echo.str());

  out << "file\tbytes\tsha256\n";
  for (const auto& f : files.all()) out << file_manifest_line(f);
  err << fmt::format("simulated {} samples x {} variants into {}\n", cohort.genotypes.n_samples(),
                     cohort.genotypes.n_variants(), dir.string());
  return kExitOk;
}

int cmd_fit(const PipelineConfig& c, std::ostream& out, std::ostream& err) {
  const ScaleMode scale = scale_mode_from_string(c.scale);
  const PrsMode mode = prs_mode_from_string(c.prs_mode);
  const StrandPolicy policy = strand_policy_from_string(c.strand_policy);
  if (c.k == 0 && !(c.threshold > 0.0 && c.threshold <= 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, fmt::format("threshold: {} is outside (0, 1]", c.threshold));
  }
  auto panel_in = open_input(c.panel, "panel");
  auto weights_in = open_input(c.weights, "weights");
  const fs::path dir = prepare_out_dir(c.out);

  const VcfParseResult vcf = load_vcf(c.train_vcf, dir, err);
  const PanelDefinition panel = parse_panel(panel_in, fs::path(c.panel).filename().string());
  const ScoreWeightTable weights = parse_weights(weights_in);
  const auto phenotypes = load_phenotypes(c.phenotypes);

  const PanelFilterResult filtered = filter_by_panel(vcf.matrix, panel);
  err << fmt::format("panel: {}/{} variants present ({:.4f})\n", filtered.coverage.matched,
                     filtered.coverage.panel_size, filtered.coverage.coverage());
  const GenotypeMatrix ancestry = fill_missing_mean(filtered.matrix);
  const StandardizedMatrix standardized = standardize(ancestry, scale);

  const std::size_t n = standardized.sample_ids.size();
  const std::size_t m = standardized.params.size();
  const std::size_t rank_cap = std::min(n - 1, m);
  if (c.k > rank_cap) {
    throw Error(ErrorCode::DimensionError, fmt::format("k = {} exceeds min(n-1, m) = {}", c.k, rank_cap));
  }
  const std::size_t k_fit = std::min(rank_cap, std::max(c.max_components, c.k));
  const PcaModel full = fit_pca(standardized, k_fit);

  std::size_t k = c.k;
  if (k == 0) {
    const KSelection sel = select_k(full, c.threshold);
    if (!sel.threshold_reached) {
      err << fmt::format("warning: {} components explain {:.4f} < threshold {}; keeping all of them\n", full.k(),
                         sel.cumulative, c.threshold);
    }
    k = sel.k;
  }
  const PcaModel model = truncate(full, k);
  const std::string model_bytes = serialize(model);
  write_file(dir / kPcaModelFile, model_bytes);

  std::string table = "component,eigenvalue,explained_variance_ratio,cumulative\n";
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < full.eigenvalues.size(); ++i) {
    cumulative += full.explained_variance_ratio(i);
    table += fmt::format("{},{},{},{}\n", i + 1, text::format_real(full.eigenvalues(i), 10),
                         text::format_real(full.explained_variance_ratio(i), 10), text::format_real(cumulative, 10));
  }
  write_file(dir / kExplainedVarianceFile, table);
  out << table;

  const GenotypeMatrix trait = trait_matrix(vcf.matrix, weights, policy, err);
  const PrsVector raw = compute_raw_prs(trait, weights, mode);
  const PcScores pcs = project(model, ancestry);
  const AdjustmentModel adjustment = fit_adjustment(raw, pcs);
  write_with(dir / kAdjustmentModelFile, [&](std::ostream& o) { write_adjustment_model(adjustment, o); });
  const PrsVector adjusted = apply_adjustment(adjustment, raw, pcs);
  write_with(dir / kTrainReportFile,
             [&](std::ostream& o) { write_report_csv(build_report(pcs, raw, adjusted, phenotypes), o); });

  write_run_config(dir, "fit", c, fmt::format("resolved_k={}\npca_fingerprint={}\n", k, text::sha256_hex(model_bytes)));
  err << fmt::format("fit: k = {}, {} PRS variants, R^2 of PRS on PCs = {:.4f}\n", k, raw.n_snps_used,
                     adjustment.r_squared);
  return kExitOk;
}

int cmd_score(const PipelineConfig& c, std::ostream& out, std::ostream& err) {
  const PrsMode mode = prs_mode_from_string(c.prs_mode);
  const StrandPolicy policy = strand_policy_from_string(c.strand_policy);
  if (c.model_dir.empty()) throw Error(ErrorCode::ConfigInvalid, "model-dir: path is required");
  auto weights_in = open_input(c.weights, "weights");
  const fs::path dir = prepare_out_dir(c.out);

  const std::string pca_bytes = read_file(fs::path(c.model_dir) / kPcaModelFile);
  std::istringstream pca_in(pca_bytes);
  const PcaModel model = read_pca_model(pca_in);
  std::ifstream adj_in(fs::path(c.model_dir) / kAdjustmentModelFile, std::ios::binary);
  if (!adj_in) throw Error(ErrorCode::Io, fmt::format("cannot open adjustment model in '{}'", c.model_dir));
  const AdjustmentModel adjustment = read_adjustment_model(adj_in);
  if (text::sha256_hex(pca_bytes) != adjustment.pca_fingerprint) {
    throw Error(ErrorCode::ModelMismatch, "adjustment model was fit against a different PCA model");
  }

  const VcfParseResult vcf = load_vcf(c.test_vcf, dir, err);
  const ScoreWeightTable weights = parse_weights(weights_in);
  const auto phenotypes = load_phenotypes(c.phenotypes);

  const PcScores pcs = project(model, ancestry_matrix(vcf.matrix, model.params.variant_ids));
  const PrsVector raw = compute_raw_prs(trait_matrix(vcf.matrix, weights, policy, err), weights, mode);
  const AdjustmentModel used = c.refit_adjustment ? fit_adjustment(raw, pcs) : adjustment;
  if (c.refit_adjustment) err << "warning: adjustment refit on the scored cohort\n";
  const PrsVector adjusted = apply_adjustment(used, raw, pcs);

  const CohortReport report = build_report(pcs, raw, adjusted, phenotypes);
  write_with(dir / kCohortReportFile, [&](std::ostream& o) { write_report_csv(report, o); });
  write_run_config(dir, "score", c);
  out << file_manifest_line(dir / kCohortReportFile);
  return kExitOk;
}

int cmd_evaluate(const PipelineConfig& c, std::ostream& out, std::ostream& err) {
  if (!(c.percentile > 0.0 && c.percentile < 100.0)) {
    throw Error(ErrorCode::ConfigInvalid, fmt::format("percentile: {} is outside (0, 100)", c.percentile));
  }
  const fs::path dir = prepare_out_dir(c.out);
  auto in = open_input(c.report, "cohort report");
  const CohortReport report = read_report_csv(in);

  PrsVector raw;
  PrsVector adjusted;
  std::vector<std::optional<bool>> labels;
  for (const auto& row : report.rows) {
    raw.sample_ids.push_back(row.sample_id);
    raw.scores.push_back(row.raw_prs);
    adjusted.scores.push_back(row.adjusted_prs);
    labels.push_back(row.obese);
  }
  adjusted.sample_ids = raw.sample_ids;

  const ModelComparison cmp = compare_models(raw, adjusted, labels);
  const StratificationResult strat = stratify_by_population(report.rows, c.percentile);
  const auto summaries = summarize_populations(report.rows, c.percentile);

  EvaluationMetrics metrics;
  metrics.auc_raw = cmp.auc_raw;
  metrics.auc_adjusted = cmp.auc_adjusted;
  metrics.delta = cmp.delta;
  metrics.threshold_raw = strat.threshold_raw;
  metrics.threshold_adjusted = strat.threshold_adjusted;
  metrics.n_pos = cmp.raw.n_pos;
  metrics.n_neg = cmp.raw.n_neg;

  write_with(dir / kRocRawFile, [&](std::ostream& o) { write_roc_csv(cmp.raw, o); });
  write_with(dir / kRocAdjustedFile, [&](std::ostream& o) { write_roc_csv(cmp.adjusted, o); });
  write_with(dir / kPopulationSummaryFile, [&](std::ostream& o) { write_population_summary_csv(summaries, o); });
  write_with(dir / kMetricsFile, [&](std::ostream& o) { write_metrics(metrics, o); });
  write_run_config(dir, "evaluate", c);
  write_metrics(metrics, out);
  if (cmp.excluded) err << fmt::format("{} samples without an obesity label left out of ROC\n", cmp.excluded);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Argument handling

namespace {

struct ConfigFileArgs {
  std::string path;
  text::KeyValueList values;
};

// --config FILE / --config=FILE anywhere on the line.
std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

bool flag_given(const std::vector<std::string>& args, const std::string& flag) {
  const std::string exact = "--" + flag;
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == exact || a.rfind(exact + "=", 0) == 0;
  });
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  PipelineConfig c;
  CLI::App app{"Ancestry-adjusted polygenic risk scores: simulate, fit, score, evaluate", "aprs"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::string config_path;
  const auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value file; command-line flags win");
  };
  const auto add_params = [&](CLI::App* sub) {
    sub->add_option("--prs-mode", c.prs_mode, "sum | mean")->capture_default_str();
    sub->add_option("--strand-policy", c.strand_policy, "exclude | keep (A/T and C/G SNPs)")->capture_default_str();
  };

  auto* simulate = app.add_subcommand("simulate", "Write a synthetic multi-population cohort");
  add_config(simulate);
  simulate->add_option("--scenario", c.scenario, "Scenario key=value file (default: confounded 3-population)");
  simulate->add_option("--seed", c.seed, "Override the scenario seed");
  simulate->add_option("--sample-stream", c.sample_stream, "Fresh individuals from the same populations");
  simulate->add_option("--fst", c.fst, "Override Fst of every population");
  simulate->add_option("--samples-per-population", c.samples_per_population, "Override every population size");
  simulate->add_option("--out", c.out, "Output directory");

  auto* fit = app.add_subcommand("fit", "Fit PCA and the PRS~PC adjustment on a training cohort");
  add_config(fit);
  fit->add_option("--train-vcf", c.train_vcf, "Training genotypes (VCF)");
  fit->add_option("--panel", c.panel, "Ancestry-informative variant ids");
  fit->add_option("--weights", c.weights, "PRS weights TSV");
  fit->add_option("--phenotypes", c.phenotypes, "Optional phenotype TSV for the training report");
  fit->add_option("--out", c.out, "Model output directory");
  fit->add_option("--k", c.k, "PCs in the adjustment; 0 selects by --threshold")->capture_default_str();
  fit->add_option("--threshold", c.threshold, "Cumulative explained variance for --k 0")->capture_default_str();
  fit->add_option("--max-components", c.max_components, "Components reported in explained_variance.csv")
      ->capture_default_str();
  fit->add_option("--scale", c.scale, "sample-sd | binomial")->capture_default_str();
  add_params(fit);

  auto* score = app.add_subcommand("score", "Project a cohort and write raw and adjusted PRS");
  add_config(score);
  score->add_option("--test-vcf", c.test_vcf, "Genotypes to score (VCF)");
  score->add_option("--model-dir", c.model_dir, "Directory written by `fit`");
  score->add_option("--weights", c.weights, "PRS weights TSV");
  score->add_option("--phenotypes", c.phenotypes, "Optional phenotype TSV (population, BMI)");
  score->add_option("--out", c.out, "Output directory");
  score->add_flag("--refit-adjustment", c.refit_adjustment, "Refit the adjustment on this cohort (experimental)");
  add_params(score);

  auto* evaluate = app.add_subcommand("evaluate", "ROC/AUC and percentile stratification of a cohort report");
  add_config(evaluate);
  evaluate->add_option("--report", c.report, "cohort_report.csv from `score`");
  evaluate->add_option("--percentile", c.percentile, "High-risk percentile")->capture_default_str();
  evaluate->add_option("--out", c.out, "Output directory");

  // Merge config-file values as extra arguments, skipping keys the command
  // line already sets.
  std::vector<std::string> merged = args;
  try {
    if (const auto path = find_config_path(args)) {
      std::ifstream in(*path);
      if (!in) throw Error(ErrorCode::ConfigInvalid, fmt::format("config: cannot open '{}'", *path));
      const auto values = text::parse_key_values(in);
      CLI::App* target = nullptr;
      for (auto* sub : {simulate, fit, score, evaluate}) {
        if (std::find(args.begin(), args.end(), sub->get_name()) != args.end()) target = sub;
      }
      std::set<std::string> known;
      for (auto* sub : {simulate, fit, score, evaluate}) {
        for (const auto* opt : sub->get_options()) known.insert(opt->get_name(false, true));
      }
      for (const auto& [key, value] : values) {
        const std::string flag = flag_name(key);
        if (!known.count(flag) && !known.count("--" + flag)) {
          throw Error(ErrorCode::ConfigInvalid, fmt::format("config: unknown key '{}'", key));
        }
        if (!target || flag == "config" || flag_given(args, flag)) continue;
        const CLI::Option* opt = target->get_option_no_throw("--" + flag);
        if (!opt) continue;
        if (opt->get_expected_min() == 0) {
          if (value == "true" || value == "1") merged.push_back("--" + flag);
        } else {
          merged.push_back("--" + flag + "=" + value);
        }
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  std::vector<const char*> argv;
  argv.push_back("aprs");
  for (const auto& a : merged) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(c, out, err);
    if (fit->parsed()) return cmd_fit(c, out, err);
    if (score->parsed()) return cmd_score(c, out, err);
    if (evaluate->parsed()) return cmd_evaluate(c, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::ConfigInvalid ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace aprs::cli
