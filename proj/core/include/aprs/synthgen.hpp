#pragma once

// Seeded synthetic cohorts with known population structure and known
// ancestry confounding of the polygenic score.
//
// Allele frequencies follow the Balding-Nichols model: every SNP gets an
// ancestral frequency p ~ U(0.05, 0.95) and each population draws its own
// frequency from Beta(p(1-F)/F, (1-p)(1-F)/F). Genotypes are Binomial(2, p_pop).
//
// Trait SNPs come in two kinds. Causal SNPs carry a true effect and drift like
// every other SNP. Spurious SNPs carry a published weight but no effect; their
// population frequencies are shifted along the weight vector so the expected
// score of population q moves by prs_shift[q]. That shift is what ancestry
// adjustment is meant to remove.
//
//   liability = sum(causal effect * alt dosage) + offset[q] + N(0, noise_sd)
//   bmi       = bmi_base + bmi_slope * liability,   obese = bmi > 27

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "aprs/genotype.hpp"

namespace aprs {

struct PopulationSpec {
  std::string label;
  std::size_t n_samples = 0;
  double fst = 0.1;
  double prs_shift = 0.0;         // expected score shift from spurious SNPs
  double liability_offset = 0.0;  // added to every member's liability
};

struct ScenarioConfig {
  std::uint64_t seed = 42;
  std::uint64_t sample_stream = 0;  // same seed, new stream: fresh individuals, same frequencies
  std::vector<PopulationSpec> populations;
  std::size_t n_ancestry_snps = 2000;
  std::size_t n_trait_snps = 200;
  std::size_t n_spurious_snps = 0;  // subset of the trait SNPs
  double weight_mean = 0.0;
  double weight_sd = 0.1;
  double noise_sd = 1.0;
  double bmi_base = 25.0;
  double bmi_slope = 2.5;
  double missing_rate = 0.0;

  /// Throws ConfigInvalid naming the offending field.
  void validate() const;

  /// Three populations of 200, Fst 0.1, with spurious score shifts of
  /// -2.5 / 0 / +2.5 and no real liability difference.
  static ScenarioConfig confounded_default();
};

/// Keys: seed, sample_stream, n_ancestry_snps, n_trait_snps, n_spurious_snps,
/// weight_mean, weight_sd, noise_sd, bmi_base, bmi_slope, missing_rate, and
/// repeated `population = LABEL:N:FST[:PRS_SHIFT[:OFFSET]]`. Missing keys keep
/// their defaults; at least one population line replaces the default set.
ScenarioConfig parse_scenario_config(std::istream& in);
void write_scenario_config(const ScenarioConfig& config, std::ostream& out);

struct TruthRecord {
  std::vector<double> ancestral_freq;                 // per SNP (ancestry then trait)
  std::vector<std::vector<double>> population_freq;   // [population][SNP]
  std::vector<double> causal_effect;                  // per trait SNP, per alt allele
  std::vector<bool> spurious;                         // per trait SNP
  std::vector<std::size_t> population_index;          // per sample
  std::vector<double> genetic_value;                  // per sample
  std::vector<double> liability;                      // per sample
};

struct SyntheticCohort {
  ScenarioConfig config;
  GenotypeMatrix genotypes;  // ancestry SNPs first, then trait SNPs; samples carry phenotypes
  ScoreWeightTable weights;  // trait SNPs
  PanelDefinition panel;     // ancestry SNPs
  TruthRecord truth;
};

SyntheticCohort generate_cohort(const ScenarioConfig& config);

struct ScenarioFiles {
  std::filesystem::path vcf;
  std::filesystem::path weights;
  std::filesystem::path panel;
  std::filesystem::path phenotypes;

  std::vector<std::filesystem::path> all() const { return {vcf, weights, panel, phenotypes}; }
};

/// cohort.vcf, weights.tsv, panel.txt and phenotypes.tsv under `dir`
/// (created if needed). Byte-identical for identical cohorts.
ScenarioFiles write_scenario(const SyntheticCohort& cohort, const std::filesystem::path& dir);

}  // namespace aprs
