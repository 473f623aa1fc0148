#include "aprs/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <fmt/format.h>

#include "aprs/errors.hpp"
#include "aprs/evaluation.hpp"
#include "aprs/ingestion.hpp"
#include "aprs/rng.hpp"
#include "aprs/text.hpp"

namespace aprs {

namespace {

constexpr std::size_t kChromosomes = 22;
constexpr double kSpuriousFreqFloor = 0.01;
constexpr double kEffectIsRefProbability = 0.3;

// Strand-unambiguous REF/ALT pairs.
constexpr std::array<std::pair<const char*, const char*>, 8> kAllelePairs = {{
    {"A", "G"}, {"G", "A"}, {"C", "T"}, {"T", "C"}, {"A", "C"}, {"C", "A"}, {"G", "T"}, {"T", "G"},
}};

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::ConfigInvalid, fmt::format("{}: {}", field, why));
}

PopulationSpec parse_population(const std::string& value) {
  const auto parts = text::split(value, ':');
  if (parts.size() < 3 || parts.size() > 5) {
    invalid("population", fmt::format("'{}' is not LABEL:N:FST[:PRS_SHIFT[:OFFSET]]", value));
  }
  PopulationSpec pop;
  pop.label = std::string(text::trim(parts[0]));
  const auto n = text::parse_uint(text::trim(parts[1]));
  if (!n) invalid("population.n_samples", fmt::format("'{}' is not a count", parts[1]));
  pop.n_samples = static_cast<std::size_t>(*n);
  const auto real = [&](std::string_view tok, const char* field) {
    const auto v = text::parse_double(text::trim(tok));
    if (!v) invalid(fmt::format("population.{}", field), fmt::format("'{}' is not a number", tok));
    return *v;
  };
  pop.fst = real(parts[2], "fst");
  if (parts.size() > 3) pop.prs_shift = real(parts[3], "prs_shift");
  if (parts.size() > 4) pop.liability_offset = real(parts[4], "offset");
  return pop;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

void ScenarioConfig::validate() const {
  if (populations.empty()) invalid("populations", "at least one population is required");
  std::unordered_set<std::string_view> labels;
  for (std::size_t q = 0; q < populations.size(); ++q) {
    const auto& p = populations[q];
    const std::string where = fmt::format("population[{}]", q);
    if (p.label.empty() || p.label.find_first_of(" \t,:") != std::string::npos) {
      invalid(where + ".label", fmt::format("'{}' must be non-empty without spaces, commas or colons", p.label));
    }
    if (!labels.insert(p.label).second) invalid(where + ".label", fmt::format("duplicate label '{}'", p.label));
    if (p.n_samples == 0) invalid(where + ".n_samples", "must be positive");
    if (!(p.fst > 0.0 && p.fst < 1.0)) invalid(where + ".fst", fmt::format("{} is outside (0, 1)", p.fst));
    if (!std::isfinite(p.prs_shift)) invalid(where + ".prs_shift", "must be finite");
    if (!std::isfinite(p.liability_offset)) invalid(where + ".offset", "must be finite");
  }
  if (n_ancestry_snps == 0) invalid("n_ancestry_snps", "must be positive");
  if (n_trait_snps == 0) invalid("n_trait_snps", "must be positive");
  if (n_spurious_snps >= n_trait_snps && n_spurious_snps != 0) {
    invalid("n_spurious_snps", fmt::format("{} leaves no causal trait SNP out of {}", n_spurious_snps, n_trait_snps));
  }
  if (!std::isfinite(weight_mean)) invalid("weight_mean", "must be finite");
  if (!(weight_sd >= 0.0) || !std::isfinite(weight_sd)) invalid("weight_sd", fmt::format("{} must be >= 0", weight_sd));
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) invalid("noise_sd", fmt::format("{} must be >= 0", noise_sd));
  if (!std::isfinite(bmi_base)) invalid("bmi_base", "must be finite");
  if (!std::isfinite(bmi_slope)) invalid("bmi_slope", "must be finite");
  if (!(missing_rate >= 0.0 && missing_rate < 1.0)) invalid("missing_rate", fmt::format("{} is outside [0, 1)", missing_rate));
}

ScenarioConfig ScenarioConfig::confounded_default() {
  ScenarioConfig c;
  c.seed = 42;
  c.populations = {
      {"AFR", 200, 0.1, -2.5, 0.0},
      {"EAS", 200, 0.1, 0.0, 0.0},
      {"EUR", 200, 0.1, 2.5, 0.0},
  };
  c.n_ancestry_snps = 2000;
  c.n_trait_snps = 200;
  c.n_spurious_snps = 80;
  c.weight_mean = 0.0;
  c.weight_sd = 0.1;
  c.noise_sd = 1.0;
  c.bmi_base = 25.0;
  c.bmi_slope = 2.5;
  return c;
}

ScenarioConfig parse_scenario_config(std::istream& in) {
  ScenarioConfig c = ScenarioConfig::confounded_default();
  bool populations_given = false;
  const auto count = [](const std::string& key, const std::string& v) {
    const auto n = text::parse_uint(v);
    if (!n) invalid(key, fmt::format("'{}' is not a non-negative integer", v));
    return *n;
  };
  const auto real = [](const std::string& key, const std::string& v) {
    const auto x = text::parse_double(v);
    if (!x) invalid(key, fmt::format("'{}' is not a number", v));
    return *x;
  };

  for (const auto& [key, value] : text::parse_key_values(in)) {
    if (key == "population") {
      if (!populations_given) c.populations.clear();
      populations_given = true;
      c.populations.push_back(parse_population(value));
    } else if (key == "seed") {
      c.seed = count(key, value);
    } else if (key == "sample_stream") {
      c.sample_stream = count(key, value);
    } else if (key == "n_ancestry_snps") {
      c.n_ancestry_snps = count(key, value);
    } else if (key == "n_trait_snps") {
      c.n_trait_snps = count(key, value);
    } else if (key == "n_spurious_snps") {
      c.n_spurious_snps = count(key, value);
    } else if (key == "weight_mean") {
      c.weight_mean = real(key, value);
    } else if (key == "weight_sd") {
      c.weight_sd = real(key, value);
    } else if (key == "noise_sd") {
      c.noise_sd = real(key, value);
    } else if (key == "bmi_base") {
      c.bmi_base = real(key, value);
    } else if (key == "bmi_slope") {
      c.bmi_slope = real(key, value);
    } else if (key == "missing_rate") {
      c.missing_rate = real(key, value);
    } else {
      invalid(key, "unknown scenario key");
    }
  }
  c.validate();
  return c;
}

void write_scenario_config(const ScenarioConfig& c, std::ostream& out) {
  const auto real = [](double v) { return text::format_real(v, 17); };
  out << "seed=" << c.seed << '\n' << "sample_stream=" << c.sample_stream << '\n';
  for (const auto& p : c.populations) {
    out << "population=" << p.label << ':' << p.n_samples << ':' << real(p.fst) << ':' << real(p.prs_shift) << ':'
        << real(p.liability_offset) << '\n';
  }
  out << "n_ancestry_snps=" << c.n_ancestry_snps << '\n'
      << "n_trait_snps=" << c.n_trait_snps << '\n'
      << "n_spurious_snps=" << c.n_spurious_snps << '\n'
      << "weight_mean=" << real(c.weight_mean) << '\n'
      << "weight_sd=" << real(c.weight_sd) << '\n'
      << "noise_sd=" << real(c.noise_sd) << '\n'
      << "bmi_base=" << real(c.bmi_base) << '\n'
      << "bmi_slope=" << real(c.bmi_slope) << '\n'
      << "missing_rate=" << real(c.missing_rate) << '\n';
}

// ---------------------------------------------------------------------------
// Generation

SyntheticCohort generate_cohort(const ScenarioConfig& config) {
  config.validate();
  const std::size_t m_anc = config.n_ancestry_snps;
  const std::size_t m_trait = config.n_trait_snps;
  const std::size_t m = m_anc + m_trait;
  const std::size_t first_spurious = m_trait - config.n_spurious_snps;
  const std::size_t n_pop = config.populations.size();

  // Population-level draws come from stream 0 so every sample_stream shares them.
  Rng structure(config.seed, 0);

  std::vector<Variant> variants(m);
  TruthRecord truth;
  truth.ancestral_freq.resize(m);
  truth.causal_effect.assign(m_trait, 0.0);
  truth.spurious.assign(m_trait, false);
  std::vector<double> alt_weight(m_trait, 0.0);  // published weight per alt allele

  for (std::size_t j = 0; j < m; ++j) {
    Variant& v = variants[j];
    const bool trait = j >= m_anc;
    v.id = trait ? fmt::format("rs{}", 5000000 + (j - m_anc)) : fmt::format("rs{}", 1000000 + j);
    v.chromosome = std::to_string(1 + j * kChromosomes / m);
    v.position = 100000 + 1000 * static_cast<std::int64_t>(j);
    const auto& pair = kAllelePairs[structure.next_u64() % kAllelePairs.size()];
    v.ref_allele = pair.first;
    v.alt_allele = pair.second;
    truth.ancestral_freq[j] = structure.uniform(0.05, 0.95);
  }

  ScoreWeightTable weights;
  for (std::size_t t = 0; t < m_trait; ++t) {
    const Variant& v = variants[m_anc + t];
    const double beta = structure.normal(config.weight_mean, config.weight_sd);
    const bool effect_is_ref = structure.bernoulli(kEffectIsRefProbability);
    alt_weight[t] = beta;
    truth.spurious[t] = t >= first_spurious;
    truth.causal_effect[t] = truth.spurious[t] ? 0.0 : beta;
    ScoreWeightRow row;
    row.variant_id = v.id;
    row.effect_allele = effect_is_ref ? v.ref_allele : v.alt_allele;
    row.other_allele = effect_is_ref ? v.alt_allele : v.ref_allele;
    row.weight = effect_is_ref ? -beta : beta;
    weights.rows.push_back(std::move(row));
  }

  double spurious_ss = 0.0;
  for (std::size_t t = first_spurious; t < m_trait; ++t) spurious_ss += alt_weight[t] * alt_weight[t];

  truth.population_freq.assign(n_pop, std::vector<double>(m, 0.0));
  for (std::size_t q = 0; q < n_pop; ++q) {
    const auto& pop = config.populations[q];
    const double f = pop.fst;
    for (std::size_t j = 0; j < m; ++j) {
      const double p = truth.ancestral_freq[j];
      const bool spurious = j >= m_anc && truth.spurious[j - m_anc];
      if (spurious) {
        // 2 * sum_t w_t * dp_t = prs_shift before clamping.
        const double dp = spurious_ss > 0.0 ? pop.prs_shift * alt_weight[j - m_anc] / (2.0 * spurious_ss) : 0.0;
        truth.population_freq[q][j] = std::clamp(p + dp, kSpuriousFreqFloor, 1.0 - kSpuriousFreqFloor);
      } else {
        truth.population_freq[q][j] = structure.beta(p * (1.0 - f) / f, (1.0 - p) * (1.0 - f) / f);
      }
    }
  }

  // Individual-level draws.
  Rng individuals(config.seed, 1 + config.sample_stream);
  std::size_t n = 0;
  for (const auto& pop : config.populations) n += pop.n_samples;

  std::vector<SampleRecord> samples;
  samples.reserve(n);
  std::vector<double> dosage(n * m, 0.0);
  std::vector<std::uint8_t> missing(n * m, 0);
  truth.population_index.reserve(n);
  truth.genetic_value.reserve(n);
  truth.liability.reserve(n);

  std::size_t i = 0;
  for (std::size_t q = 0; q < n_pop; ++q) {
    const auto& pop = config.populations[q];
    const auto& freq = truth.population_freq[q];
    for (std::size_t s = 0; s < pop.n_samples; ++s, ++i) {
      SampleRecord r;
      r.sample_id = config.sample_stream == 0 ? fmt::format("{}_{:04d}", pop.label, s + 1)
                                              : fmt::format("{}_s{}_{:04d}", pop.label, config.sample_stream, s + 1);
      r.population = pop.label;
      r.sex = individuals.bernoulli(0.5) ? Sex::female : Sex::male;

      double genetic = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double g = static_cast<double>(individuals.bernoulli(freq[j]) + individuals.bernoulli(freq[j]));
        dosage[j * n + i] = g;
        if (config.missing_rate > 0.0 && individuals.bernoulli(config.missing_rate)) missing[j * n + i] = 1;
        if (j >= m_anc) genetic += truth.causal_effect[j - m_anc] * g;
      }
      const double liability = genetic + pop.liability_offset + individuals.normal(0.0, config.noise_sd);
      r.bmi = config.bmi_base + config.bmi_slope * liability;
      r.obese = is_obese(*r.bmi);

      truth.population_index.push_back(q);
      truth.genetic_value.push_back(genetic);
      truth.liability.push_back(liability);
      samples.push_back(std::move(r));
    }
  }

  SyntheticCohort cohort;
  cohort.config = config;
  cohort.genotypes = GenotypeMatrix(std::move(samples), variants, std::move(dosage), std::move(missing));
  cohort.weights = std::move(weights);
  cohort.panel.name = fmt::format("synthetic-ancestry-seed{}", config.seed);
  for (std::size_t j = 0; j < m_anc; ++j) cohort.panel.variant_ids.push_back(variants[j].id);
  cohort.truth = std::move(truth);
  return cohort;
}

ScenarioFiles write_scenario(const SyntheticCohort& cohort, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, fmt::format("cannot create {}: {}", dir.string(), ec.message()));

  ScenarioFiles files{dir / "cohort.vcf", dir / "weights.tsv", dir / "panel.txt", dir / "phenotypes.tsv"};
  const auto open = [](const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, fmt::format("cannot write {}", p.string()));
    return out;
  };

  {
    auto out = open(files.vcf);
    const std::vector<std::string> meta = {
        "##fileformat=VCFv4.2",
        "##source=aprs-synthgen",
        fmt::format("##synthgen_seed={}", cohort.config.seed),
        fmt::format("##synthgen_sample_stream={}", cohort.config.sample_stream),
    };
    write_vcf(cohort.genotypes, out, meta);
  }
  {
    auto out = open(files.weights);
    write_weights(cohort.weights, out);
  }
  {
    auto out = open(files.panel);
    write_panel(cohort.panel, out);
  }
  {
    auto out = open(files.phenotypes);
    write_phenotypes(cohort.genotypes.samples(), out);
  }
  return files;
}

}  // namespace aprs
