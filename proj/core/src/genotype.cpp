#include "aprs/genotype.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <fmt/format.h>

#include "aprs/errors.hpp"

namespace aprs {

std::string Variant::positional_key() const {
  return fmt::format("{}:{}:{}:{}", chromosome, position, ref_allele, alt_allele);
}

// ---------------------------------------------------------------------------
// GenotypeMatrix

GenotypeMatrix::GenotypeMatrix(std::vector<SampleRecord> samples, std::vector<Variant> variants,
                               std::vector<double> dosage, std::vector<std::uint8_t> missing)
    : samples_(std::move(samples)),
      variants_(std::move(variants)),
      dosage_(std::move(dosage)),
      missing_(std::move(missing)) {
  const std::size_t n = samples_.size();
  const std::size_t m = variants_.size();
  if (dosage_.size() != n * m || missing_.size() != n * m) {
    throw Error(ErrorCode::DimensionError,
                fmt::format("dosage buffer has {} entries and mask {}, expected {} x {}",
                            dosage_.size(), missing_.size(), n, m));
  }

  std::unordered_set<std::string_view> seen;
  for (const auto& s : samples_) {
    if (s.sample_id.empty()) throw Error(ErrorCode::DuplicateSample, "empty sample id");
    if (!seen.insert(s.sample_id).second) throw Error(ErrorCode::DuplicateSample, s.sample_id);
  }
  seen.clear();
  for (const auto& v : variants_) {
    if (v.id.empty()) throw Error(ErrorCode::MalformedRow, "variant with empty id");
    if (v.ref_allele == v.alt_allele) {
      throw Error(ErrorCode::MalformedRow, fmt::format("variant {} has REF == ALT", v.id));
    }
    if (!seen.insert(v.id).second) throw Error(ErrorCode::DuplicateVariant, v.id);
  }

  for (std::size_t i = 0; i < dosage_.size(); ++i) {
    if (missing_[i]) {
      dosage_[i] = 0.0;
      continue;
    }
    const double d = dosage_[i];
    if (!(d >= 0.0 && d <= 2.0)) {
      throw Error(ErrorCode::InvalidDosage,
                  fmt::format("dosage {} for sample {} at variant {} is outside [0,2]", d,
                              samples_[i % n].sample_id, variants_[i / n].id));
    }
  }
  build_index();
}

void GenotypeMatrix::build_index() {
  by_id_.reserve(variants_.size());
  by_position_.reserve(variants_.size());
  for (std::size_t j = 0; j < variants_.size(); ++j) {
    by_id_.emplace(variants_[j].id, j);
    by_position_.emplace(variants_[j].positional_key(), j);
  }
}

std::vector<std::string> GenotypeMatrix::sample_ids() const {
  std::vector<std::string> ids;
  ids.reserve(samples_.size());
  for (const auto& s : samples_) ids.push_back(s.sample_id);
  return ids;
}

bool GenotypeMatrix::has_missing() const noexcept {
  return std::any_of(missing_.begin(), missing_.end(), [](std::uint8_t b) { return b != 0; });
}

std::size_t GenotypeMatrix::missing_count(std::size_t variant) const {
  const auto col = missing_column(variant);
  return static_cast<std::size_t>(std::count_if(col.begin(), col.end(), [](std::uint8_t b) { return b != 0; }));
}

std::optional<std::size_t> GenotypeMatrix::find_variant(std::string_view key) const {
  const std::string k(key);
  if (auto it = by_id_.find(k); it != by_id_.end()) return it->second;
  if (auto it = by_position_.find(k); it != by_position_.end()) return it->second;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// GenotypeMatrixBuilder

GenotypeMatrixBuilder::GenotypeMatrixBuilder(std::vector<SampleRecord> samples)
    : samples_(std::move(samples)) {}

void GenotypeMatrixBuilder::add_variant(Variant variant, std::span<const double> dosage,
                                        std::span<const std::uint8_t> missing) {
  if (dosage.size() != samples_.size() || missing.size() != samples_.size()) {
    throw Error(ErrorCode::DimensionError,
                fmt::format("variant {} has {} dosages for {} samples", variant.id, dosage.size(),
                            samples_.size()));
  }
  variants_.push_back(std::move(variant));
  dosage_.insert(dosage_.end(), dosage.begin(), dosage.end());
  missing_.insert(missing_.end(), missing.begin(), missing.end());
}

GenotypeMatrix GenotypeMatrixBuilder::finish() && {
  return GenotypeMatrix(std::move(samples_), std::move(variants_), std::move(dosage_),
                        std::move(missing_));
}

// ---------------------------------------------------------------------------
// Panels and weights

void PanelDefinition::validate() const {
  if (variant_ids.empty()) throw Error(ErrorCode::EmptyPanel, fmt::format("panel '{}' has no variants", name));
  std::unordered_set<std::string_view> seen;
  for (const auto& id : variant_ids) {
    if (!seen.insert(id).second) throw Error(ErrorCode::DuplicateVariant, fmt::format("panel '{}': {}", name, id));
  }
}

void ScoreWeightTable::validate() const {
  std::unordered_set<std::string_view> seen;
  for (const auto& row : rows) {
    if (!seen.insert(row.variant_id).second) throw Error(ErrorCode::DuplicateVariant, row.variant_id);
    if (!std::isfinite(row.weight)) {
      throw Error(ErrorCode::NonNumericWeight, fmt::format("weight for {} is not finite", row.variant_id));
    }
  }
}

// ---------------------------------------------------------------------------
// Operations

GenotypeMatrix select_variants(const GenotypeMatrix& matrix, std::span<const std::size_t> columns) {
  GenotypeMatrixBuilder builder(matrix.samples());
  for (const std::size_t j : columns) {
    builder.add_variant(matrix.variants().at(j), matrix.column(j), matrix.missing_column(j));
  }
  return std::move(builder).finish();
}

PanelFilterResult filter_by_panel(const GenotypeMatrix& matrix, const PanelDefinition& panel) {
  PanelCoverageReport report;
  report.panel_size = panel.variant_ids.size();

  std::vector<std::size_t> columns;
  std::unordered_set<std::size_t> taken;
  for (const auto& id : panel.variant_ids) {
    const auto col = matrix.find_variant(id);
    if (!col) {
      report.absent.push_back(id);
      continue;
    }
    // An id and a positional key in one panel can name the same column.
    if (taken.insert(*col).second) columns.push_back(*col);
    ++report.matched;
  }
  if (columns.empty()) {
    throw Error(ErrorCode::EmptyIntersection,
                fmt::format("none of the {} variants of panel '{}' is present in the genotype matrix "
                            "(check genome build and variant id scheme)",
                            panel.variant_ids.size(), panel.name));
  }
  return {select_variants(matrix, columns), std::move(report)};
}

std::string complement_bases(std::string_view alleles) {
  std::string out;
  out.reserve(alleles.size());
  for (const char c : alleles) {
    switch (c) {
      case 'A': out += 'T'; break;
      case 'T': out += 'A'; break;
      case 'C': out += 'G'; break;
      case 'G': out += 'C'; break;
      default: out += c; break;
    }
  }
  return out;
}

bool is_strand_ambiguous(std::string_view ref, std::string_view alt) {
  return ref.size() == 1 && alt.size() == 1 && complement_bases(ref) == alt;
}

namespace {

GenotypeMatrix rebuild(const GenotypeMatrix& matrix, const std::vector<bool>& keep,
                       const std::vector<bool>& flip) {
  GenotypeMatrixBuilder builder(matrix.samples());
  std::vector<double> column(matrix.n_samples());
  for (std::size_t j = 0; j < matrix.n_variants(); ++j) {
    if (!keep[j]) continue;
    Variant variant = matrix.variants()[j];
    const auto src = matrix.column(j);
    const auto mask = matrix.missing_column(j);
    if (flip[j]) {
      std::swap(variant.ref_allele, variant.alt_allele);
      for (std::size_t i = 0; i < src.size(); ++i) column[i] = mask[i] ? 0.0 : 2.0 - src[i];
    } else {
      std::copy(src.begin(), src.end(), column.begin());
    }
    builder.add_variant(std::move(variant), column, mask);
  }
  return std::move(builder).finish();
}

}  // namespace

GenotypeMatrix flip_alleles(const GenotypeMatrix& matrix, std::span<const std::string> variant_ids) {
  std::vector<bool> keep(matrix.n_variants(), true);
  std::vector<bool> flip(matrix.n_variants(), false);
  for (const auto& id : variant_ids) {
    const auto col = matrix.find_variant(id);
    if (!col) throw Error(ErrorCode::MissingModelVariants, fmt::format("cannot flip unknown variant {}", id));
    flip[*col] = true;
  }
  return rebuild(matrix, keep, flip);
}

AlignmentResult align_effect_alleles(const GenotypeMatrix& matrix, const ScoreWeightTable& weights,
                                     StrandPolicy policy) {
  AlignmentReport report;
  std::vector<bool> keep(matrix.n_variants(), true);
  std::vector<bool> flip(matrix.n_variants(), false);

  for (const auto& row : weights.rows) {
    const auto col = matrix.find_variant(row.variant_id);
    if (!col) {
      report.unmatched.push_back(row.variant_id);
      continue;
    }
    const Variant& v = matrix.variants()[*col];
    if (is_strand_ambiguous(v.ref_allele, v.alt_allele) && policy == StrandPolicy::exclude) {
      keep[*col] = false;
      report.excluded.push_back(v.id);
      continue;
    }

    const std::string effect = row.effect_allele;
    std::string other = row.other_allele.value_or("");
    bool effect_is_ref = false;
    bool via_complement = false;
    if (effect == v.alt_allele) {
      effect_is_ref = false;
    } else if (effect == v.ref_allele) {
      effect_is_ref = true;
    } else if (complement_bases(effect) == v.alt_allele) {
      via_complement = true;
    } else if (complement_bases(effect) == v.ref_allele) {
      effect_is_ref = true;
      via_complement = true;
    } else {
      throw Error(ErrorCode::AlleleMismatch,
                  fmt::format("effect allele {} of {} matches neither {} nor {} (nor their complements)",
                              effect, row.variant_id, v.ref_allele, v.alt_allele));
    }
    if (!other.empty() && other != ".") {
      if (via_complement) other = complement_bases(other);
      const std::string& expected_other = effect_is_ref ? v.alt_allele : v.ref_allele;
      if (other != expected_other) {
        throw Error(ErrorCode::AlleleMismatch,
                    fmt::format("other allele {} of {} does not match {}/{}", row.other_allele.value(),
                                row.variant_id, v.ref_allele, v.alt_allele));
      }
    }
    if (via_complement) report.strand_resolved.push_back(v.id);
    if (effect_is_ref) {
      flip[*col] = true;
      report.flipped.push_back(v.id);
    }
  }
  return {rebuild(matrix, keep, flip), std::move(report)};
}

GenotypeMatrix fill_missing_mean(const GenotypeMatrix& matrix) {
  const std::size_t n = matrix.n_samples();
  GenotypeMatrixBuilder builder(matrix.samples());
  std::vector<double> column(n);
  const std::vector<std::uint8_t> observed(n, 0);
  for (std::size_t j = 0; j < matrix.n_variants(); ++j) {
    const auto src = matrix.column(j);
    const auto mask = matrix.missing_column(j);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!mask[i]) {
        sum += src[i];
        ++count;
      }
    }
    if (count == 0 && n > 0) throw Error(ErrorCode::AllMissingVariant, matrix.variants()[j].id);
    const double mean = count == 0 ? 0.0 : sum / static_cast<double>(count);
    for (std::size_t i = 0; i < n; ++i) column[i] = mask[i] ? mean : src[i];
    builder.add_variant(matrix.variants()[j], column, observed);
  }
  return std::move(builder).finish();
}

}  // namespace aprs
