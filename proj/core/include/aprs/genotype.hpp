#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace aprs {

struct Variant {
  std::string id;  // rsID, or chrom:pos:ref:alt when the source row had none
  std::string chromosome;
  std::int64_t position = 0;
  std::string ref_allele;
  std::string alt_allele;

  std::string positional_key() const;

  friend bool operator==(const Variant&, const Variant&) = default;
};

enum class Sex { male, female, unknown };

struct SampleRecord {
  std::string sample_id;
  std::optional<std::string> population;
  std::optional<Sex> sex;
  std::optional<double> bmi;
  std::optional<bool> obese;

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

inline SampleRecord sample_named(std::string id) {
  SampleRecord r;
  r.sample_id = std::move(id);
  return r;
}

/// Samples x variants dosage matrix of the alt (effect) allele.
///
/// Storage is variant-major: the dosages of one variant are contiguous, which
/// is the order a VCF streams them in. Missing entries hold 0.0 in the dosage
/// buffer and are flagged in the mask.
class GenotypeMatrix {
 public:
  GenotypeMatrix() = default;

  /// Validates dimensions, dosage domain [0,2] for observed entries and id
  /// uniqueness. `dosage` and `missing` are variant-major, n*m long.
  GenotypeMatrix(std::vector<SampleRecord> samples, std::vector<Variant> variants,
                 std::vector<double> dosage, std::vector<std::uint8_t> missing);

  std::size_t n_samples() const noexcept { return samples_.size(); }
  std::size_t n_variants() const noexcept { return variants_.size(); }

  const std::vector<SampleRecord>& samples() const noexcept { return samples_; }
  const std::vector<Variant>& variants() const noexcept { return variants_; }
  std::vector<std::string> sample_ids() const;

  double dosage(std::size_t sample, std::size_t variant) const {
    return dosage_[variant * samples_.size() + sample];
  }
  bool is_missing(std::size_t sample, std::size_t variant) const {
    return missing_[variant * samples_.size() + sample] != 0;
  }

  std::span<const double> column(std::size_t variant) const {
    return {dosage_.data() + variant * samples_.size(), samples_.size()};
  }
  std::span<const std::uint8_t> missing_column(std::size_t variant) const {
    return {missing_.data() + variant * samples_.size(), samples_.size()};
  }

  bool has_missing() const noexcept;
  std::size_t missing_count(std::size_t variant) const;

  /// Variant lookup: exact id first, then chrom:pos:ref:alt.
  std::optional<std::size_t> find_variant(std::string_view key) const;

  /// n x m column-major view over the dosage buffer (missing entries read 0).
  Eigen::Map<const Eigen::MatrixXd> dosage_matrix() const {
    return {dosage_.data(), static_cast<Eigen::Index>(samples_.size()),
            static_cast<Eigen::Index>(variants_.size())};
  }

  const std::vector<double>& raw_dosage() const noexcept { return dosage_; }
  const std::vector<std::uint8_t>& raw_missing() const noexcept { return missing_; }

  friend bool operator==(const GenotypeMatrix& a, const GenotypeMatrix& b) {
    return a.samples_ == b.samples_ && a.variants_ == b.variants_ && a.dosage_ == b.dosage_ &&
           a.missing_ == b.missing_;
  }

 private:
  void build_index();

  std::vector<SampleRecord> samples_;
  std::vector<Variant> variants_;
  std::vector<double> dosage_;
  std::vector<std::uint8_t> missing_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<std::string, std::size_t> by_position_;
};

/// Accumulates variant columns one at a time; used by the streaming parser
/// and the simulator so the matrix buffer is only ever held once.
class GenotypeMatrixBuilder {
 public:
  explicit GenotypeMatrixBuilder(std::vector<SampleRecord> samples);

  std::size_t n_samples() const noexcept { return samples_.size(); }
  std::size_t n_variants() const noexcept { return variants_.size(); }

  void add_variant(Variant variant, std::span<const double> dosage,
                   std::span<const std::uint8_t> missing);

  GenotypeMatrix finish() &&;

 private:
  std::vector<SampleRecord> samples_;
  std::vector<Variant> variants_;
  std::vector<double> dosage_;
  std::vector<std::uint8_t> missing_;
};

struct PanelDefinition {
  std::string name;
  std::vector<std::string> variant_ids;

  void validate() const;
};

struct ScoreWeightRow {
  std::string variant_id;
  std::string effect_allele;
  std::optional<std::string> other_allele;
  double weight = 0.0;

  friend bool operator==(const ScoreWeightRow&, const ScoreWeightRow&) = default;
};

struct ScoreWeightTable {
  std::vector<ScoreWeightRow> rows;

  void validate() const;
  friend bool operator==(const ScoreWeightTable&, const ScoreWeightTable&) = default;
};

// ---------------------------------------------------------------------------
// Operations. All are pure: inputs are never modified and sample order is
// preserved.

struct PanelCoverageReport {
  std::size_t panel_size = 0;
  std::size_t matched = 0;
  std::vector<std::string> absent;  // panel ids with no matching variant

  double coverage() const {
    return panel_size == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(panel_size);
  }
};

struct PanelFilterResult {
  GenotypeMatrix matrix;
  PanelCoverageReport coverage;
};

/// Keeps the variants named by the panel, in panel order.
/// Throws EmptyIntersection when none of them is present.
PanelFilterResult filter_by_panel(const GenotypeMatrix& matrix, const PanelDefinition& panel);

/// Columns by index, in the given order.
GenotypeMatrix select_variants(const GenotypeMatrix& matrix, std::span<const std::size_t> columns);

enum class StrandPolicy { exclude, keep };

struct AlignmentReport {
  std::vector<std::string> flipped;          // effect allele was REF; dosage complemented
  std::vector<std::string> strand_resolved;  // matched only after base complement
  std::vector<std::string> excluded;         // strand-ambiguous, dropped under `exclude`
  std::vector<std::string> unmatched;        // weight rows with no variant in the matrix
};

struct AlignmentResult {
  GenotypeMatrix matrix;
  AlignmentReport report;
};

/// Re-orients every weighted variant so the dosage counts the effect allele.
/// Variants without a weight row pass through unchanged.
AlignmentResult align_effect_alleles(const GenotypeMatrix& matrix, const ScoreWeightTable& weights,
                                     StrandPolicy policy = StrandPolicy::exclude);

/// Swaps REF/ALT for the named variants and maps observed dosages d -> 2 - d.
GenotypeMatrix flip_alleles(const GenotypeMatrix& matrix, std::span<const std::string> variant_ids);

/// Replaces each missing entry by the mean of that variant's observed dosages.
GenotypeMatrix fill_missing_mean(const GenotypeMatrix& matrix);

std::string complement_bases(std::string_view alleles);
bool is_strand_ambiguous(std::string_view ref, std::string_view alt);

}  // namespace aprs
