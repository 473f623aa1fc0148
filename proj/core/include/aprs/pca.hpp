#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "aprs/genotype.hpp"

namespace aprs {

/// Column scaling applied after mean-centering.
///   sample_sd  divide by the sample standard deviation (divisor n-1)
///   binomial   divide by sqrt(2p(1-p)) with p = mean dosage / 2
enum class ScaleMode { sample_sd, binomial };

std::string_view to_string(ScaleMode mode) noexcept;
ScaleMode scale_mode_from_string(std::string_view name);

struct StandardizationParams {
  ScaleMode mode = ScaleMode::sample_sd;
  std::vector<std::string> variant_ids;  // retained variants, column order of X
  std::vector<double> means;
  std::vector<double> scales;            // > 0
  std::vector<std::string> dropped;      // zero-variance variants

  std::size_t size() const noexcept { return variant_ids.size(); }
};

struct StandardizedMatrix {
  Eigen::MatrixXd x;  // n x m_retained
  StandardizationParams params;
  std::vector<std::string> sample_ids;
};

/// Centers and scales every column; constant columns are dropped and listed.
/// The matrix must have no missing entries (UnfilledMatrix otherwise).
StandardizedMatrix standardize(const GenotypeMatrix& matrix, ScaleMode mode = ScaleMode::sample_sd);

/// Principal axes of C = X'X / (n-1).
struct PcaModel {
  Eigen::MatrixXd loadings;                  // m x k, orthonormal columns
  Eigen::VectorXd eigenvalues;               // k, nonincreasing
  Eigen::VectorXd explained_variance_ratio;  // eigenvalue / trace(C)
  double total_variance = 0.0;               // trace(C)
  std::size_t n_train = 0;
  StandardizationParams params;

  std::size_t k() const noexcept { return static_cast<std::size_t>(loadings.cols()); }
  std::size_t m() const noexcept { return static_cast<std::size_t>(loadings.rows()); }

  /// SHA-256 of the serialized model; ties PC scores to the model that made them.
  std::string fingerprint() const;
};

/// Top-k_max eigenpairs of the covariance of an already standardized X.
/// Each eigenvector is signed so its largest-magnitude entry is positive
/// (lowest index wins ties). Requires n >= 2 and 1 <= k_max <= min(n-1, m).
PcaModel fit_pca(const Eigen::Ref<const Eigen::MatrixXd>& x, std::size_t k_max,
                 StandardizationParams params = {});
PcaModel fit_pca(const StandardizedMatrix& standardized, std::size_t k_max);

/// First k components of a model; ratios stay relative to the full trace.
PcaModel truncate(const PcaModel& model, std::size_t k);

struct PcScores {
  std::vector<std::string> sample_ids;
  Eigen::MatrixXd scores;  // n x k
  std::string model_fingerprint;

  std::size_t k() const noexcept { return static_cast<std::size_t>(scores.cols()); }
};

/// Z = XW with X standardized by the model's own means and scales.
/// Throws MissingModelVariants listing any model variant absent from `matrix`.
PcScores project(const PcaModel& model, const GenotypeMatrix& matrix);

struct KSelection {
  std::size_t k = 0;
  double cumulative = 0.0;
  bool threshold_reached = true;  // false: every component returned, short of the threshold
};

/// Smallest k whose cumulative explained-variance ratio reaches `threshold`
/// (in (0,1]). Unreachable thresholds return all components, flagged.
KSelection select_k(std::span<const double> ratios, double threshold);
KSelection select_k(const PcaModel& model, double threshold);

/// Versioned text format, reals with 17 significant digits.
void write_pca_model(const PcaModel& model, std::ostream& out);
PcaModel read_pca_model(std::istream& in);
std::string serialize(const PcaModel& model);

}  // namespace aprs
