#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "aprs/pca.hpp"
#include "aprs/prs.hpp"

namespace aprs {

/// Linear trend of raw PRS on the leading PCs of the training cohort:
///   PRS_raw ~ intercept + sum_j coefficients[j] * PC_j
/// Adjusted scores are the residuals of that trend.
struct AdjustmentModel {
  double intercept = 0.0;
  std::vector<double> coefficients;  // one per PC
  double r_squared = 0.0;
  std::size_t n = 0;
  std::string pca_fingerprint;  // PcaModel the PCs were projected with

  std::size_t k() const noexcept { return coefficients.size(); }
};

/// Ordinary least squares via column-pivoted Householder QR of [1, PC1..PCk].
/// Needs n >= k + 1 and a full-rank design (RankDeficient otherwise).
AdjustmentModel fit_adjustment(const PrsVector& scores, const PcScores& pcs);

/// PRS_adj = PRS_raw - (intercept + sum_j coefficients[j] * PC_j).
/// Throws ModelMismatch when `pcs` came from a different PCA model.
PrsVector apply_adjustment(const AdjustmentModel& model, const PrsVector& scores, const PcScores& pcs);

void write_adjustment_model(const AdjustmentModel& model, std::ostream& out);
AdjustmentModel read_adjustment_model(std::istream& in);

}  // namespace aprs
