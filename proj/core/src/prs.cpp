#include "aprs/prs.hpp"

#include <cmath>

#include <fmt/format.h>

#include "aprs/errors.hpp"

namespace aprs {

PrsVector compute_raw_prs(const GenotypeMatrix& matrix, const ScoreWeightTable& weights, PrsMode mode) {
  PrsVector out;
  out.sample_ids = matrix.sample_ids();
  out.scores.assign(matrix.n_samples(), 0.0);

  for (const auto& row : weights.rows) {
    const auto col = matrix.find_variant(row.variant_id);
    if (!col) {
      out.skipped.push_back(row.variant_id);
      continue;
    }
    if (matrix.missing_count(*col) != 0) {
      throw Error(ErrorCode::UnfilledMatrix,
                  fmt::format("variant {} still has missing dosages; fill before scoring", row.variant_id));
    }
    const auto dosage = matrix.column(*col);
    for (std::size_t s = 0; s < dosage.size(); ++s) out.scores[s] += row.weight * dosage[s];
    out.used.push_back(row.variant_id);
  }
  out.n_snps_used = out.used.size();
  if (out.n_snps_used == 0) {
    throw Error(ErrorCode::NoUsableVariants,
                fmt::format("none of the {} weighted variants is present in the matrix", weights.rows.size()));
  }
  if (mode == PrsMode::mean) {
    const double denom = static_cast<double>(out.n_snps_used);
    for (double& s : out.scores) s /= denom;
  }
  return out;
}

}  // namespace aprs
