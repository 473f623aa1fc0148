#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "aprs/genotype.hpp"

namespace aprs {

enum class PrsMode { sum, mean };

struct PrsVector {
  std::vector<std::string> sample_ids;
  std::vector<double> scores;
  std::size_t n_snps_used = 0;
  std::vector<std::string> used;     // weight rows scored, table order
  std::vector<std::string> skipped;  // weight rows absent from the matrix
};

/// score_s = sum_i weight_i * dosage_{s,i}, accumulated in weight-table order.
/// The matrix must already be effect-aligned against `weights` and filled.
/// Mean mode divides by the number of variants used.
PrsVector compute_raw_prs(const GenotypeMatrix& matrix, const ScoreWeightTable& weights,
                          PrsMode mode = PrsMode::sum);

}  // namespace aprs
