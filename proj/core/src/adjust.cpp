#include "aprs/adjust.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include <Eigen/QR>
#include <fmt/format.h>

#include "aprs/errors.hpp"
#include "aprs/text.hpp"

namespace aprs {

namespace {

constexpr std::string_view kModelMagic = "aprs-adjustment-model";
constexpr int kModelVersion = 1;
constexpr int kModelDigits = 17;

void check_aligned(const PrsVector& scores, const PcScores& pcs) {
  if (scores.sample_ids.size() != static_cast<std::size_t>(pcs.scores.rows()) ||
      scores.scores.size() != scores.sample_ids.size()) {
    throw Error(ErrorCode::SampleMismatch,
                fmt::format("{} PRS values vs {} PC score rows", scores.scores.size(), pcs.scores.rows()));
  }
  if (!pcs.sample_ids.empty() && pcs.sample_ids != scores.sample_ids) {
    throw Error(ErrorCode::SampleMismatch, "PRS and PC scores list samples in different orders");
  }
}

}  // namespace

AdjustmentModel fit_adjustment(const PrsVector& scores, const PcScores& pcs) {
  check_aligned(scores, pcs);
  const auto n = static_cast<Eigen::Index>(scores.scores.size());
  const Eigen::Index k = pcs.scores.cols();
  if (n < k + 1) {
    throw Error(ErrorCode::DimensionError, fmt::format("regression on {} PCs needs at least {} samples, got {}", k, k + 1, n));
  }

  Eigen::MatrixXd design(n, k + 1);
  design.col(0).setOnes();
  design.rightCols(k) = pcs.scores;
  const Eigen::Map<const Eigen::VectorXd> y(scores.scores.data(), n);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < k + 1) {
    throw Error(ErrorCode::RankDeficient,
                fmt::format("design [1, PC1..PC{}] has rank {} < {}; PC scores are collinear", k, qr.rank(), k + 1));
  }
  const Eigen::VectorXd beta = qr.solve(y);

  AdjustmentModel model;
  model.intercept = beta(0);
  model.coefficients.assign(beta.data() + 1, beta.data() + beta.size());
  for (const double b : model.coefficients) {
    if (!std::isfinite(b)) throw Error(ErrorCode::RankDeficient, "non-finite regression coefficient");
  }
  model.n = static_cast<std::size_t>(n);
  model.pca_fingerprint = pcs.model_fingerprint;

  const Eigen::VectorXd residual = y - design * beta;
  const double ss_res = residual.squaredNorm();
  const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
  model.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return model;
}

PrsVector apply_adjustment(const AdjustmentModel& model, const PrsVector& scores, const PcScores& pcs) {
  check_aligned(scores, pcs);
  if (model.pca_fingerprint != pcs.model_fingerprint) {
    throw Error(ErrorCode::ModelMismatch,
                fmt::format("PC scores come from PCA model {}, adjustment was fit against {}",
                            pcs.model_fingerprint.empty() ? "<none>" : pcs.model_fingerprint,
                            model.pca_fingerprint.empty() ? "<none>" : model.pca_fingerprint));
  }
  if (static_cast<std::size_t>(pcs.scores.cols()) != model.k()) {
    throw Error(ErrorCode::ModelMismatch,
                fmt::format("adjustment uses {} PCs, scores carry {}", model.k(), pcs.scores.cols()));
  }

  PrsVector out = scores;
  for (std::size_t s = 0; s < out.scores.size(); ++s) {
    double trend = model.intercept;
    for (std::size_t j = 0; j < model.k(); ++j) {
      trend += model.coefficients[j] * pcs.scores(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j));
    }
    out.scores[s] = scores.scores[s] - trend;
  }
  return out;
}

void write_adjustment_model(const AdjustmentModel& model, std::ostream& out) {
  const auto real = [](double v) { return text::format_real(v, kModelDigits); };
  std::string buf = fmt::format("{}\t{}\n", kModelMagic, kModelVersion);
  buf += fmt::format("k\t{}\n", model.k());
  buf += "beta\t" + real(model.intercept);
  for (const double b : model.coefficients) buf += '\t' + real(b);
  buf += "\nr_squared\t" + real(model.r_squared);
  buf += fmt::format("\nn\t{}\n", model.n);
  buf += fmt::format("pca_fingerprint\t{}\n", model.pca_fingerprint);
  out << buf;
  if (!out) throw Error(ErrorCode::Io, "failed writing adjustment model");
}

AdjustmentModel read_adjustment_model(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](std::string_view why) {
    return Error(ErrorCode::ModelFormat, fmt::format("adjustment model line {}: {}", line_no, why));
  };
  const auto next = [&](std::string_view key) {
    if (!text::read_line(in, line)) throw fail("unexpected end of file");
    ++line_no;
    auto f = text::split(line, '\t');
    if (f.empty() || f[0] != key) throw fail(fmt::format("expected '{}'", key));
    return f;
  };
  const auto real = [&](std::string_view tok) {
    const auto v = text::parse_double(tok);
    if (!v) throw fail(fmt::format("'{}' is not a number", tok));
    return *v;
  };

  auto f = next(kModelMagic);
  if (f.size() != 2 || f[1] != std::to_string(kModelVersion)) throw fail("unsupported format version");
  f = next("k");
  const auto k = f.size() == 2 ? text::parse_uint(f[1]) : std::nullopt;
  if (!k) throw fail("bad k");
  f = next("beta");
  if (f.size() != *k + 2) throw fail(fmt::format("expected {} coefficients", *k + 1));

  AdjustmentModel model;
  model.intercept = real(f[1]);
  for (std::size_t j = 0; j < *k; ++j) model.coefficients.push_back(real(f[j + 2]));
  f = next("r_squared");
  if (f.size() != 2) throw fail("bad r_squared");
  model.r_squared = real(f[1]);
  f = next("n");
  const auto n = f.size() == 2 ? text::parse_uint(f[1]) : std::nullopt;
  if (!n) throw fail("bad n");
  model.n = *n;
  f = next("pca_fingerprint");
  model.pca_fingerprint = f.size() == 2 ? std::string(f[1]) : std::string();
  return model;
}

}  // namespace aprs
