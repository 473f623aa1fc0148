#include "aprs/pca.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "aprs/errors.hpp"
#include "aprs/text.hpp"

namespace aprs {

namespace {

constexpr std::string_view kModelMagic = "aprs-pca-model";
constexpr int kModelVersion = 1;
constexpr int kModelDigits = 17;

// Shared by standardize() and project() so training scores reproduce bit for bit.
inline double standardize_value(double dosage, double mean, double scale) {
  return (dosage - mean) / scale;
}

// Flip each column so its largest-magnitude entry is positive; ties go to the
// lowest row index.
void normalize_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      const double a = std::abs(vectors(r, c));
      if (a > best_abs) {
        best_abs = a;
        best = r;
      }
    }
    if (vectors(best, c) < 0.0) vectors.col(c) = -vectors.col(c);
  }
}

std::string list_preview(const std::vector<std::string>& ids) {
  constexpr std::size_t kShown = 20;
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < kShown; ++i) {
    if (i) out += ", ";
    out += ids[i];
  }
  if (ids.size() > kShown) out += fmt::format(", ... ({} total)", ids.size());
  return out;
}

}  // namespace

std::string_view to_string(ScaleMode mode) noexcept {
  return mode == ScaleMode::binomial ? "binomial" : "sample-sd";
}

ScaleMode scale_mode_from_string(std::string_view name) {
  if (name == "sample-sd") return ScaleMode::sample_sd;
  if (name == "binomial") return ScaleMode::binomial;
  throw Error(ErrorCode::ConfigInvalid, fmt::format("scale: unknown mode '{}' (sample-sd|binomial)", name));
}

// ---------------------------------------------------------------------------

StandardizedMatrix standardize(const GenotypeMatrix& matrix, ScaleMode mode) {
  const std::size_t n = matrix.n_samples();
  if (n < 2) throw Error(ErrorCode::DimensionError, fmt::format("standardize needs at least 2 samples, got {}", n));

  StandardizedMatrix out;
  out.sample_ids = matrix.sample_ids();
  out.params.mode = mode;

  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < matrix.n_variants(); ++j) {
    if (matrix.missing_count(j) != 0) {
      throw Error(ErrorCode::UnfilledMatrix,
                  fmt::format("variant {} has missing dosages; fill before standardizing", matrix.variants()[j].id));
    }
    const auto col = matrix.column(j);
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    if (*lo == *hi) {
      out.params.dropped.push_back(matrix.variants()[j].id);
      continue;
    }
    double sum = 0.0;
    for (const double d : col) sum += d;
    const double mean = sum / static_cast<double>(n);
    double scale = 0.0;
    if (mode == ScaleMode::sample_sd) {
      double ss = 0.0;
      for (const double d : col) ss += (d - mean) * (d - mean);
      scale = std::sqrt(ss / static_cast<double>(n - 1));
    } else {
      const double p = mean / 2.0;
      scale = std::sqrt(2.0 * p * (1.0 - p));
    }
    if (!(scale > 0.0)) {
      out.params.dropped.push_back(matrix.variants()[j].id);
      continue;
    }
    kept.push_back(j);
    out.params.variant_ids.push_back(matrix.variants()[j].id);
    out.params.means.push_back(mean);
    out.params.scales.push_back(scale);
  }
  if (kept.empty()) {
    throw Error(ErrorCode::NoVariantsRetained,
                fmt::format("all {} variants have zero variance", matrix.n_variants()));
  }

  out.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) {
    const auto col = matrix.column(kept[c]);
    for (std::size_t i = 0; i < n; ++i) {
      out.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          standardize_value(col[i], out.params.means[c], out.params.scales[c]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

PcaModel fit_pca(const Eigen::Ref<const Eigen::MatrixXd>& x, std::size_t k_max, StandardizationParams params) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto m = static_cast<std::size_t>(x.cols());
  if (n < 2) throw Error(ErrorCode::DimensionError, fmt::format("PCA needs n >= 2 samples, got {}", n));
  if (k_max < 1 || k_max > std::min(n - 1, m)) {
    throw Error(ErrorCode::DimensionError,
                fmt::format("k_max = {} outside [1, min(n-1, m)] = [1, {}]", k_max, std::min(n - 1, m)));
  }
  if (!params.variant_ids.empty() && params.size() != m) {
    throw Error(ErrorCode::DimensionError,
                fmt::format("standardization lists {} variants for {} columns", params.size(), m));
  }
  if (!x.allFinite()) throw Error(ErrorCode::DimensionError, "standardized matrix has non-finite entries");

  const double denom = static_cast<double>(n - 1);
  const auto k = static_cast<Eigen::Index>(k_max);

  PcaModel model;
  model.n_train = n;
  model.total_variance = x.squaredNorm() / denom;
  model.eigenvalues.resize(k);
  model.loadings.resize(static_cast<Eigen::Index>(m), k);

  // Decompose whichever of the m x m covariance and the n x n Gram matrix is
  // smaller; both share the nonzero spectrum. Eigenvectors of the Gram route
  // map back through X'u / sqrt((n-1) lambda).
  const auto covariance_route = [&] {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    cov.selfadjointView<Eigen::Lower>().rankUpdate(x.adjoint(), 1.0 / denom);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::ConvergenceFailure, "covariance eigensolver did not converge");
    const Eigen::Index total = solver.eigenvalues().size();
    for (Eigen::Index i = 0; i < k; ++i) {
      model.eigenvalues(i) = solver.eigenvalues()(total - 1 - i);
      model.loadings.col(i) = solver.eigenvectors().col(total - 1 - i);
    }
  };

  if (m <= n) {
    covariance_route();
  } else {
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    gram.selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0 / denom);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::ConvergenceFailure, "Gram eigensolver did not converge");
    const Eigen::Index total = solver.eigenvalues().size();
    const double top = solver.eigenvalues()(total - 1);
    const double smallest_needed = solver.eigenvalues()(total - k);
    if (!(top > 0.0) || smallest_needed <= 1e-10 * top) {
      // Rank-deficient X: the requested vectors are not recoverable from the
      // Gram side.
      covariance_route();
    } else {
      for (Eigen::Index i = 0; i < k; ++i) {
        const double lambda = solver.eigenvalues()(total - 1 - i);
        model.eigenvalues(i) = lambda;
        model.loadings.col(i) = x.transpose() * solver.eigenvectors().col(total - 1 - i);
        model.loadings.col(i) /= std::sqrt(denom * lambda);
      }
    }
  }

  normalize_signs(model.loadings);
  model.explained_variance_ratio =
      model.total_variance > 0.0 ? Eigen::VectorXd(model.eigenvalues / model.total_variance)
                                 : Eigen::VectorXd::Zero(k);
  model.params = std::move(params);
  return model;
}

PcaModel fit_pca(const StandardizedMatrix& standardized, std::size_t k_max) {
  return fit_pca(standardized.x, k_max, standardized.params);
}

PcaModel truncate(const PcaModel& model, std::size_t k) {
  if (k < 1 || k > model.k()) {
    throw Error(ErrorCode::DimensionError, fmt::format("cannot keep {} of {} components", k, model.k()));
  }
  PcaModel out = model;
  const auto kk = static_cast<Eigen::Index>(k);
  out.loadings = model.loadings.leftCols(kk);
  out.eigenvalues = model.eigenvalues.head(kk);
  out.explained_variance_ratio = model.explained_variance_ratio.head(kk);
  return out;
}

std::string PcaModel::fingerprint() const { return text::sha256_hex(serialize(*this)); }

// ---------------------------------------------------------------------------

PcScores project(const PcaModel& model, const GenotypeMatrix& matrix) {
  const auto& ids = model.params.variant_ids;
  if (ids.size() != model.m()) {
    throw Error(ErrorCode::ModelFormat, "PCA model carries no variant ids for its loadings");
  }
  std::vector<std::size_t> columns;
  columns.reserve(ids.size());
  std::vector<std::string> absent;
  for (const auto& id : ids) {
    const auto col = matrix.find_variant(id);
    if (!col) {
      absent.push_back(id);
    } else {
      columns.push_back(*col);
    }
  }
  if (!absent.empty()) {
    throw Error(ErrorCode::MissingModelVariants,
                fmt::format("{} of {} model variants absent from the cohort: {}", absent.size(), ids.size(),
                            list_preview(absent)));
  }

  const auto n = static_cast<Eigen::Index>(matrix.n_samples());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (matrix.missing_count(columns[c]) != 0) {
      throw Error(ErrorCode::UnfilledMatrix,
                  fmt::format("variant {} has missing dosages; fill before projecting", ids[c]));
    }
    const auto col = matrix.column(columns[c]);
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i, static_cast<Eigen::Index>(c)) =
          standardize_value(col[static_cast<std::size_t>(i)], model.params.means[c], model.params.scales[c]);
    }
  }

  PcScores out;
  out.sample_ids = matrix.sample_ids();
  out.scores = x * model.loadings;
  out.model_fingerprint = model.fingerprint();
  return out;
}

// ---------------------------------------------------------------------------

KSelection select_k(std::span<const double> ratios, double threshold) {
  if (ratios.empty()) throw Error(ErrorCode::EmptyInput, "select_k on a model with no components");
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, fmt::format("threshold: {} is outside (0, 1]", threshold));
  }
  // Absorbs rounding in the running sum, so threshold 1.0 is reachable on a
  // full-rank model.
  constexpr double kSlack = 1e-12;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    cumulative += ratios[i];
    if (cumulative >= threshold - kSlack) return {i + 1, cumulative, true};
  }
  return {ratios.size(), cumulative, false};
}

KSelection select_k(const PcaModel& model, double threshold) {
  const auto& r = model.explained_variance_ratio;
  return select_k(std::span<const double>(r.data(), static_cast<std::size_t>(r.size())), threshold);
}

// ---------------------------------------------------------------------------

void write_pca_model(const PcaModel& model, std::ostream& out) {
  const auto real = [](double v) { return text::format_real(v, kModelDigits); };
  const std::size_t m = model.m();
  const std::size_t k = model.k();
  if (model.params.size() != m || model.params.means.size() != m || model.params.scales.size() != m) {
    throw Error(ErrorCode::ModelFormat, "standardization parameters do not match the loading matrix");
  }

  std::string buf = fmt::format("{}\t{}\n", kModelMagic, kModelVersion);
  buf += fmt::format("n_train\t{}\nm\t{}\nk\t{}\n", model.n_train, m, k);
  buf += fmt::format("scale_mode\t{}\n", to_string(model.params.mode));
  buf += fmt::format("total_variance\t{}\n", real(model.total_variance));
  buf += "eigenvalues";
  for (Eigen::Index i = 0; i < model.eigenvalues.size(); ++i) buf += '\t' + real(model.eigenvalues(i));
  buf += fmt::format("\ndropped\t{}\n", model.params.dropped.size());
  for (const auto& id : model.params.dropped) buf += id + '\n';
  buf += "variants\tid\tmean\tscale";
  for (std::size_t c = 1; c <= k; ++c) buf += fmt::format("\tw{}", c);
  buf += '\n';
  out << buf;
  for (std::size_t j = 0; j < m; ++j) {
    buf = model.params.variant_ids[j];
    buf += '\t' + real(model.params.means[j]);
    buf += '\t' + real(model.params.scales[j]);
    for (std::size_t c = 0; c < k; ++c) {
      buf += '\t' + real(model.loadings(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)));
    }
    buf += '\n';
    out << buf;
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing PCA model");
}

std::string serialize(const PcaModel& model) {
  std::ostringstream out;
  write_pca_model(model, out);
  return std::move(out).str();
}

PcaModel read_pca_model(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](std::string_view why) -> Error {
    return Error(ErrorCode::ModelFormat, fmt::format("PCA model line {}: {}", line_no, why));
  };
  const auto next = [&]() -> std::vector<std::string_view> {
    if (!text::read_line(in, line)) throw fail("unexpected end of file");
    ++line_no;
    return text::split(line, '\t');
  };
  const auto real = [&](std::string_view tok) {
    const auto v = text::parse_double(tok);
    if (!v) throw fail(fmt::format("'{}' is not a number", tok));
    return *v;
  };
  const auto count_field = [&](std::string_view key) {
    const auto f = next();
    if (f.size() != 2 || f[0] != key) throw fail(fmt::format("expected '{}'", key));
    const auto v = text::parse_uint(f[1]);
    if (!v) throw fail(fmt::format("'{}' is not a count", f[1]));
    return static_cast<std::size_t>(*v);
  };

  auto f = next();
  if (f.size() != 2 || f[0] != kModelMagic) throw fail("not a PCA model file");
  if (f[1] != std::to_string(kModelVersion)) throw fail(fmt::format("unsupported format version {}", f[1]));

  PcaModel model;
  model.n_train = count_field("n_train");
  const std::size_t m = count_field("m");
  const std::size_t k = count_field("k");
  f = next();
  if (f.size() != 2 || f[0] != "scale_mode") throw fail("expected 'scale_mode'");
  model.params.mode = scale_mode_from_string(f[1]);
  f = next();
  if (f.size() != 2 || f[0] != "total_variance") throw fail("expected 'total_variance'");
  model.total_variance = real(f[1]);
  f = next();
  if (f.size() != k + 1 || f[0] != "eigenvalues") throw fail("expected k eigenvalues");
  model.eigenvalues.resize(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) model.eigenvalues(static_cast<Eigen::Index>(i)) = real(f[i + 1]);

  const std::size_t n_dropped = count_field("dropped");
  for (std::size_t i = 0; i < n_dropped; ++i) {
    f = next();
    model.params.dropped.emplace_back(f[0]);
  }
  f = next();
  if (f.empty() || f[0] != "variants") throw fail("expected 'variants' header");

  model.loadings.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < m; ++j) {
    f = next();
    if (f.size() != k + 3) throw fail(fmt::format("expected {} fields, found {}", k + 3, f.size()));
    model.params.variant_ids.emplace_back(f[0]);
    model.params.means.push_back(real(f[1]));
    model.params.scales.push_back(real(f[2]));
    for (std::size_t c = 0; c < k; ++c) {
      model.loadings(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) = real(f[c + 3]);
    }
  }
  model.explained_variance_ratio =
      model.total_variance > 0.0 ? Eigen::VectorXd(model.eigenvalues / model.total_variance)
                                 : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
  return model;
}

}  // namespace aprs
