#include "aprs/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include <fmt/format.h>

#include "aprs/errors.hpp"
#include "aprs/text.hpp"

namespace aprs {

namespace {

constexpr std::string_view kUnlabeledPopulation = ".";

struct Moments {
  double mean = 0.0;
  double sd = std::numeric_limits<double>::quiet_NaN();
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() >= 2) {
    double ss = 0.0;
    for (const double x : v) ss += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return m;
}

// Population label -> row indices, in first-seen order.
std::vector<std::pair<std::string, std::vector<std::size_t>>> group_by_population(std::span<const ReportRow> rows) {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string label = rows[i].population.value_or(std::string(kUnlabeledPopulation));
    auto [it, inserted] = slot.emplace(label, groups.size());
    if (inserted) groups.emplace_back(label, std::vector<std::size_t>{});
    groups[it->second].second.push_back(i);
  }
  return groups;
}

}  // namespace

LabeledRecords label_obesity(std::vector<SampleRecord> records) {
  LabeledRecords out;
  for (auto& r : records) {
    if (r.bmi) {
      r.obese = is_obese(*r.bmi);
      ++out.labeled;
    } else {
      r.obese.reset();
      ++out.excluded;
    }
  }
  out.records = std::move(records);
  return out;
}

double percentile_threshold(std::span<const double> scores, double pct) {
  if (scores.empty()) throw Error(ErrorCode::EmptyInput, "percentile of an empty score vector");
  if (!(pct > 0.0 && pct < 100.0)) {
    throw Error(ErrorCode::ConfigInvalid, fmt::format("percentile: {} is outside (0, 100)", pct));
  }
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  // pct * n / 100 rather than pct / 100 * n: exact for integral pct and n.
  auto rank = static_cast<std::size_t>(std::ceil(pct * n / 100.0));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

std::size_t count_above(std::span<const double> scores, double threshold) {
  return static_cast<std::size_t>(
      std::count_if(scores.begin(), scores.end(), [threshold](double s) { return s > threshold; }));
}

StratificationResult stratify_by_population(std::span<const ReportRow> rows, double pct) {
  StratificationResult out;
  out.percentile = pct;
  out.n = rows.size();
  std::vector<double> raw;
  std::vector<double> adj;
  raw.reserve(rows.size());
  adj.reserve(rows.size());
  for (const auto& r : rows) {
    raw.push_back(r.raw_prs);
    adj.push_back(r.adjusted_prs);
  }
  out.threshold_raw = percentile_threshold(raw, pct);
  out.threshold_adjusted = percentile_threshold(adj, pct);
  out.highrisk_raw = count_above(raw, out.threshold_raw);
  out.highrisk_adjusted = count_above(adj, out.threshold_adjusted);

  for (const auto& [label, members] : group_by_population(rows)) {
    PopulationStratum stratum;
    stratum.population = label;
    stratum.n = members.size();
    for (const std::size_t i : members) {
      stratum.highrisk_raw += rows[i].raw_prs > out.threshold_raw ? 1 : 0;
      stratum.highrisk_adjusted += rows[i].adjusted_prs > out.threshold_adjusted ? 1 : 0;
    }
    out.strata.push_back(std::move(stratum));
  }
  return out;
}

std::vector<PopulationSummary> summarize_populations(std::span<const ReportRow> rows, double pct) {
  const StratificationResult strat = stratify_by_population(rows, pct);
  const auto groups = group_by_population(rows);

  std::vector<PopulationSummary> out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& members = groups[g].second;
    std::vector<double> raw;
    std::vector<double> adj;
    for (const std::size_t i : members) {
      raw.push_back(rows[i].raw_prs);
      adj.push_back(rows[i].adjusted_prs);
    }
    const Moments mr = moments(raw);
    const Moments ma = moments(adj);
    PopulationSummary s;
    s.population = groups[g].first;
    s.n = members.size();
    s.mean_raw = mr.mean;
    s.sd_raw = mr.sd;
    s.mean_adjusted = ma.mean;
    s.sd_adjusted = ma.sd;
    s.highrisk_raw = strat.strata[g].fraction_raw();
    s.highrisk_adjusted = strat.strata[g].fraction_adjusted();
    out.push_back(std::move(s));
  }
  return out;
}

RocResult roc_auc(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::DimensionError, fmt::format("{} scores vs {} labels", scores.size(), labels.size()));
  }
  for (const double s : scores) {
    if (!std::isfinite(s)) throw Error(ErrorCode::DimensionError, "non-finite score passed to ROC");
  }
  RocResult out;
  out.n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  out.n_neg = labels.size() - out.n_pos;
  if (out.n_pos == 0 || out.n_neg == 0) {
    throw Error(ErrorCode::DegenerateLabels,
                fmt::format("ROC needs both classes; got {} positive and {} negative", out.n_pos, out.n_neg));
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  // Twice the area in units of one (negative, positive) pair, kept integral so
  // the trapezoid sum equals the pairwise count exactly.
  std::uint64_t twice_area = 0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  const double p = static_cast<double>(out.n_pos);
  const double q = static_cast<double>(out.n_neg);
  out.points.push_back({0.0, 0.0});
  for (std::size_t i = 0; i < order.size();) {
    const double value = scores[order[i]];
    std::uint64_t tp_next = tp;
    std::uint64_t fp_next = fp;
    for (; i < order.size() && scores[order[i]] == value; ++i) {
      if (labels[order[i]]) {
        ++tp_next;
      } else {
        ++fp_next;
      }
    }
    twice_area += (fp_next - fp) * (tp_next + tp);
    tp = tp_next;
    fp = fp_next;
    out.points.push_back({static_cast<double>(fp) / q, static_cast<double>(tp) / p});
  }
  out.auc = static_cast<double>(twice_area) / (2.0 * p * q);
  return out;
}

ModelComparison compare_models(const PrsVector& raw, const PrsVector& adjusted,
                               std::span<const std::optional<bool>> labels) {
  if (raw.scores.size() != adjusted.scores.size() || raw.scores.size() != labels.size()) {
    throw Error(ErrorCode::SampleMismatch,
                fmt::format("{} raw scores, {} adjusted scores, {} labels", raw.scores.size(),
                            adjusted.scores.size(), labels.size()));
  }
  if (raw.sample_ids != adjusted.sample_ids) {
    throw Error(ErrorCode::SampleMismatch, "raw and adjusted scores list different samples");
  }
  std::vector<double> r;
  std::vector<double> a;
  std::vector<bool> y;
  ModelComparison out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!labels[i]) {
      ++out.excluded;
      continue;
    }
    r.push_back(raw.scores[i]);
    a.push_back(adjusted.scores[i]);
    y.push_back(*labels[i]);
  }
  out.raw = roc_auc(r, y);
  out.adjusted = roc_auc(a, y);
  out.auc_raw = out.raw.auc;
  out.auc_adjusted = out.adjusted.auc;
  out.delta = out.auc_adjusted - out.auc_raw;
  return out;
}

void write_roc_csv(const RocResult& roc, std::ostream& out) {
  out << "fpr,tpr\n";
  for (const auto& pt : roc.points) out << text::format_real(pt.fpr, 10) << ',' << text::format_real(pt.tpr, 10) << '\n';
  if (!out) throw Error(ErrorCode::Io, "failed writing ROC curve");
}

void write_population_summary_csv(std::span<const PopulationSummary> summaries, std::ostream& out) {
  out << "population,n,mean_raw,sd_raw,mean_adj,sd_adj,highrisk_raw,highrisk_adj\n";
  const auto real = [](double v) { return text::format_real(v, 10); };
  for (const auto& s : summaries) {
    out << s.population << ',' << s.n << ',' << real(s.mean_raw) << ',' << real(s.sd_raw) << ','
        << real(s.mean_adjusted) << ',' << real(s.sd_adjusted) << ',' << real(s.highrisk_raw) << ','
        << real(s.highrisk_adjusted) << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing population summary");
}

void write_metrics(const EvaluationMetrics& m, std::ostream& out) {
  const auto real = [](double v) { return text::format_real(v, 17); };
  out << "auc_raw=" << real(m.auc_raw) << '\n'
      << "auc_adjusted=" << real(m.auc_adjusted) << '\n'
      << "delta=" << real(m.delta) << '\n'
      << "threshold_raw=" << real(m.threshold_raw) << '\n'
      << "threshold_adjusted=" << real(m.threshold_adjusted) << '\n'
      << "n_pos=" << m.n_pos << '\n'
      << "n_neg=" << m.n_neg << '\n';
  if (!out) throw Error(ErrorCode::Io, "failed writing metrics");
}

}  // namespace aprs
