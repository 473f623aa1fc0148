#include "aprs/ingestion.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <fmt/format.h>

#include "aprs/errors.hpp"
#include "aprs/text.hpp"

namespace aprs {

namespace {

constexpr int kReportDigits = 10;

bool is_nucleotide_run(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return c == 'A' || c == 'C' || c == 'G' || c == 'T';
  });
}

[[noreturn]] void malformed(std::size_t line_no, std::string_view line, std::string_view why) {
  constexpr std::size_t kMaxEcho = 200;
  const std::string echo = line.size() > kMaxEcho ? std::string(line.substr(0, kMaxEcho)) + "..." : std::string(line);
  throw Error(ErrorCode::MalformedRow, fmt::format("line {}: {}: {}", line_no, why, echo));
}

constexpr std::string_view kVcfFixedColumns[] = {"#CHROM", "POS",    "ID",   "REF",   "ALT",
                                                 "QUAL",   "FILTER", "INFO", "FORMAT"};
constexpr std::size_t kVcfFixed = 9;

struct GenotypeCall {
  bool missing = true;
  double dosage = 0.0;
};

// Diploid GT with alleles 0/1 and '/' or '|' separators; "." alone or
// "./." / ".|." is missing.
std::optional<GenotypeCall> parse_gt(std::string_view gt) {
  if (gt == "." || gt == "./." || gt == ".|.") return GenotypeCall{};
  if (gt.size() != 3 || (gt[1] != '/' && gt[1] != '|')) return std::nullopt;
  const char a = gt[0];
  const char b = gt[2];
  if ((a != '0' && a != '1') || (b != '0' && b != '1')) return std::nullopt;
  return GenotypeCall{false, static_cast<double>((a == '1') + (b == '1'))};
}

void add_skip(VcfParseReport& report, std::size_t line_no, const char* reason, std::string detail) {
  ++report.skipped[reason];
  report.issues.push_back({line_no, reason, std::move(detail)});
}

}  // namespace

std::size_t VcfParseReport::rows_skipped() const {
  std::size_t total = 0;
  for (const auto& [reason, count] : skipped) total += count;
  return total;
}

// ---------------------------------------------------------------------------
// VCF

VcfParseResult parse_vcf(std::istream& in) {
  std::vector<std::string> meta;
  std::vector<std::string> sample_names;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;

  while (text::read_line(in, line)) {
    ++line_no;
    if (line.rfind("##", 0) == 0) {
      meta.push_back(line);
      continue;
    }
    if (line.empty()) continue;
    if (line.rfind("#CHROM", 0) != 0) {
      throw Error(ErrorCode::ParseAbort,
                  fmt::format("line {}: data before the #CHROM header line", line_no));
    }
    const auto cols = text::split(line, '\t');
    if (cols.size() <= kVcfFixed) {
      throw Error(ErrorCode::ParseAbort, fmt::format("line {}: header has no sample columns", line_no));
    }
    for (std::size_t c = 0; c < kVcfFixed; ++c) {
      if (cols[c] != kVcfFixedColumns[c]) {
        throw Error(ErrorCode::ParseAbort,
                    fmt::format("line {}: header column {} is '{}', expected '{}'", line_no, c + 1,
                                cols[c], kVcfFixedColumns[c]));
      }
    }
    for (std::size_t c = kVcfFixed; c < cols.size(); ++c) sample_names.emplace_back(cols[c]);
    have_header = true;
    break;
  }
  if (!have_header) throw Error(ErrorCode::ParseAbort, "no #CHROM header line found");

  std::vector<SampleRecord> samples;
  samples.reserve(sample_names.size());
  {
    std::unordered_set<std::string_view> seen;
    for (const auto& name : sample_names) {
      if (!seen.insert(name).second) throw Error(ErrorCode::DuplicateSample, fmt::format("VCF header: {}", name));
      samples.push_back(sample_named(name));
    }
  }

  const std::size_t n = samples.size();
  GenotypeMatrixBuilder builder(std::move(samples));
  VcfParseReport report;
  std::unordered_set<std::string> seen_ids;
  std::vector<double> dosage(n);
  std::vector<std::uint8_t> missing(n);

  while (text::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') malformed(line_no, line, "header line after #CHROM");
    ++report.data_rows;

    const auto cols = text::split(line, '\t');
    if (cols.size() != kVcfFixed + n) {
      malformed(line_no, line, fmt::format("expected {} columns, found {}", kVcfFixed + n, cols.size()));
    }

    Variant v;
    v.chromosome = std::string(cols[0]);
    const auto pos = text::parse_int(cols[1]);
    if (!pos || *pos <= 0) malformed(line_no, line, "POS is not a positive integer");
    v.position = *pos;
    v.ref_allele = text::to_upper(cols[3]);
    v.alt_allele = text::to_upper(cols[4]);
    v.id = cols[2] == "." ? v.positional_key() : std::string(cols[2]);
    if (v.chromosome.empty() || cols[2].empty()) malformed(line_no, line, "empty CHROM or ID");

    if (v.alt_allele == ".") {
      add_skip(report, line_no, kSkipNoAlt, v.id);
      continue;
    }
    if (v.alt_allele.find(',') != std::string::npos) {
      add_skip(report, line_no, kSkipMultiallelic, v.id);
      continue;
    }
    if (!is_nucleotide_run(v.ref_allele) || !is_nucleotide_run(v.alt_allele)) {
      add_skip(report, line_no, kSkipNonNucleotide, v.id);
      continue;
    }
    if (v.ref_allele == v.alt_allele) malformed(line_no, line, "REF equals ALT");

    const auto format = text::split(cols[8], ':');
    if (format.empty() || format[0] != "GT") malformed(line_no, line, "FORMAT must begin with GT");
    std::optional<std::size_t> ds_index;
    for (std::size_t f = 1; f < format.size(); ++f) {
      if (format[f] == "DS") ds_index = f;
    }

    for (std::size_t s = 0; s < n; ++s) {
      const auto fields = text::split(cols[kVcfFixed + s], ':');
      const auto call = parse_gt(fields[0]);
      if (!call) malformed(line_no, line, fmt::format("unsupported GT '{}' for sample {}", fields[0], s + 1));
      GenotypeCall value = *call;
      if (ds_index && *ds_index < fields.size() && fields[*ds_index] != ".") {
        const auto ds = text::parse_double(fields[*ds_index]);
        if (!ds || !(*ds >= 0.0 && *ds <= 2.0)) {
          malformed(line_no, line, fmt::format("DS '{}' for sample {} is not a dosage in [0,2]", fields[*ds_index], s + 1));
        }
        value = GenotypeCall{false, *ds};
      }
      dosage[s] = value.missing ? 0.0 : value.dosage;
      missing[s] = value.missing ? 1 : 0;
    }

    if (!seen_ids.insert(v.id).second) {
      add_skip(report, line_no, kSkipDuplicateId, v.id);
      continue;
    }
    builder.add_variant(std::move(v), dosage, missing);
    ++report.rows_parsed;
  }

  return {std::move(builder).finish(), std::move(report), std::move(meta)};
}

void write_vcf(const GenotypeMatrix& matrix, std::ostream& out, std::span<const std::string> meta_lines) {
  const bool has_fileformat = std::any_of(meta_lines.begin(), meta_lines.end(), [](const std::string& m) {
    return m.rfind("##fileformat=", 0) == 0;
  });
  if (!has_fileformat) out << "##fileformat=VCFv4.2\n";
  for (const auto& m : meta_lines) out << m << '\n';
  out << "##FORMAT=<ID=GT,Number=1,Type=String,Description=\"Genotype\">\n";
  out << "##FORMAT=<ID=DS,Number=1,Type=Float,Description=\"Alt allele dosage\">\n";
  out << "#CHROM\tPOS\tID\tREF\tALT\tQUAL\tFILTER\tINFO\tFORMAT";
  for (const auto& s : matrix.samples()) out << '\t' << s.sample_id;
  out << '\n';

  const std::size_t n = matrix.n_samples();
  std::string row;
  for (std::size_t j = 0; j < matrix.n_variants(); ++j) {
    const Variant& v = matrix.variants()[j];
    const auto col = matrix.column(j);
    const auto mask = matrix.missing_column(j);
    bool fractional = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!mask[i] && col[i] != std::round(col[i])) fractional = true;
    }
    row = fmt::format("{}\t{}\t{}\t{}\t{}\t.\t.\t.\t{}", v.chromosome, v.position, v.id, v.ref_allele,
                      v.alt_allele, fractional ? "GT:DS" : "GT");
    for (std::size_t i = 0; i < n; ++i) {
      row += '\t';
      if (mask[i]) {
        row += fractional ? "./.:." : "./.";
        continue;
      }
      const long hard = std::lround(col[i]);
      row += hard == 0 ? "0/0" : hard == 1 ? "0/1" : "1/1";
      if (fractional) {
        row += ':';
        row += text::format_real(col[i], 17);
      }
    }
    out << row << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing VCF");
}

// ---------------------------------------------------------------------------
// Weights

ScoreWeightTable parse_weights(std::istream& in) {
  ScoreWeightTable table;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;

  while (text::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (!have_header) {
      if (line.front() == '#') continue;
      const auto cols = text::split(line, '\t');
      if (cols.size() != 4 || cols[0] != "variant_id" || cols[1] != "effect_allele" ||
          cols[2] != "other_allele" || cols[3] != "weight") {
        malformed(line_no, line, "expected header 'variant_id<TAB>effect_allele<TAB>other_allele<TAB>weight'");
      }
      have_header = true;
      continue;
    }
    const auto cols = text::split(line, '\t');
    if (cols.size() != 4) malformed(line_no, line, fmt::format("expected 4 columns, found {}", cols.size()));

    ScoreWeightRow row;
    row.variant_id = std::string(text::trim(cols[0]));
    row.effect_allele = text::to_upper(text::trim(cols[1]));
    const auto other = text::trim(cols[2]);
    if (!other.empty() && other != ".") row.other_allele = text::to_upper(other);
    if (row.variant_id.empty() || row.effect_allele.empty()) malformed(line_no, line, "empty variant id or effect allele");

    const auto weight = text::parse_double(text::trim(cols[3]));
    if (!weight || !std::isfinite(*weight)) {
      throw Error(ErrorCode::NonNumericWeight, fmt::format("line {}: weight '{}'", line_no, cols[3]));
    }
    row.weight = *weight;
    if (!seen.insert(row.variant_id).second) {
      throw Error(ErrorCode::DuplicateVariant, fmt::format("line {}: {}", line_no, row.variant_id));
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw Error(ErrorCode::ParseAbort, "weights file has no header line");
  return table;
}

void write_weights(const ScoreWeightTable& table, std::ostream& out) {
  out << "variant_id\teffect_allele\tother_allele\tweight\n";
  for (const auto& row : table.rows) {
    out << row.variant_id << '\t' << row.effect_allele << '\t' << row.other_allele.value_or(".") << '\t'
        << text::format_real(row.weight, 17) << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing weights");
}

// ---------------------------------------------------------------------------
// Panel

PanelDefinition parse_panel(std::istream& in, std::string name, std::vector<std::string>* duplicates) {
  PanelDefinition panel;
  panel.name = std::move(name);
  std::unordered_set<std::string> seen;
  std::string line;
  while (text::read_line(in, line)) {
    const auto id = text::trim(line);
    if (id.empty() || id.front() == '#') continue;
    std::string key(id);
    if (!seen.insert(key).second) {
      if (duplicates) duplicates->push_back(std::move(key));
      continue;
    }
    panel.variant_ids.push_back(std::move(key));
  }
  if (panel.variant_ids.empty()) throw Error(ErrorCode::EmptyPanel, fmt::format("panel '{}' lists no variant ids", panel.name));
  return panel;
}

void write_panel(const PanelDefinition& panel, std::ostream& out) {
  out << "# panel: " << panel.name << '\n';
  for (const auto& id : panel.variant_ids) out << id << '\n';
  if (!out) throw Error(ErrorCode::Io, "failed writing panel");
}

// ---------------------------------------------------------------------------
// Phenotypes

namespace {

std::optional<Sex> parse_sex(std::string_view token, std::size_t line_no) {
  if (token == ".") return std::nullopt;
  const std::string t = text::to_upper(token);
  if (t == "MALE" || t == "M" || t == "1") return Sex::male;
  if (t == "FEMALE" || t == "F" || t == "2") return Sex::female;
  if (t == "UNKNOWN" || t == "U" || t == "0") return Sex::unknown;
  throw Error(ErrorCode::UnknownSexToken, fmt::format("line {}: '{}'", line_no, token));
}

std::string_view sex_token(const std::optional<Sex>& sex) {
  if (!sex) return ".";
  switch (*sex) {
    case Sex::male: return "male";
    case Sex::female: return "female";
    case Sex::unknown: return "unknown";
  }
  return ".";
}

}  // namespace

std::vector<SampleRecord> parse_phenotypes(std::istream& in) {
  std::vector<SampleRecord> records;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;

  while (text::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = text::split(line, '\t');
    if (!have_header) {
      if (cols.size() != 4 || cols[0] != "sample_id" || cols[1] != "population" || cols[2] != "sex" ||
          cols[3] != "bmi") {
        malformed(line_no, line, "expected header 'sample_id<TAB>population<TAB>sex<TAB>bmi'");
      }
      have_header = true;
      continue;
    }
    if (cols.size() != 4) malformed(line_no, line, fmt::format("expected 4 columns, found {}", cols.size()));

    SampleRecord r;
    r.sample_id = std::string(text::trim(cols[0]));
    if (r.sample_id.empty() || r.sample_id == ".") malformed(line_no, line, "missing sample id");
    if (const auto pop = text::trim(cols[1]); pop != "." && !pop.empty()) r.population = std::string(pop);
    r.sex = parse_sex(text::trim(cols[2]), line_no);
    if (const auto bmi_tok = text::trim(cols[3]); bmi_tok != "." && !bmi_tok.empty()) {
      const auto bmi = text::parse_double(bmi_tok);
      if (!bmi || !std::isfinite(*bmi)) malformed(line_no, line, "BMI is not a number");
      if (*bmi < 0.0) throw Error(ErrorCode::NegativeBmi, fmt::format("line {}: {}", line_no, bmi_tok));
      r.bmi = *bmi;
      r.obese = is_obese(*bmi);
    }
    if (!seen.insert(r.sample_id).second) {
      throw Error(ErrorCode::DuplicateSample, fmt::format("line {}: {}", line_no, r.sample_id));
    }
    records.push_back(std::move(r));
  }
  if (!have_header) throw Error(ErrorCode::ParseAbort, "phenotype file has no header line");
  return records;
}

void write_phenotypes(std::span<const SampleRecord> records, std::ostream& out) {
  out << "sample_id\tpopulation\tsex\tbmi\n";
  for (const auto& r : records) {
    out << r.sample_id << '\t' << r.population.value_or(".") << '\t' << sex_token(r.sex) << '\t'
        << (r.bmi ? text::format_real(*r.bmi, 17) : std::string(".")) << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing phenotypes");
}

// ---------------------------------------------------------------------------
// Cohort report CSV

void write_report_csv(const CohortReport& report, std::ostream& out) {
  std::string line = "sample_id,population";
  for (std::size_t j = 1; j <= report.k; ++j) line += fmt::format(",pc{}", j);
  line += ",raw_prs,adjusted_prs,obese\n";
  out << line;
  for (const auto& row : report.rows) {
    if (row.pcs.size() != report.k) {
      throw Error(ErrorCode::DimensionError,
                  fmt::format("report row {} has {} PCs, header declares {}", row.sample_id, row.pcs.size(), report.k));
    }
    line = row.sample_id;
    line += ',';
    line += row.population.value_or(".");
    for (const double pc : row.pcs) {
      line += ',';
      line += text::format_real(pc, kReportDigits);
    }
    line += ',';
    line += text::format_real(row.raw_prs, kReportDigits);
    line += ',';
    line += text::format_real(row.adjusted_prs, kReportDigits);
    line += ',';
    line += row.obese ? (*row.obese ? "1" : "0") : ".";
    line += '\n';
    out << line;
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing cohort report");
}

CohortReport read_report_csv(std::istream& in) {
  CohortReport report;
  std::string line;
  std::size_t line_no = 0;
  if (!text::read_line(in, line)) throw Error(ErrorCode::ParseAbort, "empty cohort report");
  ++line_no;
  const auto header = text::split(line, ',');
  if (header.size() < 5 || header[0] != "sample_id" || header[1] != "population" ||
      header[header.size() - 3] != "raw_prs" || header[header.size() - 2] != "adjusted_prs" ||
      header.back() != "obese") {
    throw Error(ErrorCode::ParseAbort, fmt::format("unexpected cohort report header '{}'", line));
  }
  report.k = header.size() - 5;
  for (std::size_t j = 0; j < report.k; ++j) {
    if (header[2 + j] != fmt::format("pc{}", j + 1)) {
      throw Error(ErrorCode::ParseAbort, fmt::format("unexpected cohort report column '{}'", header[2 + j]));
    }
  }

  const auto real = [&](std::string_view tok) {
    const auto v = text::parse_double(tok);
    if (!v) malformed(line_no, line, fmt::format("'{}' is not a number", tok));
    return *v;
  };

  while (text::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = text::split(line, ',');
    if (cols.size() != header.size()) {
      malformed(line_no, line, fmt::format("expected {} columns, found {}", header.size(), cols.size()));
    }
    ReportRow row;
    row.sample_id = std::string(cols[0]);
    if (cols[1] != ".") row.population = std::string(cols[1]);
    for (std::size_t j = 0; j < report.k; ++j) row.pcs.push_back(real(cols[2 + j]));
    row.raw_prs = real(cols[2 + report.k]);
    row.adjusted_prs = real(cols[3 + report.k]);
    const auto obese = cols[4 + report.k];
    if (obese == "1") {
      row.obese = true;
    } else if (obese == "0") {
      row.obese = false;
    } else if (obese != ".") {
      malformed(line_no, line, "obese must be 1, 0 or .");
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Parse reports

void write_parse_report(const VcfParseReport& report, std::ostream& out) {
  out << "reason,count\n";
  out << "parsed," << report.rows_parsed << '\n';
  for (const auto& [reason, count] : report.skipped) out << reason << ',' << count << '\n';
  if (!out) throw Error(ErrorCode::Io, "failed writing parse report");
}

void write_parse_detail(const VcfParseReport& report, std::ostream& out) {
  out << "line_no,reason,detail\n";
  for (const auto& issue : report.issues) out << issue.line_no << ',' << issue.reason << ',' << issue.detail << '\n';
  if (!out) throw Error(ErrorCode::Io, "failed writing parse detail");
}

}  // namespace aprs
