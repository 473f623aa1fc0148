#pragma once

// Readers and writers for the on-disk formats of the pipeline:
//
//   genotypes    VCF 4.x subset: biallelic rows, FORMAT starting with GT,
//                optional DS subfield (used in preference to GT counting)
//   weights      TSV  variant_id effect_allele other_allele weight
//   panel        one variant id per line, '#' comments
//   phenotypes   TSV  sample_id population sex bmi   ('.' = missing)
//   reports      CSV  sample_id,population,pc1..pck,raw_prs,adjusted_prs,obese
//
// All text inputs accept Unix or DOS line endings. Parsers read one line at a
// time and never buffer the whole file.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "aprs/evaluation.hpp"
#include "aprs/genotype.hpp"

namespace aprs {

struct ParseIssue {
  std::size_t line_no = 0;
  std::string reason;
  std::string detail;
};

/// Accounting for every data row of a VCF:
/// rows_parsed + sum(skipped) == data_rows.
struct VcfParseReport {
  std::size_t data_rows = 0;
  std::size_t rows_parsed = 0;
  std::map<std::string, std::size_t> skipped;  // reason -> count
  std::vector<ParseIssue> issues;              // one per skipped row

  std::size_t rows_skipped() const;
};

struct VcfParseResult {
  GenotypeMatrix matrix;
  VcfParseReport report;
  std::vector<std::string> meta_lines;
};

// Skip reasons recorded in VcfParseReport.
inline constexpr const char* kSkipMultiallelic = "multiallelic";
inline constexpr const char* kSkipNoAlt = "no_alt_allele";
inline constexpr const char* kSkipNonNucleotide = "non_nucleotide_allele";
inline constexpr const char* kSkipDuplicateId = "duplicate_id";

/// Throws ParseAbort if no #CHROM header precedes the data and
/// MalformedRow (with line number and text) for rows that break the layout.
VcfParseResult parse_vcf(std::istream& in);

/// Minimal writer: GT only for hard calls, GT:DS when any dosage is
/// fractional. Missing entries are written as "./.".
void write_vcf(const GenotypeMatrix& matrix, std::ostream& out,
               std::span<const std::string> meta_lines = {});

ScoreWeightTable parse_weights(std::istream& in);
void write_weights(const ScoreWeightTable& table, std::ostream& out);

/// De-duplicates in first-seen order; repeated ids are appended to
/// `duplicates` when given. Throws EmptyPanel if no id remains.
PanelDefinition parse_panel(std::istream& in, std::string name = "panel",
                            std::vector<std::string>* duplicates = nullptr);
void write_panel(const PanelDefinition& panel, std::ostream& out);

std::vector<SampleRecord> parse_phenotypes(std::istream& in);
void write_phenotypes(std::span<const SampleRecord> records, std::ostream& out);

/// Reals carry 10 significant digits; '.' marks missing values.
void write_report_csv(const CohortReport& report, std::ostream& out);
CohortReport read_report_csv(std::istream& in);

/// `reason,count` summary, including the parsed row count.
void write_parse_report(const VcfParseReport& report, std::ostream& out);
/// `line_no,reason,detail` per skipped row.
void write_parse_detail(const VcfParseReport& report, std::ostream& out);

}  // namespace aprs
