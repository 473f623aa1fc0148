#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "aprs/errors.hpp"
#include "aprs/ingestion.hpp"
#include "builders.hpp"

using namespace aprs;

namespace {

const std::string kHeader = "#CHROM\tPOS\tID\tREF\tALT\tQUAL\tFILTER\tINFO\tFORMAT\tS1\tS2\tS3\n";

VcfParseResult parse_text(const std::string& body) {
  std::istringstream in("##fileformat=VCFv4.2\n" + kHeader + body);
  return parse_vcf(in);
}

template <typename F>
Error error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "no aprs::Error thrown";
  return Error(ErrorCode::Io, "none");
}

}  // namespace

TEST(ParseVcf, HandWrittenFixture) {
  std::ifstream in(std::string(APRS_FIXTURE_DIR) + "/three_samples.vcf");
  ASSERT_TRUE(in);
  const auto r = parse_vcf(in);
  const auto& m = r.matrix;
  ASSERT_EQ(m.n_samples(), 3u);
  ASSERT_EQ(m.n_variants(), 4u);
  EXPECT_EQ(m.sample_ids(), (std::vector<std::string>{"S1", "S2", "S3"}));
  EXPECT_EQ(m.variants()[2].id, "2:3000:G:A");

  // rows: S1..S3, columns: rs1, rs2, 2:3000:G:A, rs4; -1 = missing
  const double expected[3][4] = {{0, 1, 0.93, 0.25}, {1, 1, 1.8, 0}, {2, -1, 0, 2}};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (expected[i][j] < 0) {
        EXPECT_TRUE(m.is_missing(i, j)) << i << "," << j;
      } else {
        EXPECT_FALSE(m.is_missing(i, j)) << i << "," << j;
        EXPECT_EQ(m.dosage(i, j), expected[i][j]) << i << "," << j;
      }
    }
  }
  EXPECT_EQ(r.report.data_rows, 4u);
  EXPECT_EQ(r.report.rows_parsed, 4u);
  EXPECT_EQ(r.meta_lines.size(), 4u);
}

TEST(ParseVcf, GenotypeCounting) {
  const auto r = parse_text("1\t1\trs1\tA\tG\t.\t.\t.\tGT\t0/1\t1|1\t./.\n");
  EXPECT_EQ(r.matrix.dosage(0, 0), 1.0);
  EXPECT_EQ(r.matrix.dosage(1, 0), 2.0);
  EXPECT_TRUE(r.matrix.is_missing(2, 0));
}

TEST(ParseVcf, DosageFieldPreferred) {
  const auto r = parse_text("1\t1\trs1\tA\tG\t.\t.\t.\tGT:DS\t0/1:0.93\t0/0:.\t1/1:2\n");
  EXPECT_DOUBLE_EQ(r.matrix.dosage(0, 0), 0.93);
  EXPECT_EQ(r.matrix.dosage(1, 0), 0.0);
  EXPECT_EQ(r.matrix.dosage(2, 0), 2.0);
}

TEST(ParseVcf, SkipsAndCountsUnsupportedRows) {
  const auto r = parse_text(
      "1\t1\trs1\tA\tG,T\t.\t.\t.\tGT\t0/1\t0/0\t0/0\n"
      "1\t2\trs2\tA\t.\t.\t.\t.\tGT\t0/0\t0/0\t0/0\n"
      "1\t3\trs3\tA\t<DEL>\t.\t.\t.\tGT\t0/0\t0/0\t0/0\n"
      "1\t4\trs4\tA\tC\t.\t.\t.\tGT\t0/0\t0/1\t1/1\n"
      "1\t5\trs4\tA\tC\t.\t.\t.\tGT\t0/0\t0/1\t1/1\n");
  EXPECT_EQ(r.matrix.n_variants(), 1u);
  EXPECT_EQ(r.report.data_rows, 5u);
  EXPECT_EQ(r.report.rows_parsed + r.report.rows_skipped(), r.report.data_rows);
  EXPECT_EQ(r.report.skipped.at(kSkipMultiallelic), 1u);
  EXPECT_EQ(r.report.skipped.at(kSkipNoAlt), 1u);
  EXPECT_EQ(r.report.skipped.at(kSkipNonNucleotide), 1u);
  EXPECT_EQ(r.report.skipped.at(kSkipDuplicateId), 1u);
  ASSERT_EQ(r.report.issues.size(), 4u);
  EXPECT_EQ(r.report.issues[0].line_no, 3u);
}

TEST(ParseVcf, MalformedRowNamesLine) {
  const auto e = error_of([] { parse_text("1\t1\trs1\tA\tG\t.\t.\t.\tGT\t0/1\t0/0\n"); });
  EXPECT_EQ(e.code(), ErrorCode::MalformedRow);
  EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  EXPECT_NE(std::string(e.what()).find("rs1"), std::string::npos);

  EXPECT_EQ(error_of([] { parse_text("1\t1\trs1\tA\tG\t.\t.\t.\tGT\t0/2\t0/0\t0/0\n"); }).code(),
            ErrorCode::MalformedRow);
  EXPECT_EQ(error_of([] { parse_text("1\t1\trs1\tA\tG\t.\t.\t.\tGT\t./1\t0/0\t0/0\n"); }).code(),
            ErrorCode::MalformedRow);
  EXPECT_EQ(error_of([] { parse_text("1\t1\trs1\tA\tG\t.\t.\t.\tDS\t1\t0\t0\n"); }).code(), ErrorCode::MalformedRow);
  EXPECT_EQ(error_of([] { parse_text("1\tx\trs1\tA\tG\t.\t.\t.\tGT\t0/0\t0/0\t0/0\n"); }).code(),
            ErrorCode::MalformedRow);
  EXPECT_EQ(error_of([] { parse_text("1\t1\trs1\tA\tG\t.\t.\t.\tGT:DS\t0/0:2.5\t0/0\t0/0\n"); }).code(),
            ErrorCode::MalformedRow);
}

TEST(ParseVcf, HeaderProblemsAbort) {
  std::istringstream none("##fileformat=VCFv4.2\n");
  EXPECT_EQ(error_of([&] { parse_vcf(none); }).code(), ErrorCode::ParseAbort);
  std::istringstream no_samples("#CHROM\tPOS\tID\tREF\tALT\tQUAL\tFILTER\tINFO\tFORMAT\n");
  EXPECT_EQ(error_of([&] { parse_vcf(no_samples); }).code(), ErrorCode::ParseAbort);
  std::istringstream wrong("#CHROM\tPOS\tID\tREF\tALT\tQUAL\tFILTER\tINFO\tFMT\tS1\n");
  EXPECT_EQ(error_of([&] { parse_vcf(wrong); }).code(), ErrorCode::ParseAbort);
  std::istringstream dup("#CHROM\tPOS\tID\tREF\tALT\tQUAL\tFILTER\tINFO\tFORMAT\tS1\tS1\n");
  EXPECT_EQ(error_of([&] { parse_vcf(dup); }).code(), ErrorCode::DuplicateSample);
}

TEST(ParseVcf, WriteParseRoundTrip) {
  constexpr double NA = std::numeric_limits<double>::quiet_NaN();
  const auto m = testutil::make_matrix({"a", "b", "c"},
                                       {testutil::snp("x", "A", "G"), testutil::snp("y", "C", "T")},
                                       {{0, 1, NA}, {0.123456789012345, 2, 1.75}});
  std::ostringstream out;
  write_vcf(m, out);
  std::istringstream in(out.str());
  EXPECT_EQ(parse_vcf(in).matrix, m);
}

TEST(ParseWeights, FieldMapping) {
  std::istringstream in("# pgs\nvariant_id\teffect_allele\tother_allele\tweight\nrs1\tA\tG\t0.12\nrs2\tc\t.\t-1e-2\n");
  const auto t = parse_weights(in);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0], (ScoreWeightRow{"rs1", "A", "G", 0.12}));
  EXPECT_EQ(t.rows[1].effect_allele, "C");
  EXPECT_FALSE(t.rows[1].other_allele);
  EXPECT_DOUBLE_EQ(t.rows[1].weight, -0.01);
}

TEST(ParseWeights, Errors) {
  const std::string header = "variant_id\teffect_allele\tother_allele\tweight\n";
  std::istringstream dup(header + "rs1\tA\tG\t0.1\nrs1\tA\tG\t0.2\n");
  EXPECT_EQ(error_of([&] { parse_weights(dup); }).code(), ErrorCode::DuplicateVariant);
  std::istringstream bad(header + "rs1\tA\tG\tabc\n");
  EXPECT_EQ(error_of([&] { parse_weights(bad); }).code(), ErrorCode::NonNumericWeight);
  std::istringstream nohdr("rs1\tA\tG\t0.1\n");
  EXPECT_EQ(error_of([&] { parse_weights(nohdr); }).code(), ErrorCode::MalformedRow);
}

TEST(ParseWeights, RoundTrip) {
  const ScoreWeightTable t{{{"rs1", "A", "G", 0.1}, {"rs2", "T", std::nullopt, -1.0 / 3.0}}};
  std::ostringstream out;
  write_weights(t, out);
  std::istringstream in(out.str());
  EXPECT_EQ(parse_weights(in), t);
}

TEST(ParsePanel, DeduplicatesInFirstSeenOrder) {
  std::istringstream in("rs2\nrs1\n# note\n\nrs2\n");
  std::vector<std::string> dups;
  const auto p = parse_panel(in, "p", &dups);
  EXPECT_EQ(p.variant_ids, (std::vector<std::string>{"rs2", "rs1"}));
  EXPECT_EQ(dups, (std::vector<std::string>{"rs2"}));
}

TEST(ParsePanel, CommentsOnlyIsEmpty) {
  std::istringstream in("# a\n# b\n");
  EXPECT_EQ(error_of([&] { parse_panel(in); }).code(), ErrorCode::EmptyPanel);
}

TEST(ParsePanel, LargePanelKeepsEveryId) {
  constexpr std::size_t kSize = 16385;
  std::string body;
  for (std::size_t i = 0; i < kSize; ++i) body += "rs" + std::to_string(i) + "\n";
  std::istringstream in(body);
  EXPECT_EQ(parse_panel(in).variant_ids.size(), kSize);
}

TEST(ParsePhenotypes, ObesityIsStrictlyAbove27) {
  std::istringstream in("sample_id\tpopulation\tsex\tbmi\nS1\tIDN\tfemale\t28.4\nS2\tIDN\tmale\t27.0\nS3\tEAS\t.\t.\n");
  const auto r = parse_phenotypes(in);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].obese, true);
  EXPECT_EQ(r[0].sex, Sex::female);
  EXPECT_EQ(r[1].obese, false);
  EXPECT_FALSE(r[2].obese);
  EXPECT_FALSE(r[2].bmi);
  EXPECT_FALSE(r[2].sex);
  EXPECT_EQ(r[2].population, "EAS");
}

TEST(ParsePhenotypes, Errors) {
  const std::string header = "sample_id\tpopulation\tsex\tbmi\n";
  std::istringstream sex(header + "S1\tX\tyes\t20\n");
  EXPECT_EQ(error_of([&] { parse_phenotypes(sex); }).code(), ErrorCode::UnknownSexToken);
  std::istringstream neg(header + "S1\tX\tm\t-3\n");
  EXPECT_EQ(error_of([&] { parse_phenotypes(neg); }).code(), ErrorCode::NegativeBmi);
  std::istringstream dup(header + "S1\tX\tm\t20\nS1\tX\tf\t21\n");
  EXPECT_EQ(error_of([&] { parse_phenotypes(dup); }).code(), ErrorCode::DuplicateSample);
}

TEST(ReportCsv, Shapes) {
  CohortReport one;
  one.k = 2;
  one.rows.push_back(ReportRow{"s1", "AFR", {0.5, -1.25}, 1.5, 0.25, true});
  std::ostringstream out;
  write_report_csv(one, out);
  EXPECT_EQ(out.str(), "sample_id,population,pc1,pc2,raw_prs,adjusted_prs,obese\ns1,AFR,0.5,-1.25,1.5,0.25,1\n");

  CohortReport empty;
  empty.k = 4;
  std::ostringstream eout;
  write_report_csv(empty, eout);
  EXPECT_EQ(eout.str(), "sample_id,population,pc1,pc2,pc3,pc4,raw_prs,adjusted_prs,obese\n");
}

TEST(ReportCsv, RoundTripWithin1e9) {
  CohortReport r;
  r.k = 3;
  r.rows.push_back(ReportRow{"a", "EUR", {1.0 / 3.0, -2.0 / 7.0, 12345.678901234}, 0.1 + 0.2, -1e-5 / 3.0, false});
  r.rows.push_back(ReportRow{"b", std::nullopt, {0, 0, 0}, 3.0, 2.0, std::nullopt});
  std::ostringstream out;
  write_report_csv(r, out);
  std::istringstream in(out.str());
  const auto back = read_report_csv(in);
  ASSERT_EQ(back.k, 3u);
  ASSERT_EQ(back.rows.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& a = r.rows[i];
    const auto& b = back.rows[i];
    EXPECT_EQ(a.sample_id, b.sample_id);
    EXPECT_EQ(a.population, b.population);
    EXPECT_EQ(a.obese, b.obese);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(a.pcs[j], b.pcs[j], 1e-9 * std::max(1.0, std::fabs(a.pcs[j])));
    EXPECT_NEAR(a.raw_prs, b.raw_prs, 1e-9);
    EXPECT_NEAR(a.adjusted_prs, b.adjusted_prs, 1e-9);
  }
}

TEST(ParseReports, CsvLayout) {
  const auto r = parse_text("1\t1\trs1\tA\tG,T\t.\t.\t.\tGT\t0/1\t0/0\t0/0\n1\t4\trs4\tA\tC\t.\t.\t.\tGT\t0/0\t0/1\t1/1\n");
  std::ostringstream summary, detail;
  write_parse_report(r.report, summary);
  write_parse_detail(r.report, detail);
  EXPECT_EQ(summary.str(), "reason,count\nparsed,1\nmultiallelic,1\n");
  EXPECT_EQ(detail.str(), "line_no,reason,detail\n3,multiallelic,rs1\n");
}
