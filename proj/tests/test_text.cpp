#include <sstream>

#include <gtest/gtest.h>

#include "aprs/errors.hpp"
#include "aprs/text.hpp"

using namespace aprs;

TEST(Text, SplitKeepsEmptyFields) {
  const auto parts = text::split("a\t\tb", '\t');
  ASSERT_EQ(parts.size(), 3u);
  EXPECT_EQ(parts[1], "");
  EXPECT_EQ(parts[2], "b");
}

TEST(Text, ReadLineStripsCarriageReturn) {
  std::istringstream in("x\r\ny\n");
  std::string line;
  ASSERT_TRUE(text::read_line(in, line));
  EXPECT_EQ(line, "x");
  ASSERT_TRUE(text::read_line(in, line));
  EXPECT_EQ(line, "y");
  EXPECT_FALSE(text::read_line(in, line));
}

TEST(Text, ParseDoubleIsStrict) {
  EXPECT_DOUBLE_EQ(*text::parse_double("0.12"), 0.12);
  EXPECT_DOUBLE_EQ(*text::parse_double("+1e-3"), 1e-3);
  EXPECT_DOUBLE_EQ(*text::parse_double("-2"), -2.0);
  EXPECT_FALSE(text::parse_double("abc"));
  EXPECT_FALSE(text::parse_double("1.0x"));
  EXPECT_FALSE(text::parse_double(""));
  EXPECT_FALSE(text::parse_double(" 1"));
}

TEST(Text, ParseIntegers) {
  EXPECT_EQ(*text::parse_int("-7"), -7);
  EXPECT_EQ(*text::parse_uint("42"), 42u);
  EXPECT_FALSE(text::parse_uint("-1"));
  EXPECT_FALSE(text::parse_int("3.5"));
}

TEST(Text, FormatRealRoundTripsAt17Digits) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) {
    EXPECT_EQ(*text::parse_double(text::format_real(v, 17)), v);
  }
  EXPECT_EQ(text::format_real(-0.0, 17), "0");
  EXPECT_EQ(text::format_real(std::numeric_limits<double>::quiet_NaN(), 17), ".");
}

TEST(Text, Sha256KnownVector) {
  EXPECT_EQ(text::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(text::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Text, KeyValues) {
  std::istringstream in("# comment\n\n seed = 7 \nout=dir\n");
  const auto kv = text::parse_key_values(in);
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv[0].first, "seed");
  EXPECT_EQ(kv[0].second, "7");
  EXPECT_EQ(kv[1].second, "dir");
}

TEST(Text, KeyValuesRejectsBareWord) {
  std::istringstream in("seed=1\noops\n");
  try {
    text::parse_key_values(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigInvalid);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Errors, MessageCarriesCodeName) {
  const Error e(ErrorCode::EmptyIntersection, "detail");
  EXPECT_STREQ(e.what(), "EmptyIntersection: detail");
  EXPECT_EQ(e.detail(), "detail");
}
