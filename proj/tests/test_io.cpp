#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <random>
#include <string>

#include "pqmass/io.hpp"

using namespace pqmass;

namespace {

std::string error_of(std::string_view content, SampleFormat f) {
  try {
    parse_samples(content, f);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

std::string header(std::uint32_t rows, std::uint32_t cols) {
  std::string s = "PQM1";
  s.append(reinterpret_cast<const char*>(&rows), 4);
  s.append(reinterpret_cast<const char*>(&cols), 4);
  return s;
}

}  // namespace

TEST(Formats, NamesAndExtensions) {
  for (auto f : {SampleFormat::CsvRows, SampleFormat::TextWhitespace, SampleFormat::BinaryMatrix,
                 SampleFormat::SequenceLines}) {
    EXPECT_EQ(parse_format(to_string(f)), f);
  }
  EXPECT_EQ(infer_format("a/b.csv"), SampleFormat::CsvRows);
  EXPECT_EQ(infer_format("x.txt"), SampleFormat::TextWhitespace);
  EXPECT_EQ(infer_format("x.bin"), SampleFormat::BinaryMatrix);
  EXPECT_EQ(infer_format("x.seq"), SampleFormat::SequenceLines);
  EXPECT_THROW(infer_format("x.json"), ConfigError);
  EXPECT_THROW(parse_format("npy"), ConfigError);
}

TEST(Csv, SmallMatrix) {
  const auto s = parse_samples("1,2\n3,4", SampleFormat::CsvRows);
  ASSERT_EQ(s.size(), 2u);
  ASSERT_EQ(s.dim(), 2u);
  EXPECT_EQ(s.row(1)[0], 3.0);
  EXPECT_EQ(s.row(1)[1], 4.0);
}

TEST(Csv, CrlfBlankLinesAndSigns) {
  const auto s = parse_samples("1.5, -2e3\r\n\r\n+3,4\r\n", SampleFormat::CsvRows);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.row(0)[1], -2000.0);
  EXPECT_EQ(s.row(1)[0], 3.0);
}

TEST(Csv, Errors) {
  EXPECT_NE(error_of("1,2\n3\n", SampleFormat::CsvRows).find("line 2"), std::string::npos);
  EXPECT_NE(error_of("1,2\n3\n", SampleFormat::CsvRows).find("ragged"), std::string::npos);
  const auto bad = error_of("1,2\n3,x\n", SampleFormat::CsvRows);
  EXPECT_NE(bad.find("line 2, column 2"), std::string::npos) << bad;
  EXPECT_NE(error_of("1,nan\n", SampleFormat::CsvRows).find("non-finite"), std::string::npos);
  EXPECT_NE(error_of("1,inf\n", SampleFormat::CsvRows).find("non-finite"), std::string::npos);
  EXPECT_NE(error_of("1,,2\n", SampleFormat::CsvRows).find("column 2"), std::string::npos);
  EXPECT_NE(error_of("\n\n", SampleFormat::CsvRows), "");
}

TEST(Text, Whitespace) {
  const auto s = parse_samples("  1\t2  3\n4 5 6  \n", SampleFormat::TextWhitespace);
  ASSERT_EQ(s.size(), 2u);
  ASSERT_EQ(s.dim(), 3u);
  EXPECT_EQ(s.row(1)[2], 6.0);
  EXPECT_NE(error_of("1 2\n3 4 5\n", SampleFormat::TextWhitespace).find("ragged"),
            std::string::npos);
}

TEST(Binary, EmptyKeepsDim) {
  const auto s = parse_samples(header(0, 7), SampleFormat::BinaryMatrix);
  EXPECT_EQ(s.size(), 0u);
  EXPECT_EQ(s.dim(), 7u);
}

TEST(Binary, LayoutIsBitExact) {
  const auto s = SampleSet::vectors({1.0, -2.5, 3.25, 0.0, 1e-300, 6.0}, 3);
  const std::string bytes = serialize_samples(s, SampleFormat::BinaryMatrix);
  ASSERT_EQ(bytes.size(), 12u + 6 * 8);
  EXPECT_EQ(bytes.substr(0, 4), "PQM1");
  std::uint32_t rows, cols;
  std::memcpy(&rows, bytes.data() + 4, 4);
  std::memcpy(&cols, bytes.data() + 8, 4);
  EXPECT_EQ(rows, 2u);
  EXPECT_EQ(cols, 3u);
  double v;
  std::memcpy(&v, bytes.data() + 12 + 8, 8);
  EXPECT_EQ(v, -2.5);
  // Little-endian: the low byte of rows comes first.
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 2u);
}

TEST(Binary, Errors) {
  EXPECT_NE(error_of("PQM2aaaaaaaa", SampleFormat::BinaryMatrix).find("magic"), std::string::npos);
  EXPECT_NE(error_of("PQ", SampleFormat::BinaryMatrix).find("offset 0"), std::string::npos);
  EXPECT_NE(error_of("PQM1abc", SampleFormat::BinaryMatrix).find("header"), std::string::npos);
  const std::string trunc = header(2, 2) + std::string(24, '\0');
  EXPECT_NE(error_of(trunc, SampleFormat::BinaryMatrix).find("truncated"), std::string::npos);
  const std::string extra = header(1, 1) + std::string(9, '\0');
  EXPECT_NE(error_of(extra, SampleFormat::BinaryMatrix).find("trailing"), std::string::npos);
  std::string nan = header(1, 2) + std::string(16, '\0');
  const double q = std::nan("");
  std::memcpy(nan.data() + 20, &q, 8);
  const auto msg = error_of(nan, SampleFormat::BinaryMatrix);
  EXPECT_NE(msg.find("offset 20"), std::string::npos) << msg;
  EXPECT_NE(msg.find("non-finite"), std::string::npos);
}

TEST(RoundTrip, RandomMatrixAllFormats) {
  Rng rng = seeded_rng(1, 2);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> expo(-300, 300);
  std::vector<double> v(100 * 50);
  for (double& x : v) x = normal(rng) * std::pow(10.0, expo(rng));
  v[0] = 0.1;
  v[1] = -0.0;
  v[2] = 5e-324;
  v[3] = 1.7976931348623157e308;
  const auto s = SampleSet::vectors(v, 50);
  for (auto f : {SampleFormat::BinaryMatrix, SampleFormat::CsvRows, SampleFormat::TextWhitespace}) {
    const auto back = parse_samples(serialize_samples(s, f), f);
    ASSERT_EQ(back.size(), s.size());
    ASSERT_EQ(back.dim(), s.dim());
    EXPECT_EQ(std::memcmp(back.data().data(), s.data().data(), v.size() * 8), 0) << to_string(f);
  }
}

TEST(RoundTrip, FilesOnDisk) {
  const auto dir = std::filesystem::temp_directory_path() / "pqmass_io_test";
  std::filesystem::create_directories(dir);
  const auto s = SampleSet::vectors({1, 2, 3, 4, 5, 6}, 2);
  save_samples(s, dir / "m.bin", SampleFormat::BinaryMatrix);
  EXPECT_EQ(load_samples(dir / "m.bin", SampleFormat::BinaryMatrix), s);
  const auto seqs = SampleSet::sequences({U"MKV", U"", U"αβγ"});
  save_samples(seqs, dir / "p.seq", SampleFormat::SequenceLines);
  EXPECT_EQ(load_samples(dir / "p.seq", SampleFormat::SequenceLines), seqs);
  EXPECT_THROW(load_samples(dir / "missing.csv", SampleFormat::CsvRows), InputError);
  std::filesystem::remove_all(dir);
}

TEST(Sequences, ParseLines) {
  const auto s = parse_samples("ACGT\nAC\r\n\nG", SampleFormat::SequenceLines);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s.sequence(0), U"ACGT");
  EXPECT_EQ(s.sequence(1), U"AC");
  EXPECT_EQ(s.sequence(2), U"");
  EXPECT_EQ(s.sequence(3), U"G");
}

TEST(Serialize, ModalityChecked) {
  EXPECT_THROW(serialize_samples(SampleSet::sequences({U"a"}), SampleFormat::CsvRows), ConfigError);
  EXPECT_THROW(serialize_samples(SampleSet::vectors({1}, 1), SampleFormat::SequenceLines),
               ConfigError);
}
