// Sample-file formats.
//
//   csv   one sample per line, comma-separated numbers
//   text  one sample per line, whitespace-separated numbers
//   bin   "PQM1", u32 n_rows, u32 n_cols (little endian), then n_rows*n_cols
//         little-endian IEEE-754 doubles, row-major
//   seq   one UTF-8 sequence per line (edit metric)
//
// Blank lines are ignored by the numeric text formats. Text output uses 17
// significant digits so reading it back reproduces every value exactly.

#ifndef PQMASS_IO_HPP_
#define PQMASS_IO_HPP_

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "pqmass/core.hpp"

namespace pqmass {

enum class SampleFormat { CsvRows, TextWhitespace, BinaryMatrix, SequenceLines };

inline constexpr std::array<char, 4> kBinaryMagic = {'P', 'Q', 'M', '1'};

inline std::string_view to_string(SampleFormat f) {
  switch (f) {
    case SampleFormat::CsvRows: return "csv";
    case SampleFormat::TextWhitespace: return "text";
    case SampleFormat::BinaryMatrix: return "bin";
    case SampleFormat::SequenceLines: return "seq";
  }
  return "unknown";
}

inline SampleFormat parse_format(std::string_view s) {
  if (s == "csv") return SampleFormat::CsvRows;
  if (s == "text") return SampleFormat::TextWhitespace;
  if (s == "bin") return SampleFormat::BinaryMatrix;
  if (s == "seq") return SampleFormat::SequenceLines;
  throw ConfigError("unknown format '" + std::string(s) + "'");
}

// .csv, .txt/.tsv/.dat, .bin/.pqm, .seq
inline SampleFormat infer_format(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".csv") return SampleFormat::CsvRows;
  if (ext == ".txt" || ext == ".tsv" || ext == ".dat") return SampleFormat::TextWhitespace;
  if (ext == ".bin" || ext == ".pqm") return SampleFormat::BinaryMatrix;
  if (ext == ".seq") return SampleFormat::SequenceLines;
  throw ConfigError("cannot infer sample format from '" + path.string() + "'; pass --format");
}

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw InputError("failed reading '" + path.string() + "'");
  return content;
}

inline std::vector<std::string_view> split_lines(std::string_view content) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

inline double parse_number(std::string_view field, std::size_t line_no, std::size_t column) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw InputError("line " + std::to_string(line_no) + ", column " + std::to_string(column) +
                     ": cannot parse number '" + std::string(field) + "'");
  }
  if (!std::isfinite(v)) {
    throw InputError("line " + std::to_string(line_no) + ", column " + std::to_string(column) +
                     ": non-finite value '" + std::string(field) + "'");
  }
  return v;
}

inline SampleSet parse_numeric_text(std::string_view content, bool csv) {
  std::vector<double> data;
  std::size_t dim = 0;
  const auto lines = split_lines(content);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string_view line = trim(lines[li]);
    if (line.empty()) continue;
    std::size_t width = 0;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t end;
      if (csv) {
        end = line.find(',', pos);
        if (end == std::string_view::npos) end = line.size();
      } else {
        pos = line.find_first_not_of(" \t", pos);
        if (pos == std::string_view::npos) break;
        end = line.find_first_of(" \t", pos);
        if (end == std::string_view::npos) end = line.size();
      }
      data.push_back(parse_number(line.substr(pos, end - pos), li + 1, width + 1));
      ++width;
      pos = end + 1;
    }
    if (dim == 0) {
      dim = width;
    } else if (width != dim) {
      throw InputError("line " + std::to_string(li + 1) + ": ragged row with " +
                       std::to_string(width) + " fields, expected " + std::to_string(dim));
    }
  }
  if (dim == 0) throw InputError("no samples found");
  return SampleSet::vectors(std::move(data), dim);
}

template <class T>
T load_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    v = std::bit_cast<T>(bytes);
  }
  return v;
}

template <class T>
void store_le(std::string& out, T v) {
  auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(v);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.append(bytes.data(), bytes.size());
}

inline SampleSet parse_binary(std::string_view content) {
  if (content.size() < 4 || std::memcmp(content.data(), kBinaryMagic.data(), 4) != 0) {
    throw InputError("offset 0: bad magic, expected \"PQM1\"");
  }
  if (content.size() < 12) throw InputError("offset 4: truncated header");
  const auto rows = load_le<std::uint32_t>(content.data() + 4);
  const auto cols = load_le<std::uint32_t>(content.data() + 8);
  if (cols == 0) throw InputError("offset 8: matrix must have at least one column");
  const std::uint64_t count = std::uint64_t{rows} * cols;
  const std::uint64_t expected = 12 + count * 8;
  if (content.size() < expected) {
    throw InputError("offset " + std::to_string(content.size()) + ": truncated payload, expected " +
                     std::to_string(expected) + " bytes");
  }
  if (content.size() > expected) {
    throw InputError("offset " + std::to_string(expected) + ": trailing bytes after payload");
  }
  std::vector<double> data(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    data[k] = load_le<double>(content.data() + 12 + k * 8);
    if (!std::isfinite(data[k])) {
      throw InputError("offset " + std::to_string(12 + k * 8) + ": non-finite value at row " +
                       std::to_string(k / cols) + ", column " + std::to_string(k % cols));
    }
  }
  return SampleSet::vectors(std::move(data), cols);
}

inline SampleSet parse_sequences(std::string_view content) {
  std::vector<std::string> seqs;
  auto lines = split_lines(content);
  for (auto line : lines) seqs.emplace_back(line);
  return SampleSet::sequences_utf8(seqs);
}

inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                       std::chars_format::general, 17);
  return std::string(buf.data(), ptr);
}

}  // namespace detail

inline SampleSet parse_samples(std::string_view content, SampleFormat format) {
  switch (format) {
    case SampleFormat::CsvRows: return detail::parse_numeric_text(content, true);
    case SampleFormat::TextWhitespace: return detail::parse_numeric_text(content, false);
    case SampleFormat::BinaryMatrix: return detail::parse_binary(content);
    case SampleFormat::SequenceLines: return detail::parse_sequences(content);
  }
  throw ConfigError("unknown format");
}

inline SampleSet load_samples(const std::filesystem::path& path, SampleFormat format) {
  const std::string content = detail::read_file(path);
  try {
    return parse_samples(content, format);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

inline std::string serialize_samples(const SampleSet& s, SampleFormat format) {
  std::string out;
  if (format == SampleFormat::SequenceLines) {
    if (s.modality() != Modality::Sequence) throw ConfigError("seq format needs sequence samples");
    for (const auto& seq : s.sequences()) {
      out += encode_utf8(seq);
      out += '\n';
    }
    return out;
  }
  if (s.modality() != Modality::Vector) throw ConfigError("numeric formats need vector samples");
  if (format == SampleFormat::BinaryMatrix) {
    if (s.size() > 0xffffffffu || s.dim() > 0xffffffffu) {
      throw ConfigError("matrix too large for the binary format");
    }
    out.append(kBinaryMagic.data(), kBinaryMagic.size());
    detail::store_le(out, static_cast<std::uint32_t>(s.size()));
    detail::store_le(out, static_cast<std::uint32_t>(s.dim()));
    out.reserve(out.size() + s.data().size() * 8);
    for (double v : s.data()) detail::store_le(out, v);
    return out;
  }
  const char sep = format == SampleFormat::CsvRows ? ',' : ' ';
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto row = s.row(i);
    for (std::size_t d = 0; d < row.size(); ++d) {
      if (d) out += sep;
      out += detail::format_double(row[d]);
    }
    out += '\n';
  }
  return out;
}

inline void save_samples(const SampleSet& s, const std::filesystem::path& path,
                         SampleFormat format) {
  const std::string bytes = serialize_samples(s, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

}  // namespace pqmass

#endif  // PQMASS_IO_HPP_
