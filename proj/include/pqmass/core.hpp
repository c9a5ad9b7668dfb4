// Domain types shared by every pqmass module: sample sets, metric tags, run
// configuration, region counts, per-tessellation results and the seeded
// random stream contract.

#ifndef PQMASS_CORE_HPP_
#define PQMASS_CORE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pqmass {

inline constexpr std::string_view kVersion = "1.0.0";

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or incompatible combinations (bad n_R, metric on the
// wrong modality, dimension mismatch, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or non-finite data, unreadable files.
class InputError : public Error {
 public:
  using Error::Error;
};

enum class Modality { Vector, Sequence };

enum class Metric { L1, L2, LInf, Cosine, Correlation, Edit };

inline constexpr Metric kAllMetrics[] = {Metric::L1,     Metric::L2,          Metric::LInf,
                                         Metric::Cosine, Metric::Correlation, Metric::Edit};

inline constexpr Modality modality_of(Metric m) noexcept {
  return m == Metric::Edit ? Modality::Sequence : Modality::Vector;
}

inline std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::L1: return "l1";
    case Metric::L2: return "l2";
    case Metric::LInf: return "linf";
    case Metric::Cosine: return "cosine";
    case Metric::Correlation: return "correlation";
    case Metric::Edit: return "edit";
  }
  return "unknown";
}

inline Metric parse_metric(std::string_view name) {
  for (Metric m : kAllMetrics) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown metric '" + std::string(name) + "'");
}

inline std::string_view to_string(Modality m) {
  return m == Modality::Vector ? "vector" : "sequence";
}

// Decodes UTF-8 into code points. Malformed bytes are mapped one-to-one so the
// edit distance stays total on arbitrary input.
inline std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    const int extra = c < 0x80 ? 0 : (c >> 5) == 0x6 ? 1 : (c >> 4) == 0xE ? 2 : (c >> 3) == 0x1E ? 3 : -1;
    if (extra <= 0 || i + static_cast<std::size_t>(extra) >= s.size()) {
      out.push_back(c);
      ++i;
      continue;
    }
    char32_t cp = c & (0x3F >> extra);
    bool ok = true;
    for (int k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (!ok) {
      out.push_back(c);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(extra) + 1;
  }
  return out;
}

inline std::string encode_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : s) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

// An immutable collection of points: either rows of a row-major real matrix
// or a list of symbol sequences.
class SampleSet {
 public:
  SampleSet() = default;

  // Rejects NaN/Inf and ragged storage; never filters rows.
  static SampleSet vectors(std::vector<double> data, std::size_t dim) {
    if (dim == 0) throw ConfigError("vector sample set requires dim >= 1");
    if (data.size() % dim != 0) {
      throw InputError("vector data of length " + std::to_string(data.size()) +
                       " is not a multiple of dim " + std::to_string(dim));
    }
    for (std::size_t k = 0; k < data.size(); ++k) {
      if (!std::isfinite(data[k])) {
        throw InputError("non-finite value at row " + std::to_string(k / dim) + ", column " +
                         std::to_string(k % dim));
      }
    }
    SampleSet s;
    s.modality_ = Modality::Vector;
    s.dim_ = dim;
    s.size_ = data.size() / dim;
    s.data_ = std::move(data);
    return s;
  }

  static SampleSet sequences(std::vector<std::u32string> seqs) {
    SampleSet s;
    s.modality_ = Modality::Sequence;
    s.size_ = seqs.size();
    s.seqs_ = std::move(seqs);
    return s;
  }

  static SampleSet sequences_utf8(const std::vector<std::string>& seqs) {
    std::vector<std::u32string> decoded;
    decoded.reserve(seqs.size());
    for (const auto& s : seqs) decoded.push_back(decode_utf8(s));
    return sequences(std::move(decoded));
  }

  Modality modality() const noexcept { return modality_; }
  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  // Zero for sequence sets.
  std::size_t dim() const noexcept { return dim_; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<const double> data() const noexcept { return data_; }
  const std::u32string& sequence(std::size_t i) const { return seqs_[i]; }
  const std::vector<std::u32string>& sequences() const noexcept { return seqs_; }

  // Rows picked by index, in the given order.
  SampleSet subset(std::span<const std::size_t> indices) const {
    SampleSet s;
    s.modality_ = modality_;
    s.dim_ = dim_;
    s.size_ = indices.size();
    if (modality_ == Modality::Vector) {
      s.data_.resize(indices.size() * dim_);
      for (std::size_t k = 0; k < indices.size(); ++k) {
        const auto r = row(indices[k]);
        std::copy(r.begin(), r.end(), s.data_.begin() + static_cast<std::ptrdiff_t>(k * dim_));
      }
    } else {
      s.seqs_.reserve(indices.size());
      for (std::size_t idx : indices) s.seqs_.push_back(seqs_[idx]);
    }
    return s;
  }

  // All rows whose index is not in `removed`. Order of the survivors is kept.
  SampleSet without(std::span<const std::size_t> removed) const {
    std::vector<char> drop(size_, 0);
    for (std::size_t idx : removed) drop[idx] = 1;
    std::vector<std::size_t> keep;
    keep.reserve(size_ - std::min(size_, removed.size()));
    for (std::size_t i = 0; i < size_; ++i) {
      if (!drop[i]) keep.push_back(i);
    }
    return subset(keep);
  }

  // Concatenation of two compatible sets (rows of `a` first).
  static SampleSet concat(const SampleSet& a, const SampleSet& b) {
    if (a.modality_ != b.modality_ || a.dim_ != b.dim_) {
      throw ConfigError("cannot concatenate incompatible sample sets");
    }
    SampleSet s;
    s.modality_ = a.modality_;
    s.dim_ = a.dim_;
    s.size_ = a.size_ + b.size_;
    s.data_ = a.data_;
    s.data_.insert(s.data_.end(), b.data_.begin(), b.data_.end());
    s.seqs_ = a.seqs_;
    s.seqs_.insert(s.seqs_.end(), b.seqs_.begin(), b.seqs_.end());
    return s;
  }

  friend bool operator==(const SampleSet&, const SampleSet&) = default;

 private:
  Modality modality_ = Modality::Vector;
  std::size_t dim_ = 0;
  std::size_t size_ = 0;
  std::vector<double> data_;
  std::vector<std::u32string> seqs_;
};

inline void require_metric_compatible(const SampleSet& s, Metric metric) {
  if (s.modality() != modality_of(metric)) {
    throw ConfigError("metric '" + std::string(to_string(metric)) + "' cannot be used on " +
                      std::string(to_string(s.modality())) + " samples");
  }
}

inline void require_same_shape(const SampleSet& a, const SampleSet& b) {
  if (a.modality() != b.modality()) throw ConfigError("sample sets have different modalities");
  if (a.modality() == Modality::Vector && a.dim() != b.dim()) {
    throw ConfigError("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                      std::to_string(b.dim()));
  }
}

// Retessellation strategy: Resample draws fresh samples for every repeat,
// Reuse keeps the two sets fixed and only redraws reference points.
enum class RetessellationMode { Resample, Reuse };

// How the overfit p-value mirrors the statistic around 2 n_R.
enum class OverfitMode { MirrorSurvival, AsWritten };

inline std::string_view to_string(RetessellationMode m) {
  return m == RetessellationMode::Resample ? "resample" : "reuse";
}
inline std::string_view to_string(OverfitMode m) {
  return m == OverfitMode::MirrorSurvival ? "mirror" : "as-written";
}
inline OverfitMode parse_overfit_mode(std::string_view s) {
  if (s == "mirror") return OverfitMode::MirrorSurvival;
  if (s == "as-written") return OverfitMode::AsWritten;
  throw ConfigError("unknown overfit mode '" + std::string(s) + "'");
}
inline RetessellationMode parse_mode(std::string_view s) {
  if (s == "resample") return RetessellationMode::Resample;
  if (s == "reuse") return RetessellationMode::Reuse;
  throw ConfigError("unknown retessellation mode '" + std::string(s) + "'");
}

struct RunConfig {
  std::size_t num_refs = 100;
  Metric metric = Metric::L2;
  std::size_t repeats = 20;
  RetessellationMode mode = RetessellationMode::Reuse;
  std::uint64_t seed = 0;
  std::size_t permutations = 0;
  OverfitMode overfit_mode = OverfitMode::MirrorSurvival;
  // Worker cap; 0 picks the default. Never affects results.
  std::size_t threads = 0;

  void validate() const {
    if (num_refs < 2) throw ConfigError("number of reference points must be >= 2");
    if (repeats < 1) throw ConfigError("repeats must be >= 1");
  }
};

struct RegionCounts {
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  std::size_t size() const noexcept { return counts.size(); }
  friend bool operator==(const RegionCounts&, const RegionCounts&) = default;
};

struct TestResult {
  double chi2 = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  double p_overfit = 1.0;
  RegionCounts counts_x;
  RegionCounts counts_y;
  std::uint64_t seed_used = 0;

  friend bool operator==(const TestResult&, const TestResult&) = default;
};

// Seeded random streams. Stream 0 drives reference selection, stream 1
// permutation shuffles, streams 2+ synthetic generators. `index` separates
// independent tasks (repeats, permutations) inside one stream, so the value
// drawn by a task never depends on scheduling.
using Rng = std::mt19937_64;

enum StreamId : std::uint64_t {
  kReferenceStream = 0,
  kPermutationStream = 1,
  kSynthStream = 2,
};

inline Rng seeded_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(stream), hi(stream), lo(index), hi(index), 0x70716d31u};
  return Rng(seq);
}

inline double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Sample standard deviation (n - 1 denominator); zero for fewer than two values.
inline double stddev_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace pqmass

#endif  // PQMASS_CORE_HPP_
