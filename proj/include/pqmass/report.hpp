// Serialized run reports (JSON, schema "pqmass.report/1") and the
// data-only chi-squared histogram table.

#ifndef PQMASS_REPORT_HPP_
#define PQMASS_REPORT_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pqmass/core.hpp"
#include "pqmass/inference.hpp"
#include "pqmass/io.hpp"
#include "pqmass/runner.hpp"

namespace pqmass {

inline constexpr std::string_view kReportSchema = "pqmass.report/1";

struct RepeatEntry {
  double chi2 = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  double p_overfit = 1.0;
  friend bool operator==(const RepeatEntry&, const RepeatEntry&) = default;
};

struct PermutationEntry {
  double observed = 0.0;
  double p_value = 1.0;
  std::size_t n_permutations = 0;
  friend bool operator==(const PermutationEntry&, const PermutationEntry&) = default;
};

struct KsEntry {
  double statistic = 0.0;
  double p_value = 1.0;
  bool approximate = false;
  friend bool operator==(const KsEntry&, const KsEntry&) = default;
};

struct ResultReport {
  std::string tool_version{kVersion};
  RunConfig config;
  std::vector<RepeatEntry> repeats;
  double chi2_mean = 0.0;
  double chi2_std = 0.0;
  std::optional<KsEntry> ks;
  std::optional<PermutationEntry> permutation;
  double wall_seconds = 0.0;
};

inline bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.num_refs == b.num_refs && a.metric == b.metric && a.repeats == b.repeats &&
         a.mode == b.mode && a.seed == b.seed && a.permutations == b.permutations &&
         a.overfit_mode == b.overfit_mode;
}

inline bool operator==(const ResultReport& a, const ResultReport& b) {
  return a.tool_version == b.tool_version && a.config == b.config && a.repeats == b.repeats &&
         a.chi2_mean == b.chi2_mean && a.chi2_std == b.chi2_std && a.ks == b.ks &&
         a.permutation == b.permutation && a.wall_seconds == b.wall_seconds;
}

inline ResultReport make_report(const RunReport& run, const RunConfig& config,
                                double wall_seconds = 0.0) {
  ResultReport rep;
  rep.config = config;
  for (const auto& r : run.results) rep.repeats.push_back({r.chi2, r.dof, r.p_value, r.p_overfit});
  rep.chi2_mean = run.chi2_mean;
  rep.chi2_std = run.chi2_std;
  if (run.ks) rep.ks = KsEntry{run.ks->statistic, run.ks->p_value, run.ks->approximate};
  if (run.permutation) {
    rep.permutation = PermutationEntry{run.permutation->observed, run.permutation->p_value,
                                       run.permutation->permuted.size()};
  }
  rep.wall_seconds = wall_seconds;
  return rep;
}

inline nlohmann::json to_json(const ResultReport& r) {
  using nlohmann::json;
  json j;
  j["schema"] = kReportSchema;
  j["tool_version"] = r.tool_version;
  j["config"] = {
      {"num_refs", r.config.num_refs},
      {"metric", to_string(r.config.metric)},
      {"repeats", r.config.repeats},
      {"mode", to_string(r.config.mode)},
      {"seed", r.config.seed},
      {"permutations", r.config.permutations},
      {"overfit_mode", to_string(r.config.overfit_mode)},
  };
  json reps = json::array();
  for (const auto& e : r.repeats) {
    reps.push_back({{"chi2", e.chi2}, {"dof", e.dof}, {"p_value", e.p_value},
                    {"p_overfit", e.p_overfit}});
  }
  j["repeats"] = std::move(reps);
  j["aggregates"] = {{"chi2_mean", r.chi2_mean}, {"chi2_std", r.chi2_std}};
  if (r.ks) {
    j["ks"] = {{"statistic", r.ks->statistic},
               {"p_value", r.ks->p_value},
               {"approximate", r.ks->approximate}};
  }
  if (r.permutation) {
    j["permutation"] = {{"observed", r.permutation->observed},
                        {"p_value", r.permutation->p_value},
                        {"n_permutations", r.permutation->n_permutations}};
  }
  j["wall_seconds"] = r.wall_seconds;
  return j;
}

// Structural validation against the published schema. Returns the list of
// violations; empty means valid.
inline std::vector<std::string> validate_report(const nlohmann::json& j) {
  std::vector<std::string> errors;
  auto need = [&](const nlohmann::json& obj, const char* key, auto check, const char* what,
                  const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) {
      errors.push_back(path + key + ": missing");
    } else if (!check(obj.at(key))) {
      errors.push_back(path + key + ": expected " + what);
    }
  };
  auto is_str = [](const auto& v) { return v.is_string(); };
  auto is_uint = [](const auto& v) { return v.is_number_unsigned(); };
  auto is_prob = [](const auto& v) {
    return v.is_number() && v.template get<double>() >= 0.0 && v.template get<double>() <= 1.0;
  };
  auto is_nonneg = [](const auto& v) { return v.is_number() && v.template get<double>() >= 0.0; };
  auto one_of = [](std::initializer_list<std::string_view> opts) {
    return [opts](const auto& v) {
      return v.is_string() &&
             std::find(opts.begin(), opts.end(), v.template get<std::string>()) != opts.end();
    };
  };

  if (!j.is_object()) return {"report: expected object"};
  need(j, "schema", [](const auto& v) { return v.is_string() && v == kReportSchema; },
       "\"pqmass.report/1\"", "");
  need(j, "tool_version", is_str, "string", "");
  need(j, "config", [](const auto& v) { return v.is_object(); }, "object", "");
  if (j.contains("config") && j["config"].is_object()) {
    const auto& c = j["config"];
    need(c, "num_refs", [](const auto& v) { return v.is_number_unsigned() && v >= 2; },
         "integer >= 2", "config.");
    need(c, "metric", one_of({"l1", "l2", "linf", "cosine", "correlation", "edit"}), "metric name",
         "config.");
    need(c, "repeats", [](const auto& v) { return v.is_number_unsigned() && v >= 1; },
         "integer >= 1", "config.");
    need(c, "mode", one_of({"resample", "reuse"}), "mode", "config.");
    need(c, "seed", is_uint, "unsigned integer", "config.");
    need(c, "permutations", is_uint, "unsigned integer", "config.");
    need(c, "overfit_mode", one_of({"mirror", "as-written"}), "overfit mode", "config.");
  }
  need(j, "repeats", [](const auto& v) { return v.is_array() && !v.empty(); }, "non-empty array",
       "");
  if (j.contains("repeats") && j["repeats"].is_array()) {
    for (std::size_t i = 0; i < j["repeats"].size(); ++i) {
      const auto& e = j["repeats"][i];
      const std::string p = "repeats[" + std::to_string(i) + "].";
      need(e, "chi2", is_nonneg, "number >= 0", p);
      need(e, "dof", [](const auto& v) { return v.is_number_unsigned() && v >= 1; },
           "integer >= 1", p);
      need(e, "p_value", is_prob, "probability", p);
      need(e, "p_overfit", is_prob, "probability", p);
    }
  }
  need(j, "aggregates", [](const auto& v) { return v.is_object(); }, "object", "");
  if (j.contains("aggregates") && j["aggregates"].is_object()) {
    need(j["aggregates"], "chi2_mean", is_nonneg, "number >= 0", "aggregates.");
    need(j["aggregates"], "chi2_std", is_nonneg, "number >= 0", "aggregates.");
  }
  if (j.contains("ks")) {
    need(j["ks"], "statistic", is_prob, "number in [0,1]", "ks.");
    need(j["ks"], "p_value", is_prob, "probability", "ks.");
    need(j["ks"], "approximate", [](const auto& v) { return v.is_boolean(); }, "boolean", "ks.");
  }
  if (j.contains("permutation")) {
    need(j["permutation"], "observed", is_nonneg, "number >= 0", "permutation.");
    need(j["permutation"], "p_value", [](const auto& v) {
      return v.is_number() && v.template get<double>() > 0.0 && v.template get<double>() <= 1.0;
    }, "probability in (0,1]", "permutation.");
    need(j["permutation"], "n_permutations", [](const auto& v) {
      return v.is_number_unsigned() && v >= 1;
    }, "integer >= 1", "permutation.");
  }
  need(j, "wall_seconds", is_nonneg, "number >= 0", "");
  static const std::vector<std::string> known = {"schema",     "tool_version", "config",
                                                 "repeats",    "aggregates",   "ks",
                                                 "permutation", "wall_seconds"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      errors.push_back(key + ": unknown field");
    }
  }
  return errors;
}

inline ResultReport report_from_json(const nlohmann::json& j) {
  if (auto errors = validate_report(j); !errors.empty()) {
    throw InputError("invalid report: " + errors.front());
  }
  ResultReport r;
  r.tool_version = j["tool_version"].get<std::string>();
  const auto& c = j["config"];
  r.config.num_refs = c["num_refs"].get<std::size_t>();
  r.config.metric = parse_metric(c["metric"].get<std::string>());
  r.config.repeats = c["repeats"].get<std::size_t>();
  r.config.mode = parse_mode(c["mode"].get<std::string>());
  r.config.seed = c["seed"].get<std::uint64_t>();
  r.config.permutations = c["permutations"].get<std::size_t>();
  r.config.overfit_mode = parse_overfit_mode(c["overfit_mode"].get<std::string>());
  for (const auto& e : j["repeats"]) {
    r.repeats.push_back({e["chi2"].get<double>(), e["dof"].get<std::size_t>(),
                         e["p_value"].get<double>(), e["p_overfit"].get<double>()});
  }
  r.chi2_mean = j["aggregates"]["chi2_mean"].get<double>();
  r.chi2_std = j["aggregates"]["chi2_std"].get<double>();
  if (j.contains("ks")) {
    r.ks = KsEntry{j["ks"]["statistic"].get<double>(), j["ks"]["p_value"].get<double>(),
                   j["ks"]["approximate"].get<bool>()};
  }
  if (j.contains("permutation")) {
    const auto& p = j["permutation"];
    r.permutation = PermutationEntry{p["observed"].get<double>(), p["p_value"].get<double>(),
                                     p["n_permutations"].get<std::size_t>()};
  }
  r.wall_seconds = j["wall_seconds"].get<double>();
  return r;
}

// Histogram of chi-squared values as CSV: bin edges, count, empirical density
// and the chi2(dof) reference density at the bin centre.
inline std::string chi2_histogram_table(const std::vector<double>& chi2, std::size_t dof,
                                        std::size_t bins = 0) {
  if (chi2.empty()) throw ConfigError("histogram needs at least one value");
  if (bins == 0) {
    bins = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(chi2.size())))), 5, 50);
  }
  double lo = *std::min_element(chi2.begin(), chi2.end());
  double hi = *std::max_element(chi2.begin(), chi2.end());
  if (hi <= lo) {
    lo = std::max(0.0, lo - 0.5);
    hi = lo + 1.0;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<std::size_t> counts(bins, 0);
  for (double v : chi2) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    counts[std::min(b, bins - 1)] += 1;
  }
  std::string out = "bin_lo,bin_hi,count,density,reference_density\n";
  const double norm = static_cast<double>(chi2.size()) * width;
  for (std::size_t b = 0; b < bins; ++b) {
    const double left = lo + static_cast<double>(b) * width;
    const double right = b + 1 == bins ? hi : lo + static_cast<double>(b + 1) * width;
    out += detail::format_double(left) + "," + detail::format_double(right) + "," +
           std::to_string(counts[b]) + "," +
           detail::format_double(static_cast<double>(counts[b]) / norm) + "," +
           detail::format_double(chi2_pdf(0.5 * (left + right), Chi2Params{dof})) + "\n";
  }
  return out;
}

}  // namespace pqmass

#endif  // PQMASS_REPORT_HPP_
