// pqmass command-line tool.
//
//   pqmass compare FILE_X FILE_Y [options]
//   pqmass synth gmm|funnel|timeseries|perturb [options]
//   pqmass baseline mmd|nn FILE_X FILE_Y [options]
//
// Exit codes: 0 success, 2 input error, 3 configuration error.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pqmass/pqmass.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;

using pqmass::ConfigError;
using pqmass::InputError;
using pqmass::SampleFormat;
using pqmass::SampleSet;

struct Output {
  std::string path;  // empty: standard output

  void write(const std::string& bytes) const {
    if (path.empty()) {
      std::cout << bytes;
      std::cout.flush();
      return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << bytes;
    if (!out) throw InputError("failed writing '" + path + "'");
  }
};

SampleFormat resolve_format(const std::string& flag, const std::string& path) {
  if (!flag.empty()) return pqmass::parse_format(flag);
  return pqmass::infer_format(path);
}

SampleSet load(const std::string& path, const std::string& format_flag) {
  const SampleFormat format = resolve_format(format_flag, path);
  if (!std::filesystem::exists(path)) throw InputError("no such file '" + path + "'");
  return pqmass::load_samples(path, format);
}

struct CompareArgs {
  std::string file_x, file_y;
  std::size_t refs = 100;
  std::string metric = "l2";
  std::size_t repeats = 20;
  std::size_t permutations = 0;
  std::uint64_t seed = 0;
  std::string overfit_mode = "mirror";
  std::string format;
  std::string out;
  std::string hist;
  std::size_t threads = 0;
  bool no_timing = false;
};

int run_compare(const CompareArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  pqmass::RunConfig config;
  config.num_refs = a.refs;
  config.metric = pqmass::parse_metric(a.metric);
  config.repeats = a.repeats;
  config.mode = pqmass::RetessellationMode::Reuse;
  config.seed = a.seed;
  config.permutations = a.permutations;
  config.overfit_mode = pqmass::parse_overfit_mode(a.overfit_mode);
  config.threads = a.threads;
  config.validate();
  const SampleFormat fx = resolve_format(a.format, a.file_x);
  const SampleFormat fy = resolve_format(a.format, a.file_y);
  const bool seq_input = fx == SampleFormat::SequenceLines || fy == SampleFormat::SequenceLines;
  if (seq_input != (config.metric == pqmass::Metric::Edit)) {
    throw ConfigError("the edit metric is used with sequence files and only with them");
  }

  const SampleSet x = load(a.file_x, a.format);
  const SampleSet y = load(a.file_y, a.format);
  pqmass::RunReport run = pqmass::run_retessellations(x, y, config);
  if (config.permutations > 0) run.permutation = pqmass::permutation_test(x, y, config);

  double wall = 0.0;
  if (!a.no_timing) {
    wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  const auto report = pqmass::make_report(run, config, wall);
  Output{a.out}.write(pqmass::to_json(report).dump(2) + "\n");
  if (!a.hist.empty()) {
    Output{a.hist}.write(pqmass::chi2_histogram_table(run.chi2_values(), config.num_refs - 1));
  }
  return 0;
}

struct SynthArgs {
  std::string kind;
  std::size_t dim = 100;
  std::size_t components = 20;
  std::size_t drop_modes = 0;
  bool spherical = false;
  std::uint64_t model_seed = 0;
  double amplitude = 0.0;
  std::optional<double> scale;
  std::optional<double> rotate;
  std::uint64_t axis_seed = 0;
  std::optional<double> noise_variance;
  std::string input;
  std::string in_format;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::string out;
  std::string format;
};

int run_synth(const SynthArgs& a) {
  SampleFormat format = SampleFormat::CsvRows;
  if (!a.format.empty()) {
    format = pqmass::parse_format(a.format);
  } else if (!a.out.empty()) {
    format = pqmass::infer_format(a.out);
  }
  if (format == SampleFormat::SequenceLines) throw ConfigError("synthetic data is numeric");

  SampleSet data;
  pqmass::Rng rng = pqmass::seeded_rng(a.seed, pqmass::kSynthStream, 2);
  if (a.kind == "gmm") {
    pqmass::Rng model_rng = pqmass::seeded_rng(a.model_seed, pqmass::kSynthStream, 0);
    pqmass::GmmSpec spec = a.spherical ? pqmass::gmm_make_spherical(a.dim, a.components, model_rng)
                                       : pqmass::gmm_make(a.dim, a.components, model_rng);
    pqmass::Rng drop_rng = pqmass::seeded_rng(a.model_seed, pqmass::kSynthStream, 1);
    spec = pqmass::gmm_drop_modes(spec, a.drop_modes, drop_rng);
    data = pqmass::gmm_sample(spec, a.n, rng);
  } else if (a.kind == "funnel") {
    data = pqmass::funnel_sample(a.dim, a.n, rng);
  } else if (a.kind == "timeseries") {
    data = pqmass::timeseries_sample(a.amplitude, a.n, rng);
  } else {
    const int chosen = static_cast<int>(a.scale.has_value()) +
                       static_cast<int>(a.rotate.has_value()) +
                       static_cast<int>(a.noise_variance.has_value());
    if (chosen != 1) {
      throw ConfigError("perturb needs exactly one of --scale, --rotate, --noise-variance");
    }
    pqmass::Perturbation kind;
    if (a.scale) kind = pqmass::Scale{*a.scale};
    if (a.rotate) kind = pqmass::Rotate{*a.rotate, a.axis_seed};
    if (a.noise_variance) kind = pqmass::AddGaussianNoise{*a.noise_variance};
    const SampleSet input = load(a.input, a.in_format);
    data = pqmass::perturb(input, kind, rng);
  }
  Output{a.out}.write(pqmass::serialize_samples(data, format));
  return 0;
}

struct BaselineArgs {
  std::string kind;
  std::string file_x, file_y;
  std::string kernel = "rbf";
  std::optional<double> bandwidth;
  std::size_t k = 3;
  std::size_t permutations = 0;
  std::uint64_t seed = 0;
  std::string format;
  std::string out;
  std::size_t threads = 0;
};

int run_baseline(const BaselineArgs& a) {
  nlohmann::json j;
  j["schema"] = "pqmass.baseline/1";
  j["tool_version"] = pqmass::kVersion;
  j["baseline"] = a.kind;
  if (a.kind == "mmd") {
    pqmass::Kernel kernel{pqmass::parse_kernel(a.kernel), a.bandwidth};
    if (kernel.bandwidth && !(*kernel.bandwidth > 0.0)) {
      throw ConfigError("--bandwidth must be positive");
    }
    const SampleSet x = load(a.file_x, a.format);
    const SampleSet y = load(a.file_y, a.format);
    const auto res = pqmass::mmd2_detailed(x, y, kernel);
    j["kernel"] = a.kernel;
    if (kernel.type == pqmass::KernelType::Rbf) j["bandwidth"] = res.bandwidth;
    j["mmd2"] = res.value;
    if (a.permutations > 0) {
      j["permutation"] = {
          {"p_value",
           pqmass::mmd_permutation_p_value(x, y, kernel, a.permutations, a.seed, a.threads)},
          {"n_permutations", a.permutations}};
    }
  } else {
    const SampleSet x = load(a.file_x, a.format);
    const SampleSet y = load(a.file_y, a.format);
    j["k"] = a.k;
    if (a.permutations > 0) {
      const auto res = pqmass::nn_permutation_test(x, y, a.k, a.permutations, a.seed, a.threads);
      j["statistic"] = res.observed.statistic;
      j["expected_null"] = res.observed.expected_null;
      j["permutation"] = {{"p_value", res.p_value}, {"n_permutations", a.permutations}};
    } else {
      const auto res = pqmass::nn_statistic(x, y, a.k);
      j["statistic"] = res.statistic;
      j["expected_null"] = res.expected_null;
    }
  }
  Output{a.out}.write(j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PQMass two-sample testing toolkit"};
  app.set_version_flag("--version", std::string(pqmass::kVersion));
  app.require_subcommand(1);

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "Compare two sample files with PQMass");
  compare->add_option("FILE_X", cmp.file_x, "First sample file")->required();
  compare->add_option("FILE_Y", cmp.file_y, "Second sample file")->required();
  compare->add_option("--refs", cmp.refs, "Number of reference points n_R")->capture_default_str();
  compare->add_option("--metric", cmp.metric, "l1|l2|linf|cosine|correlation|edit")
      ->check(CLI::IsMember({"l1", "l2", "linf", "cosine", "correlation", "edit"}))
      ->capture_default_str();
  compare->add_option("--repeats", cmp.repeats, "Retessellations")->capture_default_str();
  compare->add_option("--permutations", cmp.permutations, "Permutation-test resplits (0 = off)")
      ->capture_default_str();
  compare->add_option("--seed", cmp.seed, "Random seed")->capture_default_str();
  compare->add_option("--overfit-mode", cmp.overfit_mode, "mirror|as-written")
      ->check(CLI::IsMember({"mirror", "as-written"}))
      ->capture_default_str();
  compare->add_option("--format", cmp.format, "csv|text|bin|seq (default: from extension)")
      ->check(CLI::IsMember({"csv", "text", "bin", "seq"}));
  compare->add_option("--out", cmp.out, "Report path (default: stdout)");
  compare->add_option("--hist", cmp.hist, "Write a chi2 histogram table here");
  compare->add_option("--threads", cmp.threads, "Worker cap (default: PQM_THREADS or all cores)");
  compare->add_flag("--no-timing", cmp.no_timing, "Report wall_seconds as 0");

  SynthArgs syn;
  auto* synth = app.add_subcommand("synth", "Write synthetic samples");
  synth->add_option("KIND", syn.kind, "gmm|funnel|timeseries|perturb")
      ->required()
      ->check(CLI::IsMember({"gmm", "funnel", "timeseries", "perturb"}));
  synth->add_option("INPUT", syn.input, "Input file (perturb only)");
  synth->add_option("--dim", syn.dim, "Dimension (gmm, funnel)")->capture_default_str();
  synth->add_option("--components", syn.components, "Mixture components")->capture_default_str();
  synth->add_option("--drop-modes", syn.drop_modes, "Components to deactivate")
      ->capture_default_str();
  synth->add_flag("--spherical", syn.spherical, "Equal-weight unit-variance components");
  synth->add_option("--model-seed", syn.model_seed, "Seed of the mixture parameters")
      ->capture_default_str();
  synth->add_option("--amplitude", syn.amplitude, "Signal amplitude (timeseries)")
      ->capture_default_str();
  synth->add_option("--scale", syn.scale, "Multiply every coordinate (perturb)");
  synth->add_option("--rotate", syn.rotate, "Plane rotation angle in radians (perturb)");
  synth->add_option("--axis-seed", syn.axis_seed, "Seed choosing the rotation plane")
      ->capture_default_str();
  synth->add_option("--noise-variance", syn.noise_variance, "Additive Gaussian noise (perturb)");
  synth->add_option("--in-format", syn.in_format, "Input format (perturb)")
      ->check(CLI::IsMember({"csv", "text", "bin"}));
  synth->add_option("--n", syn.n, "Number of samples")->capture_default_str();
  synth->add_option("--seed", syn.seed, "Sampling seed")->capture_default_str();
  synth->add_option("--out", syn.out, "Output path (default: stdout)");
  synth->add_option("--format", syn.format, "csv|text|bin (default: from extension)")
      ->check(CLI::IsMember({"csv", "text", "bin"}));

  BaselineArgs base;
  auto* baseline = app.add_subcommand("baseline", "Baseline two-sample statistics");
  baseline->add_option("KIND", base.kind, "mmd|nn")
      ->required()
      ->check(CLI::IsMember({"mmd", "nn"}));
  baseline->add_option("FILE_X", base.file_x, "First sample file")->required();
  baseline->add_option("FILE_Y", base.file_y, "Second sample file")->required();
  baseline->add_option("--kernel", base.kernel, "linear|rbf (mmd)")
      ->check(CLI::IsMember({"linear", "rbf"}))
      ->capture_default_str();
  baseline->add_option("--bandwidth", base.bandwidth, "RBF bandwidth (default: median heuristic)");
  baseline->add_option("--k", base.k, "Neighbours per point (nn)")->capture_default_str();
  baseline->add_option("--permutations", base.permutations, "Permutations for a p-value")
      ->capture_default_str();
  baseline->add_option("--seed", base.seed, "Random seed")->capture_default_str();
  baseline->add_option("--format", base.format, "csv|text|bin")
      ->check(CLI::IsMember({"csv", "text", "bin"}));
  baseline->add_option("--out", base.out, "Report path (default: stdout)");
  baseline->add_option("--threads", base.threads, "Worker cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (compare->parsed()) return run_compare(cmp);
    if (synth->parsed()) {
      if ((syn.kind == "perturb") != !syn.input.empty()) {
        throw ConfigError("INPUT is required for perturb and only for perturb");
      }
      return run_synth(syn);
    }
    return run_baseline(base);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
