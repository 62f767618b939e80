#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tgp/classification.hpp"
#include "tgp/data.hpp"
#include "tgp/kernels.hpp"
#include "tgp/probe.hpp"
#include "tgp/regression.hpp"
#include "tgp/sweep.hpp"

namespace tgp {

using Json = nlohmann::ordered_json;

enum class ExperimentKind { RegressSweep, ClassifySweep, Probe, GenData };

struct DataSpec {
  std::string source;  // rbf-regression | clusters | cifar10 | files
  int n_train = 100;
  int n_test = 100;
  double noise_std = 0.1;
  int n_per_class = 100;
  int class_count = 2;
  int dim = 2;
  double separation = 3.0;
  std::string dir;
  std::vector<int> keep_classes;
  std::string train_file;
  std::string test_file;
  std::string normalize = "none";
  std::shared_ptr<DataSpec> fallback;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::RegressSweep;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  KernelSpec kernel;
  std::vector<double> temperatures;
  DataSpec data;
  // regress-sweep
  std::vector<double> assumed_noise_std;
  int repeats = 1;
  // classify-sweep
  EssConfig ess;
  int draws_per_sample = 8;
  // probe
  std::vector<double> probe_scales;
  double quadrature_tolerance = 1e-8;
  double integration_half_width_sigmas = 40.0;
};

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::RegressSweep: return "regress-sweep";
    case ExperimentKind::ClassifySweep: return "classify-sweep";
    case ExperimentKind::Probe: return "probe";
    case ExperimentKind::GenData: return "gen-data";
  }
  return "unknown";
}

// --- Parsing -----------------------------------------------------------------

namespace config_detail {

[[noreturn]] inline void fail(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::ConfigInvalid, "'" + key + "': " + why);
}

inline void check_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) fail(path.empty() ? key : path + "." + key, "unknown key");
  }
}

inline std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

inline const Json& need(const Json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) fail(join(path, key), "missing required key");
  return obj.at(key);
}

inline double number(const Json& obj, const std::string& path, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number()) fail(join(path, key), "expected a number");
  return v.get<double>();
}

inline int integer(const Json& obj, const std::string& path, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
  return v.get<int>();
}

inline std::string text(const Json& obj, const std::string& path, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_string()) fail(join(path, key), "expected a string");
  return v.get<std::string>();
}

inline std::vector<double> numbers(const Json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) fail(path, "expected a non-empty array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline std::vector<double> grid(const Json& v, const std::string& path) {
  if (v.is_array()) return numbers(v, path);
  check_keys(v, path, {"logspace"});
  const Json& ls = need(v, path, "logspace");
  const std::string lp = path + ".logspace";
  check_keys(ls, lp, {"min", "max", "count"});
  if (!need(ls, lp, "min").is_number() || !need(ls, lp, "max").is_number() ||
      !need(ls, lp, "count").is_number_integer())
    fail(lp, "expected numeric min, max and integer count");
  const double lo = ls.at("min").get<double>(), hi = ls.at("max").get<double>();
  const int count = ls.at("count").get<int>();
  if (!(lo > 0.0 && hi >= lo && count >= 1)) fail(lp, "need 0 < min <= max and count >= 1");
  return log_space(lo, hi, count);
}

inline KernelSpec parse_kernel(const Json& j, KernelSpec defaults) {
  const std::string path = "kernel";
  const std::string family = text(j, path, "family", to_string(defaults.family));
  KernelSpec k = defaults;
  if (family == "rbf") {
    check_keys(j, path, {"family", "lengthscale", "variance", "scale"});
    if (defaults.family != KernelFamily::Rbf) k = KernelSpec::rbf();
    k.rbf_lengthscale = number(j, path, "lengthscale", k.rbf_lengthscale);
    k.rbf_variance = number(j, path, "variance", k.rbf_variance);
  } else if (family == "nngp") {
    check_keys(j, path, {"family", "depth", "sigma_w2", "sigma_b2", "scale"});
    if (defaults.family != KernelFamily::Nngp) k = KernelSpec::nngp();
    k.depth = integer(j, path, "depth", k.depth);
    k.sigma_w2 = number(j, path, "sigma_w2", k.sigma_w2);
    k.sigma_b2 = number(j, path, "sigma_b2", k.sigma_b2);
  } else {
    fail("kernel.family", "expected 'rbf' or 'nngp'");
  }
  k.scale = number(j, path, "scale", k.scale);
  try {
    k.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return k;
}

inline DataSpec parse_data(const Json& j, const std::string& path) {
  DataSpec d;
  if (!j.is_object()) fail(path, "expected an object");
  d.source = text(j, path, "source", "");
  if (d.source == "rbf-regression") {
    check_keys(j, path, {"source", "n_train", "n_test", "noise_std"});
    d.n_train = integer(j, path, "n_train", 100);
    d.n_test = integer(j, path, "n_test", 100);
    d.noise_std = number(j, path, "noise_std", 0.1);
    if (d.n_train < 1 || d.n_test < 1 || d.noise_std < 0.0) fail(path, "need n_train, n_test >= 1, noise_std >= 0");
  } else if (d.source == "clusters") {
    check_keys(j, path, {"source", "n_per_class", "class_count", "dim", "separation", "normalize"});
    d.n_per_class = integer(j, path, "n_per_class", 100);
    d.class_count = integer(j, path, "class_count", 2);
    d.dim = integer(j, path, "dim", 2);
    d.separation = number(j, path, "separation", 3.0);
    d.normalize = text(j, path, "normalize", "none");
    if (d.n_per_class < 1 || d.class_count < 2 || d.dim < 1 || d.class_count > 2 * d.dim || d.separation < 0.0)
      fail(path, "need n_per_class >= 1, 2 <= class_count <= 2*dim, separation >= 0");
  } else if (d.source == "cifar10") {
    check_keys(j, path, {"source", "dir", "keep_classes", "n_train", "n_test", "normalize", "fallback"});
    d.dir = text(j, path, "dir", "");
    if (d.dir.empty()) fail(join(path, "dir"), "missing required key");
    if (j.contains("keep_classes")) {
      const auto& kc = j.at("keep_classes");
      if (!kc.is_array()) fail(join(path, "keep_classes"), "expected an array of integers");
      for (const auto& c : kc) {
        if (!c.is_number_integer() || c.get<int>() < 0 || c.get<int>() > 9)
          fail(join(path, "keep_classes"), "entries must be integers in [0, 9]");
        d.keep_classes.push_back(c.get<int>());
      }
    }
    d.n_train = integer(j, path, "n_train", 2000);
    d.n_test = integer(j, path, "n_test", 1000);
    d.normalize = text(j, path, "normalize", "global-standardize");
    if (j.contains("fallback")) d.fallback = std::make_shared<DataSpec>(parse_data(j.at("fallback"), join(path, "fallback")));
  } else if (d.source == "files") {
    check_keys(j, path, {"source", "train", "test"});
    d.train_file = text(j, path, "train", "");
    d.test_file = text(j, path, "test", "");
    if (d.train_file.empty() || d.test_file.empty()) fail(path, "needs 'train' and 'test' paths");
  } else {
    fail(join(path, "source"), "expected one of rbf-regression, clusters, cifar10, files");
  }
  if (d.normalize != "none" && d.normalize != "global-standardize")
    fail(join(path, "normalize"), "expected 'none' or 'global-standardize'");
  return d;
}

}  // namespace config_detail

/// Strict parse: unknown keys and missing required keys raise ConfigInvalid.
inline ExperimentConfig parse_experiment_config(const Json& j) {
  using namespace config_detail;
  check_keys(j, "", {"experiment", "seed", "output_dir", "kernel", "temperatures", "data", "regression", "ess", "probe"});
  ExperimentConfig cfg;
  const Json& exp = need(j, "", "experiment");
  if (!exp.is_string()) fail("experiment", "expected a string");
  const std::string name = exp.get<std::string>();
  if (name == "regress-sweep")
    cfg.experiment = ExperimentKind::RegressSweep;
  else if (name == "classify-sweep")
    cfg.experiment = ExperimentKind::ClassifySweep;
  else if (name == "probe")
    cfg.experiment = ExperimentKind::Probe;
  else if (name == "gen-data")
    cfg.experiment = ExperimentKind::GenData;
  else
    fail("experiment", "expected one of regress-sweep, classify-sweep, probe, gen-data");

  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) fail("seed", "expected a non-negative integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  cfg.output_dir = text(j, "", "output_dir", "out/" + name);

  const bool classify = cfg.experiment == ExperimentKind::ClassifySweep;
  const KernelSpec default_kernel = classify ? KernelSpec::nngp() : KernelSpec::rbf();
  cfg.kernel = j.contains("kernel") ? parse_kernel(j.at("kernel"), default_kernel) : default_kernel;

  switch (cfg.experiment) {
    case ExperimentKind::RegressSweep: cfg.temperatures = log_space(1e-2, 1e2, 40); break;
    case ExperimentKind::ClassifySweep: cfg.temperatures = {0.01, 0.03, 0.1, 0.3, 1.0}; break;
    case ExperimentKind::Probe: cfg.temperatures = log_space(1e-3, 1.0, 13); break;
    case ExperimentKind::GenData: break;
  }
  if (j.contains("temperatures")) cfg.temperatures = grid(j.at("temperatures"), "temperatures");
  for (double t : cfg.temperatures)
    if (!(t > 0.0)) fail("temperatures", "all temperatures must be > 0");

  const bool needs_data = cfg.experiment != ExperimentKind::Probe;
  if (needs_data) cfg.data = parse_data(need(j, "", "data"), "data");
  else if (j.contains("data")) fail("data", "not used by experiment 'probe'");

  if (j.contains("regression")) {
    if (cfg.experiment != ExperimentKind::RegressSweep) fail("regression", "only valid for regress-sweep");
    const Json& r = j.at("regression");
    check_keys(r, "regression", {"assumed_noise_std", "repeats"});
    if (r.contains("assumed_noise_std")) cfg.assumed_noise_std = numbers(r.at("assumed_noise_std"), "regression.assumed_noise_std");
    cfg.repeats = integer(r, "regression", "repeats", 1);
    if (cfg.repeats < 1) fail("regression.repeats", "must be >= 1");
    for (double s : cfg.assumed_noise_std)
      if (!(s >= 0.0)) fail("regression.assumed_noise_std", "entries must be >= 0");
  }
  if (cfg.experiment == ExperimentKind::RegressSweep) {
    if (cfg.data.source != "rbf-regression" && cfg.data.source != "files")
      fail("data.source", "regress-sweep needs rbf-regression or files");
    if (cfg.assumed_noise_std.empty()) cfg.assumed_noise_std = {cfg.data.noise_std};
  }

  if (j.contains("ess")) {
    if (!classify) fail("ess", "only valid for classify-sweep");
    const Json& e = j.at("ess");
    check_keys(e, "ess", {"n_chains", "burn_in", "n_samples_per_chain", "thinning", "draws_per_sample"});
    cfg.ess.n_chains = integer(e, "ess", "n_chains", cfg.ess.n_chains);
    cfg.ess.burn_in = integer(e, "ess", "burn_in", cfg.ess.burn_in);
    cfg.ess.n_samples_per_chain = integer(e, "ess", "n_samples_per_chain", cfg.ess.n_samples_per_chain);
    cfg.ess.thinning = integer(e, "ess", "thinning", cfg.ess.thinning);
    cfg.draws_per_sample = integer(e, "ess", "draws_per_sample", cfg.draws_per_sample);
    if (cfg.ess.n_chains < 1 || cfg.ess.burn_in < 0 || cfg.ess.n_samples_per_chain < 1 || cfg.ess.thinning < 1 ||
        cfg.draws_per_sample < 1)
      fail("ess", "chain lengths must be positive (burn_in may be 0)");
  }
  if (classify && cfg.data.source == "rbf-regression") fail("data.source", "classify-sweep needs class labels");

  if (cfg.experiment == ExperimentKind::Probe) cfg.probe_scales = {1.0, 10.0, 100.0, 1000.0};
  if (j.contains("probe")) {
    if (cfg.experiment != ExperimentKind::Probe) fail("probe", "only valid for experiment 'probe'");
    const Json& p = j.at("probe");
    check_keys(p, "probe", {"scales", "quadrature_tolerance", "integration_half_width_sigmas"});
    if (p.contains("scales")) cfg.probe_scales = numbers(p.at("scales"), "probe.scales");
    cfg.quadrature_tolerance = number(p, "probe", "quadrature_tolerance", cfg.quadrature_tolerance);
    cfg.integration_half_width_sigmas =
        number(p, "probe", "integration_half_width_sigmas", cfg.integration_half_width_sigmas);
    for (double c : cfg.probe_scales)
      if (!(c > 0.0)) fail("probe.scales", "entries must be > 0");
    if (!(cfg.quadrature_tolerance > 0.0) || !(cfg.integration_half_width_sigmas > 0.0))
      fail("probe", "tolerance and half width must be > 0");
  }
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigInvalid, path.string() + ": " + e.what());
  }
  return parse_experiment_config(j);
}

// --- Resolved config echo ----------------------------------------------------

inline Json to_json(const KernelSpec& k) {
  Json j;
  j["family"] = to_string(k.family);
  if (k.family == KernelFamily::Rbf) {
    j["lengthscale"] = k.rbf_lengthscale;
    j["variance"] = k.rbf_variance;
  } else {
    j["depth"] = k.depth;
    j["sigma_w2"] = k.sigma_w2;
    j["sigma_b2"] = k.sigma_b2;
  }
  j["scale"] = k.scale;
  return j;
}

inline Json to_json(const DataSpec& d) {
  Json j;
  j["source"] = d.source;
  if (d.source == "rbf-regression") {
    j["n_train"] = d.n_train;
    j["n_test"] = d.n_test;
    j["noise_std"] = d.noise_std;
  } else if (d.source == "clusters") {
    j["n_per_class"] = d.n_per_class;
    j["class_count"] = d.class_count;
    j["dim"] = d.dim;
    j["separation"] = d.separation;
    j["normalize"] = d.normalize;
  } else if (d.source == "cifar10") {
    j["dir"] = d.dir;
    j["keep_classes"] = d.keep_classes;
    j["n_train"] = d.n_train;
    j["n_test"] = d.n_test;
    j["normalize"] = d.normalize;
    if (d.fallback) j["fallback"] = to_json(*d.fallback);
  } else if (d.source == "files") {
    j["train"] = d.train_file;
    j["test"] = d.test_file;
  }
  return j;
}

inline Json to_json(const ExperimentConfig& c) {
  Json j;
  j["experiment"] = to_string(c.experiment);
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  if (c.experiment != ExperimentKind::Probe && c.experiment != ExperimentKind::GenData) j["kernel"] = to_json(c.kernel);
  if (c.experiment == ExperimentKind::GenData && c.data.source == "rbf-regression") j["kernel"] = to_json(c.kernel);
  if (c.experiment != ExperimentKind::GenData) j["temperatures"] = c.temperatures;
  if (c.experiment != ExperimentKind::Probe) j["data"] = to_json(c.data);
  if (c.experiment == ExperimentKind::RegressSweep)
    j["regression"] = {{"assumed_noise_std", c.assumed_noise_std}, {"repeats", c.repeats}};
  if (c.experiment == ExperimentKind::ClassifySweep)
    j["ess"] = {{"n_chains", c.ess.n_chains},
                {"burn_in", c.ess.burn_in},
                {"n_samples_per_chain", c.ess.n_samples_per_chain},
                {"thinning", c.ess.thinning},
                {"draws_per_sample", c.draws_per_sample}};
  if (c.experiment == ExperimentKind::Probe)
    j["probe"] = {{"scales", c.probe_scales},
                  {"quadrature_tolerance", c.quadrature_tolerance},
                  {"integration_half_width_sigmas", c.integration_half_width_sigmas}};
  return j;
}

// --- Running -----------------------------------------------------------------

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline NormalizationScheme parse_scheme(const std::string& s) {
  return s == "global-standardize" ? NormalizationScheme::GlobalStandardize : NormalizationScheme::None;
}

/// Materializes the datasets a DataSpec describes. When a cifar10 directory
/// is missing and a fallback exists, `spec` is replaced by the fallback so
/// the echoed config matches what actually ran.
inline DatasetPair build_datasets(DataSpec& spec, const KernelSpec& kernel, std::uint64_t seed, std::ostream& log) {
  if (spec.source == "rbf-regression") {
    const KernelSpec gen_kernel = kernel.family == KernelFamily::Rbf ? kernel : KernelSpec::rbf();
    return gen_rbf_regression(spec.n_train, spec.n_test, spec.noise_std, gen_kernel, seed);
  }
  if (spec.source == "clusters") {
    return normalize_inputs(gen_cluster_classification(spec.n_per_class, spec.class_count, spec.dim, spec.separation, seed),
                            parse_scheme(spec.normalize));
  }
  if (spec.source == "cifar10") {
    if (!std::filesystem::exists(std::filesystem::path(spec.dir) / "test_batch.bin") && spec.fallback) {
      log << "cifar10 directory '" << spec.dir << "' not found; using fallback source '" << spec.fallback->source
          << "'\n";
      DataSpec fb = *spec.fallback;
      spec = fb;
      return build_datasets(spec, kernel, seed, log);
    }
    return normalize_inputs(load_cifar10(spec.dir, spec.keep_classes, spec.n_train, spec.n_test, seed),
                            parse_scheme(spec.normalize));
  }
  return {read_dataset(spec.train_file, Split::Train), read_dataset(spec.test_file, Split::Test)};
}

struct RunArtifacts {
  std::filesystem::path output_dir;
  std::vector<SweepRecord> records;
  std::vector<ProbeRow> probe_rows;
  Json summary;
};

inline const char* kRegressHeader = "assumed_noise_std,temperature,test_nll,seed";
inline const char* kClassifyHeader = "temperature,test_log_likelihood,top1_accuracy,n_train,n_test,seed";
inline const char* kProbeHeader = "c,T,probability,ratio";

/// Runs one configured experiment and writes results.csv (except gen-data,
/// which writes train.csv/test.csv), resolved_config.json, summary.json and
/// run.log into the output directory.
inline RunArtifacts run_experiment(ExperimentConfig cfg, int threads = 1) {
  const auto start = std::chrono::steady_clock::now();
  const std::filesystem::path out_dir(cfg.output_dir);
  std::filesystem::create_directories(out_dir);
  std::ostringstream log;
  log << "experiment: " << to_string(cfg.experiment) << "\nseed: " << cfg.seed << "\nthreads: " << threads << '\n';

  RunArtifacts art;
  art.output_dir = out_dir;
  std::ostringstream csv;

  switch (cfg.experiment) {
    case ExperimentKind::RegressSweep: {
      csv << kRegressHeader << '\n';
      Json argmins = Json::array();
      // One dataset per repeat, shared across noise settings.
      std::vector<DatasetPair> datasets;
      for (int r = 0; r < cfg.repeats; ++r) {
        const std::uint64_t data_seed = cfg.repeats == 1 ? cfg.seed : mix_seed(cfg.seed, static_cast<std::uint64_t>(r));
        datasets.push_back(build_datasets(cfg.data, cfg.kernel, data_seed, log));
      }
      for (double sigma : cfg.assumed_noise_std) {
        std::vector<double> mean_nll(cfg.temperatures.size(), 0.0);
        for (const auto& pair : datasets) {
          const RegressionModel model{cfg.kernel, sigma};
          const auto sweep = regression_temperature_sweep(model, pair.train, pair.test, cfg.temperatures, cfg.seed);
          for (std::size_t k = 0; k < sweep.records.size(); ++k)
            mean_nll[k] += sweep.records[k].metric("test_nll") / cfg.repeats;
        }
        std::vector<SweepRecord> recs;
        for (std::size_t k = 0; k < cfg.temperatures.size(); ++k) {
          recs.push_back({cfg.temperatures[k], {{"test_nll", mean_nll[k]}, {"assumed_noise_std", sigma}}, cfg.seed});
          csv << format_real(sigma) << ',' << format_real(cfg.temperatures[k]) << ',' << format_real(mean_nll[k]) << ','
              << cfg.seed << '\n';
        }
        const double argmin = recs[best_record(recs, "test_nll", true)].temperature;
        argmins.push_back({{"assumed_noise_std", sigma}, {"argmin_temperature", argmin}});
        log << "assumed_noise_std=" << format_real(sigma) << " argmin_T=" << format_real(argmin) << '\n';
        art.records.insert(art.records.end(), recs.begin(), recs.end());
      }
      art.summary["argmin"] = argmins;
      art.summary["repeats"] = cfg.repeats;
      break;
    }
    case ExperimentKind::ClassifySweep: {
      csv << kClassifyHeader << '\n';
      const DatasetPair pair = build_datasets(cfg.data, cfg.kernel, cfg.seed, log);
      ClassificationSweepOptions opts;
      opts.ess = cfg.ess;
      opts.draws_per_sample = cfg.draws_per_sample;
      opts.threads = threads;
      const auto sweep = classification_temperature_sweep(cfg.kernel, pair.train, pair.test, cfg.temperatures, opts,
                                                          cfg.seed);
      Json per_t = Json::array();
      for (std::size_t k = 0; k < sweep.records.size(); ++k) {
        const auto& r = sweep.records[k];
        csv << format_real(r.temperature) << ',' << format_real(r.metric("test_log_likelihood")) << ','
            << format_real(r.metric("top1_accuracy")) << ',' << pair.train.size() << ',' << pair.test.size() << ','
            << r.seed << '\n';
        log << "T=" << format_real(r.temperature) << " prior_jitter=" << sweep.jitter[k]
            << " ess_mean_proposals_per_step=" << sweep.mean_proposals[k] << '\n';
        per_t.push_back({{"temperature", r.temperature},
                         {"test_log_likelihood_se", r.metric("test_log_likelihood_se")},
                         {"top1_accuracy_se", r.metric("top1_accuracy_se")},
                         {"ess_mean_proposals_per_step", sweep.mean_proposals[k]}});
      }
      const auto best = best_record(sweep.records, "test_log_likelihood", false);
      art.summary["best_temperature"] = sweep.records[best].temperature;
      art.summary["per_temperature"] = per_t;
      art.records = sweep.records;
      break;
    }
    case ExperimentKind::Probe: {
      csv << kProbeHeader << '\n';
      ProbeConfig defaults;
      defaults.quadrature_tolerance = cfg.quadrature_tolerance;
      defaults.integration_half_width_sigmas = cfg.integration_half_width_sigmas;
      art.probe_rows = relabel_ratio_curve(cfg.probe_scales, cfg.temperatures, defaults);
      for (const auto& r : art.probe_rows)
        csv << format_real(r.latent_scale) << ',' << format_real(r.temperature) << ',' << format_real(r.probability)
            << ',' << format_real(r.ratio) << '\n';
      // The T -> 0 asymptote is reported at the smallest grid temperature.
      Json asym = Json::array();
      for (double c : cfg.probe_scales) {
        const ProbeRow* lowest = nullptr;
        for (const auto& r : art.probe_rows)
          if (r.latent_scale == c && (!lowest || r.temperature < lowest->temperature)) lowest = &r;
        asym.push_back({{"c", c}, {"temperature", lowest->temperature}, {"ratio", lowest->ratio}});
      }
      art.summary["asymptote_at_smallest_temperature"] = asym;
      break;
    }
    case ExperimentKind::GenData: {
      const DatasetPair pair = build_datasets(cfg.data, cfg.kernel, cfg.seed, log);
      write_dataset(out_dir / "train.csv", pair.train);
      write_dataset(out_dir / "test.csv", pair.test);
      art.summary["n_train"] = pair.train.size();
      art.summary["n_test"] = pair.test.size();
      break;
    }
  }

  if (cfg.experiment != ExperimentKind::GenData) {
    std::ofstream(out_dir / "results.csv", std::ios::binary) << csv.str();
  }
  std::ofstream(out_dir / "resolved_config.json") << to_json(cfg).dump(2) << '\n';
  std::ofstream(out_dir / "summary.json") << art.summary.dump(2) << '\n';
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  log << "wall_time_seconds: " << wall << '\n';
  std::ofstream(out_dir / "run.log") << log.str();
  return art;
}

// --- Plot data ---------------------------------------------------------------

enum class PlotFigure { Fig1, Fig2a, Fig2b, Fig3b };

inline PlotFigure parse_figure(const std::string& name) {
  if (name == "fig1") return PlotFigure::Fig1;
  if (name == "fig2a") return PlotFigure::Fig2a;
  if (name == "fig2b") return PlotFigure::Fig2b;
  if (name == "fig3b") return PlotFigure::Fig3b;
  throw Error(ErrorCode::InvalidArgument, "unknown figure '" + name + "' (expected fig1, fig2a, fig2b, fig3b)");
}

/// Rewrites a results.csv into long-format "x,y,series" rows.
inline void emit_plot_data(const std::filesystem::path& results_csv, PlotFigure figure, std::ostream& out) {
  std::ifstream in(results_csv);
  require(static_cast<bool>(in), ErrorCode::FileNotFound, "cannot open " + results_csv.string());
  std::string header;
  require(static_cast<bool>(std::getline(in, header)), ErrorCode::SchemaMismatch, "results file is empty");
  const char* expected = figure == PlotFigure::Fig1    ? kClassifyHeader
                         : figure == PlotFigure::Fig3b ? kRegressHeader
                                                       : kProbeHeader;
  require(header == expected, ErrorCode::SchemaMismatch,
          "header '" + header + "' does not match '" + std::string(expected) + "'");

  out << "x,y,series\n";
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    const std::size_t width = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',') + 1);
    require(cells.size() == width, ErrorCode::SchemaMismatch, "row has the wrong number of columns: " + line);
    switch (figure) {
      case PlotFigure::Fig1:
        out << cells[0] << ',' << cells[1] << ",test_log_likelihood\n";
        out << cells[0] << ',' << cells[2] << ",top1_accuracy\n";
        break;
      case PlotFigure::Fig2a: out << cells[1] << ',' << cells[2] << ",c=" << cells[0] << '\n'; break;
      case PlotFigure::Fig2b: out << cells[1] << ',' << cells[3] << ",c=" << cells[0] << '\n'; break;
      case PlotFigure::Fig3b: out << cells[1] << ',' << cells[2] << ",sigma_eps=" << cells[0] << '\n'; break;
    }
  }
}

}  // namespace tgp
