#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tgp/dataset.hpp"
#include "tgp/kernels.hpp"
#include "tgp/linalg.hpp"
#include "tgp/rng.hpp"

namespace tgp {

struct DatasetPair {
  LabeledDataset train;
  LabeledDataset test;
};

/// Scalar inputs x ~ N(0, 1), one joint prior draw f* over train and test
/// inputs, targets f* + noise_std * eps. The first n_train rows are train.
/// Streams under `seed`: 0 inputs, 1 function draw, 2 label noise.
inline DatasetPair gen_rbf_regression(int n_train, int n_test, double noise_std, const KernelSpec& kernel,
                                      std::uint64_t seed) {
  require(kernel.family == KernelFamily::Rbf, ErrorCode::InvalidArgument, "gen_rbf_regression: kernel must be RBF");
  require(n_train >= 1 && n_test >= 1, ErrorCode::InvalidArgument, "gen_rbf_regression: sizes must be >= 1");
  require(noise_std >= 0.0, ErrorCode::InvalidArgument, "gen_rbf_regression: noise_std must be >= 0");
  const int n = n_train + n_test;
  RngStream input_rng(seed, 0), function_rng(seed, 1), noise_rng(seed, 2);
  Matrix x(n, 1);
  for (int i = 0; i < n; ++i) x(i, 0) = input_rng.normal();
  const SpdFactor factor = cholesky(gram(kernel, x));
  const Vector f = mvn_sample(Vector::Zero(n), factor, function_rng);
  Vector y(n);
  for (int i = 0; i < n; ++i) y[i] = f[i] + noise_std * noise_rng.normal();

  char tag[160];
  std::snprintf(tag, sizeof tag, "rbf-regression(seed=%llu,noise_std=%.17g)", static_cast<unsigned long long>(seed),
                noise_std);
  DatasetPair out;
  out.train = {x.topRows(n_train), y.head(n_train), {}, 0, Split::Train, tag};
  out.test = {x.bottomRows(n_test), y.tail(n_test), {}, 0, Split::Test, tag};
  return out;
}

/// Isotropic unit-variance Gaussian clusters. Class k is centred at
/// separation * (+/-) e_{k mod d}, the sign flipping once k >= d, so at most
/// 2d classes are supported. Examples are interleaved by class.
/// Streams under `seed`: 0 train, 1 test.
inline DatasetPair gen_cluster_classification(int n_per_class, int class_count, int d, double separation,
                                              std::uint64_t seed) {
  require(class_count >= 2, ErrorCode::InvalidArgument, "gen_cluster_classification: class_count must be >= 2");
  require(d >= 1 && class_count <= 2 * d, ErrorCode::InvalidArgument,
          "gen_cluster_classification: needs 2 <= class_count <= 2d");
  require(n_per_class >= 1, ErrorCode::InvalidArgument, "gen_cluster_classification: n_per_class must be >= 1");
  require(separation >= 0.0, ErrorCode::InvalidArgument, "gen_cluster_classification: separation must be >= 0");

  char tag[160];
  std::snprintf(tag, sizeof tag, "clusters(seed=%llu,separation=%.17g)", static_cast<unsigned long long>(seed),
                separation);
  auto make = [&](std::uint64_t stream, Split split) {
    RngStream rng(seed, stream);
    const int n = n_per_class * class_count;
    LabeledDataset ds;
    ds.inputs.resize(n, d);
    ds.labels.resize(static_cast<std::size_t>(n));
    ds.class_count = class_count;
    ds.split = split;
    ds.provenance = tag;
    for (int i = 0; i < n; ++i) {
      const int k = i % class_count;
      for (int j = 0; j < d; ++j) ds.inputs(i, j) = rng.normal();
      ds.inputs(i, k % d) += (k < d ? 1.0 : -1.0) * separation;
      ds.labels[static_cast<std::size_t>(i)] = k;
    }
    return ds;
  };
  return {make(0, Split::Train), make(1, Split::Test)};
}

// --- CIFAR-10 binary batches -------------------------------------------------

inline constexpr std::size_t kCifarPixels = 3072;
inline constexpr std::size_t kCifarRecordBytes = 1 + kCifarPixels;

struct CifarRecord {
  std::uint8_t label = 0;
  std::array<std::uint8_t, kCifarPixels> pixels{};  // 1024 R, 1024 G, 1024 B
};

inline std::vector<CifarRecord> parse_cifar10_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::FileNotFound, "cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(bytes.size() % kCifarRecordBytes == 0, ErrorCode::MalformedRecord,
          path.string() + ": length " + std::to_string(bytes.size()) + " is not a multiple of 3073");
  std::vector<CifarRecord> out(bytes.size() / kCifarRecordBytes);
  for (std::size_t r = 0; r < out.size(); ++r) {
    const char* rec = bytes.data() + r * kCifarRecordBytes;
    out[r].label = static_cast<std::uint8_t>(rec[0]);
    require(out[r].label <= 9, ErrorCode::MalformedRecord,
            path.string() + ": record " + std::to_string(r) + " has label byte " + std::to_string(out[r].label));
    std::copy(rec + 1, rec + kCifarRecordBytes, reinterpret_cast<char*>(out[r].pixels.data()));
  }
  return out;
}

inline void write_cifar10_file(const std::filesystem::path& path, const std::vector<CifarRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::FileNotFound, "cannot write " + path.string());
  for (const auto& r : records) {
    out.put(static_cast<char>(r.label));
    out.write(reinterpret_cast<const char*>(r.pixels.data()), static_cast<std::streamsize>(r.pixels.size()));
  }
}

struct CifarSubset {
  LabeledDataset data;
  std::vector<std::size_t> source_indices;  // positions in the concatenated source records
};

namespace detail {

inline CifarSubset subsample_cifar(const std::vector<CifarRecord>& records, const std::vector<int>& keep_classes,
                                   int n, RngStream& rng, Split split, const std::string& provenance) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (keep_classes.empty() ||
        std::find(keep_classes.begin(), keep_classes.end(), records[i].label) != keep_classes.end())
      candidates.push_back(i);
  }
  require(n >= 1 && static_cast<std::size_t>(n) <= candidates.size(), ErrorCode::InvalidArgument,
          "load_cifar10: requested " + std::to_string(n) + " records but only " + std::to_string(candidates.size()) +
              " match");
  // Partial Fisher-Yates, then restore source order.
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(candidates.size() - i));
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(static_cast<std::size_t>(n));
  std::sort(candidates.begin(), candidates.end());

  CifarSubset out;
  out.source_indices = candidates;
  auto& ds = out.data;
  ds.inputs.resize(n, static_cast<Eigen::Index>(kCifarPixels));
  ds.labels.resize(static_cast<std::size_t>(n));
  ds.class_count = keep_classes.empty() ? 10 : static_cast<int>(keep_classes.size());
  ds.split = split;
  ds.provenance = provenance;
  for (int r = 0; r < n; ++r) {
    const auto& rec = records[candidates[static_cast<std::size_t>(r)]];
    for (std::size_t p = 0; p < kCifarPixels; ++p) ds.inputs(r, static_cast<Eigen::Index>(p)) = rec.pixels[p] / 255.0;
    ds.labels[static_cast<std::size_t>(r)] =
        keep_classes.empty()
            ? rec.label
            : static_cast<int>(std::find(keep_classes.begin(), keep_classes.end(), rec.label) - keep_classes.begin());
  }
  return out;
}

}  // namespace detail

/// Reads data_batch_*.bin and test_batch.bin from `dir`. keep_classes (empty
/// means all ten) are relabelled to their position in the list. Pixels are
/// scaled to [0, 1]. Streams under `seed`: 0 train subsample, 1 test.
inline DatasetPair load_cifar10(const std::filesystem::path& dir, const std::vector<int>& keep_classes, int n_train,
                                int n_test, std::uint64_t seed) {
  for (int c : keep_classes)
    require(c >= 0 && c <= 9, ErrorCode::InvalidArgument, "load_cifar10: keep_classes entries must be in [0, 9]");
  std::vector<CifarRecord> train_records;
  int batches = 0;
  for (int b = 1; b <= 5; ++b) {
    const auto path = dir / ("data_batch_" + std::to_string(b) + ".bin");
    if (!std::filesystem::exists(path)) continue;
    auto recs = parse_cifar10_file(path);
    train_records.insert(train_records.end(), recs.begin(), recs.end());
    ++batches;
  }
  require(batches > 0, ErrorCode::FileNotFound, "load_cifar10: no data_batch_*.bin in " + dir.string());
  const auto test_path = dir / "test_batch.bin";
  require(std::filesystem::exists(test_path), ErrorCode::FileNotFound, "load_cifar10: missing " + test_path.string());
  const auto test_records = parse_cifar10_file(test_path);

  const std::string tag = "cifar10(" + dir.string() + ",seed=" + std::to_string(seed) + ")";
  RngStream train_rng(seed, 0), test_rng(seed, 1);
  return {detail::subsample_cifar(train_records, keep_classes, n_train, train_rng, Split::Train, tag).data,
          detail::subsample_cifar(test_records, keep_classes, n_test, test_rng, Split::Test, tag).data};
}

// --- Normalization -----------------------------------------------------------

enum class NormalizationScheme { None, GlobalStandardize };

struct NormalizationStats {
  double mean = 0.0;
  double stddev = 1.0;
};

inline NormalizationStats fit_global_standardize(const LabeledDataset& train) {
  require(train.inputs.size() > 0, ErrorCode::EmptyInput, "fit_global_standardize: empty inputs");
  const double mean = train.inputs.mean();
  const double var = (train.inputs.array() - mean).square().mean();
  require(var > 0.0, ErrorCode::ZeroVariance, "fit_global_standardize: inputs are constant");
  return {mean, std::sqrt(var)};
}

/// Training splits may omit `stats` (computed from the data itself); test
/// splits must pass the training statistics.
inline LabeledDataset normalize_inputs(LabeledDataset data, NormalizationScheme scheme,
                                       std::optional<NormalizationStats> stats = std::nullopt) {
  if (scheme == NormalizationScheme::None) return data;
  if (!stats) {
    require(data.split == Split::Train, ErrorCode::InvalidArgument,
            "normalize_inputs: test split needs training statistics");
    stats = fit_global_standardize(data);
  }
  require(stats->stddev > 0.0, ErrorCode::ZeroVariance, "normalize_inputs: zero standard deviation");
  data.inputs = (data.inputs.array() - stats->mean) / stats->stddev;
  return data;
}

inline DatasetPair normalize_inputs(DatasetPair pair, NormalizationScheme scheme) {
  if (scheme == NormalizationScheme::None) return pair;
  const auto stats = fit_global_standardize(pair.train);
  return {normalize_inputs(std::move(pair.train), scheme, stats), normalize_inputs(std::move(pair.test), scheme, stats)};
}

// --- Columnar text format ----------------------------------------------------
// Header "x0,x1,...,x{d-1},target" (regression) or "...,label" (classification),
// then one comma-separated row per example with %.17g values.

inline void write_dataset(const std::filesystem::path& path, const LabeledDataset& ds) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::FileNotFound, "cannot write " + path.string());
  for (Eigen::Index j = 0; j < ds.dim(); ++j) out << 'x' << j << ',';
  out << (ds.is_classification() ? "label" : "target") << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    for (Eigen::Index j = 0; j < ds.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", ds.inputs(i, j));
      out << buf << ',';
    }
    if (ds.is_classification()) {
      out << ds.labels[static_cast<std::size_t>(i)] << '\n';
    } else {
      std::snprintf(buf, sizeof buf, "%.17g", ds.targets[i]);
      out << buf << '\n';
    }
  }
}

inline LabeledDataset read_dataset(const std::filesystem::path& path, Split split) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::FileNotFound, "cannot open " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::MalformedRecord, path.string() + ": missing header");
  const auto cols = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ',') + 1);
  require(cols >= 2, ErrorCode::MalformedRecord, path.string() + ": header needs at least two columns");
  const bool classification = line.ends_with("label");
  require(classification || line.ends_with("target"), ErrorCode::MalformedRecord,
          path.string() + ": last header column must be 'label' or 'target'");

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrorCode::MalformedRecord, path.string() + ": bad value '" + cell + "'");
      }
    }
    require(static_cast<Eigen::Index>(row.size()) == cols, ErrorCode::MalformedRecord,
            path.string() + ": row has the wrong number of columns");
    rows.push_back(std::move(row));
  }
  LabeledDataset ds;
  ds.split = split;
  ds.provenance = path.string();
  const auto n = static_cast<Eigen::Index>(rows.size());
  ds.inputs.resize(n, cols - 1);
  if (classification)
    ds.labels.resize(rows.size());
  else
    ds.targets.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j + 1 < cols; ++j) ds.inputs(i, j) = row[static_cast<std::size_t>(j)];
    if (classification) {
      const int y = static_cast<int>(row.back());
      ds.labels[static_cast<std::size_t>(i)] = y;
      ds.class_count = std::max(ds.class_count, y + 1);
    } else {
      ds.targets[i] = row.back();
    }
  }
  ds.validate();
  return ds;
}

}  // namespace tgp
