#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "tgp/data.hpp"
#include "tgp/regression.hpp"

using namespace tgp;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("tgp_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

CifarRecord make_record(std::uint8_t label, std::uint8_t seed) {
  CifarRecord r;
  r.label = label;
  for (std::size_t i = 0; i < kCifarPixels; ++i) r.pixels[i] = static_cast<std::uint8_t>((i * 7 + seed * 13) % 256);
  return r;
}

std::vector<char> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(GenRbfRegression, ShapesAndDeterminism) {
  const auto a = gen_rbf_regression(100, 40, 0.1, KernelSpec::rbf(), 17);
  const auto b = gen_rbf_regression(100, 40, 0.1, KernelSpec::rbf(), 17);
  const auto c = gen_rbf_regression(100, 40, 0.1, KernelSpec::rbf(), 18);
  EXPECT_EQ(a.train.size(), 100);
  EXPECT_EQ(a.test.size(), 40);
  EXPECT_EQ(a.train.dim(), 1);
  EXPECT_EQ(a.train.inputs, b.train.inputs);
  EXPECT_EQ(a.train.targets, b.train.targets);
  EXPECT_EQ(a.test.targets, b.test.targets);
  EXPECT_NE(a.train.targets, c.train.targets);
  EXPECT_THROW(gen_rbf_regression(10, 10, 0.1, KernelSpec::nngp(), 1), Error);
}

TEST(GenRbfRegression, NoiselessTargetsAreInterpolated) {
  const auto data = gen_rbf_regression(20, 5, 0.0, KernelSpec::rbf(), 19);
  const auto preds = posterior_predict({KernelSpec::rbf(), 0.0}, data.train, data.train.inputs);
  for (Eigen::Index i = 0; i < data.train.size(); ++i) {
    // Both draws carry diagonal jitter, so agreement is only to its order.
    EXPECT_NEAR(preds[static_cast<std::size_t>(i)].mean, data.train.targets[i], 1e-4);
    EXPECT_LE(preds[static_cast<std::size_t>(i)].variance, 1e-4);
  }
}

TEST(GenClusters, DeterministicLabelledAndDisjoint) {
  const auto a = gen_cluster_classification(20, 3, 2, 4.0, 23);
  const auto b = gen_cluster_classification(20, 3, 2, 4.0, 23);
  EXPECT_EQ(a.train.inputs, b.train.inputs);
  EXPECT_EQ(a.test.labels, b.test.labels);
  EXPECT_EQ(a.train.size(), 60);
  EXPECT_EQ(a.train.class_count, 3);
  std::set<std::vector<double>> train_rows;
  for (Eigen::Index i = 0; i < a.train.size(); ++i)
    train_rows.insert({a.train.inputs(i, 0), a.train.inputs(i, 1)});
  for (Eigen::Index i = 0; i < a.test.size(); ++i)
    EXPECT_EQ(train_rows.count({a.test.inputs(i, 0), a.test.inputs(i, 1)}), 0u);
  EXPECT_THROW(gen_cluster_classification(5, 5, 2, 1.0, 1), Error);
}

TEST(GenClusters, ZeroSeparationHasNoSignal) {
  const auto a = gen_cluster_classification(500, 2, 2, 0.0, 24);
  Vector m0 = Vector::Zero(2), m1 = Vector::Zero(2);
  for (Eigen::Index i = 0; i < a.train.size(); ++i)
    (a.train.labels[static_cast<std::size_t>(i)] == 0 ? m0 : m1) += a.train.inputs.row(i).transpose() / 500.0;
  EXPECT_LT((m0 - m1).norm(), 0.3);
}

TEST(Cifar, ParsesHandBuiltFixture) {
  const auto dir = scratch_dir("cifar_fixture");
  const std::vector<CifarRecord> recs{make_record(7, 1), make_record(0, 2), make_record(9, 3)};
  write_cifar10_file(dir / "fixture.bin", recs);
  // Byte-level check of the layout itself.
  const auto bytes = read_bytes(dir / "fixture.bin");
  ASSERT_EQ(bytes.size(), 3 * 3073u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[3073]), 0u);

  const auto parsed = parse_cifar10_file(dir / "fixture.bin");
  ASSERT_EQ(parsed.size(), 3u);
  EXPECT_EQ(parsed[0].label, 7);
  EXPECT_EQ(parsed[1].label, 0);
  EXPECT_EQ(parsed[2].label, 9);

  fs::copy_file(dir / "fixture.bin", dir / "data_batch_1.bin");
  fs::copy_file(dir / "fixture.bin", dir / "test_batch.bin");
  const auto loaded = load_cifar10(dir, {}, 3, 3, 0);
  EXPECT_EQ(loaded.train.labels, (std::vector<int>{7, 0, 9}));
  EXPECT_DOUBLE_EQ(loaded.train.inputs(0, 0), static_cast<unsigned char>(bytes[1]) / 255.0);
  EXPECT_DOUBLE_EQ(loaded.train.inputs(2, 1024), recs[2].pixels[1024] / 255.0);
}

TEST(Cifar, KeepClassesRemaps) {
  const auto dir = scratch_dir("cifar_keep");
  std::vector<CifarRecord> recs;
  for (int i = 0; i < 30; ++i) recs.push_back(make_record(static_cast<std::uint8_t>(i % 10), static_cast<std::uint8_t>(i)));
  write_cifar10_file(dir / "data_batch_1.bin", recs);
  write_cifar10_file(dir / "data_batch_2.bin", recs);
  write_cifar10_file(dir / "test_batch.bin", recs);
  const auto loaded = load_cifar10(dir, {5, 3}, 8, 4, 31);
  EXPECT_EQ(loaded.train.size(), 8);
  EXPECT_EQ(loaded.train.class_count, 2);
  for (int y : loaded.train.labels) EXPECT_TRUE(y == 0 || y == 1);
  // Subsampling is deterministic in the seed.
  const auto again = load_cifar10(dir, {5, 3}, 8, 4, 31);
  EXPECT_EQ(loaded.train.inputs, again.train.inputs);
  EXPECT_THROW(load_cifar10(dir, {5, 3}, 100, 4, 31), Error);
}

TEST(Cifar, RoundTripReproducesRetainedBytes) {
  const auto dir = scratch_dir("cifar_roundtrip");
  std::vector<CifarRecord> recs;
  for (int i = 0; i < 12; ++i) recs.push_back(make_record(static_cast<std::uint8_t>((i * 3) % 10), static_cast<std::uint8_t>(i)));
  write_cifar10_file(dir / "src.bin", recs);
  const auto src = read_bytes(dir / "src.bin");
  auto parsed = parse_cifar10_file(dir / "src.bin");
  write_cifar10_file(dir / "copy.bin", parsed);
  EXPECT_EQ(read_bytes(dir / "copy.bin"), src);

  RngStream rng(5, 0);
  const auto subset = detail::subsample_cifar(parsed, {}, 7, rng, Split::Train, "t");
  std::set<std::size_t> unique(subset.source_indices.begin(), subset.source_indices.end());
  EXPECT_EQ(unique.size(), 7u);
  std::vector<CifarRecord> kept;
  for (Eigen::Index r = 0; r < subset.data.size(); ++r) {
    CifarRecord rec;
    rec.label = static_cast<std::uint8_t>(subset.data.labels[static_cast<std::size_t>(r)]);
    for (std::size_t p = 0; p < kCifarPixels; ++p)
      rec.pixels[p] = static_cast<std::uint8_t>(std::lround(subset.data.inputs(r, static_cast<Eigen::Index>(p)) * 255.0));
    kept.push_back(rec);
  }
  write_cifar10_file(dir / "kept.bin", kept);
  const auto kept_bytes = read_bytes(dir / "kept.bin");
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const std::size_t src_off = subset.source_indices[k] * kCifarRecordBytes;
    EXPECT_TRUE(std::equal(kept_bytes.begin() + static_cast<long>(k * kCifarRecordBytes),
                           kept_bytes.begin() + static_cast<long>((k + 1) * kCifarRecordBytes),
                           src.begin() + static_cast<long>(src_off)));
  }
}

TEST(Cifar, MalformedAndMissingFiles) {
  const auto dir = scratch_dir("cifar_bad");
  {
    std::ofstream out(dir / "short.bin", std::ios::binary);
    out << std::string(3072, '\0');
  }
  try {
    parse_cifar10_file(dir / "short.bin");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedRecord);
  }
  auto bad = make_record(3, 1);
  bad.label = 10;
  write_cifar10_file(dir / "label.bin", {bad});
  try {
    parse_cifar10_file(dir / "label.bin");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedRecord);
  }
  try {
    load_cifar10(dir / "nowhere", {}, 1, 1, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FileNotFound);
  }
}

TEST(Normalize, NoneIsIdentityAndStandardizeUsesTrainStats) {
  const auto data = gen_cluster_classification(30, 2, 4, 2.0, 41);
  const auto same = normalize_inputs(data.train, NormalizationScheme::None);
  EXPECT_EQ(same.inputs, data.train.inputs);

  const auto pair = normalize_inputs(data, NormalizationScheme::GlobalStandardize);
  const double mean = pair.train.inputs.mean();
  const double sd = std::sqrt((pair.train.inputs.array() - mean).square().mean());
  EXPECT_NEAR(mean, 0.0, 1e-10);
  EXPECT_NEAR(sd, 1.0, 1e-10);
  const auto stats = fit_global_standardize(data.train);
  EXPECT_NEAR(pair.test.inputs(0, 0), (data.test.inputs(0, 0) - stats.mean) / stats.stddev, 1e-15);

  EXPECT_THROW(normalize_inputs(data.test, NormalizationScheme::GlobalStandardize), Error);
}

TEST(Normalize, ConstantInputsRejected) {
  LabeledDataset flat;
  flat.inputs = Matrix::Constant(4, 3, 0.5);
  flat.targets = Vector::Zero(4);
  try {
    normalize_inputs(flat, NormalizationScheme::GlobalStandardize);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroVariance);
  }
}

TEST(ColumnarFormat, RoundTrip) {
  const auto dir = scratch_dir("columnar");
  const auto reg = gen_rbf_regression(7, 3, 0.1, KernelSpec::rbf(), 3);
  write_dataset(dir / "r.csv", reg.train);
  const auto back = read_dataset(dir / "r.csv", Split::Train);
  EXPECT_EQ(back.inputs, reg.train.inputs);
  EXPECT_EQ(back.targets, reg.train.targets);

  const auto cls = gen_cluster_classification(4, 3, 2, 1.0, 3);
  write_dataset(dir / "c.csv", cls.test);
  const auto cback = read_dataset(dir / "c.csv", Split::Test);
  EXPECT_EQ(cback.inputs, cls.test.inputs);
  EXPECT_EQ(cback.labels, cls.test.labels);
  EXPECT_EQ(cback.class_count, 3);

  std::ifstream in(dir / "c.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "x0,x1,label");
}
