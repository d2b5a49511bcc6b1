#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "pfo/metrics.hpp"
#include "pfo/stream.hpp"

using namespace pfo;
using pfo::test::vec;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("pfo_stream_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void put_be32(std::vector<unsigned char>& buf, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) buf.push_back(static_cast<unsigned char>(v >> s));
}

void write_bytes(const fs::path& p, const std::vector<unsigned char>& buf) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

// Test writer for the IDX pair: pixel i of image k is (k * 31 + i) mod 256.
void write_idx(const fs::path& images, const fs::path& labels, std::vector<unsigned char> digits,
               std::size_t drop_tail = 0) {
  std::vector<unsigned char> img;
  put_be32(img, 0x00000803);
  put_be32(img, static_cast<std::uint32_t>(digits.size()));
  put_be32(img, 28);
  put_be32(img, 28);
  for (std::size_t k = 0; k < digits.size(); ++k) {
    for (std::size_t i = 0; i < 784; ++i) img.push_back(static_cast<unsigned char>((k * 31 + i) % 256));
  }
  img.resize(img.size() - drop_tail);
  write_bytes(images, img);
  std::vector<unsigned char> lab;
  put_be32(lab, 0x00000801);
  put_be32(lab, static_cast<std::uint32_t>(digits.size()));
  for (auto d : digits) lab.push_back(d);
  write_bytes(labels, lab);
}

}  // namespace

TEST_CASE("IDX round trip") {
  TempDir dir;
  write_idx(dir.path / "img", dir.path / "lab", {7, 0});
  const Dataset ds = load_idx(dir.path / "img", dir.path / "lab");
  CHECK(ds.size() == 2);
  CHECK(ds.d == 784);
  CHECK(ds.num_classes == 10);
  CHECK(ds.labels == std::vector<int>{8, 1});
  for (Index i = 0; i < 784; ++i) {
    CHECK(ds.features(1, i) == doctest::Approx(static_cast<double>((31 + i) % 256) / 255.0));
  }
  CHECK(load_idx(dir.path / "img", dir.path / "lab", 1).size() == 1);
}

TEST_CASE("IDX errors") {
  TempDir dir;
  write_idx(dir.path / "img", dir.path / "lab", {1, 2}, 10);
  try {
    load_idx(dir.path / "img", dir.path / "lab");
    FAIL("expected a truncation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Format);
    const std::string msg = e.what();
    CHECK(msg.find("expected " + std::to_string(16 + 2 * 784)) != std::string::npos);
    CHECK(msg.find("found " + std::to_string(16 + 2 * 784 - 10)) != std::string::npos);
  }
  write_idx(dir.path / "img", dir.path / "lab", {1, 2});
  CHECK_THROWS_AS(load_idx(dir.path / "lab", dir.path / "img"), Error);
  write_idx(dir.path / "img2", dir.path / "lab2", {1, 2, 3});
  CHECK_THROWS_AS(load_idx(dir.path / "img", dir.path / "lab2"), Error);
  CHECK_THROWS_AS(load_idx(dir.path / "missing", dir.path / "lab"), Error);
}

TEST_CASE("CIFAR-10 round trip and record length errors") {
  TempDir dir;
  std::vector<unsigned char> rec{3};
  for (int i = 0; i < 3072; ++i) rec.push_back(static_cast<unsigned char>(i % 256));
  write_bytes(dir.path / "b1.bin", rec);
  const std::vector<fs::path> one{dir.path / "b1.bin"};
  const Dataset ds = load_cifar10(one);
  CHECK(ds.size() == 1);
  CHECK(ds.d == 3072);
  CHECK(ds.labels[0] == 4);
  CHECK(ds.features(0, 255) == doctest::Approx(1.0));
  rec.pop_back();
  write_bytes(dir.path / "bad.bin", rec);
  const std::vector<fs::path> bad{dir.path / "bad.bin"};
  CHECK_THROWS_AS(load_cifar10(bad), Error);
}

TEST_CASE("real datasets when present") {
  const char* root = std::getenv("PFO_DATA_DIR");
  if (root == nullptr) return;
  const fs::path dir(root);
  if (fs::exists(dir / "train-images-idx3-ubyte") && fs::exists(dir / "train-labels-idx1-ubyte")) {
    const Dataset ds = load_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
    CHECK(ds.size() == 60000);
    CHECK(ds.d == 784);
    CHECK(ds.num_classes == 10);
  }
  std::vector<fs::path> batches;
  for (int i = 1; i <= 5; ++i) {
    batches.push_back(dir / "cifar-10-batches-bin" / ("data_batch_" + std::to_string(i) + ".bin"));
  }
  if (fs::exists(batches[0])) {
    const Dataset ds = load_cifar10(batches);
    CHECK(ds.size() == 50000);
    CHECK(ds.num_classes == 10);
  }
}

TEST_CASE("synthetic datasets") {
  const Dataset a = synthetic_dataset(4, 3, 50, 1.0, 9);
  const Dataset b = synthetic_dataset(4, 3, 50, 1.0, 9);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  CHECK(synthetic_dataset(4, 3, 50, 1.0, 10).features != a.features);
  CHECK(synthetic_dataset(4, 3, 1, 1.0, 9).size() == 1);
}

TEST_CASE("uninformative labels give a logistic optimum near n log C") {
  const Index n = 2000;
  auto ds = std::make_shared<Dataset>(synthetic_dataset(2, 3, n, 0.0, 5));
  const RoundLoss all = test::logistic_all(ds);
  std::vector<RoundLoss> one{all};
  const auto c = solve_comparator(one, FeasibleSet::column_l1_ball(5.0, 2, 3), 5000);
  const double uniform = static_cast<double>(n) * std::log(3.0);
  // Monte-Carlo oracle: the label marginal is uniform, so only sampling noise separates
  // the optimum from the uniform predictor.
  CHECK(c.objective_value <= uniform);
  CHECK(c.objective_value >= 0.99 * uniform);
}

TEST_CASE("adversarial stream sorts by label and chunks") {
  auto ds = test::dataset_of(2, {Sample{vec({0}), 2}, Sample{vec({1}), 1}, Sample{vec({2}), 2},
                                 Sample{vec({3}), 1}});
  const Stream s = build_stream(*ds, StreamMode::Adversarial, 2, 2, 1);
  REQUIRE(s.batches.size() == 2);
  CHECK(s.batches[0] == std::vector<Index>{1, 3});
  CHECK(s.batches[1] == std::vector<Index>{0, 2});
  CHECK_THROWS_AS(build_stream(*ds, StreamMode::Adversarial, 2, 3, 1), Error);
}

TEST_CASE("stochastic streams are deterministic and prefix consistent") {
  const Dataset ds = synthetic_dataset(3, 2, 100, 1.0, 1);
  const Stream a = build_stream(ds, StreamMode::Stochastic, 5, 20, 7);
  const Stream b = build_stream(ds, StreamMode::Stochastic, 5, 20, 7);
  const Stream longer = build_stream(ds, StreamMode::Stochastic, 5, 40, 7);
  CHECK(a.batches == b.batches);
  for (std::size_t t = 0; t < 20; ++t) CHECK(longer.batches[t] == a.batches[t]);
  CHECK(build_stream(ds, StreamMode::Stochastic, 5, 20, 8).batches != a.batches);
  for (const auto& batch : a.batches) {
    CHECK(batch.size() == 5);
    for (Index i : batch) CHECK((i >= 0 && i < 100));
  }
}

TEST_CASE("make_rounds builds one loss per batch") {
  auto ds = std::make_shared<Dataset>(synthetic_dataset(3, 2, 100, 1.0, 1));
  const Stream s = build_stream(*ds, StreamMode::Stochastic, 5, 6, 7);
  const auto rounds = make_rounds(ds, MulticlassLogistic{}, s);
  REQUIRE(rounds.size() == 6);
  CHECK(rounds[2].batch_size() == 5);
  CHECK(rounds[2].point_rows() == 3);
  CHECK(rounds[2].point_cols() == 2);
}

TEST_CASE("CSV export and import round trip") {
  TempDir dir;
  const Dataset ds = synthetic_dataset(3, 4, 20, 1.0, 2);
  export_csv(ds, dir.path / "d.csv");
  const Dataset back = import_csv(dir.path / "d.csv", 4);
  CHECK(back.labels == ds.labels);
  CHECK(back.features == ds.features);
  std::ofstream(dir.path / "bad.csv") << "label,f1\n1,abc\n";
  CHECK_THROWS_AS(import_csv(dir.path / "bad.csv"), Error);
}

TEST_CASE("stream mode names") {
  CHECK(parse_stream_mode("adversarial") == StreamMode::Adversarial);
  CHECK(parse_stream_mode(to_string(StreamMode::Stochastic)) == StreamMode::Stochastic);
  CHECK_THROWS_AS(parse_stream_mode("random"), Error);
}
