#include "pfo/stream.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pfo/rng.hpp"

namespace pfo {
namespace {

constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;
constexpr std::size_t kCifarPixels = 3072;
constexpr std::size_t kCifarRecord = kCifarPixels + 1;

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

std::uint32_t be32(const std::vector<unsigned char>& buf, std::size_t off) {
  return (std::uint32_t{buf[off]} << 24) | (std::uint32_t{buf[off + 1]} << 16) |
         (std::uint32_t{buf[off + 2]} << 8) | std::uint32_t{buf[off + 3]};
}

void need_bytes(const std::filesystem::path& path, std::size_t expected, std::size_t actual) {
  if (actual < expected) {
    fail(ErrorCode::Format, path.string() + ": truncated, expected " + std::to_string(expected) +
                                " bytes but found " + std::to_string(actual));
  }
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 Index limit) {
  const auto img = read_file(images);
  const auto lab = read_file(labels);
  need_bytes(images, 16, img.size());
  need_bytes(labels, 8, lab.size());
  if (be32(img, 0) != kIdxImageMagic) {
    fail(ErrorCode::Format, images.string() + ": bad image magic 0x" + [&] {
      std::ostringstream os;
      os << std::hex << be32(img, 0);
      return os.str();
    }() + " (expected 0x00000803)");
  }
  if (be32(lab, 0) != kIdxLabelMagic) {
    fail(ErrorCode::Format, labels.string() + ": bad label magic (expected 0x00000801)");
  }
  const std::size_t n_img = be32(img, 4);
  const std::size_t rows = be32(img, 8);
  const std::size_t cols = be32(img, 12);
  const std::size_t n_lab = be32(lab, 4);
  if (n_img != n_lab) {
    fail(ErrorCode::Format, "idx count mismatch: " + std::to_string(n_img) + " images vs " +
                                std::to_string(n_lab) + " labels");
  }
  const std::size_t d = rows * cols;
  require(d > 0, ErrorCode::Format, images.string() + ": zero image size");
  need_bytes(images, 16 + n_img * d, img.size());
  need_bytes(labels, 8 + n_lab, lab.size());

  std::size_t n = n_img;
  if (limit > 0) n = std::min(n, static_cast<std::size_t>(limit));
  Dataset ds;
  ds.name = "mnist";
  ds.d = static_cast<Index>(d);
  ds.num_classes = 10;
  ds.features.resize(static_cast<Index>(n), ds.d);
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* px = img.data() + 16 + i * d;
    for (std::size_t j = 0; j < d; ++j) {
      ds.features(static_cast<Index>(i), static_cast<Index>(j)) = static_cast<float>(px[j]) / 255.0f;
    }
    const int digit = lab[8 + i];
    require(digit <= 9, ErrorCode::Format,
            labels.string() + ": label " + std::to_string(digit) + " outside 0..9");
    ds.labels[i] = digit + 1;
  }
  ds.validate();
  return ds;
}

Dataset load_cifar10(std::span<const std::filesystem::path> batches, Index limit) {
  require(!batches.empty(), ErrorCode::InvalidArgument, "cifar10: no batch files given");
  std::vector<float> pixels;
  std::vector<int> labels;
  for (const auto& path : batches) {
    const auto buf = read_file(path);
    if (buf.empty() || buf.size() % kCifarRecord != 0) {
      fail(ErrorCode::Format, path.string() + ": size " + std::to_string(buf.size()) +
                                  " is not a positive multiple of the 3073-byte record length");
    }
    for (std::size_t off = 0; off < buf.size(); off += kCifarRecord) {
      if (limit > 0 && static_cast<Index>(labels.size()) >= limit) break;
      const int label = buf[off];
      require(label <= 9, ErrorCode::Format,
              path.string() + ": label " + std::to_string(label) + " outside 0..9");
      labels.push_back(label + 1);
      for (std::size_t j = 0; j < kCifarPixels; ++j) {
        pixels.push_back(static_cast<float>(buf[off + 1 + j]) / 255.0f);
      }
    }
  }
  Dataset ds;
  ds.name = "cifar10";
  ds.d = static_cast<Index>(kCifarPixels);
  ds.num_classes = 10;
  ds.features = Eigen::Map<Dataset::FeatureMatrix>(pixels.data(), static_cast<Index>(labels.size()),
                                                   ds.d);
  ds.labels = std::move(labels);
  ds.validate();
  return ds;
}

Dataset synthetic_dataset(Index d, int num_classes, Index n, double separation, std::uint64_t seed) {
  require(d >= 1 && num_classes >= 1 && n >= 1, ErrorCode::InvalidArgument,
          "synthetic dataset: d, C and n must be >= 1");
  auto rng = keyed_engine(seed, kTagData);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> label(1, num_classes);
  Dataset ds;
  ds.name = "synthetic";
  ds.d = d;
  ds.num_classes = num_classes;
  ds.features.resize(n, d);
  ds.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const int y = label(rng);
    ds.labels[static_cast<std::size_t>(i)] = y;
    for (Index j = 0; j < d; ++j) ds.features(i, j) = static_cast<float>(gauss(rng));
    const Index axis = (y - 1) % d;
    const double sign = ((y - 1) / d) % 2 == 0 ? 1.0 : -1.0;
    ds.features(i, axis) += static_cast<float>(sign * separation);
  }
  ds.validate();
  return ds;
}

Dataset synthetic_perturbations(Index d, Index n, double scale, std::uint64_t seed) {
  require(d >= 1 && n >= 1 && scale >= 0.0, ErrorCode::InvalidArgument,
          "synthetic perturbations: d, n >= 1 and scale >= 0 required");
  auto rng = keyed_engine(seed, kTagData, 1);
  std::normal_distribution<double> gauss(0.0, scale > 0.0 ? scale : 1.0);
  Dataset ds;
  ds.name = "quadratic";
  ds.d = d;
  ds.num_classes = 1;
  ds.features.resize(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) ds.features(i, j) = scale > 0.0 ? static_cast<float>(gauss(rng)) : 0.0f;
  }
  ds.labels.assign(static_cast<std::size_t>(n), 1);
  ds.validate();
  return ds;
}

void export_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << "label";
  for (Index j = 1; j <= ds.d; ++j) out << ",f" << j;
  out << '\n';
  out.precision(9);
  for (Index i = 0; i < ds.size(); ++i) {
    out << ds.labels[static_cast<std::size_t>(i)];
    for (Index j = 0; j < ds.d; ++j) out << ',' << ds.features(i, j);
    out << '\n';
  }
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

Dataset import_csv(const std::filesystem::path& path, int num_classes) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::Format, path.string() + ": empty file");
  const Index d = std::count(line.begin(), line.end(), ',');
  if (line.rfind("label", 0) != 0 || d < 1) {
    fail(ErrorCode::Format, path.string() + ": header must be \"label,f1,...,fd\"");
  }
  std::vector<Sample> samples;
  int max_label = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    Sample s;
    s.features.resize(d);
    Index col = -1;
    while (std::getline(row, cell, ',')) {
      try {
        if (col < 0) {
          s.label = std::stoi(cell);
        } else if (col < d) {
          s.features(col) = std::stod(cell);
        }
      } catch (const std::exception&) {
        fail(ErrorCode::Format, path.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
      ++col;
    }
    if (col != d) {
      fail(ErrorCode::Format, path.string() + ":" + std::to_string(lineno) + ": expected " +
                                  std::to_string(d + 1) + " fields");
    }
    max_label = std::max(max_label, s.label);
    samples.push_back(std::move(s));
  }
  return make_dataset(path.stem().string(), num_classes > 0 ? num_classes : max_label, samples);
}

const char* to_string(StreamMode mode) {
  return mode == StreamMode::Stochastic ? "stochastic" : "adversarial";
}

StreamMode parse_stream_mode(const std::string& name) {
  if (name == "stochastic") return StreamMode::Stochastic;
  if (name == "adversarial") return StreamMode::Adversarial;
  fail(ErrorCode::Config, "unknown mode '" + name + "' (expected stochastic or adversarial)");
}

Stream build_stream(const Dataset& ds, StreamMode mode, Index batch_size, std::int64_t T,
                    std::uint64_t seed) {
  require(batch_size >= 1, ErrorCode::InvalidArgument, "stream: batch size must be >= 1");
  require(T >= 1, ErrorCode::InvalidArgument, "stream: T must be >= 1");
  require(ds.size() >= 1, ErrorCode::InvalidArgument, "stream: empty dataset");
  Stream s{mode, batch_size, T, seed, {}};
  s.batches.reserve(static_cast<std::size_t>(T));
  if (mode == StreamMode::Stochastic) {
    std::uniform_int_distribution<Index> pick(0, ds.size() - 1);
    for (std::int64_t t = 1; t <= T; ++t) {
      auto rng = keyed_engine(derive_key(seed, kTagStream), static_cast<std::uint64_t>(t));
      std::vector<Index> batch(static_cast<std::size_t>(batch_size));
      for (auto& i : batch) i = pick(rng);
      s.batches.push_back(std::move(batch));
    }
    return s;
  }
  const auto needed = static_cast<std::int64_t>(batch_size) * T;
  if (needed > ds.size()) {
    fail(ErrorCode::InvalidArgument, "adversarial stream needs B*T = " + std::to_string(needed) +
                                         " samples but the dataset has " + std::to_string(ds.size()));
  }
  std::vector<Index> order(static_cast<std::size_t>(ds.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return ds.labels[static_cast<std::size_t>(a)] < ds.labels[static_cast<std::size_t>(b)];
  });
  for (std::int64_t t = 0; t < T; ++t) {
    const auto begin = order.begin() + t * batch_size;
    s.batches.emplace_back(begin, begin + batch_size);
  }
  return s;
}

std::vector<RoundLoss> make_rounds(const DatasetPtr& ds, const Model& model, const Stream& stream) {
  std::vector<RoundLoss> rounds;
  rounds.reserve(stream.batches.size());
  for (const auto& b : stream.batches) rounds.emplace_back(ds, model, b);
  return rounds;
}

}  // namespace pfo
