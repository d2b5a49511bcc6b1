#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pfo/data.hpp"
#include "pfo/oracles.hpp"

namespace pfo {

/// MNIST IDX pair: big-endian header words, image magic 0x00000803, label magic
/// 0x00000801. Pixels are scaled to [0, 1] and digits 0..9 become labels 1..10.
/// `limit` > 0 keeps only the first `limit` samples.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 Index limit = 0);

/// CIFAR-10 binary batches: 3073-byte records, label byte then 3072 pixel bytes.
Dataset load_cifar10(std::span<const std::filesystem::path> batches, Index limit = 0);

/// Gaussian class clusters: class c is centred at separation * (+-e_k) with unit-variance
/// isotropic noise; labels are uniform over 1..C.
Dataset synthetic_dataset(Index d, int num_classes, Index n, double separation, std::uint64_t seed);

/// Zero-mean Gaussian perturbation vectors for the quadratic model (single class).
Dataset synthetic_perturbations(Index d, Index n, double scale, std::uint64_t seed);

/// CSV with header "label,f1,...,fd".
void export_csv(const Dataset& ds, const std::filesystem::path& path);
Dataset import_csv(const std::filesystem::path& path, int num_classes = 0);

enum class StreamMode { Stochastic, Adversarial };

const char* to_string(StreamMode mode);
StreamMode parse_stream_mode(const std::string& name);

/// Round batches as dataset row indices. Stochastic rounds are drawn uniformly with
/// replacement from a per-round key, so a longer horizon extends a shorter one.
/// Adversarial rounds are consecutive blocks of the label-sorted (stable) data.
struct Stream {
  StreamMode mode = StreamMode::Stochastic;
  Index batch_size = 1;
  std::int64_t T = 1;
  std::uint64_t seed = 0;
  std::vector<std::vector<Index>> batches;
};

Stream build_stream(const Dataset& ds, StreamMode mode, Index batch_size, std::int64_t T,
                    std::uint64_t seed);

std::vector<RoundLoss> make_rounds(const DatasetPtr& ds, const Model& model, const Stream& stream);

}  // namespace pfo
