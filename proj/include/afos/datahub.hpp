#pragma once

// Dataset loaders (IDX, CIFAR-10 binary), seeded splitting and a synthetic
// Gaussian-blob generator for small runs.

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "afos/tensor.hpp"

namespace afos::datahub {

// MNIST-style IDX pair. Pixels scaled by 1/255, shape (n, rows, cols, 1).
LabeledSet load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, int classes = 10);

// CIFAR-10 binary batches, concatenated in order. Shape (n, 32, 32, 3).
LabeledSet load_cifar10(const std::vector<std::filesystem::path>& batches);

// Seeded uniform shuffle, then the last val_count items become validation.
std::pair<LabeledSet, LabeledSet> split_train_val(const LabeledSet& set, std::size_t val_count = 5000,
                                                  std::uint64_t seed = 0);

// Gaussian clusters with unit noise around seeded centres whose pairwise
// distance is at least `separation`. Shape (classes * per_class, dims).
LabeledSet synth_blobs(int classes, std::size_t per_class, std::size_t dims, double separation, std::uint64_t seed);

// Class counts, indexed by label.
std::vector<std::size_t> label_histogram(const LabeledSet& set);

}  // namespace afos::datahub
