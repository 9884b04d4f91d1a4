#include "afos/datahub.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>

#include "afos/rng.hpp"

namespace afos::datahub {

namespace {

std::vector<unsigned char> slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot open " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t at) {
    return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) |
           std::uint32_t{b[at + 3]};
}

}  // namespace

LabeledSet load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, int classes) {
    const auto img = slurp(images);
    const auto lab = slurp(labels);
    if (img.size() < 16) throw DataError("truncated IDX header in " + images.string());
    if (lab.size() < 8) throw DataError("truncated IDX header in " + labels.string());
    if (be32(img, 0) != 0x00000803) throw DataError("bad magic in IDX images file " + images.string());
    if (be32(lab, 0) != 0x00000801) throw DataError("bad magic in IDX labels file " + labels.string());

    const std::size_t n = be32(img, 4), rows = be32(img, 8), cols = be32(img, 12);
    const std::size_t nl = be32(lab, 4);
    if (n != nl)
        throw DataError("count mismatch: " + std::to_string(n) + " images, " + std::to_string(nl) + " labels");
    const std::size_t pixels = rows * cols;
    if (pixels != 0 && n > (img.size() - 16) / pixels) throw DataError("truncated IDX images file " + images.string());
    if (img.size() - 16 != n * pixels) throw DataError("trailing bytes in IDX images file " + images.string());
    if (lab.size() - 8 != n) throw DataError("truncated IDX labels file " + labels.string());

    LabeledSet set;
    set.classes = classes;
    set.images = TensorBundle(Shape{n, rows, cols, 1});
    for (std::size_t i = 0; i < n * pixels; ++i) set.images.data[i] = img[16 + i] / 255.0;
    set.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) set.labels[i] = lab[8 + i];
    set.check();
    return set;
}

LabeledSet load_cifar10(const std::vector<std::filesystem::path>& batches) {
    constexpr std::size_t kPlane = 32 * 32, kRecord = 1 + 3 * kPlane;
    std::vector<std::vector<unsigned char>> raw;
    std::size_t n = 0;
    for (const auto& p : batches) {
        raw.push_back(slurp(p));
        if (raw.back().size() % kRecord != 0)
            throw DataError(p.string() + ": size " + std::to_string(raw.back().size()) + " is not a multiple of 3073");
        n += raw.back().size() / kRecord;
    }
    LabeledSet set;
    set.classes = 10;
    set.images = TensorBundle(Shape{n, 32, 32, 3});
    set.labels.reserve(n);
    std::size_t item = 0;
    for (const auto& bytes : raw)
        for (std::size_t r = 0; r < bytes.size() / kRecord; ++r, ++item) {
            const unsigned char* rec = bytes.data() + r * kRecord;
            set.labels.push_back(rec[0]);
            double* out = set.images.data.data() + item * 3 * kPlane;
            for (std::size_t ch = 0; ch < 3; ++ch)
                for (std::size_t px = 0; px < kPlane; ++px) out[px * 3 + ch] = rec[1 + ch * kPlane + px] / 255.0;
        }
    set.check();
    return set;
}

std::pair<LabeledSet, LabeledSet> split_train_val(const LabeledSet& set, std::size_t val_count, std::uint64_t seed) {
    if (val_count == 0 || val_count >= set.size())
        throw DataError("validation count " + std::to_string(val_count) + " must lie in (0, " +
                        std::to_string(set.size()) + ")");
    std::vector<std::size_t> order(set.size());
    std::iota(order.begin(), order.end(), 0);
    SeededStream rng(seed, "split");
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    const auto cut = static_cast<std::ptrdiff_t>(set.size() - val_count);
    return {set.subset({order.begin(), order.begin() + cut}), set.subset({order.begin() + cut, order.end()})};
}

LabeledSet synth_blobs(int classes, std::size_t per_class, std::size_t dims, double separation, std::uint64_t seed) {
    if (classes <= 0 || dims == 0) throw DataError("synth_blobs needs positive classes and dims");
    const SeededStream root(seed, "blobs");
    SeededStream centre_rng = root.child("centres");
    const auto k = static_cast<std::size_t>(classes);

    // Rejection sampling in a box that grows whenever placement stalls.
    std::vector<std::vector<double>> centres;
    double half_width = separation * std::max(1.0, std::cbrt(static_cast<double>(k)));
    int stalls = 0;
    while (centres.size() < k) {
        std::vector<double> c(dims);
        for (double& v : c) v = centre_rng.uniform(-half_width, half_width);
        const bool far = std::all_of(centres.begin(), centres.end(), [&](const std::vector<double>& o) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < dims; ++j) d2 += (c[j] - o[j]) * (c[j] - o[j]);
            return d2 >= separation * separation;
        });
        if (far) {
            centres.push_back(std::move(c));
            stalls = 0;
        } else if (++stalls > 1000) {
            half_width *= 1.5;
            stalls = 0;
        }
    }

    LabeledSet set;
    set.classes = classes;
    set.images = TensorBundle(Shape{k * per_class, dims});
    SeededStream noise = root.child("noise");
    for (std::size_t i = 0; i < k * per_class; ++i) {
        const std::size_t cls = i % k;
        set.labels.push_back(static_cast<int>(cls));
        for (std::size_t j = 0; j < dims; ++j) set.images.data[i * dims + j] = centres[cls][j] + noise.normal();
    }
    return set;
}

std::vector<std::size_t> label_histogram(const LabeledSet& set) {
    std::vector<std::size_t> h(static_cast<std::size_t>(std::max(set.classes, 0)), 0);
    for (int l : set.labels) ++h.at(static_cast<std::size_t>(l));
    return h;
}

}  // namespace afos::datahub
