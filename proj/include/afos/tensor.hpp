#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "afos/error.hpp"

namespace afos {

using Shape = std::vector<std::size_t>;

inline std::size_t element_count(const Shape& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string to_string(const Shape& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? ", " : "") + std::to_string(s[i]);
    return out + ")";
}

// Dense row-major array of doubles with its shape.
struct TensorBundle {
    Shape shape;
    std::vector<double> data;

    TensorBundle() = default;
    explicit TensorBundle(Shape s) : shape(std::move(s)), data(element_count(shape), 0.0) {}
    TensorBundle(Shape s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != element_count(shape))
            throw ShapeError("tensor data length " + std::to_string(data.size()) + " does not match shape " +
                             afos::to_string(shape));
    }

    // Leading dimension (number of samples for batched tensors).
    std::size_t rows() const { return shape.empty() ? 0 : shape.front(); }
    Shape sample_shape() const { return shape.empty() ? Shape{} : Shape(shape.begin() + 1, shape.end()); }
    std::size_t row_size() const { return element_count(sample_shape()); }
};

// Images (count x H x W x C, or count x D for feature vectors) and labels.
struct LabeledSet {
    TensorBundle images;
    std::vector<int> labels;
    int classes = 0;

    std::size_t size() const { return labels.size(); }
    // Throws DataError when counts disagree or a label is out of range.
    void check() const {
        if (images.rows() != labels.size())
            throw DataError("image count " + std::to_string(images.rows()) + " != label count " +
                            std::to_string(labels.size()));
        for (int l : labels)
            if (l < 0 || l >= classes) throw DataError("label " + std::to_string(l) + " outside [0, " +
                                                       std::to_string(classes) + ")");
    }
    LabeledSet subset(const std::vector<std::size_t>& indices) const {
        LabeledSet out;
        out.classes = classes;
        Shape s = images.shape;
        if (s.empty()) s = {0};
        s[0] = indices.size();
        const std::size_t stride = images.row_size();
        out.images = TensorBundle(s);
        for (std::size_t k = 0; k < indices.size(); ++k) {
            std::copy_n(images.data.begin() + static_cast<std::ptrdiff_t>(indices[k] * stride), stride,
                        out.images.data.begin() + static_cast<std::ptrdiff_t>(k * stride));
            out.labels.push_back(labels[indices[k]]);
        }
        return out;
    }
};

}  // namespace afos
