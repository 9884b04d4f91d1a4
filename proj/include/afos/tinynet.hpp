#pragma once

// A small reverse-mode network trainer: 3x3 same-padded convolution, 2x2
// max-pool, inverted dropout, flatten and dense layers, trained with
// softmax cross-entropy and SGD with momentum. The activation function is a
// funcdsl expression applied after every layer that declares one.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "afos/funcdsl.hpp"
#include "afos/kernels.hpp"
#include "afos/rng.hpp"
#include "afos/tensor.hpp"

namespace afos::tinynet {

using funcdsl::Expr;
using kernels::Backend;

enum class LayerKind : std::uint8_t { conv, maxpool, dropout, flatten, dense };

struct LayerSpec {
    LayerKind kind = LayerKind::dense;
    int units = 0;      // filters for conv, outputs for dense
    double rate = 0.0;  // dropout only
    std::optional<Expr> activation;

    static LayerSpec conv(int filters, std::optional<Expr> act = std::nullopt) {
        return {LayerKind::conv, filters, 0.0, std::move(act)};
    }
    static LayerSpec maxpool() { return {LayerKind::maxpool, 0, 0.0, std::nullopt}; }
    static LayerSpec dropout(double rate) { return {LayerKind::dropout, 0, rate, std::nullopt}; }
    static LayerSpec flatten() { return {LayerKind::flatten, 0, 0.0, std::nullopt}; }
    static LayerSpec dense(int units, std::optional<Expr> act = std::nullopt) {
        return {LayerKind::dense, units, 0.0, std::move(act)};
    }

    std::string describe() const;
};

// The base CNN: conv 28, conv 32, pool, dropout, conv 64 x2, pool, dropout,
// conv 128 x2, pool, dropout, flatten, dense(classes).
std::vector<LayerSpec> phi_network(int classes, const Expr& act, double dropout = 0.25);

// dense(hidden) x2 then dense(classes); the CI-scale network.
std::vector<LayerSpec> desk_network(int classes, const Expr& act, int hidden = 32);

struct EpochStats {
    double train_loss = 0.0;
    double val_accuracy = 0.0;
    double val_loss = 0.0;
};

class Model {
public:
    // He-uniform weights in +-sqrt(6 / fan_in), zero biases.
    static Model build(std::vector<LayerSpec> specs, Shape input_shape, std::uint64_t seed);

    const Shape& input_shape() const noexcept { return input_shape_; }
    // Per-sample output shape of every layer.
    std::vector<Shape> output_shapes() const;
    const std::vector<LayerSpec>& specs() const noexcept { return specs_; }

    // Batched forward pass; caches what backward() needs. Dropout is only
    // active when training, using `dropout_rng` (a fixed stream if null).
    TensorBundle forward(const TensorBundle& batch, bool training, SeededStream* dropout_rng = nullptr);
    // Gradient w.r.t. the logits of the last forward() call; overwrites
    // the stored parameter gradients.
    void backward(const TensorBundle& logit_grad);

    std::vector<std::span<double>> parameters();
    std::vector<std::span<const double>> gradients() const;
    std::size_t parameter_count() const;

    void set_backend(Backend b) noexcept { backend_ = b; }
    Backend backend() const noexcept { return backend_; }

    // Versioned little-endian binary format.
    void save(const std::filesystem::path& path) const;
    static Model load(const std::filesystem::path& path);

    struct Layer;
    Model();
    Model(Model&&) noexcept;
    Model(const Model&);
    Model& operator=(Model&&) noexcept;
    Model& operator=(const Model&);
    ~Model();

private:
    std::vector<LayerSpec> specs_;
    Shape input_shape_;
    std::vector<Layer> layers_;
    Backend backend_ = Backend::parallel;
};

struct LossResult {
    double loss = 0.0;
    TensorBundle grad;
};

// Mean softmax cross-entropy over the batch and its gradient w.r.t. the
// logits, (softmax - one_hot) / batch.
LossResult loss_and_grad(const TensorBundle& logits, const TensorBundle& one_hot_targets);

TensorBundle one_hot(std::span<const int> labels, int classes);

struct Metrics {
    double accuracy = 0.0;
    double loss = 0.0;
};

// Inference-mode accuracy and mean loss over a labelled set.
Metrics evaluate(Model& model, const LabeledSet& set, std::size_t batch_size = 256);

struct TrainConfig {
    int epochs = 15;
    int batch_size = 64;
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::uint64_t seed = 0;
    double dropout_rate = 0.25;
    double abort_threshold = 0.25;  // epoch-1 validation accuracy floor
};

enum class AbortReason : std::uint8_t { none, nan, threshold };

struct TrainOutcome {
    double v_a = 0.0;
    double v_l = 0.0;
    std::vector<EpochStats> history;
    AbortReason abort = AbortReason::none;

    bool operator==(const TrainOutcome& o) const;
};

TrainOutcome train(Model& model, const LabeledSet& train_set, const LabeledSet& val_set, const TrainConfig& cfg);

}  // namespace afos::tinynet
