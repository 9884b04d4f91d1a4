#include "afos/tinynet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

namespace afos::tinynet {

namespace k = afos::kernels;

std::string LayerSpec::describe() const {
    std::string s;
    switch (kind) {
        case LayerKind::conv: s = "conv(" + std::to_string(units) + ")"; break;
        case LayerKind::maxpool: s = "maxpool"; break;
        case LayerKind::dropout: s = "dropout(" + std::to_string(rate) + ")"; break;
        case LayerKind::flatten: s = "flatten"; break;
        case LayerKind::dense: s = "dense(" + std::to_string(units) + ")"; break;
    }
    if (activation) s += " act=" + funcdsl::format(*activation);
    return s;
}

std::vector<LayerSpec> phi_network(int classes, const Expr& act, double dropout) {
    return {
        LayerSpec::conv(28, act),  LayerSpec::conv(32, act),  LayerSpec::maxpool(), LayerSpec::dropout(dropout),
        LayerSpec::conv(64, act),  LayerSpec::conv(64, act),  LayerSpec::maxpool(), LayerSpec::dropout(dropout),
        LayerSpec::conv(128, act), LayerSpec::conv(128, act), LayerSpec::maxpool(), LayerSpec::dropout(dropout),
        LayerSpec::flatten(),      LayerSpec::dense(classes),
    };
}

std::vector<LayerSpec> desk_network(int classes, const Expr& act, int hidden) {
    return {LayerSpec::dense(hidden, act), LayerSpec::dense(hidden, act), LayerSpec::dense(classes)};
}

// ---------------------------------------------------------------------------

struct Model::Layer {
    LayerSpec spec;
    Shape in, out;  // per-sample shapes
    std::vector<double> w, b, gw, gb;

    // Caches from the last forward pass.
    std::size_t batch = 0;
    std::vector<double> input;  // dense input or im2col matrix for conv
    std::vector<double> slope;  // activation derivative at the pre-activation
    std::vector<double> mask;   // dropout multipliers
    std::vector<std::size_t> argmax;
    bool trained_pass = false;
};

Model::Model() = default;
Model::Model(Model&&) noexcept = default;
Model::Model(const Model&) = default;
Model& Model::operator=(Model&&) noexcept = default;
Model& Model::operator=(const Model&) = default;
Model::~Model() = default;

namespace {

Shape infer_shape(const LayerSpec& spec, const Shape& in, std::size_t index) {
    auto fail = [&](const std::string& why) -> Shape {
        throw ShapeError("layer " + std::to_string(index) + " (" + spec.describe() + "): " + why + ", input " +
                         to_string(in));
    };
    switch (spec.kind) {
        case LayerKind::conv:
            if (in.size() != 3) return fail("convolution needs an H x W x C input");
            if (spec.units <= 0) return fail("filter count must be positive");
            return {in[0], in[1], static_cast<std::size_t>(spec.units)};
        case LayerKind::maxpool:
            if (in.size() != 3) return fail("max-pool needs an H x W x C input");
            if (in[0] < 2 || in[1] < 2) return fail("spatial size below the 2x2 window");
            return {in[0] / 2, in[1] / 2, in[2]};
        case LayerKind::dropout:
            if (!(spec.rate >= 0.0 && spec.rate < 1.0)) return fail("dropout rate must lie in [0, 1)");
            return in;
        case LayerKind::flatten:
            return in.size() == 1 ? in : Shape{1, 1, element_count(in)};
        case LayerKind::dense: {
            if (spec.units <= 0) return fail("unit count must be positive");
            const auto u = static_cast<std::size_t>(spec.units);
            if (in.size() == 1) return {u};
            if (in.size() == 3 && in[0] == 1 && in[1] == 1) return {1, 1, u};
            return fail("dense needs a flattened input");
        }
    }
    return in;
}

std::size_t fan_in(const LayerSpec& spec, const Shape& in) {
    return spec.kind == LayerKind::conv ? 9 * in[2] : element_count(in);
}

k::ImageDims dims_of(std::size_t n, const Shape& s) { return {n, s[0], s[1], s[2]}; }

}  // namespace

Model Model::build(std::vector<LayerSpec> specs, Shape input_shape, std::uint64_t seed) {
    if (specs.empty()) throw ShapeError("network has no layers");
    if (input_shape.empty() || element_count(input_shape) == 0) throw ShapeError("empty input shape");
    Model m;
    m.specs_ = std::move(specs);
    m.input_shape_ = std::move(input_shape);
    const SeededStream init(seed, "init");
    Shape cur = m.input_shape_;
    for (std::size_t i = 0; i < m.specs_.size(); ++i) {
        Layer L;
        L.spec = m.specs_[i];
        L.in = cur;
        L.out = infer_shape(L.spec, cur, i);
        if (L.spec.kind == LayerKind::conv || L.spec.kind == LayerKind::dense) {
            const std::size_t fin = fan_in(L.spec, L.in);
            const std::size_t units = static_cast<std::size_t>(L.spec.units);
            const double limit = std::sqrt(6.0 / static_cast<double>(fin));
            SeededStream rng = init.child("layer" + std::to_string(i));
            L.w.resize(fin * units);
            for (double& v : L.w) v = rng.uniform(-limit, limit);
            L.b.assign(units, 0.0);
            L.gw.assign(L.w.size(), 0.0);
            L.gb.assign(L.b.size(), 0.0);
        }
        cur = L.out;
        m.layers_.push_back(std::move(L));
    }
    return m;
}

std::vector<Shape> Model::output_shapes() const {
    std::vector<Shape> out;
    for (const auto& L : layers_) out.push_back(L.out);
    return out;
}

TensorBundle Model::forward(const TensorBundle& batch, bool training, SeededStream* dropout_rng) {
    if (batch.sample_shape() != input_shape_)
        throw ShapeError("batch sample shape " + to_string(batch.sample_shape()) + " does not match model input " +
                         to_string(input_shape_));
    const std::size_t n = batch.rows();
    const bool par = backend_ == Backend::parallel;
    SeededStream fallback(0, "dropout");
    SeededStream& drng = dropout_rng ? *dropout_rng : fallback;

    std::vector<double> cur = batch.data;
    for (auto& L : layers_) {
        L.batch = n;
        L.trained_pass = training;
        const std::size_t out_size = n * element_count(L.out);
        std::vector<double> next(out_size);
        switch (L.spec.kind) {
            case LayerKind::conv: {
                const auto d = dims_of(n, L.in);
                const std::size_t width = 9 * d.c, filters = L.out[2];
                L.input.resize(d.pixels() * width);
                par ? k::parallel::im2col3x3(cur, d, L.input) : k::serial::im2col3x3(cur, d, L.input);
                par ? k::parallel::matmul(L.input, L.w, next, d.pixels(), width, filters)
                    : k::serial::matmul(L.input, L.w, next, d.pixels(), width, filters);
                par ? k::parallel::add_row_bias(next, L.b, d.pixels(), filters)
                    : k::serial::add_row_bias(next, L.b, d.pixels(), filters);
                break;
            }
            case LayerKind::dense: {
                const std::size_t fin = element_count(L.in), units = element_count(L.out);
                L.input = cur;
                par ? k::parallel::matmul(L.input, L.w, next, n, fin, units)
                    : k::serial::matmul(L.input, L.w, next, n, fin, units);
                par ? k::parallel::add_row_bias(next, L.b, n, units) : k::serial::add_row_bias(next, L.b, n, units);
                break;
            }
            case LayerKind::maxpool: {
                L.argmax.resize(out_size);
                par ? k::parallel::maxpool2x2(cur, dims_of(n, L.in), next, L.argmax)
                    : k::serial::maxpool2x2(cur, dims_of(n, L.in), next, L.argmax);
                break;
            }
            case LayerKind::dropout: {
                L.mask.assign(out_size, 1.0);
                if (training && L.spec.rate > 0.0) {
                    const double keep = 1.0 - L.spec.rate;
                    for (double& v : L.mask) v = drng.bernoulli(keep) ? 1.0 / keep : 0.0;
                }
                for (std::size_t i = 0; i < out_size; ++i) next[i] = cur[i] * L.mask[i];
                break;
            }
            case LayerKind::flatten: next = cur; break;
        }
        if (L.spec.activation) {
            L.slope.resize(out_size);
            std::vector<double> pre = std::move(next);
            next.assign(out_size, 0.0);
            par ? k::parallel::activate(*L.spec.activation, pre, next, L.slope)
                : k::serial::activate(*L.spec.activation, pre, next, L.slope);
        }
        cur = std::move(next);
    }
    Shape out_shape{n};
    const Shape& last = layers_.back().out;
    out_shape.insert(out_shape.end(), last.begin(), last.end());
    return TensorBundle(out_shape, std::move(cur));
}

void Model::backward(const TensorBundle& logit_grad) {
    const bool par = backend_ == Backend::parallel;
    std::vector<double> grad = logit_grad.data;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
        Layer& L = *it;
        const std::size_t n = L.batch;
        if (grad.size() != n * element_count(L.out)) throw ShapeError("gradient does not match last forward pass");
        if (L.spec.activation)
            for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= L.slope[i];
        std::vector<double> prev(n * element_count(L.in));
        switch (L.spec.kind) {
            case LayerKind::conv: {
                const auto d = dims_of(n, L.in);
                const std::size_t width = 9 * d.c, filters = L.out[2];
                std::vector<double> dcols(d.pixels() * width);
                if (par) {
                    k::parallel::matmul_at_b(L.input, grad, L.gw, d.pixels(), width, filters);
                    k::parallel::column_sums(grad, L.gb, d.pixels(), filters);
                    k::parallel::matmul_a_bt(grad, L.w, dcols, d.pixels(), filters, width);
                    k::parallel::col2im3x3(dcols, d, prev);
                } else {
                    k::serial::matmul_at_b(L.input, grad, L.gw, d.pixels(), width, filters);
                    k::serial::column_sums(grad, L.gb, d.pixels(), filters);
                    k::serial::matmul_a_bt(grad, L.w, dcols, d.pixels(), filters, width);
                    k::serial::col2im3x3(dcols, d, prev);
                }
                break;
            }
            case LayerKind::dense: {
                const std::size_t fin = element_count(L.in), units = element_count(L.out);
                if (par) {
                    k::parallel::matmul_at_b(L.input, grad, L.gw, n, fin, units);
                    k::parallel::column_sums(grad, L.gb, n, units);
                    k::parallel::matmul_a_bt(grad, L.w, prev, n, units, fin);
                } else {
                    k::serial::matmul_at_b(L.input, grad, L.gw, n, fin, units);
                    k::serial::column_sums(grad, L.gb, n, units);
                    k::serial::matmul_a_bt(grad, L.w, prev, n, units, fin);
                }
                break;
            }
            case LayerKind::maxpool:
                par ? k::parallel::maxpool2x2_backward(grad, L.argmax, prev)
                    : k::serial::maxpool2x2_backward(grad, L.argmax, prev);
                break;
            case LayerKind::dropout:
                for (std::size_t i = 0; i < grad.size(); ++i) prev[i] = grad[i] * L.mask[i];
                break;
            case LayerKind::flatten: prev = grad; break;
        }
        grad = std::move(prev);
    }
}

std::vector<std::span<double>> Model::parameters() {
    std::vector<std::span<double>> out;
    for (auto& L : layers_)
        if (!L.w.empty()) {
            out.emplace_back(L.w);
            out.emplace_back(L.b);
        }
    return out;
}

std::vector<std::span<const double>> Model::gradients() const {
    std::vector<std::span<const double>> out;
    for (const auto& L : layers_)
        if (!L.w.empty()) {
            out.emplace_back(L.gw);
            out.emplace_back(L.gb);
        }
    return out;
}

std::size_t Model::parameter_count() const {
    std::size_t total = 0;
    for (const auto& L : layers_) total += L.w.size() + L.b.size();
    return total;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr char kMagic[8] = {'A', 'F', 'O', 'S', 'N', 'E', 'T', '\0'};
constexpr std::uint32_t kModelVersion = 1;

class Writer {
public:
    explicit Writer(const std::filesystem::path& p) : out_(p, std::ios::binary | std::ios::trunc) {
        if (!out_) throw DataError("cannot write model file " + p.string());
    }
    void bytes(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n)); }
    void u64(std::uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(b, 8);
    }
    void u32(std::uint32_t v) {
        unsigned char b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(b, 4);
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }
    void doubles(const std::vector<double>& v) {
        u64(v.size());
        for (double d : v) f64(d);
    }
    bool ok() const { return static_cast<bool>(out_); }

private:
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& p) : in_(p, std::ios::binary), path_(p.string()) {
        if (!in_) throw DataError("cannot open model file " + path_);
    }
    void bytes(void* data, std::size_t n) {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) throw DataError("truncated model file " + path_);
    }
    std::uint64_t u64() {
        unsigned char b[8];
        bytes(b, 8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
        return v;
    }
    std::uint32_t u32() {
        unsigned char b[4];
        bytes(b, 4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    // Reads a length prefix for `width`-byte items and checks it fits in the file.
    std::uint64_t count(std::size_t width) {
        const std::uint64_t n = u64();
        const auto here = in_.tellg();
        in_.seekg(0, std::ios::end);
        const auto left = static_cast<std::uint64_t>(in_.tellg() - here);
        in_.seekg(here);
        if (n > left / width) throw DataError("truncated model file " + path_);
        return n;
    }
    std::string str() {
        const std::uint32_t n = u32();
        if (n > (1u << 20)) throw DataError("implausible string length in " + path_);
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }

private:
    std::ifstream in_;
    std::string path_;
};

}  // namespace

void Model::save(const std::filesystem::path& path) const {
    Writer w(path);
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kModelVersion);
    w.u32(static_cast<std::uint32_t>(input_shape_.size()));
    for (std::size_t d : input_shape_) w.u64(d);
    w.u32(static_cast<std::uint32_t>(layers_.size()));
    for (const auto& L : layers_) {
        w.u32(static_cast<std::uint32_t>(L.spec.kind));
        w.u32(static_cast<std::uint32_t>(L.spec.units));
        w.f64(L.spec.rate);
        w.str(L.spec.activation ? funcdsl::format(*L.spec.activation) : std::string());
        w.doubles(L.w);
        w.doubles(L.b);
    }
    if (!w.ok()) throw DataError("failed writing model file " + path.string());
}

Model Model::load(const std::filesystem::path& path) {
    Reader r(path);
    char magic[8];
    r.bytes(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw DataError("not a model file: " + path.string());
    if (r.u32() != kModelVersion) throw DataError("unsupported model version in " + path.string());
    const std::uint32_t rank = r.u32();
    if (rank == 0 || rank > 3) throw DataError("bad input rank in " + path.string());
    Shape input(rank);
    for (auto& d : input) d = r.u64();
    if (element_count(input) == 0) throw DataError("empty input shape in " + path.string());
    const std::uint32_t count = r.u32();
    if (count == 0) throw DataError("model file has no layers: " + path.string());
    std::vector<LayerSpec> specs;
    std::vector<std::pair<std::vector<double>, std::vector<double>>> weights;
    for (std::uint32_t i = 0; i < count; ++i) {
        LayerSpec s;
        const std::uint32_t kind = r.u32();
        if (kind > static_cast<std::uint32_t>(LayerKind::dense)) throw DataError("bad layer kind in " + path.string());
        s.kind = static_cast<LayerKind>(kind);
        s.units = static_cast<int>(r.u32());
        s.rate = r.f64();
        const std::string act = r.str();
        if (!act.empty()) s.activation = funcdsl::parse(act);
        specs.push_back(std::move(s));
        weights.emplace_back();
        // Sizes are validated against the rebuilt model below.
        const std::uint64_t nw = r.count(8);
        weights.back().first.resize(nw);
        for (double& d : weights.back().first) d = r.f64();
        const std::uint64_t nb = r.count(8);
        weights.back().second.resize(nb);
        for (double& d : weights.back().second) d = r.f64();
    }
    // Check stored sizes against the shapes before build() allocates anything.
    Shape cur = input;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        Shape next;
        try {
            next = infer_shape(specs[i], cur, i);
        } catch (const ShapeError& e) {
            throw DataError(std::string("inconsistent model file: ") + e.what());
        }
        const bool weighted = specs[i].kind == LayerKind::conv || specs[i].kind == LayerKind::dense;
        const std::size_t units = weighted ? static_cast<std::size_t>(specs[i].units) : 0;
        const std::size_t fin = weighted ? fan_in(specs[i], cur) : 0;
        if (weights[i].second.size() != units || (units && weights[i].first.size() / units != fin) ||
            weights[i].first.size() != fin * units)
            throw DataError("parameter count mismatch in " + path.string());
        cur = std::move(next);
    }
    Model m = build(std::move(specs), std::move(input), 0);
    for (std::size_t i = 0; i < m.layers_.size(); ++i) {
        m.layers_[i].w = std::move(weights[i].first);
        m.layers_[i].b = std::move(weights[i].second);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Loss and training

TensorBundle one_hot(std::span<const int> labels, int classes) {
    TensorBundle t(Shape{labels.size(), static_cast<std::size_t>(classes)});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= classes) throw DataError("label out of range for one-hot encoding");
        t.data[i * static_cast<std::size_t>(classes) + static_cast<std::size_t>(labels[i])] = 1.0;
    }
    return t;
}

LossResult loss_and_grad(const TensorBundle& logits, const TensorBundle& targets) {
    if (logits.shape.size() < 2 || logits.data.size() != targets.data.size() || logits.rows() != targets.rows())
        throw ShapeError("logits " + to_string(logits.shape) + " and targets " + to_string(targets.shape) +
                         " disagree");
    const std::size_t n = logits.rows(), c = logits.row_size();
    LossResult r{0.0, TensorBundle(logits.shape)};
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* z = logits.data.data() + i * c;
        const double* t = targets.data.data() + i * c;
        double* g = r.grad.data.data() + i * c;
        double zmax = z[0];
        for (std::size_t j = 1; j < c; ++j) zmax = std::max(zmax, z[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) sum += std::exp(z[j] - zmax);
        const double log_sum = zmax + std::log(sum);
        for (std::size_t j = 0; j < c; ++j) {
            const double p = std::exp(z[j] - log_sum);
            r.loss -= t[j] * (z[j] - log_sum) * inv_n;
            g[j] = (p - t[j]) * inv_n;
        }
        if (std::isnan(zmax)) r.loss = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

namespace {

LabeledSet gather(const LabeledSet& set, std::span<const std::size_t> idx) {
    return set.subset(std::vector<std::size_t>(idx.begin(), idx.end()));
}

std::size_t argmax_row(const double* z, std::size_t c) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < c; ++j)
        if (z[j] > z[best]) best = j;
    return best;
}

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

}  // namespace

Metrics evaluate(Model& model, const LabeledSet& set, std::size_t batch_size) {
    Metrics m;
    if (set.size() == 0) return m;
    std::vector<std::size_t> idx(set.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::size_t correct = 0;
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < idx.size(); start += batch_size) {
        const std::size_t len = std::min(batch_size, idx.size() - start);
        const LabeledSet b = gather(set, std::span(idx).subspan(start, len));
        const TensorBundle logits = model.forward(b.images, false);
        const LossResult lr = loss_and_grad(logits, one_hot(b.labels, set.classes));
        loss_sum += lr.loss * static_cast<double>(len);
        const std::size_t c = logits.row_size();
        for (std::size_t i = 0; i < len; ++i)
            if (static_cast<int>(argmax_row(logits.data.data() + i * c, c)) == b.labels[i]) ++correct;
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(set.size());
    m.loss = loss_sum / static_cast<double>(set.size());
    return m;
}

bool TrainOutcome::operator==(const TrainOutcome& o) const {
    if (abort != o.abort || !same_bits(v_a, o.v_a) || !same_bits(v_l, o.v_l) || history.size() != o.history.size())
        return false;
    for (std::size_t i = 0; i < history.size(); ++i)
        if (!same_bits(history[i].train_loss, o.history[i].train_loss) ||
            !same_bits(history[i].val_accuracy, o.history[i].val_accuracy) ||
            !same_bits(history[i].val_loss, o.history[i].val_loss))
            return false;
    return true;
}

TrainOutcome train(Model& model, const LabeledSet& train_set, const LabeledSet& val_set, const TrainConfig& cfg) {
    if (train_set.size() == 0 || val_set.size() == 0) throw DataError("training and validation sets must be non-empty");
    if (cfg.batch_size <= 0 || cfg.epochs <= 0) throw ConfigError("epochs and batch_size must be positive");

    TrainOutcome out;
    auto params = model.parameters();
    std::vector<std::vector<double>> velocity;
    for (const auto& p : params) velocity.emplace_back(p.size(), 0.0);

    const SeededStream root(cfg.seed, "train");
    std::vector<std::size_t> order(train_set.size());
    const auto bs = static_cast<std::size_t>(cfg.batch_size);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        SeededStream shuffle = root.child("epoch" + std::to_string(epoch));
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

        double loss_sum = 0.0;
        bool blew_up = false;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += bs, ++batch_index) {
            const std::size_t len = std::min(bs, order.size() - start);
            const LabeledSet b = gather(train_set, std::span(order).subspan(start, len));
            SeededStream drop = shuffle.child("dropout" + std::to_string(batch_index));
            const TensorBundle logits = model.forward(b.images, true, &drop);
            const LossResult lr = loss_and_grad(logits, one_hot(b.labels, train_set.classes));
            if (!std::isfinite(lr.loss)) {
                blew_up = true;
                loss_sum = lr.loss;
                break;
            }
            loss_sum += lr.loss * static_cast<double>(len);
            model.backward(lr.grad);
            const auto grads = model.gradients();
            for (std::size_t p = 0; p < params.size(); ++p)
                for (std::size_t i = 0; i < params[p].size(); ++i) {
                    velocity[p][i] = cfg.momentum * velocity[p][i] - cfg.learning_rate * grads[p][i];
                    params[p][i] += velocity[p][i];
                }
        }

        const Metrics val = evaluate(model, val_set);
        out.history.push_back({blew_up ? loss_sum : loss_sum / static_cast<double>(train_set.size()), val.accuracy,
                               val.loss});
        out.v_a = val.accuracy;
        out.v_l = val.loss;
        if (blew_up || !std::isfinite(val.loss)) {
            out.abort = AbortReason::nan;
            return out;
        }
        if (epoch == 1 && val.accuracy <= cfg.abort_threshold) {
            out.abort = AbortReason::threshold;
            return out;
        }
    }
    return out;
}

}  // namespace afos::tinynet
