#include "afos/evaluators.hpp"

#include <cmath>

#include "afos/rng.hpp"

namespace afos::evaluators {

SurrogateEvaluator::SurrogateEvaluator(Expr target, double jitter) : jitter_(jitter) {
    for (int i = 0; i <= 60; ++i) {
        const double x = -3.0 + 0.1 * i;
        xs_.push_back(x);
        target_.push_back(funcdsl::value(target, x));
    }
}

Evaluation SurrogateEvaluator::operator()(const Expr& f, std::uint64_t seed) const {
    double mse = 0.0;
    for (std::size_t i = 0; i < xs_.size(); ++i) {
        const auto e = funcdsl::eval(f, xs_[i]);
        if (e.status == funcdsl::EvalStatus::nan) return {0.0, std::nan(""), evolver::Status::aborted_nan};
        const double d = e.value - target_[i];
        mse += d * d / static_cast<double>(xs_.size());
    }
    if (!std::isfinite(mse)) return {0.0, std::nan(""), evolver::Status::aborted_nan};
    SeededStream rng(seed, "surrogate");
    const double v_a = std::exp(-mse) * (1.0 - jitter_ * rng.uniform());
    const double v_l = mse + 0.01;
    if (v_a <= 0.25) return {v_a, v_l, evolver::Status::aborted_threshold};
    return {v_a, v_l, evolver::Status::evaluated};
}

TrainingEvaluator::TrainingEvaluator(std::shared_ptr<const LabeledSet> train, std::shared_ptr<const LabeledSet> val,
                                     Network net, tinynet::TrainConfig cfg, int hidden)
    : train_(std::move(train)), val_(std::move(val)), net_(net), cfg_(cfg), hidden_(hidden) {
    if (!train_ || !val_) throw DataError("training evaluator needs both data sets");
    train_->check();
    val_->check();
}

tinynet::TrainOutcome TrainingEvaluator::train(const Expr& f, std::uint64_t seed) const {
    const auto specs = net_ == Network::phi ? tinynet::phi_network(train_->classes, f, cfg_.dropout_rate)
                                            : tinynet::desk_network(train_->classes, f, hidden_);
    auto model = tinynet::Model::build(specs, train_->images.sample_shape(), seed);
    // Candidates are already evaluated concurrently by the engine.
    model.set_backend(kernels::Backend::serial);
    tinynet::TrainConfig cfg = cfg_;
    cfg.seed = seed;
    return tinynet::train(model, *train_, *val_, cfg);
}

Evaluation TrainingEvaluator::operator()(const Expr& f, std::uint64_t seed) const {
    const auto out = train(f, seed);
    switch (out.abort) {
        case tinynet::AbortReason::nan: return {0.0, out.v_l, evolver::Status::aborted_nan};
        case tinynet::AbortReason::threshold: return {out.v_a, out.v_l, evolver::Status::aborted_threshold};
        case tinynet::AbortReason::none: break;
    }
    return {out.v_a, out.v_l, evolver::Status::evaluated};
}

}  // namespace afos::evaluators
