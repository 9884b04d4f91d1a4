#pragma once

// Fitness evaluators for the genetic search.

#include <cstdint>
#include <memory>
#include <vector>

#include "afos/evolver.hpp"
#include "afos/tinynet.hpp"

namespace afos::evaluators {

using evolver::Evaluation;
using funcdsl::Expr;

// Cheap deterministic stand-in for training: how closely f tracks a smooth
// target on [-3, 3]. v_a = exp(-mse) with a small seed-dependent jitter,
// v_l = mse + 0.01. NaN anywhere aborts as aborted_nan; v_a <= 0.25 aborts
// as aborted_threshold.
class SurrogateEvaluator {
public:
    explicit SurrogateEvaluator(Expr target = funcdsl::catalog("swish"), double jitter = 1e-3);
    Evaluation operator()(const Expr& f, std::uint64_t seed) const;

private:
    std::vector<double> xs_, target_;
    double jitter_;
};

enum class Network { desk, phi };

// Builds the network with the candidate activation, trains it, and reports
// final-epoch validation accuracy and loss.
class TrainingEvaluator {
public:
    TrainingEvaluator(std::shared_ptr<const LabeledSet> train, std::shared_ptr<const LabeledSet> val, Network net,
                      tinynet::TrainConfig cfg, int hidden = 32);
    Evaluation operator()(const Expr& f, std::uint64_t seed) const;
    tinynet::TrainOutcome train(const Expr& f, std::uint64_t seed) const;

private:
    std::shared_ptr<const LabeledSet> train_, val_;
    Network net_;
    tinynet::TrainConfig cfg_;
    int hidden_;
};

}  // namespace afos::evaluators
