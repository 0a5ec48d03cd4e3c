#pragma once

#include "sag/errors.hpp"
#include "sag/graph.hpp"
#include "sag/relaxed_adjacency.hpp"

#include <concepts>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace sag {

/// Anything that acts as a normalized adjacency: Â·H and Âᵀ·G.
template <class A>
concept Propagator = requires(const A& a, const Matrix& m) {
    { a.size() } -> std::convertible_to<Index>;
    { a.propagate(m) } -> std::convertible_to<Matrix>;
    { a.propagate_transpose(m) } -> std::convertible_to<Matrix>;
};

struct TrainHyper {
    double learning_rate = 0.01;
    int epochs = 200;
    double weight_decay = 5e-4;
    std::uint64_t seed = 0;
};

struct SurrogateModel {
    Matrix weights;  // D x C
    TrainHyper hyper;
    double train_accuracy = 0.0;
    double val_accuracy = 0.0;
};

struct Prediction {
    Matrix probs;                     // N x C, softmax rows
    std::vector<int> predicted_labels;  // row argmax, lowest index on ties
};

/// Nodes whose loss the attacker maximizes, with the label each is scored against.
/// `labels` is indexed by node id and has length N.
struct AttackTargets {
    std::vector<Index> nodes;
    std::vector<int> labels;
};

/// Floor applied to probabilities inside the logarithm.
inline constexpr double kProbabilityFloor = 1e-12;

Prediction softmax_rows(const Matrix& logits);

template <Propagator A>
Prediction forward(const A& adj, const Matrix& x, const Matrix& w);

double cross_entropy(const Prediction& pred, std::span<const int> labels, std::span<const Index> nodes);
double accuracy(const Prediction& pred, std::span<const int> labels, std::span<const Index> nodes);

/// Full-batch gradient descent on the summed cross-entropy of the train nodes.
SurrogateModel train_surrogate(const NormalizedAdjacency& adj, const Matrix& x, std::span<const int> labels,
                               std::span<const Index> train_nodes, std::span<const Index> val_nodes,
                               int num_classes, const TrainHyper& hyper);
SurrogateModel train_surrogate(const GraphDataset& ds, const TrainHyper& hyper);

/// Zero-mean uniform initialization scaled by 1/sqrt(fan_in).
Matrix initial_weights(Index rows, Index cols, std::uint64_t seed);

/// Gradient of -loss with respect to the features; a descent step on it
/// increases the attack loss.
template <Propagator A>
Matrix grad_features(const A& adj, const Matrix& x, const Matrix& w, const AttackTargets& targets);

/// Gradient of -loss with respect to rows [rows.begin, rows.end) of S,
/// through both the entrywise substitution and the degree normalization.
RowMatrix grad_topology(const RelaxedAdjacency& adj, const Matrix& x, const Matrix& w,
                        const AttackTargets& targets, RowRange rows);

/// Summed cross-entropy of the targets under the relaxed adjacency.
double attack_loss(const RelaxedAdjacency& adj, const Matrix& x, const Matrix& w, const AttackTargets& targets);

// Multi-layer GCN used only for transfer evaluation.

struct LayeredModel {
    std::vector<Matrix> weights;
    double train_accuracy = 0.0;
    double val_accuracy = 0.0;
};

/// softmax(Â ReLU(... ReLU(Â X W_1) ...) W_L).
template <Propagator A>
Prediction forward_multilayer(const A& adj, const Matrix& x, std::span<const Matrix> weights);

struct LayeredHyper {
    int layers = 2;
    int hidden = 16;
    TrainHyper train{};
    bool adam = true;
};

LayeredModel train_multilayer(const NormalizedAdjacency& adj, const Matrix& x, std::span<const int> labels,
                              std::span<const Index> train_nodes, std::span<const Index> val_nodes,
                              int num_classes, const LayeredHyper& hyper);

// Checkpoint file: "# seed=... epochs=..." header, "D C", then D rows of C reals.
void save_checkpoint(const SurrogateModel& model, const std::filesystem::path& path);
SurrogateModel load_checkpoint(const std::filesystem::path& path);

// Helpers shared by the gradient routines.
namespace detail {
/// probs - onehot(labels) on target rows, zero elsewhere.
Matrix loss_seed(const Prediction& pred, const AttackTargets& targets);
void check_shapes(Index n, const Matrix& x, const Matrix& w);
}  // namespace detail

template <Propagator A>
Prediction forward(const A& adj, const Matrix& x, const Matrix& w) {
    detail::check_shapes(adj.size(), x, w);
    return softmax_rows(adj.propagate(x * w));
}

template <Propagator A>
Matrix grad_features(const A& adj, const Matrix& x, const Matrix& w, const AttackTargets& targets) {
    const auto pred = forward(adj, x, w);
    const Matrix seed = detail::loss_seed(pred, targets);
    return -(adj.propagate_transpose(seed) * w.transpose());
}

template <Propagator A>
Prediction forward_multilayer(const A& adj, const Matrix& x, std::span<const Matrix> weights) {
    if (weights.empty()) throw InputError("forward_multilayer: no layers");
    Matrix h = x;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (h.cols() != weights[l].rows()) throw InputError("forward_multilayer: layer " + std::to_string(l) + " shape mismatch");
        if (h.rows() != adj.size()) throw InputError("forward_multilayer: feature rows do not match adjacency");
        h = adj.propagate(h * weights[l]);
        if (l + 1 < weights.size()) h = h.cwiseMax(0.0);
    }
    return softmax_rows(h);
}

}  // namespace sag
