#pragma once

#include "sag/gcn.hpp"
#include "sag/graph.hpp"

#include <span>
#include <vector>

namespace sag {

struct AccuracyPair {
    double clean = 0.0;
    double attacked = 0.0;
    double drop() const { return clean - attacked; }
};

/// Test-node accuracy of a single-layer model on the given adjacency and features.
double test_accuracy(const GraphDataset& ds, const NormalizedAdjacency& adj, const Matrix& x, const Matrix& weights);

/// Normalized adjacency of the clean graph with `edges` toggled.
NormalizedAdjacency perturbed_adjacency(const GraphDataset& ds, const EdgePerturbation& edges);

/// Fixed weights, clean graph versus perturbed graph and features.
AccuracyPair evaluate_evasive(const GraphDataset& ds, const Matrix& weights, const EdgePerturbation& edges,
                              const Matrix& feature_delta);

/// Retrains the single-layer model with `hyper` on the clean and on the
/// perturbed data; both are scored on the test nodes of their own graph.
AccuracyPair evaluate_poisoning(const GraphDataset& ds, const EdgePerturbation& edges, const Matrix& feature_delta,
                                const TrainHyper& hyper);

struct TransferRow {
    int layers = 1;
    AccuracyPair accuracy;
};

/// Poisoning evaluation per depth.  Depth 1 uses the surrogate recipe
/// (`single`); deeper models use `deep` with its layer count overridden.
std::vector<TransferRow> evaluate_transfer(const GraphDataset& ds, const EdgePerturbation& edges,
                                           const Matrix& feature_delta, std::span<const int> depths,
                                           const TrainHyper& single, const LayeredHyper& deep);

}  // namespace sag
