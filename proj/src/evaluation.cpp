#include "sag/evaluation.hpp"

#include "sag/errors.hpp"

namespace sag {

namespace {

Matrix perturbed_features(const GraphDataset& ds, const Matrix& feature_delta) {
    if (feature_delta.size() == 0) return ds.features;
    if (feature_delta.rows() != ds.features.rows() || feature_delta.cols() != ds.features.cols())
        throw InputError("feature delta shape does not match the dataset");
    return ds.features + feature_delta;
}

}  // namespace

double test_accuracy(const GraphDataset& ds, const NormalizedAdjacency& adj, const Matrix& x, const Matrix& weights) {
    return accuracy(forward(adj, x, weights), ds.labels, ds.nodes_in(Split::test));
}

NormalizedAdjacency perturbed_adjacency(const GraphDataset& ds, const EdgePerturbation& edges) {
    return build_normalized_adjacency(apply_perturbation(ds.adjacency(), edges));
}

AccuracyPair evaluate_evasive(const GraphDataset& ds, const Matrix& weights, const EdgePerturbation& edges,
                              const Matrix& feature_delta) {
    AccuracyPair out;
    out.clean = test_accuracy(ds, build_normalized_adjacency(ds), ds.features, weights);
    out.attacked = test_accuracy(ds, perturbed_adjacency(ds, edges), perturbed_features(ds, feature_delta), weights);
    return out;
}

AccuracyPair evaluate_poisoning(const GraphDataset& ds, const EdgePerturbation& edges, const Matrix& feature_delta,
                                const TrainHyper& hyper) {
    const auto train = ds.nodes_in(Split::train);
    const auto val = ds.nodes_in(Split::val);
    AccuracyPair out;
    {
        const auto adj = build_normalized_adjacency(ds);
        const auto model = train_surrogate(adj, ds.features, ds.labels, train, val, ds.num_classes, hyper);
        out.clean = test_accuracy(ds, adj, ds.features, model.weights);
    }
    {
        const auto adj = perturbed_adjacency(ds, edges);
        const Matrix x = perturbed_features(ds, feature_delta);
        const auto model = train_surrogate(adj, x, ds.labels, train, val, ds.num_classes, hyper);
        out.attacked = test_accuracy(ds, adj, x, model.weights);
    }
    return out;
}

std::vector<TransferRow> evaluate_transfer(const GraphDataset& ds, const EdgePerturbation& edges,
                                           const Matrix& feature_delta, std::span<const int> depths,
                                           const TrainHyper& single, const LayeredHyper& deep) {
    const auto train = ds.nodes_in(Split::train);
    const auto val = ds.nodes_in(Split::val);
    const auto test = ds.nodes_in(Split::test);
    const auto clean_adj = build_normalized_adjacency(ds);
    const auto attacked_adj = perturbed_adjacency(ds, edges);
    const Matrix attacked_x = perturbed_features(ds, feature_delta);

    std::vector<TransferRow> rows;
    for (int depth : depths) {
        if (depth < 1) throw InputError("transfer depth must be at least 1");
        TransferRow row{depth, {}};
        if (depth == 1) {
            row.accuracy = evaluate_poisoning(ds, edges, feature_delta, single);
        } else {
            LayeredHyper h = deep;
            h.layers = depth;
            const auto clean = train_multilayer(clean_adj, ds.features, ds.labels, train, val, ds.num_classes, h);
            const auto attacked = train_multilayer(attacked_adj, attacked_x, ds.labels, train, val, ds.num_classes, h);
            row.accuracy.clean = accuracy(forward_multilayer(clean_adj, ds.features, std::span<const Matrix>(clean.weights)),
                                          ds.labels, test);
            row.accuracy.attacked = accuracy(
                forward_multilayer(attacked_adj, attacked_x, std::span<const Matrix>(attacked.weights)), ds.labels, test);
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace sag
