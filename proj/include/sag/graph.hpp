#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <compare>
#include <cstddef>
#include <filesystem>
#include <string_view>
#include <utility>
#include <vector>

namespace sag {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SparseAdjacency = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class Split { train, val, test, none };

std::string_view to_string(Split s);

/// Unordered node pair, stored with u < v.
struct Edge {
    Index u = 0;
    Index v = 0;
    auto operator<=>(const Edge&) const = default;
};

struct GraphDataset {
    Index num_nodes = 0;
    std::vector<Edge> edges;  // sorted, unique, u < v
    Matrix features;          // N x D
    std::vector<int> labels;  // length N, values in [0, num_classes)
    std::vector<Split> split;
    int num_classes = 0;

    Index num_features() const { return features.cols(); }
    std::size_t undirected_edge_count() const { return edges.size(); }
    std::size_t directed_edge_count() const { return 2 * edges.size(); }
    std::vector<Index> nodes_in(Split s) const;

    /// Symmetric 0/1 adjacency without self-loops.
    SparseAdjacency adjacency() const;
};

/// Throws InputError if any dataset invariant is violated.
void validate(const GraphDataset& ds);

/// Reads the four text files; every error names the file and line.
GraphDataset load_dataset(const std::filesystem::path& graph_path,
                          const std::filesystem::path& features_path,
                          const std::filesystem::path& labels_path,
                          const std::filesystem::path& split_path);

/// Loads graph.txt, features.txt, labels.txt and split.txt from a directory.
GraphDataset load_dataset_dir(const std::filesystem::path& dir);

void save_dataset_dir(const GraphDataset& ds, const std::filesystem::path& dir);

/// D^{-1/2} (A + I) D^{-1/2} with D the row sums of A + I.
///
/// A may be asymmetric (unmirrored flips); the row-sum convention then
/// applies to both sides of the product.
struct NormalizedAdjacency {
    SparseAdjacency values;

    Index size() const { return values.rows(); }
    Matrix propagate(const Matrix& h) const { return values * h; }
    Matrix propagate_transpose(const Matrix& g) const { return values.transpose() * g; }
    Matrix dense() const { return Matrix(values); }
};

NormalizedAdjacency build_normalized_adjacency(const SparseAdjacency& adjacency);
NormalizedAdjacency build_normalized_adjacency(const GraphDataset& ds);

/// Toggled adjacency entries.  With `symmetrized` each pair (i, j), i < j,
/// stands for both (i, j) and (j, i).
struct EdgePerturbation {
    std::vector<std::pair<Index, Index>> flips;
    bool symmetrized = true;

    /// Flips counted as unordered pairs.
    std::size_t pair_count() const;
};

/// Dense form: entry (i, j) becomes 1 - A_ij wherever S_ij = 1.
Matrix apply_perturbation(const Matrix& adjacency, const Matrix& s_binary);

/// Sparse form used by the attack pipeline.
SparseAdjacency apply_perturbation(const SparseAdjacency& adjacency, const EdgePerturbation& p);

struct RowRange {
    Index begin = 0;
    Index end = 0;
    Index size() const { return end - begin; }
    bool contains(Index i) const { return i >= begin && i < end; }
    bool operator==(const RowRange&) const = default;
};

/// Partition i covers [floor(i N / M), floor((i + 1) N / M)).
std::vector<RowRange> partition_rows(Index n, Index m);

}  // namespace sag
