#pragma once

#include "sag/graph.hpp"

#include <cstddef>
#include <vector>

namespace sag {

/// The relaxed perturbation matrix S in [0,1]^{N x N}, stored as dense row
/// blocks, one per partition.
class ProbabilityMatrix {
public:
    ProbabilityMatrix() = default;
    ProbabilityMatrix(Index n, std::vector<RowRange> partitions);

    Index size() const { return n_; }
    std::size_t block_count() const { return blocks_.size(); }
    const std::vector<RowRange>& partitions() const { return parts_; }
    const RowRange& partition(std::size_t i) const { return parts_[i]; }

    RowMatrix& block(std::size_t i) { return blocks_[i]; }
    const RowMatrix& block(std::size_t i) const { return blocks_[i]; }

    double operator()(Index i, Index j) const;
    double sum() const;
    RowMatrix dense() const;
    std::size_t element_count() const;

private:
    Index n_ = 0;
    std::vector<RowRange> parts_;
    std::vector<RowMatrix> blocks_;
    std::vector<std::size_t> owner_;  // row -> block index
};

/// Continuous normalized adjacency built from A + (1 - 2A) o S + I.
///
/// Never materializes the N x N matrix: products walk the sparse clean
/// adjacency and the dense S blocks directly.
class RelaxedAdjacency {
public:
    RelaxedAdjacency(const SparseAdjacency& clean, const ProbabilityMatrix& s);

    Index size() const { return clean_->rows(); }
    const SparseAdjacency& clean() const { return *clean_; }
    const ProbabilityMatrix& perturbation() const { return *s_; }

    /// Row sums of A + (1 - 2A) o S + I.
    const Vector& degrees() const { return degree_; }
    const Vector& inv_sqrt_degrees() const { return inv_sqrt_; }

    Matrix propagate(const Matrix& h) const;
    Matrix propagate_transpose(const Matrix& g) const;
    Matrix dense() const;

private:
    // Unnormalized products with B = A + (1 - 2A) o S + I.
    Matrix times(const Matrix& y) const;
    Matrix transpose_times(const Matrix& y) const;

    const SparseAdjacency* clean_;
    const ProbabilityMatrix* s_;
    Vector degree_;
    Vector inv_sqrt_;
};

}  // namespace sag
