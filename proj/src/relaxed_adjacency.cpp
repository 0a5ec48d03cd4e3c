#include "sag/relaxed_adjacency.hpp"

#include "sag/errors.hpp"

#include <cmath>

namespace sag {

ProbabilityMatrix::ProbabilityMatrix(Index n, std::vector<RowRange> partitions)
    : n_(n), parts_(std::move(partitions)), owner_(static_cast<std::size_t>(n), 0) {
    Index expected = 0;
    for (std::size_t b = 0; b < parts_.size(); ++b) {
        const auto& p = parts_[b];
        if (p.begin != expected || p.end < p.begin || p.end > n) throw InputError("partitions must tile [0, N) in order");
        blocks_.emplace_back(RowMatrix::Zero(p.size(), n));
        for (Index i = p.begin; i < p.end; ++i) owner_[static_cast<std::size_t>(i)] = b;
        expected = p.end;
    }
    if (expected != n) throw InputError("partitions must tile [0, N) in order");
}

double ProbabilityMatrix::operator()(Index i, Index j) const {
    const auto b = owner_[static_cast<std::size_t>(i)];
    return blocks_[b](i - parts_[b].begin, j);
}

double ProbabilityMatrix::sum() const {
    double total = 0.0;
    for (const auto& b : blocks_) total += b.sum();
    return total;
}

RowMatrix ProbabilityMatrix::dense() const {
    RowMatrix out(n_, n_);
    for (std::size_t b = 0; b < blocks_.size(); ++b) out.middleRows(parts_[b].begin, parts_[b].size()) = blocks_[b];
    return out;
}

std::size_t ProbabilityMatrix::element_count() const {
    std::size_t total = 0;
    for (const auto& b : blocks_) total += static_cast<std::size_t>(b.size());
    return total;
}

RelaxedAdjacency::RelaxedAdjacency(const SparseAdjacency& clean, const ProbabilityMatrix& s)
    : clean_(&clean), s_(&s) {
    const Index n = clean.rows();
    if (clean.cols() != n || s.size() != n) throw InputError("adjacency and perturbation sizes differ");
    degree_.setOnes(n);
    for (std::size_t b = 0; b < s.block_count(); ++b) {
        degree_.segment(s.partition(b).begin, s.partition(b).size()) += s.block(b).rowwise().sum();
    }
    for (Index i = 0; i < n; ++i) {
        for (SparseAdjacency::InnerIterator it(clean, i); it; ++it) degree_(i) += 1.0 - 2.0 * s(i, it.col());
    }
    inv_sqrt_ = degree_.array().rsqrt();
}

Matrix RelaxedAdjacency::times(const Matrix& y) const {
    const auto& s = *s_;
    Matrix out = y;  // self-loop
    for (std::size_t b = 0; b < s.block_count(); ++b) {
        const auto& p = s.partition(b);
        out.middleRows(p.begin, p.size()).noalias() += s.block(b) * y;
    }
    for (Index i = 0; i < size(); ++i) {
        for (SparseAdjacency::InnerIterator it(*clean_, i); it; ++it)
            out.row(i) += (1.0 - 2.0 * s(i, it.col())) * y.row(it.col());
    }
    return out;
}

Matrix RelaxedAdjacency::transpose_times(const Matrix& y) const {
    const auto& s = *s_;
    Matrix out = y;
    for (std::size_t b = 0; b < s.block_count(); ++b) {
        const auto& p = s.partition(b);
        out.noalias() += s.block(b).transpose() * y.middleRows(p.begin, p.size());
    }
    for (Index i = 0; i < size(); ++i) {
        for (SparseAdjacency::InnerIterator it(*clean_, i); it; ++it)
            out.row(it.col()) += (1.0 - 2.0 * s(i, it.col())) * y.row(i);
    }
    return out;
}

Matrix RelaxedAdjacency::propagate(const Matrix& h) const {
    if (h.rows() != size()) throw InputError("propagate: row count mismatch");
    return inv_sqrt_.asDiagonal() * times(inv_sqrt_.asDiagonal() * h);
}

Matrix RelaxedAdjacency::propagate_transpose(const Matrix& g) const {
    if (g.rows() != size()) throw InputError("propagate_transpose: row count mismatch");
    return inv_sqrt_.asDiagonal() * transpose_times(inv_sqrt_.asDiagonal() * g);
}

Matrix RelaxedAdjacency::dense() const {
    Matrix b = Matrix(s_->dense());
    Matrix a = Matrix(*clean_);
    b = a.array() + (1.0 - 2.0 * a.array()) * b.array();
    b.diagonal().array() += 1.0;
    return inv_sqrt_.asDiagonal() * b * inv_sqrt_.asDiagonal();
}

}  // namespace sag
