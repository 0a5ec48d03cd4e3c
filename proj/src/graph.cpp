#include "sag/graph.hpp"

#include "sag/errors.hpp"
#include "text_reader.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <string>

namespace sag {

std::string_view to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
        case Split::none: return "none";
    }
    return "none";
}

std::vector<Index> GraphDataset::nodes_in(Split s) const {
    std::vector<Index> out;
    for (Index i = 0; i < num_nodes; ++i) {
        if (split[static_cast<std::size_t>(i)] == s) out.push_back(i);
    }
    return out;
}

SparseAdjacency GraphDataset::adjacency() const {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(2 * edges.size());
    for (const auto& e : edges) {
        triplets.emplace_back(e.u, e.v, 1.0);
        triplets.emplace_back(e.v, e.u, 1.0);
    }
    SparseAdjacency a(num_nodes, num_nodes);
    a.setFromTriplets(triplets.begin(), triplets.end());
    return a;
}

void validate(const GraphDataset& ds) {
    const Index n = ds.num_nodes;
    if (n <= 0) throw InputError("dataset has no nodes");
    if (ds.features.rows() != n) throw InputError("feature rows do not match node count");
    if (static_cast<Index>(ds.labels.size()) != n) throw InputError("label count does not match node count");
    if (static_cast<Index>(ds.split.size()) != n) throw InputError("split count does not match node count");
    if (ds.num_classes <= 0) throw InputError("dataset has no classes");
    for (std::size_t k = 0; k < ds.edges.size(); ++k) {
        const auto& e = ds.edges[k];
        if (e.u < 0 || e.v >= n || e.u >= e.v) throw InputError("edge " + std::to_string(k) + " is not an ordered pair of valid ids");
        if (k > 0 && !(ds.edges[k - 1] < e)) throw InputError("edges are not sorted and unique");
    }
    for (Index i = 0; i < n; ++i) {
        const int y = ds.labels[static_cast<std::size_t>(i)];
        if (y < 0 || y >= ds.num_classes) throw InputError("label of node " + std::to_string(i) + " out of range");
    }
    if (!ds.features.allFinite()) throw InputError("features contain non-finite values");
}

namespace {

void expect_count(detail::TextReader& r, const std::vector<std::string_view>& tok, std::size_t count,
                  std::string_view what) {
    if (tok.size() != count) r.fail("expected " + std::string(what));
}

}  // namespace

GraphDataset load_dataset(const std::filesystem::path& graph_path,
                          const std::filesystem::path& features_path,
                          const std::filesystem::path& labels_path,
                          const std::filesystem::path& split_path) {
    GraphDataset ds;

    {
        detail::TextReader r(graph_path);
        auto head = r.next_tokens();
        if (!head) r.fail("missing header \"N E\"");
        expect_count(r, *head, 2, "header \"N E\"");
        ds.num_nodes = r.parse_int((*head)[0]);
        const Index e = r.parse_int((*head)[1]);
        if (ds.num_nodes <= 0 || e < 0) r.fail("malformed header \"N E\"");
        std::set<Edge> unique;
        for (Index k = 0; k < e; ++k) {
            auto tok = r.next_tokens();
            if (!tok) r.fail("expected " + std::to_string(e) + " edges, found " + std::to_string(k));
            expect_count(r, *tok, 2, "edge \"u v\"");
            const Index u = r.parse_int((*tok)[0]);
            const Index v = r.parse_int((*tok)[1]);
            if (u < 0 || v < 0 || u >= ds.num_nodes || v >= ds.num_nodes) r.fail("node id out of range [0, N)");
            if (u == v) r.fail("self-loop " + std::to_string(u) + " " + std::to_string(v));
            unique.insert(Edge{std::min(u, v), std::max(u, v)});
        }
        if (r.next_tokens()) r.fail("more edge lines than declared in the header");
        ds.edges.assign(unique.begin(), unique.end());
    }

    {
        detail::TextReader r(features_path);
        auto head = r.next_tokens();
        if (!head) r.fail("missing header \"N D\"");
        expect_count(r, *head, 2, "header \"N D\"");
        const Index n = r.parse_int((*head)[0]);
        const Index d = r.parse_int((*head)[1]);
        if (n != ds.num_nodes) r.fail("node count disagrees with graph file");
        if (d <= 0) r.fail("malformed header \"N D\"");
        ds.features.resize(n, d);
        for (Index i = 0; i < n; ++i) {
            auto tok = r.next_tokens();
            if (!tok) r.fail("expected " + std::to_string(n) + " feature rows");
            if (static_cast<Index>(tok->size()) != d) r.fail("expected " + std::to_string(d) + " values");
            for (Index j = 0; j < d; ++j) ds.features(i, j) = r.parse_real((*tok)[static_cast<std::size_t>(j)]);
        }
        if (r.next_tokens()) r.fail("more feature rows than declared in the header");
    }

    {
        detail::TextReader r(labels_path);
        auto head = r.next_tokens();
        if (!head) r.fail("missing header \"N C\"");
        expect_count(r, *head, 2, "header \"N C\"");
        const Index n = r.parse_int((*head)[0]);
        const Index c = r.parse_int((*head)[1]);
        if (n != ds.num_nodes) r.fail("node count disagrees with graph file");
        if (c <= 0) r.fail("malformed header \"N C\"");
        ds.num_classes = static_cast<int>(c);
        ds.labels.resize(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) {
            auto tok = r.next_tokens();
            if (!tok) r.fail("expected " + std::to_string(n) + " labels");
            expect_count(r, *tok, 1, "one label");
            const Index y = r.parse_int((*tok)[0]);
            if (y < 0 || y >= c) r.fail("label " + std::to_string(y) + " out of range [0, C)");
            ds.labels[static_cast<std::size_t>(i)] = static_cast<int>(y);
        }
        if (r.next_tokens()) r.fail("more labels than declared in the header");
    }

    {
        detail::TextReader r(split_path);
        auto head = r.next_tokens();
        if (!head) r.fail("missing header \"N\"");
        expect_count(r, *head, 1, "header \"N\"");
        if (r.parse_int((*head)[0]) != ds.num_nodes) r.fail("node count disagrees with graph file");
        ds.split.resize(static_cast<std::size_t>(ds.num_nodes));
        for (Index i = 0; i < ds.num_nodes; ++i) {
            auto tok = r.next_tokens();
            if (!tok) r.fail("expected " + std::to_string(ds.num_nodes) + " split tags");
            expect_count(r, *tok, 1, "one split tag");
            const auto t = (*tok)[0];
            Split s;
            if (t == "train") s = Split::train;
            else if (t == "val") s = Split::val;
            else if (t == "test") s = Split::test;
            else if (t == "none") s = Split::none;
            else r.fail("unknown split tag \"" + std::string(t) + "\"");
            ds.split[static_cast<std::size_t>(i)] = s;
        }
        if (r.next_tokens()) r.fail("more split tags than declared in the header");
    }

    validate(ds);
    return ds;
}

GraphDataset load_dataset_dir(const std::filesystem::path& dir) {
    return load_dataset(dir / "graph.txt", dir / "features.txt", dir / "labels.txt", dir / "split.txt");
}

void save_dataset_dir(const GraphDataset& ds, const std::filesystem::path& dir) {
    validate(ds);
    std::filesystem::create_directories(dir);
    auto open = [](const std::filesystem::path& p) {
        std::ofstream out(p);
        if (!out) throw InputError(p.string() + ": cannot open for writing");
        return out;
    };
    {
        auto out = open(dir / "graph.txt");
        out << ds.num_nodes << ' ' << ds.edges.size() << '\n';
        for (const auto& e : ds.edges) out << e.u << ' ' << e.v << '\n';
    }
    {
        auto out = open(dir / "features.txt");
        out << ds.num_nodes << ' ' << ds.features.cols() << '\n' << std::setprecision(17);
        for (Index i = 0; i < ds.num_nodes; ++i) {
            for (Index j = 0; j < ds.features.cols(); ++j) {
                if (j) out << ' ';
                out << ds.features(i, j);
            }
            out << '\n';
        }
    }
    {
        auto out = open(dir / "labels.txt");
        out << ds.num_nodes << ' ' << ds.num_classes << '\n';
        for (int y : ds.labels) out << y << '\n';
    }
    {
        auto out = open(dir / "split.txt");
        out << ds.num_nodes << '\n';
        for (Split s : ds.split) out << to_string(s) << '\n';
    }
}

NormalizedAdjacency build_normalized_adjacency(const SparseAdjacency& adjacency) {
    const Index n = adjacency.rows();
    SparseAdjacency b = adjacency;
    for (Index i = 0; i < n; ++i) b.coeffRef(i, i) += 1.0;
    b.makeCompressed();
    Vector inv_sqrt(n);
    for (Index i = 0; i < n; ++i) inv_sqrt(i) = 1.0 / std::sqrt(b.row(i).sum());
    for (Index i = 0; i < n; ++i) {
        for (SparseAdjacency::InnerIterator it(b, i); it; ++it) it.valueRef() *= inv_sqrt(i) * inv_sqrt(it.col());
    }
    return NormalizedAdjacency{std::move(b)};
}

NormalizedAdjacency build_normalized_adjacency(const GraphDataset& ds) {
    return build_normalized_adjacency(ds.adjacency());
}

std::size_t EdgePerturbation::pair_count() const {
    if (symmetrized) return flips.size();
    std::set<std::pair<Index, Index>> pairs;
    for (auto [i, j] : flips) pairs.emplace(std::min(i, j), std::max(i, j));
    return pairs.size();
}

Matrix apply_perturbation(const Matrix& adjacency, const Matrix& s_binary) {
    if (adjacency.rows() != s_binary.rows() || adjacency.cols() != s_binary.cols())
        throw InputError("perturbation shape does not match adjacency");
    for (Index i = 0; i < s_binary.rows(); ++i) {
        if (s_binary(i, i) != 0.0) throw InputError("perturbation has a nonzero diagonal at node " + std::to_string(i));
    }
    if (((s_binary.array() != 0.0) && (s_binary.array() != 1.0)).any())
        throw InputError("perturbation entries must be 0 or 1");
    return adjacency.array() + (1.0 - 2.0 * adjacency.array()) * s_binary.array();
}

SparseAdjacency apply_perturbation(const SparseAdjacency& adjacency, const EdgePerturbation& p) {
    const Index n = adjacency.rows();
    std::set<std::pair<Index, Index>> toggles;
    auto toggle = [&](Index i, Index j) {
        if (i == j) throw InputError("perturbation flips self-loop at node " + std::to_string(i));
        if (i < 0 || j < 0 || i >= n || j >= n) throw InputError("perturbation node id out of range");
        if (!toggles.emplace(i, j).second) throw InputError("duplicate flip " + std::to_string(i) + " " + std::to_string(j));
    };
    for (auto [i, j] : p.flips) {
        toggle(i, j);
        if (p.symmetrized) toggle(j, i);
    }
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(adjacency.nonZeros()) + toggles.size());
    for (Index i = 0; i < n; ++i) {
        for (SparseAdjacency::InnerIterator it(adjacency, i); it; ++it) {
            if (it.value() != 0.0 && !toggles.contains({i, it.col()})) triplets.emplace_back(i, it.col(), 1.0);
        }
    }
    for (auto [i, j] : toggles) {
        if (adjacency.coeff(i, j) == 0.0) triplets.emplace_back(i, j, 1.0);
    }
    SparseAdjacency out(n, n);
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

std::vector<RowRange> partition_rows(Index n, Index m) {
    if (m < 1 || m > n)
        throw InputError("partition count " + std::to_string(m) + " must lie in [1, " + std::to_string(n) + "]");
    std::vector<RowRange> parts;
    parts.reserve(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) parts.push_back({i * n / m, (i + 1) * n / m});
    return parts;
}

}  // namespace sag
