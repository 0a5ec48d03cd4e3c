#include "sag/errors.hpp"
#include "sag/gcn.hpp"

#include "oracles.hpp"
#include "temp_dir.hpp"

#include <doctest.h>

#include <cmath>

using namespace sag;
using namespace sag::testing;

namespace {

Matrix dense_of(const GraphDataset& ds) { return naive_normalize(dense_adjacency(ds) + Matrix::Identity(ds.num_nodes, ds.num_nodes)); }

}  // namespace

TEST_SUITE("gcn") {

TEST_CASE("forward examples") {
    SUBCASE("zero logits on a single node give uniform probabilities") {
        SparseAdjacency a(1, 1);
        const auto adj = build_normalized_adjacency(a);
        Rng rng(1);
        const auto p = forward(adj, Matrix::Zero(1, 2), random_matrix(2, 5, rng));
        for (Index c = 0; c < 5; ++c) CHECK(p.probs(0, c) == doctest::Approx(0.2));
    }
    SUBCASE("zero weights give uniform probabilities everywhere") {
        const auto ds = random_dataset(6, 4, 3, 0.5, 2);
        const auto p = forward(build_normalized_adjacency(ds), ds.features, Matrix::Zero(4, 3));
        CHECK((p.probs.array() - 1.0 / 3.0).abs().maxCoeff() <= 1e-15);
        CHECK(p.predicted_labels == std::vector<int>(6, 0));  // ties go to the lowest class
    }
    SUBCASE("random instance matches the naive oracle") {
        Rng rng(3);
        const auto ds = random_dataset(6, 4, 3, 0.5, 3);
        const Matrix w = random_matrix(4, 3, rng);
        const auto p = forward(build_normalized_adjacency(ds), ds.features, w);
        CHECK((p.probs - naive_forward(dense_of(ds), ds.features, w)).cwiseAbs().maxCoeff() <= 1e-10);
    }
    SUBCASE("shape mismatch") {
        const auto ds = random_dataset(6, 4, 3, 0.5, 3);
        CHECK_THROWS_AS(forward(build_normalized_adjacency(ds), ds.features, Matrix::Zero(5, 3)), InputError);
    }
}

TEST_CASE("softmax rows sum to one for large logits") {
    Rng rng(4);
    const Matrix z = random_matrix(50, 6, rng, -1e3, 1e3);
    const auto p = softmax_rows(z);
    for (Index i = 0; i < z.rows(); ++i) {
        CHECK(std::abs(p.probs.row(i).sum() - 1.0) <= 1e-9);
        Index best = 0;
        z.row(i).maxCoeff(&best);
        CHECK(p.predicted_labels[static_cast<std::size_t>(i)] == best);
    }
    CHECK(p.probs.allFinite());
}

TEST_CASE("cross_entropy examples") {
    SUBCASE("uniform probabilities over seven classes") {
        const auto p = softmax_rows(Matrix::Zero(1, 7));
        const std::vector<int> y{3};
        const std::vector<Index> nodes{0};
        CHECK(cross_entropy(p, y, nodes) == doctest::Approx(std::log(7.0)).epsilon(1e-12));
        CHECK(cross_entropy(p, y, nodes) == doctest::Approx(1.9459).epsilon(1e-4));
    }
    SUBCASE("a perfect prediction contributes about zero") {
        Matrix z = Matrix::Zero(1, 3);
        z(0, 1) = 800.0;
        const std::vector<int> y{1};
        const std::vector<Index> nodes{0};
        CHECK(cross_entropy(softmax_rows(z), y, nodes) == doctest::Approx(0.0));
    }
    SUBCASE("a vanishing probability is floored") {
        Matrix z = Matrix::Zero(1, 2);
        z(0, 0) = 1e4;
        const std::vector<int> y{1};
        const std::vector<Index> nodes{0};
        CHECK(cross_entropy(softmax_rows(z), y, nodes) == doctest::Approx(-std::log(kProbabilityFloor)));
    }
    SUBCASE("random instance matches per-node summation") {
        Rng rng(8);
        const auto p = softmax_rows(random_matrix(10, 4, rng, -3, 3));
        const auto t = all_node_targets(10, 4, rng);
        std::vector<Index> some{1, 4, 7, 9};
        AttackTargets sub{some, t.labels};
        CHECK(std::abs(cross_entropy(p, t.labels, some) - naive_loss(p.probs, sub)) <= 1e-12);
    }
    SUBCASE("empty node set") {
        const auto p = softmax_rows(Matrix::Zero(1, 2));
        const std::vector<int> y{0};
        CHECK_THROWS_AS(cross_entropy(p, y, std::vector<Index>{}), InputError);
    }
}

TEST_CASE("accuracy examples") {
    Matrix z(4, 2);
    z << 1, 0, 0, 1, 1, 0, 0, 1;  // predictions 0 1 0 1
    const auto p = softmax_rows(z);
    const std::vector<Index> nodes{0, 1, 2, 3};
    CHECK(accuracy(p, std::vector<int>{0, 1, 0, 1}, nodes) == 1.0);
    CHECK(accuracy(p, std::vector<int>{1, 0, 1, 0}, nodes) == 0.0);
    CHECK(accuracy(p, std::vector<int>{0, 1, 1, 0}, nodes) == 0.5);
    CHECK_THROWS_AS(accuracy(p, std::vector<int>{0, 1, 1, 0}, std::vector<Index>{}), InputError);
}

TEST_CASE("surrogate training") {
    SUBCASE("separable two-component graph reaches train accuracy 1") {
        GraphDataset ds;
        ds.num_nodes = 8;
        ds.num_classes = 2;
        ds.edges = {{0, 1}, {1, 2}, {2, 3}, {4, 5}, {5, 6}, {6, 7}};
        ds.features = Matrix::Zero(8, 2);
        for (Index i = 0; i < 8; ++i) {
            ds.features(i, i < 4 ? 0 : 1) = 1.0;
            ds.labels.push_back(i < 4 ? 0 : 1);
            ds.split.push_back(i % 2 == 0 ? Split::train : Split::test);
        }
        const auto m = train_surrogate(ds, TrainHyper{0.5, 200, 5e-4, 1});
        CHECK(m.train_accuracy == 1.0);
        CHECK(accuracy(forward(build_normalized_adjacency(ds), ds.features, m.weights), ds.labels,
                       ds.nodes_in(Split::test)) == 1.0);
    }
    SUBCASE("zero epochs return the initialization") {
        const auto ds = random_dataset(10, 4, 3, 0.3, 1);
        const auto m = train_surrogate(ds, TrainHyper{0.01, 0, 5e-4, 42});
        CHECK(m.weights == initial_weights(4, 3, 42));
    }
    SUBCASE("deterministic for a fixed seed") {
        const auto ds = random_dataset(30, 5, 3, 0.2, 9);
        const auto a = train_surrogate(ds, TrainHyper{0.05, 50, 5e-4, 7});
        const auto b = train_surrogate(ds, TrainHyper{0.05, 50, 5e-4, 7});
        CHECK(a.weights == b.weights);
        CHECK(a.weights != train_surrogate(ds, TrainHyper{0.05, 50, 5e-4, 8}).weights);
    }
    SUBCASE("divergence reports the epoch") {
        const auto ds = random_dataset(10, 3, 2, 0.3, 1);
        try {
            // the weight-decay term alone overflows the weights
            train_surrogate(ds, TrainHyper{1e300, 20, 1.0, 1});
            FAIL("expected a numerical error");
        } catch (const NumericalError& e) {
            CHECK(std::string(e.what()).find("epoch") != std::string::npos);
        }
    }
    SUBCASE("empty train split") {
        auto ds = random_dataset(10, 3, 2, 0.3, 1);
        for (auto& s : ds.split)
            if (s == Split::train) s = Split::none;
        CHECK_THROWS_AS(train_surrogate(ds, TrainHyper{}), InputError);
    }
}

TEST_CASE("initial weights are zero-mean and scaled by 1/sqrt(fan_in)") {
    const Matrix w = initial_weights(400, 50, 3);
    CHECK(w.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(400.0));
    CHECK(std::abs(w.mean()) < 0.01 / std::sqrt(400.0) * 10);
}

TEST_CASE("grad_features") {
    SUBCASE("zero weights give a zero gradient") {
        const auto ds = random_dataset(8, 5, 3, 0.4, 1);
        Rng rng(1);
        const auto t = all_node_targets(8, 3, rng);
        CHECK(grad_features(build_normalized_adjacency(ds), ds.features, Matrix::Zero(5, 3), t).isZero(0.0));
    }
    SUBCASE("central finite differences on random instances") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            Rng rng(seed);
            const auto ds = random_dataset(8, 5, 3, 0.4, seed);
            const Matrix w = random_matrix(5, 3, rng);
            AttackTargets t = all_node_targets(8, 3, rng);
            t.nodes = {0, 2, 3, 6};
            const Matrix ahat = dense_of(ds);
            const Matrix g = grad_features(build_normalized_adjacency(ds), ds.features, w, t);
            CHECK(normwise_relative_error(g, fd_feature_gradient(ahat, ds.features, w, t)) <= 1e-4);
        }
    }
    SUBCASE("all-node targets match per-node accumulation") {
        Rng rng(12);
        const auto ds = random_dataset(8, 5, 3, 0.4, 12);
        const Matrix w = random_matrix(5, 3, rng);
        const auto t = all_node_targets(8, 3, rng);
        const Matrix ahat = dense_of(ds);
        const Matrix p = naive_forward(ahat, ds.features, w);
        // d(-loss)/dX = -sum_v sum_c (p_vc - y_vc) * ahat(v, :)^T w(:, c)^T
        Matrix expect = Matrix::Zero(8, 5);
        for (Index v : t.nodes)
            for (Index c = 0; c < 3; ++c) {
                const double r = p(v, c) - (t.labels[static_cast<std::size_t>(v)] == c ? 1.0 : 0.0);
                for (Index u = 0; u < 8; ++u)
                    for (Index f = 0; f < 5; ++f) expect(u, f) -= r * ahat(v, u) * w(f, c);
            }
        const Matrix g = grad_features(build_normalized_adjacency(ds), ds.features, w, t);
        CHECK((g - expect).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("grad_topology") {
    SUBCASE("central finite differences through the normalization") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            Rng rng(100 + seed);
            const Index n = 8;
            const auto ds = random_dataset(n, 4, 3, 0.35, seed);
            const Matrix w = random_matrix(4, 3, rng, -2, 2);
            AttackTargets t = all_node_targets(n, 3, rng);
            t.nodes = {1, 2, 5, 7};
            const auto s = random_probabilities(n, {RowRange{0, n}}, rng);
            const SparseAdjacency clean = ds.adjacency();
            const RelaxedAdjacency adj(clean, s);
            const Matrix g = grad_topology(adj, ds.features, w, t, RowRange{0, n});
            const Matrix fd = fd_topology_gradient(dense_adjacency(ds), Matrix(s.dense()), ds.features, w, t);
            CHECK(normwise_relative_error(g, fd) <= 1e-4);
            CHECK(g.diagonal().isZero(0.0));
        }
    }
    SUBCASE("partition blocks tile the full gradient") {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            Rng rng(seed);
            const Index n = 11;
            const auto ds = random_dataset(n, 3, 2, 0.3, seed);
            const Matrix w = random_matrix(3, 2, rng);
            const auto t = all_node_targets(n, 2, rng);
            const SparseAdjacency clean = ds.adjacency();
            const auto full_s = random_probabilities(n, {RowRange{0, n}}, rng);
            const RowMatrix full = grad_topology(RelaxedAdjacency(clean, full_s), ds.features, w, t, RowRange{0, n});
            for (Index m : {2, 3, 4}) {
                const auto parts = partition_rows(n, m);
                ProbabilityMatrix blocked(n, parts);
                for (std::size_t b = 0; b < parts.size(); ++b)
                    blocked.block(b) = full_s.block(0).middleRows(parts[b].begin, parts[b].size());
                const RelaxedAdjacency adj(clean, blocked);
                for (const auto& p : parts) {
                    const RowMatrix g = grad_topology(adj, ds.features, w, t, p);
                    CHECK((g - full.middleRows(p.begin, p.size())).cwiseAbs().maxCoeff() <= 1e-10);
                }
            }
        }
    }
    SUBCASE("entries outside [0,1] are rejected") {
        const auto ds = random_dataset(5, 2, 2, 0.5, 1);
        ProbabilityMatrix s(5, {RowRange{0, 5}});
        s.block(0)(1, 2) = 1.5;
        Rng rng(1);
        const auto t = all_node_targets(5, 2, rng);
        const SparseAdjacency clean = ds.adjacency();
        CHECK_THROWS_AS(grad_topology(RelaxedAdjacency(clean, s), ds.features, Matrix::Ones(2, 2), t, RowRange{0, 5}),
                        InputError);
    }
}

TEST_CASE("relaxed adjacency matches the dense construction") {
    Rng rng(77);
    const Index n = 9;
    const auto ds = random_dataset(n, 2, 2, 0.3, 77);
    const auto s = random_probabilities(n, partition_rows(n, 3), rng, 0.0, 1.0);
    const SparseAdjacency clean = ds.adjacency();
    const RelaxedAdjacency adj(clean, s);
    const Matrix expect = naive_normalize(relaxed_dense(dense_adjacency(ds), Matrix(s.dense())));
    CHECK((adj.dense() - expect).cwiseAbs().maxCoeff() <= 1e-12);
    const Matrix h = random_matrix(n, 3, rng);
    CHECK((adj.propagate(h) - expect * h).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((adj.propagate_transpose(h) - expect.transpose() * h).cwiseAbs().maxCoeff() <= 1e-12);

    Rng lrng(5);
    const Matrix w = random_matrix(2, 2, lrng);
    const auto t = all_node_targets(n, 2, lrng);
    CHECK(std::abs(attack_loss(adj, ds.features, w, t) -
                   dense_attack_loss(dense_adjacency(ds), Matrix(s.dense()), ds.features, w, t)) <= 1e-10);
}

TEST_CASE("multi-layer forward") {
    Rng rng(21);
    const auto ds = random_dataset(7, 4, 3, 0.4, 21);
    const auto adj = build_normalized_adjacency(ds);
    SUBCASE("one layer equals forward") {
        const std::vector<Matrix> ws{random_matrix(4, 3, rng)};
        CHECK((forward_multilayer(adj, ds.features, std::span<const Matrix>(ws)).probs -
               forward(adj, ds.features, ws[0]).probs)
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
    }
    SUBCASE("single node with non-negative weights: softmax of A A X W1 W2") {
        SparseAdjacency one(1, 1);
        const auto a1 = build_normalized_adjacency(one);
        Matrix x(1, 2);
        x << 0.5, 2.0;
        const Matrix w1 = Matrix::Identity(2, 2);
        Matrix w2(2, 3);
        w2 << 1, 0, 2, 0, 1, 1;
        const std::vector<Matrix> ws{w1, w2};
        const auto p = forward_multilayer(a1, x, std::span<const Matrix>(ws));
        CHECK((p.probs - naive_softmax(x * w1 * w2)).cwiseAbs().maxCoeff() <= 1e-15);
    }
    SUBCASE("two layers match a naive ReLU oracle") {
        const std::vector<Matrix> ws{random_matrix(4, 5, rng), random_matrix(5, 3, rng)};
        const Matrix ahat = dense_of(ds);
        const Matrix h = naive_product(ahat, naive_product(ds.features, ws[0])).cwiseMax(0.0);
        const Matrix expect = naive_forward(ahat, h, ws[1]);
        CHECK((forward_multilayer(adj, ds.features, std::span<const Matrix>(ws)).probs - expect).cwiseAbs().maxCoeff() <=
              1e-10);
    }
    SUBCASE("shape mismatch") {
        const std::vector<Matrix> ws{random_matrix(4, 5, rng), random_matrix(4, 3, rng)};
        CHECK_THROWS_AS(forward_multilayer(adj, ds.features, std::span<const Matrix>(ws)), InputError);
    }
}

TEST_CASE("multi-layer training fits a separable graph") {
    const auto ds = random_dataset(40, 6, 2, 0.1, 3);
    GraphDataset sep = ds;
    for (Index i = 0; i < 40; ++i) {
        sep.labels[static_cast<std::size_t>(i)] = ds.features(i, 0) > 0.5 ? 1 : 0;
        sep.features(i, 1) = sep.labels[static_cast<std::size_t>(i)] ? 3.0 : -3.0;
    }
    // keep only edges inside a class so propagation cannot mix the two
    std::erase_if(sep.edges, [&](const Edge& e) {
        return sep.labels[static_cast<std::size_t>(e.u)] != sep.labels[static_cast<std::size_t>(e.v)];
    });
    const auto adj = build_normalized_adjacency(sep);
    for (bool adam : {true, false}) {
        LayeredHyper h;
        h.layers = 2;
        h.adam = adam;
        h.train = TrainHyper{adam ? 0.05 : 0.1, 300, 0.0, 1};
        const auto m = train_multilayer(adj, sep.features, sep.labels, sep.nodes_in(Split::train), sep.nodes_in(Split::val), 2, h);
        CHECK(m.weights.size() == 2);
        CHECK(m.train_accuracy >= 0.9);
    }
}

TEST_CASE("checkpoint round-trip") {
    TempDir dir;
    Rng rng(3);
    SurrogateModel m;
    m.weights = random_matrix(6, 3, rng);
    m.hyper = TrainHyper{0.02, 17, 1e-3, 99};
    save_checkpoint(m, dir / "w.txt");
    const auto back = load_checkpoint(dir / "w.txt");
    CHECK(back.weights == m.weights);
    CHECK(back.hyper.seed == 99);
    CHECK(back.hyper.epochs == 17);
    const auto text = read_file(dir / "w.txt");
    CHECK(text.rfind("# ", 0) == 0);
    CHECK(text.find("seed=99") != std::string::npos);
    CHECK(text.find("\n6 3\n") != std::string::npos);

    dir.write("bad.txt", "2 2\n1 2\n3\n");
    CHECK_THROWS_AS(load_checkpoint(dir / "bad.txt"), InputError);
}

}  // TEST_SUITE
