#include "sag/gcn.hpp"

#include "sag/errors.hpp"
#include "text_reader.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace sag {

namespace detail {

void check_shapes(Index n, const Matrix& x, const Matrix& w) {
    if (x.rows() != n) throw InputError("feature rows (" + std::to_string(x.rows()) + ") do not match adjacency size (" + std::to_string(n) + ")");
    if (x.cols() != w.rows()) throw InputError("feature width (" + std::to_string(x.cols()) + ") does not match weight rows (" + std::to_string(w.rows()) + ")");
}

Matrix loss_seed(const Prediction& pred, const AttackTargets& targets) {
    Matrix seed = Matrix::Zero(pred.probs.rows(), pred.probs.cols());
    for (Index v : targets.nodes) {
        seed.row(v) = pred.probs.row(v);
        seed(v, targets.labels[static_cast<std::size_t>(v)]) -= 1.0;
    }
    return seed;
}

}  // namespace detail

Prediction softmax_rows(const Matrix& logits) {
    Prediction out;
    out.probs.resize(logits.rows(), logits.cols());
    out.predicted_labels.resize(static_cast<std::size_t>(logits.rows()));
    for (Index i = 0; i < logits.rows(); ++i) {
        Index arg = 0;
        const double m = logits.row(i).maxCoeff(&arg);
        // maxCoeff returns the first maximum, which is the lowest class index.
        out.probs.row(i) = (logits.row(i).array() - m).exp();
        out.probs.row(i) /= out.probs.row(i).sum();
        out.predicted_labels[static_cast<std::size_t>(i)] = static_cast<int>(arg);
    }
    return out;
}

double cross_entropy(const Prediction& pred, std::span<const int> labels, std::span<const Index> nodes) {
    if (nodes.empty()) throw InputError("cross_entropy: empty node set");
    double loss = 0.0;
    for (Index v : nodes) {
        const int y = labels[static_cast<std::size_t>(v)];
        if (y < 0 || y >= pred.probs.cols()) throw InputError("cross_entropy: invalid label at node " + std::to_string(v));
        loss -= std::log(std::max(pred.probs(v, y), kProbabilityFloor));
    }
    return loss;
}

double accuracy(const Prediction& pred, std::span<const int> labels, std::span<const Index> nodes) {
    if (nodes.empty()) throw InputError("accuracy: empty node set");
    std::size_t hits = 0;
    for (Index v : nodes) {
        if (pred.predicted_labels[static_cast<std::size_t>(v)] == labels[static_cast<std::size_t>(v)]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(nodes.size());
}

Matrix initial_weights(Index rows, Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
    Matrix w(rows, cols);
    // Filled row by row with an explicit 53-bit mapping so the values do not
    // depend on the standard library's distribution implementation.
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            w(i, j) = (2.0 * u - 1.0) * scale;
        }
    }
    return w;
}

namespace {

void require_finite(double loss, int epoch) {
    if (!std::isfinite(loss)) throw NumericalError("training diverged: loss is non-finite at epoch " + std::to_string(epoch));
}

}  // namespace

SurrogateModel train_surrogate(const NormalizedAdjacency& adj, const Matrix& x, std::span<const int> labels,
                               std::span<const Index> train_nodes, std::span<const Index> val_nodes,
                               int num_classes, const TrainHyper& hyper) {
    if (train_nodes.empty()) throw InputError("train_surrogate: train split is empty");
    if (hyper.epochs < 0) throw InputError("train_surrogate: negative epoch count");
    SurrogateModel model;
    model.hyper = hyper;
    model.weights = initial_weights(x.cols(), num_classes, hyper.seed);

    const Matrix ax = adj.propagate(x);
    Matrix ax_train(static_cast<Index>(train_nodes.size()), x.cols());
    for (std::size_t k = 0; k < train_nodes.size(); ++k) ax_train.row(static_cast<Index>(k)) = ax.row(train_nodes[k]);

    for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
        const auto pred = softmax_rows(ax_train * model.weights);
        double loss = 0.0;
        Matrix seed = pred.probs;
        for (std::size_t k = 0; k < train_nodes.size(); ++k) {
            const int y = labels[static_cast<std::size_t>(train_nodes[k])];
            loss -= std::log(std::max(pred.probs(static_cast<Index>(k), y), kProbabilityFloor));
            seed(static_cast<Index>(k), y) -= 1.0;
        }
        require_finite(loss, epoch);
        const Matrix grad = ax_train.transpose() * seed + hyper.weight_decay * model.weights;
        model.weights -= hyper.learning_rate * grad;
        if (!model.weights.allFinite()) throw NumericalError("training diverged: weights are non-finite at epoch " + std::to_string(epoch));
    }

    const auto pred = softmax_rows(ax * model.weights);
    model.train_accuracy = accuracy(pred, labels, train_nodes);
    model.val_accuracy = val_nodes.empty() ? 0.0 : accuracy(pred, labels, val_nodes);
    return model;
}

SurrogateModel train_surrogate(const GraphDataset& ds, const TrainHyper& hyper) {
    const auto train = ds.nodes_in(Split::train);
    const auto val = ds.nodes_in(Split::val);
    return train_surrogate(build_normalized_adjacency(ds), ds.features, ds.labels, train, val, ds.num_classes, hyper);
}

double attack_loss(const RelaxedAdjacency& adj, const Matrix& x, const Matrix& w, const AttackTargets& targets) {
    return cross_entropy(forward(adj, x, w), targets.labels, targets.nodes);
}

RowMatrix grad_topology(const RelaxedAdjacency& adj, const Matrix& x, const Matrix& w,
                        const AttackTargets& targets, RowRange rows) {
    detail::check_shapes(adj.size(), x, w);
    const Index n = adj.size();
    if (rows.begin < 0 || rows.end > n || rows.begin > rows.end) throw InputError("grad_topology: row range out of bounds");
    const auto& s = adj.perturbation();
    for (Index i = rows.begin; i < rows.end; ++i) {
        for (Index j = 0; j < n; ++j) {
            const double v = s(i, j);
            if (!(v >= 0.0 && v <= 1.0)) throw InputError("grad_topology: S entry (" + std::to_string(i) + "," + std::to_string(j) + ") outside [0,1]");
        }
    }

    const Vector& r = adj.inv_sqrt_degrees();
    const Matrix p = x * w;
    const Matrix logits = adj.propagate(p);
    const Matrix seed = detail::loss_seed(softmax_rows(logits), targets);
    const Matrix back = adj.propagate_transpose(seed);

    // d loss / d degree_i, from both the row and the column normalization factor.
    const Index m = rows.size();
    Vector degree_grad(m);
    for (Index k = 0; k < m; ++k) {
        const Index i = rows.begin + k;
        degree_grad(k) = -0.5 * r(i) * r(i) * (seed.row(i).dot(logits.row(i)) + back.row(i).dot(p.row(i)));
    }

    const Matrix scaled_p = r.asDiagonal() * p;
    const Matrix scaled_seed = r.segment(rows.begin, m).asDiagonal() * seed.middleRows(rows.begin, m);
    RowMatrix g(m, n);
    g.noalias() = scaled_seed * scaled_p.transpose();
    g.colwise() += degree_grad;
    g = -g;
    // dB_ij/dS_ij = 1 - 2 A_ij; self-loops are never perturbed.
    const auto& a = adj.clean();
    for (Index k = 0; k < m; ++k) {
        const Index i = rows.begin + k;
        for (SparseAdjacency::InnerIterator it(a, i); it; ++it) g(k, it.col()) = -g(k, it.col());
        g(k, i) = 0.0;
    }
    return g;
}

LayeredModel train_multilayer(const NormalizedAdjacency& adj, const Matrix& x, std::span<const int> labels,
                              std::span<const Index> train_nodes, std::span<const Index> val_nodes,
                              int num_classes, const LayeredHyper& hyper) {
    if (hyper.layers < 1) throw InputError("train_multilayer: at least one layer required");
    if (train_nodes.empty()) throw InputError("train_multilayer: train split is empty");
    const auto layers = static_cast<std::size_t>(hyper.layers);
    LayeredModel model;
    for (std::size_t l = 0; l < layers; ++l) {
        const Index in = l == 0 ? x.cols() : hyper.hidden;
        const Index out = l + 1 == layers ? num_classes : hyper.hidden;
        model.weights.push_back(initial_weights(in, out, hyper.train.seed + l));
    }

    std::vector<Matrix> m1, m2;
    for (const auto& w : model.weights) {
        m1.push_back(Matrix::Zero(w.rows(), w.cols()));
        m2.push_back(Matrix::Zero(w.rows(), w.cols()));
    }
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

    const Matrix ax = adj.propagate(x);
    std::vector<Matrix> inputs(layers), pre(layers);
    for (int epoch = 1; epoch <= hyper.train.epochs; ++epoch) {
        // Forward, keeping layer inputs and pre-activations.
        Matrix h = x;
        for (std::size_t l = 0; l < layers; ++l) {
            inputs[l] = h;
            pre[l] = l == 0 ? Matrix(ax * model.weights[0]) : adj.propagate(h * model.weights[l]);
            h = l + 1 < layers ? Matrix(pre[l].cwiseMax(0.0)) : pre[l];
        }
        const auto pred = softmax_rows(h);
        double loss = 0.0;
        Matrix delta = Matrix::Zero(h.rows(), h.cols());
        for (Index v : train_nodes) {
            const int y = labels[static_cast<std::size_t>(v)];
            loss -= std::log(std::max(pred.probs(v, y), kProbabilityFloor));
            delta.row(v) = pred.probs.row(v);
            delta(v, y) -= 1.0;
        }
        require_finite(loss, epoch);

        for (std::size_t l = layers; l-- > 0;) {
            const Matrix back = adj.propagate_transpose(delta);
            Matrix grad = inputs[l].transpose() * back + hyper.train.weight_decay * model.weights[l];
            if (l > 0) delta = (back * model.weights[l].transpose()).cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
            if (hyper.adam) {
                m1[l] = beta1 * m1[l] + (1.0 - beta1) * grad;
                m2[l] = beta2 * m2[l] + (1.0 - beta2) * grad.cwiseProduct(grad);
                const double c1 = 1.0 - std::pow(beta1, epoch);
                const double c2 = 1.0 - std::pow(beta2, epoch);
                model.weights[l].array() -= hyper.train.learning_rate * (m1[l].array() / c1) / ((m2[l].array() / c2).sqrt() + adam_eps);
            } else {
                model.weights[l] -= hyper.train.learning_rate * grad;
            }
        }
    }

    const auto pred = forward_multilayer(adj, x, std::span<const Matrix>(model.weights));
    model.train_accuracy = accuracy(pred, labels, train_nodes);
    model.val_accuracy = val_nodes.empty() ? 0.0 : accuracy(pred, labels, val_nodes);
    return model;
}

void save_checkpoint(const SurrogateModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError(path.string() + ": cannot open for writing");
    const auto& h = model.hyper;
    out << "# seed=" << h.seed << " epochs=" << h.epochs << " lr=" << std::setprecision(17) << h.learning_rate
        << " weight_decay=" << h.weight_decay << '\n';
    out << model.weights.rows() << ' ' << model.weights.cols() << '\n';
    for (Index i = 0; i < model.weights.rows(); ++i) {
        for (Index j = 0; j < model.weights.cols(); ++j) {
            if (j) out << ' ';
            out << model.weights(i, j);
        }
        out << '\n';
    }
    if (!out) throw InputError(path.string() + ": write failed");
}

SurrogateModel load_checkpoint(const std::filesystem::path& path) {
    SurrogateModel model;
    {
        // The metadata line is a comment to the numeric reader; parse it first.
        std::ifstream in(path);
        if (!in) throw InputError(path.string() + ": cannot open file");
        std::string line;
        while (std::getline(in, line)) {
            if (line.rfind('#', 0) != 0) break;
            std::istringstream ss(line.substr(1));
            std::string kv;
            while (ss >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                const auto key = kv.substr(0, eq);
                const auto val = kv.substr(eq + 1);
                try {
                    if (key == "seed") model.hyper.seed = std::stoull(val);
                    else if (key == "epochs") model.hyper.epochs = std::stoi(val);
                    else if (key == "lr") model.hyper.learning_rate = std::stod(val);
                    else if (key == "weight_decay") model.hyper.weight_decay = std::stod(val);
                } catch (const std::exception&) {
                    throw InputError(path.string() + ":1: malformed metadata value \"" + kv + "\"");
                }
            }
        }
    }
    detail::TextReader r(path);
    auto head = r.next_tokens();
    if (!head || head->size() != 2) r.fail("expected header \"D C\"");
    const Index d = r.parse_int((*head)[0]);
    const Index c = r.parse_int((*head)[1]);
    if (d <= 0 || c <= 0) r.fail("malformed header \"D C\"");
    model.weights.resize(d, c);
    for (Index i = 0; i < d; ++i) {
        auto tok = r.next_tokens();
        if (!tok || static_cast<Index>(tok->size()) != c) r.fail("expected " + std::to_string(c) + " weights per row");
        for (Index j = 0; j < c; ++j) model.weights(i, j) = r.parse_real((*tok)[static_cast<std::size_t>(j)]);
    }
    if (!model.weights.allFinite()) throw InputError(path.string() + ": non-finite weight");
    return model;
}

}  // namespace sag
