#include "sag/admm_attack.hpp"

#include "sag/errors.hpp"
#include "sag/projections.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace sag {

void AttackConfig::validate() const {
    if (partitions < 1) throw InputError("partition count must be at least 1");
    if (epochs < 0) throw InputError("epoch count must be non-negative");
    if (!(rho > 0.0)) throw InputError("rho must be positive");
    if (!(eta_x >= 0.0) || !(eta_s >= 0.0)) throw InputError("step sizes must be non-negative");
    if (!(topology_ratio >= 0.0 && topology_ratio <= 1.0)) throw InputError("topology ratio must lie in [0,1]");
    if (!(feature_ratio >= 0.0 && feature_ratio <= 1.0)) throw InputError("feature ratio must lie in [0,1]");
    if (sample_trials < 1) throw InputError("sample trial count must be at least 1");
}

AttackBudget make_budget(const GraphDataset& ds, double topology_ratio, double feature_ratio, Index partitions) {
    if (partitions < 1) throw InputError("partition count must be at least 1");
    AttackBudget b;
    b.eps_a = static_cast<std::int64_t>(std::floor(topology_ratio * static_cast<double>(ds.undirected_edge_count())));
    const double radius = feature_ratio * ds.features.norm();
    b.eps_x = radius * radius;
    b.eps_i = static_cast<double>(b.eps_a) / static_cast<double>(partitions);
    return b;
}

AttackTargets make_targets(const GraphDataset& ds, const Matrix& weights, AttackMode mode) {
    AttackTargets t;
    if (mode == AttackMode::evasive) {
        t.nodes = ds.nodes_in(Split::test);
        t.labels = forward(build_normalized_adjacency(ds), ds.features, weights).predicted_labels;
    } else {
        t.nodes = ds.nodes_in(Split::train);
        t.labels = ds.labels;
    }
    if (t.nodes.empty()) throw InputError(mode == AttackMode::evasive ? "no test nodes to attack" : "no train nodes to attack");
    return t;
}

namespace {

template <class M>
void require_finite(const M& g, int epoch, std::size_t part, const char* what) {
    if (!g.allFinite())
        throw NumericalError(std::string("non-finite ") + what + " gradient at epoch " + std::to_string(epoch) +
                             ", partition " + std::to_string(part));
}

double uniform53(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

SagAttack::SagAttack(const GraphDataset& ds, const SurrogateModel& model, AttackConfig config)
    : ds_(&ds), weights_(model.weights), config_(config) {
    config_.validate();
    if (config_.partitions > ds.num_nodes)
        throw InputError("partition count " + std::to_string(config_.partitions) + " exceeds node count " + std::to_string(ds.num_nodes));
    detail::check_shapes(ds.num_nodes, ds.features, weights_);
    if (weights_.cols() != ds.num_classes) throw InputError("weight columns do not match class count");
    budget_ = make_budget(ds, config_.topology_ratio, config_.feature_ratio, config_.partitions);
    targets_ = make_targets(ds, weights_, config_.mode);
    clean_ = ds.adjacency();
    parts_ = partition_rows(ds.num_nodes, config_.partitions);
}

PerturbationState SagAttack::init_state() {
    const Index n = ds_->num_nodes;
    const auto m = static_cast<std::size_t>(config_.partitions);
    PerturbationState st;
    st.s = ProbabilityMatrix(n, parts_);
    if (config_.init == InitMode::paper) {
        for (std::size_t b = 0; b < m; ++b) {
            const auto& p = parts_[b];
            for (Index i = p.begin; i < p.end; ++i) {
                for (SparseAdjacency::InnerIterator it(clean_, i); it; ++it) st.s.block(b)(i - p.begin, it.col()) = 1.0;
            }
        }
    }
    st.features.assign(m, ds_->features);
    st.duals.assign(m, Matrix::Zero(ds_->features.rows(), ds_->features.cols()));
    st.epoch = 0;

    resident_.clear();
    const auto nd = static_cast<std::size_t>(ds_->features.size());
    resident_.push_back(ledger_.acquire(BufferKind::perturbation_blocks, st.s.element_count()));
    resident_.push_back(ledger_.acquire(BufferKind::feature_copies, m * nd));
    resident_.push_back(ledger_.acquire(BufferKind::duals, m * nd));
    return st;
}

double SagAttack::feature_step(int k) const { return config_.eta_x / std::sqrt(static_cast<double>(std::max(k, 1))); }

void SagAttack::project_block(PerturbationState& state, std::size_t i) const {
    auto& block = state.s.block(i);
    const auto& p = parts_[i];
    for (Index r = p.begin; r < p.end; ++r) block(r - p.begin, r) = 0.0;
    project_box_budget_inplace(block, BoxBudgetSet{budget_.eps_i});
}

void SagAttack::feature_update(PerturbationState& state, std::size_t i) {
    if (budget_.eps_x == 0.0) return;  // the feasible set is the single point X
    const int k = state.epoch + 1;
    const auto j = next_copy(i);
    Matrix& xi = state.features[i];
    auto lease = ledger_.acquire(BufferKind::feature_gradient, static_cast<std::size_t>(xi.size()));
    const RelaxedAdjacency adj(clean_, state.s);
    Matrix g = grad_features(adj, xi, weights_, targets_);
    g += config_.rho * (xi - state.features[j]) + state.duals[i];
    require_finite(g, k, i, "feature");
    xi = project_l2_ball(xi - feature_step(k) * g, L2BallSet{ds_->features, budget_.eps_x});
}

void SagAttack::topology_update(PerturbationState& state, std::size_t i) {
    const int k = state.epoch + 1;
    const auto& p = parts_[i];
    auto lease = ledger_.acquire(BufferKind::topology_gradient, static_cast<std::size_t>(p.size() * ds_->num_nodes));
    RowMatrix g;
    {
        const RelaxedAdjacency adj(clean_, state.s);
        g = grad_topology(adj, state.features[i], weights_, targets_, p);
    }
    require_finite(g, k, i, "topology");
    state.s.block(i) -= config_.eta_s * g;
    project_block(state, i);
}

void SagAttack::dual_update(PerturbationState& state, std::size_t i) const {
    state.duals[i] += config_.rho * (state.features[i] - state.features[next_copy(i)]);
}

double SagAttack::evaluate_loss(const PerturbationState& state, std::size_t copy) const {
    const RelaxedAdjacency adj(clean_, state.s);
    return attack_loss(adj, state.features[copy], weights_, targets_);
}

namespace {

EpochRecord describe(const SagAttack& attack, const PerturbationState& st) {
    EpochRecord rec;
    rec.epoch = st.epoch;
    rec.attack_loss = attack.evaluate_loss(st, 0);
    const auto m = st.features.size();
    for (std::size_t i = 0; i < m; ++i) rec.consensus_residuals.push_back((st.features[i] - st.features[(i + 1) % m]).norm());
    return rec;
}

}  // namespace

Trajectory SagAttack::run(PerturbationState& state, const EpochObserver& observer) {
    Trajectory traj;
    const auto m = static_cast<std::size_t>(config_.partitions);
    if (state.epoch == 0 && config_.epochs > 0) {
        // S starts at A under the paper initialization; bring it into the
        // budget set before its first use.
        for (std::size_t i = 0; i < m; ++i) project_block(state, i);
    }
    traj.epochs.push_back(describe(*this, state));
    for (int k = 1; k <= config_.epochs; ++k) {
        for (std::size_t i = 0; i < m; ++i) {
            feature_update(state, i);
            topology_update(state, i);
            dual_update(state, i);
        }
        state.epoch = k;
        traj.epochs.push_back(describe(*this, state));
        if (!std::isfinite(traj.epochs.back().attack_loss))
            throw NumericalError("attack loss is non-finite after epoch " + std::to_string(k));
        if (observer) observer(state, traj.epochs.back());
    }
    traj.peaks = snapshot_peaks(ledger_);
    return traj;
}

Matrix SagAttack::consensus_features(const PerturbationState& state) const {
    Matrix mean = Matrix::Zero(ds_->features.rows(), ds_->features.cols());
    for (const auto& x : state.features) mean += x;
    mean /= static_cast<double>(state.features.size());
    return project_l2_ball(mean, L2BallSet{ds_->features, budget_.eps_x});
}

SampleOutcome SagAttack::sample(const ProbabilityMatrix& s, const Matrix& features) const {
    return sample_binary(s, clean_, features, weights_, targets_, budget_.eps_a, config_.symmetrize_flips,
                         config_.sample_trials, config_.seed);
}

PerturbationResult SagAttack::execute(const EpochObserver& observer) {
    const auto start = std::chrono::steady_clock::now();
    auto state = init_state();
    PerturbationResult out;
    out.budget = budget_;
    out.trajectory = run(state, observer);
    const Matrix x = consensus_features(state);
    out.sampling = sample(state.s, x);
    out.edges = out.sampling.edges;
    out.feature_delta = x - ds_->features;
    out.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return out;
}

double discrete_attack_loss(const SparseAdjacency& clean, const EdgePerturbation& edges, const Matrix& features,
                            const Matrix& weights, const AttackTargets& targets) {
    const auto adj = build_normalized_adjacency(apply_perturbation(clean, edges));
    return cross_entropy(forward(adj, features, weights), targets.labels, targets.nodes);
}

namespace {

void canonicalize(std::vector<std::pair<Index, Index>>& flips, bool symmetrize) {
    if (symmetrize) {
        for (auto& [i, j] : flips) {
            if (i > j) std::swap(i, j);
        }
    }
    std::sort(flips.begin(), flips.end());
    flips.erase(std::unique(flips.begin(), flips.end()), flips.end());
}

}  // namespace

EdgePerturbation top_entries(const ProbabilityMatrix& s, std::int64_t eps_a, bool symmetrize) {
    struct Entry {
        double p;
        Index i, j;
    };
    std::vector<Entry> entries;
    for (std::size_t b = 0; b < s.block_count(); ++b) {
        const auto& blk = s.block(b);
        const Index base = s.partition(b).begin;
        for (Index r = 0; r < blk.rows(); ++r) {
            for (Index c = 0; c < blk.cols(); ++c) {
                if (blk(r, c) > 0.0 && base + r != c) entries.push_back({blk(r, c), base + r, c});
            }
        }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.p != b.p) return a.p > b.p;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    EdgePerturbation out;
    out.symmetrized = symmetrize;
    std::vector<std::pair<Index, Index>> chosen;
    for (const auto& e : entries) {
        if (static_cast<std::int64_t>(chosen.size()) >= eps_a) break;
        std::pair<Index, Index> key = symmetrize ? std::pair{std::min(e.i, e.j), std::max(e.i, e.j)} : std::pair{e.i, e.j};
        if (std::find(chosen.begin(), chosen.end(), key) == chosen.end()) chosen.push_back(key);
    }
    out.flips = std::move(chosen);
    canonicalize(out.flips, symmetrize);
    return out;
}

SampleOutcome sample_binary(const ProbabilityMatrix& s, const SparseAdjacency& clean, const Matrix& features,
                            const Matrix& weights, const AttackTargets& targets, std::int64_t eps_a,
                            bool symmetrize, int trials, std::uint64_t seed) {
    if (trials < 1) throw InputError("sample_binary: at least one trial required");
    std::mt19937_64 rng(seed);
    SampleOutcome out;
    std::vector<EdgePerturbation> draws;
    for (int t = 0; t < trials; ++t) {
        EdgePerturbation draw;
        draw.symmetrized = symmetrize;
        for (std::size_t b = 0; b < s.block_count(); ++b) {
            const auto& blk = s.block(b);
            const Index base = s.partition(b).begin;
            for (Index r = 0; r < blk.rows(); ++r) {
                const double* row = blk.row(r).data();
                for (Index c = 0; c < blk.cols(); ++c) {
                    if (row[c] <= 0.0 || base + r == c) continue;
                    if (uniform53(rng) < row[c]) draw.flips.emplace_back(base + r, c);
                }
            }
        }
        canonicalize(draw.flips, symmetrize);
        TrialRecord rec;
        rec.flip_count = draw.flips.size();
        rec.accepted = static_cast<std::int64_t>(rec.flip_count) <= eps_a;
        rec.attack_loss = rec.accepted ? discrete_attack_loss(clean, draw, features, weights, targets)
                                       : std::numeric_limits<double>::quiet_NaN();
        if (rec.accepted && (!out.chosen || rec.attack_loss > out.trials[*out.chosen].attack_loss))
            out.chosen = static_cast<std::size_t>(t);
        out.trials.push_back(rec);
        draws.push_back(std::move(draw));
    }
    if (out.chosen) {
        out.edges = std::move(draws[*out.chosen]);
        out.attack_loss = out.trials[*out.chosen].attack_loss;
    } else {
        out.edges = top_entries(s, eps_a, symmetrize);
        out.attack_loss = discrete_attack_loss(clean, out.edges, features, weights, targets);
    }
    return out;
}

}  // namespace sag
