#pragma once

#include "sag/gcn.hpp"
#include "sag/graph.hpp"
#include "sag/ledger.hpp"
#include "sag/relaxed_adjacency.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace sag {

enum class AttackMode { evasive, poisoning };
enum class InitMode { paper, zero };

struct AttackConfig {
    Index partitions = 2;
    int epochs = 200;
    double rho = 1.0;
    double eta_x = 0.01;  // decayed as eta_x / sqrt(k)
    double eta_s = 0.01;
    double topology_ratio = 0.05;
    double feature_ratio = 0.02;
    std::uint64_t seed = 0;
    AttackMode mode = AttackMode::evasive;
    InitMode init = InitMode::paper;
    bool symmetrize_flips = true;
    int sample_trials = 20;

    /// Throws InputError on a violated invariant.
    void validate() const;
};

struct AttackBudget {
    std::int64_t eps_a = 0;   // edge flips, unordered pairs when flips are mirrored
    double eps_x = 0.0;       // squared L2 feature change
    double eps_i = 0.0;       // per-partition share of eps_a
};

/// eps_A = floor(topology_ratio * E), eps_X = (feature_ratio * ||X||)^2, eps_i = eps_A / M.
AttackBudget make_budget(const GraphDataset& ds, double topology_ratio, double feature_ratio, Index partitions);

/// Evasive: test nodes scored against the surrogate's own predictions.
/// Poisoning: train nodes scored against ground truth.
AttackTargets make_targets(const GraphDataset& ds, const Matrix& weights, AttackMode mode);

struct PerturbationState {
    ProbabilityMatrix s;
    std::vector<Matrix> features;  // X~_i, one copy per partition
    std::vector<Matrix> duals;     // mu_i
    int epoch = 0;
};

struct EpochRecord {
    int epoch = 0;
    double attack_loss = 0.0;                 // loss with the full S and X~_1
    std::vector<double> consensus_residuals;  // ||X~_i - X~_{i+1}||_2 per partition
};

struct Trajectory {
    std::vector<EpochRecord> epochs;  // entry 0 describes the initial state
    LedgerPeaks peaks;
};

struct TrialRecord {
    bool accepted = false;
    std::size_t flip_count = 0;
    double attack_loss = 0.0;  // NaN for rejected draws
};

struct SampleOutcome {
    EdgePerturbation edges;
    std::vector<TrialRecord> trials;
    std::optional<std::size_t> chosen;  // empty when the top-eps_A fallback was used
    double attack_loss = 0.0;
};

struct PerturbationResult {
    EdgePerturbation edges;
    Matrix feature_delta;
    SampleOutcome sampling;
    Trajectory trajectory;
    AttackBudget budget;
    double wall_time_ms = 0.0;
};

/// Called after every completed epoch.
using EpochObserver = std::function<void(const PerturbationState&, const EpochRecord&)>;

/// Partitioned ADMM attack on the single-layer surrogate.
///
/// Holds the clean adjacency, the fixed weights, the attack targets and the
/// budget.  Each epoch visits the partitions in ascending order and applies
/// the feature, topology and dual updates in that order.  Only the active
/// partition's topology gradient is ever materialized.
class SagAttack {
public:
    SagAttack(const GraphDataset& ds, const SurrogateModel& model, AttackConfig config);

    const AttackConfig& config() const { return config_; }
    const AttackBudget& budget() const { return budget_; }
    const AttackTargets& targets() const { return targets_; }
    const SparseAdjacency& clean_adjacency() const { return clean_; }
    const BufferLedger& ledger() const { return ledger_; }

    PerturbationState init_state();

    /// Step size of the feature update at epoch k (1-based).
    double feature_step(int k) const;

    void feature_update(PerturbationState& state, std::size_t i);
    void topology_update(PerturbationState& state, std::size_t i);
    void dual_update(PerturbationState& state, std::size_t i) const;

    /// Runs `config().epochs` epochs starting from `state`.
    Trajectory run(PerturbationState& state, const EpochObserver& observer = {});

    /// Mean of the copies, re-projected onto the feature ball.
    Matrix consensus_features(const PerturbationState& state) const;

    double evaluate_loss(const PerturbationState& state, std::size_t copy) const;

    /// Bernoulli rounding with rejection of over-budget draws.
    SampleOutcome sample(const ProbabilityMatrix& s, const Matrix& features) const;

    /// init_state, run, consensus_features and sample.
    PerturbationResult execute(const EpochObserver& observer = {});

private:
    void project_block(PerturbationState& state, std::size_t i) const;
    std::size_t next_copy(std::size_t i) const { return (i + 1) % static_cast<std::size_t>(config_.partitions); }

    const GraphDataset* ds_;
    Matrix weights_;
    AttackConfig config_;
    AttackBudget budget_;
    AttackTargets targets_;
    SparseAdjacency clean_;
    std::vector<RowRange> parts_;
    BufferLedger ledger_;
    std::vector<BufferLedger::Lease> resident_;
};

/// Attack loss of a discrete perturbation: perturbed graph, given features.
double discrete_attack_loss(const SparseAdjacency& clean, const EdgePerturbation& edges, const Matrix& features,
                            const Matrix& weights, const AttackTargets& targets);

/// Draws `trials` Bernoulli realizations of S, rejects those with more than
/// eps_A flips and keeps the one with the largest attack loss.  Falls back to
/// the eps_A most probable entries when every draw is rejected.
SampleOutcome sample_binary(const ProbabilityMatrix& s, const SparseAdjacency& clean, const Matrix& features,
                            const Matrix& weights, const AttackTargets& targets, std::int64_t eps_a,
                            bool symmetrize, int trials, std::uint64_t seed);

/// Top-eps_A entries of S by probability, ties broken by (i, j).
EdgePerturbation top_entries(const ProbabilityMatrix& s, std::int64_t eps_a, bool symmetrize);

}  // namespace sag
