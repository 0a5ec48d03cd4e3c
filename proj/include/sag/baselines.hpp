#pragma once

#include "sag/admm_attack.hpp"

#include <cstddef>
#include <cstdint>

namespace sag {

enum class BaselineKind { fgsm_feature, pgd_topology };

struct BaselineConfig {
    BaselineKind kind = BaselineKind::pgd_topology;
    int steps = 200;
    double step_size = 0.01;
    double topology_ratio = 0.05;
    double feature_ratio = 0.02;
    std::uint64_t seed = 0;
    AttackMode mode = AttackMode::evasive;
    InitMode init = InitMode::zero;
    bool symmetrize_flips = true;
    int sample_trials = 20;
    /// Upper bound for the dense N x N buffers; 0 means physical memory.
    std::size_t memory_limit_bytes = 0;

    void validate() const;
};

/// Iterated sign-gradient ascent on the features, each step projected onto
/// the feature ball.  Returns the feature delta.
Matrix fgsm_feature_attack(const GraphDataset& ds, const SurrogateModel& model, const BaselineConfig& config);

struct PgdResult {
    EdgePerturbation edges;
    SampleOutcome sampling;
    std::vector<double> losses;  // attack loss after every step
    LedgerPeaks peaks;
    AttackBudget budget;
};

/// Called with the full S after every step.
using PgdObserver = std::function<void(int step, const ProbabilityMatrix& s)>;

/// Projected gradient ascent on the whole relaxed matrix S with the edge
/// budget, then the same Bernoulli rounding as the partitioned attack.
/// Throws OutOfMemoryError when the dense buffers exceed the memory limit.
PgdResult pgd_topology_attack(const GraphDataset& ds, const SurrogateModel& model, const BaselineConfig& config,
                              const PgdObserver& observer = {});

/// Bytes of the two dense N x N buffers (S and its gradient).
std::size_t pgd_dense_bytes(Index n);

std::size_t physical_memory_bytes();

}  // namespace sag
