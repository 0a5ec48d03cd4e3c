#include "sag/baselines.hpp"

#include "sag/errors.hpp"
#include "sag/projections.hpp"

#include <unistd.h>

#include <new>
#include <sstream>

namespace sag {

void BaselineConfig::validate() const {
    if (steps < 1) throw InputError("baseline steps must be at least 1");
    if (!(step_size > 0.0)) throw InputError("baseline step size must be positive");
    if (!(topology_ratio >= 0.0 && topology_ratio <= 1.0)) throw InputError("topology ratio must lie in [0,1]");
    if (!(feature_ratio >= 0.0 && feature_ratio <= 1.0)) throw InputError("feature ratio must lie in [0,1]");
    if (sample_trials < 1) throw InputError("sample trial count must be at least 1");
}

std::size_t physical_memory_bytes() {
    const long pages = sysconf(_SC_PHYS_PAGES);
    const long page = sysconf(_SC_PAGE_SIZE);
    if (pages <= 0 || page <= 0) return static_cast<std::size_t>(-1);
    return static_cast<std::size_t>(pages) * static_cast<std::size_t>(page);
}

std::size_t pgd_dense_bytes(Index n) {
    const auto nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    return 2 * nn * sizeof(double);
}

Matrix fgsm_feature_attack(const GraphDataset& ds, const SurrogateModel& model, const BaselineConfig& config) {
    config.validate();
    const auto budget = make_budget(ds, 0.0, config.feature_ratio, 1);
    if (!(budget.eps_x > 0.0)) throw InputError("fgsm: feature budget must be positive");
    const auto targets = make_targets(ds, model.weights, config.mode);
    const auto adj = build_normalized_adjacency(ds);
    Matrix x = ds.features;
    for (int t = 1; t <= config.steps; ++t) {
        // grad_features returns the gradient of -loss; ascend on loss.
        const Matrix ascent = -grad_features(adj, x, model.weights, targets);
        if (!ascent.allFinite()) throw NumericalError("fgsm: non-finite gradient at step " + std::to_string(t));
        const Matrix sign = ascent.unaryExpr([](double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); });
        x = project_l2_ball(x + config.step_size * sign, L2BallSet{ds.features, budget.eps_x});
    }
    return x - ds.features;
}

PgdResult pgd_topology_attack(const GraphDataset& ds, const SurrogateModel& model, const BaselineConfig& config,
                              const PgdObserver& observer) {
    config.validate();
    const Index n = ds.num_nodes;
    const std::size_t limit = config.memory_limit_bytes ? config.memory_limit_bytes : physical_memory_bytes();
    const std::size_t need = pgd_dense_bytes(n);
    if (need > limit) {
        std::ostringstream msg;
        msg << "out of memory: pgd needs " << (need >> 20) << " MiB for dense " << n << "x" << n
            << " buffers, limit is " << (limit >> 20) << " MiB";
        throw OutOfMemoryError(msg.str());
    }

    PgdResult out;
    out.budget = make_budget(ds, config.topology_ratio, 0.0, 1);
    const auto targets = make_targets(ds, model.weights, config.mode);
    const SparseAdjacency clean = ds.adjacency();
    BufferLedger ledger;
    const auto nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);

    try {
        ProbabilityMatrix s(n, {RowRange{0, n}});
        auto resident = ledger.acquire(BufferKind::perturbation_blocks, nn);
        if (config.init == InitMode::paper) {
            for (Index i = 0; i < n; ++i) {
                for (SparseAdjacency::InnerIterator it(clean, i); it; ++it) s.block(0)(i, it.col()) = 1.0;
            }
        }
        const BoxBudgetSet budget_set{static_cast<double>(out.budget.eps_a)};
        s.block(0).diagonal().setZero();
        project_box_budget_inplace(s.block(0), budget_set);

        for (int t = 1; t <= config.steps; ++t) {
            auto lease = ledger.acquire(BufferKind::topology_gradient, nn);
            RowMatrix g;
            {
                const RelaxedAdjacency adj(clean, s);
                g = grad_topology(adj, ds.features, model.weights, targets, RowRange{0, n});
            }
            if (!g.allFinite()) throw NumericalError("pgd: non-finite gradient at step " + std::to_string(t));
            s.block(0) -= config.step_size * g;
            s.block(0).diagonal().setZero();
            project_box_budget_inplace(s.block(0), budget_set);
            const RelaxedAdjacency adj(clean, s);
            out.losses.push_back(attack_loss(adj, ds.features, model.weights, targets));
            if (observer) observer(t, s);
        }

        out.sampling = sample_binary(s, clean, ds.features, model.weights, targets, out.budget.eps_a,
                                     config.symmetrize_flips, config.sample_trials, config.seed);
    } catch (const std::bad_alloc&) {
        throw OutOfMemoryError("out of memory: allocation of dense pgd buffers failed for N=" + std::to_string(n));
    }
    out.edges = out.sampling.edges;
    out.peaks = snapshot_peaks(ledger);
    return out;
}

}  // namespace sag
