// Acceptance run: one PASS/FAIL line per criterion.
//
//   sag_acceptance --data data/cora [--only 1,2,5]
//
// Criteria 1-4 and 8 use generated instances; 5, 6, 7, 9 and 10 need the
// Cora directory.  Exit status is 0 only when every selected criterion passes.

#include "sag/admm_attack.hpp"
#include "sag/baselines.hpp"
#include "sag/evaluation.hpp"
#include "sag/projections.hpp"

#include "oracles.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>

using namespace sag;
using namespace sag::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string printf_string(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

// ---------------------------------------------------------------- Cora recipe

// Victim and surrogate: the default training recipe with a fixed seed.
constexpr std::uint64_t kSeed = 1;
TrainHyper victim_hyper() { return TrainHyper{0.01, 200, 5e-4, kSeed}; }

// Attack settings for the Cora criteria; see README "Acceptance".
AttackConfig cora_attack(AttackMode mode, double feature_ratio) {
    AttackConfig cfg;
    cfg.partitions = 2;
    cfg.epochs = 200;
    cfg.rho = 1.0;
    cfg.eta_x = 0.01;
    // The summed loss grows with the number of targets: ~2166 test nodes
    // for evasive, ~271 train nodes for poisoning.
    cfg.eta_s = mode == AttackMode::evasive ? 5e-5 : 1e-3;
    cfg.topology_ratio = 0.05;
    cfg.feature_ratio = feature_ratio;
    cfg.seed = kSeed;
    cfg.mode = mode;
    cfg.init = InitMode::paper;
    return cfg;
}

/// Loads Cora once and caches the surrogate and attack results shared by
/// several criteria.
class CoraContext {
public:
    explicit CoraContext(std::string dir) : dir_(std::move(dir)) {}

    const GraphDataset& dataset() {
        if (!ds_) ds_ = load_dataset_dir(dir_);
        return *ds_;
    }
    const SurrogateModel& surrogate() {
        if (!model_) model_ = train_surrogate(dataset(), victim_hyper());
        return *model_;
    }
    const PerturbationResult& attack(AttackMode mode, double feature_ratio) {
        const auto key = std::make_pair(mode == AttackMode::poisoning, feature_ratio);
        auto it = runs_.find(key);
        if (it == runs_.end()) {
            SagAttack a(dataset(), surrogate(), cora_attack(mode, feature_ratio));
            it = runs_.emplace(key, a.execute()).first;
        }
        return it->second;
    }
    const AccuracyPair& poisoning(double feature_ratio) {
        auto it = poison_.find(feature_ratio);
        if (it == poison_.end()) {
            const auto& r = attack(AttackMode::poisoning, feature_ratio);
            it = poison_.emplace(feature_ratio, evaluate_poisoning(dataset(), r.edges, r.feature_delta, victim_hyper())).first;
        }
        return it->second;
    }

private:
    std::string dir_;
    std::optional<GraphDataset> ds_;
    std::optional<SurrogateModel> model_;
    std::map<std::pair<bool, double>, PerturbationResult> runs_;
    std::map<double, AccuracyPair> poison_;
};

// ------------------------------------------------------------------ criteria

Outcome projection_equivalence() {
    const auto start = Clock::now();
    Rng rng(101);
    double worst_ball = 0.0, worst_box = 0.0;
    for (int t = 0; t < 200; ++t) {
        const Index d = 1 + static_cast<Index>(rng() % 10);
        const Matrix c = random_matrix(d, 1, rng, -2, 2);
        const double r2 = uniform(rng, 0.01, 4.0);
        const Matrix a = random_matrix(d, 1, rng, -5, 5);
        worst_ball = std::max(worst_ball,
                              (project_l2_ball(a, L2BallSet{c, r2}) - segment_ball_projection(a, c, r2)).cwiseAbs().maxCoeff());
    }
    for (int t = 0; t < 200; ++t) {
        const Index d = 1 + static_cast<Index>(rng() % 10);
        const double eps = uniform(rng, 0.0, 0.6 * static_cast<double>(d));
        const Vector a = random_matrix(d, 1, rng, -0.5, 1.5);
        worst_box = std::max(worst_box,
                             (project_box_budget(a, BoxBudgetSet{eps}) - dykstra_box_budget(a, eps)).cwiseAbs().maxCoeff());
    }
    const double secs = seconds_since(start);
    return {worst_ball <= 1e-5 && worst_box <= 1e-5 && secs < 10.0,
            printf_string("max error ball %.2e, box-budget %.2e (limit 1e-5), %.1f s (limit 10)", worst_ball, worst_box, secs)};
}

Outcome gradient_correctness() {
    const auto start = Clock::now();
    double worst_x = 0.0, worst_s = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(500 + seed);
        const Index n = 3 + static_cast<Index>(seed % 10);
        const Index d = 2 + static_cast<Index>(rng() % 4);
        const int c = 2 + static_cast<int>(rng() % 3);
        const auto ds = random_dataset(n, d, c, 0.35, seed);
        const Matrix w = random_matrix(d, c, rng, -2, 2);
        AttackTargets t = all_node_targets(n, c, rng);
        t.nodes.erase(std::remove_if(t.nodes.begin(), t.nodes.end(), [&](Index v) { return v % 3 == 1; }), t.nodes.end());
        const SparseAdjacency clean = ds.adjacency();
        const auto s = random_probabilities(n, {RowRange{0, n}}, rng);
        const RelaxedAdjacency adj(clean, s);
        const Matrix a = dense_adjacency(ds);
        const Matrix sd = s.dense();

        const Matrix ahat = naive_normalize(relaxed_dense(a, sd));
        worst_x = std::max(worst_x, normwise_relative_error(grad_features(adj, ds.features, w, t),
                                                            fd_feature_gradient(ahat, ds.features, w, t)));
        const Matrix gs = grad_topology(adj, ds.features, w, t, RowRange{0, n});
        worst_s = std::max(worst_s, normwise_relative_error(gs, fd_topology_gradient(a, sd, ds.features, w, t)));
    }
    const double secs = seconds_since(start);
    return {worst_x <= 1e-4 && worst_s <= 1e-4 && secs < 30.0,
            printf_string("max relative error features %.2e, topology %.2e (limit 1e-4), %.1f s (limit 30)", worst_x,
                          worst_s, secs)};
}

Outcome pgd_equivalence() {
    const auto start = Clock::now();
    double worst = 0.0;
    bool same_flips = true;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(900 + seed);
        const auto ds = random_dataset(8, 4, 3, 0.3, 900 + seed);
        const auto model = random_model(4, 3, rng, 2.0);
        for (InitMode init : {InitMode::zero, InitMode::paper}) {
            BaselineConfig p;
            p.steps = 30;
            p.step_size = 0.05;
            p.topology_ratio = 0.5;
            p.init = init;
            p.seed = seed;
            std::vector<RowMatrix> pgd_path, sag_path;
            const auto pgd = pgd_topology_attack(ds, model, p, [&](int, const ProbabilityMatrix& s) { pgd_path.push_back(s.dense()); });

            AttackConfig a;
            a.partitions = 1;
            a.epochs = p.steps;
            a.eta_s = p.step_size;
            a.rho = 0.5 + static_cast<double>(seed);
            a.feature_ratio = 0.0;
            a.topology_ratio = p.topology_ratio;
            a.init = init;
            a.seed = p.seed;
            SagAttack sag(ds, model, a);
            const auto res = sag.execute([&](const PerturbationState& st, const EpochRecord&) { sag_path.push_back(st.s.dense()); });
            if (pgd_path.size() != sag_path.size()) return {false, "trajectory lengths differ"};
            for (std::size_t k = 0; k < pgd_path.size(); ++k)
                worst = std::max(worst, (pgd_path[k] - sag_path[k]).cwiseAbs().maxCoeff());
            same_flips = same_flips && pgd.edges.flips == res.edges.flips;
        }
    }
    const double secs = seconds_since(start);
    return {worst <= 1e-10 && same_flips && secs < 5.0,
            printf_string("max |S_pgd - S_sag| %.2e over 10 runs (limit 1e-10), sampled flips %s, %.2f s (limit 5)", worst,
                          same_flips ? "identical" : "differ", secs)};
}

Outcome feasibility_suite() {
    const auto start = Clock::now();
    std::size_t checks = 0;
    std::vector<std::string> failures;
    for (std::uint64_t run = 0; run < 20; ++run) {
        Rng rng(1300 + run);
        const Index n = 8 + static_cast<Index>(rng() % 43);
        const Index d = 2 + static_cast<Index>(rng() % 6);
        const int c = 2 + static_cast<int>(rng() % 3);
        const auto ds = random_dataset(n, d, c, uniform(rng, 0.05, 0.3), 1300 + run);
        const auto model = random_model(d, c, rng, 2.0);
        AttackConfig cfg;
        cfg.partitions = 1 + static_cast<Index>(rng() % 4);
        cfg.epochs = 15;
        cfg.eta_s = uniform(rng, 0.01, 0.5);
        cfg.eta_x = uniform(rng, 0.01, 0.5);
        cfg.rho = uniform(rng, 0.1, 2.0);
        cfg.topology_ratio = uniform(rng, 0.0, 0.3);
        cfg.feature_ratio = uniform(rng, 0.0, 0.2);
        cfg.init = rng() % 2 ? InitMode::paper : InitMode::zero;
        cfg.mode = rng() % 2 ? AttackMode::poisoning : AttackMode::evasive;
        cfg.symmetrize_flips = rng() % 4 != 0;
        cfg.seed = run;
        SagAttack attack(ds, model, cfg);
        const auto& b = attack.budget();
        auto fail = [&](const std::string& what) { failures.push_back("run " + std::to_string(run) + ": " + what); };

        const auto res = attack.execute([&](const PerturbationState& st, const EpochRecord& rec) {
            for (std::size_t i = 0; i < st.s.block_count(); ++i) {
                const auto& blk = st.s.block(i);
                const auto& p = st.s.partition(i);
                if (blk.minCoeff() < 0.0 || blk.maxCoeff() > 1.0) fail("box violated");
                if (blk.sum() > b.eps_i + 1e-6) fail("partition budget violated");
                for (Index r = p.begin; r < p.end; ++r)
                    if (blk(r - p.begin, r) != 0.0) fail("nonzero diagonal");
                ++checks;
            }
            for (const auto& x : st.features) {
                if ((x - ds.features).squaredNorm() > b.eps_x + 1e-6) fail("feature copy outside the ball");
                ++checks;
            }
            for (const auto& mu : st.duals)
                if (!mu.allFinite()) fail("non-finite dual");
            if (!std::isfinite(rec.attack_loss)) fail("non-finite loss");
        });
        if (static_cast<std::int64_t>(res.edges.pair_count()) > b.eps_a) fail("edge budget exceeded");
        if (static_cast<std::int64_t>(res.edges.flips.size()) > b.eps_a) fail("flip entries exceed the budget");
        if (res.feature_delta.squaredNorm() > b.eps_x + 1e-6) fail("feature budget exceeded");
        std::set<std::pair<Index, Index>> uniq(res.edges.flips.begin(), res.edges.flips.end());
        if (uniq.size() != res.edges.flips.size()) fail("duplicate flips");
        for (auto [u, v] : res.edges.flips) {
            if (u == v) fail("self-loop flip");
            if (res.edges.symmetrized && u > v) fail("mirrored flip not canonical");
        }
        checks += 3;
    }
    const double secs = seconds_since(start);
    return {failures.empty() && secs < 120.0,
            printf_string("20 runs, %zu invariant checks, %zu violations%s%s, %.1f s (limit 120)", checks, failures.size(),
                          failures.empty() ? "" : ", first: ", failures.empty() ? "" : failures.front().c_str(), secs)};
}

Outcome cora_clean_accuracy(CoraContext& cora) {
    const auto start = Clock::now();
    const auto& ds = cora.dataset();
    const double acc = test_accuracy(ds, build_normalized_adjacency(ds), ds.features, cora.surrogate().weights);
    const double secs = seconds_since(start);
    return {acc >= 0.75 && secs < 120.0, printf_string("test accuracy %.4f (need >= 0.75), %.1f s (limit 120)", acc, secs)};
}

Outcome cora_efficacy(CoraContext& cora) {
    const auto start = Clock::now();
    const auto& ds = cora.dataset();
    const auto& ev = cora.attack(AttackMode::evasive, 0.02);
    const auto evasive = evaluate_evasive(ds, cora.surrogate().weights, ev.edges, ev.feature_delta);
    const auto& poison = cora.poisoning(0.02);
    const double secs = seconds_since(start);
    const bool pass = evasive.drop() >= 0.08 && poison.drop() >= 0.08 && secs < 1800.0;
    return {pass, printf_string("evasive %.4f -> %.4f (drop %.2f pts), poisoning %.4f -> %.4f (drop %.2f pts), need >= 8 "
                                "pts each, %.0f s (limit 1800)",
                                evasive.clean, evasive.attacked, 100 * evasive.drop(), poison.clean, poison.attacked,
                                100 * poison.drop(), secs)};
}

Outcome cora_convergence(CoraContext& cora) {
    const auto& traj = cora.attack(AttackMode::evasive, 0.02).trajectory.epochs;
    std::vector<double> loss, residual;
    for (const auto& rec : traj) {
        loss.push_back(rec.attack_loss);
        residual.push_back(rec.consensus_residuals.at(0));
    }
    // 5-epoch trailing average, defined from epoch 4 on
    std::vector<double> avg(loss.size(), 0.0);
    for (std::size_t k = 4; k < loss.size(); ++k) avg[k] = (loss[k] + loss[k - 1] + loss[k - 2] + loss[k - 3] + loss[k - 4]) / 5.0;
    std::size_t decreases = 0;
    double worst_step = 0.0;
    int first_bad = -1;
    for (std::size_t k = 21; k < avg.size(); ++k) {
        if (avg[k] < avg[k - 1]) {
            ++decreases;
            worst_step = std::min(worst_step, avg[k] - avg[k - 1]);
            if (first_bad < 0) first_bad = static_cast<int>(k);
        }
    }
    const double peak = *std::max_element(residual.begin(), residual.end());
    const double ratio = peak > 0.0 ? residual.back() / peak : 0.0;
    const bool pass = decreases == 0 && residual.front() == 0.0 && ratio <= 0.25;
    const std::string dips = decreases == 0 ? std::string("never decreases")
                                            : printf_string("decreases at %zu epochs, first %d, largest drop %.3g",
                                                            decreases, first_bad, -worst_step);
    return {pass, printf_string("(a) moving-average loss %s after epoch 20 (loss %.1f -> %.1f); (b) residual starts at "
                                "%.1g, final/max %.3f (limit 0.25)",
                                dips.c_str(), loss.front(), loss.back(), residual.front(), ratio)};
}

Outcome ledger_law() {
    const Index n = 1024;
    const auto ds = random_dataset(n, 8, 3, 0.004, 77);
    Rng rng(78);
    const auto model = random_model(8, 3, rng);
    std::map<Index, std::size_t> peaks;
    bool exact = true;
    std::string detail;
    for (Index m : {1, 2, 4, 8}) {
        AttackConfig cfg;
        cfg.partitions = m;
        cfg.epochs = 1;
        SagAttack attack(ds, model, cfg);
        const auto peak = attack.execute().trajectory.peaks[BufferKind::topology_gradient];
        const auto expect = static_cast<std::size_t>((n + m - 1) / m) * static_cast<std::size_t>(n);
        exact = exact && peak == expect;
        peaks[m] = peak;
        detail += printf_string("M=%ld %zu%s; ", static_cast<long>(m), peak, peak == expect ? "" : " (wrong)");
    }
    const double ratio = static_cast<double>(peaks[4]) / static_cast<double>(peaks[1]);
    return {exact && ratio <= 0.26, detail + printf_string("M=4/M=1 = %.3f (limit 0.26)", ratio)};
}

Outcome joint_benefit(CoraContext& cora) {
    const auto& without = cora.poisoning(0.0);
    const auto& with = cora.poisoning(0.08);
    const double gain = without.attacked - with.attacked;
    return {gain >= 0.01, printf_string("poisoning accuracy at 5%% topology: feature 0%% %.4f, feature 8%% %.4f "
                                        "(decrease %.2f pts, need >= 1)",
                                        without.attacked, with.attacked, 100 * gain)};
}

Outcome transfer_direction(CoraContext& cora) {
    const auto& r = cora.attack(AttackMode::poisoning, 0.02);
    const std::vector<int> depths{2, 4};
    LayeredHyper deep;
    deep.train = victim_hyper();
    const auto rows = evaluate_transfer(cora.dataset(), r.edges, r.feature_delta, depths, victim_hyper(), deep);
    bool pass = true;
    std::string detail;
    for (const auto& row : rows) {
        pass = pass && row.accuracy.attacked < row.accuracy.clean;
        detail += printf_string("%d-layer %.4f -> %.4f; ", row.layers, row.accuracy.clean, row.accuracy.attacked);
    }
    return {pass, detail + "need attacked < clean at each depth"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria for the partitioned ADMM attack"};
    std::string data = "data/cora";
    std::vector<int> only;
    app.add_option("--data", data, "Cora dataset directory");
    app.add_option("--only", only, "Criteria to run (default: all)")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    CoraContext cora(data);
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"projection oracle equivalence", projection_equivalence},
        {"gradient correctness", gradient_correctness},
        {"PGD = SAG(M=1) equivalence", pgd_equivalence},
        {"feasibility suite", feasibility_suite},
        {"Cora clean accuracy", [&] { return cora_clean_accuracy(cora); }},
        {"Cora attack efficacy", [&] { return cora_efficacy(cora); }},
        {"convergence behavior", [&] { return cora_convergence(cora); }},
        {"memory ledger law", ledger_law},
        {"joint-attack benefit", [&] { return joint_benefit(cora); }},
        {"transferability direction", [&] { return transfer_direction(cora); }},
    };

    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all = all && o.pass;
        std::cout << "criterion " << id << " [" << criteria[i].first << "]: " << (o.pass ? "PASS" : "FAIL") << "  "
                  << o.detail << std::endl;
    }
    return all ? 0 : 1;
}
