#include "sag/cli.hpp"

#include "sag/admm_attack.hpp"
#include "sag/baselines.hpp"
#include "sag/convert.hpp"
#include "sag/errors.hpp"
#include "sag/evaluation.hpp"
#include "sag/perturbation_io.hpp"
#include "sag/report.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <new>

namespace sag {

namespace {

struct SharedOptions {
    std::string data;
    std::uint64_t seed = 0;
    int threads = 0;
    bool deterministic = false;
    std::string run_root = "runs";
};

struct TrainOptions {
    std::string out;
    int epochs = 200;
    double lr = 0.01;
    double weight_decay = 5e-4;
};

struct AttackOptions {
    std::string checkpoint;
    std::string out;
    std::string trajectory;
    std::string method = "sag";
    std::string mode = "evasive";
    double topo_ratio = 0.05;
    double feat_ratio = 0.02;
    Index partitions = 2;
    int epochs = 200;
    double rho = 1.0;
    double lr_x = 0.01;
    double lr_s = 0.01;
    std::string init;  // method default when empty
    std::string symmetrize = "on";
    int trials = 20;
    double memory_limit_mb = 0.0;
};

struct EvalOptions {
    std::string perturbation;
    std::string checkpoint;
    std::string mode = "evasive";
    std::optional<double> topo_ratio;
    std::optional<double> feat_ratio;
    TrainOptions victim;
};

struct TransferOptions {
    std::string perturbation;
    std::vector<int> layers{1, 2, 4};
    int hidden = 16;
    std::string optimizer = "adam";
    TrainOptions victim;
};

struct ConvertOptionsCli {
    std::string edges;
    std::string features;
    std::string out;
    double train_fraction = 0.1;
    double val_fraction = 0.1;
    bool header = false;
};

void apply_threads(const SharedOptions& s) {
    if (s.deterministic) Eigen::setNbThreads(1);
    else if (s.threads > 0) Eigen::setNbThreads(s.threads);
}

std::string dataset_name(const std::string& dir) {
    auto p = std::filesystem::path(dir).lexically_normal();
    if (p.filename().empty()) p = p.parent_path();
    return p.filename().string();
}

std::string utc_stamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
    return buf;
}

/// `explicit_path` when given, otherwise <run_root>/<timestamp>-seed<seed>/<file>.
std::filesystem::path output_path(const std::string& explicit_path, const SharedOptions& s, const char* file) {
    if (!explicit_path.empty()) {
        const auto parent = std::filesystem::path(explicit_path).parent_path();
        if (!parent.empty()) std::filesystem::create_directories(parent);
        return explicit_path;
    }
    const auto dir = std::filesystem::path(s.run_root) / (utc_stamp() + "-seed" + std::to_string(s.seed));
    std::filesystem::create_directories(dir);
    return dir / file;
}

TrainHyper victim_hyper(const TrainOptions& t, std::uint64_t seed) {
    return TrainHyper{t.lr, t.epochs, t.weight_decay, seed};
}

void add_shared(CLI::App* cmd, SharedOptions& s, bool needs_data = true) {
    auto* data = cmd->add_option("--data", s.data, "Dataset directory (graph.txt, features.txt, labels.txt, split.txt)");
    if (needs_data) data->required();
    cmd->add_option("--seed", s.seed, "Random seed");
    cmd->add_option("--threads", s.threads, "Worker threads for dense kernels (0 keeps the default)")->check(CLI::NonNegativeNumber);
    cmd->add_flag("--deterministic", s.deterministic, "Single-threaded kernels and a zero wall time in output files");
    cmd->add_option("--run-root", s.run_root, "Parent of timestamped run directories");
}

void add_victim(CLI::App* cmd, TrainOptions& t) {
    cmd->add_option("--epochs", t.epochs, "Victim training epochs")->check(CLI::NonNegativeNumber);
    cmd->add_option("--lr", t.lr, "Victim learning rate")->check(CLI::PositiveNumber);
    cmd->add_option("--weight-decay", t.weight_decay, "Victim weight decay")->check(CLI::NonNegativeNumber);
}

std::string fmt(double v) { return format_real(v); }

// ---------------------------------------------------------------- train

int cmd_train(const SharedOptions& s, const TrainOptions& t, std::ostream& out) {
    apply_threads(s);
    const auto start = std::chrono::steady_clock::now();
    const auto ds = load_dataset_dir(s.data);
    const auto model = train_surrogate(ds, victim_hyper(t, s.seed));
    const auto path = output_path(t.out, s, "checkpoint.txt");
    save_checkpoint(model, path);
    const double test = test_accuracy(ds, build_normalized_adjacency(ds), ds.features, model.weights);

    RunReport r;
    r.command = "train";
    r.dataset = dataset_name(s.data);
    r.seed = s.seed;
    r.clean_accuracy = test;
    r.metrics = {{"train_accuracy", fmt(model.train_accuracy)},
                 {"val_accuracy", fmt(model.val_accuracy)},
                 {"test_accuracy", fmt(test)},
                 {"checkpoint", path.string()}};
    r.config = {{"epochs", std::to_string(t.epochs)}, {"lr", fmt(t.lr)}, {"weight_decay", fmt(t.weight_decay)}};
    r.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    r.check();
    r.print(out);
    return kExitOk;
}

// --------------------------------------------------------------- attack

AttackMode parse_mode(const std::string& m) { return m == "poisoning" ? AttackMode::poisoning : AttackMode::evasive; }

int cmd_attack(const SharedOptions& s, const AttackOptions& a, std::ostream& out, std::ostream& err) {
    apply_threads(s);
    const auto ds = load_dataset_dir(s.data);
    const auto model = load_checkpoint(a.checkpoint);
    if (model.weights.rows() != ds.num_features() || model.weights.cols() != ds.num_classes)
        throw InputError("checkpoint shape " + std::to_string(model.weights.rows()) + "x" +
                         std::to_string(model.weights.cols()) + " does not match the dataset (" +
                         std::to_string(ds.num_features()) + " features, " + std::to_string(ds.num_classes) + " classes)");
    const AttackMode mode = parse_mode(a.mode);
    const bool symmetrize = a.symmetrize == "on";
    const SparseAdjacency clean = ds.adjacency();

    std::ofstream traj;
    if (!a.trajectory.empty()) {
        traj.open(a.trajectory);
        if (!traj) throw InputError(a.trajectory + ": cannot open for writing");
    }

    EdgePerturbation edges;
    edges.symmetrized = symmetrize;
    Matrix delta = Matrix::Zero(ds.num_nodes, ds.num_features());
    AttackBudget budget;
    double loss = 0.0;
    std::size_t peak = 0;
    std::string chosen = "none";
    int trials = 0;
    const auto start = std::chrono::steady_clock::now();

    if (a.method == "sag") {
        AttackConfig cfg;
        cfg.partitions = a.partitions;
        cfg.epochs = a.epochs;
        cfg.rho = a.rho;
        cfg.eta_x = a.lr_x;
        cfg.eta_s = a.lr_s;
        cfg.topology_ratio = a.topo_ratio;
        cfg.feature_ratio = a.feat_ratio;
        cfg.seed = s.seed;
        cfg.mode = mode;
        cfg.init = a.init == "zero" ? InitMode::zero : InitMode::paper;
        cfg.symmetrize_flips = symmetrize;
        cfg.sample_trials = a.trials;
        SagAttack attack(ds, model, cfg);
        auto res = attack.execute();
        if (traj) {
            traj << "epoch,attack_loss";
            for (Index i = 0; i < a.partitions; ++i) traj << ",residual_" << i;
            traj << '\n';
            for (const auto& rec : res.trajectory.epochs) {
                traj << rec.epoch << ',' << fmt(rec.attack_loss);
                for (double v : rec.consensus_residuals) traj << ',' << fmt(v);
                traj << '\n';
            }
        }
        edges = res.edges;
        delta = res.feature_delta;
        budget = res.budget;
        loss = res.sampling.attack_loss;
        peak = res.trajectory.peaks[BufferKind::topology_gradient];
        trials = a.trials;
        if (res.sampling.chosen) chosen = std::to_string(*res.sampling.chosen);
        else chosen = "fallback";
    } else {
        BaselineConfig cfg;
        cfg.steps = a.epochs;
        cfg.topology_ratio = a.topo_ratio;
        cfg.feature_ratio = a.feat_ratio;
        cfg.seed = s.seed;
        cfg.mode = mode;
        cfg.init = a.init == "paper" ? InitMode::paper : InitMode::zero;
        cfg.symmetrize_flips = symmetrize;
        cfg.sample_trials = a.trials;
        cfg.memory_limit_bytes = static_cast<std::size_t>(a.memory_limit_mb * 1024.0 * 1024.0);
        const auto targets = make_targets(ds, model.weights, mode);
        if (a.method == "fgsm") {
            cfg.kind = BaselineKind::fgsm_feature;
            cfg.step_size = a.lr_x;
            budget = make_budget(ds, 0.0, a.feat_ratio, 1);
            delta = fgsm_feature_attack(ds, model, cfg);
            loss = discrete_attack_loss(clean, edges, ds.features + delta, model.weights, targets);
        } else {
            cfg.kind = BaselineKind::pgd_topology;
            cfg.step_size = a.lr_s;
            auto res = pgd_topology_attack(ds, model, cfg);
            if (traj) {
                traj << "step,attack_loss\n";
                for (std::size_t k = 0; k < res.losses.size(); ++k) traj << k + 1 << ',' << fmt(res.losses[k]) << '\n';
            }
            edges = res.edges;
            budget = res.budget;
            loss = res.sampling.attack_loss;
            peak = res.peaks[BufferKind::topology_gradient];
            trials = a.trials;
            if (res.sampling.chosen) chosen = std::to_string(*res.sampling.chosen);
            else chosen = "fallback";
        }
    }
    const double wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    const auto path = output_path(a.out, s, "perturbation.txt");
    write_perturbation(path, clean, edges, delta,
                       {{"method", a.method},
                        {"mode", a.mode},
                        {"attack_loss", fmt(loss)},
                        {"trials", std::to_string(trials)},
                        {"chosen_trial", chosen},
                        {"eps_A", std::to_string(budget.eps_a)},
                        {"eps_X", fmt(budget.eps_x)},
                        {"peak_topo_grad_elems", std::to_string(peak)},
                        {"wall_time_ms", s.deterministic ? "0" : fmt(wall)},
                        {"seed", std::to_string(s.seed)}});

    // Everything reported below is measured from the file just written.
    const auto written = read_perturbation(path, &clean);
    const Matrix written_delta = written.feature_delta(ds.num_nodes, ds.num_features());

    RunReport r;
    r.command = "attack";
    r.mode = a.mode;
    r.method = a.method;
    r.dataset = dataset_name(s.data);
    r.seed = s.seed;
    r.size = measure_perturbation(ds, written.edges, written_delta);
    r.topology_ratio_limit = a.method == "fgsm" ? 0.0 : a.topo_ratio;
    r.feature_ratio_limit = a.method == "pgd" ? 0.0 : a.feat_ratio;
    r.peak_topo_grad_elems = static_cast<std::int64_t>(peak);
    r.wall_time_ms = wall;
    const auto acc = evaluate_evasive(ds, model.weights, written.edges, written_delta);
    r.clean_accuracy = acc.clean;
    if (mode == AttackMode::evasive) r.attacked_accuracy = acc.attacked;
    r.metrics = {{"attack_loss", fmt(loss)}, {"chosen_trial", chosen}, {"perturbation", path.string()}};
    r.config = {{"partitions", std::to_string(a.partitions)}, {"epochs", std::to_string(a.epochs)},
                {"rho", fmt(a.rho)},           {"lr_x", fmt(a.lr_x)},
                {"lr_s", fmt(a.lr_s)},         {"topo_ratio", fmt(a.topo_ratio)},
                {"feat_ratio", fmt(a.feat_ratio)}, {"init", a.init.empty() ? (a.method == "sag" ? "paper" : "zero") : a.init},
                {"symmetrize", a.symmetrize}, {"trials", std::to_string(a.trials)}};
    if (mode == AttackMode::poisoning)
        err << "note: poisoning accuracy needs a retrained victim; run `sag eval --mode poisoning`\n";
    r.check();
    r.print(out);
    return kExitOk;
}

// ----------------------------------------------------------------- eval

/// Loads a perturbation and checks it against its declared budgets and,
/// when given, the budgets implied by the configured ratios.
PerturbationFile load_checked(const GraphDataset& ds, const std::string& file, std::optional<double> topo_ratio,
                              std::optional<double> feat_ratio) {
    const SparseAdjacency clean = ds.adjacency();
    auto pf = read_perturbation(file, &clean);
    const Matrix delta = pf.feature_delta(ds.num_nodes, ds.num_features());
    const auto units = static_cast<double>(pf.edges.flips.size());
    const double norm_sq = delta.squaredNorm();

    auto check_edges = [&](double eps_a, const std::string& what) {
        if (units > eps_a)
            throw InputError("validation failure: " + std::to_string(pf.edges.flips.size()) + " flips exceed the " +
                             what + " edge budget " + fmt(eps_a));
    };
    auto check_features = [&](double eps_x, const std::string& what) {
        if (norm_sq > eps_x + 1e-6)
            throw InputError("validation failure: squared feature change " + fmt(norm_sq) + " exceeds the " + what +
                             " feature budget " + fmt(eps_x));
    };
    if (pf.metric("eps_A")) check_edges(pf.metric_real("eps_A"), "declared");
    if (pf.metric("eps_X")) check_features(pf.metric_real("eps_X"), "declared");
    if (topo_ratio || feat_ratio) {
        const auto b = make_budget(ds, topo_ratio.value_or(1.0), feat_ratio.value_or(0.0), 1);
        if (topo_ratio) check_edges(static_cast<double>(b.eps_a), "configured");
        if (feat_ratio) check_features(b.eps_x, "configured");
    }
    return pf;
}

int cmd_eval(const SharedOptions& s, const EvalOptions& e, std::ostream& out) {
    apply_threads(s);
    const auto start = std::chrono::steady_clock::now();
    const auto ds = load_dataset_dir(s.data);
    const auto pf = load_checked(ds, e.perturbation, e.topo_ratio, e.feat_ratio);
    const Matrix delta = pf.feature_delta(ds.num_nodes, ds.num_features());

    AccuracyPair acc;
    if (e.mode == "evasive") {
        if (e.checkpoint.empty()) throw InputError("evasive evaluation needs --checkpoint");
        acc = evaluate_evasive(ds, load_checkpoint(e.checkpoint).weights, pf.edges, delta);
    } else {
        acc = evaluate_poisoning(ds, pf.edges, delta, victim_hyper(e.victim, s.seed));
    }

    RunReport r;
    r.command = "eval";
    r.mode = e.mode;
    r.method = pf.metric("method").value_or("");
    r.dataset = dataset_name(s.data);
    r.seed = s.seed;
    r.size = measure_perturbation(ds, pf.edges, delta);
    r.topology_ratio_limit = e.topo_ratio;
    r.feature_ratio_limit = e.feat_ratio;
    r.clean_accuracy = acc.clean;
    r.attacked_accuracy = acc.attacked;
    if (auto p = pf.metric("peak_topo_grad_elems")) r.peak_topo_grad_elems = std::stoll(*p);
    r.metrics = {{"accuracy_drop", fmt(acc.drop())}};
    if (e.mode == "poisoning")
        r.config = {{"victim_epochs", std::to_string(e.victim.epochs)},
                    {"victim_lr", fmt(e.victim.lr)},
                    {"victim_weight_decay", fmt(e.victim.weight_decay)}};
    r.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    r.check();
    r.print(out);
    return kExitOk;
}

// ------------------------------------------------------------- transfer

int cmd_transfer(const SharedOptions& s, const TransferOptions& t, std::ostream& out) {
    apply_threads(s);
    const auto start = std::chrono::steady_clock::now();
    const auto ds = load_dataset_dir(s.data);
    const auto pf = load_checked(ds, t.perturbation, std::nullopt, std::nullopt);
    const Matrix delta = pf.feature_delta(ds.num_nodes, ds.num_features());

    LayeredHyper deep;
    deep.hidden = t.hidden;
    deep.adam = t.optimizer == "adam";
    deep.train = victim_hyper(t.victim, s.seed);
    const auto rows = evaluate_transfer(ds, pf.edges, delta, t.layers, victim_hyper(t.victim, s.seed), deep);

    char buf[96];
    out << "== transfer on " << dataset_name(s.data) << ": attacked data acc. (clean data acc.)\n";
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "  %d-layer GCN  %.2f (%.2f)\n", row.layers, row.accuracy.attacked, row.accuracy.clean);
        out << buf;
    }
    for (const auto& row : rows) {
        out << "layers_" << row.layers << "_clean_accuracy=" << fmt(row.accuracy.clean) << '\n';
        out << "layers_" << row.layers << "_attacked_accuracy=" << fmt(row.accuracy.attacked) << '\n';
    }
    out << "wall_time_ms="
        << fmt(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count()) << '\n';
    out << "seed=" << s.seed << '\n';
    return kExitOk;
}

// -------------------------------------------------------------- convert

int cmd_convert(const SharedOptions& s, const ConvertOptionsCli& c, std::ostream& out, std::ostream& err) {
    ConvertOptions opt;
    opt.seed = s.seed;
    opt.train_fraction = c.train_fraction;
    opt.val_fraction = c.val_fraction;
    opt.skip_header = c.header;
    const auto res = convert_csv(c.edges, c.features, opt);
    if (res.duplicate_edges) err << "warning: dropped " << res.duplicate_edges << " duplicate edge rows\n";
    if (res.self_loops) err << "warning: dropped " << res.self_loops << " self-loop rows\n";
    save_dataset_dir(res.dataset, c.out);
    {
        std::ofstream names(std::filesystem::path(c.out) / "classes.txt");
        for (std::size_t k = 0; k < res.class_names.size(); ++k) names << k << ' ' << res.class_names[k] << '\n';
    }
    const auto& ds = res.dataset;
    out << "nodes=" << ds.num_nodes << '\n'
        << "features=" << ds.num_features() << '\n'
        << "classes=" << ds.num_classes << '\n'
        << "edges_undirected=" << ds.undirected_edge_count() << '\n'
        << "edges_directed=" << ds.directed_edge_count() << '\n'
        << "duplicate_edges=" << res.duplicate_edges << '\n'
        << "self_loops=" << res.self_loops << '\n'
        << "isolated_nodes=" << res.isolated_nodes << '\n'
        << "train=" << ds.nodes_in(Split::train).size() << '\n'
        << "val=" << ds.nodes_in(Split::val).size() << '\n'
        << "test=" << ds.nodes_in(Split::test).size() << '\n'
        << "out=" << c.out << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Partitioned ADMM adversarial attacks on graph convolutional networks", "sag"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "sag 0.1.0");

    SharedOptions shared;
    TrainOptions train;
    AttackOptions attack;
    EvalOptions eval;
    TransferOptions transfer;
    ConvertOptionsCli convert;

    auto* c_train = app.add_subcommand("train", "Train the single-layer surrogate and write a checkpoint");
    add_shared(c_train, shared);
    c_train->add_option("--out", train.out, "Checkpoint path (default: inside a new run directory)");
    add_victim(c_train, train);

    auto* c_attack = app.add_subcommand("attack", "Generate a perturbation file");
    add_shared(c_attack, shared);
    c_attack->add_option("--checkpoint", attack.checkpoint, "Surrogate checkpoint")->required();
    c_attack->add_option("--out", attack.out, "Perturbation path (default: inside a new run directory)");
    c_attack->add_option("--trajectory", attack.trajectory, "CSV of per-epoch attack loss and consensus residuals");
    c_attack->add_option("--method", attack.method)->check(CLI::IsMember({"sag", "fgsm", "pgd"}));
    c_attack->add_option("--mode", attack.mode)->check(CLI::IsMember({"evasive", "poisoning"}));
    c_attack->add_option("--topo-ratio", attack.topo_ratio)->check(CLI::Range(0.0, 1.0));
    c_attack->add_option("--feat-ratio", attack.feat_ratio)->check(CLI::Range(0.0, 1.0));
    c_attack->add_option("--partitions", attack.partitions)->check(CLI::PositiveNumber);
    c_attack->add_option("--epochs", attack.epochs, "ADMM epochs, or steps for fgsm/pgd")->check(CLI::NonNegativeNumber);
    c_attack->add_option("--rho", attack.rho)->check(CLI::NonNegativeNumber);
    c_attack->add_option("--lr-x", attack.lr_x, "Feature step size (decays as 1/sqrt(k) for sag)")->check(CLI::PositiveNumber);
    c_attack->add_option("--lr-s", attack.lr_s, "Topology step size")->check(CLI::PositiveNumber);
    c_attack->add_option("--init", attack.init, "Initial S: paper (S = A) or zero; default paper for sag, zero for pgd")
        ->check(CLI::IsMember({"paper", "zero"}));
    c_attack->add_option("--symmetrize", attack.symmetrize)->check(CLI::IsMember({"on", "off"}));
    c_attack->add_option("--trials", attack.trials, "Bernoulli sampling trials")->check(CLI::PositiveNumber);
    c_attack->add_option("--memory-limit-mb", attack.memory_limit_mb, "Memory cap for pgd's dense buffers (0: physical memory)")
        ->check(CLI::NonNegativeNumber);

    auto* c_eval = app.add_subcommand("eval", "Evaluate a perturbation (evasive or poisoning)");
    add_shared(c_eval, shared);
    c_eval->add_option("--perturbation", eval.perturbation)->required();
    c_eval->add_option("--checkpoint", eval.checkpoint, "Surrogate checkpoint (evasive mode)");
    c_eval->add_option("--mode", eval.mode)->check(CLI::IsMember({"evasive", "poisoning"}));
    c_eval->add_option("--topo-ratio", eval.topo_ratio, "Reject perturbations above this topology ratio")->check(CLI::Range(0.0, 1.0));
    c_eval->add_option("--feat-ratio", eval.feat_ratio, "Reject perturbations above this feature ratio")->check(CLI::Range(0.0, 1.0));
    add_victim(c_eval, eval.victim);

    auto* c_transfer = app.add_subcommand("transfer", "Poisoning evaluation against deeper GCNs");
    add_shared(c_transfer, shared);
    c_transfer->add_option("--perturbation", transfer.perturbation)->required();
    c_transfer->add_option("--layers", transfer.layers, "Depths to evaluate")->delimiter(',');
    c_transfer->add_option("--hidden", transfer.hidden, "Hidden width of deeper models")->check(CLI::PositiveNumber);
    c_transfer->add_option("--optimizer", transfer.optimizer, "Optimizer of deeper models")->check(CLI::IsMember({"adam", "gd"}));
    add_victim(c_transfer, transfer.victim);

    auto* c_convert = app.add_subcommand("convert", "Convert CSV edge and feature tables to the native format");
    add_shared(c_convert, shared, false);
    c_convert->add_option("--edges", convert.edges, "Edge list, one \"u,v\" per row")->required();
    c_convert->add_option("--features", convert.features, "Rows of \"id,f_1,...,f_D,label\"")->required();
    c_convert->add_option("--out", convert.out, "Output dataset directory")->required();
    c_convert->add_option("--train-frac", convert.train_fraction)->check(CLI::Range(0.0, 1.0));
    c_convert->add_option("--val-frac", convert.val_fraction)->check(CLI::Range(0.0, 1.0));
    c_convert->add_flag("--header", convert.header, "Skip the first row of both inputs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (c_train->parsed()) return cmd_train(shared, train, out);
        if (c_attack->parsed()) return cmd_attack(shared, attack, out, err);
        if (c_eval->parsed()) return cmd_eval(shared, eval, out);
        if (c_transfer->parsed()) return cmd_transfer(shared, transfer, out);
        if (c_convert->parsed()) return cmd_convert(shared, convert, out, err);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const OutOfMemoryError& e) {
        err << "OOM: " << e.what() << '\n';
        return kExitOutOfMemory;
    } catch (const std::bad_alloc&) {
        err << "OOM: allocation failed\n";
        return kExitOutOfMemory;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}

}  // namespace sag
