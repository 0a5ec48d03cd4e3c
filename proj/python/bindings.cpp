#include "sag/admm_attack.hpp"
#include "sag/baselines.hpp"
#include "sag/cli.hpp"
#include "sag/errors.hpp"
#include "sag/evaluation.hpp"
#include "sag/projections.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace sag;

namespace {

using Flips = std::vector<std::pair<Index, Index>>;

EdgePerturbation to_edges(const Flips& flips, bool symmetrized) {
    EdgePerturbation e;
    e.flips = flips;
    e.symmetrized = symmetrized;
    return e;
}

AttackMode to_mode(const std::string& m) {
    if (m == "evasive") return AttackMode::evasive;
    if (m == "poisoning") return AttackMode::poisoning;
    throw InputError("mode must be evasive or poisoning");
}

py::dict attack(const GraphDataset& ds, const Matrix& weights, Index partitions, int epochs, double rho, double eta_x,
                double eta_s, double topology_ratio, double feature_ratio, std::uint64_t seed, const std::string& mode,
                const std::string& init, bool symmetrize, int trials) {
    AttackConfig cfg;
    cfg.partitions = partitions;
    cfg.epochs = epochs;
    cfg.rho = rho;
    cfg.eta_x = eta_x;
    cfg.eta_s = eta_s;
    cfg.topology_ratio = topology_ratio;
    cfg.feature_ratio = feature_ratio;
    cfg.seed = seed;
    cfg.mode = to_mode(mode);
    cfg.init = init == "zero" ? InitMode::zero : InitMode::paper;
    cfg.symmetrize_flips = symmetrize;
    cfg.sample_trials = trials;
    SurrogateModel model;
    model.weights = weights;

    PerturbationResult res;
    {
        py::gil_scoped_release release;
        SagAttack a(ds, model, cfg);
        res = a.execute();
    }
    std::vector<double> loss;
    std::vector<std::vector<double>> residuals;
    for (const auto& rec : res.trajectory.epochs) {
        loss.push_back(rec.attack_loss);
        residuals.push_back(rec.consensus_residuals);
    }
    py::dict out;
    out["flips"] = res.edges.flips;
    out["symmetrized"] = res.edges.symmetrized;
    out["feature_delta"] = res.feature_delta;
    out["attack_loss"] = res.sampling.attack_loss;
    out["loss_trajectory"] = loss;
    out["residuals"] = residuals;
    out["eps_a"] = res.budget.eps_a;
    out["eps_x"] = res.budget.eps_x;
    out["peak_topo_grad_elems"] = res.trajectory.peaks[BufferKind::topology_gradient];
    return out;
}

}  // namespace

PYBIND11_MODULE(_sag, m) {
    m.doc() = "Partitioned ADMM adversarial attacks on graph convolutional networks.";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<OutOfMemoryError>(m, "OutOfMemoryError", PyExc_MemoryError);

    py::class_<GraphDataset>(m, "Dataset")
        .def_readonly("num_nodes", &GraphDataset::num_nodes)
        .def_readonly("num_classes", &GraphDataset::num_classes)
        .def_readonly("features", &GraphDataset::features)
        .def_readonly("labels", &GraphDataset::labels)
        .def_property_readonly("edges",
                               [](const GraphDataset& ds) {
                                   Flips e;
                                   for (const auto& x : ds.edges) e.emplace_back(x.u, x.v);
                                   return e;
                               })
        .def_property_readonly("split",
                               [](const GraphDataset& ds) {
                                   std::vector<std::string> s;
                                   for (auto x : ds.split) s.emplace_back(to_string(x));
                                   return s;
                               })
        .def("nodes_in", [](const GraphDataset& ds, const std::string& which) {
            if (which == "train") return ds.nodes_in(Split::train);
            if (which == "val") return ds.nodes_in(Split::val);
            if (which == "test") return ds.nodes_in(Split::test);
            throw InputError("split must be train, val or test");
        });

    m.def("load_dataset", &load_dataset_dir, py::arg("directory"), "Load graph.txt, features.txt, labels.txt and split.txt.");

    m.def(
        "train_surrogate",
        [](const GraphDataset& ds, double lr, int epochs, double weight_decay, std::uint64_t seed) {
            const auto model = train_surrogate(ds, TrainHyper{lr, epochs, weight_decay, seed});
            return py::make_tuple(model.weights, model.train_accuracy, model.val_accuracy);
        },
        py::arg("dataset"), py::arg("lr") = 0.01, py::arg("epochs") = 200, py::arg("weight_decay") = 5e-4,
        py::arg("seed") = 0, "Train the single-layer GCN; returns (weights, train_accuracy, val_accuracy).");

    m.def(
        "project_l2_ball",
        [](const Matrix& a, const Matrix& center, double eps) { return project_l2_ball(a, L2BallSet{center, eps}); },
        py::arg("a"), py::arg("center"), py::arg("eps"), "Nearest point to `a` with ||p - center||^2 <= eps.");
    m.def(
        "project_box_budget", [](Vector a, double budget) { return project_box_budget(a, BoxBudgetSet{budget}); },
        py::arg("a"), py::arg("budget"), "Nearest point to `a` in [0,1]^n with sum <= budget.");

    m.def("attack", &attack, py::arg("dataset"), py::arg("weights"), py::arg("partitions") = 2, py::arg("epochs") = 200,
          py::arg("rho") = 1.0, py::arg("eta_x") = 0.01, py::arg("eta_s") = 0.01, py::arg("topology_ratio") = 0.05,
          py::arg("feature_ratio") = 0.02, py::arg("seed") = 0, py::arg("mode") = "evasive", py::arg("init") = "paper",
          py::arg("symmetrize") = true, py::arg("trials") = 20, "Run the partitioned ADMM attack.");

    m.def(
        "evaluate_evasive",
        [](const GraphDataset& ds, const Matrix& weights, const Flips& flips, const Matrix& delta, bool symmetrized) {
            const auto acc = evaluate_evasive(ds, weights, to_edges(flips, symmetrized), delta);
            return py::make_tuple(acc.clean, acc.attacked);
        },
        py::arg("dataset"), py::arg("weights"), py::arg("flips"), py::arg("feature_delta"), py::arg("symmetrized") = true,
        "Clean and attacked test accuracy of a fixed model.");
    m.def(
        "evaluate_poisoning",
        [](const GraphDataset& ds, const Flips& flips, const Matrix& delta, bool symmetrized, std::uint64_t seed) {
            const auto acc = evaluate_poisoning(ds, to_edges(flips, symmetrized), delta, TrainHyper{0.01, 200, 5e-4, seed});
            return py::make_tuple(acc.clean, acc.attacked);
        },
        py::arg("dataset"), py::arg("flips"), py::arg("feature_delta"), py::arg("symmetrized") = true, py::arg("seed") = 0,
        "Clean and attacked test accuracy after retraining on each graph.");

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::vector<const char*> argv{"sag"};
            for (const auto& a : args) argv.push_back(a.c_str());
            std::ostringstream out, err;
            const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run a `sag` subcommand in-process; returns (exit_code, stdout, stderr).");
}
