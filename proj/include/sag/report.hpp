#pragma once

#include "sag/graph.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace sag {

/// Perturbation size measured from the perturbation itself.
struct PerturbationSize {
    std::size_t flip_pairs = 0;      // unordered pairs
    std::size_t flip_entries = 0;    // budget units: pairs when mirrored, entries otherwise
    double feature_norm_sq = 0.0;    // ||dX||^2
    double topology_ratio = 0.0;     // flip_pairs / E
    double feature_ratio = 0.0;      // ||dX|| / ||X||
};

PerturbationSize measure_perturbation(const GraphDataset& ds, const EdgePerturbation& edges, const Matrix& feature_delta);

struct RunReport {
    std::string command;
    std::string mode;      // evasive | poisoning
    std::string dataset;
    std::string method;    // sag | fgsm | pgd
    std::optional<double> clean_accuracy;
    std::optional<double> attacked_accuracy;
    std::optional<PerturbationSize> size;
    std::optional<double> topology_ratio_limit;
    std::optional<double> feature_ratio_limit;
    double wall_time_ms = 0.0;
    std::optional<std::int64_t> peak_topo_grad_elems;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> metrics;  // command-specific results
    std::vector<std::pair<std::string, std::string>> config;

    /// Throws NumericalError when an accuracy leaves [0,1] or an actual
    /// ratio exceeds its configured limit by more than 1e-6.
    void check() const;

    /// Human-readable block followed by one key=value line per field.
    void print(std::ostream& out) const;
};

}  // namespace sag
