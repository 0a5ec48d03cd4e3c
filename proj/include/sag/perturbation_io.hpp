#pragma once

#include "sag/graph.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sag {

struct FeatureEntry {
    Index node = 0;
    Index dim = 0;
    double delta = 0.0;
};

/// Contents of a perturbation file:
///
///     EDGES
///     + u v          (insert)
///     - u v          (delete)
///     FEATURES
///     node dim delta
///     METRICS
///     key=value
struct PerturbationFile {
    EdgePerturbation edges;
    std::vector<FeatureEntry> features;
    std::vector<std::pair<std::string, std::string>> metrics;

    std::optional<std::string> metric(std::string_view key) const;
    double metric_real(std::string_view key) const;

    /// Dense N x D delta matrix.
    Matrix feature_delta(Index n, Index d) const;
};

/// Feature deltas with magnitude at or below this are not written.
inline constexpr double kFeaturePrintThreshold = 1e-9;

/// Writes edges (signed against `clean`), nonzero feature deltas and metrics.
/// Deterministic: identical inputs give byte-identical files.
void write_perturbation(const std::filesystem::path& path, const SparseAdjacency& clean, const EdgePerturbation& edges,
                        const Matrix& feature_delta, const std::vector<std::pair<std::string, std::string>>& metrics);

/// Parses a perturbation file.  When `clean` is given, every "+" must be a
/// non-edge and every "-" an existing edge.
PerturbationFile read_perturbation(const std::filesystem::path& path, const SparseAdjacency* clean = nullptr);

/// Formats a real for metrics lines (round-trip precision).
std::string format_real(double v);

}  // namespace sag
