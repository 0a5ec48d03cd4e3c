#pragma once

#include "sag/graph.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sag {

struct ConvertOptions {
    double train_fraction = 0.1;
    double val_fraction = 0.1;  // the remainder is test
    std::uint64_t seed = 0;
    bool skip_header = false;  // drop the first row of both inputs
};

struct ConvertSummary {
    GraphDataset dataset;
    std::vector<std::string> node_ids;     // original id of node i
    std::vector<std::string> class_names;  // original label of class c
    std::size_t duplicate_edges = 0;       // repeated rows, either direction
    std::size_t self_loops = 0;            // dropped
    std::size_t isolated_nodes = 0;
};

/// Converts an edge list ("u,v" per row) and a feature table
/// ("id,f_1,...,f_D,label" per row) to a dataset.  Fields may be separated
/// by commas, tabs or spaces.  Node order follows the feature table; classes
/// are numbered in sorted order of their names (numerically when every name
/// is an integer).  The split is a seeded random train/val/test partition.
ConvertSummary convert_csv(const std::filesystem::path& edges_csv, const std::filesystem::path& features_csv,
                           const ConvertOptions& options = {});

/// Seeded random split: round(train_fraction N) train, round(val_fraction N)
/// val, the rest test.
std::vector<Split> random_split(Index n, double train_fraction, double val_fraction, std::uint64_t seed);

}  // namespace sag
