#include "sag/report.hpp"

#include "sag/errors.hpp"
#include "sag/perturbation_io.hpp"

#include <cmath>
#include <cstdio>

namespace sag {

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

PerturbationSize measure_perturbation(const GraphDataset& ds, const EdgePerturbation& edges, const Matrix& feature_delta) {
    PerturbationSize s;
    s.flip_pairs = edges.pair_count();
    s.flip_entries = edges.flips.size();
    s.feature_norm_sq = feature_delta.size() ? feature_delta.squaredNorm() : 0.0;
    const auto e = ds.undirected_edge_count();
    s.topology_ratio = e ? static_cast<double>(s.flip_pairs) / static_cast<double>(e) : 0.0;
    const double xn = ds.features.norm();
    s.feature_ratio = xn > 0.0 ? std::sqrt(s.feature_norm_sq) / xn : 0.0;
    return s;
}

void RunReport::check() const {
    for (const auto& acc : {clean_accuracy, attacked_accuracy}) {
        if (acc && !(*acc >= 0.0 && *acc <= 1.0)) throw NumericalError("report: accuracy outside [0,1]");
    }
    if (size && topology_ratio_limit && size->topology_ratio > *topology_ratio_limit + 1e-6)
        throw NumericalError("report: topology ratio " + format_real(size->topology_ratio) + " exceeds limit " +
                             format_real(*topology_ratio_limit));
    if (size && feature_ratio_limit && size->feature_ratio > *feature_ratio_limit + 1e-6)
        throw NumericalError("report: feature ratio " + format_real(size->feature_ratio) + " exceeds limit " +
                             format_real(*feature_ratio_limit));
}

void RunReport::print(std::ostream& out) const {
    out << "== " << command;
    if (!method.empty()) out << " (" << method << ")";
    if (!mode.empty()) out << ", " << mode;
    out << " on " << dataset << '\n';
    if (clean_accuracy) out << "  clean accuracy      " << fixed(100.0 * *clean_accuracy, 2) << "%\n";
    if (attacked_accuracy) out << "  attacked accuracy   " << fixed(100.0 * *attacked_accuracy, 2) << "%\n";
    if (clean_accuracy && attacked_accuracy)
        out << "  accuracy drop       " << fixed(100.0 * (*clean_accuracy - *attacked_accuracy), 2) << " points\n";
    if (size) {
        out << "  edge flips          " << size->flip_pairs << " pairs, topology ratio " << fixed(100.0 * size->topology_ratio, 3)
            << "%\n";
        out << "  feature change      ratio " << fixed(100.0 * size->feature_ratio, 3) << "%\n";
    }
    if (peak_topo_grad_elems)
        out << "  peak topology-gradient buffer  " << *peak_topo_grad_elems
            << " elements (ledger count, stands in for device memory)\n";
    for (const auto& [k, v] : metrics) out << "  " << k << std::string(k.size() < 20 ? 20 - k.size() : 1, ' ') << v << '\n';
    out << "  wall time           " << fixed(wall_time_ms, 1) << " ms\n";

    out << "command=" << command << '\n';
    if (!mode.empty()) out << "mode=" << mode << '\n';
    out << "dataset=" << dataset << '\n';
    if (!method.empty()) out << "method=" << method << '\n';
    if (clean_accuracy) out << "clean_accuracy=" << format_real(*clean_accuracy) << '\n';
    if (attacked_accuracy) out << "attacked_accuracy=" << format_real(*attacked_accuracy) << '\n';
    if (size) {
        out << "flip_pairs=" << size->flip_pairs << '\n';
        out << "topology_ratio_actual=" << format_real(size->topology_ratio) << '\n';
        out << "feature_ratio_actual=" << format_real(size->feature_ratio) << '\n';
    }
    for (const auto& [k, v] : metrics) out << k << '=' << v << '\n';
    out << "wall_time_ms=" << format_real(wall_time_ms) << '\n';
    if (peak_topo_grad_elems) out << "peak_topo_grad_elems=" << *peak_topo_grad_elems << '\n';
    out << "seed=" << seed << '\n';
    for (const auto& [k, v] : config) out << "config." << k << '=' << v << '\n';
}

}  // namespace sag
