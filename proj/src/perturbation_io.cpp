#include "sag/perturbation_io.hpp"

#include "sag/errors.hpp"
#include "text_reader.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace sag {

namespace {

enum class Section { none, edges, features, metrics };

std::string format_with(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

bool has_edge(const SparseAdjacency& a, Index u, Index v) {
    for (SparseAdjacency::InnerIterator it(a, u); it; ++it) {
        if (it.col() == v) return it.value() != 0.0;
        if (it.col() > v) break;
    }
    return false;
}

}  // namespace

std::string format_real(double v) { return format_with("%.17g", v); }

std::optional<std::string> PerturbationFile::metric(std::string_view key) const {
    for (const auto& [k, v] : metrics) {
        if (k == key) return v;
    }
    return std::nullopt;
}

double PerturbationFile::metric_real(std::string_view key) const {
    const auto v = metric(key);
    if (!v) throw InputError("perturbation file: missing metric \"" + std::string(key) + "\"");
    double out = 0.0;
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || p != v->data() + v->size())
        throw InputError("perturbation file: metric \"" + std::string(key) + "\" is not a number");
    return out;
}

Matrix PerturbationFile::feature_delta(Index n, Index d) const {
    Matrix out = Matrix::Zero(n, d);
    for (const auto& f : features) {
        if (f.node < 0 || f.node >= n || f.dim < 0 || f.dim >= d)
            throw InputError("perturbation file: feature entry (" + std::to_string(f.node) + ", " +
                             std::to_string(f.dim) + ") outside a " + std::to_string(n) + "x" +
                             std::to_string(d) + " feature matrix");
        out(f.node, f.dim) = f.delta;
    }
    return out;
}

void write_perturbation(const std::filesystem::path& path, const SparseAdjacency& clean, const EdgePerturbation& edges,
                        const Matrix& feature_delta, const std::vector<std::pair<std::string, std::string>>& metrics) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError(path.string() + ": cannot open for writing");

    auto flips = edges.flips;
    std::sort(flips.begin(), flips.end());
    out << "EDGES\n";
    for (const auto& [u, v] : flips) out << (has_edge(clean, u, v) ? "- " : "+ ") << u << ' ' << v << '\n';

    out << "FEATURES\n";
    for (Index i = 0; i < feature_delta.rows(); ++i) {
        for (Index j = 0; j < feature_delta.cols(); ++j) {
            const double d = feature_delta(i, j);
            if (std::abs(d) > kFeaturePrintThreshold) out << i << ' ' << j << ' ' << format_with("%.12g", d) << '\n';
        }
    }

    out << "METRICS\n";
    out << "symmetrized=" << (edges.symmetrized ? "on" : "off") << '\n';
    for (const auto& [k, v] : metrics) out << k << '=' << v << '\n';
    if (!out) throw InputError(path.string() + ": write failed");
}

PerturbationFile read_perturbation(const std::filesystem::path& path, const SparseAdjacency* clean) {
    detail::TextReader in(path);
    PerturbationFile out;
    Section section = Section::none;
    std::set<std::pair<Index, Index>> seen;

    while (auto tok = in.next_tokens()) {
        const auto& t = *tok;
        if (t.size() == 1 && t[0] == "EDGES") { section = Section::edges; continue; }
        if (t.size() == 1 && t[0] == "FEATURES") { section = Section::features; continue; }
        if (t.size() == 1 && t[0] == "METRICS") { section = Section::metrics; continue; }

        switch (section) {
        case Section::none:
            in.fail("expected a section header (EDGES, FEATURES or METRICS)");
        case Section::edges: {
            if (t.size() != 3 || (t[0] != "+" && t[0] != "-")) in.fail("expected \"+ u v\" or \"- u v\"");
            const Index u = in.parse_int(t[1]);
            const Index v = in.parse_int(t[2]);
            if (u < 0 || v < 0) in.fail("negative node id");
            if (u == v) in.fail("self-loop flip");
            if (clean) {
                if (u >= clean->rows() || v >= clean->rows()) in.fail("node id out of range");
                const bool exists = has_edge(*clean, u, v);
                if (exists != (t[0] == "-"))
                    in.fail(exists ? "insertion of an existing edge" : "deletion of a missing edge");
            }
            if (!seen.emplace(u, v).second) in.fail("duplicate flip");
            out.edges.flips.emplace_back(u, v);
            break;
        }
        case Section::features: {
            if (t.size() != 3) in.fail("expected \"node dim delta\"");
            FeatureEntry e{in.parse_int(t[0]), in.parse_int(t[1]), in.parse_real(t[2])};
            if (e.node < 0 || e.dim < 0) in.fail("negative feature index");
            if (!std::isfinite(e.delta)) in.fail("non-finite feature delta");
            out.features.push_back(e);
            break;
        }
        case Section::metrics: {
            if (t.size() != 1) in.fail("expected key=value");
            const auto eq = t[0].find('=');
            if (eq == std::string_view::npos || eq == 0) in.fail("expected key=value");
            std::string key(t[0].substr(0, eq));
            std::string value(t[0].substr(eq + 1));
            if (key == "symmetrized") {
                if (value != "on" && value != "off") in.fail("symmetrized must be on or off");
                out.edges.symmetrized = value == "on";
            }
            out.metrics.emplace_back(std::move(key), std::move(value));
            break;
        }
        }
    }

    if (out.edges.symmetrized) {
        for (const auto& [u, v] : out.edges.flips) {
            if (u > v) throw InputError(path.string() + ": mirrored flips must be listed with u < v");
        }
    }
    return out;
}

}  // namespace sag
