#include "sag/convert.hpp"

#include "sag/errors.hpp"
#include "text_reader.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

namespace sag {

namespace {

constexpr std::string_view kDelims = ", \t\r";

bool is_integer(const std::string& s) {
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

std::vector<Split> random_split(Index n, double train_fraction, double val_fraction, std::uint64_t seed) {
    if (!(train_fraction >= 0.0 && val_fraction >= 0.0 && train_fraction + val_fraction <= 1.0))
        throw InputError("split fractions must be non-negative and sum to at most 1");
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    // Explicit Fisher-Yates so the split does not depend on the standard
    // library's shuffle.
    std::mt19937_64 rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));
    std::vector<Split> split(static_cast<std::size_t>(n), Split::test);
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto node = static_cast<std::size_t>(order[k]);
        if (k < n_train) split[node] = Split::train;
        else if (k < n_train + n_val) split[node] = Split::val;
    }
    return split;
}

ConvertSummary convert_csv(const std::filesystem::path& edges_csv, const std::filesystem::path& features_csv,
                           const ConvertOptions& options) {
    ConvertSummary out;
    std::unordered_map<std::string, Index> index_of;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> raw_labels;

    {
        detail::TextReader in(features_csv);
        bool first = true;
        std::size_t width = 0;
        while (auto tok = in.next_tokens(kDelims)) {
            if (std::exchange(first, false) && options.skip_header) continue;
            const auto& t = *tok;
            if (t.size() < 2) in.fail("expected \"id,f_1,...,f_D,label\"");
            if (width == 0) width = t.size();
            if (t.size() != width)
                in.fail("expected " + std::to_string(width) + " fields, got " + std::to_string(t.size()));
            std::string id(t.front());
            if (!index_of.emplace(id, static_cast<Index>(rows.size())).second) in.fail("duplicate node id \"" + id + "\"");
            std::vector<double> f;
            f.reserve(t.size() - 2);
            for (std::size_t k = 1; k + 1 < t.size(); ++k) {
                const double v = in.parse_real(t[k]);
                if (!std::isfinite(v)) in.fail("non-finite feature value");
                f.push_back(v);
            }
            rows.push_back(std::move(f));
            raw_labels.emplace_back(t.back());
            out.node_ids.push_back(std::move(id));
        }
    }
    if (rows.empty()) throw InputError(features_csv.string() + ": no nodes");

    std::set<std::string> names(raw_labels.begin(), raw_labels.end());
    out.class_names.assign(names.begin(), names.end());
    if (std::all_of(out.class_names.begin(), out.class_names.end(), is_integer)) {
        std::sort(out.class_names.begin(), out.class_names.end(),
                  [](const std::string& a, const std::string& b) { return std::stoll(a) < std::stoll(b); });
    }
    std::map<std::string, int> class_of;
    for (std::size_t c = 0; c < out.class_names.size(); ++c) class_of[out.class_names[c]] = static_cast<int>(c);

    auto& ds = out.dataset;
    ds.num_nodes = static_cast<Index>(rows.size());
    ds.num_classes = static_cast<int>(out.class_names.size());
    ds.features.resize(ds.num_nodes, static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < ds.num_nodes; ++i) {
        for (Index j = 0; j < ds.features.cols(); ++j) ds.features(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        ds.labels.push_back(class_of.at(raw_labels[static_cast<std::size_t>(i)]));
    }

    {
        detail::TextReader in(edges_csv);
        bool first = true;
        std::set<Edge> edges;
        while (auto tok = in.next_tokens(kDelims)) {
            if (std::exchange(first, false) && options.skip_header) continue;
            const auto& t = *tok;
            if (t.size() != 2) in.fail("expected \"u,v\"");
            Index ends[2];
            for (int k = 0; k < 2; ++k) {
                auto it = index_of.find(std::string(t[static_cast<std::size_t>(k)]));
                if (it == index_of.end()) in.fail("unknown node id \"" + std::string(t[static_cast<std::size_t>(k)]) + "\"");
                ends[k] = it->second;
            }
            if (ends[0] == ends[1]) {
                ++out.self_loops;
                continue;
            }
            if (!edges.insert(Edge{std::min(ends[0], ends[1]), std::max(ends[0], ends[1])}).second) ++out.duplicate_edges;
        }
        ds.edges.assign(edges.begin(), edges.end());
    }

    std::vector<bool> touched(static_cast<std::size_t>(ds.num_nodes), false);
    for (const auto& e : ds.edges) touched[static_cast<std::size_t>(e.u)] = touched[static_cast<std::size_t>(e.v)] = true;
    out.isolated_nodes = static_cast<std::size_t>(std::count(touched.begin(), touched.end(), false));

    ds.split = random_split(ds.num_nodes, options.train_fraction, options.val_fraction, options.seed);
    validate(ds);
    return out;
}

}  // namespace sag
