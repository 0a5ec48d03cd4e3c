#include "sag/projections.hpp"

#include "sag/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace sag {

namespace {

constexpr double kShiftTolerance = 1e-12;

int max_bisection_steps(double lo, double hi) {
    if (hi - lo <= kShiftTolerance) return 0;
    return static_cast<int>(std::ceil(std::log2((hi - lo) / kShiftTolerance)));
}

}  // namespace

Eigen::MatrixXd project_l2_ball(const Eigen::Ref<const Eigen::MatrixXd>& a, const L2BallSet& set) {
    if (a.rows() != set.center.rows() || a.cols() != set.center.cols()) throw InputError("project_l2_ball: shape mismatch");
    if (!a.allFinite()) throw InputError("project_l2_ball: non-finite input");
    if (!(set.radius_sq >= 0.0)) throw InputError("project_l2_ball: negative radius");
    const double dist_sq = (a - set.center).squaredNorm();
    if (dist_sq <= set.radius_sq) return a;
    if (set.radius_sq == 0.0) return set.center;
    const double u = std::sqrt(dist_sq / set.radius_sq) - 1.0;
    return (a + u * set.center) / (1.0 + u);
}

BisectionResult bisect(const std::function<double(double)>& f, double lo, double hi, double target, double tol) {
    if (!(lo <= hi)) throw NumericalError("bisect: empty bracket");
    const double f_lo = f(lo);
    const double f_hi = f(hi);
    if (!(f_lo >= target && target >= f_hi)) {
        std::ostringstream msg;
        msg << "bisect: target " << target << " not bracketed by f(" << lo << ")=" << f_lo << " and f(" << hi << ")=" << f_hi;
        throw NumericalError(msg.str());
    }
    if (f_lo == target) return {lo, 0};
    if (std::abs(f_hi - target) <= tol) return {hi, 0};
    const int steps = max_bisection_steps(lo, hi);
    for (int it = 1; it <= steps; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double v = f(mid);
        if (std::abs(v - target) <= tol) return {mid, it};
        if (v > target) lo = mid;
        else hi = mid;
    }
    return {hi, steps};
}

namespace detail {

double solve_budget_shift(const double* data, long size, double budget) {
    if (!(budget >= 0.0)) throw InputError("project_box_budget: budget must be non-negative");
    double clipped = 0.0;
    double top = 0.0;
    for (long k = 0; k < size; ++k) {
        const double v = data[k];
        if (!std::isfinite(v)) throw InputError("project_box_budget: non-finite input");
        clipped += clip01(v);
        top = std::max(top, v);
    }
    if (clipped <= budget) return 0.0;
    if (budget == 0.0) return top;

    // Bisection on the shift u over [0, max(a)].  The clipped sum is
    // continuous and non-increasing in u.  Entries that can no longer change
    // inside the current bracket are retired: a <= lo contributes 0 and
    // a >= hi + 1 contributes 1 for every u in [lo, hi].
    std::vector<double> live;
    live.reserve(static_cast<std::size_t>(size));
    for (long k = 0; k < size; ++k) {
        if (data[k] > 0.0) live.push_back(data[k]);
    }
    double lo = 0.0;
    double hi = top;
    double saturated = 0.0;
    const int steps = max_bisection_steps(lo, hi);
    for (int it = 0; it < steps; ++it) {
        const double mid = 0.5 * (lo + hi);
        double v = saturated;
        for (double x : live) v += clip01(x - mid);
        // Stop only on the feasible side so the output never exceeds the budget.
        if (v <= budget && budget - v <= kBudgetTolerance) return mid;
        if (v > budget) lo = mid;
        else hi = mid;
        std::size_t keep = 0;
        for (double x : live) {
            if (x <= lo) continue;
            if (x - hi >= 1.0) {
                saturated += 1.0;
                continue;
            }
            live[keep++] = x;
        }
        live.resize(keep);
    }
    return hi;
}

}  // namespace detail

}  // namespace sag
