#pragma once

#include <Eigen/Dense>

#include <functional>

namespace sag {

/// {a : ||a - center||^2 <= radius_sq}.  A zero radius collapses the set to
/// the center point.
struct L2BallSet {
    Eigen::Ref<const Eigen::MatrixXd> center;
    double radius_sq;
};

/// {a : a in [0,1]^n, sum(a) <= budget}.
struct BoxBudgetSet {
    double budget;
};

inline constexpr double kBudgetTolerance = 1e-6;

inline double clip01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

/// Closed-form projection onto the L2 ball: a itself when inside, otherwise
/// (a + u X) / (1 + u) with u = sqrt(||a - X||^2 / radius_sq) - 1.
Eigen::MatrixXd project_l2_ball(const Eigen::Ref<const Eigen::MatrixXd>& a, const L2BallSet& set);

/// Projection onto the box-plus-budget set.  Operates on the flattened view of
/// `a`, so it applies unchanged to row-major partition blocks.  Returns the
/// shift u that was applied (0 when the clipped point is already feasible).
template <class Derived>
double project_box_budget_inplace(Eigen::DenseBase<Derived>& a, const BoxBudgetSet& set);

template <class Derived>
typename Derived::PlainObject project_box_budget(const Eigen::DenseBase<Derived>& a, const BoxBudgetSet& set) {
    typename Derived::PlainObject out = a;
    project_box_budget_inplace(out, set);
    return out;
}

struct BisectionResult {
    double u;
    int iterations;
};

/// Finds u in [lo, hi] with |f(u) - target| <= tol for non-increasing f.
/// Requires f(lo) >= target >= f(hi); returns lo when f(lo) == target.
BisectionResult bisect(const std::function<double(double)>& f, double lo, double hi, double target, double tol);

/// Sum of clip01(a_k - u) over a flattened array.
template <class Derived>
double clipped_sum(const Eigen::DenseBase<Derived>& a, double u) {
    return (a.derived().array() - u).max(0.0).min(1.0).sum();
}

namespace detail {
double solve_budget_shift(const double* data, long size, double budget);
}

template <class Derived>
double project_box_budget_inplace(Eigen::DenseBase<Derived>& a, const BoxBudgetSet& set) {
    static_assert(Derived::IsVectorAtCompileTime || Derived::InnerStrideAtCompileTime == 1,
                  "project_box_budget needs contiguous storage");
    auto& m = a.derived();
    const double u = detail::solve_budget_shift(m.data(), static_cast<long>(m.size()), set.budget);
    m = (m.array() - u).max(0.0).min(1.0);
    return u;
}

}  // namespace sag
