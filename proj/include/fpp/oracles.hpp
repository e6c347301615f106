#pragma once

#include "fpp/balls.hpp"
#include "fpp/rewards.hpp"

namespace fpp {

// Minimum over every simple path x -> (distinct cloud points) -> y, by
// depth-first enumeration. Exponential; meant for at most ~10 points.
double brute_force_rewards(const NormSpec& spec, const PointCloud& cloud, const Vec& x, const Vec& y,
                           double epsilon);
double brute_force_balls(const BooleanModel& model, const Vec& x, const Vec& y);

// Connected components of the ball intersection graph by pairwise scan;
// labels are the smallest member index.
std::vector<int> brute_force_components(const NormSpec& spec, const PointCloud& cloud, double epsilon);

// Trapezoid rule on a uniform grid, used as a reference for smooth integrands.
template <class F>
double trapezoid(F&& f, double a, double b, long n) {
    const double h = (b - a) / double(n);
    double s = 0.5 * (f(a) + f(b));
    for (long i = 1; i < n; ++i) s += f(a + h * double(i));
    return s * h;
}

} // namespace fpp
