#pragma once

#include <memory>
#include <string>
#include <utility>

#include "fpp/parallel.hpp"
#include "fpp/paths.hpp"

namespace fpp {

// Union of closed N-balls of radius epsilon^(1/d) / 2 centred at the cloud points.
class BooleanModel {
public:
    BooleanModel(const NormSpec& spec, PointCloud cloud, double epsilon);

    const NormSpec& spec() const { return spec_; }
    const PointCloud& cloud() const { return *cloud_; }
    const SpatialIndex& index() const { return *index_; }
    double epsilon() const { return epsilon_; }
    double radius() const { return radius_; }
    double diameter() const { return 2 * radius_; }

    // Two centres share a component iff a chain of centres at N-distance <= diameter joins them.
    int component(int i) const { return comp_[i]; }
    int num_components() const { return static_cast<int>(members_.size()); }
    const std::vector<int>& members(int c) const { return members_[c]; }
    // Index of a centre equal to x, or -1.
    int find_center(const double* x) const;

private:
    NormSpec spec_;
    std::shared_ptr<const PointCloud> cloud_;
    std::shared_ptr<const SpatialIndex> index_;
    double epsilon_, radius_;
    std::vector<int> comp_;
    std::vector<std::vector<int>> members_;
};

// {t in [0, 1] : N(a + t (b - a) - c) <= r}, an interval by convexity;
// returns false when empty. generic forces the golden-section and
// bisection route even for p = 2.
bool ball_interval(const NormSpec& spec, const double* a, const double* b, const double* c, double r, double& t0,
                   double& t1, bool generic = false);

// N-length of [a, b] outside the union of balls.
double segment_outside_length(const BooleanModel& model, const Vec& a, const Vec& b);

double path_time_balls(const BooleanModel& model, const Path& path);

// Exact minimizer of the ball travel time over polygonal paths through the
// model's centres (no windowing).
GeodesicResult solve_balls_window(const BooleanModel& model, const Vec& x, const Vec& y, const SolverOptions& opts,
                                  Exec ex = Exec::serial);

GeodesicResult geodesic_balls(const NormSpec& spec, const PointSource& source, const Vec& x, const Vec& y,
                              double epsilon, const SolverOptions& opts = {}, Exec ex = Exec::serial);

struct PiCheckReport {
    bool valid = true;
    // 0 none, 1 vertex not a centre, 2 component re-entered, 3 in-component structure
    int violation = 0;
    std::string message;
};

PiCheckReport validate_pi_check(const BooleanModel& model, const Path& path);

// Rebuilds the path so that it crosses each component it meets once, hopping
// between centres at N-distance <= diameter inside it. The travel time does
// not increase.
Path canonicalize_to_pi_check(const BooleanModel& model, const Path& path);

struct OverlapDiagnostics {
    long y_count = 0; // vertices within epsilon^(1/d) of some earlier vertex
    long z_count = 0; // steps of length <= 5 epsilon^(1/d)
};

OverlapDiagnostics overlap_diagnostics(const NormSpec& spec, const Path& path, double epsilon);

} // namespace fpp
