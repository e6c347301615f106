#include "fpp/paths.hpp"

namespace fpp {

double path_length(const NormSpec& spec, const Path& path) {
    double s = 0;
    for (size_t i = 1; i < path.vertices.size(); ++i) s += spec.dist(path.vertices[i - 1].data(), path.vertices[i].data());
    return s;
}

std::string to_string(SolverMode m) { return m == SolverMode::exact_complete ? "exact-complete" : "exact-pruned"; }

std::string to_string(Certificate c) {
    switch (c) {
    case Certificate::exact_complete: return "exact-complete";
    case Certificate::exact_pruned: return "exact-pruned";
    case Certificate::window_saturated: return "window-saturated";
    }
    return "?";
}

SolverMode parse_solver_mode(const std::string& s) {
    if (s == "exact-complete") return SolverMode::exact_complete;
    if (s == "exact-pruned") return SolverMode::exact_pruned;
    throw InvalidArgument("solver mode must be exact-complete or exact-pruned, got '" + s + "'");
}

PointSource source_of(const PointCloud& cloud) {
    return [&cloud](const Box& box) {
        PointCloud out;
        out.d = cloud.d;
        out.box = box;
        out.seed = cloud.seed;
        out.intensity = cloud.intensity;
        for (size_t k = 0; k < cloud.size(); ++k)
            if (box.contains(cloud.point(k))) out.push(cloud.point(k));
        return out;
    };
}

PointSource source_of(const PoissonField& field) {
    return [&field](const Box& box) { return field.sample(box); };
}

} // namespace fpp
