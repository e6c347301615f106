#pragma once

#include <string>

#include "fpp/balls.hpp"
#include "fpp/geometry.hpp"
#include "fpp/paths.hpp"

namespace fpp {

enum class ModelKind { rewards, balls };

std::string to_string(ModelKind m);
ModelKind parse_model_kind(const std::string& s);

struct DegeneratePoint : std::runtime_error {
    DegeneratePoint(const std::string& what, double eps) : std::runtime_error(what), epsilon(eps) {}
    double epsilon;
};

struct EstimationOptions {
    SolverOptions solver;
    Exec exec = Exec::parallel;
    bool empty_cloud = false; // diagnostic: geodesics through an empty realization
};

// One geodesic from 0 to s u.
struct ReplicaRecord {
    double s = 0;
    int replica = 0;
    double time = 0;
    double n_length = 0;
    long reward_count = 0;
    long y_count = 0, z_count = 0;
    Certificate certificate = Certificate::exact_pruned;
    int max_memory = 0;
    size_t nodes = 0;
};

struct PerS {
    double s = 0;
    double mean = 0; // mean T / s
    double std_err = 0;
    int replicas = 0;
};

struct MuEstimate {
    ModelKind model = ModelKind::rewards;
    double p = 2;
    Vec u;
    double epsilon = 0;
    std::vector<PerS> per_s;
    double mu_hat = 0, mu_err = 0; // at the largest s
    double gap_trend = 0;          // least-squares slope of mean T / s against s
    std::vector<ReplicaRecord> records;
};

// Realization used for replica r at the i-th s value; shared by both models
// and by every epsilon.
uint64_t replica_seed(uint64_t seed, size_t s_index, int replica);

MuEstimate estimate_mu(ModelKind model, const NormSpec& spec, const Vec& u, double epsilon, const Vec& s_grid,
                       int replicas, uint64_t seed, const EstimationOptions& opts = {});

// Several epsilons in one fan-out; element i belongs to eps_grid[i].
std::vector<MuEstimate> estimate_mu_grid(ModelKind model, const NormSpec& spec, const Vec& u, const Vec& eps_grid,
                                         const Vec& s_grid, int replicas, uint64_t seed,
                                         const EstimationOptions& opts = {});

struct FitPoint {
    double epsilon = 0;
    double one_minus_mu = 0;
    double std_err = 0;
};

struct ScalingFit {
    ModelKind model = ModelKind::rewards;
    std::vector<FitPoint> points;
    double slope = 0, intercept = 0, r_squared = 0;
    double slope_err = 0;
    Rational kappa_ref;
    double tolerance = 0.15;
    bool within_tolerance = false;
};

// Weighted least squares of log(1 - mu) on log(epsilon), weights ((1 - mu) / err)^2.
ScalingFit fit_scaling(ModelKind model, const std::vector<FitPoint>& pts, Rational kappa_ref, double tolerance);

ScalingFit scaling_sweep(const NormSpec& spec, const Vec& u, const Vec& eps_grid, double s, int replicas,
                         uint64_t seed, ModelKind model, const EstimationOptions& opts = {}, double tolerance = 0.15,
                         std::vector<MuEstimate>* estimates = nullptr);

struct GapPoint {
    double epsilon = 0;
    double mu = 0, mu_err = 0;             // rewards
    double mu_tilde = 0, mu_tilde_err = 0; // balls
    double gap = 0, gap_err = 0;           // mu_tilde - mu, paired
    double normalized = 0, normalized_err = 0; // gap / eps^kappa
};

struct ModelComparison {
    std::vector<GapPoint> points;
    Rational kappa;
    std::vector<MuEstimate> rewards, balls;
};

ModelComparison compare_models(const NormSpec& spec, const Vec& u, const Vec& eps_grid, double s, int replicas,
                               uint64_t seed, const EstimationOptions& opts = {});

// Builds the comparison from estimates already computed on paired realizations.
ModelComparison compare_estimates(const NormSpec& spec, const Vec& u, const std::vector<MuEstimate>& rewards,
                                  const std::vector<MuEstimate>& balls);

struct TrendPoint {
    double epsilon = 0;
    double value = 0, std_err = 0; // (1 - mu) / eps^kappa
};

struct MonotonicityReport {
    std::vector<TrendPoint> points;
    std::vector<int> flagged; // i such that value[i+1] < value[i] - 2 combined err
    Rational kappa;
    std::vector<MuEstimate> estimates;
};

MonotonicityReport monotonicity_check(const NormSpec& spec, const Vec& u, const Vec& eps_grid, double s, int replicas,
                                      uint64_t seed, const EstimationOptions& opts = {});

} // namespace fpp
