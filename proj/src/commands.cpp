#include "fpp/commands.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>

#include <json.hpp>

#include "fpp/balls.hpp"
#include "fpp/geometry.hpp"
#include "fpp/greedy.hpp"
#include "fpp/output.hpp"
#include "fpp/parallel.hpp"
#include "fpp/rewards.hpp"
#include "fpp/selftest.hpp"

namespace fpp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr uint64_t kGreedyTag = 0x475244;
constexpr uint64_t kGeometryTag = 0x47454f;

std::string out_path(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / name).string();
}

json base_json(const RunConfig& cfg, const std::string& command) {
    json j;
    j["fpp_version"] = kVersion;
    j["command"] = command;
    json c = json::object();
    for (auto& [k, v] : cfg.echo) c[k] = v;
    j["config"] = c;
    return j;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string rational_text(const Rational& r) {
    return std::to_string(r.numerator()) + (r.denominator() == 1 ? "" : "/" + std::to_string(r.denominator()));
}

std::vector<std::string> coord_columns(const std::string& prefix, int d) {
    std::vector<std::string> c;
    for (int i = 0; i < d; ++i) c.push_back(prefix + std::to_string(i));
    return c;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

double nan_if_throws(const std::function<double()>& f) {
    try {
        return f();
    } catch (const OutOfRange&) {
        return std::nan("");
    }
}

EstimationOptions estimation_options(const RunConfig& cfg) {
    EstimationOptions o;
    o.solver = cfg.solver;
    o.exec = Exec::parallel;
    return o;
}

json fit_json(const ScalingFit& f) {
    json j;
    j["model"] = to_string(f.model);
    j["slope"] = f.slope;
    j["slope_err"] = f.slope_err;
    j["intercept"] = f.intercept;
    j["r_squared"] = f.r_squared;
    j["kappa_ref"] = to_double(f.kappa_ref);
    j["kappa_ref_exact"] = rational_text(f.kappa_ref);
    j["tolerance"] = f.tolerance;
    j["within_tolerance"] = f.within_tolerance;
    return j;
}

} // namespace

int runtime_error_code(const std::exception& e) {
    if (dynamic_cast<const EpsilonTooLarge*>(&e) || dynamic_cast<const ResourceError*>(&e) ||
        dynamic_cast<const UnsupportedCase*>(&e) || dynamic_cast<const DegeneratePoint*>(&e) ||
        dynamic_cast<const OutOfRange*>(&e) || dynamic_cast<const TooLarge*>(&e) ||
        dynamic_cast<const InvalidArgument*>(&e))
        return 3;
    return 0;
}

std::vector<std::string> cmd_geometry(const RunConfig& cfg) {
    NormSpec spec(cfg.d, cfg.p);
    Direction dir = support_data(spec, cfg.u);
    Exponents ex = exponents(spec, dir);
    MCParams mc{cfg.mc_samples, substream_key(cfg.seed, kGeometryTag), Exec::parallel};
    HProfile prof = h_profile(spec, dir, cfg.eta_grid, mc);

    std::vector<IntegralEstimate> integ(cfg.eta_grid.size());
    for (size_t i = 0; i < cfg.eta_grid.size(); ++i) {
        double eta = cfg.eta_grid[i];
        if (eta < 1) {
            MCParams m = mc;
            m.seed = substream_key(cfg.seed, kGeometryTag, 1, i);
            integ[i] = integral_I(spec, dir, eta, m);
        } else {
            integ[i].i = integ[i].i_plus = std::nan("");
        }
    }

    std::vector<std::string> files;
    {
        std::string path = out_path(cfg, "geometry.csv");
        CsvWriter w(path, cfg, "geometry",
                    {"eta", "k_vol", "k_err", "m_vol", "m_err", "h", "hbar", "I", "I_plus", "gamma", "kappa"});
        for (size_t i = 0; i < cfg.eta_grid.size(); ++i) {
            w << cfg.eta_grid[i] << prof.k[i].value << prof.k[i].std_err << prof.m[i].value << prof.m[i].std_err
              << prof.h[i] << prof.hbar[i] << integ[i].i << integ[i].i_plus << to_double(ex.gamma)
              << to_double(ex.kappa);
            w.end_row();
        }
        files.push_back(path);
    }
    {
        // g and gbar on a log grid spanning the tabulated h range
        std::string path = out_path(cfg, "geometry_inverse.csv");
        CsvWriter w(path, cfg, "geometry", {"x", "g", "g_bracket", "gbar", "gbar_bracket"});
        double lo = std::min(prof.h_iso.back(), prof.hbar_iso.back());
        double hi = std::max(prof.h_iso.front(), prof.hbar_iso.front());
        const int n = cfg.eta_grid.size() > 1 ? 2 * static_cast<int>(cfg.eta_grid.size()) : 1;
        for (int i = 0; i < n; ++i) {
            double x = n == 1 ? lo : lo * std::pow(hi / lo, double(i) / (n - 1));
            double gb = std::nan(""), gbb = std::nan("");
            double g = nan_if_throws([&] {
                Inverse r = prof.g(x);
                gb = r.bracket;
                return r.value;
            });
            double gbar = nan_if_throws([&] {
                Inverse r = prof.gbar(x);
                gbb = r.bracket;
                return r.value;
            });
            w << x << g << gb << gbar << gbb;
            w.end_row();
        }
        files.push_back(path);
    }
    {
        json j = base_json(cfg, "geometry");
        j["kappa"] = to_double(ex.kappa);
        j["kappa_exact"] = rational_text(ex.kappa);
        j["gamma"] = to_double(ex.gamma);
        j["gamma_exact"] = rational_text(ex.gamma);
        j["flat_edge"] = ex.flat_edge;
        j["u"] = dir.u;
        j["u_star"] = dir.u_star;
        j["h_basis"] = dir.h_basis;
        j["d1"] = dir.d1;
        j["d2"] = dir.d2;
        j["d3"] = dir.d3;
        j["d4"] = dir.d4;
        std::string path = out_path(cfg, "geometry.json");
        write_json(path, j);
        files.push_back(path);
    }
    return files;
}

std::vector<std::string> cmd_geodesic(const RunConfig& cfg) {
    NormSpec spec(cfg.d, cfg.p);
    Direction dir = support_data(spec, cfg.u);
    const double eps = cfg.geodesic_epsilon, s = cfg.geodesic_s;
    Vec x(cfg.d, 0.0), y(cfg.d);
    for (int i = 0; i < cfg.d; ++i) y[i] = s * dir.u[i];
    PoissonField field(cfg.d, replica_seed(cfg.seed, 0, cfg.geodesic_replica));
    const bool rewards = cfg.geodesic_model == ModelKind::rewards;
    GeodesicResult g = rewards ? geodesic_rewards(spec, source_of(field), x, y, eps, cfg.solver, Exec::parallel)
                               : geodesic_balls(spec, source_of(field), x, y, eps, cfg.solver, Exec::parallel);

    std::vector<std::string> files;
    auto dump_path = [&](const std::string& name, const Path& p) {
        std::string path = out_path(cfg, name);
        CsvWriter w(path, cfg, "geodesic", concat(concat({"index"}, coord_columns("x", cfg.d)), {"in_cloud"}));
        for (size_t i = 0; i < p.size(); ++i) {
            w << i;
            for (double c : p.vertices[i]) w << c;
            w << static_cast<int>(p.interior_in_cloud[i]);
            w.end_row();
        }
        files.push_back(path);
    };
    dump_path("geodesic_vertices.csv", g.path);

    json j = base_json(cfg, "geodesic");
    j["model"] = to_string(cfg.geodesic_model);
    j["epsilon"] = eps;
    j["s"] = s;
    j["time"] = g.time;
    j["n_length"] = g.n_length;
    j["reward_count"] = g.reward_count;
    j["graph_value"] = g.graph_value;
    j["certificate"] = to_string(g.certificate);
    j["upper_bound"] = g.upper_bound;
    j["window"] = {{"lo", g.window.lo}, {"hi", g.window.hi}};
    j["stats"] = {{"nodes", g.stats.nodes},
                  {"edges", g.stats.edges},
                  {"states", g.stats.states},
                  {"certificate_rounds", g.stats.certificate_rounds},
                  {"max_memory", g.stats.max_memory},
                  {"memory_growths", g.stats.memory_growths},
                  {"windows", g.stats.windows}};
    OverlapDiagnostics od = overlap_diagnostics(spec, g.path, eps);
    j["overlap"] = {{"y_count", od.y_count}, {"z_count", od.z_count}};
    PathStats ps = path_stats(spec, g.path, s, eps, cfg.greedy_eta, 0, 1);
    j["length_ratio"] = ps.length_ratio;
    j["reward_rate"] = ps.reward_rate;
    if (!rewards) {
        BooleanModel model(spec, field.sample(g.window), eps);
        PiCheckReport raw = validate_pi_check(model, g.path);
        Path canon = canonicalize_to_pi_check(model, g.path);
        PiCheckReport fixed = validate_pi_check(model, canon);
        j["pi_check"] = {{"raw_valid", raw.valid},
                         {"raw_violation", raw.violation},
                         {"raw_message", raw.message},
                         {"canonical_valid", fixed.valid},
                         {"canonical_violation", fixed.violation},
                         {"canonical_time", path_time_balls(model, canon)}};
        dump_path("geodesic_canonical.csv", canon);
    }
    std::string path = out_path(cfg, "geodesic.json");
    write_json(path, j);
    files.push_back(path);
    return files;
}

std::vector<std::string> cmd_greedy(const RunConfig& cfg) {
    NormSpec spec(cfg.d, cfg.p);
    Direction dir = support_data(spec, cfg.u);
    Exponents ex = exponents(spec, dir);
    const double kappa = to_double(ex.kappa);
    MCParams mc{cfg.mc_samples, substream_key(cfg.seed, kGreedyTag, 0), Exec::parallel};
    std::vector<std::string> files;

    GreedyRun run = cfg.greedy_spaced
                        ? greedy_path_spaced(spec, dir, cfg.greedy_eta, cfg.greedy_epsilon, cfg.greedy_s,
                                             substream_key(cfg.seed, kGreedyTag, 1), cfg.greedy_mode, 0, mc)
                        : greedy_path(spec, dir, cfg.greedy_eta, cfg.greedy_epsilon, cfg.greedy_s, cfg.greedy_mode,
                                      substream_key(cfg.seed, kGreedyTag, 1), 0, mc);
    {
        std::string path = out_path(cfg, "greedy_trace.csv");
        CsvWriter w(path, cfg, "greedy",
                    concat(concat({"n", "lambda", "S"}, coord_columns("w", cfg.d)), coord_columns("v", cfg.d)));
        for (size_t n = 0; n < run.S.size(); ++n) {
            w << n << (n ? run.increments[n - 1].lambda : 0.0) << run.S[n];
            for (int i = 0; i < cfg.d; ++i) w << (n ? run.increments[n - 1].w[i] : 0.0);
            for (double v : run.V[n]) w << v;
            w.end_row();
        }
        files.push_back(path);
    }

    // Upper-bound curve. The greedy path does not depend on epsilon, so one
    // run per eta serves every epsilon: T = N(path) - eps^(1/d) Z(s).
    const size_t ne = cfg.greedy_eta_grid.size();
    std::vector<GreedyRun> runs(ne);
    for_each_index(static_cast<long long>(ne), Exec::parallel, [&](long long k) {
        MCParams m{cfg.mc_samples, substream_key(cfg.seed, kGreedyTag, 2, k), Exec::serial};
        runs[k] = greedy_path(spec, dir, cfg.greedy_eta_grid[k], cfg.greedy_epsilon, cfg.greedy_bound_s,
                              GreedyMode::direct_law, substream_key(cfg.seed, kGreedyTag, 3, k), 0, m);
    });
    const double s = cfg.greedy_bound_s;
    json best_rows = json::array();
    {
        std::string path = out_path(cfg, "greedy_bound.csv");
        std::string best_path = out_path(cfg, "greedy_bound_best.csv");
        CsvWriter w(path, cfg, "greedy", {"epsilon", "eta", "m_vol", "length_ratio", "reward_rate", "mu_upper"});
        CsvWriter b(best_path, cfg, "greedy",
                    {"epsilon", "best_eta", "mu_upper", "one_minus_mu_lower", "normalized"});
        for (double eps : cfg.epsilon_grid) {
            const double delta = reward_delta(cfg.d, eps);
            double best = std::numeric_limits<double>::infinity(), best_eta = 0;
            for (size_t k = 0; k < ne; ++k) {
                const GreedyRun& r = runs[k];
                double ratio = r.n_length / s, rate = delta * double(r.z_s) / s;
                double mu_up = ratio - rate;
                w << eps << r.eta << r.m_volume << ratio << rate << mu_up;
                w.end_row();
                if (mu_up < best) {
                    best = mu_up;
                    best_eta = r.eta;
                }
            }
            b << eps << best_eta << best << 1 - best << (1 - best) / std::pow(eps, kappa);
            b.end_row();
            best_rows.push_back({{"epsilon", eps}, {"one_minus_mu_lower", 1 - best}});
        }
        files.push_back(path);
        files.push_back(best_path);
    }
    {
        json j = base_json(cfg, "greedy");
        j["trace"] = {{"eta", run.eta},          {"epsilon", run.epsilon}, {"s", run.s},
                      {"z_s", run.z_s},          {"m_volume", run.m_volume}, {"n_length", run.n_length},
                      {"path_time", run.path_time}, {"spaced", run.spaced}, {"mode", to_string(run.mode)}};
        j["kappa_ref"] = kappa;
        j["kappa_ref_exact"] = rational_text(ex.kappa);
        // a in 1 - mu >= a eps^kappa: the smallest ratio over the grid
        double a = std::numeric_limits<double>::infinity();
        std::vector<FitPoint> pts;
        for (auto& r : best_rows) {
            double e = r["epsilon"], v = r["one_minus_mu_lower"];
            a = std::min(a, v / std::pow(e, kappa));
            if (v > 0) pts.push_back({e, v, 0});
        }
        j["lower_bound_constant"] = a;
        if (pts.size() >= 2) j["lower_bound_fit"] = fit_json(fit_scaling(ModelKind::rewards, pts, ex.kappa, cfg.tolerance));
        j["bound"] = best_rows;
        std::string path = out_path(cfg, "greedy.json");
        write_json(path, j);
        files.push_back(path);
    }
    return files;
}

std::vector<std::string> cmd_sweep(const RunConfig& cfg) {
    NormSpec spec(cfg.d, cfg.p);
    Direction dir = support_data(spec, cfg.u);
    Exponents ex = exponents(spec, dir);
    const double kappa = to_double(ex.kappa);
    EstimationOptions opts = estimation_options(cfg);

    std::map<ModelKind, std::vector<MuEstimate>> est;
    std::map<ModelKind, ScalingFit> fits;
    for (ModelKind m : cfg.models) {
        if (est.count(m)) continue;
        est[m] = estimate_mu_grid(m, spec, dir.u, cfg.epsilon_grid, cfg.s_grid, cfg.replicas, cfg.seed, opts);
    }
    if (cfg.epsilon_grid.size() >= 2)
        for (auto& [m, list] : est) {
            std::vector<FitPoint> pts;
            for (auto& e : list) pts.push_back({e.epsilon, 1 - e.mu_hat, e.mu_err});
            fits[m] = fit_scaling(m, pts, ex.kappa, cfg.tolerance);
        }

    std::vector<std::string> files;
    {
        std::string path = out_path(cfg, "sweep_points.csv");
        CsvWriter w(path, cfg, "sweep",
                    {"model", "epsilon", "mu_hat", "mu_err", "one_minus_mu", "normalized", "normalized_err",
                     "gap_trend", "log_epsilon", "log_one_minus_mu"});
        for (auto& [m, list] : est)
            for (auto& e : list) {
                double om = 1 - e.mu_hat, sc = std::pow(e.epsilon, kappa);
                w << to_string(m) << e.epsilon << e.mu_hat << e.mu_err << om << om / sc << e.mu_err / sc
                  << e.gap_trend << std::log(e.epsilon) << (om > 0 ? std::log(om) : std::nan(""));
                w.end_row();
            }
        files.push_back(path);
    }
    {
        std::string path = out_path(cfg, "sweep_per_s.csv");
        CsvWriter w(path, cfg, "sweep", {"model", "epsilon", "s", "mean", "std_err", "replicas"});
        for (auto& [m, list] : est)
            for (auto& e : list)
                for (auto& p : e.per_s) {
                    w << to_string(m) << e.epsilon << p.s << p.mean << p.std_err << p.replicas;
                    w.end_row();
                }
        files.push_back(path);
    }
    {
        std::string path = out_path(cfg, "sweep_replicas.csv");
        CsvWriter w(path, cfg, "sweep",
                    {"model", "epsilon", "s", "replica", "time", "n_length", "reward_count", "y_count", "z_count",
                     "certificate", "max_memory", "nodes"});
        for (auto& [m, list] : est)
            for (auto& e : list)
                for (auto& r : e.records) {
                    w << to_string(m) << e.epsilon << r.s << r.replica << r.time << r.n_length << r.reward_count
                      << r.y_count << r.z_count << to_string(r.certificate) << r.max_memory << r.nodes;
                    w.end_row();
                }
        files.push_back(path);
    }
    for (auto& [m, list] : est) {
        std::string path = out_path(cfg, "sweep_" + to_string(m) + ".tsv");
        CsvWriter w(path, cfg, "sweep", {"log_epsilon", "log_one_minus_mu"}, '\t');
        for (auto& e : list) {
            double om = 1 - e.mu_hat;
            w << std::log(e.epsilon) << (om > 0 ? std::log(om) : std::nan(""));
            w.end_row();
        }
        files.push_back(path);
    }
    const bool both = est.count(ModelKind::rewards) && est.count(ModelKind::balls);
    ModelComparison cmp;
    if (both) {
        cmp = compare_estimates(spec, dir.u, est[ModelKind::rewards], est[ModelKind::balls]);
        std::string path = out_path(cfg, "sweep_gap.csv");
        CsvWriter w(path, cfg, "sweep",
                    {"epsilon", "mu", "mu_err", "mu_tilde", "mu_tilde_err", "gap", "gap_err", "normalized",
                     "normalized_err"});
        for (auto& g : cmp.points) {
            w << g.epsilon << g.mu << g.mu_err << g.mu_tilde << g.mu_tilde_err << g.gap << g.gap_err << g.normalized
              << g.normalized_err;
            w.end_row();
        }
        files.push_back(path);
    }
    {
        json j = base_json(cfg, "sweep");
        j["kappa_ref"] = kappa;
        j["kappa_ref_exact"] = rational_text(ex.kappa);
        j["gamma"] = to_double(ex.gamma);
        json jf = json::object();
        for (auto& [m, f] : fits) jf[to_string(m)] = fit_json(f);
        j["fits"] = jf;
        if (both) {
            json pts = json::array();
            for (auto& g : cmp.points)
                pts.push_back({{"epsilon", g.epsilon}, {"normalized_gap", g.normalized}, {"err", g.normalized_err}});
            j["gap"] = pts;
        }
        std::string path = out_path(cfg, "sweep.json");
        write_json(path, j);
        files.push_back(path);
    }
    return files;
}

int cmd_selftest(const RunConfig& cfg, std::vector<std::string>* written) {
    AcceptanceBudget b = cfg.selftest_budget == "full" ? full_budget() : reduced_budget();
    b.scratch_dir = out_path(cfg, "selftest_scratch");
    std::vector<CriterionResult> res = run_acceptance(b, cfg.seed, &std::cout);
    std::string path = out_path(cfg, "selftest.csv");
    {
        CsvWriter w(path, cfg, "selftest", {"criterion", "name", "pass", "detail"});
        for (auto& r : res) {
            std::string detail = r.detail;
            for (char& ch : detail)
                if (ch == ',' || ch == '\n') ch = ';';
            w << r.id << r.name << static_cast<int>(r.pass) << detail;
            w.end_row();
        }
    }
    if (written) written->push_back(path);
    bool ok = true;
    for (auto& r : res) ok = ok && r.pass;
    return ok ? 0 : 1;
}

} // namespace fpp
