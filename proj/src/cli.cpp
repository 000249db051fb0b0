#include "piezotherm/cli.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>

#include <CLI11.hpp>

#include "piezotherm/config.hpp"
#include "piezotherm/diagnostics.hpp"
#include "piezotherm/io.hpp"

namespace piezotherm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Context {
    ExperimentConfig config;
    fs::path out_dir;
    std::ostream& out;
};

json bounds_json(const AprioriBoundReport& b) {
    return {{"sup_v2", b.sup_v2},
            {"sup_u2", b.sup_u2},
            {"sup_uz2", b.sup_uz2},
            {"sup_theta", b.sup_theta},
            {"eps_vzz2", b.eps_vzz2},
            {"eps_uzz2", b.eps_uzz2},
            {"q", b.q_values},
            {"theta_moments", b.theta_moments},
            {"r", b.r_values},
            {"gradient_moments", b.gradient_moments},
            {"vz2", b.vz2},
            {"weighted_gradient", b.weighted_gradient},
            {"moment_ratio", b.moment_ratio},
            {"moment_growth_flag", b.moment_growth_flag},
            {"gronwall_rate", b.gronwall_rate},
            {"gronwall_fit_rms", b.gronwall_fit_rms},
            {"gronwall_ok", b.gronwall_ok},
            {"all_finite", b.all_finite}};
}

// Validation of coefficients and parameters; prints the range table.
bool check_model(const Context& cx, const Model& m, json& report) {
    const ValidationReport v = validate(m.coeffs, m.params);
    cx.out << std::left << std::setw(14) << "field" << std::setw(26) << "min"
           << "max\n";
    json ranges = json::array();
    for (const auto& r : v.ranges) {
        cx.out << std::setw(14) << r.name << std::setw(26) << format_double(r.min) << format_double(r.max) << '\n';
        ranges.push_back({{"name", r.name}, {"min", r.min}, {"max", r.max}});
    }
    for (const auto& f : v.failures) cx.out << "FAIL " << f << '\n';
    const auto warnings = stability_warnings(m);
    for (const auto& w : warnings) cx.out << "warning: " << w << '\n';
    report = {{"ok", v.ok()}, {"ranges", ranges}, {"failures", v.failures}, {"warnings", warnings}};
    return v.ok();
}

ObservationTrace observe(const ExperimentConfig& c, const StateTrajectory& traj, const MaterialParams& f,
                         const ExcitationLift& lift) {
    switch (c.observation_kind) {
        case TraceKind::window: return observe_window_charge(traj, f, lift, c.gamma * c.length);
        case TraceKind::boundary: return observe_boundary_charge(traj, f, lift);
        case TraceKind::bulk: break;
    }
    return observe_bulk_charge(traj, f, lift, c.lower_half);
}

void write_trajectory(const fs::path& dir, const StateTrajectory& traj) {
    write_field_csv(dir / "u.csv", traj.u);
    write_field_csv(dir / "v.csv", traj.v);
    write_field_csv(dir / "theta.csv", traj.theta);
    write_field_csv(dir / "phi0.csv", traj.phi0);
}

void write_energy_csv(const fs::path& path, const EnergyReport& e) {
    std::ofstream csv(path);
    csv << "t,kinetic,elastic,d_kinetic,d_elastic,dissipation,eps_vzz,eps_p_uzz,eps_pz_uz_uzz,thermal,rho_t,p_t,"
           "residual\n";
    for (const auto& r : e.rows) {
        for (double x : {r.time, r.kinetic, r.elastic, r.d_kinetic, r.d_elastic, r.dissipation, r.eps_vzz,
                         r.eps_p_uzz, r.eps_pz_uz_uzz, r.thermal, r.rho_t, r.p_t}) {
            csv << format_double(x) << ',';
        }
        csv << format_double(r.residual) << '\n';
    }
}

int cmd_validate(const Context& cx) {
    const Model m = cx.config.model(true);
    json report;
    const bool ok = check_model(cx, m, report);
    write_json(cx.out_dir / "validation.json", report);
    return ok ? exit_ok : exit_invalid;
}

int cmd_forward(const Context& cx) {
    const ExperimentConfig& c = cx.config;
    const Model m = c.model(true);
    json validation;
    if (!check_model(cx, m, validation)) return exit_invalid;
    const StateTrajectory traj = run_forward(c.initial_data(), m, SolverConfig{c.epsilon});
    write_trajectory(cx.out_dir, traj);
    const EnergyReport energy = energy_identity_residual(traj, m);
    write_energy_csv(cx.out_dir / "energy.csv", energy);
    json summary{{"epsilon", traj.epsilon},
                 {"min_theta", traj.min_theta},
                 {"max_theta", traj.max_theta},
                 {"warnings", traj.warnings},
                 {"energy_aggregate_residual", energy.aggregate_residual},
                 {"energy_scale", energy.scale},
                 {"bounds", bounds_json(apriori_monitor(traj, m))}};
    if (c.excitation_is_zero()) {
        summary["observation"] = "skipped: zero excitation";
    } else {
        const ObservationTrace tr = observe(c, traj, m.params, m.lift);
        write_trace_csv(cx.out_dir / "charge.csv", tr);
        if (!tr.lower_half.empty()) {
            ObservationTrace lower = tr;
            lower.values = tr.lower_half;
            lower.note = "lower half (0, h/2)";
            write_trace_csv(cx.out_dir / "charge_lower.csv", lower);
        }
    }
    write_json(cx.out_dir / "summary.json", summary);
    cx.out << "forward: " << m.time.n_step() << " steps, theta in [" << format_double(traj.min_theta) << ", "
           << format_double(traj.max_theta) << "]\n";
    return exit_ok;
}

int cmd_epsilon_study(const Context& cx) {
    const ExperimentConfig& c = cx.config;
    const Model m = c.model(true);
    json validation;
    if (!check_model(cx, m, validation)) return exit_invalid;
    const EpsilonStudyReport r = epsilon_convergence_study(c.initial_data(), m, c.eps_list);
    json bounds = json::array();
    for (const auto& b : r.bounds) bounds.push_back(bounds_json(b));
    write_json(cx.out_dir / "epsilon_study.json",
               {{"eps", r.eps},
                {"dist_u", r.dist_u},
                {"dist_v", r.dist_v},
                {"dist_theta", r.dist_theta},
                {"step_u", r.step_u},
                {"step_v", r.step_v},
                {"step_theta", r.step_theta},
                {"distance_decreasing", r.distance_decreasing},
                {"cauchy_decreasing", r.cauchy_decreasing},
                {"bounds", bounds},
                {"bounds_limit", bounds_json(r.bounds_limit)}});
    std::ofstream csv(cx.out_dir / "epsilon_study.csv");
    csv << "eps,dist_u,dist_v,dist_theta\n";
    for (std::size_t i = 0; i < r.eps.size(); ++i) {
        csv << format_double(r.eps[i]) << ',' << format_double(r.dist_u[i]) << ',' << format_double(r.dist_v[i])
            << ',' << format_double(r.dist_theta[i]) << '\n';
    }
    cx.out << "epsilon-study: distances " << (r.distance_decreasing ? "decreasing" : "NOT decreasing") << '\n';
    return exit_ok;
}

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

int cmd_convergence(const Context& cx) {
    const ExperimentConfig& base = cx.config;
    json levels = json::array();
    std::vector<double> dts, energy, weak;
    std::vector<std::vector<double>> charges;
    const auto tests = TestFunctionFamily::random(32, base.length, base.end_time, base.seed);
    for (std::size_t k = 0; k < base.refinement_levels; ++k) {
        ExperimentConfig c = base;
        c.n_elem = base.n_elem << k;
        c.n_step = base.n_step << k;
        const Model m = c.model(true);
        if (k == 0) {
            json validation;
            if (!check_model(cx, m, validation)) return exit_invalid;
        }
        const StateTrajectory traj = run_forward(c.initial_data(), m, SolverConfig{c.epsilon});
        const EnergyReport e = energy_identity_residual(traj, m);
        const WeakResidualReport w = weak_residual(traj, m, tests);
        json row{{"n_elem", c.n_elem},
                 {"n_step", c.n_step},
                 {"energy_aggregate_residual", e.aggregate_residual},
                 {"weak_max_normalized", w.max_normalized}};
        if (!c.excitation_is_zero()) {
            const auto tr = observe_bulk_charge(traj, m.params, m.lift);
            // restrict to the coarsest levels
            std::vector<double> coarse;
            for (std::size_t n = 0; n <= base.n_step; ++n) coarse.push_back(tr.values[n << k]);
            charges.push_back(std::move(coarse));
        }
        levels.push_back(std::move(row));
        dts.push_back(m.time.dt());
        energy.push_back(e.aggregate_residual);
        weak.push_back(w.max_normalized);
        cx.out << "level " << k << ": energy residual " << format_double(e.aggregate_residual)
               << ", weak residual " << format_double(w.max_normalized) << '\n';
    }
    json report{{"levels", levels}};
    const auto positive = [](const std::vector<double>& v) {
        for (double x : v) {
            if (!(x > 0.0)) return false;
        }
        return true;
    };
    if (positive(energy)) report["energy_order"] = fitted_slope(dts, energy);
    if (positive(weak)) report["weak_order"] = fitted_slope(dts, weak);
    if (charges.size() >= 3) {
        const TimeGrid coarse = base.time();
        std::vector<double> diffs;
        for (std::size_t k = 0; k + 1 < charges.size(); ++k) {
            std::vector<double> d(charges[k].size());
            for (std::size_t n = 0; n < d.size(); ++n) d[n] = charges[k + 1][n] - charges[k][n];
            diffs.push_back(trace_norm(coarse, d));
        }
        report["charge_differences"] = diffs;
        if (diffs.back() > 0.0) report["charge_order"] = std::log2(diffs[diffs.size() - 2] / diffs.back());
    }
    write_json(cx.out_dir / "convergence.json", report);
    return exit_ok;
}

// Smooth random space-time field vanishing at t = 0.
SpaceTimeField random_field(const SpatialGrid& g, const TimeGrid& t, std::mt19937_64& rng, double scale,
                            SpatialShape shape) {
    std::normal_distribution<double> nd;
    std::array<double, 9> a{};
    for (double& x : a) x = nd(rng);
    return SpaceTimeField::from_function(g, t, [&](double z, double time) {
        const double s = time / t.end_time();
        double v = 0.0;
        for (int m = 1; m <= 3; ++m) {
            const double x = m * std::numbers::pi * z / g.length();
            const double sp = shape == SpatialShape::sine ? std::sin(x) : std::cos(x);
            v += sp * (a[3 * (m - 1)] * s + a[3 * (m - 1) + 1] * s * s + a[3 * (m - 1) + 2] * s * s * s);
        }
        return scale * v;
    });
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double field_scale(const SpaceTimeField& f) {
    const double m = max_abs(f.data());
    return m > 0.0 ? m : 1.0;
}

void zero_dirichlet(SpaceTimeField& f) {
    for (std::size_t n = 0; n < f.n_levels(); ++n) {
        f.at(n, 0) = 0.0;
        f.at(n, f.n_nodes() - 1) = 0.0;
    }
}

int cmd_derivative_check(const Context& cx) {
    const ExperimentConfig& c = cx.config;
    const Model m = c.model();
    json validation;
    if (!check_model(cx, m, validation)) return exit_invalid;
    const StateTrajectory traj = run_forward(c.initial_data(), m, SolverConfig{c.epsilon});
    const State l = State::from_trajectory(traj);
    const auto basis =
        DiscreteTestBasis::random(c.inversion.basis_size, c.length, c.end_time, c.inversion.basis_seed);
    const ModelOperator op(m, basis);
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> nd;
    const SpatialGrid& g = m.grid;
    const TimeGrid& t = m.time;

    const auto state_tangent = [&](double s) {
        StateTangent xi{random_field(g, t, rng, s * field_scale(l.u), SpatialShape::sine),
                        random_field(g, t, rng, s * field_scale(l.phi0), SpatialShape::sine),
                        random_field(g, t, rng, s * field_scale(l.theta), SpatialShape::cosine)};
        zero_dirichlet(xi.eta);
        zero_dirichlet(xi.omega);
        return xi;
    };
    const auto perturbed = [](const State& base, const StateTangent& xi, double s) {
        State r = base;
        r.u += s * xi.eta;
        r.phi0 += s * xi.omega;
        r.theta += s * xi.kappa;
        return r;
    };

    double af = 0.0, rem = 0.0, cf = 0.0, adj_s = 0.0, adj_p = 0.0;
    const bool constant_tau = m.coeffs.tau.is_constant();
    for (std::size_t k = 0; k < c.derivative_samples; ++k) {
        MaterialParams f = m.params;
        f.p1 *= 1.0 + 0.1 * nd(rng);
        f.p2 *= 1.0 + 0.1 * nd(rng);
        f.p3 *= std::exp(0.1 * nd(rng));
        const State lk = perturbed(l, state_tangent(0.1), 1.0);
        ParamTangent q{0.1 * nd(rng) * f.p1, random_field(g, t, rng, 0.1 * field_scale(f.p2), SpatialShape::cosine),
                       random_field(g, t, rng, 0.1 * field_scale(f.p3), SpatialShape::cosine)};
        MaterialParams fq = f;
        fq.p1 += q.q1;
        fq.p2 += q.q2;
        fq.p3 += q.q3;
        const OperatorImage base = op.apply(f, lk);
        OperatorImage d = op.apply(fq, lk);
        d -= base;
        const OperatorImage lin = op.param_derivative(f, lk, q);
        d -= lin;
        af = std::max(af, d.model_norm_inf() / (1.0 + lin.model_norm_inf()));

        const StateTangent xi = state_tangent(0.5);
        if (constant_tau) {
            OperatorImage r = op.apply(f, perturbed(lk, xi, 1.0));
            r -= base;
            const OperatorImage dl = op.state_derivative(f, lk, xi);
            r -= dl;
            const OperatorImage quad = state_taylor_remainder(m, f, lk, xi, basis);
            r -= quad;
            rem = std::max(rem, r.model_norm_inf() / std::max(quad.model_norm_inf(), dl.model_norm_inf()));
        }

        const auto c0 = observe_bulk_charge(lk.u, lk.phi0, f, m.lift).values;
        const auto c1 = observe_bulk_charge(lk.u, lk.phi0, fq, m.lift).values;
        const auto cd = observation_derivatives(f, lk, StateTangent::zero(g, t), q, m.lift).param;
        double num = 0.0;
        for (std::size_t n = 0; n < c0.size(); ++n) num = std::max(num, std::abs(c1[n] - c0[n] - cd[n]));
        cf = std::max(cf, num / (1.0 + max_abs(cd)));

        // transposes against random residual vectors
        OperatorImage w{std::vector<double>(basis.size()), std::vector<double>(basis.size()),
                        std::vector<double>(basis.size()), {}};
        for (auto* v : {&w.momentum, &w.potential, &w.heat}) {
            for (double& x : *v) x = nd(rng);
        }
        const auto pair = [](const std::vector<double>& a, const std::vector<double>& b) {
            double s = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
            return s;
        };
        const auto fdot = [](const SpaceTimeField& a, const SpaceTimeField& b) {
            double s = 0.0;
            for (std::size_t i = 0; i < a.data().size(); ++i) s += a.data()[i] * b.data()[i];
            return s;
        };
        const double l1 = pair(op.state_derivative(f, lk, xi).model_block(), w.model_block());
        const StateTangent at = op.state_adjoint(f, lk, w);
        const double r1 = fdot(xi.eta, at.eta) + fdot(xi.omega, at.omega) + fdot(xi.kappa, at.kappa);
        adj_s = std::max(adj_s, std::abs(l1 - r1) / std::max(std::abs(l1), 1e-300));
        const double l2 = pair(lin.model_block(), w.model_block());
        const ParamTangent pt = op.param_adjoint(f, lk, w);
        const double r2 = q.q1 * pt.q1 + fdot(q.q2, pt.q2) + fdot(q.q3, pt.q3);
        adj_p = std::max(adj_p, std::abs(l2 - r2) / std::max(std::abs(l2), 1e-300));
    }

    // finite-difference slopes at the trajectory itself
    const StateTangent xi = state_tangent(1.0);
    const OperatorImage a0 = op.apply(m.params, l);
    const OperatorImage dl = op.state_derivative(m.params, l, xi);
    const auto c0 = observe_bulk_charge(l.u, l.phi0, m.params, m.lift).values;
    const auto cl = observation_derivatives(m.params, l, xi, ParamTangent::zero(g, t), m.lift).state;
    std::vector<double> steps{1e-1, 1e-2, 1e-3, 1e-4}, err_a, err_c;
    json fd = json::array();
    for (double s : steps) {
        OperatorImage r = op.apply(m.params, perturbed(l, xi, s));
        r -= a0;
        OperatorImage sdl = dl;
        for (auto* v : {&sdl.momentum, &sdl.potential, &sdl.heat}) {
            for (double& x : *v) x *= s;
        }
        r -= sdl;
        err_a.push_back(r.model_norm_inf() / s);
        const State ls = perturbed(l, xi, s);
        const auto cs = observe_bulk_charge(ls.u, ls.phi0, m.params, m.lift).values;
        double e = 0.0;
        for (std::size_t n = 0; n < cs.size(); ++n) e = std::max(e, std::abs(cs[n] - c0[n] - s * cl[n]));
        err_c.push_back(e / s);
        fd.push_back({{"s", s}, {"model_error", err_a.back()}, {"observation_error", err_c.back()}});
    }

    json report{{"samples", c.derivative_samples},
                {"a_f_exactness", af},
                {"a_l_remainder", constant_tau ? json(rem) : json("skipped: temperature-dependent relaxation")},
                {"a_l_fd_slope", fitted_slope(steps, err_a)},
                {"observation_param_exactness", cf},
                {"observation_state_fd_slope", fitted_slope(steps, err_c)},
                {"adjoint_state", adj_s},
                {"adjoint_param", adj_p},
                {"finite_differences", fd}};
    write_json(cx.out_dir / "derivative_check.json", report);
    cx.out << "derivative-check: A_f exactness " << format_double(af) << ", A_l slope "
           << format_double(report["a_l_fd_slope"].get<double>()) << '\n';
    return exit_ok;
}

int cmd_observe(const Context& cx) {
    const ExperimentConfig& c = cx.config;
    const Model m = c.model();
    json validation;
    if (!check_model(cx, m, validation)) return exit_invalid;
    const StateTrajectory traj = run_forward(c.initial_data(), m, SolverConfig{c.epsilon});
    const ObservationTrace clean = observe(c, traj, m.params, m.lift);
    write_trace_csv(cx.out_dir / "observation_clean.csv", clean);
    const double delta = c.delta * trace_norm(m.time, clean.values);
    const ObservationTrace noisy = add_noise(clean, delta, c.seed);
    write_trace_csv(cx.out_dir / "observation.csv", noisy);
    cx.out << "observe: " << to_string(clean.kind) << " trace, noise level " << format_double(delta) << '\n';
    return exit_ok;
}

int cmd_invert(const Context& cx) {
    const ExperimentConfig& c = cx.config;
    const Model m = c.model();
    json validation;
    if (!check_model(cx, m, validation)) return exit_invalid;
    const InitialData init = c.initial_data();
    std::optional<MaterialParams> truth;
    if (!c.truth.is_null()) truth = c.params(c.truth, m.grid, m.time);
    ObservationTrace y{m.time, {}, TraceKind::bulk, 0.0, 0.0, 0, "", {}};
    if (!c.data_file.empty()) {
        y = read_trace_csv(c.data_file, m.time);
    } else {
        if (!truth) throw ConfigError("config field 'inversion.truth': required when no data file is given");
        Model mt = m;
        mt.params = *truth;
        const ObservationTrace clean = observe_bulk_charge(run_forward(init, mt, SolverConfig{}), *truth, m.lift);
        y = add_noise(clean, c.delta * trace_norm(m.time, clean.values), c.seed);
    }
    write_trace_csv(cx.out_dir / "data.csv", y);
    try {
        InversionReport r = invert_all_at_once(y, init, m, c.inversion, truth);
        write_json(cx.out_dir / "inversion.json", r.to_json());
        cx.out << "invert: " << r.stop_reason << " after " << r.history.back().iteration << " iterations, misfit "
               << format_double(r.history.back().misfit) << '\n';
        return exit_ok;
    } catch (const InversionDiverged& e) {
        write_json(cx.out_dir / "inversion.json", e.report().to_json());
        throw;
    }
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Coupled piezoelectric-thermal simulation, diagnostics and parameter identification"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    const auto add = [&](const char* name, const char* help) {
        CLI::App* s = app.add_subcommand(name, help);
        s->add_option("--config", config_path, "experiment JSON")->required();
        s->add_option("--out", out_dir, "output directory (overrides output.dir)");
        s->add_option("--seed", seed, "seed for noise and random bases");
        return s;
    };
    const std::vector<std::pair<CLI::App*, int (*)(const Context&)>> commands{
        {add("forward", "run the forward solver and write trajectories"), cmd_forward},
        {add("epsilon-study", "sweep the regularization parameter"), cmd_epsilon_study},
        {add("convergence", "grid refinement study"), cmd_convergence},
        {add("derivative-check", "check derivatives of the model operator"), cmd_derivative_check},
        {add("observe", "compute a (noisy) charge trace"), cmd_observe},
        {add("invert", "all-at-once parameter reconstruction"), cmd_invert},
        {add("validate", "check coefficients and print their ranges"), cmd_validate}};

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_invalid;
    }

    try {
        ExperimentConfig config = ExperimentConfig::load(config_path);
        if (!out_dir.empty()) config.output_dir = out_dir;
        for (const auto& [sub, fn] : commands) {
            if (!sub->parsed()) continue;
            if (sub->count("--seed")) {
                config.seed = seed;
                config.inversion.basis_seed = seed;
            }
            const fs::path dir = config.output_dir;
            fs::create_directories(dir);
            write_json(dir / "config.json", config.to_json());
            return fn(Context{config, dir, out});
        }
    } catch (const InversionDiverged& e) {
        err << "error: " << e.what() << '\n';
        return exit_diverged;
    } catch (const SolverFailure& e) {
        err << "solver failure at step " << e.step() << ": " << e.what() << '\n';
        return exit_solver;
    } catch (const SingularPivot& e) {
        err << "solver failure: " << e.what() << '\n';
        return exit_solver;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_invalid;
    }
    return exit_invalid;
}

}  // namespace piezotherm
