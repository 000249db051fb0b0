#include "piezotherm/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "piezotherm/errors.hpp"

namespace piezotherm {

const char* to_string(ParamMode mode) {
    switch (mode) {
        case ParamMode::fixed: return "fixed";
        case ParamMode::constant: return "constant";
        case ParamMode::field: return "field";
    }
    return "fixed";
}

ParamMode param_mode_from_string(const std::string& s) {
    if (s == "fixed") return ParamMode::fixed;
    if (s == "constant") return ParamMode::constant;
    if (s == "field") return ParamMode::field;
    throw InvalidArgument("unknown parameter mode '" + s + "' (expected fixed, constant or field)");
}

void InversionConfig::validate() const {
    if (p1 == ParamMode::field) throw InvalidArgument("inversion.mask.p1: p1 is a scalar, use fixed or constant");
    if (p1 == ParamMode::fixed && p2 == ParamMode::fixed && p3 == ParamMode::fixed) {
        throw InvalidArgument("inversion.mask: no unknown parameter selected");
    }
    if (!(step > 0.0) || !(step < 2.0)) throw InvalidArgument("inversion.step must lie in (0, 2)");
    if (!(tau_dp > 1.0)) throw InvalidArgument("inversion.tau_dp must exceed 1");
    if (!(tikhonov >= 0.0)) throw InvalidArgument("inversion.tikhonov must be nonnegative");
    if (!(model_weight > 0.0)) throw InvalidArgument("inversion.model_weight must be positive");
    if (!(relative_tolerance >= 0.0)) throw InvalidArgument("inversion.relative_tolerance must be nonnegative");
    if (basis_size == 0) throw InvalidArgument("inversion.basis_size must be positive");
    if (max_rejections == 0) throw InvalidArgument("inversion.max_rejections must be positive");
}

nlohmann::json InversionConfig::to_json() const {
    return {{"mask", {{"p1", to_string(p1)}, {"p2", to_string(p2)}, {"p3", to_string(p3)}}},
            {"step", step},
            {"max_iter", max_iter},
            {"tikhonov", tikhonov},
            {"tau_dp", tau_dp},
            {"relative_tolerance", relative_tolerance},
            {"model_weight", model_weight},
            {"basis_size", basis_size},
            {"basis_seed", basis_seed},
            {"max_rejections", max_rejections}};
}

nlohmann::json InversionReport::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : history) {
        nlohmann::json row{{"iteration", r.iteration},       {"objective", r.objective},
                           {"misfit", r.misfit},             {"model_residual", r.model_residual},
                           {"step_scale", r.step_scale},     {"params", r.params}};
        if (!r.param_errors.empty()) row["param_errors"] = r.param_errors;
        rows.push_back(std::move(row));
    }
    nlohmann::json out{{"stop_reason", stop_reason},
                       {"delta", delta},
                       {"target_misfit", target_misfit},
                       {"data_norm", data_norm},
                       {"rejections", rejections},
                       {"iterations", rows},
                       {"config", config}};
    if (!history.empty()) out["estimate"] = history.back().params;
    if (!final_errors.empty()) out["relative_errors"] = final_errors;
    return out;
}

namespace {

double mean(const SpaceTimeField& f) {
    double s = 0.0;
    for (double x : f.data()) s += x;
    return s / static_cast<double>(f.data().size());
}

double relative_l2(const SpaceTimeField& a, const SpaceTimeField& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k) {
        num += (a.data()[k] - b.data()[k]) * (a.data()[k] - b.data()[k]);
        den += b.data()[k] * b.data()[k];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

// Relative parameter units: p_k = theta_k * p_k^init (pointwise for fields).
class ParamMap {
public:
    ParamMap(const MaterialParams& init, const InversionConfig& cfg) : init_(init), cfg_(cfg) {
        const std::size_t nf = init.p2.data().size();
        sizes_ = {cfg.p1 == ParamMode::fixed ? std::size_t{0} : std::size_t{1}, block(cfg.p2, nf), block(cfg.p3, nf)};
    }

    std::size_t size() const { return sizes_[0] + sizes_[1] + sizes_[2]; }

    MaterialParams params(const std::vector<double>& th) const {
        MaterialParams f = init_;
        std::size_t o = 0;
        if (sizes_[0]) f.p1 = th[o++] * init_.p1;
        scale(f.p2, init_.p2, th, o, sizes_[1]);
        o += sizes_[1];
        scale(f.p3, init_.p3, th, o, sizes_[2]);
        return f;
    }

    ParamTangent tangent(const std::vector<double>& d) const {
        ParamTangent q = ParamTangent::zero(init_.p2.grid(), init_.p2.time());
        std::size_t o = 0;
        if (sizes_[0]) q.q1 = d[o++] * init_.p1;
        scale(q.q2, init_.p2, d, o, sizes_[1]);
        o += sizes_[1];
        scale(q.q3, init_.p3, d, o, sizes_[2]);
        return q;
    }

    std::vector<double> reduce(const ParamTangent& g) const {
        std::vector<double> out(size(), 0.0);
        std::size_t o = 0;
        if (sizes_[0]) out[o++] = g.q1 * init_.p1;
        gather(out, g.q2, init_.p2, o, sizes_[1]);
        o += sizes_[1];
        gather(out, g.q3, init_.p3, o, sizes_[2]);
        return out;
    }

private:
    static std::size_t block(ParamMode m, std::size_t nf) {
        return m == ParamMode::fixed ? 0 : m == ParamMode::constant ? 1 : nf;
    }
    static void scale(SpaceTimeField& out, const SpaceTimeField& base, const std::vector<double>& th,
                      std::size_t o, std::size_t n) {
        if (n == 0) return;
        for (std::size_t k = 0; k < out.data().size(); ++k) out.data()[k] = th[o + (n == 1 ? 0 : k)] * base.data()[k];
    }
    static void gather(std::vector<double>& out, const SpaceTimeField& g, const SpaceTimeField& base, std::size_t o,
                       std::size_t n) {
        if (n == 0) return;
        for (std::size_t k = 0; k < g.data().size(); ++k) out[o + (n == 1 ? 0 : k)] += g.data()[k] * base.data()[k];
    }

    MaterialParams init_;
    InversionConfig cfg_;
    std::array<std::size_t, 3> sizes_{};
};

// Free state entries: u and theta from level 1 on (level 0 is initial
// data), phi0 at interior nodes of every level; u interior only.
void project_state(StateTangent& s) {
    const std::size_t nn = s.eta.n_nodes();
    for (std::size_t i = 0; i < nn; ++i) {
        s.eta.at(0, i) = 0.0;
        s.kappa.at(0, i) = 0.0;
    }
    for (std::size_t n = 0; n < s.eta.n_levels(); ++n) {
        for (std::size_t i : {std::size_t{0}, nn - 1}) {
            s.eta.at(n, i) = 0.0;
            s.omega.at(n, i) = 0.0;
        }
    }
}

double dot(const StateTangent& a, const StateTangent& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.eta.data().size(); ++k) {
        s += a.eta.data()[k] * b.eta.data()[k] + a.omega.data()[k] * b.omega.data()[k] +
             a.kappa.data()[k] * b.kappa.data()[k];
    }
    return s;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

void axpy(StateTangent& y, double a, const StateTangent& x) {
    for (std::size_t k = 0; k < y.eta.data().size(); ++k) {
        y.eta.data()[k] += a * x.eta.data()[k];
        y.omega.data()[k] += a * x.omega.data()[k];
        y.kappa.data()[k] += a * x.kappa.data()[k];
    }
}

void scale(OperatorImage& img, double s) {
    for (auto* v : {&img.momentum, &img.potential, &img.heat}) {
        for (double& x : *v) x *= s;
    }
}

struct Evaluation {
    OperatorImage model;
    std::vector<double> charge_residual;  ///< C_n - y_n
    double misfit = 0.0;
    double model_residual = 0.0;
    double objective = 0.0;
};

class Problem {
public:
    Problem(const ModelOperator& op, const ObservationTrace& y, const State& l0, const ParamMap& map,
            const InversionConfig& cfg)
        : op_(op), y_(y), l0_(l0), map_(map), cfg_(cfg), weights_(y.time.trapezoid_weights()) {}

    Evaluation evaluate(const std::vector<double>& th, const State& l) const {
        const MaterialParams f = map_.params(th);
        Evaluation ev;
        ev.model = op_.apply(f, l);
        const auto c = observe_bulk_charge(l.u, l.phi0, f, op_.model().lift).values;
        ev.charge_residual.resize(c.size());
        for (std::size_t n = 0; n < c.size(); ++n) ev.charge_residual[n] = c[n] - y_.values[n];
        ev.misfit = trace_norm(y_.time, ev.charge_residual);
        ev.model_residual = ev.model.model_norm2();
        ev.objective = 0.5 * cfg_.model_weight * ev.model_residual * ev.model_residual + 0.5 * ev.misfit * ev.misfit;
        if (cfg_.tikhonov > 0.0) {
            StateTangent d = difference(l);
            ev.objective += 0.5 * cfg_.tikhonov * dot(d, d);
        }
        return ev;
    }

    StateTangent difference(const State& l) const {
        StateTangent d{l.u - l0_.u, l.phi0 - l0_.phi0, l.theta - l0_.theta};
        project_state(d);
        return d;
    }

    struct Gradient {
        std::vector<double> param;
        StateTangent state;
    };

    // Gradients in (theta, l) of the data term 1/2 misfit^2 and of the
    // remaining (model and Tikhonov) part of the objective.
    std::pair<Gradient, Gradient> gradients(const std::vector<double>& th, const State& l,
                                            const Evaluation& ev) const {
        const MaterialParams f = map_.params(th);
        const auto a = weighted(ev.charge_residual);
        Gradient data{map_.reduce(observation_param_adjoint(f, l, a, op_.model().lift)),
                      observation_state_adjoint(f, l, a, op_.model().lift)};
        project_state(data.state);
        OperatorImage r = ev.model;
        scale(r, cfg_.model_weight);
        Gradient rest{map_.reduce(op_.param_adjoint(f, l, r)), op_.state_adjoint(f, l, r)};
        if (cfg_.tikhonov > 0.0) axpy(rest.state, cfg_.tikhonov, difference(l));
        project_state(rest.state);
        return {std::move(data), std::move(rest)};
    }

    // J^T J applied to a state direction (Gauss-Newton normal operator).
    StateTangent state_normal(const std::vector<double>& th, const State& l, const StateTangent& xi) const {
        const MaterialParams f = map_.params(th);
        OperatorImage img = op_.state_derivative(f, l, xi);
        scale(img, cfg_.model_weight);
        const ParamTangent q0 = ParamTangent::zero(xi.eta.grid(), xi.eta.time());
        const auto c = observation_derivatives(f, l, xi, q0, op_.model().lift).state;
        StateTangent out = op_.state_adjoint(f, l, img);
        axpy(out, 1.0, observation_state_adjoint(f, l, weighted(c), op_.model().lift));
        project_state(out);
        return out;
    }

    std::vector<double> param_normal(const std::vector<double>& th, const State& l, const std::vector<double>& d) const {
        const MaterialParams f = map_.params(th);
        const ParamTangent q = map_.tangent(d);
        OperatorImage img = op_.param_derivative(f, l, q);
        scale(img, cfg_.model_weight);
        const StateTangent x0 = StateTangent::zero(l.u.grid(), l.u.time());
        const auto c = observation_derivatives(f, l, x0, q, op_.model().lift).param;
        ParamTangent g = op_.param_adjoint(f, l, img);
        const ParamTangent go = observation_param_adjoint(f, l, weighted(c), op_.model().lift);
        g.q1 += go.q1;
        g.q2 += go.q2;
        g.q3 += go.q3;
        return map_.reduce(g);
    }

private:
    std::vector<double> weighted(const std::vector<double>& c) const {
        std::vector<double> a(c.size());
        for (std::size_t n = 0; n < c.size(); ++n) a[n] = weights_[n] * c[n];
        return a;
    }

    const ModelOperator& op_;
    const ObservationTrace& y_;
    const State& l0_;
    const ParamMap& map_;
    const InversionConfig& cfg_;
    std::vector<double> weights_;
};

constexpr std::size_t kPowerIterations = 12;

double state_norm_estimate(const Problem& p, const std::vector<double>& th, const State& l) {
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> nd;
    StateTangent x = StateTangent::zero(l.u.grid(), l.u.time());
    for (auto* f : {&x.eta, &x.omega, &x.kappa}) {
        for (double& v : f->data()) v = nd(rng);
    }
    project_state(x);
    double lambda = 0.0;
    for (std::size_t it = 0; it < kPowerIterations; ++it) {
        const double nx = std::sqrt(dot(x, x));
        if (nx == 0.0) break;
        x.eta *= 1.0 / nx;
        x.omega *= 1.0 / nx;
        x.kappa *= 1.0 / nx;
        StateTangent y = p.state_normal(th, l, x);
        lambda = dot(x, y);
        x = std::move(y);
    }
    return lambda;
}

double param_norm_estimate(const Problem& p, const std::vector<double>& th, const State& l, std::size_t n) {
    if (n <= 3) {
        // trace of the Gram matrix of the columns
        double tr = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            std::vector<double> e(n, 0.0);
            e[k] = 1.0;
            tr += p.param_normal(th, l, e)[k];
        }
        return tr;
    }
    std::vector<double> x(n, 1.0);
    double lambda = 0.0;
    for (std::size_t it = 0; it < kPowerIterations; ++it) {
        const double nx = std::sqrt(dot(x, x));
        for (double& v : x) v /= nx;
        std::vector<double> y = p.param_normal(th, l, x);
        lambda = dot(x, y);
        x = std::move(y);
    }
    return 1.1 * lambda;
}

bool finite(const Evaluation& ev) { return std::isfinite(ev.objective) && std::isfinite(ev.misfit); }

}  // namespace

InversionReport invert_all_at_once(const ObservationTrace& y_delta, const InitialData& init, const Model& model,
                                   const InversionConfig& cfg, const std::optional<MaterialParams>& truth) {
    cfg.validate();
    model.check();
    if (y_delta.kind != TraceKind::bulk) {
        throw InvalidArgument("invert_all_at_once: only bulk charge data is supported");
    }
    if (!(y_delta.time == model.time) || y_delta.values.size() != model.time.n_levels()) {
        throw DimensionMismatch("invert_all_at_once: data trace does not match the model time grid");
    }
    if (!(y_delta.delta >= 0.0)) throw InvalidArgument("invert_all_at_once: negative noise level");

    const StateTrajectory traj0 = run_forward(init, model, SolverConfig{});
    const State l0 = State::from_trajectory(traj0);
    const ModelOperator op(model, DiscreteTestBasis::random(cfg.basis_size, model.grid.length(),
                                                            model.time.end_time(), cfg.basis_seed));
    const ParamMap map(model.params, cfg);
    const Problem problem(op, y_delta, l0, map, cfg);

    InversionReport report{{}, "", y_delta.delta, 0.0, trace_norm(model.time, y_delta.values), 0, model.params,
                           {}, {}};
    report.config = cfg.to_json();
    report.target_misfit = y_delta.delta > 0.0 ? cfg.tau_dp * y_delta.delta : cfg.relative_tolerance * report.data_norm;

    const auto errors = [&](const MaterialParams& f) {
        std::vector<double> e;
        if (!truth) return e;
        e.push_back(std::abs(f.p1 - truth->p1) / std::abs(truth->p1));
        e.push_back(relative_l2(f.p2, truth->p2));
        e.push_back(relative_l2(f.p3, truth->p3));
        return e;
    };
    const auto record = [&](std::size_t it, const std::vector<double>& th, const Evaluation& ev, double s) {
        const MaterialParams f = map.params(th);
        report.history.push_back(IterationRecord{it, ev.objective, ev.misfit, ev.model_residual, s,
                                                 {f.p1, mean(f.p2), mean(f.p3)}, errors(f)});
        report.estimate = f;
        report.final_errors = report.history.back().param_errors;
    };

    std::vector<double> th(map.size(), 1.0);
    State l = l0;
    Evaluation ev = problem.evaluate(th, l);
    record(0, th, ev, 1.0);
    if (!finite(ev)) throw InversionDiverged("inversion: nonfinite objective at the initial guess", report);

    const double lam_p = param_norm_estimate(problem, th, l, map.size());
    const double lam_s = state_norm_estimate(problem, th, l) + cfg.tikhonov;
    const double omega_p = lam_p > 0.0 ? cfg.step / lam_p : 0.0;
    const double omega_s = lam_s > 0.0 ? cfg.step / lam_s : 0.0;

    double s = 1.0;
    std::size_t consecutive = 0;
    for (std::size_t it = 1;; ++it) {
        if (ev.misfit <= report.target_misfit) {
            report.stop_reason = y_delta.delta > 0.0 ? "discrepancy" : "tolerance";
            break;
        }
        if (it > cfg.max_iter) {
            report.stop_reason = "max_iter";
            break;
        }
        // Descent direction for both the objective and the misfit: the
        // full gradient if it already is one, otherwise the min-norm point
        // of the segment between the two gradients (metric of the step).
        auto [gd, gr] = problem.gradients(th, l, ev);
        std::vector<double> gp(gd.param);
        StateTangent gs = gd.state;
        for (std::size_t k = 0; k < gp.size(); ++k) gp[k] += gr.param[k];
        axpy(gs, 1.0, gr.state);
        const double cross = omega_p * dot(gp, gd.param) + omega_s * dot(gs, gd.state);
        if (cross < 0.0) {
            // g(lambda) = gd + lambda * gr, lambda in [0, 1]
            const double rr = omega_p * dot(gr.param, gr.param) + omega_s * dot(gr.state, gr.state);
            const double dr = omega_p * dot(gd.param, gr.param) + omega_s * dot(gd.state, gr.state);
            const double lambda = rr > 0.0 ? std::clamp(-dr / rr, 0.0, 1.0) : 0.0;
            for (std::size_t k = 0; k < gp.size(); ++k) gp[k] = gd.param[k] + lambda * gr.param[k];
            gs = gd.state;
            axpy(gs, lambda, gr.state);
        }
        while (true) {
            std::vector<double> th_new(th);
            for (std::size_t k = 0; k < th.size(); ++k) th_new[k] -= s * omega_p * gp[k];
            State l_new = l;
            l_new.u -= (s * omega_s) * gs.eta;
            l_new.phi0 -= (s * omega_s) * gs.omega;
            l_new.theta -= (s * omega_s) * gs.kappa;
            Evaluation trial = problem.evaluate(th_new, l_new);
            if (!finite(trial)) {
                throw InversionDiverged("inversion: nonfinite objective at iteration " + std::to_string(it), report);
            }
            if (trial.objective <= ev.objective && trial.misfit <= ev.misfit) {
                th = std::move(th_new);
                l = std::move(l_new);
                ev = std::move(trial);
                record(it, th, ev, s);
                consecutive = 0;
                s = std::min(1.0, 2.0 * s);
                break;
            }
            ++report.rejections;
            if (++consecutive >= cfg.max_rejections) {
                report.stop_reason = "diverged";
                throw InversionDiverged("inversion: " + std::to_string(consecutive) +
                                            " consecutive rejected steps at iteration " + std::to_string(it),
                                        report);
            }
            s *= 0.5;
        }
    }
    return report;
}

}  // namespace piezotherm
