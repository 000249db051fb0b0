#include "piezotherm/model_operator.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "piezotherm/errors.hpp"

namespace piezotherm {

DiscreteTestBasis DiscreteTestBasis::random(std::size_t m, double length, double end_time, std::uint64_t seed) {
    return DiscreteTestBasis{TestFunctionFamily::random(m, length, end_time, seed),
                             TestFunctionFamily::random(m, length, end_time, seed + 0x9e3779b97f4a7c15ULL),
                             TestFunctionFamily::random(m, length, end_time, seed + 0x3c6ef372fe94f82aULL)};
}

State State::from_trajectory(const StateTrajectory& traj) {
    return State{traj.u, traj.phi0, traj.theta, traj.initial.u1};
}

StateTangent StateTangent::zero(const SpatialGrid& grid, const TimeGrid& time) {
    return StateTangent{SpaceTimeField(grid, time), SpaceTimeField(grid, time), SpaceTimeField(grid, time)};
}

ParamTangent ParamTangent::zero(const SpatialGrid& grid, const TimeGrid& time) {
    return ParamTangent{0.0, SpaceTimeField(grid, time), SpaceTimeField(grid, time)};
}

std::vector<double> OperatorImage::model_block() const {
    std::vector<double> out(momentum);
    out.insert(out.end(), potential.begin(), potential.end());
    out.insert(out.end(), heat.begin(), heat.end());
    return out;
}

double OperatorImage::model_norm_inf() const {
    double m = 0.0;
    for (double x : model_block()) m = std::max(m, std::abs(x));
    return m;
}

double OperatorImage::norm_inf() const {
    double m = model_norm_inf();
    for (double x : observation) m = std::max(m, std::abs(x));
    return m;
}

double OperatorImage::model_norm2() const {
    double s = 0.0;
    for (double x : model_block()) s += x * x;
    return std::sqrt(s);
}

namespace {

void axpy_into(std::vector<double>& a, const std::vector<double>& b, double s) {
    if (a.size() != b.size()) throw DimensionMismatch("OperatorImage: block sizes differ");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
}

}  // namespace

OperatorImage& OperatorImage::operator-=(const OperatorImage& o) {
    axpy_into(momentum, o.momentum, -1.0);
    axpy_into(potential, o.potential, -1.0);
    axpy_into(heat, o.heat, -1.0);
    axpy_into(observation, o.observation, -1.0);
    return *this;
}

OperatorImage& OperatorImage::operator+=(const OperatorImage& o) {
    axpy_into(momentum, o.momentum, 1.0);
    axpy_into(potential, o.potential, 1.0);
    axpy_into(heat, o.heat, 1.0);
    axpy_into(observation, o.observation, 1.0);
    return *this;
}

namespace {

// Value and first derivatives of a bilinear field at a point of a cell.
struct Jet {
    double v = 0.0, z = 0.0, t = 0.0, zt = 0.0;
};

struct Cell {
    std::size_t n, e;
    double xi, eta, dz, dt;
};

Jet jet(const SpaceTimeField& f, const Cell& c) {
    const double a0 = f.at(c.n, c.e), a1 = f.at(c.n, c.e + 1);
    const double b0 = f.at(c.n + 1, c.e), b1 = f.at(c.n + 1, c.e + 1);
    Jet j;
    j.v = (1.0 - c.eta) * ((1.0 - c.xi) * a0 + c.xi * a1) + c.eta * ((1.0 - c.xi) * b0 + c.xi * b1);
    j.z = ((1.0 - c.eta) * (a1 - a0) + c.eta * (b1 - b0)) / c.dz;
    j.t = ((1.0 - c.xi) * (b0 - a0) + c.xi * (b1 - a1)) / c.dt;
    j.zt = (b1 - b0 - a1 + a0) / (c.dz * c.dt);
    return j;
}

// Adjoint of jet(): adds the nodal sensitivities of a point functional.
void scatter(SpaceTimeField& g, const Cell& c, const Jet& d) {
    const double xi = c.xi, eta = c.eta, dz = c.dz, dt = c.dt;
    const double m = d.zt / (dz * dt);
    g.at(c.n, c.e) += d.v * (1.0 - xi) * (1.0 - eta) - d.z * (1.0 - eta) / dz - d.t * (1.0 - xi) / dt + m;
    g.at(c.n, c.e + 1) += d.v * xi * (1.0 - eta) + d.z * (1.0 - eta) / dz - d.t * xi / dt - m;
    g.at(c.n + 1, c.e) += d.v * (1.0 - xi) * eta - d.z * eta / dz + d.t * (1.0 - xi) / dt - m;
    g.at(c.n + 1, c.e + 1) += d.v * xi * eta + d.z * eta / dz + d.t * xi / dt + m;
}

// Integrand coefficients at every quadrature point. The pairing with a
// test triple (mu, w, nu) is
//   sum_k wgt_k (mu_t c[0] + mu c[1] + mu_z c[2] + w_z c[3] + nu c[4] + nu_z c[5]).
struct PointCoefficients {
    std::array<std::vector<double>, 6> c;
    explicit PointCoefficients(std::size_t np) {
        for (auto& v : c) v.assign(np, 0.0);
    }
};

void require_lattice(const Model& m, const SpaceTimeField& f, const char* what) {
    if (!(f.grid() == m.grid) || !(f.time() == m.time)) {
        throw DimensionMismatch(std::string(what) + ": field not on the model lattice");
    }
}

void check_state(const Model& m, const State& l) {
    require_lattice(m, l.u, "state u");
    require_lattice(m, l.phi0, "state phi0");
    require_lattice(m, l.theta, "state theta");
    if (!(l.u1.grid() == m.grid)) throw DimensionMismatch("state u1: wrong grid");
}

void check_params(const Model& m, const MaterialParams& f) {
    require_lattice(m, f.p2, "parameter p2");
    require_lattice(m, f.p3, "parameter p3");
}

template <typename F>
void for_each_point(const Model& m, F&& body) {
    const std::size_t ne = m.grid.n_elem();
    const double dz = m.grid.dz();
    const double dt = m.time.dt();
    for (std::size_t n = 0; n < m.time.n_step(); ++n) {
        for (std::size_t e = 0; e < ne; ++e) {
            for (std::size_t r = 0; r < 2; ++r) {
                for (std::size_t q = 0; q < 2; ++q) {
                    const std::size_t k = ((n * ne + e) * 2 + r) * 2 + q;
                    const double w = GaussRule::weights[q] * GaussRule::weights[r] * dz * dt;
                    body(k, w, Cell{n, e, GaussRule::points[q], GaussRule::points[r], dz, dt});
                }
            }
        }
    }
}

SpaceTimeField nodal_map(const SpaceTimeField& theta, const std::function<double(double)>& g) {
    SpaceTimeField out(theta.grid(), theta.time());
    for (std::size_t k = 0; k < out.data().size(); ++k) out.data()[k] = g(theta.data()[k]);
    return out;
}

}  // namespace

struct ModelOperator::Tables {
    static OperatorImage project(const ModelOperator& op, const PointCoefficients& pc) {
        const Model& m = op.model_;
        const std::size_t ne = m.grid.n_elem();
        const std::size_t ns = m.time.n_step();
        const std::size_t nb = op.basis_.size();
        OperatorImage img{std::vector<double>(nb, 0.0), std::vector<double>(nb, 0.0), std::vector<double>(nb, 0.0),
                          {}};
        const double dz = m.grid.dz();
        const double dt = m.time.dt();
        for (std::size_t i = 0; i < nb; ++i) {
            const TestTables& mu = op.mu_[i];
            const TestTables& w = op.w_[i];
            const TestTables& nu = op.nu_[i];
            double sm = 0.0, sw = 0.0, sn = 0.0;
            for (std::size_t n = 0; n < ns; ++n) {
                for (std::size_t r = 0; r < 2; ++r) {
                    const std::size_t tr = 2 * n + r;
                    const double wr = GaussRule::weights[r] * dt;
                    double am = 0.0, aw = 0.0, an = 0.0;
                    for (std::size_t e = 0; e < ne; ++e) {
                        for (std::size_t q = 0; q < 2; ++q) {
                            const std::size_t k = ((n * ne + e) * 2 + r) * 2 + q;
                            const std::size_t sq = 2 * e + q;
                            const double wq = GaussRule::weights[q] * dz;
                            am += wq * (pc.c[0][k] * mu.s[sq] * mu.dw[tr] +
                                        (pc.c[1][k] * mu.s[sq] + pc.c[2][k] * mu.ds[sq]) * mu.w[tr]);
                            aw += wq * pc.c[3][k] * w.ds[sq] * w.w[tr];
                            an += wq * (pc.c[4][k] * nu.s[sq] + pc.c[5][k] * nu.ds[sq]) * nu.w[tr];
                        }
                    }
                    sm += wr * am;
                    sw += wr * aw;
                    sn += wr * an;
                }
            }
            img.momentum[i] = sm;
            img.potential[i] = sw;
            img.heat[i] = sn;
        }
        return img;
    }

    // Combined test weights R at every point for a given residual r.
    static PointCoefficients combine(const ModelOperator& op, const OperatorImage& r) {
        const Model& m = op.model_;
        const std::size_t ne = m.grid.n_elem();
        const std::size_t ns = m.time.n_step();
        const std::size_t nb = op.basis_.size();
        if (r.momentum.size() != nb || r.potential.size() != nb || r.heat.size() != nb) {
            throw DimensionMismatch("ModelOperator: residual does not match the basis size");
        }
        PointCoefficients R(ns * ne * 4);
        for (std::size_t i = 0; i < nb; ++i) {
            const TestTables& mu = op.mu_[i];
            const TestTables& w = op.w_[i];
            const TestTables& nu = op.nu_[i];
            const double rm = r.momentum[i], rw = r.potential[i], rn = r.heat[i];
            for (std::size_t n = 0; n < ns; ++n) {
                for (std::size_t rr = 0; rr < 2; ++rr) {
                    const std::size_t tr = 2 * n + rr;
                    for (std::size_t e = 0; e < ne; ++e) {
                        for (std::size_t q = 0; q < 2; ++q) {
                            const std::size_t k = ((n * ne + e) * 2 + rr) * 2 + q;
                            const std::size_t sq = 2 * e + q;
                            R.c[0][k] += rm * mu.s[sq] * mu.dw[tr];
                            R.c[1][k] += rm * mu.s[sq] * mu.w[tr];
                            R.c[2][k] += rm * mu.ds[sq] * mu.w[tr];
                            R.c[3][k] += rw * w.ds[sq] * w.w[tr];
                            R.c[4][k] += rn * nu.s[sq] * nu.w[tr];
                            R.c[5][k] += rn * nu.ds[sq] * nu.w[tr];
                        }
                    }
                }
            }
        }
        return R;
    }
};

ModelOperator::ModelOperator(const Model& model, DiscreteTestBasis basis) : model_(model), basis_(std::move(basis)) {
    model_.check();
    if (basis_.potential.size() != basis_.size() || basis_.heat.size() != basis_.size()) {
        throw DimensionMismatch("DiscreteTestBasis: the three families must have equal size");
    }
    for (const auto* fam : {&basis_.momentum, &basis_.potential, &basis_.heat}) {
        fam->check_support(model_.grid, model_.time);
    }
    for (std::size_t i = 0; i < basis_.size(); ++i) {
        mu_.push_back(basis_.momentum.tabulate(i, SpatialShape::sine, model_.grid, model_.time));
        w_.push_back(basis_.potential.tabulate(i, SpatialShape::sine, model_.grid, model_.time));
        nu_.push_back(basis_.heat.tabulate(i, SpatialShape::cosine, model_.grid, model_.time));
    }
}

OperatorImage ModelOperator::apply(const MaterialParams& f, const State& l) const {
    check_state(model_, l);
    check_params(model_, f);
    const auto& co = model_.coeffs;
    const double beta = co.beta;
    const double p1 = f.p1;
    const auto gamma = nodal_map(l.theta, [&co, p1](double th) { return co.tau(th) * p1; });
    const auto b = co.b();
    PointCoefficients pc(model_.time.n_step() * model_.grid.n_elem() * 4);
    for_each_point(model_, [&](std::size_t k, double, const Cell& c) {
        const Jet u = jet(l.u, c), ph = jet(l.phi0, c), th = jet(l.theta, c);
        const Jet rho = jet(co.rho, c), chi = jet(model_.lift.chi, c);
        const double p2 = jet(f.p2, c).v, p3 = jet(f.p3, c).v;
        const double g = jet(gamma, c).v;
        const double phz = ph.z + chi.z;
        pc.c[0][k] = -rho.v * u.t;
        pc.c[1][k] = -rho.t * u.t;
        pc.c[2][k] = p1 * u.z + g * u.zt + p2 * phz - beta * th.v;
        pc.c[3][k] = p2 * u.z - p3 * phz;
        pc.c[4][k] = jet(b, c).v * th.t - g * u.zt * u.zt + beta * u.zt * th.v;
        pc.c[5][k] = jet(co.k, c).v * th.z;
    });
    OperatorImage img = Tables::project(*this, pc);

    // initial velocity term: - int rho(0) u1 mu(0)
    const SpatialGrid& grid = model_.grid;
    const auto rho0 = co.rho.level(0);
    const auto u1 = l.u1.values();
    for (std::size_t i = 0; i < basis_.size(); ++i) {
        double s = 0.0;
        for (std::size_t e = 0; e < grid.n_elem(); ++e) {
            for (std::size_t q = 0; q < 2; ++q) {
                const double xi = GaussRule::points[q];
                s += GaussRule::weights[q] * grid.dz() * interpolate(rho0, e, xi) * interpolate(u1, e, xi) *
                     mu_[i].s[2 * e + q];
            }
        }
        img.momentum[i] -= s * mu_[i].w0;
    }
    return img;
}

OperatorImage ModelOperator::state_derivative(const MaterialParams& f, const State& l, const StateTangent& xi) const {
    check_state(model_, l);
    check_params(model_, f);
    require_lattice(model_, xi.eta, "tangent eta");
    require_lattice(model_, xi.omega, "tangent omega");
    require_lattice(model_, xi.kappa, "tangent kappa");
    const auto& co = model_.coeffs;
    const double beta = co.beta;
    const double p1 = f.p1;
    const auto gamma = nodal_map(l.theta, [&co, p1](double th) { return co.tau(th) * p1; });
    SpaceTimeField dgamma = nodal_map(l.theta, [&co, p1](double th) { return co.tau.derivative(th) * p1; });
    for (std::size_t k = 0; k < dgamma.data().size(); ++k) dgamma.data()[k] *= xi.kappa.data()[k];
    const auto b = co.b();
    PointCoefficients pc(model_.time.n_step() * model_.grid.n_elem() * 4);
    for_each_point(model_, [&](std::size_t k, double, const Cell& c) {
        const Jet u = jet(l.u, c), th = jet(l.theta, c);
        const Jet eta = jet(xi.eta, c), om = jet(xi.omega, c), ka = jet(xi.kappa, c);
        const Jet rho = jet(co.rho, c);
        const double p2 = jet(f.p2, c).v, p3 = jet(f.p3, c).v;
        const double g = jet(gamma, c).v;
        const double dg = jet(dgamma, c).v;
        pc.c[0][k] = -rho.v * eta.t;
        pc.c[1][k] = -rho.t * eta.t;
        pc.c[2][k] = p1 * eta.z + g * eta.zt + dg * u.zt + p2 * om.z - beta * ka.v;
        pc.c[3][k] = p2 * eta.z - p3 * om.z;
        pc.c[4][k] = jet(b, c).v * ka.t - 2.0 * g * u.zt * eta.zt - dg * u.zt * u.zt +
                     beta * (eta.zt * th.v + u.zt * ka.v);
        pc.c[5][k] = jet(co.k, c).v * ka.z;
    });
    return Tables::project(*this, pc);
}

OperatorImage ModelOperator::param_derivative(const MaterialParams& f, const State& l, const ParamTangent& q) const {
    check_state(model_, l);
    check_params(model_, f);
    require_lattice(model_, q.q2, "tangent q2");
    require_lattice(model_, q.q3, "tangent q3");
    const auto& co = model_.coeffs;
    const auto tau = nodal_map(l.theta, [&co](double th) { return co.tau(th); });
    PointCoefficients pc(model_.time.n_step() * model_.grid.n_elem() * 4);
    for_each_point(model_, [&](std::size_t k, double, const Cell& c) {
        const Jet u = jet(l.u, c), ph = jet(l.phi0, c), chi = jet(model_.lift.chi, c);
        const double q2 = jet(q.q2, c).v, q3 = jet(q.q3, c).v;
        const double t = jet(tau, c).v;
        const double phz = ph.z + chi.z;
        pc.c[2][k] = q.q1 * u.z + t * q.q1 * u.zt + q2 * phz;
        pc.c[3][k] = q2 * u.z - q3 * phz;
        pc.c[4][k] = -t * q.q1 * u.zt * u.zt;
    });
    return Tables::project(*this, pc);
}

StateTangent ModelOperator::state_adjoint(const MaterialParams& f, const State& l, const OperatorImage& r) const {
    check_state(model_, l);
    check_params(model_, f);
    const auto& co = model_.coeffs;
    const double beta = co.beta;
    const double p1 = f.p1;
    const auto gamma = nodal_map(l.theta, [&co, p1](double th) { return co.tau(th) * p1; });
    const auto b = co.b();
    const PointCoefficients R = Tables::combine(*this, r);
    StateTangent g = StateTangent::zero(model_.grid, model_.time);
    SpaceTimeField g_gamma(model_.grid, model_.time);
    for_each_point(model_, [&](std::size_t k, double w, const Cell& c) {
        const Jet u = jet(l.u, c), th = jet(l.theta, c);
        const Jet rho = jet(co.rho, c);
        const double p2 = jet(f.p2, c).v, p3 = jet(f.p3, c).v;
        const double gm = jet(gamma, c).v;
        const double Rmt = R.c[0][k], Rm = R.c[1][k], Rmz = R.c[2][k], Rwz = R.c[3][k], Rn = R.c[4][k],
                     Rnz = R.c[5][k];
        Jet du;
        du.t = w * (-rho.v * Rmt - rho.t * Rm);
        du.z = w * (p1 * Rmz + p2 * Rwz);
        du.zt = w * (gm * Rmz - 2.0 * gm * u.zt * Rn + beta * th.v * Rn);
        scatter(g.eta, c, du);
        Jet dp;
        dp.z = w * (p2 * Rmz - p3 * Rwz);
        scatter(g.omega, c, dp);
        Jet dth;
        dth.v = w * (-beta * Rmz + beta * u.zt * Rn);
        dth.z = w * jet(co.k, c).v * Rnz;
        dth.t = w * jet(b, c).v * Rn;
        scatter(g.kappa, c, dth);
        Jet dg;
        dg.v = w * (u.zt * Rmz - u.zt * u.zt * Rn);
        scatter(g_gamma, c, dg);
    });
    if (!co.tau.is_constant()) {
        for (std::size_t k = 0; k < g_gamma.data().size(); ++k) {
            g.kappa.data()[k] += g_gamma.data()[k] * co.tau.derivative(l.theta.data()[k]) * p1;
        }
    }
    return g;
}

ParamTangent ModelOperator::param_adjoint(const MaterialParams& f, const State& l, const OperatorImage& r) const {
    check_state(model_, l);
    check_params(model_, f);
    const auto& co = model_.coeffs;
    const auto tau = nodal_map(l.theta, [&co](double th) { return co.tau(th); });
    const PointCoefficients R = Tables::combine(*this, r);
    ParamTangent g = ParamTangent::zero(model_.grid, model_.time);
    for_each_point(model_, [&](std::size_t k, double w, const Cell& c) {
        const Jet u = jet(l.u, c), ph = jet(l.phi0, c), chi = jet(model_.lift.chi, c);
        const double t = jet(tau, c).v;
        const double phz = ph.z + chi.z;
        const double Rmz = R.c[2][k], Rwz = R.c[3][k], Rn = R.c[4][k];
        g.q1 += w * (u.z * Rmz + t * (u.zt * Rmz - u.zt * u.zt * Rn));
        Jet d2;
        d2.v = w * (phz * Rmz + u.z * Rwz);
        scatter(g.q2, c, d2);
        Jet d3;
        d3.v = -w * phz * Rwz;
        scatter(g.q3, c, d3);
    });
    return g;
}

OperatorImage apply_model_operator(const Model& model, const MaterialParams& f, const State& l,
                                   const DiscreteTestBasis& basis) {
    return ModelOperator(model, basis).apply(f, l);
}

OperatorImage apply_forward_operator(const Model& model, const MaterialParams& f, const State& l,
                                     const DiscreteTestBasis& basis, TraceKind kind, double gamma) {
    ObservationTrace obs = kind == TraceKind::window
                               ? observe_window_charge(l.u, l.phi0, f, model.lift, gamma)
                               : observe_bulk_charge(l.u, l.phi0, f, model.lift);
    if (kind == TraceKind::boundary) {
        throw InvalidArgument("apply_forward_operator: observation kind must be bulk or window");
    }
    OperatorImage img = apply_model_operator(model, f, l, basis);
    img.observation = std::move(obs.values);
    return img;
}

OperatorImage frechet_state(const Model& model, const MaterialParams& f, const State& l, const StateTangent& xi,
                            const DiscreteTestBasis& basis) {
    return ModelOperator(model, basis).state_derivative(f, l, xi);
}

OperatorImage frechet_param(const Model& model, const MaterialParams& f, const State& l, const ParamTangent& q,
                            const DiscreteTestBasis& basis) {
    return ModelOperator(model, basis).param_derivative(f, l, q);
}

OperatorImage state_taylor_remainder(const Model& model, const MaterialParams& f, const State& l,
                                     const StateTangent& xi, const DiscreteTestBasis& basis) {
    model.check();
    basis.heat.check_support(model.grid, model.time);
    const auto& co = model.coeffs;
    const double p1 = f.p1;
    const auto gamma = nodal_map(l.theta, [&co, p1](double th) { return co.tau(th) * p1; });
    PointCoefficients pc(model.time.n_step() * model.grid.n_elem() * 4);
    for_each_point(model, [&](std::size_t k, double, const Cell& c) {
        const Jet eta = jet(xi.eta, c), ka = jet(xi.kappa, c);
        pc.c[4][k] = co.beta * eta.zt * ka.v - jet(gamma, c).v * eta.zt * eta.zt;
    });
    OperatorImage img{std::vector<double>(basis.size(), 0.0), std::vector<double>(basis.size(), 0.0),
                      std::vector<double>(basis.size(), 0.0), {}};
    // heat block only: sum_k w nu c4
    const std::size_t ne = model.grid.n_elem();
    const double dz = model.grid.dz(), dt = model.time.dt();
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const TestTables nu = basis.heat.tabulate(i, SpatialShape::cosine, model.grid, model.time);
        double s = 0.0;
        for (std::size_t n = 0; n < model.time.n_step(); ++n) {
            for (std::size_t r = 0; r < 2; ++r) {
                for (std::size_t e = 0; e < ne; ++e) {
                    for (std::size_t q = 0; q < 2; ++q) {
                        const std::size_t k = ((n * ne + e) * 2 + r) * 2 + q;
                        s += GaussRule::weights[q] * GaussRule::weights[r] * dz * dt * pc.c[4][k] *
                             nu.s[2 * e + q] * nu.w[2 * n + r];
                    }
                }
            }
        }
        img.heat[i] = s;
    }
    return img;
}

ObservationDerivatives observation_derivatives(const MaterialParams& f, const State& l, const StateTangent& xi,
                                               const ParamTangent& q, const ExcitationLift& lift) {
    require_same_lattice(l.u, lift.chi, "observation_derivatives");
    if (!(lift.phi_e_norm > 0.0)) throw InvalidArgument("observation_derivatives: zero excitation norm");
    const SpatialGrid& grid = l.u.grid();
    const double dz = grid.dz();
    const std::size_t nl = l.u.n_levels();
    ObservationDerivatives out{std::vector<double>(nl, 0.0), std::vector<double>(nl, 0.0)};
    for (std::size_t n = 0; n < nl; ++n) {
        double ds = 0.0, dp = 0.0;
        for (std::size_t e = 0; e < grid.n_elem(); ++e) {
            const auto grad = [&](const SpaceTimeField& g) { return (g.at(n, e + 1) - g.at(n, e)) / dz; };
            const double uz = grad(l.u);
            const double phz = grad(l.phi0) + grad(lift.chi);
            const double ez = grad(xi.eta);
            const double oz = grad(xi.omega);
            for (std::size_t k = 0; k < 2; ++k) {
                const double x = GaussRule::points[k];
                const double w = GaussRule::weights[k] * dz;
                const double p2 = interpolate(f.p2.level(n), e, x);
                const double p3 = interpolate(f.p3.level(n), e, x);
                const double q2 = interpolate(q.q2.level(n), e, x);
                const double q3 = interpolate(q.q3.level(n), e, x);
                ds += w * (p2 * ez * phz + p2 * uz * oz - 2.0 * p3 * phz * oz);
                dp += w * (q2 * uz * phz - q3 * phz * phz);
            }
        }
        out.state[n] = ds / lift.phi_e_norm;
        out.param[n] = dp / lift.phi_e_norm;
    }
    return out;
}

StateTangent observation_state_adjoint(const MaterialParams& f, const State& l, std::span<const double> a,
                                       const ExcitationLift& lift) {
    const SpatialGrid& grid = l.u.grid();
    const TimeGrid& time = l.u.time();
    if (a.size() != time.n_levels()) throw DimensionMismatch("observation_state_adjoint: weight length");
    const double dz = grid.dz();
    StateTangent g = StateTangent::zero(grid, time);
    for (std::size_t n = 0; n < time.n_levels(); ++n) {
        const double s = a[n] / lift.phi_e_norm;
        if (s == 0.0) continue;
        for (std::size_t e = 0; e < grid.n_elem(); ++e) {
            const double uz = (l.u.at(n, e + 1) - l.u.at(n, e)) / dz;
            const double phz = (l.phi0.at(n, e + 1) - l.phi0.at(n, e) + lift.chi.at(n, e + 1) - lift.chi.at(n, e)) / dz;
            double gu = 0.0, gp = 0.0;
            for (std::size_t k = 0; k < 2; ++k) {
                const double x = GaussRule::points[k];
                const double w = GaussRule::weights[k] * dz;
                const double p2 = interpolate(f.p2.level(n), e, x);
                const double p3 = interpolate(f.p3.level(n), e, x);
                gu += w * p2 * phz;
                gp += w * (p2 * uz - 2.0 * p3 * phz);
            }
            g.eta.at(n, e + 1) += s * gu / dz;
            g.eta.at(n, e) -= s * gu / dz;
            g.omega.at(n, e + 1) += s * gp / dz;
            g.omega.at(n, e) -= s * gp / dz;
        }
    }
    return g;
}

ParamTangent observation_param_adjoint(const MaterialParams& f, const State& l, std::span<const double> a,
                                       const ExcitationLift& lift) {
    (void)f;
    const SpatialGrid& grid = l.u.grid();
    const TimeGrid& time = l.u.time();
    if (a.size() != time.n_levels()) throw DimensionMismatch("observation_param_adjoint: weight length");
    const double dz = grid.dz();
    ParamTangent g = ParamTangent::zero(grid, time);
    for (std::size_t n = 0; n < time.n_levels(); ++n) {
        const double s = a[n] / lift.phi_e_norm;
        if (s == 0.0) continue;
        for (std::size_t e = 0; e < grid.n_elem(); ++e) {
            const double uz = (l.u.at(n, e + 1) - l.u.at(n, e)) / dz;
            const double phz = (l.phi0.at(n, e + 1) - l.phi0.at(n, e) + lift.chi.at(n, e + 1) - lift.chi.at(n, e)) / dz;
            for (std::size_t k = 0; k < 2; ++k) {
                const double x = GaussRule::points[k];
                const double w = GaussRule::weights[k] * dz * s;
                g.q2.at(n, e) += w * (1.0 - x) * uz * phz;
                g.q2.at(n, e + 1) += w * x * uz * phz;
                g.q3.at(n, e) -= w * (1.0 - x) * phz * phz;
                g.q3.at(n, e + 1) -= w * x * phz * phz;
            }
        }
    }
    return g;
}

}  // namespace piezotherm
