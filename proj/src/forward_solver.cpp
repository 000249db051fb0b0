#include "piezotherm/forward_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "piezotherm/errors.hpp"

namespace piezotherm {

InitialData InitialData::zero(const SpatialGrid& grid) {
    return InitialData{NodalField(grid), NodalField(grid), NodalField(grid)};
}

void InitialData::validate() const {
    if (!(u0.grid() == u1.grid()) || !(u0.grid() == theta0.grid())) {
        throw DimensionMismatch("InitialData: fields live on different grids");
    }
    const std::size_t last = u0.size() - 1;
    if (u0[0] != 0.0 || u0[last] != 0.0) {
        throw InvalidArgument("InitialData: u0 must vanish at both boundary nodes");
    }
    for (std::size_t i = 0; i < theta0.size(); ++i) {
        if (theta0[i] < 0.0) {
            throw InvalidArgument("InitialData: theta0 is negative at node " + std::to_string(i));
        }
    }
}

void Model::check() const {
    const auto same = [this](const SpaceTimeField& f, const char* name) {
        if (!(f.grid() == grid) || !(f.time() == time)) {
            throw DimensionMismatch(std::string("Model: ") + name + " is not sampled on the model lattice");
        }
    };
    same(coeffs.rho, "rho");
    same(coeffs.c_th, "c_th");
    same(coeffs.k, "k");
    same(params.p2, "p2");
    same(params.p3, "p3");
    same(lift.chi, "chi");
    if (lift.phi_e.size() != time.n_levels()) {
        throw DimensionMismatch("Model: excitation length does not match the time grid");
    }
}

StepState StateTrajectory::state(std::size_t level) const {
    const auto copy = [level](const SpaceTimeField& f) {
        const auto s = f.level(level);
        return std::vector<double>(s.begin(), s.end());
    };
    return StepState{copy(u), copy(v), copy(theta), copy(phi0)};
}

std::vector<double> solve_potential(const SpatialGrid& grid, std::span<const double> p2,
                                    std::span<const double> p3, std::span<const double> chi,
                                    std::span<const double> u) {
    require_nodal(grid, p2, "solve_potential(p2)");
    require_nodal(grid, p3, "solve_potential(p3)");
    require_nodal(grid, chi, "solve_potential(chi)");
    require_nodal(grid, u, "solve_potential(u)");
    for (std::size_t i = 0; i < p3.size(); ++i) {
        if (!(p3[i] > 0.0)) {
            throw SingularPivot(i, "solve_potential: p3 is not positive at node " + std::to_string(i));
        }
    }
    auto k = assemble_weighted_stiffness(grid, p3);
    auto rhs = gradient_load(grid, p2, u);
    const auto lift = gradient_load(grid, p3, chi);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= lift[i];
    const std::size_t last = grid.n_elem();
    k.set_identity_row(0);
    k.set_identity_row(last);
    rhs[0] = 0.0;
    rhs[last] = 0.0;
    return solve_tridiagonal(k, rhs);
}

std::vector<double> solve_potential(const Model& model, std::size_t level, std::span<const double> u) {
    return solve_potential(model.grid, model.params.p2.level(level), model.params.p3.level(level),
                           model.lift.chi.level(level), u);
}

namespace {

std::vector<double> stiffness_at(const MaterialParams& f, std::size_t level) {
    const auto p2 = f.p2.level(level);
    const auto p3 = f.p3.level(level);
    std::vector<double> p(p2.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = effective_stiffness(f.p1, p2[i], p3[i]);
    return p;
}

// b_i = int theta psi_i' over the grid.
std::vector<double> temperature_load(const SpatialGrid& grid, std::span<const double> theta) {
    std::vector<double> g(grid.n_nodes(), 0.0);
    for (std::size_t e = 0; e < grid.n_elem(); ++e) {
        const double avg = 0.5 * (theta[e] + theta[e + 1]);
        g[e] -= avg;
        g[e + 1] += avg;
    }
    return g;
}

void require_finite(std::span<const double> x, std::size_t step, const char* what) {
    for (double v : x) {
        if (!std::isfinite(v)) {
            throw SolverFailure(step, std::string("nonfinite ") + what + " after step " + std::to_string(step));
        }
    }
}

StepState advance(const StepState& s, const Model& m, double eps, std::size_t n) {
    const SpatialGrid& grid = m.grid;
    const std::size_t nn = grid.n_nodes();
    const std::size_t last = grid.n_elem();
    const double dt = m.time.dt();
    const double dz = grid.dz();
    const std::size_t n1 = n + 1;

    const auto rho = m.coeffs.rho.level(n1);
    const auto p = stiffness_at(m.params, n1);
    std::vector<double> gamma(nn);
    for (std::size_t i = 0; i < nn; ++i) gamma[i] = m.coeffs.tau(std::max(s.theta[i], 0.0)) * m.params.p1;

    const auto m_rho = assemble_weighted_mass(grid, rho);
    const auto k_gamma = assemble_weighted_stiffness(grid, gamma);
    const auto k_p = assemble_weighted_stiffness(grid, p);

    // (i) velocity
    TridiagonalMatrix a = m_rho;
    a *= 1.0 / dt;
    a += k_gamma;
    {
        TridiagonalMatrix kp = k_p;
        kp *= dt;
        a += kp;
    }
    std::vector<double> r = m_rho.apply(s.v);
    const auto kpu = k_p.apply(s.u);
    const auto g = temperature_load(grid, s.theta);
    for (std::size_t i = 0; i < nn; ++i) r[i] = r[i] / dt - kpu[i] + m.coeffs.beta * g[i];
    r[0] = 0.0;
    r[last] = 0.0;

    const std::vector<double> ones(nn, 1.0);
    StepState out;
    try {
        if (eps > 0.0) {
            // Mixed form with w = v_zz:  A v - eps K w = r,  K v + M w = 0.
            const auto k1 = assemble_weighted_stiffness(grid, ones);
            const auto m1 = assemble_weighted_mass(grid, ones);
            BlockTridiagonal blk(nn);
            std::vector<double> rhs(2 * nn, 0.0);
            for (std::size_t i = 1; i < last; ++i) {
                blk.sub[i] = {a.sub[i], -eps * k1.sub[i], k1.sub[i], m1.sub[i]};
                blk.main[i] = {a.main[i], -eps * k1.main[i], k1.main[i], m1.main[i]};
                blk.super[i] = {a.super[i], -eps * k1.super[i], k1.super[i], m1.super[i]};
                rhs[2 * i] = r[i];
            }
            blk.main[0] = {1.0, 0.0, 0.0, 1.0};
            blk.main[last] = {1.0, 0.0, 0.0, 1.0};
            const auto x = solve_block_tridiagonal(blk, rhs);
            out.v.resize(nn);
            for (std::size_t i = 0; i < nn; ++i) out.v[i] = x[2 * i];

            // (ii) displacement: (M/dt + eps K) u = M (u^n/dt + v)
            TridiagonalMatrix b = m1;
            b *= 1.0 / dt;
            TridiagonalMatrix ek = k1;
            ek *= eps;
            b += ek;
            std::vector<double> src(nn);
            for (std::size_t i = 0; i < nn; ++i) src[i] = s.u[i] / dt + out.v[i];
            auto ru = m1.apply(src);
            b.set_identity_row(0);
            b.set_identity_row(last);
            ru[0] = 0.0;
            ru[last] = 0.0;
            out.u = solve_tridiagonal(b, ru);
        } else {
            a.set_identity_row(0);
            a.set_identity_row(last);
            out.v = solve_tridiagonal(a, r);
            out.u.resize(nn);
            for (std::size_t i = 0; i < nn; ++i) out.u[i] = s.u[i] + dt * out.v[i];
        }
    } catch (const SingularPivot& e) {
        throw SolverFailure(n1, std::string("mechanical solve failed: ") + e.what());
    }
    require_finite(out.v, n1, "velocity");
    require_finite(out.u, n1, "displacement");

    // (iii) temperature. Lumped capacity, consistent heating, and the
    // coupling sink split by sign so the matrix stays an M-matrix.
    std::vector<double> bvals(nn);
    for (std::size_t i = 0; i < nn; ++i) bvals[i] = heat_capacity_product(m.coeffs, n1, i);
    const auto lumped = assemble_weighted_mass(grid, bvals).row_sums();
    auto th = assemble_weighted_stiffness(grid, m.coeffs.k.level(n1));
    std::vector<double> rt(nn, 0.0);
    for (std::size_t i = 0; i < nn; ++i) {
        th.main[i] += lumped[i] / dt;
        rt[i] = lumped[i] / dt * s.theta[i];
    }
    for (std::size_t e = 0; e < grid.n_elem(); ++e) {
        const double vz = (out.v[e + 1] - out.v[e]) / dz;
        const double vz2 = vz * vz;
        rt[e] += vz2 * dz * (gamma[e] / 3.0 + gamma[e + 1] / 6.0);
        rt[e + 1] += vz2 * dz * (gamma[e] / 6.0 + gamma[e + 1] / 3.0);
    }
    for (std::size_t i = 0; i < nn; ++i) {
        double vz_int = 0.0;
        if (i > 0) vz_int += 0.5 * (out.v[i] - out.v[i - 1]);
        if (i < last) vz_int += 0.5 * (out.v[i + 1] - out.v[i]);
        const double sigma = m.coeffs.beta * vz_int;
        if (sigma >= 0.0) {
            th.main[i] += sigma;
        } else {
            rt[i] -= sigma * s.theta[i];
        }
    }
    try {
        out.theta = solve_tridiagonal(th, rt);
    } catch (const SingularPivot& e) {
        throw SolverFailure(n1, std::string("temperature solve failed: ") + e.what());
    }
    require_finite(out.theta, n1, "temperature");

    // (iv) potential
    out.phi0 = solve_potential(m, n1, out.u);
    require_finite(out.phi0, n1, "potential");
    return out;
}

std::vector<double> to_vector(const NodalField& f) { return {f.values().begin(), f.values().end()}; }

}  // namespace

StepState step_regularized(const StepState& s, const Model& model, const SolverConfig& config, std::size_t n) {
    if (!(config.epsilon > 0.0)) {
        throw InvalidArgument("step_regularized: epsilon must be positive");
    }
    return advance(s, model, config.epsilon, n);
}

StepState step_physical(const StepState& s, const Model& model, const SolverConfig& config, std::size_t n) {
    if (config.epsilon != 0.0) {
        throw InvalidArgument("step_physical: epsilon must be zero");
    }
    return advance(s, model, 0.0, n);
}

std::vector<std::string> stability_warnings(const Model& model) {
    std::vector<std::string> out;
    const double dt = model.time.dt();
    const double dz = model.grid.dz();
    double worst = 0.0;
    for (std::size_t n = 0; n < model.time.n_levels(); ++n) {
        const auto p = stiffness_at(model.params, n);
        const auto rho = model.coeffs.rho.level(n);
        for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, std::sqrt(p[i] / rho[i]));
    }
    if (dt * worst > dz) {
        std::ostringstream os;
        os << "time step does not resolve elastic waves: dt * c = " << dt * worst << " exceeds dz = " << dz;
        out.push_back(os.str());
    }
    return out;
}

StateTrajectory run_forward(const InitialData& init, const Model& model, const SolverConfig& config,
                            const StepHook& hook) {
    model.check();
    init.validate();
    if (!(init.u0.grid() == model.grid)) {
        throw DimensionMismatch("run_forward: initial data and model use different grids");
    }
    if (!(config.epsilon >= 0.0)) {
        throw InvalidArgument("run_forward: epsilon must be nonnegative");
    }

    StateTrajectory traj{SpaceTimeField(model.grid, model.time), SpaceTimeField(model.grid, model.time),
                         SpaceTimeField(model.grid, model.time), SpaceTimeField(model.grid, model.time),
                         init, config.epsilon, 0.0, 0.0, stability_warnings(model)};

    StepState s{to_vector(init.u0), to_vector(init.u1), to_vector(init.theta0), {}};
    s.phi0 = solve_potential(model, 0, s.u);
    const auto store = [&traj](std::size_t level, const StepState& st) {
        traj.u.set_level(level, st.u);
        traj.v.set_level(level, st.v);
        traj.theta.set_level(level, st.theta);
        traj.phi0.set_level(level, st.phi0);
    };
    store(0, s);
    if (hook) hook(0, s);
    for (std::size_t n = 0; n < model.time.n_step(); ++n) {
        s = advance(s, model, config.epsilon, n);
        store(n + 1, s);
        if (hook) hook(n + 1, s);
    }
    traj.min_theta = traj.theta.min();
    traj.max_theta = traj.theta.max();
    if (config.theta_floor_monitoring && traj.min_theta < -1e-8 * (1.0 + traj.max_theta)) {
        std::ostringstream os;
        os << "temperature undershoot: min theta = " << traj.min_theta;
        traj.warnings.push_back(os.str());
    }
    return traj;
}

InitialData mollify_initial_data(const InitialData& init, double strength) {
    if (!(strength >= 0.0)) throw InvalidArgument("mollify_initial_data: strength must be nonnegative");
    if (strength == 0.0) return init;
    const SpatialGrid& grid = init.u0.grid();
    constexpr int n_sub = 4;
    const double h = grid.length();
    const double dtau = strength * h * h / n_sub;
    const std::vector<double> ones(grid.n_nodes(), 1.0);
    const auto lumped = assemble_weighted_mass(grid, ones).row_sums();
    const auto k = assemble_weighted_stiffness(grid, ones);
    const std::size_t last = grid.n_elem();

    const auto smooth = [&](const NodalField& f, bool dirichlet) {
        TridiagonalMatrix a = k;
        for (std::size_t i = 0; i < a.size(); ++i) a.main[i] += lumped[i] / dtau;
        if (dirichlet) {
            a.set_identity_row(0);
            a.set_identity_row(last);
        }
        std::vector<double> x = to_vector(f);
        for (int j = 0; j < n_sub; ++j) {
            std::vector<double> rhs(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) rhs[i] = lumped[i] / dtau * x[i];
            if (dirichlet) {
                rhs[0] = 0.0;
                rhs[last] = 0.0;
            }
            x = solve_tridiagonal(a, rhs);
        }
        return NodalField(grid, std::move(x));
    };
    return InitialData{smooth(init.u0, true), smooth(init.u1, true), smooth(init.theta0, false)};
}

}  // namespace piezotherm
