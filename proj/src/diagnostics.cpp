#include "piezotherm/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "piezotherm/errors.hpp"

namespace piezotherm {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::vector<double> nodal_stiffness(const MaterialParams& f, std::size_t level) {
    const auto p2 = f.p2.level(level);
    const auto p3 = f.p3.level(level);
    std::vector<double> p(p2.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = effective_stiffness(f.p1, p2[i], p3[i]);
    return p;
}

std::vector<double> nodal_damping(const Model& m, std::span<const double> theta) {
    std::vector<double> g(theta.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = m.coeffs.tau(std::max(theta[i], 0.0)) * m.params.p1;
    return g;
}

std::vector<double> nodal_capacity(const Model& m, std::size_t level) {
    std::vector<double> b(m.grid.n_nodes());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = heat_capacity_product(m.coeffs, level, i);
    return b;
}

// Time derivative of a per-level series: centered inside, one-sided at the ends.
std::vector<double> time_derivative(const std::vector<double>& y, double dt) {
    const std::size_t n = y.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    d[0] = (y[1] - y[0]) / dt;
    d[n - 1] = (y[n - 1] - y[n - 2]) / dt;
    for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (y[k + 1] - y[k - 1]) / (2.0 * dt);
    return d;
}

// Same stencil applied nodewise to a lattice field at one level.
std::vector<double> field_time_derivative(const SpaceTimeField& f, std::size_t n) {
    const std::size_t nl = f.n_levels();
    const double dt = f.time().dt();
    std::vector<double> d(f.n_nodes(), 0.0);
    if (nl < 2) return d;
    std::size_t lo = n == 0 ? 0 : n - 1;
    std::size_t hi = n + 1 < nl ? n + 1 : n;
    const double span = static_cast<double>(hi - lo) * dt;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (f.at(hi, i) - f.at(lo, i)) / span;
    return d;
}

// Second-derivative representative s with M s = -K x, s = 0 on the boundary.
struct SecondDerivative {
    TridiagonalMatrix m_dirichlet;
    TridiagonalMatrix k;
    TridiagonalMatrix m;

    explicit SecondDerivative(const SpatialGrid& grid) {
        const std::vector<double> ones(grid.n_nodes(), 1.0);
        m = assemble_weighted_mass(grid, ones);
        k = assemble_weighted_stiffness(grid, ones);
        m_dirichlet = m;
        m_dirichlet.set_identity_row(0);
        m_dirichlet.set_identity_row(grid.n_elem());
    }

    std::vector<double> operator()(std::span<const double> x) const {
        auto rhs = k.apply(x);
        for (double& r : rhs) r = -r;
        rhs.front() = 0.0;
        rhs.back() = 0.0;
        return solve_tridiagonal(m_dirichlet, rhs);
    }
};

double l2_in_time(const std::vector<double>& w, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t n = 0; n < y.size(); ++n) s += w[n] * y[n] * y[n];
    return std::sqrt(s);
}

}  // namespace

EnergyReport energy_identity_residual(const StateTrajectory& traj, const Model& model) {
    model.check();
    require_same_lattice(traj.u, model.params.p2, "energy_identity_residual");
    const SpatialGrid& grid = model.grid;
    const TimeGrid& time = model.time;
    const std::size_t nl = time.n_levels();
    const double eps = traj.epsilon;
    const SecondDerivative second(grid);

    EnergyReport rep;
    rep.rows.resize(nl);
    std::vector<double> kin(nl), ela(nl);
    for (std::size_t n = 0; n < nl; ++n) {
        EnergyRow& row = rep.rows[n];
        row.time = time.time(n);
        const auto u = traj.u.level(n);
        const auto v = traj.v.level(n);
        const auto th = traj.theta.level(n);
        const auto p = nodal_stiffness(model.params, n);
        const auto k_p = assemble_weighted_stiffness(grid, p);
        const auto kpu = k_p.apply(u);
        kin[n] = 0.5 * dot(v, assemble_weighted_mass(grid, model.coeffs.rho.level(n)).apply(v));
        ela[n] = 0.5 * dot(u, kpu);
        row.kinetic = kin[n];
        row.elastic = ela[n];
        row.dissipation = dot(v, assemble_weighted_stiffness(grid, nodal_damping(model, th)).apply(v));

        double g = 0.0;  // int theta v_z
        for (std::size_t e = 0; e < grid.n_elem(); ++e) g += 0.5 * (th[e] + th[e + 1]) * (v[e + 1] - v[e]);
        row.thermal = model.coeffs.beta * g;

        const auto rho_t = field_time_derivative(model.coeffs.rho, n);
        row.rho_t = 0.5 * dot(v, assemble_weighted_mass(grid, rho_t).apply(v));
        // p_t nodewise from the lattice samples of p
        std::vector<double> p_t(p.size());
        {
            const std::size_t lo = n == 0 ? 0 : n - 1;
            const std::size_t hi = n + 1 < nl ? n + 1 : n;
            const auto plo = nodal_stiffness(model.params, lo);
            const auto phi = nodal_stiffness(model.params, hi);
            const double span = static_cast<double>(hi - lo) * time.dt();
            for (std::size_t i = 0; i < p.size(); ++i) p_t[i] = (phi[i] - plo[i]) / span;
        }
        row.p_t = 0.5 * dot(u, assemble_weighted_stiffness(grid, p_t).apply(u));

        if (eps > 0.0) {
            const auto w = second(v);
            row.eps_vzz = eps * dot(w, second.m.apply(w));
            const auto s = second(u);
            row.eps_p_uzz = eps * dot(s, assemble_weighted_mass(grid, p).apply(s));
            row.eps_pz_uz_uzz = -eps * dot(kpu, s) - row.eps_p_uzz;
        }
    }
    const auto dk = time_derivative(kin, time.dt());
    const auto de = time_derivative(ela, time.dt());
    std::vector<double> res(nl), mag(nl);
    for (std::size_t n = 0; n < nl; ++n) {
        EnergyRow& r = rep.rows[n];
        r.d_kinetic = dk[n];
        r.d_elastic = de[n];
        r.residual = r.d_kinetic + r.d_elastic + r.dissipation + r.eps_vzz + r.eps_p_uzz + r.eps_pz_uz_uzz -
                     r.thermal - r.rho_t - r.p_t;
        res[n] = r.residual;
        mag[n] = std::abs(r.d_kinetic) + std::abs(r.d_elastic) + std::abs(r.dissipation) + std::abs(r.eps_vzz) +
                 std::abs(r.eps_p_uzz) + std::abs(r.eps_pz_uz_uzz) + std::abs(r.thermal) + std::abs(r.rho_t) +
                 std::abs(r.p_t);
        rep.max_residual = std::max(rep.max_residual, std::abs(r.residual));
    }
    const auto w = time.trapezoid_weights();
    rep.aggregate_residual = l2_in_time(w, res);
    rep.scale = l2_in_time(w, mag);
    return rep;
}

AprioriBoundReport apriori_monitor(const StateTrajectory& traj, const Model& model) {
    model.check();
    require_same_lattice(traj.u, model.params.p2, "apriori_monitor");
    const SpatialGrid& grid = model.grid;
    const TimeGrid& time = model.time;
    const std::size_t nl = time.n_levels();
    const double eps = traj.epsilon;
    const auto tw = time.trapezoid_weights();
    const SecondDerivative second(grid);

    AprioriBoundReport rep;
    rep.q_values = {1.5, 2.0, 2.5, 2.9};
    rep.r_values = {1.0, 1.25, 1.4};
    rep.theta_moments.assign(rep.q_values.size(), 0.0);
    rep.gradient_moments.assign(rep.r_values.size(), 0.0);

    for (std::size_t n = 0; n < nl; ++n) {
        const auto u = traj.u.level(n);
        const auto v = traj.v.level(n);
        const auto th = traj.theta.level(n);
        rep.sup_v2 = std::max(rep.sup_v2, integrate_product(grid, v, v));
        rep.sup_u2 = std::max(rep.sup_u2, integrate_product(grid, u, u));
        const double uz2 = std::pow(h1_seminorm(grid, u), 2);
        rep.sup_uz2 = std::max(rep.sup_uz2, uz2);
        rep.sup_theta = std::max(rep.sup_theta, integrate(grid, th));

        const auto p = nodal_stiffness(model.params, n);
        const double y = 0.5 * integrate_product(grid, v, v, model.coeffs.rho.level(n)) +
                         0.5 * integrate_product(grid, u, u) +
                         0.5 * dot(u, assemble_weighted_stiffness(grid, p).apply(u)) +
                         integrate_product(grid, nodal_capacity(model, n), th);
        rep.times.push_back(time.time(n));
        rep.energy.push_back(y);

        if (eps > 0.0) {
            const auto w = second(v);
            rep.eps_vzz2 += tw[n] * eps * dot(w, second.m.apply(w));
            const auto s = second(u);
            rep.eps_uzz2 += tw[n] * eps * dot(s, second.m.apply(s));
        }
    }

    const double dz = grid.dz();
    const double dt = time.dt();
    for (std::size_t n = 0; n < time.n_step(); ++n) {
        for (std::size_t e = 0; e < grid.n_elem(); ++e) {
            const double gz0 = (traj.theta.at(n, e + 1) - traj.theta.at(n, e)) / dz;
            const double gz1 = (traj.theta.at(n + 1, e + 1) - traj.theta.at(n + 1, e)) / dz;
            const double vz0 = (traj.v.at(n, e + 1) - traj.v.at(n, e)) / dz;
            const double vz1 = (traj.v.at(n + 1, e + 1) - traj.v.at(n + 1, e)) / dz;
            for (std::size_t r = 0; r < 2; ++r) {
                const double eta = GaussRule::points[r];
                const double wt = GaussRule::weights[r] * dt;
                const double gz = (1.0 - eta) * gz0 + eta * gz1;
                const double vz = (1.0 - eta) * vz0 + eta * vz1;
                rep.vz2 += wt * dz * vz * vz;
                for (std::size_t j = 0; j < rep.r_values.size(); ++j) {
                    rep.gradient_moments[j] += wt * dz * std::pow(std::abs(gz), rep.r_values[j]);
                }
                for (std::size_t q = 0; q < 2; ++q) {
                    const double w = wt * GaussRule::weights[q] * dz;
                    const double th1 = bilinear(traj.theta, n, e, GaussRule::points[q], eta) + 1.0;
                    for (std::size_t j = 0; j < rep.q_values.size(); ++j) {
                        rep.theta_moments[j] += w * std::pow(th1, rep.q_values[j]);
                    }
                    rep.weighted_gradient += w * std::pow(th1, -1.5) * gz * gz;
                }
            }
        }
    }
    rep.moment_ratio = rep.theta_moments[3] / rep.theta_moments[0];
    rep.moment_growth_flag = rep.moment_ratio > 2.0;

    // log(y/y0) ~ c t through the origin
    const double y0 = rep.energy.front();
    if (y0 > 0.0) {
        double st = 0.0, sty = 0.0;
        std::vector<double> logs(nl, 0.0);
        bool positive = true;
        for (std::size_t n = 1; n < nl; ++n) {
            if (!(rep.energy[n] > 0.0)) {
                positive = false;
                break;
            }
            logs[n] = std::log(rep.energy[n] / y0);
            st += rep.times[n] * rep.times[n];
            sty += rep.times[n] * logs[n];
        }
        if (positive && st > 0.0) {
            rep.gronwall_rate = sty / st;
            double ss = 0.0;
            double worst = 0.0;
            for (std::size_t n = 1; n < nl; ++n) {
                const double d = logs[n] - rep.gronwall_rate * rep.times[n];
                ss += d * d;
                worst = std::max(worst, logs[n]);
            }
            rep.gronwall_fit_rms = std::sqrt(ss / static_cast<double>(nl - 1));
            rep.gronwall_ok =
                worst <= std::max(rep.gronwall_rate, 0.0) * time.end_time() + 3.0 * rep.gronwall_fit_rms + 1e-12;
        } else {
            rep.gronwall_ok = positive;
        }
    }

    const auto finite = [](double x) { return std::isfinite(x); };
    rep.all_finite = finite(rep.sup_v2) && finite(rep.sup_u2) && finite(rep.sup_uz2) && finite(rep.sup_theta) &&
                     finite(rep.eps_vzz2) && finite(rep.eps_uzz2) && finite(rep.vz2) &&
                     finite(rep.weighted_gradient) &&
                     std::all_of(rep.theta_moments.begin(), rep.theta_moments.end(), finite) &&
                     std::all_of(rep.gradient_moments.begin(), rep.gradient_moments.end(), finite) &&
                     std::all_of(rep.energy.begin(), rep.energy.end(), finite);
    return rep;
}

WeakResidualReport weak_residual(const StateTrajectory& traj, const Model& model,
                                 const TestFunctionFamily& tests) {
    model.check();
    require_same_lattice(traj.u, model.params.p2, "weak_residual");
    const SpatialGrid& grid = model.grid;
    const TimeGrid& time = model.time;
    tests.check_support(grid, time);
    const std::size_t ne = grid.n_elem();
    const std::size_t ns = time.n_step();
    const double dz = grid.dz();
    const double dt = time.dt();

    // Integrand coefficients at every space-time Gauss point, index
    // ((n * ne + e) * 2 + r) * 2 + q. Each identity is sum w (ct phi_t + c0 phi + cz phi_z).
    const std::size_t np = ns * ne * 4;
    std::vector<double> m_t(np), m_0(np), m_z(np), h_t(np), h_0(np), h_z(np);

    std::vector<std::vector<double>> p_levels(time.n_levels()), g_levels(time.n_levels()),
        b_levels(time.n_levels());
    for (std::size_t n = 0; n < time.n_levels(); ++n) {
        p_levels[n] = nodal_stiffness(model.params, n);
        g_levels[n] = nodal_damping(model, traj.theta.level(n));
        b_levels[n] = nodal_capacity(model, n);
    }
    const double beta = model.coeffs.beta;
    const auto lerp = [](double a0, double a1, double x) { return (1.0 - x) * a0 + x * a1; };
    const auto bil = [&](const std::vector<double>& lo, const std::vector<double>& hi, std::size_t e, double xi,
                         double eta) { return lerp(lerp(lo[e], lo[e + 1], xi), lerp(hi[e], hi[e + 1], xi), eta); };

    for (std::size_t n = 0; n < ns; ++n) {
        for (std::size_t e = 0; e < ne; ++e) {
            const double uzt = ((traj.u.at(n + 1, e + 1) - traj.u.at(n + 1, e)) -
                                (traj.u.at(n, e + 1) - traj.u.at(n, e))) / (dz * dt);
            for (std::size_t r = 0; r < 2; ++r) {
                const double eta = GaussRule::points[r];
                const double uz = lerp(traj.u.at(n, e + 1) - traj.u.at(n, e),
                                       traj.u.at(n + 1, e + 1) - traj.u.at(n + 1, e), eta) / dz;
                const double thz = lerp(traj.theta.at(n, e + 1) - traj.theta.at(n, e),
                                        traj.theta.at(n + 1, e + 1) - traj.theta.at(n + 1, e), eta) / dz;
                for (std::size_t q = 0; q < 2; ++q) {
                    const double xi = GaussRule::points[q];
                    const std::size_t k = ((n * ne + e) * 2 + r) * 2 + q;
                    const double ut = lerp(traj.u.at(n + 1, e) - traj.u.at(n, e),
                                           traj.u.at(n + 1, e + 1) - traj.u.at(n, e + 1), xi) / dt;
                    const double rho = bilinear(model.coeffs.rho, n, e, xi, eta);
                    const double rho_t = lerp(model.coeffs.rho.at(n + 1, e) - model.coeffs.rho.at(n, e),
                                              model.coeffs.rho.at(n + 1, e + 1) - model.coeffs.rho.at(n, e + 1),
                                              xi) / dt;
                    const double p = bil(p_levels[n], p_levels[n + 1], e, xi, eta);
                    const double gam = bil(g_levels[n], g_levels[n + 1], e, xi, eta);
                    const double th = bilinear(traj.theta, n, e, xi, eta);
                    const double b = bil(b_levels[n], b_levels[n + 1], e, xi, eta);
                    const double b_t = lerp(b_levels[n + 1][e] - b_levels[n][e],
                                            b_levels[n + 1][e + 1] - b_levels[n][e + 1], xi) / dt;
                    const double kk = bilinear(model.coeffs.k, n, e, xi, eta);

                    m_t[k] = rho * ut;
                    m_0[k] = rho_t * ut;
                    m_z[k] = -(gam * uzt + p * uz - beta * th);
                    h_t[k] = b * th;
                    h_0[k] = b_t * th + gam * uzt * uzt - beta * th * uzt;
                    h_z[k] = -kk * thz;
                }
            }
        }
    }

    // initial-value integrands at the spatial Gauss points
    std::vector<double> m_init(2 * ne), h_init(2 * ne);
    const auto b0 = nodal_capacity(model, 0);
    const auto u1 = traj.initial.u1.values();
    const auto th0 = traj.initial.theta0.values();
    const auto rho0 = model.coeffs.rho.level(0);
    for (std::size_t e = 0; e < ne; ++e) {
        for (std::size_t q = 0; q < 2; ++q) {
            const double xi = GaussRule::points[q];
            m_init[2 * e + q] = interpolate(rho0, e, xi) * interpolate(u1, e, xi);
            h_init[2 * e + q] = interpolate(b0, e, xi) * interpolate(th0, e, xi);
        }
    }

    WeakResidualReport rep;
    rep.rows.resize(tests.size());
    for (std::size_t i = 0; i < tests.size(); ++i) {
        const auto ts = tests.tabulate(i, SpatialShape::sine, grid, time);
        const auto tc = tests.tabulate(i, SpatialShape::cosine, grid, time);
        double r1 = 0.0, r2 = 0.0;
        double ns_phi = 0.0, ns_t = 0.0, ns_z = 0.0, nc_phi = 0.0, nc_t = 0.0, nc_z = 0.0;
        for (std::size_t n = 0; n < ns; ++n) {
            for (std::size_t r = 0; r < 2; ++r) {
                const double wt = GaussRule::weights[r] * dt;
                const std::size_t tr = 2 * n + r;
                for (std::size_t e = 0; e < ne; ++e) {
                    for (std::size_t q = 0; q < 2; ++q) {
                        const double w = wt * GaussRule::weights[q] * dz;
                        const std::size_t sq = 2 * e + q;
                        const std::size_t k = ((n * ne + e) * 2 + r) * 2 + q;
                        const double phi = ts.s[sq] * ts.w[tr];
                        const double phi_t = ts.s[sq] * ts.dw[tr];
                        const double phi_z = ts.ds[sq] * ts.w[tr];
                        r1 += w * (m_t[k] * phi_t + m_0[k] * phi + m_z[k] * phi_z);
                        ns_phi += w * phi * phi;
                        ns_t += w * phi_t * phi_t;
                        ns_z += w * phi_z * phi_z;
                        const double psi = tc.s[sq] * tc.w[tr];
                        const double psi_t = tc.s[sq] * tc.dw[tr];
                        const double psi_z = tc.ds[sq] * tc.w[tr];
                        r2 += w * (h_t[k] * psi_t + h_0[k] * psi + h_z[k] * psi_z);
                        nc_phi += w * psi * psi;
                        nc_t += w * psi_t * psi_t;
                        nc_z += w * psi_z * psi_z;
                    }
                }
            }
        }
        for (std::size_t sq = 0; sq < 2 * ne; ++sq) {
            const double w = GaussRule::weights[sq % 2] * dz;
            r1 += w * m_init[sq] * ts.s[sq] * ts.w0;
            r2 += w * h_init[sq] * tc.s[sq] * tc.w0;
        }
        WeakResidualRow& row = rep.rows[i];
        row.momentum = r1;
        row.heat = r2;
        row.norm_sine = std::sqrt(ns_phi) + std::sqrt(ns_t) + std::sqrt(ns_z);
        row.norm_cosine = std::sqrt(nc_phi) + std::sqrt(nc_t) + std::sqrt(nc_z);
        row.momentum_normalized = row.norm_sine > 0.0 ? std::abs(r1) / row.norm_sine : 0.0;
        row.heat_normalized = row.norm_cosine > 0.0 ? std::abs(r2) / row.norm_cosine : 0.0;
        rep.max_momentum = std::max(rep.max_momentum, row.momentum_normalized);
        rep.max_heat = std::max(rep.max_heat, row.heat_normalized);
    }
    rep.max_normalized = std::max(rep.max_momentum, rep.max_heat);
    return rep;
}

std::vector<std::vector<double>> steklov_average(const std::vector<std::vector<double>>& levels,
                                                 const TimeGrid& time, double h_avg, SteklovRule rule) {
    if (!(h_avg > 0.0)) throw InvalidArgument("steklov_average: averaging width must be positive");
    if (levels.size() != time.n_levels()) {
        throw DimensionMismatch("steklov_average: need one entry per time level");
    }
    const std::size_t width = levels.front().size();
    for (const auto& l : levels) {
        if (l.size() != width) throw DimensionMismatch("steklov_average: ragged level data");
    }
    const double dt = time.dt();
    std::vector<std::vector<double>> out(levels.size(), std::vector<double>(width, 0.0));
    for (std::size_t n = 0; n < levels.size(); ++n) {
        const double t = time.time(n);
        const double a = t - h_avg;
        std::vector<double>& acc = out[n];
        if (a < 0.0) {
            const double len = std::min(-a, h_avg);
            for (std::size_t j = 0; j < width; ++j) acc[j] += len * levels[0][j];
        }
        for (std::size_t m = 1; m <= n; ++m) {
            const double lo = std::max(time.time(m - 1), a);
            const double hi = time.time(m);
            if (hi <= lo) continue;
            const double len = hi - lo;
            if (rule == SteklovRule::right_point) {
                for (std::size_t j = 0; j < width; ++j) acc[j] += len * levels[m][j];
            } else {
                // exact integral of the linear interpolant over [lo, hi]
                const double x0 = (lo - time.time(m - 1)) / dt;
                for (std::size_t j = 0; j < width; ++j) {
                    const double f_lo = (1.0 - x0) * levels[m - 1][j] + x0 * levels[m][j];
                    acc[j] += 0.5 * len * (f_lo + levels[m][j]);
                }
            }
        }
        for (double& x : acc) x /= h_avg;
    }
    return out;
}

SpaceTimeField steklov_average(const SpaceTimeField& f, double h_avg, SteklovRule rule) {
    std::vector<std::vector<double>> levels(f.n_levels());
    for (std::size_t n = 0; n < f.n_levels(); ++n) levels[n].assign(f.level(n).begin(), f.level(n).end());
    const auto avg = steklov_average(levels, f.time(), h_avg, rule);
    SpaceTimeField out(f.grid(), f.time());
    for (std::size_t n = 0; n < f.n_levels(); ++n) out.set_level(n, avg[n]);
    return out;
}

std::vector<std::vector<double>> element_gradients(const SpaceTimeField& f) {
    const double dz = f.grid().dz();
    std::vector<std::vector<double>> out(f.n_levels(), std::vector<double>(f.grid().n_elem()));
    for (std::size_t n = 0; n < f.n_levels(); ++n) {
        for (std::size_t e = 0; e < f.grid().n_elem(); ++e) out[n][e] = (f.at(n, e + 1) - f.at(n, e)) / dz;
    }
    return out;
}

EpsilonStudyReport epsilon_convergence_study(const InitialData& init, const Model& model,
                                             const std::vector<double>& eps_list) {
    if (eps_list.size() < 2) throw InvalidArgument("epsilon_convergence_study: need at least two values");
    for (std::size_t j = 0; j < eps_list.size(); ++j) {
        if (!(eps_list[j] > 0.0)) throw InvalidArgument("epsilon_convergence_study: values must be positive");
        if (j > 0 && eps_list[j] > eps_list[j - 1]) {
            throw InvalidArgument("epsilon_convergence_study: values must be non-increasing");
        }
    }
    EpsilonStudyReport rep;
    rep.eps = eps_list;
    const auto limit = run_forward(init, model, SolverConfig{0.0, true});
    rep.bounds_limit = apriori_monitor(limit, model);
    std::vector<StateTrajectory> runs;
    runs.reserve(eps_list.size());
    for (double eps : eps_list) {
        runs.push_back(run_forward(init, model, SolverConfig{eps, true}));
        const auto& r = runs.back();
        rep.bounds.push_back(apriori_monitor(r, model));
        rep.dist_u.push_back(space_time_l2_distance(r.u, limit.u));
        rep.dist_v.push_back(space_time_l2_distance(r.v, limit.v));
        rep.dist_theta.push_back(space_time_l2_distance(r.theta, limit.theta));
    }
    for (std::size_t j = 1; j < runs.size(); ++j) {
        rep.step_u.push_back(space_time_l2_distance(runs[j].u, runs[j - 1].u));
        rep.step_v.push_back(space_time_l2_distance(runs[j].v, runs[j - 1].v));
        rep.step_theta.push_back(space_time_l2_distance(runs[j].theta, runs[j - 1].theta));
    }
    const auto strictly_decreasing = [](const std::vector<double>& x) {
        for (std::size_t j = 1; j < x.size(); ++j) {
            if (!(x[j] < x[j - 1])) return false;
        }
        return true;
    };
    rep.distance_decreasing =
        strictly_decreasing(rep.dist_u) && strictly_decreasing(rep.dist_v) && strictly_decreasing(rep.dist_theta);
    rep.cauchy_decreasing =
        strictly_decreasing(rep.step_u) && strictly_decreasing(rep.step_v) && strictly_decreasing(rep.step_theta);
    return rep;
}

}  // namespace piezotherm
