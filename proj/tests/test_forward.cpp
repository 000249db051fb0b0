#include <gtest/gtest.h>

#include <random>

#include "common.hpp"
#include "piezotherm/diagnostics.hpp"
#include "piezotherm/errors.hpp"

using namespace testkit;

namespace {

double max_abs(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

// Residual of the potential row against interior hats, by direct element loops.
double potential_residual(const SpatialGrid& g, const std::vector<double>& p2, const std::vector<double>& p3,
                          const std::vector<double>& chi, const std::vector<double>& u,
                          const std::vector<double>& phi0) {
    std::vector<double> r(g.n_nodes(), 0.0);
    const double dz = g.dz();
    for (std::size_t e = 0; e < g.n_elem(); ++e) {
        const double a2 = 0.5 * (p2[e] + p2[e + 1]), a3 = 0.5 * (p3[e] + p3[e + 1]);
        const double flux =
            a3 * (phi0[e + 1] - phi0[e]) / dz - a2 * (u[e + 1] - u[e]) / dz + a3 * (chi[e + 1] - chi[e]) / dz;
        r[e] -= flux;
        r[e + 1] += flux;
    }
    double m = 0.0;
    for (std::size_t i = 1; i < g.n_elem(); ++i) m = std::max(m, std::abs(r[i]));
    return m;
}

InitialData heat_only_data(const SpatialGrid& g) {
    InitialData d = InitialData::zero(g);
    for (std::size_t i = 0; i < g.n_nodes(); ++i) d.theta0[i] = 1.0 + std::cos(pi * g.node(i) / g.length());
    return d;
}

}  // namespace

TEST(Potential, LinearStateGivesZero) {
    const SpatialGrid g(2.0, 10);
    std::vector<double> p2(11, 0.7), p3(11, 1.9), u(11), chi(11);
    for (std::size_t i = 0; i < 11; ++i) {
        u[i] = 0.3 * g.node(i);
        chi[i] = -1.2 * g.node(i);
    }
    EXPECT_LE(max_abs(solve_potential(g, p2, p3, chi, u)), 1e-14);
}

TEST(Potential, QuadraticLift) {
    // p3 phi0_z = -chi_z + c with chi = z^2 / 2 and zero boundary values:
    // phi0 = -z^2/2 + z/2, nodally exact for P1.
    const SpatialGrid g(1.0, 16);
    std::vector<double> p2(17, 0.0), p3(17, 1.0), u(17, 0.0), chi(17);
    for (std::size_t i = 0; i < 17; ++i) chi[i] = 0.5 * g.node(i) * g.node(i);
    const auto phi = solve_potential(g, p2, p3, chi, u);
    for (std::size_t i = 0; i < 17; ++i) {
        const double z = g.node(i);
        EXPECT_NEAR(phi[i], -0.5 * z * z + 0.5 * z, 1e-14);
    }
}

TEST(Potential, RandomCoefficientsResidual) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> pos(0.2, 3.0), any(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const SpatialGrid g(0.5 + trial, 8 + 7 * trial);
        const std::size_t n = g.n_nodes();
        std::vector<double> p2(n), p3(n), u(n), chi(n);
        for (std::size_t i = 0; i < n; ++i) {
            p2[i] = pos(rng);
            p3[i] = pos(rng);
            u[i] = any(rng);
            chi[i] = any(rng);
        }
        u.front() = u.back() = 0.0;
        const auto phi = solve_potential(g, p2, p3, chi, u);
        EXPECT_EQ(phi.front(), 0.0);
        EXPECT_EQ(phi.back(), 0.0);
        EXPECT_LE(potential_residual(g, p2, p3, chi, u, phi), 1e-10);
    }
}

TEST(Potential, NonpositivePermittivity) {
    const SpatialGrid g(1.0, 4);
    std::vector<double> p2(5, 1.0), p3(5, 1.0), z(5, 0.0);
    p3[2] = 0.0;
    EXPECT_THROW(solve_potential(g, p2, p3, z, z), Error);
}

TEST(Forward, ZeroDataStaysZero) {
    for (double eps : {0.0, 1e-2}) {
        Problem s;
        s.phi_amplitude = 0.0;
        s.n_step = 3;
        const Model m = make_model(s);
        const auto traj = run_forward(InitialData::zero(m.grid), m, SolverConfig{eps});
        for (const auto* f : {&traj.u, &traj.v, &traj.theta, &traj.phi0}) EXPECT_EQ(max_abs(f->data()), 0.0);
        EXPECT_EQ(traj.min_theta, 0.0);
    }
}

TEST(Forward, RegularizedStepRequiresPositiveEpsilon) {
    Problem s;
    const Model m = make_model(s);
    const auto traj = run_forward(smooth_data(m.grid), m, SolverConfig{});
    EXPECT_THROW(step_regularized(traj.state(0), m, SolverConfig{0.0}, 0), InvalidArgument);
    EXPECT_THROW(step_physical(traj.state(0), m, SolverConfig{0.1}, 0), InvalidArgument);
}

TEST(Forward, DecoupledHeatMatchesKernel) {
    std::vector<double> err;
    for (std::size_t n : {16, 32}) {
        Problem s;
        s.n_elem = n;
        s.n_step = 64 * n;
        s.end_time = 0.1;
        s.beta = 0.0;
        s.k = 0.5;
        s.c_th = 2.0;
        s.phi_amplitude = 0.0;
        const Model m = make_model(s);
        const auto traj = run_forward(heat_only_data(m.grid), m, SolverConfig{});
        const double rate = (s.k / (s.rho * s.c_th)) * pi * pi;
        const auto exact = SpaceTimeField::from_function(
            m.grid, m.time, [rate](double z, double t) { return 1.0 + std::exp(-rate * t) * std::cos(pi * z); });
        err.push_back(space_time_l2_distance(traj.theta, exact));
        EXPECT_EQ(max_abs(traj.u.data()), 0.0);
    }
    EXPECT_LT(err[0], 1e-3);
    EXPECT_GT(err[0] / err[1], 3.0);
}

TEST(Forward, HeatContentConservedWithoutMotion) {
    Problem s;
    s.beta = 0.0;
    s.phi_amplitude = 0.0;
    s.rho = 2.5;
    Model m = make_model(s);
    const auto traj = run_forward(heat_only_data(m.grid), m, SolverConfig{});
    const double q0 = 2.5 * integrate(m.grid, traj.theta.level(0));
    for (std::size_t n = 1; n < m.time.n_levels(); ++n) {
        EXPECT_NEAR(2.5 * integrate(m.grid, traj.theta.level(n)), q0, 1e-10);
    }

    // spatially varying b: the lumped heat content is the conserved quantity
    m.coeffs.rho = Coefficient::affine(1.0, 2.0, 0.0).sample(m.grid, m.time);
    const auto t2 = run_forward(heat_only_data(m.grid), m, SolverConfig{});
    const auto lumped = assemble_weighted_mass(m.grid, m.coeffs.b().level(0)).row_sums();
    const auto content = [&](std::size_t n) {
        double q = 0.0;
        for (std::size_t i = 0; i < lumped.size(); ++i) q += lumped[i] * t2.theta.at(n, i);
        return q;
    };
    for (std::size_t n = 1; n < m.time.n_levels(); ++n) EXPECT_NEAR(content(n), content(0), 1e-10);
}

TEST(Forward, SubstitutionIdentityPhysical) {
    Problem s;
    const Model m = make_model(s);
    const auto traj = run_forward(smooth_data(m.grid), m, SolverConfig{});
    const double dt = m.time.dt();
    for (std::size_t n = 0; n + 1 < m.time.n_levels(); ++n) {
        for (std::size_t i = 0; i < m.grid.n_nodes(); ++i) {
            EXPECT_EQ(traj.u.at(n + 1, i), traj.u.at(n, i) + dt * traj.v.at(n + 1, i));
        }
    }
}

TEST(Forward, BoundaryConditionsHonored) {
    for (double eps : {0.0, 1e-2}) {
        Problem s;
        const Model m = make_model(s);
        const auto traj = run_forward(smooth_data(m.grid), m, SolverConfig{eps});
        const std::size_t last = m.grid.n_elem();
        for (std::size_t n = 0; n < m.time.n_levels(); ++n) {
            for (const auto* f : {&traj.u, &traj.v, &traj.phi0}) {
                EXPECT_EQ(f->at(n, 0), 0.0);
                EXPECT_EQ(f->at(n, last), 0.0);
            }
        }
    }
}

TEST(Forward, EliminatedPotentialEquivalence) {
    Problem s;
    s.p2 = 0.8;
    s.p3 = 1.7;
    const Model m = make_model(s);
    const auto traj = run_forward(smooth_data(m.grid), m, SolverConfig{});
    const double p = effective_stiffness(s.p1, s.p2, s.p3);
    const double dz = m.grid.dz();
    // The two fluxes differ by the constant p2 phi_e / h, which every
    // interior hat annihilates; compare the tested momentum loads.
    double worst = 0.0;
    for (std::size_t n = 0; n < m.time.n_levels(); ++n) {
        std::vector<double> r(m.grid.n_nodes(), 0.0);
        for (std::size_t e = 0; e < m.grid.n_elem(); ++e) {
            const double uz = (traj.u.at(n, e + 1) - traj.u.at(n, e)) / dz;
            const double phz = (traj.phi0.at(n, e + 1) - traj.phi0.at(n, e)) / dz;
            const double chz = (m.lift.chi.at(n, e + 1) - m.lift.chi.at(n, e)) / dz;
            const double d = p * uz - (s.p1 * uz + s.p2 * (phz + chz));
            r[e] -= d;
            r[e + 1] += d;
        }
        for (std::size_t i = 1; i < m.grid.n_elem(); ++i) worst = std::max(worst, std::abs(r[i]));
    }
    EXPECT_LE(worst, 1e-10);
}

TEST(Forward, SmokeNonnegativity) {
    Problem s;
    s.n_elem = 64;
    s.n_step = 200;
    s.beta = 1.0;
    const Model m = make_model(s);
    InitialData d = smooth_data(m.grid, 1.0, 1.0);
    const auto traj = run_forward(d, m, SolverConfig{});
    EXPECT_GE(traj.min_theta, -1e-8 * traj.max_theta);
    EXPECT_TRUE(traj.theta.all_finite());
}

TEST(Forward, SelfConvergenceInTime) {
    Problem s;
    s.n_elem = 32;
    s.n_step = 1024;
    const Model ref_model = make_model(s);
    const auto ref = run_forward(smooth_data(ref_model.grid), ref_model, SolverConfig{});
    std::vector<double> err;
    for (std::size_t n : {32, 64, 128}) {
        s.n_step = n;
        const Model m = make_model(s);
        const auto traj = run_forward(smooth_data(m.grid), m, SolverConfig{});
        const std::size_t stride = 1024 / n;
        double e2 = 0.0;
        for (std::size_t k = 0; k < m.time.n_levels(); ++k) {
            for (std::size_t i = 0; i < m.grid.n_nodes(); ++i) {
                const double d = traj.v.at(k, i) - ref.v.at(k * stride, i);
                e2 += d * d;
            }
        }
        err.push_back(std::sqrt(e2 / m.time.n_levels()));
    }
    EXPECT_GT(err[0] / err[1], 1.8);
    EXPECT_GT(err[1] / err[2], 1.8);
}

TEST(Forward, EpsilonSweepApproachesPhysical) {
    Problem s;
    const Model m = make_model(s);
    const auto d = smooth_data(m.grid);
    const auto limit = run_forward(d, m, SolverConfig{});
    double prev = INFINITY;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
        const auto t = run_forward(d, m, SolverConfig{eps});
        const double dist = space_time_l2_distance(t.u, limit.u) + space_time_l2_distance(t.v, limit.v) +
                            space_time_l2_distance(t.theta, limit.theta);
        EXPECT_LT(dist, prev);
        prev = dist;
    }
}

TEST(Forward, HookSeesEveryLevel) {
    Problem s;
    s.n_step = 5;
    const Model m = make_model(s);
    std::vector<std::size_t> seen;
    run_forward(smooth_data(m.grid), m, SolverConfig{}, [&](std::size_t n, const StepState&) { seen.push_back(n); });
    ASSERT_FALSE(seen.empty());
    EXPECT_EQ(seen.back(), 5u);
}

TEST(Forward, InitialDataValidation) {
    const SpatialGrid g(1.0, 4);
    InitialData d = InitialData::zero(g);
    d.theta0[2] = -0.1;
    EXPECT_THROW(d.validate(), InvalidArgument);
    d = InitialData::zero(g);
    d.u0[0] = 1e-3;
    EXPECT_THROW(d.validate(), InvalidArgument);
}

TEST(Forward, StabilityWarning) {
    Problem s;
    s.n_elem = 64;
    s.n_step = 4;
    EXPECT_FALSE(stability_warnings(make_model(s)).empty());
    s.n_step = 256;
    EXPECT_TRUE(stability_warnings(make_model(s)).empty());
}

TEST(Mollify, ZeroStrengthIsIdentity) {
    const SpatialGrid g(1.0, 16);
    const auto d = smooth_data(g);
    const auto m = mollify_initial_data(d, 0.0);
    for (std::size_t i = 0; i < g.n_nodes(); ++i) {
        EXPECT_EQ(m.u1[i], d.u1[i]);
        EXPECT_EQ(m.theta0[i], d.theta0[i]);
    }
    EXPECT_THROW(mollify_initial_data(d, -1.0), InvalidArgument);
}

TEST(Mollify, StepFunctionStaysNonnegativeAndConserved) {
    const SpatialGrid g(1.0, 40);
    InitialData d = InitialData::zero(g);
    for (std::size_t i = 0; i < g.n_nodes(); ++i) d.theta0[i] = g.node(i) < 0.5 ? 0.0 : 2.0;
    const auto m = mollify_initial_data(d, 0.01);
    EXPECT_NEAR(integrate(m.theta0), integrate(d.theta0), 1e-10);
    for (double v : m.theta0.values()) EXPECT_GE(v, 0.0);
    EXPECT_NO_THROW(m.validate());
}

TEST(Mollify, DistanceShrinksWithStrength) {
    const SpatialGrid g(1.0, 40);
    InitialData d = InitialData::zero(g);
    for (std::size_t i = 0; i < g.n_nodes(); ++i) d.theta0[i] = g.node(i) < 0.5 ? 0.0 : 2.0;
    double prev = INFINITY;
    for (double s : {1e-1, 1e-2, 1e-3, 1e-4}) {
        const auto m = mollify_initial_data(d, s);
        std::vector<double> diff(g.n_nodes());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = m.theta0[i] - d.theta0[i];
        const double dist = l2_norm(g, diff);
        EXPECT_LT(dist, prev);
        prev = dist;
    }
    EXPECT_LT(prev, 0.05);
}
