#pragma once

// Nondimensional test problems shared by the unit and acceptance tests.

#include <cmath>
#include <numbers>

#include "piezotherm/forward_solver.hpp"

namespace testkit {

using namespace piezotherm;

inline constexpr double pi = std::numbers::pi;

struct Problem {
    double length = 1.0;
    std::size_t n_elem = 32;
    double end_time = 1.0;
    std::size_t n_step = 32;
    double rho = 1.0, c_th = 1.0, k = 0.1, beta = 0.3, tau = 0.05;
    double p1 = 1.0, p2 = 0.5, p3 = 1.0;
    double phi_amplitude = 0.5;  ///< sine burst of one period over (0, T)
};

inline Model make_model(const Problem& s) {
    const SpatialGrid g(s.length, s.n_elem);
    const TimeGrid t(s.end_time, s.n_step);
    PhysicalCoefficients c{SpaceTimeField(g, t, s.rho), SpaceTimeField(g, t, s.c_th), SpaceTimeField(g, t, s.k),
                           s.beta, RelaxationLaw::constant(s.tau), 1e-3, 1e3};
    auto lift = build_lift(sine_burst(t, s.phi_amplitude, 1.0 / s.end_time, 1.0), g, t, s.phi_amplitude == 0.0);
    return Model{g, t, std::move(c), MaterialParams::constant(g, t, s.p1, s.p2, s.p3), std::move(lift)};
}

/// u0 = 0, u1 = a sin(pi z / h), theta0 = 1 + c cos(pi z / h).
inline InitialData smooth_data(const SpatialGrid& g, double a = 0.5, double c = 0.5) {
    InitialData d = InitialData::zero(g);
    for (std::size_t i = 0; i < g.n_nodes(); ++i) {
        const double x = pi * g.node(i) / g.length();
        d.u1[i] = (i == 0 || i == g.n_elem()) ? 0.0 : a * std::sin(x);
        d.theta0[i] = 1.0 + c * std::cos(x);
    }
    return d;
}

}  // namespace testkit
