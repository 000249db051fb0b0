#include "piezotherm/observation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "piezotherm/errors.hpp"

namespace piezotherm {

const char* to_string(TraceKind kind) {
    switch (kind) {
        case TraceKind::bulk:
            return "bulk";
        case TraceKind::window:
            return "window";
        case TraceKind::boundary:
            return "boundary";
    }
    return "bulk";
}

TraceKind trace_kind_from_string(const std::string& s) {
    if (s == "bulk") return TraceKind::bulk;
    if (s == "window") return TraceKind::window;
    if (s == "boundary") return TraceKind::boundary;
    throw InvalidArgument("unknown observation kind '" + s + "' (expected bulk, window or boundary)");
}

double trace_norm(const TimeGrid& time, std::span<const double> values) {
    if (values.size() != time.n_levels()) throw DimensionMismatch("trace_norm: length mismatch");
    const auto w = time.trapezoid_weights();
    double s = 0.0;
    for (std::size_t n = 0; n < values.size(); ++n) s += w[n] * values[n] * values[n];
    return std::sqrt(s);
}

double trace_distance(const ObservationTrace& a, const ObservationTrace& b) {
    if (!(a.time == b.time)) throw DimensionMismatch("trace_distance: traces use different time grids");
    std::vector<double> d(a.values.size());
    for (std::size_t n = 0; n < d.size(); ++n) d[n] = a.values[n] - b.values[n];
    return trace_norm(a.time, d);
}

namespace {

void check_fields(const SpaceTimeField& u, const SpaceTimeField& phi0, const MaterialParams& f,
                  const ExcitationLift& lift, const char* what) {
    require_same_lattice(u, phi0, what);
    require_same_lattice(u, f.p2, what);
    require_same_lattice(u, f.p3, what);
    require_same_lattice(u, lift.chi, what);
}

void check_gamma(const SpatialGrid& grid, double gamma) {
    if (!(gamma > 0.0) || !(gamma < grid.length())) {
        throw InvalidArgument("window width gamma must lie in (0, h)");
    }
}

constexpr const char* window_note =
    "normal extension n_z = +1 on (h - gamma, h): outward unit normal continued inward; "
    "the eikonal L2 normalization has no constant-gradient solution in 1D and is not applied";

}  // namespace

NormalExtension build_normal_extension(const SpatialGrid& grid, double gamma) {
    check_gamma(grid, gamma);
    NormalExtension ext;
    ext.gamma = gamma;
    ext.window_start = grid.length() - gamma;
    ext.measure = gamma;
    const double tol = 1e-12 * grid.length();
    std::size_t i = 0;
    while (grid.node(i) < ext.window_start - tol) ++i;
    ext.first_node = i;
    ext.n_z.assign(grid.n_nodes() - i, 1.0);
    ext.note = window_note;
    return ext;
}

double bulk_charge(const SpatialGrid& grid, std::span<const double> p2, std::span<const double> p3,
                   std::span<const double> u, std::span<const double> phi0, std::span<const double> chi,
                   double phi_e_norm, double upper) {
    const double dz = grid.dz();
    const double top = upper < 0.0 ? grid.length() : upper;
    double s = 0.0;
    for (std::size_t e = 0; e < grid.n_elem(); ++e) {
        const double z0 = grid.node(e);
        if (z0 >= top) break;
        const double frac = std::min(1.0, (top - z0) / dz);
        const double uz = (u[e + 1] - u[e]) / dz;
        const double pz = (phi0[e + 1] + chi[e + 1] - phi0[e] - chi[e]) / dz;
        for (std::size_t q = 0; q < 2; ++q) {
            const double xi = frac * GaussRule::points[q];
            s += GaussRule::weights[q] * frac * dz *
                 (interpolate(p2, e, xi) * uz - interpolate(p3, e, xi) * pz) * pz;
        }
    }
    return s / phi_e_norm;
}

ObservationTrace observe_bulk_charge(const SpaceTimeField& u, const SpaceTimeField& phi0, const MaterialParams& f,
                                     const ExcitationLift& lift, bool with_lower_half) {
    check_fields(u, phi0, f, lift, "observe_bulk_charge");
    if (!(lift.phi_e_norm > 0.0)) {
        throw InvalidArgument("observe_bulk_charge: excitation has zero L2 norm");
    }
    ObservationTrace tr{u.time(), std::vector<double>(u.n_levels()), TraceKind::bulk, 0.0, 0.0, 0, "", {}};
    const SpatialGrid& grid = u.grid();
    for (std::size_t n = 0; n < u.n_levels(); ++n) {
        tr.values[n] = bulk_charge(grid, f.p2.level(n), f.p3.level(n), u.level(n), phi0.level(n),
                                   lift.chi.level(n), lift.phi_e_norm);
        if (with_lower_half) {
            tr.lower_half.push_back(bulk_charge(grid, f.p2.level(n), f.p3.level(n), u.level(n), phi0.level(n),
                                                lift.chi.level(n), lift.phi_e_norm, 0.5 * grid.length()));
        }
    }
    return tr;
}

ObservationTrace observe_bulk_charge(const StateTrajectory& traj, const MaterialParams& f,
                                     const ExcitationLift& lift, bool with_lower_half) {
    return observe_bulk_charge(traj.u, traj.phi0, f, lift, with_lower_half);
}

ObservationTrace observe_window_charge(const SpaceTimeField& u, const SpaceTimeField& phi0, const MaterialParams& f,
                                       const ExcitationLift& lift, double gamma) {
    check_fields(u, phi0, f, lift, "observe_window_charge");
    const SpatialGrid& grid = u.grid();
    const auto ext = build_normal_extension(grid, gamma);
    ObservationTrace tr{u.time(), std::vector<double>(u.n_levels()), TraceKind::window, gamma, 0.0, 0, ext.note,
                        {}};
    const double dz = grid.dz();
    const double a = ext.window_start;
    for (std::size_t n = 0; n < u.n_levels(); ++n) {
        const auto uu = u.level(n);
        const auto ph = phi0.level(n);
        const auto ch = lift.chi.level(n);
        const auto p2 = f.p2.level(n);
        const auto p3 = f.p3.level(n);
        double s = 0.0;
        for (std::size_t e = 0; e < grid.n_elem(); ++e) {
            const double z0 = grid.node(e);
            const double z1 = grid.node(e + 1);
            if (z1 <= a) continue;
            const double lo = std::max(z0, a);
            const double len = z1 - lo;
            const double uz = (uu[e + 1] - uu[e]) / dz;
            const double pz = (ph[e + 1] + ch[e + 1] - ph[e] - ch[e]) / dz;
            for (std::size_t q = 0; q < 2; ++q) {
                const double z = lo + GaussRule::points[q] * len;
                const double xi = (z - z0) / dz;
                // n_z = +1 throughout the window
                s += GaussRule::weights[q] * len * (interpolate(p2, e, xi) * uz - interpolate(p3, e, xi) * pz);
            }
        }
        tr.values[n] = s / ext.measure;
    }
    return tr;
}

ObservationTrace observe_window_charge(const StateTrajectory& traj, const MaterialParams& f,
                                       const ExcitationLift& lift, double gamma) {
    return observe_window_charge(traj.u, traj.phi0, f, lift, gamma);
}

ObservationTrace observe_boundary_charge(const SpaceTimeField& u, const SpaceTimeField& phi0,
                                         const MaterialParams& f, const ExcitationLift& lift) {
    check_fields(u, phi0, f, lift, "observe_boundary_charge");
    const SpatialGrid& grid = u.grid();
    if (grid.n_elem() < 3) throw InvalidArgument("observe_boundary_charge: need at least 3 elements");
    const std::size_t N = grid.n_elem();
    const double dz = grid.dz();
    ObservationTrace tr{u.time(), std::vector<double>(u.n_levels()), TraceKind::boundary, 0.0, 0.0, 0, "", {}};
    for (std::size_t n = 0; n < u.n_levels(); ++n) {
        const auto uu = u.level(n);
        const auto p2 = f.p2.level(n);
        const auto p3 = f.p3.level(n);
        std::vector<double> phi(grid.n_nodes());
        for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = phi0.at(n, i) + lift.chi.at(n, i);
        const auto d0 = [dz](std::span<const double> g) { return (-3.0 * g[0] + 4.0 * g[1] - g[2]) / (2.0 * dz); };
        const auto dh = [dz, N](std::span<const double> g) {
            return (3.0 * g[N] - 4.0 * g[N - 1] + g[N - 2]) / (2.0 * dz);
        };
        tr.values[n] = p2[N] * dh(uu) - p3[N] * dh(phi) - p2[0] * d0(uu) + p3[0] * d0(phi);
    }
    return tr;
}

ObservationTrace observe_boundary_charge(const StateTrajectory& traj, const MaterialParams& f,
                                         const ExcitationLift& lift) {
    return observe_boundary_charge(traj.u, traj.phi0, f, lift);
}

ObservationTrace add_noise(const ObservationTrace& trace, double delta, std::uint64_t seed) {
    if (!(delta >= 0.0)) throw InvalidArgument("add_noise: delta must be nonnegative");
    ObservationTrace out = trace;
    out.delta = delta;
    out.seed = seed;
    if (delta == 0.0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> e(trace.values.size());
    for (double& x : e) x = normal(rng);
    const double norm = trace_norm(trace.time, e);
    if (!(norm > 0.0)) throw InvalidArgument("add_noise: degenerate perturbation");
    for (std::size_t n = 0; n < e.size(); ++n) out.values[n] += delta / norm * e[n];
    return out;
}

}  // namespace piezotherm
