#pragma once

// Surface-charge observations: bulk integral, boundary window average,
// boundary-trace charge, and noise injection at a prescribed level.

#include <cstdint>
#include <string>
#include <vector>

#include "piezotherm/forward_solver.hpp"

namespace piezotherm {

enum class TraceKind { bulk, window, boundary };

const char* to_string(TraceKind kind);
TraceKind trace_kind_from_string(const std::string& s);

struct ObservationTrace {
    TimeGrid time;
    std::vector<double> values;  ///< one per time level
    TraceKind kind = TraceKind::bulk;
    double gamma = 0.0;
    double delta = 0.0;
    std::uint64_t seed = 0;
    std::string note;
    /// Bulk kind only, when requested: the same integral over (0, h/2).
    std::vector<double> lower_half;
};

/// Trapezoid L2(0,T) norm of a per-level series.
double trace_norm(const TimeGrid& time, std::span<const double> values);
double trace_distance(const ObservationTrace& a, const ObservationTrace& b);

/// Extended normal derivative on the window (h - gamma, h).
struct NormalExtension {
    double gamma = 0.0;
    double window_start = 0.0;
    double measure = 0.0;
    std::size_t first_node = 0;  ///< first grid node inside the window
    std::vector<double> n_z;     ///< values at nodes first_node..n_elem
    std::string note;
};

NormalExtension build_normal_extension(const SpatialGrid& grid, double gamma);

/// (1/|phi_e|) int (p2 u_z - p3 phi_z) phi_z at one level, phi = phi0 + chi.
double bulk_charge(const SpatialGrid& grid, std::span<const double> p2, std::span<const double> p3,
                   std::span<const double> u, std::span<const double> phi0, std::span<const double> chi,
                   double phi_e_norm, double upper = -1.0);

ObservationTrace observe_bulk_charge(const SpaceTimeField& u, const SpaceTimeField& phi0, const MaterialParams& f,
                                     const ExcitationLift& lift, bool with_lower_half = false);
ObservationTrace observe_bulk_charge(const StateTrajectory& traj, const MaterialParams& f,
                                     const ExcitationLift& lift, bool with_lower_half = false);

ObservationTrace observe_window_charge(const SpaceTimeField& u, const SpaceTimeField& phi0, const MaterialParams& f,
                                       const ExcitationLift& lift, double gamma);
ObservationTrace observe_window_charge(const StateTrajectory& traj, const MaterialParams& f,
                                       const ExcitationLift& lift, double gamma);

/// D(h) - D(0) with D = p2 u_z - p3 phi_z from one-sided second-order
/// differences; phi = phi0 + chi.
ObservationTrace observe_boundary_charge(const SpaceTimeField& u, const SpaceTimeField& phi0,
                                         const MaterialParams& f, const ExcitationLift& lift);
ObservationTrace observe_boundary_charge(const StateTrajectory& traj, const MaterialParams& f,
                                         const ExcitationLift& lift);

/// Gaussian perturbation rescaled to trapezoid L2(0,T) norm exactly delta.
ObservationTrace add_noise(const ObservationTrace& trace, double delta, std::uint64_t seed);

}  // namespace piezotherm
