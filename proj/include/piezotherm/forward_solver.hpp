#pragma once

// Staggered semi-implicit time stepping of the regularized (epsilon > 0)
// and physical (epsilon = 0) systems with the electric potential
// eliminated through p = p1 + p2^2/p3.

#include <functional>
#include <string>
#include <vector>

#include "piezotherm/materials.hpp"

namespace piezotherm {

struct InitialData {
    NodalField u0;
    NodalField u1;
    NodalField theta0;

    static InitialData zero(const SpatialGrid& grid);
    /// Throws InvalidArgument on negative theta0 or u0 != 0 at the boundary.
    void validate() const;
};

struct SolverConfig {
    double epsilon = 0.0;
    bool theta_floor_monitoring = true;
};

/// Everything the time stepper needs besides the initial data.
struct Model {
    SpatialGrid grid;
    TimeGrid time;
    PhysicalCoefficients coeffs;
    MaterialParams params;
    ExcitationLift lift;

    /// Throws DimensionMismatch if any lattice field disagrees with grid/time.
    void check() const;
};

/// One time level of the state.
struct StepState {
    std::vector<double> u;
    std::vector<double> v;
    std::vector<double> theta;
    std::vector<double> phi0;
};

struct StateTrajectory {
    SpaceTimeField u;
    SpaceTimeField v;
    SpaceTimeField theta;
    SpaceTimeField phi0;
    InitialData initial;
    double epsilon = 0.0;
    double min_theta = 0.0;
    double max_theta = 0.0;
    std::vector<std::string> warnings;

    StepState state(std::size_t level) const;
};

/// Galerkin solution of the electrostatic row with phi0 = 0 on the boundary:
/// int p3 phi0_z w_z = int p2 u_z w_z - int p3 chi_z w_z.
std::vector<double> solve_potential(const SpatialGrid& grid, std::span<const double> p2,
                                    std::span<const double> p3, std::span<const double> chi,
                                    std::span<const double> u);
std::vector<double> solve_potential(const Model& model, std::size_t level, std::span<const double> u);

/// Advances level n to n + 1. The regularized variant requires epsilon > 0.
StepState step_regularized(const StepState& s, const Model& model, const SolverConfig& config, std::size_t n);
StepState step_physical(const StepState& s, const Model& model, const SolverConfig& config, std::size_t n);

using StepHook = std::function<void(std::size_t level, const StepState&)>;

StateTrajectory run_forward(const InitialData& init, const Model& model, const SolverConfig& config,
                            const StepHook& hook = {});

/// Implicit diffusion smoothing with total diffusion time strength * h^2.
InitialData mollify_initial_data(const InitialData& init, double strength);

/// Wave-resolution heuristic: dt * sqrt(p/rho) > dz somewhere.
std::vector<std::string> stability_warnings(const Model& model);

}  // namespace piezotherm
