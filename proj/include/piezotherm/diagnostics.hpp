#pragma once

// Runtime monitors for the energy balance, the a-priori functionals and
// the weak formulation, plus Steklov averaging and epsilon sweeps.

#include <vector>

#include "piezotherm/forward_solver.hpp"
#include "piezotherm/test_functions.hpp"

namespace piezotherm {

/// One row per time level. The balance reads
/// d_kinetic + d_elastic + dissipation + eps_vzz + eps_p_uzz + eps_pz_uz_uzz
///   = thermal + rho_t + p_t.
struct EnergyRow {
    double time = 0.0;
    double kinetic = 0.0;  ///< (1/2) int rho v^2
    double elastic = 0.0;  ///< (1/2) int p u_z^2
    double d_kinetic = 0.0;
    double d_elastic = 0.0;
    double dissipation = 0.0;  ///< int Gamma(theta) v_z^2
    double eps_vzz = 0.0;
    double eps_p_uzz = 0.0;
    double eps_pz_uz_uzz = 0.0;
    double thermal = 0.0;  ///< beta int theta v_z
    double rho_t = 0.0;    ///< (1/2) int rho_t v^2
    double p_t = 0.0;      ///< (1/2) int p_t u_z^2
    double residual = 0.0;
};

struct EnergyReport {
    std::vector<EnergyRow> rows;
    double aggregate_residual = 0.0;  ///< L2(0,T) norm of the residual column
    double max_residual = 0.0;
    double scale = 0.0;  ///< L2(0,T) norm of the sum of |terms|
};

EnergyReport energy_identity_residual(const StateTrajectory& traj, const Model& model);

struct AprioriBoundReport {
    double sup_v2 = 0.0;
    double sup_u2 = 0.0;
    double sup_uz2 = 0.0;
    double sup_theta = 0.0;
    double eps_vzz2 = 0.0;  ///< eps int int v_zz^2
    double eps_uzz2 = 0.0;  ///< eps int int u_zz^2
    std::vector<double> q_values;
    std::vector<double> theta_moments;  ///< int int (theta + 1)^q
    std::vector<double> r_values;
    std::vector<double> gradient_moments;  ///< int int |theta_z|^r
    double vz2 = 0.0;                      ///< int int v_z^2
    double weighted_gradient = 0.0;        ///< int int (theta + 1)^(-3/2) theta_z^2
    double moment_ratio = 0.0;             ///< q = 2.9 moment over q = 1.5 moment
    bool moment_growth_flag = false;       ///< moment_ratio above 2
    std::vector<double> times;
    std::vector<double> energy;  ///< y(t)
    double gronwall_rate = 0.0;  ///< least-squares c in log(y/y0) ~ c t
    double gronwall_fit_rms = 0.0;
    bool gronwall_ok = true;
    bool all_finite = true;
};

AprioriBoundReport apriori_monitor(const StateTrajectory& traj, const Model& model);

struct WeakResidualRow {
    double momentum = 0.0;  ///< raw residual of the momentum identity
    double heat = 0.0;      ///< raw residual of the heat identity
    double norm_sine = 0.0;
    double norm_cosine = 0.0;
    double momentum_normalized = 0.0;
    double heat_normalized = 0.0;
};

struct WeakResidualReport {
    std::vector<WeakResidualRow> rows;
    double max_momentum = 0.0;
    double max_heat = 0.0;
    double max_normalized = 0.0;
};

/// Momentum identity tested with sine modes, heat identity with cosine
/// modes; initial values come from traj.initial.
WeakResidualReport weak_residual(const StateTrajectory& traj, const Model& model,
                                 const TestFunctionFamily& tests);

enum class SteklovRule {
    trapezoid,   ///< piecewise-linear in time
    right_point  ///< value at level m held on (t_{m-1}, t_m]
};

/// Backward average (1/h) int_{t-h}^t f(s) ds at every level; f(s) = f(0)
/// for s < 0. `levels` holds one vector per time level.
std::vector<std::vector<double>> steklov_average(const std::vector<std::vector<double>>& levels,
                                                 const TimeGrid& time, double h_avg,
                                                 SteklovRule rule = SteklovRule::trapezoid);
SpaceTimeField steklov_average(const SpaceTimeField& f, double h_avg, SteklovRule rule = SteklovRule::trapezoid);

/// Per-element gradient of every level of a nodal field.
std::vector<std::vector<double>> element_gradients(const SpaceTimeField& f);

struct EpsilonStudyReport {
    std::vector<double> eps;
    /// distance to the epsilon = 0 run, per entry of eps
    std::vector<double> dist_u, dist_v, dist_theta;
    /// distance between consecutive entries (size eps.size() - 1)
    std::vector<double> step_u, step_v, step_theta;
    std::vector<AprioriBoundReport> bounds;  ///< per entry of eps
    AprioriBoundReport bounds_limit;         ///< epsilon = 0
    bool distance_decreasing = false;
    bool cauchy_decreasing = false;
};

/// eps_list must be non-increasing, positive and have at least 2 entries.
EpsilonStudyReport epsilon_convergence_study(const InitialData& init, const Model& model,
                                             const std::vector<double>& eps_list);

}  // namespace piezotherm
