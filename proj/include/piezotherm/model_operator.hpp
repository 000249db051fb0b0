#pragma once

// Discrete all-at-once model operator A(f, l) tested against a finite
// space-time basis, its derivatives in the state and in the parameters,
// their transposes, and the forward operator F = (A, C).

#include <cstdint>
#include <vector>

#include "piezotherm/observation.hpp"
#include "piezotherm/test_functions.hpp"

namespace piezotherm {

/// mu and w use sine modes (vanish on the boundary), nu uses cosine modes.
struct DiscreteTestBasis {
    TestFunctionFamily momentum;
    TestFunctionFamily potential;
    TestFunctionFamily heat;

    static DiscreteTestBasis random(std::size_t m, double length, double end_time, std::uint64_t seed);
    std::size_t size() const noexcept { return momentum.size(); }
};

/// The state l = (u, phi0, theta) with the fixed initial velocity u1.
struct State {
    SpaceTimeField u;
    SpaceTimeField phi0;
    SpaceTimeField theta;
    NodalField u1;

    static State from_trajectory(const StateTrajectory& traj);
};

/// Direction xi = (eta, omega, kappa) in the state.
struct StateTangent {
    SpaceTimeField eta;
    SpaceTimeField omega;
    SpaceTimeField kappa;

    static StateTangent zero(const SpatialGrid& grid, const TimeGrid& time);
};

/// Direction q = (q1, q2, q3) in the parameters.
struct ParamTangent {
    double q1 = 0.0;
    SpaceTimeField q2;
    SpaceTimeField q3;

    static ParamTangent zero(const SpatialGrid& grid, const TimeGrid& time);
};

struct OperatorImage {
    std::vector<double> momentum;
    std::vector<double> potential;
    std::vector<double> heat;
    std::vector<double> observation;  ///< empty for the model operator alone

    std::vector<double> model_block() const;  ///< momentum, potential, heat
    double norm_inf() const;
    double model_norm_inf() const;
    double model_norm2() const;
    OperatorImage& operator-=(const OperatorImage& other);
    OperatorImage& operator+=(const OperatorImage& other);
};

/// Evaluates A and its derivatives for one model (coefficients, grids,
/// lift) and one basis. Test-function tables are built once.
class ModelOperator {
public:
    ModelOperator(const Model& model, DiscreteTestBasis basis);

    const Model& model() const noexcept { return model_; }
    const DiscreteTestBasis& basis() const noexcept { return basis_; }

    OperatorImage apply(const MaterialParams& f, const State& l) const;
    OperatorImage state_derivative(const MaterialParams& f, const State& l, const StateTangent& xi) const;
    OperatorImage param_derivative(const MaterialParams& f, const State& l, const ParamTangent& q) const;

    /// A_l^T r: gradient of <r, A(f, .)> at l, one entry per nodal value.
    StateTangent state_adjoint(const MaterialParams& f, const State& l, const OperatorImage& r) const;
    /// A_f^T r.
    ParamTangent param_adjoint(const MaterialParams& f, const State& l, const OperatorImage& r) const;

private:
    struct Tables;
    Model model_;
    DiscreteTestBasis basis_;
    std::vector<TestTables> mu_, w_, nu_;
};

OperatorImage apply_model_operator(const Model& model, const MaterialParams& f, const State& l,
                                   const DiscreteTestBasis& basis);

/// A(f, l) followed by the bulk (or window, with gamma) observation block.
OperatorImage apply_forward_operator(const Model& model, const MaterialParams& f, const State& l,
                                     const DiscreteTestBasis& basis, TraceKind kind, double gamma = 0.0);

OperatorImage frechet_state(const Model& model, const MaterialParams& f, const State& l, const StateTangent& xi,
                            const DiscreteTestBasis& basis);
OperatorImage frechet_param(const Model& model, const MaterialParams& f, const State& l, const ParamTangent& q,
                            const DiscreteTestBasis& basis);

/// The heat-row block int int (beta eta_zt kappa - Gamma eta_zt^2) nu left
/// over by the linearization in the state (constant relaxation law).
OperatorImage state_taylor_remainder(const Model& model, const MaterialParams& f, const State& l,
                                     const StateTangent& xi, const DiscreteTestBasis& basis);

struct ObservationDerivatives {
    std::vector<double> state;  ///< C_l(f, l) xi per level
    std::vector<double> param;  ///< C_f(f, l) q per level
};

ObservationDerivatives observation_derivatives(const MaterialParams& f, const State& l, const StateTangent& xi,
                                               const ParamTangent& q, const ExcitationLift& lift);

/// Gradients of sum_n a_n C_n(f, l) in the state (eta = u part,
/// omega = phi0 part) and in the parameters.
StateTangent observation_state_adjoint(const MaterialParams& f, const State& l, std::span<const double> a,
                                       const ExcitationLift& lift);
ParamTangent observation_param_adjoint(const MaterialParams& f, const State& l, std::span<const double> a,
                                       const ExcitationLift& lift);

}  // namespace piezotherm
