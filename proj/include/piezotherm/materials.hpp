#pragma once

// Material parameters, fixed physical coefficients, derived quantities and
// the Dirichlet lift of the electrode voltage.

#include <functional>
#include <string>
#include <vector>

#include "piezotherm/space_time.hpp"

namespace piezotherm {

/// Recipe for a space-time coefficient, sampled onto a lattice on demand.
class Coefficient {
public:
    enum class Kind { constant, affine, tabulated, function };

    static Coefficient constant(double value);
    /// c0 + cz * z + ct * t
    static Coefficient affine(double c0, double cz, double ct);
    /// Bilinear interpolation of values[it * z.size() + iz] on the
    /// tensor grid (z, t); constant extrapolation outside.
    static Coefficient tabulated(std::vector<double> z, std::vector<double> t, std::vector<double> values);
    static Coefficient function(std::function<double(double, double)> g);

    Kind kind() const noexcept { return kind_; }
    double operator()(double z, double t) const;
    SpaceTimeField sample(const SpatialGrid& grid, const TimeGrid& time) const;

private:
    Kind kind_ = Kind::constant;
    double c0_ = 0.0, cz_ = 0.0, ct_ = 0.0;
    std::vector<double> tz_, tt_, tv_;
    std::function<double(double, double)> g_;
};

/// Kelvin-Voigt relaxation time as a function of temperature.
class RelaxationLaw {
public:
    static RelaxationLaw constant(double tau0);
    /// Piecewise-linear through (theta[i], tau[i]); constant beyond the ends.
    static RelaxationLaw tabulated(std::vector<double> theta, std::vector<double> tau);
    static RelaxationLaw function(std::function<double(double)> tau, std::function<double(double)> dtau);

    double operator()(double theta) const;
    double derivative(double theta) const;
    bool is_constant() const noexcept { return kind_ == Kind::constant; }
    /// Temperatures at which the law changes slope (table abscissae).
    const std::vector<double>& breakpoints() const noexcept { return theta_; }

private:
    enum class Kind { constant, tabulated, function };
    Kind kind_ = Kind::constant;
    double tau0_ = 0.0;
    std::vector<double> theta_, tau_;
    std::function<double(double)> f_, df_;
};

/// The sought triple (p1, p2, p3).
struct MaterialParams {
    double p1;
    SpaceTimeField p2;
    SpaceTimeField p3;

    static MaterialParams constant(const SpatialGrid& grid, const TimeGrid& time, double p1, double p2,
                                   double p3);
};

struct PhysicalCoefficients {
    SpaceTimeField rho;
    SpaceTimeField c_th;
    SpaceTimeField k;
    double beta;
    RelaxationLaw tau;
    /// Envelope c_G <= tau(theta) * p1 <= C_G.
    double gamma_lower;
    double gamma_upper;

    /// b = c_th * rho on the lattice.
    SpaceTimeField b() const;
};

struct ExcitationLift {
    std::vector<double> phi_e;  ///< one value per time level
    SpaceTimeField chi;         ///< (z/h) * phi_e(t)
    double phi_e_norm;          ///< trapezoid L2(0,T) norm of phi_e
};

double effective_stiffness(double p1, double p2, double p3);
/// p = p1 + p2^2/p3 at every lattice point.
SpaceTimeField effective_stiffness(const MaterialParams& f);

/// Gamma = tau(theta) * p1, checked against the envelope.
double damping_coefficient(const PhysicalCoefficients& coeffs, double p1, double theta);

double heat_capacity_product(const PhysicalCoefficients& coeffs, std::size_t level, std::size_t node);

/// Throws InvalidArgument for an identically zero signal unless allow_zero.
ExcitationLift build_lift(std::vector<double> phi_e, const SpatialGrid& grid, const TimeGrid& time,
                          bool allow_zero = false);

/// A * sin(2 pi f t) for the first `cycles` periods, zero afterwards.
std::vector<double> sine_burst(const TimeGrid& time, double amplitude, double frequency, double cycles);

struct CoefficientRange {
    std::string name;
    double min;
    double max;
};

struct ValidationReport {
    std::vector<CoefficientRange> ranges;
    std::vector<std::string> failures;
    bool ok() const noexcept { return failures.empty(); }
};

/// Positivity of every coefficient and the damping envelope on theta in
/// [0, theta_max] (sampled, plus every table breakpoint).
ValidationReport validate(const PhysicalCoefficients& coeffs, const MaterialParams& f,
                          double theta_max = 1.0e4);

}  // namespace piezotherm
