#include "piezotherm/materials.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "piezotherm/errors.hpp"

namespace piezotherm {

namespace {

// Index of the interval of a sorted table containing x, with the
// fractional position clamped to [0, 1].
std::pair<std::size_t, double> locate(const std::vector<double>& xs, double x) {
    if (xs.size() == 1 || x <= xs.front()) return {0, 0.0};
    if (x >= xs.back()) return {xs.size() - 2, 1.0};
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - xs.begin()) - 1;
    return {j, (x - xs[j]) / (xs[j + 1] - xs[j])};
}

void require_increasing(const std::vector<double>& xs, const char* what) {
    if (xs.empty()) throw InvalidArgument(std::string(what) + ": empty table");
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (!(xs[i] > xs[i - 1])) {
            throw InvalidArgument(std::string(what) + ": abscissae must be strictly increasing");
        }
    }
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

}  // namespace

Coefficient Coefficient::constant(double value) { return affine(value, 0.0, 0.0); }

Coefficient Coefficient::affine(double c0, double cz, double ct) {
    Coefficient c;
    c.kind_ = (cz == 0.0 && ct == 0.0) ? Kind::constant : Kind::affine;
    c.c0_ = c0;
    c.cz_ = cz;
    c.ct_ = ct;
    return c;
}

Coefficient Coefficient::tabulated(std::vector<double> z, std::vector<double> t, std::vector<double> values) {
    require_increasing(z, "Coefficient::tabulated(z)");
    require_increasing(t, "Coefficient::tabulated(t)");
    if (values.size() != z.size() * t.size()) {
        throw DimensionMismatch("Coefficient::tabulated: expected z.size() * t.size() values");
    }
    Coefficient c;
    c.kind_ = Kind::tabulated;
    c.tz_ = std::move(z);
    c.tt_ = std::move(t);
    c.tv_ = std::move(values);
    return c;
}

Coefficient Coefficient::function(std::function<double(double, double)> g) {
    Coefficient c;
    c.kind_ = Kind::function;
    c.g_ = std::move(g);
    return c;
}

double Coefficient::operator()(double z, double t) const {
    switch (kind_) {
        case Kind::constant:
        case Kind::affine:
            return c0_ + cz_ * z + ct_ * t;
        case Kind::function:
            return g_(z, t);
        case Kind::tabulated: {
            const std::size_t nz = tz_.size();
            auto [iz, az] = locate(tz_, z);
            auto [it, at] = locate(tt_, t);
            const std::size_t iz1 = std::min(iz + 1, nz - 1);
            const std::size_t it1 = std::min(it + 1, tt_.size() - 1);
            const double v0 = (1.0 - az) * tv_[it * nz + iz] + az * tv_[it * nz + iz1];
            const double v1 = (1.0 - az) * tv_[it1 * nz + iz] + az * tv_[it1 * nz + iz1];
            return (1.0 - at) * v0 + at * v1;
        }
    }
    return 0.0;
}

SpaceTimeField Coefficient::sample(const SpatialGrid& grid, const TimeGrid& time) const {
    return SpaceTimeField::from_function(grid, time, [this](double z, double t) { return (*this)(z, t); });
}

RelaxationLaw RelaxationLaw::constant(double tau0) {
    RelaxationLaw r;
    r.kind_ = Kind::constant;
    r.tau0_ = tau0;
    return r;
}

RelaxationLaw RelaxationLaw::tabulated(std::vector<double> theta, std::vector<double> tau) {
    require_increasing(theta, "RelaxationLaw::tabulated");
    if (tau.size() != theta.size()) {
        throw DimensionMismatch("RelaxationLaw::tabulated: theta and tau tables differ in length");
    }
    RelaxationLaw r;
    r.kind_ = Kind::tabulated;
    r.theta_ = std::move(theta);
    r.tau_ = std::move(tau);
    return r;
}

RelaxationLaw RelaxationLaw::function(std::function<double(double)> tau, std::function<double(double)> dtau) {
    RelaxationLaw r;
    r.kind_ = Kind::function;
    r.f_ = std::move(tau);
    r.df_ = std::move(dtau);
    return r;
}

double RelaxationLaw::operator()(double theta) const {
    switch (kind_) {
        case Kind::constant:
            return tau0_;
        case Kind::function:
            return f_(theta);
        case Kind::tabulated: {
            if (theta_.size() == 1) return tau_[0];
            auto [j, a] = locate(theta_, theta);
            return (1.0 - a) * tau_[j] + a * tau_[j + 1];
        }
    }
    return 0.0;
}

double RelaxationLaw::derivative(double theta) const {
    switch (kind_) {
        case Kind::constant:
            return 0.0;
        case Kind::function:
            return df_(theta);
        case Kind::tabulated: {
            if (theta_.size() == 1 || theta <= theta_.front() || theta >= theta_.back()) return 0.0;
            auto [j, a] = locate(theta_, theta);
            (void)a;
            return (tau_[j + 1] - tau_[j]) / (theta_[j + 1] - theta_[j]);
        }
    }
    return 0.0;
}

MaterialParams MaterialParams::constant(const SpatialGrid& grid, const TimeGrid& time, double p1, double p2,
                                        double p3) {
    return MaterialParams{p1, SpaceTimeField(grid, time, p2), SpaceTimeField(grid, time, p3)};
}

SpaceTimeField PhysicalCoefficients::b() const {
    require_same_lattice(rho, c_th, "PhysicalCoefficients::b");
    SpaceTimeField out(rho.grid(), rho.time());
    for (std::size_t k = 0; k < out.data().size(); ++k) {
        out.data()[k] = rho.data()[k] * c_th.data()[k];
    }
    return out;
}

double effective_stiffness(double p1, double p2, double p3) {
    if (!(p3 > 0.0)) {
        throw InvalidArgument("effective_stiffness: p3 must be positive, got " + fmt(p3));
    }
    return p1 + p2 * p2 / p3;
}

SpaceTimeField effective_stiffness(const MaterialParams& f) {
    require_same_lattice(f.p2, f.p3, "effective_stiffness");
    SpaceTimeField p(f.p2.grid(), f.p2.time());
    for (std::size_t k = 0; k < p.data().size(); ++k) {
        p.data()[k] = effective_stiffness(f.p1, f.p2.data()[k], f.p3.data()[k]);
    }
    return p;
}

double damping_coefficient(const PhysicalCoefficients& coeffs, double p1, double theta) {
    if (!(theta >= 0.0)) {
        throw InvalidArgument("damping_coefficient: temperature must be nonnegative, got " + fmt(theta));
    }
    const double gamma = coeffs.tau(theta) * p1;
    if (!(gamma >= coeffs.gamma_lower && gamma <= coeffs.gamma_upper)) {
        throw InvalidArgument("damping_coefficient: damping " + fmt(gamma) + " at temperature " + fmt(theta) +
                              " leaves the envelope [" + fmt(coeffs.gamma_lower) + ", " +
                              fmt(coeffs.gamma_upper) + "]");
    }
    return gamma;
}

double heat_capacity_product(const PhysicalCoefficients& coeffs, std::size_t level, std::size_t node) {
    return coeffs.c_th.at(level, node) * coeffs.rho.at(level, node);
}

ExcitationLift build_lift(std::vector<double> phi_e, const SpatialGrid& grid, const TimeGrid& time,
                          bool allow_zero) {
    if (phi_e.size() != time.n_levels()) {
        throw DimensionMismatch("build_lift: excitation needs one value per time level");
    }
    const auto w = time.trapezoid_weights();
    double norm2 = 0.0;
    for (std::size_t n = 0; n < phi_e.size(); ++n) {
        if (!std::isfinite(phi_e[n])) throw InvalidArgument("build_lift: excitation must be finite");
        norm2 += w[n] * phi_e[n] * phi_e[n];
    }
    const double norm = std::sqrt(norm2);
    if (!(norm > 0.0) && !allow_zero) {
        throw InvalidArgument("build_lift: excitation signal is identically zero");
    }
    SpaceTimeField chi(grid, time);
    const double h = grid.length();
    for (std::size_t n = 0; n < time.n_levels(); ++n) {
        for (std::size_t i = 0; i < grid.n_nodes(); ++i) {
            chi.at(n, i) = grid.node(i) / h * phi_e[n];
        }
        chi.at(n, 0) = 0.0;
        chi.at(n, grid.n_elem()) = phi_e[n];
    }
    return ExcitationLift{std::move(phi_e), std::move(chi), norm};
}

std::vector<double> sine_burst(const TimeGrid& time, double amplitude, double frequency, double cycles) {
    std::vector<double> s(time.n_levels(), 0.0);
    const double t_end = frequency > 0.0 ? cycles / frequency : 0.0;
    for (std::size_t n = 0; n < s.size(); ++n) {
        const double t = time.time(n);
        if (t <= t_end) s[n] = amplitude * std::sin(2.0 * std::numbers::pi * frequency * t);
    }
    return s;
}

namespace {

void check_positive(ValidationReport& report, const char* name, const SpaceTimeField& f) {
    report.ranges.push_back({name, f.min(), f.max()});
    for (std::size_t n = 0; n < f.n_levels(); ++n) {
        for (std::size_t i = 0; i < f.n_nodes(); ++i) {
            const double v = f.at(n, i);
            if (!std::isfinite(v) || !(v > 0.0)) {
                report.failures.push_back(std::string(name) + " is not positive at node " + std::to_string(i) +
                                          ", level " + std::to_string(n) + " (value " + fmt(v) + ")");
                return;
            }
        }
    }
}

}  // namespace

ValidationReport validate(const PhysicalCoefficients& coeffs, const MaterialParams& f, double theta_max) {
    ValidationReport report;
    check_positive(report, "rho", coeffs.rho);
    check_positive(report, "c_th", coeffs.c_th);
    check_positive(report, "k", coeffs.k);
    check_positive(report, "p2", f.p2);
    check_positive(report, "p3", f.p3);

    report.ranges.push_back({"p1", f.p1, f.p1});
    if (!std::isfinite(f.p1) || !(f.p1 > 0.0)) report.failures.push_back("p1 is not positive (" + fmt(f.p1) + ")");
    report.ranges.push_back({"beta", coeffs.beta, coeffs.beta});
    if (!std::isfinite(coeffs.beta) || !(coeffs.beta > 0.0)) {
        report.failures.push_back("beta is not positive (" + fmt(coeffs.beta) + ")");
    }
    if (!(coeffs.gamma_lower > 0.0) || !(coeffs.gamma_lower <= coeffs.gamma_upper)) {
        report.failures.push_back("damping envelope bounds must satisfy 0 < lower <= upper");
    }

    std::vector<double> samples;
    constexpr int n_samples = 256;
    for (int j = 0; j <= n_samples; ++j) samples.push_back(theta_max * j / n_samples);
    for (double b : coeffs.tau.breakpoints()) {
        if (b >= 0.0 && b <= theta_max) samples.push_back(b);
    }
    std::sort(samples.begin(), samples.end());
    double gmin = INFINITY, gmax = -INFINITY;
    bool envelope_reported = false;
    for (double th : samples) {
        const double g = coeffs.tau(th) * f.p1;
        gmin = std::min(gmin, g);
        gmax = std::max(gmax, g);
        if (!envelope_reported && !(g >= coeffs.gamma_lower && g <= coeffs.gamma_upper)) {
            report.failures.push_back("damping envelope violated: tau(theta) * p1 = " + fmt(g) + " at theta = " +
                                      fmt(th) + " outside [" + fmt(coeffs.gamma_lower) + ", " +
                                      fmt(coeffs.gamma_upper) + "]");
            envelope_reported = true;
        }
    }
    report.ranges.push_back({"Gamma", gmin, gmax});

    if (f.p2.all_finite() && f.p3.all_finite() && f.p3.min() > 0.0) {
        const auto p = effective_stiffness(f);
        report.ranges.push_back({"p", p.min(), p.max()});
        const auto b = coeffs.b();
        report.ranges.push_back({"b", b.min(), b.max()});
    }
    return report;
}

}  // namespace piezotherm
