#include "piezotherm/space_time.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "piezotherm/errors.hpp"

namespace piezotherm {

SpaceTimeField::SpaceTimeField(const SpatialGrid& grid, const TimeGrid& time, double fill)
    : grid_(grid), time_(time), data_(grid.n_nodes() * time.n_levels(), fill) {}

SpaceTimeField::SpaceTimeField(const SpatialGrid& grid, const TimeGrid& time, std::vector<double> data)
    : grid_(grid), time_(time), data_(std::move(data)) {
    if (data_.size() != grid_.n_nodes() * time_.n_levels()) {
        throw DimensionMismatch("SpaceTimeField: data length " + std::to_string(data_.size()) +
                                " does not match lattice size " +
                                std::to_string(grid_.n_nodes() * time_.n_levels()));
    }
}

SpaceTimeField SpaceTimeField::from_function(const SpatialGrid& grid, const TimeGrid& time,
                                             const std::function<double(double, double)>& g) {
    SpaceTimeField f(grid, time);
    for (std::size_t n = 0; n < time.n_levels(); ++n) {
        const double t = time.time(n);
        for (std::size_t i = 0; i < grid.n_nodes(); ++i) {
            f.at(n, i) = g(grid.node(i), t);
        }
    }
    return f;
}

void SpaceTimeField::set_level(std::size_t n, std::span<const double> values) {
    require_nodal(grid_, values, "SpaceTimeField::set_level");
    std::copy(values.begin(), values.end(), level(n).begin());
}

double SpaceTimeField::min() const { return *std::min_element(data_.begin(), data_.end()); }
double SpaceTimeField::max() const { return *std::max_element(data_.begin(), data_.end()); }

bool SpaceTimeField::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

bool SpaceTimeField::time_constant() const {
    const auto first = level(0);
    for (std::size_t n = 1; n < n_levels(); ++n) {
        if (!std::equal(first.begin(), first.end(), level(n).begin())) return false;
    }
    return true;
}

void require_same_lattice(const SpaceTimeField& a, const SpaceTimeField& b, const char* what) {
    if (!(a.grid() == b.grid()) || !(a.time() == b.time())) {
        throw DimensionMismatch(std::string(what) + ": fields live on different lattices");
    }
}

SpaceTimeField& SpaceTimeField::operator+=(const SpaceTimeField& other) {
    require_same_lattice(*this, other, "SpaceTimeField +=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
}

SpaceTimeField& SpaceTimeField::operator-=(const SpaceTimeField& other) {
    require_same_lattice(*this, other, "SpaceTimeField -=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
}

SpaceTimeField& SpaceTimeField::operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
}

SpaceTimeField operator+(SpaceTimeField a, const SpaceTimeField& b) { return a += b; }
SpaceTimeField operator-(SpaceTimeField a, const SpaceTimeField& b) { return a -= b; }
SpaceTimeField operator*(double s, SpaceTimeField a) { return a *= s; }

double space_time_l2_norm(const SpaceTimeField& f) {
    const double dz = f.grid().dz();
    const double dt = f.time().dt();
    double s = 0.0;
    for (std::size_t n = 0; n < f.time().n_step(); ++n) {
        for (std::size_t e = 0; e < f.grid().n_elem(); ++e) {
            for (std::size_t r = 0; r < 2; ++r) {
                for (std::size_t q = 0; q < 2; ++q) {
                    const double v = bilinear(f, n, e, GaussRule::points[q], GaussRule::points[r]);
                    s += GaussRule::weights[q] * GaussRule::weights[r] * v * v;
                }
            }
        }
    }
    return std::sqrt(s * dz * dt);
}

double space_time_l2_distance(const SpaceTimeField& a, const SpaceTimeField& b) {
    require_same_lattice(a, b, "space_time_l2_distance");
    return space_time_l2_norm(a - b);
}

}  // namespace piezotherm
