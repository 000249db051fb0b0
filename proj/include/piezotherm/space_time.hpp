#pragma once

// Nodal data on the (space grid x time levels) lattice, stored level-major.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "piezotherm/grid.hpp"

namespace piezotherm {

class SpaceTimeField {
public:
    SpaceTimeField(const SpatialGrid& grid, const TimeGrid& time, double fill = 0.0);
    SpaceTimeField(const SpatialGrid& grid, const TimeGrid& time, std::vector<double> data);

    /// Samples g(z, t) at every lattice point.
    static SpaceTimeField from_function(const SpatialGrid& grid, const TimeGrid& time,
                                        const std::function<double(double, double)>& g);

    const SpatialGrid& grid() const noexcept { return grid_; }
    const TimeGrid& time() const noexcept { return time_; }
    std::size_t n_levels() const noexcept { return time_.n_levels(); }
    std::size_t n_nodes() const noexcept { return grid_.n_nodes(); }

    double at(std::size_t level, std::size_t node) const { return data_[level * n_nodes() + node]; }
    double& at(std::size_t level, std::size_t node) { return data_[level * n_nodes() + node]; }

    std::span<const double> level(std::size_t n) const {
        return {data_.data() + n * n_nodes(), n_nodes()};
    }
    std::span<double> level(std::size_t n) { return {data_.data() + n * n_nodes(), n_nodes()}; }
    void set_level(std::size_t n, std::span<const double> values);

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    double min() const;
    double max() const;
    bool all_finite() const;
    /// True when every level equals level 0.
    bool time_constant() const;

    SpaceTimeField& operator+=(const SpaceTimeField& other);
    SpaceTimeField& operator-=(const SpaceTimeField& other);
    SpaceTimeField& operator*=(double s);

private:
    SpatialGrid grid_;
    TimeGrid time_;
    std::vector<double> data_;
};

SpaceTimeField operator+(SpaceTimeField a, const SpaceTimeField& b);
SpaceTimeField operator-(SpaceTimeField a, const SpaceTimeField& b);
SpaceTimeField operator*(double s, SpaceTimeField a);

void require_same_lattice(const SpaceTimeField& a, const SpaceTimeField& b, const char* what);

/// Bilinear value inside cell (element e, step n) at reference (xi, eta) in [0,1]^2.
inline double bilinear(const SpaceTimeField& f, std::size_t n, std::size_t e, double xi, double eta) {
    const double a = (1.0 - xi) * f.at(n, e) + xi * f.at(n, e + 1);
    const double b = (1.0 - xi) * f.at(n + 1, e) + xi * f.at(n + 1, e + 1);
    return (1.0 - eta) * a + eta * b;
}

/// L2(Omega x (0,T)) norm of the bilinear interpolant, 2x2 Gauss per cell.
double space_time_l2_norm(const SpaceTimeField& f);
double space_time_l2_distance(const SpaceTimeField& a, const SpaceTimeField& b);

}  // namespace piezotherm
