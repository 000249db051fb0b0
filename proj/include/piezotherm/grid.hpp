#pragma once

// Uniform 1D grids, P1 nodal fields, two-point Gauss quadrature and the
// banded solvers used by every other module.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace piezotherm {

/// Uniform partition of (0, h) into n_elem elements.
class SpatialGrid {
public:
    SpatialGrid(double length, std::size_t n_elem);

    double length() const noexcept { return length_; }
    std::size_t n_elem() const noexcept { return n_elem_; }
    std::size_t n_nodes() const noexcept { return n_elem_ + 1; }
    double dz() const noexcept { return length_ / static_cast<double>(n_elem_); }
    double node(std::size_t i) const noexcept;
    std::vector<double> nodes() const;

    bool operator==(const SpatialGrid&) const = default;

private:
    double length_;
    std::size_t n_elem_;
};

/// Uniform partition of (0, T) into n_step steps; levels 0..n_step.
class TimeGrid {
public:
    TimeGrid(double end_time, std::size_t n_step);

    double end_time() const noexcept { return end_time_; }
    std::size_t n_step() const noexcept { return n_step_; }
    std::size_t n_levels() const noexcept { return n_step_ + 1; }
    double dt() const noexcept { return end_time_ / static_cast<double>(n_step_); }
    double time(std::size_t level) const noexcept;

    /// Trapezoid weights for integrals over (0, T) sampled at the levels.
    std::vector<double> trapezoid_weights() const;

    bool operator==(const TimeGrid&) const = default;

private:
    double end_time_;
    std::size_t n_step_;
};

/// Nodal values of a continuous piecewise-linear function on a grid.
class NodalField {
public:
    explicit NodalField(const SpatialGrid& grid);
    NodalField(const SpatialGrid& grid, std::vector<double> values);

    const SpatialGrid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

private:
    SpatialGrid grid_;
    std::vector<double> values_;
};

/// Row i couples to i-1 through sub[i] and to i+1 through super[i];
/// sub[0] and super[n-1] are unused and kept at zero.
struct TridiagonalMatrix {
    std::vector<double> sub;
    std::vector<double> main;
    std::vector<double> super;

    TridiagonalMatrix() = default;
    explicit TridiagonalMatrix(std::size_t n);

    std::size_t size() const noexcept { return main.size(); }
    std::vector<double> apply(std::span<const double> x) const;
    double norm_inf() const;
    double total_sum() const;
    /// Row sums, i.e. the lumped diagonal.
    std::vector<double> row_sums() const;
    /// Replaces row i with the identity row.
    void set_identity_row(std::size_t i);
    TridiagonalMatrix& operator+=(const TridiagonalMatrix& other);
    TridiagonalMatrix& operator*=(double s);
};

/// Two-point Gauss rule on the reference element [0, 1].
struct GaussRule {
    static constexpr std::array<double, 2> points{0.21132486540518711775, 0.78867513459481288225};
    static constexpr std::array<double, 2> weights{0.5, 0.5};
};

/// Linear interpolation of nodal data at reference coordinate xi in element e.
inline double interpolate(std::span<const double> f, std::size_t e, double xi) {
    return (1.0 - xi) * f[e] + xi * f[e + 1];
}

TridiagonalMatrix assemble_weighted_mass(const SpatialGrid& grid, std::span<const double> weight);
TridiagonalMatrix assemble_weighted_stiffness(const SpatialGrid& grid, std::span<const double> weight);

/// Load vector b_i = ∫ w f_z ψ_i' dz for nodal f and w.
std::vector<double> gradient_load(const SpatialGrid& grid, std::span<const double> weight,
                                  std::span<const double> f);

/// Thomas elimination. Throws SingularPivot naming the failing row.
std::vector<double> solve_tridiagonal(const TridiagonalMatrix& a, std::span<const double> rhs);

/// 2x2 blocks stored row-major: {a00, a01, a10, a11}.
using Block2 = std::array<double, 4>;

/// Block tridiagonal matrix with 2x2 blocks, used for the mixed
/// splitting of the fourth-order operator.
struct BlockTridiagonal {
    std::vector<Block2> sub;
    std::vector<Block2> main;
    std::vector<Block2> super;

    explicit BlockTridiagonal(std::size_t n);
    std::size_t size() const noexcept { return main.size(); }
    /// x and the result are interleaved pairs (x0_0, x1_0, x0_1, ...).
    std::vector<double> apply(std::span<const double> x) const;
};

std::vector<double> solve_block_tridiagonal(const BlockTridiagonal& a, std::span<const double> rhs);

double integrate(const SpatialGrid& grid, std::span<const double> f);
double integrate_product(const SpatialGrid& grid, std::span<const double> f, std::span<const double> g);
double integrate_product(const SpatialGrid& grid, std::span<const double> f, std::span<const double> g,
                         std::span<const double> weight);
double l2_norm(const SpatialGrid& grid, std::span<const double> f);
double h1_seminorm(const SpatialGrid& grid, std::span<const double> f);

double integrate(const NodalField& f);
double integrate_product(const NodalField& f, const NodalField& g);
double l2_norm(const NodalField& f);
double h1_seminorm(const NodalField& f);

/// Throws DimensionMismatch unless f has one value per grid node.
void require_nodal(const SpatialGrid& grid, std::span<const double> f, const char* what);

}  // namespace piezotherm
