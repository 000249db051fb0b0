#include "piezotherm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "piezotherm/errors.hpp"

namespace piezotherm {

SpatialGrid::SpatialGrid(double length, std::size_t n_elem) : length_(length), n_elem_(n_elem) {
    if (n_elem < 2) {
        throw InvalidArgument("SpatialGrid: n_elem must be at least 2");
    }
    if (!(length > 0.0) || !std::isfinite(length)) {
        throw InvalidArgument("SpatialGrid: domain length must be positive and finite");
    }
}

double SpatialGrid::node(std::size_t i) const noexcept {
    if (i == n_elem_) {
        return length_;
    }
    return length_ * static_cast<double>(i) / static_cast<double>(n_elem_);
}

std::vector<double> SpatialGrid::nodes() const {
    std::vector<double> z(n_nodes());
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = node(i);
    }
    return z;
}

TimeGrid::TimeGrid(double end_time, std::size_t n_step) : end_time_(end_time), n_step_(n_step) {
    if (n_step < 1) {
        throw InvalidArgument("TimeGrid: n_step must be at least 1");
    }
    if (!(end_time > 0.0) || !std::isfinite(end_time)) {
        throw InvalidArgument("TimeGrid: end time must be positive and finite");
    }
}

double TimeGrid::time(std::size_t level) const noexcept {
    if (level == n_step_) {
        return end_time_;
    }
    return end_time_ * static_cast<double>(level) / static_cast<double>(n_step_);
}

std::vector<double> TimeGrid::trapezoid_weights() const {
    std::vector<double> w(n_levels(), dt());
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

NodalField::NodalField(const SpatialGrid& grid) : grid_(grid), values_(grid.n_nodes(), 0.0) {}

NodalField::NodalField(const SpatialGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    require_nodal(grid_, values_, "NodalField");
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw InvalidArgument("NodalField: values must be finite");
        }
    }
}

TridiagonalMatrix::TridiagonalMatrix(std::size_t n) : sub(n, 0.0), main(n, 0.0), super(n, 0.0) {}

std::vector<double> TridiagonalMatrix::apply(std::span<const double> x) const {
    const std::size_t n = size();
    if (x.size() != n) {
        throw DimensionMismatch("TridiagonalMatrix::apply: vector length does not match matrix");
    }
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = main[i] * x[i];
        if (i > 0) s += sub[i] * x[i - 1];
        if (i + 1 < n) s += super[i] * x[i + 1];
        y[i] = s;
    }
    return y;
}

double TridiagonalMatrix::norm_inf() const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        m = std::max(m, std::abs(sub[i]) + std::abs(main[i]) + std::abs(super[i]));
    }
    return m;
}

double TridiagonalMatrix::total_sum() const {
    const double s = std::accumulate(main.begin(), main.end(), 0.0);
    const double l = std::accumulate(sub.begin(), sub.end(), 0.0);
    const double u = std::accumulate(super.begin(), super.end(), 0.0);
    return s + l + u;
}

std::vector<double> TridiagonalMatrix::row_sums() const {
    std::vector<double> r(size());
    for (std::size_t i = 0; i < size(); ++i) {
        r[i] = sub[i] + main[i] + super[i];
    }
    return r;
}

void TridiagonalMatrix::set_identity_row(std::size_t i) {
    sub[i] = 0.0;
    super[i] = 0.0;
    main[i] = 1.0;
}

TridiagonalMatrix& TridiagonalMatrix::operator+=(const TridiagonalMatrix& other) {
    if (other.size() != size()) {
        throw DimensionMismatch("TridiagonalMatrix: size mismatch in addition");
    }
    for (std::size_t i = 0; i < size(); ++i) {
        sub[i] += other.sub[i];
        main[i] += other.main[i];
        super[i] += other.super[i];
    }
    return *this;
}

TridiagonalMatrix& TridiagonalMatrix::operator*=(double s) {
    for (std::size_t i = 0; i < size(); ++i) {
        sub[i] *= s;
        main[i] *= s;
        super[i] *= s;
    }
    return *this;
}

void require_nodal(const SpatialGrid& grid, std::span<const double> f, const char* what) {
    if (f.size() != grid.n_nodes()) {
        throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(grid.n_nodes()) +
                                " nodal values, got " + std::to_string(f.size()));
    }
}

TridiagonalMatrix assemble_weighted_mass(const SpatialGrid& grid, std::span<const double> weight) {
    require_nodal(grid, weight, "assemble_weighted_mass");
    TridiagonalMatrix m(grid.n_nodes());
    const double dz = grid.dz();
    for (std::size_t e = 0; e < grid.n_elem(); ++e) {
        double m00 = 0.0, m01 = 0.0, m11 = 0.0;
        for (std::size_t q = 0; q < 2; ++q) {
            const double xi = GaussRule::points[q];
            const double wq = GaussRule::weights[q] * dz * interpolate(weight, e, xi);
            const double n0 = 1.0 - xi;
            const double n1 = xi;
            m00 += wq * n0 * n0;
            m01 += wq * n0 * n1;
            m11 += wq * n1 * n1;
        }
        m.main[e] += m00;
        m.main[e + 1] += m11;
        m.super[e] += m01;
        m.sub[e + 1] += m01;
    }
    return m;
}

TridiagonalMatrix assemble_weighted_stiffness(const SpatialGrid& grid, std::span<const double> weight) {
    require_nodal(grid, weight, "assemble_weighted_stiffness");
    TridiagonalMatrix k(grid.n_nodes());
    const double dz = grid.dz();
    for (std::size_t e = 0; e < grid.n_elem(); ++e) {
        // Gauss average of a linear weight is its midpoint value.
        double wbar = 0.0;
        for (std::size_t q = 0; q < 2; ++q) {
            wbar += GaussRule::weights[q] * interpolate(weight, e, GaussRule::points[q]);
        }
        const double c = wbar / dz;
        k.main[e] += c;
        k.main[e + 1] += c;
        k.super[e] -= c;
        k.sub[e + 1] -= c;
    }
    return k;
}

std::vector<double> gradient_load(const SpatialGrid& grid, std::span<const double> weight,
                                  std::span<const double> f) {
    require_nodal(grid, weight, "gradient_load(weight)");
    require_nodal(grid, f, "gradient_load(field)");
    std::vector<double> b(grid.n_nodes(), 0.0);
    const double dz = grid.dz();
    for (std::size_t e = 0; e < grid.n_elem(); ++e) {
        double wbar = 0.0;
        for (std::size_t q = 0; q < 2; ++q) {
            wbar += GaussRule::weights[q] * interpolate(weight, e, GaussRule::points[q]);
        }
        const double flux = wbar * (f[e + 1] - f[e]) / dz;
        b[e] -= flux;
        b[e + 1] += flux;
    }
    return b;
}

std::vector<double> solve_tridiagonal(const TridiagonalMatrix& a, std::span<const double> rhs) {
    const std::size_t n = a.size();
    if (rhs.size() != n || a.sub.size() != n || a.super.size() != n) {
        throw DimensionMismatch("solve_tridiagonal: inconsistent dimensions");
    }
    if (n == 0) {
        return {};
    }
    const double scale = std::max(a.norm_inf(), 1e-300);
    const double tiny = 1e-14 * scale;
    std::vector<double> c(n, 0.0);
    std::vector<double> x(n, 0.0);
    double pivot = a.main[0];
    if (!(std::abs(pivot) > tiny)) {
        throw SingularPivot(0, "solve_tridiagonal: singular pivot at row 0");
    }
    c[0] = a.super[0] / pivot;
    x[0] = rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = a.main[i] - a.sub[i] * c[i - 1];
        if (!(std::abs(pivot) > tiny)) {
            throw SingularPivot(i, "solve_tridiagonal: singular pivot at row " + std::to_string(i));
        }
        c[i] = (i + 1 < n) ? a.super[i] / pivot : 0.0;
        x[i] = (rhs[i] - a.sub[i] * x[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        x[i] -= c[i] * x[i + 1];
    }
    return x;
}

BlockTridiagonal::BlockTridiagonal(std::size_t n)
    : sub(n, Block2{0, 0, 0, 0}), main(n, Block2{0, 0, 0, 0}), super(n, Block2{0, 0, 0, 0}) {}

namespace {

using Pair = std::array<double, 2>;

Pair mul(const Block2& a, const Pair& x) {
    return {a[0] * x[0] + a[1] * x[1], a[2] * x[0] + a[3] * x[1]};
}

Block2 mul(const Block2& a, const Block2& b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

double block_norm(const Block2& a) {
    return std::max(std::abs(a[0]) + std::abs(a[1]), std::abs(a[2]) + std::abs(a[3]));
}

}  // namespace

std::vector<double> BlockTridiagonal::apply(std::span<const double> x) const {
    const std::size_t n = size();
    if (x.size() != 2 * n) {
        throw DimensionMismatch("BlockTridiagonal::apply: vector length does not match matrix");
    }
    std::vector<double> y(2 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto acc = mul(main[i], Pair{x[2 * i], x[2 * i + 1]});
        if (i > 0) {
            const auto l = mul(sub[i], Pair{x[2 * i - 2], x[2 * i - 1]});
            acc[0] += l[0];
            acc[1] += l[1];
        }
        if (i + 1 < n) {
            const auto u = mul(super[i], Pair{x[2 * i + 2], x[2 * i + 3]});
            acc[0] += u[0];
            acc[1] += u[1];
        }
        y[2 * i] = acc[0];
        y[2 * i + 1] = acc[1];
    }
    return y;
}

std::vector<double> solve_block_tridiagonal(const BlockTridiagonal& a, std::span<const double> rhs) {
    const std::size_t n = a.size();
    if (rhs.size() != 2 * n) {
        throw DimensionMismatch("solve_block_tridiagonal: inconsistent dimensions");
    }
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        scale = std::max(scale, block_norm(a.sub[i]) + block_norm(a.main[i]) + block_norm(a.super[i]));
    }
    const double tiny = 1e-14 * std::max(scale, 1e-300);

    std::vector<Block2> c(n);
    std::vector<std::array<double, 2>> y(n);
    Block2 d = a.main[0];
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            const Block2 lc = mul(a.sub[i], c[i - 1]);
            d = {a.main[i][0] - lc[0], a.main[i][1] - lc[1], a.main[i][2] - lc[2], a.main[i][3] - lc[3]};
        }
        const double det = d[0] * d[3] - d[1] * d[2];
        if (!(std::abs(det) > tiny * std::max(block_norm(d), tiny))) {
            throw SingularPivot(i, "solve_block_tridiagonal: singular pivot block at row " + std::to_string(i));
        }
        const Block2 inv{d[3] / det, -d[1] / det, -d[2] / det, d[0] / det};
        c[i] = (i + 1 < n) ? mul(inv, a.super[i]) : Block2{0, 0, 0, 0};
        std::array<double, 2> r{rhs[2 * i], rhs[2 * i + 1]};
        if (i > 0) {
            const auto l = mul(a.sub[i], y[i - 1]);
            r[0] -= l[0];
            r[1] -= l[1];
        }
        y[i] = mul(inv, r);
    }
    std::vector<double> x(2 * n);
    x[2 * n - 2] = y[n - 1][0];
    x[2 * n - 1] = y[n - 1][1];
    for (std::size_t i = n - 1; i-- > 0;) {
        const auto cx = mul(c[i], Pair{x[2 * i + 2], x[2 * i + 3]});
        x[2 * i] = y[i][0] - cx[0];
        x[2 * i + 1] = y[i][1] - cx[1];
    }
    return x;
}

double integrate(const SpatialGrid& grid, std::span<const double> f) {
    require_nodal(grid, f, "integrate");
    double s = 0.0;
    for (std::size_t e = 0; e < grid.n_elem(); ++e) {
        s += 0.5 * (f[e] + f[e + 1]);
    }
    return s * grid.dz();
}

double integrate_product(const SpatialGrid& grid, std::span<const double> f, std::span<const double> g) {
    require_nodal(grid, f, "integrate_product(f)");
    require_nodal(grid, g, "integrate_product(g)");
    double s = 0.0;
    for (std::size_t e = 0; e < grid.n_elem(); ++e) {
        for (std::size_t q = 0; q < 2; ++q) {
            const double xi = GaussRule::points[q];
            s += GaussRule::weights[q] * interpolate(f, e, xi) * interpolate(g, e, xi);
        }
    }
    return s * grid.dz();
}

double integrate_product(const SpatialGrid& grid, std::span<const double> f, std::span<const double> g,
                         std::span<const double> weight) {
    require_nodal(grid, f, "integrate_product(f)");
    require_nodal(grid, g, "integrate_product(g)");
    require_nodal(grid, weight, "integrate_product(weight)");
    double s = 0.0;
    for (std::size_t e = 0; e < grid.n_elem(); ++e) {
        for (std::size_t q = 0; q < 2; ++q) {
            const double xi = GaussRule::points[q];
            s += GaussRule::weights[q] * interpolate(weight, e, xi) * interpolate(f, e, xi) *
                 interpolate(g, e, xi);
        }
    }
    return s * grid.dz();
}

double l2_norm(const SpatialGrid& grid, std::span<const double> f) {
    return std::sqrt(std::max(0.0, integrate_product(grid, f, f)));
}

double h1_seminorm(const SpatialGrid& grid, std::span<const double> f) {
    require_nodal(grid, f, "h1_seminorm");
    double s = 0.0;
    for (std::size_t e = 0; e < grid.n_elem(); ++e) {
        const double d = f[e + 1] - f[e];
        s += d * d;
    }
    return std::sqrt(s / grid.dz());
}

namespace {
void require_same_grid(const NodalField& f, const NodalField& g) {
    if (!(f.grid() == g.grid())) {
        throw DimensionMismatch("nodal fields live on different grids");
    }
}
}  // namespace

double integrate(const NodalField& f) { return integrate(f.grid(), f.values()); }

double integrate_product(const NodalField& f, const NodalField& g) {
    require_same_grid(f, g);
    return integrate_product(f.grid(), f.values(), g.values());
}

double l2_norm(const NodalField& f) { return l2_norm(f.grid(), f.values()); }
double h1_seminorm(const NodalField& f) { return h1_seminorm(f.grid(), f.values()); }

}  // namespace piezotherm
