#include "piezotherm/test_functions.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "piezotherm/errors.hpp"

namespace piezotherm {

double TestFunction::spatial(SpatialShape shape, double z, double length) const {
    const double k = mode * std::numbers::pi / length;
    return amplitude * (shape == SpatialShape::sine ? std::sin(k * z) : std::cos(k * z));
}

double TestFunction::spatial_derivative(SpatialShape shape, double z, double length) const {
    const double k = mode * std::numbers::pi / length;
    return amplitude * (shape == SpatialShape::sine ? k * std::cos(k * z) : -k * std::sin(k * z));
}

double TestFunction::window(double t) const {
    if (t >= cutoff) return 0.0;
    return std::pow(1.0 - t / cutoff, power);
}

double TestFunction::window_derivative(double t) const {
    if (t >= cutoff) return 0.0;
    return -power / cutoff * std::pow(1.0 - t / cutoff, power - 1);
}

TestFunctionFamily::TestFunctionFamily(std::vector<TestFunction> members, double length, double end_time)
    : members_(std::move(members)), length_(length), end_time_(end_time) {
    for (const auto& m : members_) {
        if (m.mode < 0 || m.power < 2 || !(m.cutoff > 0.0)) {
            throw InvalidArgument("TestFunctionFamily: need mode >= 0, power >= 2 and a positive cutoff");
        }
        if (m.cutoff > end_time_ * (1.0 + 1e-12)) {
            throw InvalidArgument("TestFunctionFamily: window cutoff beyond the end time");
        }
    }
}

TestFunctionFamily TestFunctionFamily::random(std::size_t count, double length, double end_time,
                                              std::uint64_t seed, int max_mode) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> mode(1, max_mode);
    std::uniform_int_distribution<int> power(2, 3);
    std::uniform_real_distribution<double> cut(0.6, 1.0);
    std::vector<TestFunction> members;
    members.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        TestFunction f;
        f.mode = mode(rng);
        f.power = power(rng);
        f.cutoff = cut(rng) * end_time;
        members.push_back(f);
    }
    return TestFunctionFamily(std::move(members), length, end_time);
}

void TestFunctionFamily::check_support(const SpatialGrid& grid, const TimeGrid& time) const {
    if (std::abs(grid.length() - length_) > 1e-12 * length_) {
        throw InvalidArgument("test functions were built for a different domain length");
    }
    for (std::size_t i = 0; i < members_.size(); ++i) {
        if (members_[i].cutoff > time.end_time() * (1.0 + 1e-12)) {
            throw InvalidArgument("test function " + std::to_string(i) + " is not supported in [0, T)");
        }
    }
}

TestTables TestFunctionFamily::tabulate(std::size_t i, SpatialShape shape, const SpatialGrid& grid,
                                        const TimeGrid& time) const {
    const TestFunction& f = members_.at(i);
    TestTables t;
    t.s.resize(2 * grid.n_elem());
    t.ds.resize(2 * grid.n_elem());
    for (std::size_t e = 0; e < grid.n_elem(); ++e) {
        for (std::size_t q = 0; q < 2; ++q) {
            const double z = grid.node(e) + GaussRule::points[q] * grid.dz();
            t.s[2 * e + q] = f.spatial(shape, z, length_);
            t.ds[2 * e + q] = f.spatial_derivative(shape, z, length_);
        }
    }
    t.w.resize(2 * time.n_step());
    t.dw.resize(2 * time.n_step());
    for (std::size_t n = 0; n < time.n_step(); ++n) {
        for (std::size_t r = 0; r < 2; ++r) {
            const double tt = time.time(n) + GaussRule::points[r] * time.dt();
            t.w[2 * n + r] = f.window(tt);
            t.dw[2 * n + r] = f.window_derivative(tt);
        }
    }
    t.w0 = f.window(0.0);
    return t;
}

}  // namespace piezotherm
