#include <cmath>
#include <random>

#include <fmt/format.h>

#include "maid/error.hpp"
#include "maid/retrieval.hpp"

namespace maid {
namespace {

using Vec = std::vector<double>;

double norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

Vec multiply(const Vec& m, std::size_t d, const Vec& v) {
    Vec out(d, 0.0);
#pragma omp parallel for schedule(static) if (d >= 128)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(d); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += m[i * d + j] * v[j];
        out[i] = s;
    }
    return out;
}

void remove_component(Vec& v, const Vec& unit) {
    double p = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) p += v[i] * unit[i];
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= p * unit[i];
}

void fix_sign(Vec& v) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
    if (v[arg] < 0)
        for (double& x : v) x = -x;
}

struct Eigen {
    Vec vector;
    double value = 0.0;
    int iterations = 0;
};

/// Dominant eigenpair of a symmetric PSD matrix. `against`, when given, is
/// projected out of every iterate so round-off cannot pull the deflated
/// iteration back toward the first component.
Eigen power_iterate(const Vec& m, std::size_t d, const PcaOptions& opt, std::uint64_t seed, const Vec* against) {
    std::mt19937_64 rng(seed);
    Vec v(d);
    for (double& x : v) x = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    if (against) remove_component(v, *against);
    double n = norm(v);
    for (double& x : v) x /= n;

    Eigen e;
    for (e.iterations = 1; e.iterations <= opt.max_iterations; ++e.iterations) {
        Vec next = multiply(m, d, v);
        if (against) remove_component(next, *against);
        n = norm(next);
        if (n < 1e-300) {
            // v lies in the null space: eigenvalue 0, keep the start vector.
            e.vector = v;
            e.value = 0.0;
            return e;
        }
        for (double& x : next) x /= n;
        double delta = 0.0;
        for (std::size_t i = 0; i < d; ++i) delta += (next[i] - v[i]) * (next[i] - v[i]);
        v = std::move(next);
        if (std::sqrt(delta) < opt.tolerance) break;
    }
    e.iterations = std::min(e.iterations, opt.max_iterations);
    const Vec mv = multiply(m, d, v);
    for (std::size_t i = 0; i < d; ++i) e.value += v[i] * mv[i];
    e.value = std::max(e.value, 0.0);
    e.vector = std::move(v);
    return e;
}

}  // namespace

PcaResult pca_project(std::span<const double> rows, std::size_t n, std::size_t d, const PcaOptions& options) {
    if (n < 3 || d < 2) throw Error(ErrorCode::DegenerateData, fmt::format("PCA needs n >= 3 and d >= 2, got {}x{}", n, d));
    if (rows.size() != n * d) throw Error(ErrorCode::DimMismatch, fmt::format("{} values for a {}x{} matrix", rows.size(), n, d));

    PcaResult r;
    r.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) r.mean[j] += rows[i * d + j];
    for (double& m : r.mean) m /= static_cast<double>(n);

    Vec centered(n * d);
    bool identical = true;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            centered[i * d + j] = rows[i * d + j] - r.mean[j];
            if (rows[i * d + j] != rows[j]) identical = false;
        }
    }
    if (identical) throw Error(ErrorCode::DegenerateData, "all points are identical");

    Vec cov(d * d, 0.0);
#pragma omp parallel for schedule(dynamic) if (d >= 64)
    for (std::ptrdiff_t a = 0; a < static_cast<std::ptrdiff_t>(d); ++a) {
        for (std::size_t b = static_cast<std::size_t>(a); b < d; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += centered[i * d + a] * centered[i * d + b];
            s /= static_cast<double>(n - 1);
            cov[a * d + b] = s;
            cov[b * d + a] = s;
        }
    }

    auto first = power_iterate(cov, d, options, options.seed, nullptr);
    Vec deflated = cov;
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) deflated[a * d + b] -= first.value * first.vector[a] * first.vector[b];
    auto second = power_iterate(deflated, d, options, options.seed + 1, &first.vector);

    fix_sign(first.vector);
    fix_sign(second.vector);
    r.explained = {first.value, std::min(second.value, first.value)};
    r.iterations = {first.iterations, second.iterations};
    r.components = {std::move(first.vector), std::move(second.vector)};

    r.coords.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < 2; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += centered[i * d + j] * r.components[c][j];
            r.coords[i][c] = s;
        }
    }
    return r;
}

}  // namespace maid
