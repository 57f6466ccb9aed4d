#pragma once

#include "dppphd/kernel_core.hpp"
#include "dppphd/metrics.hpp"
#include "dppphd/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace dppphd::test {

inline double uniform(Philox& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); }

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// Random symmetric matrix with entries in [-s, s].
inline Eigen::MatrixXd random_symmetric(Philox& rng, Index n, double s) {
    Eigen::MatrixXd m(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j <= i; ++j) m(i, j) = m(j, i) = uniform(rng, -s, s);
    return m;
}

/// Feasible correlation kernel: Q diag(l) Q^T with l in [0, top] on random weights.
inline DiscretizedKernel random_correlation(Philox& rng, Index n, double top = 0.8, bool unit_weights = false) {
    DiscretizedKernel k;
    k.grid = GridSpec::unit(n);
    if (!unit_weights)
        for (Index i = 0; i < n; ++i) k.grid.weights(i) = uniform(rng, 0.3, 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(random_symmetric(rng, n, 1.0));
    Eigen::VectorXd l(n);
    for (Index i = 0; i < n; ++i) l(i) = uniform(rng, 0.0, top);
    k.set_from_normalized(es.eigenvectors() * l.asDiagonal() * es.eigenvectors().transpose());
    k.kind = KernelKind::correlation;
    return k;
}

inline DiscretizedKernel unit_kernel(const Eigen::MatrixXd& m, KernelKind kind = KernelKind::correlation) {
    DiscretizedKernel k;
    k.grid = GridSpec::unit(m.rows());
    k.entries = m;
    k.kind = kind;
    return k;
}

inline PointSet random_points(Philox& rng, size_t n, double side) {
    PointSet out;
    for (size_t i = 0; i < n; ++i) out.emplace_back(uniform(rng, 0.0, side), uniform(rng, 0.0, side));
    return out;
}

/// OSPA by enumerating every injection of the smaller set.
inline double brute_ospa(const PointSet& x, const PointSet& y, double c, double p) {
    const PointSet& a = x.size() <= y.size() ? x : y;
    const PointSet& b = x.size() <= y.size() ? y : x;
    if (b.empty()) return 0.0;
    std::vector<size_t> perm(b.size());
    std::iota(perm.begin(), perm.end(), size_t{0});
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (size_t i = 0; i < a.size(); ++i) s += std::pow(std::min((a[i] - b[perm[i]]).norm(), c), p);
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    best += std::pow(c, p) * static_cast<double>(b.size() - a.size());
    return std::pow(best / static_cast<double>(b.size()), 1.0 / p);
}

/// OMAT by enumerating every integer transport plan in units of 1/lcm(n, m).
inline double brute_omat(const PointSet& x, const PointSet& y, double p) {
    const long long n = static_cast<long long>(x.size()), m = static_cast<long long>(y.size());
    const long long l = std::lcm(n, m);
    std::vector<long long> demand(static_cast<size_t>(m), l / m);
    double best = std::numeric_limits<double>::infinity();
    std::function<void(size_t, size_t, long long, double)> rec = [&](size_t i, size_t j, long long left, double acc) {
        if (acc >= best) return;
        if (i == x.size()) {
            best = acc;
            return;
        }
        if (j + 1 == y.size()) {
            if (left > demand[j]) return;
            demand[j] -= left;
            rec(i + 1, 0, l / n, acc + static_cast<double>(left) * std::pow((x[i] - y[j]).norm(), p));
            demand[j] += left;
            return;
        }
        for (long long f = 0; f <= std::min(left, demand[j]); ++f) {
            demand[j] -= f;
            rec(i, j + 1, left - f, acc + static_cast<double>(f) * std::pow((x[i] - y[j]).norm(), p));
            demand[j] += f;
        }
    };
    rec(0, 0, l / n, 0.0);
    return std::pow(best / static_cast<double>(l), 1.0 / p);
}

} // namespace dppphd::test
