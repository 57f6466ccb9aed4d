#include "dppphd/kernel_core.hpp"

#include "dppphd/errors.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

namespace dppphd {

namespace {

constexpr double kFeasTol = 1e-12;

Eigen::VectorXd sqrt_weights(const GridSpec& g) { return g.weights.cwiseMax(0.0).cwiseSqrt(); }

void symmetrize(Eigen::MatrixXd& m) { m = 0.5 * (m + m.transpose()).eval(); }

double upper_bound(KernelKind kind, const KernelOptions& opt) {
    return kind == KernelKind::correlation ? 1.0 - opt.delta : std::numeric_limits<double>::infinity();
}

bool spectrum_feasible(const Eigen::MatrixXd& khat, double upper, double tol) {
    const Index n = khat.rows();
    if (n == 0) return true;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    if (Eigen::LLT<Eigen::MatrixXd>(khat + tol * id).info() != Eigen::Success) return false;
    if (std::isfinite(upper) && Eigen::LLT<Eigen::MatrixXd>((upper + tol) * id - khat).info() != Eigen::Success)
        return false;
    return true;
}

Eigen::MatrixXd clip_spectrum(const Eigen::MatrixXd& khat, double upper) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(khat);
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseMin(upper);
    Eigen::MatrixXd out = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
    symmetrize(out);
    return out;
}

void band_normalized(Eigen::MatrixXd& khat, const GridSpec& grid, const BandSpec& band) {
    if (band.mode == BandSpec::Mode::none) return;
    const Index n = khat.rows();
    for (Index j = 0; j < n; ++j)
        for (Index i = j + 1; i < n; ++i)
            if (!band.allows(grid, i, j)) {
                khat(i, j) = 0.0;
                khat(j, i) = 0.0;
            }
}

/// Shrinks off-diagonal mass toward the (clipped) diagonal until the spectrum fits.
Eigen::MatrixXd shrink_to_feasible(const Eigen::MatrixXd& khat, double upper) {
    const Index n = khat.rows();
    Eigen::VectorXd d = khat.diagonal().cwiseMax(0.0);
    if (std::isfinite(upper)) d = d.cwiseMin(upper);
    Eigen::MatrixXd e = khat;
    e.diagonal().setZero();
    std::vector<Index> support;
    for (Index i = 0; i < n; ++i) {
        if (d(i) > 0.0)
            support.push_back(i);
        else {
            e.row(i).setZero();
            e.col(i).setZero();
        }
    }
    double t = 1.0;
    if (!support.empty()) {
        const auto s = static_cast<Index>(support.size());
        Eigen::MatrixXd sm(s, s);
        for (Index a = 0; a < s; ++a)
            for (Index b = 0; b < s; ++b)
                sm(a, b) = e(support[a], support[b]) / std::sqrt(d(support[a]) * d(support[b]));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sm, Eigen::EigenvaluesOnly);
        const double smin = es.eigenvalues().minCoeff();
        const double smax = es.eigenvalues().maxCoeff();
        if (smin < 0.0) t = std::min(t, -1.0 / smin);
        const double dmax = d.maxCoeff();
        if (std::isfinite(upper) && smax > 0.0) t = std::min(t, (upper / dmax - 1.0) / smax);
        t = std::max(0.0, t * (1.0 - 1e-12));
    }
    Eigen::MatrixXd out = t * e;
    out.diagonal() = d;
    return out;
}

} // namespace

// ---- GridSpec / BandSpec ----

GridSpec GridSpec::unit(Index n, Index dim) {
    GridSpec g;
    g.points = Eigen::MatrixXd::Zero(dim, n);
    for (Index i = 0; i < n; ++i) g.points(0, i) = static_cast<double>(i);
    g.weights = Eigen::VectorXd::Ones(n);
    return g;
}

bool BandSpec::allows(const GridSpec& grid, Index i, Index j) const {
    if (i == j) return true;
    switch (mode) {
    case Mode::none:
        return true;
    case Mode::index: {
        const auto hw = [&](Index k) {
            return k < static_cast<Index>(halfwidth.size()) ? halfwidth[static_cast<size_t>(k)] : 0;
        };
        if (!block.empty() && block[static_cast<size_t>(i)] != block[static_cast<size_t>(j)]) return false;
        return std::abs(i - j) <= std::max(hw(i), hw(j));
    }
    case Mode::spatial:
        return (grid.points.col(i) - grid.points.col(j)).norm() <= radius;
    }
    return true;
}

BandSpec BandSpec::index_band(Index n, int hw) {
    BandSpec b;
    b.mode = Mode::index;
    b.halfwidth.assign(static_cast<size_t>(n), hw);
    return b;
}

BandSpec BandSpec::spatial_band(double r) {
    BandSpec b;
    b.mode = Mode::spatial;
    b.radius = r;
    return b;
}

// ---- DiscretizedKernel ----

Eigen::MatrixXd DiscretizedKernel::normalized() const {
    const Eigen::VectorXd s = sqrt_weights(grid);
    return s.asDiagonal() * entries * s.asDiagonal();
}

void DiscretizedKernel::set_from_normalized(const Eigen::MatrixXd& khat) {
    const Eigen::VectorXd s = sqrt_weights(grid);
    const Index n = khat.rows();
    entries.resize(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i)
            entries(i, j) = (s(i) > 0.0 && s(j) > 0.0) ? khat(i, j) / (s(i) * s(j)) : 0.0;
    symmetrize(entries);
}

// ---- ClampStats ----

void ClampStats::record(double value, double threshold) {
    ++evaluated;
    if (value < 0.0) {
        ++clamped;
        if (-value > threshold) ++above_threshold;
        largest = std::max(largest, -value);
    }
}

void ClampStats::merge(const ClampStats& o) {
    evaluated += o.evaluated;
    clamped += o.clamped;
    above_threshold += o.above_threshold;
    largest = std::max(largest, o.largest);
}

// ---- Kernel algebra ----

DiscretizedKernel interaction_kernel(const DiscretizedKernel& k, const KernelOptions& opt) {
    DiscretizedKernel j = k;
    j.kind = KernelKind::interaction;
    if (k.size() == 0) return j;
    Eigen::MatrixXd khat = k.normalized();
    symmetrize(khat);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(khat);
    const Eigen::VectorXd& lam = es.eigenvalues();
    const double upper = 1.0 - opt.delta;
    if (lam.maxCoeff() > upper + 1e-9)
        throw SpectrumError("kernel eigenvalue " + std::to_string(lam.maxCoeff()) + " exceeds " +
                            std::to_string(upper));
    Eigen::VectorXd f(lam.size());
    for (Index i = 0; i < lam.size(); ++i) {
        const double l = std::max(0.0, lam(i));
        f(i) = l / (1.0 - l);
    }
    Eigen::MatrixXd jhat = es.eigenvectors() * f.asDiagonal() * es.eigenvectors().transpose();
    symmetrize(jhat);
    j.set_from_normalized(jhat);
    return j;
}

DiscretizedKernel correlation_from_interaction(const DiscretizedKernel& j) {
    DiscretizedKernel k = j;
    k.kind = KernelKind::correlation;
    if (j.size() == 0) return k;
    Eigen::MatrixXd jhat = j.normalized();
    symmetrize(jhat);
    const Index n = jhat.rows();
    Eigen::MatrixXd khat = (Eigen::MatrixXd::Identity(n, n) + jhat).ldlt().solve(jhat);
    symmetrize(khat);
    k.set_from_normalized(khat);
    return k;
}

MomentPair determinantal_moments(const DiscretizedKernel& k, ClampStats* stats, const KernelOptions& opt) {
    const Index n = k.size();
    MomentPair m;
    m.intensity = k.entries.diagonal().cwiseMax(0.0);
    m.pair_factorial = Eigen::MatrixXd::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = j + 1; i < n; ++i) {
            const double v = k.entries(i, i) * k.entries(j, j) - k.entries(i, j) * k.entries(i, j);
            if (stats) stats->record(v, opt.warn_threshold);
            m.pair_factorial(i, j) = m.pair_factorial(j, i) = std::max(0.0, v);
        }
    }
    return m;
}

double cross_covariance(const DiscretizedKernel& k, const IndexSet& a, const IndexSet& b) {
    const auto& w = k.grid.weights;
    std::vector<char> in_b(static_cast<size_t>(k.size()), 0);
    for (int j : b) in_b[static_cast<size_t>(j)] = 1;
    double diag = 0.0;
    for (int i : a)
        if (in_b[static_cast<size_t>(i)]) diag += k.entries(i, i) * w(i);
    double sq = 0.0;
    for (int i : a)
        for (int j : b) sq += k.entries(i, j) * k.entries(i, j) * w(i) * w(j);
    return diag - sq;
}

double janossy_density_dpp(const DiscretizedKernel& k, const IndexSet& subset, const KernelOptions& opt) {
    Eigen::MatrixXd khat = k.normalized();
    symmetrize(khat);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(khat, Eigen::EigenvaluesOnly);
    if (k.size() > 0 && es.eigenvalues().maxCoeff() > 1.0 - opt.delta + 1e-9)
        throw SpectrumError("kernel spectrum outside [0, 1 - delta]");
    double void_prob = 1.0;
    for (Index i = 0; i < es.eigenvalues().size(); ++i) void_prob *= 1.0 - std::max(0.0, es.eigenvalues()(i));
    if (subset.empty()) return void_prob;
    const Eigen::MatrixXd jhat = interaction_kernel(k, opt).normalized();
    const auto s = static_cast<Index>(subset.size());
    Eigen::MatrixXd sub(s, s);
    for (Index a = 0; a < s; ++a)
        for (Index b = 0; b < s; ++b) sub(a, b) = jhat(subset[static_cast<size_t>(a)], subset[static_cast<size_t>(b)]);
    return void_prob * std::max(0.0, sub.determinant());
}

void apply_band(DiscretizedKernel& k) {
    if (k.band.mode == BandSpec::Mode::none) return;
    const Index n = k.size();
    for (Index j = 0; j < n; ++j)
        for (Index i = j + 1; i < n; ++i)
            if (!k.band.allows(k.grid, i, j)) {
                k.entries(i, j) = 0.0;
                k.entries(j, i) = 0.0;
            }
}

DiscretizedKernel project_kernel(DiscretizedKernel k, const KernelOptions& opt) {
    if (k.size() == 0) return k;
    const double upper = upper_bound(k.kind, opt);
    Eigen::MatrixXd khat = k.normalized();
    symmetrize(khat);
    band_normalized(khat, k.grid, k.band);
    if (spectrum_feasible(khat, upper, kFeasTol)) {
        k.set_from_normalized(khat);
        return k;
    }
    for (int it = 0; it < opt.max_alternations; ++it) {
        khat = clip_spectrum(khat, upper);
        if (k.band.mode == BandSpec::Mode::none) {
            k.set_from_normalized(khat);
            return k;
        }
        band_normalized(khat, k.grid, k.band);
        if (spectrum_feasible(khat, upper, kFeasTol)) {
            spdlog::trace("project_kernel: n={} feasible after {} clip-and-band rounds", k.size(), it + 1);
            k.set_from_normalized(khat);
            return k;
        }
    }
    spdlog::trace("project_kernel: n={} shrink fallback", k.size());
    k.set_from_normalized(shrink_to_feasible(khat, upper));
    return k;
}

DiscretizedKernel project_kernel(const Eigen::MatrixXd& m, KernelKind kind, const KernelOptions& opt) {
    DiscretizedKernel k;
    k.grid = GridSpec::unit(m.rows());
    k.entries = 0.5 * (m + m.transpose());
    k.kind = kind;
    return project_kernel(std::move(k), opt);
}

KernelCheck check_kernel(const DiscretizedKernel& k, const KernelOptions& opt, double tol) {
    KernelCheck c;
    const Index n = k.size();
    c.symmetric = k.entries.rows() == k.entries.cols() && k.entries == k.entries.transpose();
    c.band_ok = true;
    for (Index j = 0; j < n && c.band_ok; ++j)
        for (Index i = 0; i < n; ++i)
            if (!k.band.allows(k.grid, i, j) && k.entries(i, j) != 0.0) {
                c.band_ok = false;
                break;
            }
    if (n == 0) {
        c.spectrum_ok = true;
        return c;
    }
    Eigen::MatrixXd khat = k.normalized();
    symmetrize(khat);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(khat, Eigen::EigenvaluesOnly);
    c.min_eigenvalue = es.eigenvalues().minCoeff();
    c.max_eigenvalue = es.eigenvalues().maxCoeff();
    c.spectrum_ok = c.min_eigenvalue >= -tol && c.max_eigenvalue <= upper_bound(k.kind, opt) + tol;
    return c;
}

double kernel_mass(const DiscretizedKernel& k) { return k.entries.diagonal().dot(k.grid.weights); }

void write_kernel_csv(std::ostream& os, const DiscretizedKernel& k) {
    const auto old = os.precision(17);
    for (Index i = 0; i < k.size(); ++i) {
        for (Index j = 0; j < k.size(); ++j) {
            if (j) os << ',';
            os << k.entries(i, j);
        }
        os << '\n';
    }
    os.precision(old);
}

} // namespace dppphd
