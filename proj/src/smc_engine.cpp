#include "dppphd/smc_engine.hpp"

#include "dppphd/errors.hpp"

#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <tuple>
#include <mutex>
#include <memory>
#include <map>
#include <numeric>

namespace dppphd {

namespace {

double uniform(Philox& rng, double a, double b) { return a + (b - a) * rng.uniform01(); }

BandSpec as_block_band(const BandSpec& b, Index n) {
    BandSpec out;
    out.mode = BandSpec::Mode::index;
    if (b.mode == BandSpec::Mode::index) {
        out.halfwidth = b.halfwidth;
        out.block = b.block;
    }
    out.halfwidth.resize(static_cast<size_t>(n), b.mode == BandSpec::Mode::none ? static_cast<int>(n) : 0);
    out.block.resize(static_cast<size_t>(n), 0);
    return out;
}

} // namespace

// ---- ParticleSet ----

Eigen::MatrixXd ParticleSet::positions() const {
    Eigen::MatrixXd p(2, size());
    p.row(0) = states.row(0);
    p.row(1) = states.row(2);
    return p;
}

void ParticleSet::append(const ParticleSet& other) {
    StateMatrix s(5, size() + other.size());
    s << states, other.states;
    states = std::move(s);
    origin.insert(origin.end(), other.origin.begin(), other.origin.end());
}

// ---- Observation inputs ----

UpdateInputs make_update_inputs(const ParticleSet& p, const Scan& scan, const SensorConfig& sensor) {
    const Index n = p.size();
    const auto m = static_cast<Index>(scan.size());
    UpdateInputs in;
    in.lt.resize(m, n);
    in.lc.resize(m);
    in.q = Eigen::VectorXd::Constant(n, 1.0 - sensor.p_d);
    for (Index z = 0; z < m; ++z) {
        const auto& det = scan.detections[static_cast<size_t>(z)];
        in.lc(z) = clutter_density(det, sensor);
        for (Index i = 0; i < n; ++i)
            in.lt(z, i) = sensor.p_d * detection_likelihood(det, p.states(0, i), p.states(2, i), sensor);
    }
    return in;
}

// ---- Sampling ----

ParticleSet sample_uniform(Index n, const Window& window, const SmcConfig& cfg, Origin origin, Philox& rng) {
    ParticleSet p;
    p.states.resize(5, n);
    p.origin.assign(static_cast<size_t>(n), origin);
    for (Index i = 0; i < n; ++i) {
        const Eigen::Vector2d xy = window.sample(rng);
        p.states(0, i) = xy(0);
        p.states(1, i) = uniform(rng, -cfg.init_speed, cfg.init_speed);
        p.states(2, i) = xy(1);
        p.states(3, i) = uniform(rng, -cfg.init_speed, cfg.init_speed);
        p.states(4, i) = uniform(rng, -cfg.init_turn, cfg.init_turn);
    }
    return p;
}

State5 state_extent(const Window& window, const SmcConfig& cfg) {
    const Eigen::Vector2d e = window.extent();
    State5 s;
    s << e(0), 2.0 * cfg.init_speed, e(1), 2.0 * cfg.init_speed, 2.0 * cfg.init_turn;
    return s;
}

DiscretizedKernel block_kernel(const Eigen::MatrixXd& positions, double window_area, double gamma, double alpha,
                               int halfwidth) {
    const Index n = positions.cols();
    DiscretizedKernel k;
    k.kind = KernelKind::correlation;
    k.grid.points = positions;
    k.grid.weights = Eigen::VectorXd::Constant(n, n > 0 ? window_area / static_cast<double>(n) : 0.0);
    k.band = BandSpec::index_band(n, halfwidth);
    k.band.block.assign(static_cast<size_t>(n), 0);
    Eigen::MatrixXd khat = Eigen::MatrixXd::Zero(n, n);
    if (n > 0) {
        const double d = gamma / static_cast<double>(n);
        for (Index i = 0; i < n; ++i) {
            khat(i, i) = d;
            for (Index j = std::max<Index>(0, i - halfwidth); j <= std::min(n - 1, i + halfwidth); ++j)
                if (j != i) khat(i, j) = alpha * d;
        }
    }
    k.set_from_normalized(khat);
    return k;
}

namespace {

/// Projected block for unit trace, stored by diagonals: band(d, i) = khat(i + d, i).
struct BlockPattern {
    Eigen::MatrixXd band;
    double lambda_max = 0.0;
};

std::shared_ptr<const BlockPattern> unit_block_pattern(Index n, double alpha, int halfwidth) {
    static std::mutex mu;
    static std::map<std::tuple<Index, double, int>, std::shared_ptr<const BlockPattern>> cache;
    const auto key = std::make_tuple(n, alpha, halfwidth);
    {
        std::lock_guard<std::mutex> lock(mu);
        const auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    DiscretizedKernel k = block_kernel(Eigen::MatrixXd::Zero(2, n), static_cast<double>(n), 1.0, alpha, halfwidth);
    k.kind = KernelKind::interaction;
    k = project_kernel(std::move(k));
    const double trace = k.entries.trace();
    if (trace > 0.0) k.entries /= trace;
    auto p = std::make_shared<BlockPattern>();
    const Index hw = std::min<Index>(halfwidth, std::max<Index>(n - 1, 0));
    p->band = Eigen::MatrixXd::Zero(hw + 1, n);
    for (Index d = 0; d <= hw; ++d)
        for (Index i = 0; i + d < n; ++i) p->band(d, i) = k.entries(i + d, i);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k.entries, Eigen::EigenvaluesOnly);
    p->lambda_max = n > 0 ? es.eigenvalues().maxCoeff() : 0.0;
    std::lock_guard<std::mutex> lock(mu);
    return cache.emplace(key, std::move(p)).first->second;
}

} // namespace

DiscretizedKernel feasible_block_kernel(const Eigen::MatrixXd& positions, double window_area, double gamma,
                                        const SmcConfig& cfg, int halfwidth, const KernelOptions& opt) {
    const double alpha = cfg.diagonal_only ? 0.0 : cfg.alpha;
    const Index n = positions.cols();
    const auto pattern = unit_block_pattern(n, alpha, halfwidth);
    if (gamma > 0.0 && gamma * pattern->lambda_max <= 1.0 - opt.delta) {
        DiscretizedKernel k = block_kernel(positions, window_area, gamma, alpha, halfwidth);
        Eigen::MatrixXd khat = Eigen::MatrixXd::Zero(n, n);
        for (Index d = 0; d < pattern->band.rows(); ++d)
            for (Index i = 0; i + d < n; ++i) khat(i + d, i) = khat(i, i + d) = gamma * pattern->band(d, i);
        k.set_from_normalized(khat);
        return k;
    }
    DiscretizedKernel k = project_kernel(block_kernel(positions, window_area, gamma, alpha, halfwidth), opt);
    const double mass = kernel_mass(k);
    if (mass > gamma && gamma > 0.0) k.entries *= gamma / mass;
    return k;
}

Initialized init_particles(const SmcConfig& cfg, const Window& window, Philox& rng, const KernelOptions& opt) {
    Initialized out;
    out.particles = sample_uniform(cfg.n_init, window, cfg, Origin::birth, rng);
    out.kernel = feasible_block_kernel(out.particles.positions(), window.area(), cfg.gamma0, cfg, cfg.init_halfwidth(),
                                       opt);
    return out;
}

// ---- Resampling ----

int resample_count(double gamma, const SmcConfig& cfg) {
    const int f = SmcConfig::floor_count(std::max(0.0, gamma));
    const int n = f > 0 ? cfg.p_p * f : cfg.p_p;
    return std::min(n, cfg.cap);
}

int birth_count(double gamma_birth, const SmcConfig& cfg) {
    const int f = SmcConfig::floor_count(std::max(0.0, gamma_birth));
    if (f > 0) return cfg.p_b * f;
    return cfg.min_birth_particles < 0 ? cfg.p_b : cfg.min_birth_particles;
}

std::vector<Index> resample_indices(const Eigen::VectorXd& intensity, Index count, ResampleMode mode, Philox& rng) {
    const Index n = intensity.size();
    const double total = intensity.cwiseMax(0.0).sum();
    if (n == 0 || !(total > 0.0)) throw DegenerateIntensity("all particle intensities are zero");
    std::vector<Index> idx;
    idx.reserve(static_cast<size_t>(count));
    if (mode == ResampleMode::top_k) {
        std::vector<Index> order(static_cast<size_t>(n));
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return intensity(a) > intensity(b); });
        for (Index k = 0; k < count; ++k) idx.push_back(order[static_cast<size_t>(k % n)]);
        std::sort(idx.begin(), idx.end());
        return idx;
    }
    std::vector<double> u(static_cast<size_t>(count));
    if (mode == ResampleMode::systematic) {
        const double u0 = rng.uniform01();
        for (Index k = 0; k < count; ++k) u[static_cast<size_t>(k)] = (static_cast<double>(k) + u0) / count;
    } else {
        for (auto& v : u) v = rng.uniform01();
        std::sort(u.begin(), u.end());
    }
    double cum = 0.0;
    Index i = 0;
    for (double v : u) {
        const double target = v * total;
        while (i < n - 1 && cum + std::max(0.0, intensity(i)) <= target) {
            cum += std::max(0.0, intensity(i));
            ++i;
        }
        idx.push_back(i);
    }
    return idx;
}

ParticleSet resample(const Eigen::VectorXd& intensity, const ParticleSet& particles, const SmcConfig& cfg,
                     const Window& window, Philox& rng) {
    const Index count = resample_count(intensity.cwiseMax(0.0).sum(), cfg);
    const auto idx = resample_indices(intensity, count, cfg.resample, rng);
    ParticleSet out;
    out.states.resize(5, count);
    out.origin.assign(static_cast<size_t>(count), Origin::survivor);
    for (Index k = 0; k < count; ++k) out.states.col(k) = particles.states.col(idx[static_cast<size_t>(k)]);
    if (cfg.roughening_scale > 0.0) {
        const State5 sd = cfg.roughening_scale * state_extent(window, cfg) *
                          std::pow(static_cast<double>(count), -1.0 / 5.0);
        for (Index k = 0; k < count; ++k)
            for (int d = 0; d < 5; ++d) {
                if (sd(d) <= 0.0) continue;
                boost::random::normal_distribution<double> nd(0.0, sd(d));
                out.states(d, k) += nd(rng);
            }
    }
    return out;
}

// ---- Births and re-initialization ----

Initialized inject_births(ParticleSet particles, DiscretizedKernel kernel, const SmcConfig& cfg, double gamma_birth,
                          const Window& window, Philox& rng, const KernelOptions& opt) {
    const Index nb = birth_count(gamma_birth, cfg);
    const Index n0 = particles.size();
    Initialized out;
    if (nb == 0) {
        out.particles = std::move(particles);
        out.kernel = std::move(kernel);
        return out;
    }
    const ParticleSet born = sample_uniform(nb, window, cfg, Origin::birth, rng);
    const DiscretizedKernel bk =
        feasible_block_kernel(born.positions(), window.area(), gamma_birth, cfg, cfg.birth_halfwidth(), opt);

    DiscretizedKernel k;
    k.kind = KernelKind::correlation;
    k.grid.points.resize(2, n0 + nb);
    k.grid.points << kernel.grid.points, bk.grid.points;
    k.grid.weights.resize(n0 + nb);
    k.grid.weights << kernel.grid.weights, bk.grid.weights;
    k.entries = Eigen::MatrixXd::Zero(n0 + nb, n0 + nb);
    k.entries.topLeftCorner(n0, n0) = kernel.entries;
    k.entries.bottomRightCorner(nb, nb) = bk.entries;

    BandSpec band = as_block_band(kernel.band, n0);
    const int next_block = band.block.empty() ? 0 : *std::max_element(band.block.begin(), band.block.end()) + 1;
    band.halfwidth.resize(static_cast<size_t>(n0 + nb), cfg.birth_halfwidth());
    band.block.resize(static_cast<size_t>(n0 + nb), next_block);
    k.band = std::move(band);

    particles.append(born);
    out.particles = std::move(particles);
    out.kernel = project_kernel(std::move(k), opt);
    if (cfg.diagonal_only) zero_off_diagonal(out.kernel);
    return out;
}

DiscretizedKernel reinit_kernel(const ParticleSet& particles, double gamma, const SmcConfig& cfg, const Window& window,
                                const KernelOptions& opt) {
    return feasible_block_kernel(particles.positions(), window.area(), gamma, cfg, cfg.resample_halfwidth(), opt);
}

void zero_off_diagonal(DiscretizedKernel& k) {
    const Eigen::VectorXd d = k.entries.diagonal();
    k.entries = d.asDiagonal();
}

} // namespace dppphd
