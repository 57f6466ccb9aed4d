#include "dppphd/oracle_check.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>

namespace dppphd {

namespace {

double uniform(Philox& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); }

int uniform_int(Philox& rng, int lo, int hi) {
    return lo + std::min(hi - lo, static_cast<int>(rng.uniform01() * (hi - lo + 1)));
}

double scaled_error(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

double max_scaled_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    double e = 0.0;
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j) e = std::max(e, scaled_error(a(i, j), b(i, j)));
    return e;
}

IndexSet random_subset(Philox& rng, int n) {
    IndexSet s;
    for (int i = 0; i < n; ++i)
        if (rng.uniform01() < 0.5) s.push_back(i);
    if (s.empty()) s.push_back(uniform_int(rng, 0, n - 1));
    return s;
}

template <class F>
CheckResult timed(const std::string& name, double tol, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    CheckResult r;
    r.name = name;
    r.tolerance = tol;
    r.max_error = body();
    r.passed = r.max_error <= tol;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

} // namespace

FiniteProcess random_finite_process(Philox& rng, int grid_size, int max_points) {
    GridSpec g;
    g.points = Eigen::MatrixXd::Zero(1, grid_size);
    g.weights.resize(grid_size);
    for (int i = 0; i < grid_size; ++i) {
        g.points(0, i) = i;
        g.weights(i) = uniform(rng, 0.2, 1.0);
    }
    std::map<Configuration, double> probs;
    std::function<void(Configuration&, int)> walk = [&](Configuration& cur, int start) {
        if (cur.empty() || rng.uniform01() < 0.6) probs[cur] = uniform(rng, 0.05, 1.0);
        if (static_cast<int>(cur.size()) == max_points) return;
        for (int i = start; i < grid_size; ++i) {
            cur.push_back(i);
            walk(cur, i);
            cur.pop_back();
        }
    };
    Configuration cur;
    walk(cur, 0);
    double total = 0.0;
    for (const auto& [c, p] : probs) total += p;
    for (auto& [c, p] : probs) p /= total;
    return FiniteProcess::from_probabilities(g, probs);
}

ObservationModel random_observation(Philox& rng, int grid_size, int meas_points) {
    ObservationModel obs;
    obs.p_d.resize(grid_size);
    obs.l_d.resize(meas_points, grid_size);
    obs.l_c.resize(meas_points);
    for (int x = 0; x < grid_size; ++x) {
        obs.p_d(x) = uniform(rng, 0.3, 0.95);
        double col = 0.0;
        for (int z = 0; z < meas_points; ++z) col += obs.l_d(z, x) = uniform(rng, 0.05, 1.0);
        obs.l_d.col(x) /= col;
    }
    for (int z = 0; z < meas_points; ++z) obs.l_c(z) = uniform(rng, 0.05, 0.5);
    return obs;
}

CheckResult poisson_reduction_check(double tol) {
    return timed("poisson reduction", tol, [] {
        GridSpec g;
        g.points = Eigen::MatrixXd(1, 3);
        g.points << 0.0, 1.0, 2.0;
        g.weights = Eigen::Vector3d(0.15, 0.25, 0.2);
        const Eigen::VectorXd intensity = Eigen::VectorXd::Ones(3);
        const int n_max = 14;
        const FiniteProcess prior = FiniteProcess::poisson(g, intensity, n_max);
        ObservationModel obs;
        obs.p_d = Eigen::Vector3d(0.9, 0.7, 0.8);
        obs.l_d = Eigen::MatrixXd(2, 3);
        obs.l_d << 0.6, 0.3, 0.1, 0.4, 0.7, 0.9;
        obs.l_c = Eigen::Vector2d(0.2, 0.35);
        const IndexSet meas{0, 1};

        const Correctors c = compute_correctors(prior, obs, meas, n_max, true);
        double err = 0.0;
        for (Index x = 0; x < 3; ++x) {
            err = std::max(err, std::abs(c.l1(x) - 1.0));
            for (Index y = 0; y < 3; ++y) err = std::max(err, std::abs(c.l2(x, y) - 1.0));
        }
        for (size_t k = 0; k < meas.size(); ++k) {
            double s = obs.l_c(meas[k]);
            for (Index u = 0; u < 3; ++u) s += obs.lt(meas[k], u) * g.weights(u);
            for (Index x = 0; x < 3; ++x)
                err = std::max(err, std::abs(c.l1z(x, static_cast<Index>(k)) - 1.0 / s));
        }
        err = std::max(err, max_scaled_error(posterior_intensity_exact(prior, obs, meas, n_max),
                                             poisson_posterior_intensity(g, intensity, obs, meas)));
        err = std::max(err, max_scaled_error(posterior_pair_exact(prior, obs, meas, n_max),
                                             poisson_posterior_pair(g, intensity, obs, meas)));
        const std::vector<std::pair<IndexSet, IndexSet>> regions = {
            {{0}, {1, 2}}, {{0, 1}, {1, 2}}, {{0, 1, 2}, {0, 1, 2}}, {{2}, {2}}};
        for (const auto& [a, b] : regions)
            err = std::max(err, scaled_error(posterior_covariance_exact(prior, obs, meas, a, b, n_max),
                                             poisson_posterior_covariance(g, intensity, obs, meas, a, b)));
        return err;
    });
}

CheckResult oracle_equivalence_check(std::uint64_t seed, int cases, double tol) {
    return timed("oracle equivalence", tol, [&] {
        Philox rng = make_rng(seed, 0, Stream::test);
        double err = 0.0;
        for (int k = 0; k < cases; ++k) {
            const int n = uniform_int(rng, 2, 5);
            const int support = uniform_int(rng, 1, 4);
            const int m_points = uniform_int(rng, 1, 3);
            const FiniteProcess prior = random_finite_process(rng, n, support);
            const ObservationModel obs = random_observation(rng, n, m_points);
            IndexSet meas;
            for (int z = 0; z < m_points; ++z)
                if (rng.uniform01() < 0.7) meas.push_back(z);
            const int n_max = prior.max_size();
            const FiniteProcess post = enumerate_posterior(prior, obs, meas);
            err = std::max(err, max_scaled_error(posterior_intensity_exact(prior, obs, meas, n_max),
                                                 process_intensity(post)));
            err = std::max(err,
                           max_scaled_error(posterior_pair_exact(prior, obs, meas, n_max), process_pair(post)));
            const IndexSet a = random_subset(rng, n);
            const IndexSet b = random_subset(rng, n);
            err = std::max(err, scaled_error(posterior_covariance_exact(prior, obs, meas, a, b, n_max),
                                             process_covariance(post, a, b)));
        }
        return err;
    });
}

} // namespace dppphd
