#include "dppphd/dpp_filter.hpp"

#include "dppphd/errors.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <ostream>

namespace dppphd {

namespace {

Eigen::VectorXd safe_inverse(const Eigen::VectorXd& s) {
    Eigen::VectorXd inv(s.size());
    for (Index z = 0; z < s.size(); ++z) inv(z) = s(z) >= std::numeric_limits<double>::min() ? 1.0 / s(z) : 0.0;
    return inv;
}

/// J(x,x)J(y,y) - J(x,y)^2 clamped at 0, diagonal 0.
Eigen::MatrixXd det_matrix(const DiscretizedKernel& j, ClampStats* stats, const KernelOptions& opt) {
    const Index n = j.size();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Index y = 0; y < n; ++y)
        for (Index x = y + 1; x < n; ++x) {
            const double v = j.entries(x, x) * j.entries(y, y) - j.entries(x, y) * j.entries(x, y);
            if (stats) stats->record(v, opt.warn_threshold);
            d(x, y) = d(y, x) = std::max(0.0, v);
        }
    return d;
}

/// 1 / (s(z)s(z') - Q(z,z')) off the diagonal; nonpositive or subnormal denominators give 0.
Eigen::MatrixXd pair_reciprocals(const Eigen::VectorXd& s, const Eigen::MatrixXd& q, long long* bad) {
    const Index m = s.size();
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m, m);
    for (Index a = 0; a < m; ++a)
        for (Index b = 0; b < m; ++b) {
            if (a == b) continue;
            const double den = s(a) * s(b) - q(a, b);
            if (den >= std::numeric_limits<double>::min())
                r(a, b) = 1.0 / den;
            else if (bad)
                ++*bad;
        }
    return r;
}

bool contains(const IndexSet& s, int v) { return std::find(s.begin(), s.end(), v) != s.end(); }

} // namespace

UpdateInputs inputs_from_model(const ObservationModel& obs, const IndexSet& meas) {
    const auto m = static_cast<Index>(meas.size());
    const Index n = obs.p_d.size();
    UpdateInputs in;
    in.lt.resize(m, n);
    in.lc.resize(m);
    in.q.resize(n);
    for (Index x = 0; x < n; ++x) in.q(x) = obs.q(x);
    for (Index z = 0; z < m; ++z) {
        const int zi = meas[static_cast<size_t>(z)];
        in.lc(z) = obs.l_c(zi);
        for (Index x = 0; x < n; ++x) in.lt(z, x) = obs.lt(zi, x);
    }
    return in;
}

// ---- Update ----

Eigen::VectorXd corrector_denominators(const DiscretizedKernel& j, const UpdateInputs& in) {
    const Eigen::VectorXd jw = j.entries.diagonal().cwiseProduct(j.grid.weights);
    return in.lc + in.lt * jw;
}

double s_c(Index z, const DiscretizedKernel& j, const UpdateInputs& in) {
    const Eigen::VectorXd jw = j.entries.diagonal().cwiseProduct(j.grid.weights);
    return in.lc(z) + in.lt.row(z).dot(jw);
}

Eigen::MatrixXd pair_integrals(const DiscretizedKernel& j, const UpdateInputs& in) {
    const Eigen::MatrixXd lw = in.lt * j.grid.weights.asDiagonal();
    const Eigen::MatrixXd j2 = j.entries.cwiseProduct(j.entries);
    return lw * j2 * lw.transpose();
}

UpdateResult update_kernel(const DiscretizedKernel& k, const UpdateInputs& in, const UpdateOptions& opt) {
    return update_kernel(k, interaction_kernel(k, opt.kernel), in, opt);
}

UpdateResult update_kernel(const DiscretizedKernel& k, const DiscretizedKernel& j, const UpdateInputs& in,
                           const UpdateOptions& opt) {
    const Index n = k.size();
    UpdateResult r;
    const Eigen::VectorXd s = corrector_denominators(j, in);
    const Eigen::VectorXd inv_s = safe_inverse(s);
    for (Index z = 0; z < s.size(); ++z)
        if (!(s(z) > 0.0)) ++r.nonpositive_denominators;
    const Eigen::VectorXd a = in.lt.transpose() * inv_s;
    const Eigen::VectorXd jd = j.entries.diagonal();
    r.intensity = in.q.cwiseProduct(k.entries.diagonal()) + jd.cwiseProduct(a);

    const Eigen::MatrixXd d = det_matrix(j, &r.det_clamps, opt.kernel);
    const Eigen::MatrixXd rz = pair_reciprocals(s, pair_integrals(j, in), &r.nonpositive_denominators);
    const Eigen::MatrixXd t = in.lt.transpose() * rz * in.lt;
    Eigen::MatrixXd inner = in.q * in.q.transpose() + a * in.q.transpose() + in.q * a.transpose() + t;
    r.pair = d.cwiseProduct(inner);
    r.pair.diagonal().setZero();

    DiscretizedKernel post = k;
    post.kind = KernelKind::correlation;
    post.entries = Eigen::MatrixXd::Zero(n, n);
    post.entries.diagonal() = r.intensity;
    if (!opt.diagonal_only) {
        const Eigen::MatrixXd ksq = opt.off_diagonal == OffDiagonalForm::closed_form
                                        ? squared_posterior_kernel(j, in)
                                        : Eigen::MatrixXd(r.intensity * r.intensity.transpose() - r.pair);
        for (Index y = 0; y < n; ++y)
            for (Index x = y + 1; x < n; ++x) {
                if (!k.band.allows(k.grid, x, y)) continue;
                const double v = ksq(x, y);
                r.sqrt_clamps.record(v, opt.kernel.warn_threshold);
                post.entries(x, y) = post.entries(y, x) = std::sqrt(std::max(0.0, v));
            }
    }
    r.kernel = project_kernel(std::move(post), opt.kernel);
    r.gamma = kernel_mass(r.kernel);
    return r;
}

Eigen::VectorXd intensity_from_interaction(const DiscretizedKernel& j, const UpdateInputs& in) {
    const Eigen::VectorXd a = in.lt.transpose() * safe_inverse(corrector_denominators(j, in));
    return (in.q + a).cwiseProduct(j.entries.diagonal());
}

Eigen::MatrixXd squared_posterior_kernel(const DiscretizedKernel& j, const UpdateInputs& in) {
    const Eigen::VectorXd s = corrector_denominators(j, in);
    const Eigen::VectorXd a = in.lt.transpose() * safe_inverse(s);
    const Eigen::VectorXd jd = j.entries.diagonal();
    const Eigen::MatrixXd j2 = j.entries.cwiseProduct(j.entries);
    const Eigen::MatrixXd d = jd * jd.transpose() - j2;
    const Eigen::MatrixXd rz = pair_reciprocals(s, pair_integrals(j, in), nullptr);
    const Eigen::MatrixXd t = in.lt.transpose() * rz * in.lt;
    Eigen::MatrixXd out = j2.cwiseProduct(in.q * in.q.transpose() + a * in.q.transpose() + in.q * a.transpose()) +
                          (jd.cwiseProduct(a)) * (jd.cwiseProduct(a)).transpose() - d.cwiseProduct(t);
    return out;
}

double posterior_covariance_approx(const DiscretizedKernel& k, const UpdateInputs& in, const IndexSet& a,
                                   const IndexSet& b, CovarianceForm form, const KernelOptions& opt) {
    const DiscretizedKernel j = interaction_kernel(k, opt);
    const Eigen::VectorXd& w = j.grid.weights;
    const Eigen::MatrixXd& jm = j.entries;
    const Eigen::VectorXd& q = in.q;
    const Index m = in.lt.rows();
    const Index n = j.size();
    const Eigen::VectorXd s = corrector_denominators(j, in);
    const Eigen::VectorXd inv_s = safe_inverse(s);

    double t1 = 0.0;
    for (int x : a)
        if (contains(b, x)) t1 += q(x) * jm(x, x) * w(x);

    double t2 = 0.0;
    for (int x : a)
        for (int y : b) t2 -= q(x) * q(y) * jm(x, y) * jm(x, y) * w(x) * w(y);

    double t3 = 0.0;
    for (Index z = 0; z < m; ++z) {
        double acc = 0.0;
        for (int x : a)
            for (int y : b)
                acc += jm(x, y) * jm(x, y) * (q(y) * in.lt(z, x) + q(x) * in.lt(z, y)) * w(x) * w(y);
        t3 -= inv_s(z) * acc;
    }

    Eigen::VectorXd ia = Eigen::VectorXd::Zero(m), ib = Eigen::VectorXd::Zero(m);
    for (Index z = 0; z < m; ++z) {
        for (int x : a) ia(z) += in.lt(z, x) * jm(x, x) * w(x);
        for (int y : b) ib(z) += in.lt(z, y) * jm(y, y) * w(y);
    }
    double t4 = 0.0;
    for (Index z = 0; z < m; ++z) {
        double cap = 0.0;
        for (int x : a)
            if (contains(b, x)) cap += in.lt(z, x) * jm(x, x) * w(x);
        t4 += inv_s(z) * (cap - ia(z) * ib(z) * inv_s(z));
    }

    const Eigen::MatrixXd rz = pair_reciprocals(s, pair_integrals(j, in), nullptr);
    IndexSet xs = a, ys = b;
    if (form == CovarianceForm::whole_space) {
        xs.resize(static_cast<size_t>(n));
        for (Index i = 0; i < n; ++i) xs[static_cast<size_t>(i)] = static_cast<int>(i);
        ys = xs;
    }
    double t5 = 0.0;
    for (Index z = 0; z < m; ++z)
        for (Index zp = 0; zp < m; ++zp) {
            if (z == zp || rz(z, zp) == 0.0) continue;
            double acc = 0.0;
            for (int x : xs)
                for (int y : ys) {
                    const double dxy = jm(x, x) * jm(y, y) - jm(x, y) * jm(x, y);
                    acc += dxy * in.lt(z, x) * in.lt(zp, y) * w(x) * w(y);
                }
            t5 += acc * rz(z, zp);
        }

    double t6 = 0.0;
    if (form == CovarianceForm::consistent)
        for (Index z = 0; z < m; ++z)
            for (Index zp = 0; zp < m; ++zp)
                if (z != zp) t6 -= ia(z) * ib(zp) * inv_s(z) * inv_s(zp);

    return t1 + t2 + t3 + t4 + t5 + t6;
}

double correlation_estimate(const DiscretizedKernel& posterior, const IndexSet& a, const IndexSet& b) {
    const double va = cross_covariance(posterior, a, a);
    const double vb = cross_covariance(posterior, b, b);
    if (!(va > 0.0) || !(vb > 0.0)) throw DegenerateVariance("domain variance is not positive");
    const double c = cross_covariance(posterior, a, b) / std::sqrt(va * vb);
    return std::clamp(c, -1.0, 1.0);
}

// ---- Prediction ----

PredictedMoments predict_moments(const DiscretizedKernel& prior, const Eigen::MatrixXd& transition, double p_s,
                                 const Eigen::VectorXd& birth_intensity) {
    const Eigen::VectorXd& w = prior.grid.weights;
    const Eigen::VectorXd kd = prior.entries.diagonal();
    PredictedMoments m;
    const Eigen::VectorXd mu_s = p_s * transition * kd.cwiseProduct(w);
    Eigen::MatrixXd dpsi = kd * kd.transpose() - prior.entries.cwiseProduct(prior.entries);
    dpsi = dpsi.cwiseMax(0.0);
    dpsi.diagonal().setZero();
    const Eigen::MatrixXd lw = transition * w.asDiagonal();
    m.pair = p_s * p_s * lw * dpsi * lw.transpose() + birth_intensity * mu_s.transpose() +
             mu_s * birth_intensity.transpose() + birth_intensity * birth_intensity.transpose();
    m.pair.diagonal().setZero();
    m.intensity = birth_intensity + mu_s;
    return m;
}

DiscretizedKernel kernel_from_moments(const GridSpec& grid, const PredictedMoments& m, ClampStats* clamps,
                                      const KernelOptions& opt) {
    const Index n = m.intensity.size();
    DiscretizedKernel k;
    k.grid = grid;
    k.kind = KernelKind::correlation;
    k.entries = Eigen::MatrixXd::Zero(n, n);
    k.entries.diagonal() = m.intensity;
    for (Index y = 0; y < n; ++y)
        for (Index x = y + 1; x < n; ++x) {
            const double v = m.intensity(x) * m.intensity(y) - m.pair(x, y);
            if (clamps) clamps->record(v, opt.warn_threshold);
            k.entries(x, y) = k.entries(y, x) = std::sqrt(std::max(0.0, v));
        }
    return k;
}

// ---- Particle filter ----

FilterState dpp_predict(const FilterState& s, const DynamicsConfig& dyn, const SmcConfig& cfg, const Window& window,
                        Philox& rng, StepDiagnostics* diag, const KernelOptions& opt) {
    ParticleSet p = s.particles;
    propagate_states(p.states, dyn, rng);
    std::fill(p.origin.begin(), p.origin.end(), Origin::survivor);

    const DiscretizedKernel& kp = s.kernel;
    const Index n = kp.size();
    const double ps = cfg.p_s;
    DiscretizedKernel k = kp;
    k.grid.points = p.positions();
    k.entries = Eigen::MatrixXd::Zero(n, n);
    ClampStats clamps;
    for (Index i = 0; i < n; ++i) k.entries(i, i) = ps * kp.entries(i, i);
    for (Index y = 0; y < n; ++y)
        for (Index x = y + 1; x < n; ++x) {
            if (!kp.band.allows(kp.grid, x, y) || kp.entries(x, y) == 0.0) continue;
            const double rho = ps * ps * std::max(0.0, kp.entries(x, x) * kp.entries(y, y) - kp.entries(x, y) * kp.entries(x, y));
            const double v = k.entries(x, x) * k.entries(y, y) - rho;
            clamps.record(v, opt.warn_threshold);
            k.entries(x, y) = k.entries(y, x) = std::sqrt(std::max(0.0, v));
        }
    k = project_kernel(std::move(k), opt);
    if (cfg.diagonal_only) zero_off_diagonal(k);

    const double gamma_birth = cfg.birth_mode == BirthMassMode::literal ? kernel_mass(kp) : cfg.birth_mass;
    if (diag) {
        diag->sqrt_clamps.merge(clamps);
        diag->gamma_predicted = kernel_mass(k);
        diag->gamma_birth = gamma_birth;
    }
    Initialized ext = inject_births(std::move(p), std::move(k), cfg, gamma_birth, window, rng, opt);
    FilterState out;
    out.particles = std::move(ext.particles);
    out.kernel = std::move(ext.kernel);
    out.gamma = kernel_mass(out.kernel);
    return out;
}

FilterState dpp_correct(ParticleSet particles, const DiscretizedKernel& predicted, const Scan& scan,
                        const SensorConfig& sensor, const SmcConfig& cfg, Philox& rng, StepDiagnostics* diag,
                        const KernelOptions& opt) {
    UpdateOptions uopt{opt, cfg.diagonal_only};
    const UpdateResult r1 = update_kernel(predicted, make_update_inputs(particles, scan, sensor), uopt);
    if (diag) {
        diag->sqrt_clamps.merge(r1.sqrt_clamps);
        diag->det_clamps.merge(r1.det_clamps);
        diag->nonpositive_denominators += r1.nonpositive_denominators;
        diag->gamma_first_update = r1.gamma;
    }
    const Eigen::VectorXd intensity = r1.kernel.entries.diagonal().cwiseProduct(r1.kernel.grid.weights);
    FilterState out;
    out.particles = resample(intensity, particles, cfg, sensor.window, rng);
    out.kernel = reinit_kernel(out.particles, r1.gamma, cfg, sensor.window, opt);
    if (cfg.double_update) {
        const UpdateResult r2 = update_kernel(out.kernel, make_update_inputs(out.particles, scan, sensor), uopt);
        if (diag) {
            diag->sqrt_clamps.merge(r2.sqrt_clamps);
            diag->det_clamps.merge(r2.det_clamps);
            diag->nonpositive_denominators += r2.nonpositive_denominators;
        }
        out.kernel = r2.kernel;
    }
    out.gamma = kernel_mass(out.kernel);
    if (diag) diag->particles = out.particles.size();
    return out;
}

FilterState dpp_initialize(const Scan& scan, const SensorConfig& sensor, const SmcConfig& cfg, Philox& rng,
                           StepDiagnostics* diag, const KernelOptions& opt) {
    Initialized init = init_particles(cfg, sensor.window, rng, opt);
    if (diag) {
        diag->gamma_predicted = kernel_mass(init.kernel);
        diag->gamma_birth = 0.0;
    }
    return dpp_correct(std::move(init.particles), init.kernel, scan, sensor, cfg, rng, diag, opt);
}

FilterState dpp_step(const FilterState& s, const Scan& scan, const DynamicsConfig& dyn, const SensorConfig& sensor,
                     const SmcConfig& cfg, Philox& rng, StepDiagnostics* diag, const KernelOptions& opt) {
    FilterState pred = dpp_predict(s, dyn, cfg, sensor.window, rng, diag, opt);
    return dpp_correct(std::move(pred.particles), pred.kernel, scan, sensor, cfg, rng, diag, opt);
}

IndexSet region_indices(const ParticleSet& p, const Rect& r) {
    IndexSet out;
    for (Index i = 0; i < p.size(); ++i)
        if (r.contains(p.states(0, i), p.states(2, i))) out.push_back(static_cast<int>(i));
    return out;
}

void write_snapshot_header(std::ostream& os) {
    os << "run,t,index,x,xdot,y,ydot,theta,origin,weight,value,gamma\n";
}

void write_snapshot(std::ostream& os, int run, int t, const FilterState& s) {
    const auto old = os.precision(17);
    for (Index i = 0; i < s.particles.size(); ++i) {
        os << run << ',' << t << ',' << i;
        for (int d = 0; d < 5; ++d) os << ',' << s.particles.states(d, i);
        os << ',' << (s.particles.origin[static_cast<size_t>(i)] == Origin::birth ? "birth" : "survivor") << ','
           << s.kernel.grid.weights(i) << ',' << s.kernel.entries(i, i) << ',' << s.gamma << '\n';
    }
    os.precision(old);
}

} // namespace dppphd
