#include "dppphd/ppp_filter.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

namespace dppphd {

Eigen::VectorXd ppp_update_weights(const Eigen::VectorXd& weights, const UpdateInputs& in) {
    const Eigen::VectorXd s = in.lc + in.lt * weights;
    Eigen::VectorXd inv(s.size());
    for (Index z = 0; z < s.size(); ++z) inv(z) = s(z) >= std::numeric_limits<double>::min() ? 1.0 / s(z) : 0.0;
    const Eigen::VectorXd corr = in.q + in.lt.transpose() * inv;
    return weights.cwiseProduct(corr);
}

WeightedParticles ppp_predict(const WeightedParticles& p, const DynamicsConfig& dyn, const SmcConfig& cfg,
                              double birth_mass, const Window& window, Philox& rng) {
    WeightedParticles out = p;
    propagate_states(out.particles.states, dyn, rng);
    std::fill(out.particles.origin.begin(), out.particles.origin.end(), Origin::survivor);
    out.weights *= cfg.p_s;
    const Index nb = birth_count(birth_mass, cfg);
    if (nb > 0) {
        const ParticleSet born = sample_uniform(nb, window, cfg, Origin::birth, rng);
        out.particles.append(born);
        Eigen::VectorXd w(out.weights.size() + nb);
        w << out.weights, Eigen::VectorXd::Constant(nb, birth_mass / static_cast<double>(nb));
        out.weights = std::move(w);
    }
    return out;
}

WeightedParticles ppp_update(const WeightedParticles& p, const Scan& scan, const SensorConfig& sensor) {
    WeightedParticles out = p;
    out.weights = ppp_update_weights(p.weights, make_update_inputs(p.particles, scan, sensor));
    return out;
}

WeightedParticles ppp_correct(const WeightedParticles& predicted, const Scan& scan, const SensorConfig& sensor,
                              const SmcConfig& cfg, Philox& rng, PppDiagnostics* diag) {
    const WeightedParticles first = ppp_update(predicted, scan, sensor);
    const double mass = first.mass();
    WeightedParticles out;
    out.particles = resample(first.weights, first.particles, cfg, sensor.window, rng);
    out.weights = Eigen::VectorXd::Constant(out.particles.size(), mass / static_cast<double>(out.particles.size()));
    if (cfg.double_update) out = ppp_update(out, scan, sensor);
    if (diag) {
        diag->mass_first_update = mass;
        diag->particles = out.particles.size();
    }
    return out;
}

WeightedParticles ppp_initialize(const Scan& scan, const SensorConfig& sensor, const SmcConfig& cfg, Philox& rng,
                                 PppDiagnostics* diag) {
    WeightedParticles p;
    p.particles = sample_uniform(cfg.n_init, sensor.window, cfg, Origin::birth, rng);
    p.weights = Eigen::VectorXd::Constant(cfg.n_init, cfg.gamma0 / static_cast<double>(cfg.n_init));
    if (diag) {
        diag->mass_predicted = p.mass();
        diag->mass_birth = 0.0;
    }
    return ppp_correct(p, scan, sensor, cfg, rng, diag);
}

WeightedParticles ppp_step(const WeightedParticles& p, const Scan& scan, const DynamicsConfig& dyn,
                           const SensorConfig& sensor, const SmcConfig& cfg, Philox& rng, PppDiagnostics* diag) {
    const double birth = cfg.birth_mode == BirthMassMode::literal ? p.mass() : cfg.birth_mass;
    const WeightedParticles pred = ppp_predict(p, dyn, cfg, birth, sensor.window, rng);
    if (diag) {
        diag->mass_predicted = cfg.p_s * p.mass();
        diag->mass_birth = birth;
    }
    return ppp_correct(pred, scan, sensor, cfg, rng, diag);
}

void write_ppp_snapshot(std::ostream& os, int run, int t, const WeightedParticles& p) {
    const auto old = os.precision(17);
    const double mass = p.mass();
    for (Index i = 0; i < p.particles.size(); ++i) {
        os << run << ',' << t << ',' << i;
        for (int d = 0; d < 5; ++d) os << ',' << p.particles.states(d, i);
        os << ',' << (p.particles.origin[static_cast<size_t>(i)] == Origin::birth ? "birth" : "survivor") << ",1,"
           << p.weights(i) << ',' << mass << '\n';
    }
    os.precision(old);
}

} // namespace dppphd
