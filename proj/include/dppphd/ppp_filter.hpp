#pragma once

#include "dppphd/scenario.hpp"
#include "dppphd/smc_engine.hpp"

#include <iosfwd>

namespace dppphd {

/// Intensity-weighted particles of the Poisson PHD filter.
struct WeightedParticles {
    ParticleSet particles;
    Eigen::VectorXd weights;

    [[nodiscard]] double mass() const { return weights.sum(); }
};

/// w_i <- w_i (q_i + sum_z lt(z|x_i) / (l_c(z) + sum_u lt(z|x_u) w_u)).
[[nodiscard]] Eigen::VectorXd ppp_update_weights(const Eigen::VectorXd& weights, const UpdateInputs& in);

/// Moves particles, scales weights by p_s and appends births of total weight `birth_mass`.
[[nodiscard]] WeightedParticles ppp_predict(const WeightedParticles& p, const DynamicsConfig& dyn,
                                            const SmcConfig& cfg, double birth_mass, const Window& window,
                                            Philox& rng);

[[nodiscard]] WeightedParticles ppp_update(const WeightedParticles& p, const Scan& scan, const SensorConfig& sensor);

struct PppDiagnostics {
    double mass_predicted = 0.0;
    double mass_birth = 0.0;
    double mass_first_update = 0.0;
    Index particles = 0;
};

/// Update, resample with weights reset to mass/N, and the second update.
[[nodiscard]] WeightedParticles ppp_correct(const WeightedParticles& predicted, const Scan& scan,
                                            const SensorConfig& sensor, const SmcConfig& cfg, Philox& rng,
                                            PppDiagnostics* diag = nullptr);

[[nodiscard]] WeightedParticles ppp_initialize(const Scan& scan, const SensorConfig& sensor, const SmcConfig& cfg,
                                               Philox& rng, PppDiagnostics* diag = nullptr);

[[nodiscard]] WeightedParticles ppp_step(const WeightedParticles& p, const Scan& scan, const DynamicsConfig& dyn,
                                         const SensorConfig& sensor, const SmcConfig& cfg, Philox& rng,
                                         PppDiagnostics* diag = nullptr);

void write_ppp_snapshot(std::ostream& os, int run, int t, const WeightedParticles& p);

} // namespace dppphd
