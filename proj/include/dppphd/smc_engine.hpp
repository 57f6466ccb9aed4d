#pragma once

#include "dppphd/kernel_core.hpp"
#include "dppphd/rng.hpp"
#include "dppphd/scenario.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace dppphd {

enum class Origin : std::uint8_t { survivor, birth };

struct ParticleSet {
    StateMatrix states;
    std::vector<Origin> origin;

    [[nodiscard]] Index size() const { return states.cols(); }
    /// 2 x N matrix of (x, y).
    [[nodiscard]] Eigen::MatrixXd positions() const;
    void append(const ParticleSet& other);
};

enum class ResampleMode { multinomial, systematic, top_k };

/// Source of the birth mass injected at each prediction.
enum class BirthMassMode {
    literal,  ///< predicted mass of the surviving particles
    fixed,    ///< SmcConfig::birth_mass
};

struct SmcConfig {
    int n_init = 800;
    int p_p = 30;
    int p_b = 10;
    int cap = 1000;
    double roughening_scale = 0.05;
    double alpha = 4.0;
    double eta = 0.1;
    double gamma0 = 2.0;

    /// Birth particles injected when the floor of the birth mass is 0; negative means P_b.
    int min_birth_particles = -1;
    BirthMassMode birth_mode = BirthMassMode::literal;
    double birth_mass = 0.2;
    double p_s = 1.0;

    /// Initial and birth velocity components are uniform in [-v, v].
    double init_speed = 1.0;
    /// Initial and birth turn rates are uniform in [-w, w].
    double init_turn = 0.1;

    ResampleMode resample = ResampleMode::multinomial;
    /// Recompute the posterior after resampling with the same scan.
    bool double_update = true;
    /// Zero every off-diagonal kernel entry after each operation.
    bool diagonal_only = false;

    [[nodiscard]] int init_halfwidth() const { return floor_count(eta * p_b); }
    [[nodiscard]] int birth_halfwidth() const { return floor_count(eta * p_b); }
    [[nodiscard]] int resample_halfwidth() const { return floor_count(eta * p_p); }

    static int floor_count(double v) { return static_cast<int>(std::floor(v + 1e-9)); }
};

/// Per-scan quantities seen by the corrector.
struct UpdateInputs {
    Eigen::MatrixXd lt;  ///< p_d l_d(z|x), rows: measurements, cols: particles
    Eigen::VectorXd lc;  ///< clutter intensity per measurement
    Eigen::VectorXd q;   ///< miss probability per particle
};

[[nodiscard]] UpdateInputs make_update_inputs(const ParticleSet& p, const Scan& scan, const SensorConfig& sensor);

/// Uniform states: positions in the window, velocities and turn rates in the configured boxes.
[[nodiscard]] ParticleSet sample_uniform(Index n, const Window& window, const SmcConfig& cfg, Origin origin,
                                         Philox& rng);

/// Per-dimension extent of the sampling box.
[[nodiscard]] State5 state_extent(const Window& window, const SmcConfig& cfg);

/// Normalized block with diagonal gamma/n and off-diagonal alpha*gamma/n within the halfwidth;
/// returns density entries for weights `window_area / n`.
[[nodiscard]] DiscretizedKernel block_kernel(const Eigen::MatrixXd& positions, double window_area, double gamma,
                                             double alpha, int halfwidth);

/// Block kernel (alpha = 0 in diagonal-only mode), projected, then scaled down to weighted trace gamma
/// when the projection raised it.
[[nodiscard]] DiscretizedKernel feasible_block_kernel(const Eigen::MatrixXd& positions, double window_area,
                                                      double gamma, const SmcConfig& cfg, int halfwidth,
                                                      const KernelOptions& opt = {});

struct Initialized {
    ParticleSet particles;
    DiscretizedKernel kernel;
};

[[nodiscard]] Initialized init_particles(const SmcConfig& cfg, const Window& window, Philox& rng,
                                         const KernelOptions& opt = {});

/// min(P_p * floor(gamma), cap), with P_p when the floor is 0.
[[nodiscard]] int resample_count(double gamma, const SmcConfig& cfg);

/// P_b * floor(gamma), with the configured minimum when the floor is 0.
[[nodiscard]] int birth_count(double gamma_birth, const SmcConfig& cfg);

/// Draws resample_count(sum(intensity)) particles in source order, then roughens them.
[[nodiscard]] ParticleSet resample(const Eigen::VectorXd& intensity, const ParticleSet& particles,
                                   const SmcConfig& cfg, const Window& window, Philox& rng);

/// Source indices of a resample draw, ascending.
[[nodiscard]] std::vector<Index> resample_indices(const Eigen::VectorXd& intensity, Index count, ResampleMode mode,
                                                  Philox& rng);

[[nodiscard]] Initialized inject_births(ParticleSet particles, DiscretizedKernel kernel, const SmcConfig& cfg,
                                        double gamma_birth, const Window& window, Philox& rng,
                                        const KernelOptions& opt = {});

/// Post-resampling kernel: diagonal gamma/N, off-diagonal alpha*gamma/N in the P_p band.
[[nodiscard]] DiscretizedKernel reinit_kernel(const ParticleSet& particles, double gamma, const SmcConfig& cfg,
                                              const Window& window, const KernelOptions& opt = {});

void zero_off_diagonal(DiscretizedKernel& k);

} // namespace dppphd
