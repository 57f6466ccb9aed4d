#pragma once

#include "dppphd/exact_oracle.hpp"
#include "dppphd/kernel_core.hpp"
#include "dppphd/scenario.hpp"
#include "dppphd/smc_engine.hpp"

#include <iosfwd>

namespace dppphd {

/// Corrector inputs for a finite observation model and a measurement index set.
[[nodiscard]] UpdateInputs inputs_from_model(const ObservationModel& obs, const IndexSet& meas);

// ---- Update ----

/// s_c(z) = l_c(z) + int J(v,v) lt(z|v) dv for every measurement.
[[nodiscard]] Eigen::VectorXd corrector_denominators(const DiscretizedKernel& j, const UpdateInputs& in);
[[nodiscard]] double s_c(Index z, const DiscretizedKernel& j, const UpdateInputs& in);

/// Pair integrals int int J(u,v)^2 lt(z|u) lt(z'|v) du dv.
[[nodiscard]] Eigen::MatrixXd pair_integrals(const DiscretizedKernel& j, const UpdateInputs& in);

struct UpdateResult {
    DiscretizedKernel kernel;     ///< projected posterior kernel
    Eigen::VectorXd intensity;    ///< posterior intensity before projection
    Eigen::MatrixXd pair;         ///< posterior pair density, zero diagonal
    ClampStats sqrt_clamps;       ///< negative radicands of the off-diagonal reconstruction
    ClampStats det_clamps;        ///< negative J(x,x)J(y,y) - J(x,y)^2
    long long nonpositive_denominators = 0;
    double gamma = 0.0;           ///< weighted trace after projection
};

/// Source of the squared posterior off-diagonal.
enum class OffDiagonalForm {
    closed_form,  ///< squared_posterior_kernel
    moments,      ///< mu(x) mu(y) - rho(x, y) with the first-order intensity
};

struct UpdateOptions {
    KernelOptions kernel;
    bool diagonal_only = false;
    OffDiagonalForm off_diagonal = OffDiagonalForm::closed_form;
};

/// Posterior kernel: first-order intensity on the diagonal, square root of the squared-kernel form off it.
/// `intensity` and `pair` hold the first-order and pair moments either way.
[[nodiscard]] UpdateResult update_kernel(const DiscretizedKernel& k, const UpdateInputs& in,
                                         const UpdateOptions& opt = {});

/// Same with a precomputed interaction kernel.
[[nodiscard]] UpdateResult update_kernel(const DiscretizedKernel& k, const DiscretizedKernel& j,
                                         const UpdateInputs& in, const UpdateOptions& opt = {});

/// Squared posterior kernel by the closed form in terms of J alone (miss term q J).
[[nodiscard]] Eigen::MatrixXd squared_posterior_kernel(const DiscretizedKernel& j, const UpdateInputs& in);

/// First-order posterior density with the miss term q J instead of q K.
[[nodiscard]] Eigen::VectorXd intensity_from_interaction(const DiscretizedKernel& j, const UpdateInputs& in);

enum class CovarianceForm {
    consistent,  ///< equals int_{A cap B} mu - int_{A x B} K^2 for the squared-kernel closed form
    whole_space,  ///< last pair term integrated over the whole space
};

[[nodiscard]] double posterior_covariance_approx(const DiscretizedKernel& k, const UpdateInputs& in,
                                                 const IndexSet& a, const IndexSet& b,
                                                 CovarianceForm form = CovarianceForm::consistent,
                                                 const KernelOptions& opt = {});

/// cov(A,B) / sqrt(var A var B) for the determinantal form of the posterior kernel, clamped to [-1, 1].
[[nodiscard]] double correlation_estimate(const DiscretizedKernel& posterior, const IndexSet& a, const IndexSet& b);

[[nodiscard]] inline double estimate_count(const DiscretizedKernel& k) { return kernel_mass(k); }

// ---- Prediction ----

struct PredictedMoments {
    Eigen::VectorXd intensity;
    Eigen::MatrixXd pair;  ///< zero diagonal
};

/// Prediction moments on a target grid. `transition(x, u)` is l_s(x|u) as a density in x;
/// births are Poisson with the given intensity on the target grid.
[[nodiscard]] PredictedMoments predict_moments(const DiscretizedKernel& prior, const Eigen::MatrixXd& transition,
                                               double p_s, const Eigen::VectorXd& birth_intensity);

/// sqrt(K(x,x)K(y,y) - rho(x,y)) with clamping.
[[nodiscard]] DiscretizedKernel kernel_from_moments(const GridSpec& grid, const PredictedMoments& m,
                                                    ClampStats* clamps = nullptr, const KernelOptions& opt = {});

// ---- Particle filter ----

struct FilterState {
    ParticleSet particles;
    DiscretizedKernel kernel;
    double gamma = 0.0;
};

struct StepDiagnostics {
    ClampStats sqrt_clamps;
    ClampStats det_clamps;
    long long nonpositive_denominators = 0;
    double gamma_predicted = 0.0;
    double gamma_birth = 0.0;
    double gamma_first_update = 0.0;
    Index particles = 0;
};

/// Moves the particles, rebuilds the kernel from the prediction moments and appends births.
[[nodiscard]] FilterState dpp_predict(const FilterState& s, const DynamicsConfig& dyn, const SmcConfig& cfg,
                                      const Window& window, Philox& rng, StepDiagnostics* diag = nullptr,
                                      const KernelOptions& opt = {});

/// Update, resample, kernel re-initialization and the second update.
[[nodiscard]] FilterState dpp_correct(ParticleSet particles, const DiscretizedKernel& predicted, const Scan& scan,
                                      const SensorConfig& sensor, const SmcConfig& cfg, Philox& rng,
                                      StepDiagnostics* diag = nullptr, const KernelOptions& opt = {});

[[nodiscard]] FilterState dpp_initialize(const Scan& scan, const SensorConfig& sensor, const SmcConfig& cfg,
                                         Philox& rng, StepDiagnostics* diag = nullptr,
                                         const KernelOptions& opt = {});

[[nodiscard]] FilterState dpp_step(const FilterState& s, const Scan& scan, const DynamicsConfig& dyn,
                                   const SensorConfig& sensor, const SmcConfig& cfg, Philox& rng,
                                   StepDiagnostics* diag = nullptr, const KernelOptions& opt = {});

/// Particle indices whose position lies in the rectangle.
[[nodiscard]] IndexSet region_indices(const ParticleSet& p, const Rect& r);

void write_snapshot_header(std::ostream& os);
/// One row per particle: state, origin, grid weight, kernel diagonal, gamma.
void write_snapshot(std::ostream& os, int run, int t, const FilterState& s);

} // namespace dppphd
