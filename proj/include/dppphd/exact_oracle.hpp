#pragma once

#include "dppphd/kernel_core.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace dppphd {

/// A point configuration on the grid: sorted grid indices, repeats allowed.
using Configuration = std::vector<int>;

/// Exhaustive Janossy table of a point process with finite support.
/// Values are densities j^(n) w.r.t. the product grid measure; the probability of a
/// configuration is j * prod(w) / prod(multiplicity!).
struct FiniteProcess {
    GridSpec grid;
    std::map<Configuration, double> janossy;

    [[nodiscard]] double probability(const Configuration& c) const;
    [[nodiscard]] double density(const Configuration& c) const;
    [[nodiscard]] double total_mass() const;
    [[nodiscard]] int max_size() const;

    static FiniteProcess from_dpp(const DiscretizedKernel& k, const KernelOptions& opt = {});
    /// Poisson process with the given intensity, truncated at n_max points.
    static FiniteProcess poisson(const GridSpec& g, const Eigen::VectorXd& intensity, int n_max);
    /// Builds the table from configuration probabilities.
    static FiniteProcess from_probabilities(const GridSpec& g, const std::map<Configuration, double>& probs);
};

/// Bernoulli detection with likelihood l_d(z|x) on a finite measurement space.
struct ObservationModel {
    Eigen::VectorXd p_d;  ///< per state point
    Eigen::MatrixXd l_d;  ///< rows: measurement points, cols: state points
    Eigen::VectorXd l_c;  ///< clutter intensity per measurement point

    [[nodiscard]] double q(Index x) const { return 1.0 - p_d(x); }
    [[nodiscard]] double lt(Index z, Index x) const { return p_d(x) * l_d(z, x); }
};

/// Weighting of the association sum in the joint Janossy density.
enum class JointForm {
    factorial_prefactor,  ///< n!/(n-|S|)! prefactor times the sum over injections
    per_association,      ///< sum over injections only
};

// ---- Formula path ----

[[nodiscard]] double joint_janossy(const FiniteProcess& prior, const ObservationModel& obs, const IndexSet& states,
                                   const IndexSet& meas, JointForm form = JointForm::per_association);

[[nodiscard]] double measurement_janossy(const FiniteProcess& prior, const ObservationModel& obs,
                                         const IndexSet& meas, int n_max);

[[nodiscard]] double corrector_upsilon1(const FiniteProcess& prior, const ObservationModel& obs, const IndexSet& meas,
                                        int x, int n_max);

[[nodiscard]] double corrector_upsilon2(const FiniteProcess& prior, const ObservationModel& obs, const IndexSet& meas,
                                        int x, int y, int n_max);

/// Corrector ratios over the grid for one measurement set.
struct Correctors {
    double j_xi = 0.0;
    Eigen::VectorXd l1;                     ///< l1(x)
    Eigen::MatrixXd l1z;                    ///< l1(x; z_k), column k
    Eigen::MatrixXd l2;                     ///< l2(x, y), diagonal included
    std::vector<Eigen::MatrixXd> l2z;       ///< l2(x, y; z_k)
    std::vector<std::vector<Eigen::MatrixXd>> l2zz;  ///< l2(x, y; z_k, z_l), k != l
};

[[nodiscard]] Correctors compute_correctors(const FiniteProcess& prior, const ObservationModel& obs,
                                            const IndexSet& meas, int n_max, bool second_order = true);

[[nodiscard]] Eigen::VectorXd posterior_intensity_exact(const FiniteProcess& prior, const ObservationModel& obs,
                                                        const IndexSet& meas, int n_max);

/// Zero diagonal.
[[nodiscard]] Eigen::MatrixXd posterior_pair_exact(const FiniteProcess& prior, const ObservationModel& obs,
                                                   const IndexSet& meas, int n_max);

[[nodiscard]] double posterior_covariance_exact(const FiniteProcess& prior, const ObservationModel& obs,
                                                const IndexSet& meas, const IndexSet& a, const IndexSet& b,
                                                int n_max);

/// Posterior Janossy table through the joint/measurement Janossy ratio.
[[nodiscard]] FiniteProcess posterior_from_joint(const FiniteProcess& prior, const ObservationModel& obs,
                                                 const IndexSet& meas, int n_max, JointForm form);

// ---- Enumeration path ----

[[nodiscard]] FiniteProcess enumerate_posterior(const FiniteProcess& prior, const ObservationModel& obs,
                                                const IndexSet& meas);

/// Moments of a finite process computed directly from its table.
[[nodiscard]] Eigen::VectorXd process_intensity(const FiniteProcess& p);
[[nodiscard]] Eigen::MatrixXd process_pair(const FiniteProcess& p);  ///< zero diagonal
[[nodiscard]] double process_covariance(const FiniteProcess& p, const IndexSet& a, const IndexSet& b);
[[nodiscard]] double process_expected_count(const FiniteProcess& p);

// ---- Poisson closed forms ----

[[nodiscard]] double poisson_measurement_janossy(const GridSpec& g, const Eigen::VectorXd& intensity,
                                                 const ObservationModel& obs, const IndexSet& meas);
[[nodiscard]] Eigen::VectorXd poisson_posterior_intensity(const GridSpec& g, const Eigen::VectorXd& intensity,
                                                          const ObservationModel& obs, const IndexSet& meas);
[[nodiscard]] Eigen::MatrixXd poisson_posterior_pair(const GridSpec& g, const Eigen::VectorXd& intensity,
                                                     const ObservationModel& obs, const IndexSet& meas);
[[nodiscard]] double poisson_posterior_covariance(const GridSpec& g, const Eigen::VectorXd& intensity,
                                                  const ObservationModel& obs, const IndexSet& meas,
                                                  const IndexSet& a, const IndexSet& b);

// ---- Case files ----

struct OracleCase {
    std::string name;
    FiniteProcess prior;
    ObservationModel obs;
    IndexSet meas;
    int n_max = 0;
};

void write_case(std::ostream& os, const OracleCase& c);
[[nodiscard]] OracleCase read_case(std::istream& is);

} // namespace dppphd
