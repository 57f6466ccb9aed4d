#pragma once

#include "dppphd/rng.hpp"
#include "dppphd/scenario.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

namespace dppphd {

using Point2 = Eigen::Vector2d;
using PointSet = std::vector<Point2>;

/// Minimum-cost assignment of every row to a distinct column; requires rows <= cols.
struct Assignment {
    std::vector<int> row_to_col;
    double cost = 0.0;
};

[[nodiscard]] Assignment hungarian(const Eigen::MatrixXd& cost);

[[nodiscard]] double ospa(const PointSet& truth, const PointSet& est, double c = 100.0, double p = 2.0);

/// p-Wasserstein distance between the uniform empirical measures; throws EmptySet.
[[nodiscard]] double omat(const PointSet& truth, const PointSet& est, double p = 2.0);

/// Integer transportation problem: supplies and demands with equal totals.
/// Returns the flow matrix of a minimum-cost plan.
[[nodiscard]] Eigen::MatrixXd min_cost_transport(const Eigen::MatrixXd& cost, const std::vector<long long>& supply,
                                                 const std::vector<long long>& demand);

/// (detection index, estimate index) with the nearest estimate per detection; ties go to the lower index.
[[nodiscard]] std::vector<std::pair<int, int>> associate(const Scan& scan, const PointSet& est);

struct GoodEstimate {
    std::optional<double> ratio;
    std::optional<double> gain;
    int measurements = 0;
};

[[nodiscard]] GoodEstimate good_estimate_stats(const Scan& scan, const PointSet& est,
                                               const std::vector<Target>& truth);

/// Weighted k-means (k-means++ seeding, best of `restarts`) on particle positions.
[[nodiscard]] PointSet weighted_kmeans(const Eigen::MatrixXd& positions, const Eigen::VectorXd& mass, int k,
                                       Philox& rng, int restarts = 10);

/// k = round(gamma) cluster centers; empty when gamma <= 0.5.
[[nodiscard]] PointSet extract_estimates(const Eigen::MatrixXd& positions, const Eigen::VectorXd& mass, double gamma,
                                         Philox& rng);

[[nodiscard]] PointSet target_positions(const std::vector<Target>& targets);

struct MetricRecord {
    int t = 0;
    double ospa = 0.0;
    std::optional<double> omat;
    std::optional<double> good_ratio;
    std::optional<double> gain;
    double count_estimate = 0.0;
    int count_truth = 0;
    std::optional<double> corr_ab;
};

void write_metric_header(std::ostream& os);
void write_metric_row(std::ostream& os, int run, const MetricRecord& r);

} // namespace dppphd
