#pragma once

#include "dppphd/rng.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <map>
#include <set>
#include <vector>

namespace dppphd {

/// (x, xdot, y, ydot, theta) in m, m/s, rad/s.
using State5 = Eigen::Matrix<double, 5, 1>;
using StateMatrix = Eigen::Matrix<double, 5, Eigen::Dynamic>;

struct Target {
    int id = 0;
    State5 state = State5::Zero();
};

struct DynamicsConfig {
    double tau = 1.0;
    double sigma_vx = 1.0;
    double sigma_vy = 1.0;
    double sigma_vtheta = 0.0;
    double zeta_x = 0.0;
    double zeta_y = 0.0;
    /// Normalize repulsion by the position distance instead of the full state distance.
    bool position_norm = false;
};

struct Rect {
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;

    [[nodiscard]] double area() const { return (x1 - x0) * (y1 - y0); }
    [[nodiscard]] bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

struct RangeBearingBox {
    double r0 = 0, r1 = 0, b0 = 0, b1 = 0;
    [[nodiscard]] double area() const { return (r1 - r0) * (b1 - b0); }
    [[nodiscard]] bool contains(double r, double b) const { return r >= r0 && r <= r1 && b >= b0 && b <= b1; }
};

/// Bounding box of the rectangle's image under (x, y) -> (range, bearing).
[[nodiscard]] RangeBearingBox range_bearing_box(const Rect& r);

/// Union of disjoint rectangles in the plane.
struct Window {
    std::vector<Rect> rects;

    [[nodiscard]] double area() const;
    [[nodiscard]] bool contains(double x, double y) const;
    [[nodiscard]] double diameter() const;
    [[nodiscard]] Eigen::Vector2d extent() const;  ///< bounding-box side lengths
    /// Uniform position; returns (x, y).
    [[nodiscard]] Eigen::Vector2d sample(Philox& rng) const;
};

struct SensorConfig {
    double sigma_r = 1.0;
    double sigma_b = 0.1;
    double p_d = 0.9;
    double clutter_mean = 0.0;  ///< per window rectangle
    Window window;
};

struct Detection {
    double range = 0.0;
    double bearing = 0.0;
};

/// One scan; truth_links holds a target id or -1 for clutter.
struct Scan {
    int time = 0;
    std::vector<Detection> detections;
    std::vector<int> truth_links;

    [[nodiscard]] size_t size() const { return detections.size(); }
};

// ---- Motion ----

[[nodiscard]] Eigen::Matrix<double, 5, 5> turn_matrix(double theta, double tau);
[[nodiscard]] Eigen::Matrix<double, 5, 3> noise_gain(double tau);

/// Repulsion displacement for every target.
[[nodiscard]] std::vector<State5> repulsion_terms(const std::vector<Target>& targets, const DynamicsConfig& cfg);

[[nodiscard]] std::vector<Target> step_dynamics(const std::vector<Target>& targets, const DynamicsConfig& cfg,
                                                Philox& rng);

/// Motion without repulsion, applied column-wise (filter particles).
void propagate_states(StateMatrix& states, const DynamicsConfig& cfg, Philox& rng);

// ---- Sensor ----

[[nodiscard]] double wrap_angle(double a);
[[nodiscard]] Detection polar(double x, double y);
[[nodiscard]] Eigen::Vector2d cartesian(const Detection& d);

/// Targets outside the window are never detected.
[[nodiscard]] Scan generate_scan(const std::vector<Target>& targets, const SensorConfig& sensor,
                                 const std::set<int>& forced_misses, int time, Philox& rng);

/// Detection likelihood l_d(z|x) without the detection probability.
[[nodiscard]] double detection_likelihood(const Detection& z, double x, double y, const SensorConfig& sensor);

/// Clutter intensity at z: each rectangle spreads its clutter uniformly over its range-bearing box.
[[nodiscard]] double clutter_density(const Detection& z, const SensorConfig& sensor);

// ---- Scripted events ----

struct ScheduleEntry {
    enum class Kind { miss, death, birth };
    int t = 0;
    Kind kind = Kind::miss;
    std::vector<int> ids;        ///< miss/death: target ids; birth: ids assigned to the newborns
    std::vector<State5> states;  ///< birth: initial states, same length as ids
};

struct StepEvents {
    std::set<int> misses;
    std::set<int> deaths;
    std::vector<Target> births;
};

/// Validates the schedule against the initial ids and groups it by step.
[[nodiscard]] std::map<int, StepEvents> scripted_events(const std::vector<ScheduleEntry>& schedule,
                                                        const std::vector<int>& initial_ids);

// ---- Export ----

void write_truth_header(std::ostream& os);
void write_truth_rows(std::ostream& os, int run, int t, const std::vector<Target>& targets);
void write_scan_header(std::ostream& os);
void write_scan_rows(std::ostream& os, int run, const Scan& scan);

} // namespace dppphd
