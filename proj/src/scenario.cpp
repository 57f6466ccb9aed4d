#include "dppphd/scenario.hpp"

#include "dppphd/errors.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

namespace dppphd {

namespace {

constexpr double kPi = boost::math::double_constants::pi;

double uniform(Philox& rng, double a, double b) { return a + (b - a) * rng.uniform01(); }

double normal(Philox& rng, double sd) {
    if (sd <= 0.0) return 0.0;
    boost::random::normal_distribution<double> nd(0.0, sd);
    return nd(rng);
}

double gauss_pdf(double d, double sd) {
    static const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * kPi);
    return inv_sqrt_2pi / sd * std::exp(-0.5 * (d / sd) * (d / sd));
}

} // namespace

// ---- Window ----

double Window::area() const {
    double a = 0.0;
    for (const auto& r : rects) a += r.area();
    return a;
}

bool Window::contains(double x, double y) const {
    return std::any_of(rects.begin(), rects.end(), [&](const Rect& r) { return r.contains(x, y); });
}

Eigen::Vector2d Window::extent() const {
    if (rects.empty()) return Eigen::Vector2d::Zero();
    double x0 = rects[0].x0, x1 = rects[0].x1, y0 = rects[0].y0, y1 = rects[0].y1;
    for (const auto& r : rects) {
        x0 = std::min(x0, r.x0);
        x1 = std::max(x1, r.x1);
        y0 = std::min(y0, r.y0);
        y1 = std::max(y1, r.y1);
    }
    return {x1 - x0, y1 - y0};
}

double Window::diameter() const { return extent().norm(); }

Eigen::Vector2d Window::sample(Philox& rng) const {
    const double total = area();
    double u = rng.uniform01() * total;
    for (const auto& r : rects) {
        if (u < r.area() || &r == &rects.back())
            return {uniform(rng, r.x0, r.x1), uniform(rng, r.y0, r.y1)};
        u -= r.area();
    }
    return Eigen::Vector2d::Zero();
}

RangeBearingBox range_bearing_box(const Rect& r) {
    RangeBearingBox b;
    const double cx = std::clamp(0.0, r.x0, r.x1);
    const double cy = std::clamp(0.0, r.y0, r.y1);
    b.r0 = std::hypot(cx, cy);
    const double xs[2] = {r.x0, r.x1};
    const double ys[2] = {r.y0, r.y1};
    b.r1 = 0.0;
    for (double x : xs)
        for (double y : ys) b.r1 = std::max(b.r1, std::hypot(x, y));
    const bool interior = r.x0 < 0.0 && r.x1 > 0.0 && r.y0 < 0.0 && r.y1 > 0.0;
    const bool cut = r.x0 < 0.0 && r.y0 <= 0.0 && r.y1 >= 0.0;
    if (interior || cut) {
        b.b0 = -kPi;
        b.b1 = kPi;
        return b;
    }
    // Corners, plus the edge directions when the sensor sits on an edge.
    std::vector<double> angles;
    for (double x : xs)
        for (double y : ys)
            if (x != 0.0 || y != 0.0) angles.push_back(std::atan2(y, x));
    if (r.contains(0.0, 0.0)) {
        if (r.x0 < 0.0) angles.push_back(kPi);
        if (r.x1 > 0.0) angles.push_back(0.0);
        if (r.y0 < 0.0) angles.push_back(-kPi / 2);
        if (r.y1 > 0.0) angles.push_back(kPi / 2);
    }
    b.b0 = *std::min_element(angles.begin(), angles.end());
    b.b1 = *std::max_element(angles.begin(), angles.end());
    return b;
}

// ---- Motion ----

Eigen::Matrix<double, 5, 5> turn_matrix(double theta, double tau) {
    const double wt = theta * tau;
    double s_over = tau;           // sin(tau theta) / theta
    double c_over = 0.5 * wt * tau; // (1 - cos(tau theta)) / theta
    if (std::abs(theta) > 1e-9) {
        s_over = std::sin(wt) / theta;
        c_over = (1.0 - std::cos(wt)) / theta;
    } else {
        s_over = tau - tau * wt * wt / 6.0;
    }
    const double c = std::cos(wt), s = std::sin(wt);
    Eigen::Matrix<double, 5, 5> f = Eigen::Matrix<double, 5, 5>::Zero();
    f(0, 0) = 1.0;
    f(0, 1) = s_over;
    f(0, 3) = -c_over;
    f(1, 1) = c;
    f(1, 3) = -s;
    f(2, 1) = c_over;
    f(2, 2) = 1.0;
    f(2, 3) = s_over;
    f(3, 1) = s;
    f(3, 3) = c;
    f(4, 4) = 1.0;
    return f;
}

Eigen::Matrix<double, 5, 3> noise_gain(double tau) {
    Eigen::Matrix<double, 5, 3> g = Eigen::Matrix<double, 5, 3>::Zero();
    g(0, 0) = 0.5 * tau * tau;
    g(1, 0) = tau;
    g(2, 1) = 0.5 * tau * tau;
    g(3, 1) = tau;
    g(4, 2) = tau;
    return g;
}

std::vector<State5> repulsion_terms(const std::vector<Target>& targets, const DynamicsConfig& cfg) {
    const size_t n = targets.size();
    std::vector<State5> out(n, State5::Zero());
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const State5 d = targets[i].state - targets[j].state;
            const double norm = cfg.position_norm ? std::hypot(d(0), d(2)) : d.norm();
            if (norm == 0.0)
                throw DegenerateGeometry("targets " + std::to_string(targets[i].id) + " and " +
                                         std::to_string(targets[j].id) + " coincide");
            out[i](0) += cfg.zeta_x * d(0) / norm;
            out[i](2) += cfg.zeta_y * d(2) / norm;
        }
    }
    return out;
}

std::vector<Target> step_dynamics(const std::vector<Target>& targets, const DynamicsConfig& cfg, Philox& rng) {
    const auto rep = repulsion_terms(targets, cfg);
    const auto g = noise_gain(cfg.tau);
    std::vector<Target> out = targets;
    for (size_t i = 0; i < targets.size(); ++i) {
        const State5& x = targets[i].state;
        Eigen::Vector3d v(normal(rng, cfg.sigma_vx), normal(rng, cfg.sigma_vy), normal(rng, cfg.sigma_vtheta));
        out[i].state = turn_matrix(x(4), cfg.tau) * x + g * v + rep[i];
    }
    return out;
}

void propagate_states(StateMatrix& states, const DynamicsConfig& cfg, Philox& rng) {
    const auto g = noise_gain(cfg.tau);
    for (Eigen::Index i = 0; i < states.cols(); ++i) {
        const State5 x = states.col(i);
        Eigen::Vector3d v(normal(rng, cfg.sigma_vx), normal(rng, cfg.sigma_vy), normal(rng, cfg.sigma_vtheta));
        states.col(i) = turn_matrix(x(4), cfg.tau) * x + g * v;
    }
}

// ---- Sensor ----

double wrap_angle(double a) {
    a = std::fmod(a + kPi, 2.0 * kPi);
    if (a <= 0.0) a += 2.0 * kPi;
    return a - kPi;
}

Detection polar(double x, double y) { return {std::hypot(x, y), std::atan2(y, x)}; }

Eigen::Vector2d cartesian(const Detection& d) {
    return {d.range * std::cos(d.bearing), d.range * std::sin(d.bearing)};
}

Scan generate_scan(const std::vector<Target>& targets, const SensorConfig& sensor, const std::set<int>& forced_misses,
                   int time, Philox& rng) {
    Scan scan;
    scan.time = time;
    for (const auto& t : targets) {
        const double u = rng.uniform01();
        if (forced_misses.count(t.id) || u >= sensor.p_d || !sensor.window.contains(t.state(0), t.state(2))) continue;
        const Detection p = polar(t.state(0), t.state(2));
        const double r = p.range + normal(rng, sensor.sigma_r);
        const double b = wrap_angle(p.bearing + normal(rng, sensor.sigma_b));
        scan.detections.push_back({r, b});
        scan.truth_links.push_back(t.id);
    }
    if (sensor.clutter_mean > 0.0) {
        for (const auto& rect : sensor.window.rects) {
            boost::random::poisson_distribution<int, double> pd(sensor.clutter_mean);
            const int n = pd(rng);
            const auto box = range_bearing_box(rect);
            for (int k = 0; k < n; ++k) {
                const double r = uniform(rng, box.r0, box.r1);
                const double b = uniform(rng, box.b0, box.b1);
                scan.detections.push_back({r, b});
                scan.truth_links.push_back(-1);
            }
        }
    }
    return scan;
}

double detection_likelihood(const Detection& z, double x, double y, const SensorConfig& sensor) {
    const Detection p = polar(x, y);
    const double lr = gauss_pdf(z.range - p.range, sensor.sigma_r);
    const double d = wrap_angle(z.bearing - p.bearing);
    // Wrapped normal on the circle.
    const int k_max = 1 + static_cast<int>(4.0 * sensor.sigma_b / (2.0 * kPi));
    double lb = 0.0;
    for (int k = -k_max; k <= k_max; ++k) lb += gauss_pdf(d + 2.0 * kPi * k, sensor.sigma_b);
    return lr * lb;
}

double clutter_density(const Detection& z, const SensorConfig& sensor) {
    if (sensor.clutter_mean <= 0.0) return 0.0;
    double l = 0.0;
    for (const auto& rect : sensor.window.rects) {
        const auto box = range_bearing_box(rect);
        if (box.area() > 0.0 && box.contains(z.range, z.bearing)) l += sensor.clutter_mean / box.area();
    }
    return l;
}

// ---- Scripted events ----

std::map<int, StepEvents> scripted_events(const std::vector<ScheduleEntry>& schedule,
                                          const std::vector<int>& initial_ids) {
    std::vector<const ScheduleEntry*> sorted;
    for (const auto& e : schedule) sorted.push_back(&e);
    std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->t < b->t; });

    std::set<int> alive(initial_ids.begin(), initial_ids.end());
    std::set<int> ever = alive;
    std::map<int, StepEvents> out;
    for (const auto* e : sorted) {
        if (e->t < 0) throw ScheduleError("event at negative step " + std::to_string(e->t));
        auto& ev = out[e->t];
        switch (e->kind) {
        case ScheduleEntry::Kind::miss:
            for (int id : e->ids) {
                if (!alive.count(id))
                    throw ScheduleError("miss at t=" + std::to_string(e->t) + " references target " +
                                        std::to_string(id) + " which does not exist");
                ev.misses.insert(id);
            }
            break;
        case ScheduleEntry::Kind::death:
            for (int id : e->ids) {
                if (!alive.count(id))
                    throw ScheduleError("death at t=" + std::to_string(e->t) + " references target " +
                                        std::to_string(id) + " which does not exist");
                ev.deaths.insert(id);
                alive.erase(id);
            }
            break;
        case ScheduleEntry::Kind::birth:
            if (e->states.size() != e->ids.size())
                throw ScheduleError("birth at t=" + std::to_string(e->t) + " needs one state per id");
            for (size_t k = 0; k < e->ids.size(); ++k) {
                if (ever.count(e->ids[k]))
                    throw ScheduleError("birth at t=" + std::to_string(e->t) + " reuses id " +
                                        std::to_string(e->ids[k]));
                ever.insert(e->ids[k]);
                alive.insert(e->ids[k]);
                ev.births.push_back({e->ids[k], e->states[k]});
            }
            break;
        }
    }
    return out;
}

// ---- Export ----

void write_truth_header(std::ostream& os) { os << "run,t,target_id,x,xdot,y,ydot,theta\n"; }

void write_truth_rows(std::ostream& os, int run, int t, const std::vector<Target>& targets) {
    const auto old = os.precision(17);
    for (const auto& tg : targets) {
        os << run << ',' << t << ',' << tg.id;
        for (int k = 0; k < 5; ++k) os << ',' << tg.state(k);
        os << '\n';
    }
    os.precision(old);
}

void write_scan_header(std::ostream& os) { os << "run,t,det_index,range,bearing,truth_link\n"; }

void write_scan_rows(std::ostream& os, int run, const Scan& scan) {
    const auto old = os.precision(17);
    for (size_t k = 0; k < scan.size(); ++k) {
        os << run << ',' << scan.time << ',' << k << ',' << scan.detections[k].range << ','
           << scan.detections[k].bearing << ',';
        if (scan.truth_links[k] < 0)
            os << "clutter";
        else
            os << scan.truth_links[k];
        os << '\n';
    }
    os.precision(old);
}

} // namespace dppphd
