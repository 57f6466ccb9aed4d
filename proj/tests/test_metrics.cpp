#include "dppphd/errors.hpp"
#include "dppphd/metrics.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

using namespace dppphd;
using namespace dppphd::test;

namespace {

Target at(int id, double x, double y) {
    Target t;
    t.id = id;
    t.state << x, 0.0, y, 0.0, 0.0;
    return t;
}

Scan scan_of(const std::vector<Point2>& pts, const std::vector<int>& links) {
    Scan s;
    for (const auto& p : pts) s.detections.push_back(polar(p.x(), p.y()));
    s.truth_links = links;
    return s;
}

} // namespace

TEST_CASE("hungarian") {
    SUBCASE("square hand case") {
        Eigen::Matrix3d c;
        c << 4, 1, 3, 2, 0, 5, 3, 2, 2;
        const Assignment a = hungarian(c);
        CHECK(a.cost == doctest::Approx(5.0));
        CHECK(a.row_to_col == std::vector<int>{1, 0, 2});
    }
    SUBCASE("rectangular") {
        Eigen::MatrixXd c(2, 4);
        c << 9, 9, 1, 9, 9, 9, 2, 3;
        const Assignment a = hungarian(c);
        CHECK(a.cost == doctest::Approx(4.0));
        CHECK(a.row_to_col == std::vector<int>{2, 3});
        CHECK_THROWS((void)hungarian(Eigen::MatrixXd::Zero(3, 2)));
    }
    SUBCASE("random against permutations") {
        Philox rng = make_rng(81, 0, Stream::test);
        for (int trial = 0; trial < 200; ++trial) {
            const int n = 1 + trial % 5, m = n + (trial / 5) % 3;
            Eigen::MatrixXd c(n, m);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) c(i, j) = uniform(rng, 0.0, 10.0);
            std::vector<int> perm(static_cast<size_t>(m));
            std::iota(perm.begin(), perm.end(), 0);
            double best = 1e300;
            do {
                double s = 0.0;
                for (int i = 0; i < n; ++i) s += c(i, perm[static_cast<size_t>(i)]);
                best = std::min(best, s);
            } while (std::next_permutation(perm.begin(), perm.end()));
            const Assignment a = hungarian(c);
            CHECK(a.cost == doctest::Approx(best).epsilon(1e-12));
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += c(i, a.row_to_col[static_cast<size_t>(i)]);
            CHECK(s == doctest::Approx(a.cost).epsilon(1e-12));
        }
    }
}

TEST_CASE("ospa") {
    const PointSet a{{0.0, 0.0}, {10.0, 0.0}};
    CHECK(ospa(a, a) == 0.0);
    CHECK(ospa({}, {}) == 0.0);
    CHECK(ospa({{0.0, 0.0}}, {}, 100.0) == doctest::Approx(100.0));
    CHECK(ospa({}, {{0.0, 0.0}}, 100.0) == doctest::Approx(100.0));
    CHECK(ospa(a, {{0.0, 3.0}}, 100.0, 2.0) == doctest::Approx(std::sqrt((9.0 + 10000.0) / 2.0)));
    CHECK(ospa({{0.0, 0.0}}, {{500.0, 0.0}}, 100.0) == doctest::Approx(100.0));
    CHECK_THROWS((void)ospa(a, a, 0.0));
    CHECK_THROWS((void)ospa(a, a, 10.0, 0.5));

    Philox rng = make_rng(82, 0, Stream::test);
    for (int trial = 0; trial < 300; ++trial) {
        const PointSet x = random_points(rng, static_cast<size_t>(trial % 5), 200.0);
        const PointSet y = random_points(rng, static_cast<size_t>((trial / 5) % 6), 200.0);
        const PointSet z = random_points(rng, static_cast<size_t>((trial / 7) % 6), 200.0);
        const double dxy = ospa(x, y), dyz = ospa(y, z), dxz = ospa(x, z);
        CHECK(dxy == doctest::Approx(brute_ospa(x, y, 100.0, 2.0)).epsilon(1e-12));
        CHECK(dxy == doctest::Approx(ospa(y, x)).epsilon(1e-12));
        CHECK(dxy <= 100.0 + 1e-12);
        CHECK(dxz <= dxy + dyz + 1e-9);
    }
}

TEST_CASE("omat") {
    CHECK(omat({{1.0, 2.0}, {3.0, 4.0}}, {{3.0, 4.0}, {1.0, 2.0}}) == doctest::Approx(0.0));
    CHECK(omat({{0.0, 0.0}}, {{0.0, 4.0}}) == doctest::Approx(4.0));
    CHECK_THROWS_AS((void)omat({}, {{0.0, 0.0}}), EmptySet);
    CHECK_THROWS_AS((void)omat({{0.0, 0.0}}, {}), EmptySet);
    SUBCASE("one point against two") {
        // half the mass moves 2, half moves 4
        CHECK(omat({{0.0, 0.0}}, {{2.0, 0.0}, {0.0, 4.0}}) == doctest::Approx(std::sqrt(10.0)));
    }
    SUBCASE("two against three on a simplex grid") {
        const PointSet x{{0.0, 0.0}, {10.0, 0.0}};
        const PointSet y{{1.0, 1.0}, {5.0, 0.0}, {9.0, -2.0}};
        double best = 1e300;
        const int g = 600;  // plan entries on multiples of 1/g
        for (int a = 0; a <= g / 2; ++a)
            for (int b = 0; a + b <= g / 2; ++b) {
                const double p00 = a / static_cast<double>(g), p01 = b / static_cast<double>(g);
                const double p02 = 0.5 - p00 - p01;
                const double p10 = 1.0 / 3.0 - p00, p11 = 1.0 / 3.0 - p01, p12 = 1.0 / 3.0 - p02;
                if (p10 < -1e-12 || p11 < -1e-12 || p12 < -1e-12) continue;
                const double s = p00 * (x[0] - y[0]).squaredNorm() + p01 * (x[0] - y[1]).squaredNorm() +
                                 p02 * (x[0] - y[2]).squaredNorm() + p10 * (x[1] - y[0]).squaredNorm() +
                                 p11 * (x[1] - y[1]).squaredNorm() + p12 * (x[1] - y[2]).squaredNorm();
                best = std::min(best, s);
            }
        CHECK(omat(x, y) == doctest::Approx(std::sqrt(best)).epsilon(1e-9));
    }
    SUBCASE("random against plan enumeration") {
        Philox rng = make_rng(83, 0, Stream::test);
        for (int trial = 0; trial < 200; ++trial) {
            const PointSet x = random_points(rng, 1 + static_cast<size_t>(trial % 3), 100.0);
            const PointSet y = random_points(rng, 1 + static_cast<size_t>((trial / 3) % 4), 100.0);
            const double d = omat(x, y);
            CHECK(d == doctest::Approx(brute_omat(x, y, 2.0)).epsilon(1e-9));
            CHECK(d == doctest::Approx(omat(y, x)).epsilon(1e-9));
            CHECK(d >= 0.0);
        }
    }
}

TEST_CASE("min cost transport") {
    Eigen::MatrixXd c(2, 2);
    c << 1, 5, 4, 1;
    const Eigen::MatrixXd f = min_cost_transport(c, {3, 2}, {2, 3});
    CHECK(f.row(0).sum() == 3.0);
    CHECK(f.row(1).sum() == 2.0);
    CHECK(f.col(0).sum() == 2.0);
    CHECK(f.col(1).sum() == 3.0);
    CHECK(f.cwiseProduct(c).sum() == doctest::Approx(2.0 + 5.0 + 2.0));
    const Eigen::MatrixXd g = min_cost_transport(Eigen::MatrixXd::Zero(1, 3), {6}, {1, 2, 3});
    CHECK(g(0, 2) == 3.0);
}

TEST_CASE("association") {
    SUBCASE("single pair") {
        const auto p = associate(scan_of({{3.0, 4.0}}, {0}), {{100.0, 100.0}});
        REQUIRE(p.size() == 1);
        CHECK(p[0] == std::pair<int, int>{0, 0});
    }
    SUBCASE("tie goes to the lower index") {
        // bearing 0 round-trips exactly, so all three distances are exactly 2
        const auto p = associate(scan_of({{10.0, 0.0}}, {0}), {{12.0, 0.0}, {10.0, 2.0}, {10.0, -2.0}});
        CHECK(p[0].second == 0);
        const auto q = associate(scan_of({{10.0, 0.0}}, {0}), {{10.0, -2.0}, {8.0, 0.0}, {10.0, 2.0}});
        CHECK(q[0].second == 0);
    }
    SUBCASE("no estimates") { CHECK(associate(scan_of({{1.0, 1.0}}, {0}), {}).empty()); }
    SUBCASE("random nearest") {
        Philox rng = make_rng(84, 0, Stream::test);
        for (int trial = 0; trial < 50; ++trial) {
            const PointSet d = random_points(rng, 5, 100.0), e = random_points(rng, 5, 100.0);
            const Scan s = scan_of(d, std::vector<int>(5, -1));
            const auto pairs = associate(s, e);
            REQUIRE(pairs.size() == 5);
            for (const auto& [k, j] : pairs) {
                const Point2 z = cartesian(s.detections[static_cast<size_t>(k)]);
                for (const auto& q : e) CHECK((z - e[static_cast<size_t>(j)]).norm() <= (z - q).norm() + 1e-12);
            }
        }
    }
}

TEST_CASE("good estimates") {
    const std::vector<Target> truth{at(0, 20.0, 20.0), at(1, 60.0, 20.0), at(2, 40.0, 70.0)};
    const std::vector<Point2> meas{{23.0, 24.0}, {60.0, 26.0}, {40.0, 75.0}};
    SUBCASE("estimates at the truth") {
        const GoodEstimate g = good_estimate_stats(scan_of(meas, {0, 1, 2}), target_positions(truth), truth);
        CHECK(*g.ratio == doctest::Approx(1.0));
        CHECK(*g.gain == doctest::Approx(1.0));
        CHECK(g.measurements == 3);
    }
    SUBCASE("estimates at the measurements") {
        const Scan scan = scan_of(meas, {0, 1, 2});
        PointSet at_meas;
        for (const auto& d : scan.detections) at_meas.push_back(cartesian(d));
        const GoodEstimate g = good_estimate_stats(scan, at_meas, truth);
        CHECK(*g.ratio == doctest::Approx(0.0));
        CHECK(*g.gain == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("hand case with clutter") {
        const PointSet est{{21.0, 22.0}, {60.0, 30.0}, {40.0, 72.0}};
        const GoodEstimate g =
            good_estimate_stats(scan_of({meas[0], meas[1], meas[2], {90.0, 90.0}}, {0, 1, 2, -1}), est, truth);
        // distances: meas 5, 6, 5; est sqrt(5), 10, 2
        CHECK(*g.ratio == doctest::Approx(2.0 / 3.0));
        const double gain = ((5.0 - std::sqrt(5.0)) / 5.0 + (6.0 - 10.0) / 6.0 + (5.0 - 2.0) / 5.0) / 3.0;
        CHECK(*g.gain == doctest::Approx(gain));
        CHECK(g.measurements == 3);
    }
    SUBCASE("translation invariance") {
        const PointSet est{{21.0, 22.0}, {60.0, 30.0}, {40.0, 72.0}};
        const Point2 shift(13.0, 7.5);
        std::vector<Target> moved = truth;
        for (auto& t : moved) {
            t.state(0) += shift.x();
            t.state(2) += shift.y();
        }
        std::vector<Point2> mm = meas;
        PointSet me = est;
        for (auto& p : mm) p += shift;
        for (auto& p : me) p += shift;
        const GoodEstimate a = good_estimate_stats(scan_of(meas, {0, 1, 2}), est, truth);
        const GoodEstimate b = good_estimate_stats(scan_of(mm, {0, 1, 2}), me, moved);
        CHECK(*a.ratio == *b.ratio);
        CHECK(*a.gain == doctest::Approx(*b.gain).epsilon(1e-9));
    }
    SUBCASE("no target measurements") {
        const GoodEstimate g = good_estimate_stats(scan_of({{5.0, 5.0}}, {-1}), {{1.0, 1.0}}, truth);
        CHECK(!g.ratio);
        CHECK(!g.gain);
    }
}

TEST_CASE("estimate extraction") {
    Philox rng = make_rng(85, 0, Stream::test);
    SUBCASE("single heavy particle") {
        Eigen::MatrixXd pos(2, 4);
        pos << 1, 2, 3, 4, 5, 6, 7, 8;
        const Eigen::Vector4d mass(0.0, 0.0, 1.0, 0.0);
        const PointSet e = extract_estimates(pos, mass, 1.0, rng);
        REQUIRE(e.size() == 1);
        CHECK(e[0].x() == doctest::Approx(3.0));
        CHECK(e[0].y() == doctest::Approx(7.0));
    }
    SUBCASE("two blobs") {
        const int n = 200;
        Eigen::MatrixXd pos(2, n);
        Eigen::VectorXd mass(n);
        for (int i = 0; i < n; ++i) {
            const double cx = i < n / 2 ? 10.0 : 90.0, cy = i < n / 2 ? 10.0 : 50.0;
            pos(0, i) = cx + uniform(rng, -2.0, 2.0);
            pos(1, i) = cy + uniform(rng, -2.0, 2.0);
            mass(i) = uniform(rng, 0.1, 1.0);
        }
        PointSet e = extract_estimates(pos, mass, 2.2, rng);
        REQUIRE(e.size() == 2);
        std::sort(e.begin(), e.end(), [](const Point2& a, const Point2& b) { return a.x() < b.x(); });
        CHECK((e[0] - Point2(10.0, 10.0)).norm() < 2.0);
        CHECK((e[1] - Point2(90.0, 50.0)).norm() < 2.0);
    }
    SUBCASE("small mass gives nothing") {
        CHECK(extract_estimates(Eigen::MatrixXd::Zero(2, 3), Eigen::Vector3d::Ones(), 0.5, rng).empty());
        CHECK(extract_estimates(Eigen::MatrixXd::Zero(2, 3), Eigen::Vector3d::Ones(), 0.0, rng).empty());
    }
}

TEST_CASE("metric rows") {
    std::ostringstream os;
    write_metric_header(os);
    MetricRecord r;
    r.t = 4;
    r.ospa = 12.5;
    r.count_estimate = 2.25;
    r.count_truth = 3;
    r.good_ratio = 0.5;
    write_metric_row(os, 1, r);
    CHECK(os.str() == "run,t,ospa,omat,good_ratio,gain,count_estimate,count_truth,corr_ab\n1,4,12.5,nan,0.5,nan,2.25,3,nan\n");
}
