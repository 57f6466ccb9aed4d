#include "dppphd/errors.hpp"
#include "dppphd/kernel_core.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <sstream>

using namespace dppphd;
using namespace dppphd::test;

namespace {

std::vector<IndexSet> all_subsets(int n) {
    std::vector<IndexSet> out;
    for (int mask = 0; mask < (1 << n); ++mask) {
        IndexSet s;
        for (int i = 0; i < n; ++i)
            if (mask & (1 << i)) s.push_back(i);
        out.push_back(s);
    }
    return out;
}

} // namespace

TEST_CASE("interaction kernel of zero and diagonal kernels") {
    const DiscretizedKernel zero = unit_kernel(Eigen::MatrixXd::Zero(3, 3));
    const DiscretizedKernel j0 = interaction_kernel(zero);
    CHECK(j0.kind == KernelKind::interaction);
    CHECK(max_abs(j0.entries) == doctest::Approx(0.0));

    const Eigen::Vector3d k(0.1, 0.5, 0.8);
    const DiscretizedKernel jd = interaction_kernel(unit_kernel(k.asDiagonal().toDenseMatrix()));
    for (Index i = 0; i < 3; ++i) CHECK(jd.entries(i, i) == doctest::Approx(k(i) / (1.0 - k(i))).epsilon(1e-12));
    CHECK(max_abs(jd.entries - jd.entries.diagonal().asDiagonal().toDenseMatrix()) < 1e-14);
}

TEST_CASE("interaction kernel 2x2 agrees with the direct inverse") {
    Eigen::Matrix2d k;
    k << 0.3, 0.1, 0.1, 0.3;
    const DiscretizedKernel j = interaction_kernel(unit_kernel(k));
    const Eigen::Matrix2d direct = (Eigen::Matrix2d::Identity() - k).inverse() * k;
    CHECK(max_abs(j.entries - direct) < 1e-12);
    // eigenvalues 0.4 and 0.2 on (1,1)/sqrt2 and (1,-1)/sqrt2
    CHECK(j.entries(0, 0) == doctest::Approx(0.5 * (0.4 / 0.6 + 0.2 / 0.8)).epsilon(1e-12));
    CHECK(j.entries(0, 1) == doctest::Approx(0.5 * (0.4 / 0.6 - 0.2 / 0.8)).epsilon(1e-12));
}

TEST_CASE("interaction kernel rejects a spectrum at the margin") {
    const DiscretizedKernel k = unit_kernel(Eigen::MatrixXd::Identity(2, 2) * 0.9995);
    CHECK_THROWS_AS((void)interaction_kernel(k), SpectrumError);
}

TEST_CASE("interaction kernel properties on random weighted kernels") {
    Philox rng = make_rng(11, 0, Stream::test);
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = 2 + trial % 7;
        const DiscretizedKernel k = random_correlation(rng, n);
        const DiscretizedKernel j = interaction_kernel(k);
        CHECK(max_abs(j.entries - j.entries.transpose()) == 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j.normalized());
        CHECK(es.eigenvalues().minCoeff() > -1e-10);
        const Eigen::MatrixXd kh = k.normalized(), jh = j.normalized();
        CHECK(max_abs(kh * jh - jh * kh) < 1e-9);
        const DiscretizedKernel back = correlation_from_interaction(j);
        CHECK(max_abs(back.entries - k.entries) < 1e-9);
    }
}

TEST_CASE("determinantal moments") {
    SUBCASE("diagonal") {
        const MomentPair m = determinantal_moments(unit_kernel(Eigen::Matrix2d::Identity() * 0.5));
        CHECK(m.intensity(0) == doctest::Approx(0.5));
        CHECK(m.intensity(1) == doctest::Approx(0.5));
        CHECK(m.pair_factorial(0, 1) == doctest::Approx(0.25));
        CHECK(m.pair_factorial(0, 0) == 0.0);
    }
    SUBCASE("fully correlated pair") {
        Eigen::Matrix2d k;
        k << 0.36, 0.3, 0.3, 0.25;
        ClampStats stats;
        const MomentPair m = determinantal_moments(unit_kernel(k), &stats);
        CHECK(m.pair_factorial(0, 1) == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(m.pair_factorial(0, 1) >= 0.0);
    }
    SUBCASE("hand determinant") {
        Eigen::Matrix2d k;
        k << 0.4, 0.2, 0.2, 0.4;
        const MomentPair m = determinantal_moments(unit_kernel(k));
        CHECK(m.pair_factorial(0, 1) == doctest::Approx(0.12).epsilon(1e-14));
    }
    SUBCASE("pair bounded by the product of intensities") {
        Philox rng = make_rng(12, 0, Stream::test);
        for (int trial = 0; trial < 30; ++trial) {
            const MomentPair m = determinantal_moments(random_correlation(rng, 6));
            CHECK(m.intensity.minCoeff() >= 0.0);
            CHECK(m.pair_factorial.minCoeff() >= 0.0);
            for (Index i = 0; i < 6; ++i) {
                CHECK(m.pair_factorial(i, i) == 0.0);
                for (Index j = 0; j < 6; ++j)
                    if (i != j) CHECK(m.pair_factorial(i, j) <= m.intensity(i) * m.intensity(j) + 1e-15);
            }
        }
    }
}

TEST_CASE("cross covariance") {
    SUBCASE("disjoint domains without interaction") {
        const DiscretizedKernel k = unit_kernel(Eigen::Vector3d(0.2, 0.3, 0.4).asDiagonal().toDenseMatrix());
        CHECK(cross_covariance(k, {0}, {1, 2}) == 0.0);
    }
    SUBCASE("full grid with a diagonal kernel") {
        DiscretizedKernel k = unit_kernel(Eigen::Vector3d(0.2, 0.2, 0.2).asDiagonal().toDenseMatrix());
        k.grid.weights = Eigen::Vector3d(0.5, 1.0, 2.0);
        const double expected = 0.2 * 3.5 - 0.04 * (0.25 + 1.0 + 4.0);
        CHECK(cross_covariance(k, {0, 1, 2}, {0, 1, 2}) == doctest::Approx(expected).epsilon(1e-14));
    }
    SUBCASE("hand value on two points") {
        Eigen::Matrix2d k;
        k << 0.4, 0.2, 0.2, 0.4;
        CHECK(cross_covariance(unit_kernel(k), {0}, {1}) == doctest::Approx(-0.04).epsilon(1e-14));
    }
    SUBCASE("sign on disjoint domains") {
        Philox rng = make_rng(13, 0, Stream::test);
        for (int trial = 0; trial < 100; ++trial) {
            const DiscretizedKernel k = random_correlation(rng, 7);
            IndexSet a, b;
            for (int i = 0; i < 7; ++i) (rng.uniform01() < 0.5 ? a : b).push_back(i);
            CHECK(cross_covariance(k, a, b) <= 0.0);
        }
    }
}

TEST_CASE("janossy densities") {
    CHECK(janossy_density_dpp(unit_kernel(Eigen::MatrixXd::Zero(3, 3)), {}) == doctest::Approx(1.0));

    const DiscretizedKernel diag = unit_kernel(Eigen::Vector3d(0.2, 0.5, 0.7).asDiagonal().toDenseMatrix());
    double total = 0.0;
    for (const auto& s : all_subsets(3)) total += janossy_density_dpp(diag, s);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(janossy_density_dpp(diag, {1}) == doctest::Approx(0.8 * 0.5 * 0.3).epsilon(1e-14));

    Eigen::Matrix3d k;
    k << 0.3, 0.02, 0.01, 0.02, 0.4, 0.03, 0.01, 0.03, 0.2;
    total = 0.0;
    for (const auto& s : all_subsets(3)) total += janossy_density_dpp(unit_kernel(k), s);
    CHECK(std::abs(total - 1.0) < 1e-10);

    Philox rng = make_rng(14, 0, Stream::test);
    for (int n : {5, 9, 12}) {
        const DiscretizedKernel rk = random_correlation(rng, n, 0.9);
        double sum = 0.0;
        for (const auto& s : all_subsets(n)) sum += janossy_density_dpp(rk, s);
        CHECK(std::abs(sum - 1.0) < 1e-8);
    }
}

TEST_CASE("projection") {
    SUBCASE("identity on feasible kernels") {
        Eigen::Matrix2d m;
        m << 0.4, 0.2, 0.2, 0.4;
        const DiscretizedKernel p = project_kernel(m, KernelKind::correlation);
        CHECK(max_abs(p.entries - m) < 1e-12);
    }
    SUBCASE("scalar clip") {
        KernelOptions opt;
        opt.delta = 0.01;
        const DiscretizedKernel p = project_kernel(Eigen::MatrixXd::Identity(1, 1) * 1.5, KernelKind::correlation, opt);
        CHECK(p.entries(0, 0) == doctest::Approx(0.99).epsilon(1e-12));
    }
    SUBCASE("random symmetric matrices land in the feasible set and projection is idempotent") {
        Philox rng = make_rng(15, 0, Stream::test);
        const KernelOptions opt;
        for (int trial = 0; trial < 50; ++trial) {
            const DiscretizedKernel p = project_kernel(random_symmetric(rng, 4, 1.0), KernelKind::correlation, opt);
            const KernelCheck c = check_kernel(p, opt);
            CHECK(c.ok());
            CHECK(c.min_eigenvalue >= -1e-9);
            CHECK(c.max_eigenvalue <= 1.0 - opt.delta + 1e-9);
            const DiscretizedKernel twice = project_kernel(p, opt);
            CHECK(max_abs(twice.entries - p.entries) < 1e-12);

            const DiscretizedKernel pj = project_kernel(random_symmetric(rng, 4, 1.0), KernelKind::interaction, opt);
            CHECK(check_kernel(pj, opt).ok());
        }
    }
    SUBCASE("band is re-applied") {
        Philox rng = make_rng(16, 0, Stream::test);
        DiscretizedKernel k = unit_kernel(random_symmetric(rng, 8, 0.3));
        k.band = BandSpec::index_band(8, 1);
        const KernelOptions opt;
        const DiscretizedKernel p = project_kernel(k, opt);
        CHECK(check_kernel(p, opt).ok());
        for (Index i = 0; i < 8; ++i)
            for (Index j = 0; j < 8; ++j)
                if (std::abs(i - j) > 1) CHECK(p.entries(i, j) == 0.0);
    }
    SUBCASE("spatial band") {
        DiscretizedKernel k = unit_kernel(Eigen::MatrixXd::Constant(4, 4, 0.1) + 0.1 * Eigen::MatrixXd::Identity(4, 4));
        k.band = BandSpec::spatial_band(1.5);
        apply_band(k);
        CHECK(k.entries(0, 1) == doctest::Approx(0.1));
        CHECK(k.entries(0, 2) == 0.0);
        CHECK(k.entries(3, 0) == 0.0);
    }
}

TEST_CASE("kernel csv dump") {
    Eigen::Matrix2d m;
    m << 0.1, 1.0 / 3.0, 1.0 / 3.0, 0.2;
    std::ostringstream os;
    write_kernel_csv(os, unit_kernel(m));
    CHECK(os.str() == "0.10000000000000001,0.33333333333333331\n0.33333333333333331,0.20000000000000001\n");
}
