#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "partreg/errors.hpp"
#include "partreg/metrics.hpp"
#include "partreg/scan.hpp"

#include "support/oracles.hpp"
#include "support/shapes.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <numbers>
#include <random>

using namespace partreg;

TEST_CASE("rotation_error on axis-aligned cases") {
    const Eigen::Matrix3d id = Eigen::Matrix3d::Identity();
    CHECK(rotation_error(id, id) == 0.0);

    const Eigen::Matrix3d half_turn =
        Eigen::AngleAxisd(std::numbers::pi, Eigen::Vector3d::UnitZ()).matrix();
    CHECK(rotation_error(id, half_turn) == doctest::Approx(std::numbers::pi).epsilon(1e-12));

    const Eigen::Matrix3d quarter =
        Eigen::AngleAxisd(std::numbers::pi / 2.0, Eigen::Vector3d::UnitZ()).matrix();
    CHECK(rotation_error(id, quarter) == doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-12));
}

TEST_CASE("rotation_error matches the quaternion-angle oracle") {
    std::mt19937_64 rng(90);
    for (int rep = 0; rep < 1000; ++rep) {
        const Eigen::Matrix3d a = sample_rotation_uniform(rng);
        const Eigen::Matrix3d b = sample_rotation_uniform(rng);
        CHECK(rotation_error(a, b) == doctest::Approx(oracles::quat_angle(a, b)).epsilon(1e-9));
    }
}

TEST_CASE("rotation_error symmetry, left invariance, and axis-angle identity") {
    std::mt19937_64 rng(91);
    for (int rep = 0; rep < 50; ++rep) {
        const Eigen::Matrix3d a = sample_rotation_uniform(rng);
        const Eigen::Matrix3d b = sample_rotation_uniform(rng);
        const Eigen::Matrix3d q = sample_rotation_uniform(rng);
        CHECK(rotation_error(a, b) == doctest::Approx(rotation_error(b, a)).epsilon(1e-12));
        CHECK(rotation_error(q * a, q * b) == doctest::Approx(rotation_error(a, b)).epsilon(1e-9));

        std::uniform_real_distribution<double> theta_dist(0.0, std::numbers::pi);
        const double theta = theta_dist(rng);
        const Eigen::Matrix3d spun =
            a * Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitX()).matrix();
        CHECK(rotation_error(a, spun) == doctest::Approx(theta).epsilon(1e-9));
    }
}

TEST_CASE("translation_error examples and componentwise oracle") {
    CHECK(translation_error({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(translation_error({0, 0, 0}, {3, 4, 0}) == doctest::Approx(5.0));
    std::mt19937_64 rng(92);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int rep = 0; rep < 100; ++rep) {
        const Eigen::Vector3d a(u(rng), u(rng), u(rng));
        const Eigen::Vector3d b(u(rng), u(rng), u(rng));
        const double want = std::sqrt((a.x() - b.x()) * (a.x() - b.x()) +
                                      (a.y() - b.y()) * (a.y() - b.y()) +
                                      (a.z() - b.z()) * (a.z() - b.z()));
        CHECK(translation_error(a, b) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("axis_alignment_error is sign-free") {
    const Eigen::Vector3d z(0, 0, 1);
    CHECK(axis_alignment_error(z, z) == 0.0);
    CHECK(axis_alignment_error(z, -z) == 0.0);
    CHECK(axis_alignment_error(z, {1, 0, 0}) ==
          doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-12));
}

TEST_CASE("summarize examples") {
    const double deg = std::numbers::pi / 180.0;
    const PoseErrorSummary single = summarize({{20.0 * deg, 0.1}});
    CHECK(single.mean_rotation_deg == doctest::Approx(20.0));
    CHECK(single.median_rotation_deg == doctest::Approx(20.0));
    CHECK(single.acc_at_10deg == 0.0);
    CHECK(single.acc_at_30deg == 1.0);
    CHECK(single.mean_translation == doctest::Approx(0.1));

    const PoseErrorSummary pair = summarize({{5.0 * deg, 0.0}, {15.0 * deg, 0.0}});
    CHECK(pair.acc_at_10deg == doctest::Approx(0.5));
    CHECK(pair.median_rotation_deg == doctest::Approx(5.0));  // lower middle on even counts

    CHECK_THROWS_AS(summarize({}), EmptyInput);
}

TEST_CASE("summarize matches a sort-based oracle and is permutation invariant") {
    std::mt19937_64 rng(93);
    std::uniform_real_distribution<double> rot(0.0, std::numbers::pi);
    std::uniform_real_distribution<double> trans(0.0, 2.0);
    std::vector<std::pair<double, double>> errors;
    for (int i = 0; i < 100; ++i) errors.emplace_back(rot(rng), trans(rng));

    const PoseErrorSummary got = summarize(errors);

    std::vector<double> deg;
    double mean_deg = 0.0, mean_t = 0.0;
    int a10 = 0, a30 = 0;
    for (const auto& [r, t] : errors) {
        const double d = r * 180.0 / std::numbers::pi;
        deg.push_back(d);
        mean_deg += d;
        mean_t += t;
        if (d <= 10.0) ++a10;
        if (d <= 30.0) ++a30;
    }
    std::sort(deg.begin(), deg.end());
    CHECK(got.mean_rotation_deg == doctest::Approx(mean_deg / 100.0).epsilon(1e-12));
    CHECK(got.median_rotation_deg == doctest::Approx(deg[49]).epsilon(1e-12));
    CHECK(got.acc_at_10deg == doctest::Approx(a10 / 100.0));
    CHECK(got.acc_at_30deg == doctest::Approx(a30 / 100.0));
    CHECK(got.mean_translation == doctest::Approx(mean_t / 100.0).epsilon(1e-12));

    std::shuffle(errors.begin(), errors.end(), rng);
    const PoseErrorSummary shuffled = summarize(errors);
    CHECK(shuffled.mean_rotation_deg == doctest::Approx(got.mean_rotation_deg).epsilon(1e-12));
    CHECK(shuffled.median_rotation_deg == got.median_rotation_deg);
    CHECK(shuffled.acc_at_10deg == got.acc_at_10deg);
}

TEST_CASE("fscore_clouds examples") {
    const PointCloud x = testing::make_random_cloud(100, 94);
    CHECK(fscore_clouds(x, x, 1e-6) == doctest::Approx(1.0));

    PointCloud far = x;
    for (auto& p : far.points) p += Eigen::Vector3d(100, 0, 0);
    CHECK(fscore_clouds(x, far, 0.5) == 0.0);

    PointCloud a, b;
    a.points = {{0, 0, 0}, {10, 0, 0}};
    b.points = {{0.05, 0, 0}, {5, 0, 0}, {6, 0, 0}, {7, 0, 0}};
    CHECK(fscore_clouds(a, b, 0.1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("summary csv row uses the table column order") {
    PoseErrorSummary s;
    s.mean_rotation_deg = 1.5;
    s.median_rotation_deg = 1.0;
    s.acc_at_10deg = 0.75;
    s.acc_at_30deg = 1.0;
    s.mean_translation = 0.25;
    CHECK(PoseErrorSummary::csv_header() ==
          "mean_rot_deg,median_rot_deg,acc_10deg,acc_30deg,mean_translation");
    CHECK(s.csv_row() == "1.5,1,0.75,1,0.25");
}
