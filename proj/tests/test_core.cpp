#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "partreg/core.hpp"
#include "partreg/errors.hpp"
#include "partreg/kdtree.hpp"
#include "partreg/scan.hpp"

#include "support/oracles.hpp"
#include "support/shapes.hpp"

#include <random>

using namespace partreg;

namespace {

RigidTransform random_transform(std::mt19937_64& rng, double translation_scale = 1.0) {
    std::uniform_real_distribution<double> u(-translation_scale, translation_scale);
    RigidTransform t;
    t.rotation = sample_rotation_uniform(rng);
    t.translation = Eigen::Vector3d(u(rng), u(rng), u(rng));
    return t;
}

}  // namespace

TEST_CASE("apply_transform identity and translation") {
    PointCloud cloud = testing::make_random_cloud(20, 1);
    const PointCloud same = apply_transform(RigidTransform::identity(), cloud);
    for (std::size_t i = 0; i < cloud.size(); ++i)
        CHECK((same.points[i] - cloud.points[i]).norm() == 0.0);

    RigidTransform shift;
    shift.translation = {1, 0, 0};
    PointCloud origin;
    origin.points.push_back({0, 0, 0});
    const PointCloud moved = apply_transform(shift, origin);
    CHECK((moved.points[0] - Eigen::Vector3d(1, 0, 0)).norm() == 0.0);
}

TEST_CASE("apply_transform inverse round trip and normal handling") {
    std::mt19937_64 rng(7);
    PointCloud cloud = testing::make_sphere(100, 2);
    for (int rep = 0; rep < 20; ++rep) {
        const RigidTransform t = random_transform(rng);
        const PointCloud round = apply_transform(inverse(t), apply_transform(t, cloud));
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            CHECK((round.points[i] - cloud.points[i]).norm() < 1e-9);
            CHECK((round.normals[i] - cloud.normals[i]).norm() < 1e-9);
        }
    }
    const RigidTransform t = random_transform(rng);
    const PointCloud rotated = apply_transform(t, cloud);
    for (const auto& n : rotated.normals) CHECK(std::abs(n.norm() - 1.0) < 1e-12);
}

TEST_CASE("transform composition is associative and distributes") {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 20; ++rep) {
        const RigidTransform a = random_transform(rng);
        const RigidTransform b = random_transform(rng);
        const RigidTransform c = random_transform(rng);
        const RigidTransform left = compose(compose(a, b), c);
        const RigidTransform right = compose(a, compose(b, c));
        CHECK((left.rotation - right.rotation).norm() < 1e-9);
        CHECK((left.translation - right.translation).norm() < 1e-9);

        const Eigen::Vector3d p(0.3, -0.7, 1.1);
        CHECK((compose(a, b).apply(p) - a.apply(b.apply(p))).norm() < 1e-9);
    }
}

TEST_CASE("to_rotation basic examples") {
    const Eigen::Matrix3d id = to_rotation({{1, 0, 0}, {0, 1, 0}});
    CHECK((id - Eigen::Matrix3d::Identity()).norm() < 1e-15);

    const Eigen::Matrix3d perm = to_rotation({{2, 0, 0}, {0, 0, 3}});
    CHECK((perm.col(0) - Eigen::Vector3d(1, 0, 0)).norm() < 1e-15);
    CHECK((perm.col(1) - Eigen::Vector3d(0, 0, 1)).norm() < 1e-15);
    CHECK((perm.col(2) - Eigen::Vector3d(0, -1, 0)).norm() < 1e-15);
}

TEST_CASE("to_rotation degenerate parameters throw") {
    CHECK_THROWS_AS(to_rotation({{0, 0, 0}, {0, 1, 0}}), DegenerateParameters);
    CHECK_THROWS_AS(to_rotation({{1, 0, 0}, {2, 0, 0}}), DegenerateParameters);
    CHECK_THROWS_AS(to_rotation({{1e-13, 0, 0}, {0, 1, 0}}), DegenerateParameters);
}

TEST_CASE("to_rotation round trip over random rotations") {
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 100; ++rep) {
        const Eigen::Matrix3d r = sample_rotation_uniform(rng);
        const Eigen::Matrix3d back = to_rotation(from_rotation(r));
        CHECK((back - r).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("to_rotation produces orthonormal det+1 and is scale invariant in a1") {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_real_distribution<double> scale(0.1, 10.0);
    for (int rep = 0; rep < 200; ++rep) {
        const Rotation6D r{{u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}};
        if (r.a1.norm() <= 1e-6) continue;
        const Eigen::Vector3d b1 = r.a1.normalized();
        if ((r.a2 - b1.dot(r.a2) * b1).norm() <= 1e-6) continue;
        const Eigen::Matrix3d rot = to_rotation(r);
        CHECK((rot.transpose() * rot - Eigen::Matrix3d::Identity()).norm() < 1e-9);
        CHECK(rot.determinant() == doctest::Approx(1.0).epsilon(1e-9));

        const Eigen::Matrix3d scaled = to_rotation({scale(rng) * r.a1, r.a2});
        CHECK((scaled - rot).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("pairwise_distances examples and oracle") {
    Eigen::Matrix3Xd single(3, 1);
    single.col(0) = Eigen::Vector3d(0.5, -1, 2);
    CHECK(pairwise_distances(single, single)(0, 0) == 0.0);

    Eigen::Matrix3Xd p(3, 1), q(3, 1);
    p.col(0) = Eigen::Vector3d(0, 0, 0);
    q.col(0) = Eigen::Vector3d(3, 4, 0);
    CHECK(pairwise_distances(p, q)(0, 0) == doctest::Approx(5.0).epsilon(1e-15));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    Eigen::Matrix3Xd a(3, 5), b(3, 7);
    for (int i = 0; i < 5; ++i) a.col(i) = Eigen::Vector3d(u(rng), u(rng), u(rng));
    for (int i = 0; i < 7; ++i) b.col(i) = Eigen::Vector3d(u(rng), u(rng), u(rng));
    const Eigen::MatrixXd got = pairwise_distances(a, b);
    const Eigen::MatrixXd want = oracles::pairwise_bruteforce(a, b);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);

    // symmetry under swap + transpose, and triangle inequality on triples
    const Eigen::MatrixXd swapped = pairwise_distances(b, a);
    CHECK((got - swapped.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::MatrixXd aa = pairwise_distances(a, a);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            for (int k = 0; k < 5; ++k)
                CHECK(aa(i, j) <= aa(i, k) + aa(k, j) + 1e-12);
}

TEST_CASE("nearest_neighbor exact hit and tie break") {
    PointCloud cloud;
    for (int i = 0; i < 6; ++i) cloud.points.emplace_back(2.0 * i, 0, 0);
    const auto [idx, dist] = nearest_neighbor(cloud.points[3], cloud);
    CHECK(idx == 3);
    CHECK(dist == 0.0);

    PointCloud tie;
    tie.points.push_back({10, 0, 0});   // 0
    tie.points.push_back({1, 0, 0});    // 1: distance 1 from origin
    tie.points.push_back({10, 5, 0});   // 2
    tie.points.push_back({-7, 2, 0});   // 3
    tie.points.push_back({-1, 0, 0});   // 4: distance 1 from origin
    const auto [tidx, tdist] = nearest_neighbor({0, 0, 0}, tie);
    CHECK(tidx == 1);
    CHECK(tdist == doctest::Approx(1.0));
}

TEST_CASE("nearest_neighbor matches linear oracle in both regimes") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int n : {200, 400}) {  // below and above the spatial-index threshold
        PointCloud cloud = testing::make_random_cloud(n, 13 + n);
        for (int q = 0; q < 50; ++q) {
            const Eigen::Vector3d query(u(rng), u(rng), u(rng));
            const auto got = nearest_neighbor(query, cloud);
            const auto want = oracles::nn_linear(query, cloud.points);
            CHECK(got.first == want.first);
            CHECK(got.second == doctest::Approx(want.second).epsilon(1e-12));
        }
    }
}

TEST_CASE("kdtree knn and radius search agree with brute force") {
    PointCloud cloud = testing::make_random_cloud(500, 21);
    KdTree3 tree(cloud.points);
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> u(-1.5, 1.5);

    for (int rep = 0; rep < 25; ++rep) {
        const Eigen::Vector3d q(u(rng), u(rng), u(rng));

        const std::vector<int> knn = tree.knn(q, 12);
        std::vector<int> all(cloud.size());
        std::iota(all.begin(), all.end(), 0);
        std::sort(all.begin(), all.end(), [&](int a, int b) {
            const double da = (cloud.points[a] - q).squaredNorm();
            const double db = (cloud.points[b] - q).squaredNorm();
            return da < db || (da == db && a < b);
        });
        for (int i = 0; i < 12; ++i) CHECK(knn[i] == all[i]);

        const double radius = 0.4;
        const std::vector<int> in_radius = tree.radius_search(q, radius);
        std::vector<int> want;
        for (int i = 0; i < static_cast<int>(cloud.size()); ++i)
            if ((cloud.points[i] - q).norm() <= radius) want.push_back(i);
        CHECK(in_radius == want);
        CHECK(tree.any_within(q, radius) == !want.empty());
    }
}

TEST_CASE("operations reject empty clouds") {
    PointCloud empty;
    CHECK_THROWS_AS(apply_transform(RigidTransform::identity(), empty), EmptyInput);
    CHECK_THROWS_AS(nearest_neighbor({0, 0, 0}, empty), EmptyInput);
}
