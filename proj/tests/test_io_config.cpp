#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "partreg/config.hpp"
#include "partreg/errors.hpp"
#include "partreg/io.hpp"
#include "partreg/scan.hpp"

#include "support/shapes.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

using namespace partreg;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("partreg_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

}  // namespace

TEST_CASE("ascii ply with three vertices") {
    TempDir dir;
    const fs::path p = dir.path / "tri.ply";
    write_file(p,
               "ply\nformat ascii 1.0\nelement vertex 3\n"
               "property float x\nproperty float y\nproperty float z\n"
               "end_header\n0 0 0\n1 0 0\n0 1 0\n");
    const PointCloud cloud = read_point_cloud(p);
    REQUIRE(cloud.size() == 3);
    CHECK(cloud.points[1] == Eigen::Vector3d(1, 0, 0));
    CHECK(!cloud.has_normals());
}

TEST_CASE("binary ply round trip is bit exact for doubles") {
    TempDir dir;
    PointCloud cloud = testing::make_sphere(120, 100);
    // exercise values without short decimal representations
    cloud.points[0] = {1.0 / 3.0, std::sqrt(2.0), -0.1};
    const fs::path p = dir.path / "round.ply";
    write_point_cloud(cloud, p, PlyFormat::BinaryLittleEndian);
    const PointCloud back = read_point_cloud(p);
    REQUIRE(back.size() == cloud.size());
    REQUIRE(back.has_normals());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        CHECK(std::memcmp(back.points[i].data(), cloud.points[i].data(), 24) == 0);
        CHECK(std::memcmp(back.normals[i].data(), cloud.normals[i].data(), 24) == 0);
    }
}

TEST_CASE("ascii ply writer round trips too") {
    TempDir dir;
    const PointCloud cloud = testing::make_random_cloud(50, 101);
    const fs::path p = dir.path / "ascii.ply";
    write_point_cloud(cloud, p, PlyFormat::Ascii);
    const PointCloud back = read_point_cloud(p);
    REQUIRE(back.size() == cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i)
        CHECK((back.points[i] - cloud.points[i]).norm() == 0.0);  // %.17g is exact
}

TEST_CASE("ply reader skips extra properties and face elements") {
    TempDir dir;
    const fs::path p = dir.path / "extra.ply";
    write_file(p,
               "ply\nformat ascii 1.0\nelement vertex 2\n"
               "property float x\nproperty float y\nproperty float z\n"
               "property uchar red\n"
               "element face 1\nproperty list uchar int vertex_indices\n"
               "end_header\n0 0 0 255\n1 1 1 128\n3 0 1 0\n");
    const PointCloud cloud = read_point_cloud(p);
    REQUIRE(cloud.size() == 2);
    CHECK(cloud.points[1] == Eigen::Vector3d(1, 1, 1));
}

TEST_CASE("ply normals are renormalized and zero normals rejected") {
    TempDir dir;
    const fs::path good = dir.path / "normals.ply";
    write_file(good,
               "ply\nformat ascii 1.0\nelement vertex 1\n"
               "property float x\nproperty float y\nproperty float z\n"
               "property float nx\nproperty float ny\nproperty float nz\n"
               "end_header\n0 0 0 0 0 2\n");
    const PointCloud cloud = read_point_cloud(good);
    CHECK((cloud.normals[0] - Eigen::Vector3d(0, 0, 1)).norm() < 1e-12);

    const fs::path bad = dir.path / "zero_normal.ply";
    write_file(bad,
               "ply\nformat ascii 1.0\nelement vertex 1\n"
               "property float x\nproperty float y\nproperty float z\n"
               "property float nx\nproperty float ny\nproperty float nz\n"
               "end_header\n0 0 0 0 0 0\n");
    CHECK_THROWS_AS(read_point_cloud(bad), ParseError);
}

TEST_CASE("ply parse errors carry location; unsupported formats are rejected") {
    TempDir dir;
    const fs::path bad = dir.path / "bad.ply";
    write_file(bad,
               "ply\nformat ascii 1.0\nelement vertex 2\n"
               "property float x\nproperty float y\nproperty float z\n"
               "end_header\n0 0 0\n1 oops 1\n");
    try {
        read_point_cloud(bad);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":8") != std::string::npos);
    }

    const fs::path big_endian = dir.path / "be.ply";
    write_file(big_endian,
               "ply\nformat binary_big_endian 1.0\nelement vertex 1\n"
               "property float x\nproperty float y\nproperty float z\nend_header\n");
    CHECK_THROWS_AS(read_point_cloud(big_endian), UnsupportedFormat);

    CHECK_THROWS_AS(read_point_cloud(dir.path / "missing.ply"), IoError);
    const fs::path weird = dir.path / "cloud.xyz";
    write_file(weird, "0 0 0\n");
    CHECK_THROWS_AS(read_point_cloud(weird), UnsupportedFormat);
}

TEST_CASE("obj vertices are read and faces ignored") {
    TempDir dir;
    const fs::path p = dir.path / "mesh.obj";
    write_file(p,
               "# comment\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\n"
               "f 1 2 3\n");
    const PointCloud cloud = read_point_cloud(p);
    REQUIRE(cloud.size() == 3);
    CHECK(!cloud.has_normals());

    const fs::path bad = dir.path / "bad.obj";
    write_file(bad, "v 1 2\n");
    CHECK_THROWS_AS(read_point_cloud(bad), ParseError);
}

TEST_CASE("pose document round trip") {
    TempDir dir;
    std::mt19937_64 rng(102);
    RegistrationResult result;
    result.pose.rotation = sample_rotation_uniform(rng);
    result.pose.translation = {0.25, -1.75, 3.5};
    result.final_loss = 0.125;
    result.chamfer_to_template = 1.0 / 3.0;
    result.candidate_index = 2;
    result.all_candidates.resize(3);
    result.all_candidates[2] = {result.pose, result.final_loss, result.chamfer_to_template, false};

    const fs::path p = dir.path / "pose.json";
    write_pose(result, RunConfig{}.to_json_string(), p);
    const RigidTransform back = read_pose(p);
    CHECK((back.rotation - result.pose.rotation).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((back.translation - result.pose.translation).cwiseAbs().maxCoeff() < 1e-15);

    // no temp files left behind by the atomic writer
    int entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path)) ++entries;
    CHECK(entries == 1);
}

TEST_CASE("write_pose identity formatting") {
    TempDir dir;
    RegistrationResult result;  // identity pose
    const fs::path p = dir.path / "id.json";
    write_pose(result, "", p);
    std::ifstream in(p);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.find("\"rotation\": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]") != std::string::npos);
    CHECK(text.find("\"translation\": [0, 0, 0]") != std::string::npos);
    CHECK(text.find("partreg") != std::string::npos);  // version string embedded
}

TEST_CASE("run config defaults match the published hyperparameters") {
    const RunConfig config;
    CHECK(config.learning_rate == 0.001);
    CHECK(config.steps_per_stage == 300);
    CHECK(config.partition_count == 18);
    CHECK(config.keypoint_count == 128);
    CHECK(config.descriptor == "lps");
    CHECK(config.epsilon == 1e-3);
}

TEST_CASE("run config json round trip is exact") {
    RunConfig config;
    config.descriptor = "pfh";
    config.feature_radius = 0.07;
    config.feature_radius_is_fraction = false;
    config.seed = 1234567;
    config.chamfer_weight = 0.25;
    const std::string text = config.to_json_string();
    const RunConfig back = RunConfig::from_json_string(text);
    CHECK(back.to_json_string() == text);
    CHECK(back.descriptor == "pfh");
    CHECK(back.feature_radius == 0.07);
    CHECK(back.seed == 1234567);
}

TEST_CASE("run config rejects unknown keys and bad values") {
    CHECK_THROWS_AS(RunConfig::from_json_string("{\"learning_rte\": 0.1}"), ParseError);
    CHECK_THROWS_AS(RunConfig::from_json_string("{\"learning_rate\": 0}"), ParseError);
    CHECK_THROWS_AS(RunConfig::from_json_string("{\"descriptor\": \"fpfh\"}"), ParseError);
    CHECK_THROWS_AS(RunConfig::from_json_string("{\"scan\": {\"dropout\": 1.5}}"), ParseError);
    CHECK_THROWS_AS(RunConfig::from_json_string("not json"), ParseError);
    // empty object = all defaults
    const RunConfig defaults = RunConfig::from_json_string("{}");
    CHECK(defaults.partition_count == 18);
}

TEST_CASE("resolved descriptor config scales with the template diagonal") {
    RunConfig config;
    const DescriptorConfig d = config.resolve_descriptor(2.0);
    CHECK(d.radius == doctest::Approx(0.3));
    CHECK(d.fscore_threshold == doctest::Approx(0.015));
    config.feature_radius_is_fraction = false;
    config.feature_radius = 0.5;
    CHECK(config.resolve_descriptor(2.0).radius == 0.5);
}

TEST_CASE("generate_scan noiseless output is a template subset mapped by the ground truth") {
    const PointCloud tmpl = testing::make_box_composite(600, 103);
    ScanSpec spec;
    std::mt19937_64 rng(104);
    spec.camera_pose.rotation = sample_rotation_uniform(rng);
    spec.camera_pose.translation = {0.4, -0.2, 0.9};
    spec.viewpoint = tmpl.centroid() + Eigen::Vector3d(0, 0, 3.0 * tmpl.bounding_radius());

    const auto [scan, gt] = generate_scan(tmpl, spec, 7);
    CHECK(scan.frame_label == "camera");
    CHECK(scan.size() < tmpl.size());
    CHECK(scan.size() > 0);
    CHECK(scan.has_normals());

    const PointCloud mapped = apply_transform(gt, scan);
    CHECK(one_directional_chamfer(mapped, tmpl) < 1e-12);
}

TEST_CASE("generate_scan applies noise and dropout deterministically") {
    const PointCloud tmpl = testing::make_sphere(500, 105);
    ScanSpec spec;
    spec.noise_sigma = 0.01;
    spec.dropout_fraction = 0.25;
    spec.viewpoint = {0, 0, 3};

    const auto [a, gt_a] = generate_scan(tmpl, spec, 42);
    const auto [b, gt_b] = generate_scan(tmpl, spec, 42);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(std::memcmp(a.points[i].data(), b.points[i].data(), 24) == 0);

    const auto [c, gt_c] = generate_scan(tmpl, spec, 43);
    bool any_different = c.size() != a.size();
    for (std::size_t i = 0; !any_different && i < std::min(a.size(), c.size()); ++i)
        any_different = a.points[i] != c.points[i];
    CHECK(any_different);

    // dropout removed about a quarter of the visible points
    ScanSpec no_drop = spec;
    no_drop.dropout_fraction = 0.0;
    const auto [full, gt_full] = generate_scan(tmpl, no_drop, 42);
    CHECK(a.size() ==
          full.size() - static_cast<std::size_t>(std::floor(0.25 * full.size())));
}

TEST_CASE("generate_scan validates its parameters") {
    const PointCloud tmpl = testing::make_sphere(100, 106);
    ScanSpec bad_noise;
    bad_noise.noise_sigma = -1.0;
    CHECK_THROWS_AS(generate_scan(tmpl, bad_noise, 0), DegenerateParameters);
    ScanSpec bad_drop;
    bad_drop.dropout_fraction = 1.0;
    CHECK_THROWS_AS(generate_scan(tmpl, bad_drop, 0), DegenerateParameters);
    const PointCloud tiny = testing::make_random_cloud(5, 107);
    CHECK_THROWS_AS(generate_scan(tiny, ScanSpec{}, 0), InvalidCount);
}
