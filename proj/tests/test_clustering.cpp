#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "scrubber/clustering.hpp"
#include "scrubber/rng.hpp"

using namespace scrubber;

namespace {

PointCloud3D cloud_of(const std::vector<Eigen::Vector3d>& pts) {
  PointCloud3D c;
  for (const auto& p : pts) {
    c.points.push_back({static_cast<float>(p.x()), static_cast<float>(p.y()),
                        static_cast<float>(p.z()), 0.0f});
  }
  return c;
}

PointCloud3D blob(Rng& rng, const Eigen::Vector3d& center, int n, double spread = 0.05) {
  PointCloud3D c;
  for (int i = 0; i < n; ++i) {
    c.points.push_back({static_cast<float>(center.x() + rng.normal(0, spread)),
                        static_cast<float>(center.y() + rng.normal(0, spread)),
                        static_cast<float>(center.z() + rng.normal(0, spread)), 0.0f});
  }
  return c;
}

void append(PointCloud3D* dst, const PointCloud3D& src) {
  dst->points.insert(dst->points.end(), src.points.begin(), src.points.end());
}

}  // namespace

TEST_CASE("voxel_downsample basics") {
  SUBCASE("single point is unchanged") {
    PointCloud3D c = cloud_of({{0.51, 0.52, 0.53}});
    c.points[0].intensity = 77.0f;
    const PointCloud3D out = voxel_downsample(c, 0.1);
    REQUIRE(out.size() == 1);
    CHECK(out.points[0].x == doctest::Approx(0.51));
    CHECK(out.points[0].intensity == doctest::Approx(77.0));
  }
  SUBCASE("two points 0.01 m apart with leaf 0.1 give their midpoint") {
    PointCloud3D c = cloud_of({{0.50, 0.05, 0.05}, {0.51, 0.05, 0.05}});
    c.points[0].intensity = 10.0f;
    c.points[1].intensity = 20.0f;
    const PointCloud3D out = voxel_downsample(c, 0.1);
    REQUIRE(out.size() == 1);
    CHECK(out.points[0].x == doctest::Approx(0.505));
    CHECK(out.points[0].y == doctest::Approx(0.05));
    CHECK(out.points[0].intensity == doctest::Approx(15.0));
  }
  SUBCASE("two points 1 m apart stay separate") {
    const PointCloud3D out = voxel_downsample(cloud_of({{0, 0, 0.05}, {1, 0, 0.05}}), 0.1);
    CHECK(out.size() == 2);
  }
  SUBCASE("empty cloud is not an error") {
    CHECK(voxel_downsample(PointCloud3D{}, 0.1).empty());
  }
}

TEST_CASE("remove_planes strips dominant planes only") {
  Rng rng(7);
  SUBCASE("pure plane plus blob leaves only the blob") {
    PointCloud3D c;
    for (int i = 0; i < 1000; ++i) {
      c.points.push_back({static_cast<float>(rng.uniform(-3, 3)),
                          static_cast<float>(rng.uniform(-3, 3)), 0.0f, 0.0f});
    }
    append(&c, blob(rng, {0.5, 0.5, 1.5}, 50, 0.25));  // genuinely non-planar blob
    const PointCloud3D out = remove_planes(c, 0.02, 0.2, 1);
    CHECK(out.size() == 50);
    for (const auto& p : out.points) CHECK(p.z > 0.4);
  }
  SUBCASE("no dominant plane: identity") {
    PointCloud3D c;
    for (int i = 0; i < 10; ++i) {
      c.points.push_back({static_cast<float>(rng.uniform(-3, 3)),
                          static_cast<float>(rng.uniform(-3, 3)),
                          static_cast<float>(rng.uniform(-3, 3)), 0.0f});
    }
    const PointCloud3D out = remove_planes(c, 0.02, 0.9, 1);
    CHECK(out.size() == c.size());
  }
  SUBCASE("pure plane only: empty output") {
    PointCloud3D c;
    for (int i = 0; i < 500; ++i) {
      c.points.push_back({static_cast<float>(rng.uniform(-3, 3)),
                          static_cast<float>(rng.uniform(-3, 3)), 0.0f, 0.0f});
    }
    const PointCloud3D out = remove_planes(c, 0.02, 0.2, 1);
    CHECK(out.empty());
  }
  SUBCASE("deterministic under a fixed seed") {
    PointCloud3D c;
    for (int i = 0; i < 400; ++i) {
      c.points.push_back({static_cast<float>(rng.uniform(-3, 3)),
                          static_cast<float>(rng.uniform(-3, 3)),
                          static_cast<float>(rng.normal(0, 0.005)), 0.0f});
    }
    append(&c, blob(rng, {1, 1, 1}, 40, 0.02));
    const PointCloud3D a = remove_planes(c, 0.02, 0.2, 99);
    const PointCloud3D b = remove_planes(c, 0.02, 0.2, 99);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a.points[i].x == b.points[i].x);
  }
}

TEST_CASE("euclidean_cluster basics") {
  SUBCASE("two 10-point blobs 5 m apart give 2 clusters") {
    Rng rng(3);
    PointCloud3D c = blob(rng, {0, 0, 1}, 10, 0.05);
    append(&c, blob(rng, {5, 0, 1}, 10, 0.05));
    const auto clusters = euclidean_cluster(c, 0.5, 1, 1000);
    REQUIRE(clusters.size() == 2);
    CHECK(clusters[0].indices.size() == 10);
    CHECK(clusters[1].indices.size() == 10);
    // sorted by planar range
    CHECK(clusters[0].planar_range() < clusters[1].planar_range());
  }
  SUBCASE("a chain of points spaced 0.4 m links transitively at tol 0.45") {
    std::vector<Eigen::Vector3d> pts;
    for (int i = 0; i < 12; ++i) pts.push_back({0.4 * i, 0.0, 0.0});
    const auto clusters = euclidean_cluster(cloud_of(pts), 0.45, 1, 1000);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].indices.size() == 12);
  }
  SUBCASE("size limits discard components") {
    Rng rng(5);
    PointCloud3D c = blob(rng, {0, 0, 0}, 3, 0.01);   // below min
    append(&c, blob(rng, {5, 0, 0}, 10, 0.01));       // kept
    append(&c, blob(rng, {10, 0, 0}, 40, 0.01));      // above max
    const auto clusters = euclidean_cluster(c, 0.3, 5, 30);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].indices.size() == 10);
  }
}

TEST_CASE("euclidean_cluster matches the brute-force union-find oracle") {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    std::vector<Eigen::Vector3d> pts;
    const int n = 150 + static_cast<int>(rng.uniform_index(100));
    for (int i = 0; i < n; ++i) {
      pts.push_back({rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(0, 2)});
    }
    const double tol = rng.uniform(0.3, 0.9);
    const auto expected = oracle::brute_force_clusters(pts, tol, 1, n);
    auto clusters = euclidean_cluster(cloud_of(pts), tol, 1, n);
    std::vector<std::vector<int>> got;
    for (const auto& c : clusters) got.push_back(c.indices);
    std::sort(got.begin(), got.end());
    CHECK(got == expected);
  }
}

TEST_CASE("partition property: clusters are disjoint and cover admissible components") {
  Rng rng(11);
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < 300; ++i) {
    pts.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0, 2)});
  }
  const auto clusters = euclidean_cluster(cloud_of(pts), 0.5, 2, 300);
  std::set<int> seen;
  for (const auto& c : clusters) {
    for (int idx : c.indices) {
      CHECK(seen.insert(idx).second);  // disjoint
    }
    // bbox tightness + centroid definition
    Eigen::Vector3d lo = pts[c.indices[0]], hi = lo, sum = Eigen::Vector3d::Zero();
    for (int idx : c.indices) {
      lo = lo.cwiseMin(pts[idx]);
      hi = hi.cwiseMax(pts[idx]);
      sum += pts[idx];
    }
    CHECK((c.bbox.min() - lo).norm() < 1e-5);
    CHECK((c.bbox.max() - hi).norm() < 1e-5);
    CHECK((c.centroid - sum / c.indices.size()).norm() < 1e-5);
  }
  const auto all = oracle::brute_force_clusters(pts, 0.5, 2, 300);
  size_t expected_points = 0;
  for (const auto& comp : all) expected_points += comp.size();
  CHECK(seen.size() == expected_points);
}

TEST_CASE("adaptive_cluster") {
  SUBCASE("single-ring schedule reduces to euclidean_cluster") {
    Rng rng(13);
    PointCloud3D c = blob(rng, {2, 1, 1}, 30, 0.1);
    append(&c, blob(rng, {8, -3, 1}, 25, 0.1));
    const std::vector<RingStep> single = {{std::numeric_limits<double>::infinity(), 0.45}};
    const auto a = adaptive_cluster(c, single, 1, 1000);
    const auto b = euclidean_cluster(c, 0.45, 1, 1000);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].indices == b[i].indices);
  }
  SUBCASE("two people 0.5 m apart at 20 m range merge under the far-ring tolerance") {
    // documented known failure mode of range-adaptive tolerances
    Rng rng(17);
    PointCloud3D c = blob(rng, {20.0, 0.0, 1.0}, 20, 0.02);
    append(&c, blob(rng, {20.0, 0.5, 1.0}, 20, 0.02));
    ClusteringParams params;
    const auto clusters = adaptive_cluster(c, params.ring_schedule, 1, 1000);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].indices.size() == 40);
    // same geometry near the sensor separates
    PointCloud3D near = blob(rng, {2.0, 0.0, 1.0}, 20, 0.02);
    append(&near, blob(rng, {2.0, 0.5, 1.0}, 20, 0.02));
    CHECK(adaptive_cluster(near, params.ring_schedule, 1, 1000).size() == 2);
  }
  SUBCASE("a blob straddling a ring boundary merges into one cluster") {
    std::vector<Eigen::Vector3d> pts;
    for (int i = 0; i < 20; ++i) pts.push_back({4.9 + 0.02 * i, 0.0, 1.0});  // spans r=5
    ClusteringParams params;
    const auto clusters = adaptive_cluster(cloud_of(pts), params.ring_schedule, 1, 1000);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].indices.size() == 20);
  }
  SUBCASE("clusters near the same boundary radius but different  bearings stay separate") {
    std::vector<Eigen::Vector3d> pts;
    for (int i = 0; i < 10; ++i) pts.push_back({4.95 + 0.01 * i, 0.0, 1.0});
    for (int i = 0; i < 10; ++i) pts.push_back({-(4.95 + 0.01 * i), 0.0, 1.0});
    ClusteringParams params;
    CHECK(adaptive_cluster(cloud_of(pts), params.ring_schedule, 1, 1000).size() == 2);
  }
  SUBCASE("non-monotone schedule is rejected") {
    CHECK_THROWS(adaptive_cluster(PointCloud3D{}, {{5.0, 0.3}, {4.0, 0.5}}, 1, 10));
  }
}

TEST_CASE("volumetric_filter reproduces the human-candidate bounds") {
  auto cluster_with_extents = [](double w, double d, double h) {
    Cluster c;
    c.indices = {0};
    c.bbox.center = {1, 1, h / 2};
    c.bbox.extents = {w, d, h};
    c.centroid = c.bbox.center;
    return c;
  };
  SUBCASE("reference cases") {
    CHECK(volumetric_filter({cluster_with_extents(0.5, 0.5, 1.7)}).size() == 1);
    CHECK(volumetric_filter({cluster_with_extents(1.5, 0.5, 1.7)}).empty());
    CHECK(volumetric_filter({cluster_with_extents(0.2, 0.2, 0.5)}).size() == 1);  // inclusive
    CHECK(volumetric_filter({cluster_with_extents(1.0, 1.0, 2.0)}).size() == 1);  // inclusive
  }
  SUBCASE("idempotent and order-preserving") {
    std::vector<Cluster> input = {cluster_with_extents(0.5, 0.5, 1.7),
                                  cluster_with_extents(0.1, 0.5, 1.7),
                                  cluster_with_extents(0.9, 0.9, 1.9),
                                  cluster_with_extents(0.3, 0.3, 0.6)};
    const auto once = volumetric_filter(input);
    const auto twice = volumetric_filter(once);
    REQUIRE(once.size() == 3);
    REQUIRE(twice.size() == once.size());
    for (size_t i = 0; i < once.size(); ++i) {
      CHECK(once[i].bbox.extents == twice[i].bbox.extents);
    }
    // order preserved: extents follow the input order of survivors
    CHECK(once[0].bbox.extents.x() == doctest::Approx(0.5));
    CHECK(once[1].bbox.extents.x() == doctest::Approx(0.9));
    CHECK(once[2].bbox.extents.x() == doctest::Approx(0.3));
  }
}
