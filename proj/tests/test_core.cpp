#include "graspkit/core.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <set>

using namespace graspkit;

namespace {

PointCloud random_cloud(std::size_t n, Rng& rng, double extent = 1.0) {
  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    cloud.points.emplace_back(rng.uniform(-extent, extent),
                              rng.uniform(-extent, extent),
                              rng.uniform(-extent, extent));
  return cloud;
}

Mat3 rot_z(double angle) {
  return Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix();
}

// Brute-force k-NN with the tie rule: sort by (distance^2, index).
std::vector<std::size_t> brute_knn(const std::vector<Vec3>& pts,
                                   const Vec3& q, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < pts.size(); ++i)
    d.emplace_back((pts[i] - q).squaredNorm(), i);
  std::sort(d.begin(), d.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < std::min(k, d.size()); ++i)
    out.push_back(d[i].second);
  return out;
}

}  // namespace

TEST_CASE("transform_cloud identity and translation") {
  PointCloud cloud;
  cloud.points = {{0, 0, 0}, {1, 2, 3}};
  cloud.normals = {{1, 0, 0}, {0, 1, 0}};

  const PointCloud same = transform_cloud(cloud, Pose::identity());
  CHECK(same.points[1] == cloud.points[1]);
  CHECK(same.normals[0] == cloud.normals[0]);

  Pose shift;
  shift.translation = Vec3(1, 0, 0);
  shift.frame = "map";
  const PointCloud moved = transform_cloud(cloud, shift);
  CHECK(moved.points[0] == Vec3(1, 0, 0));
  CHECK(moved.normals[0] == Vec3(1, 0, 0));  // normals ignore translation
  CHECK(moved.frame == "map");
}

TEST_CASE("transform_cloud rotates points and normals") {
  PointCloud cloud;
  cloud.points = {{1, 0, 0}};
  cloud.normals = {{1, 0, 0}};
  Pose pose;
  pose.rotation = rot_z(std::numbers::pi / 2.0);

  const PointCloud out = transform_cloud(cloud, pose);
  CHECK(out.points[0].isApprox(Vec3(0, 1, 0), 1e-12));
  CHECK(out.normals[0].isApprox(Vec3(0, 1, 0), 1e-12));
}

TEST_CASE("transform round trip through the inverse") {
  Rng rng(3);
  PointCloud cloud = random_cloud(200, rng);
  Pose pose;
  pose.rotation = rot_z(0.83) *
                  Eigen::AngleAxisd(0.4, Vec3::UnitY()).toRotationMatrix();
  pose.translation = Vec3(0.3, -1.2, 2.0);

  const PointCloud back =
      transform_cloud(transform_cloud(cloud, pose), pose.inverse());
  for (std::size_t i = 0; i < cloud.size(); ++i)
    CHECK((back.points[i] - cloud.points[i]).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("voxel_downsample basics") {
  CHECK(voxel_downsample(PointCloud{}, 0.01).empty());
  CHECK_THROWS_AS(voxel_downsample(PointCloud{}, 0.0), std::invalid_argument);

  PointCloud two;
  two.points = {{0.0005, 0, 0}, {0.0015, 0, 0}};
  const PointCloud merged = voxel_downsample(two, 0.01);
  REQUIRE(merged.size() == 1);
  CHECK(merged.points[0].isApprox(Vec3(0.001, 0, 0), 1e-12));
}

TEST_CASE("voxel_downsample matches a brute-force binning oracle") {
  Rng rng(11);
  PointCloud cloud;
  for (int i = 0; i < 1000; ++i)
    cloud.points.emplace_back(rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0),
                              rng.uniform(0.0, 1.0));
  const double voxel = 0.5;
  const PointCloud down = voxel_downsample(cloud, voxel);
  CHECK(down.size() <= 8);

  // Oracle: bin by floored cell key, average members.
  std::map<std::array<long, 3>, std::pair<Vec3, int>> bins;
  for (const Vec3& p : cloud.points) {
    std::array<long, 3> key{long(std::floor(p.x() / voxel)),
                            long(std::floor(p.y() / voxel)),
                            long(std::floor(p.z() / voxel))};
    auto it = bins.find(key);
    if (it == bins.end())
      bins.emplace(key, std::make_pair(p, 1));
    else {
      it->second.first += p;
      it->second.second += 1;
    }
  }
  REQUIRE(down.size() == bins.size());
  for (const Vec3& c : down.points) {
    std::array<long, 3> key{long(std::floor(c.x() / voxel)),
                            long(std::floor(c.y() / voxel)),
                            long(std::floor(c.z() / voxel))};
    auto it = bins.find(key);
    REQUIRE(it != bins.end());
    const Vec3 expect = it->second.first / it->second.second;
    CHECK(c.isApprox(expect, 1e-12));
  }
}

TEST_CASE("voxel_downsample output stays near the input") {
  Rng rng(5);
  const PointCloud cloud = random_cloud(500, rng, 0.3);
  const double voxel = 0.05;
  const PointCloud down = voxel_downsample(cloud, voxel);
  CHECK(down.size() <= cloud.size());
  const double bound = voxel * std::sqrt(3.0) / 2.0 + 1e-12;
  for (const Vec3& c : down.points) {
    double best = 1e9;
    for (const Vec3& p : cloud.points) best = std::min(best, (p - c).norm());
    CHECK(best <= bound);
  }
}

TEST_CASE("estimate_normals on a plane") {
  PointCloud cloud;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j)
      cloud.points.emplace_back(i * 0.01, j * 0.01, 0.0);
  const PointCloud out = estimate_normals(cloud, 8, Vec3(0, 0, 1));
  for (const Vec3& n : out.normals) {
    CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(n.isApprox(Vec3(0, 0, 1), 1e-6));
  }
}

TEST_CASE("estimate_normals on a cylinder points radially") {
  PointCloud cloud;
  const double r = 0.03;
  for (int i = 0; i < 60; ++i) {
    const double th = 2.0 * std::numbers::pi * i / 60.0;
    for (int k = 0; k < 20; ++k)
      cloud.points.emplace_back(r * std::cos(th), r * std::sin(th), k * 0.004);
  }
  const PointCloud out = estimate_normals(cloud, 10, Vec3(1.0, 0.0, 0.04));

  const double tol = 5.0 * std::numbers::pi / 180.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Vec3 radial =
        Vec3(out.points[i].x(), out.points[i].y(), 0.0).normalized();
    // Orientation flips toward the viewpoint; compare the undirected axis.
    const double angle =
        std::acos(std::clamp(std::abs(out.normals[i].dot(radial)), -1.0, 1.0));
    CHECK(angle < tol);
  }
}

TEST_CASE("estimate_normals errors and orientation property") {
  PointCloud two;
  two.points = {{0, 0, 0}, {1, 0, 0}};
  CHECK_THROWS_AS(estimate_normals(two, 3, Vec3(0, 0, 1)), std::invalid_argument);

  Rng rng(17);
  const PointCloud cloud = random_cloud(300, rng, 0.2);
  const Vec3 vp(0.0, 0.0, 5.0);
  const PointCloud out = estimate_normals(cloud, 12, vp);
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out.normals[i].norm() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(out.normals[i].dot(vp - out.points[i]) >= 0.0);
  }
}

TEST_CASE("parallel and serial normal estimation agree") {
  Rng rng(23);
  const PointCloud cloud = random_cloud(400, rng, 0.5);
  const PointCloud a = estimate_normals(cloud, 15, Vec3(0, 0, 2));
  const PointCloud b = serial::estimate_normals(cloud, 15, Vec3(0, 0, 2));
  for (std::size_t i = 0; i < cloud.size(); ++i)
    CHECK(a.normals[i] == b.normals[i]);
}

TEST_CASE("farthest_point_sample basics") {
  Rng rng(9);
  const PointCloud cloud = random_cloud(100, rng);
  CHECK_THROWS_AS(farthest_point_sample(cloud, 0, 1), std::invalid_argument);

  const PointCloud all = farthest_point_sample(cloud, 100, 4);
  REQUIRE(all.size() == 100);
  for (std::size_t i = 0; i < 100; ++i) CHECK(all.points[i] == cloud.points[i]);

  const PointCloud a = farthest_point_sample(cloud, 17, 99);
  const PointCloud b = farthest_point_sample(cloud, 17, 99);
  REQUIRE(a.size() == 17);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.points[i] == b.points[i]);
}

TEST_CASE("farthest_point_sample greedy chain matches exhaustive maximization") {
  // Square corners plus center. Every pick after the first must maximize the
  // minimum distance to the chosen prefix, ties by lowest index; corner-first
  // seeds must recover exactly the four corners.
  PointCloud cloud;
  cloud.points = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0.5, 0.5, 0}};

  std::size_t corner_first_runs = 0;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const std::vector<std::size_t> picked =
        farthest_point_indices(cloud.points, 4, seed);
    REQUIRE(picked.size() == 4);

    for (std::size_t step = 1; step < picked.size(); ++step) {
      auto min_dist = [&](std::size_t candidate) {
        double best = 1e18;
        for (std::size_t j = 0; j < step; ++j)
          best = std::min(best,
                          (cloud.points[candidate] - cloud.points[picked[j]])
                              .squaredNorm());
        return best;
      };
      const double chosen = min_dist(picked[step]);
      for (std::size_t cand = 0; cand < cloud.size(); ++cand)
        CHECK(min_dist(cand) <= chosen + 1e-15);
    }

    if (picked[0] != 4) {
      ++corner_first_runs;
      const std::set<std::size_t> set(picked.begin(), picked.end());
      CHECK(set == std::set<std::size_t>{0, 1, 2, 3});
    }
  }
  CHECK(corner_first_runs > 0);
}

TEST_CASE("farthest_point_sample output is a subset of the input") {
  Rng rng(31);
  const PointCloud cloud = random_cloud(120, rng);
  const PointCloud out = farthest_point_sample(cloud, 30, 5);
  for (const Vec3& p : out.points) {
    bool found = false;
    for (const Vec3& q : cloud.points) found = found || p == q;
    CHECK(found);
  }
}

TEST_CASE("centroid") {
  PointCloud one;
  one.points = {{1, 2, 3}};
  CHECK(centroid(one) == Vec3(1, 2, 3));

  PointCloud two;
  two.points = {{0, 0, 0}, {2, 0, 0}};
  CHECK(centroid(two) == Vec3(1, 0, 0));

  PointCloud cube;
  for (int x = 0; x <= 1; ++x)
    for (int y = 0; y <= 1; ++y)
      for (int z = 0; z <= 1; ++z) cube.points.emplace_back(x, y, z);
  CHECK(centroid(cube).isApprox(Vec3(0.5, 0.5, 0.5), 1e-15));

  CHECK_THROWS_AS(centroid(PointCloud{}), std::invalid_argument);
}

TEST_CASE("KdIndex matches brute force on random clouds") {
  Rng rng(7);
  for (int round = 0; round < 200; ++round) {
    const std::size_t n = 1 + rng.index(500);
    const PointCloud cloud = random_cloud(n, rng);
    const KdIndex index(cloud);

    const Vec3 q(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2),
                 rng.uniform(-1.2, 1.2));
    const std::size_t k = 1 + rng.index(10);
    CHECK(index.knn(q, k) == brute_knn(cloud.points, q, k));
  }
}

TEST_CASE("KdIndex breaks ties by ascending index") {
  // Duplicated points force exact distance ties.
  PointCloud cloud;
  for (int i = 0; i < 4; ++i) {
    cloud.points.emplace_back(1.0, 0.0, 0.0);
    cloud.points.emplace_back(-1.0, 0.0, 0.0);
  }
  const KdIndex index(cloud);
  const std::vector<std::size_t> nn = index.knn(Vec3(0, 0, 0), 5);
  CHECK(nn == brute_knn(cloud.points, Vec3(0, 0, 0), 5));
  CHECK(nn == std::vector<std::size_t>{0, 1, 2, 3, 4});
}

TEST_CASE("KdIndex radius query") {
  Rng rng(13);
  const PointCloud cloud = random_cloud(300, rng);
  const KdIndex index(cloud);
  const Vec3 q(0.1, -0.2, 0.05);
  const double r = 0.4;

  const std::vector<std::size_t> got = index.radius(q, r);
  std::vector<std::size_t> expect;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if ((cloud.points[i] - q).norm() <= r) expect.push_back(i);
  CHECK(got == expect);
}

TEST_CASE("PLY round trip") {
  PointCloud cloud;
  cloud.frame = "map";
  Rng rng(41);
  for (int i = 0; i < 50; ++i) {
    cloud.points.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1),
                              rng.uniform(-1, 1));
    cloud.normals.push_back(
        Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1))
            .normalized());
  }
  const std::string path = "test_round_trip.ply";
  save_ply(cloud, path);
  const PointCloud loaded = load_ply(path);
  std::remove(path.c_str());

  REQUIRE(loaded.size() == cloud.size());
  CHECK(loaded.frame == "map");
  REQUIRE(loaded.has_normals());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK((loaded.points[i] - cloud.points[i]).norm() < 1e-6);  // float fields
    CHECK((loaded.normals[i] - cloud.normals[i]).norm() < 1e-6);
  }
}

TEST_CASE("Rng determinism and fork independence") {
  Rng a(1234), b(1234);
  for (int i = 0; i < 10; ++i) CHECK(a.next() == b.next());

  Rng base(99);
  Rng f1 = base.fork(1);
  Rng f2 = base.fork(2);
  CHECK(f1.next() != f2.next());
  CHECK(base.fork(1).next() == base.fork(1).next());
}
