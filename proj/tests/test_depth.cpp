#include "graspkit/depth.hpp"

#include <doctest.h>

#include <cstdio>
#include <set>

using namespace graspkit;

namespace {
CameraIntrinsics test_intr(int w = 64, int h = 48) {
  CameraIntrinsics intr;
  intr.fx = intr.fy = 100.0;
  intr.cx = w / 2.0;
  intr.cy = h / 2.0;
  intr.width = w;
  intr.height = h;
  return intr;
}
}  // namespace

TEST_CASE("erode_mask identity cases") {
  MaskImage mask(8, 8);
  for (int v = 2; v < 6; ++v)
    for (int u = 2; u < 6; ++u) mask.set(u, v, true);

  const MaskImage same_kernel = erode_mask(mask, 1, 3);
  CHECK(same_kernel.data == mask.data);
  const MaskImage same_iters = erode_mask(mask, 3, 0);
  CHECK(same_iters.data == mask.data);
  CHECK_THROWS_AS(erode_mask(mask, 4, 1), std::invalid_argument);
}

TEST_CASE("erode_mask shrinks a 3x3 block to its center") {
  MaskImage mask(9, 9);
  for (int v = 3; v <= 5; ++v)
    for (int u = 3; u <= 5; ++u) mask.set(u, v, true);

  const MaskImage eroded = erode_mask(mask, 3, 1);
  CHECK(eroded.count() == 1);
  CHECK(eroded.at(4, 4));

  MaskImage empty(9, 9);
  CHECK(erode_mask(empty, 3, 2).count() == 0);
}

TEST_CASE("erode_mask never grows the mask") {
  MaskImage mask(16, 16);
  Rng rng(8);
  for (int i = 0; i < 80; ++i)
    mask.set(int(rng.index(16)), int(rng.index(16)), true);
  const std::size_t before = mask.count();
  CHECK(erode_mask(mask, 3, 1).count() <= before);
  CHECK(erode_mask(mask, 5, 2).count() <= before);
}

TEST_CASE("compensate_depth fills a constant-neighborhood hole") {
  DepthImage depth(12, 12);
  for (int v = 0; v < 12; ++v)
    for (int u = 0; u < 12; ++u) depth.at(u, v) = 1.0;
  depth.at(6, 6) = 0.0;

  const DepthImage out = compensate_depth(depth, CompensationParams{});
  CHECK(out.at(6, 6) == doctest::Approx(1.0));
}

TEST_CASE("compensate_depth invalidates a flying pixel") {
  DepthImage depth(12, 12);
  for (int v = 0; v < 12; ++v)
    for (int u = 0; u < 12; ++u) depth.at(u, v) = 1.0;
  depth.at(5, 5) = 0.2;

  const DepthImage out = compensate_depth(depth, CompensationParams{});
  CHECK(out.at(5, 5) == 0.0);
}

TEST_CASE("compensate_depth leaves under-supported holes invalid") {
  DepthImage depth(12, 12);  // all invalid
  depth.at(4, 4) = 1.0;
  depth.at(5, 4) = 1.0;
  depth.at(6, 4) = 1.0;
  // Pixel (5,5) has only 3 valid neighbors; min_valid defaults to 6.
  const DepthImage out = compensate_depth(depth, CompensationParams{});
  CHECK(out.at(5, 5) == 0.0);
}

TEST_CASE("compensate_depth fill stays within the neighbor range") {
  Rng rng(77);
  DepthImage depth(24, 24);
  for (int v = 0; v < 24; ++v)
    for (int u = 0; u < 24; ++u)
      if (rng.uniform() > 0.2) depth.at(u, v) = rng.uniform(0.9, 1.0);

  CompensationParams params;
  const DepthImage out = compensate_depth(depth, params);
  const int r = params.window / 2;
  for (int v = 0; v < 24; ++v) {
    for (int u = 0; u < 24; ++u) {
      if (depth.valid(u, v)) {
        // Valid pixels change only by invalidation.
        CHECK((out.at(u, v) == depth.at(u, v) || out.at(u, v) == 0.0));
        continue;
      }
      if (!out.valid(u, v)) continue;
      double lo = 1e9, hi = -1e9;
      for (int dv = -r; dv <= r; ++dv)
        for (int du = -r; du <= r; ++du) {
          if (du == 0 && dv == 0) continue;
          const int uu = u + du, vv = v + dv;
          if (uu < 0 || vv < 0 || uu >= 24 || vv >= 24 || !depth.valid(uu, vv))
            continue;
          lo = std::min(lo, depth.at(uu, vv));
          hi = std::max(hi, depth.at(uu, vv));
        }
      CHECK(out.at(u, v) >= lo);
      CHECK(out.at(u, v) <= hi);
    }
  }
}

TEST_CASE("backproject principal point and derived pixel") {
  CameraIntrinsics intr;
  intr.fx = intr.fy = 100.0;
  intr.cx = 320.0;
  intr.cy = 240.0;
  intr.width = 640;
  intr.height = 480;

  DepthImage depth(640, 480);
  depth.at(320, 240) = 1.5;
  depth.at(420, 240) = 1.0;

  const PointCloud cloud = backproject(depth, intr, Pose::identity());
  REQUIRE(cloud.size() == 2);
  // Row-major scan order: (320,240) then (420,240).
  CHECK(cloud.points[0].isApprox(Vec3(0.0, 0.0, 1.5), 1e-12));
  CHECK(cloud.points[1].isApprox(Vec3(1.0, 0.0, 1.0), 1e-12));
}

TEST_CASE("backproject of an all-invalid raster is empty") {
  const CameraIntrinsics intr = test_intr();
  DepthImage depth(intr.width, intr.height);
  CHECK(backproject(depth, intr, Pose::identity()).empty());

  DepthImage wrong(intr.width + 1, intr.height);
  CHECK_THROWS_AS(backproject(wrong, intr, Pose::identity()),
                  std::invalid_argument);
}

TEST_CASE("backproject inverts a synthetic projection") {
  const CameraIntrinsics intr = test_intr();
  Rng rng(3);
  DepthImage depth(intr.width, intr.height);
  for (int i = 0; i < 40; ++i) {
    const int u = int(rng.index(intr.width));
    const int v = int(rng.index(intr.height));
    depth.at(u, v) = rng.uniform(0.5, 2.0);
  }
  std::vector<Vec3> originals;
  for (int v = 0; v < intr.height; ++v)
    for (int u = 0; u < intr.width; ++u)
      if (depth.valid(u, v))
        originals.emplace_back((u - intr.cx) * depth.at(u, v) / intr.fx,
                               (v - intr.cy) * depth.at(u, v) / intr.fy,
                               depth.at(u, v));

  const PointCloud cloud = backproject(depth, intr, Pose::identity());
  REQUIRE(cloud.size() == originals.size());
  for (std::size_t i = 0; i < cloud.size(); ++i)
    CHECK((cloud.points[i] - originals[i]).norm() < 1e-12);
}

TEST_CASE("extract_masked basics") {
  const CameraIntrinsics intr = test_intr();
  DepthImage depth(intr.width, intr.height);
  for (int v = 0; v < intr.height; ++v)
    for (int u = 0; u < intr.width; ++u) depth.at(u, v) = 2.0;

  MaskImage none(intr.width, intr.height);
  CHECK(extract_masked(depth, none, intr, Pose::identity()).empty());

  MaskImage all(intr.width, intr.height);
  for (auto& b : all.data) b = 1;
  const PointCloud everything =
      extract_masked(depth, all, intr, Pose::identity());
  const PointCloud direct = backproject(depth, intr, Pose::identity());
  REQUIRE(everything.size() == direct.size());
  for (std::size_t i = 0; i < direct.size(); ++i)
    CHECK(everything.points[i] == direct.points[i]);

  MaskImage single(intr.width, intr.height);
  single.set(int(intr.cx), int(intr.cy), true);
  const PointCloud one = extract_masked(depth, single, intr, Pose::identity());
  REQUIRE(one.size() == 1);
  CHECK(one.points[0].isApprox(Vec3(0, 0, 2.0), 1e-12));
  CHECK(one.size() <= single.count());
}

TEST_CASE("accumulate merges duplicate frames without growth") {
  const CameraIntrinsics intr = test_intr();
  DepthImage depth(intr.width, intr.height);
  MaskImage mask(intr.width, intr.height);
  for (int v = 20; v < 28; ++v)
    for (int u = 28; u < 36; ++u) {
      depth.at(u, v) = 1.0;
      mask.set(u, v, true);
    }

  Frame frame{depth, mask, Pose::identity()};
  const PointCloud once = accumulate({frame}, intr, 0.005);
  const PointCloud twice = accumulate({frame, frame}, intr, 0.005);
  CHECK(once.size() == twice.size());

  CHECK_THROWS_AS(accumulate({}, intr, 0.005), std::invalid_argument);

  // All-empty extraction yields an empty cloud, not an error.
  Frame blank{DepthImage(intr.width, intr.height),
              MaskImage(intr.width, intr.height), Pose::identity()};
  CHECK(accumulate({blank}, intr, 0.005).empty());
}

TEST_CASE("accumulate is order-invariant across frames") {
  const CameraIntrinsics intr = test_intr();
  auto make_frame = [&](double base_depth) {
    Frame f;
    f.depth = DepthImage(intr.width, intr.height);
    f.mask = MaskImage(intr.width, intr.height);
    f.cam_pose = Pose::identity();
    for (int v = 10; v < 34; ++v)
      for (int u = 10; u < 50; ++u) {
        f.depth.at(u, v) = base_depth + 0.001 * double(u % 7);
        f.mask.set(u, v, true);
      }
    return f;
  };
  const Frame a = make_frame(1.0);
  const Frame b = make_frame(1.3);

  const PointCloud ab = accumulate({a, b}, intr, 0.01);
  const PointCloud ba = accumulate({b, a}, intr, 0.01);
  REQUIRE(ab.size() == ba.size());

  // Same voxel-centroid set regardless of frame order.
  auto key = [](const Vec3& p) {
    return std::array<long, 3>{long(std::llround(p.x() * 1e7)),
                               long(std::llround(p.y() * 1e7)),
                               long(std::llround(p.z() * 1e7))};
  };
  std::set<std::array<long, 3>> sa, sb;
  for (const Vec3& p : ab.points) sa.insert(key(p));
  for (const Vec3& p : ba.points) sb.insert(key(p));
  CHECK(sa == sb);
}

TEST_CASE("PFM round trip") {
  DepthImage depth(17, 9);
  Rng rng(21);
  for (auto& d : depth.data)
    if (rng.uniform() > 0.3) d = rng.uniform(0.2, 3.0);

  const std::string path = "test_depth.pfm";
  save_pfm(depth, path);
  const DepthImage loaded = load_pfm(path);
  std::remove(path.c_str());

  REQUIRE(loaded.width == depth.width);
  REQUIRE(loaded.height == depth.height);
  for (std::size_t i = 0; i < depth.data.size(); ++i)
    CHECK(loaded.data[i] == doctest::Approx(depth.data[i]).epsilon(1e-6));
}

TEST_CASE("PGM round trip") {
  MaskImage mask(15, 11);
  Rng rng(22);
  for (auto& b : mask.data) b = rng.uniform() > 0.5 ? 1 : 0;

  const std::string path = "test_mask.pgm";
  save_pgm(mask, path);
  const MaskImage loaded = load_pgm(path);
  std::remove(path.c_str());

  REQUIRE(loaded.width == mask.width);
  REQUIRE(loaded.height == mask.height);
  CHECK(loaded.data == mask.data);
}
