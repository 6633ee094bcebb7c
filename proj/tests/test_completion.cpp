#include "graspkit/completion.hpp"
#include "graspkit/sim.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace graspkit;

namespace {

PointCloud half_cylinder_shell(double radius, double height, std::size_t n,
                               std::uint64_t seed) {
  // Lateral half-shell on the -y side, viewed along +y from -y.
  PointCloud cloud;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double th = rng.uniform(-std::numbers::pi, 0.0);  // y < 0 half
    const double z = rng.uniform(-height / 2.0, height / 2.0);
    cloud.points.emplace_back(radius * std::cos(th), radius * std::sin(th), z);
  }
  return cloud;
}

double cylinder_surface_distance(const Vec3& p, double radius, double height) {
  Primitive cyl;
  cyl.type = Primitive::Type::Cylinder;
  cyl.radius = radius;
  cyl.height = height;
  return std::abs(signed_distance(cyl, p));
}

std::set<std::array<long, 3>> voxel_keys(const PointCloud& cloud, double voxel) {
  std::set<std::array<long, 3>> keys;
  for (const Vec3& p : cloud.points)
    keys.insert({long(std::floor(p.x() / voxel)), long(std::floor(p.y() / voxel)),
                 long(std::floor(p.z() / voxel))});
  return keys;
}

PointCloud random_blob(std::size_t n, std::uint64_t seed) {
  PointCloud cloud;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i)
    cloud.points.emplace_back(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1),
                              rng.uniform(-0.1, 0.1));
  return cloud;
}

}  // namespace

TEST_CASE("complete_stage1 emits exactly output_size for every kind") {
  const PointCloud partial = random_blob(3000, 1);

  CompleterContext ctx;
  ctx.view_dir = Vec3(0, 1, 0);
  Scene scene;
  SceneObject box;
  box.id = "box";
  box.is_target = true;
  box.shape.dims = Vec3(0.1, 0.1, 0.1);
  box.pose.translation = Vec3(0, 0, 0.55);
  scene.objects.push_back(box);
  ctx.oracle_sampler = [&scene](std::size_t n, std::uint64_t s) {
    return sample_surface(scene, "box", n, s);
  };

  for (CompleterKind kind :
       {CompleterKind::Identity, CompleterKind::Mirror, CompleterKind::Oracle}) {
    CompleterSpec spec;
    spec.kind = kind;
    const PointCloud out = complete_stage1(partial, spec, ctx, 7);
    CHECK(out.size() == 8192);
  }

  // Small inputs still produce the full budget.
  const PointCloud tiny = random_blob(17, 2);
  CompleterSpec spec;
  spec.kind = CompleterKind::Identity;
  CHECK(complete_stage1(tiny, spec, ctx, 3).size() == 8192);
}

TEST_CASE("complete_stage1 error paths") {
  CompleterSpec spec;
  CompleterContext ctx;
  CHECK_THROWS_AS(complete_stage1(PointCloud{}, spec, ctx, 1),
                  std::invalid_argument);

  spec.kind = CompleterKind::Oracle;  // no sampler in ctx
  const PointCloud partial = random_blob(100, 3);
  CHECK_THROWS_AS(complete_stage1(partial, spec, ctx, 1), std::invalid_argument);

  spec.kind = CompleterKind::Mirror;  // no view direction
  CHECK_THROWS_AS(complete_stage1(partial, spec, ctx, 1), std::invalid_argument);
}

TEST_CASE("identity completer draws only input locations") {
  const PointCloud partial = random_blob(2048, 4);
  CompleterSpec spec;
  spec.kind = CompleterKind::Identity;
  const PointCloud out = complete_stage1(partial, spec, CompleterContext{}, 5);

  std::set<std::array<long, 3>> input_keys = voxel_keys(partial, 1e-9);
  for (const Vec3& p : out.points) {
    const std::array<long, 3> k{long(std::floor(p.x() / 1e-9)),
                                long(std::floor(p.y() / 1e-9)),
                                long(std::floor(p.z() / 1e-9))};
    CHECK(input_keys.count(k) == 1);
  }
}

TEST_CASE("mirror completer fills the far side of a half cylinder") {
  const double radius = 0.01;
  const double height = 0.10;
  const PointCloud shell = half_cylinder_shell(radius, height, 2048, 6);

  CompleterSpec spec;
  spec.kind = CompleterKind::Mirror;
  CompleterContext ctx;
  ctx.view_dir = Vec3(0, 1, 0);  // looking along +y at the -y half

  const PointCloud out = complete_stage1(shell, spec, ctx, 7);
  REQUIRE(out.size() == 8192);

  // Analytic oracle: every synthesized point lies near the true surface.
  double worst = 0.0;
  for (const Vec3& p : out.points)
    worst = std::max(worst, cylinder_surface_distance(p, radius, height));
  CHECK(worst < 0.01);
}

TEST_CASE("merge_mid cardinality is additive") {
  const PointCloud partial = random_blob(5000, 8);
  CompleterSpec spec;
  spec.kind = CompleterKind::Identity;
  const PointCloud synth = complete_stage1(partial, spec, CompleterContext{}, 9);
  CHECK(merge_mid(partial, synth).size() == 13192);

  const PointCloud partial2 = random_blob(2048, 10);
  const PointCloud synth2 = complete_stage1(partial2, spec, CompleterContext{}, 9);
  CHECK(merge_mid(partial2, synth2).size() == 10240);

  // Empty synthetic set: union is just the partial cloud.
  const PointCloud same = merge_mid(partial, PointCloud{});
  CHECK(same.size() == partial.size());

  PointCloud other_frame = synth;
  other_frame.frame = "odom";
  CHECK_THROWS_AS(merge_mid(partial, other_frame), std::invalid_argument);
}

TEST_CASE("merge_mid keeps observed points intact") {
  const PointCloud partial = random_blob(700, 11);
  CompleterSpec spec;
  spec.kind = CompleterKind::Identity;
  const PointCloud synth = complete_stage1(partial, spec, CompleterContext{}, 2);
  const PointCloud mid = merge_mid(partial, synth);
  for (std::size_t i = 0; i < partial.size(); ++i)
    CHECK(mid.points[i] == partial.points[i]);
}

TEST_CASE("patch_decompose covers every index with exact patch sizes") {
  // Surface-like cloud, as the pipeline produces: a cylinder shell.
  PointCloud mid;
  Rng rng(15);
  for (int i = 0; i < 10240; ++i) {
    const double th = rng.uniform(0.0, 2.0 * std::numbers::pi);
    mid.points.emplace_back(0.04 * std::cos(th), 0.04 * std::sin(th),
                            rng.uniform(0.0, 0.2));
  }
  const PatchSet set = patch_decompose(mid, 2048, 13);

  CHECK(set.patches.size() == 10);  // ceil(2*10240/2048)
  std::set<std::size_t> covered;
  for (std::size_t p = 0; p < set.patches.size(); ++p) {
    CHECK(set.patches[p].size() == 2048);
    CHECK(set.members[p].size() == 2048);
    covered.insert(set.members[p].begin(), set.members[p].end());
  }
  CHECK(covered.size() == mid.size());
}

TEST_CASE("patch_decompose degenerate and error cases") {
  PointCloud exact = random_blob(256, 14);
  const PatchSet set = patch_decompose(exact, 256, 15);
  REQUIRE(set.patches.size() == 2);  // ceil(2n/n)
  for (const PointCloud& patch : set.patches) CHECK(patch.size() == 256);

  PointCloud small = random_blob(100, 16);
  CHECK_THROWS_AS(patch_decompose(small, 101, 17), std::invalid_argument);
}

TEST_CASE("patch_decompose is deterministic") {
  PointCloud mid = random_blob(4096, 18);
  const PatchSet a = patch_decompose(mid, 1024, 19);
  const PatchSet b = patch_decompose(mid, 1024, 19);
  REQUIRE(a.members.size() == b.members.size());
  for (std::size_t i = 0; i < a.members.size(); ++i)
    CHECK(a.members[i] == b.members[i]);
}

TEST_CASE("refine_stage2 with identity adds no new geometry") {
  const double voxel = 0.005;
  PointCloud mid = random_blob(4096, 20);
  const PatchSet patches = patch_decompose(mid, 1024, 21);
  CompleterSpec spec;
  spec.kind = CompleterKind::Identity;

  const PointCloud complete =
      refine_stage2(mid, patches, spec, CompleterContext{}, 1024, voxel, 22);
  CHECK(voxel_keys(complete, voxel) == voxel_keys(mid, voxel));
  CHECK(complete.size() >= voxel_downsample(mid, voxel).size());
}

TEST_CASE("observed points survive until the voxel merge") {
  PointCloud partial = random_blob(3000, 23);
  CompleterSpec spec;
  spec.kind = CompleterKind::Identity;
  const PointCloud synth = complete_stage1(partial, spec, CompleterContext{}, 24);
  const PointCloud mid = merge_mid(partial, synth);
  const PatchSet patches = patch_decompose(mid, 2048, 25);
  const std::vector<PointCloud> outputs =
      complete_patches(patches, spec, CompleterContext{}, 512, 26);

  // P_partial into P_mid by construction; the pre-voxel stage-2 cloud is
  // mid plus patch outputs, so P_mid is a prefix of it.
  REQUIRE(mid.size() == partial.size() + synth.size());
  for (std::size_t i = 0; i < partial.size(); ++i)
    CHECK(mid.points[i] == partial.points[i]);
  CHECK(outputs.size() == patches.patches.size());
  for (const PointCloud& out : outputs) CHECK(out.size() == 512);
}

TEST_CASE("oracle refinement lands on the true box surface") {
  Scene scene;
  SceneObject box;
  box.id = "box";
  box.is_target = true;
  box.shape.dims = Vec3(0.12, 0.08, 0.20);
  box.pose.translation = Vec3(0.0, 0.0, 0.60);
  scene.objects.push_back(box);

  CompleterContext ctx;
  ctx.oracle_sampler = [&scene](std::size_t n, std::uint64_t s) {
    return sample_surface(scene, "box", n, s);
  };
  CompleterSpec spec;
  spec.kind = CompleterKind::Oracle;

  // Partial observation: points on the front face only.
  PointCloud partial;
  Rng rng(27);
  for (int i = 0; i < 1500; ++i)
    partial.points.emplace_back(-0.06, rng.uniform(-0.04, 0.04),
                                0.60 + rng.uniform(-0.10, 0.10));

  const double voxel = 0.005;
  const PointCloud synth = complete_stage1(partial, spec, ctx, 28);
  const PointCloud mid = merge_mid(partial, synth);
  const PatchSet patches = patch_decompose(mid, 2048, 29);
  const PointCloud complete =
      refine_stage2(mid, patches, spec, ctx, 2048, voxel, 30);

  const Pose into_box = box.pose.inverse();
  for (const Vec3& p : complete.points) {
    const double d = std::abs(signed_distance(box.shape, into_box.apply(p)));
    CHECK(d < 0.01);
  }
}

TEST_CASE("full completion chain is deterministic") {
  const PointCloud partial = random_blob(2600, 31);
  CompleterSpec spec;
  spec.kind = CompleterKind::Mirror;
  CompleterContext ctx;
  ctx.view_dir = Vec3(0.3, 0.9, 0.1).normalized();

  auto run = [&] {
    const PointCloud synth = complete_stage1(partial, spec, ctx, 42);
    const PointCloud mid = merge_mid(partial, synth);
    const PatchSet patches = patch_decompose(mid, 2048, 43);
    return refine_stage2(mid, patches, spec, ctx, 2048, 0.005, 44);
  };
  const PointCloud a = run();
  const PointCloud b = run();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.points[i] == b.points[i]);
}
