#include "graspkit/completion.hpp"

#include <algorithm>
#include <cmath>

namespace graspkit {

CompleterKind completer_kind_from_string(const std::string& s) {
  if (s == "identity") return CompleterKind::Identity;
  if (s == "mirror") return CompleterKind::Mirror;
  if (s == "oracle") return CompleterKind::Oracle;
  throw std::invalid_argument("completer: unknown kind " + s);
}

std::string to_string(CompleterKind kind) {
  switch (kind) {
    case CompleterKind::Identity: return "identity";
    case CompleterKind::Mirror: return "mirror";
    case CompleterKind::Oracle: return "oracle";
  }
  return "?";
}

void CompleterSpec::validate() const {
  if (input_size == 0 || output_size == 0)
    throw std::invalid_argument("completer: sizes must be at least 1");
}

PointCloud resample_exact(const PointCloud& cloud, std::size_t n, Rng& rng) {
  PointCloud out;
  out.frame = cloud.frame;
  if (cloud.empty() || n == 0) return out;

  const std::size_t size = cloud.size();
  std::vector<std::size_t> picks;
  picks.reserve(n);
  const std::size_t full_rounds = n / size;
  for (std::size_t r = 0; r < full_rounds; ++r)
    for (std::size_t i = 0; i < size; ++i) picks.push_back(i);

  // Seeded remainder without replacement (partial Fisher-Yates).
  std::size_t remainder = n - full_rounds * size;
  if (remainder > 0) {
    std::vector<std::size_t> idx(size);
    for (std::size_t i = 0; i < size; ++i) idx[i] = i;
    for (std::size_t i = 0; i < remainder; ++i) {
      const std::size_t j = i + rng.index(size - i);
      std::swap(idx[i], idx[j]);
      picks.push_back(idx[i]);
    }
  }

  out.points.reserve(n);
  for (std::size_t i : picks) out.points.push_back(cloud.points[i]);
  if (cloud.has_normals()) {
    out.normals.reserve(n);
    for (std::size_t i : picks) out.normals.push_back(cloud.normals[i]);
  }
  return out;
}

namespace {
PointCloud run_completer(const PointCloud& input, const CompleterSpec& spec,
                         const CompleterContext& ctx, std::size_t out_size,
                         Rng rng) {
  switch (spec.kind) {
    case CompleterKind::Identity:
      return resample_exact(input, out_size, rng);

    case CompleterKind::Mirror: {
      if (!ctx.view_dir)
        throw std::invalid_argument("completer: mirror needs a view direction");
      const Vec3 normal = ctx.view_dir->normalized();
      const Vec3 plane_point = centroid(input);

      PointCloud reflected;
      reflected.frame = input.frame;
      reflected.points.reserve(input.size());
      for (const Vec3& p : input.points) {
        const double d = (p - plane_point).dot(normal);
        reflected.points.push_back(p - 2.0 * d * normal);
      }
      if (input.has_normals()) {
        reflected.normals.reserve(input.size());
        for (const Vec3& n : input.normals)
          reflected.normals.push_back(n - 2.0 * n.dot(normal) * normal);
      }
      return resample_exact(reflected, out_size, rng);
    }

    case CompleterKind::Oracle: {
      if (!ctx.oracle_sampler)
        throw std::invalid_argument(
            "completer: oracle kind needs a simulator surface sampler");
      PointCloud out = ctx.oracle_sampler(out_size, rng.next());
      out.frame = input.frame;
      return out;
    }
  }
  throw std::logic_error("completer: unreachable kind");
}
}  // namespace

PointCloud complete_stage1(const PointCloud& partial, const CompleterSpec& spec,
                           const CompleterContext& ctx, std::uint64_t seed) {
  spec.validate();
  if (partial.empty())
    throw std::invalid_argument("complete_stage1: empty partial cloud");

  Rng rng(seed);
  const PointCloud reduced =
      farthest_point_sample(partial, spec.input_size, rng.next());
  return run_completer(reduced, spec, ctx, spec.output_size, rng.fork(1));
}

PointCloud merge_mid(const PointCloud& partial, const PointCloud& synthetic) {
  if (!synthetic.empty() && partial.frame != synthetic.frame)
    throw std::invalid_argument("merge_mid: frame mismatch (" + partial.frame +
                                " vs " + synthetic.frame + ")");

  PointCloud mid;
  mid.frame = partial.frame;
  mid.points = partial.points;
  mid.points.insert(mid.points.end(), synthetic.points.begin(),
                    synthetic.points.end());
  if (partial.has_normals() && synthetic.has_normals()) {
    mid.normals = partial.normals;
    mid.normals.insert(mid.normals.end(), synthetic.normals.begin(),
                       synthetic.normals.end());
  }
  return mid;
}

PatchSet patch_decompose(const PointCloud& mid, std::size_t patch_size,
                         std::uint64_t seed) {
  if (patch_size == 0)
    throw std::invalid_argument("patch_decompose: patch_size must be positive");
  if (mid.size() < patch_size)
    throw std::invalid_argument("patch_decompose: cloud smaller than a patch");

  const std::size_t n_centers = static_cast<std::size_t>(
      std::ceil(2.0 * static_cast<double>(mid.size()) /
                static_cast<double>(patch_size)));
  const std::vector<std::size_t> centers =
      farthest_point_indices(mid.points, n_centers, seed);

  const KdIndex index(mid);
  PatchSet set;
  set.patch_size = patch_size;

  std::vector<char> covered(mid.size(), 0);
  auto add_patch = [&](std::size_t center_idx) {
    std::vector<std::size_t> members =
        index.knn(mid.points[center_idx], patch_size);
    PointCloud patch;
    patch.frame = mid.frame;
    patch.points.reserve(members.size());
    for (std::size_t m : members) {
      patch.points.push_back(mid.points[m]);
      covered[m] = 1;
    }
    if (mid.has_normals()) {
      patch.normals.reserve(members.size());
      for (std::size_t m : members) patch.normals.push_back(mid.normals[m]);
    }
    set.patches.push_back(std::move(patch));
    set.members.push_back(std::move(members));
  };

  for (std::size_t c : centers) add_patch(c);

  // Coverage guarantee: grow extra patches at uncovered points.
  for (std::size_t i = 0; i < mid.size(); ++i)
    if (!covered[i]) add_patch(i);

  return set;
}

std::vector<PointCloud> complete_patches(const PatchSet& patches,
                                         const CompleterSpec& spec,
                                         const CompleterContext& ctx,
                                         std::size_t budget,
                                         std::uint64_t seed) {
  spec.validate();
  if (patches.patches.empty())
    throw std::invalid_argument("complete_patches: empty patch set");

  const Rng base(seed);
  std::vector<PointCloud> out(patches.patches.size());
  const std::int64_t n = static_cast<std::int64_t>(patches.patches.size());
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      out[i] = run_completer(patches.patches[i], spec, ctx, budget,
                             base.fork(static_cast<std::uint64_t>(i)));
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

PointCloud refine_stage2(const PointCloud& mid, const PatchSet& patches,
                         const CompleterSpec& spec, const CompleterContext& ctx,
                         std::size_t budget, double voxel, std::uint64_t seed) {
  const std::vector<PointCloud> outputs =
      complete_patches(patches, spec, ctx, budget, seed);

  bool with_normals = mid.has_normals();
  for (const PointCloud& patch_out : outputs)
    with_normals = with_normals && patch_out.has_normals();

  PointCloud merged;
  merged.frame = mid.frame;
  merged.points = mid.points;
  if (with_normals) merged.normals = mid.normals;
  for (const PointCloud& patch_out : outputs) {
    merged.points.insert(merged.points.end(), patch_out.points.begin(),
                         patch_out.points.end());
    if (with_normals)
      merged.normals.insert(merged.normals.end(), patch_out.normals.begin(),
                            patch_out.normals.end());
  }
  return voxel_downsample(merged, voxel);
}

}  // namespace graspkit
