#pragma once

#include "graspkit/core.hpp"

#include <functional>
#include <optional>

namespace graspkit {

enum class CompleterKind { Identity, Mirror, Oracle };

CompleterKind completer_kind_from_string(const std::string& s);
std::string to_string(CompleterKind kind);

/// Pluggable completer contract. All kinds consume a fixed-size input and
/// emit a fixed-size synthetic set.
struct CompleterSpec {
  CompleterKind kind = CompleterKind::Identity;
  std::size_t input_size = 2048;
  std::size_t output_size = 8192;
  std::string oracle_ref;  // ground-truth object label, oracle kind only

  void validate() const;
};

/// Runtime hooks a completer may need: the mean view direction for the mirror
/// heuristic and a ground-truth surface sampler for the oracle.
struct CompleterContext {
  std::optional<Vec3> view_dir;  // unit, sensor toward object
  std::function<PointCloud(std::size_t n, std::uint64_t seed)> oracle_sampler;
};

/// Stage 1: subsample the partial cloud to input_size and synthesize exactly
/// output_size points (the completer's fixed output budget).
PointCloud complete_stage1(const PointCloud& partial, const CompleterSpec& spec,
                           const CompleterContext& ctx, std::uint64_t seed);

/// Concatenation of observed and synthetic points; |out| = N + |synthetic|.
PointCloud merge_mid(const PointCloud& partial, const PointCloud& synthetic);

/// Overlapping fixed-size patches covering every point of the source cloud.
struct PatchSet {
  std::vector<PointCloud> patches;
  std::vector<std::vector<std::size_t>> members;  // indices into the source
  std::size_t patch_size = 2048;
};

/// Decompose into ceil(2n/patch_size) patches of exactly patch_size nearest
/// neighbors around farthest-point-sampled centers; extra patches are added
/// until every index is covered.
PatchSet patch_decompose(const PointCloud& mid, std::size_t patch_size,
                         std::uint64_t seed);

/// Per-patch completion with `budget` synthetic points each; patches run
/// independently and merge in patch order.
std::vector<PointCloud> complete_patches(const PatchSet& patches,
                                         const CompleterSpec& spec,
                                         const CompleterContext& ctx,
                                         std::size_t budget,
                                         std::uint64_t seed);

/// Stage 2: union of the mid cloud with every per-patch output, then one
/// voxel merge at the pipeline voxel size.
PointCloud refine_stage2(const PointCloud& mid, const PatchSet& patches,
                         const CompleterSpec& spec, const CompleterContext& ctx,
                         std::size_t budget, double voxel, std::uint64_t seed);

/// Resample to exactly n points: every point repeated floor(n/size) times
/// plus a seeded remainder without replacement.
PointCloud resample_exact(const PointCloud& cloud, std::size_t n, Rng& rng);

}  // namespace graspkit
