#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace graspkit {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Tolerance for rotation-matrix orthonormality checks.
inline constexpr double kRotationTol = 1e-9;

bool is_rotation(const Mat3& r, double tol = kRotationTol);

/// Rigid transform. `frame` names the frame the transform maps points into.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  std::string frame = "world";

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  /// this ∘ local: apply `local` first, then this pose.
  Pose compose(const Pose& local) const;
  Pose inverse() const;

  static Pose identity(std::string frame = "world");
};

/// Point set with optional per-point unit normals, tagged with a frame.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // empty, or exactly one unit normal per point
  std::string frame = "world";

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_normals() const { return !normals.empty(); }
};

// ---------------------------------------------------------------------------
// Deterministic RNG
//
// splitmix64 stepping: portable across platforms and compilers, so every
// seeded result in the toolkit is reproducible bit-for-bit.
// ---------------------------------------------------------------------------
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();

  /// Uniform double in [0, 1).
  double uniform();
  double uniform(double lo, double hi);

  /// Uniform index in [0, n). n must be > 0.
  std::size_t index(std::size_t n);

  /// Zero-mean gaussian via Box-Muller.
  double gaussian(double sigma);

  /// Derive an independent substream; `this` is not advanced.
  Rng fork(std::uint64_t stream) const;

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// KD-tree
// ---------------------------------------------------------------------------

/// Immutable spatial index. k-NN results match a brute-force distance sort
/// with ties broken by ascending point index.
class KdIndex {
 public:
  explicit KdIndex(const PointCloud& cloud);
  explicit KdIndex(std::vector<Vec3> points);

  /// Indices of the k nearest points, ordered by (distance, index).
  std::vector<std::size_t> knn(const Vec3& query, std::size_t k) const;

  /// Indices of points with |p - query| <= r, in ascending index order.
  std::vector<std::size_t> radius(const Vec3& query, double r) const;

  std::size_t size() const { return pts_.size(); }

 private:
  struct Node {
    int axis = -1;        // -1 marks a leaf
    double split = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t begin = 0;  // leaf range into order_
    std::uint32_t end = 0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  std::vector<Vec3> pts_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

// ---------------------------------------------------------------------------
// Cloud operations
// ---------------------------------------------------------------------------

/// Rigid-transform every point (and rotate normals); output frame is the
/// pose's target frame.
PointCloud transform_cloud(const PointCloud& cloud, const Pose& pose);

/// One point per occupied voxel, at the centroid of the voxel's members.
/// Normals, when present, are averaged and renormalized. Output cells are
/// ordered by first occurrence in the input.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel);

/// Per-point normal from the covariance of the k nearest neighbors
/// (neighborhood includes the point itself), oriented so that
/// dot(n, viewpoint - p) >= 0.
PointCloud estimate_normals(const PointCloud& cloud, std::size_t k,
                            const Vec3& viewpoint);

/// Greedy farthest-point subsampling to n points. The first point is drawn
/// by the seeded RNG; each subsequent point maximizes the minimum distance
/// to the chosen set (ties by ascending index). Returns the cloud unchanged
/// when it already has <= n points.
PointCloud farthest_point_sample(const PointCloud& cloud, std::size_t n,
                                 std::uint64_t seed);

/// Index-returning core of farthest_point_sample, in selection order.
std::vector<std::size_t> farthest_point_indices(const std::vector<Vec3>& points,
                                                std::size_t n,
                                                std::uint64_t seed);

Vec3 centroid(const PointCloud& cloud);

// ---------------------------------------------------------------------------
// PLY I/O (ASCII, float x y z [nx ny nz])
// ---------------------------------------------------------------------------
void save_ply(const PointCloud& cloud, const std::string& path);
PointCloud load_ply(const std::string& path);

namespace serial {
/// Single-threaded reference for estimate_normals; kept for tests and the
/// kernel benchmark.
PointCloud estimate_normals(const PointCloud& cloud, std::size_t k,
                            const Vec3& viewpoint);
}  // namespace serial

}  // namespace graspkit
