#include "graspkit/core.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace graspkit {

bool is_rotation(const Mat3& r, double tol) {
  const Mat3 should_be_identity = r.transpose() * r - Mat3::Identity();
  if (should_be_identity.cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(r.determinant() - 1.0) <= tol;
}

Pose Pose::compose(const Pose& local) const {
  Pose out;
  out.rotation = rotation * local.rotation;
  out.translation = rotation * local.translation + translation;
  out.frame = frame;
  return out;
}

Pose Pose::inverse() const {
  Pose out;
  out.rotation = rotation.transpose();
  out.translation = -(rotation.transpose() * translation);
  out.frame = frame;
  return out;
}

Pose Pose::identity(std::string frame) {
  Pose p;
  p.frame = std::move(frame);
  return p;
}

// ---------------------------------------------------------------------------
// Rng
// ---------------------------------------------------------------------------

namespace {
std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace

std::uint64_t Rng::next() { return splitmix64(state_); }

double Rng::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("Rng::index: n must be positive");
  return static_cast<std::size_t>(next() % n);
}

double Rng::gaussian(double sigma) {
  // Box-Muller; u1 in (0, 1] to keep the log finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return sigma * std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

Rng Rng::fork(std::uint64_t stream) const {
  std::uint64_t s = state_ ^ (0xd1342543de82ef95ull * (stream + 1));
  return Rng(splitmix64(s));
}

// ---------------------------------------------------------------------------
// KdIndex
// ---------------------------------------------------------------------------

KdIndex::KdIndex(const PointCloud& cloud) : KdIndex(cloud.points) {}

KdIndex::KdIndex(std::vector<Vec3> points) : pts_(std::move(points)) {
  order_.resize(pts_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!pts_.empty()) root_ = build(0, static_cast<std::uint32_t>(pts_.size()));
}

std::int32_t KdIndex::build(std::uint32_t begin, std::uint32_t end) {
  constexpr std::uint32_t kLeafSize = 12;
  Node node;
  if (end - begin <= kLeafSize) {
    node.begin = begin;
    node.end = end;
    nodes_.push_back(node);
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  Vec3 lo = pts_[order_[begin]];
  Vec3 hi = lo;
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(pts_[order_[i]]);
    hi = hi.cwiseMax(pts_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const std::uint32_t mid = begin + (end - begin) / 2;
  // Tie-break the sort by index so the tree layout is deterministic.
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = pts_[a][axis];
                     const double cb = pts_[b][axis];
                     if (ca != cb) return ca < cb;
                     return a < b;
                   });

  node.axis = axis;
  node.split = pts_[order_[mid]][axis];
  nodes_.push_back(node);
  const std::int32_t self = static_cast<std::int32_t>(nodes_.size() - 1);
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

namespace {
struct Neighbor {
  double d2;
  std::size_t idx;
};

// Max-heap priority: the "worst" neighbor (largest distance, then largest
// index) sits on top.
inline bool heap_less(const Neighbor& a, const Neighbor& b) {
  if (a.d2 != b.d2) return a.d2 < b.d2;
  return a.idx < b.idx;
}

inline bool better(const Neighbor& a, const Neighbor& b) {
  return heap_less(a, b);
}
}  // namespace

std::vector<std::size_t> KdIndex::knn(const Vec3& query, std::size_t k) const {
  std::vector<std::size_t> out;
  if (k == 0 || pts_.empty()) return out;
  k = std::min(k, pts_.size());

  std::vector<Neighbor> heap;
  heap.reserve(k);

  auto visit = [&](auto&& self, std::int32_t ni) -> void {
    const Node& node = nodes_[ni];
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::size_t idx = order_[i];
        const Neighbor cand{(pts_[idx] - query).squaredNorm(), idx};
        if (heap.size() < k) {
          heap.push_back(cand);
          std::push_heap(heap.begin(), heap.end(), heap_less);
        } else if (better(cand, heap.front())) {
          std::pop_heap(heap.begin(), heap.end(), heap_less);
          heap.back() = cand;
          std::push_heap(heap.begin(), heap.end(), heap_less);
        }
      }
      return;
    }
    const double diff = query[node.axis] - node.split;
    const std::int32_t near = diff < 0.0 ? node.left : node.right;
    const std::int32_t far = diff < 0.0 ? node.right : node.left;
    self(self, near);
    // Descend the far side unless it is strictly beyond the current worst;
    // equal distances may still win on index.
    if (heap.size() < k || diff * diff <= heap.front().d2) self(self, far);
  };
  visit(visit, root_);

  std::sort(heap.begin(), heap.end(), heap_less);
  out.reserve(heap.size());
  for (const Neighbor& n : heap) out.push_back(n.idx);
  return out;
}

std::vector<std::size_t> KdIndex::radius(const Vec3& query, double r) const {
  std::vector<std::size_t> out;
  if (pts_.empty() || r < 0.0) return out;
  const double r2 = r * r;

  auto visit = [&](auto&& self, std::int32_t ni) -> void {
    const Node& node = nodes_[ni];
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::size_t idx = order_[i];
        if ((pts_[idx] - query).squaredNorm() <= r2) out.push_back(idx);
      }
      return;
    }
    const double diff = query[node.axis] - node.split;
    const std::int32_t near = diff < 0.0 ? node.left : node.right;
    const std::int32_t far = diff < 0.0 ? node.right : node.left;
    self(self, near);
    if (diff * diff <= r2) self(self, far);
  };
  if (root_ >= 0) visit(visit, root_);

  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Cloud operations
// ---------------------------------------------------------------------------

PointCloud transform_cloud(const PointCloud& cloud, const Pose& pose) {
  PointCloud out;
  out.frame = pose.frame;
  out.points.reserve(cloud.size());
  for (const Vec3& p : cloud.points) out.points.push_back(pose.apply(p));
  out.normals.reserve(cloud.normals.size());
  for (const Vec3& n : cloud.normals) out.normals.push_back(pose.rotation * n);
  return out;
}

namespace {
struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::int64_t v : {k.x, k.y, k.z}) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 0x100000001b3ull;
    }
    return static_cast<std::size_t>(h);
  }
};

CellKey cell_of(const Vec3& p, double voxel) {
  return CellKey{static_cast<std::int64_t>(std::floor(p.x() / voxel)),
                 static_cast<std::int64_t>(std::floor(p.y() / voxel)),
                 static_cast<std::int64_t>(std::floor(p.z() / voxel))};
}
}  // namespace

PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
  if (!(voxel > 0.0))
    throw std::invalid_argument("voxel_downsample: voxel must be positive");

  struct Cell {
    Vec3 sum = Vec3::Zero();
    Vec3 nsum = Vec3::Zero();
    Vec3 first_normal = Vec3::Zero();
    std::size_t count = 0;
  };

  std::unordered_map<CellKey, std::size_t, CellKeyHash> slot;
  std::vector<Cell> cells;  // in first-occurrence order
  slot.reserve(cloud.size());

  const bool with_normals = cloud.has_normals();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const CellKey key = cell_of(cloud.points[i], voxel);
    auto [it, inserted] = slot.try_emplace(key, cells.size());
    if (inserted) cells.emplace_back();
    Cell& c = cells[it->second];
    c.sum += cloud.points[i];
    if (with_normals) {
      if (c.count == 0) c.first_normal = cloud.normals[i];
      c.nsum += cloud.normals[i];
    }
    ++c.count;
  }

  PointCloud out;
  out.frame = cloud.frame;
  out.points.reserve(cells.size());
  if (with_normals) out.normals.reserve(cells.size());
  for (const Cell& c : cells) {
    out.points.push_back(c.sum / static_cast<double>(c.count));
    if (with_normals) {
      const double norm = c.nsum.norm();
      // Opposing members can cancel; fall back to the first member's normal.
      out.normals.push_back(norm > 1e-12 ? Vec3(c.nsum / norm)
                                         : c.first_normal);
    }
  }
  return out;
}

namespace {
PointCloud estimate_normals_impl(const PointCloud& cloud, std::size_t k,
                                 const Vec3& viewpoint, bool parallel) {
  if (k < 3)
    throw std::invalid_argument("estimate_normals: k must be at least 3");
  if (cloud.size() < k)
    throw std::invalid_argument("estimate_normals: cloud smaller than k");

  const KdIndex index(cloud);
  PointCloud out = cloud;
  out.normals.assign(cloud.size(), Vec3::Zero());

  const std::int64_t n = static_cast<std::int64_t>(cloud.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t ii = 0; ii < n; ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    const std::vector<std::size_t> nn = index.knn(cloud.points[i], k);

    Vec3 mean = Vec3::Zero();
    for (std::size_t j : nn) mean += cloud.points[j];
    mean /= static_cast<double>(nn.size());

    Mat3 cov = Mat3::Zero();
    for (std::size_t j : nn) {
      const Vec3 d = cloud.points[j] - mean;
      cov += d * d.transpose();
    }

    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    Vec3 normal = eig.eigenvectors().col(0);
    normal.normalize();
    if (normal.dot(viewpoint - cloud.points[i]) < 0.0) normal = -normal;
    out.normals[i] = normal;
  }
  return out;
}
}  // namespace

PointCloud estimate_normals(const PointCloud& cloud, std::size_t k,
                            const Vec3& viewpoint) {
  return estimate_normals_impl(cloud, k, viewpoint, true);
}

namespace serial {
PointCloud estimate_normals(const PointCloud& cloud, std::size_t k,
                            const Vec3& viewpoint) {
  return estimate_normals_impl(cloud, k, viewpoint, false);
}
}  // namespace serial

std::vector<std::size_t> farthest_point_indices(const std::vector<Vec3>& points,
                                                std::size_t n,
                                                std::uint64_t seed) {
  if (n == 0)
    throw std::invalid_argument("farthest_point_sample: n must be positive");

  std::vector<std::size_t> picked;
  if (points.empty()) return picked;
  if (points.size() <= n) {
    picked.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) picked[i] = i;
    return picked;
  }

  picked.reserve(n);
  const std::size_t first = Rng(seed).index(points.size());
  picked.push_back(first);

  std::vector<double> min_d2(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    min_d2[i] = (points[i] - points[first]).squaredNorm();

  while (picked.size() < n) {
    std::size_t best = 0;
    double best_d2 = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (min_d2[i] > best_d2) {  // strict: ties keep the lowest index
        best_d2 = min_d2[i];
        best = i;
      }
    }
    picked.push_back(best);
    for (std::size_t i = 0; i < points.size(); ++i)
      min_d2[i] = std::min(min_d2[i], (points[i] - points[best]).squaredNorm());
  }
  return picked;
}

PointCloud farthest_point_sample(const PointCloud& cloud, std::size_t n,
                                 std::uint64_t seed) {
  const std::vector<std::size_t> idx =
      farthest_point_indices(cloud.points, n, seed);
  if (idx.size() == cloud.size()) return cloud;

  PointCloud out;
  out.frame = cloud.frame;
  out.points.reserve(idx.size());
  for (std::size_t i : idx) out.points.push_back(cloud.points[i]);
  if (cloud.has_normals()) {
    out.normals.reserve(idx.size());
    for (std::size_t i : idx) out.normals.push_back(cloud.normals[i]);
  }
  return out;
}

Vec3 centroid(const PointCloud& cloud) {
  if (cloud.empty())
    throw std::invalid_argument("centroid: empty cloud");
  Vec3 sum = Vec3::Zero();
  for (const Vec3& p : cloud.points) sum += p;
  return sum / static_cast<double>(cloud.size());
}

// ---------------------------------------------------------------------------
// PLY I/O
// ---------------------------------------------------------------------------

void save_ply(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_ply: cannot open " + path);

  out << "ply\n"
      << "format ascii 1.0\n"
      << "comment frame " << cloud.frame << "\n"
      << "element vertex " << cloud.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n";
  if (cloud.has_normals())
    out << "property float nx\nproperty float ny\nproperty float nz\n";
  out << "end_header\n";

  out.precision(9);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    out << static_cast<float>(p.x()) << ' ' << static_cast<float>(p.y()) << ' '
        << static_cast<float>(p.z());
    if (cloud.has_normals()) {
      const Vec3& n = cloud.normals[i];
      out << ' ' << static_cast<float>(n.x()) << ' '
          << static_cast<float>(n.y()) << ' ' << static_cast<float>(n.z());
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("save_ply: write failed for " + path);
}

PointCloud load_ply(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_ply: cannot open " + path);

  std::string line;
  std::getline(in, line);
  if (line != "ply") throw std::runtime_error("load_ply: not a PLY file");

  std::size_t count = 0;
  std::vector<std::string> props;
  PointCloud cloud;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "end_header") break;
    if (tok == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "ascii")
        throw std::runtime_error("load_ply: only ascii PLY is supported");
    } else if (tok == "comment") {
      std::string key;
      ls >> key;
      if (key == "frame") ls >> cloud.frame;
    } else if (tok == "element") {
      std::string name;
      ls >> name >> count;
      if (name != "vertex")
        throw std::runtime_error("load_ply: unsupported element " + name);
    } else if (tok == "property") {
      std::string type, name;
      ls >> type >> name;
      props.push_back(name);
    }
  }

  const bool with_normals =
      props.size() >= 6 && props[3] == "nx" && props[4] == "ny" && props[5] == "nz";
  if (props.size() < 3 || props[0] != "x" || props[1] != "y" || props[2] != "z")
    throw std::runtime_error("load_ply: expected x y z properties");

  cloud.points.reserve(count);
  if (with_normals) cloud.normals.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    double x, y, z;
    if (!(in >> x >> y >> z))
      throw std::runtime_error("load_ply: truncated vertex data");
    cloud.points.emplace_back(x, y, z);
    if (with_normals) {
      double nx, ny, nz;
      if (!(in >> nx >> ny >> nz))
        throw std::runtime_error("load_ply: truncated normal data");
      cloud.normals.emplace_back(nx, ny, nz);
    }
  }
  return cloud;
}

}  // namespace graspkit
