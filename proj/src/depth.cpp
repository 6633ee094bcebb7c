#include "graspkit/depth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace graspkit {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0))
    throw std::invalid_argument("intrinsics: focal lengths must be positive");
  if (!(cx > 0.0 && cx < width) || !(cy > 0.0 && cy < height))
    throw std::invalid_argument("intrinsics: principal point outside image");
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("intrinsics: non-positive image size");
}

std::size_t MaskImage::count() const {
  std::size_t n = 0;
  for (std::uint8_t b : data) n += b != 0;
  return n;
}

void CompensationParams::validate() const {
  if (window < 3 || window % 2 == 0)
    throw std::invalid_argument("compensation: window must be odd and >= 3");
  if (min_valid < 1 || min_valid > window * window - 1)
    throw std::invalid_argument("compensation: min_valid out of range");
  if (fill_spread_max < 0.0 || outlier_dev_max < 0.0)
    throw std::invalid_argument("compensation: negative threshold");
}

MaskImage erode_mask(const MaskImage& mask, int kernel, int iterations) {
  if (kernel < 1 || kernel % 2 == 0)
    throw std::invalid_argument("erode_mask: kernel must be odd and >= 1");
  if (iterations < 0)
    throw std::invalid_argument("erode_mask: negative iterations");

  MaskImage cur = mask;
  const int r = kernel / 2;
  for (int it = 0; it < iterations && r > 0; ++it) {
    MaskImage next(cur.width, cur.height);
    for (int v = 0; v < cur.height; ++v) {
      for (int u = 0; u < cur.width; ++u) {
        bool keep = cur.at(u, v);
        for (int dv = -r; keep && dv <= r; ++dv) {
          for (int du = -r; keep && du <= r; ++du) {
            const int uu = u + du;
            const int vv = v + dv;
            if (uu < 0 || vv < 0 || uu >= cur.width || vv >= cur.height ||
                !cur.at(uu, vv))
              keep = false;
          }
        }
        next.set(u, v, keep);
      }
    }
    cur = std::move(next);
  }
  return cur;
}

namespace {
// Lower-middle element; covers odd counts as the exact middle.
double lower_median(std::vector<double>& values) {
  const std::size_t mid = (values.size() - 1) / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  return values[mid];
}
}  // namespace

DepthImage compensate_depth(const DepthImage& depth,
                            const CompensationParams& params) {
  params.validate();
  DepthImage out = depth;
  const int r = params.window / 2;

  std::vector<double> nbr;
  nbr.reserve(std::size_t(params.window) * params.window);
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      nbr.clear();
      for (int dv = -r; dv <= r; ++dv) {
        for (int du = -r; du <= r; ++du) {
          if (du == 0 && dv == 0) continue;
          const int uu = u + du;
          const int vv = v + dv;
          if (uu < 0 || vv < 0 || uu >= depth.width || vv >= depth.height)
            continue;
          const double d = depth.at(uu, vv);
          if (d > 0.0) nbr.push_back(d);
        }
      }

      if (!depth.valid(u, v)) {
        if (static_cast<int>(nbr.size()) >= params.min_valid) {
          const auto [mn, mx] = std::minmax_element(nbr.begin(), nbr.end());
          if (*mx - *mn <= params.fill_spread_max)
            out.at(u, v) = lower_median(nbr);
        }
      } else if (!nbr.empty()) {
        const double med = lower_median(nbr);
        if (std::abs(depth.at(u, v) - med) > params.outlier_dev_max)
          out.at(u, v) = 0.0;
      }
    }
  }
  return out;
}

PointCloud backproject(const DepthImage& depth, const CameraIntrinsics& intr,
                       const Pose& cam_pose) {
  intr.validate();
  if (depth.width != intr.width || depth.height != intr.height)
    throw std::invalid_argument("backproject: depth dims do not match intrinsics");

  PointCloud out;
  out.frame = cam_pose.frame;
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const double d = depth.at(u, v);
      if (d <= 0.0) continue;
      const Vec3 local((u - intr.cx) * d / intr.fx, (v - intr.cy) * d / intr.fy,
                       d);
      out.points.push_back(cam_pose.apply(local));
    }
  }
  return out;
}

PointCloud extract_masked(const DepthImage& depth, const MaskImage& mask,
                          const CameraIntrinsics& intr, const Pose& cam_pose) {
  intr.validate();
  if (depth.width != mask.width || depth.height != mask.height)
    throw std::invalid_argument("extract_masked: depth and mask dims differ");
  if (depth.width != intr.width || depth.height != intr.height)
    throw std::invalid_argument("extract_masked: dims do not match intrinsics");

  PointCloud out;
  out.frame = cam_pose.frame;
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      if (!mask.at(u, v)) continue;
      const double d = depth.at(u, v);
      if (d <= 0.0) continue;
      const Vec3 local((u - intr.cx) * d / intr.fx, (v - intr.cy) * d / intr.fy,
                       d);
      out.points.push_back(cam_pose.apply(local));
    }
  }
  return out;
}

PointCloud accumulate(const std::vector<Frame>& frames,
                      const CameraIntrinsics& intr, double voxel,
                      const CompensationParams& params) {
  if (frames.empty())
    throw std::invalid_argument("accumulate: no frames");

  PointCloud merged;
  merged.frame = frames.front().cam_pose.frame;
  for (const Frame& f : frames) {
    const DepthImage comp = compensate_depth(f.depth, params);
    const PointCloud part = extract_masked(comp, f.mask, intr, f.cam_pose);
    merged.points.insert(merged.points.end(), part.points.begin(),
                         part.points.end());
  }
  if (merged.empty()) return merged;
  return voxel_downsample(merged, voxel);
}

// ---------------------------------------------------------------------------
// PFM / PGM
// ---------------------------------------------------------------------------

namespace {
void write_le_float(std::ofstream& out, float f) {
  static_assert(std::endian::native == std::endian::little,
                "big-endian hosts would need byte swaps here");
  out.write(reinterpret_cast<const char*>(&f), sizeof f);
}
}  // namespace

void save_pfm(const DepthImage& depth, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_pfm: cannot open " + path);
  out << "Pf\n" << depth.width << " " << depth.height << "\n-1.0\n";
  // PFM stores rows bottom-up.
  for (int v = depth.height - 1; v >= 0; --v)
    for (int u = 0; u < depth.width; ++u)
      write_le_float(out, static_cast<float>(depth.at(u, v)));
  if (!out) throw std::runtime_error("save_pfm: write failed for " + path);
}

DepthImage load_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_pfm: cannot open " + path);
  std::string magic;
  int w = 0, h = 0;
  double scale = 0.0;
  in >> magic >> w >> h >> scale;
  if (magic != "Pf" || w <= 0 || h <= 0)
    throw std::runtime_error("load_pfm: not a grayscale PFM");
  if (scale >= 0.0)
    throw std::runtime_error("load_pfm: only little-endian PFM supported");
  in.get();  // single whitespace after the header

  DepthImage depth(w, h);
  for (int v = h - 1; v >= 0; --v) {
    for (int u = 0; u < w; ++u) {
      float f;
      in.read(reinterpret_cast<char*>(&f), sizeof f);
      depth.at(u, v) = f;
    }
  }
  if (!in) throw std::runtime_error("load_pfm: truncated data in " + path);
  return depth;
}

void save_pgm(const MaskImage& mask, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_pgm: cannot open " + path);
  out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
  for (int v = 0; v < mask.height; ++v)
    for (int u = 0; u < mask.width; ++u)
      out.put(mask.at(u, v) ? char(255) : char(0));
  if (!out) throw std::runtime_error("save_pgm: write failed for " + path);
}

MaskImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_pgm: cannot open " + path);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || w <= 0 || h <= 0 || maxval != 255)
    throw std::runtime_error("load_pgm: unsupported PGM variant");
  in.get();

  MaskImage mask(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const int c = in.get();
      if (c == EOF) throw std::runtime_error("load_pgm: truncated data");
      mask.set(u, v, c != 0);
    }
  }
  return mask;
}

}  // namespace graspkit
