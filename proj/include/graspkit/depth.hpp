#pragma once

#include "graspkit/core.hpp"

namespace graspkit {

/// Pinhole parameters. Pixel (u, v) indexes its own center, so the ray for
/// pixel (u, v) is ((u - cx)/fx, (v - cy)/fy, 1) in the camera frame
/// (+z optical axis, +x right, +y down).
struct CameraIntrinsics {
  double fx = 420.0;
  double fy = 420.0;
  double cx = 212.0;
  double cy = 120.0;
  int width = 424;
  int height = 240;

  void validate() const;
};

/// Metric depth raster; invalid pixels are encoded as 0.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // row-major, meters

  DepthImage() = default;
  DepthImage(int w, int h) : width(w), height(h), data(std::size_t(w) * h, 0.0) {}

  double at(int u, int v) const { return data[std::size_t(v) * width + u]; }
  double& at(int u, int v) { return data[std::size_t(v) * width + u]; }
  bool valid(int u, int v) const { return at(u, v) > 0.0; }
};

struct MaskImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // row-major, 0 or 1

  MaskImage() = default;
  MaskImage(int w, int h) : width(w), height(h), data(std::size_t(w) * h, 0) {}

  bool at(int u, int v) const { return data[std::size_t(v) * width + u] != 0; }
  void set(int u, int v, bool b) { data[std::size_t(v) * width + u] = b ? 1 : 0; }
  std::size_t count() const;
};

/// Image-plane depth compensation parameters.
struct CompensationParams {
  int window = 5;               // odd window side, pixels
  int min_valid = 6;            // neighbors required to fill a hole
  double fill_spread_max = 0.10;   // max (max-min) spread of fill neighbors, m
  double outlier_dev_max = 0.10;   // max |d - median| before invalidation, m

  void validate() const;
};

/// Binary erosion with a square structuring element, `iterations` times.
/// Out-of-bounds neighbors count as false.
MaskImage erode_mask(const MaskImage& mask, int kernel, int iterations);

/// Fill small holes and invalidate inconsistent pixels. Both passes read the
/// original raster; the median of an even count is the lower-middle element.
DepthImage compensate_depth(const DepthImage& depth,
                            const CompensationParams& params);

/// Back-project every valid pixel through the pinhole model and transform by
/// cam_pose into its target frame.
PointCloud backproject(const DepthImage& depth, const CameraIntrinsics& intr,
                       const Pose& cam_pose);

/// backproject restricted to pixels where the mask is true.
PointCloud extract_masked(const DepthImage& depth, const MaskImage& mask,
                          const CameraIntrinsics& intr, const Pose& cam_pose);

struct Frame {
  DepthImage depth;
  MaskImage mask;
  Pose cam_pose;
};

/// Compensate, extract, and concatenate every frame's masked cloud, then
/// voxel-downsample once. Empty extraction yields an empty cloud.
PointCloud accumulate(const std::vector<Frame>& frames,
                      const CameraIntrinsics& intr, double voxel,
                      const CompensationParams& params = {});

// PFM (grayscale, scale -1.0 => little-endian) and PGM (P5, 0/255) rasters.
void save_pfm(const DepthImage& depth, const std::string& path);
DepthImage load_pfm(const std::string& path);
void save_pgm(const MaskImage& mask, const std::string& path);
MaskImage load_pgm(const std::string& path);

}  // namespace graspkit
