#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace poseloop {

/// Dense depth raster, row-major, meters. Invalid pixels hold quiet NaN.
class DepthMap {
 public:
  DepthMap() = default;
  // Fills with NaN.
  DepthMap(int width, int height);
  DepthMap(int width, int height, double fill);
  // Throws Errc::kInvalidDepth if a finite value is <= 0.
  DepthMap(int width, int height, std::vector<double> values);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }

  double at(int x, int y) const { return values_[index(x, y)]; }
  void set(int x, int y, double value) { values_[index(x, y)] = value; }
  bool valid(int x, int y) const;

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, bool fill = false);

  int width() const { return width_; }
  int height() const { return height_; }
  bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool v = true) { bits_[index(x, y)] = v ? 1 : 0; }
  std::size_t count() const;

  std::span<const std::uint8_t> bits() const { return bits_; }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Binary dilation with a Euclidean disk of the given radius.
Mask dilate(const Mask& mask, int radius_px);

struct AffineDepthFit {
  double scale = 1.0;
  double shift = 0.0;  // meters
  double rmse = 0.0;   // meters, over the fitted pixel set
  std::size_t pixel_count = 0;
};

struct DepthFitOptions {
  int dilation_px = 10;
  // Drop pixels whose residual is more than `mad_factor` MADs from the median
  // residual and refit once.
  bool trimmed = false;
  double mad_factor = 3.0;
};

// Least-squares (s, b) with s * pred + b ~ real over the dilated mask.
// Throws kDimensionMismatch, kInsufficientPixels, kDegeneratePred.
AffineDepthFit fit_scale_shift(const DepthMap& pred, const DepthMap& real, const Mask& mask,
                               const DepthFitOptions& options = {});

struct AffineApplyResult {
  DepthMap depth;
  std::size_t clipped = 0;  // pixels mapped to <= 0 and invalidated
};

AffineApplyResult apply_affine(const DepthMap& depth, const AffineDepthFit& fit);

// Throws kInsufficientPixels when no valid pixel lies under the mask.
double mean_masked_depth(const DepthMap& depth, const Mask& mask);

struct FlickerProfile {
  std::vector<double> means;   // per frame, meters
  std::vector<double> deltas;  // |means[t+1] - means[t]|
  double max_delta = 0.0;
  std::size_t max_index = 0;   // t of the largest delta
};

// Errors from individual frames carry the frame index.
FlickerProfile flicker_profile(std::span<const DepthMap> depths, std::span<const Mask> masks);

}  // namespace poseloop
