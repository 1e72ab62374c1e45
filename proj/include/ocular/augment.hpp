#pragma once

#include <cstdint>
#include <opencv2/core.hpp>
#include <string>

#include "ocular/tensor.hpp"

namespace ocular {

// Randomized training-time transformations. Defaults are the documented
// augmentation ranges; magnitudes are drawn uniformly and rotation, shifts
// and shear get an independent random sign.
struct AugmentConfig {
    double brightness_lo = 0.5, brightness_hi = 1.5;  // HLS lightness factor
    double rotation_lo = 0.0, rotation_hi = 5.0;      // degrees
    double width_shift_lo = 0.0, width_shift_hi = 0.10;    // fraction of width
    double height_shift_lo = 0.0, height_shift_hi = 0.10;  // fraction of height
    double shear_lo = 0.0, shear_hi = 0.01;  // radians, horizontal shear
    bool hflip_enabled = true;

    void validate() const;
};

struct TransformParams {
    double brightness = 1.0;
    double rotation = 0.0;  // signed degrees
    double dx = 0.0;        // signed pixels
    double dy = 0.0;
    double shear = 0.0;  // signed radians
    bool hflip = false;
};

// Deterministic for a fixed seed.
TransformParams sample_transform(const AugmentConfig& config, int image_w, int image_h,
                                 std::uint64_t seed);

// RGB -> HLS, lightness scaled and clamped, back to RGB.
cv::Mat apply_brightness(const cv::Mat& image, double factor);

// Single composed affine warp: rotation about the image center, then
// horizontal shear, then translation. Bilinear sampling, black fill.
cv::Mat apply_affine(const cv::Mat& image, double rotation_deg, double dx, double dy, double shear);

cv::Mat apply_hflip(const cv::Mat& image);

// Aspect-preserving resize with centered black padding to exactly
// (target_w, target_h). The same scale applies on both axes.
cv::Mat letterbox(const cv::Mat& image, int target_w, int target_h);

// 8-bit RGB image -> (h, w, 3) tensor with values v / 255 in [0, 1].
Tensor normalize_pixels(const cv::Mat& image);

// sample -> brightness -> affine -> optional hflip -> letterbox ->
// normalize. Labels are carried outside; no stage touches them.
Tensor augment_pipeline(const cv::Mat& slot, const AugmentConfig& config, int target_w,
                        int target_h, std::uint64_t seed);

// Validation/test path: letterbox + normalize only.
Tensor prepare_input(const cv::Mat& slot, int target_w, int target_h);

}  // namespace ocular
