#pragma once

#include <opencv2/core.hpp>
#include <string>

#include "ocular/tensor.hpp"

namespace ocular {

// Loads a raster file (PNG at minimum) as 8-bit RGB; throws if unreadable.
cv::Mat load_rgb(const std::string& path);

// Writes an 8-bit RGB image as PNG.
void save_rgb(const cv::Mat& image, const std::string& path);

// (h, w, 3) tensor of [0, 1] values -> 8-bit RGB.
cv::Mat tensor_to_rgb(const Tensor& t);

}  // namespace ocular
