#pragma once

#include <opencv2/core.hpp>
#include <string>

#include "ocular/models.hpp"

namespace ocular {

enum class SaliencyDirection { Increase, Decrease, Magnitude };

SaliencyDirection saliency_direction_from_string(const std::string& s);

struct SaliencyMap {
    Tensor values;  // (h, w), min-max normalized to [0, 1]
    int output_index = 0;  // 0 valence, 1 arousal
    SaliencyDirection direction = SaliencyDirection::Magnitude;
};

// Raw input gradient of one output for a single (h, w, 3) input: one
// forward and one backward pass with batch norm in inference mode.
Tensor input_gradient(Network& network, const Tensor& input, int output_index);

// Per-pixel reduction over channels of the input gradient, min-max
// normalized. Increase keeps positive gradient components, decrease keeps
// negative ones, magnitude takes absolute values; in each case the pixel
// value is the channel maximum. An identically zero map stays zero.
SaliencyMap saliency(Network& network, const Tensor& input, int output_index,
                     SaliencyDirection direction);

// Color-mapped saliency alpha-blended over the grayscale input, written as
// PNG.
void heatmap_overlay(const cv::Mat& input_rgb, const SaliencyMap& map, const std::string& path);

}  // namespace ocular
