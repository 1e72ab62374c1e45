#include "ocular/attention.hpp"

#include <cmath>
#include <opencv2/imgproc.hpp>

#include "ocular/image_io.hpp"

namespace ocular {

SaliencyDirection saliency_direction_from_string(const std::string& s) {
    if (s == "increase") return SaliencyDirection::Increase;
    if (s == "decrease") return SaliencyDirection::Decrease;
    if (s == "magnitude") return SaliencyDirection::Magnitude;
    throw std::invalid_argument("unknown saliency direction: " + s);
}

Tensor input_gradient(Network& net, const Tensor& input, int output_index) {
    if (output_index != 0 && output_index != 1)
        throw std::invalid_argument("input_gradient: output index must be 0 or 1");
    if (input.ndim() != 3)
        throw std::invalid_argument("input_gradient: expected a single (h, w, 3) input");

    Tensor batched({1, input.dim(0), input.dim(1), input.dim(2)});
    batched.data = input.data;
    net.forward(batched, Mode::Infer);

    Tensor seed({1, 2});
    seed.at2(0, output_index) = 1.0;
    Tensor grad = net.backward(seed);
    grad.shape = input.shape;
    return grad;
}

SaliencyMap saliency(Network& net, const Tensor& input, int output_index,
                     SaliencyDirection direction) {
    Tensor grad = input_gradient(net, input, output_index);
    const int h = input.dim(0), w = input.dim(1), c = input.dim(2);

    SaliencyMap map;
    map.output_index = output_index;
    map.direction = direction;
    map.values = Tensor({h, w});

    double max_v = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double best = 0.0;
            for (int ch = 0; ch < c; ++ch) {
                double g = grad.data[(static_cast<std::int64_t>(y) * w + x) * c + ch];
                double v = 0.0;
                switch (direction) {
                    case SaliencyDirection::Increase: v = std::max(g, 0.0); break;
                    case SaliencyDirection::Decrease: v = std::max(-g, 0.0); break;
                    case SaliencyDirection::Magnitude: v = std::abs(g); break;
                }
                best = std::max(best, v);
            }
            map.values.at2(y, x) = best;
            max_v = std::max(max_v, best);
        }
    if (max_v > 0.0)
        for (double& v : map.values.data) v /= max_v;
    return map;
}

void heatmap_overlay(const cv::Mat& input_rgb, const SaliencyMap& map, const std::string& path) {
    if (input_rgb.rows != map.values.dim(0) || input_rgb.cols != map.values.dim(1))
        throw std::invalid_argument("heatmap_overlay: image and map dimensions differ");

    cv::Mat gray;
    cv::cvtColor(input_rgb, gray, cv::COLOR_RGB2GRAY);
    cv::Mat gray_rgb;
    cv::cvtColor(gray, gray_rgb, cv::COLOR_GRAY2RGB);

    cv::Mat map8(input_rgb.rows, input_rgb.cols, CV_8UC1);
    for (int y = 0; y < map8.rows; ++y)
        for (int x = 0; x < map8.cols; ++x)
            map8.at<uchar>(y, x) =
                static_cast<uchar>(std::lround(map.values.at2(y, x) * 255.0));
    cv::Mat heat_bgr, heat;
    cv::applyColorMap(map8, heat_bgr, cv::COLORMAP_JET);
    cv::cvtColor(heat_bgr, heat, cv::COLOR_BGR2RGB);

    // blend strength follows the map value, so cold pixels stay grayscale
    cv::Mat out(input_rgb.rows, input_rgb.cols, CV_8UC3);
    for (int y = 0; y < out.rows; ++y)
        for (int x = 0; x < out.cols; ++x) {
            double a = map.values.at2(y, x) * 0.6;
            for (int c = 0; c < 3; ++c) {
                double v = (1.0 - a) * gray_rgb.at<cv::Vec3b>(y, x)[c] +
                           a * heat.at<cv::Vec3b>(y, x)[c];
                out.at<cv::Vec3b>(y, x)[c] = static_cast<uchar>(std::lround(v));
            }
        }
    save_rgb(out, path);
}

}  // namespace ocular
