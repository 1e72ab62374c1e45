#include "ocular/image_io.hpp"

#include <cmath>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace ocular {

cv::Mat load_rgb(const std::string& path) {
    cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
    if (bgr.empty()) throw std::runtime_error("cannot read image: " + path);
    cv::Mat rgb;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    return rgb;
}

void save_rgb(const cv::Mat& image, const std::string& path) {
    cv::Mat bgr;
    cv::cvtColor(image, bgr, cv::COLOR_RGB2BGR);
    if (!cv::imwrite(path, bgr)) throw std::runtime_error("cannot write image: " + path);
}

cv::Mat tensor_to_rgb(const Tensor& t) {
    if (t.ndim() != 3 || t.dim(2) != 3)
        throw std::invalid_argument("tensor_to_rgb: expected (h, w, 3), got " + shape_str(t.shape));
    cv::Mat out(t.dim(0), t.dim(1), CV_8UC3);
    std::int64_t i = 0;
    for (int y = 0; y < out.rows; ++y) {
        auto* row = out.ptr<cv::Vec3b>(y);
        for (int x = 0; x < out.cols; ++x)
            for (int c = 0; c < 3; ++c)
                row[x][c] = static_cast<uchar>(
                    std::clamp(std::lround(t.data[i++] * 255.0), 0L, 255L));
    }
    return out;
}

}  // namespace ocular
