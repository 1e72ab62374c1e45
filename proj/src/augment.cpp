#include "ocular/augment.hpp"

#include <cmath>
#include <opencv2/imgproc.hpp>

#include "ocular/rng.hpp"

namespace ocular {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_range(double lo, double hi, const char* what) {
    if (lo > hi) throw std::invalid_argument(std::string("augment config: ") + what + " range has lo > hi");
}

double signed_draw(Rng& rng, double lo, double hi) {
    double mag = uniform(rng, lo, hi);
    return uniform01(rng) < 0.5 ? -mag : mag;
}

void check_rgb8(const cv::Mat& image, const char* who) {
    if (image.empty() || image.type() != CV_8UC3)
        throw std::invalid_argument(std::string(who) + ": expected non-empty 8-bit RGB image");
}

}  // namespace

void AugmentConfig::validate() const {
    check_range(brightness_lo, brightness_hi, "brightness");
    check_range(rotation_lo, rotation_hi, "rotation");
    check_range(width_shift_lo, width_shift_hi, "width shift");
    check_range(height_shift_lo, height_shift_hi, "height shift");
    check_range(shear_lo, shear_hi, "shear");
}

TransformParams sample_transform(const AugmentConfig& cfg, int image_w, int image_h,
                                 std::uint64_t seed) {
    cfg.validate();
    Rng rng(mix64(seed, 0x617567ULL /* "aug" */));
    TransformParams p;
    p.brightness = uniform(rng, cfg.brightness_lo, cfg.brightness_hi);
    p.rotation = signed_draw(rng, cfg.rotation_lo, cfg.rotation_hi);
    p.dx = signed_draw(rng, cfg.width_shift_lo, cfg.width_shift_hi) * image_w;
    p.dy = signed_draw(rng, cfg.height_shift_lo, cfg.height_shift_hi) * image_h;
    p.shear = signed_draw(rng, cfg.shear_lo, cfg.shear_hi);
    p.hflip = cfg.hflip_enabled && uniform01(rng) < 0.5;
    return p;
}

cv::Mat apply_brightness(const cv::Mat& image, double factor) {
    check_rgb8(image, "apply_brightness");
    // float HLS keeps the round trip within one 8-bit quantization step
    cv::Mat f, hls;
    image.convertTo(f, CV_32FC3, 1.0 / 255.0);
    cv::cvtColor(f, hls, cv::COLOR_RGB2HLS);
    for (int y = 0; y < hls.rows; ++y) {
        auto* row = hls.ptr<cv::Vec3f>(y);
        for (int x = 0; x < hls.cols; ++x)
            row[x][1] = static_cast<float>(std::clamp(row[x][1] * factor, 0.0, 1.0));
    }
    cv::Mat back, out;
    cv::cvtColor(hls, back, cv::COLOR_HLS2RGB);
    back.convertTo(out, CV_8UC3, 255.0);
    return out;
}

cv::Mat apply_affine(const cv::Mat& image, double rotation_deg, double dx, double dy,
                     double shear) {
    check_rgb8(image, "apply_affine");
    double cx = (image.cols - 1) / 2.0, cy = (image.rows - 1) / 2.0;
    double r = rotation_deg * kPi / 180.0;
    double c = std::cos(r), s = std::sin(r);

    cv::Mat rot = (cv::Mat_<double>(3, 3) << c, -s, cx - c * cx + s * cy,
                   s, c, cy - s * cx - c * cy,
                   0, 0, 1);
    double sh = std::tan(shear);
    cv::Mat shm = (cv::Mat_<double>(3, 3) << 1, sh, -sh * cy, 0, 1, 0, 0, 0, 1);
    cv::Mat tr = (cv::Mat_<double>(3, 3) << 1, 0, dx, 0, 1, dy, 0, 0, 1);

    cv::Mat M3 = tr * shm * rot;
    cv::Mat M = M3(cv::Rect(0, 0, 3, 2));
    cv::Mat out;
    cv::warpAffine(image, out, M, image.size(), cv::INTER_LINEAR, cv::BORDER_CONSTANT,
                   cv::Scalar(0, 0, 0));
    return out;
}

cv::Mat apply_hflip(const cv::Mat& image) {
    check_rgb8(image, "apply_hflip");
    cv::Mat out;
    cv::flip(image, out, 1);
    return out;
}

cv::Mat letterbox(const cv::Mat& image, int target_w, int target_h) {
    check_rgb8(image, "letterbox");
    if (target_w <= 0 || target_h <= 0)
        throw std::invalid_argument("letterbox: target dimensions must be positive");

    double s = std::min(static_cast<double>(target_w) / image.cols,
                        static_cast<double>(target_h) / image.rows);
    int cw = std::max(1, static_cast<int>(std::lround(image.cols * s)));
    int ch = std::max(1, static_cast<int>(std::lround(image.rows * s)));

    cv::Mat content;
    if (cw == image.cols && ch == image.rows)
        content = image;
    else
        cv::resize(image, content, cv::Size(cw, ch), 0, 0, cv::INTER_LINEAR);

    cv::Mat canvas = cv::Mat::zeros(target_h, target_w, CV_8UC3);
    int ox = (target_w - cw) / 2, oy = (target_h - ch) / 2;
    content.copyTo(canvas(cv::Rect(ox, oy, cw, ch)));
    return canvas;
}

Tensor normalize_pixels(const cv::Mat& image) {
    check_rgb8(image, "normalize_pixels");
    Tensor t({image.rows, image.cols, 3});
    std::int64_t i = 0;
    for (int y = 0; y < image.rows; ++y) {
        const auto* row = image.ptr<cv::Vec3b>(y);
        for (int x = 0; x < image.cols; ++x)
            for (int c = 0; c < 3; ++c) t.data[i++] = row[x][c] / 255.0;
    }
    return t;
}

Tensor augment_pipeline(const cv::Mat& slot, const AugmentConfig& cfg, int target_w, int target_h,
                        std::uint64_t seed) {
    TransformParams p = sample_transform(cfg, slot.cols, slot.rows, seed);
    cv::Mat img = apply_brightness(slot, p.brightness);
    img = apply_affine(img, p.rotation, p.dx, p.dy, p.shear);
    if (p.hflip) img = apply_hflip(img);
    img = letterbox(img, target_w, target_h);
    return normalize_pixels(img);
}

Tensor prepare_input(const cv::Mat& slot, int target_w, int target_h) {
    return normalize_pixels(letterbox(slot, target_w, target_h));
}

}  // namespace ocular
