#include "ocular/eyeslot.hpp"

#include <cmath>
#include <iostream>
#include <opencv2/imgproc.hpp>

namespace ocular {

namespace {

constexpr double kPi = 3.14159265358979323846;

Point2 centroid(const Point2* begin, const Point2* end) {
    Point2 c;
    int n = 0;
    for (const Point2* p = begin; p != end; ++p, ++n) {
        c.x += p->x;
        c.y += p->y;
    }
    c.x /= n;
    c.y /= n;
    return c;
}

Point2 eye_centroid(const Landmarks68& lm, int begin, int end) {
    return centroid(&lm.points[begin], &lm.points[begin] + (end - begin));
}

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
    double vx = b.x - a.x, vy = b.y - a.y;
    double len2 = vx * vx + vy * vy;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(((p.x - a.x) * vx + (p.y - a.y) * vy) / len2, 0.0, 1.0);
    double dx = p.x - (a.x + t * vx), dy = p.y - (a.y + t * vy);
    return std::hypot(dx, dy);
}

// Rotate p about c by the given angle (degrees); positive angle maps the
// +x axis toward +y (counter-clockwise in math terms, y-down on screen).
Point2 rotate_about(const Point2& p, const Point2& c, double degrees) {
    double r = degrees * kPi / 180.0;
    double ct = std::cos(r), st = std::sin(r);
    double dx = p.x - c.x, dy = p.y - c.y;
    return {c.x + ct * dx - st * dy, c.y + st * dx + ct * dy};
}

}  // namespace

std::vector<Point2> ocular_points(const Landmarks68& lm) {
    std::vector<Point2> pts;
    pts.reserve(23);
    for (int i = ibug::kBrowBegin; i < ibug::kBrowEnd; ++i) pts.push_back(lm.points[i]);
    for (int i = ibug::kRightEyeBegin; i < ibug::kRightEyeEnd; ++i) pts.push_back(lm.points[i]);
    for (int i = ibug::kLeftEyeBegin; i < ibug::kLeftEyeEnd; ++i) pts.push_back(lm.points[i]);

    // nose-bridge point nearest the segment joining the eye centroids
    Point2 right = eye_centroid(lm, ibug::kRightEyeBegin, ibug::kRightEyeEnd);
    Point2 left = eye_centroid(lm, ibug::kLeftEyeBegin, ibug::kLeftEyeEnd);
    int best = ibug::kNoseBridgeBegin;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = ibug::kNoseBridgeBegin; i < ibug::kNoseBridgeEnd; ++i) {
        double d = point_segment_distance(lm.points[i], right, left);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    pts.push_back(lm.points[best]);
    return pts;
}

double eye_axis_angle(const Landmarks68& lm) {
    Point2 right = eye_centroid(lm, ibug::kRightEyeBegin, ibug::kRightEyeEnd);
    Point2 left = eye_centroid(lm, ibug::kLeftEyeBegin, ibug::kLeftEyeEnd);
    double dx = left.x - right.x, dy = left.y - right.y;
    if (dx == 0.0 && dy == 0.0) {
        std::cerr << "warning: coincident eye centroids, assuming theta = 0\n";
        return 0.0;
    }
    double theta = std::atan2(dy, dx) * 180.0 / kPi;
    while (theta <= -90.0) theta += 180.0;
    while (theta > 90.0) theta -= 180.0;
    return theta;
}

RotatedBox fit_expanded_box(const std::vector<Point2>& points, double theta) {
    if (points.size() < 2) throw std::invalid_argument("fit_expanded_box: need at least 2 points");
    Point2 c = centroid(points.data(), points.data() + points.size());

    double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
    double min_y = min_x, max_y = max_x;
    for (const Point2& p : points) {
        Point2 q = rotate_about(p, c, -theta);
        min_x = std::min(min_x, q.x);
        max_x = std::max(max_x, q.x);
        min_y = std::min(min_y, q.y);
        max_y = std::max(max_y, q.y);
    }
    double raw_w = max_x - min_x, raw_h = max_y - min_y;
    if (raw_w <= 0.0 || raw_h <= 0.0)
        throw std::invalid_argument("fit_expanded_box: degenerate ocular region");

    RotatedBox box;
    box.width = raw_w * 1.10;
    box.height = raw_h * 1.25;
    box.theta = theta;
    Point2 center_rot{(min_x + max_x) / 2.0, (min_y + max_y) / 2.0};
    box.center = rotate_about(center_rot, c, theta);
    return box;
}

std::variant<std::monostate, Rejection> eligibility(double width, double height, double valence,
                                                    double arousal) {
    if (!label_in_range(valence, arousal)) return Rejection{"label out of range"};
    if (width <= 0.0 || height <= 0.0) return Rejection{"empty extent"};
    if (height > width) return Rejection{"portrait aspect"};
    return std::monostate{};
}

ExtractOutcome extract_eye_slot(const cv::Mat& image, const Landmarks68& lm, double valence,
                                double arousal) {
    ExtractOutcome out;
    if (image.empty()) {
        out.rejection = Rejection{"empty image"};
        return out;
    }
    out.theta = eye_axis_angle(lm);
    out.box = fit_expanded_box(ocular_points(lm), out.theta);

    // integer crop bounds in the de-rotated frame; the box center is the
    // rotation's fixed point so the crop is axis-aligned around it
    int x0 = static_cast<int>(std::lround(out.box.center.x - out.box.width / 2.0));
    int x1 = static_cast<int>(std::lround(out.box.center.x + out.box.width / 2.0));
    int y0 = static_cast<int>(std::lround(out.box.center.y - out.box.height / 2.0));
    int y1 = static_cast<int>(std::lround(out.box.center.y + out.box.height / 2.0));

    auto verdict = eligibility(x1 - x0, y1 - y0, valence, arousal);
    if (auto* rej = std::get_if<Rejection>(&verdict)) {
        out.rejection = *rej;
        return out;
    }

    int cx0 = std::max(x0, 0), cx1 = std::min(x1, image.cols);
    int cy0 = std::max(y0, 0), cy1 = std::min(y1, image.rows);
    if (cx0 >= cx1 || cy0 >= cy1) {
        out.rejection = Rejection{"empty crop"};
        return out;
    }
    double kept_area = static_cast<double>(cx1 - cx0) * (cy1 - cy0);
    double box_area = static_cast<double>(x1 - x0) * (y1 - y0);
    if (kept_area < 0.5 * box_area) {
        out.rejection = Rejection{"crop mostly outside image"};
        return out;
    }
    // clamping can flip a landscape box to portrait
    if ((cy1 - cy0) > (cx1 - cx0)) {
        out.rejection = Rejection{"portrait aspect"};
        return out;
    }

    // de-rotate about the box center with bilinear sampling, black fill
    double r = -out.theta * kPi / 180.0;
    double ct = std::cos(r), st = std::sin(r);
    cv::Mat M = (cv::Mat_<double>(2, 3) << ct, -st, out.box.center.x - ct * out.box.center.x + st * out.box.center.y,
                 st, ct, out.box.center.y - st * out.box.center.x - ct * out.box.center.y);
    cv::Mat rotated;
    cv::warpAffine(image, rotated, M, image.size(), cv::INTER_LINEAR, cv::BORDER_CONSTANT,
                   cv::Scalar(0, 0, 0));

    EyeSlot slot;
    slot.image = rotated(cv::Rect(cx0, cy0, cx1 - cx0, cy1 - cy0)).clone();
    slot.valence = valence;
    slot.arousal = arousal;
    out.slot = std::move(slot);
    return out;
}

}  // namespace ocular
