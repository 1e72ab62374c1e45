#pragma once

#include <opencv2/core.hpp>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ocular/dataset.hpp"

namespace ocular {

// Images are cv::Mat CV_8UC3 in RGB channel order throughout.

// iBUG 68-point index groups (0-based).
namespace ibug {
inline constexpr int kBrowBegin = 17, kBrowEnd = 27;        // both eyebrows, 10 points
inline constexpr int kNoseBridgeBegin = 27, kNoseBridgeEnd = 31;
inline constexpr int kRightEyeBegin = 36, kRightEyeEnd = 42;
inline constexpr int kLeftEyeBegin = 42, kLeftEyeEnd = 48;
}  // namespace ibug

// Rotated rectangle: center in image pixels, extents along the rotated
// axes, theta in degrees from the image horizontal. Positive theta is
// counter-clockwise in math terms, which reads clockwise on screen since
// image y points down.
struct RotatedBox {
    Point2 center;
    double width = 0.0;
    double height = 0.0;
    double theta = 0.0;  // in (-90, 90]
};

struct EyeSlot {
    cv::Mat image;  // RGB, width >= height by eligibility
    double valence = 0.0;
    double arousal = 0.0;
};

struct Rejection {
    std::string reason;
};

// The 23 ocular landmarks: 10 eyebrow points, 12 eye points, and the
// nose-bridge point nearest the segment joining the two eye centroids.
std::vector<Point2> ocular_points(const Landmarks68& landmarks);

// Angle of the segment joining the right- and left-eye centroids, degrees
// from the image horizontal, normalized to (-90, 90]. Coincident centroids
// degrade to 0.
double eye_axis_angle(const Landmarks68& landmarks);

// De-rotates the points by -theta about their centroid, takes the minimal
// axis-aligned box of the result, expands width by 10% and height by 25%
// about the box center, and maps the center back to image coordinates.
RotatedBox fit_expanded_box(const std::vector<Point2>& points, double theta);

// width > 0 and height > 0 and height <= width and label in [-1,1]^2.
std::variant<std::monostate, Rejection> eligibility(double width, double height, double valence,
                                                    double arousal);

struct ExtractOutcome {
    std::optional<EyeSlot> slot;
    std::optional<Rejection> rejection;
    RotatedBox box;  // geometry, filled even on rejection when computable
    double theta = 0.0;
};

// Rotates the image by -theta about the box center (bilinear, black fill),
// crops the expanded box, and applies the eligibility filters. Crops
// losing more than half their area to image-bound clamping are rejected.
ExtractOutcome extract_eye_slot(const cv::Mat& image, const Landmarks68& landmarks, double valence,
                                double arousal);

}  // namespace ocular
