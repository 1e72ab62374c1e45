#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace ocular {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

// iBUG 68-point facial landmark set, in pixels.
struct Landmarks68 {
    std::array<Point2, 68> points;
};

// One source image with its landmarks and valence/arousal label.
struct AnnotationRecord {
    std::string image_path;
    Landmarks68 landmarks;
    double valence = 0.0;
    double arousal = 0.0;
};

struct ParseDiagnostic {
    int row = 0;  // 1-based
    std::string message;
};

struct ParseResult {
    std::vector<AnnotationRecord> records;
    std::vector<ParseDiagnostic> diagnostics;  // malformed rows, never silently dropped
};

// Annotation CSV: one row per image — path, 68 (x, y) pairs in iBUG order
// (x then y per point), valence, arousal. 139 columns total.
ParseResult parse_annotations(const std::string& path);
ParseResult parse_annotation_text(const std::string& text);
std::string serialize_annotations(const std::vector<AnnotationRecord>& records);

inline bool label_in_range(double valence, double arousal) {
    return valence >= -1.0 && valence <= 1.0 && arousal >= -1.0 && arousal <= 1.0;
}

struct RejectedRecord {
    AnnotationRecord record;
    std::string reason;
};

struct FilterResult {
    std::vector<AnnotationRecord> kept;
    std::vector<RejectedRecord> rejected;
};

// Keeps records with valence, arousal in [-1, 1]; out-of-range labels are
// rejected with reason "label out of range".
FilterResult filter_valid_labels(const std::vector<AnnotationRecord>& records);

struct SplitManifest {
    std::vector<std::string> train;
    std::vector<std::string> validation;
    std::vector<std::string> test;
    std::uint64_t seed = 0;
    double validation_fraction = 0.01;
};

struct Carve {
    std::vector<std::string> train;
    std::vector<std::string> validation;
};

// Deterministically sets aside round(fraction * |pool|) ids for validation
// (round half up), seeded Fisher-Yates over mt19937_64.
Carve carve_validation(const std::vector<std::string>& pool, double fraction, std::uint64_t seed);

// Plain-text manifest: header with seed and fraction, then one id per line
// under [train] / [validation] / [test] sections.
void save_manifest(const SplitManifest& manifest, const std::string& path);
SplitManifest load_manifest(const std::string& path);

}  // namespace ocular
