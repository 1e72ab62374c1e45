#include "ocular/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ocular/rng.hpp"

namespace ocular {

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_double(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        return pos == s.size() && std::isfinite(out);
    } catch (const std::exception&) {
        return false;
    }
}

constexpr int kColumns = 1 + 136 + 2;  // path, 68 (x, y) pairs, valence, arousal

}  // namespace

ParseResult parse_annotation_text(const std::string& text) {
    ParseResult result;
    std::stringstream ss(text);
    std::string line;
    int row = 0;
    while (std::getline(ss, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_row(line);
        if (static_cast<int>(fields.size()) != kColumns) {
            result.diagnostics.push_back(
                {row, "expected " + std::to_string(kColumns) + " columns, got " +
                          std::to_string(fields.size())});
            continue;
        }
        AnnotationRecord rec;
        rec.image_path = fields[0];
        bool ok = true;
        for (int i = 0; i < 68 && ok; ++i) {
            ok = parse_double(fields[1 + 2 * i], rec.landmarks.points[i].x) &&
                 parse_double(fields[2 + 2 * i], rec.landmarks.points[i].y);
        }
        ok = ok && parse_double(fields[137], rec.valence) && parse_double(fields[138], rec.arousal);
        if (!ok) {
            result.diagnostics.push_back({row, "non-numeric or non-finite field"});
            continue;
        }
        result.records.push_back(std::move(rec));
    }
    return result;
}

ParseResult parse_annotations(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("annotations: cannot open " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_annotation_text(buf.str());
}

std::string serialize_annotations(const std::vector<AnnotationRecord>& records) {
    std::ostringstream os;
    os.precision(17);
    for (const auto& rec : records) {
        os << rec.image_path;
        for (const Point2& p : rec.landmarks.points) os << ',' << p.x << ',' << p.y;
        os << ',' << rec.valence << ',' << rec.arousal << '\n';
    }
    return os.str();
}

FilterResult filter_valid_labels(const std::vector<AnnotationRecord>& records) {
    FilterResult out;
    for (const auto& rec : records) {
        if (label_in_range(rec.valence, rec.arousal))
            out.kept.push_back(rec);
        else
            out.rejected.push_back({rec, "label out of range"});
    }
    return out;
}

Carve carve_validation(const std::vector<std::string>& pool, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("carve_validation: fraction must be in (0, 1)");
    if (pool.empty()) throw std::invalid_argument("carve_validation: empty pool");

    // round half up
    auto n_val = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(pool.size()) + 0.5));
    n_val = std::min(n_val, pool.size());

    std::vector<std::size_t> idx(pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(mix64(seed, 0x73706c6974ULL /* "split" */));
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[uniform_index(rng, i)]);

    Carve carve;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i < n_val)
            carve.validation.push_back(pool[idx[i]]);
        else
            carve.train.push_back(pool[idx[i]]);
    }
    // keep manifests stable and diffable
    std::sort(carve.train.begin(), carve.train.end());
    std::sort(carve.validation.begin(), carve.validation.end());
    return carve;
}

void save_manifest(const SplitManifest& m, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("manifest: cannot open for writing: " + path);
    os.precision(17);
    os << "# seed=" << m.seed << " validation_fraction=" << m.validation_fraction << "\n";
    os << "[train]\n";
    for (const auto& id : m.train) os << id << "\n";
    os << "[validation]\n";
    for (const auto& id : m.validation) os << id << "\n";
    os << "[test]\n";
    for (const auto& id : m.test) os << id << "\n";
}

SplitManifest load_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("manifest: cannot open " + path);
    SplitManifest m;
    std::vector<std::string>* section = nullptr;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::size_t sp = line.find("seed=");
            if (sp != std::string::npos) m.seed = std::stoull(line.substr(sp + 5));
            sp = line.find("validation_fraction=");
            if (sp != std::string::npos) m.validation_fraction = std::stod(line.substr(sp + 20));
            continue;
        }
        if (line == "[train]") { section = &m.train; continue; }
        if (line == "[validation]") { section = &m.validation; continue; }
        if (line == "[test]") { section = &m.test; continue; }
        if (!section) throw std::runtime_error("manifest: id before section header in " + path);
        section->push_back(line);
    }
    return m;
}

}  // namespace ocular
