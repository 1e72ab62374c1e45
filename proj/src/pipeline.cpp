#include "ocular/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "ocular/eyeslot.hpp"
#include "ocular/image_io.hpp"

namespace fs = std::filesystem;

namespace ocular {

PreprocessStats preprocess_corpus(const std::string& annotations_csv,
                                  const std::string& image_root, const std::string& out_dir) {
    ParseResult parsed = parse_annotations(annotations_csv);
    if (parsed.records.empty() && parsed.diagnostics.empty())
        throw std::invalid_argument("preprocess: no records in " + annotations_csv);

    fs::create_directories(fs::path(out_dir) / "slots");
    std::ofstream manifest(fs::path(out_dir) / "slot_manifest.csv");
    if (!manifest) throw std::runtime_error("preprocess: cannot write manifest in " + out_dir);
    manifest.precision(17);
    manifest << "id,slot_path,valence,arousal,theta,center_x,center_y,width,height,status,reason\n";

    PreprocessStats stats;
    stats.diagnostics = parsed.diagnostics;
    stats.rows = static_cast<int>(parsed.records.size() + parsed.diagnostics.size());
    stats.parsed = static_cast<int>(parsed.records.size());

    for (const AnnotationRecord& rec : parsed.records) {
        std::string id = fs::path(rec.image_path).stem().string();
        fs::path img_path = fs::path(image_root) / rec.image_path;

        auto emit = [&](const ExtractOutcome& out, const std::string& status,
                        const std::string& reason, const std::string& slot_path) {
            manifest << id << ',' << slot_path << ',' << rec.valence << ',' << rec.arousal << ','
                     << out.theta << ',' << out.box.center.x << ',' << out.box.center.y << ','
                     << out.box.width << ',' << out.box.height << ',' << status << ',' << reason
                     << '\n';
        };

        ExtractOutcome out;
        try {
            cv::Mat image = load_rgb(img_path.string());
            out = extract_eye_slot(image, rec.landmarks, rec.valence, rec.arousal);
        } catch (const std::exception& e) {
            out.rejection = Rejection{e.what()};
        }
        if (out.slot) {
            std::string slot_rel = "slots/" + id + ".png";
            save_rgb(out.slot->image, (fs::path(out_dir) / slot_rel).string());
            emit(out, "accepted", "", slot_rel);
            ++stats.accepted;
        } else {
            ++stats.rejections[out.rejection->reason];
            emit(out, "rejected", out.rejection->reason, "");
        }
    }

    std::ofstream report(fs::path(out_dir) / "rejections.txt");
    report << "rows " << stats.rows << "\nparsed " << stats.parsed << "\naccepted "
           << stats.accepted << "\n";
    for (const auto& [reason, n] : stats.rejections) report << reason << " " << n << "\n";
    for (const auto& d : stats.diagnostics)
        report << "malformed row " << d.row << ": " << d.message << "\n";
    return stats;
}

std::vector<SlotEntry> load_slot_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read slot manifest: " + path);
    std::vector<SlotEntry> entries;
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) f.push_back(field);
        while (f.size() < 11) f.emplace_back();
        SlotEntry e;
        e.id = f[0];
        e.slot_path = f[1];
        e.valence = std::stod(f[2]);
        e.arousal = std::stod(f[3]);
        e.accepted = f[9] == "accepted";
        e.reason = f[10];
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<std::string> accepted_ids(const std::vector<SlotEntry>& entries) {
    std::vector<std::string> ids;
    for (const SlotEntry& e : entries)
        if (e.accepted) ids.push_back(e.id);
    return ids;
}

std::vector<TrainSample> load_samples(const std::string& manifest_path,
                                      const std::vector<std::string>& ids) {
    auto entries = load_slot_manifest(manifest_path);
    std::unordered_map<std::string, const SlotEntry*> by_id;
    for (const SlotEntry& e : entries) by_id[e.id] = &e;

    fs::path base = fs::path(manifest_path).parent_path();
    std::vector<TrainSample> samples;
    samples.reserve(ids.size());
    for (const std::string& id : ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw std::runtime_error("load_samples: unknown id " + id);
        if (!it->second->accepted)
            throw std::runtime_error("load_samples: id " + id + " was rejected (" +
                                     it->second->reason + ")");
        TrainSample s;
        s.image = load_rgb((base / it->second->slot_path).string());
        s.valence = it->second->valence;
        s.arousal = it->second->arousal;
        samples.push_back(std::move(s));
    }
    return samples;
}

}  // namespace ocular
