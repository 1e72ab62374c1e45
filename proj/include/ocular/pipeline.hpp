#pragma once

#include <map>
#include <string>
#include <vector>

#include "ocular/dataset.hpp"
#include "ocular/training.hpp"

namespace ocular {

struct PreprocessStats {
    int rows = 0;
    int parsed = 0;
    int accepted = 0;
    std::map<std::string, int> rejections;  // reason -> count
    std::vector<ParseDiagnostic> diagnostics;
};

// Runs annotation parsing, label filtering, and eye-slot extraction over a
// corpus. Accepted slots are written as PNGs under <out_dir>/slots/ and
// every record gets a row in <out_dir>/slot_manifest.csv:
//   id,slot_path,valence,arousal,theta,center_x,center_y,width,height,status,reason
PreprocessStats preprocess_corpus(const std::string& annotations_csv,
                                  const std::string& image_root, const std::string& out_dir);

struct SlotEntry {
    std::string id;
    std::string slot_path;
    double valence = 0.0;
    double arousal = 0.0;
    bool accepted = false;
    std::string reason;
};

std::vector<SlotEntry> load_slot_manifest(const std::string& path);

// Loads the slot images for the given ids (all ids must exist and be
// accepted entries).
std::vector<TrainSample> load_samples(const std::string& manifest_path,
                                      const std::vector<std::string>& ids);

std::vector<std::string> accepted_ids(const std::vector<SlotEntry>& entries);

}  // namespace ocular
