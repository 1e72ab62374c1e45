// Command-line front end. Every flag defaults to the pipeline's standard
// constant where one exists, so a bare invocation reproduces the reference
// configuration. Exit codes: 0 success, 1 invalid arguments or inputs,
// 2 runtime failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ocular/attention.hpp"
#include "ocular/augment.hpp"
#include "ocular/dataset.hpp"
#include "ocular/image_io.hpp"
#include "ocular/metrics.hpp"
#include "ocular/models.hpp"
#include "ocular/pipeline.hpp"
#include "ocular/training.hpp"

namespace fs = std::filesystem;
using namespace ocular;

namespace {

struct AugmentFlags {
    AugmentConfig cfg;
    bool no_hflip = false;

    void add_to(CLI::App& app) {
        app.add_option("--brightness-lo", cfg.brightness_lo, "Brightness factor lower bound")
            ->capture_default_str();
        app.add_option("--brightness-hi", cfg.brightness_hi, "Brightness factor upper bound")
            ->capture_default_str();
        app.add_option("--rotation", cfg.rotation_hi, "Max rotation magnitude, degrees")
            ->capture_default_str();
        app.add_option("--width-shift", cfg.width_shift_hi, "Max horizontal shift, fraction of width")
            ->capture_default_str();
        app.add_option("--height-shift", cfg.height_shift_hi, "Max vertical shift, fraction of height")
            ->capture_default_str();
        app.add_option("--shear", cfg.shear_hi, "Max shear magnitude, radians")
            ->capture_default_str();
        app.add_flag("--no-hflip", no_hflip, "Disable random horizontal flips");
    }

    AugmentConfig resolve() const {
        AugmentConfig out = cfg;
        out.hflip_enabled = !no_hflip;
        return out;
    }
};

struct ModelFlags {
    std::string model = "M1";
    int input_h = 170;
    int input_w = 512;
    double scale = 1.0;
    double width_multiplier = 1.0;

    void add_to(CLI::App& app) {
        app.add_option("--model", model, "Architecture: M1, M2, or M3")->capture_default_str();
        app.add_option("--input-h", input_h, "Network input height")->capture_default_str();
        app.add_option("--input-w", input_w, "Network input width")->capture_default_str();
        app.add_option("--scale", scale, "Channel scale (1.0 = paper scale, 1/16 = desk scale)")
            ->capture_default_str();
        app.add_option("--width-multiplier", width_multiplier,
                       "MobileNet width multiplier (M3 pointwise widths)")
            ->capture_default_str();
    }

    ModelConfig resolve(std::uint64_t seed) const {
        ModelConfig cfg;
        cfg.id = model_id_from_string(model);
        cfg.input_h = input_h;
        cfg.input_w = input_w;
        cfg.channel_scale = scale;
        cfg.width_multiplier = width_multiplier;
        cfg.seed = seed;
        return cfg;
    }
};

std::vector<TrainSample> section_samples(const std::string& manifest, const SplitManifest& split,
                                         const std::string& section) {
    if (section == "train") return load_samples(manifest, split.train);
    if (section == "validation") return load_samples(manifest, split.validation);
    if (section == "test") return load_samples(manifest, split.test);
    throw std::invalid_argument("unknown split section: " + section);
}

// ---------------------------------------------------------------- commands

int cmd_preprocess(const std::string& annotations, const std::string& image_root,
                   const std::string& out_dir) {
    PreprocessStats stats = preprocess_corpus(annotations, image_root, out_dir);
    if (stats.parsed == 0) throw std::invalid_argument("no records parsed from " + annotations);

    std::printf("rows:     %d\n", stats.rows);
    std::printf("parsed:   %d\n", stats.parsed);
    std::printf("accepted: %d\n", stats.accepted);
    for (const auto& [reason, count] : stats.rejections)
        std::printf("rejected (%s): %d\n", reason.c_str(), count);
    for (const ParseDiagnostic& d : stats.diagnostics)
        std::fprintf(stderr, "row %d: %s\n", d.row, d.message.c_str());
    std::printf("manifest: %s\n", (fs::path(out_dir) / "slot_manifest.csv").string().c_str());
    return 0;
}

int cmd_split(const std::string& manifest, const std::string& test_manifest, double fraction,
              std::uint64_t seed, const std::string& out) {
    auto ids = accepted_ids(load_slot_manifest(manifest));
    Carve carve = carve_validation(ids, fraction, seed);

    SplitManifest split;
    split.train = carve.train;
    split.validation = carve.validation;
    split.seed = seed;
    split.validation_fraction = fraction;
    if (!test_manifest.empty()) split.test = accepted_ids(load_slot_manifest(test_manifest));

    save_manifest(split, out);
    std::printf("train: %zu  validation: %zu  test: %zu -> %s\n", split.train.size(),
                split.validation.size(), split.test.size(), out.c_str());
    return 0;
}

int cmd_train(const ModelFlags& mf, const AugmentFlags& af, const std::string& manifest,
              const std::string& split_path, const TrainConfig& base, bool no_augment,
              const std::string& history_path, const std::string& plot_path,
              std::uint64_t seed) {
    SplitManifest split = load_manifest(split_path);
    auto train_set = load_samples(manifest, split.train);
    auto val_set = load_samples(manifest, split.validation);

    Network net = build(mf.resolve(seed));
    TrainConfig cfg = base;
    cfg.augment = af.resolve();
    cfg.augment_enabled = !no_augment;
    cfg.seed = seed;

    TrainHistory history = train(net, train_set, val_set, cfg);

    std::string history_out = history_path;
    if (history_out.empty() && !cfg.checkpoint_dir.empty())
        history_out = (fs::path(cfg.checkpoint_dir) / "history.csv").string();
    if (!history_out.empty()) {
        export_history_csv(history, history_out);
        std::printf("history: %s\n", history_out.c_str());
    }
    if (!plot_path.empty()) {
        export_loss_plot({{to_string(mf.resolve(seed).id), history}}, plot_path);
        std::printf("plot: %s\n", plot_path.c_str());
    }
    const LossRecord& last = history.records.back();
    std::printf("final train loss %.17g, validation loss %.17g\n", last.train_loss, last.val_loss);
    return 0;
}

int cmd_evaluate(const std::string& checkpoint, const std::string& predictions_csv,
                 const std::string& manifest, const std::string& split_path,
                 const std::string& section, const std::string& out) {
    EvaluationReport rep;
    std::string label = section;
    if (!predictions_csv.empty()) {
        // fixture mode: pred_valence,pred_arousal,true_valence,true_arousal
        std::ifstream is(predictions_csv);
        if (!is) throw std::invalid_argument("cannot read " + predictions_csv);
        std::vector<double> vals;
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            double a, b, c, d;
            char comma;
            if (ss >> a >> comma >> b >> comma >> c >> comma >> d) {
                vals.insert(vals.end(), {a, b, c, d});
            }
        }
        int n = static_cast<int>(vals.size() / 4);
        if (n == 0) throw std::invalid_argument("no prediction rows in " + predictions_csv);
        Tensor pred({n, 2}), truth({n, 2});
        for (int i = 0; i < n; ++i) {
            pred.at2(i, 0) = vals[4 * i];
            pred.at2(i, 1) = vals[4 * i + 1];
            truth.at2(i, 0) = vals[4 * i + 2];
            truth.at2(i, 1) = vals[4 * i + 3];
        }
        rep = evaluate_report(pred, truth);
        label = predictions_csv;
    } else {
        if (checkpoint.empty())
            throw std::invalid_argument("evaluate needs --checkpoint or --predictions");
        Checkpoint ckpt = load_checkpoint(checkpoint);
        SplitManifest split = load_manifest(split_path);
        auto samples = section_samples(manifest, split, section);
        if (samples.empty()) throw std::invalid_argument("split section '" + section + "' is empty");
        Tensor pred = predict_samples(ckpt.network, samples);
        rep = evaluate_report(pred, targets_of(samples));
    }

    std::string table = format_report(rep, label);
    std::printf("%s\n%s", table.c_str(), report_key_values(rep).c_str());
    if (!out.empty()) {
        std::ofstream os(out);
        os << table << '\n' << report_key_values(rep);
        std::printf("report: %s\n", out.c_str());
    }
    return 0;
}

int cmd_attention(const std::string& checkpoint, const std::string& image_path,
                  const std::string& output_name, const std::string& direction_name,
                  const std::string& out) {
    Checkpoint ckpt = load_checkpoint(checkpoint);
    int output_index;
    if (output_name == "valence")
        output_index = 0;
    else if (output_name == "arousal")
        output_index = 1;
    else
        throw std::invalid_argument("output must be 'valence' or 'arousal'");
    SaliencyDirection direction = saliency_direction_from_string(direction_name);

    cv::Mat slot = load_rgb(image_path);
    cv::Mat boxed = letterbox(slot, ckpt.network.config.input_w, ckpt.network.config.input_h);
    Tensor input = normalize_pixels(boxed);

    SaliencyMap map = saliency(ckpt.network, input, output_index, direction);
    heatmap_overlay(boxed, map, out);
    std::printf("overlay: %s\n", out.c_str());
    return 0;
}

int cmd_augment_preview(const AugmentFlags& af, const std::string& image_path,
                        const std::string& out_dir, int count, int target_w, int target_h,
                        std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("--count must be >= 1");
    cv::Mat slot = load_rgb(image_path);
    fs::create_directories(out_dir);

    save_rgb(letterbox(slot, target_w, target_h), (fs::path(out_dir) / "before.png").string());
    AugmentConfig cfg = af.resolve();
    for (int i = 0; i < count; ++i) {
        Tensor t = augment_pipeline(slot, cfg, target_w, target_h,
                                    mix64(seed, static_cast<std::uint64_t>(i)));
        std::string name = "after_" + std::to_string(i) + ".png";
        save_rgb(tensor_to_rgb(t), (fs::path(out_dir) / name).string());
    }
    std::printf("wrote before.png + %d previews to %s\n", count, out_dir.c_str());
    return 0;
}

int cmd_describe(const ModelFlags& mf, std::uint64_t seed) {
    Network net = build(mf.resolve(seed));
    std::printf("%s", describe(net).c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ocular-region valence/arousal pipeline"};
    app.require_subcommand(1);
    app.fallthrough();  // lets --seed appear after the subcommand name too
    app.set_config("--config", "", "Plain-text config file (flags win over file values)");
    app.get_config_formatter_base()->valueSeparator('=');

    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "Master seed; all module seeds derive from it")
        ->capture_default_str();

    // preprocess
    auto* pre = app.add_subcommand("preprocess", "Extract eye slots from an annotated corpus");
    std::string annotations, image_root, pre_out;
    pre->add_option("--annotations", annotations, "Annotation CSV (path + 68 landmarks + labels)")
        ->required();
    pre->add_option("--image-root", image_root, "Directory image paths are relative to")
        ->required();
    pre->add_option("--out", pre_out, "Output directory for slots + manifest")->required();

    // split
    auto* spl = app.add_subcommand("split", "Carve a validation split from a slot manifest");
    std::string split_manifest, split_test_manifest, split_out;
    double fraction = 0.01;
    spl->add_option("--manifest", split_manifest, "Slot manifest of the training corpus")
        ->required();
    spl->add_option("--test-manifest", split_test_manifest,
                    "Slot manifest whose accepted ids form the test section");
    spl->add_option("--fraction", fraction, "Validation fraction")->capture_default_str();
    spl->add_option("--out", split_out, "Split manifest output path")->required();

    // train
    auto* trn = app.add_subcommand("train", "Train a model on preprocessed slots");
    ModelFlags train_model;
    AugmentFlags train_augment;
    TrainConfig train_cfg;
    bool no_augment = false;
    std::string train_manifest, train_split, history_path, plot_path;
    train_model.add_to(*trn);
    train_augment.add_to(*trn);
    trn->add_option("--manifest", train_manifest, "Slot manifest")->required();
    trn->add_option("--split", train_split, "Split manifest")->required();
    trn->add_option("--batch", train_cfg.batch_size, "Batch size")->capture_default_str();
    trn->add_option("--epochs", train_cfg.epochs, "Training epochs")->capture_default_str();
    trn->add_option("--alpha", train_cfg.adam.alpha, "Adam learning rate")->capture_default_str();
    trn->add_option("--beta1", train_cfg.adam.beta1, "Adam beta1")->capture_default_str();
    trn->add_option("--beta2", train_cfg.adam.beta2, "Adam beta2")->capture_default_str();
    trn->add_option("--epsilon", train_cfg.adam.epsilon, "Adam epsilon")->capture_default_str();
    trn->add_option("--checkpoint-dir", train_cfg.checkpoint_dir,
                    "Directory for last/best checkpoints");
    trn->add_flag("--no-augment", no_augment, "Disable training-time augmentation");
    trn->add_option("--history", history_path, "History CSV path");
    trn->add_option("--plot", plot_path, "Loss plot PNG path");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Report RMSE / CORR / CCC / SAGR");
    std::string ev_checkpoint, ev_predictions, ev_manifest, ev_split, ev_out;
    std::string ev_section = "test";
    ev->add_option("--checkpoint", ev_checkpoint, "Model checkpoint");
    ev->add_option("--predictions", ev_predictions,
                   "CSV of pred_valence,pred_arousal,true_valence,true_arousal (skips the model)");
    ev->add_option("--manifest", ev_manifest, "Slot manifest");
    ev->add_option("--split", ev_split, "Split manifest");
    ev->add_option("--section", ev_section, "Split section: train, validation, or test")
        ->capture_default_str();
    ev->add_option("--out", ev_out, "Write the report to this file as well");

    // attention
    auto* att = app.add_subcommand("attention", "Gradient saliency overlay for one slot");
    std::string att_checkpoint, att_image, att_out;
    std::string att_output = "valence", att_direction = "magnitude";
    att->add_option("--checkpoint", att_checkpoint, "Model checkpoint")->required();
    att->add_option("--image", att_image, "Eye-slot image")->required();
    att->add_option("--output", att_output, "Output unit: valence or arousal")
        ->capture_default_str();
    att->add_option("--direction", att_direction, "increase, decrease, or magnitude")
        ->capture_default_str();
    att->add_option("--out", att_out, "Overlay PNG path")->required();

    // augment-preview
    auto* prev = app.add_subcommand("augment-preview", "Write before/after augmentation PNGs");
    AugmentFlags preview_augment;
    std::string prev_image, prev_out;
    int prev_count = 8, prev_w = 512, prev_h = 170;
    preview_augment.add_to(*prev);
    prev->add_option("--image", prev_image, "Eye-slot image")->required();
    prev->add_option("--out", prev_out, "Output directory")->required();
    prev->add_option("--count", prev_count, "Number of augmented previews")->capture_default_str();
    prev->add_option("--target-w", prev_w, "Letterbox width")->capture_default_str();
    prev->add_option("--target-h", prev_h, "Letterbox height")->capture_default_str();

    // describe
    auto* desc = app.add_subcommand("describe", "Print the per-layer shape/parameter table");
    ModelFlags describe_model;
    describe_model.add_to(*desc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // usage problems are validation errors: exit 1 (help itself exits 0)
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (pre->parsed()) return cmd_preprocess(annotations, image_root, pre_out);
        if (spl->parsed())
            return cmd_split(split_manifest, split_test_manifest, fraction, seed, split_out);
        if (trn->parsed())
            return cmd_train(train_model, train_augment, train_manifest, train_split, train_cfg,
                             no_augment, history_path, plot_path, seed);
        if (ev->parsed())
            return cmd_evaluate(ev_checkpoint, ev_predictions, ev_manifest, ev_split, ev_section,
                                ev_out);
        if (att->parsed())
            return cmd_attention(att_checkpoint, att_image, att_output, att_direction, att_out);
        if (prev->parsed())
            return cmd_augment_preview(preview_augment, prev_image, prev_out, prev_count, prev_w,
                                       prev_h, seed);
        if (desc->parsed()) return cmd_describe(describe_model, seed);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
