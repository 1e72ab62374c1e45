#pragma once

#include <opencv2/core.hpp>
#include <string>
#include <vector>

#include "ocular/augment.hpp"
#include "ocular/models.hpp"
#include "ocular/optim.hpp"

namespace ocular {

struct TrainSample {
    cv::Mat image;  // eye slot, RGB
    double valence = 0.0;
    double arousal = 0.0;
};

struct TrainConfig {
    int batch_size = 16;
    int epochs = 50;
    AdamConfig adam;
    AugmentConfig augment;
    bool augment_enabled = true;
    bool shuffle = true;
    std::uint64_t seed = 0;
    std::string checkpoint_dir;  // empty: no checkpoints
};

struct LossRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double seconds = 0.0;
};

struct TrainHistory {
    std::vector<LossRecord> records;
};

// The epoch loop: per epoch, seeded shuffle, per-sample augmentation seeds
// derived from (base seed, epoch, sample index), forward / MSE dual loss /
// backward / Adam step per batch, then a full validation pass without
// augmentation (batch norm in inference mode). A trailing partial batch is
// dropped. Writes last + best-validation checkpoints per epoch when a
// checkpoint directory is set.
TrainHistory train(Network& network, const std::vector<TrainSample>& train_set,
                   const std::vector<TrainSample>& val_set, const TrainConfig& config);

// Inference-mode forward over (N, h, w, 3) inputs; returns (N, 2).
Tensor predict(Network& network, const Tensor& inputs);

// Letterboxes + normalizes samples to the network input size and predicts.
Tensor predict_samples(Network& network, const std::vector<TrainSample>& samples);

Tensor targets_of(const std::vector<TrainSample>& samples);

void export_history_csv(const TrainHistory& history, const std::string& path);
TrainHistory load_history_csv(const std::string& path);

// Two-panel line plot (train on top, validation below), one curve per
// labeled history.
void export_loss_plot(const std::vector<std::pair<std::string, TrainHistory>>& histories,
                      const std::string& path);

}  // namespace ocular
