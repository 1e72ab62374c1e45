#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ocular/layers.hpp"
#include "ocular/optim.hpp"

namespace ocular {

enum class ModelId { M1, M2, M3 };

ModelId model_id_from_string(const std::string& s);
std::string to_string(ModelId id);

struct ModelConfig {
    ModelId id = ModelId::M1;
    int input_h = 170;
    int input_w = 512;
    // Uniform shrink applied to every channel count / FC width for
    // desk-scale runs (ceil, min 1). 1.0 reproduces the paper scale.
    double channel_scale = 1.0;
    // MobileNet width multiplier; applies to M3 pointwise widths.
    double width_multiplier = 1.0;
    std::uint64_t seed = 0;
};

// Desk-scale preset: small enough for CPU property tests in seconds while
// exercising every layer type.
ModelConfig desk_scale(ModelId id, std::uint64_t seed = 0);

struct LayerInfo {
    std::string name;
    std::vector<int> output_shape;
    std::int64_t param_count = 0;
    bool weighted = false;  // conv or fully connected (head excluded)
};

class Network {
  public:
    ModelConfig config;
    std::vector<std::unique_ptr<Layer>> layers;

    Tensor forward(const Tensor& x, Mode mode);
    // Backpropagates through the cached forward pass; returns the gradient
    // with respect to the network input.
    Tensor backward(const Tensor& grad_out);

    std::vector<Tensor*> params();
    std::vector<Tensor*> grads();
    void zero_grads();

    std::vector<LayerInfo> shape_table() const;
    int weighted_layer_count() const;  // convs + FCs, excluding the output head

    // Combined piecewise-linear region hash of the last forward pass; see
    // Layer::region_signature.
    std::uint64_t region_signature() const;
};

Network build(const ModelConfig& config);

std::int64_t count_params(Network& network);

// Human-readable per-layer shape/parameter table.
std::string describe(Network& network);

// Versioned binary checkpoint: model config, parameter blobs
// (little-endian doubles), batch-norm running stats, optional Adam state.
void save_checkpoint(Network& network, const std::string& path, const Adam* optimizer = nullptr);

struct Checkpoint {
    Network network;
    std::optional<Adam> optimizer;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace ocular
