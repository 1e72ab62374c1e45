#include "ocular/models.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ocular {

ModelId model_id_from_string(const std::string& s) {
    if (s == "M1" || s == "m1") return ModelId::M1;
    if (s == "M2" || s == "m2") return ModelId::M2;
    if (s == "M3" || s == "m3") return ModelId::M3;
    throw std::invalid_argument("unknown model id: " + s);
}

std::string to_string(ModelId id) {
    switch (id) {
        case ModelId::M1: return "M1";
        case ModelId::M2: return "M2";
        case ModelId::M3: return "M3";
    }
    return "?";
}

ModelConfig desk_scale(ModelId id, std::uint64_t seed) {
    ModelConfig c;
    c.id = id;
    c.input_h = 24;
    c.input_w = 64;
    c.channel_scale = 1.0 / 16.0;
    c.seed = seed;
    return c;
}

namespace {

int scaled(int channels, double scale) {
    return std::max(1, static_cast<int>(std::ceil(channels * scale)));
}

struct Builder {
    Network net;
    std::vector<int> shape;
    Rng rng;

    explicit Builder(const ModelConfig& cfg)
        : rng(mix64(cfg.seed, 0x696e6974ULL /* "init" */)) {
        net.config = cfg;
        shape = {1, cfg.input_h, cfg.input_w, 3};
    }

    void push(std::unique_ptr<Layer> layer) {
        shape = layer->output_shape(shape);
        net.layers.push_back(std::move(layer));
    }

    void conv_bn_relu(int out_c, int kernel, int stride) {
        auto conv = std::make_unique<Conv2D>(shape[3], out_c, kernel, stride);
        conv->init_he_uniform(rng);
        push(std::move(conv));
        push(std::make_unique<BatchNorm>(out_c));
        push(std::make_unique<ReLU>());
    }

    void dw_bn_relu(int stride) {
        auto dw = std::make_unique<DepthwiseConv2D>(shape[3], 3, stride);
        dw->init_he_uniform(rng);
        push(std::move(dw));
        push(std::make_unique<BatchNorm>(shape[3]));
        push(std::make_unique<ReLU>());
    }

    void dense_relu(int units) {
        auto fc = std::make_unique<Dense>(shape[1], units);
        fc->init_he_uniform(rng);
        push(std::move(fc));
        push(std::make_unique<ReLU>());
    }

    void output_head() {
        auto head = std::make_unique<Dense>(shape[1], 2);
        head->init_glorot_uniform(rng);
        push(std::move(head));
    }
};

// VGG-style skeleton: six blocks of two conv3 layers each, max pool after
// every block, then the FC stack.
Network build_vgg(const ModelConfig& cfg, const std::vector<int>& block_channels,
                  const std::vector<int>& fc_units) {
    Builder b(cfg);
    for (int c : block_channels) {
        int sc = scaled(c, cfg.channel_scale);
        b.conv_bn_relu(sc, 3, 1);
        b.conv_bn_relu(sc, 3, 1);
        b.push(std::make_unique<MaxPool2>());
    }
    b.push(std::make_unique<Flatten>());
    for (int u : fc_units) b.dense_relu(scaled(u, cfg.channel_scale));
    b.output_head();
    return std::move(b.net);
}

// MobileNet ladder: full conv3-32-s2, then (depthwise, pointwise) pairs,
// global average pooling, head. The width multiplier scales the pointwise
// widths.
Network build_mobilenet(const ModelConfig& cfg) {
    // (depthwise stride, pointwise width) pairs, with the canonical five
    // repeated 512 blocks.
    static const std::vector<std::pair<int, int>> ladder = {
        {1, 64},  {2, 128}, {1, 128}, {2, 256}, {1, 256},  {2, 512},
        {1, 512}, {1, 512}, {1, 512}, {1, 512}, {1, 512},  {2, 1024}, {1, 1024},
    };
    Builder b(cfg);
    b.conv_bn_relu(scaled(32, cfg.channel_scale), 3, 2);
    for (auto [stride, width] : ladder) {
        b.dw_bn_relu(stride);
        b.conv_bn_relu(scaled(width, cfg.channel_scale * cfg.width_multiplier), 1, 1);
    }
    b.push(std::make_unique<GlobalAvgPool>());
    b.output_head();
    return std::move(b.net);
}

}  // namespace

Network build(const ModelConfig& cfg) {
    if (cfg.channel_scale <= 0.0 || cfg.channel_scale > 1.0)
        throw std::invalid_argument("channel_scale must be in (0, 1]");
    if (cfg.width_multiplier <= 0.0 || cfg.width_multiplier > 1.0)
        throw std::invalid_argument("width_multiplier must be in (0, 1]");
    switch (cfg.id) {
        case ModelId::M1:
            return build_vgg(cfg, {16, 32, 64, 128, 256, 512}, {6144, 6144});
        case ModelId::M2:
            return build_vgg(cfg, {64, 128, 256, 512, 512, 512}, {6144, 6144, 2000});
        case ModelId::M3:
            return build_mobilenet(cfg);
    }
    throw std::invalid_argument("unknown model id");
}

Tensor Network::forward(const Tensor& x, Mode mode) {
    Tensor cur = x;
    for (auto& layer : layers) cur = layer->forward(cur, mode);
    require_finite(cur, "network forward");
    return cur;
}

Tensor Network::backward(const Tensor& grad_out) {
    Tensor cur = grad_out;
    for (auto it = layers.rbegin(); it != layers.rend(); ++it) cur = (*it)->backward(cur);
    return cur;
}

std::vector<Tensor*> Network::params() {
    std::vector<Tensor*> out;
    for (auto& layer : layers)
        for (Tensor* p : layer->params()) out.push_back(p);
    return out;
}

std::vector<Tensor*> Network::grads() {
    std::vector<Tensor*> out;
    for (auto& layer : layers)
        for (Tensor* g : layer->grads()) out.push_back(g);
    return out;
}

void Network::zero_grads() {
    for (auto& layer : layers) layer->zero_grads();
}

std::vector<LayerInfo> Network::shape_table() const {
    std::vector<LayerInfo> table;
    std::vector<int> shape = {1, config.input_h, config.input_w, 3};
    for (std::size_t i = 0; i < layers.size(); ++i) {
        Layer* layer = layers[i].get();
        shape = layer->output_shape(shape);
        LayerInfo info;
        info.name = layer->name();
        info.output_shape = shape;
        for (Tensor* p : layer->params()) info.param_count += p->size();
        bool is_weighted = dynamic_cast<Conv2D*>(layer) || dynamic_cast<DepthwiseConv2D*>(layer) ||
                           dynamic_cast<Dense*>(layer);
        info.weighted = is_weighted && i + 1 != layers.size();
        table.push_back(std::move(info));
    }
    return table;
}

int Network::weighted_layer_count() const {
    int n = 0;
    for (const LayerInfo& info : shape_table())
        if (info.weighted) ++n;
    return n;
}

std::uint64_t Network::region_signature() const {
    std::uint64_t h = 0x6e6574ULL;
    for (const auto& layer : layers) h = mix64(h, layer->region_signature());
    return h;
}

std::int64_t count_params(Network& network) {
    std::int64_t n = 0;
    for (Tensor* p : network.params()) n += p->size();
    return n;
}

std::string describe(Network& network) {
    std::ostringstream os;
    os << to_string(network.config.id) << "  input " << network.config.input_h << "x"
       << network.config.input_w << "x3"
       << "  channel_scale " << network.config.channel_scale;
    if (network.config.id == ModelId::M3) os << "  width_multiplier " << network.config.width_multiplier;
    os << "\n";
    for (const LayerInfo& info : network.shape_table()) {
        os << "  " << info.name;
        for (std::size_t i = info.name.size(); i < 20; ++i) os << ' ';
        os << shape_str(info.output_shape);
        if (info.param_count) os << "  params " << info.param_count;
        os << "\n";
    }
    os << "  weighted layers (excl. head): " << network.weighted_layer_count() << "\n";
    os << "  total learnable parameters:   " << count_params(network) << "\n";
    return os.str();
}

// -------------------------------------------------------------- checkpoint

namespace {

constexpr char kMagic[8] = {'O', 'C', 'A', 'F', 'N', 'E', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

// Parameters plus batch-norm running statistics, in layer order.
std::vector<Tensor*> state_tensors(Network& net) {
    std::vector<Tensor*> out;
    for (auto& layer : net.layers) {
        for (Tensor* p : layer->params()) out.push_back(p);
        if (auto* bn = dynamic_cast<BatchNorm*>(layer.get())) {
            out.push_back(&bn->running_mean);
            out.push_back(&bn->running_var);
        }
    }
    return out;
}

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

void write_tensor(std::ostream& os, const Tensor& t) {
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(t.shape.size()));
    for (int d : t.shape) write_pod<std::int32_t>(os, d);
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(double)));
}

void read_tensor_into(std::istream& is, Tensor& t) {
    auto ndim = read_pod<std::uint32_t>(is);
    std::vector<int> shape(ndim);
    for (auto& d : shape) d = read_pod<std::int32_t>(is);
    if (shape != t.shape)
        throw std::runtime_error("checkpoint: tensor shape mismatch, file " + shape_str(shape) +
                                 " vs model " + shape_str(t.shape));
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    if (!is) throw std::runtime_error("checkpoint: truncated tensor data");
}

}  // namespace

void save_checkpoint(Network& net, const std::string& path, const Adam* optimizer) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
    os.write(kMagic, sizeof(kMagic));
    write_pod(os, kVersion);
    write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(net.config.id));
    write_pod<std::int32_t>(os, net.config.input_h);
    write_pod<std::int32_t>(os, net.config.input_w);
    write_pod<double>(os, net.config.channel_scale);
    write_pod<double>(os, net.config.width_multiplier);
    write_pod<std::uint64_t>(os, net.config.seed);

    auto state = state_tensors(net);
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(state.size()));
    for (Tensor* t : state) write_tensor(os, *t);

    write_pod<std::uint8_t>(os, optimizer ? 1 : 0);
    if (optimizer) {
        auto* opt = const_cast<Adam*>(optimizer);
        write_pod<std::int64_t>(os, opt->step_count());
        write_pod<double>(os, opt->config().alpha);
        write_pod<double>(os, opt->config().beta1);
        write_pod<double>(os, opt->config().beta2);
        write_pod<double>(os, opt->config().epsilon);
        write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(opt->first_moments().size()));
        for (Tensor& t : opt->first_moments()) write_tensor(os, t);
        for (Tensor& t : opt->second_moments()) write_tensor(os, t);
    }
    if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open: " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    auto version = read_pod<std::uint32_t>(is);
    if (version != kVersion)
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));

    ModelConfig cfg;
    cfg.id = static_cast<ModelId>(read_pod<std::uint8_t>(is));
    cfg.input_h = read_pod<std::int32_t>(is);
    cfg.input_w = read_pod<std::int32_t>(is);
    cfg.channel_scale = read_pod<double>(is);
    cfg.width_multiplier = read_pod<double>(is);
    cfg.seed = read_pod<std::uint64_t>(is);

    Checkpoint ckpt{build(cfg), std::nullopt};
    auto state = state_tensors(ckpt.network);
    auto n = read_pod<std::uint32_t>(is);
    if (n != state.size())
        throw std::runtime_error("checkpoint: state tensor count mismatch");
    for (Tensor* t : state) read_tensor_into(is, *t);

    if (read_pod<std::uint8_t>(is)) {
        auto t = read_pod<std::int64_t>(is);
        AdamConfig acfg;
        acfg.alpha = read_pod<double>(is);
        acfg.beta1 = read_pod<double>(is);
        acfg.beta2 = read_pod<double>(is);
        acfg.epsilon = read_pod<double>(is);
        auto params = ckpt.network.params();
        auto nm = read_pod<std::uint32_t>(is);
        if (nm != params.size()) throw std::runtime_error("checkpoint: adam moment count mismatch");
        Adam opt(acfg, params);
        for (Tensor& m : opt.first_moments()) read_tensor_into(is, m);
        for (Tensor& v : opt.second_moments()) read_tensor_into(is, v);
        opt.set_step_count(t);
        ckpt.optimizer = std::move(opt);
    }
    return ckpt;
}

}  // namespace ocular
