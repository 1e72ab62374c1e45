#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "ocular/models.hpp"
#include "test_util.hpp"

using namespace ocular;
using namespace ocular::testutil;

namespace {

ModelConfig paper_scale(ModelId id) {
    ModelConfig cfg;
    cfg.id = id;
    return cfg;
}

std::string tmpfile(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("M1 has 14 weighted layers, M2 has 15") {
    Network m1 = build(paper_scale(ModelId::M1));
    Network m2 = build(paper_scale(ModelId::M2));
    CHECK(m1.weighted_layer_count() == 14);
    CHECK(m2.weighted_layer_count() == 15);
}

TEST_CASE("M1/M2 shape table shows the 170x512 -> 2x8 pooling ladder") {
    Network m1 = build(paper_scale(ModelId::M1));
    std::vector<std::pair<int, int>> pools;
    for (const LayerInfo& info : m1.shape_table())
        if (info.name == "maxpool2") pools.push_back({info.output_shape[1], info.output_shape[2]});
    REQUIRE(pools.size() == 6);
    std::vector<std::pair<int, int>> want = {{85, 256}, {42, 128}, {21, 64}, {10, 32}, {5, 16}, {2, 8}};
    CHECK(pools == want);
}

TEST_CASE("M3 pointwise channel sequence at omega = 1") {
    Network m3 = build(paper_scale(ModelId::M3));
    std::vector<int> channels;
    for (const LayerInfo& info : m3.shape_table())
        if (info.name.rfind("conv", 0) == 0 && info.weighted) channels.push_back(info.output_shape[3]);
    std::vector<int> want = {32, 64, 128, 128, 256, 256, 512, 512, 512, 512, 512, 512, 1024, 1024};
    CHECK(channels == want);
}

TEST_CASE("parameter counting") {
    // Dense(2) on 4 inputs: 4*2 + 2
    Dense fc(4, 2);
    std::int64_t n = 0;
    for (Tensor* p : fc.params()) n += p->size();
    CHECK(n == 10);

    // conv3-16 on 3 channels: 3*3*3*16 + 16
    Conv2D conv(3, 16, 3, 1);
    n = 0;
    for (Tensor* p : conv.params()) n += p->size();
    CHECK(n == 448);
}

TEST_CASE("paper-scale parameter counts order M3 < M1 < M2") {
    Network m1 = build(paper_scale(ModelId::M1));
    Network m2 = build(paper_scale(ModelId::M2));
    Network m3 = build(paper_scale(ModelId::M3));
    std::int64_t c1 = count_params(m1), c2 = count_params(m2), c3 = count_params(m3);
    CHECK(c3 < c1);
    CHECK(c1 < c2);
}

TEST_CASE("width multiplier monotonically shrinks M3") {
    ModelConfig half = paper_scale(ModelId::M3);
    half.width_multiplier = 0.5;
    Network m3_half = build(half);
    Network m3_full = build(paper_scale(ModelId::M3));
    CHECK(count_params(m3_half) < count_params(m3_full));
}

TEST_CASE("desk-scale networks build, run and emit (batch, 2)") {
    Rng rng(20);
    for (ModelId id : {ModelId::M1, ModelId::M2, ModelId::M3}) {
        Network net = build(desk_scale(id, 1));
        Tensor x = random_tensor({2, 24, 64, 3}, rng, 0.0, 1.0);
        Tensor y = net.forward(x, Mode::Train);
        CHECK(y.shape == std::vector<int>{2, 2});
    }
}

TEST_CASE("building twice with the same seed yields identical parameters") {
    Network a = build(desk_scale(ModelId::M3, 7));
    Network b = build(desk_scale(ModelId::M3, 7));
    auto pa = a.params(), pb = b.params();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->data == pb[i]->data);
}

TEST_CASE("unknown model id is rejected") {
    CHECK_THROWS_AS(model_id_from_string("M9"), std::invalid_argument);
}

TEST_CASE("checkpoint round-trip is bit-exact") {
    Network net = build(desk_scale(ModelId::M1, 3));
    std::string path = tmpfile("ocular_ckpt_roundtrip.ckpt");
    save_checkpoint(net, path);
    Checkpoint loaded = load_checkpoint(path);
    auto pa = net.params(), pb = loaded.network.params();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->data == pb[i]->data);
    std::remove(path.c_str());
}

TEST_CASE("checkpoint with wrong magic bytes is rejected with a versioned error") {
    std::string path = tmpfile("ocular_ckpt_badmagic.ckpt");
    {
        std::ofstream os(path, std::ios::binary);
        os << "NOTACKPTxxxxxxxxxxxxxxxxxxxx";
    }
    CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("magic"), std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("checkpoint mid-training resumes with an identical next step") {
    Rng rng(21);
    Network net = build(desk_scale(ModelId::M3, 5));
    auto params = net.params();
    Adam adam({}, params);

    Tensor x = random_tensor({2, 24, 64, 3}, rng, 0.0, 1.0);
    Tensor t({2, 2});
    fill_random(t, rng);

    auto one_step = [&](Network& n, Adam& a) {
        Tensor pred = n.forward(x, Mode::Train);
        DualLoss loss = mse_dual_loss(pred, t);
        n.zero_grads();
        n.backward(loss.grad);
        a.step(n.params(), n.grads());
    };
    one_step(net, adam);
    one_step(net, adam);

    std::string path = tmpfile("ocular_ckpt_resume.ckpt");
    save_checkpoint(net, path, &adam);

    // uninterrupted continuation
    one_step(net, adam);

    // resumed continuation
    Checkpoint resumed = load_checkpoint(path);
    REQUIRE(resumed.optimizer.has_value());
    one_step(resumed.network, *resumed.optimizer);

    auto pa = net.params(), pb = resumed.network.params();
    for (std::size_t i = 0; i < pa.size(); ++i)
        for (std::int64_t j = 0; j < pa[i]->size(); ++j)
            CHECK(pa[i]->data[j] == doctest::Approx(pb[i]->data[j]).epsilon(1e-15));
    std::remove(path.c_str());
}

TEST_CASE("channel_scale 1/16 M1 still builds and gradient-checks") {
    Rng rng(22);
    Network net = build(desk_scale(ModelId::M1, 9));
    Tensor x = random_tensor({2, 24, 64, 3}, rng, 0.0, 1.0);
    Tensor t({2, 2});
    fill_random(t, rng);

    NetworkGradCheck r = network_gradient_check(net, x, t, rng);
    CHECK(r.checked > 50);  // most stencils sit inside one linear region
    CHECK(r.worst_rel_err < 1e-4);
}
