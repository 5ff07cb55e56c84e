#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "pod/errors.h"
#include "pod/games.h"
#include "pod/neuralnet.h"
#include "pod/podgen.h"
#include "pod/rng.h"

#include "test_util.h"

using namespace pod;

TEST_SUITE_BEGIN("neuralnet");

namespace {

NetworkSpec toy_spec() {
    NetworkSpec spec;
    spec.crop = 3;
    spec.in_channels = 4;
    spec.action_count = 3;
    spec.conv_channels = {2, 2, 4};
    return spec;
}

// random 3x3 grid over 3 tiles (channel 3 is the border sentinel)
LevelGrid toy_level(Rng& rng) {
    LevelGrid level(3, 3);
    for (auto& c : level.cells) c = static_cast<uint8_t>(rng.uniform_index(3));
    return level;
}

}  // namespace

TEST_CASE("spec shape arithmetic and validation") {
    NetworkSpec spec;  // defaults: crop 5, conv 128/128/256
    CHECK(spec.pooled_size() == 2);
    CHECK(spec.fc_inputs() == 2 * 2 * 256);
    spec.crop = 3;
    CHECK(spec.pooled_size() == 1);

    spec.crop = 1;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.crop = 5;
    spec.action_count = 1;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.action_count = 8;
    spec.conv_channels = {0, 1, 1};
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("initialization is fan-in bounded, zero-biased, and seeded") {
    NetworkSpec spec = toy_spec();
    const Network a = init_network(spec, 42);
    const Network b = init_network(spec, 42);
    const Network c = init_network(spec, 43);
    CHECK(a.params.conv1_w == b.params.conv1_w);
    CHECK(a.params.fc_w == b.params.fc_w);
    CHECK(a.params.conv1_w != c.params.conv1_w);

    const double bound1 = std::sqrt(6.0 / (9 * spec.in_channels));
    for (float w : a.params.conv1_w) {
        CHECK(std::abs(w) <= bound1);
    }
    for (float bias : a.params.conv1_b) CHECK(bias == 0.0f);
    for (float bias : a.params.fc_b) CHECK(bias == 0.0f);
    for (float v : a.rms.conv1_w) CHECK(v == 0.0f);
}

TEST_CASE("zero-weight network predicts uniformly and at ln(n) loss") {
    const GameSpec& zelda = game_by_id("zelda");
    NetworkSpec spec;
    spec.conv_channels = {4, 4, 8};
    Network net = init_network(spec, 1);
    net.params.fill(0.0f);

    Rng rng(3);
    const LevelGrid level = sample_start_level(zelda, rng);
    const ObservationSpec obs = ObservationSpec::for_game(zelda, 5);
    const auto probs = forward(net, crop_observation(level, 3, 5, obs));
    REQUIRE(probs.size() == 8);
    for (float p : probs) CHECK(p == doctest::Approx(0.125).epsilon(1e-6));

    Batch batch;
    batch_append(batch, level, 3, 5, 0, obs);
    batch_append(batch, level, 0, 0, 7, obs);
    NetScratch<float> scratch;
    CHECK(batch_loss(net, batch, scratch) == doctest::Approx(std::log(8.0)).epsilon(1e-6));
}

TEST_CASE("center-tap identity weights pass one-hot inputs through conv1") {
    NetworkSpec spec = toy_spec();
    Network net = init_network(spec, 7);
    net.params.fill(0.0f);
    // w[ky=1][kx=1][ci][co] = (ci == co): conv1 copies the first 2 channels
    const int ci_n = spec.in_channels, co_n = spec.conv_channels[0];
    for (int co = 0; co < co_n; ++co) {
        net.params.conv1_w[static_cast<size_t>((4 * ci_n + co) * co_n + co)] = 1.0f;
    }

    Rng rng(5);
    const LevelGrid level = toy_level(rng);
    Batch batch;
    batch_append(batch, level, 1, 1, 0, ObservationSpec(3, 4));
    NetScratch<float> scratch;
    std::vector<float> probs(3);
    forward_one(net, batch.obs.data(), scratch, probs.data());

    for (int y = 0; y < 3; ++y) {
        for (int x = 0; x < 3; ++x) {
            for (int co = 0; co < co_n; ++co) {
                const float in = batch.obs[static_cast<size_t>((y * 3 + x) * ci_n + co)];
                const float out = scratch.x1[static_cast<size_t>((y * 3 + x) * co_n + co)];
                CHECK(out == in);
            }
        }
    }
}

TEST_CASE("max pooling matches a brute-force window scan") {
    NetworkSpec spec;
    spec.crop = 5;
    spec.in_channels = 9;
    spec.action_count = 8;
    spec.conv_channels = {4, 4, 8};
    const Network net = init_network(spec, 11);

    const GameSpec& zelda = game_by_id("zelda");
    Rng rng(12);
    const LevelGrid level = sample_start_level(zelda, rng);
    Batch batch;
    batch_append(batch, level, 2, 2, 0, ObservationSpec::for_game(zelda, 5));
    NetScratch<float> scratch;
    std::vector<float> probs(8);
    forward_one(net, batch.obs.data(), scratch, probs.data());

    const int c2 = spec.conv_channels[1];
    for (int py = 0; py < 2; ++py) {
        for (int px = 0; px < 2; ++px) {
            for (int c = 0; c < c2; ++c) {
                float best = -1e30f;
                for (int dy = 0; dy < 2; ++dy) {
                    for (int dx = 0; dx < 2; ++dx) {
                        best = std::max(
                            best, scratch.x2[static_cast<size_t>(
                                      ((2 * py + dy) * 5 + 2 * px + dx) * c2 + c)]);
                    }
                }
                CHECK(scratch.pooled[static_cast<size_t>((py * 2 + px) * c2 + c)] == best);
            }
        }
    }
    // probabilities are a distribution
    float sum = 0.0f;
    for (float p : probs) {
        CHECK(p >= 0.0f);
        sum += p;
    }
    CHECK(sum == doctest::Approx(1.0f));
}

TEST_CASE("analytic gradients match central differences in double") {
    NetworkSpec spec = toy_spec();
    NetworkT<double> net = init_network_t<double>(spec, 99);

    Rng rng(100);
    BatchT<double> batch;
    const ObservationSpec obs(3, 4);
    for (int i = 0; i < 5; ++i) {
        batch_append(batch, toy_level(rng), 1, 1, static_cast<int>(rng.uniform_index(3)), obs);
    }

    NetParams<double> grads;
    NetScratch<double> scratch;
    loss_and_gradients(net, batch, grads, scratch);

    const double h = 1e-5;
    auto params = net.params.arrays();
    auto grad_arrays = grads.arrays();
    int checked = 0;
    for (size_t a = 0; a < params.size(); ++a) {
        for (size_t i = 0; i < params[a]->size(); ++i) {
            double& w = (*params[a])[i];
            const double saved = w;
            w = saved + h;
            const double up = batch_loss(net, batch, scratch);
            w = saved - h;
            const double down = batch_loss(net, batch, scratch);
            w = saved;
            const double fd = (up - down) / (2 * h);
            const double an = (*grad_arrays[a])[i];
            const double denom = std::max(std::abs(fd), std::abs(an));
            if (denom > 1e-10) {
                CHECK(std::abs(fd - an) / denom < 1e-6);
            }
            checked++;
        }
    }
    CHECK(checked > 200);
}

TEST_CASE("one RMSprop step matches the closed form") {
    NetworkSpec spec = toy_spec();
    Network net = init_network(spec, 3);
    const float w0 = net.params.conv1_w[0];
    const float w1 = net.params.conv1_w[1];

    NetParams<float> grads;
    grads.resize(spec);
    grads.conv1_w[0] = 1.0f;

    TrainConfig config;  // lr 0.001, rho 0.9, eps 1e-8
    rmsprop_step(net, grads, config);
    // v = 0.1 * 1^2; step = lr / (sqrt(0.1) + eps) = 0.0031623
    CHECK(net.rms.conv1_w[0] == doctest::Approx(0.1f));
    CHECK(w0 - net.params.conv1_w[0] == doctest::Approx(0.0031623f).epsilon(1e-4));
    CHECK(net.params.conv1_w[1] == w1);  // untouched parameter stays put
}

TEST_CASE("training is bit-deterministic and learns a tiny memorization task") {
    const GameSpec& zelda = game_by_id("zelda");
    Rng rng(6);
    const LevelGrid level = sample_start_level(zelda, rng);
    std::vector<TrainingExample> examples;
    for (int i = 0; i < 64; ++i) {
        examples.push_back({level, 3, 5, 4});
    }

    NetworkSpec spec;
    spec.conv_channels = {8, 8, 16};
    const ObservationSpec obs = ObservationSpec::for_game(zelda, 5);
    TrainConfig config;
    config.epochs = 25;
    config.shuffle_seed = 17;

    Network a = init_network(spec, 55);
    const auto losses_a = train(a, examples, obs, config);
    Network b = init_network(spec, 55);
    const auto losses_b = train(b, examples, obs, config);

    REQUIRE(losses_a.size() == 25);
    CHECK(losses_a == losses_b);
    CHECK(a.params.conv1_w == b.params.conv1_w);
    CHECK(a.params.fc_w == b.params.fc_w);
    CHECK(losses_a.back() < 0.2);
    CHECK(losses_a.back() < losses_a.front());

    // the memorized action dominates
    const auto probs = forward(a, crop_observation(level, 3, 5, obs));
    CHECK(probs[4] > 0.8f);
}

TEST_CASE("checkpoints round-trip exactly and reject corruption") {
    const GameSpec& zelda = game_by_id("zelda");
    NetworkSpec spec;
    spec.conv_channels = {4, 4, 8};
    const Network net = init_network(spec, 1234);

    const std::string dir = fresh_tmp_dir("ckpt") + "/net";
    save_checkpoint(net, "zelda", dir);
    const LoadedCheckpoint back = load_checkpoint(dir);
    CHECK(back.game_id == "zelda");
    CHECK(back.net.init_seed == 1234);
    CHECK(back.net.spec == spec);
    CHECK(back.net.params.conv1_w == net.params.conv1_w);
    CHECK(back.net.params.conv2_w == net.params.conv2_w);
    CHECK(back.net.params.conv3_w == net.params.conv3_w);
    CHECK(back.net.params.fc_w == net.params.fc_w);
    CHECK(back.net.params.fc_b == net.params.fc_b);

    // saving twice produces identical bytes
    save_checkpoint(net, "zelda", dir + "2");
    CHECK(slurp(dir + "/weights.bin") == slurp(dir + "2/weights.bin"));
    CHECK(slurp(dir + "/manifest.json") == slurp(dir + "2/manifest.json"));

    // truncated weights: error names expected vs actual bytes
    {
        std::string bytes = slurp(dir + "/weights.bin");
        std::ofstream out(dir + "/weights.bin", std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 4));
    }
    CHECK_THROWS_WITH_AS(load_checkpoint(dir), doctest::Contains("bytes"),
                         std::invalid_argument);

    CHECK_THROWS_AS(load_checkpoint(dir + "_missing"), IoError);
}

TEST_CASE("batch_append matches crop_observation including at edges") {
    const GameSpec& zelda = game_by_id("zelda");
    const ObservationSpec spec = ObservationSpec::for_game(zelda, 5);
    Rng rng(77);
    const LevelGrid level = sample_start_level(zelda, rng);
    for (auto [r, c] : {std::pair{0, 0}, {6, 10}, {3, 5}, {0, 10}}) {
        Batch batch;
        batch_append(batch, level, r, c, 1, spec);
        const Observation obs = crop_observation(level, r, c, spec);
        REQUIRE(batch.obs.size() == obs.data.size());
        for (size_t i = 0; i < obs.data.size(); ++i) {
            CHECK(batch.obs[i] == obs.data[i]);
        }
    }
}

TEST_SUITE_END();
