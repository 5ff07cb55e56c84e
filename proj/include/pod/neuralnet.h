#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pod/podgen.h"

namespace pod {

// Repair-policy architecture: three 3x3 same-padding convolutions (rectified),
// 2x2 max pool (stride 2, floor) after the second, then a fully connected
// layer and softmax over tile actions.
struct NetworkSpec {
    int crop = 5;
    int in_channels = 9;   // |alphabet| + border channel
    int action_count = 8;  // |alphabet|
    std::array<int, 3> conv_channels{128, 128, 256};

    int pooled_size() const { return crop / 2; }
    int fc_inputs() const { return pooled_size() * pooled_size() * conv_channels[2]; }
    // Throws when any derived shape is degenerate (e.g. pooling collapses to 0).
    void validate() const;

    bool operator==(const NetworkSpec&) const = default;
};

// Parameter block; also used for gradients and RMSprop accumulators since
// they share shapes. Conv weights are [ky][kx][ci][co], fc is [in][out].
template <typename T>
struct NetParams {
    std::vector<T> conv1_w, conv1_b;
    std::vector<T> conv2_w, conv2_b;
    std::vector<T> conv3_w, conv3_b;
    std::vector<T> fc_w, fc_b;

    void resize(const NetworkSpec& spec, T fill = T(0));
    void fill(T value);
    size_t total_count() const;
    std::array<std::vector<T>*, 8> arrays();
    std::array<const std::vector<T>*, 8> arrays() const;
};

// Checkpoint inventory order; parallel to NetParams::arrays().
extern const std::array<const char*, 8> kParamNames;

template <typename T>
struct NetworkT {
    NetworkSpec spec;
    NetParams<T> params;
    NetParams<T> rms;  // per-parameter RMSprop accumulators
    uint64_t init_seed = 0;
};

using Network = NetworkT<float>;

// Activation and gradient buffers reused across calls.
template <typename T>
struct NetScratch {
    std::vector<T> x1, x2, pooled, x3, logits, probs;
    std::vector<int> pool_arg;
    std::vector<T> d3, dpooled, d2, d1;
};

// Packed one-hot observations, [n][y][x][channel].
template <typename T>
struct BatchT {
    int count = 0;
    int obs_floats = 0;
    std::vector<T> obs;
    std::vector<int> targets;
};
using Batch = BatchT<float>;

// Appends one cropped observation (and target) to the batch.
template <typename T>
void batch_append(BatchT<T>& batch, const LevelGrid& level, int row, int col, int target,
                  const ObservationSpec& obs);

struct TrainConfig {
    int batch_size = 64;
    float learning_rate = 0.001f;
    int epochs = 500;
    float rho = 0.9f;        // RMSprop decay
    float epsilon = 1e-8f;   // RMSprop stabilizer
    uint64_t shuffle_seed = 0;

    void validate() const;
};

// Fan-in-scaled uniform init (+-sqrt(6/fan_in)), zero biases, zero
// accumulators; bit-identical for a fixed seed.
template <typename T>
NetworkT<T> init_network_t(const NetworkSpec& spec, uint64_t seed);
Network init_network(const NetworkSpec& spec, uint64_t seed);

// Softmax probabilities for one observation; writes spec.action_count values
// to probs_out. Log-sum-exp stabilized.
template <typename T>
void forward_one(const NetworkT<T>& net, const T* obs_data, NetScratch<T>& scratch,
                 T* probs_out);
std::vector<float> forward(const Network& net, const Observation& obs);

// Mean cross-entropy over the batch without gradients.
template <typename T>
T batch_loss(const NetworkT<T>& net, const BatchT<T>& batch, NetScratch<T>& scratch);

// Mean cross-entropy plus gradients for every parameter (logit gradient per
// example is (softmax - onehot(target)) / batch count).
template <typename T>
T loss_and_gradients(const NetworkT<T>& net, const BatchT<T>& batch, NetParams<T>& grads,
                     NetScratch<T>& scratch);

// v <- rho*v + (1-rho)*g^2 ; w <- w - lr*g/(sqrt(v)+eps)
template <typename T>
void rmsprop_step(NetworkT<T>& net, const NetParams<T>& grads, const TrainConfig& config);

// Shuffles per epoch from one seeded stream, iterates minibatches (final
// short batch kept), returns mean per-epoch training loss. Observations are
// cropped per batch from the stored snapshots.
using EpochCallback = std::function<void(int epoch, double loss)>;
std::vector<double> train(Network& net, const std::vector<TrainingExample>& examples,
                          const ObservationSpec& obs, const TrainConfig& config,
                          const EpochCallback& on_epoch = nullptr);

// Checkpoint directory: manifest.json (spec, game, seed, parameter
// inventory with byte offsets) + weights.bin (32-bit little-endian floats in
// inventory order).
void save_checkpoint(const Network& net, const std::string& game_id, const std::string& dir);
struct LoadedCheckpoint {
    Network net;
    std::string game_id;
};
LoadedCheckpoint load_checkpoint(const std::string& dir);

}  // namespace pod
