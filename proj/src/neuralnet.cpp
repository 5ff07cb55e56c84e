#include "pod/neuralnet.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "pod/digest.h"
#include "pod/errors.h"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace pod {

void NetworkSpec::validate() const {
    if (crop < 2) throw std::invalid_argument("network input must be at least 2x2 for pooling");
    if (in_channels < 3) throw std::invalid_argument("network needs at least 3 input channels");
    if (action_count < 2) throw std::invalid_argument("network needs at least 2 actions");
    for (int c : conv_channels) {
        if (c < 1) throw std::invalid_argument("conv channel counts must be positive");
    }
    if (pooled_size() < 1) {
        throw std::invalid_argument("pooling collapses a " + std::to_string(crop) +
                                    "x" + std::to_string(crop) + " input to zero");
    }
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (!(learning_rate > 0)) throw std::invalid_argument("learning_rate must be > 0");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (!(rho > 0 && rho < 1)) throw std::invalid_argument("rmsprop rho must be in (0,1)");
    if (!(epsilon > 0)) throw std::invalid_argument("rmsprop epsilon must be > 0");
}

const std::array<const char*, 8> kParamNames = {
    "conv1.weight", "conv1.bias", "conv2.weight", "conv2.bias",
    "conv3.weight", "conv3.bias", "fc.weight",    "fc.bias",
};

template <typename T>
void NetParams<T>::resize(const NetworkSpec& spec, T fill_value) {
    const auto [c1, c2, c3] = spec.conv_channels;
    conv1_w.assign(static_cast<size_t>(9) * spec.in_channels * c1, fill_value);
    conv1_b.assign(static_cast<size_t>(c1), fill_value);
    conv2_w.assign(static_cast<size_t>(9) * c1 * c2, fill_value);
    conv2_b.assign(static_cast<size_t>(c2), fill_value);
    conv3_w.assign(static_cast<size_t>(9) * c2 * c3, fill_value);
    conv3_b.assign(static_cast<size_t>(c3), fill_value);
    fc_w.assign(static_cast<size_t>(spec.fc_inputs()) * spec.action_count, fill_value);
    fc_b.assign(static_cast<size_t>(spec.action_count), fill_value);
}

template <typename T>
void NetParams<T>::fill(T value) {
    for (auto* a : arrays()) std::fill(a->begin(), a->end(), value);
}

template <typename T>
size_t NetParams<T>::total_count() const {
    size_t n = 0;
    for (const auto* a : arrays()) n += a->size();
    return n;
}

template <typename T>
std::array<std::vector<T>*, 8> NetParams<T>::arrays() {
    return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &conv3_w, &conv3_b, &fc_w, &fc_b};
}

template <typename T>
std::array<const std::vector<T>*, 8> NetParams<T>::arrays() const {
    return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &conv3_w, &conv3_b, &fc_w, &fc_b};
}

template <typename T>
NetworkT<T> init_network_t(const NetworkSpec& spec, uint64_t seed) {
    spec.validate();
    NetworkT<T> net;
    net.spec = spec;
    net.init_seed = seed;
    net.params.resize(spec);
    net.rms.resize(spec);

    Rng rng(seed);
    auto fill_uniform = [&](std::vector<T>& w, int fan_in) {
        const double bound = std::sqrt(6.0 / fan_in);
        for (auto& x : w) x = static_cast<T>(rng.uniform_symmetric(bound));
    };
    fill_uniform(net.params.conv1_w, 9 * spec.in_channels);
    fill_uniform(net.params.conv2_w, 9 * spec.conv_channels[0]);
    fill_uniform(net.params.conv3_w, 9 * spec.conv_channels[1]);
    fill_uniform(net.params.fc_w, spec.fc_inputs());
    return net;
}

Network init_network(const NetworkSpec& spec, uint64_t seed) {
    return init_network_t<float>(spec, seed);
}

namespace {

// Same-padding 3x3 convolution over [y][x][c] activations with weights
// [ky][kx][ci][co]. Zero input rows are skipped (exact: they contribute +0),
// which pays off on one-hot and post-relu activations.
template <typename T>
void conv_forward(const T* in, int h, int w, int ci_n, const T* weights, const T* bias,
                  int co_n, bool relu, T* out) {
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            T* op = out + (static_cast<size_t>(y) * w + x) * co_n;
            std::memcpy(op, bias, sizeof(T) * static_cast<size_t>(co_n));
            for (int ky = 0; ky < 3; ++ky) {
                const int iy = y + ky - 1;
                if (iy < 0 || iy >= h) continue;
                for (int kx = 0; kx < 3; ++kx) {
                    const int ix = x + kx - 1;
                    if (ix < 0 || ix >= w) continue;
                    const T* ip = in + (static_cast<size_t>(iy) * w + ix) * ci_n;
                    const T* wp = weights + static_cast<size_t>(ky * 3 + kx) * ci_n * co_n;
                    for (int ci = 0; ci < ci_n; ++ci) {
                        const T v = ip[ci];
                        if (v == T(0)) continue;
                        const T* wr = wp + static_cast<size_t>(ci) * co_n;
                        for (int co = 0; co < co_n; ++co) op[co] += v * wr[co];
                    }
                }
            }
            if (relu) {
                for (int co = 0; co < co_n; ++co) op[co] = op[co] > T(0) ? op[co] : T(0);
            }
        }
    }
}

// Gradients for the convolution above. d_in may be null (input layer).
// Activations are post-relu, so `in > 0` is exactly the relu mask of the
// producing layer when callers chain d_in through relu_backward.
template <typename T>
void conv_backward(const T* in, int h, int w, int ci_n, const T* weights, int co_n,
                   const T* d_out, T* d_weights, T* d_bias, T* d_in) {
    if (d_in) {
        std::fill(d_in, d_in + static_cast<size_t>(h) * w * ci_n, T(0));
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const T* dop = d_out + (static_cast<size_t>(y) * w + x) * co_n;
            for (int co = 0; co < co_n; ++co) d_bias[co] += dop[co];
            for (int ky = 0; ky < 3; ++ky) {
                const int iy = y + ky - 1;
                if (iy < 0 || iy >= h) continue;
                for (int kx = 0; kx < 3; ++kx) {
                    const int ix = x + kx - 1;
                    if (ix < 0 || ix >= w) continue;
                    const size_t ibase = (static_cast<size_t>(iy) * w + ix) * ci_n;
                    const size_t wbase = static_cast<size_t>(ky * 3 + kx) * ci_n * co_n;
                    for (int ci = 0; ci < ci_n; ++ci) {
                        const T v = in[ibase + ci];
                        const T* wr = weights + wbase + static_cast<size_t>(ci) * co_n;
                        T* dwr = d_weights + wbase + static_cast<size_t>(ci) * co_n;
                        if (d_in) {
                            T dot = T(0);
                            if (v != T(0)) {
                                for (int co = 0; co < co_n; ++co) {
                                    dwr[co] += v * dop[co];
                                    dot += wr[co] * dop[co];
                                }
                            } else {
                                for (int co = 0; co < co_n; ++co) dot += wr[co] * dop[co];
                            }
                            d_in[ibase + ci] += dot;
                        } else if (v != T(0)) {
                            for (int co = 0; co < co_n; ++co) dwr[co] += v * dop[co];
                        }
                    }
                }
            }
        }
    }
}

// 2x2 max pool, stride 2, floor (trailing row/col of odd inputs ignored).
// arg records the flat input offset of each window maximum.
template <typename T>
void pool_forward(const T* in, int h, int w, int c_n, T* out, int* arg) {
    const int ph = h / 2, pw = w / 2;
    for (int py = 0; py < ph; ++py) {
        for (int px = 0; px < pw; ++px) {
            T* op = out + (static_cast<size_t>(py) * pw + px) * c_n;
            int* ap = arg + (static_cast<size_t>(py) * pw + px) * c_n;
            for (int c = 0; c < c_n; ++c) {
                T best = in[((static_cast<size_t>(2 * py)) * w + 2 * px) * c_n + c];
                int best_i = ((2 * py) * w + 2 * px) * c_n + c;
                for (int dy = 0; dy < 2; ++dy) {
                    for (int dx = 0; dx < 2; ++dx) {
                        const int i = ((2 * py + dy) * w + 2 * px + dx) * c_n + c;
                        if (in[i] > best) {
                            best = in[i];
                            best_i = i;
                        }
                    }
                }
                op[c] = best;
                ap[c] = best_i;
            }
        }
    }
}

template <typename T>
void relu_backward_inplace(const T* activations, size_t n, T* d) {
    for (size_t i = 0; i < n; ++i) {
        if (activations[i] <= T(0)) d[i] = T(0);
    }
}

template <typename T>
void scratch_resize(const NetworkSpec& spec, NetScratch<T>& s) {
    const auto [c1, c2, c3] = spec.conv_channels;
    const size_t hw = static_cast<size_t>(spec.crop) * spec.crop;
    const int p = spec.pooled_size();
    const size_t phw = static_cast<size_t>(p) * p;
    s.x1.resize(hw * c1);
    s.x2.resize(hw * c2);
    s.pooled.resize(phw * c2);
    s.pool_arg.resize(phw * c2);
    s.x3.resize(phw * c3);
    s.logits.resize(static_cast<size_t>(spec.action_count));
    s.probs.resize(static_cast<size_t>(spec.action_count));
    s.d3.resize(phw * c3);
    s.dpooled.resize(phw * c2);
    s.d2.resize(hw * c2);
    s.d1.resize(hw * c1);
}

// Runs the net up to softmax; returns cross-entropy -log p[target] when
// target >= 0, otherwise 0.
template <typename T>
T forward_pass(const NetworkT<T>& net, const T* obs, NetScratch<T>& s, int target) {
    const NetworkSpec& sp = net.spec;
    const auto [c1, c2, c3] = sp.conv_channels;
    const int crop = sp.crop, p = sp.pooled_size();
    const NetParams<T>& w = net.params;

    conv_forward(obs, crop, crop, sp.in_channels, w.conv1_w.data(), w.conv1_b.data(), c1, true,
                 s.x1.data());
    conv_forward(s.x1.data(), crop, crop, c1, w.conv2_w.data(), w.conv2_b.data(), c2, true,
                 s.x2.data());
    pool_forward(s.x2.data(), crop, crop, c2, s.pooled.data(), s.pool_arg.data());
    conv_forward(s.pooled.data(), p, p, c2, w.conv3_w.data(), w.conv3_b.data(), c3, true,
                 s.x3.data());

    const int actions = sp.action_count;
    const int fc_in = sp.fc_inputs();
    for (int a = 0; a < actions; ++a) s.logits[static_cast<size_t>(a)] = w.fc_b[static_cast<size_t>(a)];
    for (int i = 0; i < fc_in; ++i) {
        const T v = s.x3[static_cast<size_t>(i)];
        if (v == T(0)) continue;
        const T* wr = w.fc_w.data() + static_cast<size_t>(i) * actions;
        for (int a = 0; a < actions; ++a) s.logits[static_cast<size_t>(a)] += v * wr[a];
    }

    T max_logit = s.logits[0];
    for (int a = 1; a < actions; ++a) max_logit = std::max(max_logit, s.logits[static_cast<size_t>(a)]);
    T sum = T(0);
    for (int a = 0; a < actions; ++a) {
        s.probs[static_cast<size_t>(a)] = std::exp(s.logits[static_cast<size_t>(a)] - max_logit);
        sum += s.probs[static_cast<size_t>(a)];
    }
    for (int a = 0; a < actions; ++a) s.probs[static_cast<size_t>(a)] /= sum;

    if (target < 0) return T(0);
    return -(s.logits[static_cast<size_t>(target)] - max_logit - std::log(sum));
}

// Backward pass for one example. dlogits must already be scaled (softmax -
// onehot, divided by batch count). Accumulates into grads.
template <typename T>
void backward_pass(const NetworkT<T>& net, const T* obs, NetScratch<T>& s, const T* dlogits,
                   NetParams<T>& grads) {
    const NetworkSpec& sp = net.spec;
    const auto [c1, c2, c3] = sp.conv_channels;
    const int crop = sp.crop, p = sp.pooled_size();
    const int actions = sp.action_count;
    const int fc_in = sp.fc_inputs();
    const NetParams<T>& w = net.params;

    // fc
    for (int a = 0; a < actions; ++a) grads.fc_b[static_cast<size_t>(a)] += dlogits[a];
    for (int i = 0; i < fc_in; ++i) {
        const T v = s.x3[static_cast<size_t>(i)];
        const T* wr = w.fc_w.data() + static_cast<size_t>(i) * actions;
        T* gwr = grads.fc_w.data() + static_cast<size_t>(i) * actions;
        T dot = T(0);
        if (v != T(0)) {
            for (int a = 0; a < actions; ++a) {
                gwr[a] += v * dlogits[a];
                dot += wr[a] * dlogits[a];
            }
        } else {
            for (int a = 0; a < actions; ++a) dot += wr[a] * dlogits[a];
        }
        s.d3[static_cast<size_t>(i)] = dot;
    }

    relu_backward_inplace(s.x3.data(), s.x3.size(), s.d3.data());
    conv_backward(s.pooled.data(), p, p, c2, w.conv3_w.data(), c3, s.d3.data(),
                  grads.conv3_w.data(), grads.conv3_b.data(), s.dpooled.data());

    // pool: route gradients to window maxima
    std::fill(s.d2.begin(), s.d2.end(), T(0));
    for (size_t i = 0; i < s.dpooled.size(); ++i) {
        s.d2[static_cast<size_t>(s.pool_arg[i])] += s.dpooled[i];
    }

    relu_backward_inplace(s.x2.data(), s.x2.size(), s.d2.data());
    conv_backward(s.x1.data(), crop, crop, c1, w.conv2_w.data(), c2, s.d2.data(),
                  grads.conv2_w.data(), grads.conv2_b.data(), s.d1.data());

    relu_backward_inplace(s.x1.data(), s.x1.size(), s.d1.data());
    conv_backward(obs, crop, crop, sp.in_channels, w.conv1_w.data(), c1, s.d1.data(),
                  grads.conv1_w.data(), grads.conv1_b.data(), static_cast<T*>(nullptr));
}

}  // namespace

template <typename T>
void forward_one(const NetworkT<T>& net, const T* obs_data, NetScratch<T>& scratch,
                 T* probs_out) {
    scratch_resize(net.spec, scratch);
    forward_pass(net, obs_data, scratch, -1);
    std::copy(scratch.probs.begin(), scratch.probs.end(), probs_out);
}

std::vector<float> forward(const Network& net, const Observation& obs) {
    if (obs.crop != net.spec.crop || obs.channels != net.spec.in_channels) {
        throw std::invalid_argument("observation shape " + std::to_string(obs.crop) + "x" +
                                    std::to_string(obs.crop) + "x" + std::to_string(obs.channels) +
                                    " does not match network input");
    }
    NetScratch<float> scratch;
    std::vector<float> probs(static_cast<size_t>(net.spec.action_count));
    forward_one(net, obs.data.data(), scratch, probs.data());
    return probs;
}

template <typename T>
void batch_append(BatchT<T>& batch, const LevelGrid& level, int row, int col, int target,
                  const ObservationSpec& obs) {
    if (!level.in_bounds(row, col)) {
        throw std::invalid_argument("batch_append: location outside grid");
    }
    const int crop = obs.crop_size, channels = obs.channel_count;
    const int half = crop / 2;
    batch.obs_floats = crop * crop * channels;
    const size_t base = batch.obs.size();
    batch.obs.resize(base + static_cast<size_t>(batch.obs_floats), T(0));
    T* o = batch.obs.data() + base;
    for (int y = 0; y < crop; ++y) {
        const int gr = row - half + y;
        for (int x = 0; x < crop; ++x) {
            const int gc = col - half + x;
            const int ch = level.in_bounds(gr, gc) ? level.at(gr, gc) : channels - 1;
            o[(y * crop + x) * channels + ch] = T(1);
        }
    }
    batch.targets.push_back(target);
    batch.count++;
}

template <typename T>
T batch_loss(const NetworkT<T>& net, const BatchT<T>& batch, NetScratch<T>& scratch) {
    if (batch.count == 0) throw std::invalid_argument("empty batch");
    scratch_resize(net.spec, scratch);
    double total = 0.0;
    for (int i = 0; i < batch.count; ++i) {
        const int target = batch.targets[static_cast<size_t>(i)];
        if (target < 0 || target >= net.spec.action_count) {
            throw std::invalid_argument("target " + std::to_string(target) + " out of range");
        }
        total += static_cast<double>(forward_pass(
            net, batch.obs.data() + static_cast<size_t>(i) * batch.obs_floats, scratch, target));
    }
    return static_cast<T>(total / batch.count);
}

template <typename T>
T loss_and_gradients(const NetworkT<T>& net, const BatchT<T>& batch, NetParams<T>& grads,
                     NetScratch<T>& scratch) {
    if (batch.count == 0) throw std::invalid_argument("empty batch");
    scratch_resize(net.spec, scratch);
    grads.resize(net.spec);
    const int actions = net.spec.action_count;
    std::vector<T> dlogits(static_cast<size_t>(actions));
    const T inv_n = T(1) / static_cast<T>(batch.count);

    double total = 0.0;
    for (int i = 0; i < batch.count; ++i) {
        const int target = batch.targets[static_cast<size_t>(i)];
        if (target < 0 || target >= actions) {
            throw std::invalid_argument("target " + std::to_string(target) + " out of range");
        }
        const T* obs = batch.obs.data() + static_cast<size_t>(i) * batch.obs_floats;
        total += static_cast<double>(forward_pass(net, obs, scratch, target));
        for (int a = 0; a < actions; ++a) {
            dlogits[static_cast<size_t>(a)] =
                (scratch.probs[static_cast<size_t>(a)] - (a == target ? T(1) : T(0))) * inv_n;
        }
        backward_pass(net, obs, scratch, dlogits.data(), grads);
    }
    return static_cast<T>(total / batch.count);
}

template <typename T>
void rmsprop_step(NetworkT<T>& net, const NetParams<T>& grads, const TrainConfig& config) {
    const T rho = static_cast<T>(config.rho);
    const T lr = static_cast<T>(config.learning_rate);
    const T eps = static_cast<T>(config.epsilon);
    auto ws = net.params.arrays();
    auto vs = net.rms.arrays();
    auto gs = grads.arrays();
    for (size_t k = 0; k < ws.size(); ++k) {
        auto& w = *ws[k];
        auto& v = *vs[k];
        const auto& g = *gs[k];
        if (g.size() != w.size()) throw std::invalid_argument("gradient shape mismatch");
        for (size_t i = 0; i < w.size(); ++i) {
            v[i] = rho * v[i] + (T(1) - rho) * g[i] * g[i];
            w[i] -= lr * g[i] / (std::sqrt(v[i]) + eps);
        }
    }
}

std::vector<double> train(Network& net, const std::vector<TrainingExample>& examples,
                          const ObservationSpec& obs, const TrainConfig& config,
                          const EpochCallback& on_epoch) {
    config.validate();
    if (examples.empty()) throw std::invalid_argument("train: empty dataset");
    if (obs.crop_size != net.spec.crop || obs.channel_count != net.spec.in_channels) {
        throw std::invalid_argument("train: observation spec does not match network input");
    }
    for (const auto& ex : examples) {
        if (ex.target >= net.spec.action_count) {
            throw std::invalid_argument("train: target out of action range");
        }
    }

    Rng shuffle_rng(config.shuffle_seed);
    std::vector<size_t> order(examples.size());
    std::iota(order.begin(), order.end(), size_t{0});

    NetScratch<float> scratch;
    NetParams<float> grads;
    Batch batch;
    std::vector<double> losses;
    losses.reserve(static_cast<size_t>(config.epochs));

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        for (size_t begin = 0; begin < order.size(); begin += static_cast<size_t>(config.batch_size)) {
            const size_t end = std::min(order.size(), begin + static_cast<size_t>(config.batch_size));
            batch.count = 0;
            batch.obs.clear();
            batch.targets.clear();
            for (size_t i = begin; i < end; ++i) {
                const TrainingExample& ex = examples[order[i]];
                batch_append(batch, ex.level, ex.row, ex.col, ex.target, obs);
            }
            const float loss = loss_and_gradients(net, batch, grads, scratch);
            rmsprop_step(net, grads, config);
            epoch_loss += static_cast<double>(loss) * static_cast<double>(batch.count);
        }
        epoch_loss /= static_cast<double>(examples.size());
        losses.push_back(epoch_loss);
        if (on_epoch) on_epoch(epoch, epoch_loss);
    }
    return losses;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

std::vector<std::vector<int>> param_shapes(const NetworkSpec& spec) {
    const auto [c1, c2, c3] = spec.conv_channels;
    return {
        {3, 3, spec.in_channels, c1}, {c1},
        {3, 3, c1, c2},               {c2},
        {3, 3, c2, c3},               {c3},
        {spec.fc_inputs(), spec.action_count}, {spec.action_count},
    };
}

}  // namespace

void save_checkpoint(const Network& net, const std::string& game_id, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const auto shapes = param_shapes(net.spec);
    auto arrays = net.params.arrays();

    nlohmann::json params = nlohmann::json::array();
    size_t offset = 0;
    for (size_t k = 0; k < arrays.size(); ++k) {
        const size_t bytes = arrays[k]->size() * sizeof(float);
        params.push_back({{"name", kParamNames[k]},
                          {"shape", shapes[k]},
                          {"offset", offset},
                          {"bytes", bytes}});
        offset += bytes;
    }
    nlohmann::json manifest = {
        {"format", "pod-checkpoint-v1"},
        {"game", game_id},
        {"seed", net.init_seed},
        {"spec",
         {{"crop", net.spec.crop},
          {"in_channels", net.spec.in_channels},
          {"action_count", net.spec.action_count},
          {"conv_channels", net.spec.conv_channels}}},
        {"params", params},
    };

    const std::string manifest_path = dir + "/manifest.json";
    std::ofstream mf(manifest_path, std::ios::binary);
    if (!mf) throw IoError("cannot write '" + manifest_path + "'");
    mf << manifest.dump(2) << '\n';

    const std::string weights_path = dir + "/weights.bin";
    std::ofstream wf(weights_path, std::ios::binary);
    if (!wf) throw IoError("cannot write '" + weights_path + "'");
    for (const auto* a : arrays) {
        wf.write(reinterpret_cast<const char*>(a->data()),
                 static_cast<std::streamsize>(a->size() * sizeof(float)));
    }
    if (!wf) throw IoError("write failed for '" + weights_path + "'");
}

LoadedCheckpoint load_checkpoint(const std::string& dir) {
    const std::string manifest_path = dir + "/manifest.json";
    std::ifstream mf(manifest_path, std::ios::binary);
    if (!mf) throw IoError("cannot open '" + manifest_path + "'");

    nlohmann::json manifest;
    NetworkSpec spec;
    std::string game_id;
    uint64_t seed = 0;
    try {
        manifest = nlohmann::json::parse(mf);
        if (manifest.at("format").get<std::string>() != "pod-checkpoint-v1") {
            throw std::invalid_argument("unknown checkpoint format");
        }
        game_id = manifest.at("game").get<std::string>();
        seed = manifest.at("seed").get<uint64_t>();
        const auto& js = manifest.at("spec");
        spec.crop = js.at("crop").get<int>();
        spec.in_channels = js.at("in_channels").get<int>();
        spec.action_count = js.at("action_count").get<int>();
        auto cc = js.at("conv_channels").get<std::vector<int>>();
        if (cc.size() != 3) throw std::invalid_argument("conv_channels must have 3 entries");
        std::copy(cc.begin(), cc.end(), spec.conv_channels.begin());
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("corrupt manifest '" + manifest_path + "': " + e.what());
    }
    spec.validate();

    LoadedCheckpoint out;
    out.game_id = game_id;
    out.net.spec = spec;
    out.net.init_seed = seed;
    out.net.params.resize(spec);
    out.net.rms.resize(spec);

    // cross-check the manifest inventory against shapes derived from the spec
    const auto shapes = param_shapes(spec);
    auto arrays = out.net.params.arrays();
    size_t offset = 0;
    try {
        const auto& jparams = manifest.at("params");
        if (jparams.size() != arrays.size()) {
            throw std::invalid_argument("manifest lists " + std::to_string(jparams.size()) +
                                        " parameters, expected " + std::to_string(arrays.size()));
        }
        for (size_t k = 0; k < arrays.size(); ++k) {
            const auto& jp = jparams[k];
            const auto shape = jp.at("shape").get<std::vector<int>>();
            size_t count = 1;
            for (int d : shape) count *= static_cast<size_t>(d);
            if (jp.at("name").get<std::string>() != kParamNames[k] ||
                shape != shapes[k] || count != arrays[k]->size() ||
                jp.at("offset").get<size_t>() != offset ||
                jp.at("bytes").get<size_t>() != count * sizeof(float)) {
                throw std::invalid_argument("manifest parameter '" +
                                            jp.at("name").get<std::string>() +
                                            "' does not match the spec-derived shape");
            }
            offset += count * sizeof(float);
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("corrupt manifest '" + manifest_path + "': " + e.what());
    }

    const std::string weights_path = dir + "/weights.bin";
    std::ifstream wf(weights_path, std::ios::binary | std::ios::ate);
    if (!wf) throw IoError("cannot open '" + weights_path + "'");
    const auto actual = static_cast<size_t>(wf.tellg());
    if (actual != offset) {
        throw std::invalid_argument("weights blob is " + std::to_string(actual) +
                                    " bytes, manifest expects " + std::to_string(offset));
    }
    wf.seekg(0);
    for (auto* a : arrays) {
        wf.read(reinterpret_cast<char*>(a->data()),
                static_cast<std::streamsize>(a->size() * sizeof(float)));
    }
    if (!wf) throw IoError("read failed for '" + weights_path + "'");
    return out;
}

// explicit instantiations: float for production, double for gradient checks
template struct NetParams<float>;
template struct NetParams<double>;
template NetworkT<float> init_network_t<float>(const NetworkSpec&, uint64_t);
template NetworkT<double> init_network_t<double>(const NetworkSpec&, uint64_t);
template void forward_one<float>(const NetworkT<float>&, const float*, NetScratch<float>&, float*);
template void forward_one<double>(const NetworkT<double>&, const double*, NetScratch<double>&,
                                  double*);
template void batch_append<float>(BatchT<float>&, const LevelGrid&, int, int, int,
                                  const ObservationSpec&);
template void batch_append<double>(BatchT<double>&, const LevelGrid&, int, int, int,
                                   const ObservationSpec&);
template float batch_loss<float>(const NetworkT<float>&, const BatchT<float>&, NetScratch<float>&);
template double batch_loss<double>(const NetworkT<double>&, const BatchT<double>&,
                                   NetScratch<double>&);
template float loss_and_gradients<float>(const NetworkT<float>&, const BatchT<float>&,
                                         NetParams<float>&, NetScratch<float>&);
template double loss_and_gradients<double>(const NetworkT<double>&, const BatchT<double>&,
                                           NetParams<double>&, NetScratch<double>&);
template void rmsprop_step<float>(NetworkT<float>&, const NetParams<float>&, const TrainConfig&);
template void rmsprop_step<double>(NetworkT<double>&, const NetParams<double>&,
                                   const TrainConfig&);

}  // namespace pod
