#include "pod/generator.h"

#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "pod/errors.h"

namespace pod {

void GenerationConfig::validate() const {
    if (max_passes < 1) throw std::invalid_argument("max_passes must be >= 1");
}

const char* to_string(TerminatedBy t) {
    return t == TerminatedBy::playable ? "playable" : "budget";
}

namespace {

int argmax_lowest(const float* probs, int n) {
    int best = 0;
    for (int a = 1; a < n; ++a) {
        if (probs[a] > probs[best]) best = a;
    }
    return best;
}

// One-hot crop straight into a flat buffer, skipping the Observation wrapper
// (this sits on the per-step hot path).
void fill_crop(const LevelGrid& level, int row, int col, int crop, int channels, float* out) {
    const int half = crop / 2;
    std::fill(out, out + static_cast<size_t>(crop) * crop * channels, 0.0f);
    for (int y = 0; y < crop; ++y) {
        const int gr = row - half + y;
        for (int x = 0; x < crop; ++x) {
            const int gc = col - half + x;
            const int ch = level.in_bounds(gr, gc) ? level.at(gr, gc) : channels - 1;
            out[(y * crop + x) * channels + ch] = 1.0f;
        }
    }
}

}  // namespace

int repair_action(const Network& net, const ObservationSpec& obs, const LevelGrid& level,
                  int row, int col) {
    if (!level.in_bounds(row, col)) {
        throw std::invalid_argument("repair_action: location outside grid");
    }
    const std::vector<float> probs = forward(net, crop_observation(level, row, col, obs));
    return argmax_lowest(probs.data(), static_cast<int>(probs.size()));
}

GenerationTrace generate_level(const Network& net, const GameSpec& game,
                               const GenerationConfig& config, Rng& rng) {
    config.validate();
    if (net.spec.action_count != static_cast<int>(game.alphabet.size())) {
        throw std::invalid_argument("network predicts " + std::to_string(net.spec.action_count) +
                                    " actions but '" + game.id + "' has " +
                                    std::to_string(game.alphabet.size()) + " tiles");
    }
    if (net.spec.crop != config.obs.crop_size ||
        net.spec.in_channels != config.obs.channel_count) {
        throw std::invalid_argument("generation observation spec does not match network input");
    }

    GenerationTrace trace;
    trace.start_level = sample_start_level(game, rng);
    LevelGrid level = trace.start_level;

    if (check_playable(game, level).playable) {
        trace.final_level = level;
        trace.terminated_by = TerminatedBy::playable;
        return trace;
    }

    const int cells = level.cell_count();
    std::vector<int> order(static_cast<size_t>(cells));
    std::iota(order.begin(), order.end(), 0);

    NetScratch<float> scratch;
    std::vector<float> crop_buf(static_cast<size_t>(config.obs.crop_size) *
                                config.obs.crop_size * config.obs.channel_count);
    std::vector<float> probs(static_cast<size_t>(net.spec.action_count));

    bool done = false;
    for (int pass = 0; pass < config.max_passes && !done; ++pass) {
        if (config.traversal == Traversal::random_permutation) {
            rng.shuffle(order);
        } else {
            std::iota(order.begin(), order.end(), 0);
        }
        for (int idx : order) {
            const int row = idx / level.width;
            const int col = idx % level.width;
            fill_crop(level, row, col, config.obs.crop_size, config.obs.channel_count,
                      crop_buf.data());
            forward_one(net, crop_buf.data(), scratch, probs.data());
            const int action = argmax_lowest(probs.data(), net.spec.action_count);
            level.set(row, col, static_cast<uint8_t>(action));
            trace.log.push_back({row, col, static_cast<uint8_t>(action)});
            trace.steps++;
            if (check_playable(game, level).playable) {
                done = true;
                break;
            }
        }
    }

    trace.final_level = level;
    trace.terminated_by = done ? TerminatedBy::playable : TerminatedBy::budget;
    return trace;
}

std::vector<GenerationTrace> batch_generate(const Network& net, const GameSpec& game,
                                            const GenerationConfig& config, int trials,
                                            uint64_t master_seed) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    std::vector<GenerationTrace> traces;
    traces.reserve(static_cast<size_t>(trials));
    for (int i = 0; i < trials; ++i) {
        Rng rng(derive_seed(master_seed, static_cast<uint64_t>(i)));
        traces.push_back(generate_level(net, game, config, rng));
    }
    return traces;
}

void write_traces_jsonl(const std::vector<GenerationTrace>& traces, const TileAlphabet& alphabet,
                        const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    for (size_t i = 0; i < traces.size(); ++i) {
        const nlohmann::json line = {
            {"trial", i},
            {"terminated_by", to_string(traces[i].terminated_by)},
            {"steps", traces[i].steps},
            {"final", serialize_level(traces[i].final_level, alphabet)},
        };
        out << line.dump() << '\n';
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace pod
