#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pod/games.h"
#include "pod/neuralnet.h"
#include "pod/podgen.h"
#include "pod/rng.h"

namespace pod {

// Inference-time repair loop: start from noise, walk the grid writing the
// network's argmax action at each visited tile, stop as soon as the level is
// playable or the pass budget runs out.
struct GenerationConfig {
    Traversal traversal = Traversal::random_permutation;
    int max_passes = 3;  // step threshold = max_passes * H * W
    ObservationSpec obs;
    uint64_t seed = 0;

    explicit GenerationConfig(const ObservationSpec& observation) : obs(observation) {}
    void validate() const;  // throws when max_passes < 1
};

enum class TerminatedBy { playable, budget };
const char* to_string(TerminatedBy t);

struct GenStep {
    int row = 0;
    int col = 0;
    uint8_t action = 0;

    bool operator==(const GenStep&) const = default;
};

struct GenerationTrace {
    LevelGrid start_level;
    LevelGrid final_level;
    int steps = 0;
    TerminatedBy terminated_by = TerminatedBy::budget;
    std::vector<GenStep> log;  // replaying over start_level yields final_level
};

// Argmax tile action for the crop centered at (row, col); ties break to the
// lowest tile index.
int repair_action(const Network& net, const ObservationSpec& obs, const LevelGrid& level,
                  int row, int col);

// One generation episode. Playability is checked once before any edit (a
// lucky noise draw terminates at 0 steps) and again after every tile write.
// "Keep" writes (action == current tile) count against the budget like any
// other step.
GenerationTrace generate_level(const Network& net, const GameSpec& game,
                               const GenerationConfig& config, Rng& rng);

// trials independent episodes; trial i runs on derive_seed(master_seed, i),
// so results do not depend on execution order.
std::vector<GenerationTrace> batch_generate(const Network& net, const GameSpec& game,
                                            const GenerationConfig& config, int trials,
                                            uint64_t master_seed);

// One JSON object per line:
// {"trial": i, "terminated_by": "...", "steps": n, "final": "<level text>"}
void write_traces_jsonl(const std::vector<GenerationTrace>& traces, const TileAlphabet& alphabet,
                        const std::string& path);

}  // namespace pod
