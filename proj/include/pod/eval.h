#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pod/games.h"
#include "pod/generator.h"
#include "pod/tilemap.h"

namespace pod {

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // sample std (n-1); 0 when n == 1
};

// Per-network percentages plus cross-network aggregates. runtime_seconds is
// informational only and never serialized, so persisted reports stay
// byte-identical across runs.
struct MetricsReport {
    std::string game;
    std::string config_digest;
    int trials = 0;
    std::vector<double> playable_pct;         // one entry per network
    std::vector<double> playable_unique_pct;  // dedup vs goals and kept levels
    std::vector<double> duplicate_pct;        // exact twins among playable outputs
    MeanStd playable;
    MeanStd playable_unique;
    MeanStd duplicate;
    bool single_seed = false;
    double runtime_seconds = 0.0;
};

// Greedy first-kept scan in input order: a level is kept iff its normalized
// hamming distance is >= threshold against every goal and every previously
// kept level (exactly 0.10 is kept).
std::vector<LevelGrid> dedup_unique(const std::vector<LevelGrid>& levels,
                                    const std::vector<LevelGrid>& goal_set,
                                    double threshold = 0.10);

// 100 * (levels with an exact earlier twin) / count; empty list -> 0.
double duplicate_pct(const std::vector<LevelGrid>& levels);

MeanStd mean_and_sample_std(const std::vector<double>& values);

// Runs batch_generate per network (network k gets master seed
// derive_seed(master_seed, k)), then scores playability, uniqueness, and
// duplicates over each network's playable outputs.
MetricsReport evaluate(const std::vector<const Network*>& networks, const GameSpec& game,
                       const GenerationConfig& config, int trials,
                       const std::vector<LevelGrid>& goal_set, uint64_t master_seed);

void save_metrics_report(const MetricsReport& report, const std::string& path);

// CSV of flattened one-hot rows (c0..cN over |alphabet| channels) + a label
// column: goal rows first, then generated, for external projection tools.
void export_level_vectors(const std::vector<LevelGrid>& generated,
                          const std::vector<LevelGrid>& goal_set, const TileAlphabet& alphabet,
                          const std::string& path);

}  // namespace pod
