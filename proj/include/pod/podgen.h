#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pod/games.h"
#include "pod/rng.h"
#include "pod/tilemap.h"

namespace pod {

// Tile visit order for destruction and generation. "random_permutation"
// draws a fresh permutation without replacement, so a full pass touches
// every location exactly once and trajectories terminate in <= H*W steps.
enum class Traversal { sequential, random_permutation };

Traversal traversal_from_string(const std::string& s);
const char* to_string(Traversal t);

struct TrajectoryStep {
    int row = 0;
    int col = 0;
    uint8_t destroy_value = 0;  // tile written during destruction (start level's value)
    uint8_t repair_value = 0;   // tile that was there before the edit (the training target)
};

// One destruction episode, goal -> start. Applying destroy values in order
// to the goal yields the start; applying repair values in reverse order to
// the start yields the goal.
struct Trajectory {
    LevelGrid start_level;
    LevelGrid goal_level;
    std::vector<TrajectoryStep> steps;
};

// Snapshot taken AFTER the destructive edit, plus the edited location and
// the pre-destruction tile as the supervised target.
struct TrainingExample {
    LevelGrid level;
    int row = 0;
    int col = 0;
    uint8_t target = 0;
};

// Odd-sided one-hot crop window. channel_count = |alphabet| + 1; the last
// channel marks positions outside the grid.
struct ObservationSpec {
    int crop_size;
    int channel_count;

    ObservationSpec(int crop, int channels);
    static ObservationSpec for_game(const GameSpec& game, int crop);
};

struct Observation {
    int crop = 0;
    int channels = 0;
    std::vector<float> data;  // [y][x][channel], exactly one 1 per (y,x)

    float at(int y, int x, int c) const {
        return data[static_cast<size_t>((y * crop + x) * channels + c)];
    }
};

// Each cell drawn independently from the game's noise_weights.
LevelGrid sample_start_level(const GameSpec& game, Rng& rng);

// Index of the goal with minimal hamming distance to start; ties go to the
// smallest index. Throws on an empty goal set.
size_t select_goal(const LevelGrid& start, const std::vector<LevelGrid>& goals);

// Destroys goal into start, recording one step per visited location until
// the evolving level equals start (checked before each step). No-op visits
// (destroy == repair) are recorded too.
Trajectory destroy_trajectory(const LevelGrid& goal, const LevelGrid& start, Traversal traversal,
                              Rng& rng);

std::vector<TrainingExample> trajectory_to_examples(const Trajectory& traj);

void crop_observation(const LevelGrid& level, int row, int col, const ObservationSpec& spec,
                      Observation& out);
Observation crop_observation(const LevelGrid& level, int row, int col,
                             const ObservationSpec& spec);

struct DatasetConfig {
    size_t target_example_count = 100000;
    Traversal traversal = Traversal::random_permutation;
    uint64_t seed = 0;
};

struct Dataset {
    std::string game_id;
    uint64_t seed = 0;
    Traversal traversal = Traversal::random_permutation;
    std::string goal_set_hash;
    size_t trajectories = 0;
    std::vector<TrainingExample> examples;
};

// FNV-1a over the serialized goal levels, as a 16-char hex string.
std::string goal_set_hash(const std::vector<LevelGrid>& goals, const TileAlphabet& alphabet);

// Runs destruction episodes until the example count reaches the target
// (overshoot bounded by one trajectory). Trajectory i draws from a stream
// derived from (seed, i), so output is independent of scheduling. Goals
// must be playable; an unplayable goal is a corrupt goal set and throws.
Dataset build_dataset(const GameSpec& game, const std::vector<LevelGrid>& goals,
                      const DatasetConfig& config);

// JSONL: header line {"count","game","goal_set_hash","seed","traversal"},
// then one {"col","level","row","target"} line per example.
void save_dataset_jsonl(const Dataset& dataset, const TileAlphabet& alphabet,
                        const std::string& path);
Dataset load_dataset_jsonl(const std::string& path);

// Reads every .txt in dir (sorted by filename) as a goal level with the
// game's alphabet and dimensions. Missing dir, empty dir, parse failures,
// and wrong dimensions all throw std::invalid_argument.
std::vector<LevelGrid> load_goal_dir(const std::string& dir, const GameSpec& game);

}  // namespace pod
