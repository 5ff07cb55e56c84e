#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pod/tilemap.h"

namespace pod {

// Per-game definition: alphabet, level dimensions, default observation crop,
// noise distribution for start levels, and solver budget (expanded states).
struct GameSpec {
    std::string id;
    TileAlphabet alphabet;
    int level_height;
    int level_width;
    int default_obs_size;
    std::vector<double> noise_weights;
    int solver_budget;
};

// Known games: "zelda", "sokoban", "dave". Throws on unknown id.
const GameSpec& game_by_id(const std::string& id);
std::vector<std::string> game_ids();

enum class PlayReason {
    ok,
    bad_tile_counts,
    unreachable_objective,
    budget_exhausted,
    no_solution,
};
const char* to_string(PlayReason reason);

struct PlayabilityResult {
    bool playable = false;
    PlayReason reason = PlayReason::no_solution;
    // Move count; set only when a solver ran and succeeded (Sokoban, Dave).
    std::optional<int> solution_length;

    static PlayabilityResult pass(std::optional<int> length = std::nullopt) {
        return {true, PlayReason::ok, length};
    }
    static PlayabilityResult fail(PlayReason r) { return {false, r, std::nullopt}; }
};

// Exact occurrence count of one tile index.
int count_tiles(const LevelGrid& level, uint8_t tile);

// 4-connected flood fill from `from` over cells whose tile is in `passable`
// (bitmask over tile indices). Includes the start cell. Result is sorted
// row-major.
std::vector<std::pair<int, int>> reachable_set(const LevelGrid& level, std::pair<int, int> from,
                                               const std::vector<bool>& passable);

// Zelda: exactly one player, key, and door; key and door reachable from the
// player through anything except walls (enemies do not block).
PlayabilityResult check_zelda(const LevelGrid& level);

// Sokoban move chars: 'U','D','L','R' (player steps; pushes implied).
struct SokobanOutcome {
    PlayabilityResult result;
    std::string moves;
};

// Sokoban: one player, #crates == #targets >= 1, and A* finds a push plan
// within `budget` expanded states. Composite tiles count additively
// (crate_on_target is both a crate and a target). Optimal move count is
// returned in solution_length.
SokobanOutcome solve_sokoban_full(const LevelGrid& level, int budget);
PlayabilityResult solve_sokoban(const LevelGrid& level, int budget);

// One tick of the Danger Dave movement model. `rise` is the number of
// rise ticks left in the current jump (0 = grounded or falling).
struct DaveState {
    int8_t row = 0;
    int8_t col = 0;
    int8_t rise = 0;
    bool has_chalice = false;

    bool operator==(const DaveState&) const = default;
};

struct DaveOutcome {
    PlayabilityResult result;
    std::vector<DaveState> path;  // start state first; empty when unplayable
};

// Danger Dave: one player, chalice, and door; BFS over the movement model
// must collect the chalice and reach the door within `budget` expanded
// states. Spike cells kill on entry and are never expanded.
//
// Movement model (one state transition per tick):
//   - out-of-grid cells act as solid
//   - grounded (solid below): step left/right into a non-solid cell, or
//     jump straight up one tile, which grants one more rise tick
//   - rising (rise > 0): move to (row-1, col+dx), dx in {-1,0,1}; if no
//     rise destination is open the tick is spent in place and the jump
//     ends (head bump)
//   - airborne with rise == 0: fall to (row+1, col+dx), dx in {-1,0,1}
//   - chalice is collected on entering its cell; the door wins only with
//     the chalice in hand
DaveOutcome solve_dave_full(const LevelGrid& level, int budget);
PlayabilityResult solve_dave(const LevelGrid& level, int budget);

// Legal-successor check for one Dave tick; used by replay validation.
bool dave_transition_valid(const LevelGrid& level, const DaveState& a, const DaveState& b);

// Dispatches to the per-game checker. Throws on dimension mismatch.
PlayabilityResult check_playable(const GameSpec& game, const LevelGrid& level);

}  // namespace pod
