#include "pod/games.h"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <deque>
#include <queue>
#include <stdexcept>
#include <unordered_map>

namespace pod {

// Tile indices below must match the registry order in game_by_id.
namespace zelda {
constexpr uint8_t empty = 0, wall = 1, player = 2, key = 3, door = 4;
}
namespace soko {
constexpr uint8_t empty = 0, wall = 1, player = 2, crate = 3, target = 4, crate_on_target = 5,
                  player_on_target = 6;
}
namespace dave {
constexpr uint8_t empty = 0, solid = 1, player = 2, chalice = 3, door = 4, spike = 5;
}

static std::vector<double> uniform_weights(size_t n) {
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

const GameSpec& game_by_id(const std::string& id) {
    static const std::vector<GameSpec> games = [] {
        std::vector<GameSpec> g;
        g.push_back({"zelda",
                     TileAlphabet("zelda", {{"empty", '.'},
                                            {"wall", 'w'},
                                            {"player", 'A'},
                                            {"key", '+'},
                                            {"door", 'g'},
                                            {"bat", '1'},
                                            {"scorpion", '2'},
                                            {"spider", '3'}}),
                     7, 11, 5, uniform_weights(8), 0});
        g.push_back({"sokoban",
                     TileAlphabet("sokoban", {{"empty", '.'},
                                              {"wall", '#'},
                                              {"player", '@'},
                                              {"crate", '$'},
                                              {"target", 'o'},
                                              {"crate_on_target", '*'},
                                              {"player_on_target", '%'}}),
                     5, 5, 3, uniform_weights(7), 200000});
        g.push_back({"dave",
                     TileAlphabet("dave", {{"empty", '.'},
                                           {"solid", '#'},
                                           {"player", 'A'},
                                           {"chalice", 'H'},
                                           {"door", 'g'},
                                           {"spike", 'x'},
                                           {"diamond", '$'}}),
                     7, 11, 5, uniform_weights(7), 100000});
        return g;
    }();
    for (const auto& g : games) {
        if (g.id == id) return g;
    }
    throw std::invalid_argument("unknown game '" + id + "'");
}

std::vector<std::string> game_ids() { return {"zelda", "sokoban", "dave"}; }

const char* to_string(PlayReason reason) {
    switch (reason) {
        case PlayReason::ok: return "ok";
        case PlayReason::bad_tile_counts: return "bad tile counts";
        case PlayReason::unreachable_objective: return "unreachable objective";
        case PlayReason::budget_exhausted: return "solver budget exhausted";
        case PlayReason::no_solution: return "no solution";
    }
    return "?";
}

int count_tiles(const LevelGrid& level, uint8_t tile) {
    return static_cast<int>(std::count(level.cells.begin(), level.cells.end(), tile));
}

std::vector<std::pair<int, int>> reachable_set(const LevelGrid& level, std::pair<int, int> from,
                                               const std::vector<bool>& passable) {
    std::vector<uint8_t> seen(level.cell_count(), 0);
    std::deque<std::pair<int, int>> frontier;
    seen[static_cast<size_t>(from.first) * level.width + from.second] = 1;
    frontier.push_back(from);
    while (!frontier.empty()) {
        auto [r, c] = frontier.front();
        frontier.pop_front();
        const int dr[4] = {-1, 1, 0, 0};
        const int dc[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
            int nr = r + dr[k], nc = c + dc[k];
            if (!level.in_bounds(nr, nc)) continue;
            size_t i = static_cast<size_t>(nr) * level.width + nc;
            if (seen[i] || !passable[level.at(nr, nc)]) continue;
            seen[i] = 1;
            frontier.push_back({nr, nc});
        }
    }
    std::vector<std::pair<int, int>> out;
    for (int r = 0; r < level.height; ++r) {
        for (int c = 0; c < level.width; ++c) {
            if (seen[static_cast<size_t>(r) * level.width + c]) out.push_back({r, c});
        }
    }
    return out;
}

PlayabilityResult check_zelda(const LevelGrid& level) {
    if (count_tiles(level, zelda::player) != 1 || count_tiles(level, zelda::key) != 1 ||
        count_tiles(level, zelda::door) != 1) {
        return PlayabilityResult::fail(PlayReason::bad_tile_counts);
    }
    std::pair<int, int> player_pos{-1, -1}, key_pos{-1, -1}, door_pos{-1, -1};
    for (int r = 0; r < level.height; ++r) {
        for (int c = 0; c < level.width; ++c) {
            uint8_t t = level.at(r, c);
            if (t == zelda::player) player_pos = {r, c};
            if (t == zelda::key) key_pos = {r, c};
            if (t == zelda::door) door_pos = {r, c};
        }
    }
    std::vector<bool> passable(8, true);
    passable[zelda::wall] = false;
    auto reach = reachable_set(level, player_pos, passable);
    auto contains = [&](std::pair<int, int> p) {
        return std::binary_search(reach.begin(), reach.end(), p);
    };
    if (!contains(key_pos) || !contains(door_pos)) {
        return PlayabilityResult::fail(PlayReason::unreachable_objective);
    }
    return PlayabilityResult::pass();
}

// ---------------------------------------------------------------------------
// Sokoban

namespace {

struct SokoBoard {
    int h = 0, w = 0;
    uint64_t walls = 0;
    uint64_t targets = 0;
    uint64_t crates = 0;
    int player = -1;
    int player_count = 0, crate_count = 0, target_count = 0;
    // per-cell minimum Manhattan distance to any target
    std::vector<int> target_dist;

    int cell(int r, int c) const { return r * w + c; }
    bool has(uint64_t mask, int i) const { return (mask >> i) & 1; }
};

SokoBoard parse_sokoban(const LevelGrid& level) {
    SokoBoard b;
    b.h = level.height;
    b.w = level.width;
    for (int r = 0; r < b.h; ++r) {
        for (int c = 0; c < b.w; ++c) {
            int i = b.cell(r, c);
            switch (level.at(r, c)) {
                case soko::wall: b.walls |= 1ULL << i; break;
                case soko::player:
                    b.player = i;
                    b.player_count++;
                    break;
                case soko::crate:
                    b.crates |= 1ULL << i;
                    b.crate_count++;
                    break;
                case soko::target:
                    b.targets |= 1ULL << i;
                    b.target_count++;
                    break;
                case soko::crate_on_target:
                    b.crates |= 1ULL << i;
                    b.targets |= 1ULL << i;
                    b.crate_count++;
                    b.target_count++;
                    break;
                case soko::player_on_target:
                    b.player = i;
                    b.player_count++;
                    b.targets |= 1ULL << i;
                    b.target_count++;
                    break;
                default: break;
            }
        }
    }
    b.target_dist.assign(static_cast<size_t>(b.h) * b.w, 0);
    for (int r = 0; r < b.h; ++r) {
        for (int c = 0; c < b.w; ++c) {
            int best = 1 << 20;
            for (int tr = 0; tr < b.h; ++tr) {
                for (int tc = 0; tc < b.w; ++tc) {
                    if (b.has(b.targets, b.cell(tr, tc))) {
                        best = std::min(best, std::abs(r - tr) + std::abs(c - tc));
                    }
                }
            }
            b.target_dist[static_cast<size_t>(b.cell(r, c))] = best;
        }
    }
    return b;
}

// Sum over crates of distance to the nearest target. Admissible and
// consistent for move-count cost: one move relocates at most one crate by
// one step.
int soko_heuristic(const SokoBoard& b, uint64_t crates) {
    int h = 0;
    uint64_t m = crates;
    while (m) {
        int i = std::countr_zero(m);
        m &= m - 1;
        h += b.target_dist[static_cast<size_t>(i)];
    }
    return h;
}

constexpr char kSokoMoveChar[4] = {'U', 'D', 'L', 'R'};
constexpr int kSokoDr[4] = {-1, 1, 0, 0};
constexpr int kSokoDc[4] = {0, 0, -1, 1};

uint64_t soko_key(int player, uint64_t crates) {
    return crates ^ (static_cast<uint64_t>(player) << 56);
}

}  // namespace

SokobanOutcome solve_sokoban_full(const LevelGrid& level, int budget) {
    if (level.cell_count() > 56) {
        throw std::invalid_argument("sokoban solver supports at most 56 cells");
    }
    SokoBoard b = parse_sokoban(level);
    if (b.player_count != 1 || b.crate_count != b.target_count || b.crate_count < 1) {
        return {PlayabilityResult::fail(PlayReason::bad_tile_counts), {}};
    }
    if ((b.crates & ~b.targets) == 0) {
        return {PlayabilityResult::pass(0), {}};
    }

    struct Node {
        int player;
        uint64_t crates;
        int g;
    };
    struct Open {
        int f, order;
        Node node;
        bool operator>(const Open& o) const {
            return f != o.f ? f > o.f : order > o.order;
        }
    };
    std::priority_queue<Open, std::vector<Open>, std::greater<Open>> open;
    std::unordered_map<uint64_t, int> best_g;
    // parent chain for move reconstruction: state key -> (parent key, move)
    std::unordered_map<uint64_t, std::pair<uint64_t, char>> parent;

    uint64_t start_key = soko_key(b.player, b.crates);
    best_g[start_key] = 0;
    int order = 0;
    open.push({soko_heuristic(b, b.crates), order++, {b.player, b.crates, 0}});
    int expanded = 0;

    while (!open.empty()) {
        Node n = open.top().node;
        open.pop();
        uint64_t nkey = soko_key(n.player, n.crates);
        auto it = best_g.find(nkey);
        if (it != best_g.end() && n.g > it->second) continue;  // stale entry
        if ((n.crates & ~b.targets) == 0) {
            // goal popped: g is optimal under the consistent heuristic
            std::string moves;
            for (uint64_t cur = nkey; cur != start_key;) {
                auto& [prev, mv] = parent[cur];
                moves.push_back(mv);
                cur = prev;
            }
            std::reverse(moves.begin(), moves.end());
            return {PlayabilityResult::pass(n.g), std::move(moves)};
        }
        if (++expanded > budget) {
            return {PlayabilityResult::fail(PlayReason::budget_exhausted), {}};
        }
        int pr = n.player / b.w, pc = n.player % b.w;
        for (int k = 0; k < 4; ++k) {
            int nr = pr + kSokoDr[k], nc = pc + kSokoDc[k];
            if (nr < 0 || nr >= b.h || nc < 0 || nc >= b.w) continue;
            int np = b.cell(nr, nc);
            if (b.has(b.walls, np)) continue;
            uint64_t crates = n.crates;
            if (b.has(crates, np)) {
                int br = nr + kSokoDr[k], bc = nc + kSokoDc[k];
                if (br < 0 || br >= b.h || bc < 0 || bc >= b.w) continue;
                int bp = b.cell(br, bc);
                if (b.has(b.walls, bp) || b.has(crates, bp)) continue;
                crates = (crates & ~(1ULL << np)) | (1ULL << bp);
            }
            uint64_t skey = soko_key(np, crates);
            int g = n.g + 1;
            auto [sit, fresh] = best_g.try_emplace(skey, g);
            if (!fresh && sit->second <= g) continue;
            sit->second = g;
            parent[skey] = {nkey, kSokoMoveChar[k]};
            open.push({g + soko_heuristic(b, crates), order++, {np, crates, g}});
        }
    }
    return {PlayabilityResult::fail(PlayReason::no_solution), {}};
}

PlayabilityResult solve_sokoban(const LevelGrid& level, int budget) {
    return solve_sokoban_full(level, budget).result;
}

// ---------------------------------------------------------------------------
// Danger Dave

namespace {

bool dave_solid(const LevelGrid& level, int r, int c) {
    if (!level.in_bounds(r, c)) return true;  // the level border acts as solid
    return level.at(r, c) == dave::solid;
}

bool dave_enterable(const LevelGrid& level, int r, int c) {
    return level.in_bounds(r, c) && level.at(r, c) != dave::solid;
}

bool dave_grounded(const LevelGrid& level, int r, int c) {
    return dave_solid(level, r + 1, c);
}

// Successors in a fixed order; spike entries are dropped (death).
void dave_successors(const LevelGrid& level, const DaveState& s, std::vector<DaveState>& out) {
    out.clear();
    auto push = [&](int r, int c, int rise) {
        uint8_t t = level.at(r, c);
        if (t == dave::spike) return;
        out.push_back({static_cast<int8_t>(r), static_cast<int8_t>(c),
                       static_cast<int8_t>(rise),
                       s.has_chalice || t == dave::chalice});
    };
    if (s.rise > 0) {
        bool any = false;
        for (int dx : {-1, 0, 1}) {
            if (dave_enterable(level, s.row - 1, s.col + dx)) {
                push(s.row - 1, s.col + dx, s.rise - 1);
                any = true;
            }
        }
        if (!any) push(s.row, s.col, 0);  // head bump: jump ends, tick spent
    } else if (dave_grounded(level, s.row, s.col)) {
        if (dave_enterable(level, s.row, s.col - 1)) push(s.row, s.col - 1, 0);
        if (dave_enterable(level, s.row, s.col + 1)) push(s.row, s.col + 1, 0);
        if (dave_enterable(level, s.row - 1, s.col)) push(s.row - 1, s.col, 1);  // jump
    } else {
        for (int dx : {-1, 0, 1}) {
            if (dave_enterable(level, s.row + 1, s.col + dx)) push(s.row + 1, s.col + dx, 0);
        }
    }
}

int dave_state_index(const LevelGrid& level, const DaveState& s) {
    int cell = s.row * level.width + s.col;
    return ((cell * 2) + s.rise) * 2 + (s.has_chalice ? 1 : 0);
}

}  // namespace

bool dave_transition_valid(const LevelGrid& level, const DaveState& a, const DaveState& b) {
    std::vector<DaveState> succ;
    dave_successors(level, a, succ);
    return std::find(succ.begin(), succ.end(), b) != succ.end();
}

DaveOutcome solve_dave_full(const LevelGrid& level, int budget) {
    if (count_tiles(level, dave::player) != 1 || count_tiles(level, dave::chalice) != 1 ||
        count_tiles(level, dave::door) != 1) {
        return {PlayabilityResult::fail(PlayReason::bad_tile_counts), {}};
    }
    DaveState start;
    std::pair<int, int> door_pos{-1, -1};
    for (int r = 0; r < level.height; ++r) {
        for (int c = 0; c < level.width; ++c) {
            if (level.at(r, c) == dave::player) {
                start.row = static_cast<int8_t>(r);
                start.col = static_cast<int8_t>(c);
            }
            if (level.at(r, c) == dave::door) door_pos = {r, c};
        }
    }

    const int state_count = level.height * level.width * 2 * 2;  // cell x rise x chalice
    std::vector<int> parent(static_cast<size_t>(state_count), -1);
    std::vector<DaveState> by_index(static_cast<size_t>(state_count));
    std::deque<DaveState> frontier;
    auto visit = [&](const DaveState& s, int from) {
        int i = dave_state_index(level, s);
        if (parent[static_cast<size_t>(i)] != -1) return false;
        parent[static_cast<size_t>(i)] = from;
        by_index[static_cast<size_t>(i)] = s;
        frontier.push_back(s);
        return true;
    };
    visit(start, dave_state_index(level, start));

    int expanded = 0;
    std::vector<DaveState> succ;
    while (!frontier.empty()) {
        DaveState s = frontier.front();
        frontier.pop_front();
        if (++expanded > budget) {
            return {PlayabilityResult::fail(PlayReason::budget_exhausted), {}};
        }
        int si = dave_state_index(level, s);
        dave_successors(level, s, succ);
        for (const DaveState& n : succ) {
            if (!visit(n, si)) continue;
            if (n.has_chalice && n.row == door_pos.first && n.col == door_pos.second) {
                std::vector<DaveState> path;
                int cur = dave_state_index(level, n);
                while (true) {
                    path.push_back(by_index[static_cast<size_t>(cur)]);
                    int prev = parent[static_cast<size_t>(cur)];
                    if (prev == cur) break;
                    cur = prev;
                }
                std::reverse(path.begin(), path.end());
                int length = static_cast<int>(path.size()) - 1;
                return {PlayabilityResult::pass(length), std::move(path)};
            }
        }
    }
    return {PlayabilityResult::fail(PlayReason::no_solution), {}};
}

PlayabilityResult solve_dave(const LevelGrid& level, int budget) {
    return solve_dave_full(level, budget).result;
}

PlayabilityResult check_playable(const GameSpec& game, const LevelGrid& level) {
    if (level.height != game.level_height || level.width != game.level_width) {
        throw std::invalid_argument("level is " + std::to_string(level.height) + "x" +
                                    std::to_string(level.width) + ", game '" + game.id +
                                    "' expects " + std::to_string(game.level_height) + "x" +
                                    std::to_string(game.level_width));
    }
    if (game.id == "zelda") return check_zelda(level);
    if (game.id == "sokoban") return solve_sokoban(level, game.solver_budget);
    if (game.id == "dave") return solve_dave(level, game.solver_budget);
    throw std::invalid_argument("no playability checker for game '" + game.id + "'");
}

}  // namespace pod
