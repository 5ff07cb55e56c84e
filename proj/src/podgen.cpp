#include "pod/podgen.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "pod/digest.h"
#include "pod/errors.h"

namespace pod {

Traversal traversal_from_string(const std::string& s) {
    if (s == "sequential") return Traversal::sequential;
    if (s == "random") return Traversal::random_permutation;
    throw std::invalid_argument("unknown traversal '" + s + "' (want sequential|random)");
}

const char* to_string(Traversal t) {
    return t == Traversal::sequential ? "sequential" : "random";
}

ObservationSpec::ObservationSpec(int crop, int channels)
    : crop_size(crop), channel_count(channels) {
    if (crop < 3 || crop % 2 == 0) {
        throw std::invalid_argument("crop size must be odd and >= 3, got " +
                                    std::to_string(crop));
    }
    if (channels < 3) {
        throw std::invalid_argument("observation needs at least 2 tiles + border channel");
    }
}

ObservationSpec ObservationSpec::for_game(const GameSpec& game, int crop) {
    return ObservationSpec(crop, game.alphabet.size() + 1);
}

LevelGrid sample_start_level(const GameSpec& game, Rng& rng) {
    LevelGrid level(game.level_height, game.level_width);
    for (auto& cell : level.cells) {
        cell = static_cast<uint8_t>(rng.weighted_index(game.noise_weights));
    }
    return level;
}

size_t select_goal(const LevelGrid& start, const std::vector<LevelGrid>& goals) {
    if (goals.empty()) throw std::invalid_argument("select_goal: empty goal set");
    size_t best = 0;
    int best_dist = hamming_distance(start, goals[0]);
    for (size_t i = 1; i < goals.size(); ++i) {
        int d = hamming_distance(start, goals[i]);
        if (d < best_dist) {
            best = i;
            best_dist = d;
        }
    }
    return best;
}

Trajectory destroy_trajectory(const LevelGrid& goal, const LevelGrid& start, Traversal traversal,
                              Rng& rng) {
    if (goal.height != start.height || goal.width != start.width) {
        throw std::invalid_argument("destroy_trajectory: dimension mismatch");
    }
    Trajectory traj{start, goal, {}};
    std::vector<int> order(goal.cell_count());
    std::iota(order.begin(), order.end(), 0);
    if (traversal == Traversal::random_permutation) rng.shuffle(order);

    LevelGrid level = goal;
    int remaining = hamming_distance(level, start);
    traj.steps.reserve(static_cast<size_t>(remaining));
    for (int loc : order) {
        if (remaining == 0) break;
        int r = loc / level.width, c = loc % level.width;
        uint8_t repair = level.at(r, c);
        uint8_t destroy = start.at(r, c);
        if (repair != destroy) remaining--;
        level.set(r, c, destroy);
        traj.steps.push_back({r, c, destroy, repair});
    }
    return traj;
}

std::vector<TrainingExample> trajectory_to_examples(const Trajectory& traj) {
    std::vector<TrainingExample> out;
    out.reserve(traj.steps.size());
    LevelGrid level = traj.goal_level;
    for (const auto& step : traj.steps) {
        level.set(step.row, step.col, step.destroy_value);
        out.push_back({level, step.row, step.col, step.repair_value});
    }
    return out;
}

void crop_observation(const LevelGrid& level, int row, int col, const ObservationSpec& spec,
                      Observation& out) {
    if (!level.in_bounds(row, col)) {
        throw std::invalid_argument("crop_observation: center outside grid");
    }
    const int crop = spec.crop_size, channels = spec.channel_count;
    const int half = crop / 2;
    out.crop = crop;
    out.channels = channels;
    out.data.assign(static_cast<size_t>(crop) * crop * channels, 0.0f);
    for (int y = 0; y < crop; ++y) {
        const int gr = row - half + y;
        for (int x = 0; x < crop; ++x) {
            const int gc = col - half + x;
            const int ch = level.in_bounds(gr, gc) ? level.at(gr, gc) : channels - 1;
            out.data[static_cast<size_t>((y * crop + x) * channels + ch)] = 1.0f;
        }
    }
}

Observation crop_observation(const LevelGrid& level, int row, int col,
                             const ObservationSpec& spec) {
    Observation out;
    crop_observation(level, row, col, spec, out);
    return out;
}

std::string goal_set_hash(const std::vector<LevelGrid>& goals, const TileAlphabet& alphabet) {
    uint64_t h = fnv1a64("");
    for (const auto& g : goals) {
        h = fnv1a64(serialize_level(g, alphabet), h);
        h = fnv1a64(std::string(1, '\0'), h);
    }
    return to_hex(h);
}

Dataset build_dataset(const GameSpec& game, const std::vector<LevelGrid>& goals,
                      const DatasetConfig& config) {
    if (goals.empty()) throw std::invalid_argument("build_dataset: empty goal set");
    if (config.target_example_count == 0) {
        throw std::invalid_argument("build_dataset: target example count must be > 0");
    }
    for (size_t i = 0; i < goals.size(); ++i) {
        auto res = check_playable(game, goals[i]);
        if (!res.playable) {
            throw std::invalid_argument("goal level " + std::to_string(i) +
                                        " is unplayable (" + to_string(res.reason) +
                                        "); corrupt goal set");
        }
    }

    Dataset ds;
    ds.game_id = game.id;
    ds.seed = config.seed;
    ds.traversal = config.traversal;
    ds.goal_set_hash = goal_set_hash(goals, game.alphabet);

    int consecutive_empty = 0;
    for (uint64_t t = 0; ds.examples.size() < config.target_example_count; ++t) {
        Rng rng(derive_seed(config.seed, t));
        LevelGrid start = sample_start_level(game, rng);
        const LevelGrid& goal = goals[select_goal(start, goals)];
        Trajectory traj = destroy_trajectory(goal, start, config.traversal, rng);
        ds.trajectories++;
        if (traj.steps.empty()) {
            if (++consecutive_empty > 10000) {
                throw std::runtime_error(
                    "build_dataset: noise distribution keeps reproducing goal levels exactly; "
                    "no training signal");
            }
            continue;
        }
        consecutive_empty = 0;
        auto examples = trajectory_to_examples(traj);
        ds.examples.insert(ds.examples.end(), std::make_move_iterator(examples.begin()),
                           std::make_move_iterator(examples.end()));
    }
    return ds;
}

void save_dataset_jsonl(const Dataset& dataset, const TileAlphabet& alphabet,
                        const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    nlohmann::json header = {{"game", dataset.game_id},
                             {"goal_set_hash", dataset.goal_set_hash},
                             {"seed", dataset.seed},
                             {"traversal", to_string(dataset.traversal)},
                             {"count", dataset.examples.size()}};
    out << header.dump() << '\n';
    for (const auto& ex : dataset.examples) {
        nlohmann::json line = {{"level", serialize_level(ex.level, alphabet)},
                               {"row", ex.row},
                               {"col", ex.col},
                               {"target", std::string(1, alphabet.char_of(ex.target))}};
        out << line.dump() << '\n';
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

Dataset load_dataset_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw IoError("dataset '" + path + "' is empty");

    Dataset ds;
    try {
        nlohmann::json header = nlohmann::json::parse(line);
        ds.game_id = header.at("game").get<std::string>();
        ds.seed = header.at("seed").get<uint64_t>();
        ds.traversal = traversal_from_string(header.at("traversal").get<std::string>());
        ds.goal_set_hash = header.at("goal_set_hash").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("dataset '" + path + "': bad header: " + e.what());
    }
    const GameSpec& game = game_by_id(ds.game_id);

    size_t line_no = 2;  // header was line 1
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            TrainingExample ex;
            ex.level = parse_level(j.at("level").get<std::string>(), game.alphabet);
            ex.row = j.at("row").get<int>();
            ex.col = j.at("col").get<int>();
            std::string target = j.at("target").get<std::string>();
            int idx = target.size() == 1 ? game.alphabet.index_of(target[0]) : -1;
            if (idx < 0 || !ex.level.in_bounds(ex.row, ex.col)) {
                throw std::invalid_argument("bad target or location");
            }
            ex.target = static_cast<uint8_t>(idx);
            ds.examples.push_back(std::move(ex));
        } catch (const std::exception& e) {
            throw std::invalid_argument("dataset '" + path + "' line " +
                                        std::to_string(line_no) + ": " + e.what());
        }
        line_no++;
    }
    return ds;
}

std::vector<LevelGrid> load_goal_dir(const std::string& dir, const GameSpec& game) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        throw std::invalid_argument("goal directory '" + dir + "' does not exist");
    }
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") {
            names.push_back(entry.path().string());
        }
    }
    std::sort(names.begin(), names.end());
    if (names.empty()) {
        throw std::invalid_argument("goal directory '" + dir + "' has no .txt levels");
    }

    std::vector<LevelGrid> goals;
    for (const std::string& name : names) {
        std::ifstream in(name, std::ios::binary);
        if (!in) throw IoError("cannot open '" + name + "'");
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        LevelGrid level;
        try {
            level = parse_level(text, game.alphabet);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("goal '" + name + "': " + e.what());
        }
        if (level.height != game.level_height || level.width != game.level_width) {
            throw std::invalid_argument("goal '" + name + "' is " + std::to_string(level.height) +
                                        "x" + std::to_string(level.width) + ", '" + game.id +
                                        "' expects " + std::to_string(game.level_height) + "x" +
                                        std::to_string(game.level_width));
        }
        goals.push_back(std::move(level));
    }
    return goals;
}

}  // namespace pod
