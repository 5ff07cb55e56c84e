#include "pod/eval.h"

#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "pod/digest.h"
#include "pod/errors.h"
#include "pod/podgen.h"

namespace pod {

std::vector<LevelGrid> dedup_unique(const std::vector<LevelGrid>& levels,
                                    const std::vector<LevelGrid>& goal_set, double threshold) {
    std::vector<LevelGrid> kept;
    for (const LevelGrid& level : levels) {
        bool unique = true;
        for (const LevelGrid& goal : goal_set) {
            if (normalized_hamming(level, goal) < threshold) {
                unique = false;
                break;
            }
        }
        if (unique) {
            for (const LevelGrid& other : kept) {
                if (normalized_hamming(level, other) < threshold) {
                    unique = false;
                    break;
                }
            }
        }
        if (unique) kept.push_back(level);
    }
    return kept;
}

double duplicate_pct(const std::vector<LevelGrid>& levels) {
    if (levels.empty()) return 0.0;
    std::unordered_set<std::string> seen;
    int twins = 0;
    for (const LevelGrid& level : levels) {
        std::string key(level.cells.begin(), level.cells.end());
        key += '\x1f';
        key += std::to_string(level.width);
        if (!seen.insert(std::move(key)).second) twins++;
    }
    return 100.0 * twins / static_cast<double>(levels.size());
}

MeanStd mean_and_sample_std(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("mean of empty list");
    MeanStd out;
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return out;
}

namespace {

std::string eval_config_digest(const GameSpec& game, const GenerationConfig& config, int trials,
                               const std::vector<LevelGrid>& goal_set, uint64_t master_seed,
                               size_t network_count) {
    const nlohmann::json canon = {
        {"game", game.id},
        {"crop", config.obs.crop_size},
        {"traversal", to_string(config.traversal)},
        {"max_passes", config.max_passes},
        {"trials", trials},
        {"master_seed", master_seed},
        {"goal_set", goal_set_hash(goal_set, game.alphabet)},
        {"networks", network_count},
    };
    return to_hex(fnv1a64(canon.dump()));
}

}  // namespace

MetricsReport evaluate(const std::vector<const Network*>& networks, const GameSpec& game,
                       const GenerationConfig& config, int trials,
                       const std::vector<LevelGrid>& goal_set, uint64_t master_seed) {
    if (networks.empty()) throw std::invalid_argument("evaluate needs at least one network");
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    const auto t0 = std::chrono::steady_clock::now();

    MetricsReport report;
    report.game = game.id;
    report.trials = trials;
    report.config_digest =
        eval_config_digest(game, config, trials, goal_set, master_seed, networks.size());
    report.single_seed = networks.size() == 1;

    for (size_t k = 0; k < networks.size(); ++k) {
        const auto traces = batch_generate(*networks[k], game, config, trials,
                                           derive_seed(master_seed, static_cast<uint64_t>(k)));
        std::vector<LevelGrid> playable;
        for (const auto& trace : traces) {
            if (trace.terminated_by == TerminatedBy::playable) {
                playable.push_back(trace.final_level);
            }
        }
        const double denom = static_cast<double>(trials);
        report.playable_pct.push_back(100.0 * static_cast<double>(playable.size()) / denom);
        report.playable_unique_pct.push_back(
            100.0 * static_cast<double>(dedup_unique(playable, goal_set).size()) / denom);
        report.duplicate_pct.push_back(duplicate_pct(playable));
    }

    report.playable = mean_and_sample_std(report.playable_pct);
    report.playable_unique = mean_and_sample_std(report.playable_unique_pct);
    report.duplicate = mean_and_sample_std(report.duplicate_pct);
    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

void save_metrics_report(const MetricsReport& report, const std::string& path) {
    // runtime_seconds is deliberately omitted: identical configs must produce
    // byte-identical report files.
    const nlohmann::json j = {
        {"game", report.game},
        {"config_digest", report.config_digest},
        {"trials", report.trials},
        {"networks", report.playable_pct.size()},
        {"single_seed", report.single_seed},
        {"per_network",
         {{"playable_pct", report.playable_pct},
          {"playable_unique_pct", report.playable_unique_pct},
          {"duplicate_pct", report.duplicate_pct}}},
        {"aggregate",
         {{"playable", {{"mean", report.playable.mean}, {"std", report.playable.std}}},
          {"playable_unique",
           {{"mean", report.playable_unique.mean}, {"std", report.playable_unique.std}}},
          {"duplicate", {{"mean", report.duplicate.mean}, {"std", report.duplicate.std}}}}},
    };
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed for '" + path + "'");
}

void export_level_vectors(const std::vector<LevelGrid>& generated,
                          const std::vector<LevelGrid>& goal_set, const TileAlphabet& alphabet,
                          const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");

    int cells = -1;
    auto check_dims = [&](const LevelGrid& level) {
        if (cells == -1) cells = level.cell_count();
        if (level.cell_count() != cells) {
            throw std::invalid_argument("level vectors need uniform dimensions");
        }
    };
    for (const auto& g : goal_set) check_dims(g);
    for (const auto& g : generated) check_dims(g);

    const int channels = static_cast<int>(alphabet.size());
    const int columns = (cells == -1 ? 0 : cells) * channels;
    for (int c = 0; c < columns; ++c) out << 'c' << c << ',';
    out << "label\n";

    auto write_row = [&](const LevelGrid& level, const char* label) {
        for (int i = 0; i < level.cell_count(); ++i) {
            const int tile = level.cells[static_cast<size_t>(i)];
            for (int c = 0; c < channels; ++c) out << (c == tile ? "1," : "0,");
        }
        out << label << '\n';
    };
    for (const auto& g : goal_set) write_row(g, "goal");
    for (const auto& g : generated) write_row(g, "generated");
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace pod
