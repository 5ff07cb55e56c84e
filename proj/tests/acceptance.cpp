// Acceptance gates for the path-of-destruction pipeline.
//
// Each criterion prints exactly one PASS/FAIL line (plus indented detail)
// and the process exits non-zero if any selected criterion fails.
//
//   acceptance            run everything
//   acceptance --only fast      cheap criteria only (seconds to ~3 min)
//   acceptance --only sweeps    desk-scale experiment gates (tens of minutes)
//   acceptance --only c7        one criterion by number
//
// Desk-scale knobs (16/16/32 channels, 60 epochs, 20k examples, 500 trials,
// 2 networks) are pinned here; they are the small-budget operating point the
// directional gates are calibrated for.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "pod/eval.h"
#include "pod/games.h"
#include "pod/generator.h"
#include "pod/neuralnet.h"
#include "pod/podgen.h"
#include "pod/rng.h"
#include "pod/tilemap.h"

#include "soko_oracle.h"
#include "test_util.h"

using namespace pod;

namespace {

constexpr uint64_t kMasterSeed = 20260814;

// desk scale
constexpr std::array<int, 3> kDeskChannels = {16, 16, 32};
constexpr int kDeskEpochs = 60;
constexpr size_t kDeskExamples = 20000;
constexpr int kDeskTrials = 500;
constexpr int kDeskNets = 2;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

bool check(bool ok, const char* what) {
    if (!ok) std::printf("    gate failed: %s\n", what);
    return ok;
}

// ---------------------------------------------------------------------------
// c1: destroy/repair trajectories replay exactly in both directions.
// 1000 random (goal, start) pairs per game, alternating traversals. Exact.

bool c1_trajectory_reversibility() {
    const Timer timer;
    bool ok = true;
    for (const std::string& id : game_ids()) {
        const GameSpec& game = game_by_id(id);
        Rng rng(derive_seed(kMasterSeed, 101 + static_cast<uint64_t>(game.id[0])));
        int bad = 0;
        for (int i = 0; i < 1000; ++i) {
            const LevelGrid goal = sample_start_level(game, rng);
            const LevelGrid start = sample_start_level(game, rng);
            const Traversal traversal =
                i % 2 == 0 ? Traversal::random_permutation : Traversal::sequential;
            const Trajectory traj = destroy_trajectory(goal, start, traversal, rng);

            LevelGrid forward = goal;
            for (const TrajectoryStep& s : traj.steps) forward.set(s.row, s.col, s.destroy_value);
            LevelGrid backward = start;
            for (auto it = traj.steps.rbegin(); it != traj.steps.rend(); ++it) {
                backward.set(it->row, it->col, it->repair_value);
            }
            if (forward != start || backward != goal || traj.start_level != start ||
                traj.goal_level != goal) {
                bad++;
            }
        }
        std::printf("    %s: 1000 pairs, %d mismatches\n", id.c_str(), bad);
        ok &= check(bad == 0, "bit-exact replay");
    }
    ok &= check(timer.seconds() < 10.0, "runtime < 10 s");
    return ok;
}

// ---------------------------------------------------------------------------
// c2: analytic gradients vs central finite differences, double precision,
// reduced network (channels 4/4/8, crop 5), h = 1e-5, relative error < 1e-3
// on every parameter of >= 3 random batches.

bool c2_gradient_check() {
    const Timer timer;
    const GameSpec& zelda = game_by_id("zelda");
    NetworkSpec spec;
    spec.crop = 5;
    spec.in_channels = 9;
    spec.action_count = 8;
    spec.conv_channels = {4, 4, 8};

    const ObservationSpec obs = ObservationSpec::for_game(zelda, 5);
    Rng rng(derive_seed(kMasterSeed, 2));
    bool ok = true;

    for (int b = 0; b < 3; ++b) {
        NetworkT<double> net = init_network_t<double>(spec, derive_seed(kMasterSeed, 20 + b));
        BatchT<double> batch;
        for (int e = 0; e < 8; ++e) {
            const LevelGrid level = sample_start_level(zelda, rng);
            const int row = static_cast<int>(rng.uniform_index(7));
            const int col = static_cast<int>(rng.uniform_index(11));
            batch_append(batch, level, row, col, static_cast<int>(rng.uniform_index(8)), obs);
        }

        NetParams<double> grads;
        NetScratch<double> scratch;
        loss_and_gradients(net, batch, grads, scratch);

        const double h = 1e-5;
        double worst = 0.0;
        int checked = 0;
        auto params = net.params.arrays();
        auto grad_arrays = grads.arrays();
        for (size_t a = 0; a < params.size(); ++a) {
            for (size_t i = 0; i < params[a]->size(); ++i) {
                double& w = (*params[a])[i];
                const double saved = w;
                w = saved + h;
                const double up = batch_loss(net, batch, scratch);
                w = saved - h;
                const double down = batch_loss(net, batch, scratch);
                w = saved;
                const double fd = (up - down) / (2 * h);
                const double an = (*grad_arrays[a])[i];
                const double denom = std::max(std::abs(fd), std::abs(an));
                if (denom > 1e-10) worst = std::max(worst, std::abs(fd - an) / denom);
                checked++;
            }
        }
        std::printf("    batch %d: %d params, worst relative error %.3e\n", b, checked, worst);
        ok &= check(worst < 1e-3, "relative error < 1e-3");
        ok &= check(checked > 200, "parameter coverage");
    }
    ok &= check(timer.seconds() < 60.0, "runtime < 60 s");
    return ok;
}

// ---------------------------------------------------------------------------
// c3: Sokoban A* verdict equals exhaustive BFS on 500 random 5x5 instances
// with <= 2 crates. Exact agreement; optimal lengths must match too.

bool c3_solver_oracle() {
    const Timer timer;
    const GameSpec& soko = game_by_id("sokoban");
    Rng rng(derive_seed(kMasterSeed, 3));

    int solvable = 0, verdict_mismatch = 0, length_mismatch = 0;
    for (int i = 0; i < 500; ++i) {
        const LevelGrid level = random_soko_instance(rng, 1 + i % 2);
        const SokobanOutcome astar = solve_sokoban_full(level, soko.solver_budget);
        const std::optional<int> oracle = soko_bfs_oracle(level);
        if (astar.result.playable != oracle.has_value()) verdict_mismatch++;
        if (astar.result.playable && oracle) {
            solvable++;
            if (*astar.result.solution_length != *oracle) length_mismatch++;
        }
    }
    std::printf("    500 instances, %d solvable, %d verdict / %d length mismatches\n", solvable,
                verdict_mismatch, length_mismatch);
    bool ok = check(verdict_mismatch == 0, "verdict agreement");
    ok &= check(length_mismatch == 0, "optimal length agreement");
    ok &= check(solvable > 20, "instance mix exercises the solver");
    ok &= check(timer.seconds() < 120.0, "runtime < 2 min");
    return ok;
}

// ---------------------------------------------------------------------------
// c4: training on 64 copies of one example reaches loss < 0.01 within 50
// epochs, with strictly decreasing loss over the first 10 epochs.

bool c4_overfit_sanity() {
    const Timer timer;
    const GameSpec& zelda = game_by_id("zelda");
    Rng rng(derive_seed(kMasterSeed, 4));
    const LevelGrid level = sample_start_level(zelda, rng);
    std::vector<TrainingExample> examples(64, TrainingExample{level, 3, 5, 4});

    NetworkSpec spec;
    spec.conv_channels = kDeskChannels;
    Network net = init_network(spec, derive_seed(kMasterSeed, 40));
    TrainConfig config;  // batch 64: one optimizer step per epoch
    config.epochs = 50;
    config.shuffle_seed = derive_seed(kMasterSeed, 41);

    const auto losses = train(net, examples, ObservationSpec::for_game(zelda, 5), config);
    double best = losses[0];
    int first_below = -1;
    for (size_t i = 0; i < losses.size(); ++i) {
        best = std::min(best, losses[i]);
        if (first_below < 0 && losses[i] < 0.01) first_below = static_cast<int>(i);
    }
    bool decreasing = true;
    for (int i = 1; i < 10; ++i) decreasing &= losses[i] < losses[i - 1];

    std::printf("    loss %.4f -> %.6f, < 0.01 first reached at epoch %d\n", losses.front(),
                losses.back(), first_below);
    bool ok = check(first_below >= 0 && first_below < 50, "loss < 0.01 within 50 epochs");
    ok &= check(decreasing, "first 10 epoch losses strictly decreasing");
    ok &= check(timer.seconds() < 60.0, "runtime < 1 min");
    return ok;
}

// ---------------------------------------------------------------------------
// Desk-scale experiment cells, shared by c5-c8. Each cell trains kDeskNets
// networks on a fresh dataset and evaluates kDeskTrials episodes per network.
// Cells are memoized so criteria can share them.

struct CellSpec {
    std::string name;
    std::string game_id;
    std::string goals_subdir;
    int obs;
    uint64_t ordinal;  // seed stream: derive_seed(kMasterSeed, 1000 + ordinal)
};

const CellSpec kObs5Cell = {"obs5", "zelda", "zelda5", 5, 0};
const CellSpec kObs15Cell = {"obs15", "zelda", "zelda5", 15, 2};
const CellSpec kGoal1Cell = {"goal1", "zelda", "zelda1", 5, 3};
const CellSpec kGoal50Cell = {"goal50", "zelda", "zelda50", 5, 4};
const CellSpec kSokobanCell = {"sokoban", "sokoban", "sokoban5", 3, 5};
const CellSpec kDaveCell = {"dave", "dave", "dave5", 5, 6};

const MetricsReport& run_cell(const CellSpec& cell) {
    static std::map<std::string, MetricsReport> cache;
    const auto hit = cache.find(cell.name);
    if (hit != cache.end()) return hit->second;

    const Timer timer;
    const GameSpec& game = game_by_id(cell.game_id);
    const uint64_t base = derive_seed(kMasterSeed, 1000 + cell.ordinal);
    const auto goals = load_goal_dir(fixtures_dir() + "/" + cell.goals_subdir, game);

    DatasetConfig dcfg;
    dcfg.target_example_count = kDeskExamples;
    dcfg.seed = derive_seed(base, 0);
    const Dataset ds = build_dataset(game, goals, dcfg);

    NetworkSpec spec;
    spec.crop = cell.obs;
    spec.in_channels = static_cast<int>(game.alphabet.size()) + 1;
    spec.action_count = static_cast<int>(game.alphabet.size());
    spec.conv_channels = kDeskChannels;
    const ObservationSpec obs = ObservationSpec::for_game(game, cell.obs);

    std::vector<Network> nets;
    for (int k = 0; k < kDeskNets; ++k) {
        Network net = init_network(spec, derive_seed(base, 1 + 2 * static_cast<uint64_t>(k)));
        TrainConfig tcfg;
        tcfg.epochs = kDeskEpochs;
        tcfg.shuffle_seed = derive_seed(base, 2 + 2 * static_cast<uint64_t>(k));
        train(net, ds.examples, obs, tcfg, [&](int epoch, double loss) {
            if (epoch % 20 == 19) {
                std::fprintf(stderr, "      [%s net%d] epoch %d loss %.4f\n", cell.name.c_str(),
                             k, epoch + 1, loss);
            }
        });
        nets.push_back(std::move(net));
    }
    std::vector<const Network*> net_ptrs;
    for (const auto& n : nets) net_ptrs.push_back(&n);

    GenerationConfig gcfg(obs);
    const MetricsReport report =
        evaluate(net_ptrs, game, gcfg, kDeskTrials, goals, derive_seed(base, 1000));
    std::printf("    cell %s: playable %.2f±%.2f, unique %.2f±%.2f, dup %.2f±%.2f (%.0fs)\n",
                cell.name.c_str(), report.playable.mean, report.playable.std,
                report.playable_unique.mean, report.playable_unique.std, report.duplicate.mean,
                report.duplicate.std, timer.seconds());
    std::fflush(stdout);
    return cache.emplace(cell.name, report).first->second;
}

// c5: larger observations make more playable levels; smaller observations
// make more unique ones. Ordering of means across the desk networks.

bool c5_observation_size_direction() {
    const MetricsReport& obs5 = run_cell(kObs5Cell);
    const MetricsReport& obs15 = run_cell(kObs15Cell);
    bool ok = check(obs15.playable.mean > obs5.playable.mean,
                    "playable(obs15) > playable(obs5)");
    ok &= check(obs5.playable_unique.mean > obs15.playable_unique.mean,
                "unique(obs5) > unique(obs15)");
    return ok;
}

// c6: one goal maximizes playability; fifty goals maximize uniqueness.
// The 5-goal midpoint reuses the obs5 cell (identical configuration).

bool c6_goal_set_size_direction() {
    const MetricsReport& goal1 = run_cell(kGoal1Cell);
    const MetricsReport& goal5 = run_cell(kObs5Cell);
    const MetricsReport& goal50 = run_cell(kGoal50Cell);
    bool ok = check(goal1.playable.mean > goal5.playable.mean,
                    "playable(goal1) > playable(goal5)");
    ok &= check(goal50.playable_unique.mean > goal1.playable_unique.mean,
                "unique(goal50) > unique(goal1)");
    return ok;
}

// c7: with the 50-goal configuration, exact duplicates among playable
// outputs stay under 10%.

bool c7_duplicate_rate() {
    const MetricsReport& goal50 = run_cell(kGoal50Cell);
    return check(goal50.duplicate.mean < 10.0, "duplicate rate < 10%");
}

// c8: the pipeline generalizes: Sokoban (obs 3) and Dave (obs 5) each
// produce at least one playable-and-unique level in 500 trials.

bool c8_multi_game_smoke() {
    bool ok = true;
    for (const CellSpec* cell : {&kSokobanCell, &kDaveCell}) {
        const MetricsReport& report = run_cell(*cell);
        double best = 0.0;
        for (double pct : report.playable_unique_pct) best = std::max(best, pct);
        ok &= check(best > 0.0, "at least one playable-and-unique level");
    }
    return ok;
}

// ---------------------------------------------------------------------------
// c9: identical CLI invocations produce byte-identical artifacts: dataset
// files, checkpoints (weights + manifest), traces, and metric reports.

int run_quiet(const std::string& cmd) {
    const int raw = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

bool c9_determinism() {
    const Timer timer;
    const std::string root = fresh_tmp_dir("acceptance_det");
    const std::string cli = pod_cli();
    const std::string fx = fixtures_dir();
    bool ok = true;

    for (const char* run : {"a", "b"}) {
        const std::string r = root + "/" + run;
        ok &= check(run_quiet(cli + " dataset --game zelda --goals " + fx +
                              "/zelda5 --count 400 --seed 5 --out " + r + "/ds") == 0,
                    "dataset command succeeds");
        ok &= check(run_quiet(cli + " train --dataset " + r +
                              "/ds/dataset.jsonl --obs 5 --channels 8,8,16 --epochs 3 --seed 7 "
                              "--out " +
                              r + "/net") == 0,
                    "train command succeeds");
        ok &= check(run_quiet(cli + " generate --checkpoint " + r +
                              "/net --trials 12 --seed 3 --out " + r + "/gen") == 0,
                    "generate command succeeds");
        ok &= check(run_quiet(cli + " eval --game zelda --checkpoints " + r +
                              "/net --goals " + fx + "/zelda5 --trials 12 --seed 3 --out " + r +
                              "/eval") == 0,
                    "eval command succeeds");
    }
    if (!ok) return false;

    for (const char* rel :
         {"ds/dataset.jsonl", "ds/files.json", "net/weights.bin", "net/manifest.json",
          "net/loss.csv", "gen/traces.jsonl", "eval/report.json"}) {
        const std::string a = slurp(root + "/a/" + rel);
        const bool same = !a.empty() && a == slurp(root + "/b/" + rel);
        if (!same) std::printf("    differs or empty: %s\n", rel);
        ok &= check(same, "byte-identical artifact");
    }
    std::printf("    7 artifacts byte-compared across two identical runs\n");
    ok &= check(timer.seconds() < 300.0, "runtime < 5 min");
    return ok;
}

// ---------------------------------------------------------------------------
// c10: metric algebra. unique <= playable on a live report, dedup output
// passes the pairwise >= 0.10 post-scan, and mean/std match hand arithmetic.

bool c10_metric_algebra() {
    bool ok = true;

    const MeanStd ms = mean_and_sample_std({10.0, 20.0, 30.0});
    std::printf("    mean/std of {10,20,30}: %.1f ± %.1f\n", ms.mean, ms.std);
    ok &= check(ms.mean == 20.0 && ms.std == 10.0, "10/20/30 -> 20 ± 10 exact");

    // random synthetic levels + clumped near-duplicates through the filter
    Rng rng(derive_seed(kMasterSeed, 10));
    const GameSpec& zelda = game_by_id("zelda");
    std::vector<LevelGrid> goals, levels;
    for (int i = 0; i < 5; ++i) goals.push_back(sample_start_level(zelda, rng));
    for (int i = 0; i < 80; ++i) levels.push_back(sample_start_level(zelda, rng));
    for (int i = 0; i < 20; ++i) {
        LevelGrid near = levels[static_cast<size_t>(i)];
        near.cells[static_cast<size_t>(i)] ^= 1;
        levels.push_back(near);
    }
    const auto kept = dedup_unique(levels, goals);
    ok &= check(kept.size() <= levels.size(), "filter output is a subset");
    bool post_scan = true;
    for (size_t i = 0; i < kept.size(); ++i) {
        for (const auto& goal : goals) post_scan &= normalized_hamming(kept[i], goal) >= 0.10;
        for (size_t j = 0; j < i; ++j) post_scan &= normalized_hamming(kept[i], kept[j]) >= 0.10;
    }
    std::printf("    dedup: %zu in -> %zu kept, pairwise post-scan %s\n", levels.size(),
                kept.size(), post_scan ? "clean" : "VIOLATED");
    ok &= check(post_scan, "pairwise >= 0.10 post-scan");

    // live report: per-network unique never exceeds playable
    const auto fixture_goals = load_goal_dir(fixtures_dir() + "/zelda5", zelda);
    DatasetConfig dcfg;
    dcfg.target_example_count = 400;
    dcfg.seed = derive_seed(kMasterSeed, 11);
    const Dataset ds = build_dataset(zelda, fixture_goals, dcfg);
    NetworkSpec spec;
    spec.conv_channels = {8, 8, 16};
    Network net = init_network(spec, derive_seed(kMasterSeed, 12));
    TrainConfig tcfg;
    tcfg.epochs = 4;
    tcfg.shuffle_seed = derive_seed(kMasterSeed, 13);
    const ObservationSpec obs = ObservationSpec::for_game(zelda, 5);
    train(net, ds.examples, obs, tcfg);
    const MetricsReport report = evaluate({&net}, zelda, GenerationConfig(obs), 60, fixture_goals,
                                          derive_seed(kMasterSeed, 14));
    std::printf("    live report: playable %.2f%%, unique %.2f%%\n", report.playable_pct[0],
                report.playable_unique_pct[0]);
    ok &= check(report.playable_unique_pct[0] <= report.playable_pct[0], "unique <= playable");
    return ok;
}

// ---------------------------------------------------------------------------

struct Criterion {
    int id;
    const char* name;
    const char* group;  // "fast" | "sweeps"
    bool (*run)();
};

const Criterion kCriteria[] = {
    {1, "trajectory-reversibility", "fast", c1_trajectory_reversibility},
    {2, "gradient-check", "fast", c2_gradient_check},
    {3, "solver-oracle-equivalence", "fast", c3_solver_oracle},
    {4, "overfit-sanity", "fast", c4_overfit_sanity},
    {5, "observation-size-direction", "sweeps", c5_observation_size_direction},
    {6, "goal-set-size-direction", "sweeps", c6_goal_set_size_direction},
    {7, "duplicate-rate", "sweeps", c7_duplicate_rate},
    {8, "multi-game-smoke", "sweeps", c8_multi_game_smoke},
    {9, "determinism", "fast", c9_determinism},
    {10, "metric-algebra", "fast", c10_metric_algebra},
};

}  // namespace

int main(int argc, char** argv) {
    std::string only = "all";
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--only" && i + 1 < argc) {
            only = argv[++i];
        } else {
            std::fprintf(stderr, "usage: %s [--only fast|sweeps|all|c<N>]\n", argv[0]);
            return 2;
        }
    }

    int ran = 0, passed = 0;
    for (const Criterion& c : kCriteria) {
        const bool selected = only == "all" || only == c.group ||
                              only == ("c" + std::to_string(c.id));
        if (!selected) continue;
        std::printf("c%d %s:\n", c.id, c.name);
        std::fflush(stdout);
        const Timer timer;
        const bool ok = c.run();
        std::printf("%s c%d %s (%.1fs)\n", ok ? "PASS" : "FAIL", c.id, c.name, timer.seconds());
        std::fflush(stdout);
        ran++;
        passed += ok;
    }
    std::printf("acceptance: %d/%d criteria passed\n", passed, ran);
    return passed == ran && ran > 0 ? 0 : 1;
}
