// pod: path-of-destruction level generation pipeline.
//
// Subcommands cover the full loop: destruction datasets from goal levels,
// repair-network training, iterative generation, metric evaluation, level
// solving, and canned experiment reproduction.
//
// Exit codes are a stable scripting contract: 0 success, 1 I/O failure,
// 2 invalid input or config.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pod/digest.h"
#include "pod/errors.h"
#include "pod/eval.h"
#include "pod/games.h"
#include "pod/generator.h"
#include "pod/neuralnet.h"
#include "pod/podgen.h"
#include "pod/rng.h"
#include "pod/tilemap.h"

namespace fs = std::filesystem;
using namespace pod;

namespace {

// ---------------------------------------------------------------------------
// Shared output helpers

std::string hash_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return to_hex(fnv1a64(bytes));
}

// files.json: every artifact the command produced, with size and content
// hash, so runs are diffable at a glance.
void write_files_manifest(const fs::path& out_dir, std::vector<std::string> rel_paths) {
    std::sort(rel_paths.begin(), rel_paths.end());
    nlohmann::json files = nlohmann::json::array();
    for (const std::string& rel : rel_paths) {
        const fs::path p = out_dir / rel;
        files.push_back({{"path", rel},
                         {"bytes", fs::file_size(p)},
                         {"fnv1a64", hash_file(p)}});
    }
    std::ofstream out(out_dir / "files.json", std::ios::binary);
    if (!out) throw IoError("cannot write '" + (out_dir / "files.json").string() + "'");
    out << nlohmann::json{{"files", files}}.dump(2) << '\n';
}

void write_loss_csv(const fs::path& path, const std::vector<double>& losses) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "epoch,loss\n";
    char buf[64];
    for (size_t i = 0; i < losses.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.10g\n", i, losses[i]);
        out << buf;
    }
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
}

EpochCallback progress_logger(const std::string& tag, int epochs) {
    return [tag, epochs](int epoch, double loss) {
        if (epoch % 10 == 9 || epoch == epochs - 1) {
            std::fprintf(stderr, "  [%s] epoch %d/%d loss %.5f\n", tag.c_str(), epoch + 1,
                         epochs, loss);
        }
    };
}

// ---------------------------------------------------------------------------
// dataset

struct DatasetArgs {
    std::string game = "zelda";
    std::string goals = "fixtures/zelda5";
    size_t count = 100000;
    std::string traversal = "random";
    uint64_t seed = 0;
    std::string out;
};

int cmd_dataset(const DatasetArgs& args) {
    const GameSpec& game = game_by_id(args.game);
    const auto goals = load_goal_dir(args.goals, game);

    DatasetConfig config;
    config.target_example_count = args.count;
    config.traversal = traversal_from_string(args.traversal);
    config.seed = args.seed;

    const Dataset ds = build_dataset(game, goals, config);
    ensure_out_dir(args.out);
    save_dataset_jsonl(ds, game.alphabet, args.out + "/dataset.jsonl");
    write_files_manifest(args.out, {"dataset.jsonl"});
    std::printf("examples=%zu trajectories=%zu goal_set=%s file=%s/dataset.jsonl\n",
                ds.examples.size(), ds.trajectories, ds.goal_set_hash.c_str(),
                args.out.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    std::string dataset;
    int obs = 5;
    std::vector<int> channels = {128, 128, 256};
    int epochs = 500;
    int batch = 64;
    float lr = 0.001f;
    uint64_t seed = 0;
    std::string out;
};

int cmd_train(const TrainArgs& args) {
    const Dataset ds = load_dataset_jsonl(args.dataset);
    const GameSpec& game = game_by_id(ds.game_id);

    NetworkSpec spec;
    spec.crop = args.obs;
    spec.in_channels = static_cast<int>(game.alphabet.size()) + 1;
    spec.action_count = static_cast<int>(game.alphabet.size());
    std::copy(args.channels.begin(), args.channels.end(), spec.conv_channels.begin());

    const ObservationSpec obs = ObservationSpec::for_game(game, args.obs);
    Network net = init_network(spec, derive_seed(args.seed, 0));

    TrainConfig config;
    config.batch_size = args.batch;
    config.learning_rate = args.lr;
    config.epochs = args.epochs;
    config.shuffle_seed = derive_seed(args.seed, 1);

    const auto losses =
        train(net, ds.examples, obs, config, progress_logger("train", args.epochs));

    ensure_out_dir(args.out);
    save_checkpoint(net, game.id, args.out);
    write_loss_csv(fs::path(args.out) / "loss.csv", losses);
    write_files_manifest(args.out, {"manifest.json", "weights.bin", "loss.csv"});
    std::printf("game=%s examples=%zu epochs=%d final_loss=%.6f checkpoint=%s\n",
                game.id.c_str(), ds.examples.size(), args.epochs, losses.back(),
                args.out.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
    std::string checkpoint;
    int trials = 10000;
    int passes = 3;
    std::string traversal = "random";
    uint64_t seed = 0;
    std::string out;
};

int cmd_generate(const GenerateArgs& args) {
    const LoadedCheckpoint ck = load_checkpoint(args.checkpoint);
    const GameSpec& game = game_by_id(ck.game_id);

    GenerationConfig config(ObservationSpec(ck.net.spec.crop, ck.net.spec.in_channels));
    config.traversal = traversal_from_string(args.traversal);
    config.max_passes = args.passes;
    config.seed = args.seed;

    const auto traces = batch_generate(ck.net, game, config, args.trials, args.seed);
    int playable = 0;
    for (const auto& t : traces) playable += t.terminated_by == TerminatedBy::playable;

    ensure_out_dir(args.out);
    write_traces_jsonl(traces, game.alphabet, args.out + "/traces.jsonl");
    write_files_manifest(args.out, {"traces.jsonl"});
    std::printf("game=%s trials=%d playable=%d file=%s/traces.jsonl\n", game.id.c_str(),
                args.trials, playable, args.out.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
    std::string game = "zelda";
    std::vector<std::string> checkpoints;
    std::string goals = "fixtures/zelda5";
    int trials = 10000;
    int passes = 3;
    std::string traversal = "random";
    uint64_t seed = 0;
    bool vectors = false;
    std::string out;
};

int cmd_eval(const EvalArgs& args) {
    const GameSpec& game = game_by_id(args.game);
    const auto goals = load_goal_dir(args.goals, game);

    std::vector<LoadedCheckpoint> loaded;
    for (const std::string& dir : args.checkpoints) {
        loaded.push_back(load_checkpoint(dir));
        if (loaded.back().game_id != game.id) {
            throw std::invalid_argument("checkpoint '" + dir + "' was trained for '" +
                                        loaded.back().game_id + "', not '" + game.id + "'");
        }
        if (loaded.back().net.spec != loaded.front().net.spec) {
            throw std::invalid_argument("checkpoint '" + dir +
                                        "' has a different network shape than the first");
        }
    }
    std::vector<const Network*> nets;
    for (const auto& ck : loaded) nets.push_back(&ck.net);

    GenerationConfig config(
        ObservationSpec(loaded.front().net.spec.crop, loaded.front().net.spec.in_channels));
    config.traversal = traversal_from_string(args.traversal);
    config.max_passes = args.passes;
    config.seed = args.seed;

    const MetricsReport report = evaluate(nets, game, config, args.trials, goals, args.seed);

    ensure_out_dir(args.out);
    save_metrics_report(report, args.out + "/report.json");
    std::vector<std::string> produced = {"report.json"};

    if (args.vectors) {
        // regenerate the first network's playable outputs (deterministic) and
        // export the unique ones next to the goals for external projection
        const auto traces =
            batch_generate(*nets[0], game, config, args.trials, derive_seed(args.seed, 0));
        std::vector<LevelGrid> playable;
        for (const auto& t : traces) {
            if (t.terminated_by == TerminatedBy::playable) playable.push_back(t.final_level);
        }
        export_level_vectors(dedup_unique(playable, goals), goals, game.alphabet,
                             args.out + "/vectors.csv");
        produced.push_back("vectors.csv");
    }
    write_files_manifest(args.out, produced);
    std::printf("game=%s networks=%zu trials=%d playable=%.2f±%.2f unique=%.2f±%.2f "
                "dup=%.2f±%.2f report=%s/report.json\n",
                game.id.c_str(), nets.size(), args.trials, report.playable.mean,
                report.playable.std, report.playable_unique.mean, report.playable_unique.std,
                report.duplicate.mean, report.duplicate.std, args.out.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// solve

struct SolveArgs {
    std::string game;
    std::string level;
};

int cmd_solve(const SolveArgs& args) {
    const GameSpec& game = game_by_id(args.game);
    std::ifstream in(args.level, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open level '" + args.level + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const LevelGrid level = parse_level(text, game.alphabet);

    const PlayabilityResult result = check_playable(game, level);
    if (result.playable) {
        if (result.solution_length) {
            std::printf("playable, moves=%d\n", *result.solution_length);
        } else {
            std::printf("playable\n");
        }
    } else {
        std::printf("unplayable: %s\n", to_string(result.reason));
    }
    return 0;
}

// ---------------------------------------------------------------------------
// reproduce

struct ScaleParams {
    std::array<int, 3> channels;
    int epochs;
    size_t examples;
    int trials;
    int nets;
};

ScaleParams scale_params(const std::string& scale) {
    if (scale == "desk") return {{16, 16, 32}, 60, 20000, 500, 2};
    if (scale == "paper") return {{128, 128, 256}, 500, 100000, 10000, 3};
    if (scale == "smoke") return {{8, 8, 16}, 2, 500, 20, 1};
    throw std::invalid_argument("unknown scale '" + scale + "' (want desk|paper|smoke)");
}

struct Cell {
    std::string name;
    std::string game_id;
    std::string goals_subdir;
    int obs;
};

std::vector<Cell> experiment_cells(const std::string& experiment) {
    if (experiment == "obs-sweep") {
        return {{"obs5", "zelda", "zelda5", 5},
                {"obs9", "zelda", "zelda5", 9},
                {"obs15", "zelda", "zelda5", 15}};
    }
    if (experiment == "goal-sweep") {
        return {{"goal1", "zelda", "zelda1", 5},
                {"goal5", "zelda", "zelda5", 5},
                {"goal50", "zelda", "zelda50", 5}};
    }
    if (experiment == "games") {
        return {{"zelda", "zelda", "zelda5", 5},
                {"sokoban", "sokoban", "sokoban5", 3},
                {"dave", "dave", "dave5", 5}};
    }
    if (experiment == "duplicates") {
        return {{"goal50", "zelda", "zelda50", 5}};
    }
    throw std::invalid_argument("unknown experiment '" + experiment +
                                "' (want obs-sweep|goal-sweep|games|duplicates)");
}

struct ReproduceArgs {
    std::string experiment;
    std::string scale = "desk";
    std::string fixtures = "fixtures";
    uint64_t seed = 0;
    std::string out;
    // 0 = use the scale default
    int trials = 0;
    int epochs = 0;
    size_t examples = 0;
    int nets = 0;
    int passes = 3;
};

int cmd_reproduce(const ReproduceArgs& args) {
    ScaleParams scale = scale_params(args.scale);
    if (args.trials > 0) scale.trials = args.trials;
    if (args.epochs > 0) scale.epochs = args.epochs;
    if (args.examples > 0) scale.examples = args.examples;
    if (args.nets > 0) scale.nets = args.nets;

    const auto cells = experiment_cells(args.experiment);
    ensure_out_dir(args.out);
    std::vector<std::string> produced;

    for (size_t ordinal = 0; ordinal < cells.size(); ++ordinal) {
        const Cell& cell = cells[ordinal];
        const GameSpec& game = game_by_id(cell.game_id);
        const uint64_t base = derive_seed(args.seed, ordinal);
        const fs::path cell_dir = fs::path(args.out) / cell.name;
        ensure_out_dir(cell_dir.string());
        auto rel = [&](const std::string& name) { return cell.name + "/" + name; };

        const auto goals = load_goal_dir(args.fixtures + "/" + cell.goals_subdir, game);

        DatasetConfig dcfg;
        dcfg.target_example_count = scale.examples;
        dcfg.traversal = Traversal::random_permutation;
        dcfg.seed = derive_seed(base, 0);
        const Dataset ds = build_dataset(game, goals, dcfg);
        save_dataset_jsonl(ds, game.alphabet, (cell_dir / "dataset.jsonl").string());
        produced.push_back(rel("dataset.jsonl"));
        std::fprintf(stderr, "[%s] dataset: %zu examples from %zu trajectories\n",
                     cell.name.c_str(), ds.examples.size(), ds.trajectories);

        NetworkSpec spec;
        spec.crop = cell.obs;
        spec.in_channels = static_cast<int>(game.alphabet.size()) + 1;
        spec.action_count = static_cast<int>(game.alphabet.size());
        spec.conv_channels = scale.channels;
        const ObservationSpec obs = ObservationSpec::for_game(game, cell.obs);

        std::vector<Network> nets;
        for (int k = 0; k < scale.nets; ++k) {
            Network net = init_network(spec, derive_seed(base, 1 + 2 * static_cast<uint64_t>(k)));
            TrainConfig tcfg;
            tcfg.epochs = scale.epochs;
            tcfg.shuffle_seed = derive_seed(base, 2 + 2 * static_cast<uint64_t>(k));
            const std::string tag = cell.name + " net" + std::to_string(k);
            const auto losses =
                train(net, ds.examples, obs, tcfg, progress_logger(tag, scale.epochs));

            const std::string net_dir = (cell_dir / ("net" + std::to_string(k))).string();
            save_checkpoint(net, game.id, net_dir);
            write_loss_csv(fs::path(net_dir) / "loss.csv", losses);
            produced.push_back(rel("net" + std::to_string(k) + "/manifest.json"));
            produced.push_back(rel("net" + std::to_string(k) + "/weights.bin"));
            produced.push_back(rel("net" + std::to_string(k) + "/loss.csv"));
            nets.push_back(std::move(net));
        }

        GenerationConfig gcfg(obs);
        gcfg.traversal = Traversal::random_permutation;
        gcfg.max_passes = args.passes;
        gcfg.seed = derive_seed(base, 1000);
        std::vector<const Network*> net_ptrs;
        for (const auto& n : nets) net_ptrs.push_back(&n);

        const MetricsReport report =
            evaluate(net_ptrs, game, gcfg, scale.trials, goals, gcfg.seed);
        save_metrics_report(report, (cell_dir / "report.json").string());
        produced.push_back(rel("report.json"));

        // the emitted config embeds every knob so the run is self-describing
        const nlohmann::json cell_config = {
            {"experiment", args.experiment},
            {"cell", cell.name},
            {"scale", args.scale},
            {"game", cell.game_id},
            {"goals", cell.goals_subdir},
            {"goal_count", goals.size()},
            {"obs", cell.obs},
            {"channels", scale.channels},
            {"epochs", scale.epochs},
            {"batch_size", 64},
            {"learning_rate", 0.001},
            {"examples", scale.examples},
            {"trials", scale.trials},
            {"networks", scale.nets},
            {"max_passes", args.passes},
            {"traversal", "random"},
            {"seed", args.seed},
            {"cell_seed", base},
        };
        std::ofstream cf(cell_dir / "config.json", std::ios::binary);
        if (!cf) throw IoError("cannot write cell config");
        cf << cell_config.dump(2) << '\n';
        produced.push_back(rel("config.json"));

        std::printf("cell %s: playable=%.2f±%.2f unique=%.2f±%.2f dup=%.2f±%.2f\n",
                    cell.name.c_str(), report.playable.mean, report.playable.std,
                    report.playable_unique.mean, report.playable_unique.std,
                    report.duplicate.mean, report.duplicate.std);
        std::fflush(stdout);
    }

    write_files_manifest(args.out, produced);
    return 0;
}

// ---------------------------------------------------------------------------

// --dump-config writes the post-parse key=value state (with a [subcommand]
// section) and exits, so configs can be captured and replayed via --config.
bool maybe_dump_config(CLI::App& app, const std::string& path) {
    if (path.empty()) return false;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << app.config_to_str(true, false);
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"path-of-destruction level generation pipeline"};
    app.require_subcommand(1);

    DatasetArgs da;
    TrainArgs ta;
    GenerateArgs ga;
    EvalArgs ea;
    SolveArgs sa;
    ReproduceArgs ra;
    std::string dump_config;

    // Config plumbing lives on the top-level app (CLI11 only processes the
    // config file there); subcommands fall through so --config/--dump-config
    // can be typed after the subcommand name.
    app.set_config("--config", "", "read option defaults from a key=value file");
    app.add_option("--dump-config", dump_config,
                   "write the effective config to this file and exit")
        ->configurable(false);
    auto add_common = [&](CLI::App* sub) { sub->fallthrough(); };

    CLI::App* ds_cmd = app.add_subcommand("dataset", "destroy goal levels into a training set");
    ds_cmd->add_option("--game", da.game, "game id")->capture_default_str();
    ds_cmd->add_option("--goals", da.goals, "goal level directory")->capture_default_str();
    ds_cmd->add_option("--count", da.count, "target example count")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    ds_cmd->add_option("--traversal", da.traversal, "sequential|random")->capture_default_str();
    ds_cmd->add_option("--seed", da.seed, "master seed")->capture_default_str();
    ds_cmd->add_option("--out", da.out, "output directory")->required();
    add_common(ds_cmd);

    CLI::App* tr_cmd = app.add_subcommand("train", "train a repair network on a dataset");
    tr_cmd->add_option("--dataset", ta.dataset, "dataset.jsonl path")->required();
    tr_cmd->add_option("--obs", ta.obs, "observation crop size (odd)")->capture_default_str();
    tr_cmd->add_option("--channels", ta.channels, "conv channels, e.g. 16,16,32")
        ->delimiter(',')
        ->expected(3)
        ->capture_default_str();
    tr_cmd->add_option("--epochs", ta.epochs, "training epochs")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    tr_cmd->add_option("--batch", ta.batch, "minibatch size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    tr_cmd->add_option("--lr", ta.lr, "RMSprop learning rate")->capture_default_str();
    tr_cmd->add_option("--seed", ta.seed, "master seed (init + shuffle derive from it)")
        ->capture_default_str();
    tr_cmd->add_option("--out", ta.out, "checkpoint directory")->required();
    add_common(tr_cmd);

    CLI::App* ge_cmd = app.add_subcommand("generate", "run repair generation from a checkpoint");
    ge_cmd->add_option("--checkpoint", ga.checkpoint, "checkpoint directory")->required();
    ge_cmd->add_option("--trials", ga.trials, "episode count")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    ge_cmd->add_option("--passes", ga.passes, "full-grid pass budget")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    ge_cmd->add_option("--traversal", ga.traversal, "sequential|random")->capture_default_str();
    ge_cmd->add_option("--seed", ga.seed, "master seed")->capture_default_str();
    ge_cmd->add_option("--out", ga.out, "output directory")->required();
    add_common(ge_cmd);

    CLI::App* ev_cmd =
        app.add_subcommand("eval", "score checkpoints: playability, uniqueness, duplicates");
    ev_cmd->add_option("--game", ea.game, "game id")->capture_default_str();
    ev_cmd->add_option("--checkpoints", ea.checkpoints, "comma-separated checkpoint dirs")
        ->delimiter(',')
        ->required();
    ev_cmd->add_option("--goals", ea.goals, "goal level directory")->capture_default_str();
    ev_cmd->add_option("--trials", ea.trials, "episodes per network")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    ev_cmd->add_option("--passes", ea.passes, "full-grid pass budget")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    ev_cmd->add_option("--traversal", ea.traversal, "sequential|random")->capture_default_str();
    ev_cmd->add_option("--seed", ea.seed, "master seed")->capture_default_str();
    ev_cmd->add_flag("--vectors", ea.vectors, "also export one-hot level vectors CSV");
    ev_cmd->add_option("--out", ea.out, "output directory")->required();
    add_common(ev_cmd);

    CLI::App* so_cmd = app.add_subcommand("solve", "check one level file for playability");
    so_cmd->add_option("--game", sa.game, "game id")->required();
    so_cmd->add_option("--level", sa.level, "level text file")->required();
    add_common(so_cmd);

    CLI::App* re_cmd = app.add_subcommand("reproduce", "run a canned experiment sweep");
    re_cmd->add_option("experiment", ra.experiment,
                       "obs-sweep|goal-sweep|games|duplicates")
        ->required();
    re_cmd->add_option("--scale", ra.scale, "desk|paper|smoke")->capture_default_str();
    re_cmd->add_option("--fixtures", ra.fixtures, "fixture root directory")
        ->capture_default_str();
    re_cmd->add_option("--seed", ra.seed, "master seed")->capture_default_str();
    re_cmd->add_option("--trials", ra.trials, "override trials per network");
    re_cmd->add_option("--epochs", ra.epochs, "override training epochs");
    re_cmd->add_option("--examples", ra.examples, "override dataset size");
    re_cmd->add_option("--nets", ra.nets, "override networks per cell");
    re_cmd->add_option("--passes", ra.passes, "full-grid pass budget")->capture_default_str();
    re_cmd->add_option("--out", ra.out, "output directory")->required();
    add_common(re_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        CLI::App* parsed = app.get_subcommands().front();
        if (maybe_dump_config(app, dump_config)) return 0;
        if (parsed == ds_cmd) return cmd_dataset(da);
        if (parsed == tr_cmd) return cmd_train(ta);
        if (parsed == ge_cmd) return cmd_generate(ga);
        if (parsed == ev_cmd) return cmd_eval(ea);
        if (parsed == so_cmd) return cmd_solve(sa);
        if (parsed == re_cmd) return cmd_reproduce(ra);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
