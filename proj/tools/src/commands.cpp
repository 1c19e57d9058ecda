#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "apple/config/run_config.hpp"
#include "apple/eval/evaluate.hpp"
#include "apple/eval/report.hpp"
#include "apple/gateway/serve.hpp"
#include "apple/gateway/trainer.hpp"
#include "apple/learn/feedback.hpp"
#include "apple/rng.hpp"
#include "apple/world/grid_io.hpp"

namespace apple::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Usage problems detected after parsing (exit code 1).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string config_file;
    std::vector<std::string> sets;
};

config::RunConfig base_config(const Common& c) {
    config::RunConfig rc;
    if (!c.config_file.empty()) rc = config::load_config(c.config_file);
    for (const auto& s : c.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + s + "'");
        config::apply_override(rc, s.substr(0, eq), s.substr(eq + 1));
    }
    return rc;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    os << text;
    if (!os) throw Error("cannot write " + path.string());
}

std::string env_file_name(std::size_t i) {
    std::ostringstream os;
    os << "env_" << std::setw(3) << std::setfill('0') << i << ".grid";
    return os.str();
}

void save_envs(const fs::path& dir, const std::vector<world::OccupancyGrid>& envs, const json& meta) {
    fs::create_directories(dir);
    json manifest = meta;
    manifest["files"] = json::array();
    for (std::size_t i = 0; i < envs.size(); ++i) {
        world::save_grid(dir / env_file_name(i), envs[i]);
        manifest["files"].push_back({{"file", env_file_name(i)}, {"hash", std::to_string(envs[i].hash())}});
    }
    write_text(dir / "manifest.json", manifest.dump(1) + "\n");
}

std::vector<world::OccupancyGrid> load_env_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw FileNotFound("environment directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".grid") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw FileNotFound("no .grid files in " + dir.string());
    std::vector<world::OccupancyGrid> out;
    for (const auto& f : files) out.push_back(world::load_grid(f));
    return out;
}

/// `--envs` accepts a directory of grid files or a count to generate.
std::vector<world::OccupancyGrid> resolve_envs(const std::string& spec, const config::RunConfig& rc,
                                               std::uint64_t seed) {
    if (!spec.empty() && std::all_of(spec.begin(), spec.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        const int n = std::stoi(spec);
        if (n < 1) throw UsageError("--envs must be at least 1");
        return config::generate_envs(rc, n, seed);
    }
    return load_env_dir(spec);
}

std::atomic<gateway::Service*> g_service{nullptr};

extern "C" void on_signal(int) {
    if (auto* s = g_service.load()) s->stop();
}

// ---------------------------------------------------------------- train

struct TrainOpts {
    std::string mode = "oracle";
    int levels = 3;
    int envs = 10;
    std::uint64_t seed = 0;
    std::string out;
    std::int64_t budget = 0;
    std::string difficulty;
    std::string kind;
    bool resume = false;
    bool quiet = false;
};

int cmd_train(const Common& common, const TrainOpts& o, CLI::App& sub, std::ostream& out) {
    auto rc = base_config(common);
    if (sub.count("--mode") && o.mode != "oracle")
        throw UsageError("train supports --mode oracle only; human feedback is collected with `serve`");
    if (sub.count("--levels")) rc.oracle.levels = o.levels;
    if (sub.count("--envs")) rc.envs = o.envs;
    if (sub.count("--seed")) rc.seed = o.seed;
    if (sub.count("--out")) rc.out_dir = o.out;
    if (sub.count("--budget")) rc.feedback_budget = o.budget;
    if (sub.count("--difficulty")) rc.difficulty = o.difficulty;
    if (sub.count("--kind")) config::apply_override(rc, "learner.kind", json(o.kind).dump());
    rc.validate();
    if (rc.out_dir.empty()) throw UsageError("train needs --out");

    const fs::path dir = rc.out_dir;
    const auto envs = config::generate_envs(rc, rc.envs, rc.seed);
    auto progress = [&](const gateway::EpisodeSummary& s) {
        if (o.quiet) return;
        out << "episode " << s.index << " env " << s.env << ' ' << gateway::to_string(s.outcome) << ' '
            << std::fixed << std::setprecision(1) << s.traversal_time << " s, feedback " << s.feedback << '\n';
    };
    std::optional<gateway::Trainer> trainer;
    if (o.resume) {
        trainer.emplace(gateway::Trainer::resume(dir, envs, rc.feedback_budget));
    } else {
        fs::create_directories(dir);
        save_envs(dir / "envs", envs,
                  {{"seed", rc.seed}, {"difficulty", rc.difficulty}, {"count", rc.envs}});
        write_text(dir / "config.json", config::to_json(rc).dump(1) + "\n");
        trainer.emplace(rc.train_config(), envs, rc.load_library(), dir);
    }
    trainer->run(progress);
    out << "trained: " << trainer->learner().feedback_count() << " feedback records, "
        << trainer->learner().train_steps() << " steps, " << trainer->episodes_done() << " episodes\n";
    out << "checkpoint: " << trainer->checkpoint_path().string() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalOpts {
    std::vector<std::string> ckpts;
    std::string envs;
    int runs = 20;
    std::uint64_t seed = 0;
    std::string report;
    bool no_baseline = false;
    bool quiet = false;
};

std::string method_name(const fs::path& ckpt, std::size_t n) {
    if (n == 1) return "apple";
    auto p = ckpt;
    if (p.filename() == "checkpoint.json" && p.has_parent_path()) p = p.parent_path();
    return "apple:" + p.filename().string();
}

int cmd_eval(const Common& common, const EvalOpts& o, CLI::App& sub, std::ostream& out) {
    auto rc = base_config(common);
    if (sub.count("--runs")) rc.eval_runs = o.runs;
    if (sub.count("--seed")) rc.seed = o.seed;
    rc.validate();
    if (o.ckpts.empty() && o.no_baseline) throw UsageError("nothing to evaluate");

    std::vector<gateway::Learner> learners;
    std::vector<fs::path> paths;
    for (const auto& c : o.ckpts) {
        fs::path p = c;
        if (fs::is_directory(p)) p /= "checkpoint.json";
        if (!fs::exists(p)) throw FileNotFound("checkpoint not found: " + p.string());
        learners.push_back(gateway::load_policy(p));
        paths.push_back(p);
    }
    std::string env_spec = o.envs;
    if (env_spec.empty()) {
        if (paths.empty() || !fs::is_directory(paths.front().parent_path() / "envs"))
            throw UsageError("eval needs --envs (a grid directory or a count)");
        env_spec = (paths.front().parent_path() / "envs").string();
    }
    const auto envs = resolve_envs(env_spec, rc, rc.seed);
    const auto ecfg = rc.eval_config();
    auto progress = [&](const std::string& name) {
        return [&out, name, quiet = o.quiet](const evalx::RunRecord& r) {
            if (quiet || r.run != 0) return;
            out << name << ": env " << r.env << '\n';
        };
    };

    std::vector<evalx::MethodRuns> methods;
    if (!o.no_baseline) {
        const auto library = learners.empty() ? rc.load_library().library : learners.front().library().library;
        const auto theta = library.at(0);
        methods.push_back(evalx::evaluate(
            "default", envs, [&] { return std::make_unique<gateway::FixedSelector>(theta, 0); }, ecfg,
            progress("default")));
    }
    for (std::size_t i = 0; i < learners.size(); ++i) {
        const auto name = method_name(paths[i], paths.size());
        const auto& l = learners[i];
        methods.push_back(evalx::evaluate(name, envs, [&] { return l.make_selector(false); }, ecfg, progress(name)));
    }
    if (methods.size() == 1) {
        out << methods[0].name << ": mean traversal time " << std::fixed << std::setprecision(2)
            << methods[0].mean_time() << " s over " << envs.size() << " environments\n";
    }
    const auto report = evalx::pairwise_report(methods, rc.alpha);
    const auto md = report.to_markdown();
    if (o.report.empty()) {
        out << md;
    } else {
        const fs::path rp = o.report;
        write_text(rp, md);
        auto jp = rp;
        jp.replace_extension(".json");
        write_text(jp, report.to_json().dump(1) + "\n");
        out << "report: " << rp.string() << " and " << jp.string() << '\n';
        for (std::size_t i = 0; i < methods.size(); ++i)
            out << methods[i].name << ": " << std::fixed << std::setprecision(2) << report.mean_time[i] << " s\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------- serve

struct ServeOpts {
    std::string ckpt;
    int port = 8765;
    double speed = 1.0;
    std::int64_t episodes = 0;
    std::string envs;
    int levels = 2;
    std::string out;
    std::uint64_t seed = 0;
};

int cmd_serve(const Common& common, const ServeOpts& o, CLI::App& sub, std::ostream& out) {
    auto rc = base_config(common);
    if (sub.count("--port")) {
        if (o.port < 0 || o.port > 65535) throw UsageError("--port must lie in [0, 65535]");
        rc.serve_port = static_cast<std::uint16_t>(o.port);
    }
    if (sub.count("--speed")) rc.serve_speed = o.speed;
    if (sub.count("--episodes")) rc.serve_episodes = o.episodes;
    if (sub.count("--out")) rc.out_dir = o.out;
    if (sub.count("--seed")) rc.seed = o.seed;

    std::optional<gateway::Learner> learner;
    fs::path ckpt_dir;
    if (!o.ckpt.empty()) {
        fs::path p = o.ckpt;
        if (fs::is_directory(p)) p /= "checkpoint.json";
        if (!fs::exists(p)) throw FileNotFound("checkpoint not found: " + p.string());
        learner.emplace(gateway::load_policy(p));
        ckpt_dir = p.parent_path();
        // A trained policy fixes the level count unless overridden.
        rc.human.levels = learner->config().levels;
    }
    if (sub.count("--levels")) rc.human.levels = o.levels;
    rc.validate();
    if (!learner) {
        auto lc = rc.learner;
        lc.levels = rc.human.levels;
        learner.emplace(lc, rc.load_library(), rc.seed);
    }
    std::string env_spec = o.envs;
    if (env_spec.empty()) {
        if (!ckpt_dir.empty() && fs::is_directory(ckpt_dir / "envs")) env_spec = (ckpt_dir / "envs").string();
        else env_spec = std::to_string(rc.envs);
    }
    auto envs = resolve_envs(env_spec, rc, rc.seed);
    gateway::Service service(rc.serve_config(), std::move(*learner), std::move(envs));
    service.start();
    out << "serving on ws://" << rc.serve_host << ':' << service.port() << " (session " << rc.serve_config().session_id
        << ")" << std::endl;
    g_service = &service;
    auto prev_int = std::signal(SIGINT, on_signal);
    auto prev_term = std::signal(SIGTERM, on_signal);
    service.wait();
    std::signal(SIGINT, prev_int);
    std::signal(SIGTERM, prev_term);
    g_service = nullptr;
    const auto s = service.stats();
    out << "episodes " << s.episodes << ", records " << s.records << " (" << s.negatives << " negative, "
        << s.auto_positives << " auto-positive), stale events " << s.events_stale << ", train steps "
        << s.train_steps << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- gen-envs

struct GenOpts {
    int n = 10;
    std::string difficulty;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_gen_envs(const Common& common, const GenOpts& o, CLI::App& sub, std::ostream& out) {
    auto rc = base_config(common);
    if (sub.count("--difficulty")) rc.difficulty = o.difficulty;
    if (sub.count("--seed")) rc.seed = o.seed;
    if (sub.count("--out")) rc.out_dir = o.out;
    rc.validate();
    if (o.n < 1) throw UsageError("--n must be at least 1");
    const fs::path dir = rc.out_dir.empty() ? fs::path("envs") : fs::path(rc.out_dir);
    const auto envs = config::generate_envs(rc, o.n, rc.seed);
    save_envs(dir, envs, {{"seed", rc.seed}, {"difficulty", rc.difficulty}, {"count", o.n}});
    out << "wrote " << envs.size() << " environments to " << dir.string() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- replay

struct ReplayOpts {
    std::string log;
    bool json_out = false;
};

int cmd_replay(const ReplayOpts& o, std::ostream& out) {
    const auto records = learn::load_log(o.log);
    std::map<std::string, std::int64_t> by_source;
    std::map<int, std::int64_t> by_level, by_index;
    double value_sum = 0.0;
    std::int64_t values = 0;
    for (const auto& r : records) {
        ++by_source[learn::to_string(r.source)];
        if (r.has_level()) ++by_level[r.level];
        else {
            value_sum += r.value;
            ++values;
        }
        if (r.discrete_action()) ++by_index[r.library_index];
    }
    json j = {{"records", records.size()}, {"by_source", by_source}};
    json lv = json::object(), ix = json::object();
    for (const auto& [k, v] : by_level) lv[std::to_string(k)] = v;
    for (const auto& [k, v] : by_index) ix[std::to_string(k)] = v;
    j["by_level"] = lv;
    j["by_library_index"] = ix;
    if (values > 0) j["mean_value"] = value_sum / static_cast<double>(values);
    if (o.json_out) {
        out << j.dump(1) << '\n';
        return kExitOk;
    }
    out << "records: " << records.size() << '\n';
    for (const auto& [k, v] : by_source) out << "  source " << k << ": " << v << '\n';
    for (const auto& [k, v] : by_level) out << "  level " << k << ": " << v << '\n';
    for (const auto& [k, v] : by_index) out << "  library index " << k << ": " << v << '\n';
    if (values > 0) out << "  mean feedback value: " << value_sum / static_cast<double>(values) << '\n';
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Adaptive planner parameter learning from evaluative feedback", "apple"};
    app.set_version_flag("--version", std::string("apple ") + APPLE_VERSION);
    app.require_subcommand(1);
    Common common;
    app.add_option("--config", common.config_file, "JSON config file (see docs/config.md)");
    app.add_option("--set", common.sets, "Override one config key, e.g. --set learner.warmup=200");

    TrainOpts to;
    auto* train = app.add_subcommand("train", "Train a parameter policy from simulated feedback");
    train->add_option("--mode", to.mode, "Feedback source (oracle)");
    train->add_option("--levels", to.levels, "Feedback levels; 0 = continuous");
    train->add_option("--envs", to.envs, "Number of generated environments");
    train->add_option("--seed", to.seed, "Seed");
    train->add_option("--out", to.out, "Output directory");
    train->add_option("--budget", to.budget, "Feedback records to collect");
    train->add_option("--difficulty", to.difficulty, "easy, medium or hard");
    train->add_option("--kind", to.kind, "discrete or continuous");
    train->add_flag("--resume", to.resume, "Continue from the checkpoint in --out");
    train->add_flag("--quiet", to.quiet, "No per-episode output");

    EvalOpts eo;
    auto* eval = app.add_subcommand("eval", "Compare checkpoints against the default parameters");
    eval->add_option("--ckpt", eo.ckpts, "Checkpoint file or training directory (repeatable)");
    eval->add_option("--envs", eo.envs, "Grid directory or number of environments to generate");
    eval->add_option("--runs", eo.runs, "Runs per environment");
    eval->add_option("--seed", eo.seed, "Seed for environments and run perturbations");
    eval->add_option("--report", eo.report, "Markdown report path; a .json summary is written next to it");
    eval->add_flag("--no-baseline", eo.no_baseline, "Skip the default-parameter baseline");
    eval->add_flag("--quiet", eo.quiet, "No progress output");

    ServeOpts so;
    auto* serve = app.add_subcommand("serve", "Live human-feedback session over a websocket");
    serve->add_option("--ckpt", so.ckpt, "Checkpoint to start from (fresh policy if omitted)");
    serve->add_option("--port", so.port, "Port; 0 picks a free one");
    serve->add_option("--speed", so.speed, "Simulation speed factor; 0 = unpaced");
    serve->add_option("--episodes", so.episodes, "Episodes before exiting; 0 = until interrupted");
    serve->add_option("--envs", so.envs, "Grid directory or number of environments to generate");
    serve->add_option("--levels", so.levels, "Feedback levels offered (2 or 3)");
    serve->add_option("--out", so.out, "Directory for dataset.log and policy.json");
    serve->add_option("--seed", so.seed, "Seed");

    GenOpts go;
    auto* gen = app.add_subcommand("gen-envs", "Generate cellular-automata arenas");
    gen->add_option("--n", go.n, "Number of environments");
    gen->add_option("--difficulty", go.difficulty, "easy, medium or hard");
    gen->add_option("--seed", go.seed, "Seed");
    gen->add_option("--out", go.out, "Output directory");

    ReplayOpts ro;
    auto* replay = app.add_subcommand("replay", "Summarise a feedback dataset log");
    replay->add_option("--log", ro.log, "Dataset log")->required();
    replay->add_flag("--json", ro.json_out, "Print the summary as JSON");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << app.version() << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (train->parsed()) return cmd_train(common, to, *train, out);
        if (eval->parsed()) return cmd_eval(common, eo, *eval, out);
        if (serve->parsed()) return cmd_serve(common, so, *serve, out);
        if (gen->parsed()) return cmd_gen_envs(common, go, *gen, out);
        if (replay->parsed()) return cmd_replay(ro, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const config::ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const FileNotFound& e) {
        err << "file not found: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, out, err);
}

}  // namespace apple::cli
