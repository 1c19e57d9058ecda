#include "apple/gateway/trainer.hpp"

#include <fstream>
#include <iostream>

namespace apple::gateway {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "apple-training-checkpoint";

void write_atomic(const std::filesystem::path& path, const std::string& text) {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream os(tmp, std::ios::trunc);
        if (!os) throw Error("cannot write " + tmp.string());
        os << text << '\n';
        if (!os) throw Error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

json read_json(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw FileNotFound("checkpoint not found: " + path.string());
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace

json episode_config_to_json(const EpisodeConfig& c) {
    return {{"control_hz", c.control_hz},
            {"sim_hz", c.sim_hz},
            {"timeout", c.timeout},
            {"goal_tolerance", c.goal_tolerance},
            {"mode", to_string(c.mode)},
            {"explore", c.explore},
            {"random_explore_prob", c.random_explore_prob},
            {"horizon", c.dwa.horizon},
            {"dt", c.dwa.dt},
            {"footprint_radius", c.dwa.footprint_radius},
            {"min_clearance", c.dwa.min_clearance},
            {"dwa_goal_distance", c.dwa.local_goal_distance},
            {"sample_zero_w", c.dwa.sample_zero_w},
            {"lidar_max_range", c.lidar.max_range},
            {"lidar_noise_std", c.lidar.noise_std},
            {"local_goal_distance", c.local_goal_distance},
            {"heading_jitter", c.heading_jitter},
            {"seed", std::to_string(c.seed)}};
}

EpisodeConfig episode_config_from_json(const json& j) {
    EpisodeConfig c;
    c.control_hz = j.at("control_hz").get<double>();
    c.sim_hz = j.at("sim_hz").get<double>();
    c.timeout = j.at("timeout").get<double>();
    c.goal_tolerance = j.at("goal_tolerance").get<double>();
    c.mode = parse_mode(j.at("mode").get<std::string>());
    c.explore = j.at("explore").get<bool>();
    c.random_explore_prob = j.at("random_explore_prob").get<double>();
    c.dwa.horizon = j.at("horizon").get<double>();
    c.dwa.dt = j.at("dt").get<double>();
    c.dwa.footprint_radius = j.at("footprint_radius").get<double>();
    c.dwa.min_clearance = j.at("min_clearance").get<double>();
    c.dwa.local_goal_distance = j.at("dwa_goal_distance").get<double>();
    c.dwa.sample_zero_w = j.at("sample_zero_w").get<bool>();
    c.lidar.max_range = j.at("lidar_max_range").get<double>();
    c.lidar.noise_std = j.at("lidar_noise_std").get<double>();
    c.local_goal_distance = j.at("local_goal_distance").get<double>();
    c.heading_jitter = j.at("heading_jitter").get<double>();
    c.seed = std::stoull(j.at("seed").get<std::string>());
    return c;
}

Trainer::Trainer(TrainConfig cfg, std::vector<world::OccupancyGrid> envs, planner::LibraryFile library,
                 std::filesystem::path out_dir)
    : Trainer(cfg, std::move(envs), Learner(cfg.learner, std::move(library), cfg.seed), std::move(out_dir), 0) {
    if (!out_dir_.empty()) learner_.dataset().attach_log(dataset_path(), true);
}

Trainer::Trainer(TrainConfig cfg, std::vector<world::OccupancyGrid> envs, Learner learner,
                 std::filesystem::path out_dir, std::int64_t episodes)
    : cfg_(std::move(cfg)),
      envs_(std::move(envs)),
      learner_(std::move(learner)),
      out_dir_(std::move(out_dir)),
      episodes_(episodes) {
    if (envs_.empty()) throw InvalidArgument("training needs at least one environment");
    if (cfg_.feedback_budget < 0) throw InvalidArgument("feedback budget must be non-negative");
    if (cfg_.episode.mode != FeedbackMode::Oracle) throw InvalidArgument("offline training runs in oracle mode");
    cfg_.episode.validate();
    cfg_.oracle.validate();
    if (cfg_.oracle.levels != cfg_.learner.levels)
        throw InvalidArgument("oracle levels and policy levels differ");
    if (!out_dir_.empty()) std::filesystem::create_directories(out_dir_);
}

std::vector<EpisodeSummary> Trainer::run(const std::function<void(const EpisodeSummary&)>& progress) {
    std::vector<EpisodeSummary> all;
    while (!done()) {
        auto part = run_episodes(1, progress);
        all.insert(all.end(), part.begin(), part.end());
    }
    if (!out_dir_.empty()) save_checkpoint();
    return all;
}

std::vector<EpisodeSummary> Trainer::run_episodes(std::int64_t n,
                                                  const std::function<void(const EpisodeSummary&)>& progress) {
    std::vector<EpisodeSummary> out;
    for (std::int64_t i = 0; i < n && !done(); ++i) {
        const std::size_t env = static_cast<std::size_t>(episodes_) % envs_.size();
        EpisodeConfig ecfg = cfg_.episode;
        ecfg.seed = derive_seed(cfg_.seed, 1000 + static_cast<std::uint64_t>(episodes_));
        auto selector = learner_.make_selector(ecfg.explore);

        EpisodeHooks hooks;
        hooks.before_control = [this](double) { learner_.on_control_tick(); };
        hooks.on_feedback = [this](learn::FeedbackRecord&& r) {
            if (!done()) learner_.add_feedback(std::move(r));
        };
        hooks.should_stop = [this] { return done(); };

        EpisodeSummary s;
        s.index = episodes_;
        s.env = env;
        const auto before = learner_.feedback_count();
        try {
            const auto r = run_episode(envs_[env], *selector, ecfg, cfg_.oracle, hooks);
            s.outcome = r.outcome;
            s.traversal_time = r.traversal_time;
        } catch (const Error& e) {
            std::cerr << "episode " << episodes_ << " (env " << env << ") skipped: " << e.what() << '\n';
        }
        s.feedback = learner_.feedback_count() - before;
        ++episodes_;
        learner_.dataset().flush();
        out.push_back(s);
        if (progress) progress(s);
        if (!out_dir_.empty() && cfg_.checkpoint_every > 0 && episodes_ % cfg_.checkpoint_every == 0)
            save_checkpoint();
    }
    return out;
}

void Trainer::save_checkpoint() const {
    if (out_dir_.empty()) throw InvalidArgument("trainer has no output directory");
    json j = {{"format", kFormat},
              {"version", 1},
              {"learner", learner_.to_json()},
              {"episode", episode_config_to_json(cfg_.episode)},
              {"oracle", {{"levels", cfg_.oracle.levels}, {"rate_hz", cfg_.oracle.rate_hz}, {"e_max", cfg_.oracle.e_max}}},
              {"feedback_budget", cfg_.feedback_budget},
              {"checkpoint_every", cfg_.checkpoint_every},
              {"seed", std::to_string(cfg_.seed)},
              {"episodes", episodes_},
              {"env_hashes", json::array()}};
    for (const auto& g : envs_) j["env_hashes"].push_back(std::to_string(g.hash()));
    const_cast<Learner&>(learner_).dataset().flush();
    write_atomic(checkpoint_path(), j.dump());
}

Trainer Trainer::resume(const std::filesystem::path& out_dir, std::vector<world::OccupancyGrid> envs,
                        std::int64_t budget) {
    const json j = read_json(out_dir / "checkpoint.json");
    if (j.value("format", "") != kFormat || j.value("version", 0) != 1)
        throw FormatError("not a training checkpoint: " + (out_dir / "checkpoint.json").string());
    try {
        TrainConfig cfg;
        Learner learner = Learner::from_json(j.at("learner"));
        cfg.learner = learner.config();
        cfg.episode = episode_config_from_json(j.at("episode"));
        cfg.oracle.levels = j.at("oracle").at("levels").get<int>();
        cfg.oracle.rate_hz = j.at("oracle").at("rate_hz").get<double>();
        cfg.oracle.e_max = j.at("oracle").at("e_max").get<double>();
        cfg.feedback_budget = budget > 0 ? budget : j.at("feedback_budget").get<std::int64_t>();
        cfg.checkpoint_every = j.at("checkpoint_every").get<std::int64_t>();
        cfg.seed = std::stoull(j.at("seed").get<std::string>());
        const auto& hashes = j.at("env_hashes");
        if (hashes.size() != envs.size()) throw InvalidArgument("resume: environment set differs from the checkpoint");
        for (std::size_t i = 0; i < envs.size(); ++i)
            if (hashes[i].get<std::string>() != std::to_string(envs[i].hash()))
                throw InvalidArgument("resume: environment set differs from the checkpoint");

        // Keep exactly the records the checkpoint accounted for.
        const auto log = out_dir / "dataset.log";
        auto records = std::filesystem::exists(log) ? learn::load_log(log) : std::vector<learn::FeedbackRecord>{};
        const auto count = learner.feedback_count();
        if (static_cast<std::int64_t>(records.size()) < count)
            throw FormatError("resume: dataset log is shorter than the checkpoint");
        records.resize(static_cast<std::size_t>(count));
        learner.dataset().attach_log(log, true);
        learner.dataset().set_appended(0);
        for (auto& r : records) learner.dataset().append(std::move(r));
        learner.dataset().flush();

        const auto episodes = j.at("episodes").get<std::int64_t>();
        return Trainer(cfg, std::move(envs), std::move(learner), out_dir, episodes);
    } catch (const json::exception& e) {
        throw FormatError(std::string("training checkpoint: ") + e.what());
    }
}

Learner load_policy(const std::filesystem::path& checkpoint) {
    const json j = read_json(checkpoint);
    if (j.value("format", "") == kFormat) return Learner::from_json(j.at("learner"));
    return Learner::from_json(j);
}

}  // namespace apple::gateway
