#include "apple/config/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <type_traits>

#include "apple/rng.hpp"

namespace apple::config {

using nlohmann::json;

namespace {

template <class T>
void check_type(const std::string& key, const json& v) {
    bool ok = false;
    if constexpr (std::is_same_v<T, bool>) ok = v.is_boolean();
    else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) ok = v.is_number_unsigned();
    else if constexpr (std::is_integral_v<T>) ok = v.is_number_integer();
    else if constexpr (std::is_floating_point_v<T>) ok = v.is_number();
    else if constexpr (std::is_same_v<T, std::string>) ok = v.is_string();
    else if constexpr (std::is_same_v<T, std::vector<int>>) {
        ok = v.is_array();
        if (ok)
            for (const auto& e : v) ok = ok && e.is_number_integer();
    }
    if (!ok) throw ConfigError("config key '" + key + "' has the wrong type: " + v.dump());
    if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if constexpr (std::is_unsigned_v<T>) {
            if (v.get<std::uint64_t>() > std::numeric_limits<T>::max())
                throw ConfigError("config key '" + key + "' is out of range");
        } else if (v.get<std::int64_t>() > std::numeric_limits<T>::max() ||
                   v.get<std::int64_t>() < std::numeric_limits<T>::min()) {
            throw ConfigError("config key '" + key + "' is out of range");
        }
    }
}

template <class T, class Ref>
ConfigField field(std::string key, std::string doc, Ref ref) {
    ConfigField f;
    f.key = key;
    f.doc = std::move(doc);
    f.get = [ref](const RunConfig& c) { return json(ref(const_cast<RunConfig&>(c))); };
    f.set = [ref, key](RunConfig& c, const json& v) {
        check_type<T>(key, v);
        ref(c) = v.get<T>();
    };
    return f;
}

#define APPLE_FIELD(T, key, doc, expr) field<T>(key, doc, [](RunConfig& c) -> T& { return expr; })

std::vector<ConfigField> build_fields() {
    std::vector<ConfigField> f;
    f.push_back(APPLE_FIELD(std::uint64_t, "seed", "Base seed for every random stream", c.seed));
    f.push_back(APPLE_FIELD(std::string, "out_dir", "Output directory (CLI subcommands)", c.out_dir));
    f.push_back(APPLE_FIELD(std::string, "library", "Parameter library file; empty uses the built-in table", c.library));

    f.push_back(APPLE_FIELD(std::string, "world.difficulty", "easy, medium or hard", c.difficulty));
    f.push_back(APPLE_FIELD(double, "world.fill_prob_easy", "CA initial fill probability, easy", c.fill_prob_easy));
    f.push_back(APPLE_FIELD(double, "world.fill_prob_medium", "CA initial fill probability, medium", c.fill_prob_medium));
    f.push_back(APPLE_FIELD(double, "world.fill_prob_hard", "CA initial fill probability, hard", c.fill_prob_hard));
    f.push_back(APPLE_FIELD(int, "world.iterations", "CA smoothing iterations", c.ca.iterations));
    f.push_back(APPLE_FIELD(int, "world.size", "Arena side in cells", c.ca.size));
    f.push_back(APPLE_FIELD(double, "world.resolution", "Metres per cell", c.ca.resolution));
    f.push_back(APPLE_FIELD(int, "world.survive_min", "Occupied cells need this many occupied neighbours to stay", c.ca.survive_min));
    f.push_back(APPLE_FIELD(double, "world.endpoint_clearance", "Minimum obstacle distance of start and goal, m", c.ca.endpoint_clearance));
    f.push_back(APPLE_FIELD(int, "world.endpoint_band", "Start/goal search band next to the borders, cells", c.ca.endpoint_band));
    f.push_back(APPLE_FIELD(double, "world.footprint_radius", "Robot radius used for connectivity, m", c.ca.footprint_radius));
    f.push_back(APPLE_FIELD(int, "world.max_retries", "Generation retries with incremented seed", c.ca.max_retries));
    f.push_back(APPLE_FIELD(int, "world.envs", "Number of environments for train and eval", c.envs));

    f.push_back(APPLE_FIELD(double, "lidar.max_range", "Lidar range, m", c.episode.lidar.max_range));
    f.push_back(APPLE_FIELD(double, "lidar.noise_std", "Gaussian range noise during training, m", c.episode.lidar.noise_std));

    f.push_back(APPLE_FIELD(double, "planner.horizon", "DWA rollout horizon, s", c.episode.dwa.horizon));
    f.push_back(APPLE_FIELD(double, "planner.dt", "DWA rollout step, s", c.episode.dwa.dt));
    f.push_back(APPLE_FIELD(double, "planner.footprint_radius", "Robot radius, m", c.episode.dwa.footprint_radius));
    f.push_back(APPLE_FIELD(double, "planner.min_clearance", "Clearance floor in the occupancy cost, m", c.episode.dwa.min_clearance));
    f.push_back(APPLE_FIELD(double, "planner.goal_point_distance", "Minimum goal-point lookahead along the path, m", c.episode.dwa.local_goal_distance));
    f.push_back(APPLE_FIELD(bool, "planner.sample_zero_w", "Always include w = 0 among angular samples", c.episode.dwa.sample_zero_w));

    f.push_back(APPLE_FIELD(double, "episode.control_hz", "Parameter-selection rate, Hz", c.episode.control_hz));
    f.push_back(APPLE_FIELD(double, "episode.sim_hz", "Physics rate, Hz", c.episode.sim_hz));
    f.push_back(APPLE_FIELD(double, "episode.timeout", "Episode timeout, s", c.episode.timeout));
    f.push_back(APPLE_FIELD(double, "episode.goal_tolerance", "Success distance to the goal, m", c.episode.goal_tolerance));
    f.push_back(APPLE_FIELD(double, "episode.local_goal_distance", "Path length averaged for the local goal, m", c.episode.local_goal_distance));
    f.push_back(APPLE_FIELD(double, "episode.backup_heading_tolerance", "Recovery reverses when the local-goal angle is below this, rad", c.episode.backup_heading_tolerance));
    f.push_back(APPLE_FIELD(double, "episode.backup_speed", "Recovery reverse speed, m/s", c.episode.backup_speed));
    f.push_back(APPLE_FIELD(double, "episode.heading_jitter", "Start-heading jitter during training, rad", c.episode.heading_jitter));

    f.push_back(APPLE_FIELD(int, "oracle.levels", "Feedback levels; 0 = continuous", c.oracle.levels));
    f.push_back(APPLE_FIELD(double, "oracle.rate_hz", "Oracle feedback rate, Hz", c.oracle.rate_hz));
    f.push_back(APPLE_FIELD(double, "oracle.e_max", "Feedback magnitude bound, m/s", c.oracle.e_max));

    ConfigField kind;
    kind.key = "learner.kind";
    kind.doc = "discrete or continuous";
    kind.get = [](const RunConfig& c) { return json(gateway::to_string(c.learner.kind)); };
    kind.set = [](RunConfig& c, const json& v) {
        check_type<std::string>("learner.kind", v);
        try {
            c.learner.kind = gateway::parse_kind(v.get<std::string>());
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    };
    f.push_back(kind);
    f.push_back(APPLE_FIELD(std::vector<int>, "learner.hidden", "Hidden layer widths", c.learner.hidden));
    f.push_back(APPLE_FIELD(double, "learner.lr", "Adam learning rate", c.learner.adam.lr));
    f.push_back(APPLE_FIELD(double, "learner.beta1", "Adam beta1", c.learner.adam.beta1));
    f.push_back(APPLE_FIELD(double, "learner.beta2", "Adam beta2", c.learner.adam.beta2));
    f.push_back(APPLE_FIELD(double, "learner.eps", "Adam epsilon", c.learner.adam.eps));
    f.push_back(APPLE_FIELD(double, "learner.epsilon_start", "Initial exploration probability", c.learner.epsilon_start));
    f.push_back(APPLE_FIELD(double, "learner.epsilon_end", "Final exploration probability", c.learner.epsilon_end));
    f.push_back(APPLE_FIELD(std::int64_t, "learner.epsilon_anneal_steps", "Control ticks to anneal epsilon over", c.learner.epsilon_anneal_steps));
    f.push_back(APPLE_FIELD(int, "learner.batch_size", "Records per training step", c.learner.batch_size));
    f.push_back(APPLE_FIELD(std::int64_t, "learner.warmup", "Records needed before training starts", c.learner.warmup));
    f.push_back(APPLE_FIELD(std::size_t, "learner.dataset_capacity", "Dataset size before oldest-first eviction", c.learner.dataset_capacity));
    f.push_back(APPLE_FIELD(double, "learner.auto_positive_weight", "Loss weight of auto-positive records", c.learner.auto_positive_weight));
    f.push_back(APPLE_FIELD(double, "learner.init_log_alpha", "Initial log temperature (continuous)", c.learner.init_log_alpha));
    ConfigField te;
    te.key = "learner.target_entropy";
    te.doc = "Target entropy (continuous); null = minus the parameter count";
    te.get = [](const RunConfig& c) { return c.learner.target_entropy ? json(*c.learner.target_entropy) : json(nullptr); };
    te.set = [](RunConfig& c, const json& v) {
        if (v.is_null()) {
            c.learner.target_entropy.reset();
            return;
        }
        check_type<double>("learner.target_entropy", v);
        c.learner.target_entropy = v.get<double>();
    };
    f.push_back(te);

    f.push_back(APPLE_FIELD(std::int64_t, "train.feedback_budget", "Feedback records collected by train", c.feedback_budget));
    f.push_back(APPLE_FIELD(std::int64_t, "train.checkpoint_every", "Episodes between checkpoints", c.checkpoint_every));

    f.push_back(APPLE_FIELD(int, "eval.runs", "Runs per environment", c.eval_runs));
    f.push_back(APPLE_FIELD(double, "eval.heading_jitter", "Start-heading jitter, rad", c.eval_heading_jitter));
    f.push_back(APPLE_FIELD(double, "eval.lidar_noise", "Lidar range noise, m", c.eval_lidar_noise));
    f.push_back(APPLE_FIELD(int, "eval.threads", "Worker threads over environments (0: all cores)", c.eval_threads));
    f.push_back(APPLE_FIELD(double, "eval.alpha", "Significance level", c.alpha));

    f.push_back(APPLE_FIELD(double, "human.rate_hz", "Feedback window rate, Hz", c.human.rate_hz));
    f.push_back(APPLE_FIELD(double, "human.reaction_delay", "Feedback labels the pair active this long before, s", c.human.reaction_delay));
    f.push_back(APPLE_FIELD(int, "human.levels", "Feedback levels offered to the user", c.human.levels));
    f.push_back(APPLE_FIELD(int, "human.stale_windows", "Events older than this many windows are dropped", c.human.stale_windows));
    f.push_back(APPLE_FIELD(double, "human.control_hz", "Parameter-selection rate in human mode, Hz", c.human_control_hz));
    f.push_back(APPLE_FIELD(double, "human.random_explore_prob", "Uniform random library choice probability", c.human_explore_prob));

    f.push_back(APPLE_FIELD(std::string, "serve.host", "Listen address", c.serve_host));
    f.push_back(APPLE_FIELD(std::uint16_t, "serve.port", "Listen port; 0 picks a free one", c.serve_port));
    f.push_back(APPLE_FIELD(double, "serve.speed", "Simulated seconds per wall second; 0 = unpaced", c.serve_speed));
    f.push_back(APPLE_FIELD(std::int64_t, "serve.episodes", "Episodes before exit; 0 = until interrupted", c.serve_episodes));
    f.push_back(APPLE_FIELD(std::size_t, "serve.client_queue", "Frames buffered per client (drop-oldest)", c.client_queue));
    f.push_back(APPLE_FIELD(std::size_t, "serve.intake_queue", "Pending feedback events (drop-oldest)", c.intake_queue));
    f.push_back(APPLE_FIELD(std::size_t, "serve.record_queue", "Records pending for the trainer (drop-oldest)", c.record_queue));
    return f;
}

#undef APPLE_FIELD

const ConfigField& find_field(const std::string& key) {
    for (const auto& f : config_fields())
        if (f.key == key) return f;
    throw ConfigError("unknown config key '" + key + "'");
}

void walk(const json& j, const std::string& prefix, RunConfig& c) {
    for (const auto& [k, v] : j.items()) {
        const std::string key = prefix.empty() ? k : prefix + "." + k;
        if (v.is_object()) walk(v, key, c);
        else find_field(key).set(c, v);
    }
}

}  // namespace

const std::vector<ConfigField>& config_fields() {
    static const std::vector<ConfigField> fields = build_fields();
    return fields;
}

void RunConfig::validate() const {
    try {
        (void)world::parse_difficulty(difficulty);
        for (double p : {fill_prob_easy, fill_prob_medium, fill_prob_hard})
            if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("fill probabilities must lie in [0, 1]");
        if (ca.size < 10 || ca.iterations < 0 || !(ca.resolution > 0.0) || ca.max_retries < 0)
            throw ConfigError("world: size >= 10, iterations >= 0, resolution > 0 required");
        if (envs < 1) throw ConfigError("world.envs must be at least 1");
        episode.validate();
        oracle.validate();
        train_config().learner.validate();
        if (episode.mode != gateway::FeedbackMode::Oracle) throw ConfigError("episode mode must be oracle");
        if (feedback_budget < 0 || checkpoint_every < 0) throw ConfigError("train settings must be non-negative");
        if (eval_runs < 2) throw ConfigError("eval.runs must be at least 2");
        if (eval_threads < 0) throw ConfigError("eval.threads must be non-negative");
        if (eval_heading_jitter < 0.0 || eval_lidar_noise < 0.0) throw ConfigError("eval noise must be non-negative");
        if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("eval.alpha must lie in (0, 1)");
        human.validate();
        serve_config().validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

world::CaConfig RunConfig::ca_config() const {
    auto c = ca;
    switch (world::parse_difficulty(difficulty)) {
        case world::Difficulty::Easy: c.fill_prob = fill_prob_easy; break;
        case world::Difficulty::Medium: c.fill_prob = fill_prob_medium; break;
        case world::Difficulty::Hard: c.fill_prob = fill_prob_hard; break;
    }
    return c;
}

planner::LibraryFile RunConfig::load_library() const {
    if (library.empty()) return {planner::ParameterLibrary::table(), planner::ParamBounds::table()};
    return planner::load_library(library);
}

gateway::TrainConfig RunConfig::train_config() const {
    gateway::TrainConfig t;
    t.learner = learner;
    t.learner.levels = oracle.levels;
    t.episode = episode;
    t.episode.mode = gateway::FeedbackMode::Oracle;
    t.episode.explore = true;
    t.oracle = oracle;
    t.feedback_budget = feedback_budget;
    t.checkpoint_every = checkpoint_every;
    t.seed = seed;
    return t;
}

evalx::EvalConfig RunConfig::eval_config() const {
    evalx::EvalConfig e;
    e.runs = eval_runs;
    e.threads = eval_threads;
    e.episode = episode;
    e.episode.explore = false;
    e.episode.heading_jitter = eval_heading_jitter;
    e.episode.lidar.noise_std = eval_lidar_noise;
    e.seed = seed;
    return e;
}

gateway::ServeConfig RunConfig::serve_config() const {
    gateway::ServeConfig s;
    s.host = serve_host;
    s.port = serve_port;
    s.speed = serve_speed;
    s.episodes = serve_episodes;
    s.episode = episode;
    s.episode.mode = gateway::FeedbackMode::Human;
    s.episode.explore = true;
    s.episode.control_hz = human_control_hz;
    s.episode.random_explore_prob = human_explore_prob;
    s.human = human;
    s.client_queue = client_queue;
    s.intake_queue = intake_queue;
    s.record_queue = record_queue;
    s.out_dir = out_dir;
    s.seed = seed;
    return s;
}

json to_json(const RunConfig& c) {
    json j = json::object();
    for (const auto& f : config_fields()) {
        std::string ptr = "/" + f.key;
        std::replace(ptr.begin(), ptr.end(), '.', '/');
        j[json::json_pointer(ptr)] = f.get(c);
    }
    return j;
}

RunConfig apply_json(RunConfig base, const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    walk(j, "", base);
    return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream is(path);
    if (!is) throw FileNotFound("config file not found: " + path.string());
    const json j = json::parse(is, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path.string());
    return apply_json(std::move(base), j);
}

void apply_override(RunConfig& c, const std::string& key, const std::string& value) {
    const auto& f = find_field(key);
    json v = json::parse(value, nullptr, false);
    if (v.is_discarded()) v = value;
    f.set(c, v);
}

std::vector<world::OccupancyGrid> generate_envs(const RunConfig& c, int n, std::uint64_t seed) {
    const auto ca = c.ca_config();
    std::vector<world::OccupancyGrid> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(world::generate_environment(derive_seed(seed, static_cast<std::uint64_t>(i)), ca));
    return out;
}

}  // namespace apple::config
