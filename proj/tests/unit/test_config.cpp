#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "apple/config/run_config.hpp"

using namespace apple;
using namespace apple::config;
using nlohmann::json;

namespace {

/// key -> default cell of the table in docs/config.md.
std::map<std::string, std::string> documented_defaults() {
    std::ifstream is(std::string(APPLE_SOURCE_DIR) + "/docs/config.md");
    EXPECT_TRUE(is.good());
    std::map<std::string, std::string> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.rfind("| `", 0) != 0) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, '|')) {
            const auto a = cell.find_first_not_of(' ');
            const auto b = cell.find_last_not_of(' ');
            cells.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
        }
        // cells[0] is the text before the first pipe.
        if (cells.size() < 4) continue;
        auto strip = [](std::string s) { return s.size() >= 2 && s.front() == '`' ? s.substr(1, s.size() - 2) : s; };
        rows[strip(cells[1])] = strip(cells[2]);
    }
    return rows;
}

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
    const auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << text;
    return p;
}

}  // namespace

TEST(ConfigDocs, TableMatchesDefaults) {
    const auto rows = documented_defaults();
    const RunConfig c;
    std::size_t seen = 0;
    for (const auto& f : config_fields()) {
        const auto it = rows.find(f.key);
        ASSERT_NE(it, rows.end()) << f.key << " is not documented";
        EXPECT_EQ(json::parse(it->second), f.get(c)) << f.key;
        ++seen;
    }
    EXPECT_EQ(rows.size(), seen) << "documented keys that do not exist";
}

TEST(ConfigDefaults, StatedValues) {
    const auto j = to_json(RunConfig{});
    auto at = [&](const std::string& dotted) {
        std::string ptr = "/" + dotted;
        std::replace(ptr.begin(), ptr.end(), '.', '/');
        return j.at(json::json_pointer(ptr));
    };
    EXPECT_EQ(at("world.fill_prob_easy"), 0.10);
    EXPECT_EQ(at("world.fill_prob_medium"), 0.15);
    EXPECT_EQ(at("world.fill_prob_hard"), 0.20);
    EXPECT_EQ(at("world.iterations"), 3);
    EXPECT_EQ(at("world.size"), 60);
    EXPECT_EQ(at("planner.horizon"), 1.0);
    EXPECT_EQ(at("planner.dt"), 0.1);
    EXPECT_EQ(at("episode.control_hz"), 1.0);
    EXPECT_EQ(at("episode.sim_hz"), 10.0);
    EXPECT_EQ(at("episode.timeout"), 100.0);
    EXPECT_EQ(at("episode.goal_tolerance"), 0.3);
    EXPECT_EQ(at("oracle.rate_hz"), 1.0);
    EXPECT_EQ(at("oracle.e_max"), 2.0);
    EXPECT_EQ(at("learner.hidden"), json::array({128, 128}));
    EXPECT_EQ(at("learner.lr"), 3e-4);
    EXPECT_EQ(at("learner.beta1"), 0.9);
    EXPECT_EQ(at("learner.beta2"), 0.999);
    EXPECT_EQ(at("learner.eps"), 1e-8);
    EXPECT_EQ(at("learner.epsilon_start"), 0.3);
    EXPECT_EQ(at("learner.epsilon_end"), 0.02);
    EXPECT_EQ(at("learner.batch_size"), 64);
    EXPECT_EQ(at("learner.warmup"), 500);
    EXPECT_EQ(at("learner.auto_positive_weight"), 1.0);
    EXPECT_EQ(at("eval.runs"), 20);
    EXPECT_EQ(at("eval.alpha"), 0.05);
    EXPECT_EQ(at("human.rate_hz"), 2.0);
    EXPECT_EQ(at("human.reaction_delay"), 0.5);
    EXPECT_EQ(at("human.control_hz"), 2.0);
    EXPECT_EQ(at("human.random_explore_prob"), 0.3);
    EXPECT_EQ(at("human.stale_windows"), 2);
    EXPECT_EQ(at("lidar.max_range"), 5.0);
    EXPECT_NO_THROW(RunConfig{}.validate());
}

TEST(Config, Precedence) {
    const auto file = write_temp("apple_test_cfg.json", R"({"seed": 5, "oracle": {"levels": 2}, "world": {"size": 40}})");
    auto c = load_config(file);
    std::filesystem::remove(file);
    EXPECT_EQ(c.seed, 5u);
    EXPECT_EQ(c.oracle.levels, 2);
    EXPECT_EQ(c.ca.size, 40);
    EXPECT_EQ(c.episode.sim_hz, 10.0);
    apply_override(c, "seed", "9");
    apply_override(c, "world.difficulty", "hard");
    apply_override(c, "learner.hidden", "[8,4]");
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.difficulty, "hard");
    EXPECT_EQ(c.learner.hidden, (std::vector<int>{8, 4}));
    EXPECT_EQ(c.ca_config().fill_prob, 0.20);
}

TEST(Config, RoundTripThroughJson) {
    RunConfig c;
    apply_override(c, "eval.runs", "7");
    apply_override(c, "learner.target_entropy", "-3.5");
    const auto back = apply_json(RunConfig{}, to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
    EXPECT_EQ(back.learner.target_entropy, -3.5);
}

TEST(Config, Rejections) {
    RunConfig c;
    EXPECT_THROW(apply_override(c, "world.nope", "1"), ConfigError);
    EXPECT_THROW(apply_override(c, "eval.runs", "\"many\""), ConfigError);
    EXPECT_THROW(apply_override(c, "eval.runs", "2.5"), ConfigError);
    EXPECT_THROW((void)apply_json(c, json{{"oracle", {{"levles", 3}}}}), ConfigError);
    EXPECT_THROW((void)load_config("/nonexistent/apple.json"), FileNotFound);
    const auto bad = write_temp("apple_test_bad.json", "{ nope");
    EXPECT_THROW((void)load_config(bad), ConfigError);
    std::filesystem::remove(bad);
    apply_override(c, "oracle.levels", "1");
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    apply_override(c, "world.difficulty", "extreme");
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, EnvironmentSetsAreSeeded) {
    RunConfig c;
    apply_override(c, "world.size", "30");
    const auto a = generate_envs(c, 3, 4), b = generate_envs(c, 3, 4), d = generate_envs(c, 3, 5);
    EXPECT_EQ(a, b);
    EXPECT_NE(a[0], d[0]);
}
