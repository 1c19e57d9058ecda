#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"

using namespace apple;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    return {std::istreambuf_iterator<char>(is), {}};
}

}  // namespace

TEST(Cli, VersionAndHelp) {
    auto r = run({"--version"});
    EXPECT_EQ(r.code, cli::kExitOk);
    EXPECT_NE(r.out.find("0.1.0"), std::string::npos);
    r = run({"--help"});
    EXPECT_EQ(r.code, cli::kExitOk);
    EXPECT_NE(r.out.find("gen-envs"), std::string::npos);
}

TEST(Cli, UsageErrors) {
    auto r = run({"gen-envs", "--bogus"});
    EXPECT_EQ(r.code, cli::kExitUsage);
    EXPECT_NE(r.err.find("--bogus"), std::string::npos);
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
    EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"--set", "world.nope=1", "gen-envs", "--n", "1"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"train", "--mode", "human", "--out", "x"}).code, cli::kExitUsage);
}

TEST(Cli, MissingFilesExitTwo) {
    auto r = run({"eval", "--ckpt", "/nonexistent/ckpt.json", "--envs", "1"});
    EXPECT_EQ(r.code, cli::kExitFailure);
    EXPECT_EQ(r.err.rfind("file not found:", 0), 0u);
    EXPECT_EQ(run({"--config", "/nonexistent/apple.json", "gen-envs"}).code, cli::kExitFailure);
    EXPECT_EQ(run({"replay", "--log", "/nonexistent/dataset.log"}).code, cli::kExitFailure);
}

TEST(Cli, GenEnvsIsDeterministic) {
    const auto a = fresh_dir("apple_cli_envs_a"), b = fresh_dir("apple_cli_envs_b");
    ASSERT_EQ(run({"gen-envs", "--n", "2", "--seed", "7", "--out", a.string()}).code, cli::kExitOk);
    ASSERT_EQ(run({"gen-envs", "--n", "2", "--seed", "7", "--out", b.string()}).code, cli::kExitOk);
    std::size_t grids = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path();
        grids += e.path().extension() == ".grid";
    }
    EXPECT_EQ(grids, 2u);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Cli, TrainEvalReplay) {
    const auto dir = fresh_dir("apple_cli_train");
    const std::vector<std::string> small = {"--set", "world.size=30", "--set", "learner.hidden=[8]",
                                            "--set", "learner.warmup=5"};
    auto args = small;
    args.insert(args.end(), {"train", "--levels", "2", "--envs", "1", "--budget", "20", "--seed", "3", "--out",
                             dir.string(), "--quiet"});
    auto r = run(args);
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_TRUE(fs::exists(dir / "checkpoint.json"));
    EXPECT_TRUE(fs::exists(dir / "config.json"));
    EXPECT_TRUE(fs::exists(dir / "envs"));

    args = small;
    args.insert(args.end(), {"eval", "--ckpt", dir.string(), "--runs", "2", "--report", (dir / "report.md").string(),
                             "--quiet"});
    r = run(args);
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_TRUE(fs::exists(dir / "report.md"));
    EXPECT_TRUE(fs::exists(dir / "report.json"));

    r = run({"replay", "--log", (dir / "dataset.log").string(), "--json"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_NE(r.out.find("20"), std::string::npos);

    // The saved config reproduces the run settings.
    r = run({"--config", (dir / "config.json").string(), "gen-envs", "--n", "1", "--out", (dir / "g").string()});
    EXPECT_EQ(r.code, cli::kExitOk) << r.err;
    fs::remove_all(dir);
}
