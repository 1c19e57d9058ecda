#include <gtest/gtest.h>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <cmath>
#include <filesystem>
#include <functional>

#include "apple/gateway/serve.hpp"
#include "apple/world/environment.hpp"

using namespace apple;
using namespace apple::gateway;
using nlohmann::json;

namespace net = boost::asio;
namespace beast = boost::beast;

namespace {

class Client {
public:
    explicit Client(std::uint16_t port) : ws_(ioc_) {
        net::ip::tcp::resolver resolver(ioc_);
        net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
        ws_.handshake("127.0.0.1", "/");
    }
    ~Client() {
        beast::error_code ec;
        ws_.close(beast::websocket::close_code::normal, ec);
    }

    json read() {
        beast::flat_buffer buf;
        ws_.read(buf);
        return json::parse(beast::buffers_to_string(buf.data()));
    }
    json read_until(const std::function<bool(const json&)>& pred) {
        for (;;) {
            auto f = read();
            if (pred(f)) return f;
        }
    }
    void send(const std::string& text) {
        ws_.text(true);
        ws_.write(net::buffer(text));
    }

private:
    net::io_context ioc_;
    beast::websocket::stream<net::ip::tcp::socket> ws_;
};

ServeConfig quick_config(double speed) {
    ServeConfig c;
    c.port = 0;
    c.speed = speed;
    c.episodes = 1;
    c.episode.timeout = 8.0;
    c.session_id = "test";
    return c;
}

Learner small_learner(int levels = 2) {
    LearnerConfig lc;
    lc.levels = levels;
    lc.hidden = {16};
    lc.warmup = 4;
    lc.batch_size = 4;
    return Learner(lc, {planner::ParameterLibrary::table(), planner::ParamBounds::table()}, 1);
}

std::string feedback(const std::string& session, double ts, const std::string& polarity) {
    return json{{"type", "feedback"}, {"session_id", session}, {"client_ts", ts}, {"polarity", polarity}}.dump();
}

bool is_state_after(const json& f, double t) { return f.at("type") == "state" && f.at("t").get<double>() >= t; }

}  // namespace

TEST(Serve, SilentEpisodeIsAllAutoPositive) {
    const auto out = std::filesystem::temp_directory_path() / "apple_test_serve_silent";
    std::filesystem::remove_all(out);
    auto cfg = quick_config(0.0);
    cfg.out_dir = out;
    Service s(cfg, small_learner(), {world::generate_environment(1, 0.15, 3, 60)});
    s.start();
    s.wait();
    const auto st = s.stats();
    EXPECT_EQ(st.episodes, 1);
    EXPECT_EQ(st.negatives, 0);
    EXPECT_EQ(st.auto_positives, st.records);
    // 8 s at 2 Hz
    EXPECT_LE(std::abs(st.records - 16), 1);
    EXPECT_EQ(s.learner().feedback_count(), st.records);
    EXPECT_TRUE(std::filesystem::exists(out / "policy.json"));
    EXPECT_EQ(static_cast<std::int64_t>(learn::load_log(out / "dataset.log").size()), st.records);
    std::filesystem::remove_all(out);
}

TEST(Serve, OneBadPressGivesOneNegative) {
    Service s(quick_config(4.0), small_learner(), {world::generate_environment(2, 0.15, 3, 60)});
    s.start();
    {
        Client c(s.port());
        const auto hello = c.read();
        EXPECT_EQ(hello.at("type"), "hello");
        EXPECT_EQ(hello.at("session_id"), "test");
        EXPECT_EQ(hello.at("levels"), 2);
        const auto state = c.read_until([](const json& f) { return is_state_after(f, 2.0); });
        EXPECT_EQ(state.at("scan").size(), 90u);
        c.send(feedback("test", state.at("t").get<double>(), "bad"));
        const auto ack = c.read_until([](const json& f) { return f.at("type") != "state"; });
        EXPECT_EQ(ack.at("type"), "ack");
        EXPECT_EQ(ack.at("status"), "queued");
    }
    s.wait();
    const auto st = s.stats();
    EXPECT_EQ(st.negatives, 1);
    EXPECT_EQ(st.auto_positives, st.records - 1);
    EXPECT_EQ(st.events_received, 1);
    EXPECT_EQ(st.events_stale, 0);
}

TEST(Serve, MalformedAndStaleFrames) {
    Service s(quick_config(4.0), small_learner(), {world::generate_environment(3, 0.15, 3, 60)});
    s.start();
    {
        Client c(s.port());
        (void)c.read();
        const auto state = c.read_until([](const json& f) { return is_state_after(f, 3.0); });
        auto not_state = [](const json& f) { return f.at("type") != "state"; };
        c.send("{broken");
        auto reply = c.read_until(not_state);
        EXPECT_EQ(reply.at("type"), "error");
        EXPECT_EQ(reply.at("code"), "bad_json");
        c.send(feedback("someone-else", state.at("t").get<double>(), "bad"));
        reply = c.read_until(not_state);
        EXPECT_EQ(reply.at("code"), "bad_session");
        c.send(feedback("test", 0.0, "sideways"));
        reply = c.read_until(not_state);
        EXPECT_EQ(reply.at("code"), "bad_value");
        // Session keeps going: a press stamped three seconds back is queued, then dropped as stale.
        c.send(feedback("test", state.at("t").get<double>() - 3.0, "bad"));
        reply = c.read_until(not_state);
        EXPECT_EQ(reply.at("type"), "ack");
    }
    s.wait();
    const auto st = s.stats();
    EXPECT_EQ(st.events_rejected, 3);
    EXPECT_EQ(st.events_stale, 1);
    EXPECT_EQ(st.negatives, 0);
    EXPECT_EQ(st.auto_positives, st.records);
}

TEST(Serve, LevelMismatchIsRejected) {
    auto cfg = quick_config(0.0);
    cfg.human.levels = 3;
    EXPECT_THROW(Service(cfg, small_learner(2), {world::generate_environment(1, 0.15, 3, 60)}), InvalidArgument);
}
