#include "apple/gateway/serve.hpp"

#include <chrono>
#include <deque>
#include <fstream>
#include <future>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>
#include <variant>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "apple/gateway/protocol.hpp"
#include "apple/gateway/queue.hpp"
#include "apple/rng.hpp"
#include "apple/world/lidar.hpp"

namespace apple::gateway {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

EpisodeConfig ServeConfig::default_human_episode() {
    EpisodeConfig e;
    e.mode = FeedbackMode::Human;
    e.control_hz = 2.0;
    e.explore = true;
    e.random_explore_prob = 0.3;
    return e;
}

void ServeConfig::validate() const {
    episode.validate();
    human.validate();
    if (episode.mode != FeedbackMode::Human) throw InvalidArgument("serve runs in human feedback mode");
    if (speed < 0.0) throw InvalidArgument("speed must be non-negative");
    if (episodes < 0) throw InvalidArgument("episodes must be non-negative");
    if (client_queue == 0 || intake_queue == 0 || record_queue == 0) throw InvalidArgument("queue sizes must be positive");
    if (session_id.empty()) throw InvalidArgument("session id must not be empty");
}

namespace {

struct PolicySnapshot {
    std::optional<learn::DiscretePolicy> discrete;
    std::optional<learn::ContinuousPolicy> continuous;
};

std::shared_ptr<const PolicySnapshot> snapshot_of(const Learner& l) {
    auto s = std::make_shared<PolicySnapshot>();
    if (l.kind() == PolicyKind::Discrete) s->discrete = l.discrete();
    else s->continuous = l.continuous();
    return s;
}

struct TrainTick {};
using TrainerItem = std::variant<learn::FeedbackRecord, TrainTick>;

class Session;

/// State shared between the network thread and the others.
struct Hub {
    std::mutex mu;
    std::set<std::shared_ptr<Session>> sessions;
    std::string hello;
    std::string grid;
    std::atomic<std::int64_t> frames_sent{0};
    std::atomic<std::int64_t> frames_dropped{0};
    std::atomic<std::int64_t> events_received{0};
    std::atomic<std::int64_t> events_rejected{0};
    std::atomic<std::int64_t> clients{0};
};

class Session : public std::enable_shared_from_this<Session> {
public:
    Session(tcp::socket socket, Hub& hub, BoundedQueue<FeedbackEvent>& intake, std::string session_id, int levels,
            std::size_t queue_cap)
        : ws_(std::move(socket)),
          hub_(hub),
          intake_(intake),
          session_id_(std::move(session_id)),
          levels_(levels),
          cap_(queue_cap) {}

    void run() {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept([self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
    }

    /// Must run on the io thread.
    void enqueue(std::shared_ptr<const std::string> msg) {
        if (closed_) return;
        if (out_.size() >= cap_) {
            out_.pop_front();
            ++hub_.frames_dropped;
        }
        out_.push_back(std::move(msg));
        if (!writing_) write_next();
    }

    void close() {
        if (closed_) return;
        closed_ = true;
        beast::error_code ec;
        auto& sock = beast::get_lowest_layer(ws_).socket();
        sock.shutdown(tcp::socket::shutdown_both, ec);
        sock.close(ec);
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) return;
        {
            std::lock_guard lock(hub_.mu);
            hub_.sessions.insert(shared_from_this());
            enqueue(std::make_shared<const std::string>(hub_.hello));
            if (!hub_.grid.empty()) enqueue(std::make_shared<const std::string>(hub_.grid));
        }
        ++hub_.clients;
        read_next();
    }

    void read_next() {
        ws_.async_read(buf_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
    }

    void on_read(beast::error_code ec) {
        if (ec) {
            drop();
            return;
        }
        const std::string text = beast::buffers_to_string(buf_.data());
        buf_.consume(buf_.size());
        ++hub_.events_received;
        try {
            auto ev = parse_feedback_frame(text, levels_);
            if (ev.session_id != session_id_)
                throw ProtocolError("bad_session", "unknown session '" + ev.session_id + "'");
            const double ts = ev.client_ts;
            intake_.push(std::move(ev));
            enqueue(std::make_shared<const std::string>(ack_frame(ts, "queued").dump()));
        } catch (const ProtocolError& e) {
            ++hub_.events_rejected;
            enqueue(std::make_shared<const std::string>(error_frame(e.code(), e.what()).dump()));
        }
        read_next();
    }

    void write_next() {
        if (out_.empty() || closed_) {
            writing_ = false;
            return;
        }
        writing_ = true;
        auto msg = out_.front();
        out_.pop_front();
        ws_.text(true);
        ws_.async_write(net::buffer(*msg), [self = shared_from_this(), msg](beast::error_code ec, std::size_t) {
            if (ec) {
                self->writing_ = false;
                self->drop();
                return;
            }
            ++self->hub_.frames_sent;
            self->write_next();
        });
    }

    void drop() {
        closed_ = true;
        std::lock_guard lock(hub_.mu);
        hub_.sessions.erase(shared_from_this());
    }

    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buf_;
    Hub& hub_;
    BoundedQueue<FeedbackEvent>& intake_;
    std::string session_id_;
    int levels_;
    std::size_t cap_;
    std::deque<std::shared_ptr<const std::string>> out_;
    bool writing_ = false;
    bool closed_ = false;
};

}  // namespace

struct Service::Impl {
    ServeConfig cfg;
    Learner learner;
    std::vector<world::OccupancyGrid> envs;

    net::io_context ioc{1};
    tcp::acceptor acceptor{ioc};
    std::uint16_t bound_port = 0;
    Hub hub;

    BoundedQueue<FeedbackEvent> intake;
    BoundedQueue<TrainerItem> records;

    std::mutex snap_mu;
    std::shared_ptr<const PolicySnapshot> snapshot;

    std::atomic<bool> stopping{false};
    std::atomic<bool> started{false};
    bool finished = false;
    std::thread net_thread, sim_thread, trainer_thread;

    std::atomic<std::int64_t> episodes{0}, stale{0}, merged{0}, record_count{0}, negatives{0}, autos{0},
        train_steps{0};

    Impl(ServeConfig c, Learner l, std::vector<world::OccupancyGrid> e)
        : cfg(std::move(c)),
          learner(std::move(l)),
          envs(std::move(e)),
          intake(cfg.intake_queue),
          records(cfg.record_queue) {}

    void broadcast(const nlohmann::json& frame) {
        auto msg = std::make_shared<const std::string>(frame.dump());
        net::post(ioc, [this, msg] {
            std::lock_guard lock(hub.mu);
            for (const auto& s : hub.sessions) s->enqueue(msg);
        });
    }

    void do_accept() {
        acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
            if (ec) return;
            std::make_shared<Session>(std::move(socket), hub, intake, cfg.session_id, cfg.human.levels,
                                      cfg.client_queue)
                ->run();
            do_accept();
        });
    }

    void trainer_loop() {
        while (true) {
            auto item = records.pop_for(std::chrono::milliseconds(50));
            if (!item) {
                if (records.closed()) return;
                continue;
            }
            if (auto* rec = std::get_if<learn::FeedbackRecord>(&*item)) {
                learner.add_feedback(std::move(*rec));
                ++record_count;
            } else if (learner.on_control_tick()) {
                ++train_steps;
                auto snap = snapshot_of(learner);
                std::lock_guard lock(snap_mu);
                snapshot = std::move(snap);
            }
        }
    }

    void sim_loop() {
        const auto& library = learner.library().library;
        FeedbackWindows windows(cfg.human);
        const auto wall_start = std::chrono::steady_clock::now();
        double sim_offset = 0.0;
        for (std::int64_t ep = 0; (cfg.episodes == 0 || ep < cfg.episodes) && !stopping; ++ep) {
            const auto& grid = envs[static_cast<std::size_t>(ep) % envs.size()];
            {
                std::lock_guard lock(hub.mu);
                hub.grid = grid_frame(ep, grid).dump();
            }
            broadcast(grid_frame(ep, grid));
            windows.reset();

            std::shared_ptr<const PolicySnapshot> snap;
            std::unique_ptr<ParamSelector> base, explore;
            ParamSelector* selector = nullptr;
            auto refresh = [&] {
                std::shared_ptr<const PolicySnapshot> latest;
                {
                    std::lock_guard lock(snap_mu);
                    latest = snapshot;
                }
                if (latest == snap) return;
                snap = std::move(latest);
                if (snap->discrete) {
                    base = std::make_unique<DiscreteSelector>(*snap->discrete, library, false);
                    if (cfg.episode.explore) {
                        explore = std::make_unique<RandomExploreSelector>(*base, library, cfg.episode.random_explore_prob);
                        selector = explore.get();
                    } else {
                        selector = base.get();
                    }
                } else {
                    base = std::make_unique<ContinuousSelector>(*snap->continuous, !cfg.episode.explore);
                    selector = base.get();
                }
            };
            refresh();
            // Forwards to whichever snapshot selector is current.
            struct Forward final : ParamSelector {
                ParamSelector** target;
                explicit Forward(ParamSelector** t) : target(t) {}
                ParamChoice choose(const planner::RobotState& s, Rng& rng) override { return (*target)->choose(s, rng); }
            } forward(&selector);

            auto ep_cfg = cfg.episode;
            ep_cfg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(ep));
            const double dt = 1.0 / ep_cfg.sim_hz;
            planner::PlannerParams last_theta;
            int last_index = -1;

            auto flush_windows = [&](double now) {
                for (auto& r : windows.advance(now)) {
                    if (r.source == learn::FeedbackSource::AutoPositive) ++autos;
                    else if (r.level < cfg.human.levels - 1) ++negatives;
                    records.push(std::move(r));
                }
            };
            auto drain_intake = [&](double now) {
                while (auto ev = intake.try_pop()) {
                    const auto res = windows.submit(*ev, now);
                    if (res == FeedbackWindows::Intake::Stale) ++stale;
                    if (res == FeedbackWindows::Intake::Merged) ++merged;
                }
            };

            EpisodeHooks hooks;
            hooks.before_control = [&](double) {
                refresh();
                records.push(TrainTick{});
            };
            hooks.on_control = [&](const ControlTick& tick) {
                windows.on_control(tick);
                last_theta = tick.choice.params;
                last_index = tick.choice.library_index;
            };
            hooks.on_frame = [&](const SimFrame& f) {
                drain_intake(f.time);
                flush_windows(f.time);
                StateInfo s;
                s.t = f.time;
                s.pose = f.pose;
                s.scan = decimate_scan(*f.scan);
                s.theta = last_theta;
                s.theta_index = last_index;
                s.episode_id = ep;
                s.elapsed = f.time;
                broadcast(state_frame(s));
                if (cfg.speed > 0.0) {
                    const auto due = wall_start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                                      std::chrono::duration<double>((sim_offset + f.time + dt) / cfg.speed));
                    std::this_thread::sleep_until(due);
                }
            };
            hooks.should_stop = [&] { return stopping.load(); };

            EpisodeResult res;
            try {
                res = run_episode(grid, forward, ep_cfg, {}, hooks);
            } catch (const std::exception& e) {
                std::cerr << "serve: episode " << ep << " failed: " << e.what() << '\n';
                continue;
            }
            drain_intake(res.traversal_time);
            flush_windows(res.traversal_time);
            StateInfo s;
            s.t = res.traversal_time;
            s.pose = res.trajectory.back();
            try {
                s.scan = decimate_scan(world::raycast(grid, s.pose, ep_cfg.lidar.max_range));
            } catch (const world::PoseInsideObstacle&) {
                s.scan.assign(kStreamRays, ep_cfg.lidar.max_range);
            }
            s.theta = last_theta;
            s.theta_index = last_index;
            s.episode_id = ep;
            s.status = to_string(res.outcome);
            s.elapsed = res.traversal_time;
            broadcast(state_frame(s));
            sim_offset += res.traversal_time;
            ++episodes;
        }
    }
};

Service::Service(ServeConfig cfg, Learner learner, std::vector<world::OccupancyGrid> envs) {
    cfg.validate();
    if (envs.empty()) throw InvalidArgument("serve needs at least one environment");
    const int levels = learner.config().levels;
    if (levels != cfg.human.levels)
        throw InvalidArgument("policy expects " + std::to_string(levels) + " feedback levels, session offers " +
                              std::to_string(cfg.human.levels));
    impl_ = std::make_unique<Impl>(std::move(cfg), std::move(learner), std::move(envs));
}

Service::~Service() {
    if (impl_ && impl_->started && !impl_->finished) {
        stop();
        try {
            wait();
        } catch (...) {
        }
    }
}

void Service::start() {
    auto& m = *impl_;
    if (m.started) throw InvalidArgument("service already started");
    const tcp::endpoint ep(net::ip::make_address(m.cfg.host), m.cfg.port);
    m.acceptor.open(ep.protocol());
    m.acceptor.set_option(net::socket_base::reuse_address(true));
    m.acceptor.bind(ep);
    m.acceptor.listen();
    m.bound_port = m.acceptor.local_endpoint().port();

    SessionInfo info;
    info.session_id = m.cfg.session_id;
    info.levels = m.cfg.human.levels;
    info.feedback_hz = m.cfg.human.rate_hz;
    info.sim_hz = m.cfg.episode.sim_hz;
    info.max_range = m.cfg.episode.lidar.max_range;
    m.hub.hello = hello_frame(info).dump();

    if (!m.cfg.out_dir.empty()) {
        std::filesystem::create_directories(m.cfg.out_dir);
        m.learner.dataset().attach_log(m.cfg.out_dir / "dataset.log");
    }
    m.snapshot = snapshot_of(m.learner);
    m.started = true;
    m.do_accept();
    m.net_thread = std::thread([&m] { m.ioc.run(); });
    m.trainer_thread = std::thread([&m] { m.trainer_loop(); });
    m.sim_thread = std::thread([&m] { m.sim_loop(); });
}

std::uint16_t Service::port() const noexcept { return impl_->bound_port; }

void Service::stop() noexcept { impl_->stopping = true; }

void Service::wait() {
    auto& m = *impl_;
    if (!m.started || m.finished) return;
    m.sim_thread.join();
    m.records.close();
    m.trainer_thread.join();
    // Let queued frames go out before closing the sockets.
    auto flushed = std::make_shared<std::promise<void>>();
    auto fut = flushed->get_future();
    net::post(m.ioc, [flushed] { flushed->set_value(); });
    fut.wait_for(std::chrono::seconds(2));
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    net::post(m.ioc, [&m] {
        beast::error_code ec;
        m.acceptor.close(ec);
        std::lock_guard lock(m.hub.mu);
        for (const auto& s : m.hub.sessions) s->close();
        m.hub.sessions.clear();
    });
    m.ioc.stop();
    m.net_thread.join();
    m.finished = true;
    m.learner.dataset().flush();
    if (!m.cfg.out_dir.empty()) {
        std::ofstream os(m.cfg.out_dir / "policy.json");
        os << m.learner.to_json().dump(1) << '\n';
        if (!os) throw Error("cannot write " + (m.cfg.out_dir / "policy.json").string());
    }
}

ServeStats Service::stats() const {
    const auto& m = *impl_;
    ServeStats s;
    s.episodes = m.episodes;
    s.frames_sent = m.hub.frames_sent;
    s.frames_dropped = m.hub.frames_dropped;
    s.events_received = m.hub.events_received;
    s.events_rejected = m.hub.events_rejected;
    s.events_stale = m.stale;
    s.events_merged = m.merged;
    s.records = m.record_count;
    s.negatives = m.negatives;
    s.auto_positives = m.autos;
    s.train_steps = m.train_steps;
    s.clients = m.hub.clients;
    return s;
}

const Learner& Service::learner() const {
    if (!impl_->finished) throw InvalidArgument("learner is owned by the trainer until wait() returns");
    return impl_->learner;
}

}  // namespace apple::gateway
