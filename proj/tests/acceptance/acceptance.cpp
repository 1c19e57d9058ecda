#include <algorithm>
#include <array>
#include <boost/math/special_functions/beta.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "apple/eval/stats.hpp"
#include "apple/learn/continuous_policy.hpp"
#include "apple/learn/discrete_policy.hpp"
#include "apple/nn/mlp.hpp"
#include "apple/oracle/oracle.hpp"
#include "commands.hpp"
#include "planted.hpp"
#include "support.hpp"

using namespace apple;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int digits = 3) {
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + p.string());
    return {std::istreambuf_iterator<char>(is), {}};
}

void apple_cmd(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    if (const int code = cli::run(args, out, err); code != cli::kExitOk)
        throw std::runtime_error("apple " + args.front() + " exited " + std::to_string(code) + ": " + err.str());
}

// 1 ------------------------------------------------------------------------

/// Largest relative gap between backprop and central differences over every
/// parameter of a random network, for the objective <og, f(x)>.
double worst_gradient_error(const std::vector<int>& shape, std::uint64_t seed) {
    Rng rng(seed);
    auto net = nn::Mlp::he_uniform(shape, rng);
    // Non-zero biases so every unit sits away from the ReLU kink at init.
    for (auto& layer : net.layers())
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = rng.uniform(-0.1, 0.1);
    auto flat = net.flat_params();
    nn::Vector x(shape.front()), og(shape.back());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(0.0, 1.0);
    for (Eigen::Index i = 0; i < og.size(); ++i) og[i] = rng.uniform(-1.0, 1.0);

    const auto g = net.backward(x, og);
    std::vector<double> analytic;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        analytic.insert(analytic.end(), g.weight[l].data(), g.weight[l].data() + g.weight[l].size());
        analytic.insert(analytic.end(), g.bias[l].data(), g.bias[l].data() + g.bias[l].size());
    }
    const double h = 1e-6;
    double worst = 0.0;
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const double keep = flat[i];
        flat[i] = keep + h;
        net.set_flat_params(flat);
        const double up = net.forward(x).dot(og);
        flat[i] = keep - h;
        net.set_flat_params(flat);
        const double down = net.forward(x).dot(og);
        flat[i] = keep;
        net.set_flat_params(flat);
        const double numeric = (up - down) / (2 * h);
        const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-4});
        worst = std::max(worst, std::abs(numeric - analytic[i]) / scale);
    }
    return worst;
}

Verdict gradient_correctness() {
    const std::vector<std::vector<int>> shapes = {{721, 128, 128, 7}, {729, 128, 128, 1}, {721, 128, 128, 21},
                                                  {16, 32, 32, 7},    {9, 16, 1},          {5, 8, 8, 8, 3},
                                                  {721, 16, 2},       {3, 64, 4},          {30, 20, 10, 5},
                                                  {1, 4, 4, 1}};
    double worst = 0.0;
    for (std::size_t i = 0; i < shapes.size(); ++i) worst = std::max(worst, worst_gradient_error(shapes[i], 100 + i));
    return {worst <= 1e-4, "10 networks, worst relative error " + fmt(worst)};
}

// 2 ------------------------------------------------------------------------

/// Entry k is best in the k-th seventh of the goal-angle range.
int best_entry(const planner::RobotState& s) {
    return std::clamp(static_cast<int>(std::floor((s.local_goal + 3.0) / 6.0 * 7.0)), 0, 6);
}

std::vector<learn::FeedbackRecord> rule_dataset(bool leveled, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<learn::FeedbackRecord> data;
    for (int i = 0; i < 2000; ++i) {
        learn::FeedbackRecord r;
        r.state = test::random_state(rng);
        r.library_index = static_cast<int>(rng.below(7));
        const int gap = std::abs(r.library_index - best_entry(r.state));
        if (leveled) {
            r.level = gap == 0 ? 2 : gap == 1 ? 1 : 0;
        } else {
            r.value = 1.0 - 0.5 * gap;
        }
        r.timestamp = i;
        data.push_back(std::move(r));
    }
    return data;
}

double full_loss(const learn::DiscretePolicy& p, const std::vector<const learn::FeedbackRecord*>& all) {
    return p.loss_and_gradients(all).first;
}

Verdict predictor_convergence() {
    std::string detail;
    bool pass = true;
    for (const bool leveled : {true, false}) {
        const auto data = rule_dataset(leveled, leveled ? 21 : 22);
        std::vector<const learn::FeedbackRecord*> all;
        for (const auto& r : data) all.push_back(&r);
        learn::DiscretePolicyConfig cfg;
        cfg.levels = leveled ? 3 : 0;
        learn::DiscretePolicy policy(cfg, 23);
        const double initial = full_loss(policy, all);
        Rng rng(24);
        std::vector<const learn::FeedbackRecord*> batch(64);
        for (int step = 0; step < 2000; ++step) {
            for (auto& b : batch) b = all[rng.below(all.size())];
            (void)policy.train_step(batch);
        }
        const double final = full_loss(policy, all);
        pass = pass && final <= 0.1 * initial;
        detail += std::string(leveled ? "cross-entropy " : ", MSE ") + fmt(initial) + " -> " + fmt(final) + " (" +
                  fmt(100.0 * final / initial, 2) + "%)";
    }
    return {pass, detail};
}

// 3 ------------------------------------------------------------------------

Verdict planted_bandit() {
    using test::PlantedBandit;
    Rng rng(31);
    const auto data = PlantedBandit::records(rng, 20000);
    const auto best = PlantedBandit::empirical_best(data);
    learn::DiscretePolicyConfig cfg;
    cfg.levels = PlantedBandit::kLevels;
    learn::DiscretePolicy policy(cfg, 32);
    PlantedBandit::train(policy, data, 3000, 64, rng);
    const double acc = PlantedBandit::greedy_accuracy(policy, best, rng, 2000);
    const bool planted = best == PlantedBandit::kBest;
    return {planted && acc >= 0.95, "dominant entries {" + std::to_string(best[0]) + "," + std::to_string(best[1]) +
                                        "}, greedy agreement " + fmt(100.0 * acc, 4) + "% on 2000 held-out states"};
}

// 4 ------------------------------------------------------------------------

/// F(x, theta) = -(theta - c)^2 for every state.
class Quadratic final : public learn::FeedbackModel {
public:
    explicit Quadratic(double c) : c_(c) {}
    nn::Vector evaluate(const nn::Matrix&, const nn::Matrix& thetas, nn::Matrix* dtheta) const override {
        const nn::Vector d = thetas.row(0).transpose().array() - c_;
        if (dtheta) *dtheta = (-2.0 * d).transpose();
        return -d.array().square();
    }

private:
    double c_;
};

Verdict actor_temperature() {
    learn::ContinuousPolicyConfig cfg;
    cfg.space = learn::BoxSpace{{0.2}, {2.0}, {false}};
    cfg.actor_adam.lr = 3e-3;
    cfg.alpha_adam.lr = 3e-3;
    cfg.target_entropy = -1.0;
    learn::ContinuousPolicy policy(cfg, 41);
    Rng rng(41);
    std::vector<planner::RobotState> states;
    for (int i = 0; i < 16; ++i) states.push_back(test::random_state(rng));
    std::vector<const planner::RobotState*> ptrs;
    for (const auto& s : states) ptrs.push_back(&s);
    const double c = 1.2;
    const Quadratic critic(c);
    for (int i = 0; i < 2000; ++i) {
        (void)policy.train_actor(ptrs, critic, rng);
        (void)policy.update_temperature(ptrs, rng);
    }
    double mean = 0.0, entropy = 0.0;
    for (const auto* s : ptrs) mean += policy.sample(*s, true, rng).theta[0];
    mean /= static_cast<double>(ptrs.size());
    const int draws = 16000;
    for (int i = 0; i < draws; ++i) entropy -= policy.sample(*ptrs[static_cast<std::size_t>(i) % ptrs.size()], false, rng).log_prob;
    entropy /= draws;
    const double range = 2.0 - 0.2;
    const bool pass = std::abs(mean - c) <= 0.05 * range && std::abs(entropy - *cfg.target_entropy) <= 1.0;
    return {pass, "mean " + fmt(mean, 4) + " (optimum " + fmt(c) + ", tolerance " + fmt(0.05 * range) + "), entropy " +
                      fmt(entropy) + " nat (target " + fmt(*cfg.target_entropy) + ")"};
}

// 5 ------------------------------------------------------------------------

Verdict oracle_properties() {
    Rng rng(51);
    std::size_t bound_violations = 0;
    for (int i = 0; i < 1000000; ++i) {
        const double v = rng.uniform(-2.0, 2.0), g = rng.uniform(-10.0, 10.0);
        if (std::abs(oracle::oracle_feedback(v, g)) > std::abs(v)) ++bound_violations;
    }

    // Worked example: L = 3 over [-2, 2]; 0.7 lands in floor(2.7 / 4 * 3) = 2.
    const oracle::OracleConfig l3{3, 1.0, 2.0};
    bool worked = oracle::discretize(0.7, l3) == 2 && oracle::discretize(0.0, l3) == 1 &&
                  oracle::discretize(-2.0, l3) == 0 && oracle::discretize(2.0, l3) == 2;
    std::size_t order_violations = 0;
    for (int i = 0; i < 100000; ++i) {
        double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
        if (a > b) std::swap(a, b);
        const int la = oracle::discretize(a, l3);
        if (la > oracle::discretize(b, l3)) ++order_violations;
        if (la != std::min(2, static_cast<int>(std::floor((a + 2.0) / 4.0 * 3.0)))) ++order_violations;
    }

    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < 1000; ++i) pairs.emplace_back(rng.uniform(0.0, 2.0), rng.uniform(-3.0, 3.0));
    std::vector<double> first;
    for (auto [v, g] : pairs) first.push_back(oracle::oracle_feedback(v, g));
    for (int i = 0; i < 10000; ++i) (void)oracle::oracle_feedback(rng.uniform(), rng.uniform());
    bool stateless = true;
    for (std::size_t i = pairs.size(); i-- > 0;)
        stateless = stateless && oracle::oracle_feedback(pairs[i].first, pairs[i].second) == first[i];

    const bool pass = bound_violations == 0 && worked && order_violations == 0 && stateless;
    return {pass, std::to_string(bound_violations) + " bound violations in 1e6, worked example " +
                      (worked ? "ok" : "wrong") + ", " + std::to_string(order_violations) +
                      " ordering/bin violations, stateless " + (stateless ? "yes" : "no")};
}

// 6, 7, 9 ----------------------------------------------------------------

struct Simulated {
    nlohmann::json report;
    std::string error;
};

/// Trains L=3 and L=2 policies with the default settings and evaluates both
/// against the default parameters on the training environments.
Simulated simulated_replication(const fs::path& work) {
    Simulated s;
    try {
        for (const char* l : {"3", "2"}) apple_cmd({"train", "--levels", l, "--out", (work / ("l" + std::string(l))).string(), "--quiet"});
        apple_cmd({"eval", "--ckpt", (work / "l3").string(), "--ckpt", (work / "l2").string(), "--runs", "20", "--report",
             (work / "report.md").string(), "--quiet"});
        s.report = nlohmann::json::parse(slurp(work / "report.json"));
    } catch (const std::exception& e) {
        s.error = e.what();
    }
    return s;
}

const nlohmann::json& method(const nlohmann::json& report, const std::string& name) {
    for (const auto& m : report["methods"])
        if (m["name"] == name) return m;
    throw std::runtime_error("report has no method " + name);
}

Verdict beats_default(const Simulated& s) {
    if (!s.error.empty()) return {false, s.error};
    const double apple = method(s.report, "apple:l3")["mean_time"], base = method(s.report, "default")["mean_time"];
    int worse = -1;
    for (const auto& p : s.report["pairs"])
        if (p["method"] == "apple:l3" && p["versus"] == "default") worse = p["worse"];
    const bool pass = apple < base && worse >= 0 && worse <= 1;
    return {pass, "mean " + fmt(apple, 4) + " s vs default " + fmt(base, 4) + " s, significantly worse in " +
                      std::to_string(worse) + "/10 environments"};
}

Verdict resolution_order(const Simulated& s) {
    if (!s.error.empty()) return {false, s.error};
    const double l3 = method(s.report, "apple:l3")["mean_time"], l2 = method(s.report, "apple:l2")["mean_time"];
    return {l3 <= 1.02 * l2, "L=3 " + fmt(l3, 4) + " s vs L=2 " + fmt(l2, 4) + " s"};
}

Verdict determinism(const fs::path& work) {
    try {
        const auto again = work / "l3_repeat";
        apple_cmd({"train", "--levels", "3", "--out", again.string(), "--quiet"});
        bool same = true;
        for (const char* f : {"dataset.log", "checkpoint.json"})
            same = same && slurp(work / "l3" / f) == slurp(again / f);
        return {same, std::string("dataset.log and checkpoint.json ") + (same ? "identical" : "differ")};
    } catch (const std::exception& e) {
        return {false, e.what()};
    }
}

// 8 ------------------------------------------------------------------------

/// Two-sided p of Welch's test with the tail taken from boost's incomplete
/// beta: P(|T| >= |t|) = I_{dof / (dof + t^2)}(dof / 2, 1 / 2).
double boost_welch_p(const std::vector<double>& a, const std::vector<double>& b) {
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double ma = evalx::mean(a), mb = evalx::mean(b);
    const double qa = evalx::sample_variance(a) / na, qb = evalx::sample_variance(b) / nb;
    const double t = (ma - mb) / std::sqrt(qa + qb);
    const double dof = (qa + qb) * (qa + qb) / (qa * qa / (na - 1) + qb * qb / (nb - 1));
    return boost::math::ibeta(dof / 2, 0.5, dof / (dof + t * t));
}

Verdict welch_equivalence() {
    Rng rng(81);
    auto sample = [&](int n, double mu, double sd) {
        std::vector<double> v;
        for (int i = 0; i < n; ++i) v.push_back(mu + sd * rng.normal());
        return v;
    };
    double worst = 0.0;
    bool symmetric = true, scale_free = true;
    for (int i = 0; i < 100; ++i) {
        const auto a = sample(2 + static_cast<int>(rng.below(40)), rng.uniform(5, 40), rng.uniform(0.1, 10.0));
        const auto b = sample(2 + static_cast<int>(rng.below(40)), rng.uniform(5, 40), rng.uniform(0.1, 10.0));
        const auto r = evalx::welch_ttest(a, b);
        worst = std::max(worst, std::abs(r.p - boost_welch_p(a, b)));
        const auto rev = evalx::welch_ttest(b, a);
        symmetric = symmetric && std::abs(rev.p - r.p) <= 1e-12 && std::abs(rev.t + r.t) <= 1e-9 * std::max(1.0, std::abs(r.t));
        const double k = rng.uniform(0.01, 100.0), shift = rng.uniform(-50.0, 50.0);
        auto as = a, bs = b;
        for (auto& v : as) v = k * v + shift;
        for (auto& v : bs) v = k * v + shift;
        const auto scaled = evalx::welch_ttest(as, bs);
        scale_free = scale_free && std::abs(scaled.p - r.p) <= 1e-9 && std::abs(scaled.t - r.t) <= 1e-7 * std::max(1.0, std::abs(r.t));
    }
    return {worst <= 1e-6 && symmetric && scale_free, "worst |p - p_ref| " + fmt(worst) + " over 100 pairs, symmetric " +
                                                          (symmetric ? "yes" : "no") + ", affine-invariant " +
                                                          (scale_free ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
    fs::path work = fs::temp_directory_path() / "apple_acceptance";
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--workdir" && i + 1 < argc) {
            work = argv[++i];
        } else {
            only.insert(std::stoi(a));
        }
    }
    auto wanted = [&](int c) { return only.empty() || only.count(c) > 0; };

    bool all = true;
    auto report = [&](int c, const std::function<Verdict()>& check) {
        if (!wanted(c)) return;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        all = all && v.pass;
        std::cout << "criterion " << c << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail << "  ["
                  << std::fixed << std::setprecision(1) << secs << " s]" << std::defaultfloat << std::endl;
    };

    report(1, gradient_correctness);
    report(2, predictor_convergence);
    report(3, planted_bandit);
    report(4, actor_temperature);
    report(5, oracle_properties);

    Simulated sim;
    if (wanted(6) || wanted(7) || wanted(9)) {
        fs::remove_all(work);
        fs::create_directories(work);
    }
    report(6, [&] {
        sim = simulated_replication(work);
        return beats_default(sim);
    });
    report(7, [&] {
        if (!wanted(6)) sim = simulated_replication(work);
        return resolution_order(sim);
    });
    report(8, welch_equivalence);
    report(9, [&] {
        if (!fs::exists(work / "l3" / "checkpoint.json")) apple_cmd({"train", "--levels", "3", "--out", (work / "l3").string(), "--quiet"});
        return determinism(work);
    });
    return all ? 0 : 1;
}
