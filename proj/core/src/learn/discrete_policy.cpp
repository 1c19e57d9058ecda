#include "apple/learn/discrete_policy.hpp"

#include <algorithm>
#include <cmath>

#include "apple/nn/serialize.hpp"

namespace apple::learn {

using nlohmann::json;

double EpsilonSchedule::at(std::int64_t step) const noexcept {
    if (anneal_steps <= 0 || step >= anneal_steps) return end;
    if (step <= 0) return start;
    const double f = static_cast<double>(step) / static_cast<double>(anneal_steps);
    return start + (end - start) * f;
}

std::size_t argmax_first(std::span<const double> values) {
    if (values.empty()) throw InvalidArgument("argmax of an empty set");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

namespace {

void validate(const DiscretePolicyConfig& c) {
    if (c.library_size < 1) throw InvalidArgument("library size must be at least 1");
    if (c.levels < 0 || c.levels == 1) throw InvalidArgument("feedback levels must be 0 or at least 2");
    if (c.state_dims < 1) throw InvalidArgument("state dims must be positive");
    for (int h : c.hidden)
        if (h < 1) throw InvalidArgument("hidden layer sizes must be positive");
    if (!(c.adam.lr > 0.0)) throw InvalidArgument("learning rate must be positive");
    if (!(c.auto_positive_weight >= 0.0)) throw InvalidArgument("auto-positive weight must be non-negative");
}

int head_width(const DiscretePolicyConfig& c) { return c.levels > 0 ? c.levels : 1; }

nn::Mlp init_network(const DiscretePolicyConfig& c, std::uint64_t seed) {
    std::vector<int> sizes{c.state_dims};
    sizes.insert(sizes.end(), c.hidden.begin(), c.hidden.end());
    sizes.push_back(c.library_size * head_width(c));
    Rng rng(seed);
    auto net = nn::Mlp::he_uniform(sizes, rng);
    // Zero output layer: every head starts at the same (uniform) prediction.
    net.layers().back().weight.setZero();
    return net;
}

nn::Vector to_vector(const planner::RobotState& s) {
    nn::Vector v(static_cast<Eigen::Index>(s.scan.size() + 1));
    for (std::size_t i = 0; i < s.scan.size(); ++i) v[static_cast<Eigen::Index>(i)] = s.scan[i];
    v[static_cast<Eigen::Index>(s.scan.size())] = s.local_goal;
    return v;
}

json config_to_json(const DiscretePolicyConfig& c) {
    return {{"library_size", c.library_size},
            {"levels", c.levels},
            {"state_dims", c.state_dims},
            {"hidden", c.hidden},
            {"lr", c.adam.lr},
            {"beta1", c.adam.beta1},
            {"beta2", c.adam.beta2},
            {"adam_eps", c.adam.eps},
            {"epsilon_start", c.epsilon.start},
            {"epsilon_end", c.epsilon.end},
            {"epsilon_anneal_steps", c.epsilon.anneal_steps},
            {"auto_positive_weight", c.auto_positive_weight}};
}

DiscretePolicyConfig config_from_json(const json& j) {
    DiscretePolicyConfig c;
    c.library_size = j.at("library_size").get<int>();
    c.levels = j.at("levels").get<int>();
    c.state_dims = j.at("state_dims").get<int>();
    c.hidden = j.at("hidden").get<std::vector<int>>();
    c.adam.lr = j.at("lr").get<double>();
    c.adam.beta1 = j.at("beta1").get<double>();
    c.adam.beta2 = j.at("beta2").get<double>();
    c.adam.eps = j.at("adam_eps").get<double>();
    c.epsilon.start = j.at("epsilon_start").get<double>();
    c.epsilon.end = j.at("epsilon_end").get<double>();
    c.epsilon.anneal_steps = j.at("epsilon_anneal_steps").get<std::int64_t>();
    c.auto_positive_weight = j.at("auto_positive_weight").get<double>();
    return c;
}

}  // namespace

DiscretePolicy::DiscretePolicy(DiscretePolicyConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), net_((validate(cfg_), init_network(cfg_, seed))), adam_(net_, cfg_.adam) {}

nn::Vector DiscretePolicy::raw_outputs(const planner::RobotState& state) const {
    if (static_cast<int>(state.scan.size()) + 1 != cfg_.state_dims)
        throw nn::ShapeMismatch("state does not match the policy input size");
    return net_.forward(to_vector(state));
}

std::vector<double> DiscretePolicy::predict(const planner::RobotState& state) const {
    const nn::Vector out = raw_outputs(state);
    const int K = cfg_.library_size;
    std::vector<double> pred(static_cast<std::size_t>(K));
    if (cfg_.levels == 0) {
        for (int k = 0; k < K; ++k) pred[static_cast<std::size_t>(k)] = out[k];
        return pred;
    }
    const int L = cfg_.levels;
    for (int k = 0; k < K; ++k) {
        const auto logits = out.segment(k * L, L);
        const double mx = logits.maxCoeff();
        double z = 0.0, e = 0.0;
        for (int l = 0; l < L; ++l) {
            const double p = std::exp(logits[l] - mx);
            z += p;
            e += l * p;
        }
        pred[static_cast<std::size_t>(k)] = e / z;
    }
    return pred;
}

std::pair<double, nn::Gradients> DiscretePolicy::loss_and_gradients(
    std::span<const FeedbackRecord* const> batch) const {
    if (batch.empty()) throw InvalidArgument("training batch is empty");
    const auto B = static_cast<Eigen::Index>(batch.size());
    nn::Matrix x(cfg_.state_dims, B);
    for (Eigen::Index b = 0; b < B; ++b) {
        const FeedbackRecord& r = *batch[static_cast<std::size_t>(b)];
        if (!r.discrete_action() || r.library_index >= cfg_.library_size)
            throw ModeMismatch("record does not index the parameter library");
        if (r.has_level() != (cfg_.levels > 0))
            throw ModeMismatch(cfg_.levels > 0 ? "policy expects leveled feedback"
                                               : "policy expects continuous feedback");
        if (r.has_level() && r.level >= cfg_.levels) throw ModeMismatch("feedback level out of range");
        if (static_cast<int>(r.state.scan.size()) + 1 != cfg_.state_dims)
            throw nn::ShapeMismatch("record state does not match the policy input size");
        x.col(b) = to_vector(r.state);
    }

    nn::Mlp::Tape tape;
    const nn::Matrix out = net_.forward_batch(x, tape);
    nn::Matrix grad = nn::Matrix::Zero(out.rows(), out.cols());
    double loss = 0.0;
    const double inv_b = 1.0 / static_cast<double>(B);
    for (Eigen::Index b = 0; b < B; ++b) {
        const FeedbackRecord& r = *batch[static_cast<std::size_t>(b)];
        const double w = r.source == FeedbackSource::AutoPositive ? cfg_.auto_positive_weight : 1.0;
        if (cfg_.levels == 0) {
            const double d = out(r.library_index, b) - r.value;
            loss += w * d * d * inv_b;
            grad(r.library_index, b) = 2.0 * w * d * inv_b;
            continue;
        }
        const int L = cfg_.levels;
        const Eigen::Index off = static_cast<Eigen::Index>(r.library_index) * L;
        const auto logits = out.col(b).segment(off, L);
        const double mx = logits.maxCoeff();
        const nn::Vector ex = (logits.array() - mx).exp().matrix();
        const double z = ex.sum();
        loss += w * (std::log(z) + mx - logits[r.level]) * inv_b;
        for (int l = 0; l < L; ++l)
            grad(off + l, b) = w * (ex[l] / z - (l == r.level ? 1.0 : 0.0)) * inv_b;
    }
    return {loss, net_.backward(tape, grad)};
}

double DiscretePolicy::train_step(std::span<const FeedbackRecord* const> batch) {
    auto [loss, grads] = loss_and_gradients(batch);
    nn::adam_step(net_, grads, adam_);
    return loss;
}

double DiscretePolicy::train_step(const std::vector<FeedbackRecord>& batch) {
    std::vector<const FeedbackRecord*> ptrs;
    ptrs.reserve(batch.size());
    for (const auto& r : batch) ptrs.push_back(&r);
    return train_step(std::span<const FeedbackRecord* const>(ptrs));
}

std::size_t DiscretePolicy::select(const planner::RobotState& state, bool explore, Rng& rng) const {
    if (explore && rng.uniform() < epsilon()) return static_cast<std::size_t>(rng.below(library_size()));
    const auto pred = predict(state);
    return argmax_first(pred);
}

json DiscretePolicy::to_json() const {
    return {{"format", "apple-discrete-policy"},
            {"version", nn::kCheckpointVersion},
            {"config", config_to_json(cfg_)},
            {"network", nn::to_json(net_)},
            {"optimizer", nn::to_json(adam_)},
            {"schedule_step", schedule_step_}};
}

DiscretePolicy DiscretePolicy::from_json(const json& j) {
    if (!j.is_object() || j.value("format", "") != "apple-discrete-policy")
        throw FormatError("not a discrete policy checkpoint");
    if (j.value("version", 0) != nn::kCheckpointVersion) throw FormatError("unsupported policy checkpoint version");
    try {
        DiscretePolicy p(config_from_json(j.at("config")), 0);
        auto net = nn::mlp_from_json(j.at("network"));
        if (net.layer_sizes() != p.net_.layer_sizes()) throw FormatError("policy network shape does not match config");
        p.net_ = std::move(net);
        p.adam_ = nn::adam_from_json(j.at("optimizer"), p.net_);
        p.schedule_step_ = j.at("schedule_step").get<std::int64_t>();
        return p;
    } catch (const json::exception& e) {
        throw FormatError(std::string("policy checkpoint: ") + e.what());
    }
}

}  // namespace apple::learn
