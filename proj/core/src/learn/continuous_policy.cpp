#include "apple/learn/continuous_policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "apple/nn/serialize.hpp"

namespace apple::learn {

using nlohmann::json;

double squashed_log_prob(double u, double mean, double log_std) noexcept {
    const double sigma = std::exp(log_std);
    const double n = (u - mean) / sigma;
    const double t = std::tanh(u);
    return -0.5 * n * n - log_std - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(1.0 - t * t + 1e-6);
}

nn::Vector MlpCritic::evaluate(const nn::Matrix& states, const nn::Matrix& thetas, nn::Matrix* dtheta) const {
    const auto S = states.rows();
    const auto D = static_cast<Eigen::Index>(space_.dim());
    if (thetas.rows() != D || thetas.cols() != states.cols()) throw nn::ShapeMismatch("critic: theta shape mismatch");
    nn::Matrix x(S + D, states.cols());
    x.topRows(S) = states;
    for (Eigen::Index d = 0; d < D; ++d) {
        const double lo = space_.lo[static_cast<std::size_t>(d)];
        const double hr = space_.half_range(static_cast<std::size_t>(d));
        x.row(S + d) = ((thetas.row(d).array() - lo) / hr - 1.0).matrix();
    }
    nn::Mlp::Tape tape;
    const nn::Matrix out = net_.forward_batch(x, tape);
    if (dtheta) {
        const auto g = net_.backward(tape, nn::Matrix::Ones(1, out.cols()));
        *dtheta = g.input.bottomRows(D);
        for (Eigen::Index d = 0; d < D; ++d) dtheta->row(d) /= space_.half_range(static_cast<std::size_t>(d));
    }
    return out.row(0).transpose();
}

namespace {

void validate(const ContinuousPolicyConfig& c) {
    c.space.validate();
    if (c.state_dims < 1) throw InvalidArgument("state dims must be positive");
    for (int h : c.hidden)
        if (h < 1) throw InvalidArgument("hidden layer sizes must be positive");
    if (c.levels < 0 || c.levels == 1) throw InvalidArgument("feedback levels must be 0 or at least 2");
    if (!(c.log_std_min < c.log_std_max)) throw InvalidArgument("log-std clamp range is empty");
    for (const auto* a : {&c.actor_adam, &c.critic_adam, &c.alpha_adam})
        if (!(a->lr > 0.0)) throw InvalidArgument("learning rate must be positive");
}

std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out) {
    std::vector<int> s{in};
    s.insert(s.end(), hidden.begin(), hidden.end());
    s.push_back(out);
    return s;
}

json adam_config_json(const nn::AdamConfig& a) {
    return {{"lr", a.lr}, {"beta1", a.beta1}, {"beta2", a.beta2}, {"eps", a.eps}};
}

nn::AdamConfig adam_config_from(const json& j) {
    nn::AdamConfig a;
    a.lr = j.at("lr").get<double>();
    a.beta1 = j.at("beta1").get<double>();
    a.beta2 = j.at("beta2").get<double>();
    a.eps = j.at("eps").get<double>();
    return a;
}

json config_to_json(const ContinuousPolicyConfig& c) {
    json j = {{"space", {{"lo", c.space.lo}, {"hi", c.space.hi}, {"integer", c.space.integer}}},
              {"state_dims", c.state_dims},
              {"hidden", c.hidden},
              {"actor_adam", adam_config_json(c.actor_adam)},
              {"critic_adam", adam_config_json(c.critic_adam)},
              {"alpha_adam", adam_config_json(c.alpha_adam)},
              {"init_log_alpha", c.init_log_alpha},
              {"log_std_min", c.log_std_min},
              {"log_std_max", c.log_std_max},
              {"levels", c.levels},
              {"auto_positive_weight", c.auto_positive_weight}};
    if (c.target_entropy) j["target_entropy"] = *c.target_entropy;
    return j;
}

ContinuousPolicyConfig config_from_json(const json& j) {
    ContinuousPolicyConfig c;
    const auto& s = j.at("space");
    c.space.lo = s.at("lo").get<std::vector<double>>();
    c.space.hi = s.at("hi").get<std::vector<double>>();
    c.space.integer = s.at("integer").get<std::vector<bool>>();
    c.state_dims = j.at("state_dims").get<int>();
    c.hidden = j.at("hidden").get<std::vector<int>>();
    c.actor_adam = adam_config_from(j.at("actor_adam"));
    c.critic_adam = adam_config_from(j.at("critic_adam"));
    c.alpha_adam = adam_config_from(j.at("alpha_adam"));
    c.init_log_alpha = j.at("init_log_alpha").get<double>();
    c.log_std_min = j.at("log_std_min").get<double>();
    c.log_std_max = j.at("log_std_max").get<double>();
    c.levels = j.at("levels").get<int>();
    c.auto_positive_weight = j.at("auto_positive_weight").get<double>();
    if (j.contains("target_entropy")) c.target_entropy = j["target_entropy"].get<double>();
    return c;
}

nn::Vector state_vector(const planner::RobotState& s) {
    nn::Vector v(static_cast<Eigen::Index>(s.scan.size() + 1));
    for (std::size_t i = 0; i < s.scan.size(); ++i) v[static_cast<Eigen::Index>(i)] = s.scan[i];
    v[static_cast<Eigen::Index>(s.scan.size())] = s.local_goal;
    return v;
}

}  // namespace

ContinuousPolicy::ContinuousPolicy(ContinuousPolicyConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
    validate(cfg_);
    const int D = static_cast<int>(dim());
    target_entropy_ = cfg_.target_entropy.value_or(-static_cast<double>(D));
    Rng rng(seed);
    actor_ = nn::Mlp::he_uniform(layer_sizes(cfg_.state_dims, cfg_.hidden, 2 * D), rng);
    actor_.layers().back().weight.setZero();
    critic_ = nn::Mlp::he_uniform(layer_sizes(cfg_.state_dims + D, cfg_.hidden, 1), rng);
    critic_.layers().back().weight.setZero();
    actor_adam_ = nn::AdamState(actor_, cfg_.actor_adam);
    critic_adam_ = nn::AdamState(critic_, cfg_.critic_adam);
    log_alpha_ = cfg_.init_log_alpha;
    alpha_adam_.config = cfg_.alpha_adam;
}

double ContinuousPolicy::alpha() const noexcept { return std::exp(log_alpha_); }

nn::Matrix ContinuousPolicy::stack_states(std::span<const planner::RobotState* const> states) const {
    if (states.empty()) throw InvalidArgument("state batch is empty");
    nn::Matrix x(cfg_.state_dims, static_cast<Eigen::Index>(states.size()));
    for (std::size_t b = 0; b < states.size(); ++b) {
        if (static_cast<int>(states[b]->scan.size()) + 1 != cfg_.state_dims)
            throw nn::ShapeMismatch("state does not match the policy input size");
        x.col(static_cast<Eigen::Index>(b)) = state_vector(*states[b]);
    }
    return x;
}

std::pair<std::vector<double>, std::vector<double>> ContinuousPolicy::distribution(
    const planner::RobotState& state) const {
    if (static_cast<int>(state.scan.size()) + 1 != cfg_.state_dims)
        throw nn::ShapeMismatch("state does not match the policy input size");
    const nn::Vector out = actor_.forward(state_vector(state));
    const auto D = static_cast<Eigen::Index>(dim());
    std::vector<double> mean(dim()), log_std(dim());
    for (Eigen::Index d = 0; d < D; ++d) {
        mean[static_cast<std::size_t>(d)] = out[d];
        log_std[static_cast<std::size_t>(d)] = std::clamp(out[D + d], cfg_.log_std_min, cfg_.log_std_max);
    }
    return {mean, log_std};
}

ActionSample ContinuousPolicy::sample(const planner::RobotState& state, bool deterministic, Rng& rng) const {
    const auto [mean, log_std] = distribution(state);
    ActionSample s;
    s.z.resize(dim());
    for (std::size_t d = 0; d < dim(); ++d) {
        const double u = deterministic ? mean[d] : mean[d] + std::exp(log_std[d]) * rng.normal();
        s.z[d] = std::tanh(u);
        s.log_prob += squashed_log_prob(u, mean[d], log_std[d]);
    }
    s.theta = cfg_.space.decode(s.z);
    s.executed = cfg_.space.round_clamp(s.theta);
    return s;
}

double ContinuousPolicy::train_critic(std::span<const FeedbackRecord* const> batch) {
    if (batch.empty()) throw InvalidArgument("training batch is empty");
    const auto B = static_cast<Eigen::Index>(batch.size());
    const auto D = static_cast<Eigen::Index>(dim());
    nn::Matrix x(cfg_.state_dims + D, B);
    nn::Vector target(B), weight(B);
    for (Eigen::Index b = 0; b < B; ++b) {
        const FeedbackRecord& r = *batch[static_cast<std::size_t>(b)];
        if (r.discrete_action() || r.params.size() != dim())
            throw ModeMismatch("record does not carry a continuous parameter vector");
        if (r.has_level() != (cfg_.levels > 0))
            throw ModeMismatch(cfg_.levels > 0 ? "policy expects leveled feedback"
                                               : "policy expects continuous feedback");
        if (static_cast<int>(r.state.scan.size()) + 1 != cfg_.state_dims)
            throw nn::ShapeMismatch("record state does not match the policy input size");
        x.col(b).head(cfg_.state_dims) = state_vector(r.state);
        const auto z = cfg_.space.encode(r.params);
        for (Eigen::Index d = 0; d < D; ++d) x(cfg_.state_dims + d, b) = z[static_cast<std::size_t>(d)];
        target[b] = r.has_level() ? static_cast<double>(r.level) : r.value;
        weight[b] = r.source == FeedbackSource::AutoPositive ? cfg_.auto_positive_weight : 1.0;
    }
    nn::Mlp::Tape tape;
    const nn::Matrix out = critic_.forward_batch(x, tape);
    const nn::Vector diff = out.row(0).transpose() - target;
    const double inv_b = 1.0 / static_cast<double>(B);
    const double loss = (weight.array() * diff.array().square()).sum() * inv_b;
    const nn::Matrix grad = (2.0 * inv_b * weight.array() * diff.array()).matrix().transpose();
    nn::adam_step(critic_, critic_.backward(tape, grad), critic_adam_);
    return loss;
}

double ContinuousPolicy::train_actor(std::span<const planner::RobotState* const> states, Rng& rng) {
    return train_actor(states, critic_model(), rng);
}

double ContinuousPolicy::train_actor(std::span<const planner::RobotState* const> states, const FeedbackModel& model,
                                     Rng& rng) {
    const nn::Matrix x = stack_states(states);
    const auto B = x.cols();
    const auto D = static_cast<Eigen::Index>(dim());
    nn::Mlp::Tape tape;
    const nn::Matrix out = actor_.forward_batch(x, tape);

    nn::Matrix eps(D, B), z(D, B), theta(D, B), log_std(D, B);
    nn::Vector log_prob = nn::Vector::Zero(B);
    for (Eigen::Index b = 0; b < B; ++b) {
        std::vector<double> zb(dim());
        for (Eigen::Index d = 0; d < D; ++d) {
            log_std(d, b) = std::clamp(out(D + d, b), cfg_.log_std_min, cfg_.log_std_max);
            eps(d, b) = rng.normal();
            const double u = out(d, b) + std::exp(log_std(d, b)) * eps(d, b);
            z(d, b) = std::tanh(u);
            zb[static_cast<std::size_t>(d)] = z(d, b);
            log_prob[b] += squashed_log_prob(u, out(d, b), log_std(d, b));
        }
        const auto tb = cfg_.space.decode(zb);
        for (Eigen::Index d = 0; d < D; ++d) theta(d, b) = tb[static_cast<std::size_t>(d)];
    }

    nn::Matrix dq;
    const nn::Vector q = model.evaluate(x, theta, &dq);
    const double a = alpha();
    const double inv_b = 1.0 / static_cast<double>(B);
    const double loss = (-q + a * log_prob).sum() * inv_b;

    nn::Matrix grad = nn::Matrix::Zero(2 * D, B);
    for (Eigen::Index b = 0; b < B; ++b) {
        for (Eigen::Index d = 0; d < D; ++d) {
            const double zz = z(d, b);
            const double sech2 = 1.0 - zz * zz;
            const double hr = cfg_.space.half_range(static_cast<std::size_t>(d));
            const double du = -dq(d, b) * hr * sech2 + a * 2.0 * zz * sech2 / (sech2 + 1e-6);
            grad(d, b) = du * inv_b;
            const double raw = out(D + d, b);
            if (raw > cfg_.log_std_min && raw < cfg_.log_std_max)
                grad(D + d, b) = (du * std::exp(log_std(d, b)) * eps(d, b) - a) * inv_b;
        }
    }
    nn::adam_step(actor_, actor_.backward(tape, grad), actor_adam_);
    return loss;
}

double ContinuousPolicy::update_temperature_from_log_probs(std::span<const double> log_probs) {
    if (log_probs.empty()) throw InvalidArgument("temperature update needs at least one sample");
    const double a = alpha();
    double g = 0.0;
    for (double lp : log_probs) g += -a * (lp + target_entropy_);
    g /= static_cast<double>(log_probs.size());
    log_alpha_ = alpha_adam_.step(log_alpha_, g);
    return alpha();
}

double ContinuousPolicy::update_temperature(std::span<const planner::RobotState* const> states, Rng& rng) {
    std::vector<double> lps;
    lps.reserve(states.size());
    for (const auto* s : states) lps.push_back(sample(*s, false, rng).log_prob);
    return update_temperature_from_log_probs(lps);
}

json ContinuousPolicy::to_json() const {
    return {{"format", "apple-continuous-policy"},
            {"version", nn::kCheckpointVersion},
            {"config", config_to_json(cfg_)},
            {"actor", nn::to_json(actor_)},
            {"critic", nn::to_json(critic_)},
            {"actor_optimizer", nn::to_json(actor_adam_)},
            {"critic_optimizer", nn::to_json(critic_adam_)},
            {"log_alpha", log_alpha_},
            {"alpha_optimizer", nn::to_json(alpha_adam_)}};
}

ContinuousPolicy ContinuousPolicy::from_json(const json& j) {
    if (!j.is_object() || j.value("format", "") != "apple-continuous-policy")
        throw FormatError("not a continuous policy checkpoint");
    if (j.value("version", 0) != nn::kCheckpointVersion) throw FormatError("unsupported policy checkpoint version");
    try {
        ContinuousPolicy p(config_from_json(j.at("config")), 0);
        auto actor = nn::mlp_from_json(j.at("actor"));
        auto critic = nn::mlp_from_json(j.at("critic"));
        if (actor.layer_sizes() != p.actor_.layer_sizes() || critic.layer_sizes() != p.critic_.layer_sizes())
            throw FormatError("policy network shape does not match config");
        p.actor_ = std::move(actor);
        p.critic_ = std::move(critic);
        p.actor_adam_ = nn::adam_from_json(j.at("actor_optimizer"), p.actor_);
        p.critic_adam_ = nn::adam_from_json(j.at("critic_optimizer"), p.critic_);
        p.log_alpha_ = j.at("log_alpha").get<double>();
        p.alpha_adam_ = nn::scalar_adam_from_json(j.at("alpha_optimizer"));
        return p;
    } catch (const json::exception& e) {
        throw FormatError(std::string("policy checkpoint: ") + e.what());
    }
}

}  // namespace apple::learn
