#include "apple/gateway/learner.hpp"

#include <string>

namespace apple::gateway {

using nlohmann::json;

const char* to_string(PolicyKind k) noexcept { return k == PolicyKind::Discrete ? "discrete" : "continuous"; }

PolicyKind parse_kind(const std::string& s) {
    if (s == "discrete") return PolicyKind::Discrete;
    if (s == "continuous") return PolicyKind::Continuous;
    throw InvalidArgument("unknown policy kind '" + s + "' (expected discrete or continuous)");
}

void LearnerConfig::validate() const {
    if (levels < 0 || levels == 1) throw InvalidArgument("levels must be 0 (continuous) or at least 2");
    if (batch_size < 1) throw InvalidArgument("batch size must be positive");
    if (warmup < 0) throw InvalidArgument("warmup must be non-negative");
    if (dataset_capacity == 0) throw InvalidArgument("dataset capacity must be positive");
    if (!(epsilon_end >= 0.0 && epsilon_end <= epsilon_start && epsilon_start <= 1.0))
        throw InvalidArgument("epsilon schedule must satisfy 0 <= end <= start <= 1");
    if (!(adam.lr > 0.0)) throw InvalidArgument("learning rate must be positive");
}

Learner::Learner(LearnerConfig cfg, planner::LibraryFile library, std::uint64_t seed)
    : cfg_(std::move(cfg)), library_(std::move(library)), dataset_(cfg_.dataset_capacity), rng_(derive_seed(seed, 1)) {
    cfg_.validate();
    if (library_.library.size() == 0) throw InvalidArgument("parameter library is empty");
    if (cfg_.kind == PolicyKind::Discrete) {
        learn::DiscretePolicyConfig pc;
        pc.library_size = static_cast<int>(library_.library.size());
        pc.levels = cfg_.levels;
        pc.hidden = cfg_.hidden;
        pc.adam = cfg_.adam;
        pc.epsilon = {cfg_.epsilon_start, cfg_.epsilon_end, cfg_.epsilon_anneal_steps};
        pc.auto_positive_weight = cfg_.auto_positive_weight;
        discrete_.emplace(pc, derive_seed(seed, 2));
    } else {
        learn::ContinuousPolicyConfig pc;
        pc.space = learn::BoxSpace::from_bounds(library_.bounds);
        pc.hidden = cfg_.hidden;
        pc.actor_adam = cfg_.adam;
        pc.critic_adam = cfg_.adam;
        pc.alpha_adam = cfg_.adam;
        pc.init_log_alpha = cfg_.init_log_alpha;
        pc.target_entropy = cfg_.target_entropy;
        pc.levels = cfg_.levels;
        pc.auto_positive_weight = cfg_.auto_positive_weight;
        continuous_.emplace(pc, derive_seed(seed, 2));
    }
}

learn::DiscretePolicy& Learner::discrete() {
    if (!discrete_) throw InvalidArgument("learner holds a continuous policy");
    return *discrete_;
}
const learn::DiscretePolicy& Learner::discrete() const {
    if (!discrete_) throw InvalidArgument("learner holds a continuous policy");
    return *discrete_;
}
learn::ContinuousPolicy& Learner::continuous() {
    if (!continuous_) throw InvalidArgument("learner holds a discrete policy");
    return *continuous_;
}
const learn::ContinuousPolicy& Learner::continuous() const {
    if (!continuous_) throw InvalidArgument("learner holds a discrete policy");
    return *continuous_;
}

std::unique_ptr<ParamSelector> Learner::make_selector(bool explore) const {
    if (discrete_) return std::make_unique<DiscreteSelector>(*discrete_, library_.library, explore);
    return std::make_unique<ContinuousSelector>(*continuous_, !explore);
}

void Learner::add_feedback(learn::FeedbackRecord record) {
    record.timestamp = dataset_.appended();
    dataset_.append(std::move(record));
}

bool Learner::on_control_tick() {
    bool trained = false;
    if (dataset_.size() > 0 && static_cast<std::int64_t>(dataset_.size()) >= cfg_.warmup) {
        const auto batch = dataset_.sample(static_cast<std::size_t>(cfg_.batch_size), rng_);
        if (discrete_) {
            last_loss_ = discrete_->train_step(batch);
        } else {
            // Critic first, then the actor and temperature on the same states.
            last_loss_ = continuous_->train_critic(batch);
            std::vector<const planner::RobotState*> states;
            states.reserve(batch.size());
            for (const auto* r : batch) states.push_back(&r->state);
            (void)continuous_->train_actor(states, rng_);
            (void)continuous_->update_temperature(states, rng_);
        }
        ++train_steps_;
        trained = true;
    }
    if (discrete_) discrete_->advance_schedule();
    return trained;
}

json learner_config_to_json(const LearnerConfig& c) {
    json j = {{"kind", to_string(c.kind)},
              {"levels", c.levels},
              {"hidden", c.hidden},
              {"lr", c.adam.lr},
              {"beta1", c.adam.beta1},
              {"beta2", c.adam.beta2},
              {"adam_eps", c.adam.eps},
              {"epsilon_start", c.epsilon_start},
              {"epsilon_end", c.epsilon_end},
              {"epsilon_anneal_steps", c.epsilon_anneal_steps},
              {"batch_size", c.batch_size},
              {"warmup", c.warmup},
              {"dataset_capacity", c.dataset_capacity},
              {"auto_positive_weight", c.auto_positive_weight},
              {"init_log_alpha", c.init_log_alpha}};
    if (c.target_entropy) j["target_entropy"] = *c.target_entropy;
    return j;
}

LearnerConfig learner_config_from_json(const json& j) {
    LearnerConfig c;
    c.kind = parse_kind(j.at("kind").get<std::string>());
    c.levels = j.at("levels").get<int>();
    c.hidden = j.at("hidden").get<std::vector<int>>();
    c.adam.lr = j.at("lr").get<double>();
    c.adam.beta1 = j.at("beta1").get<double>();
    c.adam.beta2 = j.at("beta2").get<double>();
    c.adam.eps = j.at("adam_eps").get<double>();
    c.epsilon_start = j.at("epsilon_start").get<double>();
    c.epsilon_end = j.at("epsilon_end").get<double>();
    c.epsilon_anneal_steps = j.at("epsilon_anneal_steps").get<std::int64_t>();
    c.batch_size = j.at("batch_size").get<int>();
    c.warmup = j.at("warmup").get<std::int64_t>();
    c.dataset_capacity = j.at("dataset_capacity").get<std::size_t>();
    c.auto_positive_weight = j.at("auto_positive_weight").get<double>();
    c.init_log_alpha = j.at("init_log_alpha").get<double>();
    if (j.contains("target_entropy")) c.target_entropy = j["target_entropy"].get<double>();
    return c;
}

json Learner::to_json() const {
    json rng = json::array();
    for (auto w : rng_.state()) rng.push_back(std::to_string(w));
    return {{"format", "apple-learner"},
            {"version", 1},
            {"config", learner_config_to_json(cfg_)},
            {"library", json::parse(planner::library_to_text(library_))},
            {"policy", discrete_ ? discrete_->to_json() : continuous_->to_json()},
            {"rng", rng},
            {"train_steps", train_steps_},
            {"feedback_count", dataset_.appended()}};
}

Learner Learner::from_json(const json& j) {
    if (!j.is_object() || j.value("format", "") != "apple-learner") throw FormatError("not a learner checkpoint");
    if (j.value("version", 0) != 1) throw FormatError("unsupported learner checkpoint version");
    try {
        Learner l(learner_config_from_json(j.at("config")), planner::library_from_text(j.at("library").dump()), 0);
        if (l.discrete_) {
            l.discrete_ = learn::DiscretePolicy::from_json(j.at("policy"));
            if (l.discrete_->library_size() != l.library_.library.size())
                throw FormatError("policy head count does not match the library");
        } else {
            l.continuous_ = learn::ContinuousPolicy::from_json(j.at("policy"));
        }
        const auto& rs = j.at("rng");
        if (!rs.is_array() || rs.size() != 4) throw FormatError("learner checkpoint: bad rng state");
        std::array<std::uint64_t, 4> st{};
        for (std::size_t i = 0; i < 4; ++i) st[i] = std::stoull(rs[i].get<std::string>());
        l.rng_.set_state(st);
        l.train_steps_ = j.at("train_steps").get<std::int64_t>();
        l.dataset_.set_appended(j.at("feedback_count").get<std::int64_t>());
        return l;
    } catch (const json::exception& e) {
        throw FormatError(std::string("learner checkpoint: ") + e.what());
    } catch (const std::logic_error& e) {
        throw FormatError(std::string("learner checkpoint: ") + e.what());
    }
}

}  // namespace apple::gateway
