#include "apple/nn/serialize.hpp"

#include <fstream>
#include <sstream>

namespace apple::nn {

using nlohmann::json;

namespace {

json dense_values(const double* data, Eigen::Index n) { return json(std::vector<double>(data, data + n)); }

void fill(const json& j, double* data, Eigen::Index n, const char* what) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n)
        throw FormatError(std::string("checkpoint: wrong length for ") + what);
    for (Eigen::Index i = 0; i < n; ++i) data[i] = j[static_cast<std::size_t>(i)].get<double>();
}

void check_header(const json& j, const char* format) {
    if (!j.is_object() || j.value("format", "") != format)
        throw FormatError(std::string("checkpoint: expected format '") + format + "'");
    if (j.value("version", 0) != kCheckpointVersion)
        throw FormatError("checkpoint: unsupported version");
}

}  // namespace

json to_json(const Mlp& net) {
    json j;
    j["format"] = "apple-mlp";
    j["version"] = kCheckpointVersion;
    j["layer_sizes"] = net.layer_sizes();
    j["activation"] = "relu";
    json layers = json::array();
    for (const auto& l : net.layers())
        layers.push_back({{"weight", dense_values(l.weight.data(), l.weight.size())},
                          {"bias", dense_values(l.bias.data(), l.bias.size())}});
    j["layers"] = std::move(layers);
    return j;
}

Mlp mlp_from_json(const json& j) {
    check_header(j, "apple-mlp");
    Mlp net(j.at("layer_sizes").get<std::vector<int>>());
    const auto& layers = j.at("layers");
    if (!layers.is_array() || layers.size() != net.num_layers()) throw FormatError("checkpoint: layer count mismatch");
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        auto& d = net.layers()[l];
        fill(layers[l].at("weight"), d.weight.data(), d.weight.size(), "weight");
        fill(layers[l].at("bias"), d.bias.data(), d.bias.size(), "bias");
    }
    if (!net.all_finite()) throw FormatError("checkpoint: non-finite parameter");
    return net;
}

json to_json(const AdamState& s) {
    json j;
    j["format"] = "apple-adam";
    j["version"] = kCheckpointVersion;
    j["lr"] = s.config.lr;
    j["beta1"] = s.config.beta1;
    j["beta2"] = s.config.beta2;
    j["eps"] = s.config.eps;
    j["step_count"] = s.step_count;
    json moments = json::array();
    for (std::size_t l = 0; l < s.m_weight.size(); ++l)
        moments.push_back({{"m_weight", dense_values(s.m_weight[l].data(), s.m_weight[l].size())},
                           {"v_weight", dense_values(s.v_weight[l].data(), s.v_weight[l].size())},
                           {"m_bias", dense_values(s.m_bias[l].data(), s.m_bias[l].size())},
                           {"v_bias", dense_values(s.v_bias[l].data(), s.v_bias[l].size())}});
    j["moments"] = std::move(moments);
    return j;
}

AdamState adam_from_json(const json& j, const Mlp& net) {
    check_header(j, "apple-adam");
    AdamConfig cfg{j.at("lr").get<double>(), j.at("beta1").get<double>(), j.at("beta2").get<double>(),
                   j.at("eps").get<double>()};
    AdamState s(net, cfg);
    s.step_count = j.at("step_count").get<std::int64_t>();
    const auto& moments = j.at("moments");
    if (!moments.is_array() || moments.size() != s.m_weight.size())
        throw FormatError("checkpoint: optimizer depth mismatch");
    for (std::size_t l = 0; l < s.m_weight.size(); ++l) {
        fill(moments[l].at("m_weight"), s.m_weight[l].data(), s.m_weight[l].size(), "m_weight");
        fill(moments[l].at("v_weight"), s.v_weight[l].data(), s.v_weight[l].size(), "v_weight");
        fill(moments[l].at("m_bias"), s.m_bias[l].data(), s.m_bias[l].size(), "m_bias");
        fill(moments[l].at("v_bias"), s.v_bias[l].data(), s.v_bias[l].size(), "v_bias");
    }
    return s;
}

json to_json(const ScalarAdam& s) {
    return {{"lr", s.config.lr}, {"beta1", s.config.beta1}, {"beta2", s.config.beta2}, {"eps", s.config.eps},
            {"step_count", s.step_count}, {"m", s.m}, {"v", s.v}};
}

ScalarAdam scalar_adam_from_json(const json& j) {
    ScalarAdam s;
    s.config = {j.at("lr").get<double>(), j.at("beta1").get<double>(), j.at("beta2").get<double>(),
                j.at("eps").get<double>()};
    s.step_count = j.at("step_count").get<std::int64_t>();
    s.m = j.at("m").get<double>();
    s.v = j.at("v").get<double>();
    return s;
}

json to_json(const Checkpoint& ckpt) {
    return {{"format", "apple-mlp-checkpoint"},
            {"version", kCheckpointVersion},
            {"global_step", ckpt.global_step},
            {"net", to_json(ckpt.net)},
            {"adam", to_json(ckpt.adam)}};
}

Checkpoint checkpoint_from_json(const json& j) {
    check_header(j, "apple-mlp-checkpoint");
    Checkpoint c;
    c.net = mlp_from_json(j.at("net"));
    c.adam = adam_from_json(j.at("adam"), c.net);
    c.global_step = j.at("global_step").get<std::int64_t>();
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw Error("cannot write checkpoint " + path.string());
    os << to_json(ckpt).dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw FileNotFound("checkpoint not found: " + path.string());
    try {
        return checkpoint_from_json(json::parse(is));
    } catch (const json::exception& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    }
}

}  // namespace apple::nn
