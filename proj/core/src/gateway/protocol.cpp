#include "apple/gateway/protocol.hpp"

#include <cmath>

#include "apple/world/grid_io.hpp"

namespace apple::gateway {

using nlohmann::json;

std::vector<double> decimate_scan(const world::Scan& scan, std::size_t rays) {
    if (rays == 0 || scan.ranges.size() % rays != 0)
        throw InvalidArgument("scan of " + std::to_string(scan.ranges.size()) + " beams cannot be decimated to " +
                              std::to_string(rays));
    const std::size_t stride = scan.ranges.size() / rays;
    std::vector<double> out;
    out.reserve(rays);
    for (std::size_t i = 0; i < rays; ++i) out.push_back(scan.ranges[i * stride]);
    return out;
}

json hello_frame(const SessionInfo& s) {
    return {{"type", "hello"},         {"schema_version", kSchemaVersion}, {"session_id", s.session_id},
            {"levels", s.levels},      {"feedback_hz", s.feedback_hz},     {"sim_hz", s.sim_hz},
            {"scan_rays", kStreamRays}, {"fov", world::kScanFov},          {"max_range", s.max_range}};
}

json grid_frame(std::int64_t episode_id, const world::OccupancyGrid& grid) {
    return {{"type", "grid"}, {"episode", episode_id}, {"text", world::to_text(grid)}};
}

json state_frame(const StateInfo& s) {
    json theta = json::object();
    const auto a = s.theta.to_array();
    for (std::size_t i = 0; i < planner::kParamDims; ++i) {
        if (planner::param_is_integer(i)) theta[planner::param_names()[i]] = static_cast<int>(std::lround(a[i]));
        else theta[planner::param_names()[i]] = a[i];
    }
    if (s.theta_index >= 0) theta["index"] = s.theta_index;
    return {{"type", "state"},
            {"t", s.t},
            {"pose", {s.pose.x, s.pose.y, s.pose.heading}},
            {"scan", s.scan},
            {"theta", theta},
            {"episode", {{"id", s.episode_id}, {"status", s.status}, {"elapsed", s.elapsed}}}};
}

json error_frame(const std::string& code, const std::string& detail) {
    return {{"type", "error"}, {"code", code}, {"detail", detail}};
}

json ack_frame(double client_ts, const std::string& status) {
    return {{"type", "ack"}, {"client_ts", client_ts}, {"status", status}};
}

namespace {

void require(bool ok, const std::string& code, const std::string& detail) {
    if (!ok) throw ProtocolError(code, detail);
}

const json& field(const json& j, const char* key) {
    const auto it = j.find(key);
    require(it != j.end(), "missing_field", std::string("missing field '") + key + "'");
    return *it;
}

bool finite_number(const json& j) { return j.is_number() && std::isfinite(j.get<double>()); }

}  // namespace

FeedbackEvent parse_feedback_frame(const std::string& text, int levels) {
    const json j = json::parse(text, nullptr, false);
    require(!j.is_discarded(), "bad_json", "frame is not valid JSON");
    require(j.is_object(), "bad_json", "frame must be a JSON object");
    const auto& type = field(j, "type");
    require(type.is_string(), "bad_type", "'type' must be a string");
    require(type.get<std::string>() == "feedback", "bad_type",
            "unsupported frame type '" + type.get<std::string>() + "'");
    FeedbackEvent ev;
    const auto& sid = field(j, "session_id");
    require(sid.is_string(), "bad_value", "'session_id' must be a string");
    ev.session_id = sid.get<std::string>();
    const auto& ts = field(j, "client_ts");
    require(finite_number(ts), "bad_value", "'client_ts' must be a finite number");
    ev.client_ts = ts.get<double>();
    const auto& pol = field(j, "polarity");
    try {
        if (pol.is_string()) {
            ev.level = parse_polarity(pol.get<std::string>(), levels);
        } else {
            require(pol.is_number_integer(), "bad_value", "'polarity' must be good, bad or a level index");
            const auto v = pol.get<std::int64_t>();
            require(v >= 0 && v < levels, "bad_value", "polarity level out of range");
            ev.level = static_cast<int>(v);
        }
    } catch (const InvalidArgument& e) {
        throw ProtocolError("bad_value", e.what());
    }
    return ev;
}

void validate_frame(const json& f) {
    require(f.is_object(), "bad_json", "frame must be an object");
    const auto& type = field(f, "type");
    require(type.is_string(), "bad_type", "'type' must be a string");
    const auto t = type.get<std::string>();
    if (t == "hello") {
        require(field(f, "schema_version").is_number_integer(), "bad_value", "schema_version");
        require(field(f, "session_id").is_string(), "bad_value", "session_id");
        require(field(f, "levels").is_number_integer() && f["levels"].get<int>() >= 2, "bad_value", "levels");
        for (const char* k : {"feedback_hz", "sim_hz", "fov", "max_range"})
            require(finite_number(field(f, k)) && f[k].get<double>() > 0.0, "bad_value", k);
        require(field(f, "scan_rays").is_number_integer(), "bad_value", "scan_rays");
    } else if (t == "grid") {
        require(field(f, "episode").is_number_integer(), "bad_value", "episode");
        require(field(f, "text").is_string(), "bad_value", "text");
    } else if (t == "state") {
        require(finite_number(field(f, "t")), "bad_value", "t");
        const auto& pose = field(f, "pose");
        require(pose.is_array() && pose.size() == 3, "bad_value", "pose must hold 3 numbers");
        for (const auto& v : pose) require(finite_number(v), "bad_value", "pose entries must be finite");
        const auto& scan = field(f, "scan");
        require(scan.is_array() && scan.size() == kStreamRays, "bad_value", "scan must hold 90 numbers");
        for (const auto& v : scan) require(finite_number(v) && v.get<double>() > 0.0, "bad_value", "scan entries");
        const auto& theta = field(f, "theta");
        require(theta.is_object(), "bad_value", "theta must be an object");
        for (const auto& name : planner::param_names())
            require(finite_number(field(theta, name.c_str())), "bad_value", "theta." + name);
        const auto& ep = field(f, "episode");
        require(ep.is_object(), "bad_value", "episode must be an object");
        require(field(ep, "id").is_number_integer(), "bad_value", "episode.id");
        require(finite_number(field(ep, "elapsed")), "bad_value", "episode.elapsed");
        const auto& st = field(ep, "status");
        require(st.is_string(), "bad_value", "episode.status");
        const auto s = st.get<std::string>();
        require(s == "running" || s == "success" || s == "collision" || s == "timeout", "bad_value",
                "unknown episode status '" + s + "'");
    } else if (t == "error") {
        require(field(f, "code").is_string() && field(f, "detail").is_string(), "bad_value", "error frame");
    } else if (t == "ack") {
        require(finite_number(field(f, "client_ts")), "bad_value", "client_ts");
        require(field(f, "status").is_string(), "bad_value", "status");
    } else if (t == "feedback") {
        require(field(f, "session_id").is_string(), "bad_value", "session_id");
        require(finite_number(field(f, "client_ts")), "bad_value", "client_ts");
        const auto& p = field(f, "polarity");
        require(p.is_string() || p.is_number_integer(), "bad_value", "polarity");
    } else {
        throw ProtocolError("bad_type", "unknown frame type '" + t + "'");
    }
}

}  // namespace apple::gateway
