#include "apple/planner/params.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace apple::planner {

std::array<double, kParamDims> PlannerParams::to_array() const noexcept {
    return {max_vel_x,     max_vel_theta, static_cast<double>(vx_samples), static_cast<double>(vtheta_samples),
            occdist_scale, pdist_scale,   gdist_scale,                     inflation_radius};
}

PlannerParams PlannerParams::from_array(const std::array<double, kParamDims>& a) noexcept {
    PlannerParams p;
    p.max_vel_x = a[0];
    p.max_vel_theta = a[1];
    p.vx_samples = static_cast<int>(std::lround(a[2]));
    p.vtheta_samples = static_cast<int>(std::lround(a[3]));
    p.occdist_scale = a[4];
    p.pdist_scale = a[5];
    p.gdist_scale = a[6];
    p.inflation_radius = a[7];
    return p;
}

const std::array<std::string, kParamDims>& param_names() {
    static const std::array<std::string, kParamDims> names = {
        "max_vel_x",     "max_vel_theta", "vx_samples",  "vtheta_samples",
        "occdist_scale", "pdist_scale",   "gdist_scale", "inflation_radius"};
    return names;
}

ParamBounds ParamBounds::table() noexcept {
    return {{0.2, 0.31, 4, 8, 0.10, 0.10, 0.01, 0.10}, {2.0, 3.14, 20, 40, 1.50, 2.00, 1.00, 0.60}};
}

bool ParamBounds::contains(const PlannerParams& p) const noexcept {
    const auto a = p.to_array();
    for (std::size_t d = 0; d < kParamDims; ++d)
        if (!(a[d] >= lo[d] && a[d] <= hi[d])) return false;
    return true;
}

PlannerParams ParamBounds::clamp(const std::array<double, kParamDims>& raw) const noexcept {
    std::array<double, kParamDims> a{};
    for (std::size_t d = 0; d < kParamDims; ++d) {
        double v = std::isfinite(raw[d]) ? raw[d] : lo[d];
        if (param_is_integer(d)) v = std::round(v);
        a[d] = std::clamp(v, lo[d], hi[d]);
    }
    return PlannerParams::from_array(a);
}

ParameterLibrary::ParameterLibrary(std::vector<PlannerParams> entries, std::vector<std::string> names)
    : entries_(std::move(entries)), names_(std::move(names)) {
    if (entries_.empty()) throw InvalidArgument("parameter library must hold at least one entry");
    for (const auto& e : entries_)
        if (!params_physical(e)) throw InvalidArgument("parameter library entry is not physically valid");
    if (names_.empty())
        for (std::size_t i = 0; i < entries_.size(); ++i) names_.push_back("theta" + std::to_string(i + 1));
    if (names_.size() != entries_.size()) throw InvalidArgument("parameter library: name count mismatch");
}

ParameterLibrary ParameterLibrary::table() {
    return ParameterLibrary({
        {0.50, 1.57, 6, 20, 0.10, 0.75, 1.00, 0.30},
        {0.26, 2.00, 13, 44, 0.57, 0.76, 0.94, 0.02},
        {0.22, 0.87, 13, 31, 0.30, 0.36, 0.71, 0.30},
        {1.91, 1.70, 10, 47, 0.08, 0.71, 0.35, 0.23},
        {0.72, 0.73, 19, 59, 0.62, 1.00, 0.32, 0.24},
        {0.37, 1.33, 9, 6, 0.95, 0.83, 0.93, 0.01},
        {0.31, 1.05, 17, 20, 0.45, 0.61, 0.22, 0.23},
    });
}

ParameterLibrary ParameterLibrary::prefix(std::size_t k) const {
    if (k == 0 || k > entries_.size()) throw InvalidArgument("library prefix size out of range");
    return ParameterLibrary(std::vector<PlannerParams>(entries_.begin(), entries_.begin() + static_cast<std::ptrdiff_t>(k)),
                            std::vector<std::string>(names_.begin(), names_.begin() + static_cast<std::ptrdiff_t>(k)));
}

bool params_physical(const PlannerParams& p) noexcept {
    const auto a = p.to_array();
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return p.max_vel_x > 0 && p.max_vel_theta > 0 && p.vx_samples >= 2 && p.vtheta_samples >= 2 &&
           p.occdist_scale >= 0 && p.pdist_scale >= 0 && p.gdist_scale >= 0 && p.inflation_radius >= 0;
}

namespace {

using nlohmann::json;

json params_json(const PlannerParams& p) {
    json j = json::object();
    const auto a = p.to_array();
    for (std::size_t d = 0; d < kParamDims; ++d) {
        if (param_is_integer(d)) {
            j[param_names()[d]] = static_cast<int>(a[d]);
        } else {
            j[param_names()[d]] = a[d];
        }
    }
    return j;
}

std::array<double, kParamDims> array_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) throw FormatError(where + ": expected an object");
    std::array<double, kParamDims> a{};
    for (std::size_t d = 0; d < kParamDims; ++d) {
        const auto& name = param_names()[d];
        if (!j.contains(name) || !j[name].is_number())
            throw FormatError(where + ": missing numeric field '" + name + "'");
        a[d] = j[name].get<double>();
    }
    for (const auto& [key, _] : j.items()) {
        if (key == "name") continue;
        if (std::find(param_names().begin(), param_names().end(), key) == param_names().end())
            throw FormatError(where + ": unknown field '" + key + "'");
    }
    return a;
}

}  // namespace

std::string library_to_text(const LibraryFile& file) {
    json j;
    j["version"] = 1;
    json lib = json::array();
    for (std::size_t i = 0; i < file.library.size(); ++i) {
        json rec = params_json(file.library.at(i));
        rec["name"] = file.library.name(i);
        lib.push_back(rec);
    }
    j["library"] = lib;
    j["bounds"]["min"] = params_json(PlannerParams::from_array(file.bounds.lo));
    j["bounds"]["max"] = params_json(PlannerParams::from_array(file.bounds.hi));
    return j.dump(2) + "\n";
}

LibraryFile library_from_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("parameter library: ") + e.what());
    }
    if (!j.is_object() || j.value("version", 0) != 1)
        throw FormatError("parameter library: missing or unsupported version");
    if (!j.contains("library") || !j["library"].is_array())
        throw FormatError("parameter library: missing 'library' list");
    std::vector<PlannerParams> entries;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < j["library"].size(); ++i) {
        const auto& rec = j["library"][i];
        const std::string where = "parameter library entry " + std::to_string(i);
        const auto a = array_from_json(rec, where);
        for (std::size_t d = 0; d < kParamDims; ++d)
            if (param_is_integer(d) && a[d] != std::round(a[d]))
                throw FormatError(where + ": '" + param_names()[d] + "' must be an integer");
        entries.push_back(PlannerParams::from_array(a));
        names.push_back(rec.value("name", "theta" + std::to_string(i + 1)));
    }
    LibraryFile out;
    try {
        out.library = ParameterLibrary(std::move(entries), std::move(names));
    } catch (const InvalidArgument& e) {
        throw FormatError(std::string("parameter library: ") + e.what());
    }
    out.bounds = ParamBounds::table();
    if (j.contains("bounds")) {
        out.bounds.lo = array_from_json(j["bounds"].at("min"), "bounds.min");
        out.bounds.hi = array_from_json(j["bounds"].at("max"), "bounds.max");
        for (std::size_t d = 0; d < kParamDims; ++d)
            if (!(out.bounds.lo[d] < out.bounds.hi[d]))
                throw FormatError("bounds: min must be below max for '" + param_names()[d] + "'");
    }
    return out;
}

LibraryFile load_library(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw FileNotFound("parameter library not found: " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return library_from_text(ss.str());
}

void save_library(const std::filesystem::path& path, const LibraryFile& file) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw Error("cannot write parameter library " + path.string());
    os << library_to_text(file);
}

}  // namespace apple::planner
