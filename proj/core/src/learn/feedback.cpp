#include "apple/learn/feedback.hpp"

#include <nlohmann/json.hpp>

#include "apple/error.hpp"

namespace apple::learn {

using nlohmann::json;

const char* to_string(FeedbackSource s) noexcept {
    switch (s) {
        case FeedbackSource::Oracle: return "oracle";
        case FeedbackSource::Human: return "human";
        case FeedbackSource::AutoPositive: return "auto_positive";
    }
    return "oracle";
}

FeedbackSource parse_source(const std::string& s) {
    if (s == "oracle") return FeedbackSource::Oracle;
    if (s == "human") return FeedbackSource::Human;
    if (s == "auto_positive") return FeedbackSource::AutoPositive;
    throw FormatError("unknown feedback source '" + s + "'");
}

std::string record_to_line(const FeedbackRecord& r) {
    json j;
    j["v"] = kDatasetLogVersion;
    j["t"] = r.timestamp;
    j["source"] = to_string(r.source);
    if (r.discrete_action()) {
        j["index"] = r.library_index;
    } else {
        j["params"] = r.params;
    }
    if (r.has_level()) {
        j["level"] = r.level;
    } else {
        j["value"] = r.value;
    }
    j["goal"] = r.state.local_goal;
    j["scan"] = r.state.scan;
    return j.dump();
}

FeedbackRecord record_from_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("dataset log: ") + e.what());
    }
    if (!j.is_object() || j.value("v", 0) != kDatasetLogVersion)
        throw FormatError("dataset log: missing or unsupported schema version");
    try {
        FeedbackRecord r;
        r.timestamp = j.at("t").get<std::int64_t>();
        r.source = parse_source(j.at("source").get<std::string>());
        if (j.contains("index")) {
            r.library_index = j["index"].get<int>();
            if (r.library_index < 0) throw FormatError("dataset log: negative library index");
        } else {
            r.params = j.at("params").get<std::vector<double>>();
        }
        if (j.contains("level")) {
            r.level = j["level"].get<int>();
            if (r.level < 0) throw FormatError("dataset log: negative level");
        } else {
            r.value = j.at("value").get<double>();
        }
        r.state.local_goal = j.at("goal").get<double>();
        r.state.scan = j.at("scan").get<std::vector<double>>();
        if (!r.state.valid()) throw FormatError("dataset log: state must hold 720 scan values and a goal");
        return r;
    } catch (const json::exception& e) {
        throw FormatError(std::string("dataset log: ") + e.what());
    }
}

std::vector<FeedbackRecord> load_log(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw FileNotFound("dataset log not found: " + path.string());
    std::vector<FeedbackRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(record_from_line(line));
        } catch (const FormatError& e) {
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

FeedbackDataset::FeedbackDataset(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw InvalidArgument("dataset capacity must be positive");
}

void FeedbackDataset::attach_log(const std::filesystem::path& path, bool truncate) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    log_ = std::make_unique<std::ofstream>(path, truncate ? std::ios::trunc : std::ios::app);
    if (!*log_) throw Error("cannot open dataset log " + path.string());
}

void FeedbackDataset::flush() {
    if (log_) log_->flush();
}

std::size_t FeedbackDataset::append(FeedbackRecord record) {
    if (log_) *log_ << record_to_line(record) << '\n';
    records_.push_back(std::move(record));
    if (records_.size() > capacity_) records_.pop_front();
    ++appended_;
    return records_.size();
}

std::vector<const FeedbackRecord*> FeedbackDataset::sample(std::size_t n, Rng& rng) const {
    std::vector<const FeedbackRecord*> out;
    if (records_.empty()) return out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(&records_[rng.below(records_.size())]);
    return out;
}

}  // namespace apple::learn
