#include "apple/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace apple::evalx {

void MethodRuns::add(std::size_t env, double time, bool fail) {
    if (!(time > 0.0) || !std::isfinite(time)) throw InvalidArgument("traversal times must be positive and finite");
    if (env >= times.size()) {
        times.resize(env + 1);
        failed.resize(env + 1);
    }
    times[env].push_back(time);
    failed[env].push_back(fail);
}

std::size_t MethodRuns::failures() const noexcept {
    std::size_t n = 0;
    for (const auto& f : failed) n += static_cast<std::size_t>(std::count(f.begin(), f.end(), true));
    return n;
}

double MethodRuns::env_mean(std::size_t env) const { return mean(times.at(env)); }

double MethodRuns::mean_time() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& t : times) {
        sum += std::accumulate(t.begin(), t.end(), 0.0);
        n += t.size();
    }
    if (n == 0) throw InvalidArgument("method '" + name + "' has no runs");
    return sum / static_cast<double>(n);
}

PairwiseReport pairwise_report(const std::vector<MethodRuns>& methods, double alpha) {
    if (methods.empty()) throw InvalidArgument("pairwise_report needs at least one method");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
    const std::size_t n_env = methods.front().env_count();
    for (const auto& m : methods) {
        if (m.env_count() != n_env)
            throw EnvMismatch("method '" + m.name + "' covers " + std::to_string(m.env_count()) +
                              " environments, expected " + std::to_string(n_env));
        for (std::size_t e = 0; e < n_env; ++e)
            if (m.times[e].size() < 2)
                throw EnvMismatch("method '" + m.name + "' has fewer than two runs in environment " +
                                  std::to_string(e));
    }
    if (n_env == 0) throw EnvMismatch("no environments");

    PairwiseReport r;
    r.alpha = alpha;
    r.env_count = n_env;
    const std::size_t k = methods.size();
    r.cells.assign(k, std::vector<PairCell>(k));
    r.tests.assign(k, std::vector<std::vector<TTestResult>>(k));
    for (const auto& m : methods) {
        r.methods.push_back(m.name);
        r.mean_time.push_back(m.mean_time());
        std::vector<double> em;
        std::size_t runs = 0;
        for (std::size_t e = 0; e < n_env; ++e) {
            em.push_back(m.env_mean(e));
            runs += m.times[e].size();
        }
        r.env_mean.push_back(std::move(em));
        r.failures.push_back(m.failures());
        r.runs.push_back(runs);
    }
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            auto& cell = r.cells[i][j];
            for (std::size_t e = 0; e < n_env; ++e) {
                const auto t = welch_ttest(methods[i].times[e], methods[j].times[e]);
                r.tests[i][j].push_back(t);
                if (t.kind != TTestCase::Regular) ++cell.flagged;
                if (t.p < alpha) {
                    if (t.t > 0.0) ++cell.worse;
                    else if (t.t < 0.0) ++cell.better;
                }
            }
            cell.worse_pct = 100.0 * cell.worse / static_cast<double>(n_env);
            cell.better_pct = 100.0 * cell.better / static_cast<double>(n_env);
        }
    }
    return r;
}

namespace {

std::string fixed(double v, int digits) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << v;
    return os.str();
}

}  // namespace

std::string PairwiseReport::to_markdown() const {
    std::ostringstream os;
    const std::size_t k = methods.size();
    os << "# Traversal-time comparison\n\n";
    os << "Environments: " << env_count << ", significance level: " << fixed(alpha, 3) << "\n\n";
    os << "| method | mean time (s) | runs | failed runs |\n|---|---|---|---|\n";
    for (std::size_t i = 0; i < k; ++i)
        os << "| " << methods[i] << " | " << fixed(mean_time[i], 2) << " | " << runs[i] << " | " << failures[i]
           << " |\n";
    os << "\n## Significantly worse (row vs column, % of environments)\n\n| |";
    for (const auto& m : methods) os << ' ' << m << " |";
    os << "\n|---|";
    for (std::size_t j = 0; j < k; ++j) os << "---|";
    os << '\n';
    for (std::size_t i = 0; i < k; ++i) {
        os << "| " << methods[i] << " |";
        for (std::size_t j = 0; j < k; ++j) os << ' ' << (i == j ? std::string("-") : fixed(cells[i][j].worse_pct, 0) + "%") << " |";
        os << '\n';
    }
    os << "\n## Per-environment mean time (s)\n\n| env |";
    for (const auto& m : methods) os << ' ' << m << " |";
    os << "\n|---|";
    for (std::size_t j = 0; j < k; ++j) os << "---|";
    os << '\n';
    for (std::size_t e = 0; e < env_count; ++e) {
        os << "| " << e << " |";
        for (std::size_t i = 0; i < k; ++i) os << ' ' << fixed(env_mean[i][e], 2) << " |";
        os << '\n';
    }
    os << "\nFailed runs (collision or timeout) are scored at the timeout value, not excluded.\n";
    int flagged = 0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (i != j) flagged += cells[i][j].flagged;
    if (flagged > 0)
        os << "Zero-variance comparisons (t = 0 or infinite): " << flagged / 2 << " method/environment pairs.\n";
    return os.str();
}

nlohmann::json PairwiseReport::to_json() const {
    using nlohmann::json;
    json j;
    j["format"] = "apple-eval-report";
    j["version"] = 1;
    j["alpha"] = alpha;
    j["env_count"] = env_count;
    j["failed_runs_scored_at_timeout"] = true;
    json ms = json::array();
    for (std::size_t i = 0; i < methods.size(); ++i)
        ms.push_back({{"name", methods[i]},
                      {"mean_time", mean_time[i]},
                      {"runs", runs[i]},
                      {"failed_runs", failures[i]},
                      {"env_mean", env_mean[i]}});
    j["methods"] = ms;
    json pairs = json::array();
    for (std::size_t i = 0; i < methods.size(); ++i) {
        for (std::size_t k = 0; k < methods.size(); ++k) {
            if (i == k) continue;
            const auto& c = cells[i][k];
            json envs = json::array();
            for (const auto& t : tests[i][k]) {
                const char* kind = t.kind == TTestCase::Regular ? "regular"
                                   : t.kind == TTestCase::Degenerate ? "degenerate"
                                                                     : "separated";
                envs.push_back({{"t", std::isfinite(t.t) ? json(t.t) : json(t.t > 0 ? "inf" : "-inf")},
                                {"p", t.p},
                                {"dof", t.dof},
                                {"case", kind}});
            }
            pairs.push_back({{"method", methods[i]},
                             {"versus", methods[k]},
                             {"worse_pct", c.worse_pct},
                             {"better_pct", c.better_pct},
                             {"worse", c.worse},
                             {"better", c.better},
                             {"flagged", c.flagged},
                             {"envs", envs}});
        }
    }
    j["pairs"] = pairs;
    return j;
}

}  // namespace apple::evalx
