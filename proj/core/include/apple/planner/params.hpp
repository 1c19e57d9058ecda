#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "apple/error.hpp"

namespace apple::planner {

inline constexpr std::size_t kParamDims = 8;

/// One point in the DWA parameter space.
struct PlannerParams {
    double max_vel_x = 0.5;       // v, m/s
    double max_vel_theta = 1.57;  // w, rad/s
    int vx_samples = 6;           // s
    int vtheta_samples = 20;      // t
    double occdist_scale = 0.10;  // o
    double pdist_scale = 0.75;    // p
    double gdist_scale = 1.00;    // g
    double inflation_radius = 0.30;  // i, m

    [[nodiscard]] std::array<double, kParamDims> to_array() const noexcept;
    /// Integer fields are rounded to nearest; no clamping.
    [[nodiscard]] static PlannerParams from_array(const std::array<double, kParamDims>& a) noexcept;

    friend bool operator==(const PlannerParams&, const PlannerParams&) = default;
};

/// Field names in array order: max_vel_x, max_vel_theta, vx_samples, ...
[[nodiscard]] const std::array<std::string, kParamDims>& param_names();
[[nodiscard]] constexpr bool param_is_integer(std::size_t dim) noexcept { return dim == 2 || dim == 3; }

/// Per-dimension [lo, hi] box for the continuous parameter policy.
struct ParamBounds {
    std::array<double, kParamDims> lo{};
    std::array<double, kParamDims> hi{};

    /// The min/max rows of the published parameter table.
    [[nodiscard]] static ParamBounds table() noexcept;
    [[nodiscard]] bool contains(const PlannerParams& p) const noexcept;
    /// Round integer dims to nearest, then clamp every dim into [lo, hi].
    [[nodiscard]] PlannerParams clamp(const std::array<double, kParamDims>& raw) const noexcept;

    friend bool operator==(const ParamBounds&, const ParamBounds&) = default;
};

/// Ordered list of K candidate parameter sets; index 0 is the default set.
class ParameterLibrary {
public:
    ParameterLibrary() = default;
    explicit ParameterLibrary(std::vector<PlannerParams> entries, std::vector<std::string> names = {});

    /// theta1..theta7 of the published parameter table.
    [[nodiscard]] static ParameterLibrary table();

    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] const PlannerParams& at(std::size_t i) const { return entries_.at(i); }
    [[nodiscard]] const PlannerParams& default_params() const { return entries_.front(); }
    [[nodiscard]] const std::vector<PlannerParams>& entries() const noexcept { return entries_; }
    [[nodiscard]] const std::string& name(std::size_t i) const { return names_.at(i); }

    /// Keeps only the first k entries (k >= 1).
    [[nodiscard]] ParameterLibrary prefix(std::size_t k) const;

    friend bool operator==(const ParameterLibrary&, const ParameterLibrary&) = default;

private:
    std::vector<PlannerParams> entries_;
    std::vector<std::string> names_;
};

/// Physical sanity check applied to library entries: positive velocities,
/// at least two samples per axis, non-negative weights and inflation.
[[nodiscard]] bool params_physical(const PlannerParams& p) noexcept;

/// Library file: JSON object with "version", "library" (list of named
/// records with the eight fields) and "bounds" ({"min": {...}, "max": {...}}).
struct LibraryFile {
    ParameterLibrary library;
    ParamBounds bounds;
};
[[nodiscard]] LibraryFile load_library(const std::filesystem::path& path);
void save_library(const std::filesystem::path& path, const LibraryFile& file);
[[nodiscard]] std::string library_to_text(const LibraryFile& file);
[[nodiscard]] LibraryFile library_from_text(const std::string& text);

}  // namespace apple::planner
