#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparq/trajectory.hpp"

namespace sparq {

struct WindowConfig {
    std::int64_t window_s = 450;
    std::int64_t grid_origin_t = 0;
    std::int64_t critical_exposure_s = 900;
    // Lifts the window_s <= critical_exposure_s / 2 check.
    bool override_nyquist = false;

    bool operator==(const WindowConfig&) const = default;
};

struct QuantConfig {
    double cell_m = 2.0;  // recommended range 2-10

    bool operator==(const QuantConfig&) const = default;
};

// Windowed mean positions on the global time grid. Window k covers
// [grid_origin_t + k*window_s, grid_origin_t + (k+1)*window_s); the series
// holds windows start_index .. start_index+N-1.
struct AveragedSeries {
    std::string agent_id;
    std::int64_t start_index = 0;
    std::vector<double> mean_x;
    std::vector<double> mean_y;
    std::vector<std::uint8_t> gap_mask;  // 1 = no sample fell in the window

    std::size_t size() const { return mean_x.size(); }
};

// Quantized integer cell series on the shared grid. Gap windows hold
// gap_sentinel in both dimensions; the sentinel is derived from agent_id and
// sits far below any reachable real cell index.
struct GridSeries {
    std::string agent_id;
    std::int64_t start_index = 0;
    std::int64_t gap_sentinel = 0;
    std::vector<std::int64_t> cells_x;
    std::vector<std::int64_t> cells_y;
    std::vector<std::uint8_t> gap_mask;

    std::size_t size() const { return cells_x.size(); }
    bool is_gap(std::size_t i) const { return gap_mask[i] != 0; }
};

std::int64_t gap_sentinel_for(std::string_view agent_id);

// Global index of the window containing second t.
std::int64_t window_index(std::int64_t t, const WindowConfig& cfg);

// Averages samples into N = ceil(interval.length_s() / window_s) windows
// aligned to the global grid. Throws EmptyInterval or NyquistViolation.
AveragedSeries windowize(const Trajectory& traj, const TimeInterval& interval,
                         const WindowConfig& cfg);

// floor(coordinate / cell_m) per dimension; gaps pass through as sentinels.
GridSeries quantize(const AveragedSeries& avg, const QuantConfig& cfg);

// Re-indexes a series onto [start_index, start_index + n); windows the input
// does not cover become gaps.
GridSeries project_onto(const GridSeries& s, std::int64_t start_index, std::size_t n);

// Count of grid windows shared by the two series' index ranges.
std::int64_t overlapping_windows(const GridSeries& a, const GridSeries& b);

}  // namespace sparq
