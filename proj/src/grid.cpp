#include "sparq/grid.hpp"

#include <cmath>
#include <limits>

#include "sparq/errors.hpp"
#include "sparq/hash.hpp"

namespace sparq {
namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
    return -floor_div(-a, b);
}

}  // namespace

std::int64_t gap_sentinel_for(std::string_view agent_id) {
    // Bottom of the int64 range, offset per agent so gaps of different agents
    // never compare equal. Real cells are bounded by |coord|/cell_m and stay
    // far above this band.
    const auto offset = static_cast<std::int64_t>(fnv1a64(agent_id) & 0xffffffffULL);
    return std::numeric_limits<std::int64_t>::min() + 1 + offset;
}

std::int64_t window_index(std::int64_t t, const WindowConfig& cfg) {
    return floor_div(t - cfg.grid_origin_t, cfg.window_s);
}

AveragedSeries windowize(const Trajectory& traj, const TimeInterval& interval,
                         const WindowConfig& cfg) {
    if (cfg.window_s <= 0) {
        throw Error("window_s must be positive");
    }
    if (interval.length_s() <= 0) {
        throw EmptyInterval();
    }
    if (!cfg.override_nyquist && 2 * cfg.window_s > cfg.critical_exposure_s) {
        throw NyquistViolation("window of " + std::to_string(cfg.window_s) +
                               " s exceeds half the critical exposure time of " +
                               std::to_string(cfg.critical_exposure_s) + " s");
    }

    const std::int64_t start_index = window_index(interval.start_s, cfg);
    const std::int64_t n = ceil_div(interval.length_s(), cfg.window_s);

    AveragedSeries out;
    out.agent_id = traj.agent_id;
    out.start_index = start_index;
    out.mean_x.assign(static_cast<std::size_t>(n), 0.0);
    out.mean_y.assign(static_cast<std::size_t>(n), 0.0);
    out.gap_mask.assign(static_cast<std::size_t>(n), 1);

    std::vector<std::uint64_t> counts(static_cast<std::size_t>(n), 0);
    for (const RawSample& s : traj.samples) {
        const std::int64_t k = window_index(s.timestamp, cfg) - start_index;
        if (k < 0 || k >= n) continue;
        const auto i = static_cast<std::size_t>(k);
        out.mean_x[i] += s.x;
        out.mean_y[i] += s.y;
        ++counts[i];
    }
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
        if (counts[i] == 0) continue;
        out.mean_x[i] /= static_cast<double>(counts[i]);
        out.mean_y[i] /= static_cast<double>(counts[i]);
        out.gap_mask[i] = 0;
    }
    return out;
}

GridSeries quantize(const AveragedSeries& avg, const QuantConfig& cfg) {
    if (cfg.cell_m <= 0.0) {
        throw Error("cell_m must be positive");
    }
    GridSeries out;
    out.agent_id = avg.agent_id;
    out.start_index = avg.start_index;
    out.gap_sentinel = gap_sentinel_for(avg.agent_id);
    const std::size_t n = avg.size();
    out.cells_x.assign(n, out.gap_sentinel);
    out.cells_y.assign(n, out.gap_sentinel);
    out.gap_mask = avg.gap_mask;
    for (std::size_t i = 0; i < n; ++i) {
        if (avg.gap_mask[i]) continue;
        out.cells_x[i] = static_cast<std::int64_t>(std::floor(avg.mean_x[i] / cfg.cell_m));
        out.cells_y[i] = static_cast<std::int64_t>(std::floor(avg.mean_y[i] / cfg.cell_m));
    }
    return out;
}

GridSeries project_onto(const GridSeries& s, std::int64_t start_index, std::size_t n) {
    GridSeries out;
    out.agent_id = s.agent_id;
    out.start_index = start_index;
    out.gap_sentinel = s.gap_sentinel;
    out.cells_x.assign(n, s.gap_sentinel);
    out.cells_y.assign(n, s.gap_sentinel);
    out.gap_mask.assign(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t src = start_index + static_cast<std::int64_t>(i) - s.start_index;
        if (src < 0 || src >= static_cast<std::int64_t>(s.size())) continue;
        const auto j = static_cast<std::size_t>(src);
        out.cells_x[i] = s.cells_x[j];
        out.cells_y[i] = s.cells_y[j];
        out.gap_mask[i] = s.gap_mask[j];
    }
    return out;
}

std::int64_t overlapping_windows(const GridSeries& a, const GridSeries& b) {
    const std::int64_t lo = std::max(a.start_index, b.start_index);
    const std::int64_t hi = std::min(a.start_index + static_cast<std::int64_t>(a.size()),
                                     b.start_index + static_cast<std::int64_t>(b.size()));
    return hi > lo ? hi - lo : 0;
}

}  // namespace sparq
