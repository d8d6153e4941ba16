#include "sparq/metrics.hpp"

#include <nlohmann/json.hpp>

#include "sparq/errors.hpp"

namespace sparq {
namespace {

void require_upper(const RecurrenceMatrix& m) {
    if (m.shape() != RecurrenceMatrix::Shape::upper_triangle) {
        throw SizeMismatch("operation requires an upper-triangle matrix");
    }
}

// Walks diagonal offset k (cells (i, i+k)) and records maximal runs.
void scan_diagonal_runs(const RecurrenceMatrix& m, std::uint32_t k,
                        std::map<std::uint32_t, std::uint64_t>& p) {
    const std::uint32_t n = m.size();
    std::uint32_t run = 0;
    for (std::uint32_t i = 0; i + k < n; ++i) {
        if (m.at(i, i + k)) {
            ++run;
        } else if (run > 0) {
            ++p[run];
            run = 0;
        }
    }
    if (run > 0) ++p[run];
}

std::uint64_t count_diagonal(const RecurrenceMatrix& m, std::uint32_t k) {
    const std::uint32_t n = m.size();
    std::uint64_t c = 0;
    for (std::uint32_t i = 0; i + k < n; ++i) {
        c += m.at(i, i + k) ? 1 : 0;
    }
    return c;
}

}  // namespace

std::uint64_t LineHistogram::recurrent_points() const {
    std::uint64_t total = 0;
    for (const auto& [len, count] : p) total += static_cast<std::uint64_t>(len) * count;
    return total;
}

std::uint64_t LineHistogram::points_on_lines_at_least(std::uint32_t l_min) const {
    std::uint64_t total = 0;
    for (const auto& [len, count] : p) {
        if (len >= l_min) total += static_cast<std::uint64_t>(len) * count;
    }
    return total;
}

std::uint32_t LineHistogram::longest() const {
    return p.empty() ? 0 : p.rbegin()->first;
}

LineHistogram diagonal_histogram(const RecurrenceMatrix& m, LineHistogram::Scope scope) {
    require_upper(m);
    LineHistogram h;
    h.scope = scope;
    const std::uint32_t n = m.size();
    const std::uint32_t first = scope == LineHistogram::Scope::off_center_only ? 1 : 0;
    const std::uint32_t last =
        scope == LineHistogram::Scope::central_diagonal_only ? 0 : n - 1;
    for (std::uint32_t k = first; k <= last && k < n; ++k) {
        scan_diagonal_runs(m, k, h.p);
    }
    return h;
}

ContactTotal contact_total(const RecurrenceMatrix& m) {
    require_upper(m);
    ContactTotal out;
    out.c_tot_raw = m.count_ones();
    const double n = static_cast<double>(m.size());
    out.c_tot = static_cast<double>(out.c_tot_raw) / (0.5 * n * n + 0.5 * n);
    return out;
}

double contact_sustained(const LineHistogram& h, std::uint32_t l_min) {
    if (l_min < 1) {
        throw InvalidLMin(l_min);
    }
    const std::uint64_t total = h.recurrent_points();
    if (total == 0) return 0.0;
    return static_cast<double>(h.points_on_lines_at_least(l_min)) /
           static_cast<double>(total);
}

SimultaneousMetrics simultaneous_metrics(const RecurrenceMatrix& m, std::uint32_t l_min) {
    require_upper(m);
    SimultaneousMetrics out;
    const LineHistogram central =
        diagonal_histogram(m, LineHistogram::Scope::central_diagonal_only);
    out.sc_tot_raw = central.recurrent_points();
    out.sc_tot = static_cast<double>(out.sc_tot_raw) / static_cast<double>(m.size());
    out.sc_sus = contact_sustained(central, l_min);
    return out;
}

std::map<std::uint32_t, std::uint64_t> lag_profile(const RecurrenceMatrix& m) {
    require_upper(m);
    std::map<std::uint32_t, std::uint64_t> profile;
    for (std::uint32_t k = 1; k < m.size(); ++k) {
        const std::uint64_t c = count_diagonal(m, k);
        if (c > 0) profile[k] = c;
    }
    return profile;
}

std::uint32_t l_min_for(std::int64_t critical_exposure_s, std::int64_t window_s) {
    if (critical_exposure_s <= 0 || window_s <= 0) {
        throw Error("critical exposure and window must be positive");
    }
    const std::int64_t l = (critical_exposure_s + window_s - 1) / window_s;
    return static_cast<std::uint32_t>(l < 1 ? 1 : l);
}

RqaMetrics rqa_metrics(const RecurrenceMatrix& m, std::uint32_t l_min, RqaMode mode) {
    if (m.shape() != RecurrenceMatrix::Shape::full) {
        throw SizeMismatch("rqa metrics require a full matrix");
    }
    if (l_min < 1) {
        throw InvalidLMin(l_min);
    }

    const std::uint32_t n = m.size();
    std::uint64_t central_points = 0;
    std::map<std::uint32_t, std::uint64_t> central_runs;
    {
        std::uint32_t run = 0;
        for (std::uint32_t i = 0; i < n; ++i) {
            if (m.at(i, i)) {
                ++central_points;
                ++run;
            } else if (run > 0) {
                ++central_runs[run];
                run = 0;
            }
        }
        if (run > 0) ++central_runs[run];
    }

    // Off-central diagonals, both above (j > i) and below (i > j).
    std::uint64_t off_points = 0;
    std::map<std::uint32_t, std::uint64_t> off_runs;
    for (std::uint32_t k = 1; k < n; ++k) {
        std::uint32_t run_up = 0;
        std::uint32_t run_down = 0;
        for (std::uint32_t i = 0; i + k < n; ++i) {
            if (m.at(i, i + k)) {
                ++off_points;
                ++run_up;
            } else if (run_up > 0) {
                ++off_runs[run_up];
                run_up = 0;
            }
            if (m.at(i + k, i)) {
                ++off_points;
                ++run_down;
            } else if (run_down > 0) {
                ++off_runs[run_down];
                run_down = 0;
            }
        }
        if (run_up > 0) ++off_runs[run_up];
        if (run_down > 0) ++off_runs[run_down];
    }
    const std::uint32_t maxline = off_runs.empty() ? 0 : off_runs.rbegin()->first;

    auto points_at_least = [l_min](const std::map<std::uint32_t, std::uint64_t>& runs) {
        std::uint64_t total = 0;
        for (const auto& [len, count] : runs) {
            if (len >= l_min) total += static_cast<std::uint64_t>(len) * count;
        }
        return total;
    };

    RqaMetrics out;
    out.maxline = maxline;
    const double nd = static_cast<double>(n);
    if (mode == RqaMode::self_series) {
        const std::uint64_t denom_points = off_points;
        const double denom_cells = nd * nd - nd;
        out.recurrence_rate =
            denom_cells > 0 ? static_cast<double>(denom_points) / denom_cells : 0.0;
        out.determinism = denom_points > 0
                              ? static_cast<double>(points_at_least(off_runs)) /
                                    static_cast<double>(denom_points)
                              : 0.0;
    } else {
        const std::uint64_t all_points = off_points + central_points;
        out.recurrence_rate = static_cast<double>(all_points) / (nd * nd);
        const std::uint64_t on_lines =
            points_at_least(off_runs) + points_at_least(central_runs);
        out.determinism = all_points > 0 ? static_cast<double>(on_lines) /
                                               static_cast<double>(all_points)
                                         : 0.0;
    }
    out.det_rr_ratio =
        out.recurrence_rate > 0.0 ? out.determinism / out.recurrence_rate : 0.0;
    return out;
}

std::int64_t ContactMetrics::lagged_exposure_s() const {
    std::uint64_t lagged = 0;
    for (const auto& [k, count] : lag_profile) lagged += count;
    return static_cast<std::int64_t>(lagged) * window_s;
}

ContactMetrics compute_contact_metrics(const RecurrenceMatrix& m, std::uint32_t l_min,
                                       std::int64_t window_s) {
    require_upper(m);
    if (l_min < 1) {
        throw InvalidLMin(l_min);
    }
    if (window_s <= 0) {
        throw Error("window_s must be positive");
    }

    ContactMetrics out;
    out.n = m.size();
    out.window_s = window_s;
    out.l_min = l_min;

    const ContactTotal tot = contact_total(m);
    out.c_tot = tot.c_tot;
    out.c_tot_raw = tot.c_tot_raw;

    const LineHistogram central =
        diagonal_histogram(m, LineHistogram::Scope::central_diagonal_only);
    const LineHistogram off =
        diagonal_histogram(m, LineHistogram::Scope::off_center_only);
    LineHistogram all;
    all.scope = LineHistogram::Scope::upper_triangle_all;
    all.p = central.p;
    for (const auto& [len, count] : off.p) all.p[len] += count;

    out.c_sus = contact_sustained(all, l_min);
    out.sc_tot_raw = central.recurrent_points();
    out.sc_tot =
        static_cast<double>(out.sc_tot_raw) / static_cast<double>(m.size());
    out.sc_sus = contact_sustained(central, l_min);
    out.maxline_central = central.longest();
    out.maxline_lagged = off.longest();
    out.lag_profile = lag_profile(m);
    return out;
}

std::string contact_metrics_json(const ContactMetrics& m) {
    nlohmann::json lag = nlohmann::json::object();
    for (const auto& [k, count] : m.lag_profile) {
        lag[std::to_string(k)] = count;
    }
    const nlohmann::json doc{
        {"n", m.n},
        {"window_s", m.window_s},
        {"l_min", m.l_min},
        {"c_tot", m.c_tot},
        {"c_tot_raw", m.c_tot_raw},
        {"c_sus", m.c_sus},
        {"sc_tot", m.sc_tot},
        {"sc_tot_raw", m.sc_tot_raw},
        {"sc_sus", m.sc_sus},
        {"maxline_central", m.maxline_central},
        {"maxline_lagged", m.maxline_lagged},
        {"lag_profile", lag},
        {"exposure_seconds", m.exposure_seconds()},
        {"simultaneous_exposure_s", m.simultaneous_exposure_s()},
        {"lagged_exposure_s", m.lagged_exposure_s()},
    };
    return doc.dump(2);
}

}  // namespace sparq
