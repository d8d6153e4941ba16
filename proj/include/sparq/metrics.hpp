#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "sparq/recurrence.hpp"

namespace sparq {

// Histogram of maximal diagonal runs: p[l] = number of maximal runs of exactly
// l consecutive 1s. A run is recorded once at its full length, so
// sum(l * p[l]) over the whole upper triangle equals the recurrent point count.
struct LineHistogram {
    enum class Scope : std::uint8_t {
        upper_triangle_all,
        central_diagonal_only,
        off_center_only,
    };

    std::map<std::uint32_t, std::uint64_t> p;
    Scope scope = Scope::upper_triangle_all;

    std::uint64_t recurrent_points() const;                    // sum l*p(l)
    std::uint64_t points_on_lines_at_least(std::uint32_t l_min) const;
    std::uint32_t longest() const;
};

LineHistogram diagonal_histogram(const RecurrenceMatrix& m, LineHistogram::Scope scope);

struct ContactTotal {
    double c_tot = 0.0;
    std::uint64_t c_tot_raw = 0;
};
// c_tot_raw = sum over j >= i of R(i,j); c_tot normalizes by 0.5n^2 + 0.5n.
ContactTotal contact_total(const RecurrenceMatrix& m);

// Fraction of recurrent points lying on diagonal runs of length >= l_min.
// 0 for an empty matrix. Throws InvalidLMin.
double contact_sustained(const LineHistogram& h, std::uint32_t l_min);

struct SimultaneousMetrics {
    double sc_tot = 0.0;
    std::uint64_t sc_tot_raw = 0;
    double sc_sus = 0.0;
};
// Same metrics constrained to the central diagonal.
SimultaneousMetrics simultaneous_metrics(const RecurrenceMatrix& m, std::uint32_t l_min);

// Count of 1s per diagonal offset k >= 1; lag seconds = k * window_s.
std::map<std::uint32_t, std::uint64_t> lag_profile(const RecurrenceMatrix& m);

// Smallest run length spanning at least critical_exposure_s at window_s
// granularity (15 min at 5-min windows -> 3).
std::uint32_t l_min_for(std::int64_t critical_exposure_s, std::int64_t window_s);

enum class RqaMode : std::uint8_t { self_series, cross_series };

struct RqaMetrics {
    double recurrence_rate = 0.0;
    double determinism = 0.0;
    double det_rr_ratio = 0.0;
    std::uint32_t maxline = 0;
};

// Classic quantification of a full matrix. For self-recurrence the central
// diagonal is excluded from every metric; cross-recurrence keeps it (except in
// maxline, which is the longest non-central run in both modes).
RqaMetrics rqa_metrics(const RecurrenceMatrix& m, std::uint32_t l_min, RqaMode mode);

// The risk-facing bundle computed from one combined upper-triangle matrix.
struct ContactMetrics {
    std::uint32_t n = 0;
    std::int64_t window_s = 0;
    std::uint32_t l_min = 1;
    double c_tot = 0.0;
    std::uint64_t c_tot_raw = 0;
    double c_sus = 0.0;
    double sc_tot = 0.0;
    std::uint64_t sc_tot_raw = 0;
    double sc_sus = 0.0;
    std::uint32_t maxline_central = 0;
    std::uint32_t maxline_lagged = 0;
    std::map<std::uint32_t, std::uint64_t> lag_profile;

    std::int64_t exposure_seconds() const {
        return static_cast<std::int64_t>(c_tot_raw) * window_s;
    }
    std::int64_t simultaneous_exposure_s() const {
        return static_cast<std::int64_t>(sc_tot_raw) * window_s;
    }
    std::int64_t lagged_exposure_s() const;
};

ContactMetrics compute_contact_metrics(const RecurrenceMatrix& m, std::uint32_t l_min,
                                       std::int64_t window_s);

// Documented JSON report (all ContactMetrics fields plus exposure_seconds).
std::string contact_metrics_json(const ContactMetrics& m);

}  // namespace sparq
