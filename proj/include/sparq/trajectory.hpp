#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sparq {

// One timestamped planar position. Coordinates are meters east/north of an
// arbitrary local origin; timestamps are whole seconds since epoch.
struct RawSample {
    std::int64_t timestamp = 0;
    double x = 0.0;
    double y = 0.0;
};

enum class SourceKind : std::uint8_t { gps, interview, other };

struct Trajectory {
    std::string agent_id;
    std::vector<RawSample> samples;  // strictly ascending by timestamp
    SourceKind source_kind = SourceKind::other;

    bool empty() const { return samples.empty(); }
    std::int64_t start_s() const { return samples.front().timestamp; }
    std::int64_t end_s() const { return samples.back().timestamp; }
};

// Closed interval of whole seconds [start_s, end_s]; length_s() follows the
// end-minus-start convention used everywhere downstream.
struct TimeInterval {
    std::int64_t start_s = 0;
    std::int64_t end_s = 0;

    std::int64_t length_s() const { return end_s - start_s; }
    bool operator==(const TimeInterval&) const = default;
};

enum class ProjectionMode : std::uint8_t { planar_passthrough, equirectangular };

struct ProjectionConfig {
    double reference_latitude_deg = 0.0;  // in [-90, 90]
    ProjectionMode mode = ProjectionMode::planar_passthrough;
};

}  // namespace sparq
