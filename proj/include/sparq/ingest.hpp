#pragma once

#include <string_view>

#include "sparq/trajectory.hpp"

namespace sparq {

enum class InputFormat : std::uint8_t { csv, jsonl };

// Parses one agent's trajectory from CSV or JSONL bytes.
//
// CSV columns: agent_id,timestamp,x,y (planar) or agent_id,timestamp,lat,lon
// (equirectangular). A leading header line matching either column set is
// skipped. JSONL carries the same four keys, one object per line.
//
// Samples are returned sorted by timestamp. Throws MalformedRecord,
// DuplicateTimestamp or EmptyInput.
Trajectory parse_trajectory(std::string_view bytes, InputFormat format,
                            const ProjectionConfig& projection,
                            SourceKind source_kind = SourceKind::other);

// Projects geographic degrees to local planar meters.
// x = lon * cos(reference_latitude) * 111320, y = lat * 110540.
RawSample project_sample(std::int64_t timestamp, double lat_deg, double lon_deg,
                         const ProjectionConfig& projection);

// Intersection of the two trajectories' time spans, if it is at least
// min_overlap_s seconds long. Throws InsufficientOverlap otherwise.
TimeInterval validate_overlap(const Trajectory& a, const Trajectory& b,
                              std::int64_t min_overlap_s);

}  // namespace sparq
