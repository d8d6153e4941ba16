#include "sparq/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "sparq/errors.hpp"

namespace sparq {
namespace {

constexpr double kMetersPerDegreeLon = 111320.0;
constexpr double kMetersPerDegreeLat = 110540.0;

bool parse_int(std::string_view s, std::int64_t& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

bool parse_real(std::string_view s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

struct ParsedRow {
    std::string agent_id;
    std::int64_t timestamp = 0;
    double a = 0.0;  // x or lat
    double b = 0.0;  // y or lon
};

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return out;
}

ParsedRow parse_csv_row(std::string_view line, std::size_t line_no) {
    const auto fields = split_fields(line);
    if (fields.size() != 4) {
        throw MalformedRecord(line_no, "expected 4 comma-separated fields, got " +
                                           std::to_string(fields.size()));
    }
    ParsedRow row;
    row.agent_id = std::string(fields[0]);
    if (row.agent_id.empty()) {
        throw MalformedRecord(line_no, "empty agent_id");
    }
    if (!parse_int(fields[1], row.timestamp)) {
        throw MalformedRecord(line_no, "timestamp is not a whole number of seconds");
    }
    if (row.timestamp < 0) {
        throw MalformedRecord(line_no, "negative timestamp");
    }
    if (!parse_real(fields[2], row.a) || !parse_real(fields[3], row.b)) {
        throw MalformedRecord(line_no, "coordinate is not a finite number");
    }
    return row;
}

ParsedRow parse_jsonl_row(std::string_view line, std::size_t line_no, bool geographic) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedRecord(line_no, e.what());
    }
    if (!doc.is_object()) {
        throw MalformedRecord(line_no, "expected a JSON object");
    }
    ParsedRow row;
    const char* ka = geographic ? "lat" : "x";
    const char* kb = geographic ? "lon" : "y";
    if (!doc.contains("agent_id") || !doc["agent_id"].is_string()) {
        throw MalformedRecord(line_no, "missing string field agent_id");
    }
    row.agent_id = doc["agent_id"].get<std::string>();
    if (row.agent_id.empty()) {
        throw MalformedRecord(line_no, "empty agent_id");
    }
    if (!doc.contains("timestamp") || !doc["timestamp"].is_number_integer()) {
        throw MalformedRecord(line_no, "timestamp must be an integer");
    }
    row.timestamp = doc["timestamp"].get<std::int64_t>();
    if (row.timestamp < 0) {
        throw MalformedRecord(line_no, "negative timestamp");
    }
    for (const auto* key : {ka, kb}) {
        if (!doc.contains(key) || !doc[key].is_number()) {
            throw MalformedRecord(line_no, std::string("missing numeric field ") + key);
        }
    }
    row.a = doc[ka].get<double>();
    row.b = doc[kb].get<double>();
    if (!std::isfinite(row.a) || !std::isfinite(row.b)) {
        throw MalformedRecord(line_no, "coordinate is not finite");
    }
    return row;
}

bool is_csv_header(std::string_view line) {
    return line == "agent_id,timestamp,x,y" || line == "agent_id,timestamp,lat,lon";
}

}  // namespace

RawSample project_sample(std::int64_t timestamp, double lat_deg, double lon_deg,
                         const ProjectionConfig& projection) {
    const double ref_rad =
        projection.reference_latitude_deg * std::numbers::pi / 180.0;
    RawSample s;
    s.timestamp = timestamp;
    s.x = lon_deg * std::cos(ref_rad) * kMetersPerDegreeLon;
    s.y = lat_deg * kMetersPerDegreeLat;
    return s;
}

Trajectory parse_trajectory(std::string_view bytes, InputFormat format,
                            const ProjectionConfig& projection,
                            SourceKind source_kind) {
    const bool geographic = projection.mode == ProjectionMode::equirectangular;

    Trajectory traj;
    traj.source_kind = source_kind;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool first_data_line = true;
    while (pos <= bytes.size()) {
        std::size_t nl = bytes.find('\n', pos);
        if (nl == std::string_view::npos) nl = bytes.size();
        std::string_view line = bytes.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (format == InputFormat::csv && first_data_line && is_csv_header(line)) {
            first_data_line = false;
            continue;
        }
        first_data_line = false;

        const ParsedRow row = format == InputFormat::csv
                                  ? parse_csv_row(line, line_no)
                                  : parse_jsonl_row(line, line_no, geographic);
        if (traj.agent_id.empty()) {
            traj.agent_id = row.agent_id;
        } else if (traj.agent_id != row.agent_id) {
            throw MalformedRecord(line_no, "agent_id '" + row.agent_id +
                                               "' differs from '" + traj.agent_id + "'");
        }
        if (geographic) {
            traj.samples.push_back(project_sample(row.timestamp, row.a, row.b, projection));
        } else {
            traj.samples.push_back({row.timestamp, row.a, row.b});
        }
    }

    if (traj.samples.empty()) {
        throw EmptyInput();
    }

    std::stable_sort(traj.samples.begin(), traj.samples.end(),
                     [](const RawSample& l, const RawSample& r) {
                         return l.timestamp < r.timestamp;
                     });
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        if (traj.samples[i].timestamp == traj.samples[i - 1].timestamp) {
            throw DuplicateTimestamp(traj.samples[i].timestamp);
        }
    }
    return traj;
}

TimeInterval validate_overlap(const Trajectory& a, const Trajectory& b,
                              std::int64_t min_overlap_s) {
    if (a.empty() || b.empty()) {
        throw InsufficientOverlap("cannot overlap an empty trajectory");
    }
    const TimeInterval common{std::max(a.start_s(), b.start_s()),
                              std::min(a.end_s(), b.end_s())};
    if (common.length_s() < 0 || common.length_s() < min_overlap_s) {
        throw InsufficientOverlap("overlap of " + std::to_string(common.length_s()) +
                                  " s is below the required " +
                                  std::to_string(min_overlap_s) + " s");
    }
    return common;
}

}  // namespace sparq
