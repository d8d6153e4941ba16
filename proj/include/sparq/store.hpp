#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sparq/grid.hpp"
#include "sparq/risk.hpp"
#include "sparq/trajectory.hpp"

namespace sparq {

// Grid parameters shared by every record in one pool. Pinned by the first
// ingestion; later ingestions and queries must match or the grids could not
// be cross-compared.
struct StoreConfig {
    WindowConfig window;
    QuantConfig quant;
    std::int64_t retention_s = 0;  // 0 = records never expire

    bool operator==(const StoreConfig&) const = default;
};

struct RecordMeta {
    std::string case_id;
    std::string file;  // relative to the store directory
    std::int64_t ingested_at = 0;
    std::string authorized_by;  // credential fingerprint, hex
};

struct ArtifactMeta {
    std::string query_id;
    std::string dir;  // relative to the store directory
    std::int64_t created_at = 0;
};

// Quantized cells only; raw coordinates are never written to the pool.
struct ContagiousRecord {
    std::string case_id;
    GridSeries grid;
    std::int64_t ingested_at = 0;
    std::string authorized_by;
};

struct QueryResult {
    RiskAssessment assessment;
    FeatureVector features;
    std::vector<std::string> skipped_overlap;  // insufficient shared windows
    std::vector<std::string> expired;          // outside the retention window
    std::vector<std::string> notices;          // e.g. "no_pool_data"
    std::optional<std::string> query_id;       // set when an artifact was persisted

    // Privacy-preserving outputs (binary matrices carry no coordinates);
    // available for plotting.
    std::vector<std::pair<std::string, RecurrenceMatrix>> matrices;
    std::optional<ExposureAccumulator> accumulator;
};

// Single-directory file store: one JSON file per contagious record, one
// subdirectory per opt-in artifact, and an index.json tying them together.
// Writers take an exclusive flock on <dir>/.lock, readers a shared one.
class PoolStore {
public:
    explicit PoolStore(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }

    std::optional<StoreConfig> config() const;

    // Gate: credential must equal the secret in $SPARQ_POOL_SECRET.
    // Windowizes and quantizes the trajectory, persists the cells, and
    // discards the raw coordinates. Throws Unauthorized or ConfigMismatch.
    ContagiousRecord ingest_contagious(const Trajectory& traj,
                                       std::string_view credential,
                                       const StoreConfig& cfg);

    // Builds per-record combined matrices against the healthy trajectory,
    // accumulates them, scores risk, and destroys the healthy trajectory and
    // its grid before returning. Persists matrices+metrics only when opt_in.
    QueryResult query_risk(Trajectory healthy, bool opt_in, const RiskPolicy& policy,
                           std::string_view query_id_hint = {});

    // Removes one opt-in artifact. Throws NotFound.
    void delete_opt_in(std::string_view query_id);

    std::vector<RecordMeta> list_records() const;
    std::vector<ArtifactMeta> list_artifacts() const;
    ContagiousRecord load_record(std::string_view case_id) const;

    static constexpr const char* kSecretEnvVar = "SPARQ_POOL_SECRET";

private:
    std::string persist_artifact(std::string_view healthy_id,
                                 std::string_view query_id_hint,
                                 const QueryResult& result);

    std::filesystem::path dir_;
};

}  // namespace sparq
