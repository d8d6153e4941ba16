#include "sparq/store.hpp"

#include <sys/file.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <ctime>
#include <fcntl.h>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "sparq/errors.hpp"
#include "sparq/hash.hpp"
#include "sparq/ingest.hpp"
#include "sparq/metrics.hpp"
#include "sparq/recurrence.hpp"

namespace sparq {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class FileLock {
public:
    FileLock(const fs::path& path, bool exclusive) {
        fd_ = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
        if (fd_ < 0) {
            throw Error("cannot open lock file " + path.string());
        }
        if (::flock(fd_, exclusive ? LOCK_EX : LOCK_SH) != 0) {
            ::close(fd_);
            throw Error("cannot lock " + path.string());
        }
    }
    ~FileLock() {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_ = -1;
};

std::string sanitize_id(std::string_view id) {
    std::string out;
    out.reserve(id.size() + 17);
    for (const char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_';
        out.push_back(ok ? c : '_');
    }
    if (out.size() > 64) out.resize(64);
    return out + "-" + hex64(fnv1a64(id)).substr(8);
}

std::int64_t now_s() { return static_cast<std::int64_t>(std::time(nullptr)); }

void write_file_atomic(const fs::path& path, std::string_view bytes) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write " + tmp.string());
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw Error("write to " + tmp.string() + " failed");
        }
    }
    fs::rename(tmp, path);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json grid_to_json(const GridSeries& g) {
    return json{{"agent_id", g.agent_id},
                {"start_index", g.start_index},
                {"gap_sentinel", g.gap_sentinel},
                {"cells_x", g.cells_x},
                {"cells_y", g.cells_y},
                {"gap_mask", g.gap_mask}};
}

GridSeries grid_from_json(const json& doc) {
    GridSeries g;
    g.agent_id = doc.at("agent_id").get<std::string>();
    g.start_index = doc.at("start_index").get<std::int64_t>();
    g.gap_sentinel = doc.at("gap_sentinel").get<std::int64_t>();
    g.cells_x = doc.at("cells_x").get<std::vector<std::int64_t>>();
    g.cells_y = doc.at("cells_y").get<std::vector<std::int64_t>>();
    g.gap_mask = doc.at("gap_mask").get<std::vector<std::uint8_t>>();
    if (g.cells_x.size() != g.cells_y.size() || g.cells_x.size() != g.gap_mask.size() ||
        g.cells_x.empty()) {
        throw Error("corrupt grid series for agent " + g.agent_id);
    }
    return g;
}

json config_to_json(const StoreConfig& c) {
    return json{{"window_s", c.window.window_s},
                {"critical_exposure_s", c.window.critical_exposure_s},
                {"grid_origin_t", c.window.grid_origin_t},
                {"cell_m", c.quant.cell_m},
                {"retention_s", c.retention_s}};
}

StoreConfig config_from_json(const json& doc) {
    StoreConfig c;
    c.window.window_s = doc.at("window_s").get<std::int64_t>();
    c.window.critical_exposure_s = doc.at("critical_exposure_s").get<std::int64_t>();
    c.window.grid_origin_t = doc.at("grid_origin_t").get<std::int64_t>();
    c.quant.cell_m = doc.at("cell_m").get<double>();
    c.retention_s = doc.at("retention_s").get<std::int64_t>();
    return c;
}

struct Index {
    std::optional<StoreConfig> config;
    std::vector<RecordMeta> records;
    std::vector<ArtifactMeta> artifacts;
};

Index load_index(const fs::path& dir) {
    Index idx;
    const fs::path path = dir / "index.json";
    if (!fs::exists(path)) return idx;
    json doc;
    try {
        doc = json::parse(slurp(path));
    } catch (const json::exception& e) {
        throw Error("corrupt index at " + path.string() + ": " + e.what());
    }
    if (doc.contains("config") && !doc["config"].is_null()) {
        idx.config = config_from_json(doc["config"]);
    }
    for (const json& r : doc.value("records", json::array())) {
        idx.records.push_back({r.at("case_id").get<std::string>(),
                               r.at("file").get<std::string>(),
                               r.at("ingested_at").get<std::int64_t>(),
                               r.at("authorized_by").get<std::string>()});
    }
    for (const json& a : doc.value("artifacts", json::array())) {
        idx.artifacts.push_back({a.at("query_id").get<std::string>(),
                                 a.at("dir").get<std::string>(),
                                 a.at("created_at").get<std::int64_t>()});
    }
    return idx;
}

void save_index(const fs::path& dir, Index idx) {
    std::sort(idx.records.begin(), idx.records.end(),
              [](const RecordMeta& a, const RecordMeta& b) { return a.case_id < b.case_id; });
    std::sort(idx.artifacts.begin(), idx.artifacts.end(),
              [](const ArtifactMeta& a, const ArtifactMeta& b) {
                  return a.query_id < b.query_id;
              });
    json records = json::array();
    for (const RecordMeta& r : idx.records) {
        records.push_back({{"case_id", r.case_id},
                           {"file", r.file},
                           {"ingested_at", r.ingested_at},
                           {"authorized_by", r.authorized_by}});
    }
    json artifacts = json::array();
    for (const ArtifactMeta& a : idx.artifacts) {
        artifacts.push_back({{"query_id", a.query_id},
                             {"dir", a.dir},
                             {"created_at", a.created_at}});
    }
    json doc{{"version", 1}, {"records", records}, {"artifacts", artifacts}};
    doc["config"] = idx.config ? config_to_json(*idx.config) : json();
    write_file_atomic(dir / "index.json", doc.dump(2) + "\n");
}

std::string expected_secret() {
    const char* secret = std::getenv(PoolStore::kSecretEnvVar);
    return secret ? std::string(secret) : std::string();
}

}  // namespace

PoolStore::PoolStore(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_ / "pool");
    fs::create_directories(dir_ / "optin");
}

std::optional<StoreConfig> PoolStore::config() const {
    FileLock lock(dir_ / ".lock", /*exclusive=*/false);
    return load_index(dir_).config;
}

ContagiousRecord PoolStore::ingest_contagious(const Trajectory& traj,
                                              std::string_view credential,
                                              const StoreConfig& cfg) {
    const std::string secret = expected_secret();
    if (secret.empty() || !constant_time_equal(credential, secret)) {
        throw Unauthorized();
    }
    if (traj.empty()) {
        throw EmptyInput("trajectory has no samples");
    }
    if (traj.agent_id.empty()) {
        throw Error("trajectory carries no agent_id");
    }

    // Quantize before touching the store; only cells cross this line.
    const TimeInterval span{traj.start_s(), traj.end_s() + 1};
    const GridSeries grid = quantize(windowize(traj, span, cfg.window), cfg.quant);

    FileLock lock(dir_ / ".lock", /*exclusive=*/true);
    Index idx = load_index(dir_);
    if (idx.config) {
        if (!(*idx.config == cfg)) {
            throw ConfigMismatch("pool was created with different grid parameters");
        }
    } else {
        idx.config = cfg;
    }

    ContagiousRecord record;
    record.case_id = traj.agent_id;
    record.grid = grid;
    record.ingested_at = now_s();
    record.authorized_by = hex64(fnv1a64(credential));

    const std::string rel = "pool/" + sanitize_id(record.case_id) + ".json";
    const json doc{{"case_id", record.case_id},
                   {"ingested_at", record.ingested_at},
                   {"authorized_by", record.authorized_by},
                   {"grid", grid_to_json(record.grid)}};
    write_file_atomic(dir_ / rel, doc.dump(2) + "\n");

    std::erase_if(idx.records,
                  [&](const RecordMeta& r) { return r.case_id == record.case_id; });
    idx.records.push_back({record.case_id, rel, record.ingested_at, record.authorized_by});
    save_index(dir_, std::move(idx));
    return record;
}

QueryResult PoolStore::query_risk(Trajectory healthy, bool opt_in,
                                  const RiskPolicy& policy,
                                  std::string_view query_id_hint) {
    validate_policy(policy);
    if (healthy.empty()) {
        throw EmptyInput("healthy trajectory has no samples");
    }

    QueryResult result;

    std::optional<StoreConfig> cfg;
    std::vector<std::pair<RecordMeta, GridSeries>> pool;
    {
        FileLock lock(dir_ / ".lock", /*exclusive=*/false);
        Index idx = load_index(dir_);
        cfg = idx.config;
        for (const RecordMeta& meta : idx.records) {
            const json doc = json::parse(slurp(dir_ / meta.file));
            pool.emplace_back(meta, grid_from_json(doc.at("grid")));
        }
    }

    if (pool.empty()) {
        result.notices.emplace_back("no_pool_data");
        result.assessment = assess(std::span<const ContactMetrics>{}, policy);
        healthy.samples.clear();
        return result;
    }

    std::sort(pool.begin(), pool.end(),
              [](const auto& a, const auto& b) { return a.first.case_id < b.first.case_id; });

    const TimeInterval span{healthy.start_s(), healthy.end_s() + 1};
    GridSeries healthy_grid = quantize(windowize(healthy, span, cfg->window), cfg->quant);
    const std::uint32_t l_min = l_min_for(cfg->window.critical_exposure_s,
                                          cfg->window.window_s);

    std::vector<AgentFeatures> per_agent;
    const std::int64_t query_time = now_s();
    for (auto& [meta, grid] : pool) {
        if (cfg->retention_s > 0 && meta.ingested_at + cfg->retention_s < query_time) {
            result.expired.push_back(meta.case_id);
            continue;
        }
        if (overlapping_windows(grid, healthy_grid) < 1) {
            result.skipped_overlap.push_back(meta.case_id);
            continue;
        }
        const GridSeries aligned =
            project_onto(grid, healthy_grid.start_index, healthy_grid.size());
        const DimensionMatrices dims = spatial_cross_recurrence(healthy_grid, aligned);
        RecurrenceMatrix combined = combine_dimensions(dims.x, dims.y);
        per_agent.push_back(
            {meta.case_id,
             compute_contact_metrics(combined, l_min, cfg->window.window_s)});
        result.matrices.emplace_back(meta.case_id, std::move(combined));
    }

    // Purge: raw healthy coordinates and cells die here; only binary matrices
    // and metrics survive.
    healthy.samples.clear();
    healthy.samples.shrink_to_fit();
    const std::string healthy_id = std::move(healthy_grid.agent_id);
    healthy_grid = GridSeries{};

    result.assessment = assess(per_agent, policy);
    if (!per_agent.empty()) {
        result.features = export_features(per_agent);
    }
    if (!result.matrices.empty()) {
        ExposureAccumulator acc(result.matrices.front().second.size());
        for (const auto& [case_id, m] : result.matrices) acc.add(m);
        result.accumulator = std::move(acc);
    }

    if (opt_in) {
        result.query_id = persist_artifact(healthy_id, query_id_hint, result);
    }
    return result;
}

std::string PoolStore::persist_artifact(std::string_view healthy_id,
                                        std::string_view query_id_hint,
                                        const QueryResult& result) {
    std::string query_id(query_id_hint);
    if (query_id.empty()) {
        // Deterministic id: same query against the same pool names the same
        // artifact.
        std::ostringstream seed;
        seed << healthy_id;
        for (const auto& [case_id, m] : result.matrices) {
            seed << '|' << case_id;
            write_container(seed, m);
        }
        query_id = "q" + hex64(fnv1a64(seed.str()));
    }

    FileLock lock(dir_ / ".lock", /*exclusive=*/true);
    Index idx = load_index(dir_);

    const std::string rel = "optin/" + sanitize_id(query_id);
    const fs::path adir = dir_ / rel;
    fs::remove_all(adir);
    fs::create_directories(adir);

    if (result.accumulator) {
        std::ostringstream bytes;
        write_container(bytes, *result.accumulator);
        write_file_atomic(adir / "accumulator.sprq", bytes.str());
    }
    json agents = json::array();
    for (std::size_t k = 0; k < result.matrices.size(); ++k) {
        const auto& [case_id, m] = result.matrices[k];
        std::ostringstream bytes;
        write_container(bytes, m);
        const std::string name = "matrix-" + sanitize_id(case_id) + ".sprq";
        write_file_atomic(adir / name, bytes.str());
        agents.push_back({{"case_id", case_id},
                          {"matrix_file", name},
                          {"metrics",
                           json::parse(contact_metrics_json(
                               result.features.agents[k].metrics))}});
    }
    const json sidecar{
        {"query_id", query_id},
        {"created_at", now_s()},
        {"opted_in", true},
        {"assessment", json::parse(assessment_json(result.assessment))},
        {"agents", agents},
    };
    write_file_atomic(adir / "metrics.json", sidecar.dump(2) + "\n");

    std::erase_if(idx.artifacts,
                  [&](const ArtifactMeta& a) { return a.query_id == query_id; });
    idx.artifacts.push_back({query_id, rel, now_s()});
    save_index(dir_, std::move(idx));
    return query_id;
}

void PoolStore::delete_opt_in(std::string_view query_id) {
    FileLock lock(dir_ / ".lock", /*exclusive=*/true);
    Index idx = load_index(dir_);
    const auto it = std::find_if(idx.artifacts.begin(), idx.artifacts.end(),
                                 [&](const ArtifactMeta& a) {
                                     return a.query_id == query_id;
                                 });
    if (it == idx.artifacts.end()) {
        throw NotFound("no opt-in artifact with query_id '" + std::string(query_id) + "'");
    }
    fs::remove_all(dir_ / it->dir);
    idx.artifacts.erase(it);
    save_index(dir_, std::move(idx));
}

std::vector<RecordMeta> PoolStore::list_records() const {
    FileLock lock(dir_ / ".lock", /*exclusive=*/false);
    return load_index(dir_).records;
}

std::vector<ArtifactMeta> PoolStore::list_artifacts() const {
    FileLock lock(dir_ / ".lock", /*exclusive=*/false);
    return load_index(dir_).artifacts;
}

ContagiousRecord PoolStore::load_record(std::string_view case_id) const {
    FileLock lock(dir_ / ".lock", /*exclusive=*/false);
    const Index idx = load_index(dir_);
    for (const RecordMeta& meta : idx.records) {
        if (meta.case_id == case_id) {
            const json doc = json::parse(slurp(dir_ / meta.file));
            ContagiousRecord record;
            record.case_id = meta.case_id;
            record.ingested_at = meta.ingested_at;
            record.authorized_by = meta.authorized_by;
            record.grid = grid_from_json(doc.at("grid"));
            return record;
        }
    }
    throw NotFound("no contagious record with case_id '" + std::string(case_id) + "'");
}

}  // namespace sparq
