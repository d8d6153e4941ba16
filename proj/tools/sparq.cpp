#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sparq/config.hpp"
#include "sparq/errors.hpp"
#include "sparq/ingest.hpp"
#include "sparq/metrics.hpp"
#include "sparq/plot.hpp"
#include "sparq/recurrence.hpp"
#include "sparq/risk.hpp"
#include "sparq/store.hpp"

namespace {

using nlohmann::json;

// Exit codes (also listed in --help):
//   0   success; `trace` tier none
//   10  `trace` tier vigilance
//   20  `trace` tier isolate
//   2   malformed or inconsistent input/config
//   3   I/O or internal failure
//   30  credential rejected
//   40  no such record/artifact
//   64  command line usage error
constexpr int kExitOk = 0;
constexpr int kExitVigilance = 10;
constexpr int kExitIsolate = 20;
constexpr int kExitBadInput = 2;
constexpr int kExitIo = 3;
constexpr int kExitUnauthorized = 30;
constexpr int kExitNotFound = 40;
constexpr int kExitUsage = 64;

struct InputOptions {
    std::string path;
    std::string format = "csv";
    std::string projection = "planar";
    double ref_lat = 0.0;
    std::string source = "other";
};

void add_input_options(CLI::App* cmd, InputOptions& opt) {
    cmd->add_option("--input", opt.path, "Trajectory file")->required();
    cmd->add_option("--format", opt.format, "Input format: csv or jsonl")
        ->check(CLI::IsMember({"csv", "jsonl"}));
    cmd->add_option("--projection", opt.projection,
                    "Coordinate handling: planar (meters) or equirect (lat/lon degrees)")
        ->check(CLI::IsMember({"planar", "equirect"}));
    cmd->add_option("--ref-lat", opt.ref_lat,
                    "Reference latitude in degrees for --projection equirect");
    cmd->add_option("--source", opt.source, "Data source kind: gps, interview or other")
        ->check(CLI::IsMember({"gps", "interview", "other"}));
}

sparq::Trajectory load_trajectory(const InputOptions& opt) {
    sparq::ProjectionConfig projection;
    projection.reference_latitude_deg = opt.ref_lat;
    projection.mode = opt.projection == "equirect"
                          ? sparq::ProjectionMode::equirectangular
                          : sparq::ProjectionMode::planar_passthrough;
    const auto format =
        opt.format == "jsonl" ? sparq::InputFormat::jsonl : sparq::InputFormat::csv;
    const auto source = opt.source == "gps"       ? sparq::SourceKind::gps
                        : opt.source == "interview" ? sparq::SourceKind::interview
                                                    : sparq::SourceKind::other;
    return sparq::parse_trajectory(sparq::read_text_file(opt.path), format, projection,
                                   source);
}

struct ConfigOptions {
    std::string config_path;
    std::int64_t window_s = -1;
    std::int64_t critical_exposure_s = -1;
    std::int64_t grid_origin_t = 0;
    bool grid_origin_set = false;
    double cell_m = -1.0;
    std::int64_t retention_s = -1;
};

void add_config_options(CLI::App* cmd, ConfigOptions& opt) {
    cmd->add_option("--config", opt.config_path,
                    "Key-value config file (window_s, critical_exposure_s, "
                    "grid_origin_t, cell_m)");
    cmd->add_option("--window-s", opt.window_s, "Averaging window in seconds");
    cmd->add_option("--critical-exposure-s", opt.critical_exposure_s,
                    "Critical exposure time in seconds");
    auto* origin = cmd->add_option("--grid-origin-t", opt.grid_origin_t,
                                   "Global grid origin timestamp");
    origin->each([&opt](const std::string&) { opt.grid_origin_set = true; });
    cmd->add_option("--cell-m", opt.cell_m, "Spatial cell size in meters (2-10 typical)");
    cmd->add_option("--retention-s", opt.retention_s,
                    "Contagious record retention in seconds (0 = keep forever)");
}

// Flag > config file > built-in default.
sparq::StoreConfig resolve_config(const ConfigOptions& opt) {
    sparq::StoreConfig cfg;
    if (!opt.config_path.empty()) {
        const sparq::PipelineConfig file_cfg =
            sparq::parse_pipeline_config(sparq::read_text_file(opt.config_path));
        cfg.window = file_cfg.window;
        cfg.quant = file_cfg.quant;
    }
    if (opt.window_s > 0) cfg.window.window_s = opt.window_s;
    if (opt.critical_exposure_s > 0) cfg.window.critical_exposure_s = opt.critical_exposure_s;
    if (opt.grid_origin_set) cfg.window.grid_origin_t = opt.grid_origin_t;
    if (opt.cell_m > 0) cfg.quant.cell_m = opt.cell_m;
    if (opt.retention_s >= 0) cfg.retention_s = opt.retention_s;
    return cfg;
}

int run_rqa(const std::string& input, std::uint32_t l_min, const std::string& out_path,
            std::uint32_t scale) {
    const sparq::SymbolSeries series =
        sparq::parse_symbols(sparq::read_text_file(input));
    const sparq::RecurrenceMatrix m = sparq::self_recurrence(series);
    const sparq::RqaMetrics metrics =
        sparq::rqa_metrics(m, l_min, sparq::RqaMode::self_series);

    json doc{{"n", m.size()},
             {"l_min", l_min},
             {"recurrence_rate", metrics.recurrence_rate},
             {"determinism", metrics.determinism},
             {"det_rr_ratio", metrics.det_rr_ratio},
             {"maxline", metrics.maxline}};
    if (!out_path.empty()) {
        sparq::PlotSpec spec;
        spec.scale = scale;
        sparq::write_file(out_path, sparq::render_plot(m, spec));
        doc["plot"] = out_path;
    }
    std::cout << doc.dump(2) << "\n";
    return kExitOk;
}

int run_ingest(const InputOptions& input, const ConfigOptions& config,
               const std::string& store_dir, const std::string& case_id,
               const std::string& credential) {
    sparq::Trajectory traj = load_trajectory(input);
    if (!case_id.empty()) traj.agent_id = case_id;

    sparq::PoolStore store(store_dir);
    sparq::StoreConfig cfg = resolve_config(config);
    if (const auto existing = store.config()) {
        cfg = *existing;  // the pool's grid is authoritative once pinned
    }
    const sparq::ContagiousRecord record =
        store.ingest_contagious(traj, credential, cfg);

    const json doc{{"case_id", record.case_id},
                   {"windows", record.grid.size()},
                   {"start_index", record.grid.start_index},
                   {"ingested_at", record.ingested_at},
                   {"authorized_by", record.authorized_by}};
    std::cout << doc.dump(2) << "\n";
    return kExitOk;
}

int run_trace(const InputOptions& input, const ConfigOptions& config,
              const std::string& store_dir, const std::string& policy_path,
              bool opt_in, const std::string& query_id,
              const std::string& plot_accum, const std::string& plot_matrix_dir,
              std::uint32_t plot_scale, const std::string& features_csv_path) {
    sparq::Trajectory traj = load_trajectory(input);

    sparq::RiskPolicy policy;
    if (!policy_path.empty()) {
        policy = sparq::parse_risk_policy(sparq::read_text_file(policy_path));
    }

    sparq::PoolStore store(store_dir);
    if (const auto existing = store.config()) {
        const sparq::StoreConfig requested = resolve_config(config);
        const bool user_supplied = !config.config_path.empty() || config.window_s > 0 ||
                                   config.critical_exposure_s > 0 ||
                                   config.grid_origin_set || config.cell_m > 0;
        if (user_supplied && !(requested == *existing)) {
            throw sparq::ConfigMismatch(
                "supplied grid parameters differ from the pool's");
        }
    }

    const sparq::QueryResult result =
        store.query_risk(std::move(traj), opt_in, policy, query_id);

    json doc{{"assessment", json::parse(sparq::assessment_json(result.assessment))},
             {"records_matched", result.matrices.size()},
             {"skipped_overlap", result.skipped_overlap},
             {"expired", result.expired},
             {"notices", result.notices}};
    doc["features"] = result.features.agents.empty()
                          ? json()
                          : json::parse(sparq::features_json(result.features));
    doc["query_id"] = result.query_id ? json(*result.query_id) : json();
    std::cout << doc.dump(2) << "\n";

    sparq::PlotSpec spec;
    spec.scale = plot_scale;
    if (!plot_accum.empty() && result.accumulator) {
        spec.palette = sparq::Palette::heat;
        sparq::write_file(plot_accum, sparq::render_plot(*result.accumulator, spec));
    }
    if (!plot_matrix_dir.empty()) {
        std::filesystem::create_directories(plot_matrix_dir);
        spec.palette = sparq::Palette::binary;
        for (const auto& [case_id, m] : result.matrices) {
            const auto path =
                std::filesystem::path(plot_matrix_dir) / (case_id + ".pgm");
            sparq::write_file(path.string(), sparq::render_plot(m, spec));
        }
    }
    if (!features_csv_path.empty() && !result.features.agents.empty()) {
        sparq::write_file(features_csv_path, sparq::features_csv(result.features));
    }

    switch (result.assessment.tier) {
        case sparq::RiskTier::isolate: return kExitIsolate;
        case sparq::RiskTier::vigilance: return kExitVigilance;
        case sparq::RiskTier::none: return kExitOk;
    }
    return kExitOk;
}

int run_delete(const std::string& store_dir, const std::string& query_id) {
    sparq::PoolStore store(store_dir);
    store.delete_opt_in(query_id);
    const json doc{{"deleted", query_id}};
    std::cout << doc.dump(2) << "\n";
    return kExitOk;
}

int run_plot(const std::string& input, const std::string& out_path,
             std::uint32_t scale, const std::string& palette) {
    std::ifstream in(input, std::ios::binary);
    if (!in) {
        throw sparq::Error("cannot open " + input);
    }
    sparq::PlotSpec spec;
    spec.scale = scale;
    spec.palette = palette == "heat" ? sparq::Palette::heat : sparq::Palette::binary;
    std::string bytes;
    if (sparq::peek_container_kind(in) == sparq::ContainerKind::accumulator) {
        bytes = sparq::render_plot(sparq::read_accumulator_container(in), spec);
    } else {
        bytes = sparq::render_plot(sparq::read_matrix_container(in), spec);
    }
    sparq::write_file(out_path, bytes);
    const json doc{{"plot", out_path}};
    std::cout << doc.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "sparq - spatial cross-recurrence contact tracing\n"
        "Exit codes: 0 ok/none, 10 vigilance, 20 isolate, 2 bad input,\n"
        "3 I/O failure, 30 unauthorized, 40 not found, 64 usage."};
    app.require_subcommand(1);

    // rqa
    auto* rqa = app.add_subcommand(
        "rqa", "Self-recurrence metrics and plot for a symbol (melody) file");
    std::string rqa_input;
    std::uint32_t rqa_l_min = 2;
    std::string rqa_out;
    std::uint32_t rqa_scale = 1;
    rqa->add_option("--input", rqa_input, "Symbol file: whitespace-separated integers")
        ->required();
    rqa->add_option("--l-min", rqa_l_min, "Minimum diagonal line length")
        ->check(CLI::PositiveNumber);
    rqa->add_option("--out", rqa_out, "PGM plot output path");
    rqa->add_option("--scale", rqa_scale, "Pixels per matrix cell")
        ->check(CLI::PositiveNumber);

    // ingest
    auto* ingest = app.add_subcommand(
        "ingest", "Add a confirmed case's trajectory to the contagious pool "
                  "(requires the pool secret)");
    InputOptions ingest_input;
    ConfigOptions ingest_config;
    std::string ingest_store, ingest_case_id, ingest_credential;
    add_input_options(ingest, ingest_input);
    add_config_options(ingest, ingest_config);
    ingest->add_option("--store", ingest_store, "Pool store directory")->required();
    ingest->add_option("--case-id", ingest_case_id,
                       "Override the agent_id from the input file");
    ingest->add_option("--credential", ingest_credential,
                       "Credential checked against $SPARQ_POOL_SECRET")
        ->required();

    // trace
    auto* trace = app.add_subcommand(
        "trace", "Assess a healthy trajectory against the contagious pool; "
                 "raw coordinates are purged after matrix construction");
    InputOptions trace_input;
    ConfigOptions trace_config;
    std::string trace_store, trace_policy, trace_query_id;
    std::string trace_plot_accum, trace_plot_matrix_dir, trace_features_csv;
    bool trace_opt_in = false;
    std::uint32_t trace_plot_scale = 1;
    add_input_options(trace, trace_input);
    add_config_options(trace, trace_config);
    trace->add_option("--store", trace_store, "Pool store directory")->required();
    trace->add_option("--policy", trace_policy, "Risk policy key-value file");
    trace->add_flag("--opt-in", trace_opt_in,
                    "Persist anonymized matrices and metrics for research");
    trace->add_option("--query-id", trace_query_id,
                      "Identifier for the opt-in artifact (default: derived)");
    trace->add_option("--plot-accum", trace_plot_accum,
                      "Write the exposure accumulator as a heat PGM");
    trace->add_option("--plot-matrix-dir", trace_plot_matrix_dir,
                      "Write one combined-matrix PGM per matched record");
    trace->add_option("--plot-scale", trace_plot_scale, "Pixels per matrix cell")
        ->check(CLI::PositiveNumber);
    trace->add_option("--features-csv", trace_features_csv,
                      "Write per-agent feature rows as CSV");

    // delete
    auto* del = app.add_subcommand("delete", "Remove an opt-in artifact");
    std::string del_store, del_query_id;
    del->add_option("--store", del_store, "Pool store directory")->required();
    del->add_option("--query-id", del_query_id, "Artifact to delete")->required();

    // plot
    auto* plot = app.add_subcommand("plot", "Render a stored SPRQ container as PGM");
    std::string plot_input, plot_out;
    std::uint32_t plot_scale = 1;
    std::string plot_palette = "binary";
    plot->add_option("--input", plot_input, "SPRQ container path")->required();
    plot->add_option("--out", plot_out, "PGM output path")->required();
    plot->add_option("--scale", plot_scale, "Pixels per matrix cell")
        ->check(CLI::PositiveNumber);
    plot->add_option("--palette", plot_palette, "binary or heat")
        ->check(CLI::IsMember({"binary", "heat"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (rqa->parsed()) {
            return run_rqa(rqa_input, rqa_l_min, rqa_out, rqa_scale);
        }
        if (ingest->parsed()) {
            return run_ingest(ingest_input, ingest_config, ingest_store, ingest_case_id,
                              ingest_credential);
        }
        if (trace->parsed()) {
            return run_trace(trace_input, trace_config, trace_store, trace_policy,
                             trace_opt_in, trace_query_id, trace_plot_accum,
                             trace_plot_matrix_dir, trace_plot_scale,
                             trace_features_csv);
        }
        if (del->parsed()) {
            return run_delete(del_store, del_query_id);
        }
        if (plot->parsed()) {
            return run_plot(plot_input, plot_out, plot_scale, plot_palette);
        }
    } catch (const sparq::Unauthorized& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnauthorized;
    } catch (const sparq::NotFound& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNotFound;
    } catch (const sparq::MalformedRecord& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const sparq::DuplicateTimestamp& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const sparq::EmptyInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const sparq::EmptyInterval& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const sparq::NyquistViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const sparq::InsufficientOverlap& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const sparq::LengthMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const sparq::GridMisaligned& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const sparq::SizeMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const sparq::EmptyList& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const sparq::InvalidLMin& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const sparq::InvalidPolicy& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const sparq::ConfigMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const sparq::MalformedContainer& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}
