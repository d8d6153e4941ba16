#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sparq/metrics.hpp"

namespace sparq {

// Tier thresholds and lag handling. Thresholds are configuration, not code:
// each disease gets its own policy file.
struct RiskPolicy {
    std::int64_t vigilance_threshold_s = 1;  // any exposure
    std::int64_t isolate_threshold_s = 900;
    std::int32_t isolate_days_min = 5;
    std::int32_t isolate_days_max = 14;
    bool count_lagged = false;  // early-outbreak mode: central diagonal only
    std::map<std::uint32_t, double> lag_weights;  // per-lag weight, default 0

    bool operator==(const RiskPolicy&) const = default;
};

enum class RiskTier : std::uint8_t { none = 0, vigilance = 1, isolate = 2 };

std::string_view to_string(RiskTier tier);

struct RiskAssessment {
    RiskTier tier = RiskTier::none;
    std::int64_t simultaneous_exposure_s = 0;
    std::int64_t lagged_exposure_s = 0;
    std::uint32_t contributing_agents = 0;
    std::string recommendation;
};

void validate_policy(const RiskPolicy& policy);

// Tiers one agent pairing. Throws InvalidPolicy.
RiskAssessment assess(const ContactMetrics& metrics, const RiskPolicy& policy);

// Tiers the combined exposure across several contagious agents; simultaneous
// exposure seconds sum over the inputs.
RiskAssessment assess(std::span<const ContactMetrics> per_agent,
                      const RiskPolicy& policy);

// Regression-ready export: one row per contagious agent plus conserved totals.
struct AgentFeatures {
    std::string case_id;
    ContactMetrics metrics;
};

struct FeatureVector {
    std::vector<AgentFeatures> agents;
    std::uint32_t vector_count = 0;  // agents with any recurrence
    std::uint64_t total_c_tot_raw = 0;
    std::uint64_t total_sc_tot_raw = 0;
    std::map<std::uint32_t, std::uint64_t> merged_lag_profile;
};

// Throws EmptyList.
FeatureVector export_features(std::span<const AgentFeatures> per_agent);

// CSV with header: case_id,c_tot_raw,sc_tot_raw,c_sus,sc_sus,maxline_central,
// maxline_lagged,lag_profile where lag_profile is "k:count" pairs joined by ';'.
std::string features_csv(const FeatureVector& fv);
std::string features_json(const FeatureVector& fv);

std::string assessment_json(const RiskAssessment& a);

}  // namespace sparq
