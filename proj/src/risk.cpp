#include "sparq/risk.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sparq/errors.hpp"

namespace sparq {

std::string_view to_string(RiskTier tier) {
    switch (tier) {
        case RiskTier::none: return "none";
        case RiskTier::vigilance: return "vigilance";
        case RiskTier::isolate: return "isolate";
    }
    return "none";
}

void validate_policy(const RiskPolicy& policy) {
    if (policy.vigilance_threshold_s < 0) {
        throw InvalidPolicy("vigilance_threshold_s must be non-negative");
    }
    if (policy.isolate_threshold_s < policy.vigilance_threshold_s) {
        throw InvalidPolicy("isolate_threshold_s must be >= vigilance_threshold_s");
    }
    if (policy.isolate_days_min < 0 || policy.isolate_days_max < policy.isolate_days_min) {
        throw InvalidPolicy("isolation day range is inverted");
    }
    for (const auto& [lag, weight] : policy.lag_weights) {
        if (!(weight >= 0.0) || !std::isfinite(weight)) {
            throw InvalidPolicy("lag weight for offset " + std::to_string(lag) +
                                " must be a finite non-negative number");
        }
    }
}

namespace {

std::string recommendation_for(RiskTier tier, const RiskPolicy& policy) {
    switch (tier) {
        case RiskTier::isolate:
            return "Self-isolate for " + std::to_string(policy.isolate_days_min) +
                   " to " + std::to_string(policy.isolate_days_max) +
                   " days and contact public health services.";
        case RiskTier::vigilance:
            return "Be extra vigilant: wear a mask, wash hands frequently, avoid "
                   "at-risk individuals, and monitor body temperature.";
        case RiskTier::none:
            return "No contact with the contagious pool was detected; no action needed.";
    }
    return {};
}

}  // namespace

RiskAssessment assess(std::span<const ContactMetrics> per_agent,
                      const RiskPolicy& policy) {
    validate_policy(policy);

    RiskAssessment out;
    double weighted_lagged_s = 0.0;
    for (const ContactMetrics& m : per_agent) {
        if (m.window_s <= 0) {
            throw Error("metrics carry a non-positive window_s");
        }
        out.simultaneous_exposure_s += m.simultaneous_exposure_s();
        out.lagged_exposure_s += m.lagged_exposure_s();
        if (m.c_tot_raw > 0) ++out.contributing_agents;
        if (policy.count_lagged) {
            for (const auto& [lag, count] : m.lag_profile) {
                const auto it = policy.lag_weights.find(lag);
                const double w = it == policy.lag_weights.end() ? 0.0 : it->second;
                weighted_lagged_s += w * static_cast<double>(count) *
                                     static_cast<double>(m.window_s);
            }
        }
    }

    const double effective_s =
        static_cast<double>(out.simultaneous_exposure_s) + weighted_lagged_s;
    if (effective_s >= static_cast<double>(policy.isolate_threshold_s)) {
        out.tier = RiskTier::isolate;
    } else if (effective_s >= static_cast<double>(policy.vigilance_threshold_s)) {
        out.tier = RiskTier::vigilance;
    } else {
        out.tier = RiskTier::none;
    }
    out.recommendation = recommendation_for(out.tier, policy);
    return out;
}

RiskAssessment assess(const ContactMetrics& metrics, const RiskPolicy& policy) {
    return assess(std::span<const ContactMetrics>{&metrics, 1}, policy);
}

FeatureVector export_features(std::span<const AgentFeatures> per_agent) {
    if (per_agent.empty()) {
        throw EmptyList();
    }
    FeatureVector fv;
    fv.agents.assign(per_agent.begin(), per_agent.end());
    for (const AgentFeatures& a : per_agent) {
        if (a.metrics.c_tot_raw > 0) ++fv.vector_count;
        fv.total_c_tot_raw += a.metrics.c_tot_raw;
        fv.total_sc_tot_raw += a.metrics.sc_tot_raw;
        for (const auto& [lag, count] : a.metrics.lag_profile) {
            fv.merged_lag_profile[lag] += count;
        }
    }
    return fv;
}

namespace {

std::string lag_profile_field(const std::map<std::uint32_t, std::uint64_t>& profile) {
    std::ostringstream out;
    bool first = true;
    for (const auto& [lag, count] : profile) {
        if (!first) out << ';';
        out << lag << ':' << count;
        first = false;
    }
    return out.str();
}

nlohmann::json lag_profile_json(const std::map<std::uint32_t, std::uint64_t>& profile) {
    nlohmann::json obj = nlohmann::json::object();
    for (const auto& [lag, count] : profile) obj[std::to_string(lag)] = count;
    return obj;
}

}  // namespace

std::string features_csv(const FeatureVector& fv) {
    std::ostringstream out;
    out << "case_id,c_tot_raw,sc_tot_raw,c_sus,sc_sus,maxline_central,"
           "maxline_lagged,lag_profile\n";
    for (const AgentFeatures& a : fv.agents) {
        out << a.case_id << ',' << a.metrics.c_tot_raw << ',' << a.metrics.sc_tot_raw
            << ',' << a.metrics.c_sus << ',' << a.metrics.sc_sus << ','
            << a.metrics.maxline_central << ',' << a.metrics.maxline_lagged << ','
            << lag_profile_field(a.metrics.lag_profile) << '\n';
    }
    return out.str();
}

std::string features_json(const FeatureVector& fv) {
    nlohmann::json agents = nlohmann::json::array();
    for (const AgentFeatures& a : fv.agents) {
        agents.push_back({
            {"case_id", a.case_id},
            {"c_tot_raw", a.metrics.c_tot_raw},
            {"sc_tot_raw", a.metrics.sc_tot_raw},
            {"c_sus", a.metrics.c_sus},
            {"sc_sus", a.metrics.sc_sus},
            {"maxline_central", a.metrics.maxline_central},
            {"maxline_lagged", a.metrics.maxline_lagged},
            {"lag_profile", lag_profile_json(a.metrics.lag_profile)},
        });
    }
    const nlohmann::json doc{
        {"vector_count", fv.vector_count},
        {"total_c_tot_raw", fv.total_c_tot_raw},
        {"total_sc_tot_raw", fv.total_sc_tot_raw},
        {"merged_lag_profile", lag_profile_json(fv.merged_lag_profile)},
        {"agents", agents},
    };
    return doc.dump(2);
}

std::string assessment_json(const RiskAssessment& a) {
    const nlohmann::json doc{
        {"tier", std::string(to_string(a.tier))},
        {"simultaneous_exposure_s", a.simultaneous_exposure_s},
        {"lagged_exposure_s", a.lagged_exposure_s},
        {"contributing_agents", a.contributing_agents},
        {"recommendation", a.recommendation},
    };
    return doc.dump(2);
}

}  // namespace sparq
