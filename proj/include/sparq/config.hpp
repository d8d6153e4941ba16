#pragma once

#include <string>
#include <string_view>

#include "sparq/grid.hpp"
#include "sparq/risk.hpp"

namespace sparq {

// Key-value text format: one "key = value" per line, '#' comments, blank
// lines ignored. Unknown keys are errors so typos fail loudly.
struct PipelineConfig {
    WindowConfig window;
    QuantConfig quant;
};

PipelineConfig parse_pipeline_config(std::string_view text);
RiskPolicy parse_risk_policy(std::string_view text);

std::string read_text_file(const std::string& path);

}  // namespace sparq
