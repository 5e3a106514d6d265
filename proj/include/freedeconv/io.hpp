#pragma once

#include <string>

#include <json.hpp>

#include "freedeconv/deconvolution.hpp"
#include "freedeconv/measure.hpp"

namespace freedeconv {

using json = nlohmann::json;

/// {"atoms": [...], "weights": [...]}; reading enforces the measure invariants.
json measure_to_json(const DiscreteMeasure& mu);
DiscreteMeasure measure_from_json(const json& j);

/// Plain JSON array m_0, m_1, ...
json moments_to_json(const MomentSequence& m);
MomentSequence moments_from_json(const json& j);

/// Estimate, moments, diagnostics and an echo of the configuration.
json result_to_json(const DeconvResult& r);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

}  // namespace freedeconv
