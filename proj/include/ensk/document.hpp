#pragma once

#include <json.hpp>

#include <map>
#include <optional>
#include <string>

#include "ensk/energy_stats.hpp"
#include "ensk/search.hpp"
#include "ensk/simulation.hpp"
#include "ensk/types.hpp"

namespace ensk {

inline constexpr const char* kToolName = "ensk";
inline constexpr const char* kToolVersion = "0.1.0";

using Json = nlohmann::ordered_json;

Json stop_rule_to_json(const StopRule& rule);
Json selection_to_json(const Pool& pool, const Selection& sel);
Json search_result_to_json(const Pool& pool, const SearchResult& result);

/// Full result document: input echo, stop rule with derivation, selection,
/// search metadata. Round-trips losslessly; wall_seconds is the only field
/// expected to differ between identical runs.
Json make_result_document(const std::map<std::string, Json>& inputs, const Pool& pool,
                          const std::optional<StopRule>& rule, const SearchResult& result);

Json experiment_report_to_json(const ExperimentReport& report);

/// Removes every "wall_seconds" field, recursively; used when comparing
/// documents for bytewise equality.
void strip_wall_times(Json& doc);

}  // namespace ensk
