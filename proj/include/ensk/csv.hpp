#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ensk/simulation.hpp"
#include "ensk/types.hpp"

namespace ensk {

/// Reads `id,accuracy,cost` rows (cost column optional, defaults to 1) and
/// validates them into a Pool. Errors name the offending row.
Pool read_pool_csv(std::istream& in);
Pool read_pool_csv_file(const std::string& path);

/// Single-line (or single-column) list of weights p_{l,k}.
std::vector<double> read_weights_csv_file(const std::string& path);

void write_replicates_csv(std::ostream& out, const ExperimentReport& report);
void write_traces_csv(std::ostream& out, const ExperimentReport& report);

}  // namespace ensk
