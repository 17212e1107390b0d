#pragma once

#include <iosfwd>
#include <string>

#include "maxent/model.hpp"

namespace maxent {

inline constexpr const char* kModelFormat = "maxent-model";
inline constexpr int kModelVersion = 1;

/// JSON model file: features (spec, partition, bin rows or block values),
/// group table, multipliers, convergence metadata and the node relabel map.
void save_model(const FittedModel& model, std::ostream& out);
void save_model(const FittedModel& model, const std::string& path);

/// Refuses files with another format tag or an unknown version.
FittedModel load_model(std::istream& in);
FittedModel load_model(const std::string& path);

}  // namespace maxent
