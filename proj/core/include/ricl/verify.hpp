#pragma once

// Named runtime property checks, one per invariant of each module.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ricl/datagen.hpp"

namespace ricl {

struct PropertyContext {
  std::uint64_t seed = 1;
  Preset preset;
  std::size_t jobs = 1;
};

struct PropertyResult {
  bool pass = false;
  std::string detail;
};

struct Property {
  std::string name;  // <module>.<property>
  std::function<PropertyResult(const PropertyContext&)> check;
};

const std::vector<Property>& property_registry();

struct PropertyOutcome {
  std::string name;
  PropertyResult result;
  double seconds = 0.0;
};

/// Runs every property whose name contains `filter` (all when empty). A
/// property that throws fails with the exception message as its detail.
std::vector<PropertyOutcome> run_properties(const PropertyContext& ctx,
                                            const std::string& filter = "");

}  // namespace ricl
