#pragma once

// Reproducibility record written next to every simulation output.

#include <cstdint>
#include <string>
#include <vector>

#include "cqed/detection.hpp"
#include "cqed/scenarios.hpp"

namespace cqed {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunManifest {
  std::string scenario_ref;  // preset name or scenario file path
  DriveScenario scenario;    // as given (before calibration)
  DetectionChain chain;
  std::size_t n_pulses = 0;
  std::uint64_t seed = 0;
  std::size_t shards = 1;
  std::string version = kToolVersion;
  std::vector<std::string> outputs;
};

std::string chain_to_json(const DetectionChain& c);
DetectionChain chain_from_json(std::string_view text);

std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(std::string_view text);
RunManifest load_manifest(const std::string& path);

}  // namespace cqed
