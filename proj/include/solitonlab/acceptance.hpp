#pragma once

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace solitonlab {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  nlohmann::json values = nlohmann::json::object();
};

constexpr int criterion_count = 14;

// Evaluated from the artifacts in dir; MissingArtifact if a required file is absent.
CriterionResult evaluate_criterion(int id, const std::filesystem::path& dir);

// All criteria whose artifacts exist; the others are skipped.
std::vector<CriterionResult> evaluate_available(const std::filesystem::path& dir);

std::string format_line(const CriterionResult& r);

}  // namespace solitonlab
