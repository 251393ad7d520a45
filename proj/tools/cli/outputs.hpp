#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace modeshape::cli {

/// Collects output files in memory and publishes them together. Each file
/// is written to a temporary sibling and renamed into place; if any step
/// fails, files already published by this batch are removed again.
class OutputBatch {
 public:
  void add(std::filesystem::path path, std::string content);
  void commit();

 private:
  std::vector<std::pair<std::filesystem::path, std::string>> files_;
};

/// UTC timestamp, e.g. 2026-10-16T12:00:00Z.
std::string utc_timestamp();

}  // namespace modeshape::cli
