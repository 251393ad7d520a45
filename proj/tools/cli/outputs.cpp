#include "outputs.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include "modeshape/errors.hpp"

namespace modeshape::cli {

namespace fs = std::filesystem;

void OutputBatch::add(fs::path path, std::string content) {
  files_.emplace_back(std::move(path), std::move(content));
}

void OutputBatch::commit() {
  std::vector<fs::path> temporaries;
  std::vector<fs::path> published;
  const auto cleanup = [&] {
    std::error_code ec;
    for (const auto& p : temporaries) fs::remove(p, ec);
    for (const auto& p : published) fs::remove(p, ec);
  };

  try {
    for (const auto& [path, content] : files_) {
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
      fs::path tmp = path;
      tmp += ".partial";
      temporaries.push_back(tmp);
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << content;
      out.close();
      if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
    }
    for (std::size_t i = 0; i < files_.size(); ++i) {
      fs::rename(temporaries[i], files_[i].first);
      published.push_back(files_[i].first);
    }
  } catch (const fs::filesystem_error& e) {
    cleanup();
    throw Error(ErrorCode::InvalidArgument, std::string("cannot write outputs: ") + e.what());
  } catch (...) {
    cleanup();
    throw;
  }
  files_.clear();
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

}  // namespace modeshape::cli
