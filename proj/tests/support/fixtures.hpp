#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include <unistd.h>

#include "tierwatch/config.hpp"
#include "tierwatch/supply_graph.hpp"

namespace fixtures {

inline std::filesystem::path data_dir() { return TIERWATCH_DATA_DIR; }
inline std::filesystem::path mini_mb_dir() { return data_dir() / "mini-mb"; }
inline std::filesystem::path golden_dir() { return TIERWATCH_GOLDEN_DIR; }

inline tierwatch::SupplyGraph mini_mb() { return tierwatch::load_graph_file((mini_mb_dir() / "graph.json").string()); }

inline std::string mini_mb_article() { return tierwatch::read_text_file(mini_mb_dir() / "article.txt"); }

inline tierwatch::PipelineConfig mini_mb_config(tierwatch::ReviewMode mode = tierwatch::ReviewMode::kAutoApprove) {
  auto files = tierwatch::DataFiles::in_directory(mini_mb_dir());
  return tierwatch::load_pipeline_config(files, mini_mb(), tierwatch::BackendKind::kRule, mode);
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("tierwatch-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
