#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "sgf/graph_builder.hpp"
#include "sgf/scene_model.hpp"
#include "sgf/synthetic.hpp"

namespace fixtures {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("sgf_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
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
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline sgf::SyntheticBox box(std::string label, sgf::Vec3 lo, sgf::Vec3 hi) { return {std::move(label), sgf::AABB(lo, hi)}; }

/// Floor [(0,0,0),(4,4,0.05)], table [(1,1,0.05),(2,2,0.8)], cup on the table
/// and a chair to the table's right.
inline std::vector<sgf::SyntheticBox> floor_table_cup_chair() {
  return {box("floor", {0, 0, 0}, {4, 4, 0.05}), box("table", {1, 1, 0.05}, {2, 2, 0.8}),
          box("cup", {1.4, 1.4, 0.8}, {1.6, 1.6, 0.9}), box("chair", {2.5, 1.2, 0.05}, {3.0, 1.7, 0.9})};
}

inline sgf::ObjectNode node(sgf::InstanceId id, std::string label, sgf::Vec3 lo, sgf::Vec3 hi) {
  sgf::ObjectNode n;
  n.id = id;
  n.label = std::move(label);
  n.bbox = sgf::AABB(lo, hi);
  n.centroid = n.bbox.center();
  n.point_count = 8;
  return n;
}

inline bool has_edge(const sgf::SceneGraph& g, sgf::InstanceId s, sgf::RelationType r, sgf::InstanceId t) {
  for (const auto& e : g.edges) {
    if (e.source == s && e.target == t && e.relation == r) return true;
  }
  return false;
}

}  // namespace fixtures
