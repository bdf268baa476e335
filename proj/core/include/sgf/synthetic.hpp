#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgf/caption_pipeline.hpp"
#include "sgf/scene_model.hpp"

namespace sgf {

struct SyntheticBox {
  std::string label;
  AABB box;
};

/// Coordinates produced by the generator are multiples of this step, so
/// translations by whole meters and scaling by powers of two are exact.
inline constexpr double kSyntheticGrid = 1.0 / 64.0;

struct SyntheticOptions {
  std::size_t min_objects = 4;   // non-floor instances
  std::size_t max_objects = 12;
  double points_per_m2 = 80.0;
  std::size_t min_points_per_box = 24;
  std::size_t max_points_per_box = 600;
  std::size_t total_points = 0;  // > 0: pad with extra surface points to exactly this count
  std::size_t views = 8;
  int image_width = 160;
  int image_height = 120;

  void validate() const;
};

struct SyntheticScene {
  ScenePointCloud scene;
  std::vector<Camera> cameras;
  std::vector<SyntheticBox> boxes;  // index i is instance id i
};

/// Furnished room with walls, furniture groups (table settings, chair rows,
/// beds with nightstands, cabinets with contents, counters with sinks, bins,
/// wall hangings, ceiling lamps) and orbiting cameras. Deterministic in
/// (seed, index).
SyntheticScene generate_scene(std::uint64_t seed, std::size_t index, const SyntheticOptions& opts = {});

/// Point cloud sampled on the surfaces of the boxes (corners included, so
/// every instance's point bounds equal its box). Instance ids follow box
/// order. With `grid` > 0, coordinates are box minima plus multiples of grid.
ScenePointCloud scene_from_boxes(std::string scene_id, const std::vector<SyntheticBox>& boxes, std::uint64_t seed,
                                 const SyntheticOptions& opts = {}, double grid = 0.0);

/// `views` cameras on a circle inside `room`, looking at its center.
std::vector<Camera> orbit_cameras(const AABB& room, std::size_t views, int width, int height,
                                  const std::string& image_prefix);

/// World-to-camera extrinsics for a camera at `eye` looking at `target` with
/// +Z up in the world.
Transform look_at(const Vec3& eye, const Vec3& target);

}  // namespace sgf
