#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgf/clients.hpp"
#include "sgf/scene_model.hpp"
#include "sgf/transform.hpp"

namespace sgf {

/// Pinhole camera; extrinsics map world to camera coordinates (+Z forward,
/// +X right, +Y down).
struct Camera {
  int view_id = 0;
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;
  Transform extrinsics = identity_transform();
  std::string image_ref;

  /// Throws ConfigError unless focal lengths and image size are positive and
  /// the rotation block is orthonormal with determinant +1.
  void validate() const;
};

/// JSON array of {"image","fx","fy","cx","cy","width","height",
/// "extrinsics": [16 numbers row-major]} with an optional "view_id"
/// (default: position in the array). Throws ConfigError.
std::vector<Camera> cameras_from_json(std::string_view text, const std::string& origin = "<memory>");
std::string cameras_to_json(const std::vector<Camera>& cameras);
std::vector<Camera> load_cameras(const std::filesystem::path& path);

/// Cameras re-expressed for a scene moved by `t` (world' = t * world).
std::vector<Camera> transform_cameras(const std::vector<Camera>& cameras, const Transform& t);

struct ProjectedPoint {
  std::size_t index = 0;  // position in the input span
  double u = 0, v = 0, depth = 0;
};

/// Projects world points; drops points at or behind the camera and points
/// outside [0, width) x [0, height).
std::vector<ProjectedPoint> project_points(std::span<const Vec3> points, const Camera& cam);

/// Nearest depth per cell of `cell_px` x `cell_px` pixels.
class DepthBuffer {
 public:
  DepthBuffer(const Camera& cam, std::span<const Vec3> scene_points, int cell_px = 1);

  double at(double u, double v) const;
  /// True when depth is within `tolerance` of the nearest surface at (u, v).
  bool visible(const ProjectedPoint& p, double tolerance = 1e-4) const { return p.depth <= at(p.u, p.v) + tolerance; }

 private:
  int cell_px_;
  int cols_;
  int rows_;
  std::vector<double> depth_;
};

/// Projected object points that survive the depth test.
std::vector<ProjectedPoint> visible_points(std::span<const Vec3> object_points, const Camera& cam,
                                           const DepthBuffer& buffer);

/// |visible| / |object points|; 0 for an empty object.
double occlusion_score(std::size_t object_points, std::size_t visible);

/// Inclusive pixel rectangle.
struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
  bool operator==(const PixelRect&) const = default;
};

/// Bounds of the projected points, padded on each side by `margin` times
/// the box size (rounded up) and clamped to the image.
PixelRect crop_rect(std::span<const ProjectedPoint> points, const Camera& cam, double margin = 0.05);

struct CaptionCandidate {
  int view_id = 0;
  std::string text;
  double s_clip = 0.0;
  double s_occ = 0.0;
  PixelRect crop;
  std::string image_ref;
};

enum class SelectionRule {
  kProduct,        // s_clip * s_occ, ties by s_occ then view id
  kLexicographic,  // s_clip, then s_occ, then view id
};

std::vector<CaptionCandidate> select_candidates(std::vector<CaptionCandidate> candidates, std::size_t k = 10,
                                                SelectionRule rule = SelectionRule::kProduct);

struct CaptionOptions {
  std::size_t top_k = 10;
  int zbuf_cell_px = 1;
  double crop_margin = 0.05;
  SelectionRule rule = SelectionRule::kProduct;

  void validate() const;
};

struct CaptionClients {
  const TextClient& captioner;
  const TextClient& scorer;
  const TextClient& summarizer;
};

/// Scene points grouped by instance plus one depth buffer per view. Holds a
/// reference to `scene`, which must outlive the context.
class CaptionContext {
 public:
  CaptionContext(const ScenePointCloud& scene, std::vector<Camera> cameras, const CaptionOptions& opts);

  const ScenePointCloud& scene() const { return scene_; }
  const std::vector<Camera>& cameras() const { return cameras_; }
  const CaptionOptions& options() const { return opts_; }
  const DepthBuffer& buffer(std::size_t view) const { return buffers_.at(view); }
  std::span<const Vec3> object_points(InstanceId id) const;

 private:
  const ScenePointCloud& scene_;
  std::vector<Camera> cameras_;
  CaptionOptions opts_;
  std::vector<DepthBuffer> buffers_;
  std::map<InstanceId, std::vector<Vec3>> by_instance_;
};

struct CaptionResult {
  InstanceId object_id = 0;
  std::string text;
  std::vector<CaptionCandidate> candidates;  // every scored view
  std::vector<CaptionCandidate> selected;
  std::vector<std::string> flags;
};

/// Captions every view that sees the object, scores each caption, keeps the
/// top-k and asks the summarizer for one description. Throws DataError when
/// no view sees the object and ClientError when no view could be captioned
/// or the summary fails.
CaptionResult caption_object(const CaptionContext& ctx, InstanceId id, const CaptionClients& clients);

}  // namespace sgf
