#include "sgf/caption_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "sgf/error.hpp"
#include "sgf/io.hpp"
#include "sgf/langgen.hpp"

namespace sgf {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void Camera::validate() const {
  const std::string who = "camera view " + std::to_string(view_id);
  if (!(fx > 0) || !(fy > 0)) throw ConfigError(who + ": focal lengths must be > 0");
  if (width <= 0 || height <= 0) throw ConfigError(who + ": image size must be > 0");
  for (double v : extrinsics) {
    if (!std::isfinite(v)) throw ConfigError(who + ": extrinsics must be finite");
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double dot = 0.0;
      for (int k = 0; k < 3; ++k) dot += extrinsics[i * 4 + k] * extrinsics[j * 4 + k];
      if (std::abs(dot - (i == j ? 1.0 : 0.0)) > 1e-6) throw ConfigError(who + ": rotation is not orthonormal");
    }
  }
  if (linear_determinant(extrinsics) < 0) throw ConfigError(who + ": rotation has determinant -1");
  if (extrinsics[12] != 0 || extrinsics[13] != 0 || extrinsics[14] != 0 || extrinsics[15] != 1) {
    throw ConfigError(who + ": last extrinsics row must be 0 0 0 1");
  }
}

std::vector<Camera> cameras_from_json(std::string_view text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": JSON parse error at byte " + std::to_string(e.byte));
  }
  if (!doc.is_array()) throw ConfigError(origin + ": cameras must be a JSON array");
  std::vector<Camera> out;
  try {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const json& c = doc[i];
      Camera cam;
      cam.view_id = c.value("view_id", static_cast<int>(i));
      cam.fx = c.at("fx").get<double>();
      cam.fy = c.at("fy").get<double>();
      cam.cx = c.at("cx").get<double>();
      cam.cy = c.at("cy").get<double>();
      cam.width = c.at("width").get<int>();
      cam.height = c.at("height").get<int>();
      const auto& e = c.at("extrinsics");
      if (!e.is_array() || e.size() != 16) throw ConfigError(origin + ": extrinsics must have 16 numbers");
      for (std::size_t i = 0; i < 16; ++i) cam.extrinsics[i] = e[i].get<double>();
      cam.image_ref = c.value("image", std::string{});
      cam.validate();
      out.push_back(std::move(cam));
    }
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": malformed camera: " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return out;
}

std::string cameras_to_json(const std::vector<Camera>& cameras) {
  ordered_json doc = ordered_json::array();
  for (const auto& c : cameras) {
    ordered_json j;
    j["view_id"] = c.view_id;
    j["fx"] = c.fx;
    j["fy"] = c.fy;
    j["cx"] = c.cx;
    j["cy"] = c.cy;
    j["width"] = c.width;
    j["height"] = c.height;
    j["extrinsics"] = c.extrinsics;
    j["image"] = c.image_ref;
    doc.push_back(std::move(j));
  }
  return doc.dump(1) + "\n";
}

std::vector<Camera> load_cameras(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError(path.string() + ": camera file not found");
  return cameras_from_json(io::read_file(path), path.string());
}

std::vector<Camera> transform_cameras(const std::vector<Camera>& cameras, const Transform& t) {
  const Transform inv = invert_rigid(t);
  std::vector<Camera> out = cameras;
  for (auto& c : out) c.extrinsics = compose(c.extrinsics, inv);
  return out;
}

std::vector<ProjectedPoint> project_points(std::span<const Vec3> points, const Camera& cam) {
  std::vector<ProjectedPoint> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3 pc = transform_point(cam.extrinsics, points[i]);
    if (!(pc.z > 0.0)) continue;
    const double u = cam.fx * pc.x / pc.z + cam.cx;
    const double v = cam.fy * pc.y / pc.z + cam.cy;
    if (!(u >= 0.0 && u < cam.width && v >= 0.0 && v < cam.height)) continue;
    out.push_back({i, u, v, pc.z});
  }
  return out;
}

DepthBuffer::DepthBuffer(const Camera& cam, std::span<const Vec3> scene_points, int cell_px)
    : cell_px_(cell_px),
      cols_((cam.width + cell_px - 1) / cell_px),
      rows_((cam.height + cell_px - 1) / cell_px),
      depth_(static_cast<std::size_t>(cols_) * rows_, std::numeric_limits<double>::infinity()) {
  if (cell_px < 1) throw ConfigError("depth buffer cell size must be >= 1 pixel");
  for (const auto& p : project_points(scene_points, cam)) {
    double& d = depth_[static_cast<std::size_t>(static_cast<int>(p.v) / cell_px_) * cols_ +
                       static_cast<int>(p.u) / cell_px_];
    d = std::min(d, p.depth);
  }
}

double DepthBuffer::at(double u, double v) const {
  const int c = static_cast<int>(u) / cell_px_;
  const int r = static_cast<int>(v) / cell_px_;
  if (u < 0 || v < 0 || c >= cols_ || r >= rows_) return std::numeric_limits<double>::infinity();
  return depth_[static_cast<std::size_t>(r) * cols_ + c];
}

std::vector<ProjectedPoint> visible_points(std::span<const Vec3> object_points, const Camera& cam,
                                           const DepthBuffer& buffer) {
  std::vector<ProjectedPoint> out = project_points(object_points, cam);
  std::erase_if(out, [&](const ProjectedPoint& p) { return !buffer.visible(p); });
  return out;
}

double occlusion_score(std::size_t object_points, std::size_t visible) {
  if (object_points == 0) return 0.0;
  return static_cast<double>(visible) / static_cast<double>(object_points);
}

PixelRect crop_rect(std::span<const ProjectedPoint> points, const Camera& cam, double margin) {
  if (points.empty()) throw std::invalid_argument("crop of an empty point set");
  double umin = points[0].u, umax = points[0].u, vmin = points[0].v, vmax = points[0].v;
  for (const auto& p : points) {
    umin = std::min(umin, p.u);
    umax = std::max(umax, p.u);
    vmin = std::min(vmin, p.v);
    vmax = std::max(vmax, p.v);
  }
  PixelRect r{static_cast<int>(std::floor(umin)), static_cast<int>(std::floor(vmin)),
              static_cast<int>(std::floor(umax)), static_cast<int>(std::floor(vmax))};
  const int pad_x = static_cast<int>(std::ceil(margin * r.width()));
  const int pad_y = static_cast<int>(std::ceil(margin * r.height()));
  r.x0 = std::max(0, r.x0 - pad_x);
  r.y0 = std::max(0, r.y0 - pad_y);
  r.x1 = std::min(cam.width - 1, r.x1 + pad_x);
  r.y1 = std::min(cam.height - 1, r.y1 + pad_y);
  return r;
}

std::vector<CaptionCandidate> select_candidates(std::vector<CaptionCandidate> candidates, std::size_t k,
                                                SelectionRule rule) {
  const auto by_product = [](const CaptionCandidate& a, const CaptionCandidate& b) {
    const double pa = a.s_clip * a.s_occ;
    const double pb = b.s_clip * b.s_occ;
    if (pa != pb) return pa > pb;
    if (a.s_occ != b.s_occ) return a.s_occ > b.s_occ;
    return a.view_id < b.view_id;
  };
  const auto by_lex = [](const CaptionCandidate& a, const CaptionCandidate& b) {
    if (a.s_clip != b.s_clip) return a.s_clip > b.s_clip;
    if (a.s_occ != b.s_occ) return a.s_occ > b.s_occ;
    return a.view_id < b.view_id;
  };
  if (rule == SelectionRule::kProduct) {
    std::sort(candidates.begin(), candidates.end(), by_product);
  } else {
    std::sort(candidates.begin(), candidates.end(), by_lex);
  }
  if (candidates.size() > k) candidates.resize(k);
  return candidates;
}

void CaptionOptions::validate() const {
  if (top_k < 1) throw ConfigError("caption.top_k must be >= 1");
  if (zbuf_cell_px < 1) throw ConfigError("caption.zbuf_cell_px must be >= 1");
  if (!(crop_margin >= 0.0)) throw ConfigError("caption.crop_margin must be >= 0");
}

CaptionContext::CaptionContext(const ScenePointCloud& scene, std::vector<Camera> cameras,
                               const CaptionOptions& opts)
    : scene_(scene), cameras_(std::move(cameras)), opts_(opts) {
  opts_.validate();
  std::vector<Vec3> all;
  all.reserve(scene.points.size());
  for (const auto& p : scene.points) {
    all.push_back(p.position());
    by_instance_[p.instance_id].push_back(p.position());
  }
  buffers_.reserve(cameras_.size());
  for (const auto& cam : cameras_) buffers_.emplace_back(cam, all, opts_.zbuf_cell_px);
}

std::span<const Vec3> CaptionContext::object_points(InstanceId id) const {
  const auto it = by_instance_.find(id);
  if (it == by_instance_.end()) return {};
  return it->second;
}

namespace {

json crop_json(const PixelRect& r) { return json::array({r.x0, r.y0, r.x1, r.y1}); }

}  // namespace

CaptionResult caption_object(const CaptionContext& ctx, InstanceId id, const CaptionClients& clients) {
  const auto label_it = ctx.scene().instances.find(id);
  if (label_it == ctx.scene().instances.end()) {
    throw DataError("scene " + ctx.scene().scene_id + ": unknown instance " + std::to_string(id));
  }
  const std::string& label = label_it->second;
  const auto points = ctx.object_points(id);

  CaptionResult result;
  result.object_id = id;
  std::size_t seen_in = 0;
  for (std::size_t v = 0; v < ctx.cameras().size(); ++v) {
    const Camera& cam = ctx.cameras()[v];
    const auto vis = visible_points(points, cam, ctx.buffer(v));
    const double s_occ = occlusion_score(points.size(), vis.size());
    if (s_occ == 0.0) continue;
    ++seen_in;
    CaptionCandidate c;
    c.view_id = cam.view_id;
    c.s_occ = s_occ;
    c.crop = crop_rect(vis, cam, ctx.options().crop_margin);
    c.image_ref = cam.image_ref;
    try {
      c.text = response_text(clients.captioner.call(json{{"task", "caption"},
                                                         {"image", cam.image_ref},
                                                         {"crop", crop_json(c.crop)},
                                                         {"view_id", cam.view_id},
                                                         {"object_label", label}}));
      const json scored = clients.scorer.call(
          json{{"task", "score"}, {"image", cam.image_ref}, {"crop", crop_json(c.crop)}, {"text", c.text}});
      if (!scored.contains("score") || !scored["score"].is_number()) throw ClientError("scorer reply lacks 'score'");
      c.s_clip = scored["score"].get<double>();
      if (!(c.s_clip >= 0.0 && c.s_clip <= 1.0)) throw ClientError("scorer reply outside [0, 1]");
    } catch (const ClientError&) {
      result.flags.push_back("view-" + std::to_string(cam.view_id) + "-client-failed");
      continue;
    }
    result.candidates.push_back(std::move(c));
  }
  if (seen_in == 0) {
    throw DataError("scene " + ctx.scene().scene_id + ": object " + std::to_string(id) + " (" + label +
                    ") never visible");
  }
  if (result.candidates.empty()) {
    throw ClientError("scene " + ctx.scene().scene_id + ": object " + std::to_string(id) +
                      ": every view failed to caption");
  }
  result.selected = select_candidates(result.candidates, ctx.options().top_k, ctx.options().rule);

  json texts = json::array();
  std::string joined;
  for (const auto& c : result.selected) {
    texts.push_back(c.text);
    if (!joined.empty()) joined += ' ';
    joined += c.text;
  }
  RephraseRequest req;
  req.kind = RephraseKind::kCaptionSummary;
  req.text = joined;
  req.target_label = label;
  result.text = response_text(clients.summarizer.call(
      json{{"task", "summarize"},
           {"kind", "caption-summary"},
           {"prompt", render_prompt(req)},
           {"text", joined},
           {"target", label},
           {"texts", texts}}));
  if (result.text.empty()) throw ClientError("summarizer returned an empty text");
  return result;
}

}  // namespace sgf
