#include "sgf/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>

#include "sgf/error.hpp"
#include "sgf/seed.hpp"

namespace sgf {

void SyntheticOptions::validate() const {
  if (min_objects < 1 || max_objects < min_objects) throw ConfigError("synthetic: need 1 <= min_objects <= max_objects");
  if (!(points_per_m2 > 0)) throw ConfigError("synthetic: points_per_m2 must be > 0");
  if (max_points_per_box < min_points_per_box) throw ConfigError("synthetic: max_points_per_box < min_points_per_box");
  if (image_width <= 0 || image_height <= 0) throw ConfigError("synthetic: image size must be > 0");
}

namespace {

// Semantic ids are positions in this list.
const std::vector<std::string>& label_vocabulary() {
  static const std::vector<std::string> kLabels = {
      "floor", "wall",   "table",    "cup",   "lamp",   "chair",  "bed",     "nightstand", "pillow",
      "cabinet", "book", "counter", "sink",   "bin",    "umbrella", "sofa", "cushion", "plant",
      "desk",  "monitor", "painting", "tv",   "poster", "mirror", "clock",  "whiteboard"};
  return kLabels;
}

std::uint32_t semantic_id(const std::string& label) {
  const auto& v = label_vocabulary();
  const auto it = std::find(v.begin(), v.end(), label);
  return static_cast<std::uint32_t>(it == v.end() ? v.size() : it - v.begin());
}

/// Box in grid units.
struct IBox {
  std::string label;
  long x0, y0, z0, x1, y1, z1;

  IBox shifted(long dx, long dy) const { return {label, x0 + dx, y0 + dy, z0, x1 + dx, y1 + dy, z1}; }
};

long units(double meters) { return std::lround(meters / kSyntheticGrid); }

AABB to_aabb(const IBox& b) {
  const double g = kSyntheticGrid;
  return AABB({b.x0 * g, b.y0 * g, b.z0 * g}, {b.x1 * g, b.y1 * g, b.z1 * g});
}

constexpr long kFloorTop = 4;    // 0.0625 m
constexpr long kWallThick = 8;   // 0.125 m
constexpr long kWallTop = kFloorTop + 172;
constexpr long kMargin = 16;     // keep furniture 0.25 m off the walls
constexpr long kClearance = 6;   // between furniture groups

/// Box of size (sx, sy, sz) meters with its footprint corner at (x, y) units
/// and its bottom at z units.
IBox make(const std::string& label, long x, long y, long z, double sx, double sy, double sz) {
  return {label, x, y, z, x + units(sx), y + units(sy), z + units(sz)};
}

using Group = std::vector<IBox>;

Group dining(Rng& rng) {
  Group g;
  const double w = 1.0 + 0.125 * static_cast<double>(rng.below(4));
  IBox table = make("table", 0, 0, kFloorTop, w, 0.8125, 0.75);
  g.push_back(table);
  const std::size_t cups = 1 + rng.below(2);
  for (std::size_t i = 0; i < cups; ++i) {
    g.push_back(make("cup", table.x0 + 8 + static_cast<long>(i) * 24, table.y0 + 16, table.z1, 0.0625, 0.0625, 0.125));
  }
  if (rng.below(2) == 0) {
    const long cx = (table.x0 + table.x1) / 2;
    const long cy = (table.y0 + table.y1) / 2;
    g.push_back({"lamp", cx - 10, cy - 10, kFloorTop + 144, cx + 10, cy + 10, kFloorTop + 160});
  }
  return g;
}

Group chair_row(Rng& rng) {
  Group g;
  const long step = 40 + 4 * static_cast<long>(rng.below(3));
  for (long i = 0; i < 3; ++i) g.push_back(make("chair", i * step, 0, kFloorTop, 0.4375, 0.4375, 0.875));
  return g;
}

Group bedroom(Rng& rng) {
  Group g;
  const long ns = units(0.4375);
  const long gap = 4;
  IBox bed = make("bed", ns + gap, 0, kFloorTop, 1.5, 2.0, 0.5);
  g.push_back(bed);
  IBox left = make("nightstand", 0, bed.y1 - ns, kFloorTop, 0.4375, 0.4375, 0.5625);
  IBox right = make("nightstand", bed.x1 + gap, bed.y1 - ns, kFloorTop, 0.4375, 0.4375, 0.5625);
  g.push_back(left);
  g.push_back(right);
  g.push_back(make("pillow", bed.x0 + 16, bed.y1 - 28, bed.z1, 0.5, 0.3125, 0.125));
  if (rng.below(2) == 0) g.push_back(make("lamp", left.x0 + 8, left.y0 + 8, left.z1, 0.1875, 0.1875, 0.3125));
  return g;
}

Group storage(Rng& rng) {
  Group g;
  IBox cabinet = make("cabinet", 0, 0, kFloorTop, 0.8125, 0.5, 1.625);
  g.push_back(cabinet);
  g.push_back(make("book", cabinet.x0 + 8 + static_cast<long>(rng.below(16)), cabinet.y0 + 8, kFloorTop + 32,
                   0.1875, 0.125, 0.25));
  return g;
}

Group kitchen(Rng&) {
  Group g;
  IBox counter = make("counter", 0, 0, kFloorTop, 1.25, 0.625, 0.875);
  g.push_back(counter);
  g.push_back(make("sink", counter.x0 + 16, counter.y0 + 8, kFloorTop + 44, 0.5, 0.375, 0.25));
  return g;
}

Group bin_group(Rng&) {
  Group g;
  IBox bin = make("bin", 0, 0, kFloorTop, 0.375, 0.375, 0.5);
  g.push_back(bin);
  g.push_back(make("umbrella", bin.x0 + 10, bin.y0 + 10, kFloorTop + 4, 0.0625, 0.0625, 1.0));
  return g;
}

Group lounge(Rng& rng) {
  Group g;
  IBox sofa = make("sofa", 0, 0, kFloorTop, 2.0, 0.875, 0.8125);
  g.push_back(sofa);
  const std::size_t n = 1 + rng.below(2);
  for (std::size_t i = 0; i < n; ++i) {
    g.push_back(make("cushion", sofa.x0 + 16 + static_cast<long>(i) * 48, sofa.y0 + 8, sofa.z1, 0.4375, 0.1875, 0.375));
  }
  return g;
}

Group office(Rng&) {
  Group g;
  IBox desk = make("desk", 0, 0, kFloorTop, 1.25, 0.625, 0.75);
  g.push_back(desk);
  g.push_back(make("monitor", desk.x0 + 24, desk.y0 + 24, desk.z1, 0.5, 0.125, 0.375));
  return g;
}

Group plant(Rng&) { return {make("plant", 0, 0, kFloorTop, 0.375, 0.375, 1.0)}; }

struct GroupKind {
  const char* room;
  Group (*build)(Rng&);
};

const std::array<GroupKind, 9> kGroups = {{{"dining room", dining},
                                           {nullptr, chair_row},
                                           {"bedroom", bedroom},
                                           {nullptr, storage},
                                           {"kitchen", kitchen},
                                           {nullptr, bin_group},
                                           {"living room", lounge},
                                           {"office", office},
                                           {nullptr, plant}}};

struct Rect {
  long x0, y0, x1, y1;
  bool overlaps(const Rect& o, long clearance) const {
    return x0 < o.x1 + clearance && o.x0 < x1 + clearance && y0 < o.y1 + clearance && o.y0 < y1 + clearance;
  }
};

Rect footprint(const Group& g) {
  Rect r{g[0].x0, g[0].y0, g[0].x1, g[0].y1};
  for (const auto& b : g) {
    r.x0 = std::min(r.x0, b.x0);
    r.y0 = std::min(r.y0, b.y0);
    r.x1 = std::max(r.x1, b.x1);
    r.y1 = std::max(r.y1, b.y1);
  }
  return r;
}

void color_for(const std::string& label, Rng& rng, int& r, int& g, int& b) {
  const std::uint64_t h = fnv1a64(label);
  const auto channel = [&](int shift) {
    const int base = static_cast<int>((h >> shift) & 0xFF);
    return std::clamp(base + static_cast<int>(rng.below(21)) - 10, 0, 255);
  };
  r = channel(0);
  g = channel(8);
  b = channel(16);
}

double face_area(const AABB& b, int face) {
  const Vec3 s = b.size();
  return face < 2 ? s.y * s.z : face < 4 ? s.x * s.z : s.x * s.y;
}

double surface_area(const AABB& b) {
  double a = 0.0;
  for (int f = 0; f < 6; ++f) a += face_area(b, f);
  return a;
}

double coord(double lo, double hi, double grid, Rng& rng) {
  if (hi <= lo) return lo;
  if (grid > 0) {
    const auto steps = static_cast<std::size_t>(std::llround((hi - lo) / grid));
    return lo + static_cast<double>(rng.below(steps + 1)) * grid;
  }
  return lo + rng.uniform() * (hi - lo);
}

Vec3 surface_point(const AABB& b, double grid, Rng& rng) {
  const double total = surface_area(b);
  int face = 0;
  if (total > 0) {
    double pick = rng.uniform() * total;
    for (face = 0; face < 5; ++face) {
      pick -= face_area(b, face);
      if (pick < 0) break;
    }
  }
  const Vec3 lo = b.min();
  const Vec3 hi = b.max();
  Vec3 p{coord(lo.x, hi.x, grid, rng), coord(lo.y, hi.y, grid, rng), coord(lo.z, hi.z, grid, rng)};
  switch (face) {
    case 0: p.x = lo.x; break;
    case 1: p.x = hi.x; break;
    case 2: p.y = lo.y; break;
    case 3: p.y = hi.y; break;
    case 4: p.z = lo.z; break;
    default: p.z = hi.z; break;
  }
  return p;
}

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

Vec3 unit(const Vec3& v) { return v * (1.0 / v.norm()); }

}  // namespace

ScenePointCloud scene_from_boxes(std::string scene_id, const std::vector<SyntheticBox>& boxes, std::uint64_t seed,
                                 const SyntheticOptions& opts, double grid) {
  opts.validate();
  Rng rng(derive_seed(seed, {"points", scene_id}));
  ScenePointCloud scene;
  scene.scene_id = std::move(scene_id);
  scene.source_dataset = "synthetic";
  const auto emit = [&](InstanceId id, const Vec3& p) {
    PointRecord rec{p.x, p.y, p.z, 0, 0, 0, id, semantic_id(boxes[id].label)};
    color_for(boxes[id].label, rng, rec.r, rec.g, rec.b);
    scene.points.push_back(rec);
  };
  for (InstanceId id = 0; id < boxes.size(); ++id) {
    const AABB& b = boxes[id].box;
    scene.instances[id] = boxes[id].label;
    const Vec3 lo = b.min();
    const Vec3 hi = b.max();
    for (int c = 0; c < 8; ++c) emit(id, {c & 1 ? hi.x : lo.x, c & 2 ? hi.y : lo.y, c & 4 ? hi.z : lo.z});
    const auto n = std::clamp(static_cast<std::size_t>(surface_area(b) / 2.0 * opts.points_per_m2),
                              opts.min_points_per_box, opts.max_points_per_box);
    for (std::size_t i = 0; i < n; ++i) emit(id, surface_point(b, grid, rng));
  }
  if (opts.total_points > 0) {
    if (opts.total_points < scene.points.size()) {
      throw ConfigError("synthetic: total_points " + std::to_string(opts.total_points) + " is below the " +
                        std::to_string(scene.points.size()) + " base points");
    }
    std::vector<double> cumulative;
    double acc = 0.0;
    for (const auto& b : boxes) cumulative.push_back(acc += surface_area(b.box) + 1e-9);
    scene.points.reserve(opts.total_points);
    while (scene.points.size() < opts.total_points) {
      const double pick = rng.uniform() * acc;
      const auto id = static_cast<InstanceId>(
          std::min<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin(),
                                boxes.size() - 1));
      emit(id, surface_point(boxes[id].box, grid, rng));
    }
  }
  return scene;
}

Transform look_at(const Vec3& eye, const Vec3& target) {
  const Vec3 f = unit(target - eye);
  const Vec3 r = unit(cross(f, Vec3{0, 0, 1}));
  const Vec3 d = cross(f, r);
  Transform t = identity_transform();
  const Vec3 rows[3] = {r, d, f};
  for (int i = 0; i < 3; ++i) {
    t[i * 4 + 0] = rows[i].x;
    t[i * 4 + 1] = rows[i].y;
    t[i * 4 + 2] = rows[i].z;
    t[i * 4 + 3] = -(rows[i].x * eye.x + rows[i].y * eye.y + rows[i].z * eye.z);
  }
  return t;
}

std::vector<Camera> orbit_cameras(const AABB& room, std::size_t views, int width, int height,
                                  const std::string& image_prefix) {
  std::vector<Camera> out;
  const Vec3 c = room.center();
  const double radius = 0.35 * std::min(room.size().x, room.size().y);
  const Vec3 target{c.x, c.y, room.min().z + 0.75};
  for (std::size_t k = 0; k < views; ++k) {
    const double a = 2.0 * 3.14159265358979323846 * static_cast<double>(k) / static_cast<double>(views);
    const Vec3 eye{c.x + radius * std::cos(a), c.y + radius * std::sin(a), room.min().z + 1.5};
    Camera cam;
    cam.view_id = static_cast<int>(k);
    cam.width = width;
    cam.height = height;
    cam.fx = cam.fy = 0.625 * width;
    cam.cx = width / 2.0;
    cam.cy = height / 2.0;
    // Look across the room, through the center, at the far side.
    cam.extrinsics = look_at(eye, Vec3{2 * target.x - eye.x, 2 * target.y - eye.y, target.z});
    char name[32];
    std::snprintf(name, sizeof(name), "view_%02zu.jpg", k);
    cam.image_ref = image_prefix + name;
    out.push_back(cam);
  }
  return out;
}

SyntheticScene generate_scene(std::uint64_t seed, std::size_t index, const SyntheticOptions& opts) {
  opts.validate();
  Rng rng(derive_seed(seed, {"synthetic", std::to_string(index)}));
  char id[32];
  std::snprintf(id, sizeof(id), "synth_%04zu", index);

  const long width = 64 * 4 + 16 * static_cast<long>(rng.below(13));  // 4.0 .. 7.0 m
  const long depth = 64 * 4 + 16 * static_cast<long>(rng.below(9));  // 4.0 .. 6.0 m
  std::vector<IBox> boxes;
  boxes.push_back({"floor", 0, 0, 0, width, depth, kFloorTop});
  boxes.push_back({"wall", 0, depth - kWallThick, kFloorTop, width, depth, kWallTop});
  const bool left_wall = rng.below(2) == 0;
  if (left_wall) boxes.push_back({"wall", 0, 0, kFloorTop, kWallThick, depth - kWallThick, kWallTop});

  const std::size_t target = opts.min_objects + rng.below(opts.max_objects - opts.min_objects + 1);
  std::size_t objects = boxes.size() - 1;

  // Wall hangings on the back wall.
  static const std::array<std::pair<const char*, std::array<double, 3>>, 6> kHangings = {{
      {"painting", {0.875, 0.03125, 0.625}},
      {"tv", {1.0, 0.0625, 0.5625}},
      {"poster", {0.5, 0.03125, 0.75}},
      {"mirror", {0.5, 0.03125, 0.875}},
      {"clock", {0.3125, 0.0625, 0.3125}},
      {"whiteboard", {1.25, 0.03125, 0.75}},
  }};
  const std::size_t hangings = std::min<std::size_t>(1 + rng.below(2), target > objects ? target - objects : 0);
  long cursor = kWallThick + kMargin + 16 * static_cast<long>(rng.below(4));
  for (std::size_t i = 0; i < hangings; ++i) {
    const auto& [label, size] = kHangings[rng.below(kHangings.size())];
    const long w = units(size[0]);
    if (cursor + w > width - kMargin) break;
    const long y1 = depth - kWallThick - 2;
    const long z0 = kFloorTop + 64 + 8 * static_cast<long>(rng.below(5));
    boxes.push_back({label, cursor, y1 - units(size[1]), z0, cursor + w, y1, z0 + units(size[2])});
    cursor += w + 16 + 16 * static_cast<long>(rng.below(3));
    ++objects;
  }

  // Furniture groups, shuffled, placed by rejection sampling.
  std::vector<std::size_t> order(kGroups.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<Rect> placed;
  std::string room_type;
  const Rect free{(left_wall ? kWallThick : 0) + kMargin, kMargin, width - kMargin, depth - kWallThick - kMargin};
  for (std::size_t gi : order) {
    if (objects >= target) break;
    Group g = kGroups[gi].build(rng);
    if (objects + g.size() > opts.max_objects) continue;
    const Rect fp = footprint(g);
    const long gw = fp.x1 - fp.x0;
    const long gd = fp.y1 - fp.y0;
    if (gw > free.x1 - free.x0 || gd > free.y1 - free.y0) continue;
    for (int attempt = 0; attempt < 40; ++attempt) {
      const long x = free.x0 + static_cast<long>(rng.below(static_cast<std::size_t>(free.x1 - free.x0 - gw) + 1));
      const long y = free.y0 + static_cast<long>(rng.below(static_cast<std::size_t>(free.y1 - free.y0 - gd) + 1));
      const Rect r{x, y, x + gw, y + gd};
      if (std::any_of(placed.begin(), placed.end(), [&](const Rect& o) { return r.overlaps(o, kClearance); })) {
        continue;
      }
      placed.push_back(r);
      for (const auto& b : g) boxes.push_back(b.shifted(x - fp.x0, y - fp.y0));
      objects += g.size();
      if (room_type.empty() && kGroups[gi].room) room_type = kGroups[gi].room;
      break;
    }
  }
  // Top up small rooms with plants along the free area.
  for (int attempt = 0; objects < opts.min_objects && attempt < 400; ++attempt) {
    const Group g = plant(rng);
    const Rect fp = footprint(g);
    const long x = free.x0 + static_cast<long>(rng.below(static_cast<std::size_t>(free.x1 - free.x0 - fp.x1) + 1));
    const long y = free.y0 + static_cast<long>(rng.below(static_cast<std::size_t>(free.y1 - free.y0 - fp.y1) + 1));
    const Rect r{x, y, x + fp.x1, y + fp.y1};
    if (std::any_of(placed.begin(), placed.end(), [&](const Rect& o) { return r.overlaps(o, kClearance); })) continue;
    placed.push_back(r);
    boxes.push_back(g[0].shifted(x, y));
    ++objects;
  }

  SyntheticScene out;
  for (const auto& b : boxes) out.boxes.push_back({b.label, to_aabb(b)});
  out.scene = scene_from_boxes(id, out.boxes, seed, opts, kSyntheticGrid);
  out.scene.room_type = room_type.empty() ? std::optional<std::string>() : std::optional<std::string>(room_type);
  AABB room = out.boxes[0].box;
  room.extend(out.boxes[1].box);
  out.cameras = orbit_cameras(room, opts.views, opts.image_width, opts.image_height, std::string(id) + "/");
  return out;
}

}  // namespace sgf
