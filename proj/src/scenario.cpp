#include "surfcov/scenario.hpp"

#include "surfcov/errors.hpp"
#include "surfcov/explorers.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace surfcov {

using nlohmann::json;

void ExplorerParams::validate() const {
  if (!(d_max > 0) || !(sigma >= 0) || !(delta_check > 0)) {
    throw ValidationError("d_max and delta_check must be positive, sigma non-negative");
  }
  if (!(exterior_bias > 0 && exterior_bias < 1)) {
    throw ValidationError("exterior_bias must lie in (0, 1)");
  }
  if (!(time_limit_s >= 0)) throw ValidationError("time limit must be non-negative");
}

namespace {

// Field access with diagnostics naming the full path of the offending field.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

  Reader at(const char* key) const {
    if (!j_.is_object()) throw ParseError(path_ + ": expected an object");
    if (!j_.contains(key)) throw ParseError("missing required field '" + sub(key) + "'");
    return {j_.at(key), sub(key)};
  }

  Reader index(std::size_t i) const { return {j_.at(i), path_ + "[" + std::to_string(i) + "]"}; }

  std::size_t size() const {
    if (!j_.is_array()) throw ParseError(path_ + ": expected an array");
    return j_.size();
  }

  double number() const {
    if (!j_.is_number()) throw ParseError(path_ + ": expected a number");
    return j_.get<double>();
  }

  std::int64_t integer() const {
    if (!j_.is_number_integer()) throw ParseError(path_ + ": expected an integer");
    return j_.get<std::int64_t>();
  }

  std::string string() const {
    if (!j_.is_string()) throw ParseError(path_ + ": expected a string");
    return j_.get<std::string>();
  }

  Vec3 vec3() const {
    if (size() != 3) throw ParseError(path_ + ": expected 3 numbers");
    return {index(0).number(), index(1).number(), index(2).number()};
  }

  VecX vector() const {
    VecX v(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) v[static_cast<Eigen::Index>(i)] = index(i).number();
    return v;
  }

  double number_or(const char* key, double fallback) const {
    return has(key) ? at(key).number() : fallback;
  }

  const std::string& path() const { return path_; }

 private:
  std::string sub(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
};

Domain read_domain(const Reader& r) {
  const Reader d = r.at("domain");
  if (d.size() != 4) throw ParseError(d.path() + ": expected [u_min, u_max, v_min, v_max]");
  return {d.index(0).number(), d.index(1).number(), d.index(2).number(), d.index(3).number()};
}

Surface read_surface(const Reader& r) {
  const std::string type = r.at("type").string();
  if (type == "plane") {
    return Surface::plane(r.at("origin").vec3(), r.at("span_u").vec3(), r.at("span_v").vec3(),
                          read_domain(r));
  }
  const Vec3 origin = r.has("origin") ? r.at("origin").vec3() : Vec3::Zero();
  if (type == "paraboloid") {
    return Surface::paraboloid(origin, r.at("a").number(), r.at("b").number(), read_domain(r));
  }
  if (type == "sinusoid") {
    return Surface::sinusoid(origin, r.at("amplitude").number(), r.at("frequency").number(),
                             read_domain(r));
  }
  if (type == "bezier_patch") {
    const Reader c = r.at("control");
    std::vector<std::vector<Vec3>> grid(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      const Reader row = c.index(i);
      for (std::size_t k = 0; k < row.size(); ++k) grid[i].push_back(row.index(k).vec3());
    }
    const Domain dom = r.has("domain") ? read_domain(r) : Domain{0, 1, 0, 1};
    return Surface::bezier_patch(std::move(grid), dom);
  }
  throw ParseError(r.path() + ".type: unknown surface type '" + type + "'");
}

RobotModel read_robot(const Reader& r) {
  if (r.has("builtin")) return builtin_robot(r.at("builtin").string());
  const std::string name = r.has("name") ? r.at("name").string() : "custom";
  const Reader js = r.at("joints");
  std::vector<Joint> joints;
  std::vector<JointLimits> limits;
  std::vector<std::vector<LinkCapsule>> links;
  for (std::size_t i = 0; i < js.size(); ++i) {
    const Reader j = js.index(i);
    Joint joint;
    const std::string type = j.at("type").string();
    if (type == "revolute") {
      joint.kind = JointKind::Revolute;
    } else if (type == "prismatic") {
      joint.kind = JointKind::Prismatic;
    } else {
      throw ParseError(j.path() + ".type: expected revolute or prismatic");
    }
    joint.axis = j.at("axis").vec3();
    joint.origin = make_transform(j.has("xyz") ? j.at("xyz").vec3() : Vec3::Zero(),
                                  j.has("rpy") ? j.at("rpy").vec3() : Vec3::Zero());
    const Reader lim = j.at("limits");
    if (lim.size() != 2) throw ParseError(lim.path() + ": expected [lo, hi]");
    limits.push_back({lim.index(0).number(), lim.index(1).number()});
    std::vector<LinkCapsule> caps;
    if (j.has("capsules")) {
      const Reader cs = j.at("capsules");
      for (std::size_t k = 0; k < cs.size(); ++k) {
        const Reader c = cs.index(k);
        caps.push_back({c.at("p0").vec3(), c.at("p1").vec3(), c.at("radius").number()});
      }
    }
    joints.push_back(joint);
    links.push_back(std::move(caps));
  }
  Transform tool = Transform::Identity();
  if (r.has("tool")) {
    const Reader t = r.at("tool");
    tool = make_transform(t.has("xyz") ? t.at("xyz").vec3() : Vec3::Zero(),
                          t.has("rpy") ? t.at("rpy").vec3() : Vec3::Zero());
  }
  return RobotModel(name, std::move(joints), tool, std::move(limits), std::move(links));
}

// Maze bitmap: (2R+1) strings of length (2C+1). '#' at (even row, odd col) is a wall along x,
// at (odd row, even col) a wall along y, at (odd, odd) a solid cell; posts are ignored.
// Row r maps to y = origin.y + r/2 * cell.
void expand_maze(const Reader& m, std::vector<Primitive>& out) {
  const Vec3 origin = m.at("origin").vec3();
  const double cell = m.at("cell").number();
  const double t = m.at("wall_thickness").number();
  const double h = m.at("wall_height").number();
  if (!(cell > 0 && t > 0 && h > 0)) {
    throw ValidationError(m.path() + ": cell, wall_thickness and wall_height must be positive");
  }
  const Reader rows = m.at("rows");
  std::size_t width = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string line = rows.index(r).string();
    if (r == 0) width = line.size();
    if (line.size() != width) throw ParseError(rows.path() + ": rows must have equal length");
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (line[c] == ' ' || line[c] == '.') continue;
      if (line[c] != '#') throw ParseError(rows.path() + ": only '#', ' ' and '.' are allowed");
      const bool re = r % 2 == 0, ce = c % 2 == 0;
      const double x = origin.x() + static_cast<double>(c) * 0.5 * cell;
      const double y = origin.y() + static_cast<double>(r) * 0.5 * cell;
      const double z = origin.z() + 0.5 * h;
      if (re && !ce) {
        out.push_back(Box{{x, y, z}, {0.5 * cell + 0.5 * t, 0.5 * t, 0.5 * h}});
      } else if (!re && ce) {
        out.push_back(Box{{x, y, z}, {0.5 * t, 0.5 * cell + 0.5 * t, 0.5 * h}});
      } else if (!re && !ce) {
        out.push_back(Box{{x, y, z}, {0.5 * cell, 0.5 * cell, 0.5 * h}});
      }
    }
  }
}

CollisionWorld read_world(const Reader& r) {
  std::vector<Primitive> obstacles;
  if (r.has("obstacles")) {
    const Reader os = r.at("obstacles");
    for (std::size_t i = 0; i < os.size(); ++i) {
      const Reader o = os.index(i);
      const std::string type = o.at("type").string();
      if (type == "sphere") {
        obstacles.push_back(Sphere{o.at("center").vec3(), o.at("radius").number()});
      } else if (type == "capsule") {
        obstacles.push_back(Capsule{o.at("p0").vec3(), o.at("p1").vec3(), o.at("radius").number()});
      } else if (type == "box") {
        obstacles.push_back(Box{o.at("center").vec3(), o.at("half_extents").vec3()});
      } else {
        throw ParseError(o.path() + ".type: unknown obstacle type '" + type + "'");
      }
    }
  }
  if (r.has("maze")) expand_maze(r.at("maze"), obstacles);
  return CollisionWorld(std::move(obstacles), r.number_or("margin", 0.0));
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  const auto end = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(end), '\n'));
}

}  // namespace

std::unique_ptr<Scenario> parse_scenario_text(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ":" + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  const Reader root(doc, "");
  try {
    auto robot = std::make_shared<const RobotModel>(read_robot(root.at("robot")));
    auto surface = std::make_shared<const Surface>(read_surface(root.at("surface")));
    ProjectionSettings proj;
    if (root.has("projection")) {
      const Reader p = root.at("projection");
      proj.tolerance = p.number_or("tolerance", proj.tolerance);
      if (p.has("max_iterations")) proj.max_iterations = static_cast<int>(p.at("max_iterations").integer());
    }
    auto sc = std::make_unique<Scenario>(Scenario{
        .name = root.has("name") ? root.at("name").string() : source,
        .system = ConstraintSystem(robot, surface, proj),
        .world = root.has("world") ? read_world(root.at("world")) : CollisionWorld(),
        .q0 = root.at("q0").vector(),
    });
    if (sc->q0.size() != robot->dof()) {
      throw ValidationError("q0 has " + std::to_string(sc->q0.size()) + " entries, robot has " +
                            std::to_string(robot->dof()) + " joints");
    }
    if (root.has("params")) {
      const Reader p = root.at("params");
      auto& d = sc->defaults;
      d.d_max = p.number_or("d_max", d.d_max);
      d.sigma = p.number_or("sigma", d.sigma);
      d.delta_check = p.number_or("delta_check", d.delta_check);
      d.exterior_bias = p.number_or("exterior_bias", d.exterior_bias);
      d.time_limit_s = p.number_or("time_limit", d.time_limit_s);
      if (p.has("samples")) d.max_samples = static_cast<std::uint64_t>(p.at("samples").integer());
      d.validate();
    }
    if (root.has("atlas")) {
      const Reader a = root.at("atlas");
      auto& ap = sc->atlas;
      ap.rho = a.number_or("rho", ap.rho);
      ap.epsilon = a.number_or("epsilon", ap.epsilon);
      ap.alpha = a.number_or("alpha", ap.alpha);
      ap.geodesic_step = a.number_or("geodesic_step", ap.geodesic_step);
      ap.sample_radius_factor = a.number_or("sample_radius_factor", ap.sample_radius_factor);
    }
    if (root.has("n_grid")) sc->n_grid = static_cast<int>(root.at("n_grid").integer());
    if (sc->n_grid < 1) throw ValidationError("n_grid must be positive");
    if (surface->min_normal_norm() <= 1e-9) {
      throw ValidationError("surface parametrization is degenerate on its domain");
    }
    try {
      (void)init_root(sc->system, sc->world, sc->q0);
    } catch (const InitializationError& e) {
      throw ValidationError(source + ": start configuration is unusable: " + e.what());
    }
    return sc;
  } catch (const json::exception& e) {
    throw ParseError(source + ": " + e.what());
  }
}

std::unique_ptr<Scenario> parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str(), path.string());
}

}  // namespace surfcov
