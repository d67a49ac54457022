#include "runconfig.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "png_io.hpp"

namespace matfit {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

RunConfig RunConfig::from_string(const std::string& text, const std::string& base_dir) {
  RunConfig cfg;
  cfg.dir_ = base_dir.empty() ? "." : base_dir;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) {
        fail(ErrorCode::kFormat, "config line " + std::to_string(lineno) + ": bad section header");
      }
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const size_t eq = t.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::kFormat,
           "config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      fail(ErrorCode::kFormat, "config line " + std::to_string(lineno) + ": empty key");
    }
    cfg.values_[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string dir = std::filesystem::path(path).parent_path().string();
  return from_string(buf.str(), dir.empty() ? "." : dir);
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string RunConfig::require(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorCode::kInvalidArgument, "config key '" + key + "' is required");
  return it->second;
}

namespace {

double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    fail(ErrorCode::kFormat, "config key '" + key + "': '" + v + "' is not a number");
  }
  return d;
}

}  // namespace

long RunConfig::get_long(const std::string& key, long fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key, "");
  char* end = nullptr;
  const long n = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    fail(ErrorCode::kFormat, "config key '" + key + "': '" + v + "' is not an integer");
  }
  return n;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  return parse_double(key, get(key, ""));
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key, "");
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  fail(ErrorCode::kFormat, "config key '" + key + "': '" + v + "' is not a boolean");
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key, "");
  char* end = nullptr;
  const unsigned long long n = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    fail(ErrorCode::kFormat, "config key '" + key + "': '" + v + "' is not an unsigned integer");
  }
  return n;
}

std::string RunConfig::resolve(const std::string& rel) const {
  const std::filesystem::path p(rel);
  if (p.is_absolute()) return rel;
  return (std::filesystem::path(dir_) / p).string();
}

std::string RunConfig::get_path(const std::string& key, const std::string& fallback) const {
  if (!has(key)) return fallback;
  return resolve(get(key, ""));
}

std::string RunConfig::require_path(const std::string& key) const {
  return resolve(require(key));
}

std::vector<std::string> RunConfig::edit_ops() const {
  std::vector<std::string> ops;
  for (int i = 0;; ++i) {
    const std::string key = "edit.op." + std::to_string(i);
    if (!has(key)) break;
    ops.push_back(get(key, ""));
  }
  return ops;
}

RenderConfig RunConfig::render_config() const {
  RenderConfig rc;
  rc.width = static_cast<int>(get_long("render.width", rc.width));
  rc.height = static_cast<int>(get_long("render.height", rc.height));
  rc.sphere_radius = get_double("render.sphere_radius", rc.sphere_radius);
  rc.validate();
  return rc;
}

Bounds RunConfig::bounds() const {
  const Bounds defaults = default_bounds();
  Bounds b = defaults;
  for (int i = 0; i < kParamCount; ++i) {
    const std::string key = std::string("bounds.") + param_name(i);
    if (!has(key)) continue;
    std::istringstream v(get(key, ""));
    double lo, hi;
    if (!(v >> lo >> hi)) {
      fail(ErrorCode::kFormat, "config key '" + key + "' must hold '<lo> <hi>'");
    }
    std::string rest;
    if (v >> rest) {
      fail(ErrorCode::kFormat, "config key '" + key + "' must hold exactly two numbers");
    }
    if (!(lo < hi) || lo < defaults.lower[i] || hi > defaults.upper[i]) {
      fail(ErrorCode::kInvalidArgument,
           "config key '" + key + "': bounds must narrow the defaults");
    }
    b.lower[i] = lo;
    b.upper[i] = hi;
  }
  return b;
}

void RunConfig::set(const std::string& key, const std::string& value) { values_[key] = value; }

std::string RunConfig::echo() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    out += k;
    out += " = ";
    out += v;
    out += "\n";
  }
  return out;
}

Image apply_edit_op(const Image& img, const std::string& op, const std::string& base_dir) {
  std::istringstream in(op);
  std::string name;
  in >> name;
  auto resolve = [&](const std::string& rel) {
    const std::filesystem::path p(rel);
    if (p.is_absolute()) return rel;
    return (std::filesystem::path(base_dir.empty() ? "." : base_dir) / p).string();
  };
  auto bad = [&](const std::string& why) -> Image {
    fail(ErrorCode::kInvalidArgument, "edit op '" + op + "': " + why);
  };
  auto done = [&](std::istringstream& s) {
    std::string extra;
    if (s >> extra) bad("trailing arguments");
  };

  if (name == "saturate") {
    double f;
    if (!(in >> f)) return bad("expected a factor");
    done(in);
    return saturate(img, f);
  }
  if (name == "grayscale") {
    done(in);
    return grayscale(img);
  }
  if (name == "colorize") {
    double tint[3], strength;
    if (!(in >> tint[0] >> tint[1] >> tint[2] >> strength)) {
      return bad("expected '<r> <g> <b> <strength>'");
    }
    done(in);
    return colorize(img, tint, strength);
  }
  if (name == "black_level") {
    double level;
    if (!(in >> level)) return bad("expected a level");
    done(in);
    return black_level(img, level);
  }
  if (name == "blur") {
    double sigma;
    if (!(in >> sigma)) return bad("expected a sigma");
    std::string word;
    if (in >> word) {
      if (word != "mask") return bad("expected 'mask <png>'");
      std::string path;
      if (!(in >> path)) return bad("expected a mask path");
      done(in);
      const Image mask = load_png(resolve(path));
      return gaussian_blur(img, sigma, &mask);
    }
    return gaussian_blur(img, sigma);
  }
  if (name == "mix") {
    double alpha;
    std::string path;
    if (!(in >> alpha >> path)) return bad("expected '<alpha> <png>'");
    done(in);
    return mix_images(img, load_png(resolve(path)), alpha);
  }
  if (name == "stitch") {
    int x0, y0;
    std::string path;
    if (!(in >> x0 >> y0 >> path)) return bad("expected '<x0> <y0> <png>'");
    done(in);
    const Image patch = load_png(resolve(path));
    return stitch(img, patch, RectRegion{x0, y0, patch.width, patch.height});
  }
  if (name == "resize") {
    int w, h;
    if (!(in >> w >> h)) return bad("expected '<w> <h>'");
    done(in);
    return box_resample(img, w, h);
  }
  return bad("unknown operation");
}

}  // namespace matfit
