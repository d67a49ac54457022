#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "image.hpp"
#include "params.hpp"
#include "render.hpp"

namespace matfit {

// Plain-text sectioned key-value run configuration:
//
//   # comment
//   [section]
//   key = value
//
// Keys address as "section.key", later duplicates win, and every relative
// path resolves against the directory holding the config file. Values keep
// interior whitespace (edit ops are whole lines); '#' outside the first
// position is NOT a comment so fragment-free paths stay intact.
class RunConfig {
 public:
  static RunConfig load(const std::string& path);
  static RunConfig from_string(const std::string& text, const std::string& base_dir);

  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  long get_long(const std::string& key, long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  // Path-valued keys, resolved against the config directory. The *_path
  // fallback is returned unresolved when the key is missing and empty.
  std::string get_path(const std::string& key, const std::string& fallback) const;
  std::string require_path(const std::string& key) const;
  std::string resolve(const std::string& rel) const;
  const std::string& dir() const { return dir_; }

  // Ordered edit script: edit.op.0, edit.op.1, ... until the first gap.
  std::vector<std::string> edit_ops() const;

  RenderConfig render_config() const;  // [render] width/height/sphere_radius
  Bounds bounds() const;               // defaults narrowed by [bounds] lines "name = lo hi"

  void set(const std::string& key, const std::string& value);  // CLI overrides
  std::string echo() const;  // sorted "key = value" lines, for output-dir echoes

 private:
  std::map<std::string, std::string> values_;
  std::string dir_;
};

// Applies one edit-script operation. Grammar (paths resolve via base_dir):
//   saturate <factor>
//   grayscale
//   colorize <r> <g> <b> <strength>     (tint components in 0..1)
//   black_level <level>
//   blur <sigma> [mask <png>]
//   mix <alpha> <png>
//   stitch <x0> <y0> <png>
//   resize <w> <h>
Image apply_edit_op(const Image& img, const std::string& op, const std::string& base_dir);

}  // namespace matfit
