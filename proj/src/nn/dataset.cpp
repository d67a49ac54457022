#include "nn/dataset.hpp"

#include <bit>
#include <cstdio>
#include <memory>

#include "error.hpp"
#include "json.hpp"
#include "rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

namespace matfit::nn {

Eigen::VectorXf image_to_input(const Image& img) {
  Eigen::VectorXf v(3 * img.width * img.height);
  const int hw = img.width * img.height;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        v[c * hw + y * img.width + x] =
            static_cast<float>(img.at(x, y, c) / 255.0);
      }
    }
  }
  return v;
}

Dataset gen_dataset(int count, uint64_t seed, const Bounds& bounds,
                    const RenderConfig& render_cfg, int net_input_side) {
  if (count < 1) fail(ErrorCode::kInvalidArgument, "gen_dataset: count must be >= 1");
  if (net_input_side < 1) fail(ErrorCode::kInvalidArgument, "gen_dataset: bad input side");
  render_cfg.validate();

  Dataset ds;
  ds.seed = seed;
  ds.input_side = net_input_side;
  ds.render_cfg = render_cfg;
  ds.bounds = bounds;
  ds.params.resize(kParamCount, count);
  ds.images.resize(3 * net_input_side * net_input_side, count);

  Rng rng(seed);
  for (int s = 0; s < count; ++s) {
    ParamVector x;
    for (int i = 0; i < kParamCount; ++i) {
      x[i] = rng.uniform(bounds.lower[i], bounds.upper[i]);
    }
    const ParamVector u = normalize(x, bounds);
    for (int i = 0; i < kParamCount; ++i) ds.params(i, s) = static_cast<float>(u[i]);
    const Image small = box_resample(render(x, render_cfg), net_input_side, net_input_side);
    ds.images.col(s) = image_to_input(small);
  }
  return ds;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_exact(std::FILE* f, const void* data, size_t bytes, const std::string& path) {
  if (std::fwrite(data, 1, bytes, f) != bytes) {
    fail(ErrorCode::kIo, "short write to '" + path + "'");
  }
}

void read_exact(std::FILE* f, void* data, size_t bytes, const std::string& what) {
  if (std::fread(data, 1, bytes, f) != bytes) {
    fail(ErrorCode::kFormat, "truncated dataset file: " + what);
  }
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
  nlohmann::json hdr;
  hdr["format"] = "MFDS1";
  hdr["seed"] = ds.seed;
  hdr["count"] = ds.count();
  hdr["input_side"] = ds.input_side;
  hdr["render"] = {{"width", ds.render_cfg.width},
                   {"height", ds.render_cfg.height},
                   {"sphere_radius", ds.render_cfg.sphere_radius}};
  hdr["bounds"] = {{"lower", ds.bounds.lower}, {"upper", ds.bounds.upper}};
  const std::string doc = hdr.dump();

  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  write_exact(f.get(), "MFDS1", 5, path);
  const uint32_t len = static_cast<uint32_t>(doc.size());
  write_exact(f.get(), &len, sizeof(len), path);
  write_exact(f.get(), doc.data(), doc.size(), path);
  write_exact(f.get(), ds.params.data(), sizeof(float) * ds.params.size(), path);
  write_exact(f.get(), ds.images.data(), sizeof(float) * ds.images.size(), path);
}

Dataset load_dataset(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) fail(ErrorCode::kIo, "cannot open dataset '" + path + "'");

  char magic[5];
  read_exact(f.get(), magic, 5, "magic");
  if (std::string(magic, 5) != "MFDS1") {
    fail(ErrorCode::kFormat, "'" + path + "' is not an MFDS1 dataset");
  }
  uint32_t len = 0;
  read_exact(f.get(), &len, sizeof(len), "header length");
  std::string doc(len, '\0');
  read_exact(f.get(), doc.data(), len, "header");

  nlohmann::json hdr;
  try {
    hdr = nlohmann::json::parse(doc);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, "bad dataset header: " + std::string(e.what()));
  }

  Dataset ds;
  try {
    ds.seed = hdr.at("seed").get<uint64_t>();
    ds.input_side = hdr.at("input_side").get<int>();
    ds.render_cfg.width = hdr.at("render").at("width").get<int>();
    ds.render_cfg.height = hdr.at("render").at("height").get<int>();
    ds.render_cfg.sphere_radius = hdr.at("render").at("sphere_radius").get<double>();
    const auto lower = hdr.at("bounds").at("lower").get<std::vector<double>>();
    const auto upper = hdr.at("bounds").at("upper").get<std::vector<double>>();
    if (lower.size() != kParamCount || upper.size() != kParamCount) {
      fail(ErrorCode::kFormat, "dataset bounds have wrong arity");
    }
    std::copy(lower.begin(), lower.end(), ds.bounds.lower.begin());
    std::copy(upper.begin(), upper.end(), ds.bounds.upper.begin());
    const int count = hdr.at("count").get<int>();
    if (count < 1 || ds.input_side < 1) fail(ErrorCode::kFormat, "bad dataset header fields");
    ds.params.resize(kParamCount, count);
    ds.images.resize(3 * ds.input_side * ds.input_side, count);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, "bad dataset header: " + std::string(e.what()));
  }

  read_exact(f.get(), ds.params.data(), sizeof(float) * ds.params.size(), "parameter block");
  read_exact(f.get(), ds.images.data(), sizeof(float) * ds.images.size(), "image block");
  return ds;
}

}  // namespace matfit::nn
