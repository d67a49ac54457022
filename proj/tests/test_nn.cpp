#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "nn/arch.hpp"
#include "nn/dataset.hpp"
#include "nn/network.hpp"
#include "nn/serialize.hpp"
#include "nn/train.hpp"
#include "rng.hpp"

using namespace matfit;
using namespace matfit::nn;

namespace {

Eigen::VectorXf random_vec(int n, Rng& rng) {
  Eigen::VectorXf v(n);
  for (int i = 0; i < n; ++i) v[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
  return v;
}

Eigen::VectorXd random_vecd(int n, Rng& rng) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
  return v;
}

}  // namespace

TEST_CASE("architecture shape chaining") {
  ArchDescriptor shallow = encoder_arch(2);
  // 32 -> conv 30 -> pool 15 -> conv 13 -> pool 6; flatten 6*6*32.
  bool saw_flatten = false;
  for (size_t i = 0; i < shallow.layers.size(); ++i) {
    if (shallow.layers[i].kind == LayerKind::kFlatten) {
      CHECK(shallow.shapes[i].size() == 6 * 6 * 32);
      saw_flatten = true;
    }
  }
  CHECK(saw_flatten);
  CHECK(shallow.output_size() == 19);

  ArchDescriptor deep = encoder_arch(1);
  // 32 -> 30 -> 15 -> 13 -> 6 -> 4 -> 2; flatten 2*2*128.
  for (size_t i = 0; i < deep.layers.size(); ++i) {
    if (deep.layers[i].kind == LayerKind::kFlatten) {
      CHECK(deep.shapes[i].size() == 2 * 2 * 128);
    }
  }
  CHECK(deep.output_size() == 19);

  ArchDescriptor dec = decoder_arch();
  CHECK(dec.output_size() == 3 * 16 * 16);

  CHECK_THROWS_AS(encoder_arch(0), Error);
  CHECK_THROWS_AS(encoder_arch(10), Error);

  // Dense before flatten cannot chain.
  ArchDescriptor bad;
  bad.label = "bad";
  bad.input = Shape{8, 8, 1, false};
  bad.layers = {dense(4)};
  CHECK_THROWS_AS(bad.finalize(), Error);

  // Dropout probability 1 is rejected.
  ArchDescriptor bad2;
  bad2.label = "bad2";
  bad2.input = Shape{0, 0, 4, true};
  bad2.layers = {dense(4, 1.0)};
  CHECK_THROWS_AS(bad2.finalize(), Error);
}

TEST_CASE("conv impulse kernel crops the center") {
  ArchDescriptor d;
  d.label = "impulse";
  d.input = Shape{4, 4, 1, false};
  d.layers = {conv2d(1, 3, 1)};
  d.finalize();
  Network<float> net(d);
  // Kernel = 1 at the center tap, so output(oy,ox) = in(oy+1, ox+1).
  net.weights()[0].W.setZero();
  net.weights()[0].W(0, (0 * 3 + 1) * 3 + 1) = 1.0f;

  Rng rng(3);
  Eigen::VectorXf in = random_vec(16, rng);
  Eigen::VectorXf out = net.forward(in);
  REQUIRE(out.size() == 4);
  for (int oy = 0; oy < 2; ++oy) {
    for (int ox = 0; ox < 2; ++ox) {
      CHECK(out[oy * 2 + ox] == in[(oy + 1) * 4 + (ox + 1)]);
    }
  }
}

TEST_CASE("zero weights, linear head, zero output") {
  ArchDescriptor d;
  d.label = "zeros";
  d.input = Shape{0, 0, 6, true};
  d.layers = {dense(4), activation(Act::kLinear)};
  d.finalize();
  Network<float> net(d);  // weights allocate zeroed
  Rng rng(5);
  Eigen::VectorXf out = net.forward(random_vec(6, rng));
  for (int i = 0; i < out.size(); ++i) CHECK(out[i] == 0.0f);

  // Shape mismatch is an error.
  CHECK_THROWS_AS(net.forward(random_vec(5, rng)), Error);
}

TEST_CASE("dropout") {
  ArchDescriptor d;
  d.label = "drop";
  d.input = Shape{0, 0, 8, true};
  d.layers = {dense(16, 0.5), activation(Act::kLinear)};
  d.finalize();
  Network<float> net(d);
  net.init_weights(42);

  Rng data_rng(7);
  Eigen::VectorXf in = random_vec(8, data_rng);
  Eigen::VectorXf infer = net.forward(in);

  // p=0 variant: train equals infer.
  ArchDescriptor d0 = d;
  d0.layers[0].dropout_p = 0.0;
  d0.finalize();
  Network<float> net0(d0);
  net0.weights() = net.weights();
  ForwardCache<float> cache;
  Rng rng0(11);
  Eigen::VectorXf train0 = net0.forward(in, cache, true, &rng0);
  Eigen::VectorXf infer0 = net0.forward(in);
  for (int i = 0; i < infer0.size(); ++i) CHECK(train0[i] == infer0[i]);

  // p=0.5: every unit is dropped (0) or scaled by exactly 1/(1-p) = 2.
  Rng rng1(13);
  Eigen::VectorXf train = net.forward(in, cache, true, &rng1);
  int dropped = 0;
  for (int i = 0; i < train.size(); ++i) {
    const bool zeroed = train[i] == 0.0f;
    const bool scaled = std::abs(train[i] - 2.0f * infer[i]) <= 1e-6f * std::abs(infer[i]);
    CHECK((zeroed || scaled));
    if (zeroed) ++dropped;
  }
  CHECK(dropped > 0);
  CHECK(dropped < 16);

  // Train mode with active dropout demands an RNG.
  CHECK_THROWS_AS(net.forward(in, cache, true, nullptr), Error);
}

TEST_CASE("grad check: linear single layer") {
  ArchDescriptor d;
  d.label = "lin";
  d.input = Shape{0, 0, 4, true};
  d.layers = {dense(3), activation(Act::kLinear)};
  d.finalize();
  Network<double> net(d);
  net.init_weights(17);
  Rng rng(19);
  const double err = grad_check(net, random_vecd(4, rng), random_vecd(3, rng), 23);
  CHECK(err <= 1e-7);
}

TEST_CASE("grad check: conv+pool+dense") {
  ArchDescriptor d;
  d.label = "cpd";
  d.input = Shape{8, 8, 1, false};
  d.layers = {conv2d(2, 3, 1), activation(Act::kRelu), maxpool(2, 2),
              flatten(),       dense(5),               activation(Act::kSigmoid)};
  d.finalize();
  Network<double> net(d);
  net.init_weights(29);
  Rng rng(31);
  Eigen::VectorXd in = random_vecd(64, rng);
  Eigen::VectorXd target(5);
  for (int i = 0; i < 5; ++i) target[i] = rng.uniform(0.1, 0.9);
  const double err = grad_check(net, in, target, 37);
  CHECK(err <= 1e-4);
}

TEST_CASE("grad check: zero loss means zero head gradient") {
  ArchDescriptor d;
  d.label = "zl";
  d.input = Shape{0, 0, 3, true};
  d.layers = {dense(4), activation(Act::kRelu), dense(2), activation(Act::kLinear)};
  d.finalize();
  Network<double> net(d);
  net.init_weights(41);
  Rng rng(43);
  Eigen::VectorXd in = random_vecd(3, rng);
  Eigen::VectorXd target = net.forward(in);  // loss exactly 0

  ForwardCache<double> cache;
  Eigen::VectorXd out = net.forward(in, cache, false, nullptr);
  GradBuffers<double> grads = net.make_grads();
  Eigen::VectorXd dout = 2.0 * (out - target) / static_cast<double>(out.size());
  net.backward(cache, dout, grads);
  // Output dense layer is index 2.
  CHECK(grads.dW[2].cwiseAbs().maxCoeff() == 0.0);
  CHECK(grads.db[2].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("one Adam step matches the closed form") {
  ArchDescriptor d;
  d.label = "adam";
  d.input = Shape{0, 0, 1, true};
  d.layers = {dense(1), activation(Act::kLinear)};
  d.finalize();
  Network<float> net(d);
  net.weights()[0].W(0, 0) = 0.5f;
  net.weights()[0].b[0] = -0.25f;

  Eigen::VectorXf in(1), target(1);
  in[0] = 2.0f;
  target[0] = 5.0f;

  ForwardCache<float> cache;
  Eigen::VectorXf out = net.forward(in, cache, false, nullptr);
  GradBuffers<float> grads = net.make_grads();
  Eigen::VectorXf dout = 2.0f * (out - target);  // n_out = 1
  net.backward(cache, dout, grads);

  const double gw = grads.dW[0](0, 0);
  const double gb = grads.db[0][0];
  AdamParams p;
  AdamState<float> adam(net);
  adam.step(net, grads, p);

  auto closed_form = [&](double w0, double g) {
    const double m = (1.0 - p.beta1) * g;
    const double v = (1.0 - p.beta2) * g * g;
    const double mhat = m / (1.0 - p.beta1);
    const double vhat = v / (1.0 - p.beta2);
    return static_cast<float>(w0 - p.lr * mhat / (std::sqrt(vhat) + p.eps));
  };
  CHECK(std::abs(static_cast<double>(net.weights()[0].W(0, 0)) -
                 closed_form(0.5, gw)) <= 1e-12);
  CHECK(std::abs(static_cast<double>(net.weights()[0].b[0]) -
                 closed_form(-0.25, gb)) <= 1e-12);
}

TEST_CASE("dataset generation and caching") {
  RenderConfig cfg;
  cfg.width = 16;
  cfg.height = 16;
  Bounds b = default_bounds();

  Dataset a = gen_dataset(20, 99, b, cfg, 8);
  Dataset c = gen_dataset(20, 99, b, cfg, 8);
  CHECK(a.count() == 20);
  CHECK(a.params == c.params);
  CHECK(a.images == c.images);

  Dataset other = gen_dataset(20, 100, b, cfg, 8);
  CHECK(a.params != other.params);

  for (int s = 0; s < a.count(); ++s) {
    for (int i = 0; i < kParamCount; ++i) {
      CHECK(a.params(i, s) >= 0.0f);
      CHECK(a.params(i, s) <= 1.0f);
    }
    for (int i = 0; i < a.images.rows(); ++i) {
      CHECK(a.images(i, s) >= 0.0f);
      CHECK(a.images(i, s) <= 1.0f);
    }
  }

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "matfit_nn_test";
  fs::create_directories(dir);
  const std::string path = (dir / "cache.mfds").string();
  save_dataset(a, path);
  Dataset back = load_dataset(path);
  CHECK(back.seed == a.seed);
  CHECK(back.input_side == a.input_side);
  CHECK(back.params == a.params);
  CHECK(back.images == a.images);
  fs::remove_all(dir);
}

TEST_CASE("training: lr=0 identity, history length, overfit") {
  RenderConfig cfg;
  cfg.width = 8;
  cfg.height = 8;
  Bounds b = default_bounds();
  Dataset ds = gen_dataset(1, 7, b, cfg, 4);

  ArchDescriptor d;
  d.label = "tiny";
  d.input = Shape{0, 0, 48, true};
  d.layers = {dense(32), activation(Act::kRelu), dense(19), activation(Act::kSigmoid)};
  d.finalize();

  Network<float> frozen(d);
  frozen.init_weights(55);
  const auto saved = frozen.weights();
  TrainHyper hp0;
  hp0.epochs = 3;
  hp0.adam.lr = 0.0;
  hp0.seed = 2;
  TrainHistory h0 = train(frozen, ds, Dataset{}, TrainTask::kEncoder, hp0);
  CHECK(h0.train_loss.size() == 3);
  CHECK(h0.val_loss.size() == 3);
  for (size_t i = 0; i < saved.size(); ++i) {
    CHECK(frozen.weights()[i].W == saved[i].W);
    CHECK(frozen.weights()[i].b == saved[i].b);
  }

  Network<float> learner(d);
  learner.init_weights(55);
  TrainHyper hp;
  hp.epochs = 500;
  hp.seed = 2;
  TrainHistory h = train(learner, ds, ds, TrainTask::kEncoder, hp);
  REQUIRE(h.train_loss.size() == 500);
  CHECK(h.train_loss.back() < 1e-4);
  // Single training sample doubles as validation here.
  CHECK(h.val_loss.back() < 1e-4);
}

TEST_CASE("model serialization") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "matfit_model_test";
  fs::create_directories(dir);
  const std::string path = (dir / "model.mfnn").string();

  ArchDescriptor d = encoder_arch(8, 16);
  Network<float> net(d);
  net.init_weights(77);
  Bounds b = default_bounds();
  save_model(net, b, {{"note", "unit test"}}, path);

  ModelInfo info = load_model(path);
  CHECK(info.meta.at("note") == "unit test");
  for (int i = 0; i < kParamCount; ++i) {
    CHECK(info.bounds.lower[i] == b.lower[i]);
    CHECK(info.bounds.upper[i] == b.upper[i]);
  }

  Rng rng(79);
  Eigen::VectorXf in = random_vec(16 * 16 * 3, rng);
  Eigen::VectorXf a = net.forward(in);
  Eigen::VectorXf c = info.net.forward(in);
  REQUIRE(a.size() == c.size());
  for (int i = 0; i < a.size(); ++i) CHECK(a[i] == c[i]);  // bitwise

  // Truncation names the offending layer and leaves no partial model.
  const auto full_size = fs::file_size(path);
  fs::resize_file(path, full_size - 64);
  try {
    load_model(path);
    FAIL("expected truncation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFormat);
    CHECK(std::string(e.what()).find("truncated") != std::string::npos);
    CHECK(std::string(e.what()).find("layer") != std::string::npos);
  }

  // Bad magic.
  const std::string garbage = (dir / "bad.mfnn").string();
  {
    std::ofstream out(garbage, std::ios::binary);
    out << "NOTNN and some other bytes";
  }
  CHECK_THROWS_AS(load_model(garbage), Error);

  // Bounds mismatch warning is surfaced but does not block loading.
  save_model(net, b, {}, path);
  Bounds other = b;
  other.upper[kIor] = 2.0;
  std::ostringstream warn;
  ModelInfo again = load_model(path, &other, &warn);
  CHECK(warn.str().find("bounds differ") != std::string::npos);
  CHECK(again.net.weight_count() == net.weight_count());

  // Matching bounds stay silent.
  std::ostringstream quiet;
  load_model(path, &b, &quiet);
  CHECK(quiet.str().empty());

  fs::remove_all(dir);
}

TEST_CASE("weight init is seed-deterministic") {
  ArchDescriptor d = encoder_arch(6, 16);
  Network<float> a(d), b(d);
  a.init_weights(123);
  b.init_weights(123);
  for (size_t i = 0; i < a.weights().size(); ++i) {
    CHECK(a.weights()[i].W == b.weights()[i].W);
  }
  Network<float> c(d);
  c.init_weights(124);
  bool any_diff = false;
  for (size_t i = 0; i < a.weights().size(); ++i) {
    if (a.weights()[i].present() && a.weights()[i].W != c.weights()[i].W) any_diff = true;
  }
  CHECK(any_diff);
}
