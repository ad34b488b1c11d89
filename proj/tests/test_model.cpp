#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "njode/datagen.hpp"
#include "njode/errors.hpp"
#include "njode/fdcheck.hpp"
#include "njode/loss.hpp"
#include "njode/model.hpp"
#include "njode/rng.hpp"
#include "njode/signature.hpp"
#include "njode/train.hpp"

using namespace njode;
namespace fs = std::filesystem;

namespace {

PathSample make_path(int grid_len, int d, std::uint64_t seed) {
  PathSample p;
  p.d = d;
  Rng rng(seed);
  p.times.resize(static_cast<std::size_t>(grid_len));
  p.values.resize(static_cast<std::size_t>(grid_len) * d);
  std::vector<double> x(static_cast<std::size_t>(d));
  for (double& v : x) v = rng.normal(0.0, 1.0);
  for (int k = 0; k < grid_len; ++k) {
    p.times[static_cast<std::size_t>(k)] = 0.05 * k;
    for (int j = 0; j < d; ++j) {
      p.values[static_cast<std::size_t>(k) * d + j] = x[static_cast<std::size_t>(j)];
      x[static_cast<std::size_t>(j)] += rng.normal(0.0, 0.3);
    }
  }
  return p;
}

ModelConfig small_config(int d, bool feedback, bool recurrent, int sig_level) {
  ModelConfig cfg;
  cfg.d = d;
  cfg.d_H = 6;
  cfg.hidden = {7};
  cfg.use_output_feedback = feedback;
  cfg.use_recurrent_jump = recurrent;
  cfg.signature_level = sig_level;
  return cfg;
}

// Copies src's parameters into dst where dst's first encoder/vector-field
// layers may have extra trailing input columns (the feedback block); those
// stay zero.
void copy_widened(const ad::ParamStore& src, const ModelParams& a, ad::ParamStore& dst,
                  const ModelParams& b) {
  const auto copy_net = [&](const MLPParams& na, const MLPParams& nb) {
    for (int l = 0; l < na.n_layers(); ++l) {
      const ad::ParamSeg& ws = src.segs[static_cast<std::size_t>(na.seg_w[l])];
      const ad::ParamSeg& wd = dst.segs[static_cast<std::size_t>(nb.seg_w[l])];
      REQUIRE(ws.rows == wd.rows);
      REQUIRE(ws.cols <= wd.cols);
      const double* from = src.seg_data(na.seg_w[l]);
      double* to = dst.seg_data(nb.seg_w[l]);
      for (int r = 0; r < ws.rows; ++r)
        std::copy(from + r * ws.cols, from + (r + 1) * ws.cols, to + r * wd.cols);
      const ad::ParamSeg& bs = src.segs[static_cast<std::size_t>(na.seg_b[l])];
      std::copy(src.seg_data(na.seg_b[l]), src.seg_data(na.seg_b[l]) + bs.size(),
                dst.seg_data(nb.seg_b[l]));
    }
  };
  copy_net(a.encoder, b.encoder);
  copy_net(a.vectorfield, b.vectorfield);
  copy_net(a.readout, b.readout);
}

}  // namespace

TEST_CASE("network input widths follow the config") {
  for (const bool of : {false, true})
    for (const bool rec : {false, true})
      for (const int lvl : {0, 2}) {
        const ModelConfig cfg = small_config(3, of, rec, lvl);
        const int sig = lvl == 0 ? 0 : signature_dim(1 + cfg.d, lvl);
        CHECK(model_signature_dim(cfg) == sig);
        CHECK(encoder_in_dim(cfg) ==
              2 * cfg.d + 2 + (rec ? cfg.d_H : 0) + sig + (of ? cfg.d : 0));
        CHECK(vectorfield_in_dim(cfg) == cfg.d_H + 2 + cfg.d + (of ? cfg.d : 0));
      }
}

TEST_CASE("zero parameters predict zero everywhere") {
  ad::ParamStore store;
  const ModelParams mp = build_model(store, small_config(2, true, true, 2));
  const PathSample path = make_path(12, 2, 1);
  const ObservationSet obs = sample_observations(12, 0.5, 2, 2);
  const PredictionSeries pred = forward_path(store, mp, path, obs);
  for (double v : pred.grid_values) CHECK(v == 0.0);
  for (double v : pred.pre_jump) CHECK(v == 0.0);
  for (double v : pred.post_jump) CHECK(v == 0.0);
}

TEST_CASE("gated-off observations do not jump") {
  ad::ParamStore store;
  const ModelParams mp = build_model(store, small_config(2, false, true, 0));
  init_model(store, mp, 5);
  const PathSample path = make_path(20, 2, 3);
  ObservationSet obs = sample_observations(20, 0.6, 4, 2);
  for (int k = 1; k < obs.count(); k += 2) obs.input_flags[static_cast<std::size_t>(k)] = 0;

  const PredictionSeries pred = forward_path(store, mp, path, obs);
  for (int k = 0; k < obs.count(); ++k) {
    if (obs.input_flags[static_cast<std::size_t>(k)]) continue;
    for (int j = 0; j < 2; ++j)
      CHECK(pred.pre_jump[static_cast<std::size_t>(k) * 2 + j] ==
            pred.post_jump[static_cast<std::size_t>(k) * 2 + j]);
  }
}

TEST_CASE("withheld observations leave the output untouched") {
  ad::ParamStore store;
  const ModelParams mp = build_model(store, small_config(1, true, true, 3));
  init_model(store, mp, 7);
  const PathSample path = make_path(25, 1, 8);
  ObservationSet obs = sample_observations(25, 0.4, 9, 1);
  std::fill(obs.input_flags.begin(), obs.input_flags.end(), 0);
  obs.input_flags[0] = 1;

  const PredictionSeries base = forward_path(store, mp, path, obs);
  for (std::uint64_t trial = 0; trial < 3; ++trial) {
    PathSample shuffled = path;
    Rng rng(100 + trial);
    for (int k = 1; k < obs.count(); ++k)
      shuffled.values[static_cast<std::size_t>(obs.obs_indices[k])] = rng.normal(0.0, 5.0);
    const PredictionSeries pred = forward_path(store, mp, shuffled, obs);
    CHECK(pred.grid_values == base.grid_values);
  }
}

TEST_CASE("predictions are adapted to the information seen so far") {
  ad::ParamStore store;
  const ModelParams mp = build_model(store, small_config(2, true, true, 2));
  init_model(store, mp, 21);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const PathSample path = make_path(30, 2, 200 + seed);
    const ObservationSet obs = sample_observations(30, 0.5, 300 + seed, 2);
    const PredictionSeries base = forward_path(store, mp, path, obs);

    for (int cut = 0; cut + 1 < obs.count(); ++cut) {
      const double s = path.times[static_cast<std::size_t>(obs.obs_indices[cut])];
      PathSample mod = path;
      Rng rng(400 + seed * 31 + static_cast<std::uint64_t>(cut));
      for (int k = cut + 1; k < obs.count(); ++k)
        for (int j = 0; j < 2; ++j)
          mod.values[static_cast<std::size_t>(obs.obs_indices[k]) * 2 + j] =
              rng.normal(0.0, 3.0);
      const PredictionSeries pred = forward_path(store, mp, mod, obs);
      for (int g = 0; g < path.n_times(); ++g) {
        if (path.times[static_cast<std::size_t>(g)] > s) break;
        for (int j = 0; j < 2; ++j)
          CHECK(pred.grid_values[static_cast<std::size_t>(g) * 2 + j] ==
                base.grid_values[static_cast<std::size_t>(g) * 2 + j]);
      }
    }
  }
}

TEST_CASE("zero vector field freezes the latent between jumps") {
  ad::ParamStore store;
  const ModelParams mp = build_model(store, small_config(2, false, true, 0));
  init_model(store, mp, 31);
  // Re-zero the vector field only.
  for (int l = 0; l < mp.vectorfield.n_layers(); ++l) {
    const ad::ParamSeg& w = store.segs[static_cast<std::size_t>(mp.vectorfield.seg_w[l])];
    std::fill_n(store.seg_data(mp.vectorfield.seg_w[l]), w.size(), 0.0);
    const ad::ParamSeg& b = store.segs[static_cast<std::size_t>(mp.vectorfield.seg_b[l])];
    std::fill_n(store.seg_data(mp.vectorfield.seg_b[l]), b.size(), 0.0);
  }

  const PathSample path = make_path(15, 2, 17);
  const ObservationSet obs = sample_observations(15, 0.3, 18, 2);
  const PredictionSeries pred = forward_path(store, mp, path, obs);

  std::vector<std::uint8_t> used(15, 0);
  for (int k = 0; k < obs.count(); ++k)
    if (obs.input_flags[static_cast<std::size_t>(k)])
      used[static_cast<std::size_t>(obs.obs_indices[k])] = 1;
  for (int g = 1; g < 15; ++g) {
    if (used[static_cast<std::size_t>(g)]) continue;
    for (int j = 0; j < 2; ++j)
      CHECK(pred.grid_values[static_cast<std::size_t>(g) * 2 + j] ==
            pred.grid_values[static_cast<std::size_t>(g - 1) * 2 + j]);
  }
}

TEST_CASE("bias-only vector field gives exactly linear segments") {
  ModelConfig cfg = small_config(1, false, true, 0);
  cfg.ode_substeps = 3;
  ad::ParamStore store;
  const ModelParams mp = build_model(store, cfg);
  init_model(store, mp, 41);

  for (int l = 0; l < mp.vectorfield.n_layers(); ++l) {
    const ad::ParamSeg& w = store.segs[static_cast<std::size_t>(mp.vectorfield.seg_w[l])];
    std::fill_n(store.seg_data(mp.vectorfield.seg_w[l]), w.size(), 0.0);
    const ad::ParamSeg& b = store.segs[static_cast<std::size_t>(mp.vectorfield.seg_b[l])];
    std::fill_n(store.seg_data(mp.vectorfield.seg_b[l]), b.size(), 0.0);
  }
  // Nonzero drift through the output-layer bias only.
  const int last = mp.vectorfield.n_layers() - 1;
  double* c = store.seg_data(mp.vectorfield.seg_b[last]);
  for (int i = 0; i < cfg.d_H; ++i) c[i] = 0.1 * (i + 1);
  // Linear readout.
  MLPParams ro = mp.readout;
  REQUIRE(ro.n_layers() >= 1);

  const PathSample path = make_path(11, 1, 55);
  ObservationSet obs;
  obs.obs_indices = {0};
  obs.masks = {1};
  obs.input_flags = {1};
  const PredictionSeries pred = forward_path(store, mp, path, obs);

  // With H linear in t and no further jumps, second differences of the
  // readout of H vanish when the readout is one affine layer; with a hidden
  // layer they do not, so check the latent-linearity consequence instead:
  // equal grid spacing gives equal consecutive prediction increments only
  // for an affine readout. Use the exactness of Euler on a constant field:
  // doubling substeps must not change anything.
  ModelParams mp2 = mp;
  mp2.config.ode_substeps = 6;
  const PredictionSeries pred2 = forward_path(store, mp2, path, obs);
  REQUIRE(pred.grid_values.size() == pred2.grid_values.size());
  for (std::size_t k = 0; k < pred.grid_values.size(); ++k)
    CHECK(std::abs(pred.grid_values[k] - pred2.grid_values[k]) < 1e-12);
}

TEST_CASE("substep refinement self-converges at first order") {
  ad::ParamStore store;
  const ModelParams mp = build_model(store, small_config(1, true, true, 0));
  init_model(store, mp, 61);
  const PathSample path = make_path(12, 1, 62);
  const ObservationSet obs = sample_observations(12, 0.3, 63, 1);

  std::vector<std::vector<double>> grids;
  for (const int sub : {1, 2, 4, 8, 16}) {
    ModelParams m = mp;
    m.config.ode_substeps = sub;
    grids.push_back(forward_path(store, m, path, obs).grid_values);
  }
  std::vector<double> diffs;
  for (std::size_t i = 0; i + 1 < grids.size(); ++i) {
    double worst = 0.0;
    for (std::size_t k = 0; k < grids[i].size(); ++k)
      worst = std::max(worst, std::abs(grids[i][k] - grids[i + 1][k]));
    diffs.push_back(worst);
  }
  for (std::size_t i = 0; i + 1 < diffs.size(); ++i) {
    REQUIRE(diffs[i] > 0.0);
    const double ratio = diffs[i + 1] / diffs[i];
    CHECK(ratio > 0.3);
    CHECK(ratio < 0.7);
  }
}

TEST_CASE("encoder bias and selector readout thread through the latent") {
  ModelConfig cfg = small_config(2, false, false, 0);
  cfg.hidden = {};  // affine encoder/vector field/readout
  ad::ParamStore store;
  const ModelParams mp = build_model(store, cfg);

  // encoder := constant h0, vector field := 0, readout := select H[1], H[3].
  double* h0 = store.seg_data(mp.encoder.seg_b[0]);
  for (int i = 0; i < cfg.d_H; ++i) h0[i] = 0.5 * (i + 1);
  double* w = store.seg_data(mp.readout.seg_w[0]);
  w[0 * cfg.d_H + 1] = 1.0;
  w[1 * cfg.d_H + 3] = 1.0;

  const PathSample path = make_path(8, 2, 71);
  ObservationSet obs;
  obs.obs_indices = {0};
  obs.masks = {1, 1};
  obs.input_flags = {1};
  const PredictionSeries pred = forward_path(store, mp, path, obs);
  for (int g = 0; g < 8; ++g) {
    CHECK(pred.grid_values[static_cast<std::size_t>(g) * 2 + 0] == h0[1]);
    CHECK(pred.grid_values[static_cast<std::size_t>(g) * 2 + 1] == h0[3]);
  }
}

TEST_CASE("feedback with zeroed feedback weights equals the plain model") {
  for (const int lvl : {0, 2}) {
    ad::ParamStore store_a;
    const ModelParams a = build_model(store_a, small_config(2, false, true, lvl));
    init_model(store_a, a, 83);

    ad::ParamStore store_b;
    const ModelParams b = build_model(store_b, small_config(2, true, true, lvl));
    copy_widened(store_a, a, store_b, b);

    const PathSample path = make_path(18, 2, 84);
    const ObservationSet obs = sample_observations(18, 0.5, 85, 2);
    const PredictionSeries pa = forward_path(store_a, a, path, obs);
    const PredictionSeries pb = forward_path(store_b, b, path, obs);
    CHECK(pa.grid_values == pb.grid_values);
    CHECK(pa.pre_jump == pb.pre_jump);
    CHECK(pa.post_jump == pb.post_jump);
  }
}

TEST_CASE("checkpoints round-trip bit for bit") {
  ad::ParamStore store;
  const ModelParams mp = build_model(store, small_config(3, true, true, 1));
  init_model(store, mp, 91);
  const fs::path file = fs::temp_directory_path() / "njode_test_ckpt.json";
  save_checkpoint(file, store, mp);
  const Checkpoint loaded = load_checkpoint(file);

  CHECK(loaded.store.theta == store.theta);
  CHECK(loaded.model.config.d == mp.config.d);
  CHECK(loaded.model.config.d_H == mp.config.d_H);
  CHECK(loaded.model.config.hidden == mp.config.hidden);
  CHECK(loaded.model.config.use_output_feedback == mp.config.use_output_feedback);
  CHECK(loaded.model.config.signature_level == mp.config.signature_level);

  const PathSample path = make_path(10, 3, 92);
  const ObservationSet obs = sample_observations(10, 0.5, 93, 3);
  CHECK(forward_path(store, mp, path, obs).grid_values ==
        forward_path(loaded.store, loaded.model, path, obs).grid_values);
  fs::remove(file);
}

TEST_CASE("checkpoint loading rejects missing and mangled files") {
  const fs::path missing = fs::temp_directory_path() / "njode_no_such_ckpt.json";
  fs::remove(missing);
  CHECK_THROWS_AS(load_checkpoint(missing), IoError);

  const fs::path bad = fs::temp_directory_path() / "njode_bad_ckpt.json";
  std::ofstream(bad) << "{\"schema\":\"njode-checkpoint-v1\",\"params\":{}";
  CHECK_THROWS_AS(load_checkpoint(bad), IoError);
  fs::remove(bad);
}

TEST_CASE("full path loss gradients match finite differences") {
  ModelConfig cfg = small_config(2, true, true, 2);
  cfg.d_H = 4;
  cfg.hidden = {5};
  ad::ParamStore store;
  const ModelParams mp = build_model(store, cfg);
  init_model(store, mp, 101);

  const PathSample path = make_path(7, 2, 102);
  ObservationSet obs;
  obs.obs_indices = {0, 2, 5};
  obs.masks = {1, 1, 1, 1, 1, 0};
  obs.input_flags = {1, 1, 0};

  store.zero_grad();
  const double loss = path_loss_grad(store, mp, path, obs);
  CHECK(loss == njode_loss(forward_path(store, mp, path, obs), path, obs));

  const auto f = [&](std::span<const double> th) {
    ad::ParamStore s2 = store;
    std::copy(th.begin(), th.end(), s2.theta.begin());
    return njode_loss(forward_path(s2, mp, path, obs), path, obs);
  };
  CHECK(finite_diff_check(f, store.theta, store.grad, 1e-6) < 1e-4);
}
