#include "njode/model.hpp"

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "engine.hpp"
#include "njode/errors.hpp"
#include "njode/rng.hpp"
#include "njode/signature.hpp"

namespace njode {

using nlohmann::json;

int model_signature_dim(const ModelConfig& cfg) {
  if (cfg.signature_level == 0) return 0;
  return signature_dim(1 + cfg.d, cfg.signature_level);
}

int encoder_in_dim(const ModelConfig& cfg) {
  return 2 * cfg.d + 2 + (cfg.use_recurrent_jump ? cfg.d_H : 0) + model_signature_dim(cfg) +
         (cfg.use_output_feedback ? cfg.d : 0);
}

int vectorfield_in_dim(const ModelConfig& cfg) {
  return cfg.d_H + 2 + cfg.d + (cfg.use_output_feedback ? cfg.d : 0);
}

namespace {

void check_config(const ModelConfig& cfg) {
  if (cfg.d < 1) throw ConfigError("model: d must be >= 1");
  if (cfg.d_H < 1) throw ConfigError("model: d_H must be >= 1");
  if (cfg.signature_level < 0 || cfg.signature_level > 3)
    throw ConfigError("model: signature_level must be in {0,1,2,3}");
  if (cfg.ode_substeps < 1) throw ConfigError("model: ode_substeps must be >= 1");
  for (int h : cfg.hidden)
    if (h < 1) throw ConfigError("model: hidden sizes must be positive");
}

}  // namespace

ModelParams build_model(ad::ParamStore& store, const ModelConfig& cfg) {
  check_config(cfg);
  ModelParams mp;
  mp.config = cfg;
  mp.encoder = add_mlp(store, "encoder", {encoder_in_dim(cfg), cfg.hidden, cfg.d_H});
  mp.vectorfield = add_mlp(store, "vectorfield", {vectorfield_in_dim(cfg), cfg.hidden, cfg.d_H});
  mp.readout = add_mlp(store, "readout", {cfg.d_H, cfg.hidden, cfg.d});
  return mp;
}

void init_model(ad::ParamStore& store, const ModelParams& mp, std::uint64_t seed) {
  Rng rng(derive_seed(seed, stream::kInit));
  init_mlp(store, mp.encoder, rng);
  init_mlp(store, mp.vectorfield, rng);
  init_mlp(store, mp.readout, rng);
}

PredictionSeries forward_path(const ad::ParamStore& store, const ModelParams& mp,
                              const PathSample& path, const ObservationSet& obs) {
  detail::EvalEngine eng{store};
  auto fwd = detail::run_forward(eng, mp, path, obs, /*want_grid=*/true);

  PredictionSeries out;
  out.d = mp.config.d;
  out.grid_values.reserve(fwd.grid.size() * static_cast<std::size_t>(out.d));
  for (const auto& v : fwd.grid) out.grid_values.insert(out.grid_values.end(), v.begin(), v.end());
  out.pre_jump.reserve(fwd.pre_jump.size() * static_cast<std::size_t>(out.d));
  for (const auto& v : fwd.pre_jump) out.pre_jump.insert(out.pre_jump.end(), v.begin(), v.end());
  out.post_jump.reserve(fwd.post_jump.size() * static_cast<std::size_t>(out.d));
  for (const auto& v : fwd.post_jump)
    out.post_jump.insert(out.post_jump.end(), v.begin(), v.end());
  return out;
}

namespace {

json config_to_json(const ModelConfig& cfg) {
  return json{{"d", cfg.d},
              {"d_H", cfg.d_H},
              {"hidden", cfg.hidden},
              {"use_output_feedback", cfg.use_output_feedback},
              {"use_recurrent_jump", cfg.use_recurrent_jump},
              {"signature_level", cfg.signature_level},
              {"ode_substeps", cfg.ode_substeps}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig cfg;
  cfg.d = j.at("d").get<int>();
  cfg.d_H = j.at("d_H").get<int>();
  cfg.hidden = j.at("hidden").get<std::vector<int>>();
  cfg.use_output_feedback = j.at("use_output_feedback").get<bool>();
  cfg.use_recurrent_jump = j.at("use_recurrent_jump").get<bool>();
  cfg.signature_level = j.at("signature_level").get<int>();
  cfg.ode_substeps = j.at("ode_substeps").get<int>();
  return cfg;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& file, const ad::ParamStore& store,
                     const ModelParams& mp) {
  json params = json::object();
  for (std::size_t s = 0; s < store.segs.size(); ++s) {
    const ad::ParamSeg& seg = store.segs[s];
    params[seg.name] = std::vector<double>(store.theta.begin() + static_cast<std::ptrdiff_t>(seg.offset),
                                           store.theta.begin() + static_cast<std::ptrdiff_t>(seg.offset + seg.size()));
  }
  json doc{{"schema", "njode-checkpoint-v1"},
           {"config", config_to_json(mp.config)},
           {"params", params}};
  std::ofstream out(file);
  if (!out) throw IoError("save_checkpoint: cannot write " + file.string());
  out << doc.dump(2) << "\n";
  if (!out) throw IoError("save_checkpoint: write failure for " + file.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("load_checkpoint: cannot open " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("load_checkpoint: bad JSON in " + file.string() + ": " + e.what());
  }
  if (doc.value("schema", "") != "njode-checkpoint-v1")
    throw IoError("load_checkpoint: unsupported schema in " + file.string());

  Checkpoint ckpt;
  ckpt.model = build_model(ckpt.store, config_from_json(doc.at("config")));
  const json& params = doc.at("params");
  for (const ad::ParamSeg& seg : ckpt.store.segs) {
    if (!params.contains(seg.name))
      throw IoError("load_checkpoint: missing segment " + seg.name);
    const auto vals = params.at(seg.name).get<std::vector<double>>();
    if (vals.size() != seg.size())
      throw IoError("load_checkpoint: size mismatch for segment " + seg.name);
    std::copy(vals.begin(), vals.end(), ckpt.store.theta.begin() + static_cast<std::ptrdiff_t>(seg.offset));
  }
  return ckpt;
}

}  // namespace njode
