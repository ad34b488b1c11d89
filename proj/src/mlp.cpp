#include "njode/mlp.hpp"

#include <cmath>

#include "njode/errors.hpp"
#include "njode/kernels.hpp"

namespace njode {

MLPParams add_mlp(ad::ParamStore& store, const std::string& name, const MLPSpec& spec) {
  if (spec.in_dim <= 0 || spec.out_dim <= 0)
    throw ConfigError("mlp " + name + ": in/out dims must be positive");
  for (int h : spec.hidden)
    if (h <= 0) throw ConfigError("mlp " + name + ": hidden sizes must be positive");

  MLPParams mlp;
  mlp.spec = spec;
  int in = spec.in_dim;
  std::vector<int> outs(spec.hidden);
  outs.push_back(spec.out_dim);
  for (std::size_t l = 0; l < outs.size(); ++l) {
    std::string tag = name + "." + std::to_string(l);
    mlp.seg_w.push_back(store.add_matrix(tag + ".w", outs[l], in));
    mlp.seg_b.push_back(store.add_vector(tag + ".b", outs[l]));
    in = outs[l];
  }
  return mlp;
}

void init_mlp(ad::ParamStore& store, const MLPParams& mlp, Rng& rng) {
  for (int l = 0; l < mlp.n_layers(); ++l) {
    const ad::ParamSeg& w = store.segs[static_cast<std::size_t>(mlp.seg_w[l])];
    const double a = 1.0 / std::sqrt(static_cast<double>(w.cols));
    double* wd = store.seg_data(mlp.seg_w[l]);
    for (std::size_t i = 0; i < w.size(); ++i) wd[i] = (2.0 * rng.uniform() - 1.0) * a;
    const ad::ParamSeg& b = store.segs[static_cast<std::size_t>(mlp.seg_b[l])];
    double* bd = store.seg_data(mlp.seg_b[l]);
    for (std::size_t i = 0; i < b.size(); ++i) bd[i] = 0.0;
  }
}

ad::Value mlp_forward(ad::Tape& tape, const MLPParams& mlp, ad::Value input) {
  if (input.len != mlp.spec.in_dim)
    throw ConfigError("mlp_forward: input length " + std::to_string(input.len) +
                      " != in_dim " + std::to_string(mlp.spec.in_dim));
  ad::Value h = input;
  for (int l = 0; l < mlp.n_layers(); ++l) {
    h = tape.affine(mlp.seg_w[l], mlp.seg_b[l], h);
    if (l + 1 < mlp.n_layers()) h = tape.tanh(h);
  }
  return h;
}

std::vector<double> mlp_eval(const ad::ParamStore& store, const MLPParams& mlp,
                             const std::vector<double>& input) {
  if (static_cast<int>(input.size()) != mlp.spec.in_dim)
    throw ConfigError("mlp_eval: input length " + std::to_string(input.size()) +
                      " != in_dim " + std::to_string(mlp.spec.in_dim));
  std::vector<double> h = input;
  std::vector<double> y;
  for (int l = 0; l < mlp.n_layers(); ++l) {
    const ad::ParamSeg& w = store.segs[static_cast<std::size_t>(mlp.seg_w[l])];
    y.assign(static_cast<std::size_t>(w.rows), 0.0);
    kernels::affine(store.seg_data(mlp.seg_w[l]), store.seg_data(mlp.seg_b[l]),
                    h.data(), y.data(), w.rows, w.cols);
    if (l + 1 < mlp.n_layers()) kernels::tanh_forward(y.data(), y.data(), w.rows);
    h.swap(y);
  }
  return h;
}

}  // namespace njode
