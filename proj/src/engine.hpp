#pragma once

// Internal. One forward-pass/loss implementation instantiated over two
// engines: TapeEngine records on an ad::Tape (training), EvalEngine applies
// the same kernels to plain vectors (inference/validation). A single code
// path plus shared non-inline kernels makes the two bit-identical.

#include <span>
#include <vector>

#include "njode/errors.hpp"
#include "njode/kernels.hpp"
#include "njode/model.hpp"
#include "njode/signature.hpp"
#include "njode/tape.hpp"
#include "njode/types.hpp"

namespace njode::detail {

struct TapeEngine {
  ad::Tape& tape;
  using V = ad::Value;

  V constant(const std::vector<double>& x) { return tape.constant(std::span<const double>(x)); }
  V constant1(double x) { return tape.constant1(x); }
  V affine(int seg_w, int seg_b, V x) { return tape.affine(seg_w, seg_b, x); }
  V tanh(V x) { return tape.tanh(x); }
  V concat(std::span<const V> xs) { return tape.concat(xs); }
  V axpy(V x, double c, V z) { return tape.axpy(x, c, z); }
  V add(V a, V b) { return tape.add(a, b); }
  V sub(V a, V b) { return tape.sub(a, b); }
  V mul(V a, V b) { return tape.mul(a, b); }
  V scale(V x, double c) { return tape.scale(x, c); }
  V norm2(V x) { return tape.norm2(x); }
  std::vector<double> values(V v) const {
    auto s = tape.data(v);
    return std::vector<double>(s.begin(), s.end());
  }
};

struct EvalEngine {
  const ad::ParamStore& store;
  using V = std::vector<double>;

  V constant(const std::vector<double>& x) { return x; }
  V constant1(double x) { return V{x}; }
  V affine(int seg_w, int seg_b, const V& x) {
    const ad::ParamSeg& w = store.segs[static_cast<std::size_t>(seg_w)];
    if (w.cols != static_cast<int>(x.size()))
      throw UsageError("affine: W cols != x len for " + w.name);
    V y(static_cast<std::size_t>(w.rows));
    kernels::affine(store.seg_data(seg_w), store.seg_data(seg_b), x.data(), y.data(), w.rows,
                    w.cols);
    return y;
  }
  V tanh(const V& x) {
    V y(x.size());
    kernels::tanh_forward(x.data(), y.data(), static_cast<int>(x.size()));
    return y;
  }
  V concat(std::span<const V> xs) {
    V y;
    std::size_t total = 0;
    for (const V& v : xs) total += v.size();
    y.reserve(total);
    for (const V& v : xs) y.insert(y.end(), v.begin(), v.end());
    return y;
  }
  V axpy(const V& x, double c, const V& z) {
    V y(x.size());
    kernels::axpy(x.data(), c, z.data(), y.data(), static_cast<int>(x.size()));
    return y;
  }
  V add(const V& a, const V& b) {
    V y(a.size());
    kernels::add(a.data(), b.data(), y.data(), static_cast<int>(a.size()));
    return y;
  }
  V sub(const V& a, const V& b) {
    V y(a.size());
    kernels::sub(a.data(), b.data(), y.data(), static_cast<int>(a.size()));
    return y;
  }
  V mul(const V& a, const V& b) {
    V y(a.size());
    kernels::hadamard(a.data(), b.data(), y.data(), static_cast<int>(a.size()));
    return y;
  }
  V scale(const V& x, double c) {
    V y(x.size());
    kernels::scale(x.data(), c, y.data(), static_cast<int>(x.size()));
    return y;
  }
  V norm2(const V& x) { return V{kernels::l2_norm(x.data(), static_cast<int>(x.size()))}; }
  std::vector<double> values(const V& v) const { return v; }
};

template <class E>
typename E::V mlp_apply(E& eng, const MLPParams& mlp, typename E::V x) {
  typename E::V h = x;
  for (int l = 0; l < mlp.n_layers(); ++l) {
    h = eng.affine(mlp.seg_w[l], mlp.seg_b[l], h);
    if (l + 1 < mlp.n_layers()) h = eng.tanh(h);
  }
  return h;
}

template <class E>
struct ForwardResult {
  std::vector<typename E::V> grid;       // readout per grid index; empty unless requested
  std::vector<typename E::V> pre_jump;   // per observation
  std::vector<typename E::V> post_jump;  // per observation
};

// The PD-NJ-ODE pass: encode at input-used observations, Euler in between,
// readout on demand. Only the latent and its readouts are differentiable;
// observation values, masks, times, and signature features enter as
// constants of the record.
template <class E>
ForwardResult<E> run_forward(E& eng, const ModelParams& mp, const PathSample& path,
                             const ObservationSet& obs, bool want_grid) {
  using V = typename E::V;
  const ModelConfig& cfg = mp.config;
  const int d = cfg.d;
  if (path.d != d) throw UsageError("run_forward: path dimension != model d");
  validate_observations(obs, path.n_times(), d);

  ForwardResult<E> res;
  res.pre_jump.reserve(static_cast<std::size_t>(obs.count()));
  res.post_jump.reserve(static_cast<std::size_t>(obs.count()));
  if (want_grid) res.grid.reserve(static_cast<std::size_t>(path.n_times()));

  V h = eng.constant(std::vector<double>(static_cast<std::size_t>(cfg.d_H), 0.0));
  double last_t = 0.0;
  std::vector<double> last_val(static_cast<std::size_t>(d), 0.0);
  SignatureAccumulator sig(1 + d, cfg.signature_level > 0 ? cfg.signature_level : 1);

  int next_obs = 0;
  std::vector<V> parts;
  for (int k = 0; k < path.n_times(); ++k) {
    if (k > 0) {
      const double t_prev = path.times[static_cast<std::size_t>(k - 1)];
      const int substeps = cfg.ode_substeps;
      const double dt = (path.times[static_cast<std::size_t>(k)] - t_prev) / substeps;
      for (int s = 0; s < substeps; ++s) {
        const double t_cur = t_prev + s * dt;
        parts.clear();
        parts.push_back(h);
        parts.push_back(eng.constant1(t_cur));
        parts.push_back(eng.constant1(t_cur - last_t));
        parts.push_back(eng.constant(last_val));
        if (cfg.use_output_feedback) parts.push_back(mlp_apply(eng, mp.readout, h));
        V drift = mlp_apply(eng, mp.vectorfield, eng.concat(parts));
        h = eng.axpy(h, dt, drift);
      }
    }

    const bool is_obs = next_obs < obs.count() && obs.obs_indices[next_obs] == k;
    if (is_obs) {
      const double t_k = path.times[static_cast<std::size_t>(k)];
      V pre = mlp_apply(eng, mp.readout, h);
      res.pre_jump.push_back(pre);
      V post = pre;
      if (obs.input_flags[static_cast<std::size_t>(next_obs)]) {
        const double* x = path.value_row(k);
        const std::uint8_t* m = obs.mask_row(next_obs, d);
        std::vector<double> mask_d(static_cast<std::size_t>(d));
        std::vector<double> xm(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j) {
          mask_d[static_cast<std::size_t>(j)] = static_cast<double>(m[j]);
          xm[static_cast<std::size_t>(j)] = x[j] * mask_d[static_cast<std::size_t>(j)];
        }
        if (cfg.signature_level > 0) {
          std::vector<double> point(static_cast<std::size_t>(1 + d));
          point[0] = t_k;
          for (int j = 0; j < d; ++j) point[static_cast<std::size_t>(1 + j)] = xm[static_cast<std::size_t>(j)];
          sig.append(point);
        }
        parts.clear();
        parts.push_back(eng.constant(xm));
        parts.push_back(eng.constant(mask_d));
        parts.push_back(eng.constant1(t_k));
        parts.push_back(eng.constant1(t_k - last_t));
        if (cfg.use_recurrent_jump) parts.push_back(h);
        if (cfg.signature_level > 0) parts.push_back(eng.constant(sig.features()));
        if (cfg.use_output_feedback) parts.push_back(pre);
        h = mlp_apply(eng, mp.encoder, eng.concat(parts));
        post = mlp_apply(eng, mp.readout, h);
        last_t = t_k;
        for (int j = 0; j < d; ++j)
          if (m[j]) last_val[static_cast<std::size_t>(j)] = x[j];
      }
      res.post_jump.push_back(post);
      if (want_grid) res.grid.push_back(post);
      ++next_obs;
    } else if (want_grid) {
      res.grid.push_back(mlp_apply(eng, mp.readout, h));
    }
  }
  return res;
}

// Observation loss along one path, over every observation after t=0
// regardless of input gating:
//   (1/n) sum_k ( |M_k (X_k - Y_k)| + |M_k (X_k - Y_k-)| )^2.
template <class E>
typename E::V build_loss(E& eng, const ForwardResult<E>& fwd, const PathSample& path,
                         const ObservationSet& obs) {
  using V = typename E::V;
  const int d = path.d;
  if (static_cast<int>(fwd.pre_jump.size()) != obs.count() ||
      static_cast<int>(fwd.post_jump.size()) != obs.count())
    throw UsageError("build_loss: prediction/observation misalignment");

  V total = eng.constant1(0.0);
  const int n_after = obs.count() - 1;
  if (n_after == 0) return total;
  for (int k = 1; k < obs.count(); ++k) {
    const double* x = path.value_row(obs.obs_indices[static_cast<std::size_t>(k)]);
    const std::uint8_t* m = obs.mask_row(k, d);
    std::vector<double> mask_d(static_cast<std::size_t>(d));
    std::vector<double> xm(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      mask_d[static_cast<std::size_t>(j)] = static_cast<double>(m[j]);
      xm[static_cast<std::size_t>(j)] = x[j] * mask_d[static_cast<std::size_t>(j)];
    }
    V xmv = eng.constant(xm);
    V mv = eng.constant(mask_d);
    V e_post = eng.sub(xmv, eng.mul(fwd.post_jump[static_cast<std::size_t>(k)], mv));
    V e_pre = eng.sub(xmv, eng.mul(fwd.pre_jump[static_cast<std::size_t>(k)], mv));
    V term = eng.add(eng.norm2(e_post), eng.norm2(e_pre));
    total = eng.add(total, eng.mul(term, term));
  }
  return eng.scale(total, 1.0 / static_cast<double>(n_after));
}

}  // namespace njode::detail
