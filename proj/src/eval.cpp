#include "njode/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "njode/errors.hpp"

namespace njode {

namespace {

ObservationSet gated_copy(const ObservationSet& obs, EvalGating gating) {
  ObservationSet out = obs;
  std::fill(out.input_flags.begin(), out.input_flags.end(), 1);
  if (gating == EvalGating::kInitialOnly) {
    std::fill(out.input_flags.begin(), out.input_flags.end(), 0);
    out.input_flags[0] = 1;
  }
  return out;
}

GbmDrift dataset_drift(const DatasetBundle& data) {
  if (data.meta.value("kind", "") != "gbm")
    throw ConfigError("eval_metric: no closed-form reference for this dataset");
  return gbm_variant_drift(data.meta.at("params").at("variant").get<std::string>());
}

}  // namespace

double path_mse(const ad::ParamStore& store, const ModelParams& mp, const DatasetBundle& data,
                const std::vector<int>& indices) {
  if (indices.empty()) throw UsageError("path_mse: empty index list");
  double sum = 0.0;
  std::size_t terms = 0;
  for (int idx : indices) {
    const PathSample& path = data.paths[static_cast<std::size_t>(idx)];
    const ObservationSet obs =
        gated_copy(data.observations[static_cast<std::size_t>(idx)], EvalGating::kInitialOnly);
    const PredictionSeries pred = forward_path(store, mp, path, obs);
    for (int k = 0; k < path.n_times(); ++k) {
      double sq = 0.0;
      for (int j = 0; j < path.d; ++j) {
        const double e = pred.grid_values[static_cast<std::size_t>(k) * path.d + j] -
                         path.value(k, j);
        sq += e * e;
      }
      sum += sq;
      ++terms;
    }
  }
  return sum / static_cast<double>(terms);
}

double closed_form_cond_exp(const GbmDrift& drift, double last_obs_value, double last_obs_time,
                            double t) {
  if (t < last_obs_time) throw UsageError("closed_form_cond_exp: t before conditioning time");
  return last_obs_value * std::exp(drift.integral(last_obs_time, t));
}

std::vector<double> closed_form_reference_grid(const GbmDrift& drift, const PathSample& path,
                                               const ObservationSet& obs) {
  if (path.d != 1)
    throw UsageError("closed_form_reference_grid: reference is 1-dimensional");
  std::vector<double> ref(static_cast<std::size_t>(path.n_times()));
  int next_used = 0;
  double tau = path.times[0];
  double x_tau = path.value(0, 0);
  for (int k = 0; k < path.n_times(); ++k) {
    // advance the conditioning observation to the last used one at or before t_k
    while (next_used < obs.count() && obs.obs_indices[next_used] <= k) {
      if (obs.input_flags[static_cast<std::size_t>(next_used)]) {
        tau = path.times[static_cast<std::size_t>(obs.obs_indices[next_used])];
        x_tau = path.value(obs.obs_indices[next_used], 0);
      }
      ++next_used;
    }
    ref[static_cast<std::size_t>(k)] =
        closed_form_cond_exp(drift, x_tau, tau, path.times[static_cast<std::size_t>(k)]);
  }
  return ref;
}

double eval_metric(const ad::ParamStore& store, const ModelParams& mp,
                   const DatasetBundle& data, const std::vector<int>& indices,
                   EvalGating gating) {
  if (indices.empty()) throw UsageError("eval_metric: empty index list");
  if (data.d != 1) throw ConfigError("eval_metric: closed-form reference is 1-dimensional");
  const GbmDrift drift = dataset_drift(data);

  double sum = 0.0;
  std::size_t terms = 0;
  for (int idx : indices) {
    const PathSample& path = data.paths[static_cast<std::size_t>(idx)];
    const ObservationSet obs = gated_copy(data.observations[static_cast<std::size_t>(idx)], gating);
    const PredictionSeries pred = forward_path(store, mp, path, obs);
    const std::vector<double> ref = closed_form_reference_grid(drift, path, obs);
    for (int k = 0; k < path.n_times(); ++k) {
      const double e = pred.grid_values[static_cast<std::size_t>(k)] - ref[static_cast<std::size_t>(k)];
      sum += e * e;
      ++terms;
    }
  }
  return sum / static_cast<double>(terms);
}

PredictionSeries long_term_predict(const ad::ParamStore& store, const ModelParams& mp,
                                   const PathSample& path, const ObservationSet& obs, double s) {
  if (s < 0.0) throw UsageError("long_term_predict: cutoff must be nonnegative");
  ObservationSet gated = obs;
  for (int k = 0; k < gated.count(); ++k)
    gated.input_flags[static_cast<std::size_t>(k)] =
        path.times[static_cast<std::size_t>(gated.obs_indices[k])] <= s ? 1 : 0;
  return forward_path(store, mp, path, gated);
}

void export_series(const std::filesystem::path& file, const PathSample& path,
                   const ObservationSet& obs, const PredictionSeries& pred,
                   const std::vector<double>* reference) {
  const int d = path.d;
  if (pred.d != d || static_cast<int>(pred.grid_values.size()) != path.n_times() * d)
    throw UsageError("export_series: prediction grid misaligned with path");
  if (reference && reference->size() != static_cast<std::size_t>(path.n_times()) * d)
    throw UsageError("export_series: reference misaligned with path");

  std::ofstream out(file);
  if (!out) throw IoError("export_series: cannot write " + file.string());
  out << "time";
  for (int j = 0; j < d; ++j) out << ",truth_" << j;
  for (int j = 0; j < d; ++j) out << ",pred_" << j;
  if (reference)
    for (int j = 0; j < d; ++j) out << ",ref_" << j;
  out << ",observed,used\n";

  char buf[32];
  const auto put = [&out, &buf](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    out << ',' << buf;
  };
  int next_obs = 0;
  for (int k = 0; k < path.n_times(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g", path.times[static_cast<std::size_t>(k)]);
    out << buf;
    for (int j = 0; j < d; ++j) put(path.value(k, j));
    for (int j = 0; j < d; ++j) put(pred.grid_values[static_cast<std::size_t>(k) * d + j]);
    if (reference)
      for (int j = 0; j < d; ++j) put((*reference)[static_cast<std::size_t>(k) * d + j]);
    int observed = 0, used = 0;
    if (next_obs < obs.count() && obs.obs_indices[next_obs] == k) {
      observed = 1;
      used = obs.input_flags[static_cast<std::size_t>(next_obs)] ? 1 : 0;
      ++next_obs;
    }
    out << ',' << observed << ',' << used << '\n';
  }
  if (!out) throw IoError("export_series: write failure for " + file.string());
}

}  // namespace njode
