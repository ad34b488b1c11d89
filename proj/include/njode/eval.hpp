#pragma once

#include <filesystem>
#include <vector>

#include "njode/datagen.hpp"
#include "njode/gbm.hpp"
#include "njode/model.hpp"

namespace njode {

// What the model is shown at evaluation time.
enum class EvalGating {
  kAll,          // every observation is an input
  kInitialOnly,  // only the t=0 observation
};

// Deterministic-dataset protocol: feed only the initial value, then MSE
// between prediction and the true path over the full sampling grid,
// averaged over paths and grid points (squared norm summed over
// coordinates).
double path_mse(const ad::ParamStore& store, const ModelParams& mp, const DatasetBundle& data,
                const std::vector<int>& indices);

// E[X_t | X_tau = v] for the GBM drift: v * exp(drift integral over [tau, t]).
double closed_form_cond_exp(const GbmDrift& drift, double last_obs_value, double last_obs_time,
                            double t);

// E[X_t | used observations up to t] on every grid point of a 1-d GBM
// path, honoring the input_flags of obs (flag 0 observations do not move
// the conditioning).
std::vector<double> closed_form_reference_grid(const GbmDrift& drift, const PathSample& path,
                                               const ObservationSet& obs);

// Stochastic-dataset protocol: mean over paths and grid times of the
// squared deviation of the prediction from the closed-form conditional
// expectation given exactly the observations the model received.
double eval_metric(const ad::ParamStore& store, const ModelParams& mp,
                   const DatasetBundle& data, const std::vector<int>& indices,
                   EvalGating gating);

// Prediction of E[X_t | A_{s ^ t}]: feed exactly the observations at times
// <= s, then run the ordinary forward pass.
PredictionSeries long_term_predict(const ad::ParamStore& store, const ModelParams& mp,
                                   const PathSample& path, const ObservationSet& obs, double s);

// Plot-ready CSV: time, truth per coordinate, prediction per coordinate,
// optional reference per coordinate, observed flag, used-as-input flag.
// Numbers are written with 17 significant digits so parsing them back is
// exact.
void export_series(const std::filesystem::path& file, const PathSample& path,
                   const ObservationSet& obs, const PredictionSeries& pred,
                   const std::vector<double>* reference = nullptr);

}  // namespace njode
