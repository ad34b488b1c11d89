#pragma once

#include "njode/model.hpp"
#include "njode/types.hpp"

namespace njode {

// Observation loss along one path:
//   (1/n) sum over observations after t=0 of
//     ( |M_k (X_k - Y_k)| + |M_k (X_k - Y_k-)| )^2.
// Every observation counts, whether or not it was used as input. Computed
// through the same kernel sequence as the training tape, so it agrees
// bit-exactly with the differentiable loss at equal predictions.
double njode_loss(const PredictionSeries& pred, const PathSample& path,
                  const ObservationSet& obs);

}  // namespace njode
