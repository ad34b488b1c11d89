#include "njode/loss.hpp"

#include "engine.hpp"
#include "njode/errors.hpp"

namespace njode {

double njode_loss(const PredictionSeries& pred, const PathSample& path,
                  const ObservationSet& obs) {
  const int d = path.d;
  const int count = obs.count();
  if (pred.d != d) throw UsageError("njode_loss: prediction dimension mismatch");
  if (pred.pre_jump.size() != static_cast<std::size_t>(count) * d ||
      pred.post_jump.size() != static_cast<std::size_t>(count) * d)
    throw UsageError("njode_loss: prediction/observation misalignment");

  static const ad::ParamStore kNoParams;
  detail::EvalEngine eng{kNoParams};
  detail::ForwardResult<detail::EvalEngine> fwd;
  fwd.pre_jump.reserve(static_cast<std::size_t>(count));
  fwd.post_jump.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double* pre = pred.pre_jump.data() + static_cast<std::size_t>(k) * d;
    const double* post = pred.post_jump.data() + static_cast<std::size_t>(k) * d;
    fwd.pre_jump.emplace_back(pre, pre + d);
    fwd.post_jump.emplace_back(post, post + d);
  }
  return detail::build_loss(eng, fwd, path, obs)[0];
}

}  // namespace njode
