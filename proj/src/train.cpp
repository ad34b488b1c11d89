#include "njode/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "engine.hpp"
#include "njode/errors.hpp"
#include "njode/hash.hpp"
#include "njode/loss.hpp"
#include "njode/rng.hpp"

namespace njode {

namespace {

std::vector<double> observation_times(const PathSample& path, const ObservationSet& obs) {
  std::vector<double> times(static_cast<std::size_t>(obs.count()));
  for (int k = 0; k < obs.count(); ++k)
    times[static_cast<std::size_t>(k)] = path.times[static_cast<std::size_t>(obs.obs_indices[k])];
  return times;
}

void set_initial_only(ObservationSet& obs) {
  std::fill(obs.input_flags.begin(), obs.input_flags.end(), 0);
  obs.input_flags[0] = 1;
}

double mean_eval_loss(const ad::ParamStore& store, const ModelParams& mp,
                      const DatasetBundle& data, const std::vector<int>& indices,
                      bool initial_only) {
  if (indices.empty()) return std::numeric_limits<double>::quiet_NaN();
  detail::EvalEngine eng{store};
  double sum = 0.0;
  for (int idx : indices) {
    const PathSample& path = data.paths[static_cast<std::size_t>(idx)];
    ObservationSet obs = data.observations[static_cast<std::size_t>(idx)];
    std::fill(obs.input_flags.begin(), obs.input_flags.end(), 1);
    if (initial_only) set_initial_only(obs);
    auto fwd = detail::run_forward(eng, mp, path, obs, /*want_grid=*/false);
    sum += detail::build_loss(eng, fwd, path, obs)[0];
  }
  return sum / static_cast<double>(indices.size());
}

}  // namespace

std::uint64_t theta_fingerprint(const ad::ParamStore& store) {
  return fnv1a(store.theta.data(), store.theta.size() * sizeof(double));
}

double path_loss_grad(ad::ParamStore& store, const ModelParams& mp, const PathSample& path,
                      const ObservationSet& obs) {
  ad::Tape tape(&store);
  detail::TapeEngine eng{tape};
  auto fwd = detail::run_forward(eng, mp, path, obs, /*want_grid=*/false);
  const ad::Value loss = detail::build_loss(eng, fwd, path, obs);
  tape.backward(loss);
  return tape.scalar_data(loss);
}

TrainResult train_model(const DatasetBundle& data, const ModelConfig& model_cfg,
                        const TrainConfig& train_cfg, const EpochMetricHook& hook) {
  if (data.n_paths() == 0) throw ConfigError("train: empty dataset");
  if (data.train_idx.empty()) throw ConfigError("train: empty training split");
  if (train_cfg.epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (train_cfg.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (data.d != model_cfg.d) throw ConfigError("train: model d does not match dataset");

  TrainResult res;
  res.model = build_model(res.store, model_cfg);
  init_model(res.store, res.model, train_cfg.seed);
  ad::ParamStore& store = res.store;
  AdamState adam = adam_init(store.size());

  std::vector<double> best_theta = store.theta;
  TrainReport& rep = res.report;
  const int n_train = static_cast<int>(data.train_idx.size());

  ad::Tape tape(&store);
  detail::TapeEngine eng{tape};

  for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    const auto tic = std::chrono::steady_clock::now();
    const bool exp_gap = train_cfg.schedule.kind == ScheduleSpec::Kind::kExponentialGap;
    rep.p_used.push_back(exp_gap ? -1.0 : schedule_p(epoch, train_cfg.schedule));

    std::vector<int> order = data.train_idx;
    Rng shuffle_rng(derive_seed(train_cfg.seed, stream::kShuffle, static_cast<std::uint64_t>(epoch)));
    for (int i = n_train - 1; i > 0; --i) {
      const int j = static_cast<int>(shuffle_rng.next_u64() % static_cast<std::uint64_t>(i + 1));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    double loss_sum = 0.0;
    for (int start = 0; start < n_train; start += train_cfg.batch_size) {
      const int b = std::min(train_cfg.batch_size, n_train - start);
      store.zero_grad();
      for (int i = 0; i < b; ++i) {
        const int idx = order[static_cast<std::size_t>(start + i)];
        const PathSample& path = data.paths[static_cast<std::size_t>(idx)];
        ObservationSet obs = data.observations[static_cast<std::size_t>(idx)];
        if (!train_cfg.ungated_pipeline)
          obs.input_flags = draw_gating(
              train_cfg.schedule, epoch, observation_times(path, obs),
              derive_seed(train_cfg.seed, stream::kGating, static_cast<std::uint64_t>(epoch),
                          static_cast<std::uint64_t>(idx)));
        tape.reset();
        auto fwd = detail::run_forward(eng, res.model, path, obs, /*want_grid=*/false);
        ad::Value loss = detail::build_loss(eng, fwd, path, obs);
        const double lv = tape.scalar_data(loss);
        if (!std::isfinite(lv))
          throw TrainingError("train: non-finite loss at epoch " + std::to_string(epoch) +
                              ", path " + std::to_string(idx));
        loss_sum += lv;
        tape.backward(loss, 1.0 / static_cast<double>(b));
      }
      adam_step(store, adam, train_cfg.adam);
    }
    const double train_loss = loss_sum / static_cast<double>(n_train);
    double val_loss = mean_eval_loss(store, res.model, data, data.val_idx,
                                     train_cfg.val_initial_only);
    if (std::isnan(val_loss)) val_loss = train_loss;  // no validation split

    rep.train_loss.push_back(train_loss);
    rep.val_loss.push_back(val_loss);
    rep.metric.push_back(hook ? hook(store, res.model, epoch)
                              : std::numeric_limits<double>::quiet_NaN());
    rep.theta_fnv.push_back(theta_fingerprint(store));
    rep.seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count());
    rep.epochs_run = epoch + 1;

    if (val_loss < rep.best_val_loss) {
      rep.best_val_loss = val_loss;
      rep.best_epoch = epoch;
      best_theta = store.theta;
    }
    if (train_cfg.patience > 0 && epoch - rep.best_epoch >= train_cfg.patience) break;
  }

  store.theta = best_theta;
  return res;
}

}  // namespace njode
