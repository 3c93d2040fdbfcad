#include <benchmark/benchmark.h>

#include "handtrack/energy.hpp"
#include "handtrack/localization.hpp"
#include "handtrack/optimizer.hpp"
#include "handtrack/synth.hpp"

namespace {

using namespace handtrack;

const SynthSequence& sequence() {
  static const SynthSequence seq = [] {
    const Skeleton sk = default_skeleton();
    SynthConfig cfg = default_synth_config(sk, 1);
    cfg.sequence_length = 200;
    cfg.occlusion_rate = 0.1;
    return generate_sequence(sk, Camera{}, cfg);
  }();
  return seq;
}

void BM_ForwardKinematics(benchmark::State& state) {
  const Skeleton sk = default_skeleton();
  const Pose pose = sequence().ground_truth[10].pose;
  for (auto _ : state) benchmark::DoNotOptimize(forward_kinematics(sk, pose));
}
BENCHMARK(BM_ForwardKinematics);

void BM_ForwardKinematicsWithJacobian(benchmark::State& state) {
  const Skeleton sk = default_skeleton();
  const Pose pose = sequence().ground_truth[10].pose;
  for (auto _ : state) benchmark::DoNotOptimize(forward_kinematics_with_jacobian(sk, pose));
}
BENCHMARK(BM_ForwardKinematicsWithJacobian);

void BM_Energy(benchmark::State& state) {
  const Skeleton sk = default_skeleton();
  const auto& seq = sequence();
  const FittingTargets targets = FittingTargets::from_observation(seq.observations[10]);
  TrackerState history;
  history.theta_prev = seq.ground_truth[9].pose;
  history.theta_prev2 = seq.ground_truth[8].pose;
  history.history = 2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(energy(sk, seq.ground_truth[9].pose, targets, history, Camera{}, EnergyWeights{}));
  }
}
BENCHMARK(BM_Energy);

void BM_UpdateRoot(benchmark::State& state) {
  const auto& seq = sequence();
  LocalizerState s;
  size_t t = 0;
  for (auto _ : state) {
    s = update_root(s, seq.observations[t].root_heatmap).state;
    t = (t + 1) % seq.observations.size();
  }
}
BENCHMARK(BM_UpdateRoot);

void BM_TrackFrame(benchmark::State& state) {
  const Skeleton sk = default_skeleton();
  const auto& seq = sequence();
  DescentOptions opts;
  opts.conditioning = static_cast<Conditioning>(state.range(0));
  TrackerState s;
  size_t t = 0;
  for (auto _ : state) {
    const TrackResult r = track_frame(sk, seq.observations[t], s, Camera{}, EnergyWeights{}, opts);
    s = r.state;
    if (++t == seq.observations.size()) {
      t = 0;
      s = TrackerState{};
    }
  }
}
BENCHMARK(BM_TrackFrame)
    ->Arg(static_cast<int>(Conditioning::kGaussNewton))
    ->Arg(static_cast<int>(Conditioning::kFixedScales))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
