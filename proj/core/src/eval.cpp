#include "handtrack/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>

#include "handtrack/error.hpp"

namespace handtrack {

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out.precision(9);
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (out.fail()) throw Error(ErrorCode::kIo, "failed writing '" + path.string() + "'");
}

}  // namespace

std::vector<int> subset_joints(JointSubset subset) {
  if (subset == JointSubset::kFingertips) {
    return {joint::kFingertips.begin(), joint::kFingertips.end()};
  }
  std::vector<int> all(kNumJoints);
  for (int j = 0; j < kNumJoints; ++j) all[j] = j;
  return all;
}

double joint_error_3d(const JointPositions& pred, const JointPositions& truth,
                      std::span<const int> joints) {
  if (joints.empty()) throw Error(ErrorCode::kInvalidInput, "joint_error_3d: empty joint subset");
  double sum = 0.0;
  for (int j : joints) {
    if (j < 0 || j >= kNumJoints) throw Error(ErrorCode::kInvalidInput, "joint_error_3d: bad joint index");
    sum += (pred.col(j) - truth.col(j)).norm();
  }
  return sum / static_cast<double>(joints.size());
}

double joint_error_3d(const JointPositions& pred, const JointPositions& truth, JointSubset subset) {
  const auto joints = subset_joints(subset);
  return joint_error_3d(pred, truth, joints);
}

double joint_error_2d(const Camera& camera, const JointPositions& pred, const JointPositions& truth,
                      JointSubset subset) {
  const auto joints = subset_joints(subset);
  double sum = 0.0;
  for (int j : joints) {
    // A prediction behind the camera has no image position.
    if (!(pred(2, j) > 0.0)) return std::numeric_limits<double>::infinity();
    sum += (project(camera, pred.col(j)) - project(camera, truth.col(j))).norm();
  }
  return sum / static_cast<double>(joints.size());
}

std::vector<CurvePoint> threshold_curve(std::span<const double> errors,
                                        std::span<const double> thresholds) {
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw Error(ErrorCode::kInvalidInput, "threshold_curve: thresholds must be ascending");
  }
  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<CurvePoint> curve;
  curve.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto n = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    const double frac = sorted.empty() ? 0.0 : static_cast<double>(n) / static_cast<double>(sorted.size());
    curve.push_back({t, frac});
  }
  return curve;
}

SummaryStats summarize(std::span<const double> values) {
  SummaryStats s;
  if (values.empty()) return s;
  std::vector<double> v(values.begin(), values.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(var / static_cast<double>(v.size()));
  std::sort(v.begin(), v.end());
  const size_t m = v.size() / 2;
  s.median = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  return s;
}

std::vector<double> default_thresholds_mm() {
  std::vector<double> t;
  for (int i = 0; i <= 100; i += 5) t.push_back(i);
  return t;
}

std::vector<double> default_thresholds_px() {
  std::vector<double> t;
  for (int i = 0; i <= 50; i += 2) t.push_back(i);
  return t;
}

MetricReport evaluate_sequence(const Camera& camera, std::span<const JointPositions> predicted,
                               std::span<const JointPositions> truth) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorCode::kInvalidInput, "evaluate_sequence: prediction and truth lengths differ");
  }
  MetricReport report;
  std::vector<double> e3, e2, etip;
  for (size_t t = 0; t < predicted.size(); ++t) {
    FrameErrors fe;
    fe.frame = static_cast<int>(t);
    fe.mean_3d_mm = joint_error_3d(predicted[t], truth[t], JointSubset::kAll);
    fe.fingertip_3d_mm = joint_error_3d(predicted[t], truth[t], JointSubset::kFingertips);
    fe.mean_2d_px = joint_error_2d(camera, predicted[t], truth[t], JointSubset::kAll);
    report.per_frame.push_back(fe);
    e3.push_back(fe.mean_3d_mm);
    e2.push_back(fe.mean_2d_px);
    etip.push_back(fe.fingertip_3d_mm);
  }
  const auto tmm = default_thresholds_mm();
  const auto tpx = default_thresholds_px();
  report.curve_3d = threshold_curve(e3, tmm);
  report.curve_2d = threshold_curve(e2, tpx);
  report.summary_3d = summarize(e3);
  report.summary_2d = summarize(e2);
  report.summary_fingertip = summarize(etip);
  return report;
}

double mean_jitter(std::span<const JointPositions> sequence) {
  if (sequence.size() < 2) return 0.0;
  double sum = 0.0;
  for (size_t t = 1; t < sequence.size(); ++t) {
    sum += (sequence[t] - sequence[t - 1]).colwise().norm().sum();
  }
  return sum / (static_cast<double>(sequence.size() - 1) * kNumJoints);
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::k3dOnly: return "3d-only";
    case Variant::k2dOnly: return "2d-only";
    case Variant::kRawPredictions: return "raw";
  }
  return "?";
}

Variant variant_from_string(const std::string& name) {
  for (Variant v : all_variants()) {
    if (to_string(v) == name) return v;
  }
  throw Error(ErrorCode::kInvalidInput, "unknown variant '" + name + "'");
}

std::vector<Variant> all_variants() {
  return {Variant::kFull, Variant::k3dOnly, Variant::k2dOnly, Variant::kRawPredictions};
}

EnergyWeights weights_for(Variant variant, const EnergyWeights& full) {
  EnergyWeights w = full;
  if (variant == Variant::k3dOnly) w.pos2d = 0.0;
  if (variant == Variant::k2dOnly) w.pos3d = 0.0;
  return w;
}

std::vector<JointPositions> run_variant(const Skeleton& skeleton, const Camera& camera,
                                        std::span<const Observation> observations,
                                        const EnergyWeights& weights, Variant variant,
                                        const DescentOptions& options) {
  std::vector<JointPositions> out;
  out.reserve(observations.size());
  if (variant == Variant::kRawPredictions) {
    for (const auto& obs : observations) out.push_back(obs.global_positions());
    return out;
  }
  const EnergyWeights w = weights_for(variant, weights);
  TrackerState state;
  for (const auto& obs : observations) {
    const TrackResult r = track_frame(skeleton, obs, state, camera, w, options);
    state = r.state;
    out.push_back(forward_kinematics(skeleton, r.pose));
  }
  return out;
}

std::vector<AblationRow> ablation_report(const Skeleton& skeleton, const Camera& camera,
                                         std::span<const Observation> observations,
                                         std::span<const JointPositions> truth,
                                         const EnergyWeights& weights,
                                         std::span<const Variant> variants,
                                         const DescentOptions& options) {
  if (observations.size() != truth.size()) {
    throw Error(ErrorCode::kInvalidInput, "ablation_report: observation and truth lengths differ");
  }
  std::vector<std::future<AblationRow>> jobs;
  for (Variant v : variants) {
    jobs.push_back(std::async(std::launch::async, [&, v] {
      const auto predicted = run_variant(skeleton, camera, observations, weights, v, options);
      AblationRow row;
      row.variant = v;
      double tip = 0.0, all = 0.0;
      for (size_t t = 0; t < predicted.size(); ++t) {
        tip += joint_error_3d(predicted[t], truth[t], JointSubset::kFingertips);
        all += joint_error_3d(predicted[t], truth[t], JointSubset::kAll);
      }
      const double n = std::max<double>(1.0, static_cast<double>(predicted.size()));
      row.fingertip_error_mm = tip / n;
      row.joint_error_mm = all / n;
      row.jitter_mm = mean_jitter(predicted);
      return row;
    }));
  }
  std::vector<AblationRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

void write_per_frame_csv(const std::filesystem::path& path, const MetricReport& report) {
  auto out = open_csv(path);
  out << "frame,mean_3d_mm,mean_2d_px,fingertip_3d_mm\n";
  for (const auto& f : report.per_frame) {
    out << f.frame << ',' << f.mean_3d_mm << ',' << f.mean_2d_px << ',' << f.fingertip_3d_mm << '\n';
  }
  finish(out, path);
}

void write_curve_csv(const std::filesystem::path& path, const MetricReport& report) {
  auto out = open_csv(path);
  out << "metric,threshold,fraction\n";
  for (const auto& p : report.curve_3d) out << "3d_mm," << p.threshold << ',' << p.fraction << '\n';
  for (const auto& p : report.curve_2d) out << "2d_px," << p.threshold << ',' << p.fraction << '\n';
  finish(out, path);
}

void write_summary_csv(const std::filesystem::path& path, const MetricReport& report) {
  auto out = open_csv(path);
  out << "metric,mean,median,std\n";
  auto row = [&](const char* name, const SummaryStats& s) {
    out << name << ',' << s.mean << ',' << s.median << ',' << s.stddev << '\n';
  };
  row("mean_3d_mm", report.summary_3d);
  row("mean_2d_px", report.summary_2d);
  row("fingertip_3d_mm", report.summary_fingertip);
  finish(out, path);
}

void write_ablation_csv(const std::filesystem::path& path, const std::string& sequence,
                        std::span<const AblationRow> rows) {
  auto out = open_csv(path);
  out << "sequence,variant,fingertip_error_mm,joint_error_mm,jitter_mm\n";
  for (const auto& r : rows) {
    out << sequence << ',' << to_string(r.variant) << ',' << r.fingertip_error_mm << ','
        << r.joint_error_mm << ',' << r.jitter_mm << '\n';
  }
  finish(out, path);
}

}  // namespace handtrack
