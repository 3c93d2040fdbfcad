#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "handtrack/camera.hpp"
#include "handtrack/energy.hpp"
#include "handtrack/observation.hpp"
#include "handtrack/optimizer.hpp"
#include "handtrack/skeleton.hpp"

namespace handtrack {

enum class JointSubset { kAll, kFingertips };

std::vector<int> subset_joints(JointSubset subset);

/// Mean Euclidean distance over the listed joints, mm.
double joint_error_3d(const JointPositions& pred, const JointPositions& truth,
                      std::span<const int> joints);
double joint_error_3d(const JointPositions& pred, const JointPositions& truth, JointSubset subset);

/// Mean image-plane distance of the projected joints, px.
double joint_error_2d(const Camera& camera, const JointPositions& pred, const JointPositions& truth,
                      JointSubset subset);

struct CurvePoint {
  double threshold = 0.0;
  double fraction = 0.0;
};

/// Fraction of errors <= each threshold. Thresholds must be ascending.
std::vector<CurvePoint> threshold_curve(std::span<const double> errors,
                                        std::span<const double> thresholds);

struct FrameErrors {
  int frame = 0;
  double mean_3d_mm = 0.0;
  double mean_2d_px = 0.0;
  double fingertip_3d_mm = 0.0;
};

struct SummaryStats {
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;
};

SummaryStats summarize(std::span<const double> values);

struct MetricReport {
  std::vector<FrameErrors> per_frame;
  std::vector<CurvePoint> curve_3d;  // thresholds in mm, on per-frame mean 3D error
  std::vector<CurvePoint> curve_2d;  // thresholds in px, on per-frame mean 2D error
  SummaryStats summary_3d;
  SummaryStats summary_2d;
  SummaryStats summary_fingertip;
};

std::vector<double> default_thresholds_mm();
std::vector<double> default_thresholds_px();

MetricReport evaluate_sequence(const Camera& camera, std::span<const JointPositions> predicted,
                               std::span<const JointPositions> truth);

/// Mean frame-to-frame displacement over all joints, mm.
double mean_jitter(std::span<const JointPositions> sequence);

enum class Variant { kFull, k3dOnly, k2dOnly, kRawPredictions };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);
std::vector<Variant> all_variants();

EnergyWeights weights_for(Variant variant, const EnergyWeights& full);

/// Per-frame joint positions produced by one variant over a sequence.
std::vector<JointPositions> run_variant(const Skeleton& skeleton, const Camera& camera,
                                        std::span<const Observation> observations,
                                        const EnergyWeights& weights, Variant variant,
                                        const DescentOptions& options = {});

struct AblationRow {
  Variant variant = Variant::kFull;
  double fingertip_error_mm = 0.0;
  double joint_error_mm = 0.0;
  double jitter_mm = 0.0;
};

/// Variants run concurrently; rows come back in the order of `variants`.
std::vector<AblationRow> ablation_report(const Skeleton& skeleton, const Camera& camera,
                                         std::span<const Observation> observations,
                                         std::span<const JointPositions> truth,
                                         const EnergyWeights& weights,
                                         std::span<const Variant> variants,
                                         const DescentOptions& options = {});

void write_per_frame_csv(const std::filesystem::path& path, const MetricReport& report);
void write_curve_csv(const std::filesystem::path& path, const MetricReport& report);
void write_summary_csv(const std::filesystem::path& path, const MetricReport& report);
void write_ablation_csv(const std::filesystem::path& path, const std::string& sequence,
                        std::span<const AblationRow> rows);

}  // namespace handtrack
