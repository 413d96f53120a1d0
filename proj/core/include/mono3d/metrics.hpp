#pragma once

#include <optional>
#include <span>
#include <string>

#include "mono3d/box3d.hpp"

namespace mono3d {

struct QueryResult {
  std::string query_id;
  double iou = 0.0;
  double depth_error = 0.0;
  double length_error = 0.0;
  double width_error = 0.0;
  double height_error = 0.0;
  // A ground-truth query with no prediction: iou 0, counted in the accuracy
  // denominators, excluded from error means.
  bool missing = false;

  static QueryResult missing_prediction(std::string query_id);
};

struct MetricReport {
  double acc_25 = 0.0;
  double acc_50 = 0.0;
  std::optional<double> mean_depth_error;
  std::optional<double> mean_length_error;
  std::optional<double> mean_width_error;
  std::optional<double> mean_height_error;
  std::size_t count = 0;
};

enum class DepthErrorKind {
  AxisZ,      // |pred.Z - gt.Z|
  Euclidean,  // |pred.center - gt.center|
};

inline constexpr double kAccThresholdLoose = 0.25;
inline constexpr double kAccThresholdStrict = 0.5;

QueryResult score_query(const OrientedBox3D& pred, const OrientedBox3D& gt, std::string query_id,
                        DepthErrorKind depth_kind = DepthErrorKind::AxisZ);

/// Accuracy uses strict "IoU exceeds threshold" comparisons.
MetricReport aggregate(std::span<const QueryResult> results);

/// One-line table: Acc@0.25 | Acc@0.5 | DepthError | LengthError | WidthError | HeightError | count.
/// Accuracies are percentages with one decimal, errors meters with two.
std::string format_report(const MetricReport& r);

/// {acc_25, acc_50, mean_depth_error, ..., count}; absent errors are null.
std::string report_to_json(const MetricReport& r);

}  // namespace mono3d
