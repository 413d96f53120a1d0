#include "mono3d/metrics.hpp"

#include <cmath>

#include <fmt/format.h>

namespace mono3d {

QueryResult QueryResult::missing_prediction(std::string query_id) {
  QueryResult r;
  r.query_id = std::move(query_id);
  r.missing = true;
  return r;
}

QueryResult score_query(const OrientedBox3D& pred, const OrientedBox3D& gt, std::string query_id,
                        DepthErrorKind depth_kind) {
  QueryResult r;
  r.query_id = std::move(query_id);
  r.iou = iou3d(pred, gt);
  r.depth_error = depth_kind == DepthErrorKind::AxisZ ? std::abs(pred.center.z() - gt.center.z())
                                                      : (pred.center - gt.center).norm();
  r.length_error = std::abs(pred.dims.x() - gt.dims.x());
  r.width_error = std::abs(pred.dims.y() - gt.dims.y());
  r.height_error = std::abs(pred.dims.z() - gt.dims.z());
  return r;
}

MetricReport aggregate(std::span<const QueryResult> results) {
  MetricReport report;
  report.count = results.size();
  if (results.empty()) return report;

  std::size_t hit_25 = 0, hit_50 = 0, scored = 0;
  double depth = 0.0, length = 0.0, width = 0.0, height = 0.0;
  for (const auto& r : results) {
    hit_25 += r.iou > kAccThresholdLoose;
    hit_50 += r.iou > kAccThresholdStrict;
    if (r.missing) continue;
    ++scored;
    depth += r.depth_error;
    length += r.length_error;
    width += r.width_error;
    height += r.height_error;
  }
  const double n = static_cast<double>(results.size());
  report.acc_25 = static_cast<double>(hit_25) / n;
  report.acc_50 = static_cast<double>(hit_50) / n;
  if (scored > 0) {
    const double s = static_cast<double>(scored);
    report.mean_depth_error = depth / s;
    report.mean_length_error = length / s;
    report.mean_width_error = width / s;
    report.mean_height_error = height / s;
  }
  return report;
}

namespace {

std::string meters(const std::optional<double>& v) { return v ? fmt::format("{:.2f}", *v) : std::string(); }

std::string json_number(const std::optional<double>& v) { return v ? fmt::format("{:.17g}", *v) : "null"; }

}  // namespace

std::string format_report(const MetricReport& r) {
  return fmt::format("Acc@0.25 {:.1f} | Acc@0.5 {:.1f} | DepthError {} | LengthError {} | WidthError {} | "
                     "HeightError {} | count {}",
                     100.0 * r.acc_25, 100.0 * r.acc_50, meters(r.mean_depth_error), meters(r.mean_length_error),
                     meters(r.mean_width_error), meters(r.mean_height_error), r.count);
}

std::string report_to_json(const MetricReport& r) {
  return fmt::format(
      "{{\"acc_25\":{:.17g},\"acc_50\":{:.17g},\"mean_depth_error\":{},\"mean_length_error\":{},"
      "\"mean_width_error\":{},\"mean_height_error\":{},\"count\":{}}}",
      r.acc_25, r.acc_50, json_number(r.mean_depth_error), json_number(r.mean_length_error),
      json_number(r.mean_width_error), json_number(r.mean_height_error), r.count);
}

}  // namespace mono3d
