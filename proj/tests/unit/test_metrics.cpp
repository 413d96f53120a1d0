#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "mono3d/metrics.hpp"

using namespace mono3d;

namespace {

QueryResult with_iou(double iou, double err = 0.0) {
  QueryResult r;
  r.iou = iou;
  r.depth_error = r.length_error = r.width_error = r.height_error = err;
  return r;
}

}  // namespace

TEST(ScoreQuery, PerfectPrediction) {
  OrientedBox3D b{Vec3(1, 2, 10), Vec3(2, 1, 1.5), Mat3::Identity()};
  const auto r = score_query(b, b, "q");
  EXPECT_NEAR(r.iou, 1.0, 1e-12);
  EXPECT_EQ(r.depth_error, 0.0);
  EXPECT_EQ(r.length_error + r.width_error + r.height_error, 0.0);
  EXPECT_EQ(r.query_id, "q");
}

TEST(ScoreQuery, DepthAndDimensionErrors) {
  OrientedBox3D gt{Vec3(1, 2, 10), Vec3(2, 1, 1), Mat3::Identity()};
  OrientedBox3D pred = gt;
  pred.center.z() = 12;
  EXPECT_DOUBLE_EQ(score_query(pred, gt, "q").depth_error, 2.0);
  pred.center = Vec3(4, 6, 10);
  EXPECT_DOUBLE_EQ(score_query(pred, gt, "q").depth_error, 0.0);
  EXPECT_DOUBLE_EQ(score_query(pred, gt, "q", DepthErrorKind::Euclidean).depth_error, 5.0);
  pred = gt;
  pred.dims = Vec3(1.5, 1, 1.2);
  const auto r = score_query(pred, gt, "q");
  EXPECT_DOUBLE_EQ(r.length_error, 0.5);
  EXPECT_DOUBLE_EQ(r.width_error, 0.0);
  EXPECT_NEAR(r.height_error, 0.2, 1e-15);
}

TEST(Aggregate, FixtureCounts) {
  const std::vector<QueryResult> rs{with_iou(0.6), with_iou(0.3), with_iou(0.2), with_iou(0.0)};
  const auto m = aggregate(rs);
  EXPECT_EQ(m.acc_25, 0.5);
  EXPECT_EQ(m.acc_50, 0.25);
  EXPECT_EQ(m.count, 4u);
  EXPECT_EQ(format_report(m).substr(0, 26), "Acc@0.25 50.0 | Acc@0.5 25");
}

TEST(Aggregate, ThresholdsAreStrict) {
  const std::vector<QueryResult> rs{with_iou(0.25), with_iou(0.5)};
  const auto m = aggregate(rs);
  EXPECT_EQ(m.acc_25, 0.5);
  EXPECT_EQ(m.acc_50, 0.0);
}

TEST(Aggregate, SinglePerfect) {
  const std::vector<QueryResult> rs{with_iou(1.0)};
  const auto m = aggregate(rs);
  EXPECT_EQ(m.acc_25, 1.0);
  EXPECT_EQ(m.acc_50, 1.0);
  EXPECT_EQ(*m.mean_depth_error, 0.0);
}

TEST(Aggregate, MissingPredictionsCountOnlyInAccuracy) {
  const std::vector<QueryResult> rs{with_iou(0.9, 2.0), QueryResult::missing_prediction("gone")};
  const auto m = aggregate(rs);
  EXPECT_EQ(m.acc_50, 0.5);
  EXPECT_EQ(*m.mean_depth_error, 2.0);
  const std::vector<QueryResult> only_missing{QueryResult::missing_prediction("x")};
  EXPECT_FALSE(aggregate(only_missing).mean_depth_error.has_value());
}

TEST(Aggregate, PermutationInvarianceAndMonotonicity) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<QueryResult> rs;
  for (int i = 0; i < 50; ++i) rs.push_back(with_iou(u(rng), u(rng)));
  const auto base = aggregate(rs);
  EXPECT_LE(base.acc_50, base.acc_25);
  auto shuffled = rs;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto perm = aggregate(shuffled);
  EXPECT_EQ(perm.acc_25, base.acc_25);
  EXPECT_EQ(perm.acc_50, base.acc_50);
  EXPECT_NEAR(*perm.mean_depth_error, *base.mean_depth_error, 1e-15);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    auto better = rs;
    better[i].iou = std::min(1.0, better[i].iou + 0.3);
    const auto m = aggregate(better);
    EXPECT_GE(m.acc_25, base.acc_25);
    EXPECT_GE(m.acc_50, base.acc_50);
  }
}

TEST(Format, ColumnOrderAndValues) {
  const std::vector<QueryResult> rs{with_iou(0.6, 1.0), with_iou(0.3, 2.0), with_iou(0.2, 3.0), with_iou(0.0, 4.0)};
  EXPECT_EQ(format_report(aggregate(rs)),
            "Acc@0.25 50.0 | Acc@0.5 25.0 | DepthError 2.50 | LengthError 2.50 | WidthError 2.50 | "
            "HeightError 2.50 | count 4");
}

TEST(Format, EmptyReport) {
  const auto m = aggregate(std::span<const QueryResult>{});
  EXPECT_EQ(m.count, 0u);
  const std::string text = format_report(m);
  EXPECT_NE(text.find("count 0"), std::string::npos);
  EXPECT_NE(text.find("DepthError  |"), std::string::npos);
  EXPECT_NE(report_to_json(m).find("\"mean_depth_error\":null"), std::string::npos);
}

TEST(Format, JsonKeys) {
  const std::vector<QueryResult> rs{with_iou(0.6, 1.0)};
  EXPECT_EQ(report_to_json(aggregate(rs)),
            "{\"acc_25\":1,\"acc_50\":1,\"mean_depth_error\":1,\"mean_length_error\":1,"
            "\"mean_width_error\":1,\"mean_height_error\":1,\"count\":1}");
}
