#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "spectrack/error.hpp"
#include "spectrack/metrics.hpp"

using namespace spectrack;

TEST(Iou, HandCases) {
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {5, 0, 10, 10}), 50.0 / 150.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {20, 20, 5, 5}), 0.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {10, 0, 10, 10}), 0.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 0, 0}, {0, 0, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 4, 4}, {1, 1, 2, 2}), 4.0 / 16.0);
}

TEST(Iou, SymmetricAndBounded) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 50);
  for (int i = 0; i < 500; ++i) {
    const Box a{u(rng), u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng), u(rng)};
    const double v = iou(a, b);
    EXPECT_DOUBLE_EQ(v, iou(b, a));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(CenterError, HandCases) {
  EXPECT_DOUBLE_EQ(center_error({0, 0, 10, 10}, {3, 4, 10, 10}), 5.0);
  EXPECT_DOUBLE_EQ(center_error({0, 0, 10, 10}, {-5, -5, 20, 20}), 0.0);
}

TEST(SuccessAuc, HandCases) {
  const std::vector<double> ones(7, 1.0);
  EXPECT_DOUBLE_EQ(success_auc(ones).summary, 1.0);
  const std::vector<double> half{0.5};
  EXPECT_DOUBLE_EQ(success_auc(half).summary, 26.0 / 51.0);
  const std::vector<double> zeros(3, 0.0);
  EXPECT_DOUBLE_EQ(success_auc(zeros).summary, 1.0 / 51.0);
  const MetricCurve c = success_auc(half);
  ASSERT_EQ(c.thresholds.size(), 51u);
  EXPECT_DOUBLE_EQ(c.thresholds[25], 0.5);
  EXPECT_DOUBLE_EQ(c.values[25], 1.0);
  EXPECT_DOUBLE_EQ(c.values[26], 0.0);
}

TEST(DpAt, HandCases) {
  const std::vector<double> e{0, 10, 30};
  EXPECT_DOUBLE_EQ(dp_at(e), 2.0 / 3.0);
  const std::vector<double> edge{20.0};
  EXPECT_DOUBLE_EQ(dp_at(edge), 1.0);
  EXPECT_DOUBLE_EQ(dp_at(e, 5.0), 1.0 / 3.0);
}

TEST(Metrics, EmptyInputsRejected) {
  EXPECT_THROW(success_auc({}), DomainError);
  EXPECT_THROW(dp_at({}), DomainError);
}

TEST(Metrics, NonFiniteInputsRejected) {
  const std::vector<double> bad{0.5, std::nan("")};
  EXPECT_THROW(success_auc(bad), DomainError);
  EXPECT_THROW(dp_at(bad), DomainError);
}

TEST(Metrics, MatchBruteForceOnRandomInstances) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> len(1, 40), grid(0, 50);
  std::uniform_real_distribution<double> u(0.0, 1.0), px(0.0, 60.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> ious(len(rng)), errs(len(rng));
    // Mix exact threshold values in so ties at k/50 are exercised.
    for (auto& v : ious) v = (trial % 2) ? grid(rng) / 50.0 : u(rng);
    for (auto& v : errs) v = (trial % 3 == 0) ? std::floor(px(rng)) : px(rng);
    EXPECT_NEAR(success_auc(ious).summary, oracle::brute_auc(ious), 1e-12);
    EXPECT_NEAR(dp_at(errs), oracle::brute_dp(errs, 20.0), 1e-12);
  }
}

TEST(Metrics, CurvesAreMonotoneAndOrderInvariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0), px(0.0, 80.0);
  std::vector<double> ious(60), errs(60);
  for (auto& v : ious) v = u(rng);
  for (auto& v : errs) v = px(rng);
  const MetricCurve s = success_auc(ious);
  const MetricCurve p = precision_curve(errs);
  for (std::size_t i = 1; i < s.values.size(); ++i) EXPECT_LE(s.values[i], s.values[i - 1]);
  for (std::size_t i = 1; i < p.values.size(); ++i) EXPECT_GE(p.values[i], p.values[i - 1]);
  EXPECT_EQ(p.thresholds.size(), 51u);
  EXPECT_DOUBLE_EQ(p.summary, dp_at(errs));
  std::shuffle(ious.begin(), ious.end(), rng);
  std::shuffle(errs.begin(), errs.end(), rng);
  EXPECT_EQ(success_auc(ious).summary, s.summary);
  EXPECT_EQ(dp_at(errs), p.summary);
}

TEST(EmitPlot, CsvHasOneRowPerThresholdAndRoundTrips) {
  oracle::TempDir dir("plot");
  const std::vector<double> ious{0.1, 0.45, 0.9, 1.0};
  std::vector<MetricCurve> curves{success_auc(ious)};
  curves[0].name = "content";
  curves.push_back(success_auc(std::vector<double>{0.3, 0.3}));
  curves[1].name = "alpha1";
  emit_plot(curves, dir.path() / "success", "Success");
  std::ifstream in(dir.path() / "success.csv");
  std::string line;
  std::size_t lines = 0;
  std::getline(in, line);
  EXPECT_EQ(line, "curve,threshold,value");
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 2u * 51u);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "success.svg"));

  const auto back = read_curves_csv(dir.path() / "success.csv");
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t c = 0; c < 2; ++c) {
    EXPECT_EQ(back[c].name, curves[c].name);
    EXPECT_EQ(back[c].thresholds, curves[c].thresholds);
    EXPECT_EQ(back[c].values, curves[c].values);
  }
}

TEST(EmitPlot, SvgMentionsEveryCurve) {
  oracle::TempDir dir("svg");
  std::vector<MetricCurve> curves{precision_curve(std::vector<double>{1, 30})};
  curves[0].name = "VIS";
  emit_plot(curves, dir.path() / "precision", "Precision");
  std::ifstream in(dir.path() / "precision.svg");
  const std::string svg((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("VIS"), std::string::npos);
  EXPECT_NE(svg.find("Precision"), std::string::npos);
}

TEST(EmitPlot, EmptyCurveListRejected) {
  oracle::TempDir dir("empty");
  EXPECT_THROW(emit_plot({}, dir.path() / "x"), DomainError);
}

TEST(Results, JsonRoundTrip) {
  oracle::TempDir dir("result");
  const TrackingResult r{"seq_001", "NIR", {{1.5, 2.25, 10, 12}, {0.1, 0.2, 0.3, 0.4}}};
  save_result(r, dir.path() / "r.json");
  const TrackingResult back = load_result(dir.path() / "r.json");
  EXPECT_EQ(back.sequence, r.sequence);
  EXPECT_EQ(back.modality, r.modality);
  EXPECT_EQ(back.boxes, r.boxes);
  EXPECT_THROW(result_from_json(nlohmann::json{{"sequence", "a"}}), ParseError);
}

TEST(Results, OracleScoresPerfectly) {
  const std::vector<Box> gt{{10, 10, 20, 20}, {12, 11, 20, 20}, {14, 13, 19, 21}};
  const SequenceScore s = score_sequence({"s", "VIS", gt}, gt);
  EXPECT_DOUBLE_EQ(s.auc, 1.0);
  EXPECT_DOUBLE_EQ(s.dp20, 1.0);
  EXPECT_DOUBLE_EQ(s.mean_iou, 1.0);
  EXPECT_THROW(score_sequence({"s", "VIS", {gt[0]}}, gt), DimensionError);
}
