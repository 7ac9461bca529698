#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "radlabel/lda.hpp"
#include "radlabel/regress.hpp"
#include "radlabel/topics.hpp"

using namespace radlabel;
using namespace radlabel::topics;

namespace {

lda::TopicDistributions toy_distributions() {
  lda::TopicDistributions d{Matrix(3, 2), Matrix(2, 3)};
  const double theta[3][2] = {{0.9, 0.1}, {0.2, 0.8}, {0.5, 0.5}};
  const double phi[2][3] = {{0.6, 0.38, 0.02}, {0.1, 0.1, 0.8}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 2; ++c) d.theta(r, c) = theta[r][c];
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) d.phi(r, c) = phi[r][c];
  return d;
}

std::vector<ScoredTopic> scored(std::initializer_list<std::pair<int, const char*>> items) {
  std::vector<ScoredTopic> out;
  std::size_t t = 0;
  for (const auto& [s, d] : items) {
    out.push_back({t, {t + 1, d, s}});
    ++t;
  }
  return out;
}

/// Normal-equation solve by Gauss-Jordan elimination, independent of the QR path.
std::vector<double> normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const auto p = static_cast<std::size_t>(X.cols());
  std::vector<std::vector<double>> a(p, std::vector<double>(p + 1));
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j)
      for (Eigen::Index r = 0; r < X.rows(); ++r) a[i][j] += X(r, static_cast<Eigen::Index>(i)) * X(r, static_cast<Eigen::Index>(j));
    for (Eigen::Index r = 0; r < X.rows(); ++r) a[i][p] += X(r, static_cast<Eigen::Index>(i)) * y(r);
  }
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < p; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k <= p; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::vector<double> beta(p);
  for (std::size_t i = 0; i < p; ++i) beta[i] = a[i][p] / a[i][i];
  return beta;
}

}  // namespace

TEST(TopicView, WordsAboveThresholdAndDocsByTheta) {
  const auto d = toy_distributions();
  const auto v = build_topic_view(d, {"a", "b", "c"}, {"d0", "d1", "d2"}, 0, {0.03, 2});
  ASSERT_EQ(v.top_words.size(), 2u);
  EXPECT_EQ(v.top_words[0].first, "a");
  EXPECT_EQ(v.top_docs, (std::vector<std::string>{"d0", "d2"}));
  EXPECT_THROW(build_topic_view(d, {"a", "b", "c"}, {"d0", "d1", "d2"}, 5), ValidationError);
}

TEST(ReviewSheet, BlindingMapIsAPermutationAndRoundTrips) {
  const auto d = toy_distributions();
  std::vector<TopicView> views;
  for (std::size_t t = 0; t < 2; ++t) views.push_back(build_topic_view(d, {"a", "b", "c"}, {"d0", "d1", "d2"}, t));
  const auto sheet = export_review_sheet(views, {{"d0", "Fraktur i radius"}}, "small-sentences-both", ViewMode::both, 3);
  auto sorted = sheet.blinding_map;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(parse_blinding_tsv(render_blinding_tsv(sheet, "hdr"), "b"), sheet.blinding_map);

  const auto reviewer = render_reviewer_tsv(sheet, "sheet-01");
  EXPECT_EQ(reviewer.find("topic_id"), std::string::npos);
  EXPECT_EQ(reviewer.find("small"), std::string::npos);
  EXPECT_NE(reviewer.find("Fraktur i radius"), std::string::npos);
}

TEST(ReviewSheet, ViewControlsContent) {
  const auto d = toy_distributions();
  std::vector<TopicView> views{build_topic_view(d, {"a", "b", "c"}, {"d0", "d1", "d2"}, 0)};
  const auto words = export_review_sheet(views, {}, "m", ViewMode::words, 1);
  const auto docs = export_review_sheet(views, {}, "m", ViewMode::docs, 1);
  EXPECT_EQ(words.entries[0].content.find("documents:"), std::string::npos);
  EXPECT_EQ(docs.entries[0].content.find("words:"), std::string::npos);
}

TEST(ImportScores, JoinsToTopicIdsAndRejectsGaps) {
  const std::vector<std::size_t> map{4, 2, 7};
  const std::string filled = "sheet_position\tcontent\tdescription\tscore\n1\tx\tFraktur\t8\n2\tx\t\t0\n3\tx\tartros\t5\n";
  const auto s = import_scores(filled, "s.tsv", map);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].topic_id, 2u);
  EXPECT_EQ(s[0].score.score, 0);
  EXPECT_EQ(s[1].topic_id, 4u);
  EXPECT_EQ(s[1].score.description, "Fraktur");

  EXPECT_THROW(import_scores("sheet_position\tcontent\tdescription\tscore\n1\tx\ty\t8\n", "s", map), DataError);
  EXPECT_THROW(import_scores("sheet_position\tcontent\tdescription\tscore\n1\tx\ty\t11\n2\tx\ty\t1\n3\tx\ty\t1\n", "s", map),
               DataError);
  EXPECT_THROW(import_scores("sheet_position\tcontent\tdescription\tscore\n1\tx\ty\t1\n1\tx\ty\t1\n3\tx\ty\t1\n", "s", map),
               DataError);
}

TEST(Summaries, StatisticsAndUniqueLabels) {
  const auto s = summarize_model(scored({{8, "Fraktur"}, {6, " fraktur "}, {0, "noise"}, {4, "Artros"}}), 0.1,
                                 DocumentType::sentences, ViewMode::both);
  EXPECT_EQ(s.scaling_level, "Small");
  EXPECT_EQ(s.model_id, "small-sentences-both");
  EXPECT_DOUBLE_EQ(s.median, 5.0);
  EXPECT_DOUBLE_EQ(s.mean, 4.5);
  EXPECT_NEAR(s.sd, std::sqrt((12.25 + 2.25 + 20.25 + 0.25) / 3.0), 1e-12);
  EXPECT_NEAR(s.sem, s.sd / 2.0, 1e-12);
  EXPECT_EQ(s.unique_topic_labels, 2u);  // "noise" scored 0 does not count
}

TEST(Summaries, ModelIdRoundTrip) {
  for (double v : {0.01, 0.1, 1.0, 10.0, 0.5})
    for (auto dt : {DocumentType::report, DocumentType::sentences})
      for (auto vm : kAllViews) {
        const auto id = make_model_id(scaling_level_name(v), dt, vm);
        const auto s = parse_model_id(id);
        EXPECT_DOUBLE_EQ(s.scaling_value, v) << id;
        EXPECT_EQ(s.document_type, dt);
        EXPECT_EQ(s.view_mode, vm);
      }
  EXPECT_THROW(parse_model_id("huge-report-words"), DataError);
}

TEST(Summaries, ModelComparisonTableParsesWithLevelWarnings) {
  const auto t = parse_summaries_tsv(fixtures::kModelComparison, "table");
  ASSERT_EQ(t.rows.size(), 24u);
  ASSERT_EQ(t.warnings.size(), 2u);
  EXPECT_EQ(t.rows[13].scaling_level, "Tiny");
  EXPECT_DOUBLE_EQ(t.rows[13].scaling_value, 0.1);
  const auto again = parse_summaries_tsv(render_summaries_tsv(t.rows), "again");
  ASSERT_EQ(again.rows.size(), 24u);
  for (std::size_t i = 0; i < 24; ++i) {
    EXPECT_EQ(again.rows[i].mean, t.rows[i].mean);
    EXPECT_EQ(again.rows[i].unique_topic_labels, t.rows[i].unique_topic_labels);
  }
}

TEST(Ranking, MeanThenUniqueLabelsThenMedian) {
  std::vector<ModelSummary> rows(4);
  rows[0] = {"a", "Small", 0.1, DocumentType::report, ViewMode::both, 5, 6.0, 0, 0, 20, 0};
  rows[1] = {"b", "Small", 0.1, DocumentType::report, ViewMode::both, 5, 7.0, 0, 0, 10, 0};
  rows[2] = {"c", "Small", 0.1, DocumentType::report, ViewMode::both, 4, 6.0, 0, 0, 30, 0};
  rows[3] = {"d", "Small", 0.1, DocumentType::report, ViewMode::both, 6, 6.0, 0, 0, 20, 0};
  const auto r = rank_models(rows);
  EXPECT_EQ(r[0].model_id, "b");
  EXPECT_EQ(r[1].model_id, "c");
  EXPECT_EQ(r[2].model_id, "d");
  EXPECT_EQ(r[3].model_id, "a");
  const auto reference = rank_models(parse_summaries_tsv(fixtures::kModelComparison, "t").rows);
  EXPECT_EQ(reference.front().model_id, "small-sentences-both");
}

TEST(Regression, QrAgreesWithNormalEquations) {
  const auto rows = parse_summaries_tsv(fixtures::kModelComparison, "t").rows;
  const auto d = regress::encode_design(rows, regress::score_design());
  EXPECT_EQ(d.X.cols(), 8);
  const auto fit = regress::ols_fit(d);
  const auto beta = normal_equations(d.X, d.y);
  for (std::size_t j = 0; j < beta.size(); ++j) EXPECT_NEAR(fit.coefficients[j].estimate, beta[j], 1e-9);
}

TEST(Regression, SimpleLineIsExactAndIntervalsUseStudentT) {
  Eigen::MatrixXd X(4, 2);
  X << 1, 0, 1, 1, 1, 2, 1, 3;
  Eigen::VectorXd y(4);
  y << 1, 3, 5, 7.5;
  const auto f = regress::ols_fit(X, y, {"Intercept", "x"});
  // closed form: slope = Sxy / Sxx = 10.75 / 5, intercept = mean(y) - slope * mean(x)
  EXPECT_NEAR(f["x"].estimate, 2.15, 1e-12);
  EXPECT_NEAR(f["Intercept"].estimate, 0.9, 1e-12);
  const double t975_df2 = 4.302652729911275;
  EXPECT_NEAR(f["x"].ci_high - f["x"].estimate, t975_df2 * f["x"].std_error, 1e-9);
}

TEST(Regression, RefusesRankDeficientAndTooSmallDesigns) {
  Eigen::MatrixXd X(4, 3);
  X << 1, 1, 2, 1, 2, 4, 1, 3, 6, 1, 4, 8;
  Eigen::VectorXd y(4);
  y << 1, 2, 3, 4;
  EXPECT_THROW(regress::ols_fit(X, y, {"a", "b", "c"}), ValidationError);
  auto rows = parse_summaries_tsv(fixtures::kModelComparison, "t").rows;
  rows.resize(5);
  EXPECT_THROW(regress::crude_and_adjusted(rows, regress::score_design()), ValidationError);
}

TEST(Regression, UnknownFactorLevelIsADataError) {
  auto rows = parse_summaries_tsv(fixtures::kModelComparison, "t").rows;
  rows[0].scaling_level = "Huge";
  EXPECT_THROW(regress::encode_design(rows, regress::score_design()), DataError);
}

TEST(Regression, RenderedTableHasReferenceRows) {
  const auto rows = parse_summaries_tsv(fixtures::kModelComparison, "t").rows;
  const auto table = regress::crude_and_adjusted(rows, regress::score_design());
  const auto tsv = regress::render_table_tsv(table);
  EXPECT_NE(tsv.find("Large (10)\t0.00\tReference\t0.00\tReference"), std::string::npos);
  EXPECT_NE(tsv.find("Intercept\t4.90\t4.28 to 5.51\t0.40\t-1.62 to 2.41"), std::string::npos);
}
