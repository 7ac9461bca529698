#include <gtest/gtest.h>

#include "radlabel/classify.hpp"
#include "radlabel/synth.hpp"

using namespace radlabel;
using namespace radlabel::classify;
using labels::LabelOutcome;

namespace {

SynthDataset dataset(double corruption = 0.2) {
  SynthOptions o;
  o.num_exams = 600;
  o.corruption_rate = corruption;
  o.seed = 3;
  return synth_dataset(o);
}

double gold_agreement(const eval::PredictionSet& p, const labels::LabelTable& gold, std::size_t l,
                      const std::set<std::string>& units) {
  std::size_t ok = 0, n = 0;
  for (const auto& u : gold.units) {
    if (!units.count(u.unit_id)) continue;
    ++n;
    ok += p.find(u.unit_id, gold.names[l])->predicted == (u.outcomes[l] == LabelOutcome::True);
  }
  return static_cast<double>(ok) / static_cast<double>(n);
}

}  // namespace

TEST(Features, TsvRoundTripAndValidation) {
  FeatureSet f{2, {{"i1", {0.5, -1.25}}, {"i2", {3.0, 1e-9}}}};
  const auto back = parse_features_tsv(render_features_tsv(f), "f.tsv");
  EXPECT_EQ(back.dim, 2u);
  EXPECT_EQ(back.rows[1].values, f.rows[1].values);
  FeatureSet bad{2, {{"i1", {0.5}}}};
  EXPECT_THROW(bad.validate(), Error);
  FeatureSet dup{1, {{"i1", {0.5}}, {"i1", {1.0}}}};
  EXPECT_THROW(dup.validate(), Error);
}

TEST(Decision, HalfIsFalse) {
  EXPECT_FALSE(decide(0.5));
  EXPECT_TRUE(decide(0.5000001));
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  EXPECT_GT(sigmoid(800.0), 0.999);
  EXPECT_LT(sigmoid(-800.0), 1e-300);
}

TEST(Training, LearnsPlantedSignalDespiteCorruptedLabels) {
  const auto d = dataset();
  const auto split = labels::split_dataset(
      [&] {
        std::vector<std::string> ids;
        for (const auto& r : d.features.rows) ids.push_back(r.image_id);
        return ids;
      }(),
      {}, 7, &d.exam_of);
  const auto model = train_reference(d.features, d.weak, split, {});
  EXPECT_TRUE(model.skipped.empty());
  const auto preds = predict(model, d.features);
  const auto test = split.members(labels::Split::test);
  const std::set<std::string> test_set(test.begin(), test.end());
  for (std::size_t l = 0; l < d.gold.names.size(); ++l) EXPECT_GT(gold_agreement(preds, d.gold, l, test_set), 0.7);
  for (const auto& m : model.labels) {
    ASSERT_EQ(m.history.size(), 30u);
    EXPECT_LT(m.history.back().train_loss, m.history.front().train_loss);
    EXPECT_TRUE(m.history.back().validation_accuracy.has_value());
  }
}

TEST(Training, IsDeterministicAndSkipsAllMissingLabels) {
  auto d = dataset();
  for (auto& u : d.weak.units) u.outcomes[1] = LabelOutcome::Missing;
  std::vector<std::string> ids;
  for (const auto& r : d.features.rows) ids.push_back(r.image_id);
  const auto split = labels::split_dataset(ids, {}, 7);
  const auto a = train_reference(d.features, d.weak, split, {});
  const auto b = train_reference(d.features, d.weak, split, {});
  ASSERT_EQ(a.labels.size(), 2u);
  EXPECT_EQ(a.skipped, (std::vector<std::string>{"label_1"}));
  EXPECT_EQ(a.warnings.size(), 1u);
  EXPECT_EQ(a.labels[0].weights, b.labels[0].weights);
  EXPECT_EQ(predict(a, d.features), predict(b, d.features));
}

TEST(Training, MissingUnitsNeverContribute) {
  // Flipping the features of MISSING-labeled units must not change the model.
  auto d = dataset();
  std::vector<std::string> ids;
  for (const auto& r : d.features.rows) ids.push_back(r.image_id);
  const auto split = labels::split_dataset(ids, {}, 7);
  labels::LabelTable one{{d.weak.names[0]}, {}};
  for (const auto& u : d.weak.units) one.units.push_back({u.unit_id, {u.outcomes[0]}});
  const auto before = train_reference(d.features, one, split, {});
  auto changed = d.features;
  for (std::size_t i = 0; i < one.units.size(); ++i)
    if (one.units[i].outcomes[0] == LabelOutcome::Missing)
      for (auto& v : changed.rows[i].values) v = 100.0;
  const auto after = train_reference(changed, one, split, {});
  EXPECT_EQ(before.labels[0].weights, after.labels[0].weights);
  EXPECT_EQ(before.labels[0].bias, after.labels[0].bias);
}

TEST(Training, LabelWithNoTrainUnitsIsADataError) {
  auto d = dataset();
  std::vector<std::string> ids;
  for (const auto& r : d.features.rows) ids.push_back(r.image_id);
  const auto split = labels::split_dataset(ids, {}, 7);
  for (auto& u : d.weak.units)
    if (split.by_image.at(u.unit_id) == labels::Split::train) u.outcomes[0] = LabelOutcome::Missing;
  EXPECT_THROW(train_reference(d.features, d.weak, split, {}), DataError);
}

TEST(ClassifierPersistence, ModelJsonRoundTripPredictsIdentically) {
  const auto d = dataset();
  std::vector<std::string> ids;
  for (const auto& r : d.features.rows) ids.push_back(r.image_id);
  const auto model = train_reference(d.features, d.weak, labels::split_dataset(ids, {}, 2), {});
  const auto back = model_from_json(nlohmann::json::parse(model_to_json(model).dump()), "m.json");
  EXPECT_EQ(predict(back, d.features), predict(model, d.features));
  FeatureSet narrow{1, {{"x", {0.0}}}};
  EXPECT_THROW(predict(model, narrow), ValidationError);
}

TEST(SyntheticStudy, ReportsImagesAndFeaturesAgree) {
  synth::ReportOptions o;
  o.num_exams = 200;
  const auto s = synth::generate_study(o);
  EXPECT_EQ(s.reports.size(), 200u);
  EXPECT_EQ(s.gold.units.size(), s.features.rows.size());
  std::size_t images = 0;
  for (const auto& r : s.reports) {
    EXPECT_GE(r.image_ids.size(), o.min_images);
    EXPECT_LE(r.image_ids.size(), o.max_images);
    images += r.image_ids.size();
  }
  EXPECT_EQ(images, s.features.rows.size());
  const auto again = synth::generate_study(o);
  EXPECT_EQ(again.reports.back().text, s.reports.back().text);
  const auto manifest = synth::parse_manifest(synth::manifest_json(s, {}).dump(), "m");
  EXPECT_EQ(manifest.size(), o.num_labels);
  EXPECT_EQ(manifest[0].positive, s.findings[0].positive);
}

TEST(SyntheticStudy, FindingWordGroupsStayDisjointAfterStemming) {
  const auto st = Stemmer::swedish();
  NormalizationRules rules;
  rules.finalize();
  std::map<std::string, std::string> owner;
  for (const auto& f : synth::default_findings())
    for (const auto* group : {&f.positive, &f.negative})
      for (const auto& w : *group)
        for (const auto& t : preprocess_text(w, rules, &st)) {
          auto [it, fresh] = owner.emplace(t, f.label + (group == &f.positive ? "+" : "-"));
          EXPECT_TRUE(fresh) << t << " shared by " << it->second << " and " << f.label;
        }
  for (const auto& w : synth::default_filler())
    for (const auto& t : preprocess_text(w, rules, &st)) EXPECT_FALSE(owner.count(t)) << t;
}
