#pragma once

// Classifier evaluation against weak labels and against a reviewed gold
// standard. Base accuracy compares predictions with weak labels; true accuracy
// reweights the agreement (hit) and disagreement (miss) strata by gold-standard
// accuracies measured on a stratified review sample.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "radlabel/error.hpp"
#include "radlabel/labels.hpp"
#include "radlabel/random.hpp"
#include "radlabel/text.hpp"

namespace radlabel::eval {

using labels::LabelOutcome;

// -------------------------------------------------------------- predictions

inline constexpr std::string_view kPredictionsVersion = "# radlabel-predictions v1";

struct Prediction {
  bool predicted = false;
  std::optional<double> score;
  friend bool operator==(const Prediction&, const Prediction&) = default;
};

using PredictionKey = std::pair<std::string, std::string>;  // (image_id, label)

/// Predictions keyed (image_id, label), iterated in key order.
struct PredictionSet {
  std::vector<std::string> labels;
  std::map<PredictionKey, Prediction> items;

  const Prediction* find(const std::string& image, const std::string& label) const {
    auto it = items.find({image, label});
    return it == items.end() ? nullptr : &it->second;
  }
  friend bool operator==(const PredictionSet&, const PredictionSet&) = default;
};

inline std::string render_predictions_tsv(const PredictionSet& p, const std::vector<std::string>& extra_comments = {}) {
  std::string out(kPredictionsVersion);
  out += "\n";
  for (const auto& c : extra_comments) out += "# " + c + "\n";
  out += "image_id\tlabel\tpredicted\tscore\n";
  for (const auto& [key, pred] : p.items) {
    out += key.first + "\t" + key.second + "\t" + (pred.predicted ? "T" : "F") + "\t" +
           (pred.score ? text::format_shortest(*pred.score) : std::string()) + "\n";
  }
  return out;
}

/// Parses the versioned predictions file. The `score` column is optional.
/// With a non-empty `known_labels`, any other label is an error.
inline PredictionSet parse_predictions_tsv(std::string_view content, std::string_view source,
                                           const std::vector<std::string>& known_labels = {}) {
  auto table = text::parse_tsv(content, source);
  if (table.comments.empty() || text::trim(table.comments.front()) != kPredictionsVersion)
    throw DataError(std::string(source) + ": missing version line '" + std::string(kPredictionsVersion) + "'");
  const auto ii = table.column("image_id", source), li = table.column("label", source);
  const auto pi = table.column("predicted", source);
  std::optional<std::size_t> si;
  for (std::size_t i = 0; i < table.header.size(); ++i)
    if (table.header[i] == "score") si = i;
  const std::set<std::string> known(known_labels.begin(), known_labels.end());
  PredictionSet out;
  std::set<std::string> seen_labels;
  for (const auto& row : table.rows) {
    const auto at = text::where(source, row.line);
    const std::string image(text::trim(row.fields[ii])), label(text::trim(row.fields[li]));
    if (image.empty() || label.empty()) throw DataError(at + "empty image_id or label");
    if (!known.empty() && !known.count(label))
      throw DataError(at + "unknown label '" + label + "' (known: " + text::join(known_labels, ", ") + ")");
    Prediction p;
    const auto v = text::trim(row.fields[pi]);
    if (v == "T") p.predicted = true;
    else if (v == "F") p.predicted = false;
    else throw DataError(at + "predicted must be T or F, found '" + std::string(v) + "'");
    if (si && !text::trim(row.fields[*si]).empty()) {
      try {
        p.score = text::parse_double(row.fields[*si], "score");
      } catch (const Error& e) {
        throw DataError(at + e.what());
      }
    }
    if (!out.items.emplace(PredictionKey{image, label}, p).second)
      throw DataError(at + "duplicate prediction for (" + image + ", " + label + ")");
    seen_labels.insert(label);
  }
  if (!known_labels.empty()) {
    for (const auto& l : known_labels)
      if (seen_labels.count(l)) out.labels.push_back(l);
  } else {
    out.labels.assign(seen_labels.begin(), seen_labels.end());
  }
  return out;
}

inline PredictionSet read_predictions_tsv(const std::string& path, const std::vector<std::string>& known_labels = {}) {
  return parse_predictions_tsv(text::read_file(path), path, known_labels);
}

// -------------------------------------------------------------- confusion

/// Rows are the weak label, columns the prediction.
struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline void tally(ConfusionMatrix& cm, bool predicted, LabelOutcome weak) {
  if (weak == LabelOutcome::Missing) return;
  const bool truth = weak == LabelOutcome::True;
  if (truth && predicted) ++cm.tp;
  else if (!truth && predicted) ++cm.fp;
  else if (truth && !predicted) ++cm.fn;
  else ++cm.tn;
}

/// Confusion matrix of `label` over the units of `weak` that have a
/// prediction; restricting to `units` (e.g. the test split) when given.
/// MISSING weak labels never enter the tally. Units without a prediction are
/// an error.
inline ConfusionMatrix confusion(const PredictionSet& preds, const labels::LabelTable& weak, const std::string& label,
                                 const std::set<std::string>* units = nullptr) {
  const auto li = weak.label_index(label);
  ConfusionMatrix cm;
  for (const auto& u : weak.units) {
    if (units && !units->count(u.unit_id)) continue;
    const LabelOutcome w = u.outcomes[li];
    if (w == LabelOutcome::Missing) continue;
    const Prediction* p = preds.find(u.unit_id, label);
    if (!p) throw DataError("no prediction for (" + u.unit_id + ", " + label + ")");
    tally(cm, p->predicted, w);
  }
  if (cm.total() == 0) throw DataError("label '" + label + "': no non-MISSING pairs to evaluate");
  return cm;
}

inline double base_accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw ValidationError("base accuracy of an empty confusion matrix");
  return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

// ----------------------------------------------------------- review sample

struct ReviewSample {
  std::string label;
  std::vector<std::string> hits;    // prediction agreed with the weak label
  std::vector<std::string> misses;  // prediction disagreed
  std::uint64_t seed = 0;
};

/// Draws `n_per_stratum` units without replacement from each stratum among
/// `units` (the test split). Candidates are ordered by id before sampling, so
/// the draw depends only on the seed and the candidate sets.
inline ReviewSample draw_review_sample(const PredictionSet& preds, const labels::LabelTable& weak,
                                       const std::string& label, const std::set<std::string>& units,
                                       std::size_t n_per_stratum, std::uint64_t seed) {
  if (n_per_stratum == 0) throw ValidationError("review sample size must be positive");
  const auto li = weak.label_index(label);
  std::vector<std::string> hits, misses;
  for (const auto& u : weak.units) {
    if (!units.count(u.unit_id)) continue;
    const LabelOutcome w = u.outcomes[li];
    if (w == LabelOutcome::Missing) continue;
    const Prediction* p = preds.find(u.unit_id, label);
    if (!p) throw DataError("no prediction for (" + u.unit_id + ", " + label + ")");
    (p->predicted == (w == LabelOutcome::True) ? hits : misses).push_back(u.unit_id);
  }
  if (hits.size() < n_per_stratum || misses.size() < n_per_stratum)
    throw DataError("label '" + label + "': insufficient " + (hits.size() < n_per_stratum ? "hit" : "miss") +
                    " stratum (hits available " + std::to_string(hits.size()) + ", misses available " +
                    std::to_string(misses.size()) + ", need " + std::to_string(n_per_stratum) + " each)");
  std::sort(hits.begin(), hits.end());
  std::sort(misses.begin(), misses.end());
  auto draw = [&](std::vector<std::string>& pool, std::uint64_t stream) {
    Rng rng(derive_seed(seed, stream));
    // partial Fisher-Yates
    for (std::size_t i = 0; i < n_per_stratum; ++i) std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
    pool.resize(n_per_stratum);
    std::sort(pool.begin(), pool.end());
  };
  draw(hits, 0);
  draw(misses, 1);
  return {label, std::move(hits), std::move(misses), seed};
}

/// Blinded sheet for reviewers: rows shuffled across strata and labels, no
/// stratum column. Rows carry blank `present` and `reviewer` cells and so form
/// a gold file once filled in.
inline std::string render_review_sheet(const std::vector<ReviewSample>& samples, std::uint64_t seed,
                                       const std::vector<std::string>& extra_comments = {}) {
  std::vector<std::pair<std::string, std::string>> rows;
  for (const auto& s : samples) {
    for (const auto& id : s.hits) rows.emplace_back(id, s.label);
    for (const auto& id : s.misses) rows.emplace_back(id, s.label);
  }
  std::sort(rows.begin(), rows.end());
  Rng rng(derive_seed(seed, 2));
  rng.shuffle(rows.begin(), rows.end());
  std::string out;
  for (const auto& c : extra_comments) out += "# " + c + "\n";
  out += "image_id\tlabel\tpresent\treviewer\n";
  for (const auto& [id, label] : rows) out += id + "\t" + label + "\t\t\n";
  return out;
}

/// Unblinding key: which stratum every sampled unit came from.
inline std::string render_review_key(const std::vector<ReviewSample>& samples,
                                     const std::vector<std::string>& extra_comments = {}) {
  std::string out;
  for (const auto& c : extra_comments) out += "# " + c + "\n";
  out += "image_id\tlabel\tstratum\n";
  for (const auto& s : samples) {
    for (const auto& id : s.hits) out += id + "\t" + s.label + "\thit\n";
    for (const auto& id : s.misses) out += id + "\t" + s.label + "\tmiss\n";
  }
  return out;
}

inline std::vector<ReviewSample> parse_review_key(std::string_view content, std::string_view source) {
  auto table = text::parse_tsv(content, source);
  const auto ii = table.column("image_id", source), li = table.column("label", source);
  const auto si = table.column("stratum", source);
  std::vector<ReviewSample> out;
  std::set<PredictionKey> seen;
  for (const auto& row : table.rows) {
    const auto at = text::where(source, row.line);
    const std::string& label = row.fields[li];
    if (!seen.insert({row.fields[ii], label}).second)
      throw DataError(at + "duplicate entry (" + row.fields[ii] + ", " + label + ")");
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& s) { return s.label == label; });
    if (it == out.end()) {
      out.push_back({label, {}, {}, 0});
      it = out.end() - 1;
    }
    if (row.fields[si] == "hit") it->hits.push_back(row.fields[ii]);
    else if (row.fields[si] == "miss") it->misses.push_back(row.fields[ii]);
    else throw DataError(at + "stratum must be 'hit' or 'miss'");
  }
  return out;
}

inline std::vector<ReviewSample> read_review_key(const std::string& path) {
  return parse_review_key(text::read_file(path), path);
}

// ------------------------------------------------------------------- gold

struct GoldAnnotation {
  std::string image_id;
  std::string label;
  bool present = false;
  std::string reviewer;
};

/// Adjudicated gold standard: one present/absent value per (image, label).
struct GoldStandard {
  std::map<PredictionKey, bool> present;
  std::vector<GoldAnnotation> annotations;
};

/// Gold file rows are (image_id, label, present T/F, reviewer). Several
/// reviewers may annotate the same pair; the majority decides and a tie is an
/// error, since it needs adjudication. Rows with a blank `present` are
/// unreviewed and skipped.
inline GoldStandard parse_gold_tsv(std::string_view content, std::string_view source) {
  auto table = text::parse_tsv(content, source);
  const auto ii = table.column("image_id", source), li = table.column("label", source);
  const auto pi = table.column("present", source), ri = table.column("reviewer", source);
  GoldStandard gold;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  std::map<PredictionKey, std::pair<int, int>> votes;  // (yes, no)
  for (const auto& row : table.rows) {
    const auto at = text::where(source, row.line);
    const auto v = text::trim(row.fields[pi]);
    if (v.empty()) continue;
    GoldAnnotation a{std::string(text::trim(row.fields[ii])), std::string(text::trim(row.fields[li])), false,
                     std::string(text::trim(row.fields[ri]))};
    if (v == "T") a.present = true;
    else if (v != "F") throw DataError(at + "present must be T or F, found '" + std::string(v) + "'");
    if (!seen.insert({a.image_id, a.label, a.reviewer}).second)
      throw DataError(at + "reviewer '" + a.reviewer + "' annotated (" + a.image_id + ", " + a.label + ") twice");
    auto& [yes, no] = votes[{a.image_id, a.label}];
    (a.present ? yes : no) += 1;
    gold.annotations.push_back(std::move(a));
  }
  for (const auto& [key, v] : votes) {
    if (v.first == v.second)
      throw DataError(std::string(source) + ": reviewers tie on (" + key.first + ", " + key.second +
                      "); adjudicate before import");
    gold.present.emplace(key, v.first > v.second);
  }
  return gold;
}

inline GoldStandard read_gold_tsv(const std::string& path) { return parse_gold_tsv(text::read_file(path), path); }

inline std::string render_gold_tsv(const GoldStandard& g) {
  std::string out = "image_id\tlabel\tpresent\treviewer\n";
  for (const auto& a : g.annotations)
    out += a.image_id + "\t" + a.label + "\t" + (a.present ? "T" : "F") + "\t" + a.reviewer + "\n";
  return out;
}

/// Per-unit correctness (prediction equals gold) for both strata.
struct StratumOutcomes {
  std::vector<std::uint8_t> hit;
  std::vector<std::uint8_t> miss;
};

inline double mean(const std::vector<std::uint8_t>& v) {
  if (v.empty()) throw ValidationError("mean of an empty stratum");
  std::size_t s = 0;
  for (auto x : v) s += x;
  return static_cast<double>(s) / static_cast<double>(v.size());
}

inline StratumOutcomes stratum_outcomes(const ReviewSample& sample, const GoldStandard& gold,
                                        const PredictionSet& preds) {
  StratumOutcomes out;
  std::vector<std::string> uncovered;
  auto fill = [&](const std::vector<std::string>& ids, std::vector<std::uint8_t>& dst) {
    for (const auto& id : ids) {
      auto g = gold.present.find({id, sample.label});
      if (g == gold.present.end()) {
        uncovered.push_back(id);
        continue;
      }
      const Prediction* p = preds.find(id, sample.label);
      if (!p) throw DataError("no prediction for (" + id + ", " + sample.label + ")");
      dst.push_back(p->predicted == g->second ? 1 : 0);
    }
  };
  fill(sample.hits, out.hit);
  fill(sample.misses, out.miss);
  if (!uncovered.empty())
    throw DataError("label '" + sample.label + "': gold standard missing for " + std::to_string(uncovered.size()) +
                    " sampled image(s): " + text::join(uncovered, ", "));
  return out;
}

struct StratumAccuracies {
  double hit = 0.0;
  double miss = 0.0;
};

inline StratumAccuracies gold_accuracies(const ReviewSample& sample, const GoldStandard& gold,
                                         const PredictionSet& preds) {
  const auto o = stratum_outcomes(sample, gold, preds);
  return {mean(o.hit), mean(o.miss)};
}

// ---------------------------------------------------------- true accuracy

inline double weighted_accuracy(double acc_hit, double acc_miss, double proportion_hit) {
  return acc_miss * (1.0 - proportion_hit) + acc_hit * proportion_hit;
}

/// Quantile with linear interpolation between order statistics (type 7).
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw ValidationError("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct TrueAccuracyEstimate {
  double accuracy_hit = 0.0;
  double accuracy_miss = 0.0;
  double proportion_hit = 0.0;
  double proportion_miss = 0.0;
  double point = 0.0;   // weighted accuracy at the observed stratum accuracies
  double median = 0.0;  // bootstrap 50% quantile, the reported estimate
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t resamples = 0;
};

/// Percentile bootstrap of the weighted accuracy. Each replicate resamples
/// both correctness vectors with replacement; replicate r draws from its own
/// stream derive_seed(seed, r), so results do not depend on evaluation order.
inline TrueAccuracyEstimate true_accuracy(const StratumOutcomes& outcomes, const ConfusionMatrix& cm,
                                          std::size_t resamples, std::uint64_t seed, double confidence = 0.95) {
  if (resamples == 0) throw ValidationError("bootstrap needs at least one resample");
  TrueAccuracyEstimate e;
  e.accuracy_hit = mean(outcomes.hit);
  e.accuracy_miss = mean(outcomes.miss);
  e.proportion_hit = base_accuracy(cm);
  e.proportion_miss = 1.0 - e.proportion_hit;
  e.point = weighted_accuracy(e.accuracy_hit, e.accuracy_miss, e.proportion_hit);
  e.resamples = resamples;
  std::vector<double> reps(resamples);
  auto resample_mean = [](Rng& rng, const std::vector<std::uint8_t>& v) {
    std::size_t s = 0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[rng.index(v.size())];
    return static_cast<double>(s) / static_cast<double>(v.size());
  };
  for (std::size_t r = 0; r < resamples; ++r) {
    Rng rng(derive_seed(seed, r));
    const double h = resample_mean(rng, outcomes.hit);
    const double m = resample_mean(rng, outcomes.miss);
    reps[r] = weighted_accuracy(h, m, e.proportion_hit);
  }
  const double tail = (1.0 - confidence) / 2.0;
  e.median = quantile(reps, 0.5);
  e.ci_low = quantile(reps, tail);
  e.ci_high = quantile(reps, 1.0 - tail);
  return e;
}

// ----------------------------------------------------------------- reports

/// One row of the per-label accuracy report.
struct AccuracyRow {
  std::string label;
  labels::ModeResult mode;
  ConfusionMatrix cm;
  double base = 0.0;
  std::optional<TrueAccuracyEstimate> true_acc;
};

inline std::string mode_cell(const labels::ModeResult& m) {
  return std::string(m.outcome == LabelOutcome::True ? "Yes" : "No") + " (" +
         text::format_percent(m.frequency, 0) + ")";
}

/// Mode, base accuracy and (when estimated) true accuracy with its interval,
/// as percentages, followed by the raw counts and fractions.
inline std::string render_accuracy_tsv(const std::vector<AccuracyRow>& rows,
                                       const std::vector<std::string>& extra_comments = {}) {
  std::string out;
  for (const auto& c : extra_comments) out += "# " + c + "\n";
  out += "label\tmode\taccuracy_base\taccuracy_true\tci_2.5_to_97.5\tn_true\tn_false\tmode_frequency\ttp\tfp\tfn\ttn"
         "\tbase\taccuracy_hit\taccuracy_miss\tpoint\tmedian\tci_low\tci_high\tresamples\n";
  for (const auto& r : rows) {
    out += r.label + "\t" + mode_cell(r.mode) + "\t" + text::format_percent(r.base, 1) + "\t";
    if (r.true_acc)
      out += text::format_percent(r.true_acc->median, 1) + "\t" + text::format_fixed(100.0 * r.true_acc->ci_low, 1) +
             " to " + text::format_fixed(100.0 * r.true_acc->ci_high, 1);
    else
      out += "\t";
    out += "\t" + std::to_string(r.mode.n_true) + "\t" + std::to_string(r.mode.n_false) + "\t" +
           text::format_shortest(r.mode.frequency) + "\t" + std::to_string(r.cm.tp) + "\t" + std::to_string(r.cm.fp) +
           "\t" + std::to_string(r.cm.fn) + "\t" + std::to_string(r.cm.tn) + "\t" + text::format_shortest(r.base);
    if (r.true_acc) {
      const auto& t = *r.true_acc;
      for (double v : {t.accuracy_hit, t.accuracy_miss, t.point, t.median, t.ci_low, t.ci_high})
        out += "\t" + text::format_shortest(v);
      out += "\t" + std::to_string(t.resamples);
    } else {
      out += "\t\t\t\t\t\t\t";
    }
    out += "\n";
  }
  return out;
}

}  // namespace radlabel::eval
