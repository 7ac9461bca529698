#pragma once

// Reference image classifier: one logistic model per label over fixed-length
// feature vectors, plus a seeded generator of feature/label datasets with a
// planted signal and corrupted weak labels.

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radlabel/error.hpp"
#include "radlabel/eval.hpp"
#include "radlabel/labels.hpp"
#include "radlabel/random.hpp"
#include "radlabel/text.hpp"

namespace radlabel::classify {

using labels::LabelOutcome;

struct FeatureVector {
  std::string image_id;
  std::vector<double> values;
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct FeatureSet {
  std::size_t dim = 0;
  std::vector<FeatureVector> rows;

  void validate() const {
    std::set<std::string> seen;
    for (const auto& r : rows) {
      if (r.values.size() != dim)
        throw ValidationError("feature vector '" + r.image_id + "' has " + std::to_string(r.values.size()) +
                              " values, expected " + std::to_string(dim));
      for (double v : r.values)
        if (!std::isfinite(v)) throw ValidationError("feature vector '" + r.image_id + "' has a non-finite value");
      if (!seen.insert(r.image_id).second) throw ValidationError("duplicate feature vector '" + r.image_id + "'");
    }
  }
  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;
};

inline std::string render_features_tsv(const FeatureSet& f, const std::vector<std::string>& extra_comments = {}) {
  std::string out;
  for (const auto& c : extra_comments) out += "# " + c + "\n";
  out += "image_id";
  for (std::size_t j = 0; j < f.dim; ++j) out += "\tf" + std::to_string(j);
  out += "\n";
  for (const auto& r : f.rows) {
    out += r.image_id;
    for (double v : r.values) out += "\t" + text::format_shortest(v);
    out += "\n";
  }
  return out;
}

inline FeatureSet parse_features_tsv(std::string_view content, std::string_view source) {
  auto table = text::parse_tsv(content, source);
  if (table.header.empty() || table.header[0] != "image_id")
    throw DataError(std::string(source) + ": expected first column 'image_id'");
  FeatureSet f;
  f.dim = table.header.size() - 1;
  if (f.dim == 0) throw DataError(std::string(source) + ": no feature columns");
  for (const auto& row : table.rows) {
    FeatureVector v{row.fields[0], {}};
    v.values.reserve(f.dim);
    try {
      for (std::size_t j = 1; j < row.fields.size(); ++j) v.values.push_back(text::parse_double(row.fields[j], table.header[j]));
    } catch (const Error& e) {
      throw DataError(text::where(source, row.line) + e.what());
    }
    f.rows.push_back(std::move(v));
  }
  try {
    f.validate();
  } catch (const ValidationError& e) {
    throw DataError(std::string(source) + ": " + e.what());
  }
  return f;
}

inline FeatureSet read_features_tsv(const std::string& path) { return parse_features_tsv(text::read_file(path), path); }

// ---------------------------------------------------------------- synthetic

struct SynthOptions {
  std::size_t num_exams = 1000;
  std::size_t images_per_exam = 2;
  std::size_t num_labels = 3;
  std::size_t noise_dims = 4;
  double signal_strength = 1.5;
  double corruption_rate = 0.2;  // probability an exam's weak label is flipped
  double missing_rate = 0.1;     // probability an exam's weak label is MISSING
  double min_prevalence = 0.2;
  double max_prevalence = 0.5;
  std::uint64_t seed = 1;
};

struct SynthDataset {
  FeatureSet features;
  labels::LabelTable weak;  // per image, tri-state
  labels::LabelTable gold;  // per image, TRUE/FALSE only
  std::unordered_map<std::string, std::string> exam_of;
  std::vector<double> prevalence;
};

inline std::string synth_label_name(std::size_t l) { return "label_" + std::to_string(l); }

/// Gold truths are drawn per examination and shared by its images. Feature j
/// (j < num_labels) carries +strength/2 when label j is present and
/// -strength/2 otherwise, plus unit normal noise; the remaining dimensions are
/// pure noise. Weak labels are exam-level copies of gold, flipped with
/// probability `corruption_rate` and blanked to MISSING with probability
/// `missing_rate`.
inline SynthDataset synth_dataset(const SynthOptions& o) {
  if (o.num_exams == 0 || o.images_per_exam == 0 || o.num_labels == 0)
    throw ValidationError("synthetic dataset needs positive exam, image and label counts");
  if (o.signal_strength < 0 || o.corruption_rate < 0 || o.corruption_rate > 1 || o.missing_rate < 0 ||
      o.missing_rate >= 1 || o.min_prevalence <= 0 || o.max_prevalence >= 1 || o.min_prevalence > o.max_prevalence)
    throw ValidationError("synthetic dataset parameters out of range");
  SynthDataset d;
  const std::size_t L = o.num_labels;
  for (std::size_t l = 0; l < L; ++l) {
    d.weak.names.push_back(synth_label_name(l));
    d.gold.names.push_back(synth_label_name(l));
  }
  d.features.dim = L + o.noise_dims;
  Rng rng(derive_seed(o.seed, 0));
  for (std::size_t l = 0; l < L; ++l)
    d.prevalence.push_back(o.min_prevalence + (o.max_prevalence - o.min_prevalence) * rng.uniform());
  const int width = static_cast<int>(std::to_string(o.num_exams - 1).size());
  for (std::size_t e = 0; e < o.num_exams; ++e) {
    char exam[32];
    std::snprintf(exam, sizeof exam, "exam%0*zu", width, e);
    std::vector<LabelOutcome> gold(L), weak(L);
    for (std::size_t l = 0; l < L; ++l) {
      const bool present = rng.bernoulli(d.prevalence[l]);
      gold[l] = present ? LabelOutcome::True : LabelOutcome::False;
      const bool flip = rng.bernoulli(o.corruption_rate);
      const bool missing = rng.bernoulli(o.missing_rate);
      weak[l] = missing ? LabelOutcome::Missing : ((present != flip) ? LabelOutcome::True : LabelOutcome::False);
    }
    for (std::size_t i = 0; i < o.images_per_exam; ++i) {
      const std::string id = std::string(exam) + "_img" + std::to_string(i);
      FeatureVector fv{id, std::vector<double>(d.features.dim)};
      for (std::size_t j = 0; j < d.features.dim; ++j) {
        double v = rng.normal();
        if (j < L) v += (gold[j] == LabelOutcome::True ? 0.5 : -0.5) * o.signal_strength;
        fv.values[j] = v;
      }
      d.features.rows.push_back(std::move(fv));
      d.weak.units.push_back({id, weak});
      d.gold.units.push_back({id, gold});
      d.exam_of.emplace(id, exam);
    }
  }
  return d;
}

// -------------------------------------------------------------------- model

struct TrainOptions {
  std::size_t epochs = 30;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> validation_accuracy;
};

struct LabelModel {
  std::string label;
  std::vector<double> weights;
  double bias = 0.0;
  std::size_t train_units = 0;
  std::vector<EpochLog> history;
};

struct LinearLabelModel {
  std::size_t dim = 0;
  TrainOptions options;
  std::vector<LabelModel> labels;
  std::vector<std::string> skipped;  // labels with only MISSING outcomes
  std::vector<std::string> warnings;
};

inline double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

inline double score(const LabelModel& m, std::span<const double> x) {
  double z = m.bias;
  for (std::size_t j = 0; j < x.size(); ++j) z += m.weights[j] * x[j];
  return sigmoid(z);
}

/// Scores exactly 0.5 predict FALSE.
constexpr bool decide(double s) noexcept { return s > 0.5; }

/// Mini-batch logistic regression per label on the train split. Units whose
/// weak label is MISSING never contribute a gradient. A label with no
/// non-MISSING unit anywhere is skipped with a warning; a label whose non-MISSING
/// units all fall outside the train split is an error.
inline LinearLabelModel train_reference(const FeatureSet& features, const labels::LabelTable& weak,
                                        const labels::SplitAssignment& split, const TrainOptions& opt) {
  features.validate();
  if (opt.epochs == 0 || opt.batch_size == 0 || !(opt.learning_rate > 0) || opt.l2 < 0)
    throw ValidationError("training options out of range");
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < features.rows.size(); ++i) row_of.emplace(features.rows[i].image_id, i);

  LinearLabelModel model;
  model.dim = features.dim;
  model.options = opt;
  for (std::size_t li = 0; li < weak.names.size(); ++li) {
    const std::string& label = weak.names[li];
    std::vector<std::pair<std::size_t, double>> train, val;  // (feature row, target)
    std::size_t labeled_anywhere = 0;
    for (const auto& u : weak.units) {
      const auto o = u.outcomes[li];
      if (o == LabelOutcome::Missing) continue;
      ++labeled_anywhere;
      auto sp = split.by_image.find(u.unit_id);
      if (sp == split.by_image.end()) continue;
      auto r = row_of.find(u.unit_id);
      if (r == row_of.end()) throw DataError("no feature vector for image '" + u.unit_id + "'");
      const double y = o == LabelOutcome::True ? 1.0 : 0.0;
      if (sp->second == labels::Split::train) train.emplace_back(r->second, y);
      else if (sp->second == labels::Split::validation) val.emplace_back(r->second, y);
    }
    if (labeled_anywhere == 0) {
      model.skipped.push_back(label);
      model.warnings.push_back("label '" + label + "' has only MISSING outcomes; skipped");
      continue;
    }
    if (train.empty()) throw DataError("label '" + label + "': no non-MISSING units in the train split");

    LabelModel m{label, std::vector<double>(features.dim, 0.0), 0.0, train.size(), {}};
    Rng rng(derive_seed(opt.seed, li));
    std::vector<double> grad(features.dim);
    for (std::size_t epoch = 1; epoch <= opt.epochs; ++epoch) {
      rng.shuffle(train.begin(), train.end());
      double loss = 0.0;
      for (std::size_t start = 0; start < train.size(); start += opt.batch_size) {
        const std::size_t end = std::min(train.size(), start + opt.batch_size);
        std::fill(grad.begin(), grad.end(), 0.0);
        double gb = 0.0;
        for (std::size_t k = start; k < end; ++k) {
          const auto& x = features.rows[train[k].first].values;
          const double y = train[k].second;
          const double p = score(m, x);
          loss -= y * std::log(std::max(p, 1e-300)) + (1 - y) * std::log(std::max(1 - p, 1e-300));
          const double g = p - y;
          for (std::size_t j = 0; j < x.size(); ++j) grad[j] += g * x[j];
          gb += g;
        }
        const double scale = opt.learning_rate / static_cast<double>(end - start);
        for (std::size_t j = 0; j < m.weights.size(); ++j)
          m.weights[j] -= scale * grad[j] + opt.learning_rate * opt.l2 * m.weights[j];
        m.bias -= scale * gb;
      }
      EpochLog log{epoch, loss / static_cast<double>(train.size()), std::nullopt};
      if (!val.empty()) {
        std::size_t correct = 0;
        for (const auto& [row, y] : val)
          correct += decide(score(m, features.rows[row].values)) == (y == 1.0) ? 1 : 0;
        log.validation_accuracy = static_cast<double>(correct) / static_cast<double>(val.size());
      }
      m.history.push_back(log);
    }
    model.labels.push_back(std::move(m));
  }
  return model;
}

/// One prediction per (image, trained label), scored on every feature row.
inline eval::PredictionSet predict(const LinearLabelModel& model, const FeatureSet& features) {
  if (features.dim != model.dim)
    throw ValidationError("feature dimension " + std::to_string(features.dim) + " does not match model dimension " +
                          std::to_string(model.dim));
  features.validate();
  eval::PredictionSet out;
  for (const auto& m : model.labels) {
    out.labels.push_back(m.label);
    for (const auto& r : features.rows) {
      const double s = score(m, r.values);
      out.items.emplace(eval::PredictionKey{r.image_id, m.label}, eval::Prediction{decide(s), s});
    }
  }
  return out;
}

/// Externally produced predictions; labels outside `known_labels` are errors.
inline eval::PredictionSet import_predictions(const std::string& path, const std::vector<std::string>& known_labels) {
  return eval::read_predictions_tsv(path, known_labels);
}

// ------------------------------------------------------------- persistence

inline nlohmann::ordered_json model_to_json(const LinearLabelModel& m) {
  nlohmann::ordered_json j;
  j["format"] = "radlabel.linear-model";
  j["version"] = 1;
  j["dim"] = m.dim;
  j["options"] = {{"epochs", m.options.epochs},
                  {"learning_rate", m.options.learning_rate},
                  {"l2", m.options.l2},
                  {"batch_size", m.options.batch_size},
                  {"seed", m.options.seed}};
  j["labels"] = nlohmann::ordered_json::array();
  for (const auto& l : m.labels) {
    nlohmann::ordered_json h = nlohmann::ordered_json::array();
    for (const auto& e : l.history) {
      nlohmann::ordered_json row = {{"epoch", e.epoch}, {"train_loss", e.train_loss}};
      row["validation_accuracy"] = e.validation_accuracy ? nlohmann::ordered_json(*e.validation_accuracy) : nlohmann::ordered_json(nullptr);
      h.push_back(row);
    }
    j["labels"].push_back({{"label", l.label},
                           {"weights", l.weights},
                           {"bias", l.bias},
                           {"train_units", l.train_units},
                           {"history", h}});
  }
  j["skipped"] = m.skipped;
  return j;
}

inline LinearLabelModel model_from_json(const nlohmann::json& j, std::string_view source) {
  try {
    if (j.at("format") != "radlabel.linear-model" || j.at("version") != 1)
      throw DataError(std::string(source) + ": not a radlabel linear model (v1)");
    LinearLabelModel m;
    m.dim = j.at("dim").get<std::size_t>();
    const auto& o = j.at("options");
    m.options = {o.at("epochs").get<std::size_t>(), o.at("learning_rate").get<double>(), o.at("l2").get<double>(),
                 o.at("batch_size").get<std::size_t>(), o.at("seed").get<std::uint64_t>()};
    for (const auto& l : j.at("labels")) {
      LabelModel lm{l.at("label").get<std::string>(), l.at("weights").get<std::vector<double>>(),
                    l.at("bias").get<double>(), l.at("train_units").get<std::size_t>(), {}};
      if (lm.weights.size() != m.dim) throw DataError(std::string(source) + ": weight dimension mismatch");
      for (const auto& e : l.at("history")) {
        EpochLog log{e.at("epoch").get<std::size_t>(), e.at("train_loss").get<double>(), std::nullopt};
        if (!e.at("validation_accuracy").is_null()) log.validation_accuracy = e.at("validation_accuracy").get<double>();
        lm.history.push_back(log);
      }
      m.labels.push_back(std::move(lm));
    }
    m.skipped = j.at("skipped").get<std::vector<std::string>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string(source) + ": malformed model: " + e.what());
  }
}

inline LinearLabelModel read_model(const std::string& path) {
  const std::string content = text::read_file(path);
  try {
    return model_from_json(nlohmann::json::parse(content), path);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
}

/// Per-epoch training log: label, epoch, train_loss, validation_accuracy.
inline std::string render_training_log(const LinearLabelModel& m) {
  std::string out = "label\tepoch\ttrain_loss\tvalidation_accuracy\n";
  for (const auto& l : m.labels)
    for (const auto& e : l.history)
      out += l.label + "\t" + std::to_string(e.epoch) + "\t" + text::format_shortest(e.train_loss) + "\t" +
             (e.validation_accuracy ? text::format_shortest(*e.validation_accuracy) : std::string()) + "\n";
  return out;
}

}  // namespace radlabel::classify
