#pragma once

// Synthetic examinations for desk-scale end-to-end runs: Swedish-like report
// text whose sentences state or deny findings, images with feature vectors
// driven by the underlying truth, and a keyword manifest from which label
// definitions can be derived automatically once topics are fitted.

#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radlabel/classify.hpp"
#include "radlabel/corpus.hpp"
#include "radlabel/labels.hpp"
#include "radlabel/lda.hpp"
#include "radlabel/random.hpp"
#include "radlabel/stemmer.hpp"

namespace radlabel::synth {

using labels::LabelOutcome;

struct FindingVocabulary {
  std::string label;
  std::vector<std::string> positive;  // words of sentences asserting the finding
  std::vector<std::string> negative;  // words of sentences denying it
};

// Word groups are disjoint, also after stemming.
inline std::vector<FindingVocabulary> default_findings() {
  return {
      {"fracture",
       {"fraktur", "frakturlinje", "kortikalisavbrott", "fragment", "frakturspalt"},
       {"ingen", "skelettskada", "intakt", "benstruktur", "konturer"}},
      {"dislocation",
       {"luxation", "felställning", "dislokation", "förskjutning", "vinkling"},
       {"inget", "ledläge", "kongruent", "ledställning", "normalläge"}},
      {"osteosynthesis",
       {"osteosyntes", "platta", "skruvar", "metallmaterial", "implantat"},
       {"opererad", "ingrepp", "kirurgi", "materialfri", "postoperativ"}},
      {"degenerative",
       {"artros", "degenerativa", "osteofyter", "ledspaltsförsmalning", "sklerosering"},
       {"ledspalter", "välbevarade", "broskytor", "jämna", "ledytor"}},
  };
}

inline std::vector<std::string> default_filler() {
  return {"slätröntgen", "handled", "fotled", "frontalbild", "sidobild", "projektion", "undersökning",
          "jämförelse", "kontroll",  "mjukdelar", "svullnad",   "höger",    "vänster",  "remiss"};
}

struct ReportOptions {
  std::size_t num_exams = 2000;
  std::size_t min_images = 2;
  std::size_t max_images = 3;
  std::size_t num_labels = 3;          // first num_labels of the default findings
  double mention_rate = 0.8;           // probability a report states a label at all
  double corruption_rate = 0.2;        // probability a stated label contradicts the truth
  double min_prevalence = 0.25;
  double max_prevalence = 0.5;
  std::size_t filler_sentences = 2;
  std::size_t sentence_words = 5;
  std::size_t noise_dims = 4;
  double signal_strength = 2.0;
  std::uint64_t seed = 1;
};

struct SyntheticStudy {
  std::vector<RawReport> reports;
  classify::FeatureSet features;
  labels::LabelTable gold;  // per image
  std::vector<FindingVocabulary> findings;
  std::vector<std::string> filler;
};

inline std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

inline std::string sentence_from(const std::vector<std::string>& words, std::size_t n, Rng& rng) {
  std::vector<std::string> picked;
  for (std::size_t i = 0; i < n; ++i) picked.push_back(words[rng.index(words.size())]);
  picked[0] = capitalize(picked[0]);
  return text::join(picked, " ") + ".";
}

/// One report per examination. Each label is stated in a report with
/// probability `mention_rate`; a stated label contradicts the truth with
/// probability `corruption_rate`. Truths are shared by all images of the
/// examination and drive feature j (j < num_labels) by +-strength/2.
inline SyntheticStudy generate_study(const ReportOptions& o) {
  const auto all = default_findings();
  if (o.num_labels == 0 || o.num_labels > all.size())
    throw ValidationError("synthetic study supports 1 to " + std::to_string(all.size()) + " labels");
  if (o.num_exams == 0 || o.min_images == 0 || o.max_images < o.min_images || o.sentence_words == 0)
    throw ValidationError("synthetic study needs positive exam, image and sentence sizes");
  if (o.mention_rate < 0 || o.mention_rate > 1 || o.corruption_rate < 0 || o.corruption_rate > 1 ||
      o.min_prevalence <= 0 || o.max_prevalence >= 1 || o.min_prevalence > o.max_prevalence || o.signal_strength < 0)
    throw ValidationError("synthetic study parameters out of range");
  SyntheticStudy s;
  s.findings.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(o.num_labels));
  s.filler = default_filler();
  const std::size_t L = o.num_labels;
  for (const auto& f : s.findings) s.gold.names.push_back(f.label);
  s.features.dim = L + o.noise_dims;

  Rng rng(derive_seed(o.seed, 0));
  std::vector<double> prevalence;
  for (std::size_t l = 0; l < L; ++l)
    prevalence.push_back(o.min_prevalence + (o.max_prevalence - o.min_prevalence) * rng.uniform());
  const int width = static_cast<int>(std::to_string(o.num_exams - 1).size());
  for (std::size_t e = 0; e < o.num_exams; ++e) {
    char id[32];
    std::snprintf(id, sizeof id, "%0*zu", width, e);
    RawReport r;
    r.report_id = std::string("r") + id;
    r.exam_id = std::string("e") + id;
    r.anatomy = rng.bernoulli(0.5) ? Anatomy::wrist : Anatomy::ankle;

    std::vector<bool> truth(L);
    std::vector<std::string> sentences;
    for (std::size_t f = 0; f < o.filler_sentences; ++f) sentences.push_back(sentence_from(s.filler, o.sentence_words, rng));
    for (std::size_t l = 0; l < L; ++l) {
      truth[l] = rng.bernoulli(prevalence[l]);
      const bool mentioned = rng.bernoulli(o.mention_rate);
      const bool flipped = rng.bernoulli(o.corruption_rate);
      if (!mentioned) continue;
      const bool stated = truth[l] != flipped;
      sentences.push_back(
          sentence_from(stated ? s.findings[l].positive : s.findings[l].negative, o.sentence_words, rng));
    }
    rng.shuffle(sentences.begin(), sentences.end());
    r.text = text::join(sentences, " ");

    std::vector<LabelOutcome> gold(L);
    for (std::size_t l = 0; l < L; ++l) gold[l] = truth[l] ? LabelOutcome::True : LabelOutcome::False;
    const std::size_t n_img = o.min_images + rng.index(o.max_images - o.min_images + 1);
    for (std::size_t i = 0; i < n_img; ++i) {
      const std::string img = std::string("i") + id + "_" + std::to_string(i);
      r.image_ids.push_back(img);
      classify::FeatureVector fv{img, std::vector<double>(s.features.dim)};
      for (std::size_t j = 0; j < s.features.dim; ++j) {
        double v = rng.normal();
        if (j < L) v += (truth[j] ? 0.5 : -0.5) * o.signal_strength;
        fv.values[j] = v;
      }
      s.features.rows.push_back(std::move(fv));
      s.gold.units.push_back({img, gold});
    }
    s.reports.push_back(std::move(r));
  }
  return s;
}

/// Gold annotations for every image and label, attributed to a synthetic reviewer.
inline std::string render_gold(const SyntheticStudy& s) {
  std::string out = "image_id\tlabel\tpresent\treviewer\n";
  for (const auto& u : s.gold.units)
    for (std::size_t l = 0; l < s.gold.names.size(); ++l)
      out += u.unit_id + "\t" + s.gold.names[l] + "\t" + (u.outcomes[l] == LabelOutcome::True ? "T" : "F") +
             "\tsynthetic\n";
  return out;
}

inline nlohmann::ordered_json manifest_json(const SyntheticStudy& s, const nlohmann::ordered_json& meta) {
  nlohmann::ordered_json j;
  j["format"] = "radlabel.synth-manifest";
  j["version"] = 1;
  j["meta"] = meta;
  j["findings"] = nlohmann::ordered_json::array();
  for (const auto& f : s.findings)
    j["findings"].push_back({{"label", f.label}, {"positive", f.positive}, {"negative", f.negative}});
  j["filler"] = s.filler;
  return j;
}

inline std::vector<FindingVocabulary> parse_manifest(std::string_view content, std::string_view source) {
  try {
    const auto j = nlohmann::json::parse(content);
    if (j.at("format") != "radlabel.synth-manifest" || j.at("version") != 1)
      throw DataError(std::string(source) + ": not a synthetic manifest (v1)");
    std::vector<FindingVocabulary> out;
    for (const auto& f : j.at("findings"))
      out.push_back({f.at("label").get<std::string>(), f.at("positive").get<std::vector<std::string>>(),
                     f.at("negative").get<std::vector<std::string>>()});
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string(source) + ": malformed manifest: " + e.what());
  }
}

/// Stands in for the human labeling step on synthetic data: a topic belongs
/// to the label side (positive or negative word group, in preprocessed form)
/// holding the largest share of its probability mass, provided that share
/// exceeds `min_mass`.
inline std::vector<labels::LabelDef> auto_label_defs(const std::vector<FindingVocabulary>& findings,
                                                     const lda::TopicDistributions& dist, const Vocabulary& vocab,
                                                     Anatomy anatomy, const NormalizationRules& rules,
                                                     const Stemmer* stemmer, double min_mass = 0.5) {
  struct Group {
    std::size_t finding;
    bool positive;
    std::set<std::uint32_t> terms;
  };
  std::vector<Group> groups;
  for (std::size_t f = 0; f < findings.size(); ++f) {
    for (bool pos : {true, false}) {
      Group g{f, pos, {}};
      for (const auto& w : pos ? findings[f].positive : findings[f].negative)
        for (const auto& t : preprocess_text(w, rules, stemmer))
          if (auto id = vocab.find(t)) g.terms.insert(*id);
      groups.push_back(std::move(g));
    }
  }
  std::vector<labels::LabelDef> defs(findings.size());
  for (std::size_t f = 0; f < findings.size(); ++f) {
    defs[f].name = findings[f].label;
    defs[f].anatomies = {anatomy};
  }
  for (std::size_t t = 0; t < dist.phi.rows(); ++t) {
    std::size_t best = groups.size();
    double best_mass = min_mass;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      double mass = 0.0;
      for (auto w : groups[g].terms) mass += dist.phi(t, w);
      if (mass > best_mass) {
        best_mass = mass;
        best = g;
      }
    }
    if (best == groups.size()) continue;
    auto& d = defs[groups[best].finding];
    (groups[best].positive ? d.positive_topics : d.negative_topics).insert(t);
  }
  std::vector<labels::LabelDef> out;
  for (auto& d : defs)
    if (!d.positive_topics.empty() || !d.negative_topics.empty()) out.push_back(std::move(d));
  return out;
}

}  // namespace radlabel::synth
