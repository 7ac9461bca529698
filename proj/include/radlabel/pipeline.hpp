#pragma once

// The three experiments as file-producing stages. Every stage is a pure
// function of the configuration and its input files; all artifacts carry the
// configuration hash and seeds, and none carries timestamps, so an identical
// rerun reproduces every byte.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radlabel/classify.hpp"
#include "radlabel/config.hpp"
#include "radlabel/corpus.hpp"
#include "radlabel/eval.hpp"
#include "radlabel/labels.hpp"
#include "radlabel/lda.hpp"
#include "radlabel/regress.hpp"
#include "radlabel/stemmer.hpp"
#include "radlabel/synth.hpp"
#include "radlabel/topics.hpp"

namespace radlabel::pipeline {

namespace fs = std::filesystem;
using labels::LabelOutcome;

/// Writes artifacts below a root directory and records what it wrote.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path root) : root_(std::move(root)) {}

  fs::path path(const std::string& rel) const { return root_ / rel; }

  void write(const std::string& rel, std::string_view content) {
    const fs::path p = root_ / rel;
    fs::create_directories(p.parent_path());
    text::write_file(p.string(), content);
    written_.push_back(rel);
  }

  const std::vector<std::string>& written() const { return written_; }

 private:
  fs::path root_;
  std::vector<std::string> written_;
};

/// Messages for the operator (never written into artifacts).
struct Log {
  std::ostream* out = &std::cerr;
  void operator()(const std::string& msg) const {
    if (out) *out << msg << "\n";
  }
};

inline nlohmann::ordered_json meta_json(const RunConfig& cfg) {
  nlohmann::ordered_json seeds;
  for (auto k : kSeedKeys) seeds[std::string(k)] = cfg.seed(k);
  return {{"tool", "radlabel"}, {"version", kVersion}, {"config_hash", cfg.hash()}, {"seeds", seeds}};
}

// ------------------------------------------------------------ text set-up

struct TextSetup {
  NormalizationRules rules;
  std::optional<Stemmer> stemmer;
  SentenceRules sentences;
  FilterOptions filter;
  std::size_t min_count = 5;

  const Stemmer* stemmer_ptr() const { return stemmer ? &*stemmer : nullptr; }
};

inline TextSetup text_setup(const RunConfig& cfg) {
  TextSetup s;
  s.rules = load_rules(cfg.get("corrections"), cfg.get("stop_words"), cfg.get("language"));
  if (s.rules.language != "none") {
    s.stemmer = Stemmer::from_source(cfg.get("stemmer"));
    if (s.stemmer->language() != s.rules.language)
      throw ValidationError("stemmer '" + cfg.get("stemmer") + "' is for " + s.stemmer->language() +
                            ", but language is " + s.rules.language);
  }
  s.sentences = cfg.has("abbreviations") ? parse_sentence_rules(text::read_file(cfg.get("abbreviations")))
                                         : default_sentence_rules();
  s.filter.min_report_chars = cfg.count("min_report_chars");
  s.filter.min_tokens = cfg.count("min_tokens");
  s.min_count = cfg.count("min_count");
  return s;
}

inline std::vector<RawReport> ingest(const std::string& path) {
  auto reports = read_reports_jsonl(path);
  for (auto& r : reports) r = scrub_report(std::move(r));
  return reports;
}

struct CorpusBuild {
  std::vector<Document> docs;
  Vocabulary vocabulary;
  std::size_t removed_short_report = 0;
  std::size_t removed_few_tokens = 0;
  std::size_t dropped_tokens = 0;
  std::size_t dropped_docs = 0;
};

inline std::vector<Document> make_documents(const std::vector<RawReport>& reports, Granularity g,
                                            const TextSetup& setup) {
  std::vector<Document> docs;
  for (const auto& r : reports) {
    if (g == Granularity::report) {
      docs.push_back(report_document(r));
    } else {
      for (auto& d : split_sentences(r, setup.sentences)) docs.push_back(std::move(d));
    }
  }
  for (auto& d : docs) d.tokens = preprocess_text(d.text, setup.rules, setup.stemmer_ptr());
  return docs;
}

inline CorpusBuild build_corpus(const std::vector<RawReport>& reports, Granularity g, const TextSetup& setup) {
  auto filtered = filter_documents(make_documents(reports, g, setup), setup.filter);
  auto vb = build_vocabulary(std::move(filtered.docs), setup.min_count);
  return {std::move(vb.docs),          std::move(vb.vocabulary), filtered.removed_short_report,
          filtered.removed_few_tokens, vb.dropped_tokens,        vb.dropped_docs};
}

inline std::vector<std::string> doc_ids(const std::vector<Document>& docs) {
  std::vector<std::string> ids;
  ids.reserve(docs.size());
  for (const auto& d : docs) ids.push_back(d.doc_id);
  return ids;
}

inline std::unordered_map<std::string, std::string> doc_texts(const std::vector<Document>& docs) {
  std::unordered_map<std::string, std::string> m;
  for (const auto& d : docs) m.emplace(d.doc_id, d.text + d.terminator);
  return m;
}

/// Fits LDA and writes model, theta and phi below `prefix`.
inline lda::FitResult fit_and_write(const CorpusBuild& build, const lda::Hyperparams& hyper, ArtifactWriter& w,
                                    const std::string& prefix, const RunConfig& cfg) {
  const auto corpus = lda::encode_corpus(build.docs, build.vocabulary);
  auto result = lda::fit(corpus, hyper);
  const std::string prov = cfg.provenance();
  w.write(prefix + "model.json", lda::render_model_json(result.model, corpus, prefix + "vocab.tsv", meta_json(cfg)));
  w.write(prefix + "theta.tsv", lda::render_theta_tsv(result.distributions.theta, doc_ids(build.docs), prov));
  w.write(prefix + "phi.tsv", lda::render_phi_tsv(result.distributions.phi, build.vocabulary.terms, prov));
  return result;
}

inline void write_corpus(const CorpusBuild& build, ArtifactWriter& w, const std::string& prefix,
                         const RunConfig& cfg) {
  w.write(prefix + "docs.jsonl", render_documents_jsonl(build.docs, meta_json(cfg)));
  w.write(prefix + "vocab.tsv", render_vocabulary_tsv(build.vocabulary, cfg.provenance()));
}

inline topics::ViewOptions view_options(const RunConfig& cfg) {
  return {cfg.number("word_threshold"), cfg.count("top_docs")};
}

inline std::vector<topics::TopicView> all_views(const lda::TopicDistributions& dist, const CorpusBuild& build,
                                                const topics::ViewOptions& opt) {
  std::vector<topics::TopicView> views;
  const auto ids = doc_ids(build.docs);
  for (std::size_t t = 0; t < dist.phi.rows(); ++t)
    views.push_back(topics::build_topic_view(dist, build.vocabulary.terms, ids, t, opt));
  return views;
}

/// Unblinded listing of every topic, for authoring label definitions.
inline std::string render_topic_listing(const std::vector<topics::TopicView>& views,
                                        const std::unordered_map<std::string, std::string>& texts,
                                        const std::string& header_comment) {
  std::string out = "# " + header_comment + "\n";
  out += "topic_id\ttop_words\ttop_documents\n";
  for (const auto& v : views) {
    std::vector<std::string> docs;
    for (const auto& id : v.top_docs) {
      auto it = texts.find(id);
      docs.push_back(text::collapse_whitespace(it == texts.end() ? id : it->second));
    }
    out += std::to_string(v.topic_id) + "\t" + text::tsv_cell(topics::render_top_words(v)) + "\t" +
           text::tsv_cell(text::join(docs, " | ")) + "\n";
  }
  return out;
}

// ------------------------------------------------------------ experiment 1

struct GridModel {
  std::string level;
  double scaling_value = 0.0;
  topics::DocumentType document_type = topics::DocumentType::report;
};

inline std::vector<GridModel> experiment1_grid(const RunConfig& cfg) {
  std::vector<GridModel> grid;
  for (const auto& dt : cfg.list("document_types")) {
    const auto doc = topics::parse_document_type(dt);
    for (const auto& s : cfg.list("scaling_factors")) {
      const double v = text::parse_double(s, "scaling_factors");
      grid.push_back({topics::scaling_level_name(v), v, doc});
    }
  }
  if (grid.empty()) throw ValidationError("experiment 1 grid is empty");
  return grid;
}

struct SheetRef {
  std::string sheet;  // opaque file stem shown to reviewers
  std::string model_id;
  GridModel model;
  topics::ViewMode view = topics::ViewMode::both;
};

/// Sheets get opaque names in a seeded order so file names reveal nothing
/// about the model behind them.
inline std::vector<SheetRef> experiment1_sheets(const RunConfig& cfg) {
  std::vector<SheetRef> refs;
  std::vector<topics::ViewMode> views;
  for (const auto& v : cfg.list("views")) views.push_back(topics::parse_view_mode(v));
  for (const auto& m : experiment1_grid(cfg))
    for (auto v : views) refs.push_back({"", topics::make_model_id(m.level, m.document_type, v), m, v});
  std::vector<std::size_t> order(refs.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(cfg.seed("shuffle_seed"), 0x5eed));
  rng.shuffle(order.begin(), order.end());
  const int width = static_cast<int>(std::to_string(refs.size()).size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    char name[32];
    std::snprintf(name, sizeof name, "sheet-%0*zu", width, pos + 1);
    refs[order[pos]].sheet = name;
  }
  return refs;
}

struct Experiment1Result {
  std::size_t models_fitted = 0;
  std::size_t sheets_written = 0;
  std::vector<topics::ModelSummary> summaries;
  bool regression_done = false;
  std::vector<std::string> warnings;
};

inline lda::Hyperparams experiment1_hyper(const RunConfig& cfg, double scaling, std::size_t index) {
  return lda::Hyperparams::make(cfg.count("num_topics"), scaling, cfg.number("beta"), cfg.count("sweeps"),
                                cfg.count("burn_in"), derive_seed(cfg.seed("sampler_seed"), index));
}

/// Summaries, ranking and (when there are enough rows) the crude/adjusted
/// regression from scored sheets. Returns whether the regression ran.
inline bool write_experiment1_analysis(const std::vector<topics::ModelSummary>& summaries, ArtifactWriter& w,
                                       const std::string& prefix, const RunConfig& cfg,
                                       std::vector<std::string>& warnings) {
  const std::string prov = cfg.provenance();
  w.write(prefix + "summaries.tsv", topics::render_summaries_tsv(summaries, true, prov));
  w.write(prefix + "ranking.tsv", topics::render_summaries_tsv(topics::rank_models(summaries), true, prov));
  try {
    const auto table = regress::crude_and_adjusted(summaries, regress::score_design());
    w.write(prefix + "regression.tsv", regress::render_table_tsv(table, prov));
    w.write(prefix + "coefficients.tsv", regress::render_coefficients_tsv(table, prov));
    return true;
  } catch (const ValidationError& e) {
    warnings.push_back(std::string("regression refused: ") + e.what());
    return false;
  }
}

/// Fits the scaling-factor x corpus-type grid and writes one blinded review
/// sheet per model and view. When `scores_dir` holds filled sheets, imports
/// them and writes summaries, ranking and regression tables.
inline Experiment1Result run_experiment1(const RunConfig& cfg, const Log& log = {}) {
  cfg.validate_paths();
  if (!cfg.has("corpus")) throw ValidationError("experiment 1 needs 'corpus'");
  ArtifactWriter w(fs::path(cfg.get("output_dir")) / "exp1");
  const std::string prov = cfg.provenance();
  Experiment1Result res;

  const auto setup = text_setup(cfg);
  const auto reports = ingest(cfg.get("corpus"));
  w.write("reports.jsonl", render_reports_jsonl(reports, meta_json(cfg)));
  const auto refs = experiment1_sheets(cfg);
  const auto vopt = view_options(cfg);

  std::map<topics::DocumentType, CorpusBuild> builds;
  const auto grid = experiment1_grid(cfg);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& m = grid[i];
    const std::string corpus_dir = std::string(topics::to_string(m.document_type)) + "/";
    if (!builds.count(m.document_type)) {
      const auto g = m.document_type == topics::DocumentType::report ? Granularity::report : Granularity::sentence;
      builds.emplace(m.document_type, build_corpus(reports, g, setup));
      write_corpus(builds.at(m.document_type), w, corpus_dir, cfg);
    }
    const auto& build = builds.at(m.document_type);
    const std::string stem = text::lowercase(m.level) + "-" + std::string(topics::to_string(m.document_type));
    log("fitting " + stem + " (" + std::to_string(build.docs.size()) + " documents)");
    const auto fit = fit_and_write(build, experiment1_hyper(cfg, m.scaling_value, i), w, "models/" + stem + "/", cfg);
    ++res.models_fitted;
    const auto views = all_views(fit.distributions, build, vopt);
    const auto texts = doc_texts(build.docs);
    for (std::size_t r = 0; r < refs.size(); ++r) {
      const auto& ref = refs[r];
      if (ref.model.level != m.level || ref.model.document_type != m.document_type) continue;
      const auto sheet = topics::export_review_sheet(views, texts, ref.model_id, ref.view,
                                                     derive_seed(cfg.seed("shuffle_seed"), r));
      w.write("sheets/" + ref.sheet + ".tsv", topics::render_reviewer_tsv(sheet, ref.sheet));
      w.write("blinding/" + ref.sheet + ".tsv", topics::render_blinding_tsv(sheet, prov));
      ++res.sheets_written;
    }
  }

  if (cfg.has("scores_dir")) {
    const fs::path dir = cfg.get("scores_dir");
    for (const auto& ref : refs) {
      const fs::path filled = dir / (ref.sheet + ".tsv");
      if (!fs::exists(filled)) continue;
      const auto map = topics::parse_blinding_tsv(text::read_file(w.path("blinding/" + ref.sheet + ".tsv").string()),
                                                  "blinding/" + ref.sheet + ".tsv");
      const auto scores = topics::import_scores(text::read_file(filled.string()), filled.string(), map);
      w.write("scores/" + ref.model_id + ".tsv", topics::render_scores_tsv(scores, prov));
      auto s = topics::summarize_model(scores, ref.model.scaling_value, ref.model.document_type, ref.view);
      s.model_id = ref.model_id;
      res.summaries.push_back(std::move(s));
    }
    if (res.summaries.empty()) {
      res.warnings.push_back("no scored sheets found in " + dir.string());
    } else {
      res.regression_done = write_experiment1_analysis(res.summaries, w, "", cfg, res.warnings);
    }
  }
  for (const auto& m : res.warnings) log("warning: " + m);
  return res;
}

// ------------------------------------------------------------ labeling

struct AnatomyTopics {
  std::vector<Document> docs;  // documents aligned with theta rows
  Matrix theta;
};

struct LabelingResult {
  labels::LabelTable sentences;
  labels::LabelTable reports;
  labels::LabelTable images;
  std::size_t conflicts = 0;
};

/// Topics of every document -> per-label outcomes -> report aggregation ->
/// image propagation. Documents are sentences (or whole reports) whose parent
/// ids are report ids.
inline LabelingResult label_corpus(const std::vector<RawReport>& reports,
                                   const std::map<Anatomy, AnatomyTopics>& by_anatomy, const labels::LabelSet& set) {
  std::unordered_map<std::string, Anatomy> anatomy_of;
  std::vector<std::string> report_ids;
  for (const auto& r : reports) {
    anatomy_of.emplace(r.report_id, r.anatomy);
    report_ids.push_back(r.report_id);
  }
  LabelingResult res;
  res.sentences.names = set.names;
  std::vector<std::string> parent;
  labels::MappingDiagnostics diag;
  for (const auto& [anatomy, at] : by_anatomy) {
    if (at.docs.size() != at.theta.rows())
      throw DataError(std::string(to_string(anatomy)) + ": " + std::to_string(at.docs.size()) + " documents but " +
                      std::to_string(at.theta.rows()) + " theta rows");
    for (std::size_t d = 0; d < at.docs.size(); ++d) {
      const auto& doc = at.docs[d];
      auto it = anatomy_of.find(doc.source_report_id);
      if (it == anatomy_of.end()) throw DataError("document '" + doc.doc_id + "' has no report");
      if (it->second != anatomy)
        throw DataError("document '" + doc.doc_id + "' belongs to a " + std::string(to_string(it->second)) +
                        " report but was modeled as " + std::string(to_string(anatomy)));
      const auto topics = labels::assign_document_topics(at.theta.row(d));
      res.sentences.units.push_back({doc.doc_id, labels::map_topics_to_labels(topics, set, anatomy, &diag)});
      parent.push_back(doc.source_report_id);
    }
  }
  res.conflicts = diag.conflicts;
  res.reports = labels::aggregate_to_reports(res.sentences, parent, report_ids);
  res.images = labels::propagate_to_images(res.reports, reports);
  return res;
}

struct LabelStats {
  std::string label;
  std::size_t pos_docs = 0, neg_docs = 0, pos_images = 0, neg_images = 0;
  std::optional<labels::ModeResult> mode;
  std::optional<eval::ConfusionMatrix> cm;
};

inline std::pair<std::size_t, std::size_t> count_outcomes(const labels::LabelTable& t, std::size_t l) {
  std::size_t pos = 0, neg = 0;
  for (const auto& u : t.units) {
    pos += u.outcomes[l] == LabelOutcome::True;
    neg += u.outcomes[l] == LabelOutcome::False;
  }
  return {pos, neg};
}

/// Counts, mode and CNN-style base accuracy per label.
inline std::string render_label_stats(const std::vector<LabelStats>& rows, const std::string& header_comment) {
  std::string out = "# " + header_comment + "\n";
  out += "label\tno_pos_documents\tno_neg_documents\tno_pos_images\tno_neg_images\tmode\tmode_frequency"
         "\tbase_accuracy\n";
  for (const auto& r : rows) {
    out += r.label + "\t" + std::to_string(r.pos_docs) + "\t" + std::to_string(r.neg_docs) + "\t" +
           std::to_string(r.pos_images) + "\t" + std::to_string(r.neg_images) + "\t";
    if (r.mode)
      out += std::string(r.mode->outcome == LabelOutcome::True ? "Yes" : "No") + "\t" +
             text::format_percent(r.mode->frequency, 0);
    else
      out += "\t";
    out += "\t" + (r.cm ? text::format_percent(eval::base_accuracy(*r.cm), 1) : std::string()) + "\n";
  }
  return out;
}

// ------------------------------------------------------------ experiment 2

inline labels::SplitFractions split_fractions(const RunConfig& cfg) {
  return {cfg.number("train_fraction"), cfg.number("validation_fraction"), cfg.number("test_fraction")};
}

inline classify::TrainOptions train_options(const RunConfig& cfg) {
  return {cfg.count("epochs"), cfg.number("learning_rate"), cfg.number("l2"), cfg.count("batch_size"),
          cfg.seed("train_seed")};
}

inline labels::SplitAssignment split_images(const labels::LabelTable& images, const std::vector<RawReport>& reports,
                                            const RunConfig& cfg) {
  std::vector<std::string> ids;
  for (const auto& u : images.units) ids.push_back(u.unit_id);
  std::unordered_map<std::string, std::string> exam_of;
  for (const auto& r : reports)
    for (const auto& i : r.image_ids) exam_of.emplace(i, r.exam_id);
  return labels::split_dataset(std::move(ids), split_fractions(cfg), cfg.seed("split_seed"),
                               cfg.flag("split_by_exam") ? &exam_of : nullptr);
}

struct Experiment2Result {
  std::vector<LabelStats> stats;
  std::size_t conflicts = 0;
  std::vector<std::string> warnings;
};

inline std::set<std::string> members(const labels::SplitAssignment& s, labels::Split which) {
  auto v = s.members(which);
  return {v.begin(), v.end()};
}

/// Base accuracy on the test split for every label that has predictions.
inline std::vector<LabelStats> label_statistics(const LabelingResult& lab, const eval::PredictionSet& preds,
                                                const labels::SplitAssignment& split,
                                                std::vector<std::string>& warnings) {
  const auto test = members(split, labels::Split::test);
  std::vector<LabelStats> rows;
  for (std::size_t l = 0; l < lab.images.names.size(); ++l) {
    LabelStats s;
    s.label = lab.images.names[l];
    std::tie(s.pos_docs, s.neg_docs) = count_outcomes(lab.reports, l);
    std::tie(s.pos_images, s.neg_images) = count_outcomes(lab.images, l);
    if (s.pos_images + s.neg_images > 0) s.mode = labels::compute_mode(s.pos_images, s.neg_images);
    else warnings.push_back("label '" + s.label + "' has only MISSING outcomes");
    if (std::find(preds.labels.begin(), preds.labels.end(), s.label) != preds.labels.end()) {
      try {
        s.cm = eval::confusion(preds, lab.images, s.label, &test);
      } catch (const DataError& e) {
        warnings.push_back(e.what());
      }
    }
    rows.push_back(std::move(s));
  }
  return rows;
}

inline labels::LabelSet label_definitions(const RunConfig& cfg, const std::map<Anatomy, lda::FitResult>& fits,
                                          const std::map<Anatomy, CorpusBuild>& builds, const TextSetup& setup) {
  const std::string& src = cfg.get("label_defs");
  if (src.empty())
    throw ValidationError(
        "label_defs is not set: author a label definition TSV (label, anatomy, positive_topics, negative_topics) "
        "from the topic listings in exp2/<anatomy>/topics.tsv and rerun with label_defs=<file>");
  if (src != "auto") return labels::read_label_defs(src);
  if (!cfg.has("synth_manifest")) throw ValidationError("label_defs=auto needs synth_manifest");
  const auto findings = synth::parse_manifest(text::read_file(cfg.get("synth_manifest")), cfg.get("synth_manifest"));
  labels::LabelSet set;
  for (const auto& f : findings) set.names.push_back(f.label);
  for (const auto& [anatomy, fit] : fits)
    for (auto& d : synth::auto_label_defs(findings, fit.distributions, builds.at(anatomy).vocabulary, anatomy,
                                          setup.rules, setup.stemmer_ptr()))
      set.add(std::move(d));
  return set;
}

/// Per-anatomy sentence models, label assignment and propagation, mode table,
/// split, reference classifier (or imported predictions) and base accuracy.
inline Experiment2Result run_experiment2(const RunConfig& cfg, const Log& log = {}) {
  cfg.validate_paths();
  if (!cfg.has("corpus")) throw ValidationError("experiment 2 needs 'corpus'");
  if (!cfg.has("features") && !cfg.has("predictions"))
    throw ValidationError("experiment 2 needs 'features' (reference classifier) or 'predictions'");
  ArtifactWriter w(fs::path(cfg.get("output_dir")) / "exp2");
  const std::string prov = cfg.provenance();
  Experiment2Result res;

  const auto setup = text_setup(cfg);
  const auto reports = ingest(cfg.get("corpus"));
  w.write("reports.jsonl", render_reports_jsonl(reports, meta_json(cfg)));

  std::map<Anatomy, CorpusBuild> builds;
  std::map<Anatomy, lda::FitResult> fits;
  for (Anatomy a : {Anatomy::wrist, Anatomy::ankle}) {
    std::vector<RawReport> subset;
    for (const auto& r : reports)
      if (r.anatomy == a) subset.push_back(r);
    if (subset.empty()) continue;
    const std::string dir = std::string(to_string(a)) + "/";
    auto build = build_corpus(subset, Granularity::sentence, setup);
    write_corpus(build, w, dir, cfg);
    log("fitting " + std::string(to_string(a)) + " sentence model (" + std::to_string(build.docs.size()) +
        " documents)");
    const auto hyper = lda::Hyperparams::make(cfg.count("label_num_topics"), cfg.number("label_scaling_factor"),
                                              cfg.number("beta"), cfg.count("sweeps"), cfg.count("burn_in"),
                                              derive_seed(cfg.seed("sampler_seed"), 100 + static_cast<int>(a)));
    auto fit = fit_and_write(build, hyper, w, dir, cfg);
    w.write(dir + "topics.tsv",
            render_topic_listing(all_views(fit.distributions, build, view_options(cfg)), doc_texts(build.docs), prov));
    builds.emplace(a, std::move(build));
    fits.emplace(a, std::move(fit));
  }
  if (fits.empty()) throw DataError("corpus has no reports");

  const auto set = label_definitions(cfg, fits, builds, setup);
  w.write("label_defs.tsv", labels::render_label_defs(set));
  std::map<Anatomy, AnatomyTopics> by_anatomy;
  for (const auto& [a, fit] : fits) by_anatomy.emplace(a, AnatomyTopics{builds.at(a).docs, fit.distributions.theta});
  const auto lab = label_corpus(reports, by_anatomy, set);
  res.conflicts = lab.conflicts;
  if (lab.conflicts > 0)
    res.warnings.push_back(std::to_string(lab.conflicts) + " label conflicts (positive and negative topics in the "
                           "same document) resolved TRUE");
  w.write("labels_sentences.tsv", labels::render_label_table(lab.sentences, prov));
  w.write("labels_reports.tsv", labels::render_label_table(lab.reports, prov));
  w.write("labels_images.tsv", labels::render_label_table(lab.images, prov));

  const auto split = split_images(lab.images, reports, cfg);
  w.write("split.tsv", labels::render_split_tsv(split, prov));

  eval::PredictionSet preds;
  if (cfg.has("predictions")) {
    preds = classify::import_predictions(cfg.get("predictions"), set.names);
  } else {
    const auto features = classify::read_features_tsv(cfg.get("features"));
    const auto model = classify::train_reference(features, lab.images, split, train_options(cfg));
    for (const auto& m : model.warnings) res.warnings.push_back(m);
    w.write("classifier.json", classify::model_to_json(model).dump(1) + "\n");
    w.write("training_log.tsv", "# " + prov + "\n" + classify::render_training_log(model));
    preds = classify::predict(model, features);
    w.write("predictions.tsv", eval::render_predictions_tsv(preds, {prov}));
  }
  res.stats = label_statistics(lab, preds, split, res.warnings);
  w.write("label_stats.tsv", render_label_stats(res.stats, prov));
  for (const auto& m : res.warnings) log("warning: " + m);
  return res;
}

// ------------------------------------------------------------ experiment 3

struct Experiment3Result {
  std::vector<eval::ReviewSample> samples;
  std::vector<eval::AccuracyRow> rows;
  bool true_accuracy_done = false;
};

inline std::vector<std::string> review_labels(const RunConfig& cfg, const eval::PredictionSet& preds) {
  auto chosen = cfg.list("review_labels");
  if (chosen.empty()) return preds.labels;
  for (const auto& l : chosen)
    if (std::find(preds.labels.begin(), preds.labels.end(), l) == preds.labels.end())
      throw ValidationError("review label '" + l + "' has no predictions (available: " +
                            text::join(preds.labels, ", ") + ")");
  return chosen;
}

/// Draws the stratified review samples from the experiment-2 test split; with
/// a gold file, estimates true accuracy per label.
inline Experiment3Result run_experiment3(const RunConfig& cfg, const Log& log = {}) {
  cfg.validate_paths();
  const fs::path exp2 = fs::path(cfg.get("output_dir")) / "exp2";
  ArtifactWriter w(fs::path(cfg.get("output_dir")) / "exp3");
  const std::string prov = cfg.provenance();
  const auto images = labels::read_label_table((exp2 / "labels_images.tsv").string());
  const auto split = labels::read_split_tsv((exp2 / "split.tsv").string());
  const auto preds = cfg.has("predictions")
                         ? classify::import_predictions(cfg.get("predictions"), images.names)
                         : eval::read_predictions_tsv((exp2 / "predictions.tsv").string(), images.names);
  const auto test = members(split, labels::Split::test);
  const auto chosen = review_labels(cfg, preds);

  Experiment3Result res;
  std::vector<std::string> failures;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    try {
      res.samples.push_back(eval::draw_review_sample(preds, images, chosen[i], test, cfg.count("review_per_stratum"),
                                                     derive_seed(cfg.seed("sample_seed"), i)));
    } catch (const DataError& e) {
      failures.push_back(e.what());
    }
  }
  if (!failures.empty()) throw DataError(text::join(failures, "; "));
  w.write("review_sheet.tsv", eval::render_review_sheet(res.samples, cfg.seed("sample_seed"), {prov}));
  w.write("review_key.tsv", eval::render_review_key(res.samples, {prov}));
  log("drew " + std::to_string(2 * cfg.count("review_per_stratum") * res.samples.size()) + " images for review");

  if (cfg.has("gold")) {
    const auto gold = eval::read_gold_tsv(cfg.get("gold"));
    for (std::size_t i = 0; i < res.samples.size(); ++i) {
      const auto& s = res.samples[i];
      eval::AccuracyRow row;
      row.label = s.label;
      row.mode = labels::compute_mode(images, images.label_index(s.label));
      row.cm = eval::confusion(preds, images, s.label, &test);
      row.base = eval::base_accuracy(row.cm);
      row.true_acc = eval::true_accuracy(eval::stratum_outcomes(s, gold, preds), row.cm, cfg.count("resamples"),
                                         derive_seed(cfg.seed("bootstrap_seed"), i));
      res.rows.push_back(std::move(row));
    }
    w.write("accuracy.tsv", eval::render_accuracy_tsv(res.rows, {prov}));
    res.true_accuracy_done = true;
  }
  return res;
}

// ------------------------------------------------------------ synthetic data

/// Writes reports, features, gold annotations and the keyword manifest.
inline void write_study(const synth::SyntheticStudy& s, const fs::path& dir, const nlohmann::ordered_json& meta) {
  ArtifactWriter w(dir);
  w.write("reports.jsonl", render_reports_jsonl(s.reports, meta));
  w.write("features.tsv", classify::render_features_tsv(s.features));
  w.write("gold.tsv", synth::render_gold(s));
  w.write("manifest.json", synth::manifest_json(s, meta).dump(1) + "\n");
}

}  // namespace radlabel::pipeline
