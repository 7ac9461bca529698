// radlabel command-line interface.
//
// Exit codes: 0 success, 2 validation error (bad arguments or configuration),
// 3 data error (missing or malformed input), 1 anything else.

#include <filesystem>
#include <iostream>
#include <map>
#include <regex>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "radlabel/radlabel.hpp"

namespace fs = std::filesystem;
using namespace radlabel;

namespace {

struct Context {
  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::vector<CLI::Option*> key_options;

  RunConfig config() const {
    RunConfig c = config_path.empty() ? RunConfig() : RunConfig::load(config_path);
    for (const auto& [k, v] : overrides) c.set(k, v);
    return c;
  }
};

void write_out(const std::string& path, std::string_view content) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  text::write_file(path, content);
}

std::string require(const RunConfig& cfg, std::string_view key, std::string_view command) {
  if (!cfg.has(key))
    throw ValidationError(std::string(command) + " needs --" + std::string(key) + " (or '" + std::string(key) +
                          "' in the config file)");
  return cfg.get(key);
}

std::set<std::string> split_members(const labels::SplitAssignment& s, labels::Split which) {
  auto v = s.members(which);
  return {v.begin(), v.end()};
}

/// Model id and view recorded in a blinding file header.
std::string blinding_model_id(const text::TsvTable& table, const std::string& source) {
  static const std::regex re(R"(^#\s*model\s+(\S+)\s+view\s+(\S+))");
  for (const auto& c : table.comments) {
    std::smatch m;
    if (std::regex_search(c, m, re)) return m[1];
  }
  throw DataError(source + ": no '# model <id> view <view>' line");
}

void print_warnings(const std::vector<std::string>& w) {
  for (const auto& m : w) std::cerr << "warning: " << m << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"radlabel: LDA-based weak labeling of radiology reports and classifier evaluation"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  Context ctx;
  app.add_option("--config", ctx.config_path, "key = value configuration file");
  for (const auto& k : kConfigKeys) {
    const std::string name(k.name);
    auto* opt = app.add_option_function<std::string>(
        "--" + name, [&ctx, name](const std::string& v) { ctx.overrides[name] = v; },
        std::string(k.help) + " [default: " + std::string(k.default_value) + "]");
    opt->group("Configuration keys");
    ctx.key_options.push_back(opt);
  }

  std::function<void()> action;
  auto cmd = [&](const std::string& name, const std::string& help) {
    auto* c = app.add_subcommand(name, help);
    return c;
  };

  // ------------------------------------------------------------ corpus
  std::string out, out_dir, docs_path, vocab_path, model_path, labels_path, split_path, key_path, sheet_path,
      blinding_path, summaries_path, reports_path, listing_path, coefficients_path, log_path;
  std::string granularity = "sentence", anatomy, view = "both", model_id, doc_type;
  std::size_t topics_n = 0;
  double scaling = 0.0;
  std::vector<std::string> docs_list, theta_list, label_list;

  auto* ingest = cmd("ingest", "scrub reports (placeholders for dates and exam ids)");
  ingest->add_option("--out", out, "scrubbed reports (JSON lines)")->required();
  ingest->callback([&] {
    action = [&] {
      const auto cfg = ctx.config();
      const auto reports = pipeline::ingest(require(cfg, "corpus", "ingest"));
      write_out(out, render_reports_jsonl(reports, pipeline::meta_json(cfg)));
      std::cerr << reports.size() << " reports\n";
    };
  });

  auto* preprocess = cmd("preprocess", "tokenize reports into documents and build the vocabulary");
  preprocess->add_option("--reports", reports_path, "reports (JSON lines); defaults to the corpus key");
  preprocess->add_option("--granularity", granularity, "report or sentence")->check(CLI::IsMember({"report", "sentence"}));
  preprocess->add_option("--anatomy", anatomy, "keep only wrist or ankle reports")->check(CLI::IsMember({"wrist", "ankle"}));
  preprocess->add_option("--docs", docs_path, "output documents (JSON lines)")->required();
  preprocess->add_option("--vocab", vocab_path, "output vocabulary TSV")->required();
  preprocess->callback([&] {
    action = [&] {
      const auto cfg = ctx.config();
      cfg.validate_paths();
      const auto setup = pipeline::text_setup(cfg);
      auto reports = reports_path.empty() ? pipeline::ingest(require(cfg, "corpus", "preprocess"))
                                          : read_reports_jsonl(reports_path);
      if (!anatomy.empty()) {
        const Anatomy a = parse_anatomy(anatomy);
        std::erase_if(reports, [&](const RawReport& r) { return r.anatomy != a; });
      }
      const auto build = pipeline::build_corpus(reports, parse_granularity(granularity), setup);
      write_out(docs_path, render_documents_jsonl(build.docs, pipeline::meta_json(cfg)));
      write_out(vocab_path, render_vocabulary_tsv(build.vocabulary, cfg.provenance()));
      std::cerr << build.docs.size() << " documents, " << build.vocabulary.size() << " terms; removed "
                << build.removed_short_report << " short-report and " << build.removed_few_tokens
                << " short documents, " << build.dropped_docs << " documents empty after pruning\n";
    };
  });

  // --------------------------------------------------------------- lda
  auto* fit = cmd("fit-lda", "fit a topic model with collapsed Gibbs sampling");
  fit->add_option("--docs", docs_path, "documents (JSON lines)")->required();
  fit->add_option("--vocab", vocab_path, "vocabulary TSV")->required();
  fit->add_option("--topics", topics_n, "number of topics [default: num_topics]");
  fit->add_option("--scaling", scaling, "alpha scaling factor [default: first of scaling_factors]");
  fit->add_option("--out-dir", out_dir, "writes model.json, theta.tsv, phi.tsv")->required();
  fit->callback([&] {
    action = [&] {
      const auto cfg = ctx.config();
      const auto docs = read_documents_jsonl(docs_path);
      const auto vocab = read_vocabulary_tsv(vocab_path);
      const double s = scaling > 0 ? scaling : text::parse_double(cfg.list("scaling_factors").at(0), "scaling_factors");
      const auto hyper = lda::Hyperparams::make(topics_n ? topics_n : cfg.count("num_topics"), s, cfg.number("beta"),
                                                cfg.count("sweeps"), cfg.count("burn_in"), cfg.seed("sampler_seed"));
      const auto corpus = lda::encode_corpus(docs, vocab);
      const auto result = lda::fit(corpus, hyper);
      std::vector<std::string> ids;
      for (const auto& d : docs) ids.push_back(d.doc_id);
      const fs::path dir(out_dir);
      write_out((dir / "model.json").string(),
                lda::render_model_json(result.model, corpus, vocab_path, pipeline::meta_json(cfg)));
      write_out((dir / "theta.tsv").string(), lda::render_theta_tsv(result.distributions.theta, ids, cfg.provenance()));
      write_out((dir / "phi.tsv").string(), lda::render_phi_tsv(result.distributions.phi, vocab.terms, cfg.provenance()));
      std::cerr << "final log likelihood " << result.model.loglik_trace.back() << "\n";
    };
  });

  // ------------------------------------------------------------ topics
  auto* exp_topics = cmd("export-topics", "write a blinded review sheet and its blinding map");
  exp_topics->add_option("--model", model_path, "model.json")->required();
  exp_topics->add_option("--docs", docs_path, "documents the model was fitted on")->required();
  exp_topics->add_option("--vocab", vocab_path, "vocabulary TSV")->required();
  exp_topics->add_option("--view", view, "words, docs or both")->check(CLI::IsMember({"words", "docs", "both"}));
  exp_topics->add_option("--model-id", model_id, "model id, e.g. small-sentences-both [default: derived]");
  exp_topics->add_option("--sheet", sheet_path, "reviewer sheet TSV")->required();
  exp_topics->add_option("--blinding", blinding_path, "blinding map TSV")->required();
  exp_topics->add_option("--listing", listing_path, "unblinded topic listing TSV");
  exp_topics->callback([&] {
    action = [&] {
      const auto cfg = ctx.config();
      const auto loaded = lda::read_model_json(model_path);
      const auto docs = read_documents_jsonl(docs_path);
      const auto vocab = read_vocabulary_tsv(vocab_path);
      if (docs.size() != loaded.corpus.docs.size() || vocab.size() != loaded.model.vocab_size)
        throw DataError("documents or vocabulary do not match the model");
      pipeline::CorpusBuild build{docs, vocab};
      const auto dist = lda::estimate_distributions(loaded.model);
      const auto views = pipeline::all_views(dist, build, pipeline::view_options(cfg));
      const auto texts = pipeline::doc_texts(docs);
      const auto vm = topics::parse_view_mode(view);
      std::string id = model_id;
      if (id.empty()) {
        const auto dt = docs.empty() || docs[0].granularity == Granularity::report ? topics::DocumentType::report
                                                                                   : topics::DocumentType::sentences;
        id = topics::make_model_id(topics::scaling_level_name(loaded.model.hyper.scaling_factor), dt, vm);
      }
      const auto sheet = topics::export_review_sheet(views, texts, id, vm, cfg.seed("shuffle_seed"));
      write_out(sheet_path, topics::render_reviewer_tsv(sheet));
      write_out(blinding_path, topics::render_blinding_tsv(sheet, cfg.provenance()));
      if (!listing_path.empty()) write_out(listing_path, pipeline::render_topic_listing(views, texts, cfg.provenance()));
    };
  });

  auto* imp_scores = cmd("import-scores", "join scored sheets to topic ids and summarize each model");
  std::string sheets_dir, blinding_dir;
  imp_scores->add_option("--sheets-dir", sheets_dir, "directory of filled reviewer sheets")->required();
  imp_scores->add_option("--blinding-dir", blinding_dir, "directory of blinding maps (same file names)")->required();
  imp_scores->add_option("--out-dir", out_dir, "writes scores/<model_id>.tsv and summaries.tsv")->required();
  imp_scores->callback([&] {
    action = [&] {
      const auto cfg = ctx.config();
      std::vector<fs::path> maps;
      for (const auto& e : fs::directory_iterator(blinding_dir))
        if (e.path().extension() == ".tsv") maps.push_back(e.path());
      std::sort(maps.begin(), maps.end());
      std::vector<topics::ModelSummary> summaries;
      for (const auto& m : maps) {
        const fs::path filled = fs::path(sheets_dir) / m.filename();
        if (!fs::exists(filled)) continue;
        const std::string content = text::read_file(m.string());
        const std::string id = blinding_model_id(text::parse_tsv(content, m.string()), m.string());
        const auto settings = topics::parse_model_id(id);
        const auto scores = topics::import_scores(text::read_file(filled.string()), filled.string(),
                                                  topics::parse_blinding_tsv(content, m.string()));
        write_out((fs::path(out_dir) / "scores" / (id + ".tsv")).string(),
                  topics::render_scores_tsv(scores, cfg.provenance()));
        auto s = topics::summarize_model(scores, settings.scaling_value, settings.document_type, settings.view_mode);
        s.model_id = id;
        summaries.push_back(std::move(s));
      }
      if (summaries.empty()) throw DataError("no filled sheet matches a blinding map");
      write_out((fs::path(out_dir) / "summaries.tsv").string(),
                topics::render_summaries_tsv(summaries, true, cfg.provenance()));
      std::cerr << summaries.size() << " models summarized\n";
    };
  });

  auto* rank = cmd("rank", "rank models by mean score, unique labels, median");
  rank->add_option("--summaries", summaries_path, "model summaries TSV")->required();
  rank->add_option("--out", out, "ranked summaries TSV")->required();
  rank->callback([&] {
    action = [&] {
      const auto cfg = ctx.config();
      const auto table = topics::read_summaries_tsv(summaries_path);
      print_warnings(table.warnings);
      write_out(out, topics::render_summaries_tsv(topics::rank_models(table.rows), false, cfg.provenance()));
    };
  });

  auto* reg = cmd("regress", "crude and adjusted regression of mean score on model settings");
  reg->add_option("--summaries", summaries_path, "model summaries TSV")->required();
  reg->add_option("--out", out, "coefficient table TSV")->required();
  reg->add_option("--coefficients", coefficients_path, "full-precision coefficients TSV");
  reg->callback([&] {
    action = [&] {
      const auto cfg = ctx.config();
      const auto table = topics::read_summaries_tsv(summaries_path);
      print_warnings(table.warnings);
      const auto result = regress::crude_and_adjusted(table.rows, regress::score_design());
      write_out(out, regress::render_table_tsv(result, cfg.provenance()));
      if (!coefficients_path.empty())
        write_out(coefficients_path, regress::render_coefficients_tsv(result, cfg.provenance()));
    };
  });

  // ------------------------------------------------------------ labels
  auto* label = cmd("label", "derive sentence, report and image labels from topic mixtures");
  label->add_option("--reports", reports_path, "scrubbed reports (JSON lines)")->required();
  label->add_option("--docs", docs_list, "documents per anatomy model (repeatable)")->required();
  label->add_option("--theta", theta_list, "theta TSV per anatomy model, same order as --docs")->required();
  label->add_option("--out-dir", out_dir, "writes labels_sentences/reports/images.tsv")->required();
  label->callback([&] {
    action = [&] {
      const auto cfg = ctx.config();
      const auto set = labels::read_label_defs(require(cfg, "label_defs", "label"));
      const auto reports = read_reports_jsonl(reports_path);
      if (docs_list.size() != theta_list.size()) throw ValidationError("one --theta per --docs required");
      std::unordered_map<std::string, Anatomy> anatomy_of;
      for (const auto& r : reports) anatomy_of.emplace(r.report_id, r.anatomy);
      std::map<Anatomy, pipeline::AnatomyTopics> by_anatomy;
      for (std::size_t i = 0; i < docs_list.size(); ++i) {
        auto docs = read_documents_jsonl(docs_list[i]);
        auto theta = lda::read_theta_tsv(theta_list[i]);
        if (docs.empty()) continue;
        for (std::size_t d = 0; d < docs.size(); ++d)
          if (d >= theta.doc_ids.size() || theta.doc_ids[d] != docs[d].doc_id)
            throw DataError(theta_list[i] + ": rows do not follow the documents of " + docs_list[i]);
        auto it = anatomy_of.find(docs[0].source_report_id);
        if (it == anatomy_of.end()) throw DataError(docs_list[i] + ": documents do not match the reports");
        if (by_anatomy.count(it->second))
          throw ValidationError("two models given for " + std::string(to_string(it->second)));
        by_anatomy.emplace(it->second, pipeline::AnatomyTopics{std::move(docs), std::move(theta.theta)});
      }
      const auto lab = pipeline::label_corpus(reports, by_anatomy, set);
      const fs::path dir(out_dir);
      write_out((dir / "labels_sentences.tsv").string(), labels::render_label_table(lab.sentences, cfg.provenance()));
      write_out((dir / "labels_reports.tsv").string(), labels::render_label_table(lab.reports, cfg.provenance()));
      write_out((dir / "labels_images.tsv").string(), labels::render_label_table(lab.images, cfg.provenance()));
      if (lab.conflicts) std::cerr << lab.conflicts << " conflicting documents resolved TRUE\n";
    };
  });

  auto* split = cmd("split", "seeded train/validation/test split of labeled images");
  split->add_option("--labels", labels_path, "image labels TSV")->required();
  split->add_option("--reports", reports_path, "reports, needed with split_by_exam");
  split->add_option("--out", out, "split TSV")->required();
  split->callback([&] {
    action = [&] {
      const auto cfg = ctx.config();
      const auto images = labels::read_label_table(labels_path);
      std::vector<RawReport> reports;
      if (cfg.flag("split_by_exam")) {
        if (reports_path.empty()) throw ValidationError("split_by_exam needs --reports");
        reports = read_reports_jsonl(reports_path);
      }
      write_out(out, labels::render_split_tsv(pipeline::split_images(images, reports, cfg), cfg.provenance()));
    };
  });

  // ---------------------------------------------------------- classify
  auto* train = cmd("train", "train the reference linear classifier on the train split");
  train->add_option("--labels", labels_path, "image labels TSV")->required();
  train->add_option("--split", split_path, "split TSV")->required();
  train->add_option("--out", out, "model JSON")->required();
  train->add_option("--log", log_path, "per-epoch training log TSV");
  train->callback([&] {
    action = [&] {
      const auto cfg = ctx.config();
      const auto features = classify::read_features_tsv(require(cfg, "features", "train"));
      const auto model = classify::train_reference(features, labels::read_label_table(labels_path),
                                                   labels::read_split_tsv(split_path), pipeline::train_options(cfg));
      print_warnings(model.warnings);
      write_out(out, classify::model_to_json(model).dump(1) + "\n");
      if (!log_path.empty()) write_out(log_path, "# " + cfg.provenance() + "\n" + classify::render_training_log(model));
    };
  });

  auto* predict = cmd("predict", "score feature vectors with a trained classifier");
  predict->add_option("--model", model_path, "model JSON")->required();
  predict->add_option("--out", out, "predictions TSV")->required();
  predict->callback([&] {
    action = [&] {
      const auto cfg = ctx.config();
      const auto preds =
          classify::predict(classify::read_model(model_path), classify::read_features_tsv(require(cfg, "features", "predict")));
      write_out(out, eval::render_predictions_tsv(preds, {cfg.provenance()}));
    };
  });

  // -------------------------------------------------------------- eval
  auto* eval_base = cmd("eval-base", "mode and base accuracy per label on the test split");
  eval_base->add_option("--labels", labels_path, "image labels TSV")->required();
  eval_base->add_option("--split", split_path, "split TSV")->required();
  eval_base->add_option("--out", out, "accuracy TSV")->required();
  eval_base->callback([&] {
    action = [&] {
      const auto cfg = ctx.config();
      const auto images = labels::read_label_table(labels_path);
      const auto preds = eval::read_predictions_tsv(require(cfg, "predictions", "eval-base"), images.names);
      const auto test = split_members(labels::read_split_tsv(split_path), labels::Split::test);
      std::vector<eval::AccuracyRow> rows;
      for (const auto& l : preds.labels) {
        eval::AccuracyRow r;
        r.label = l;
        r.mode = labels::compute_mode(images, images.label_index(l));
        r.cm = eval::confusion(preds, images, l, &test);
        r.base = eval::base_accuracy(r.cm);
        rows.push_back(std::move(r));
      }
      write_out(out, eval::render_accuracy_tsv(rows, {cfg.provenance()}));
    };
  });

  auto* sample = cmd("sample-review", "draw hit/miss review samples from the test split");
  sample->add_option("--labels", labels_path, "image labels TSV")->required();
  sample->add_option("--split", split_path, "split TSV")->required();
  sample->add_option("--sheet", sheet_path, "blinded review sheet TSV")->required();
  sample->add_option("--key", key_path, "stratum key TSV")->required();
  sample->callback([&] {
    action = [&] {
      const auto cfg = ctx.config();
      const auto images = labels::read_label_table(labels_path);
      const auto preds = eval::read_predictions_tsv(require(cfg, "predictions", "sample-review"), images.names);
      const auto test = split_members(labels::read_split_tsv(split_path), labels::Split::test);
      const auto chosen = pipeline::review_labels(cfg, preds);
      std::vector<eval::ReviewSample> samples;
      std::vector<std::string> failures;
      for (std::size_t i = 0; i < chosen.size(); ++i) {
        try {
          samples.push_back(eval::draw_review_sample(preds, images, chosen[i], test, cfg.count("review_per_stratum"),
                                                     derive_seed(cfg.seed("sample_seed"), i)));
        } catch (const DataError& e) {
          failures.push_back(e.what());
        }
      }
      if (!failures.empty()) throw DataError(text::join(failures, "; "));
      write_out(sheet_path, eval::render_review_sheet(samples, cfg.seed("sample_seed"), {cfg.provenance()}));
      write_out(key_path, eval::render_review_key(samples, {cfg.provenance()}));
    };
  });

  auto* imp_gold = cmd("import-gold", "validate and adjudicate gold annotations against a review key");
  imp_gold->add_option("--key", key_path, "stratum key TSV")->required();
  imp_gold->add_option("--out", out, "adjudicated gold TSV")->required();
  imp_gold->callback([&] {
    action = [&] {
      const auto cfg = ctx.config();
      const auto gold = eval::read_gold_tsv(require(cfg, "gold", "import-gold"));
      std::vector<std::string> missing;
      for (const auto& s : eval::read_review_key(key_path))
        for (const auto* ids : {&s.hits, &s.misses})
          for (const auto& id : *ids)
            if (!gold.present.count({id, s.label})) missing.push_back(id + "/" + s.label);
      if (!missing.empty())
        throw DataError("gold standard missing for " + std::to_string(missing.size()) + " sampled pair(s): " +
                        text::join(missing, ", "));
      eval::GoldStandard adjudicated;
      for (const auto& [key, present] : gold.present)
        adjudicated.annotations.push_back({key.first, key.second, present, "adjudicated"});
      write_out(out, eval::render_gold_tsv(adjudicated));
    };
  });

  auto* eval_true = cmd("eval-true", "true accuracy with percentile bootstrap intervals");
  eval_true->add_option("--labels", labels_path, "image labels TSV")->required();
  eval_true->add_option("--split", split_path, "split TSV")->required();
  eval_true->add_option("--key", key_path, "stratum key TSV")->required();
  eval_true->add_option("--out", out, "accuracy TSV")->required();
  eval_true->callback([&] {
    action = [&] {
      const auto cfg = ctx.config();
      const auto images = labels::read_label_table(labels_path);
      const auto preds = eval::read_predictions_tsv(require(cfg, "predictions", "eval-true"), images.names);
      const auto gold = eval::read_gold_tsv(require(cfg, "gold", "eval-true"));
      const auto test = split_members(labels::read_split_tsv(split_path), labels::Split::test);
      std::vector<eval::AccuracyRow> rows;
      const auto samples = eval::read_review_key(key_path);
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        eval::AccuracyRow r;
        r.label = s.label;
        r.mode = labels::compute_mode(images, images.label_index(s.label));
        r.cm = eval::confusion(preds, images, s.label, &test);
        r.base = eval::base_accuracy(r.cm);
        r.true_acc = eval::true_accuracy(eval::stratum_outcomes(s, gold, preds), r.cm, cfg.count("resamples"),
                                         derive_seed(cfg.seed("bootstrap_seed"), i));
        rows.push_back(std::move(r));
      }
      write_out(out, eval::render_accuracy_tsv(rows, {cfg.provenance()}));
    };
  });

  // ------------------------------------------------------------- synth
  auto* syn = cmd("synth", "generate a synthetic study: reports, features, gold, keyword manifest");
  synth::ReportOptions so;
  syn->add_option("--out-dir", out_dir, "output directory")->required();
  syn->add_option("--exams", so.num_exams, "examinations (one report each)");
  syn->add_option("--labels", so.num_labels, "number of findings (1-4)");
  syn->add_option("--min-images", so.min_images, "minimum images per examination");
  syn->add_option("--max-images", so.max_images, "maximum images per examination");
  syn->add_option("--mention-rate", so.mention_rate, "probability a report mentions a finding");
  syn->add_option("--corruption", so.corruption_rate, "probability a mention contradicts the truth");
  syn->add_option("--signal", so.signal_strength, "feature signal strength");
  syn->add_option("--seed", so.seed, "generator seed");
  syn->callback([&] {
    action = [&] {
      const auto study = synth::generate_study(so);
      nlohmann::ordered_json meta = {{"tool", "radlabel"},
                                     {"version", kVersion},
                                     {"generator", "synth"},
                                     {"seed", so.seed},
                                     {"exams", so.num_exams},
                                     {"corruption", so.corruption_rate}};
      pipeline::write_study(study, out_dir, meta);
      std::cerr << study.reports.size() << " reports, " << study.features.rows.size() << " images\n";
    };
  });

  // ------------------------------------------------------- experiments
  auto* e1 = cmd("experiment1", "fit the model grid and write review sheets; analyze scored sheets");
  e1->callback([&] {
    action = [&] {
      const auto r = pipeline::run_experiment1(ctx.config());
      std::cerr << r.models_fitted << " models fitted, " << r.sheets_written << " review sheets written";
      if (!r.summaries.empty()) std::cerr << ", " << r.summaries.size() << " models summarized";
      std::cerr << "\n";
    };
  });
  auto* e2 = cmd("experiment2", "label images from anatomy topic models, train, and report base accuracy");
  e2->callback([&] {
    action = [&] {
      const auto r = pipeline::run_experiment2(ctx.config());
      std::cerr << r.stats.size() << " labels\n";
    };
  });
  auto* e3 = cmd("experiment3", "draw review samples; with gold, estimate true accuracy");
  e3->callback([&] {
    action = [&] {
      const auto r = pipeline::run_experiment3(ctx.config());
      std::cerr << r.samples.size() << " labels sampled" << (r.true_accuracy_done ? ", true accuracy estimated" : "")
                << "\n";
    };
  });

  auto* show = cmd("show-config", "print the resolved configuration and its hash");
  show->callback([&] {
    action = [&] {
      const auto cfg = ctx.config();
      std::cout << "# " << cfg.provenance() << "\n" << cfg.render();
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    if (action) action();
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
