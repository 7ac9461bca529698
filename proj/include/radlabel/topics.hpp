#pragma once

// Topic presentation for blinded human review, score import, per-model
// score summaries and model ranking.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "radlabel/error.hpp"
#include "radlabel/lda.hpp"
#include "radlabel/matrix.hpp"
#include "radlabel/random.hpp"
#include "radlabel/text.hpp"

namespace radlabel::topics {

enum class ViewMode { words, docs, both };

inline std::string_view to_string(ViewMode v) {
  switch (v) {
    case ViewMode::words: return "words";
    case ViewMode::docs: return "docs";
    case ViewMode::both: return "both";
  }
  return "both";
}

inline ViewMode parse_view_mode(std::string_view s) {
  const std::string v = text::lowercase(text::trim(s));
  if (v == "words") return ViewMode::words;
  if (v == "docs" || v == "documents") return ViewMode::docs;
  if (v == "both") return ViewMode::both;
  throw DataError("unknown view '" + std::string(s) + "' (expected words, docs or both)");
}

inline constexpr ViewMode kAllViews[] = {ViewMode::words, ViewMode::docs, ViewMode::both};

struct ViewOptions {
  double min_word_probability = 0.03;
  std::size_t max_docs = 15;
};

struct TopicView {
  std::size_t topic_id = 0;
  std::vector<std::pair<std::string, double>> top_words;  // probability >= threshold, descending
  std::vector<std::string> top_docs;                      // by descending theta[d, topic]
};

/// Ties are broken by term / document identifier ascending.
inline TopicView build_topic_view(const lda::TopicDistributions& dist, const std::vector<std::string>& terms,
                                  const std::vector<std::string>& doc_ids, std::size_t topic_id,
                                  const ViewOptions& opt = {}) {
  if (topic_id >= dist.phi.rows())
    throw ValidationError("topic " + std::to_string(topic_id) + " out of range (model has " +
                          std::to_string(dist.phi.rows()) + " topics)");
  if (terms.size() != dist.phi.cols()) throw ValidationError("term list does not match phi columns");
  if (doc_ids.size() != dist.theta.rows()) throw ValidationError("document id list does not match theta rows");
  TopicView v;
  v.topic_id = topic_id;
  for (std::size_t w = 0; w < terms.size(); ++w) {
    const double p = dist.phi(topic_id, w);
    if (p >= opt.min_word_probability) v.top_words.emplace_back(terms[w], p);
  }
  std::sort(v.top_words.begin(), v.top_words.end(),
            [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; });

  std::vector<std::size_t> order(doc_ids.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t keep = std::min(opt.max_docs, order.size());
  auto by_theta = [&](std::size_t a, std::size_t b) {
    const double ta = dist.theta(a, topic_id), tb = dist.theta(b, topic_id);
    return ta != tb ? ta > tb : doc_ids[a] < doc_ids[b];
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(), by_theta);
  for (std::size_t i = 0; i < keep; ++i) v.top_docs.push_back(doc_ids[order[i]]);
  return v;
}

/// "radius (27.6%), distalt (14.7%), ..."
inline std::string render_top_words(const TopicView& v) {
  std::vector<std::string> parts;
  for (const auto& [term, p] : v.top_words) parts.push_back(term + " (" + text::format_percent(p) + ")");
  return text::join(parts, ", ");
}

// ------------------------------------------------------------ review sheet

struct ReviewEntry {
  std::size_t sheet_position = 0;  // 1-based
  std::string content;
};

struct ReviewSheet {
  std::string model_id;
  ViewMode view_mode = ViewMode::both;
  std::vector<ReviewEntry> entries;
  std::vector<std::size_t> blinding_map;  // sheet position - 1 -> topic id
  std::uint64_t seed = 0;
};

/// One entry per topic in a seeded random order; content limited to the view.
/// `doc_text` maps document ids to the text a reviewer reads.
inline ReviewSheet export_review_sheet(const std::vector<TopicView>& views,
                                       const std::unordered_map<std::string, std::string>& doc_text,
                                       std::string model_id, ViewMode view_mode, std::uint64_t seed) {
  ReviewSheet sheet;
  sheet.model_id = std::move(model_id);
  sheet.view_mode = view_mode;
  sheet.seed = seed;
  std::vector<std::size_t> order(views.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const TopicView& v = views[order[pos]];
    std::string words = "words: " + render_top_words(v);
    std::vector<std::string> docs;
    for (const auto& id : v.top_docs) {
      auto it = doc_text.find(id);
      docs.push_back(text::collapse_whitespace(it == doc_text.end() ? id : it->second));
    }
    std::string documents = "documents: " + text::join(docs, " | ");
    std::string content;
    switch (view_mode) {
      case ViewMode::words: content = words; break;
      case ViewMode::docs: content = documents; break;
      case ViewMode::both: content = words + " || " + documents; break;
    }
    sheet.entries.push_back({pos + 1, text::tsv_cell(content)});
    sheet.blinding_map.push_back(v.topic_id);
  }
  return sheet;
}

/// Reviewer-facing TSV: sheet_position, content, description, score. Carries
/// no topic ids or model parameters; `tag` is an opaque run identifier.
inline std::string render_reviewer_tsv(const ReviewSheet& sheet, const std::string& tag = {}) {
  std::string out;
  if (!tag.empty()) out += "# review sheet " + tag + "\n";
  out += "# score each topic 1-10 by how clinically interpretable it is, or 0 when no interpretation is possible\n";
  out += "sheet_position\tcontent\tdescription\tscore\n";
  for (const auto& e : sheet.entries) out += std::to_string(e.sheet_position) + "\t" + e.content + "\t\t\n";
  return out;
}

/// Blinding map TSV, kept away from reviewers.
inline std::string render_blinding_tsv(const ReviewSheet& sheet, const std::string& header_comment = {}) {
  std::string out;
  if (!header_comment.empty()) out += "# " + header_comment + "\n";
  out += "# model " + sheet.model_id + " view " + std::string(to_string(sheet.view_mode)) + " seed " +
         std::to_string(sheet.seed) + "\n";
  out += "sheet_position\ttopic_id\n";
  for (std::size_t i = 0; i < sheet.blinding_map.size(); ++i)
    out += std::to_string(i + 1) + "\t" + std::to_string(sheet.blinding_map[i]) + "\n";
  return out;
}

inline std::vector<std::size_t> parse_blinding_tsv(std::string_view content, std::string_view source) {
  auto table = text::parse_tsv(content, source);
  const std::size_t pi = table.column("sheet_position", source), ti = table.column("topic_id", source);
  std::vector<std::optional<std::size_t>> slots(table.rows.size());
  std::set<std::size_t> topics_seen;
  for (const auto& row : table.rows) {
    const long long pos = text::parse_int(row.fields[pi], "sheet_position");
    const long long topic = text::parse_int(row.fields[ti], "topic_id");
    if (pos < 1 || static_cast<std::size_t>(pos) > slots.size())
      throw DataError(text::where(source, row.line) + "sheet position " + std::to_string(pos) + " out of range");
    if (topic < 0) throw DataError(text::where(source, row.line) + "negative topic id");
    auto& slot = slots[static_cast<std::size_t>(pos - 1)];
    if (slot) throw DataError(text::where(source, row.line) + "duplicate sheet position " + std::to_string(pos));
    if (!topics_seen.insert(static_cast<std::size_t>(topic)).second)
      throw DataError(text::where(source, row.line) + "topic " + std::to_string(topic) + " mapped twice");
    slot = static_cast<std::size_t>(topic);
  }
  std::vector<std::size_t> map;
  for (const auto& s : slots) map.push_back(*s);
  return map;
}

struct TopicScore {
  std::size_t sheet_position = 0;
  std::string description;
  int score = 0;  // 0 = not interpretable, otherwise 1..10
};

struct ScoredTopic {
  std::size_t topic_id = 0;
  TopicScore score;
};

/// Join a filled reviewer file to true topic ids. Every mapped position must be
/// scored exactly once; results are ordered by topic id.
inline std::vector<ScoredTopic> import_scores(std::string_view reviewer_tsv, std::string_view reviewer_source,
                                              const std::vector<std::size_t>& blinding_map) {
  auto table = text::parse_tsv(reviewer_tsv, reviewer_source);
  const std::size_t pi = table.column("sheet_position", reviewer_source);
  const std::size_t di = table.column("description", reviewer_source);
  const std::size_t si = table.column("score", reviewer_source);
  std::vector<std::optional<TopicScore>> by_pos(blinding_map.size());
  for (const auto& row : table.rows) {
    const auto at = text::where(reviewer_source, row.line);
    const long long pos = text::parse_int(row.fields[pi], "sheet_position");
    if (pos < 1 || static_cast<std::size_t>(pos) > blinding_map.size())
      throw DataError(at + "sheet position " + std::to_string(pos) + " is not in the blinding map");
    const std::string_view raw_score = text::trim(row.fields[si]);
    if (raw_score.empty()) throw DataError(at + "position " + std::to_string(pos) + " has no score");
    const long long score = text::parse_int(raw_score, "score");
    if (score < 0 || score > 10)
      throw DataError(at + "score " + std::to_string(score) + " outside the range 0-10");
    auto& slot = by_pos[static_cast<std::size_t>(pos - 1)];
    if (slot) throw DataError(at + "position " + std::to_string(pos) + " scored twice");
    slot = TopicScore{static_cast<std::size_t>(pos), std::string(text::trim(row.fields[di])), static_cast<int>(score)};
  }
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < by_pos.size(); ++i)
    if (!by_pos[i]) missing.push_back(std::to_string(i + 1));
  if (!missing.empty())
    throw DataError(std::string(reviewer_source) + ": missing sheet positions " + text::join(missing, ","));
  std::vector<ScoredTopic> out;
  for (std::size_t i = 0; i < by_pos.size(); ++i) out.push_back({blinding_map[i], *by_pos[i]});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.topic_id < b.topic_id; });
  return out;
}

inline std::string render_scores_tsv(const std::vector<ScoredTopic>& scores, const std::string& header_comment = {}) {
  std::string out = header_comment.empty() ? "" : "# " + header_comment + "\n";
  out += "topic_id\tsheet_position\tscore\tdescription\n";
  for (const auto& s : scores)
    out += std::to_string(s.topic_id) + "\t" + std::to_string(s.score.sheet_position) + "\t" +
           std::to_string(s.score.score) + "\t" + text::tsv_cell(s.score.description) + "\n";
  return out;
}

// --------------------------------------------------------------- summaries

enum class DocumentType { report, sentences };

inline std::string_view to_string(DocumentType d) { return d == DocumentType::report ? "report" : "sentences"; }

inline DocumentType parse_document_type(std::string_view s) {
  const std::string v = text::lowercase(text::trim(s));
  if (v == "report" || v == "reports") return DocumentType::report;
  if (v == "sentences" || v == "sentence") return DocumentType::sentences;
  throw DataError("unknown document type '" + std::string(s) + "' (expected report or sentences)");
}

/// Named scaling-factor levels used in the model grid.
struct ScalingLevel {
  std::string_view name;
  double value;
};

inline constexpr ScalingLevel kScalingLevels[] = {{"Tiny", 0.01}, {"Small", 0.1}, {"Normal", 1.0}, {"Large", 10.0}};

inline std::string scaling_level_name(double value) {
  for (const auto& l : kScalingLevels)
    if (std::abs(l.value - value) <= 1e-12 * l.value) return std::string(l.name);
  return "s" + text::format_shortest(value);
}

/// "Small (0.1)"
inline std::string scaling_label(double value) {
  return scaling_level_name(value) + " (" + text::format_shortest(value) + ")";
}

struct ModelSummary {
  std::string model_id;
  std::string scaling_level;  // categorical level, e.g. "Small"
  double scaling_value = 0.0;
  DocumentType document_type = DocumentType::report;
  ViewMode view_mode = ViewMode::both;
  double median = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  double sem = 0.0;
  std::size_t unique_topic_labels = 0;
  std::size_t n = 0;  // number of scored topics; 0 when read from a table without it
};

inline std::string make_model_id(std::string_view level, DocumentType doc, ViewMode view) {
  return text::lowercase(level) + "-" + std::string(to_string(doc)) + "-" + std::string(to_string(view));
}

struct ModelSettings {
  std::string scaling_level;
  double scaling_value = 0.0;
  DocumentType document_type = DocumentType::report;
  ViewMode view_mode = ViewMode::both;
};

/// Inverse of make_model_id.
inline ModelSettings parse_model_id(std::string_view id) {
  const auto parts = text::split(id, '-');
  if (parts.size() != 3) throw DataError("malformed model id '" + std::string(id) + "'");
  ModelSettings s;
  for (const auto& l : kScalingLevels)
    if (text::lowercase(l.name) == parts[0]) {
      s.scaling_level = std::string(l.name);
      s.scaling_value = l.value;
    }
  if (s.scaling_level.empty()) {
    if (parts[0].size() < 2 || parts[0][0] != 's') throw DataError("unknown scaling level in model id '" + std::string(id) + "'");
    s.scaling_value = text::parse_double(std::string_view(parts[0]).substr(1), "scaling factor");
    s.scaling_level = scaling_level_name(s.scaling_value);
  }
  s.document_type = parse_document_type(parts[1]);
  s.view_mode = parse_view_mode(parts[2]);
  return s;
}

/// Lowercase, trim, collapse whitespace.
inline std::string normalize_description(std::string_view s) { return text::collapse_whitespace(text::lowercase(s)); }

/// Median, mean, sample sd and sem of the scores; unique labels count distinct
/// normalized non-empty descriptions among topics scored 1 or more.
inline ModelSummary summarize_model(const std::vector<ScoredTopic>& scores, double scaling_value,
                                    DocumentType document_type, ViewMode view_mode) {
  if (scores.empty()) throw DataError("cannot summarize a model without scores");
  ModelSummary s;
  s.scaling_level = scaling_level_name(scaling_value);
  s.scaling_value = scaling_value;
  s.document_type = document_type;
  s.view_mode = view_mode;
  s.model_id = make_model_id(s.scaling_level, document_type, view_mode);
  s.n = scores.size();
  std::vector<double> v;
  std::set<std::string> labels;
  for (const auto& st : scores) {
    v.push_back(st.score.score);
    if (st.score.score >= 1) {
      auto d = normalize_description(st.score.description);
      if (!d.empty()) labels.insert(std::move(d));
    }
  }
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  s.median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  s.sem = s.sd / std::sqrt(static_cast<double>(n));
  s.unique_topic_labels = labels.size();
  return s;
}

// ------------------------------------------------------------- table I/O

inline constexpr std::string_view kSummaryHeader =
    "Scaling factor (value)\tDocument Collection\tView\tMedian\tMean\tStandard deviation of mean\t"
    "Standard error of mean\tUnique Topic Labels";

struct SummaryTable {
  std::vector<ModelSummary> rows;
  std::vector<std::string> warnings;  // rows whose level and value disagree, kept as stated
};

/// Parse "Small (0.1)" / "Small (.1)": level name and parenthesised value.
inline std::pair<std::string, double> parse_scaling_label(std::string_view s, std::string_view at) {
  s = text::trim(s);
  const auto open = s.find('('), close = s.rfind(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open)
    throw DataError(std::string(at) + "scaling factor '" + std::string(s) + "' is not of the form 'Level (value)'");
  std::string level(text::trim(s.substr(0, open)));
  std::string value(text::trim(s.substr(open + 1, close - open - 1)));
  if (!value.empty() && value.front() == '.') value.insert(value.begin(), '0');
  if (level.empty()) throw DataError(std::string(at) + "scaling factor level name missing");
  return {level, text::parse_double(value, "scaling factor value")};
}

/// Summary rows in the column layout of the model comparison table. The
/// optional trailing `n` column holds the number of scored topics.
inline SummaryTable parse_summaries_tsv(std::string_view content, std::string_view source) {
  auto table = text::parse_tsv(content, source);
  const auto expected = text::split(kSummaryHeader, '\t');
  const bool has_n = table.header.size() == expected.size() + 1 && table.header.back() == "n";
  if (!std::equal(expected.begin(), expected.end(), table.header.begin(),
                  table.header.begin() + static_cast<std::ptrdiff_t>(std::min(expected.size(), table.header.size()))) ||
      (table.header.size() != expected.size() && !has_n))
    throw DataError(std::string(source) + ": unexpected summary header");
  SummaryTable out;
  for (const auto& row : table.rows) {
    const auto at = text::where(source, row.line);
    const auto& f = row.fields;
    ModelSummary s;
    auto [level, value] = parse_scaling_label(f[0], at);
    s.scaling_level = level;
    s.scaling_value = value;
    for (const auto& known : kScalingLevels) {
      if (known.name == level && std::abs(known.value - value) > 1e-12 * known.value)
        out.warnings.push_back(at + "level '" + level + "' normally has scaling factor " +
                               text::format_shortest(known.value) + " but the row states " +
                               text::format_shortest(value) + "; kept as level '" + level + "'");
    }
    s.document_type = parse_document_type(f[1]);
    s.view_mode = parse_view_mode(f[2]);
    s.median = text::parse_double(f[3], at + "median");
    s.mean = text::parse_double(f[4], at + "mean");
    s.sd = text::parse_double(f[5], at + "sd");
    s.sem = text::parse_double(f[6], at + "sem");
    const long long u = text::parse_int(f[7], at + "unique topic labels");
    if (u < 0) throw DataError(at + "negative unique topic label count");
    s.unique_topic_labels = static_cast<std::size_t>(u);
    if (has_n) s.n = static_cast<std::size_t>(text::parse_int(f[8], at + "n"));
    s.model_id = make_model_id(s.scaling_level, s.document_type, s.view_mode);
    out.rows.push_back(std::move(s));
  }
  return out;
}

inline SummaryTable read_summaries_tsv(const std::string& path) {
  return parse_summaries_tsv(text::read_file(path), path);
}

inline std::string render_summaries_tsv(const std::vector<ModelSummary>& rows, bool with_n = false,
                                        const std::string& header_comment = {}) {
  std::string out = header_comment.empty() ? "" : "# " + header_comment + "\n";
  out += kSummaryHeader;
  out += with_n ? "\tn\n" : "\n";
  for (const auto& s : rows) {
    out += s.scaling_level + " (" + text::format_shortest(s.scaling_value) + ")\t" +
           std::string(to_string(s.document_type)) + "\t" + std::string(to_string(s.view_mode)) + "\t" +
           text::format_decimal(s.median) + "\t" + text::format_decimal(s.mean) + "\t" + text::format_decimal(s.sd) +
           "\t" + text::format_decimal(s.sem) + "\t" + std::to_string(s.unique_topic_labels);
    if (with_n) out += "\t" + std::to_string(s.n);
    out += "\n";
  }
  return out;
}

// ----------------------------------------------------------------- ranking

/// Descending on (mean, unique topic labels, median); full ties keep input order.
inline std::vector<ModelSummary> rank_models(std::vector<ModelSummary> summaries) {
  std::stable_sort(summaries.begin(), summaries.end(), [](const ModelSummary& a, const ModelSummary& b) {
    if (a.mean != b.mean) return a.mean > b.mean;
    if (a.unique_topic_labels != b.unique_topic_labels) return a.unique_topic_labels > b.unique_topic_labels;
    return a.median > b.median;
  });
  return summaries;
}

}  // namespace radlabel::topics
