#pragma once

// Report ingestion and text preprocessing: placeholder scrubbing, case
// folding, character filtering, corrections, stemming, stop-word removal,
// sentence splitting, short-document filtering and vocabulary pruning.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "radlabel/error.hpp"
#include "radlabel/stemmer.hpp"
#include "radlabel/text.hpp"

namespace radlabel {

enum class Anatomy { wrist, ankle };

inline std::string_view to_string(Anatomy a) { return a == Anatomy::wrist ? "wrist" : "ankle"; }

inline Anatomy parse_anatomy(std::string_view s) {
  const std::string v = text::lowercase(text::trim(s));
  if (v == "wrist") return Anatomy::wrist;
  if (v == "ankle") return Anatomy::ankle;
  throw DataError("unknown anatomy '" + std::string(s) + "' (expected wrist or ankle)");
}

struct RawReport {
  std::string report_id;
  std::string exam_id;
  Anatomy anatomy = Anatomy::wrist;
  std::string text;
  std::vector<std::string> image_ids;
};

enum class Granularity { report, sentence };

inline std::string_view to_string(Granularity g) { return g == Granularity::report ? "report" : "sentence"; }

inline Granularity parse_granularity(std::string_view s) {
  if (s == "report" || s == "reports") return Granularity::report;
  if (s == "sentence" || s == "sentences") return Granularity::sentence;
  throw DataError("unknown granularity '" + std::string(s) + "'");
}

struct Document {
  std::string doc_id;
  std::string source_report_id;
  Granularity granularity = Granularity::report;
  std::string text;                 // report body, or sentence body without its terminator
  std::string terminator;           // sentence terminator ("." "!" "?"), empty when none
  std::size_t source_chars = 0;     // character length of the parent report text
  std::vector<std::string> tokens;  // filled by preprocessing
};

// ------------------------------------------------------------- scrubbing

struct PlaceholderRule {
  std::regex pattern;
  std::string placeholder;
};

/// Dates and examination reference numbers. Placeholders contain no digits,
/// which keeps scrubbing idempotent.
inline std::vector<PlaceholderRule> default_placeholder_rules() {
  return {
      {std::regex(R"(\b\d{4}-\d{2}-\d{2}\b)"), "<DATE_REMOVED>"},
      {std::regex(R"(\b\d{1,2}/\d{1,2}[-/]\d{2,4}\b)"), "<DATE_REMOVED>"},
      {std::regex(R"(\b\d{8}\b)"), "<DATE_REMOVED>"},
      {std::regex(R"(\b(?:[A-Za-z]{1,4}-?)?\d{6,7}\b|\b[A-Za-z]{1,4}-?\d{9,}\b|\b\d{9,}\b)"), "<EXAM_ID_REMOVED>"},
  };
}

inline RawReport scrub_report(RawReport report, const std::vector<PlaceholderRule>& rules) {
  for (const auto& rule : rules) report.text = std::regex_replace(report.text, rule.pattern, rule.placeholder);
  return report;
}

inline RawReport scrub_report(RawReport report) {
  static const auto rules = default_placeholder_rules();
  return scrub_report(std::move(report), rules);
}

// ---------------------------------------------------------- normalization

/// Lowercase, keep only letters, '-' and '_', and split on whitespace.
/// Other characters are deleted; tokens without a letter are dropped.
inline std::vector<std::string> normalize_to_words(std::string_view raw) {
  std::u32string cps = text::decode_utf8(raw);
  std::u32string kept;
  kept.reserve(cps.size());
  for (char32_t cp : cps) {
    cp = text::to_lower(cp);
    if (text::is_space(cp))
      kept.push_back(U' ');
    else if (text::is_letter(cp) || cp == U'-' || cp == U'_')
      kept.push_back(cp);
  }
  std::vector<std::string> out;
  for (auto& w : text::split_whitespace(text::encode_utf8(kept))) {
    const auto wc = text::decode_utf8(w);
    if (std::any_of(wc.begin(), wc.end(), [](char32_t c) { return text::is_letter(c); })) out.push_back(std::move(w));
  }
  return out;
}

/// Whole-token phrase corrections applied longest match first.
class CorrectionList {
 public:
  void add(std::vector<std::string> pattern, std::vector<std::string> replacement) {
    if (pattern.empty()) throw ValidationError("empty correction pattern");
    max_len_ = std::max(max_len_, pattern.size());
    entries_[std::move(pattern)] = std::move(replacement);
  }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  std::vector<std::string> apply(const std::vector<std::string>& tokens) const {
    if (entries_.empty()) return tokens;
    std::vector<std::string> out;
    out.reserve(tokens.size());
    std::size_t i = 0;
    std::vector<std::string> key;
    while (i < tokens.size()) {
      bool matched = false;
      for (std::size_t len = std::min(max_len_, tokens.size() - i); len >= 1; --len) {
        key.assign(tokens.begin() + static_cast<std::ptrdiff_t>(i), tokens.begin() + static_cast<std::ptrdiff_t>(i + len));
        auto it = entries_.find(key);
        if (it != entries_.end()) {
          out.insert(out.end(), it->second.begin(), it->second.end());
          i += len;
          matched = true;
          break;
        }
      }
      if (!matched) out.push_back(tokens[i++]);
    }
    return out;
  }

  /// Throws if some replacement would itself be rewritten by a second pass
  /// (chains such as a->b, b->c or cycles).
  void validate() const {
    for (const auto& [pattern, replacement] : entries_) {
      if (apply(replacement) != replacement)
        throw ValidationError("correction '" + text::join(pattern, " ") + "' -> '" + text::join(replacement, " ") +
                              "' is not final: its replacement is corrected again (collapse the chain)");
    }
  }

  /// Two-column TSV: pattern <TAB> replacement. `#` lines are comments.
  static CorrectionList parse(std::string_view content, std::string_view source) {
    CorrectionList list;
    auto table = text::parse_tsv(content, source, false);
    for (const auto& row : table.rows) {
      if (row.fields.size() != 2)
        throw DataError(text::where(source, row.line) + "expected 2 columns (pattern, replacement)");
      auto pattern = normalize_to_words(row.fields[0]);
      if (pattern.empty()) throw DataError(text::where(source, row.line) + "pattern has no letters");
      list.add(std::move(pattern), normalize_to_words(row.fields[1]));
    }
    return list;
  }

 private:
  std::map<std::vector<std::string>, std::vector<std::string>> entries_;
  std::size_t max_len_ = 0;
};

struct NormalizationRules {
  std::string language = "swedish";  // "none" disables stemming
  CorrectionList corrections;
  std::unordered_set<std::string> stop_words;
  std::unordered_set<std::string> preserved_negations{"ingen", "inget"};

  /// Enforce the load-time invariants: negations are never stop words and
  /// corrections are final.
  void finalize() {
    for (const auto& w : preserved_negations) stop_words.erase(w);
    corrections.validate();
  }
};

inline std::unordered_set<std::string> parse_word_list(std::string_view content) {
  std::unordered_set<std::string> out;
  for (const auto& raw : text::split(content, '\n')) {
    std::string_view line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    for (auto& w : normalize_to_words(line)) out.insert(std::move(w));
  }
  return out;
}

/// Load rules from files; empty paths are skipped.
inline NormalizationRules load_rules(const std::string& corrections_path, const std::string& stop_words_path,
                                     std::string language = "swedish") {
  NormalizationRules rules;
  rules.language = std::move(language);
  if (!corrections_path.empty())
    rules.corrections = CorrectionList::parse(text::read_file(corrections_path), corrections_path);
  if (!stop_words_path.empty()) rules.stop_words = parse_word_list(text::read_file(stop_words_path));
  rules.finalize();
  return rules;
}

/// Report/sentence text to model tokens. The stemmer is applied to a fixed
/// point so the pipeline is idempotent on its own output; preserved negations
/// bypass stemming and stop-word removal.
inline std::vector<std::string> preprocess_text(std::string_view raw, const NormalizationRules& rules,
                                                const Stemmer* stemmer) {
  const bool stemming = rules.language != "none";
  if (stemming && (stemmer == nullptr || stemmer->language() != rules.language))
    throw ValidationError("no stemmer loaded for language mode '" + rules.language + "'");

  std::vector<std::string> words = rules.corrections.apply(normalize_to_words(raw));
  std::vector<std::string> out;
  out.reserve(words.size());
  for (auto& w : words) {
    if (rules.preserved_negations.count(w)) {
      out.push_back(std::move(w));
      continue;
    }
    if (rules.stop_words.count(w)) continue;
    std::string s = stemming ? stemmer->stem_to_fixpoint(w) : w;
    if (s.empty() || rules.stop_words.count(s)) continue;
    out.push_back(std::move(s));
  }
  return out;
}

// --------------------------------------------------------------- sentences

struct SentenceRules {
  std::unordered_set<std::string> abbreviations;
};

/// Common Swedish clinical abbreviations that end in a period.
inline SentenceRules default_sentence_rules() {
  SentenceRules r;
  for (const char* a : {"t.ex.", "bl.a.", "d.v.s.", "dvs.", "m.m.", "ca.", "resp.", "obs.", "pga.", "p.g.a.", "etc.",
                        "nr.", "jfr.", "inkl.", "ev.", "enl.", "s.k.", "u.a.", "o.s.v.", "osv.", "mm.", "cm.", "dx.",
                        "sin.", "v.g.", "i.o.m.", "f.d.", "ffa.", "f.ö.", "kl.", "st.", "dr.", "prof.", "vs."})
    r.abbreviations.insert(a);
  return r;
}

/// One abbreviation per line (case-insensitive), e.g. "t.ex.".
inline SentenceRules parse_sentence_rules(std::string_view content) {
  SentenceRules r;
  for (const auto& raw : text::split(content, '\n')) {
    std::string_view line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    r.abbreviations.insert(text::lowercase(line));
  }
  return r;
}

inline Document report_document(const RawReport& report) {
  Document d;
  d.doc_id = report.report_id;
  d.source_report_id = report.report_id;
  d.granularity = Granularity::report;
  d.text = report.text;
  d.source_chars = text::utf8_length(report.text);
  return d;
}

/// Split on '.', '!' or '?' followed by whitespace or end of text, except
/// where the terminated word is a listed abbreviation. Text without any
/// terminator is one sentence. Whitespace-only pieces are dropped.
inline std::vector<Document> split_sentences(const RawReport& report, const SentenceRules& rules) {
  std::vector<Document> out;
  const std::string& s = report.text;
  const std::size_t chars = text::utf8_length(s);
  std::size_t start = 0;
  auto emit = [&](std::size_t begin, std::size_t end, std::string terminator) {
    std::string_view body = text::trim(std::string_view(s).substr(begin, end - begin));
    if (body.empty() && terminator.empty()) return;
    if (body.empty()) {
      // a lone terminator belongs to the previous sentence
      if (!out.empty()) out.back().terminator += terminator;
      return;
    }
    Document d;
    d.doc_id = report.report_id + "/" + std::to_string(out.size());
    d.source_report_id = report.report_id;
    d.granularity = Granularity::sentence;
    d.text = std::string(body);
    d.terminator = std::move(terminator);
    d.source_chars = chars;
    out.push_back(std::move(d));
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c != '.' && c != '!' && c != '?') continue;
    if (i + 1 < s.size() && !text::is_ascii_space(s[i + 1])) continue;
    if (c == '.') {
      std::size_t w = i;
      while (w > start && !text::is_ascii_space(s[w - 1])) --w;
      if (rules.abbreviations.count(text::lowercase(std::string_view(s).substr(w, i + 1 - w)))) continue;
    }
    emit(start, i, std::string(1, c));
    start = i + 1;
  }
  emit(start, s.size(), "");
  return out;
}

inline std::vector<Document> split_sentences(const RawReport& report) {
  static const SentenceRules rules = default_sentence_rules();
  return split_sentences(report, rules);
}

// --------------------------------------------------------------- filtering

struct FilterOptions {
  std::size_t min_report_chars = 6;
  std::size_t min_tokens = 2;
};

struct FilterResult {
  std::vector<Document> docs;
  std::size_t removed_short_report = 0;
  std::size_t removed_few_tokens = 0;
};

inline FilterResult filter_documents(std::vector<Document> docs, const FilterOptions& opt = {}) {
  FilterResult r;
  r.docs.reserve(docs.size());
  for (auto& d : docs) {
    if (d.source_chars < opt.min_report_chars)
      ++r.removed_short_report;
    else if (d.tokens.size() < opt.min_tokens)
      ++r.removed_few_tokens;
    else
      r.docs.push_back(std::move(d));
  }
  return r;
}

// --------------------------------------------------------------- vocabulary

struct Vocabulary {
  std::vector<std::string> terms;
  std::unordered_map<std::string, std::uint32_t> term_index;
  std::vector<std::size_t> corpus_counts;

  std::size_t size() const noexcept { return terms.size(); }

  std::optional<std::uint32_t> find(const std::string& term) const {
    auto it = term_index.find(term);
    if (it == term_index.end()) return std::nullopt;
    return it->second;
  }

  static Vocabulary from_counts(std::vector<std::pair<std::string, std::size_t>> counts) {
    std::sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    Vocabulary v;
    for (auto& [term, n] : counts) {
      if (v.term_index.count(term)) throw DataError("duplicate vocabulary term '" + term + "'");
      v.term_index.emplace(term, static_cast<std::uint32_t>(v.terms.size()));
      v.terms.push_back(std::move(term));
      v.corpus_counts.push_back(n);
    }
    return v;
  }
};

struct VocabularyBuild {
  Vocabulary vocabulary;
  std::vector<Document> docs;
  std::size_t dropped_tokens = 0;
  std::size_t dropped_docs = 0;
};

/// Keep terms occurring at least `min_count` times; drop out-of-vocabulary
/// tokens and documents left empty. Terms are ordered by count, then text.
inline VocabularyBuild build_vocabulary(std::vector<Document> docs, std::size_t min_count = 5) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& d : docs)
    for (const auto& t : d.tokens) ++counts[t];
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [term, n] : counts)
    if (n >= min_count) kept.emplace_back(term, n);
  if (kept.empty())
    throw DataError("vocabulary is empty after pruning with min_count=" + std::to_string(min_count));
  VocabularyBuild b;
  b.vocabulary = Vocabulary::from_counts(std::move(kept));
  b.docs.reserve(docs.size());
  for (auto& d : docs) {
    const std::size_t before = d.tokens.size();
    std::erase_if(d.tokens, [&](const std::string& t) { return !b.vocabulary.term_index.count(t); });
    b.dropped_tokens += before - d.tokens.size();
    if (d.tokens.empty())
      ++b.dropped_docs;
    else
      b.docs.push_back(std::move(d));
  }
  return b;
}

// --------------------------------------------------------------------- I/O

/// Reports JSON-lines: {report_id, exam_id, anatomy, text, image_ids}.
/// Lines carrying a "meta" key are artifact headers and are skipped.
inline std::vector<RawReport> parse_reports_jsonl(std::string_view content, std::string_view source) {
  std::vector<RawReport> out;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  for (const auto& raw : text::split(content, '\n')) {
    ++line_no;
    if (text::trim(raw).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(text::where(source, line_no) + "invalid JSON: " + e.what());
    }
    if (j.contains("meta")) continue;
    try {
      RawReport r;
      r.report_id = j.at("report_id").get<std::string>();
      r.exam_id = j.value("exam_id", r.report_id);
      r.anatomy = parse_anatomy(j.at("anatomy").get<std::string>());
      r.text = j.at("text").get<std::string>();
      if (j.contains("image_ids")) r.image_ids = j.at("image_ids").get<std::vector<std::string>>();
      if (!seen.insert(r.report_id).second) throw DataError("duplicate report_id '" + r.report_id + "'");
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(text::where(source, line_no) + e.what());
    } catch (const DataError& e) {
      throw DataError(text::where(source, line_no) + e.what());
    }
  }
  return out;
}

inline std::vector<RawReport> read_reports_jsonl(const std::string& path) {
  return parse_reports_jsonl(text::read_file(path), path);
}

inline std::string render_reports_jsonl(const std::vector<RawReport>& reports, const nlohmann::json& meta) {
  std::string out;
  if (!meta.is_null()) out += nlohmann::json{{"meta", meta}}.dump() + "\n";
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["report_id"] = r.report_id;
    j["exam_id"] = r.exam_id;
    j["anatomy"] = std::string(to_string(r.anatomy));
    j["text"] = r.text;
    j["image_ids"] = r.image_ids;
    out += j.dump() + "\n";
  }
  return out;
}

inline std::string render_documents_jsonl(const std::vector<Document>& docs, const nlohmann::json& meta) {
  std::string out;
  if (!meta.is_null()) out += nlohmann::json{{"meta", meta}}.dump() + "\n";
  for (const auto& d : docs) {
    nlohmann::ordered_json j;
    j["doc_id"] = d.doc_id;
    j["source_report_id"] = d.source_report_id;
    j["granularity"] = std::string(to_string(d.granularity));
    j["tokens"] = d.tokens;
    j["text"] = d.text;
    j["source_chars"] = d.source_chars;
    out += j.dump() + "\n";
  }
  return out;
}

inline std::vector<Document> parse_documents_jsonl(std::string_view content, std::string_view source) {
  std::vector<Document> out;
  std::size_t line_no = 0;
  for (const auto& raw : text::split(content, '\n')) {
    ++line_no;
    if (text::trim(raw).empty()) continue;
    try {
      auto j = nlohmann::json::parse(raw);
      if (j.contains("meta")) continue;
      Document d;
      d.doc_id = j.at("doc_id").get<std::string>();
      d.source_report_id = j.at("source_report_id").get<std::string>();
      d.granularity = parse_granularity(j.at("granularity").get<std::string>());
      d.tokens = j.at("tokens").get<std::vector<std::string>>();
      d.text = j.value("text", std::string{});
      d.source_chars = j.value("source_chars", text::utf8_length(d.text));
      out.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(text::where(source, line_no) + e.what());
    }
  }
  return out;
}

inline std::vector<Document> read_documents_jsonl(const std::string& path) {
  return parse_documents_jsonl(text::read_file(path), path);
}

/// Vocabulary TSV: header `term<TAB>count`, rows in vocabulary order.
inline std::string render_vocabulary_tsv(const Vocabulary& v, const std::string& header_comment = {}) {
  std::string out = header_comment.empty() ? "" : "# " + header_comment + "\n";
  out += "term\tcount\n";
  for (std::size_t i = 0; i < v.terms.size(); ++i)
    out += v.terms[i] + "\t" + std::to_string(v.corpus_counts[i]) + "\n";
  return out;
}

/// Reads back in file order, which is the vocabulary order.
inline Vocabulary parse_vocabulary_tsv(std::string_view content, std::string_view source) {
  auto table = text::parse_tsv(content, source);
  const std::size_t ti = table.column("term", source), ci = table.column("count", source);
  Vocabulary v;
  for (const auto& row : table.rows) {
    const std::string& term = row.fields[ti];
    if (v.term_index.count(term)) throw DataError(text::where(source, row.line) + "duplicate term '" + term + "'");
    v.term_index.emplace(term, static_cast<std::uint32_t>(v.terms.size()));
    v.terms.push_back(term);
    v.corpus_counts.push_back(static_cast<std::size_t>(text::parse_int(row.fields[ci], "count")));
  }
  if (v.terms.empty()) throw DataError(std::string(source) + ": empty vocabulary");
  return v;
}

inline Vocabulary read_vocabulary_tsv(const std::string& path) {
  return parse_vocabulary_tsv(text::read_file(path), path);
}

}  // namespace radlabel
