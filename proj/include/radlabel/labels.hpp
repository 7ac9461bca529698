#pragma once

// Topic mixtures to tri-state image labels.
//
// A document "has" topic t when theta[d,t] > 1/20. Label definitions name the
// topics that assert a feature (positive) and the topics that deny it
// (negative). Outcomes form the lattice MISSING < FALSE < TRUE, and sentence
// outcomes are joined into report outcomes, which every image of the
// examination inherits.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "radlabel/corpus.hpp"
#include "radlabel/error.hpp"
#include "radlabel/random.hpp"
#include "radlabel/text.hpp"

namespace radlabel::labels {

inline constexpr double kTopicThreshold = 1.0 / 20.0;

enum class LabelOutcome : std::uint8_t { Missing = 0, False = 1, True = 2 };

inline char to_char(LabelOutcome o) {
  switch (o) {
    case LabelOutcome::True: return 'T';
    case LabelOutcome::False: return 'F';
    case LabelOutcome::Missing: return 'M';
  }
  return 'M';
}

inline LabelOutcome parse_outcome(std::string_view s) {
  s = text::trim(s);
  if (s == "T" || s == "TRUE" || s == "true") return LabelOutcome::True;
  if (s == "F" || s == "FALSE" || s == "false") return LabelOutcome::False;
  if (s == "M" || s == "MISSING" || s == "missing" || s.empty()) return LabelOutcome::Missing;
  throw DataError("invalid label outcome '" + std::string(s) + "' (expected T, F or M)");
}

/// Lattice join.
constexpr LabelOutcome join(LabelOutcome a, LabelOutcome b) noexcept { return a > b ? a : b; }

inline LabelOutcome aggregate(std::span<const LabelOutcome> outcomes) {
  LabelOutcome acc = LabelOutcome::Missing;
  for (auto o : outcomes) acc = join(acc, o);
  return acc;
}

/// Topics with theta strictly above the threshold.
inline std::set<std::size_t> assign_document_topics(std::span<const double> theta_row,
                                                    double threshold = kTopicThreshold) {
  std::set<std::size_t> out;
  for (std::size_t t = 0; t < theta_row.size(); ++t)
    if (theta_row[t] > threshold) out.insert(t);
  return out;
}

struct LabelDef {
  std::string name;
  std::set<std::size_t> positive_topics;
  std::set<std::size_t> negative_topics;
  std::set<Anatomy> anatomies;

  void validate() const {
    if (name.empty()) throw ValidationError("label definition without a name");
    if (positive_topics.empty() && negative_topics.empty())
      throw ValidationError("label '" + name + "' has neither positive nor negative topics");
    for (auto t : positive_topics)
      if (negative_topics.count(t))
        throw ValidationError("label '" + name + "': topic " + std::to_string(t) + " is both positive and negative");
    if (anatomies.empty()) throw ValidationError("label '" + name + "' applies to no anatomy");
  }
};

/// Label names in output order plus their definitions. Topic ids refer to the
/// topic model of the definition's anatomy, so one label may carry one
/// definition per anatomy.
struct LabelSet {
  std::vector<std::string> names;
  std::vector<LabelDef> defs;

  std::size_t index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    throw DataError("unknown label '" + std::string(name) + "' (known: " + text::join(names, ", ") + ")");
  }

  void add(LabelDef def) {
    def.validate();
    for (const auto& other : defs)
      if (other.name == def.name)
        for (auto a : def.anatomies)
          if (other.anatomies.count(a))
            throw ValidationError("label '" + def.name + "' defined twice for " + std::string(to_string(a)));
    if (std::find(names.begin(), names.end(), def.name) == names.end()) names.push_back(def.name);
    defs.push_back(std::move(def));
  }
};

/// TSV with columns label, anatomy, positive_topics, negative_topics; topic
/// lists are comma-separated ids ("" or "-" for none). `anatomy` may list
/// several anatomies separated by commas.
inline LabelSet parse_label_defs(std::string_view content, std::string_view source) {
  auto table = text::parse_tsv(content, source);
  const auto li = table.column("label", source), ai = table.column("anatomy", source);
  const auto pi = table.column("positive_topics", source), ni = table.column("negative_topics", source);
  LabelSet set;
  for (const auto& row : table.rows) {
    const auto at = text::where(source, row.line);
    try {
      LabelDef d;
      d.name = std::string(text::trim(row.fields[li]));
      for (const auto& a : text::split(row.fields[ai], ',')) d.anatomies.insert(parse_anatomy(a));
      for (auto t : text::parse_index_list(row.fields[pi], "positive_topics")) d.positive_topics.insert(t);
      for (auto t : text::parse_index_list(row.fields[ni], "negative_topics")) d.negative_topics.insert(t);
      set.add(std::move(d));
    } catch (const Error& e) {
      throw DataError(at + e.what());
    }
  }
  if (set.names.empty()) throw DataError(std::string(source) + ": no label definitions");
  return set;
}

inline LabelSet read_label_defs(const std::string& path) { return parse_label_defs(text::read_file(path), path); }

inline std::string render_label_defs(const LabelSet& set) {
  std::string out = "label\tanatomy\tpositive_topics\tnegative_topics\n";
  auto list = [](const std::set<std::size_t>& s) {
    std::vector<std::string> parts;
    for (auto t : s) parts.push_back(std::to_string(t));
    return parts.empty() ? std::string("-") : text::join(parts, ",");
  };
  for (const auto& d : set.defs) {
    std::vector<std::string> an;
    for (auto a : d.anatomies) an.emplace_back(to_string(a));
    out += d.name + "\t" + text::join(an, ",") + "\t" + list(d.positive_topics) + "\t" + list(d.negative_topics) + "\n";
  }
  return out;
}

struct MappingDiagnostics {
  std::size_t conflicts = 0;  // units where positive and negative topics co-occurred
};

/// Per-label outcome (aligned with `set.names`) for a unit of `anatomy`:
/// TRUE if a positive topic is present, otherwise FALSE if a negative topic is
/// present, otherwise MISSING. Labels without a definition for the anatomy are
/// MISSING.
inline std::vector<LabelOutcome> map_topics_to_labels(const std::set<std::size_t>& topics, const LabelSet& set,
                                                      Anatomy anatomy, MappingDiagnostics* diag = nullptr) {
  std::vector<LabelOutcome> out(set.names.size(), LabelOutcome::Missing);
  for (const auto& def : set.defs) {
    if (!def.anatomies.count(anatomy)) continue;
    const auto idx = set.index_of(def.name);
    const bool pos = std::any_of(def.positive_topics.begin(), def.positive_topics.end(),
                                 [&](std::size_t t) { return topics.count(t) > 0; });
    const bool neg = std::any_of(def.negative_topics.begin(), def.negative_topics.end(),
                                 [&](std::size_t t) { return topics.count(t) > 0; });
    if (pos && neg && diag) ++diag->conflicts;
    out[idx] = pos ? LabelOutcome::True : neg ? LabelOutcome::False : LabelOutcome::Missing;
  }
  return out;
}

struct LabeledUnit {
  std::string unit_id;
  std::vector<LabelOutcome> outcomes;  // aligned with the label names
  friend bool operator==(const LabeledUnit&, const LabeledUnit&) = default;
};

/// Units keyed by id with a fixed label order.
struct LabelTable {
  std::vector<std::string> names;
  std::vector<LabeledUnit> units;

  std::size_t label_index(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    throw DataError("unknown label '" + std::string(name) + "' (known: " + text::join(names, ", ") + ")");
  }

  std::unordered_map<std::string, std::size_t> index() const {
    std::unordered_map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < units.size(); ++i) idx.emplace(units[i].unit_id, i);
    return idx;
  }
};

/// Join sentence outcomes into report outcomes. `sentence_report` gives each
/// sentence unit's report id; reports without labeled sentences are all MISSING.
inline LabelTable aggregate_to_reports(const LabelTable& sentences, const std::vector<std::string>& sentence_report,
                                       const std::vector<std::string>& report_ids) {
  if (sentence_report.size() != sentences.units.size())
    throw ValidationError("one report id per sentence unit required");
  std::unordered_map<std::string, std::size_t> pos;
  LabelTable out{sentences.names, {}};
  for (const auto& id : report_ids) {
    if (!pos.emplace(id, out.units.size()).second) throw DataError("duplicate report id '" + id + "'");
    out.units.push_back({id, std::vector<LabelOutcome>(sentences.names.size(), LabelOutcome::Missing)});
  }
  for (std::size_t s = 0; s < sentences.units.size(); ++s) {
    auto it = pos.find(sentence_report[s]);
    if (it == pos.end()) throw DataError("sentence '" + sentences.units[s].unit_id + "' has no parent report");
    auto& acc = out.units[it->second].outcomes;
    for (std::size_t l = 0; l < acc.size(); ++l) acc[l] = join(acc[l], sentences.units[s].outcomes[l]);
  }
  return out;
}

/// Each image inherits its examination report's label map. An image listed
/// under a report that has no labels is an orphan and raises DataError.
inline LabelTable propagate_to_images(const LabelTable& reports, const std::vector<RawReport>& associations) {
  const auto idx = reports.index();
  LabelTable out{reports.names, {}};
  std::unordered_set<std::string> seen;
  for (const auto& r : associations) {
    if (r.image_ids.empty()) continue;
    auto it = idx.find(r.report_id);
    if (it == idx.end())
      throw DataError("orphan image '" + r.image_ids.front() + "': report '" + r.report_id + "' has no labels");
    for (const auto& img : r.image_ids) {
      if (!seen.insert(img).second) throw DataError("image '" + img + "' belongs to more than one report");
      out.units.push_back({img, reports.units[it->second].outcomes});
    }
  }
  return out;
}

struct ModeResult {
  LabelOutcome outcome = LabelOutcome::False;
  double frequency = 0.0;  // fraction of non-MISSING units
  std::size_t n_true = 0;
  std::size_t n_false = 0;
};

/// Most common non-MISSING outcome; a tie goes to FALSE.
inline ModeResult compute_mode(std::size_t n_true, std::size_t n_false) {
  if (n_true + n_false == 0) throw DataError("label has only MISSING outcomes; mode undefined");
  ModeResult m;
  m.n_true = n_true;
  m.n_false = n_false;
  m.outcome = n_true > n_false ? LabelOutcome::True : LabelOutcome::False;
  m.frequency = static_cast<double>(std::max(n_true, n_false)) / static_cast<double>(n_true + n_false);
  return m;
}

inline ModeResult compute_mode(const LabelTable& table, std::size_t label) {
  std::size_t t = 0, f = 0;
  for (const auto& u : table.units) {
    if (u.outcomes.at(label) == LabelOutcome::True) ++t;
    if (u.outcomes.at(label) == LabelOutcome::False) ++f;
  }
  try {
    return compute_mode(t, f);
  } catch (const DataError&) {
    throw DataError("label '" + table.names[label] + "' has only MISSING outcomes; mode undefined");
  }
}

// -------------------------------------------------------------------- split

enum class Split : std::uint8_t { train, validation, test };

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "train";
}

inline Split parse_split(std::string_view s) {
  s = text::trim(s);
  if (s == "train") return Split::train;
  if (s == "validation" || s == "val") return Split::validation;
  if (s == "test") return Split::test;
  throw DataError("unknown split '" + std::string(s) + "'");
}

struct SplitFractions {
  double train = 0.7;
  double validation = 0.2;
  double test = 0.1;
};

struct SplitAssignment {
  std::map<std::string, Split> by_image;
  std::uint64_t seed = 0;

  std::vector<std::string> members(Split s) const {
    std::vector<std::string> out;
    for (const auto& [id, sp] : by_image)
      if (sp == s) out.push_back(id);
    return out;
  }
};

/// Seeded shuffle then contiguous slices. Boundaries are round(n * train) and
/// round(n * (train + validation)). With `exam_of`, whole examinations are
/// shuffled and each goes to the slice its first image would fall into.
inline SplitAssignment split_dataset(std::vector<std::string> image_ids, const SplitFractions& fr, std::uint64_t seed,
                                     const std::unordered_map<std::string, std::string>* exam_of = nullptr) {
  if (fr.train < 0 || fr.validation < 0 || fr.test < 0) throw ValidationError("split fractions must be non-negative");
  if (std::abs(fr.train + fr.validation + fr.test - 1.0) > 1e-9)
    throw ValidationError("split fractions must sum to 1");
  std::sort(image_ids.begin(), image_ids.end());
  if (std::adjacent_find(image_ids.begin(), image_ids.end()) != image_ids.end())
    throw DataError("duplicate image id in split input");
  const std::size_t n = image_ids.size();
  const auto b1 = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fr.train + 0.5));
  const auto b2 = std::max(b1, static_cast<std::size_t>(std::floor(static_cast<double>(n) * (fr.train + fr.validation) + 0.5)));
  auto slice = [&](std::size_t pos) { return pos < b1 ? Split::train : pos < b2 ? Split::validation : Split::test; };
  SplitAssignment out;
  out.seed = seed;
  Rng rng(seed);
  if (!exam_of) {
    rng.shuffle(image_ids.begin(), image_ids.end());
    for (std::size_t i = 0; i < n; ++i) out.by_image.emplace(image_ids[i], slice(i));
    return out;
  }
  std::map<std::string, std::vector<std::string>> groups;
  for (const auto& id : image_ids) {
    auto it = exam_of->find(id);
    if (it == exam_of->end()) throw DataError("image '" + id + "' has no examination");
    groups[it->second].push_back(id);
  }
  std::vector<const std::vector<std::string>*> order;
  for (const auto& [exam, imgs] : groups) order.push_back(&imgs);
  rng.shuffle(order.begin(), order.end());
  std::size_t pos = 0;
  for (const auto* imgs : order) {
    const Split s = slice(pos);
    for (const auto& id : *imgs) out.by_image.emplace(id, s);
    pos += imgs->size();
  }
  return out;
}

// ---------------------------------------------------------------------- I/O

/// unit_id then one T/F/M column per label.
inline std::string render_label_table(const LabelTable& t, const std::string& header_comment = {}) {
  std::string out = header_comment.empty() ? "" : "# " + header_comment + "\n";
  out += "unit_id";
  for (const auto& n : t.names) out += "\t" + n;
  out += "\n";
  for (const auto& u : t.units) {
    out += u.unit_id;
    for (auto o : u.outcomes) {
      out += '\t';
      out += to_char(o);
    }
    out += "\n";
  }
  return out;
}

inline LabelTable parse_label_table(std::string_view content, std::string_view source) {
  auto table = text::parse_tsv(content, source);
  if (table.header.empty() || table.header[0] != "unit_id")
    throw DataError(std::string(source) + ": expected first column 'unit_id'");
  LabelTable out{{table.header.begin() + 1, table.header.end()}, {}};
  std::unordered_set<std::string> seen;
  for (const auto& row : table.rows) {
    LabeledUnit u{row.fields[0], {}};
    if (!seen.insert(u.unit_id).second)
      throw DataError(text::where(source, row.line) + "duplicate unit '" + u.unit_id + "'");
    for (std::size_t i = 1; i < row.fields.size(); ++i) {
      try {
        u.outcomes.push_back(parse_outcome(row.fields[i]));
      } catch (const DataError& e) {
        throw DataError(text::where(source, row.line) + e.what());
      }
    }
    out.units.push_back(std::move(u));
  }
  return out;
}

inline LabelTable read_label_table(const std::string& path) { return parse_label_table(text::read_file(path), path); }

inline std::string render_split_tsv(const SplitAssignment& s, const std::string& header_comment = {}) {
  std::string out = header_comment.empty() ? "" : "# " + header_comment + "\n";
  out += "image_id\tsplit\n";
  for (const auto& [id, sp] : s.by_image) out += id + "\t" + std::string(to_string(sp)) + "\n";
  return out;
}

inline SplitAssignment parse_split_tsv(std::string_view content, std::string_view source) {
  auto table = text::parse_tsv(content, source);
  const auto ii = table.column("image_id", source), si = table.column("split", source);
  SplitAssignment out;
  for (const auto& row : table.rows) {
    if (!out.by_image.emplace(row.fields[ii], parse_split(row.fields[si])).second)
      throw DataError(text::where(source, row.line) + "duplicate image '" + row.fields[ii] + "'");
  }
  return out;
}

inline SplitAssignment read_split_tsv(const std::string& path) { return parse_split_tsv(text::read_file(path), path); }

}  // namespace radlabel::labels
