#pragma once

// Run configuration: a key = value text file over a fixed table of known keys.
// Every resolved configuration has a stable hash, and every artifact written by
// the pipeline carries that hash and the run's seeds in its header.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "radlabel/error.hpp"
#include "radlabel/text.hpp"

namespace radlabel {

inline constexpr std::string_view kVersion = "1.0.0";

struct ConfigKey {
  std::string_view name;
  std::string_view default_value;
  std::string_view help;
};

// clang-format off
inline constexpr ConfigKey kConfigKeys[] = {
    // paths
    {"corpus", "", "input reports (JSON lines)"},
    {"corrections", "", "correction list (TSV pattern, replacement)"},
    {"stop_words", "", "stop-word list (one per line)"},
    {"stemmer", "builtin:swedish", "stemmer rule file or builtin:swedish"},
    {"language", "swedish", "stemming language; none disables stemming"},
    {"abbreviations", "", "sentence-splitting abbreviation list"},
    {"label_defs", "", "label definition TSV, or auto to derive from synth_manifest"},
    {"synth_manifest", "", "keyword manifest written by the synth command"},
    {"features", "", "image feature TSV"},
    {"predictions", "", "external predictions file (replaces the reference classifier)"},
    {"scores_dir", "", "directory of scored review sheets"},
    {"gold", "", "gold-standard annotations TSV"},
    {"output_dir", "out", "directory for all outputs"},
    // preprocessing
    {"min_report_chars", "6", "reports shorter than this are removed"},
    {"min_tokens", "2", "documents with fewer tokens are removed"},
    {"min_count", "5", "terms rarer than this are pruned"},
    // experiment 1
    {"num_topics", "60", "topics per experiment-1 model"},
    {"scaling_factors", "0.01,0.1,1,10", "experiment-1 grid of alpha scaling factors"},
    {"document_types", "report,sentences", "experiment-1 grid of corpus types"},
    {"views", "words,docs,both", "review-sheet views"},
    {"beta", "0.1", "topic-word Dirichlet concentration"},
    {"sweeps", "1000", "Gibbs sweeps per fit"},
    {"burn_in", "200", "sweeps before the estimate window"},
    {"word_threshold", "0.03", "minimum topic-word probability shown to reviewers"},
    {"top_docs", "15", "documents shown per topic"},
    // experiment 2
    {"label_num_topics", "100", "topics per anatomy model"},
    {"label_scaling_factor", "0.1", "alpha scaling factor of the anatomy models"},
    {"train_fraction", "0.7", "share of images for training"},
    {"validation_fraction", "0.2", "share of images for validation"},
    {"test_fraction", "0.1", "share of images for testing"},
    {"split_by_exam", "false", "keep the images of an examination in one split"},
    {"epochs", "30", "reference classifier epochs"},
    {"learning_rate", "0.1", "reference classifier step size"},
    {"l2", "0.0001", "reference classifier weight decay"},
    {"batch_size", "32", "reference classifier mini-batch size"},
    // experiment 3
    {"review_labels", "", "labels to review (comma-separated; empty = all)"},
    {"review_per_stratum", "150", "images drawn per stratum and label"},
    {"resamples", "10000", "bootstrap resamples"},
    // seeds
    {"sampler_seed", "1", "Gibbs sampler seed"},
    {"shuffle_seed", "2", "review-sheet blinding seed"},
    {"split_seed", "3", "dataset split seed"},
    {"train_seed", "4", "classifier seed"},
    {"sample_seed", "5", "review sampling seed"},
    {"bootstrap_seed", "6", "bootstrap seed"},
};
// clang-format on

inline constexpr std::string_view kSeedKeys[] = {"sampler_seed", "shuffle_seed", "split_seed",
                                                 "train_seed",   "sample_seed",  "bootstrap_seed"};

inline constexpr std::string_view kPathKeys[] = {"corpus",   "corrections", "stop_words", "abbreviations",
                                                 "features", "predictions", "gold",       "synth_manifest"};

inline bool is_known_key(std::string_view name) {
  for (const auto& k : kConfigKeys)
    if (k.name == name) return true;
  return false;
}

class RunConfig {
 public:
  RunConfig() {
    for (const auto& k : kConfigKeys) values_.emplace(k.name, k.default_value);
  }

  /// `key = value` lines; `#` starts a comment line. Relative paths are kept
  /// as written.
  static RunConfig parse(std::string_view content, std::string_view source) {
    RunConfig c;
    std::size_t line_no = 0;
    for (const auto& raw : text::split(content, '\n')) {
      ++line_no;
      const auto line = text::trim(raw);
      if (line.empty() || line.front() == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos)
        throw ValidationError(text::where(source, line_no) + "expected 'key = value'");
      const std::string key(text::trim(line.substr(0, eq)));
      if (!is_known_key(key)) throw ValidationError(text::where(source, line_no) + "unknown key '" + key + "'");
      c.values_[key] = std::string(text::trim(line.substr(eq + 1)));
    }
    return c;
  }

  static RunConfig load(const std::string& path) { return parse(text::read_file(path), path); }

  void set(std::string_view key, std::string value) {
    if (!is_known_key(key)) throw ValidationError("unknown configuration key '" + std::string(key) + "'");
    values_[std::string(key)] = std::move(value);
  }

  const std::string& get(std::string_view key) const {
    auto it = values_.find(std::string(key));
    if (it == values_.end()) throw ValidationError("unknown configuration key '" + std::string(key) + "'");
    return it->second;
  }

  bool has(std::string_view key) const { return !get(key).empty(); }

  double number(std::string_view key) const {
    try {
      return text::parse_double(get(key), key);
    } catch (const Error& e) {
      throw ValidationError(std::string("config ") + e.what());
    }
  }

  std::size_t count(std::string_view key) const {
    try {
      const auto v = text::parse_int(get(key), key);
      if (v < 0) throw ValidationError(std::string(key) + " must be non-negative");
      return static_cast<std::size_t>(v);
    } catch (const Error& e) {
      throw ValidationError(std::string("config ") + e.what());
    }
  }

  std::uint64_t seed(std::string_view key) const {
    const std::string& s = get(key);
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw ValidationError("config " + std::string(key) + ": invalid seed '" + s + "'");
    return v;
  }

  bool flag(std::string_view key) const {
    const std::string v = text::lowercase(get(key));
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no" || v.empty()) return false;
    throw ValidationError("config " + std::string(key) + ": expected true or false, found '" + v + "'");
  }

  std::vector<std::string> list(std::string_view key) const {
    std::vector<std::string> out;
    for (const auto& p : text::split(get(key), ',')) {
      auto t = text::trim(p);
      if (!t.empty()) out.emplace_back(t);
    }
    return out;
  }

  /// Every path key that is set must name an existing file.
  void validate_paths() const {
    for (auto k : kPathKeys) {
      const auto& p = get(k);
      if (!p.empty() && !std::filesystem::exists(p))
        throw DataError("config " + std::string(k) + ": '" + p + "' does not exist");
    }
    const auto& s = get("stemmer");
    if (!s.starts_with("builtin:") && !std::filesystem::exists(s))
      throw DataError("config stemmer: '" + s + "' does not exist");
    const auto& l = get("label_defs");
    if (!l.empty() && l != "auto" && !std::filesystem::exists(l))
      throw DataError("config label_defs: '" + l + "' does not exist");
  }

  /// Canonical `key = value` listing of all keys in table order.
  std::string render() const {
    std::string out;
    for (const auto& k : kConfigKeys) out += std::string(k.name) + " = " + get(k.name) + "\n";
    return out;
  }

  std::string hash() const { return text::hex64(text::fnv1a(render())); }

  /// Header line embedded in every artifact.
  std::string provenance() const {
    std::string out = "radlabel " + std::string(kVersion) + " config=" + hash() + " seeds:";
    for (auto k : kSeedKeys) out += " " + std::string(k) + "=" + get(k);
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace radlabel
