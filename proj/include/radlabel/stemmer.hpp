#pragma once

// Table-driven suffix-stripping stemmer.
//
// A rule file declares the language, the vowel set used to compute the R1
// region, and an ordered list of steps. Within a step the longest listed
// suffix that lies entirely inside R1 is selected and its action applied;
// at most one rule fires per step. Rule file grammar (one directive per line,
// `#` starts a comment):
//
//   language <name>
//   vowels <letters>
//   r1_min <n>                      minimum R1 start offset (default 3)
//   step <name>
//   delete <suffix>...              remove the suffix
//   delete_after <suffix> <letters> remove it only when preceded by a listed letter
//   undouble <suffix>...            remove the final letter of the suffix
//   replace <suffix> <replacement>  substitute
//
// The built-in table is the classic Snowball Swedish algorithm.

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "radlabel/error.hpp"
#include "radlabel/text.hpp"

namespace radlabel {

inline constexpr std::string_view kSwedishStemRules = R"(# Swedish suffix-stripping rules (classic Snowball Swedish)
language swedish
vowels aeiouyäåö
r1_min 3

step main_suffix
delete a arna erna heterna orna ad e ade ande arne are aste en anden aren heten ern ar er heter or as arnas ernas ornas es ades andes ens arens hetens erns at andet het ast
delete_after s bcdfghjklmnoprtvy

step consonant_pair
undouble dd gd nn dt gt kt tt

step other_suffix
delete lig ig els
replace löst lös
replace fullt full
)";

class Stemmer {
 public:
  enum class Action { remove, remove_after, undouble, replace };

  struct Rule {
    std::u32string suffix;
    Action action = Action::remove;
    std::u32string argument;  // preceding letters for remove_after, replacement for replace
  };

  struct Step {
    std::string name;
    std::vector<Rule> rules;  // sorted by descending suffix length
  };

  static Stemmer parse(std::string_view rules, std::string_view source = "<stemmer rules>") {
    Stemmer st;
    std::size_t line_no = 0;
    for (const auto& raw : text::split(rules, '\n')) {
      ++line_no;
      std::string_view line = raw;
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      auto words = text::split_whitespace(line);
      if (words.empty()) continue;
      const std::string& key = words[0];
      auto fail = [&](const std::string& msg) {
        throw ValidationError(text::where(source, line_no) + msg);
      };
      auto need_step = [&]() -> Step& {
        if (st.steps_.empty()) fail("rule before any 'step' directive");
        return st.steps_.back();
      };
      if (key == "language") {
        if (words.size() != 2) fail("usage: language <name>");
        st.language_ = words[1];
      } else if (key == "vowels") {
        if (words.size() != 2) fail("usage: vowels <letters>");
        st.vowels_ = text::decode_utf8(words[1]);
      } else if (key == "r1_min") {
        if (words.size() != 2) fail("usage: r1_min <n>");
        st.r1_min_ = static_cast<std::size_t>(text::parse_int(words[1], "r1_min"));
      } else if (key == "step") {
        st.steps_.push_back({words.size() > 1 ? words[1] : "step" + std::to_string(st.steps_.size() + 1), {}});
      } else if (key == "delete" || key == "undouble") {
        if (words.size() < 2) fail("'" + key + "' needs at least one suffix");
        auto& step = need_step();
        for (std::size_t i = 1; i < words.size(); ++i)
          step.rules.push_back({text::decode_utf8(words[i]), key == "delete" ? Action::remove : Action::undouble, {}});
      } else if (key == "delete_after" || key == "replace") {
        if (words.size() != 3) fail("usage: " + key + " <suffix> <argument>");
        need_step().rules.push_back({text::decode_utf8(words[1]),
                                     key == "replace" ? Action::replace : Action::remove_after,
                                     text::decode_utf8(words[2])});
      } else {
        fail("unknown directive '" + key + "'");
      }
    }
    if (st.language_.empty()) throw ValidationError(std::string(source) + ": missing 'language' directive");
    if (st.vowels_.empty()) throw ValidationError(std::string(source) + ": missing 'vowels' directive");
    for (auto& step : st.steps_) {
      for (const auto& r : step.rules)
        if (r.suffix.empty()) throw ValidationError(std::string(source) + ": empty suffix");
      std::stable_sort(step.rules.begin(), step.rules.end(),
                       [](const Rule& a, const Rule& b) { return a.suffix.size() > b.suffix.size(); });
    }
    return st;
  }

  static Stemmer load(const std::string& path) { return parse(text::read_file(path), path); }

  static Stemmer swedish() { return parse(kSwedishStemRules, "builtin:swedish"); }

  /// Built-in table by name ("builtin:swedish") or a rule file path.
  static Stemmer from_source(const std::string& source) {
    if (source == "builtin:swedish" || source == "swedish") return swedish();
    return load(source);
  }

  const std::string& language() const noexcept { return language_; }
  const std::vector<Step>& steps() const noexcept { return steps_; }

  /// One pass of every step (the reference algorithm's output).
  std::string stem(std::string_view word) const {
    std::u32string w = text::decode_utf8(word);
    const std::size_t p1 = r1_start(w);
    for (const auto& step : steps_) apply_step(step, w, p1);
    return text::encode_utf8(w);
  }

  /// Repeat `stem` until the word no longer changes. Every firing rule
  /// shortens the word or replaces a suffix by a shorter one, so this terminates.
  std::string stem_to_fixpoint(std::string_view word) const {
    std::string cur(word);
    for (;;) {
      std::string next = stem(cur);
      if (next == cur) return cur;
      cur = std::move(next);
    }
  }

 private:
  bool is_vowel(char32_t c) const { return vowels_.find(c) != std::u32string::npos; }

  // R1: the region after the first non-vowel following a vowel, starting no
  // earlier than r1_min. Words shorter than r1_min have an empty R1.
  std::size_t r1_start(const std::u32string& w) const {
    if (w.size() < r1_min_) return w.size();
    for (std::size_t i = 1; i < w.size(); ++i) {
      if (!is_vowel(w[i]) && is_vowel(w[i - 1])) return std::max(i + 1, r1_min_);
    }
    return w.size();
  }

  static bool ends_with(const std::u32string& w, const std::u32string& suffix) {
    return w.size() >= suffix.size() && w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
  }

  static void apply_step(const Step& step, std::u32string& w, std::size_t p1) {
    for (const auto& rule : step.rules) {
      if (!ends_with(w, rule.suffix)) continue;
      const std::size_t start = w.size() - rule.suffix.size();
      if (start < p1) continue;
      switch (rule.action) {
        case Action::remove:
          w.erase(start);
          break;
        case Action::remove_after:
          // The preceding letter may lie outside R1.
          if (start > 0 && rule.argument.find(w[start - 1]) != std::u32string::npos) w.erase(start);
          break;
        case Action::undouble:
          w.pop_back();
          break;
        case Action::replace:
          w.replace(start, rule.suffix.size(), rule.argument);
          break;
      }
      return;
    }
  }

  std::string language_;
  std::u32string vowels_;
  std::size_t r1_min_ = 3;
  std::vector<Step> steps_;
};

}  // namespace radlabel
