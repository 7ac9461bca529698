#include <gtest/gtest.h>

#include <fstream>
#include <utility>

#include "radlabel/corpus.hpp"
#include "radlabel/stemmer.hpp"
#include "radlabel/text.hpp"

using namespace radlabel;

namespace {

struct StemCase {
  const char* word;
  const char* stem;
};

constexpr StemCase kStemCases[] = {
#include "stem_vectors.inc"
};

NormalizationRules plain_rules() {
  NormalizationRules r;
  r.finalize();
  return r;
}

}  // namespace

TEST(Text, Utf8RoundTripAndLowercase) {
  const std::string s = "Höger FOTLED Åäö";
  EXPECT_EQ(text::encode_utf8(text::decode_utf8(s)), s);
  EXPECT_EQ(text::lowercase(s), "höger fotled åäö");
  EXPECT_EQ(text::utf8_length("åäö"), 3u);
}

TEST(Text, TsvParsingReportsLineNumbers) {
  const auto t = text::parse_tsv("# comment\na\tb\n1\t2\n\n3\t4\n", "x.tsv");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[1].line, 5u);
  EXPECT_THROW(text::parse_tsv("a\tb\n1\n", "x.tsv"), DataError);
}

TEST(Stemmer, MatchesReferenceSnowballStems) {
  const auto st = Stemmer::swedish();
  for (const auto& c : kStemCases) EXPECT_EQ(st.stem(c.word), c.stem) << c.word;
}

TEST(Stemmer, ShippedRuleFileEqualsBuiltinTable) {
  const std::string path = std::string(RADLABEL_DATA_DIR) + "/swedish.stem";
  EXPECT_EQ(text::read_file(path), std::string(kSwedishStemRules));
  const auto file = Stemmer::from_source(path);
  const auto builtin = Stemmer::swedish();
  for (const auto& c : kStemCases) EXPECT_EQ(file.stem(c.word), builtin.stem(c.word));
}

TEST(Stemmer, FixpointIsIdempotent) {
  const auto st = Stemmer::swedish();
  for (const auto& c : kStemCases) {
    const auto once = st.stem_to_fixpoint(c.word);
    EXPECT_EQ(st.stem_to_fixpoint(once), once) << c.word;
  }
}

TEST(Stemmer, R1ProtectsShortWords) {
  const auto st = Stemmer::swedish();
  // R1 starts no earlier than offset 3, so nothing is removed from "ben" or "arm".
  EXPECT_EQ(st.stem("ben"), "ben");
  EXPECT_EQ(st.stem("arm"), "arm");
}

TEST(Stemmer, RejectsMalformedRuleFiles) {
  EXPECT_THROW(Stemmer::parse("delete a\n"), ValidationError);
  EXPECT_THROW(Stemmer::parse("language x\nvowels aeiou\nstep s\nfrobnicate a\n"), ValidationError);
}

TEST(Scrub, ReplacesDatesAndExamIdsIdempotently) {
  RawReport r{"r1", "e1", Anatomy::wrist, "Jämfört med 2019-03-04 och us 1234567, remiss 12/3-19.", {}};
  const auto once = scrub_report(r);
  EXPECT_EQ(once.text.find("2019"), std::string::npos);
  EXPECT_EQ(once.text.find("1234567"), std::string::npos);
  EXPECT_NE(once.text.find("<DATE_REMOVED>"), std::string::npos);
  EXPECT_NE(once.text.find("<EXAM_ID_REMOVED>"), std::string::npos);
  EXPECT_EQ(scrub_report(once).text, once.text);
}

TEST(Normalize, KeepsLettersHyphenUnderscore) {
  EXPECT_EQ(normalize_to_words("Fraktur, 3 mm! dist-radius <DATE_REMOVED>"),
            (std::vector<std::string>{"fraktur", "mm", "dist-radius", "date_removed"}));
  EXPECT_TRUE(normalize_to_words("12 , 45").empty());
}

TEST(Corrections, LongestMatchFirstAndFinal) {
  CorrectionList c;
  c.add({"dist", "radius"}, {"distala", "radius"});
  c.add({"dist"}, {"distal"});
  EXPECT_EQ(c.apply({"dist", "radius", "dist"}), (std::vector<std::string>{"distala", "radius", "distal"}));
  EXPECT_NO_THROW(c.validate());
  CorrectionList chain;
  chain.add({"a"}, {"b"});
  chain.add({"b"}, {"c"});
  EXPECT_THROW(chain.validate(), ValidationError);
}

TEST(Preprocess, NegationsSurviveStopWordsAndStemming) {
  NormalizationRules r;
  r.stop_words = {"ingen", "och", "med"};
  r.finalize();
  const auto st = Stemmer::swedish();
  const auto toks = preprocess_text("Ingen fraktur och ingen luxation med felställningen", r, &st);
  EXPECT_EQ(toks, (std::vector<std::string>{"ingen", "fraktur", "ingen", "luxation", "felställning"}));
}

TEST(Preprocess, IdempotentOnItsOwnOutput) {
  NormalizationRules r = plain_rules();
  const auto st = Stemmer::swedish();
  const std::string raw = "Frakturerna i distala radius läker. Ledspalterna är välbevarade, ingen artros.";
  const auto once = preprocess_text(raw, r, &st);
  EXPECT_EQ(preprocess_text(text::join(once, " "), r, &st), once);
}

TEST(Preprocess, LanguageNoneSkipsStemmer) {
  NormalizationRules r = plain_rules();
  r.language = "none";
  EXPECT_EQ(preprocess_text("Frakturerna läker", r, nullptr), (std::vector<std::string>{"frakturerna", "läker"}));
  r.language = "swedish";
  EXPECT_THROW(preprocess_text("x", r, nullptr), ValidationError);
}

TEST(Sentences, SplitsOnTerminatorsButNotAbbreviations) {
  RawReport r{"r7", "e7", Anatomy::ankle, "Ingen fraktur, t.ex. i fibula. Luxation? Kontroll om 2 v", {}};
  const auto s = split_sentences(r);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].text, "Ingen fraktur, t.ex. i fibula");
  EXPECT_EQ(s[0].terminator, ".");
  EXPECT_EQ(s[1].text, "Luxation");
  EXPECT_EQ(s[2].terminator, "");
  EXPECT_EQ(s[2].doc_id, "r7/2");
  for (const auto& d : s) EXPECT_EQ(d.source_chars, text::utf8_length(r.text));
}

TEST(Sentences, ConcatenationRecoversTheReport) {
  RawReport r{"r8", "e8", Anatomy::wrist, "Fraktur. Ingen luxation!  Normal ledställning.", {}};
  std::string joined;
  for (const auto& d : split_sentences(r)) joined += (joined.empty() ? "" : " ") + d.text + d.terminator;
  EXPECT_EQ(text::collapse_whitespace(joined), text::collapse_whitespace(r.text));
}

TEST(Filter, RemovesShortReportsAndDocuments) {
  std::vector<Document> docs(3);
  docs[0].source_chars = 3;
  docs[0].tokens = {"a", "b"};
  docs[1].source_chars = 50;
  docs[1].tokens = {"a"};
  docs[2].source_chars = 50;
  docs[2].tokens = {"a", "b"};
  const auto f = filter_documents(docs);
  EXPECT_EQ(f.removed_short_report, 1u);
  EXPECT_EQ(f.removed_few_tokens, 1u);
  EXPECT_EQ(f.docs.size(), 1u);
}

TEST(Vocabulary, PrunesRareTermsAndOrdersByCount) {
  std::vector<Document> docs(3);
  docs[0].tokens = {"b", "a", "a", "rare"};
  docs[1].tokens = {"b", "a"};
  docs[2].tokens = {"rare2"};
  const auto vb = build_vocabulary(docs, 2);
  EXPECT_EQ(vb.vocabulary.terms, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(vb.dropped_tokens, 2u);
  EXPECT_EQ(vb.dropped_docs, 1u);
  EXPECT_THROW(build_vocabulary(docs, 100), DataError);
}

TEST(CorpusIo, ReportsAndDocumentsRoundTrip) {
  std::vector<RawReport> reports{{"r1", "e1", Anatomy::ankle, "Fraktur i fibula.", {"i1", "i2"}}};
  const auto back = parse_reports_jsonl(render_reports_jsonl(reports, {{"tool", "radlabel"}}), "mem");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].image_ids, reports[0].image_ids);
  EXPECT_EQ(back[0].anatomy, Anatomy::ankle);

  auto docs = split_sentences(reports[0]);
  docs[0].tokens = {"fraktur", "fibula"};
  const auto dback = parse_documents_jsonl(render_documents_jsonl(docs, {}), "mem");
  ASSERT_EQ(dback.size(), 1u);
  EXPECT_EQ(dback[0].tokens, docs[0].tokens);
  EXPECT_EQ(dback[0].doc_id, "r1/0");
}

TEST(CorpusIo, MalformedReportLineNamesTheLine) {
  try {
    parse_reports_jsonl("{\"report_id\":\"r1\"}\n", "bad.jsonl");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.jsonl:1"), std::string::npos) << e.what();
  }
}
