#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "radlabel/config.hpp"

using namespace radlabel;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("radlabel_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args, const fs::path& cwd = {}) {
  const std::string cd = cwd.empty() ? "" : "cd '" + cwd.string() + "' && ";
  const std::string cmd = cd + RADLABEL_CLI + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void expect_same_tree(const fs::path& a, const fs::path& b) {
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto rel = fs::relative(e.path(), a);
    ASSERT_TRUE(fs::exists(b / rel)) << rel;
    EXPECT_EQ(slurp(e.path()), slurp(b / rel)) << rel;
  }
  EXPECT_GT(files, 0u);
}

}  // namespace

TEST(Config, ParseErrorsCarryFileAndLine) {
  try {
    RunConfig::parse("# comment\nnum_topics = 5\nnot a pair\n", "run.conf");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("run.conf:3"), std::string::npos) << e.what();
  }
  try {
    RunConfig::parse("\nnum_topikz = 5\n", "run.conf");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("run.conf:2"), std::string::npos) << e.what();
  }
  RunConfig c;
  EXPECT_THROW(c.set("nope", "1"), ValidationError);
}

TEST(Config, HashIsStableAndSensitive) {
  const auto a = RunConfig::parse("num_topics = 7\n", "a");
  const auto b = RunConfig::parse("  num_topics=7  \n# other\n", "b");
  EXPECT_EQ(a.hash(), b.hash());
  auto c = a;
  c.set("sampler_seed", "99");
  EXPECT_NE(c.hash(), a.hash());
  EXPECT_EQ(a.hash().size(), 16u);
}

TEST(Config, ProvenanceNamesEverySeed) {
  const RunConfig c;
  const auto p = c.provenance();
  EXPECT_EQ(p.rfind("radlabel " + std::string(kVersion) + " config=" + c.hash(), 0), 0u) << p;
  for (auto k : kSeedKeys) EXPECT_NE(p.find(" " + std::string(k) + "="), std::string::npos) << k;
}

TEST(Config, TypedAccessors) {
  auto c = RunConfig::parse("scaling_factors = 0.01, 0.1 ,1\nsweeps = 12\n", "c");
  EXPECT_EQ(c.list("scaling_factors"), (std::vector<std::string>{"0.01", "0.1", "1"}));
  EXPECT_EQ(c.count("sweeps"), 12u);
  c.set("sweeps", "-1");
  EXPECT_THROW(c.count("sweeps"), ValidationError);
  c.set("sampler_seed", "12x");
  EXPECT_THROW(c.seed("sampler_seed"), ValidationError);
  c.set("split_by_exam", "YES");
  EXPECT_TRUE(c.flag("split_by_exam"));
  c.set("split_by_exam", "maybe");
  EXPECT_THROW(c.flag("split_by_exam"), ValidationError);
}

TEST(Config, MissingConfiguredPathIsADataError) {
  RunConfig c;
  c.set("corpus", "/nonexistent/reports.jsonl");
  EXPECT_THROW(c.validate_paths(), DataError);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("codes");
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("--bogus show-config"), 2);
  EXPECT_EQ(run_cli("show-config"), 0);
  EXPECT_EQ(run_cli("--num_topics 9 show-config"), 0);
  EXPECT_EQ(run_cli("fit-lda --docs /nonexistent/d.jsonl --vocab /nonexistent/v.tsv --out-dir " + dir.string()), 3);
  EXPECT_EQ(run_cli("--corpus /nonexistent/r.jsonl ingest --out " + (dir / "x.jsonl").string()), 3);

  std::ofstream(dir / "bad.conf") << "num_topics = 4\nunheard_of = 1\n";
  EXPECT_EQ(run_cli("--config " + (dir / "bad.conf").string() + " show-config"), 2);
  EXPECT_EQ(run_cli("--sweeps ten show-config"), 0);  // values are checked where they are used
  fs::remove_all(dir);
}

TEST(Cli, PipelineStagesAreByteReproducible) {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  // paths enter the configuration hash, so both runs use the same relative ones
  for (const auto& d : {a, b}) {
    ASSERT_EQ(run_cli("synth --out-dir study --exams 60 --seed 5", d), 0);
    ASSERT_EQ(run_cli("--corpus study/reports.jsonl --min_count 1 preprocess --docs docs.jsonl --vocab vocab.tsv", d),
              0);
    ASSERT_EQ(run_cli("--sweeps 20 --burn_in 5 fit-lda --topics 4 --docs docs.jsonl --vocab vocab.tsv --out-dir lda", d),
              0);
  }
  expect_same_tree(a, b);
  EXPECT_EQ(run_cli("--sweeps ten fit-lda --topics 4 --docs docs.jsonl --vocab vocab.tsv --out-dir bad", a), 2);
  fs::remove_all(a);
  fs::remove_all(b);
}
