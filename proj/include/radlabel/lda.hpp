#pragma once

/**
 * Latent Dirichlet allocation fitted by collapsed Gibbs sampling.
 *
 *   d < {0 ... D}  documents,  t < {0 ... T}  topics,  w < {0 ... W}  terms
 *
 *   phi[t]   ~ Dir(beta)         word distribution of topic t
 *   theta[d] ~ Dir(alpha)        topic mixture of document d
 *   z[d,i]   ~ Mult(theta[d])    topic of token i of document d
 *   x[d,i]   ~ Mult(phi[z[d,i]]) the observed term
 *
 * theta and phi are integrated out; the chain state is z plus the count
 * matrices n_dt (doc x topic), n_tw (topic x term) and n_t (topic totals).
 * One sweep resamples every token in corpus order from
 *
 *   P(z_i = t | z_-i, x)  propto  (n_tw[t,x_i] + beta) / (n_t[t] + W beta) * (n_dt[d_i,t] + alpha)
 *
 * alpha is not set directly: alpha = scaling_factor * 50 / T.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radlabel/corpus.hpp"
#include "radlabel/error.hpp"
#include "radlabel/matrix.hpp"
#include "radlabel/random.hpp"
#include "radlabel/text.hpp"

namespace radlabel::lda {

/// Largest dense topic x term count matrix.
inline constexpr std::size_t kMaxDenseTopicTerm = 10'000'000;

inline double derive_alpha(double scaling_factor, std::size_t num_topics) {
  if (!(scaling_factor > 0.0) || !std::isfinite(scaling_factor))
    throw ValidationError("scaling factor must be positive, got " + text::format_shortest(scaling_factor));
  if (num_topics < 2) throw ValidationError("number of topics must be at least 2, got " + std::to_string(num_topics));
  return scaling_factor * 50.0 / static_cast<double>(num_topics);
}

struct Hyperparams {
  std::size_t num_topics = 60;
  double scaling_factor = 0.1;
  double alpha = derive_alpha(0.1, 60);
  double beta = 0.1;
  std::size_t sweeps = 1000;
  std::size_t burn_in = 200;
  std::uint64_t seed = 1;

  static Hyperparams make(std::size_t num_topics, double scaling_factor, double beta = 0.1,
                          std::size_t sweeps = 1000, std::size_t burn_in = 200, std::uint64_t seed = 1) {
    Hyperparams h;
    h.num_topics = num_topics;
    h.scaling_factor = scaling_factor;
    h.alpha = derive_alpha(scaling_factor, num_topics);
    h.beta = beta;
    h.sweeps = sweeps;
    h.burn_in = burn_in;
    h.seed = seed;
    h.validate();
    return h;
  }

  /// T = 1 passes here (the degenerate single-topic sampler is well defined)
  /// even though derive_alpha refuses it.
  void validate() const {
    if (num_topics == 0) throw ValidationError("number of topics must be positive");
    if (!(scaling_factor > 0.0)) throw ValidationError("scaling factor must be positive");
    if (alpha != scaling_factor * 50.0 / static_cast<double>(num_topics))
      throw ValidationError("alpha must equal scaling_factor * 50 / T");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be positive");
    if (sweeps == 0) throw ValidationError("sweeps must be positive");
    if (burn_in >= sweeps) throw ValidationError("burn_in must be smaller than sweeps");
  }

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

/// Documents as term ids in [0, vocab_size).
struct TokenCorpus {
  std::size_t vocab_size = 0;
  std::vector<std::vector<std::uint32_t>> docs;

  std::size_t total_tokens() const {
    std::size_t n = 0;
    for (const auto& d : docs) n += d.size();
    return n;
  }

  void validate() const {
    if (vocab_size == 0) throw ValidationError("corpus vocabulary is empty");
    if (total_tokens() == 0) throw ValidationError("corpus has no tokens");
    for (const auto& d : docs)
      for (auto w : d)
        if (w >= vocab_size) throw ValidationError("term id " + std::to_string(w) + " outside vocabulary");
  }
};

inline TokenCorpus encode_corpus(const std::vector<Document>& docs, const Vocabulary& vocab) {
  TokenCorpus c;
  c.vocab_size = vocab.size();
  c.docs.reserve(docs.size());
  for (const auto& d : docs) {
    std::vector<std::uint32_t> ids;
    ids.reserve(d.tokens.size());
    for (const auto& t : d.tokens) {
      auto id = vocab.find(t);
      if (!id) throw DataError("document '" + d.doc_id + "' has out-of-vocabulary token '" + t + "'");
      ids.push_back(*id);
    }
    c.docs.push_back(std::move(ids));
  }
  return c;
}

struct TopicCount {
  std::uint32_t topic;
  std::int32_t count;
  friend bool operator==(const TopicCount&, const TopicCount&) = default;
};

struct LdaModel {
  Hyperparams hyper;
  std::size_t vocab_size = 0;
  std::vector<std::vector<std::uint32_t>> z;
  std::vector<std::vector<TopicCount>> n_dt;  // sparse rows, ascending topic, no zero entries
  std::vector<std::int32_t> n_tw;             // num_topics x vocab_size, row-major
  std::vector<std::int64_t> n_t;
  std::vector<double> loglik_trace;
  std::size_t sweeps_done = 0;

  std::size_t num_topics() const noexcept { return hyper.num_topics; }
  std::size_t num_docs() const noexcept { return z.size(); }

  std::int32_t topic_term(std::size_t t, std::size_t w) const { return n_tw[t * vocab_size + w]; }

  std::int32_t doc_topic(std::size_t d, std::size_t t) const {
    for (const auto& e : n_dt[d])
      if (e.topic == t) return e.count;
    return 0;
  }

  friend bool operator==(const LdaModel&, const LdaModel&) = default;
};

namespace detail {

inline std::vector<TopicCount> compact_row(std::span<const std::int32_t> dense) {
  std::vector<TopicCount> row;
  for (std::size_t t = 0; t < dense.size(); ++t)
    if (dense[t] != 0) row.push_back({static_cast<std::uint32_t>(t), dense[t]});
  return row;
}

inline void expand_row(const std::vector<TopicCount>& row, std::span<std::int32_t> dense) {
  std::fill(dense.begin(), dense.end(), 0);
  for (const auto& e : row) dense[e.topic] = e.count;
}

/// Rebuild all counts from z.
inline void recount(LdaModel& m, const TokenCorpus& corpus) {
  const std::size_t T = m.num_topics();
  m.n_tw.assign(T * m.vocab_size, 0);
  m.n_t.assign(T, 0);
  m.n_dt.assign(corpus.docs.size(), {});
  std::vector<std::int32_t> dense(T);
  for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
    std::fill(dense.begin(), dense.end(), 0);
    for (std::size_t i = 0; i < corpus.docs[d].size(); ++i) {
      const auto t = m.z[d][i];
      ++dense[t];
      ++m.n_tw[t * m.vocab_size + corpus.docs[d][i]];
      ++m.n_t[t];
    }
    m.n_dt[d] = compact_row(dense);
  }
}

}  // namespace detail

/// True when recounting from z reproduces every stored count exactly.
inline bool counts_consistent(const LdaModel& m, const TokenCorpus& corpus) {
  if (m.z.size() != corpus.docs.size()) return false;
  for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
    if (m.z[d].size() != corpus.docs[d].size()) return false;
    for (auto t : m.z[d])
      if (t >= m.num_topics()) return false;
  }
  LdaModel fresh = m;
  detail::recount(fresh, corpus);
  return fresh.n_dt == m.n_dt && fresh.n_tw == m.n_tw && fresh.n_t == m.n_t;
}

/// Uniformly random initial topic for every token.
inline LdaModel init_assignments(const TokenCorpus& corpus, const Hyperparams& hyper, Rng& rng) {
  hyper.validate();
  if (corpus.docs.empty()) throw ValidationError("cannot initialise LDA on an empty corpus");
  corpus.validate();
  if (hyper.num_topics * corpus.vocab_size > kMaxDenseTopicTerm)
    throw ValidationError("topic x term matrix of " + std::to_string(hyper.num_topics) + " x " +
                          std::to_string(corpus.vocab_size) + " exceeds the dense limit of " +
                          std::to_string(kMaxDenseTopicTerm) + " entries");
  LdaModel m;
  m.hyper = hyper;
  m.vocab_size = corpus.vocab_size;
  m.z.resize(corpus.docs.size());
  for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
    m.z[d].resize(corpus.docs[d].size());
    for (auto& t : m.z[d]) t = static_cast<std::uint32_t>(rng.index(hyper.num_topics));
  }
  detail::recount(m, corpus);
  return m;
}

/// Collapsed log joint log p(x, z) from counts alone.
inline double log_likelihood(const LdaModel& m) {
  const std::size_t T = m.num_topics();
  const double W = static_cast<double>(m.vocab_size);
  const double a = m.hyper.alpha, b = m.hyper.beta;
  const double lg_a = std::lgamma(a), lg_b = std::lgamma(b);
  double ll = 0.0;
  // p(x | z)
  for (std::size_t t = 0; t < T; ++t) {
    ll += std::lgamma(W * b) - std::lgamma(static_cast<double>(m.n_t[t]) + W * b);
    for (std::size_t w = 0; w < m.vocab_size; ++w) {
      const auto n = m.topic_term(t, w);
      if (n > 0) ll += std::lgamma(n + b) - lg_b;
    }
  }
  // p(z)
  const double Ta = static_cast<double>(T) * a;
  for (std::size_t d = 0; d < m.num_docs(); ++d) {
    const double nd = static_cast<double>(m.z[d].size());
    ll += std::lgamma(Ta) - std::lgamma(nd + Ta);
    for (const auto& e : m.n_dt[d]) ll += std::lgamma(e.count + a) - lg_a;
  }
  return ll;
}

/// One sequential-scan sweep over every token in corpus order.
inline void gibbs_sweep(LdaModel& m, const TokenCorpus& corpus, Rng& rng) {
  const std::size_t T = m.num_topics();
  const std::size_t W = m.vocab_size;
  const double alpha = m.hyper.alpha, beta = m.hyper.beta, wbeta = static_cast<double>(W) * beta;
  std::vector<std::int32_t> doc_counts(T);
  std::vector<double> weights(T);
  for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
    const auto& words = corpus.docs[d];
    if (words.empty()) continue;
    detail::expand_row(m.n_dt[d], doc_counts);
    for (std::size_t i = 0; i < words.size(); ++i) {
      const std::uint32_t w = words[i];
      const std::uint32_t old_t = m.z[d][i];
      --doc_counts[old_t];
      --m.n_tw[old_t * W + w];
      --m.n_t[old_t];
      if (doc_counts[old_t] < 0 || m.n_tw[old_t * W + w] < 0 || m.n_t[old_t] < 0)
        throw InvariantViolation("negative count after removing token " + std::to_string(i) + " of document " +
                                 std::to_string(d) + " from topic " + std::to_string(old_t));
      double total = 0.0;
      for (std::size_t t = 0; t < T; ++t) {
        const double p = (m.n_tw[t * W + w] + beta) / (static_cast<double>(m.n_t[t]) + wbeta) * (doc_counts[t] + alpha);
        weights[t] = p;
        total += p;
      }
      const auto new_t = static_cast<std::uint32_t>(T == 1 ? 0 : rng.categorical(weights, total));
      m.z[d][i] = new_t;
      ++doc_counts[new_t];
      ++m.n_tw[new_t * W + w];
      ++m.n_t[new_t];
    }
    m.n_dt[d] = detail::compact_row(doc_counts);
  }
  ++m.sweeps_done;
}

struct TopicDistributions {
  Matrix theta;  // docs x topics
  Matrix phi;    // topics x terms
};

/// Smoothed point estimates from the current state.
inline TopicDistributions estimate_distributions(const LdaModel& m) {
  const std::size_t T = m.num_topics(), W = m.vocab_size, D = m.num_docs();
  const double a = m.hyper.alpha, b = m.hyper.beta;
  TopicDistributions out{Matrix(D, T), Matrix(T, W)};
  for (std::size_t d = 0; d < D; ++d) {
    const double denom = static_cast<double>(m.z[d].size()) + static_cast<double>(T) * a;
    auto row = out.theta.row(d);
    std::fill(row.begin(), row.end(), a / denom);
    for (const auto& e : m.n_dt[d]) row[e.topic] = (e.count + a) / denom;
  }
  for (std::size_t t = 0; t < T; ++t) {
    const double denom = static_cast<double>(m.n_t[t]) + static_cast<double>(W) * b;
    for (std::size_t w = 0; w < W; ++w) out.phi(t, w) = (m.topic_term(t, w) + b) / denom;
  }
  return out;
}

struct FitResult {
  LdaModel model;
  TopicDistributions distributions;
};

/// Run `hyper.sweeps` sweeps from a seeded random start. theta/phi come from
/// the final state; the first `burn_in` sweeps are not used for estimation.
inline FitResult fit(const TokenCorpus& corpus, const Hyperparams& hyper) {
  Rng rng(hyper.seed);
  LdaModel m = init_assignments(corpus, hyper, rng);
  m.loglik_trace.reserve(hyper.sweeps);
  for (std::size_t s = 0; s < hyper.sweeps; ++s) {
    gibbs_sweep(m, corpus, rng);
    m.loglik_trace.push_back(log_likelihood(m));
  }
  auto dist = estimate_distributions(m);
  return {std::move(m), std::move(dist)};
}

// --------------------------------------------------------------- simulator

struct SyntheticCorpus {
  TokenCorpus corpus;
  Matrix theta;  // docs x topics
  Matrix phi;    // topics x terms
  bool has_empty_documents = false;
};

/// Draw a corpus from the LDA generative process.
inline SyntheticCorpus sample_corpus(std::size_t num_topics, std::size_t vocab_size, std::size_t num_docs,
                                     std::size_t doc_length, double alpha, double beta, std::uint64_t seed) {
  if (num_topics == 0 || vocab_size == 0 || num_docs == 0)
    throw ValidationError("sample_corpus needs positive topics, terms and documents");
  if (!(alpha > 0.0) || !(beta > 0.0)) throw ValidationError("sample_corpus needs positive alpha and beta");
  Rng rng(seed);
  SyntheticCorpus s{{vocab_size, {}}, Matrix(num_docs, num_topics), Matrix(num_topics, vocab_size), doc_length == 0};
  for (std::size_t t = 0; t < num_topics; ++t) {
    auto row = rng.dirichlet(vocab_size, beta);
    std::copy(row.begin(), row.end(), s.phi.row(t).begin());
  }
  s.corpus.docs.resize(num_docs);
  for (std::size_t d = 0; d < num_docs; ++d) {
    auto mix = rng.dirichlet(num_topics, alpha);
    std::copy(mix.begin(), mix.end(), s.theta.row(d).begin());
    auto& doc = s.corpus.docs[d];
    doc.reserve(doc_length);
    for (std::size_t i = 0; i < doc_length; ++i) {
      const std::size_t t = rng.categorical(s.theta.row(d), 1.0);
      doc.push_back(static_cast<std::uint32_t>(rng.categorical(s.phi.row(t), 1.0)));
    }
  }
  return s;
}

// ------------------------------------------------------------------ oracle

/// Exact posterior over every assignment vector of a tiny corpus. Tokens are
/// numbered in corpus order; assignment code = sum_i z_i * T^i.
struct ExactPosterior {
  std::size_t num_topics = 0;
  std::size_t num_tokens = 0;
  std::vector<double> probability;

  std::vector<std::uint32_t> decode(std::size_t code) const {
    std::vector<std::uint32_t> z(num_tokens);
    for (auto& t : z) {
      t = static_cast<std::uint32_t>(code % num_topics);
      code /= num_topics;
    }
    return z;
  }

  static std::size_t encode(const std::vector<std::vector<std::uint32_t>>& z, std::size_t num_topics) {
    std::size_t code = 0, place = 1;
    for (const auto& doc : z)
      for (auto t : doc) {
        code += t * place;
        place *= num_topics;
      }
    return code;
  }
};

inline constexpr std::size_t kMaxEnumeration = 1'000'000;

inline ExactPosterior exact_posterior(const TokenCorpus& corpus, const Hyperparams& hyper) {
  const std::size_t T = hyper.num_topics;
  const std::size_t N = corpus.total_tokens();
  corpus.validate();
  std::size_t states = 1;
  for (std::size_t i = 0; i < N; ++i) {
    if (states > kMaxEnumeration / T)
      throw ValidationError("exact posterior needs T^N <= " + std::to_string(kMaxEnumeration) + " assignments");
    states *= T;
  }
  ExactPosterior post{T, N, std::vector<double>(states)};
  // Direct evaluation of the collapsed joint: products of rising factorials
  // Gamma(n + c) / Gamma(c) accumulated count by count.
  const double a = hyper.alpha, b = hyper.beta, W = static_cast<double>(corpus.vocab_size);
  std::vector<double> logp(states);
  std::vector<std::uint32_t> z;
  for (std::size_t code = 0; code < states; ++code) {
    z = post.decode(code);
    std::vector<std::size_t> tw(T * corpus.vocab_size, 0), tt(T, 0);
    double lp = 0.0;
    std::size_t i = 0;
    for (const auto& doc : corpus.docs) {
      std::vector<std::size_t> dt(T, 0);
      for (std::size_t k = 0; k < doc.size(); ++k, ++i) {
        const std::size_t t = z[i], w = doc[k];
        lp += std::log((tw[t * corpus.vocab_size + w] + b) / (tt[t] + W * b));
        lp += std::log((dt[t] + a) / (k + T * a));
        ++tw[t * corpus.vocab_size + w];
        ++tt[t];
        ++dt[t];
      }
    }
    logp[code] = lp;
  }
  const double hi = *std::max_element(logp.begin(), logp.end());
  double total = 0.0;
  for (std::size_t c = 0; c < states; ++c) total += post.probability[c] = std::exp(logp[c] - hi);
  for (auto& p : post.probability) p /= total;
  return post;
}

// -------------------------------------------------------------- persistence

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::ordered_json hyper_to_json(const Hyperparams& h) {
  return {{"num_topics", h.num_topics}, {"scaling_factor", h.scaling_factor}, {"alpha", h.alpha},
          {"beta", h.beta},             {"sweeps", h.sweeps},                 {"burn_in", h.burn_in},
          {"seed", h.seed}};
}

inline Hyperparams hyper_from_json(const nlohmann::json& j) {
  Hyperparams h = Hyperparams::make(j.at("num_topics").get<std::size_t>(), j.at("scaling_factor").get<double>(),
                                    j.at("beta").get<double>(), j.at("sweeps").get<std::size_t>(),
                                    j.at("burn_in").get<std::size_t>(), j.at("seed").get<std::uint64_t>());
  if (j.contains("alpha") && j.at("alpha").get<double>() != h.alpha)
    throw DataError("stored alpha does not match scaling_factor * 50 / T");
  return h;
}

/// Versioned JSON with hyperparameters, vocabulary reference, term ids, z and counts.
inline std::string render_model_json(const LdaModel& m, const TokenCorpus& corpus, const std::string& vocabulary_ref,
                                     const nlohmann::json& meta = nullptr) {
  nlohmann::ordered_json j;
  j["format"] = "radlabel.lda-model";
  j["version"] = kModelFormatVersion;
  if (!meta.is_null()) j["meta"] = meta;
  j["hyper"] = hyper_to_json(m.hyper);
  j["vocabulary"] = vocabulary_ref;
  j["vocab_size"] = m.vocab_size;
  j["sweeps_done"] = m.sweeps_done;
  j["docs"] = corpus.docs;
  j["z"] = m.z;
  j["n_t"] = m.n_t;
  auto& dt = j["n_dt"] = nlohmann::ordered_json::array();
  for (const auto& row : m.n_dt) {
    auto r = nlohmann::ordered_json::array();
    for (const auto& e : row) r.push_back({e.topic, e.count});
    dt.push_back(std::move(r));
  }
  j["n_tw"] = m.n_tw;
  j["loglik_trace"] = m.loglik_trace;
  return j.dump() + "\n";
}

struct LoadedModel {
  LdaModel model;
  TokenCorpus corpus;
  std::string vocabulary_ref;
};

inline LoadedModel parse_model_json(std::string_view content, std::string_view source) {
  try {
    auto j = nlohmann::json::parse(content);
    if (j.value("format", "") != "radlabel.lda-model")
      throw DataError(std::string(source) + ": not a radlabel LDA model file");
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw DataError(std::string(source) + ": unsupported model version " + j.at("version").dump());
    LoadedModel out;
    out.model.hyper = hyper_from_json(j.at("hyper"));
    out.model.vocab_size = j.at("vocab_size").get<std::size_t>();
    out.model.sweeps_done = j.at("sweeps_done").get<std::size_t>();
    out.corpus.vocab_size = out.model.vocab_size;
    out.corpus.docs = j.at("docs").get<std::vector<std::vector<std::uint32_t>>>();
    out.model.z = j.at("z").get<std::vector<std::vector<std::uint32_t>>>();
    out.model.n_t = j.at("n_t").get<std::vector<std::int64_t>>();
    for (const auto& row : j.at("n_dt")) {
      std::vector<TopicCount> r;
      for (const auto& e : row) r.push_back({e.at(0).get<std::uint32_t>(), e.at(1).get<std::int32_t>()});
      out.model.n_dt.push_back(std::move(r));
    }
    out.model.n_tw = j.at("n_tw").get<std::vector<std::int32_t>>();
    out.model.loglik_trace = j.at("loglik_trace").get<std::vector<double>>();
    out.vocabulary_ref = j.at("vocabulary").get<std::string>();
    out.corpus.validate();
    if (!counts_consistent(out.model, out.corpus))
      throw DataError(std::string(source) + ": stored counts do not match the assignments");
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string(source) + ": " + e.what());
  } catch (const ValidationError& e) {
    throw DataError(std::string(source) + ": " + e.what());
  }
}

inline LoadedModel read_model_json(const std::string& path) { return parse_model_json(text::read_file(path), path); }

/// theta as TSV: doc_id then one column per topic.
inline std::string render_theta_tsv(const Matrix& theta, const std::vector<std::string>& doc_ids,
                                    const std::string& header_comment = {}) {
  std::string out = header_comment.empty() ? "" : "# " + header_comment + "\n";
  out += "doc_id";
  for (std::size_t t = 0; t < theta.cols(); ++t) out += "\ttopic_" + std::to_string(t);
  out += "\n";
  for (std::size_t d = 0; d < theta.rows(); ++d) {
    out += doc_ids.at(d);
    for (double v : theta.row(d)) out += "\t" + text::format_shortest(v);
    out += "\n";
  }
  return out;
}

struct ThetaTable {
  std::vector<std::string> doc_ids;
  Matrix theta;
};

inline ThetaTable parse_theta_tsv(std::string_view content, std::string_view source) {
  auto table = text::parse_tsv(content, source);
  if (table.header.size() < 3 || table.header[0] != "doc_id")
    throw DataError(std::string(source) + ": expected header doc_id, topic_0, topic_1, ...");
  ThetaTable out{{}, Matrix(table.rows.size(), table.header.size() - 1)};
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    out.doc_ids.push_back(row.fields[0]);
    for (std::size_t t = 1; t < row.fields.size(); ++t)
      out.theta(r, t - 1) = text::parse_double(row.fields[t], text::where(source, row.line) + "theta");
  }
  return out;
}

inline ThetaTable read_theta_tsv(const std::string& path) { return parse_theta_tsv(text::read_file(path), path); }

/// phi as TSV: topic then one column per vocabulary term.
inline std::string render_phi_tsv(const Matrix& phi, const std::vector<std::string>& terms,
                                  const std::string& header_comment = {}) {
  std::string out = header_comment.empty() ? "" : "# " + header_comment + "\n";
  out += "topic";
  for (const auto& t : terms) out += "\t" + t;
  out += "\n";
  for (std::size_t t = 0; t < phi.rows(); ++t) {
    out += std::to_string(t);
    for (double v : phi.row(t)) out += "\t" + text::format_shortest(v);
    out += "\n";
  }
  return out;
}

inline Matrix parse_phi_tsv(std::string_view content, std::string_view source) {
  auto table = text::parse_tsv(content, source);
  if (table.header.size() < 2 || table.header[0] != "topic")
    throw DataError(std::string(source) + ": expected header topic, <terms>...");
  Matrix phi(table.rows.size(), table.header.size() - 1);
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    for (std::size_t w = 1; w < table.header.size(); ++w)
      phi(r, w - 1) = text::parse_double(table.rows[r].fields[w], "phi");
  return phi;
}

}  // namespace radlabel::lda
