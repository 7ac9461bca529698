#pragma once

// Reference computations shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "radlabel/lda.hpp"

namespace oracles {

using radlabel::lda::TokenCorpus;

/// Every tiny corpus with `num_tokens` tokens, up to relabeling of terms:
/// each composition of the tokens into documents combined with each
/// restricted-growth term assignment (term ids appear in first-use order).
inline std::vector<TokenCorpus> tiny_corpora(std::size_t num_tokens) {
  std::vector<std::vector<std::size_t>> compositions;
  for (unsigned mask = 0; mask < (1u << (num_tokens - 1)); ++mask) {
    std::vector<std::size_t> sizes{1};
    for (std::size_t i = 0; i + 1 < num_tokens; ++i) {
      if (mask & (1u << i))
        sizes.push_back(1);
      else
        ++sizes.back();
    }
    compositions.push_back(sizes);
  }
  std::vector<std::vector<std::uint32_t>> words;
  std::vector<std::uint32_t> w(num_tokens, 0);
  auto grow = [&](auto&& self, std::size_t i, std::uint32_t next) -> void {
    if (i == num_tokens) {
      words.push_back(w);
      return;
    }
    for (std::uint32_t v = 0; v <= next; ++v) {
      w[i] = v;
      self(self, i + 1, std::max(next, v + 1));
    }
  };
  grow(grow, 0, 0);
  std::vector<TokenCorpus> out;
  for (const auto& sizes : compositions)
    for (const auto& ws : words) {
      TokenCorpus c;
      c.vocab_size = *std::max_element(ws.begin(), ws.end()) + 1;
      std::size_t k = 0;
      for (auto s : sizes) {
        c.docs.emplace_back(ws.begin() + static_cast<std::ptrdiff_t>(k),
                            ws.begin() + static_cast<std::ptrdiff_t>(k + s));
        k += s;
      }
      out.push_back(std::move(c));
    }
  return out;
}

/// L1 distance between two probability rows.
inline double l1(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

/// Mean L1 after greedily pairing estimated and true topics, closest pair first.
inline double greedy_matched_l1(const radlabel::Matrix& estimated, const radlabel::Matrix& truth) {
  const std::size_t T = truth.rows();
  std::vector<bool> used_e(T, false), used_t(T, false);
  double total = 0.0;
  for (std::size_t round = 0; round < T; ++round) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t be = 0, bt = 0;
    for (std::size_t e = 0; e < T; ++e)
      for (std::size_t t = 0; t < T; ++t) {
        if (used_e[e] || used_t[t]) continue;
        const double d = l1(estimated.row(e), truth.row(t));
        if (d < best) {
          best = d;
          be = e;
          bt = t;
        }
      }
    used_e[be] = used_t[bt] = true;
    total += best;
  }
  return total / static_cast<double>(T);
}

}  // namespace oracles
