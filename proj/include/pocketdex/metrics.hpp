#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>
#include <vector>

#include "pocketdex/errors.hpp"

namespace pocketdex {

struct LabeledScore {
  std::string id;
  double score = 0.0;
  bool active = false;
};

struct LabeledScores {
  std::vector<LabeledScore> entries;

  size_t actives() const {
    size_t n = 0;
    for (const auto& e : entries) n += e.active ? 1 : 0;
    return n;
  }
  size_t decoys() const { return entries.size() - actives(); }

  void validate() const {
    std::unordered_set<std::string> seen;
    for (const auto& e : entries) {
      if (!std::isfinite(e.score)) throw InvalidArgument("metrics: non-finite score for " + e.id);
      if (!seen.insert(e.id).second) throw InvalidArgument("metrics: duplicate id " + e.id);
    }
    if (actives() == 0) throw InvalidArgument("metrics: no actives");
    if (decoys() == 0) throw InvalidArgument("metrics: no decoys");
  }

  // Descending score; ties broken by ascending id so the ranking is a total
  // order and every metric is bitwise reproducible.
  std::vector<LabeledScore> sorted() const {
    std::vector<LabeledScore> s = entries;
    std::sort(s.begin(), s.end(), [](const LabeledScore& a, const LabeledScore& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.id < b.id;
    });
    return s;
  }
};

// Rank-based AUROC (Mann-Whitney) with midrank tie handling.
inline double auroc(const LabeledScores& d) {
  d.validate();
  std::vector<const LabeledScore*> s;
  s.reserve(d.entries.size());
  for (const auto& e : d.entries) s.push_back(&e);
  std::sort(s.begin(), s.end(),
            [](const LabeledScore* a, const LabeledScore* b) { return a->score < b->score; });
  const size_t n = s.size();
  double rank_sum_active = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && s[j]->score == s[i]->score) ++j;
    double midrank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
    for (size_t k = i; k < j; ++k)
      if (s[k]->active) rank_sum_active += midrank;
    i = j;
  }
  const double p = static_cast<double>(d.actives());
  const double neg = static_cast<double>(d.decoys());
  return (rank_sum_active - p * (p + 1.0) / 2.0) / (p * neg);
}

// Early-recognition score with exponential rank weights e^{-alpha r / N}.
// The normalizing ratio is the active fraction.
inline double bedroc(const LabeledScores& d, double alpha = 85.0) {
  d.validate();
  if (alpha <= 0.0) throw InvalidArgument("bedroc: alpha must be positive");
  auto s = d.sorted();
  const double n = static_cast<double>(s.size());
  const double n_act = static_cast<double>(d.actives());
  double sum = 0.0;
  for (size_t r = 0; r < s.size(); ++r)
    if (s[r].active) sum += std::exp(-alpha * static_cast<double>(r + 1) / n);
  const double ra = n_act / n;
  const double random_sum = ra * (1.0 - std::exp(-alpha)) / (std::exp(alpha / n) - 1.0);
  const double factor =
      ra * std::sinh(alpha / 2.0) / (std::cosh(alpha / 2.0) - std::cosh(alpha / 2.0 - alpha * ra));
  const double cte = 1.0 / (1.0 - std::exp(alpha * (1.0 - ra)));
  double value = sum / random_sum * factor + cte;
  // Clip only clear floating noise; anything further out is reported raw.
  if (value < 0.0 && value > -1e-9) return 0.0;
  if (value > 1.0 && value < 1.0 + 1e-9) return 1.0;
  return value;
}

namespace detail {

// ceil with protection against ties landing just above an integer through
// floating-point noise.
inline size_t fuzzy_ceil(double x) {
  return static_cast<size_t>(std::ceil(x - 1e-9));
}

}  // namespace detail

// Active density in the top `fraction` of the ranking relative to the
// overall active density.
inline double enrichment_factor(const LabeledScores& d, double fraction) {
  d.validate();
  if (fraction <= 0.0 || fraction > 1.0)
    throw InvalidArgument("enrichment_factor: fraction must be in (0, 1]");
  auto s = d.sorted();
  const size_t cutoff = std::max<size_t>(1, detail::fuzzy_ceil(fraction * static_cast<double>(s.size())));
  size_t found = 0;
  for (size_t i = 0; i < cutoff && i < s.size(); ++i) found += s[i].active ? 1 : 0;
  return static_cast<double>(found) / (static_cast<double>(d.actives()) * fraction);
}

// True-positive rate over false-positive rate at the operating point where
// the false-positive count first reaches ceil(fpr * decoys).
inline double roc_enrichment(const LabeledScores& d, double fpr) {
  d.validate();
  if (fpr <= 0.0 || fpr >= 1.0) throw InvalidArgument("roc_enrichment: fpr must be in (0, 1)");
  const size_t target_fp = detail::fuzzy_ceil(fpr * static_cast<double>(d.decoys()));
  if (target_fp == 0) throw InvalidArgument("roc_enrichment: fpr too small for this set");
  auto s = d.sorted();
  size_t tp = 0, fp = 0;
  for (const auto& e : s) {
    if (e.active)
      ++tp;
    else if (++fp == target_fp)
      break;
  }
  const double n = static_cast<double>(s.size());
  const double p = static_cast<double>(d.actives());
  return (static_cast<double>(tp) * n) / (p * static_cast<double>(fp));
}

// Fraction of queries whose true item has rank <= k (ranks are 1-based).
inline double accuracy_at_k(const std::vector<size_t>& rank_of_truth, size_t k) {
  if (rank_of_truth.empty()) throw InvalidArgument("accuracy_at_k: empty rank list");
  if (k == 0) throw InvalidArgument("accuracy_at_k: k must be positive");
  size_t hits = 0;
  for (size_t r : rank_of_truth) {
    if (r == 0) throw InvalidArgument("accuracy_at_k: ranks are 1-based");
    hits += r <= k ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(rank_of_truth.size());
}

}  // namespace pocketdex
