#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "pocketdex/errors.hpp"
#include "pocketdex/structure.hpp"
#include "pocketdex/tensor.hpp"

namespace pocketdex {

enum class SimilarityMetric : uint8_t { dot = 0, cosine = 1 };

inline const char* metric_name(SimilarityMetric m) {
  return m == SimilarityMetric::dot ? "dot" : "cosine";
}

inline SimilarityMetric parse_metric(const std::string& s) {
  if (s == "dot") return SimilarityMetric::dot;
  if (s == "cosine") return SimilarityMetric::cosine;
  throw InvalidArgument("unknown similarity metric '" + s + "' (expected dot or cosine)");
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double similarity(const std::vector<double>& a, const std::vector<double>& b,
                         SimilarityMetric m) {
  if (a.size() != b.size())
    throw InvalidArgument("similarity: dimension mismatch " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  if (a.empty()) throw InvalidArgument("similarity: empty vectors");
  double d = dot(a, b);
  if (m == SimilarityMetric::dot) return d;
  double na = std::sqrt(dot(a, a));
  double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0)
    throw InvalidArgument("similarity: cosine undefined for zero vector");
  return d / (na * nb);
}

inline Tensor similarity_matrix(const std::vector<std::vector<double>>& pockets,
                                const std::vector<std::vector<double>>& mols,
                                SimilarityMetric m) {
  if (pockets.size() != mols.size())
    throw InvalidArgument("similarity_matrix: count mismatch");
  const size_t n = pockets.size();
  Tensor s({n, n});
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) s.at(i, j) = similarity(pockets[i], mols[j], m);
  return s;
}

// -log softmax along row k of S/tau, averaged with the 1/N prefactor.
inline double pocket_to_mol_loss(const Tensor& s, size_t k, double tau) {
  const size_t n = s.rows();
  if (n == 0 || s.cols() != n) throw InvalidArgument("pocket_to_mol_loss: square matrix expected");
  if (k >= n) throw InvalidArgument("pocket_to_mol_loss: row index out of range");
  if (tau <= 0.0) throw InvalidArgument("pocket_to_mol_loss: temperature must be positive");
  double mx = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < n; ++i) mx = std::max(mx, s.at(k, i) / tau);
  double denom = 0.0;
  for (size_t i = 0; i < n; ++i) denom += std::exp(s.at(k, i) / tau - mx);
  double log_p = s.at(k, k) / tau - mx - std::log(denom);
  return -log_p / static_cast<double>(n);
}

inline double mol_to_pocket_loss(const Tensor& s, size_t k, double tau) {
  const size_t n = s.rows();
  if (n == 0 || s.cols() != n) throw InvalidArgument("mol_to_pocket_loss: square matrix expected");
  if (k >= n) throw InvalidArgument("mol_to_pocket_loss: column index out of range");
  if (tau <= 0.0) throw InvalidArgument("mol_to_pocket_loss: temperature must be positive");
  double mx = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < n; ++i) mx = std::max(mx, s.at(i, k) / tau);
  double denom = 0.0;
  for (size_t i = 0; i < n; ++i) denom += std::exp(s.at(i, k) / tau - mx);
  double log_p = s.at(k, k) / tau - mx - std::log(denom);
  return -log_p / static_cast<double>(n);
}

// Batch loss: (1/2) * sum_k of the two per-sample terms.
inline double dual_infonce_loss(const Tensor& s, double tau) {
  const size_t n = s.rows();
  double total = 0.0;
  for (size_t k = 0; k < n; ++k)
    total += pocket_to_mol_loss(s, k, tau) + mol_to_pocket_loss(s, k, tau);
  return 0.5 * total;
}

struct ContrastiveConfig {
  double temperature = 0.07;
  SimilarityMetric metric = SimilarityMetric::cosine;
  int top_k = 2;  // K of the atom-alignment auxiliary
  enum class TopkLayer { last, second_last } topk_layer = TopkLayer::second_last;

  void validate() const {
    if (temperature <= 0.0) throw InvalidArgument("contrastive config: temperature must be > 0");
    if (top_k <= 0) throw InvalidArgument("contrastive config: K must be positive");
  }
};

// ---- fine-grained atom alignment ----

namespace detail {

inline double row_cosine(const Tensor& a, size_t i, const Tensor& b, size_t j) {
  double d = 0.0, na = 0.0, nb = 0.0;
  for (size_t c = 0; c < a.cols(); ++c) {
    d += a.at(i, c) * b.at(j, c);
    na += a.at(i, c) * a.at(i, c);
    nb += b.at(j, c) * b.at(j, c);
  }
  if (na == 0.0 || nb == 0.0) throw InvalidArgument("topk loss: zero atom representation");
  return d / (std::sqrt(na) * std::sqrt(nb));
}

// Top-k row indices of `own` scored by max cosine against any row of `other`,
// ties resolved by lower index.
inline std::vector<size_t> topk_by_max_cosine(const Tensor& own, const Tensor& other, int k) {
  std::vector<std::pair<double, size_t>> scored;
  scored.reserve(own.rows());
  for (size_t v = 0; v < own.rows(); ++v) {
    double best = -std::numeric_limits<double>::infinity();
    for (size_t u = 0; u < other.rows(); ++u) best = std::max(best, row_cosine(own, v, other, u));
    scored.emplace_back(best, v);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<size_t> out;
  out.reserve(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) out.push_back(scored[static_cast<size_t>(i)].second);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

struct TopkSelection {
  std::vector<size_t> mol_atoms;
  std::vector<size_t> pocket_atoms;
};

inline TopkSelection topk_select(const Tensor& mol_atoms, const Tensor& pocket_atoms, int k) {
  if (k <= 0) throw InvalidArgument("topk loss: K must be positive");
  if (static_cast<size_t>(k) > std::min(mol_atoms.rows(), pocket_atoms.rows()))
    throw InvalidArgument("topk loss: K exceeds available atoms");
  if (mol_atoms.cols() != pocket_atoms.cols())
    throw InvalidArgument("topk loss: representation dims differ");
  TopkSelection sel;
  sel.pocket_atoms = detail::topk_by_max_cosine(pocket_atoms, mol_atoms, k);
  sel.mol_atoms = detail::topk_by_max_cosine(mol_atoms, pocket_atoms, k);
  return sel;
}

// Sum of cosine similarities over the selected K x K atom pairs. The trainer
// maximizes this for positive pairs.
inline double topk_topk_loss(const Tensor& mol_atoms, const Tensor& pocket_atoms, int k) {
  TopkSelection sel = topk_select(mol_atoms, pocket_atoms, k);
  double total = 0.0;
  for (size_t v : sel.mol_atoms)
    for (size_t u : sel.pocket_atoms) total += detail::row_cosine(mol_atoms, v, pocket_atoms, u);
  return total;
}

// ---- input corruption for the denoising objectives ----

struct CorruptionConfig {
  double fraction = 0.15;      // share of atoms whose coordinates get noise
  double noise_range = 1.0;    // uniform component noise in [-range, +range], Angstrom
  double mask_fraction = 0.15; // share of atom types replaced by [MASK]

  void validate() const {
    if (fraction <= 0.0 || fraction > 1.0)
      throw InvalidArgument("corruption config: fraction must be in (0, 1]");
    if (mask_fraction <= 0.0 || mask_fraction > 1.0)
      throw InvalidArgument("corruption config: mask_fraction must be in (0, 1]");
    if (noise_range < 0.0) throw InvalidArgument("corruption config: noise_range must be >= 0");
  }
};

// round(fraction * L) half-up, never below 1.
inline size_t corruption_count(double fraction, size_t real_atoms) {
  size_t n = static_cast<size_t>(std::floor(fraction * static_cast<double>(real_atoms) + 0.5));
  return std::max<size_t>(1, n);
}

namespace detail {

// First `count` entries of a seeded Fisher-Yates shuffle of [1, L], i.e. a
// uniform sample of real-atom positions without replacement.
inline std::vector<size_t> sample_real_positions(size_t real_atoms, size_t count,
                                                 std::mt19937_64& rng) {
  std::vector<size_t> pool(real_atoms);
  for (size_t i = 0; i < real_atoms; ++i) pool[i] = i + 1;
  for (size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

inline Tensor entity_distance_matrix(const TokenizedEntity& e) {
  const size_t t = e.length();
  Tensor d({t, t});
  for (size_t i = 0; i < t; ++i)
    for (size_t j = 0; j < t; ++j) d.at(i, j) = distance(e.coords[i], e.coords[j]);
  return d;
}

inline void refresh_cls_coord(TokenizedEntity& e) {
  Vec3 c;
  size_t n = 0;
  for (size_t i = 1; i < e.length(); ++i) {
    if (!e.mask[i]) continue;
    c += e.coords[i];
    ++n;
  }
  if (n > 0) e.coords[TokenizedEntity::cls_index] = {c.x / n, c.y / n, c.z / n};
}

}  // namespace detail

struct CorruptedEntity {
  TokenizedEntity entity;
  std::vector<size_t> corrupted;  // entity positions whose coordinates moved
  Tensor true_distances;          // (L+1)x(L+1) distances of the clean entity
};

inline CorruptedEntity corrupt_coords(const TokenizedEntity& e, const CorruptionConfig& cfg,
                                      uint64_t seed) {
  cfg.validate();
  const size_t real = e.real_atoms();
  if (real == 0) throw InvalidArgument("corrupt_coords: entity has no real atoms");
  CorruptedEntity out;
  out.true_distances = detail::entity_distance_matrix(e);
  out.entity = e;
  std::mt19937_64 rng(seed);
  out.corrupted = detail::sample_real_positions(real, corruption_count(cfg.fraction, real), rng);
  std::uniform_real_distribution<double> noise(-cfg.noise_range, cfg.noise_range);
  for (size_t pos : out.corrupted) {
    out.entity.coords[pos].x += noise(rng);
    out.entity.coords[pos].y += noise(rng);
    out.entity.coords[pos].z += noise(rng);
  }
  detail::refresh_cls_coord(out.entity);
  return out;
}

struct MaskedEntity {
  TokenizedEntity entity;
  std::vector<size_t> positions;
  std::vector<int> true_type_ids;
};

inline MaskedEntity mask_types(const TokenizedEntity& e, const CorruptionConfig& cfg,
                               uint64_t seed) {
  cfg.validate();
  const size_t real = e.real_atoms();
  if (real == 0) throw InvalidArgument("mask_types: entity has no real atoms");
  MaskedEntity out;
  out.entity = e;
  std::mt19937_64 rng(seed);
  out.positions = detail::sample_real_positions(real, corruption_count(cfg.mask_fraction, real), rng);
  for (size_t pos : out.positions) {
    out.true_type_ids.push_back(e.type_ids[pos]);
    out.entity.type_ids[pos] = Vocab::kMask;
  }
  return out;
}

// Toy cross-structure scorer whose value depends on pocket-molecule relative
// distances: sum over atom pairs of exp(-d^2 / (2 sigma^2)), sigma = 3 A.
// A rigid move of one side alone changes it; the dual-tower similarity of
// encodings does not.
inline double single_tower_reference_score(const Structure& pocket, const Structure& mol) {
  if (pocket.empty() || mol.empty())
    throw InvalidArgument("single_tower_reference_score: empty structure");
  constexpr double sigma = 3.0;
  double score = 0.0;
  for (const auto& pa : pocket.atoms)
    for (const auto& ma : mol.atoms) {
      Vec3 d = pa.coord - ma.coord;
      score += std::exp(-d.dot(d) / (2.0 * sigma * sigma));
    }
  return score;
}

}  // namespace pocketdex
