#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pocketdex/objective.hpp"

using namespace pocketdex;

namespace {

Tensor random_matrix(size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Tensor t({n, n});
  for (auto& v : t.data) v = u(rng);
  return t;
}

std::vector<double> random_vec(size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("similarity basics") {
  CHECK(similarity({1, 2}, {3, 4}, SimilarityMetric::dot) == doctest::Approx(11.0));
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 5; ++rep) {
    auto v = random_vec(6, rng);
    CHECK(similarity(v, v, SimilarityMetric::cosine) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(similarity({1, 0}, {0, 1}, SimilarityMetric::cosine) == doctest::Approx(0.0));
  CHECK_THROWS_AS(similarity({1, 2}, {1, 2, 3}, SimilarityMetric::dot), InvalidArgument);
  CHECK_THROWS_AS(similarity({0, 0}, {1, 2}, SimilarityMetric::cosine), InvalidArgument);
}

TEST_CASE("similarity_matrix") {
  std::vector<std::vector<double>> p = {{1, 0}}, m = {{0.5, 0.5}};
  Tensor s1 = similarity_matrix(p, m, SimilarityMetric::dot);
  CHECK(s1.rows() == 1);
  CHECK(s1.at(0, 0) == doctest::Approx(0.5));

  std::vector<std::vector<double>> basis = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  Tensor eye = similarity_matrix(basis, basis, SimilarityMetric::cosine);
  for (size_t i = 0; i < 3; ++i)
    for (size_t j = 0; j < 3; ++j) CHECK(eye.at(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));

  std::mt19937_64 rng(2);
  std::vector<std::vector<double>> rp, rm;
  for (int i = 0; i < 4; ++i) {
    rp.push_back(random_vec(5, rng));
    rm.push_back(random_vec(5, rng));
  }
  Tensor s = similarity_matrix(rp, rm, SimilarityMetric::dot);
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j) {
      double want = 0.0;
      for (size_t k = 0; k < 5; ++k) want += rp[i][k] * rm[j][k];
      CHECK(std::abs(s.at(i, j) - want) <= 1e-12);
    }

  rm.pop_back();
  CHECK_THROWS_AS(similarity_matrix(rp, rm, SimilarityMetric::dot), InvalidArgument);
}

TEST_CASE("pocket_to_mol_loss analytic values") {
  Tensor one({1, 1}, {3.7});
  CHECK(pocket_to_mol_loss(one, 0, 1.0) == 0.0);  // single-class softmax, exactly

  Tensor uniform({2, 2}, {0.4, 0.4, 0.4, 0.4});
  CHECK(pocket_to_mol_loss(uniform, 0, 1.0) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-12));
  CHECK(pocket_to_mol_loss(uniform, 1, 1.0) == doctest::Approx(0.346574).epsilon(1e-5));

  Tensor saturated({2, 2}, {10.0, -10.0, -10.0, 10.0});
  CHECK(pocket_to_mol_loss(saturated, 0, 1.0) < 1e-8);
}

TEST_CASE("mol_to_pocket_loss mirrors pocket_to_mol_loss") {
  std::mt19937_64 rng(3);
  Tensor sym({2, 2}, {0.3, -0.1, -0.1, 0.9});
  for (size_t k = 0; k < 2; ++k)
    CHECK(mol_to_pocket_loss(sym, k, 0.5) == doctest::Approx(pocket_to_mol_loss(sym, k, 0.5)));

  Tensor uniform({2, 2}, {1.0, 1.0, 1.0, 1.0});
  CHECK(mol_to_pocket_loss(uniform, 0, 1.0) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-12));

  for (int rep = 0; rep < 10; ++rep) {
    Tensor s = random_matrix(4, rng, 2.0);
    Tensor st({4, 4});
    for (size_t i = 0; i < 4; ++i)
      for (size_t j = 0; j < 4; ++j) st.at(i, j) = s.at(j, i);
    for (size_t k = 0; k < 4; ++k)
      CHECK(mol_to_pocket_loss(s, k, 0.7) ==
            doctest::Approx(pocket_to_mol_loss(st, k, 0.7)).epsilon(1e-12));
  }
}

TEST_CASE("dual_infonce_loss analytic and term-by-term") {
  Tensor uniform2({2, 2}, {0.0, 0.0, 0.0, 0.0});
  CHECK(dual_infonce_loss(uniform2, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  Tensor one({1, 1}, {-2.0});
  CHECK(dual_infonce_loss(one, 0.07) == 0.0);

  std::mt19937_64 rng(4);
  Tensor s = random_matrix(5, rng, 1.5);
  double sum = 0.0;
  for (size_t k = 0; k < 5; ++k) sum += pocket_to_mol_loss(s, k, 0.3) + mol_to_pocket_loss(s, k, 0.3);
  CHECK(dual_infonce_loss(s, 0.3) == doctest::Approx(0.5 * sum).epsilon(1e-12));
}

TEST_CASE("dual_infonce_loss is non-negative and vanishes when saturated") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    Tensor s = random_matrix(4, rng, 3.0);
    CHECK(dual_infonce_loss(s, 0.5) >= 0.0);
  }
  Tensor sat({3, 3});
  for (size_t i = 0; i < 3; ++i)
    for (size_t j = 0; j < 3; ++j) sat.at(i, j) = i == j ? 50.0 : -50.0;
  CHECK(dual_infonce_loss(sat, 1.0) <= 1e-12);
}

TEST_CASE("per-term softmax shift invariance") {
  std::mt19937_64 rng(6);
  Tensor s = random_matrix(4, rng);
  const double c = 2.375;
  for (size_t k = 0; k < 4; ++k) {
    Tensor shifted_row = s;
    for (size_t j = 0; j < 4; ++j) shifted_row.at(k, j) += c;
    CHECK(pocket_to_mol_loss(shifted_row, k, 0.9) ==
          doctest::Approx(pocket_to_mol_loss(s, k, 0.9)).epsilon(1e-12));

    Tensor shifted_col = s;
    for (size_t i = 0; i < 4; ++i) shifted_col.at(i, k) += c;
    CHECK(mol_to_pocket_loss(shifted_col, k, 0.9) ==
          doctest::Approx(mol_to_pocket_loss(s, k, 0.9)).epsilon(1e-12));
  }
}

TEST_CASE("transpose duality of the two loss families") {
  std::mt19937_64 rng(7);
  Tensor s = random_matrix(5, rng, 2.0);
  Tensor st({5, 5});
  for (size_t i = 0; i < 5; ++i)
    for (size_t j = 0; j < 5; ++j) st.at(i, j) = s.at(j, i);
  double lhs = 0.0, rhs = 0.0;
  for (size_t k = 0; k < 5; ++k) {
    lhs += mol_to_pocket_loss(s, k, 0.4);
    rhs += pocket_to_mol_loss(st, k, 0.4);
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("cosine losses ignore positive rescaling of embeddings") {
  std::mt19937_64 rng(8);
  std::vector<std::vector<double>> p, m;
  for (int i = 0; i < 4; ++i) {
    p.push_back(random_vec(6, rng));
    m.push_back(random_vec(6, rng));
  }
  Tensor s1 = similarity_matrix(p, m, SimilarityMetric::cosine);
  for (auto& x : p[2]) x *= 17.0;
  for (auto& x : m[0]) x *= 0.003;
  Tensor s2 = similarity_matrix(p, m, SimilarityMetric::cosine);
  for (size_t i = 0; i < s1.size(); ++i) CHECK(s1.data[i] == doctest::Approx(s2.data[i]).epsilon(1e-12));
  CHECK(dual_infonce_loss(s1, 0.07) == doctest::Approx(dual_infonce_loss(s2, 0.07)).epsilon(1e-12));
}

TEST_CASE("topk_topk_loss small cases") {
  Tensor m({1, 3}, {1.0, 0.0, 0.0});
  Tensor p({1, 3}, {0.5, 0.5, 0.0});
  CHECK(topk_topk_loss(m, p, 1) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));  // cosine itself

  Tensor m2({3, 2});
  Tensor p2({4, 2});
  for (size_t i = 0; i < 3; ++i) m2.at(i, 0) = 1.0;
  for (size_t i = 0; i < 4; ++i) p2.at(i, 0) = 1.0;
  CHECK(topk_topk_loss(m2, p2, 2) == doctest::Approx(4.0).epsilon(1e-12));

  CHECK_THROWS_AS(topk_topk_loss(m2, p2, 4), InvalidArgument);
}

TEST_CASE("topk_topk_loss matches brute-force enumeration") {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 10; ++rep) {
    Tensor m({5, 4}), p({5, 4});
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& v : m.data) v = u(rng);
    for (auto& v : p.data) v = u(rng);
    const int k = 2;

    // independent scoring by full sort
    auto scores_against = [&](const Tensor& own, const Tensor& other) {
      std::vector<double> out(own.rows());
      for (size_t v = 0; v < own.rows(); ++v) {
        double best = -2.0;
        for (size_t u2 = 0; u2 < other.rows(); ++u2) {
          double dotv = 0, na = 0, nb = 0;
          for (size_t c = 0; c < 4; ++c) {
            dotv += own.at(v, c) * other.at(u2, c);
            na += own.at(v, c) * own.at(v, c);
            nb += other.at(u2, c) * other.at(u2, c);
          }
          best = std::max(best, dotv / std::sqrt(na * nb));
        }
        out[v] = best;
      }
      return out;
    };
    auto top2 = [](const std::vector<double>& sc) {
      std::vector<size_t> idx(sc.size());
      for (size_t i = 0; i < sc.size(); ++i) idx[i] = i;
      std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
        if (sc[a] != sc[b]) return sc[a] > sc[b];
        return a < b;
      });
      idx.resize(2);
      return idx;
    };
    auto tm = top2(scores_against(m, p));
    auto tp = top2(scores_against(p, m));
    double want = 0.0;
    for (size_t v : tm)
      for (size_t u2 : tp) {
        double dotv = 0, na = 0, nb = 0;
        for (size_t c = 0; c < 4; ++c) {
          dotv += m.at(v, c) * p.at(u2, c);
          na += m.at(v, c) * m.at(v, c);
          nb += p.at(u2, c) * p.at(u2, c);
        }
        want += dotv / std::sqrt(na * nb);
      }
    CHECK(topk_topk_loss(m, p, k) == doctest::Approx(want).epsilon(1e-12));

    // the chosen pocket set maximizes the max-cosine score sum over all pairs
    auto sc_p = scores_against(p, m);
    TopkSelection sel = topk_select(m, p, k);
    double chosen = 0.0;
    for (size_t u2 : sel.pocket_atoms) chosen += sc_p[u2];
    for (size_t a = 0; a < 5; ++a)
      for (size_t b = a + 1; b < 5; ++b) CHECK(chosen >= sc_p[a] + sc_p[b] - 1e-12);
  }
}

TEST_CASE("corrupt_coords selection count and bounds") {
  Structure s;
  for (int i = 0; i < 20; ++i)
    s.atoms.push_back({"C", {static_cast<double>(i), 0, 0}, {}, {}});
  TokenizedEntity e = tokenize(s);
  CorruptionConfig cfg;

  CorruptedEntity c = corrupt_coords(e, cfg, 123);
  CHECK(c.corrupted.size() == 3);  // round-half-up of 0.15 * 20
  for (size_t pos : c.corrupted) {
    CHECK(pos >= 1);
    CHECK(std::abs(c.entity.coords[pos].x - e.coords[pos].x) <= cfg.noise_range);
    CHECK(std::abs(c.entity.coords[pos].y - e.coords[pos].y) <= cfg.noise_range);
    CHECK(std::abs(c.entity.coords[pos].z - e.coords[pos].z) <= cfg.noise_range);
  }

  CorruptionConfig zero = cfg;
  zero.noise_range = 0.0;
  CorruptedEntity z = corrupt_coords(e, zero, 7);
  for (size_t i = 0; i < e.length(); ++i) {
    CHECK(z.entity.coords[i].x == e.coords[i].x);
    CHECK(z.entity.coords[i].y == e.coords[i].y);
  }

  CorruptedEntity c2 = corrupt_coords(e, cfg, 123);
  CHECK(c2.corrupted == c.corrupted);  // deterministic by seed
  for (size_t i = 0; i < e.length(); ++i) CHECK(c2.entity.coords[i].x == c.entity.coords[i].x);

  CHECK(corruption_count(0.15, 1) == 1);   // floor of one atom
  CHECK(corruption_count(0.15, 10) == 2);  // 1.5 rounds half-up
}

TEST_CASE("mask_types contract") {
  Structure s;
  for (int i = 0; i < 10; ++i)
    s.atoms.push_back({i % 2 ? "C" : "N", {static_cast<double>(i), 0.5, 0}, {}, {}});
  TokenizedEntity e = tokenize(s);
  CorruptionConfig cfg;

  for (uint64_t seed = 0; seed < 50; ++seed) {
    MaskedEntity m = mask_types(e, cfg, seed);
    CHECK(m.positions.size() == 2);  // round-half-up of 0.15 * 10
    for (size_t pos : m.positions) {
      CHECK(pos != TokenizedEntity::cls_index);
      CHECK(m.entity.type_ids[pos] == Vocab::kMask);
    }
    // restoring the recorded ids reconstructs the original
    TokenizedEntity restored = m.entity;
    for (size_t i = 0; i < m.positions.size(); ++i)
      restored.type_ids[m.positions[i]] = m.true_type_ids[i];
    CHECK(restored.type_ids == e.type_ids);
  }
}

TEST_CASE("single_tower_reference_score distance sensitivity") {
  Structure pocket, mol;
  pocket.atoms.push_back({"C", {0, 0, 0}, {}, {}});
  mol.atoms.push_back({"N", {0, 0, 0}, {}, {}});
  CHECK(single_tower_reference_score(pocket, mol) == doctest::Approx(1.0));

  Structure far = mol;
  far.atoms[0].coord = {100, 0, 0};
  CHECK(single_tower_reference_score(pocket, far) < 1e-10);

  Structure near = mol;
  near.atoms[0].coord = {1, 0, 0};
  double base = single_tower_reference_score(pocket, near);
  Structure shifted = near;
  shifted.atoms[0].coord.x += 10.0;
  double moved = single_tower_reference_score(pocket, shifted);
  CHECK(std::abs(moved - base) / base > 0.10);
}
