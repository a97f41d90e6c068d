#pragma once

// Embedded acceptance suite: every check here is also reachable through the
// CLI (`pocketdex selftest`), so the shipped binary can verify itself
// without a test harness. Oracles in this file are deliberately written as
// independent re-implementations (pairwise counting, full sorts, scalar
// formula evaluations) of the code paths they judge.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pocketdex/augment.hpp"
#include "pocketdex/index.hpp"
#include "pocketdex/metrics.hpp"
#include "pocketdex/objective.hpp"
#include "pocketdex/trainer.hpp"

namespace pocketdex::selftest {

struct CriterionResult {
  int number = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Options {
  uint64_t seed = 0;
  int threads = 4;
  bool quick = false;  // skip the two long-running criteria (1M bench, overfit)
};

namespace detail {

inline double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline Structure random_structure(size_t n, std::mt19937_64& rng, double box, Vec3 offset = {}) {
  static const char* elems[] = {"C", "N", "O", "S", "P", "F"};
  std::uniform_real_distribution<double> u(-box, box);
  std::uniform_int_distribution<int> pick(0, 5);
  Structure s;
  for (size_t i = 0; i < n; ++i)
    s.atoms.push_back({elems[pick(rng)], Vec3{u(rng), u(rng), u(rng)} + offset, {}, {}});
  return s;
}

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

inline double rel_change(const std::vector<double>& a, const std::vector<double>& b) {
  double dn = 0.0, an = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dn += (a[i] - b[i]) * (a[i] - b[i]);
    an += a[i] * a[i];
  }
  return std::sqrt(dn / an);
}

}  // namespace detail

// 1. Analytic gradients vs central finite differences, per loss component.
inline CriterionResult check_gradients(const Options& opt) {
  CriterionResult r{1, "gradient-correctness", false, ""};
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(opt.seed + 1);
  TrainConfig cfg;  // desk-scale encoder defaults
  cfg.contrastive.top_k = 2;
  PairDataset data;
  for (int i = 0; i < 4; ++i) {
    PairSample p;
    p.pocket = tokenize(detail::random_structure(6 + i % 2, rng, 4.0));
    p.molecule = tokenize(detail::random_structure(5, rng, 4.0));
    p.pair_id = "g" + std::to_string(i);
    data.pairs.push_back(std::move(p));
  }
  DualEncoder model = init_dual_encoder(cfg.encoder, opt.seed + 2);
  double worst = 0.0;
  std::string parts;
  for (LossComponent comp : {LossComponent::contrastive, LossComponent::topk,
                             LossComponent::masked_type, LossComponent::denoise}) {
    double err = gradient_check(model, data.pairs, cfg, comp, 1e-4, 64, opt.seed + 3);
    worst = std::max(worst, err);
    parts += std::string(loss_component_name(comp)) + "=" + detail::fmt(err) + " ";
  }
  const double secs = detail::elapsed_s(t0);
  r.passed = worst <= 1e-4 && secs < 120.0;
  r.detail = "max rel err " + detail::fmt(worst) + " (" + parts + ") in " + detail::fmt(secs) + "s";
  return r;
}

// 2. Embeddings are invariant to rigid motions and atom reorderings.
inline CriterionResult check_invariance(const Options& opt) {
  CriterionResult r{2, "se3-permutation-invariance", false, ""};
  std::mt19937_64 rng(opt.seed + 10);
  EncoderConfig cfg;
  DualEncoder model = init_dual_encoder(cfg, opt.seed + 11);
  double worst = 0.0;
  std::uniform_int_distribution<size_t> natoms(4, 20);
  for (int i = 0; i < 100; ++i) {
    Structure s = detail::random_structure(natoms(rng), rng, 8.0);
    const ModelParams& tower = i % 2 ? model.pocket : model.molecule;
    std::vector<double> base = encode(tokenize(s), tower, cfg);

    Structure moved = apply_rigid_transform(s, random_rigid_transform(rng, 30.0));
    worst = std::max(worst, detail::rel_change(base, encode(tokenize(moved), tower, cfg)));

    Structure shuffled = s;
    for (size_t a = shuffled.atoms.size(); a-- > 1;) {
      std::uniform_int_distribution<size_t> pick(0, a);
      std::swap(shuffled.atoms[a], shuffled.atoms[pick(rng)]);
    }
    worst = std::max(worst, detail::rel_change(base, encode(tokenize(shuffled), tower, cfg)));
  }
  r.passed = worst <= 1e-5;
  r.detail = "worst relative embedding change " + detail::fmt(worst) + " over 100 entities";
  return r;
}

// 3. A 10 A ligand translation upsets a cross-distance scorer but not the
// dual-tower similarity.
inline CriterionResult check_dual_tower_contrast(const Options& opt) {
  CriterionResult r{3, "dual-tower-robustness-contrast", false, ""};
  std::mt19937_64 rng(opt.seed + 20);
  EncoderConfig cfg;
  DualEncoder model = init_dual_encoder(cfg, opt.seed + 21);
  double min_single = 1e300, max_dual = 0.0;
  std::uniform_int_distribution<size_t> natoms(5, 10);
  for (int i = 0; i < 20; ++i) {
    Structure pocket = detail::random_structure(natoms(rng), rng, 4.0);
    Structure mol = detail::random_structure(natoms(rng), rng, 3.0);  // overlapping region
    std::normal_distribution<double> dir(0.0, 1.0);
    Vec3 d{dir(rng), dir(rng), dir(rng)};
    d = d * (10.0 / d.norm());
    RigidTransform shift;
    shift.translation = d;
    Structure moved = apply_rigid_transform(mol, shift);

    double s0 = single_tower_reference_score(pocket, mol);
    double s1 = single_tower_reference_score(pocket, moved);
    min_single = std::min(min_single, std::abs(s1 - s0) / s0);

    std::vector<double> ep = encode(tokenize(pocket), model.pocket, cfg);
    double d0 = similarity(ep, encode(tokenize(mol), model.molecule, cfg), SimilarityMetric::dot);
    double d1 = similarity(ep, encode(tokenize(moved), model.molecule, cfg), SimilarityMetric::dot);
    max_dual = std::max(max_dual, std::abs(d1 - d0) / std::abs(d0));
  }
  r.passed = min_single > 0.10 && max_dual <= 1e-5;
  r.detail = "reference score moved >= " + detail::fmt(min_single * 100) +
             "%, dual-tower similarity moved <= " + detail::fmt(max_dual) + " relative";
  return r;
}

// 4. Closed-form contrastive loss values.
inline CriterionResult check_loss_values(const Options&) {
  CriterionResult r{4, "contrastive-analytic-values", false, ""};
  Tensor single({1, 1}, {0.83});
  const double zero = dual_infonce_loss(single, 1.0);
  Tensor uniform({2, 2}, {0.25, 0.25, 0.25, 0.25});
  const double ln2_err = std::abs(dual_infonce_loss(uniform, 1.0) - std::log(2.0));
  r.passed = zero == 0.0 && ln2_err <= 1e-12;
  r.detail = "N=1 loss " + detail::fmt(zero) + ", N=2 uniform |loss - ln2| " + detail::fmt(ln2_err);
  return r;
}

// 5. A desk-scale run memorizes 32 synthetic pairs.
inline CriterionResult check_overfit_retrieval(const Options& opt) {
  CriterionResult r{5, "overfit-retrieval", false, ""};
  if (opt.quick) {
    r.passed = true;
    r.detail = "skipped (--quick)";
    return r;
  }
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(opt.seed + 30);
  TrainConfig cfg;  // desk defaults: lr 1e-3, adam, batch 16
  cfg.epochs = 200;
  cfg.seed = opt.seed + 31;
  cfg.stop_at_loss = 0.02;
  PairDataset data;
  std::uniform_int_distribution<size_t> natoms(6, 10);
  for (int i = 0; i < 32; ++i) {
    PairSample p;
    p.pocket = tokenize(detail::random_structure(natoms(rng), rng, 5.0));
    p.molecule = tokenize(detail::random_structure(natoms(rng), rng, 5.0));
    p.pair_id = "syn" + std::to_string(i);
    data.pairs.push_back(std::move(p));
  }
  FitResult fitres = fit(data, cfg);
  const double top1 = in_batch_top1_accuracy(fitres.model, data, cfg.contrastive.metric);
  const double loss = fitres.history.empty() ? 1e300 : fitres.history.back().mean.total;
  const double secs = detail::elapsed_s(t0);
  r.passed = !fitres.diverged && top1 == 1.0 && loss < 0.05 && secs < 600.0;
  r.detail = "top-1 " + detail::fmt(top1 * 100) + "%, loss " + detail::fmt(loss) + ", " +
             std::to_string(fitres.history.size()) + " epochs in " + detail::fmt(secs) + "s";
  return r;
}

// 6. Exact scan vs a full-sort oracle, and shard-count independence.
inline CriterionResult check_retrieval_exactness(const Options& opt) {
  CriterionResult r{6, "retrieval-exactness", false, ""};
  std::mt19937_64 rng(opt.seed + 40);
  const size_t n = 10000, dim = 64;
  // quantized components force plenty of exact score ties
  std::uniform_int_distribution<int> coarse(-4, 4);
  std::vector<std::vector<double>> embs(n, std::vector<double>(dim));
  for (auto& v : embs)
    for (auto& x : v) x = static_cast<double>(coarse(rng)) / 4.0;
  std::vector<std::string> ids;
  for (size_t i = 0; i < n; ++i) {
    std::string t = std::to_string(i);
    ids.push_back("vec" + std::string(5 - t.size(), '0') + t);
  }
  EmbeddingIndex idx = make_index(embs, ids, SimilarityMetric::dot);

  size_t checked = 0;
  for (int q = 0; q < 100; ++q) {
    std::vector<double> query(dim);
    for (auto& x : query) x = static_cast<double>(coarse(rng)) / 4.0;
    for (size_t k : {size_t(1), size_t(10), size_t(100)}) {
      RankedResult got = search(idx, query, k, 1);
      RankedResult sharded = search(idx, query, k, 4);

      std::vector<std::pair<double, std::string>> all;
      all.reserve(n);
      for (size_t i = 0; i < n; ++i) {
        double s = 0.0;
        const float* row = idx.row(i);
        for (size_t j = 0; j < dim; ++j) s += static_cast<double>(row[j]) * query[j];
        all.emplace_back(s, idx.ids[i]);
      }
      std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      });
      if (got.entries.size() != k || sharded.entries.size() != k) return r;
      for (size_t i = 0; i < k; ++i) {
        if (got.entries[i].id != all[i].second || got.entries[i].score != all[i].first) {
          r.detail = "mismatch vs oracle at query " + std::to_string(q);
          return r;
        }
        if (sharded.entries[i].id != got.entries[i].id ||
            sharded.entries[i].score != got.entries[i].score) {
          r.detail = "sharded scan diverged at query " + std::to_string(q);
          return r;
        }
      }
      ++checked;
    }
  }
  r.passed = true;
  r.detail = std::to_string(checked) + " query/k combinations exact, 4-way shard identical";
  return r;
}

// 7. Scan throughput at the 1M x 128 scale.
inline CriterionResult check_throughput(const Options& opt) {
  CriterionResult r{7, "throughput", false, ""};
  if (opt.quick) {
    r.passed = true;
    r.detail = "skipped (--quick)";
    return r;
  }
  const size_t n = 1000000, dim = 128;
  EmbeddingIndex idx;
  idx.dim = dim;
  idx.metric = SimilarityMetric::dot;
  idx.vectors.resize(n * dim);
  std::mt19937_64 rng(opt.seed + 50);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  for (auto& v : idx.vectors) v = u(rng);
  idx.ids.reserve(n);
  for (size_t i = 0; i < n; ++i) idx.ids.push_back("m" + std::to_string(i));

  BenchResult single = throughput_bench(idx, 3, 10, 1, opt.seed + 51);
  const double per_query = single.seconds / static_cast<double>(single.queries);
  bool pass_single = per_query <= 2.0;

  const unsigned cores = std::thread::hardware_concurrency();
  std::string speedup_note;
  bool pass_speedup = true;
  if (cores >= 4) {
    BenchResult quad = throughput_bench(idx, 3, 10, 4, opt.seed + 51);
    const double speedup = single.seconds / quad.seconds;
    pass_speedup = speedup >= 3.0;
    speedup_note = ", 4-thread speedup " + detail::fmt(speedup) + "x";
  } else {
    speedup_note = ", speedup check skipped (" + std::to_string(cores) + " core(s) available, needs 4)";
  }
  r.passed = pass_single && pass_speedup;
  r.detail = detail::fmt(per_query) + " s/query over 1M x 128 single-threaded" + speedup_note;
  return r;
}

// 8. Screening metrics vs counting/scalar oracles.
inline CriterionResult check_metric_oracles(const Options& opt) {
  CriterionResult r{8, "metric-oracles", false, ""};
  std::mt19937_64 rng(opt.seed + 60);
  double worst_auroc = 0.0, worst_bedroc = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    LabeledScores d;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> coarse(0, 12);
    const size_t n = 40 + static_cast<size_t>(rep % 30);
    for (size_t i = 0; i < n; ++i) {
      double score = rep % 2 ? u(rng) : static_cast<double>(coarse(rng));
      d.entries.push_back({"id" + std::to_string(i), score, i < n / 5});
    }

    // pairwise-comparison AUROC
    double wins = 0.0;
    size_t np = 0, nd = 0;
    for (const auto& a : d.entries) {
      if (!a.active) continue;
      ++np;
      for (const auto& b : d.entries) {
        if (b.active) continue;
        wins += a.score > b.score ? 1.0 : (a.score == b.score ? 0.5 : 0.0);
      }
    }
    for (const auto& e : d.entries) nd += e.active ? 0 : 1;
    worst_auroc = std::max(worst_auroc,
                           std::abs(auroc(d) - wins / (static_cast<double>(np) * nd)));

    // scalar evaluation of the exponential-weight formula with counted ranks
    const double alpha = 85.0;
    double sum = 0.0;
    for (const auto& a : d.entries) {
      if (!a.active) continue;
      size_t rank = 1;
      for (const auto& b : d.entries)
        if (&a != &b && (b.score > a.score || (b.score == a.score && b.id < a.id))) ++rank;
      sum += std::exp(-alpha * static_cast<double>(rank) / static_cast<double>(n));
    }
    const double ra = static_cast<double>(np) / static_cast<double>(n);
    const double denom = ra * (1.0 - std::exp(-alpha)) / (std::exp(alpha / static_cast<double>(n)) - 1.0);
    const double factor = ra * std::sinh(alpha / 2) / (std::cosh(alpha / 2) - std::cosh(alpha / 2 - alpha * ra));
    const double want = sum / denom * factor + 1.0 / (1.0 - std::exp(alpha * (1.0 - ra)));
    worst_bedroc = std::max(worst_bedroc, std::abs(bedroc(d, alpha) - want));

    // counting oracles for EF and RE
    auto sorted = d.sorted();
    for (double f : {0.05, 0.1, 0.25}) {
      size_t cutoff = std::max<size_t>(1, static_cast<size_t>(std::ceil(f * static_cast<double>(n) - 1e-9)));
      size_t hits = 0;
      for (size_t i = 0; i < cutoff; ++i) hits += sorted[i].active ? 1 : 0;
      if (enrichment_factor(d, f) != static_cast<double>(hits) / (static_cast<double>(np) * f)) {
        r.detail = "EF mismatch";
        return r;
      }
    }
    for (double x : {0.1, 0.2}) {
      size_t target_fp = static_cast<size_t>(std::ceil(x * static_cast<double>(nd) - 1e-9));
      size_t tp = 0, fp = 0;
      for (const auto& e : sorted) {
        if (e.active) ++tp;
        else if (++fp == target_fp) break;
      }
      double want_re = (static_cast<double>(tp) * static_cast<double>(n)) /
                       (static_cast<double>(np) * static_cast<double>(fp));
      if (roc_enrichment(d, x) != want_re) {
        r.detail = "RE mismatch";
        return r;
      }
    }
  }

  // the stated hand-checkable EF case
  LabeledScores hand;
  for (int i = 0; i < 100; ++i) hand.entries.push_back({"h" + std::to_string(i + 10), 100.0 - i, i < 10});
  const bool ef_exact = enrichment_factor(hand, 0.01) == 10.0;

  r.passed = worst_auroc <= 1e-12 && worst_bedroc <= 1e-10 && ef_exact;
  r.detail = "AUROC err " + detail::fmt(worst_auroc) + ", BEDROC err " + detail::fmt(worst_bedroc) +
             ", EF(1%) trivial case " + (ef_exact ? "exact" : "WRONG");
  return r;
}

// 9. Structural superposition, TM-score fixed points, homolog filter
// thresholds, pocket extraction boundary.
inline CriterionResult check_homoaug(const Options& opt) {
  CriterionResult r{9, "homoaug-lite", false, ""};
  std::mt19937_64 rng(opt.seed + 70);
  double worst_rmsd = 0.0;
  for (int rep = 0; rep < 25; ++rep) {
    std::vector<Vec3> a;
    std::uniform_real_distribution<double> u(-7.0, 7.0);
    for (int i = 0; i < 5 + rep % 8; ++i) a.push_back({u(rng), u(rng), u(rng)});
    RigidTransform planted = random_rigid_transform(rng, 12.0);
    std::vector<Vec3> b;
    for (const auto& p : a) b.push_back(planted.apply(p));
    worst_rmsd = std::max(worst_rmsd, kabsch_superpose(a, b).rmsd);
  }

  const double tm_one = tm_score(std::vector<double>(40, 0.0), 40);
  const double d0 = 1.24 * std::cbrt(50.0 - 15.0) - 1.8;
  const double tm_half = tm_score(std::vector<double>(50, d0), 50);

  const double eps = 1e-9;
  const bool thresholds = homoaug_decide(0.9 + eps, 0.4, 0.40) && !homoaug_decide(0.9, 1.0, 1.0) &&
                          !homoaug_decide(0.95, 0.4 - eps, 1.0) &&
                          !homoaug_decide(0.95, 1.0, 0.40 - eps);

  Structure ligand;
  ligand.atoms.push_back({"C", {0, 0, 0}, {}, {}});
  Structure protein;
  protein.atoms.push_back({"N", {5.9, 0, 0}, {}, {}});
  protein.atoms.push_back({"O", {6.0, 0, 0}, {}, {}});
  protein.atoms.push_back({"S", {6.1, 0, 0}, {}, {}});
  Structure pocket = extract_pocket(protein, ligand, 6.0);
  const bool pocket_exact =
      pocket.size() == 2 && pocket.atoms[0].element == "N" && pocket.atoms[1].element == "O";

  r.passed = worst_rmsd <= 1e-8 && std::abs(tm_one - 1.0) <= 1e-12 &&
             std::abs(tm_half - 0.5) <= 1e-12 && thresholds && pocket_exact;
  r.detail = "kabsch rmsd " + detail::fmt(worst_rmsd) + ", TM fixed points " + detail::fmt(tm_one) +
             "/" + detail::fmt(tm_half) + ", thresholds " + (thresholds ? "ok" : "WRONG") +
             ", 6A cut " + (pocket_exact ? "exact" : "WRONG");
  return r;
}

// 10. Container formats round-trip bitwise and reject corruption distinctly.
inline CriterionResult check_formats(const Options& opt) {
  namespace fs = std::filesystem;
  CriterionResult r{10, "format-round-trips", false, ""};
  fs::path dir = fs::temp_directory_path() / ("pocketdex_selftest_" + std::to_string(opt.seed));
  fs::create_directories(dir);
  std::mt19937_64 rng(opt.seed + 80);

  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };
  auto spit = [&](const std::string& name, const std::string& bytes) {
    std::ofstream out((dir / name).string(), std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    return (dir / name).string();
  };

  bool ok = true;
  std::string note;

  {  // index round trip + corruption
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<double>> embs(9, std::vector<double>(7));
    std::vector<std::string> ids;
    for (size_t i = 0; i < embs.size(); ++i) {
      for (auto& x : embs[i]) x = u(rng);
      ids.push_back("id" + std::to_string(i));
    }
    const std::string p1 = (dir / "a.dcix").string(), p2 = (dir / "b.dcix").string();
    build_index(embs, ids, SimilarityMetric::dot, p1);
    save_index(load_index(p1), p2);
    if (slurp(p1) != slurp(p2)) {
      ok = false;
      note += "index round trip not bitwise; ";
    }
    std::string bytes = slurp(p1);
    std::string m = bytes;
    m[0] = 'Q';
    std::string v = bytes;
    v[4] = 3;
    std::string t = bytes.substr(0, bytes.size() - 3);
    int distinct = 0;
    try { load_index(spit("m.dcix", m)); } catch (const BadMagicError&) { ++distinct; } catch (...) {}
    try { load_index(spit("v.dcix", v)); } catch (const VersionMismatchError&) { ++distinct; } catch (...) {}
    try { load_index(spit("t.dcix", t)); } catch (const TruncatedFileError&) { ++distinct; } catch (...) {}
    if (distinct != 3) {
      ok = false;
      note += "index corruption errors not distinct; ";
    }
  }

  {  // checkpoint round trip + corruption
    EncoderConfig cfg;
    cfg.n_layers = 2;
    cfg.d_model = 16;
    cfg.n_heads = 2;
    cfg.d_head = 8;
    cfg.d_pair_basis = 4;
    cfg.d_out = 8;
    DualEncoder model = init_dual_encoder(cfg, opt.seed + 81);
    const std::string c1 = (dir / "a.dcmp").string(), c2 = (dir / "b.dcmp").string();
    save_checkpoint(model, c1);
    save_checkpoint(load_checkpoint(c1), c2);
    if (slurp(c1) != slurp(c2)) {
      ok = false;
      note += "checkpoint round trip not bitwise; ";
    }
    std::string bytes = slurp(c1);
    std::string m = bytes;
    m[2] = 'z';
    std::string v = bytes;
    v[5] = 1;
    std::string t = bytes.substr(0, bytes.size() / 2);
    int distinct = 0;
    try { load_checkpoint(spit("m.dcmp", m)); } catch (const BadMagicError&) { ++distinct; } catch (...) {}
    try { load_checkpoint(spit("v.dcmp", v)); } catch (const VersionMismatchError&) { ++distinct; } catch (...) {}
    try { load_checkpoint(spit("t.dcmp", t)); } catch (const TruncatedFileError&) { ++distinct; } catch (...) {}
    if (distinct != 3) {
      ok = false;
      note += "checkpoint corruption errors not distinct; ";
    }
  }

  fs::remove_all(dir);
  r.passed = ok;
  r.detail = ok ? "index + checkpoint bitwise, 6 distinct corruption errors" : note;
  return r;
}

inline std::vector<CriterionResult> run_acceptance(const Options& opt, std::ostream& log) {
  std::vector<CriterionResult> results;
  auto run = [&](CriterionResult (*fn)(const Options&)) {
    CriterionResult res = fn(opt);
    log << (res.passed ? "[PASS] " : "[FAIL] ") << res.number << ". " << res.name << ": "
        << res.detail << "\n";
    log.flush();
    results.push_back(std::move(res));
  };
  run(check_gradients);
  run(check_invariance);
  run(check_dual_tower_contrast);
  run(check_loss_values);
  run(check_overfit_retrieval);
  run(check_retrieval_exactness);
  run(check_throughput);
  run(check_metric_oracles);
  run(check_homoaug);
  run(check_formats);
  return results;
}

inline bool all_passed(const std::vector<CriterionResult>& results) {
  for (const auto& r : results)
    if (!r.passed) return false;
  return true;
}

}  // namespace pocketdex::selftest
