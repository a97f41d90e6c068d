#pragma once

#include <cmath>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "pocketdex/encoder.hpp"
#include "pocketdex/metrics.hpp"
#include "pocketdex/objective.hpp"
#include "pocketdex/tape.hpp"

namespace pocketdex {

enum class OptimizerKind { sgd, adam };

struct TrainConfig {
  EncoderConfig encoder;
  double lr = 0.001;
  int batch_size = 16;  // production-scale runs use 192; this is the desk default
  int epochs = 50;
  uint64_t seed = 0;
  double contrastive_weight = 1.0;
  double topk_weight = 0.0;
  double masked_weight = 0.0;
  double denoise_weight = 0.0;
  OptimizerKind optimizer = OptimizerKind::adam;
  double adam_beta1 = 0.9, adam_beta2 = 0.999, adam_eps = 1e-8;
  ContrastiveConfig contrastive;
  CorruptionConfig corruption;
  bool jitter_molecules = false;   // noisy-conformer stand-in
  double jitter_sigma = 0.2;       // Angstrom
  double stop_at_loss = 0.0;       // early stop threshold on epoch mean loss (0 = off)

  void validate() const {
    encoder.validate();
    contrastive.validate();
    if (lr < 0.0) throw InvalidArgument("train config: lr must be >= 0");
    if (batch_size < 1) throw InvalidArgument("train config: batch_size must be >= 1");
    if (contrastive_weight > 0.0 && batch_size < 2)
      throw InvalidArgument("train config: contrastive training needs batch_size >= 2");
    if (epochs < 0) throw InvalidArgument("train config: epochs must be >= 0");
    if (contrastive_weight < 0 || masked_weight < 0 || denoise_weight < 0 || topk_weight < 0)
      throw InvalidArgument("train config: loss weights must be >= 0");
  }
};

struct PairSample {
  TokenizedEntity pocket;
  TokenizedEntity molecule;
  std::string pair_id;
};

struct PairDataset {
  std::vector<PairSample> pairs;

  size_t size() const { return pairs.size(); }

  void validate() const {
    std::unordered_set<std::string> ids;
    for (const auto& p : pairs)
      if (!ids.insert(p.pair_id).second)
        throw InvalidArgument("pair dataset: duplicate pair_id '" + p.pair_id + "'");
  }
};

struct LossBreakdown {
  double total = 0.0;
  double contrastive = 0.0;
  double topk = 0.0;
  double masked_type = 0.0;
  double denoise = 0.0;
};

// ---- loss graph -----------------------------------------------------------

namespace detail {

inline uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::vector<size_t> real_atom_positions(const TokenizedEntity& e) {
  std::vector<size_t> out;
  for (size_t i = 1; i < e.length(); ++i)
    if (e.mask[i]) out.push_back(i);
  return out;
}

// Squared-error mask over real-atom pairs touching a corrupted position.
inline Tensor denoise_pair_mask(const TokenizedEntity& e, const std::vector<size_t>& corrupted) {
  const size_t t = e.length();
  std::vector<char> is_corrupt(t, 0), is_real(t, 0);
  for (size_t c : corrupted) is_corrupt[c] = 1;
  for (size_t i = 1; i < t; ++i) is_real[i] = e.mask[i] ? 1 : 0;
  Tensor mask({t, t});
  for (size_t i = 0; i < t; ++i)
    for (size_t j = 0; j < t; ++j)
      if (is_real[i] && is_real[j] && (is_corrupt[i] || is_corrupt[j])) mask.at(i, j) = 1.0;
  return mask;
}

}  // namespace detail

inline TokenizedEntity jitter_entity(const TokenizedEntity& e, double sigma, std::mt19937_64& rng) {
  TokenizedEntity out = e;
  RigidTransform t = random_rigid_transform(rng);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (size_t i = 1; i < out.length(); ++i) {
    if (!out.mask[i]) continue;
    Vec3 noise{gauss(rng) * sigma, gauss(rng) * sigma, gauss(rng) * sigma};
    out.coords[i] = t.apply(out.coords[i] + noise);
  }
  detail::refresh_cls_coord(out);
  return out;
}

struct LossGraph {
  Tape::VarId total = -1;
  Tape::VarId contrastive = -1;
  Tape::VarId topk = -1;
  Tape::VarId masked = -1;
  Tape::VarId denoise = -1;
  ParamVars pocket_vars;
  ParamVars mol_vars;
};

// Builds the whole training objective for one batch on the given tape.
// `noise_seed` fixes every stochastic choice (masking, corruption, jitter),
// so repeated builds are bitwise identical.
inline LossGraph build_loss_graph(Tape& tape, const std::vector<const PairSample*>& batch,
                                  const DualEncoder& model, const TrainConfig& cfg,
                                  uint64_t noise_seed, bool trainable) {
  cfg.contrastive.validate();
  if (batch.empty()) throw InvalidArgument("train: empty batch");
  const size_t n = batch.size();
  if (cfg.contrastive_weight > 0.0 && n < 2)
    throw InvalidArgument("train: contrastive loss needs a batch of at least 2 pairs");
  if (cfg.contrastive_weight <= 0.0 && cfg.masked_weight <= 0.0 && cfg.denoise_weight <= 0.0 &&
      cfg.topk_weight <= 0.0)
    throw InvalidArgument("train: all loss weights are zero");

  LossGraph g;
  g.pocket_vars = register_params(tape, model.pocket, trainable);
  g.mol_vars = register_params(tape, model.molecule, trainable);

  // Per-pair clean passes (embeddings + atom representations).
  std::vector<TokenizedEntity> mols;
  mols.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    if (cfg.jitter_molecules) {
      std::mt19937_64 rng(detail::mix_seed(noise_seed, 1000 + i));
      mols.push_back(jitter_entity(batch[i]->molecule, cfg.jitter_sigma, rng));
    } else {
      mols.push_back(batch[i]->molecule);
    }
  }

  const bool need_clean = cfg.contrastive_weight > 0.0 || cfg.topk_weight > 0.0;
  std::vector<EncoderGraph> pocket_graphs, mol_graphs;
  if (need_clean) {
    for (size_t i = 0; i < n; ++i) {
      pocket_graphs.push_back(build_encoder_graph(tape, batch[i]->pocket, g.pocket_vars, cfg.encoder));
      mol_graphs.push_back(build_encoder_graph(tape, mols[i], g.mol_vars, cfg.encoder));
    }
  }

  std::vector<Tape::VarId> terms;

  if (cfg.contrastive_weight > 0.0) {
    std::vector<Tape::VarId> p_rows, m_rows;
    for (size_t i = 0; i < n; ++i) {
      p_rows.push_back(pocket_graphs[i].embedding);
      m_rows.push_back(mol_graphs[i].embedding);
    }
    Tape::VarId p = tape.stack_rows(p_rows);
    Tape::VarId m = tape.stack_rows(m_rows);
    if (cfg.contrastive.metric == SimilarityMetric::cosine) {
      p = tape.l2_normalize_rows(p);
      m = tape.l2_normalize_rows(m);
    }
    Tape::VarId s = tape.scale(tape.matmul(p, tape.transpose(m)), 1.0 / cfg.contrastive.temperature);
    Tape::VarId diag = tape.diagonal(s);
    Tape::VarId row_term = tape.sum_all(tape.sub(tape.logsumexp_rows(s), diag));
    Tape::VarId col_term = tape.sum_all(tape.sub(tape.logsumexp_rows(tape.transpose(s)), diag));
    g.contrastive = tape.scale(tape.add(row_term, col_term), 1.0 / (2.0 * static_cast<double>(n)));
    terms.push_back(tape.scale(g.contrastive, cfg.contrastive_weight));
  }

  if (cfg.topk_weight > 0.0) {
    // Atom-level representations from the configured layer, positive pairs only.
    const size_t layer_idx = cfg.contrastive.topk_layer == ContrastiveConfig::TopkLayer::last
                                 ? static_cast<size_t>(cfg.encoder.n_layers)
                                 : static_cast<size_t>(cfg.encoder.n_layers) - 1;
    std::vector<Tape::VarId> pair_scores;
    for (size_t i = 0; i < n; ++i) {
      auto mol_pos = detail::real_atom_positions(mols[i]);
      auto poc_pos = detail::real_atom_positions(batch[i]->pocket);
      Tape::VarId mol_atoms = tape.row_gather(mol_graphs[i].layer_hidden[layer_idx], mol_pos);
      Tape::VarId poc_atoms = tape.row_gather(pocket_graphs[i].layer_hidden[layer_idx], poc_pos);
      TopkSelection sel = topk_select(tape.val(mol_atoms), tape.val(poc_atoms), cfg.contrastive.top_k);
      Tape::VarId cos = tape.matmul(tape.l2_normalize_rows(mol_atoms),
                                    tape.transpose(tape.l2_normalize_rows(poc_atoms)));
      std::vector<std::pair<size_t, size_t>> entries;
      for (size_t v : sel.mol_atoms)
        for (size_t u : sel.pocket_atoms) entries.emplace_back(v, u);
      pair_scores.push_back(tape.select_entries_sum(cos, std::move(entries)));
    }
    Tape::VarId sum = pair_scores[0];
    for (size_t i = 1; i < pair_scores.size(); ++i) sum = tape.add(sum, pair_scores[i]);
    g.topk = tape.scale(sum, 1.0 / static_cast<double>(n));
    // maximized for positive pairs: enters the total with a negative sign
    terms.push_back(tape.scale(g.topk, -cfg.topk_weight));
  }

  if (cfg.masked_weight > 0.0) {
    std::vector<Tape::VarId> ce;
    for (size_t i = 0; i < n; ++i) {
      for (int side = 0; side < 2; ++side) {
        const TokenizedEntity& ent = side == 0 ? batch[i]->pocket : mols[i];
        const ParamVars& pv = side == 0 ? g.pocket_vars : g.mol_vars;
        MaskedEntity me = mask_types(ent, cfg.corruption, detail::mix_seed(noise_seed, 2000 + 2 * i + side));
        EncoderGraph eg = build_encoder_graph(tape, me.entity, pv, cfg.encoder);
        Tape::VarId logits = build_masked_type_head(tape, eg, pv, me.positions);
        std::vector<size_t> targets(me.true_type_ids.begin(), me.true_type_ids.end());
        ce.push_back(tape.cross_entropy_mean(logits, std::move(targets)));
      }
    }
    Tape::VarId sum = ce[0];
    for (size_t i = 1; i < ce.size(); ++i) sum = tape.add(sum, ce[i]);
    g.masked = tape.scale(sum, 1.0 / static_cast<double>(ce.size()));
    terms.push_back(tape.scale(g.masked, cfg.masked_weight));
  }

  if (cfg.denoise_weight > 0.0) {
    std::vector<Tape::VarId> mse;
    for (size_t i = 0; i < n; ++i) {
      for (int side = 0; side < 2; ++side) {
        const TokenizedEntity& ent = side == 0 ? batch[i]->pocket : mols[i];
        const ParamVars& pv = side == 0 ? g.pocket_vars : g.mol_vars;
        CorruptedEntity corr =
            corrupt_coords(ent, cfg.corruption, detail::mix_seed(noise_seed, 3000 + 2 * i + side));
        EncoderGraph eg = build_encoder_graph(tape, corr.entity, pv, cfg.encoder);
        Tape::VarId pred = build_pair_distance_head(tape, eg, pv);
        Tensor mask = detail::denoise_pair_mask(ent, corr.corrupted);
        mse.push_back(tape.masked_sq_error_mean(pred, std::move(corr.true_distances), std::move(mask)));
      }
    }
    Tape::VarId sum = mse[0];
    for (size_t i = 1; i < mse.size(); ++i) sum = tape.add(sum, mse[i]);
    g.denoise = tape.scale(sum, 1.0 / static_cast<double>(mse.size()));
    terms.push_back(tape.scale(g.denoise, cfg.denoise_weight));
  }

  g.total = terms[0];
  for (size_t i = 1; i < terms.size(); ++i) g.total = tape.add(g.total, terms[i]);
  return g;
}

inline LossBreakdown read_breakdown(const Tape& tape, const LossGraph& g) {
  LossBreakdown b;
  b.total = tape.scalar(g.total);
  if (g.contrastive >= 0) b.contrastive = tape.scalar(g.contrastive);
  if (g.topk >= 0) b.topk = tape.scalar(g.topk);
  if (g.masked >= 0) b.masked_type = tape.scalar(g.masked);
  if (g.denoise >= 0) b.denoise = tape.scalar(g.denoise);
  return b;
}

inline void check_finite_breakdown(const LossBreakdown& b) {
  auto check = [](double v, const char* name) {
    if (!std::isfinite(v))
      throw std::runtime_error(std::string("train_step: non-finite ") + name + " loss term");
  };
  check(b.contrastive, "contrastive");
  check(b.topk, "topk");
  check(b.masked_type, "masked-type");
  check(b.denoise, "denoise");
  check(b.total, "total");
}

// Forward-only objective evaluation (no parameter updates, no gradients).
inline LossBreakdown evaluate_loss(const DualEncoder& model,
                                   const std::vector<const PairSample*>& batch,
                                   const TrainConfig& cfg, uint64_t noise_seed) {
  Tape tape;
  LossGraph g = build_loss_graph(tape, batch, model, cfg, noise_seed, false);
  return read_breakdown(tape, g);
}

// ---- optimizer -------------------------------------------------------------

struct OptimizerState {
  std::vector<Tensor> m, v;  // Adam moments in parameter order (both towers)
  int64_t step = 0;
};

namespace detail {

inline std::vector<Tensor*> parameter_list(DualEncoder& model) {
  std::vector<Tensor*> out;
  for_each_tensor(model.pocket, [&](const std::string&, Tensor& t) { out.push_back(&t); });
  for_each_tensor(model.molecule, [&](const std::string&, Tensor& t) { out.push_back(&t); });
  return out;
}

inline std::vector<const Tensor*> parameter_list(const DualEncoder& model) {
  std::vector<const Tensor*> out;
  for_each_tensor(model.pocket, [&](const std::string&, const Tensor& t) { out.push_back(&t); });
  for_each_tensor(model.molecule, [&](const std::string&, const Tensor& t) { out.push_back(&t); });
  return out;
}

inline void apply_update(DualEncoder& model, const std::vector<const Tensor*>& grads,
                         const TrainConfig& cfg, OptimizerState& state) {
  auto params = parameter_list(model);
  if (params.size() != grads.size()) throw InvalidArgument("optimizer: gradient count mismatch");
  if (cfg.optimizer == OptimizerKind::sgd) {
    for (size_t p = 0; p < params.size(); ++p)
      for (size_t i = 0; i < params[p]->size(); ++i)
        params[p]->data[i] -= cfg.lr * grads[p]->data[i];
    return;
  }
  if (state.m.empty()) {
    for (const Tensor* t : params) {
      state.m.emplace_back(t->shape);
      state.v.emplace_back(t->shape);
    }
  }
  state.step += 1;
  const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (size_t p = 0; p < params.size(); ++p) {
    Tensor& m = state.m[p];
    Tensor& v = state.v[p];
    for (size_t i = 0; i < params[p]->size(); ++i) {
      const double gr = grads[p]->data[i];
      m.data[i] = b1 * m.data[i] + (1.0 - b1) * gr;
      v.data[i] = b2 * v.data[i] + (1.0 - b2) * gr * gr;
      const double mhat = m.data[i] / bc1;
      const double vhat = v.data[i] / bc2;
      params[p]->data[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
  }
}

}  // namespace detail

// One optimization step over a batch: builds the weighted objective,
// backpropagates, and updates both towers in place.
inline LossBreakdown train_step(const std::vector<const PairSample*>& batch, DualEncoder& model,
                                const TrainConfig& cfg, OptimizerState& state,
                                uint64_t noise_seed) {
  Tape tape;
  LossGraph g = build_loss_graph(tape, batch, model, cfg, noise_seed, true);
  LossBreakdown b = read_breakdown(tape, g);
  check_finite_breakdown(b);
  tape.backward(g.total);
  std::vector<const Tensor*> grads;
  grads.reserve(g.pocket_vars.flat.size() + g.mol_vars.flat.size());
  for (Tape::VarId id : g.pocket_vars.flat) grads.push_back(&tape.grad(id));
  for (Tape::VarId id : g.mol_vars.flat) grads.push_back(&tape.grad(id));
  detail::apply_update(model, grads, cfg, state);
  return b;
}

// ---- gradient verification -------------------------------------------------

enum class LossComponent { total, contrastive, topk, masked_type, denoise };

inline const char* loss_component_name(LossComponent c) {
  switch (c) {
    case LossComponent::total: return "total";
    case LossComponent::contrastive: return "contrastive";
    case LossComponent::topk: return "topk";
    case LossComponent::masked_type: return "masked-type";
    case LossComponent::denoise: return "denoise";
  }
  return "?";
}

// Restricts the loss to one component (weight 1) so each term can be
// finite-difference checked on its own.
inline TrainConfig isolate_component(TrainConfig cfg, LossComponent comp) {
  if (comp == LossComponent::total) return cfg;
  cfg.contrastive_weight = comp == LossComponent::contrastive ? 1.0 : 0.0;
  cfg.topk_weight = comp == LossComponent::topk ? 1.0 : 0.0;
  cfg.masked_weight = comp == LossComponent::masked_type ? 1.0 : 0.0;
  cfg.denoise_weight = comp == LossComponent::denoise ? 1.0 : 0.0;
  return cfg;
}

// Max relative error between analytic gradients and central finite
// differences over `samples` randomly chosen scalar parameters.
inline double gradient_check(const DualEncoder& model, const std::vector<PairSample>& batch,
                             const TrainConfig& config, LossComponent comp = LossComponent::total,
                             double eps = 1e-4, int samples = 64, uint64_t seed = 0) {
  if (eps <= 0.0) throw InvalidArgument("gradient_check: eps must be positive");
  if (samples <= 0) throw InvalidArgument("gradient_check: samples must be positive");
  TrainConfig cfg = isolate_component(config, comp);
  std::vector<const PairSample*> view;
  for (const auto& p : batch) view.push_back(&p);
  const uint64_t noise_seed = detail::mix_seed(seed, 77);

  Tape tape;
  LossGraph g = build_loss_graph(tape, view, model, cfg, noise_seed, true);
  tape.backward(g.total);
  std::vector<const Tensor*> grads;
  for (Tape::VarId id : g.pocket_vars.flat) grads.push_back(&tape.grad(id));
  for (Tape::VarId id : g.mol_vars.flat) grads.push_back(&tape.grad(id));

  DualEncoder probe = model;
  auto params = detail::parameter_list(probe);
  size_t total_scalars = 0;
  for (const Tensor* t : params) total_scalars += t->size();

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<size_t> pick(0, total_scalars - 1);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    size_t flat = pick(rng);
    size_t ti = 0;
    while (flat >= params[ti]->size()) {
      flat -= params[ti]->size();
      ++ti;
    }
    double& slot = params[ti]->data[flat];
    const double saved = slot;
    slot = saved + eps;
    double up = evaluate_loss(probe, view, cfg, noise_seed).total;
    slot = saved - eps;
    double down = evaluate_loss(probe, view, cfg, noise_seed).total;
    slot = saved;
    const double fd = (up - down) / (2.0 * eps);
    const double an = grads[ti]->data[flat];
    const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-8});
    worst = std::max(worst, rel);
  }
  return worst;
}

// ---- full training loop ----------------------------------------------------

struct EpochStats {
  int epoch = 0;
  LossBreakdown mean;
  double val_bedroc = 0.0;
  bool has_validation = false;
};

struct FitResult {
  DualEncoder model;            // parameters at the end of training
  DualEncoder best;             // best-validation checkpoint (== model without validation)
  int best_epoch = -1;
  double best_bedroc = 0.0;
  std::vector<EpochStats> history;
  bool diverged = false;
};

// Mean BEDROC over pockets, each ranking every molecule in the set with the
// true partner as the single active.
inline double validation_bedroc(const DualEncoder& model, const PairDataset& data,
                                SimilarityMetric metric, double alpha = 85.0) {
  if (data.size() < 2) throw InvalidArgument("validation: need at least 2 pairs");
  std::vector<std::vector<double>> p_emb, m_emb;
  for (const auto& pair : data.pairs) {
    p_emb.push_back(encode(pair.pocket, model.pocket, model.config));
    m_emb.push_back(encode(pair.molecule, model.molecule, model.config));
  }
  double total = 0.0;
  for (size_t k = 0; k < data.size(); ++k) {
    LabeledScores scored;
    for (size_t j = 0; j < data.size(); ++j)
      scored.entries.push_back(
          {data.pairs[j].pair_id, similarity(p_emb[k], m_emb[j], metric), j == k});
    total += bedroc(scored, alpha);
  }
  return total / static_cast<double>(data.size());
}

// Share of pockets whose true molecule is the strict row argmax.
inline double in_batch_top1_accuracy(const DualEncoder& model, const PairDataset& data,
                                     SimilarityMetric metric) {
  std::vector<std::vector<double>> p_emb, m_emb;
  for (const auto& pair : data.pairs) {
    p_emb.push_back(encode(pair.pocket, model.pocket, model.config));
    m_emb.push_back(encode(pair.molecule, model.molecule, model.config));
  }
  size_t hits = 0;
  for (size_t k = 0; k < data.size(); ++k) {
    bool best = true;
    double own = similarity(p_emb[k], m_emb[k], metric);
    for (size_t j = 0; j < data.size() && best; ++j)
      if (j != k && similarity(p_emb[k], m_emb[j], metric) >= own) best = false;
    hits += best ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

inline FitResult fit(const PairDataset& dataset, const TrainConfig& cfg,
                     const PairDataset* validation = nullptr) {
  cfg.validate();
  dataset.validate();
  if (dataset.size() < static_cast<size_t>(cfg.batch_size))
    throw InvalidArgument("fit: dataset smaller than batch_size");

  FitResult result;
  result.model = init_dual_encoder(cfg.encoder, cfg.seed);
  OptimizerState opt;
  std::mt19937_64 rng(detail::mix_seed(cfg.seed, 0xf17));

  DualEncoder last_good = result.model;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<size_t> order(dataset.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (size_t i = order.size(); i-- > 1;) {
      std::uniform_int_distribution<size_t> pick(0, i);
      std::swap(order[i], order[pick(rng)]);
    }

    LossBreakdown sum;
    size_t steps = 0;
    bool bad = false;
    const size_t bs = static_cast<size_t>(cfg.batch_size);
    for (size_t start = 0; start + bs <= order.size(); start += bs) {
      std::vector<const PairSample*> batch;
      for (size_t i = start; i < start + bs; ++i) batch.push_back(&dataset.pairs[order[i]]);
      uint64_t noise_seed = rng();
      try {
        LossBreakdown b = train_step(batch, result.model, cfg, opt, noise_seed);
        sum.total += b.total;
        sum.contrastive += b.contrastive;
        sum.topk += b.topk;
        sum.masked_type += b.masked_type;
        sum.denoise += b.denoise;
        ++steps;
      } catch (const std::runtime_error&) {
        bad = true;
        break;
      }
    }
    if (bad || steps == 0) {
      result.diverged = true;
      result.model = last_good;
      break;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.mean.total = sum.total / static_cast<double>(steps);
    stats.mean.contrastive = sum.contrastive / static_cast<double>(steps);
    stats.mean.topk = sum.topk / static_cast<double>(steps);
    stats.mean.masked_type = sum.masked_type / static_cast<double>(steps);
    stats.mean.denoise = sum.denoise / static_cast<double>(steps);
    if (validation) {
      stats.has_validation = true;
      stats.val_bedroc = validation_bedroc(result.model, *validation, cfg.contrastive.metric);
      if (result.best_epoch < 0 || stats.val_bedroc > result.best_bedroc) {
        result.best_epoch = epoch;
        result.best_bedroc = stats.val_bedroc;
        result.best = result.model;
      }
    }
    result.history.push_back(stats);
    last_good = result.model;
    if (cfg.stop_at_loss > 0.0 && stats.mean.total < cfg.stop_at_loss) break;
  }
  if (!validation) {
    result.best = result.model;
    result.best_epoch = result.history.empty() ? -1 : result.history.back().epoch;
  } else if (result.best_epoch < 0) {
    result.best = result.model;  // no epoch finished; fall back to the current state
  }
  return result;
}

}  // namespace pocketdex
