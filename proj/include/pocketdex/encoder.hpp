#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "pocketdex/binio.hpp"
#include "pocketdex/structure.hpp"
#include "pocketdex/tape.hpp"
#include "pocketdex/tensor.hpp"

namespace pocketdex {

struct EncoderConfig {
  int n_layers = 4;
  int d_model = 64;
  int n_heads = 4;
  int d_head = 16;
  int d_pair_basis = 16;  // Gaussian distance basis size
  int d_out = 32;
  int max_len = 128;      // maximum entity length including [CLS]
  int vocab_size = Vocab::standard().size();

  int d_ffn() const { return 4 * d_model; }

  void validate() const {
    if (n_layers <= 0 || d_model <= 0 || n_heads <= 0 || d_head <= 0 || d_pair_basis <= 0 ||
        d_out <= 0 || max_len <= 0 || vocab_size <= 4)
      throw InvalidArgument("encoder config: all dimensions must be positive");
    if (d_model != n_heads * d_head)
      throw InvalidArgument("encoder config: d_model must equal n_heads * d_head");
  }
};

struct LayerParams {
  Tensor ln1_g, ln1_b;
  Tensor wq, bq, wk, bk, wv, bv;
  Tensor wo, bo;
  Tensor ln2_g, ln2_b;
  Tensor ffn_w1, ffn_b1, ffn_w2, ffn_b2;
};

// All trainable tensors of one tower, including the pretraining heads.
struct ModelParams {
  Tensor type_embedding;  // vocab x d_model
  std::vector<LayerParams> layers;
  Tensor pair_mu, pair_sigma;  // d_pair_basis
  Tensor pair_w, pair_b;       // d_pair_basis x n_heads, n_heads
  Tensor final_ln_g, final_ln_b;
  Tensor out_w, out_b;      // d_model x d_out, d_out
  Tensor mtype_w, mtype_b;  // d_model x vocab
  Tensor pdist_w, pdist_b;  // n_heads x 1, 1
};

// Visits every tensor of a tower in its declared (= serialized) order.
template <typename Params, typename Fn>
void for_each_tensor(Params& p, Fn&& fn) {
  fn("type_embedding", p.type_embedding);
  for (size_t l = 0; l < p.layers.size(); ++l) {
    auto& lay = p.layers[l];
    const std::string pre = "layer" + std::to_string(l) + ".";
    fn(pre + "ln1_g", lay.ln1_g);
    fn(pre + "ln1_b", lay.ln1_b);
    fn(pre + "wq", lay.wq);
    fn(pre + "bq", lay.bq);
    fn(pre + "wk", lay.wk);
    fn(pre + "bk", lay.bk);
    fn(pre + "wv", lay.wv);
    fn(pre + "bv", lay.bv);
    fn(pre + "wo", lay.wo);
    fn(pre + "bo", lay.bo);
    fn(pre + "ln2_g", lay.ln2_g);
    fn(pre + "ln2_b", lay.ln2_b);
    fn(pre + "ffn_w1", lay.ffn_w1);
    fn(pre + "ffn_b1", lay.ffn_b1);
    fn(pre + "ffn_w2", lay.ffn_w2);
    fn(pre + "ffn_b2", lay.ffn_b2);
  }
  fn("pair_mu", p.pair_mu);
  fn("pair_sigma", p.pair_sigma);
  fn("pair_w", p.pair_w);
  fn("pair_b", p.pair_b);
  fn("final_ln_g", p.final_ln_g);
  fn("final_ln_b", p.final_ln_b);
  fn("out_w", p.out_w);
  fn("out_b", p.out_b);
  fn("mtype_w", p.mtype_w);
  fn("mtype_b", p.mtype_b);
  fn("pdist_w", p.pdist_w);
  fn("pdist_b", p.pdist_b);
}

namespace detail {

inline Tensor fan_in_uniform(size_t rows, size_t cols, std::mt19937_64& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  return Tensor::uniform({rows, cols}, -bound, bound, rng);
}

}  // namespace detail

inline ModelParams init_model_params(const EncoderConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  const size_t dm = static_cast<size_t>(cfg.d_model);
  const size_t dv = static_cast<size_t>(cfg.vocab_size);
  const size_t db = static_cast<size_t>(cfg.d_pair_basis);
  const size_t dh = static_cast<size_t>(cfg.n_heads);
  ModelParams p;
  p.type_embedding = detail::fan_in_uniform(dv, dm, rng);
  p.layers.resize(static_cast<size_t>(cfg.n_layers));
  for (auto& lay : p.layers) {
    lay.ln1_g = Tensor::full({dm}, 1.0);
    lay.ln1_b = Tensor::zeros({dm});
    lay.wq = detail::fan_in_uniform(dm, dm, rng);
    lay.bq = Tensor::zeros({dm});
    lay.wk = detail::fan_in_uniform(dm, dm, rng);
    lay.bk = Tensor::zeros({dm});
    lay.wv = detail::fan_in_uniform(dm, dm, rng);
    lay.bv = Tensor::zeros({dm});
    lay.wo = detail::fan_in_uniform(dm, dm, rng);
    lay.bo = Tensor::zeros({dm});
    lay.ln2_g = Tensor::full({dm}, 1.0);
    lay.ln2_b = Tensor::zeros({dm});
    lay.ffn_w1 = detail::fan_in_uniform(dm, static_cast<size_t>(cfg.d_ffn()), rng);
    lay.ffn_b1 = Tensor::zeros({static_cast<size_t>(cfg.d_ffn())});
    lay.ffn_w2 = detail::fan_in_uniform(static_cast<size_t>(cfg.d_ffn()), dm, rng);
    lay.ffn_b2 = Tensor::zeros({dm});
  }
  // Distance basis: centers spread over 0..15 A, widths equal to the spacing.
  p.pair_mu = Tensor({db});
  p.pair_sigma = Tensor({db});
  double spacing = db > 1 ? 15.0 / static_cast<double>(db - 1) : 1.0;
  for (size_t b = 0; b < db; ++b) {
    p.pair_mu.data[b] = spacing * static_cast<double>(b);
    p.pair_sigma.data[b] = spacing;
  }
  p.pair_w = detail::fan_in_uniform(db, dh, rng);
  p.pair_b = Tensor::zeros({dh});
  p.final_ln_g = Tensor::full({dm}, 1.0);
  p.final_ln_b = Tensor::zeros({dm});
  p.out_w = detail::fan_in_uniform(dm, static_cast<size_t>(cfg.d_out), rng);
  p.out_b = Tensor::zeros({static_cast<size_t>(cfg.d_out)});
  p.mtype_w = detail::fan_in_uniform(dm, dv, rng);
  p.mtype_b = Tensor::zeros({dv});
  p.pdist_w = detail::fan_in_uniform(dh, 1, rng);
  p.pdist_b = Tensor::zeros({1});
  return p;
}

// Tape handles for one tower's tensors, in for_each_tensor order.
struct ParamVars {
  std::vector<Tape::VarId> flat;
  Tape::VarId type_embedding;
  struct LayerVars {
    Tape::VarId ln1_g, ln1_b, wq, bq, wk, bk, wv, bv, wo, bo, ln2_g, ln2_b, ffn_w1, ffn_b1,
        ffn_w2, ffn_b2;
  };
  std::vector<LayerVars> layers;
  Tape::VarId pair_mu, pair_sigma, pair_w, pair_b;
  Tape::VarId final_ln_g, final_ln_b, out_w, out_b, mtype_w, mtype_b, pdist_w, pdist_b;
};

inline ParamVars register_params(Tape& tape, const ModelParams& p, bool trainable) {
  ParamVars v;
  auto reg = [&](const Tensor& t) {
    Tape::VarId id = trainable ? tape.leaf(t) : tape.constant(t);
    v.flat.push_back(id);
    return id;
  };
  v.type_embedding = reg(p.type_embedding);
  v.layers.resize(p.layers.size());
  for (size_t l = 0; l < p.layers.size(); ++l) {
    auto& s = p.layers[l];
    auto& d = v.layers[l];
    d.ln1_g = reg(s.ln1_g);
    d.ln1_b = reg(s.ln1_b);
    d.wq = reg(s.wq);
    d.bq = reg(s.bq);
    d.wk = reg(s.wk);
    d.bk = reg(s.bk);
    d.wv = reg(s.wv);
    d.bv = reg(s.bv);
    d.wo = reg(s.wo);
    d.bo = reg(s.bo);
    d.ln2_g = reg(s.ln2_g);
    d.ln2_b = reg(s.ln2_b);
    d.ffn_w1 = reg(s.ffn_w1);
    d.ffn_b1 = reg(s.ffn_b1);
    d.ffn_w2 = reg(s.ffn_w2);
    d.ffn_b2 = reg(s.ffn_b2);
  }
  v.pair_mu = reg(p.pair_mu);
  v.pair_sigma = reg(p.pair_sigma);
  v.pair_w = reg(p.pair_w);
  v.pair_b = reg(p.pair_b);
  v.final_ln_g = reg(p.final_ln_g);
  v.final_ln_b = reg(p.final_ln_b);
  v.out_w = reg(p.out_w);
  v.out_b = reg(p.out_b);
  v.mtype_w = reg(p.mtype_w);
  v.mtype_b = reg(p.mtype_b);
  v.pdist_w = reg(p.pdist_w);
  v.pdist_b = reg(p.pdist_b);
  return v;
}

// Per-head pairwise bias channels for one entity; head_mats[h] is (L+1)x(L+1).
struct PairRepr {
  std::vector<Tensor> head_mats;
  size_t length() const { return head_mats.empty() ? 0 : head_mats[0].rows(); }
};

namespace detail {

inline Tensor flat_distances(const TokenizedEntity& e) {
  const size_t t = e.length();
  Tensor d({t * t});
  for (size_t i = 0; i < t; ++i)
    for (size_t j = 0; j < t; ++j) d.data[i * t + j] = distance(e.coords[i], e.coords[j]);
  return d;
}

// Additive attention bias: -1e9 on padded key columns.
inline Tensor padding_bias(const TokenizedEntity& e) {
  const size_t t = e.length();
  Tensor bias({t, t});
  for (size_t j = 0; j < t; ++j) {
    if (e.mask[j]) continue;
    for (size_t i = 0; i < t; ++i) bias.at(i, j) = -1e9;
  }
  return bias;
}

}  // namespace detail

struct EncoderGraph {
  Tape::VarId embedding = -1;      // [1 x d_out]
  Tape::VarId final_hidden = -1;   // [T x d_model], after the final layernorm
  std::vector<Tape::VarId> layer_hidden;            // h after each layer; [0] is the input
  std::vector<Tape::VarId> final_pair;              // q per head after the last layer
  std::vector<std::vector<Tape::VarId>> attn_probs;   // per layer, per head (capture only)
  std::vector<std::vector<Tape::VarId>> attn_scores;  // QK^T/sqrt(d) terms (capture only)
  std::vector<std::vector<Tape::VarId>> pair_layers;  // q per layer (entry 0 = initial)
};

inline EncoderGraph build_encoder_graph(Tape& tape, const TokenizedEntity& e, const ParamVars& pv,
                                        const EncoderConfig& cfg, bool capture = false) {
  const size_t t = e.length();
  if (t == 0) throw InvalidArgument("encode: empty entity");
  if (t > static_cast<size_t>(cfg.max_len))
    throw InvalidArgument("encode: entity length " + std::to_string(t) + " exceeds max_len " +
                          std::to_string(cfg.max_len));
  const size_t heads = static_cast<size_t>(cfg.n_heads);
  const size_t dh = static_cast<size_t>(cfg.d_head);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(cfg.d_head));

  EncoderGraph g;
  std::vector<size_t> ids(e.type_ids.begin(), e.type_ids.end());
  Tape::VarId h = tape.row_gather(pv.type_embedding, ids);
  g.layer_hidden.push_back(h);

  // q^0 from the Gaussian distance basis
  Tape::VarId rbf = tape.rbf_expand(detail::flat_distances(e), pv.pair_mu, pv.pair_sigma);
  Tape::VarId q0_all = tape.add_row_broadcast(tape.matmul(rbf, pv.pair_w), pv.pair_b);
  std::vector<Tape::VarId> q(heads);
  for (size_t hd = 0; hd < heads; ++hd)
    q[hd] = tape.reshape(tape.col_range(q0_all, hd, hd + 1), {t, t});
  if (capture) g.pair_layers.push_back(q);

  const Tensor pad_bias = detail::padding_bias(e);

  for (int layer = 0; layer < cfg.n_layers; ++layer) {
    const auto& lv = pv.layers[static_cast<size_t>(layer)];
    Tape::VarId ln = tape.layernorm(h, lv.ln1_g, lv.ln1_b);
    Tape::VarId qp = tape.add_row_broadcast(tape.matmul(ln, lv.wq), lv.bq);
    Tape::VarId kp = tape.add_row_broadcast(tape.matmul(ln, lv.wk), lv.bk);
    Tape::VarId vp = tape.add_row_broadcast(tape.matmul(ln, lv.wv), lv.bv);

    std::vector<Tape::VarId> head_out(heads), probs(heads), scores(heads);
    for (size_t hd = 0; hd < heads; ++hd) {
      Tape::VarId qh = tape.col_range(qp, hd * dh, (hd + 1) * dh);
      Tape::VarId kh = tape.col_range(kp, hd * dh, (hd + 1) * dh);
      Tape::VarId vh = tape.col_range(vp, hd * dh, (hd + 1) * dh);
      Tape::VarId s = tape.scale(tape.matmul(qh, tape.transpose(kh)), inv_sqrt_d);
      q[hd] = tape.add(q[hd], s);  // pair update: new q is the pre-softmax logits
      Tape::VarId a = tape.softmax_rows(q[hd], &pad_bias);
      head_out[hd] = tape.matmul(a, vh);
      scores[hd] = s;
      probs[hd] = a;
    }
    Tape::VarId attn =
        tape.add_row_broadcast(tape.matmul(tape.concat_cols(head_out), lv.wo), lv.bo);
    h = tape.add(h, attn);

    Tape::VarId ln2 = tape.layernorm(h, lv.ln2_g, lv.ln2_b);
    Tape::VarId f1 = tape.gelu(tape.add_row_broadcast(tape.matmul(ln2, lv.ffn_w1), lv.ffn_b1));
    Tape::VarId f2 = tape.add_row_broadcast(tape.matmul(f1, lv.ffn_w2), lv.ffn_b2);
    h = tape.add(h, f2);

    g.layer_hidden.push_back(h);
    if (capture) {
      g.attn_probs.push_back(std::move(probs));
      g.attn_scores.push_back(std::move(scores));
      g.pair_layers.push_back(q);
    }
  }

  g.final_hidden = tape.layernorm(h, pv.final_ln_g, pv.final_ln_b);
  Tape::VarId cls = tape.row_gather(g.final_hidden, {TokenizedEntity::cls_index});
  g.embedding = tape.add_row_broadcast(tape.matmul(cls, pv.out_w), pv.out_b);
  g.final_pair = q;
  return g;
}

// Symmetric non-negative distance predictions from the final pair channels.
inline Tape::VarId build_pair_distance_head(Tape& tape, const EncoderGraph& g,
                                            const ParamVars& pv) {
  const size_t t = tape.val(g.final_pair[0]).rows();
  std::vector<Tape::VarId> cols;
  cols.reserve(g.final_pair.size());
  for (Tape::VarId qh : g.final_pair) cols.push_back(tape.reshape(qh, {t * t, 1}));
  Tape::VarId chan = tape.concat_cols(cols);
  Tape::VarId pred = tape.add_row_broadcast(tape.matmul(chan, pv.pdist_w), pv.pdist_b);
  Tape::VarId mat = tape.reshape(tape.softplus(pred), {t, t});
  return tape.scale(tape.add(mat, tape.transpose(mat)), 0.5);
}

inline Tape::VarId build_masked_type_head(Tape& tape, const EncoderGraph& g, const ParamVars& pv,
                                          const std::vector<size_t>& positions) {
  Tape::VarId rows = tape.row_gather(g.final_hidden, positions);
  return tape.add_row_broadcast(tape.matmul(rows, pv.mtype_w), pv.mtype_b);
}

// ---- plain (value-only) entry points ----

inline PairRepr init_pair_repr(const TokenizedEntity& e, const ModelParams& p,
                               const EncoderConfig& cfg) {
  if (e.length() > static_cast<size_t>(cfg.max_len))
    throw InvalidArgument("init_pair_repr: entity exceeds max_len");
  Tape tape;
  ParamVars pv = register_params(tape, p, false);
  const size_t t = e.length();
  Tape::VarId rbf = tape.rbf_expand(detail::flat_distances(e), pv.pair_mu, pv.pair_sigma);
  Tape::VarId q0_all = tape.add_row_broadcast(tape.matmul(rbf, pv.pair_w), pv.pair_b);
  PairRepr repr;
  for (int hd = 0; hd < cfg.n_heads; ++hd) {
    Tape::VarId qh = tape.reshape(
        tape.col_range(q0_all, static_cast<size_t>(hd), static_cast<size_t>(hd) + 1), {t, t});
    repr.head_mats.push_back(tape.val(qh));
  }
  return repr;
}

inline std::vector<double> encode(const TokenizedEntity& e, const ModelParams& p,
                                  const EncoderConfig& cfg) {
  Tape tape;
  ParamVars pv = register_params(tape, p, false);
  EncoderGraph g = build_encoder_graph(tape, e, pv, cfg);
  return tape.val(g.embedding).data;
}

inline Tensor masked_type_logits(const TokenizedEntity& masked_entity,
                                 const std::vector<size_t>& positions, const ModelParams& p,
                                 const EncoderConfig& cfg) {
  if (positions.empty()) throw InvalidArgument("masked_type_logits: no positions given");
  for (size_t pos : positions) {
    if (pos == TokenizedEntity::cls_index)
      throw InvalidArgument("masked_type_logits: cannot mask the [CLS] token");
    if (pos >= masked_entity.length())
      throw InvalidArgument("masked_type_logits: position out of range");
  }
  Tape tape;
  ParamVars pv = register_params(tape, p, false);
  EncoderGraph g = build_encoder_graph(tape, masked_entity, pv, cfg);
  return tape.val(build_masked_type_head(tape, g, pv, positions));
}

inline Tensor pair_distance_pred(const TokenizedEntity& e, const ModelParams& p,
                                 const EncoderConfig& cfg) {
  Tape tape;
  ParamVars pv = register_params(tape, p, false);
  EncoderGraph g = build_encoder_graph(tape, e, pv, cfg);
  return tape.val(build_pair_distance_head(tape, g, pv));
}

// Single attention layer on explicit inputs; returns the updated hidden
// states, updated pair bias, attention probabilities and the raw QK^T/sqrt(d)
// scores. Used directly by tests.
struct AttentionLayerResult {
  Tensor hidden;                  // [T x d_model]
  std::vector<Tensor> pair;       // q' per head
  std::vector<Tensor> probs;      // A per head
  std::vector<Tensor> scores;     // QK^T/sqrt(d) per head
};

inline AttentionLayerResult attention_layer(const Tensor& hidden, const PairRepr& pair,
                                            const LayerParams& lp, const EncoderConfig& cfg,
                                            const std::vector<bool>& mask) {
  const size_t t = hidden.rows();
  if (pair.head_mats.size() != static_cast<size_t>(cfg.n_heads) || pair.length() != t)
    throw InvalidArgument("attention_layer: pair repr shape mismatch");
  Tape tape;
  Tape::VarId h = tape.constant(hidden);
  TokenizedEntity fake;
  fake.mask = mask;
  fake.type_ids.assign(t, 0);
  fake.coords.assign(t, Vec3{});
  const Tensor pad_bias = detail::padding_bias(fake);
  const size_t dh = static_cast<size_t>(cfg.d_head);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(cfg.d_head));

  Tape::VarId ln = tape.layernorm(h, tape.constant(lp.ln1_g), tape.constant(lp.ln1_b));
  Tape::VarId qp = tape.add_row_broadcast(tape.matmul(ln, tape.constant(lp.wq)), tape.constant(lp.bq));
  Tape::VarId kp = tape.add_row_broadcast(tape.matmul(ln, tape.constant(lp.wk)), tape.constant(lp.bk));
  Tape::VarId vp = tape.add_row_broadcast(tape.matmul(ln, tape.constant(lp.wv)), tape.constant(lp.bv));

  AttentionLayerResult out;
  std::vector<Tape::VarId> head_out;
  for (size_t hd = 0; hd < static_cast<size_t>(cfg.n_heads); ++hd) {
    Tape::VarId qh = tape.col_range(qp, hd * dh, (hd + 1) * dh);
    Tape::VarId kh = tape.col_range(kp, hd * dh, (hd + 1) * dh);
    Tape::VarId vh = tape.col_range(vp, hd * dh, (hd + 1) * dh);
    Tape::VarId s = tape.scale(tape.matmul(qh, tape.transpose(kh)), inv_sqrt_d);
    Tape::VarId qn = tape.add(tape.constant(pair.head_mats[hd]), s);
    Tape::VarId a = tape.softmax_rows(qn, &pad_bias);
    head_out.push_back(tape.matmul(a, vh));
    out.pair.push_back(tape.val(qn));
    out.probs.push_back(tape.val(a));
    out.scores.push_back(tape.val(s));
  }
  Tape::VarId attn = tape.add_row_broadcast(tape.matmul(tape.concat_cols(head_out), tape.constant(lp.wo)),
                                            tape.constant(lp.bo));
  Tape::VarId h1 = tape.add(h, attn);
  Tape::VarId ln2 = tape.layernorm(h1, tape.constant(lp.ln2_g), tape.constant(lp.ln2_b));
  Tape::VarId f1 = tape.gelu(tape.add_row_broadcast(tape.matmul(ln2, tape.constant(lp.ffn_w1)),
                                                    tape.constant(lp.ffn_b1)));
  Tape::VarId f2 = tape.add_row_broadcast(tape.matmul(f1, tape.constant(lp.ffn_w2)),
                                          tape.constant(lp.ffn_b2));
  out.hidden = tape.val(tape.add(h1, f2));
  return out;
}

// ---- dual-tower checkpoint ----

struct DualEncoder {
  EncoderConfig config;
  ModelParams pocket;
  ModelParams molecule;
};

inline DualEncoder init_dual_encoder(const EncoderConfig& cfg, uint64_t seed) {
  DualEncoder d;
  d.config = cfg;
  std::mt19937_64 rng_p(seed * 2654435761u + 1);
  std::mt19937_64 rng_m(seed * 2654435761u + 2);
  d.pocket = init_model_params(cfg, rng_p);
  d.molecule = init_model_params(cfg, rng_m);
  return d;
}

inline constexpr char kCheckpointMagic[4] = {'D', 'C', 'M', 'P'};
inline constexpr uint32_t kCheckpointVersion = 1;

inline void save_checkpoint(const DualEncoder& model, const std::string& path) {
  binio::atomic_write_file(path, [&](std::ostream& out) {
    binio::write_bytes(out, kCheckpointMagic, 4);
    binio::write_u32le(out, kCheckpointVersion);
    const EncoderConfig& c = model.config;
    for (int v : {c.n_layers, c.d_model, c.n_heads, c.d_head, c.d_pair_basis, c.d_out, c.max_len,
                  c.vocab_size})
      binio::write_u32le(out, static_cast<uint32_t>(v));

    struct Entry {
      std::string name;
      const Tensor* tensor;
    };
    std::vector<Entry> entries;
    auto collect = [&](const std::string& prefix, const ModelParams& p) {
      for_each_tensor(p, [&](const std::string& name, const Tensor& t) {
        entries.push_back({prefix + name, &t});
      });
    };
    collect("pocket.", model.pocket);
    collect("molecule.", model.molecule);

    binio::write_u32le(out, static_cast<uint32_t>(entries.size()));
    for (const auto& e : entries) {
      binio::write_u16le(out, static_cast<uint16_t>(e.name.size()));
      binio::write_bytes(out, e.name.data(), e.name.size());
      binio::write_u8(out, static_cast<uint8_t>(e.tensor->shape.size()));
      for (size_t d : e.tensor->shape) binio::write_u32le(out, static_cast<uint32_t>(d));
    }
    for (const auto& e : entries)
      for (double v : e.tensor->data) binio::write_f32le(out, static_cast<float>(v));
  });
}

inline DualEncoder load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open checkpoint: " + path);
  char magic[4];
  binio::read_bytes(in, magic, 4, "checkpoint magic");
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw BadMagicError("not a model checkpoint: " + path);
  uint32_t version = binio::read_u32le(in, "checkpoint version");
  if (version != kCheckpointVersion)
    throw VersionMismatchError("unsupported checkpoint version " + std::to_string(version));

  EncoderConfig cfg;
  cfg.n_layers = static_cast<int>(binio::read_u32le(in, "config"));
  cfg.d_model = static_cast<int>(binio::read_u32le(in, "config"));
  cfg.n_heads = static_cast<int>(binio::read_u32le(in, "config"));
  cfg.d_head = static_cast<int>(binio::read_u32le(in, "config"));
  cfg.d_pair_basis = static_cast<int>(binio::read_u32le(in, "config"));
  cfg.d_out = static_cast<int>(binio::read_u32le(in, "config"));
  cfg.max_len = static_cast<int>(binio::read_u32le(in, "config"));
  cfg.vocab_size = static_cast<int>(binio::read_u32le(in, "config"));
  cfg.validate();

  DualEncoder model;
  model.config = cfg;
  std::mt19937_64 dummy(0);
  model.pocket = init_model_params(cfg, dummy);
  model.molecule = init_model_params(cfg, dummy);

  std::vector<std::pair<std::string, Tensor*>> expected;
  auto collect = [&](const std::string& prefix, ModelParams& p) {
    for_each_tensor(p, [&](const std::string& name, Tensor& t) {
      expected.emplace_back(prefix + name, &t);
    });
  };
  collect("pocket.", model.pocket);
  collect("molecule.", model.molecule);

  uint32_t count = binio::read_u32le(in, "tensor count");
  if (count != expected.size())
    throw FormatError("checkpoint lists " + std::to_string(count) + " tensors, expected " +
                      std::to_string(expected.size()));
  for (auto& [name, tensor] : expected) {
    uint16_t len = binio::read_u16le(in, "tensor name length");
    std::string got(len, '\0');
    binio::read_bytes(in, got.data(), len, "tensor name");
    if (got != name) throw FormatError("unexpected tensor '" + got + "', expected '" + name + "'");
    uint8_t rank = binio::read_u8(in, "tensor rank");
    std::vector<size_t> shape(rank);
    for (auto& d : shape) d = binio::read_u32le(in, "tensor dim");
    if (shape != tensor->shape)
      throw FormatError("tensor '" + name + "' has unexpected shape");
  }
  for (auto& [name, tensor] : expected) {
    for (auto& v : tensor->data) v = static_cast<double>(binio::read_f32le(in, "tensor data"));
    if (!tensor->all_finite()) throw FormatError("tensor '" + name + "' contains non-finite values");
  }
  return model;
}

}  // namespace pocketdex
