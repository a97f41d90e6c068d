#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "pocketdex/encoder.hpp"
#include "pocketdex/io.hpp"

using namespace pocketdex;

namespace {

Structure random_structure(size_t n, std::mt19937_64& rng, double box = 6.0) {
  static const char* elems[] = {"C", "N", "O", "S"};
  std::uniform_real_distribution<double> u(-box, box);
  std::uniform_int_distribution<int> pick(0, 3);
  Structure s;
  for (size_t i = 0; i < n; ++i)
    s.atoms.push_back({elems[pick(rng)], {u(rng), u(rng), u(rng)}, {}, {}});
  return s;
}

EncoderConfig tiny_config() {
  EncoderConfig cfg;
  cfg.n_layers = 2;
  cfg.d_model = 8;
  cfg.n_heads = 2;
  cfg.d_head = 4;
  cfg.d_pair_basis = 4;
  cfg.d_out = 6;
  cfg.max_len = 16;
  return cfg;
}

double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double dn = 0.0, an = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dn += (a[i] - b[i]) * (a[i] - b[i]);
    an += a[i] * a[i];
  }
  return std::sqrt(dn) / std::sqrt(an);
}

}  // namespace

TEST_CASE("init_pair_repr is symmetric and distance-only") {
  EncoderConfig cfg = tiny_config();
  std::mt19937_64 rng(1);
  ModelParams params = init_model_params(cfg, rng);
  Structure s = random_structure(5, rng);
  TokenizedEntity e = tokenize(s);

  PairRepr q0 = init_pair_repr(e, params, cfg);
  REQUIRE(q0.head_mats.size() == 2);
  for (const auto& mat : q0.head_mats)
    for (size_t i = 0; i < mat.rows(); ++i)
      for (size_t j = 0; j < mat.cols(); ++j)
        CHECK(mat.at(i, j) == doctest::Approx(mat.at(j, i)).epsilon(1e-12));

  RigidTransform t = random_rigid_transform(rng);
  PairRepr q0t = init_pair_repr(tokenize(apply_rigid_transform(s, t)), params, cfg);
  for (size_t h = 0; h < q0.head_mats.size(); ++h)
    for (size_t i = 0; i < q0.head_mats[h].size(); ++i)
      CHECK(std::abs(q0.head_mats[h].data[i] - q0t.head_mats[h].data[i]) <= 1e-9);
}

TEST_CASE("init_pair_repr closed form for a unit Gaussian basis") {
  EncoderConfig cfg = tiny_config();
  cfg.d_pair_basis = 1;
  cfg.n_heads = 1;
  cfg.d_head = 8;
  std::mt19937_64 rng(2);
  ModelParams params = init_model_params(cfg, rng);
  params.pair_mu = Tensor({1}, {0.0});
  params.pair_sigma = Tensor({1}, {1.0});
  params.pair_w = Tensor({1, 1}, {1.0});
  params.pair_b = Tensor({1}, {0.0});

  Structure s;
  s.atoms.push_back({"C", {0, 0, 0}, {}, {}});
  s.atoms.push_back({"N", {1.5, 0, 0}, {}, {}});
  s.atoms.push_back({"O", {0, 2.0, 0}, {}, {}});
  TokenizedEntity e = tokenize(s);

  PairRepr q0 = init_pair_repr(e, params, cfg);
  const Tensor& mat = q0.head_mats[0];
  for (size_t i = 0; i < e.length(); ++i)
    for (size_t j = 0; j < e.length(); ++j) {
      double d = distance(e.coords[i], e.coords[j]);
      CHECK(mat.at(i, j) == doctest::Approx(std::exp(-0.5 * d * d)).epsilon(1e-12));
    }
  CHECK(mat.at(0, 0) == doctest::Approx(1.0));  // zero-distance diagonal
}

TEST_CASE("attention over a single visible token puts weight 1 on it") {
  EncoderConfig cfg = tiny_config();
  std::mt19937_64 rng(3);
  ModelParams params = init_model_params(cfg, rng);
  Structure s;
  s.atoms.push_back({"C", {0.5, -0.25, 1.0}, {}, {}});
  TokenizedEntity e = tokenize(s);  // CLS + one atom

  Tensor h0({e.length(), static_cast<size_t>(cfg.d_model)});
  for (size_t i = 0; i < e.length(); ++i)
    for (size_t j = 0; j < h0.cols(); ++j)
      h0.at(i, j) = params.type_embedding.at(static_cast<size_t>(e.type_ids[i]), j);
  PairRepr q0 = init_pair_repr(e, params, cfg);

  std::vector<bool> only_atom = {false, true};
  AttentionLayerResult res = attention_layer(h0, q0, params.layers[0], cfg, only_atom);
  for (const auto& probs : res.probs) {
    CHECK(probs.at(1, 1) == 1.0);
    CHECK(probs.at(1, 0) == 0.0);
  }
}

TEST_CASE("uniform attention for equal tokens and zero pair bias") {
  EncoderConfig cfg = tiny_config();
  std::mt19937_64 rng(4);
  ModelParams params = init_model_params(cfg, rng);
  const size_t t = 4;
  Tensor h0({t, static_cast<size_t>(cfg.d_model)});
  for (size_t i = 0; i < t; ++i)
    for (size_t j = 0; j < h0.cols(); ++j) h0.at(i, j) = 0.3 * static_cast<double>(j) - 0.7;
  PairRepr q0;
  for (int h = 0; h < cfg.n_heads; ++h) q0.head_mats.push_back(Tensor({t, t}));
  AttentionLayerResult res =
      attention_layer(h0, q0, params.layers[0], cfg, std::vector<bool>(t, true));
  for (const auto& probs : res.probs)
    for (size_t i = 0; i < t; ++i)
      for (size_t j = 0; j < t; ++j) CHECK(probs.at(i, j) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("pair update equals the pre-softmax score term") {
  EncoderConfig cfg = tiny_config();
  std::mt19937_64 rng(5);
  ModelParams params = init_model_params(cfg, rng);
  Structure s = random_structure(4, rng);
  TokenizedEntity e = tokenize(s);

  Tensor h0({e.length(), static_cast<size_t>(cfg.d_model)});
  for (size_t i = 0; i < e.length(); ++i)
    for (size_t j = 0; j < h0.cols(); ++j)
      h0.at(i, j) = params.type_embedding.at(static_cast<size_t>(e.type_ids[i]), j);
  PairRepr q0 = init_pair_repr(e, params, cfg);
  AttentionLayerResult res = attention_layer(h0, q0, params.layers[0], cfg, e.mask);
  for (size_t h = 0; h < res.pair.size(); ++h)
    for (size_t i = 0; i < res.pair[h].size(); ++i)
      CHECK(res.pair[h].data[i] == q0.head_mats[h].data[i] + res.scores[h].data[i]);
}

TEST_CASE("attention probabilities match a scalar re-implementation") {
  EncoderConfig cfg;
  cfg.n_layers = 1;
  cfg.d_model = 4;
  cfg.n_heads = 1;
  cfg.d_head = 4;
  cfg.d_pair_basis = 2;
  cfg.d_out = 3;
  cfg.max_len = 8;
  std::mt19937_64 rng(6);
  ModelParams params = init_model_params(cfg, rng);
  Structure s = random_structure(2, rng);
  TokenizedEntity e = tokenize(s);
  const size_t t = e.length();  // 3
  const size_t dm = 4;

  Tensor h0({t, dm});
  for (size_t i = 0; i < t; ++i)
    for (size_t j = 0; j < dm; ++j)
      h0.at(i, j) = params.type_embedding.at(static_cast<size_t>(e.type_ids[i]), j);
  PairRepr q0 = init_pair_repr(e, params, cfg);
  AttentionLayerResult res = attention_layer(h0, q0, params.layers[0], cfg, e.mask);

  const LayerParams& lp = params.layers[0];
  auto layernorm_row = [&](size_t row, std::vector<double>& out) {
    double mean = 0, var = 0;
    for (size_t j = 0; j < dm; ++j) mean += h0.at(row, j);
    mean /= static_cast<double>(dm);
    for (size_t j = 0; j < dm; ++j) var += (h0.at(row, j) - mean) * (h0.at(row, j) - mean);
    var /= static_cast<double>(dm);
    out.resize(dm);
    for (size_t j = 0; j < dm; ++j)
      out[j] = lp.ln1_g.data[j] * (h0.at(row, j) - mean) / std::sqrt(var + 1e-5) + lp.ln1_b.data[j];
  };
  for (size_t i = 0; i < t; ++i) {
    std::vector<double> ln_i, qi(dm, 0.0);
    layernorm_row(i, ln_i);
    for (size_t c = 0; c < dm; ++c) {
      for (size_t r = 0; r < dm; ++r) qi[c] += ln_i[r] * lp.wq.at(r, c);
      qi[c] += lp.bq.data[c];
    }
    std::vector<double> logits(t);
    for (size_t k = 0; k < t; ++k) {
      std::vector<double> ln_k, kk(dm, 0.0);
      layernorm_row(k, ln_k);
      for (size_t c = 0; c < dm; ++c) {
        for (size_t r = 0; r < dm; ++r) kk[c] += ln_k[r] * lp.wk.at(r, c);
        kk[c] += lp.bk.data[c];
      }
      double dotv = 0;
      for (size_t c = 0; c < dm; ++c) dotv += qi[c] * kk[c];
      logits[k] = dotv / 2.0 + q0.head_mats[0].at(i, k);
    }
    double mx = *std::max_element(logits.begin(), logits.end());
    double denom = 0;
    for (double l : logits) denom += std::exp(l - mx);
    for (size_t k = 0; k < t; ++k)
      CHECK(res.probs[0].at(i, k) ==
            doctest::Approx(std::exp(logits[k] - mx) / denom).epsilon(1e-6));
  }
}

TEST_CASE("encode is deterministic") {
  EncoderConfig cfg = tiny_config();
  std::mt19937_64 rng(7);
  ModelParams params = init_model_params(cfg, rng);
  TokenizedEntity e = tokenize(random_structure(6, rng));
  std::vector<double> a = encode(e, params, cfg);
  std::vector<double> b = encode(e, params, cfg);
  CHECK(a == b);  // bitwise
}

TEST_CASE("encode is rigid-transform invariant") {
  EncoderConfig cfg = tiny_config();
  std::mt19937_64 rng(8);
  ModelParams params = init_model_params(cfg, rng);
  for (int rep = 0; rep < 10; ++rep) {
    Structure s = random_structure(5 + rep % 4, rng);
    RigidTransform t = random_rigid_transform(rng);
    std::vector<double> a = encode(tokenize(s), params, cfg);
    std::vector<double> b = encode(tokenize(apply_rigid_transform(s, t)), params, cfg);
    CHECK(rel_diff(a, b) <= 1e-5);
  }
}

TEST_CASE("encode is invariant to atom permutations") {
  EncoderConfig cfg = tiny_config();
  std::mt19937_64 rng(9);
  ModelParams params = init_model_params(cfg, rng);
  Structure s = random_structure(4, rng);
  std::vector<double> base = encode(tokenize(s), params, cfg);

  std::vector<size_t> perm = {0, 1, 2, 3};
  do {
    Structure shuffled;
    for (size_t i : perm) shuffled.atoms.push_back(s.atoms[i]);
    CHECK(rel_diff(base, encode(tokenize(shuffled), params, cfg)) <= 1e-5);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("padding slots do not change the embedding") {
  EncoderConfig cfg = tiny_config();
  std::mt19937_64 rng(10);
  ModelParams params = init_model_params(cfg, rng);
  TokenizedEntity e = tokenize(random_structure(5, rng));
  std::vector<double> a = encode(e, params, cfg);
  std::vector<double> b = encode(pad_entity(e, e.length() + 4), params, cfg);
  CHECK(a == b);  // bitwise under the fixed evaluation order
}

TEST_CASE("encode rejects entities beyond max_len") {
  EncoderConfig cfg = tiny_config();
  std::mt19937_64 rng(11);
  ModelParams params = init_model_params(cfg, rng);
  TokenizedEntity e = tokenize(random_structure(static_cast<size_t>(cfg.max_len), rng));
  CHECK_THROWS_AS(encode(e, params, cfg), InvalidArgument);
}

TEST_CASE("masked_type_logits contract") {
  EncoderConfig cfg = tiny_config();
  std::mt19937_64 rng(12);
  ModelParams params = init_model_params(cfg, rng);
  Structure s;
  s.atoms.push_back({"C", {0.3, 0.1, -0.2}, {}, {}});
  TokenizedEntity e = tokenize(s);
  TokenizedEntity masked = e;
  masked.type_ids[1] = Vocab::kMask;

  CHECK_THROWS_AS(masked_type_logits(masked, {}, params, cfg), InvalidArgument);
  CHECK_THROWS_AS(masked_type_logits(masked, {0}, params, cfg), InvalidArgument);

  Tensor logits = masked_type_logits(masked, {1}, params, cfg);
  CHECK(logits.rows() == 1);
  CHECK(logits.cols() == static_cast<size_t>(cfg.vocab_size));
}

TEST_CASE("pair_distance_pred is symmetric and non-negative") {
  EncoderConfig cfg = tiny_config();
  std::mt19937_64 rng(13);
  ModelParams params = init_model_params(cfg, rng);
  TokenizedEntity e = tokenize(random_structure(5, rng));
  Tensor pred = pair_distance_pred(e, params, cfg);
  REQUIRE(pred.rows() == e.length());
  for (size_t i = 0; i < pred.rows(); ++i)
    for (size_t j = 0; j < pred.cols(); ++j) {
      CHECK(pred.at(i, j) == pred.at(j, i));
      CHECK(pred.at(i, j) >= 0.0);
    }
}

TEST_CASE("pair update rule holds through the full stack") {
  EncoderConfig cfg = tiny_config();
  std::mt19937_64 rng(14);
  ModelParams params = init_model_params(cfg, rng);
  TokenizedEntity e = tokenize(random_structure(4, rng));
  Tape tape;
  ParamVars pv = register_params(tape, params, false);
  EncoderGraph g = build_encoder_graph(tape, e, pv, cfg, true);
  REQUIRE(g.pair_layers.size() == static_cast<size_t>(cfg.n_layers) + 1);
  for (size_t l = 0; l < static_cast<size_t>(cfg.n_layers); ++l)
    for (size_t h = 0; h < static_cast<size_t>(cfg.n_heads); ++h) {
      const Tensor& before = tape.val(g.pair_layers[l][h]);
      const Tensor& after = tape.val(g.pair_layers[l + 1][h]);
      const Tensor& score = tape.val(g.attn_scores[l][h]);
      for (size_t i = 0; i < before.size(); ++i)
        CHECK(after.data[i] == before.data[i] + score.data[i]);
    }
}

TEST_CASE("checkpoint round-trips bitwise") {
  namespace fs = std::filesystem;
  EncoderConfig cfg = tiny_config();
  DualEncoder model = init_dual_encoder(cfg, 99);
  fs::path dir = fs::temp_directory_path() / "pocketdex_ckpt_test";
  fs::create_directories(dir);
  const std::string p1 = (dir / "a.dcmp").string();
  const std::string p2 = (dir / "b.dcmp").string();
  save_checkpoint(model, p1);
  DualEncoder loaded = load_checkpoint(p1);
  save_checkpoint(loaded, p2);

  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(b1 == b2);

  std::mt19937_64 rng(15);
  TokenizedEntity e = tokenize(random_structure(5, rng));
  std::vector<double> a = encode(e, loaded.pocket, loaded.config);
  std::vector<double> b = encode(e, load_checkpoint(p2).pocket, cfg);
  CHECK(a == b);
  fs::remove_all(dir);
}

TEST_CASE("checkpoint rejects corrupted headers") {
  namespace fs = std::filesystem;
  EncoderConfig cfg = tiny_config();
  DualEncoder model = init_dual_encoder(cfg, 3);
  fs::path dir = fs::temp_directory_path() / "pocketdex_ckpt_bad";
  fs::create_directories(dir);
  const std::string good = (dir / "good.dcmp").string();
  save_checkpoint(model, good);
  std::ifstream in(good, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();

  auto write_variant = [&](const std::string& name, std::string data) {
    std::ofstream out((dir / name).string(), std::ios::binary);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    return (dir / name).string();
  };

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(load_checkpoint(write_variant("magic.dcmp", bad_magic)), BadMagicError);

  std::string bad_version = bytes;
  bad_version[4] = 9;
  CHECK_THROWS_AS(load_checkpoint(write_variant("ver.dcmp", bad_version)), VersionMismatchError);

  std::string truncated = bytes.substr(0, bytes.size() - 10);
  CHECK_THROWS_AS(load_checkpoint(write_variant("trunc.dcmp", truncated)), TruncatedFileError);
  fs::remove_all(dir);
}
