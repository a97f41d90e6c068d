// pocketdex: pocket-molecule screening toolkit.
//
// Subcommands: index build|info, embed, screen, fish, train, eval, augment,
// bench, gradcheck, selftest. Exit codes: 0 success, 1 domain error,
// 2 usage error. Every file output is written atomically (temp + rename).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "pocketdex/pocketdex.hpp"
#include "pocketdex/selftest.hpp"

namespace fs = std::filesystem;
using namespace pocketdex;

namespace {

int default_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

// Emit to stdout, or atomically to --out when given.
void emit_output(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  binio::atomic_write_file(out_path, [&](std::ostream& os) { os << content; });
}

std::string config_header(const std::string& line) { return "# pocketdex " + line + "\n"; }

std::string format_ranked(const RankedResult& result, const std::string& header_line) {
  std::ostringstream out;
  out << config_header(header_line);
  out << "rank,id,score\n";
  char buf[64];
  for (size_t i = 0; i < result.entries.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.6f", result.entries[i].score);
    out << (i + 1) << "," << result.entries[i].id << "," << buf << "\n";
  }
  return out.str();
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  return out;
}

// ---- train support ----

struct TrainFileConfig {
  TrainConfig cfg;
  void apply(const std::string& key, const std::string& value) {
    auto d = [&] { return std::stod(value); };
    auto i = [&] { return std::stoi(value); };
    if (key == "lr") cfg.lr = d();
    else if (key == "batch_size") cfg.batch_size = i();
    else if (key == "epochs") cfg.epochs = i();
    else if (key == "seed") cfg.seed = static_cast<uint64_t>(std::stoull(value));
    else if (key == "contrastive_weight") cfg.contrastive_weight = d();
    else if (key == "topk_weight") cfg.topk_weight = d();
    else if (key == "masked_weight") cfg.masked_weight = d();
    else if (key == "denoise_weight") cfg.denoise_weight = d();
    else if (key == "optimizer") {
      if (value == "sgd") cfg.optimizer = OptimizerKind::sgd;
      else if (value == "adam") cfg.optimizer = OptimizerKind::adam;
      else throw InvalidArgument("train config: unknown optimizer '" + value + "'");
    } else if (key == "temperature") cfg.contrastive.temperature = d();
    else if (key == "metric") cfg.contrastive.metric = parse_metric(value);
    else if (key == "top_k") cfg.contrastive.top_k = i();
    else if (key == "topk_layer") {
      if (value == "last") cfg.contrastive.topk_layer = ContrastiveConfig::TopkLayer::last;
      else if (value == "second_last")
        cfg.contrastive.topk_layer = ContrastiveConfig::TopkLayer::second_last;
      else throw InvalidArgument("train config: unknown topk_layer '" + value + "'");
    } else if (key == "corrupt_fraction") cfg.corruption.fraction = d();
    else if (key == "noise_range") cfg.corruption.noise_range = d();
    else if (key == "mask_fraction") cfg.corruption.mask_fraction = d();
    else if (key == "jitter_molecules") cfg.jitter_molecules = value == "1" || value == "true";
    else if (key == "jitter_sigma") cfg.jitter_sigma = d();
    else if (key == "stop_at_loss") cfg.stop_at_loss = d();
    else if (key == "n_layers") cfg.encoder.n_layers = i();
    else if (key == "d_model") cfg.encoder.d_model = i();
    else if (key == "n_heads") cfg.encoder.n_heads = i();
    else if (key == "d_head") cfg.encoder.d_head = i();
    else if (key == "d_pair_basis") cfg.encoder.d_pair_basis = i();
    else if (key == "d_out") cfg.encoder.d_out = i();
    else if (key == "max_len") cfg.encoder.max_len = i();
    else throw InvalidArgument("train config: unknown key '" + key + "'");
  }
};

TrainConfig load_train_config(const std::string& path) {
  TrainFileConfig file;
  if (path.empty()) return file.cfg;
  std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view sv = pocketdex::detail::trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    auto eq = sv.find('=');
    if (eq == std::string_view::npos)
      throw ParseError(path + " line " + std::to_string(line_no) + ": expected key=value");
    std::string key(pocketdex::detail::trim(sv.substr(0, eq)));
    std::string value(pocketdex::detail::trim(sv.substr(eq + 1)));
    file.apply(key, value);
  }
  return file.cfg;
}

// Pairs manifest: CSV `pair_id,pocket,molecule`, paths relative to the file.
PairDataset load_pairs_manifest(const std::string& path, const EncoderConfig& enc,
                                const ParseOptions& popt) {
  std::string text = read_text_file(path);
  auto lines = pocketdex::detail::split_lines(text);
  if (lines.empty() || pocketdex::detail::trim(lines[0]) != "pair_id,pocket,molecule")
    throw ParseError(path + ": expected header `pair_id,pocket,molecule`");
  fs::path base = fs::path(path).parent_path();
  PairDataset data;
  for (size_t li = 1; li < lines.size(); ++li) {
    std::string_view line = pocketdex::detail::trim(lines[li]);
    if (line.empty()) continue;
    auto fields = pocketdex::detail::split_char(line, ',');
    if (fields.size() != 3)
      throw ParseError(path + " line " + std::to_string(li + 1) + ": expected 3 fields");
    PairSample sample;
    sample.pair_id = std::string(pocketdex::detail::trim(fields[0]));
    auto resolve = [&](std::string_view f) {
      fs::path p{std::string(pocketdex::detail::trim(f))};
      return p.is_absolute() ? p.string() : (base / p).string();
    };
    sample.pocket = tokenize(load_structure(resolve(fields[1]), popt));
    sample.molecule = tokenize(load_structure(resolve(fields[2]), popt));
    if (sample.pocket.length() > static_cast<size_t>(enc.max_len) ||
        sample.molecule.length() > static_cast<size_t>(enc.max_len))
      throw InvalidArgument(path + " line " + std::to_string(li + 1) + ": entity exceeds max_len " +
                            std::to_string(enc.max_len));
    data.pairs.push_back(std::move(sample));
  }
  if (data.pairs.empty()) throw InvalidArgument(path + ": no pairs");
  data.validate();
  return data;
}

// Vectors CSV for `index build`: rows `id,v0,v1,...`; optional `id,...` header.
void load_vectors_csv(const std::string& path, std::vector<std::vector<double>>& embs,
                      std::vector<std::string>& ids) {
  std::string text = read_text_file(path);
  auto lines = pocketdex::detail::split_lines(text);
  for (size_t li = 0; li < lines.size(); ++li) {
    std::string_view line = pocketdex::detail::trim(lines[li]);
    if (line.empty()) continue;
    if (li == 0 && line.substr(0, 3) == "id,") continue;  // header
    auto fields = pocketdex::detail::split_char(line, ',');
    if (fields.size() < 2)
      throw ParseError(path + " line " + std::to_string(li + 1) + ": expected `id,v0,...`");
    ids.emplace_back(pocketdex::detail::trim(fields[0]));
    std::vector<double> v;
    for (size_t c = 1; c < fields.size(); ++c)
      v.push_back(pocketdex::detail::parse_double(fields[c], li + 1, "vector component"));
    embs.push_back(std::move(v));
  }
  if (embs.empty()) throw InvalidArgument(path + ": no vectors");
}

// ---- subcommand bodies (throw on domain errors) ----

int cmd_index_build(const std::string& vectors, const std::string& metric_name,
                    const std::string& out) {
  std::vector<std::vector<double>> embs;
  std::vector<std::string> ids;
  load_vectors_csv(vectors, embs, ids);
  build_index(embs, ids, parse_metric(metric_name), out);
  std::cout << "wrote " << out << " (" << ids.size() << " vectors, dim " << embs[0].size() << ", "
            << metric_name << ")\n";
  return 0;
}

int cmd_index_info(const std::string& path) {
  EmbeddingIndex idx = load_index(path);
  std::cout << "path: " << path << "\n"
            << "dim: " << idx.dim << "\n"
            << "count: " << idx.count() << "\n"
            << "metric: " << metric_name(idx.metric) << "\n";
  return 0;
}

int cmd_embed(const std::vector<std::string>& inputs, const std::string& checkpoint,
              const std::string& tower, const std::string& metric_name_str,
              const std::string& out, bool keep_ions, bool strip_h) {
  DualEncoder model = load_checkpoint(checkpoint);
  ParseOptions popt;
  popt.strip_waters_and_ions = !keep_ions;
  popt.keep_hydrogens = !strip_h;
  const ModelParams& params = tower == "pocket" ? model.pocket : model.molecule;
  std::vector<std::vector<double>> embs;
  std::vector<std::string> ids;
  for (const auto& file : inputs) {
    std::string stem = fs::path(file).stem().string();
    for (const auto& seen : ids)
      if (seen == stem)
        throw DuplicateIdError("duplicate input stem '" + stem + "' (ids must be unique)");
    ids.push_back(stem);
    embs.push_back(encode(tokenize(load_structure(file, popt)), params, model.config));
  }
  build_index(embs, ids, parse_metric(metric_name_str), out);
  std::cout << "wrote " << out << " (" << ids.size() << " embeddings, dim " << model.config.d_out
            << ", " << metric_name_str << ", tower " << tower << ")\n";
  return 0;
}

int cmd_screen(bool fishing, const std::string& query_file, const std::string& index_path,
               const std::string& checkpoint, size_t topk, int threads, const std::string& out,
               bool keep_ions, bool strip_h, const std::string& expect_metric) {
  DualEncoder model = load_checkpoint(checkpoint);
  EmbeddingIndex idx = load_index(index_path);
  if (!expect_metric.empty() && parse_metric(expect_metric) != idx.metric)
    throw InvalidArgument("index uses the " + std::string(metric_name(idx.metric)) +
                          " metric, not " + expect_metric);
  ParseOptions popt;
  popt.strip_waters_and_ions = !keep_ions;
  popt.keep_hydrogens = !strip_h;
  RankedResult result = fishing ? fish(query_file, model, idx, topk, threads, popt)
                                : screen(query_file, model, idx, topk, threads, popt);
  std::ostringstream header;
  header << (fishing ? "fish --molecule " : "screen --pocket ") << query_file << " --index "
         << index_path << " --checkpoint " << checkpoint << " --topk " << topk << " --threads "
         << threads;
  emit_output(out, format_ranked(result, header.str()));
  return 0;
}

int cmd_train(const std::string& pairs, const std::string& val_pairs, const std::string& config,
              const std::string& out_checkpoint, const std::string& history,
              std::optional<uint64_t> seed_flag, std::optional<int> epochs_flag) {
  TrainConfig cfg = load_train_config(config);
  if (seed_flag) cfg.seed = *seed_flag;
  if (epochs_flag) cfg.epochs = *epochs_flag;
  ParseOptions popt;
  PairDataset data = load_pairs_manifest(pairs, cfg.encoder, popt);
  std::optional<PairDataset> val;
  if (!val_pairs.empty()) val = load_pairs_manifest(val_pairs, cfg.encoder, popt);

  FitResult result = fit(data, cfg, val ? &*val : nullptr);

  save_checkpoint(val ? result.best : result.model, out_checkpoint);
  if (!history.empty()) {
    binio::atomic_write_file(history, [&](std::ostream& os) {
      os << config_header("train --pairs " + pairs + " --seed " + std::to_string(cfg.seed) +
                          " --epochs " + std::to_string(cfg.epochs));
      os << "epoch,total,contrastive,topk,masked_type,denoise,val_bedroc\n";
      char buf[256];
      for (const auto& h : result.history) {
        std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g,%.9g,", h.epoch, h.mean.total,
                      h.mean.contrastive, h.mean.topk, h.mean.masked_type, h.mean.denoise);
        os << buf;
        if (h.has_validation) {
          std::snprintf(buf, sizeof(buf), "%.9g", h.val_bedroc);
          os << buf;
        }
        os << "\n";
      }
    });
  }
  std::cout << "trained " << result.history.size() << " epochs";
  if (!result.history.empty())
    std::cout << ", final loss " << result.history.back().mean.total;
  if (val) std::cout << ", best val BEDROC " << result.best_bedroc << " at epoch " << result.best_epoch;
  if (result.diverged) std::cout << " (diverged; last good checkpoint retained)";
  std::cout << ", wrote " << out_checkpoint << "\n";
  return result.diverged ? 1 : 0;
}

int cmd_eval(const std::string& scores_path, const std::string& labels_path, double alpha,
             const std::string& ef_list, const std::string& re_list, const std::string& out) {
  std::string stext = read_text_file(scores_path);
  std::string ltext = read_text_file(labels_path);
  auto slines = pocketdex::detail::split_lines(stext);
  auto llines = pocketdex::detail::split_lines(ltext);
  if (slines.empty() || pocketdex::detail::trim(slines[0]) != "id,score")
    throw ParseError(scores_path + ": expected header `id,score`");
  if (llines.empty() || pocketdex::detail::trim(llines[0]) != "id,label")
    throw ParseError(labels_path + ": expected header `id,label`");

  std::unordered_map<std::string, bool> labels;
  for (size_t li = 1; li < llines.size(); ++li) {
    std::string_view line = pocketdex::detail::trim(llines[li]);
    if (line.empty()) continue;
    auto f = pocketdex::detail::split_char(line, ',');
    if (f.size() != 2) throw ParseError(labels_path + " line " + std::to_string(li + 1));
    std::string id(pocketdex::detail::trim(f[0]));
    std::string_view lab = pocketdex::detail::trim(f[1]);
    if (lab != "0" && lab != "1")
      throw ParseError(labels_path + " line " + std::to_string(li + 1) + ": label must be 0 or 1");
    if (!labels.emplace(id, lab == "1").second)
      throw InvalidArgument(labels_path + ": duplicate id '" + id + "'");
  }

  LabeledScores data;
  for (size_t li = 1; li < slines.size(); ++li) {
    std::string_view line = pocketdex::detail::trim(slines[li]);
    if (line.empty()) continue;
    auto f = pocketdex::detail::split_char(line, ',');
    if (f.size() != 2) throw ParseError(scores_path + " line " + std::to_string(li + 1));
    std::string id(pocketdex::detail::trim(f[0]));
    auto it = labels.find(id);
    if (it == labels.end()) throw InvalidArgument("no label for scored id '" + id + "'");
    data.entries.push_back(
        {id, pocketdex::detail::parse_double(f[1], li + 1, "score"), it->second});
  }

  std::ostringstream os;
  os << config_header("eval --scores " + scores_path + " --labels " + labels_path);
  os << "metric,param,value\n";
  char buf[64];
  auto row = [&](const std::string& name, const std::string& param, double value) {
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    os << name << "," << param << "," << buf << "\n";
  };
  row("auroc", "", auroc(data));
  std::snprintf(buf, sizeof(buf), "%g", alpha);
  row("bedroc", buf, bedroc(data, alpha));
  for (double f : parse_double_list(ef_list)) {
    std::snprintf(buf, sizeof(buf), "%g", f);
    row("ef", buf, enrichment_factor(data, f));
  }
  for (double x : parse_double_list(re_list)) {
    std::snprintf(buf, sizeof(buf), "%g", x);
    row("re", buf, roc_enrichment(data, x));
  }
  emit_output(out, os.str());
  return 0;
}

int cmd_augment(const std::string& original_path, const std::string& ligand_path,
                const std::vector<std::string>& homolog_paths,
                const std::vector<std::string>& map_paths, const std::string& out_dir,
                double radius) {
  if (homolog_paths.size() != map_paths.size())
    throw InvalidArgument("augment: need one --map per --homolog");
  ParseOptions popt;
  Structure original = load_structure(original_path, popt);
  Structure ligand = load_structure(ligand_path, popt);

  Structure pocket = extract_pocket(original, ligand, radius);
  if (pocket.empty()) throw InvalidArgument("augment: original pocket is empty at this radius");
  std::set<int64_t> pocket_res;
  for (const auto& a : pocket.atoms) {
    if (!a.residue) throw InvalidArgument("augment: original structure lacks residue annotations");
    pocket_res.insert(*a.residue);
  }

  fs::create_directories(out_dir);
  std::ostringstream provenance;
  size_t accepted = 0;
  for (size_t i = 0; i < homolog_paths.size(); ++i) {
    const std::string stem = fs::path(homolog_paths[i]).stem().string();
    HomologCandidate cand;
    cand.original = original;
    cand.homolog = load_structure(homolog_paths[i], popt);
    cand.correspondence = parse_correspondence(read_text_file(map_paths[i]));
    cand.pocket_residues.assign(pocket_res.begin(), pocket_res.end());

    nlohmann::json rec;
    rec["homolog"] = stem;
    FilterScores scores = homoaug_filter(cand);
    rec["plddt_share"] = scores.plddt_share;
    rec["tm_score"] = scores.tm;
    rec["alignment_rate"] = scores.alignment_rate;
    if (!scores.accept) {
      rec["accepted"] = false;
      rec["status"] = "rejected_filter";
    } else {
      AugmentedPair pair = make_augmented_pair(cand, ligand, radius);
      if (pair.status == AugmentStatus::empty_pocket) {
        rec["accepted"] = false;
        rec["status"] = "empty_pocket";
      } else {
        rec["accepted"] = true;
        rec["status"] = "accepted";
        const std::string pocket_file = (fs::path(out_dir) / (stem + "_pocket.csv")).string();
        const std::string ligand_file = (fs::path(out_dir) / (stem + "_ligand.csv")).string();
        binio::atomic_write_file(pocket_file,
                                 [&](std::ostream& os) { os << write_atoms_table(pair.pocket); });
        binio::atomic_write_file(ligand_file,
                                 [&](std::ostream& os) { os << write_atoms_table(pair.ligand); });
        rec["pocket_file"] = pocket_file;
        rec["ligand_file"] = ligand_file;
        ++accepted;
      }
    }
    provenance << rec.dump() << "\n";
  }
  const std::string prov_path = (fs::path(out_dir) / "provenance.jsonl").string();
  binio::atomic_write_file(prov_path, [&](std::ostream& os) { os << provenance.str(); });
  std::cout << "accepted " << accepted << "/" << homolog_paths.size() << " candidates, log at "
            << prov_path << "\n";
  return 0;
}

int cmd_bench(const std::string& index_path, size_t synthetic, size_t dim, size_t queries,
              size_t topk, int threads, uint64_t seed) {
  EmbeddingIndex idx;
  if (!index_path.empty()) {
    idx = load_index(index_path);
  } else {
    if (synthetic == 0) throw InvalidArgument("bench: give --index or --synthetic N");
    idx.dim = static_cast<uint32_t>(dim);
    idx.metric = SimilarityMetric::dot;
    idx.vectors.resize(synthetic * dim);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    for (auto& v : idx.vectors) v = u(rng);
    idx.ids.reserve(synthetic);
    for (size_t i = 0; i < synthetic; ++i) idx.ids.push_back("s" + std::to_string(i));
  }
  std::cout << "count=" << idx.count() << " dim=" << idx.dim << " metric=" << metric_name(idx.metric)
            << "\n";
  std::cout << "threads,queries,seconds,qps,qps_per_thread,dot_products_per_sec\n";
  for (int t : {1, threads}) {
    BenchResult b = throughput_bench(idx, queries, topk, t, seed + 1);
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%d,%zu,%.4f,%.2f,%.2f,%.3e\n", b.threads, b.queries, b.seconds,
                  b.queries_per_sec, b.queries_per_sec_per_thread, b.dot_products_per_sec);
    std::cout << buf;
    if (t == 1 && threads == 1) break;
  }
  return 0;
}

int cmd_gradcheck(int samples, double eps, uint64_t seed, double tolerance) {
  std::mt19937_64 rng(seed + 1);
  TrainConfig cfg;
  cfg.contrastive.top_k = 2;
  PairDataset data;
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  std::uniform_int_distribution<int> pick(0, 3);
  static const char* elems[] = {"C", "N", "O", "S"};
  for (int i = 0; i < 4; ++i) {
    Structure pocket, mol;
    for (int a = 0; a < 6; ++a) pocket.atoms.push_back({elems[pick(rng)], {u(rng), u(rng), u(rng)}, {}, {}});
    for (int a = 0; a < 5; ++a) mol.atoms.push_back({elems[pick(rng)], {u(rng), u(rng), u(rng)}, {}, {}});
    PairSample p;
    p.pocket = tokenize(pocket);
    p.molecule = tokenize(mol);
    p.pair_id = "g" + std::to_string(i);
    data.pairs.push_back(std::move(p));
  }
  DualEncoder model = init_dual_encoder(cfg.encoder, seed + 2);
  double worst = 0.0;
  std::cout << "component,max_rel_err\n";
  for (LossComponent comp : {LossComponent::contrastive, LossComponent::topk,
                             LossComponent::masked_type, LossComponent::denoise}) {
    double err = gradient_check(model, data.pairs, cfg, comp, eps, samples, seed + 3);
    worst = std::max(worst, err);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3e", err);
    std::cout << loss_component_name(comp) << "," << buf << "\n";
  }
  if (worst > tolerance) {
    std::cerr << "gradient check FAILED: " << worst << " > tolerance " << tolerance << "\n";
    return 1;
  }
  std::cout << "max relative error " << worst << " within tolerance " << tolerance << "\n";
  return 0;
}

int cmd_selftest(uint64_t seed, int threads, bool quick) {
  selftest::Options opt;
  opt.seed = seed;
  opt.threads = threads;
  opt.quick = quick;
  auto results = selftest::run_acceptance(opt, std::cout);
  if (!selftest::all_passed(results)) {
    std::cerr << "selftest FAILED\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pocketdex: dual-encoder pocket-molecule screening toolkit"};
  app.require_subcommand(1);

  // index
  auto* index = app.add_subcommand("index", "embedding index utilities");
  index->require_subcommand(1);
  auto* ibuild = index->add_subcommand("build", "build an index from a vectors CSV (id,v0,v1,...)");
  std::string ib_vectors, ib_metric = "dot", ib_out;
  ibuild->add_option("--vectors", ib_vectors, "vectors CSV file")->required();
  ibuild->add_option("--metric", ib_metric, "dot or cosine");
  ibuild->add_option("--out", ib_out, "output index path")->required();
  auto* iinfo = index->add_subcommand("info", "print index header fields");
  std::string ii_path;
  iinfo->add_option("path", ii_path, "index file")->required();

  // embed
  auto* embed = app.add_subcommand("embed", "encode structure files into an index");
  std::vector<std::string> em_inputs;
  std::string em_checkpoint, em_tower = "molecule", em_metric = "cosine", em_out;
  bool em_keep_ions = false, em_strip_h = false;
  embed->add_option("--inputs", em_inputs, "structure files (.xyz or atoms-table CSV)")
      ->required()
      ->expected(-1);
  embed->add_option("--checkpoint", em_checkpoint, "model checkpoint")->required();
  embed->add_option("--tower", em_tower, "pocket or molecule")
      ->check(CLI::IsMember({"pocket", "molecule"}));
  embed->add_option("--metric", em_metric, "dot or cosine");
  embed->add_option("--out", em_out, "output index path")->required();
  embed->add_flag("--keep-ions", em_keep_ions, "keep monoatomic metal ions");
  embed->add_flag("--strip-hydrogens", em_strip_h, "drop hydrogens while parsing");

  // screen / fish
  std::string sc_query, sc_index, sc_checkpoint, sc_out, sc_metric;
  size_t sc_topk = 10;
  int sc_threads = default_threads();
  bool sc_keep_ions = false, sc_strip_h = false;
  auto* screen_cmd = app.add_subcommand("screen", "rank a molecule index against a pocket");
  screen_cmd->add_option("--pocket", sc_query, "pocket structure file")->required();
  screen_cmd->add_option("--index", sc_index, "molecule index")->required();
  screen_cmd->add_option("--checkpoint", sc_checkpoint, "model checkpoint")->required();
  screen_cmd->add_option("--topk", sc_topk, "results to return");
  screen_cmd->add_option("--threads", sc_threads, "scan shards");
  screen_cmd->add_option("--metric", sc_metric, "assert the index uses this metric");
  screen_cmd->add_option("--out", sc_out, "write CSV here instead of stdout");
  screen_cmd->add_flag("--keep-ions", sc_keep_ions, "keep monoatomic metal ions");
  screen_cmd->add_flag("--strip-hydrogens", sc_strip_h, "drop hydrogens while parsing");

  std::string fi_query, fi_index, fi_checkpoint, fi_out, fi_metric;
  size_t fi_topk = 10;
  int fi_threads = default_threads();
  bool fi_keep_ions = false, fi_strip_h = false;
  auto* fish_cmd = app.add_subcommand("fish", "rank a pocket index against a molecule");
  fish_cmd->add_option("--molecule", fi_query, "molecule structure file")->required();
  fish_cmd->add_option("--index", fi_index, "pocket index")->required();
  fish_cmd->add_option("--checkpoint", fi_checkpoint, "model checkpoint")->required();
  fish_cmd->add_option("--topk", fi_topk, "results to return");
  fish_cmd->add_option("--threads", fi_threads, "scan shards");
  fish_cmd->add_option("--metric", fi_metric, "assert the index uses this metric");
  fish_cmd->add_option("--out", fi_out, "write CSV here instead of stdout");
  fish_cmd->add_flag("--keep-ions", fi_keep_ions, "keep monoatomic metal ions");
  fish_cmd->add_flag("--strip-hydrogens", fi_strip_h, "drop hydrogens while parsing");

  // train
  std::string tr_pairs, tr_val, tr_config, tr_out = "model.dcmp", tr_history;
  std::optional<uint64_t> tr_seed;
  std::optional<int> tr_epochs;
  auto* train_cmd = app.add_subcommand("train", "fit both towers on a pairs manifest");
  train_cmd->add_option("--pairs", tr_pairs, "manifest CSV: pair_id,pocket,molecule")->required();
  train_cmd->add_option("--val", tr_val, "validation manifest (enables BEDROC checkpointing)");
  train_cmd->add_option("--config", tr_config, "key=value training config file");
  train_cmd->add_option("--out-checkpoint", tr_out, "checkpoint output path");
  train_cmd->add_option("--history", tr_history, "per-epoch loss CSV output");
  train_cmd->add_option("--seed", tr_seed, "override config seed");
  train_cmd->add_option("--epochs", tr_epochs, "override config epochs");

  // eval
  std::string ev_scores, ev_labels, ev_ef = "0.005,0.01,0.05", ev_re = "0.005,0.01,0.02,0.05",
              ev_out;
  double ev_alpha = 85.0;
  auto* eval_cmd = app.add_subcommand("eval", "screening metrics from score and label CSVs");
  eval_cmd->add_option("--scores", ev_scores, "CSV id,score")->required();
  eval_cmd->add_option("--labels", ev_labels, "CSV id,label (1=active, 0=decoy)")->required();
  eval_cmd->add_option("--alpha", ev_alpha, "BEDROC alpha");
  eval_cmd->add_option("--ef", ev_ef, "EF fractions, comma separated");
  eval_cmd->add_option("--re", ev_re, "RE false-positive rates, comma separated");
  eval_cmd->add_option("--out", ev_out, "write CSV here instead of stdout");

  // augment
  std::string au_original, au_ligand, au_outdir;
  std::vector<std::string> au_homologs, au_maps;
  double au_radius = 6.0;
  auto* augment_cmd = app.add_subcommand("augment", "build homolog-augmented pocket-ligand pairs");
  augment_cmd->add_option("--original", au_original, "original protein (atoms-table with residue)")
      ->required();
  augment_cmd->add_option("--ligand", au_ligand, "ligand structure file")->required();
  augment_cmd->add_option("--homolog", au_homologs, "homolog atoms-table (repeatable)")
      ->required()
      ->expected(-1);
  augment_cmd->add_option("--map", au_maps, "correspondence CSV per homolog (repeatable)")
      ->required()
      ->expected(-1);
  augment_cmd->add_option("--out-dir", au_outdir, "output directory")->required();
  augment_cmd->add_option("--radius", au_radius, "pocket radius in Angstrom");

  // bench
  std::string be_index;
  size_t be_synthetic = 0, be_dim = 128, be_queries = 10, be_topk = 10;
  int be_threads = default_threads();
  uint64_t be_seed = 0;
  auto* bench_cmd = app.add_subcommand("bench", "throughput of the top-k scan");
  bench_cmd->add_option("--index", be_index, "existing index file");
  bench_cmd->add_option("--synthetic", be_synthetic, "generate this many random vectors instead");
  bench_cmd->add_option("--dim", be_dim, "dimension for --synthetic");
  bench_cmd->add_option("--queries", be_queries, "number of queries");
  bench_cmd->add_option("--topk", be_topk, "k per query");
  bench_cmd->add_option("--threads", be_threads, "max shards to benchmark");
  bench_cmd->add_option("--seed", be_seed, "rng seed");

  // gradcheck
  int gc_samples = 64;
  double gc_eps = 1e-4, gc_tolerance = 1e-4;
  uint64_t gc_seed = 0;
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient verification");
  grad_cmd->add_option("--samples", gc_samples, "sampled parameters per component");
  grad_cmd->add_option("--eps", gc_eps, "finite-difference step");
  grad_cmd->add_option("--seed", gc_seed, "rng seed");
  grad_cmd->add_option("--tolerance", gc_tolerance, "max allowed relative error");

  // selftest
  uint64_t st_seed = 0;
  int st_threads = default_threads();
  bool st_quick = false;
  auto* self_cmd = app.add_subcommand("selftest", "run the embedded acceptance suite");
  self_cmd->add_option("--seed", st_seed, "rng seed");
  self_cmd->add_option("--threads", st_threads, "threads for the scan checks");
  self_cmd->add_flag("--quick", st_quick, "skip the 1M-vector bench and the overfit run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the error text
    std::cerr << "\n" << app.help();
    return 2;
  }

  try {
    if (ibuild->parsed()) return cmd_index_build(ib_vectors, ib_metric, ib_out);
    if (iinfo->parsed()) return cmd_index_info(ii_path);
    if (embed->parsed())
      return cmd_embed(em_inputs, em_checkpoint, em_tower, em_metric, em_out, em_keep_ions,
                       em_strip_h);
    if (screen_cmd->parsed())
      return cmd_screen(false, sc_query, sc_index, sc_checkpoint, sc_topk, sc_threads, sc_out,
                        sc_keep_ions, sc_strip_h, sc_metric);
    if (fish_cmd->parsed())
      return cmd_screen(true, fi_query, fi_index, fi_checkpoint, fi_topk, fi_threads, fi_out,
                        fi_keep_ions, fi_strip_h, fi_metric);
    if (train_cmd->parsed())
      return cmd_train(tr_pairs, tr_val, tr_config, tr_out, tr_history, tr_seed, tr_epochs);
    if (eval_cmd->parsed()) return cmd_eval(ev_scores, ev_labels, ev_alpha, ev_ef, ev_re, ev_out);
    if (augment_cmd->parsed())
      return cmd_augment(au_original, au_ligand, au_homologs, au_maps, au_outdir, au_radius);
    if (bench_cmd->parsed())
      return cmd_bench(be_index, be_synthetic, be_dim, be_queries, be_topk, be_threads, be_seed);
    if (grad_cmd->parsed()) return cmd_gradcheck(gc_samples, gc_eps, gc_seed, gc_tolerance);
    if (self_cmd->parsed()) return cmd_selftest(st_seed, st_threads, st_quick);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
