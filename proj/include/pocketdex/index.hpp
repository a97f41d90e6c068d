#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "pocketdex/binio.hpp"
#include "pocketdex/encoder.hpp"
#include "pocketdex/io.hpp"
#include "pocketdex/objective.hpp"

namespace pocketdex {

// In-memory embedding store: fixed-dimension float32 vectors with string
// ids. Under the cosine metric the stored vectors are unit length.
struct EmbeddingIndex {
  uint32_t dim = 0;
  SimilarityMetric metric = SimilarityMetric::dot;
  std::vector<std::string> ids;
  std::vector<float> vectors;  // count x dim, row-major

  size_t count() const { return ids.size(); }
  const float* row(size_t i) const { return vectors.data() + i * dim; }
};

struct RankedEntry {
  std::string id;
  double score = 0.0;
};

// Scores non-increasing; exact ties broken by ascending id.
struct RankedResult {
  std::vector<RankedEntry> entries;
};

inline constexpr char kIndexMagic[4] = {'D', 'C', 'I', 'X'};
inline constexpr uint32_t kIndexVersion = 1;
inline constexpr size_t kIndexHeaderBytes = 4 + 4 + 1 + 4 + 8 + 15;

namespace detail {

inline void check_unique_ids(const std::vector<std::string>& ids) {
  std::unordered_set<std::string> seen;
  for (const auto& id : ids)
    if (!seen.insert(id).second) throw DuplicateIdError("duplicate id '" + id + "'");
}

}  // namespace detail

// Validates, and normalizes rows for the cosine metric (rejecting zero
// vectors). Input rows are converted to float32 first so the stored bits
// match what a round trip through disk produces.
inline EmbeddingIndex make_index(const std::vector<std::vector<double>>& embeddings,
                                 const std::vector<std::string>& ids, SimilarityMetric metric) {
  if (embeddings.size() != ids.size())
    throw InvalidArgument("index: embedding/id count mismatch");
  if (embeddings.empty()) throw InvalidArgument("index: no vectors");
  detail::check_unique_ids(ids);
  const size_t dim = embeddings[0].size();
  if (dim == 0) throw InvalidArgument("index: zero-dimensional vectors");
  EmbeddingIndex idx;
  idx.dim = static_cast<uint32_t>(dim);
  idx.metric = metric;
  idx.ids = ids;
  idx.vectors.resize(embeddings.size() * dim);
  for (size_t i = 0; i < embeddings.size(); ++i) {
    if (embeddings[i].size() != dim)
      throw InvalidArgument("index: vector " + ids[i] + " has dimension " +
                            std::to_string(embeddings[i].size()) + ", expected " +
                            std::to_string(dim));
    float* out = idx.vectors.data() + i * dim;
    for (size_t j = 0; j < dim; ++j) out[j] = static_cast<float>(embeddings[i][j]);
    if (metric == SimilarityMetric::cosine) {
      double norm = 0.0;
      for (size_t j = 0; j < dim; ++j) norm += static_cast<double>(out[j]) * out[j];
      norm = std::sqrt(norm);
      if (norm == 0.0)
        throw InvalidArgument("index: zero vector '" + ids[i] + "' not allowed under cosine");
      for (size_t j = 0; j < dim; ++j) out[j] = static_cast<float>(out[j] / norm);
    }
  }
  return idx;
}

inline void save_index(const EmbeddingIndex& idx, const std::string& path) {
  binio::atomic_write_file(path, [&](std::ostream& out) {
    binio::write_bytes(out, kIndexMagic, 4);
    binio::write_u32le(out, kIndexVersion);
    binio::write_u8(out, static_cast<uint8_t>(idx.metric));
    binio::write_u32le(out, idx.dim);
    binio::write_u64le(out, static_cast<uint64_t>(idx.count()));
    const char reserved[15] = {};
    binio::write_bytes(out, reserved, 15);
    for (const auto& id : idx.ids) {
      if (id.size() > 0xffff) throw InvalidArgument("index: id longer than 65535 bytes");
      binio::write_u16le(out, static_cast<uint16_t>(id.size()));
      binio::write_bytes(out, id.data(), id.size());
    }
    binio::write_bytes(out, idx.vectors.data(), idx.vectors.size() * sizeof(float));
  });
}

inline void build_index(const std::vector<std::vector<double>>& embeddings,
                        const std::vector<std::string>& ids, SimilarityMetric metric,
                        const std::string& path) {
  save_index(make_index(embeddings, ids, metric), path);
}

inline EmbeddingIndex load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open index: " + path);
  in.seekg(0, std::ios::end);
  const uint64_t file_size = static_cast<uint64_t>(in.tellg());
  in.seekg(0);

  char magic[4];
  binio::read_bytes(in, magic, 4, "index magic");
  if (std::memcmp(magic, kIndexMagic, 4) != 0)
    throw BadMagicError("not an embedding index: " + path);
  const uint32_t version = binio::read_u32le(in, "index version");
  if (version != kIndexVersion)
    throw VersionMismatchError("unsupported index version " + std::to_string(version));
  const uint8_t metric_byte = binio::read_u8(in, "metric");
  if (metric_byte > 1) throw FormatError("unknown metric code " + std::to_string(metric_byte));
  const uint32_t dim = binio::read_u32le(in, "dim");
  const uint64_t count = binio::read_u64le(in, "count");
  char reserved[15];
  binio::read_bytes(in, reserved, 15, "reserved bytes");
  for (char c : reserved)
    if (c != 0) throw FormatError("reserved header bytes must be zero");
  if (dim == 0 || count == 0) throw FormatError("index has zero dim or count");

  // Sanity-check declared sizes against the file before allocating; the
  // stepwise bounds also rule out u64 overflow from hostile headers.
  if (file_size < kIndexHeaderBytes) throw TruncatedFileError("index header incomplete");
  const uint64_t avail = file_size - kIndexHeaderBytes;
  if (count > avail / 2 || static_cast<uint64_t>(dim) > (avail / count) / 4)
    throw TruncatedFileError("index file shorter than its declared contents");
  const uint64_t payload = count * static_cast<uint64_t>(dim) * 4;
  if (count * 2 + payload > avail)
    throw TruncatedFileError("index file shorter than its declared contents");

  EmbeddingIndex idx;
  idx.dim = dim;
  idx.metric = static_cast<SimilarityMetric>(metric_byte);
  idx.ids.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    const uint16_t len = binio::read_u16le(in, "id length");
    std::string id(len, '\0');
    binio::read_bytes(in, id.data(), len, "id bytes");
    idx.ids.push_back(std::move(id));
  }
  detail::check_unique_ids(idx.ids);
  const uint64_t data_start = static_cast<uint64_t>(in.tellg());
  if (data_start + payload != file_size)
    throw TruncatedFileError("index payload size mismatch: expected " + std::to_string(payload) +
                             " bytes after the id table");
  idx.vectors.resize(count * dim);
  binio::read_bytes(in, idx.vectors.data(), payload, "vector payload");
  for (float v : idx.vectors)
    if (!std::isfinite(v)) throw FormatError("index contains non-finite values");
  return idx;
}

// ---- exact top-k scan ----

namespace detail {

struct Candidate {
  double score;
  size_t row;
};

// Total order: higher score first, ties by ascending id.
struct CandidateBetter {
  const std::vector<std::string>* ids;
  bool operator()(const Candidate& a, const Candidate& b) const {
    if (a.score != b.score) return a.score > b.score;
    return (*ids)[a.row] < (*ids)[b.row];
  }
};

// Fixed-capacity selection: keeps the best k candidates seen so far.
class TopKHeap {
 public:
  TopKHeap(size_t k, const std::vector<std::string>* ids) : k_(k), better_{ids} {}

  void consider(double score, size_t row) {
    Candidate c{score, row};
    if (heap_.size() < k_) {
      heap_.push_back(c);
      std::push_heap(heap_.begin(), heap_.end(), better_);  // worst at front
      return;
    }
    if (!better_(c, heap_.front())) return;
    std::pop_heap(heap_.begin(), heap_.end(), better_);
    heap_.back() = c;
    std::push_heap(heap_.begin(), heap_.end(), better_);
  }

  std::vector<Candidate> sorted() && {
    std::sort(heap_.begin(), heap_.end(), better_);
    return std::move(heap_);
  }

 private:
  size_t k_;
  CandidateBetter better_;
  std::vector<Candidate> heap_;
};

inline double row_score(const EmbeddingIndex& idx, size_t row, const std::vector<double>& query) {
  const float* v = idx.row(row);
  double s = 0.0;
  for (size_t j = 0; j < idx.dim; ++j) s += static_cast<double>(v[j]) * query[j];
  return s;
}

inline std::vector<Candidate> scan_range(const EmbeddingIndex& idx,
                                         const std::vector<double>& query, size_t k, size_t begin,
                                         size_t end) {
  TopKHeap heap(k, &idx.ids);
  for (size_t row = begin; row < end; ++row) heap.consider(row_score(idx, row, query), row);
  return std::move(heap).sorted();
}

}  // namespace detail

// Exact top-min(k, count) by the index metric. Equivalent to scoring every
// vector and stable-sorting by (score desc, id asc); a sharded scan merges
// to the identical result.
inline RankedResult search(const EmbeddingIndex& idx, const std::vector<double>& query, size_t k,
                           int threads = 1) {
  if (query.size() != idx.dim)
    throw InvalidArgument("search: query dimension " + std::to_string(query.size()) +
                          " does not match index dimension " + std::to_string(idx.dim));
  if (k == 0) throw InvalidArgument("search: k must be >= 1");
  std::vector<double> q = query;
  if (idx.metric == SimilarityMetric::cosine) {
    double norm = std::sqrt(dot(q, q));
    if (norm == 0.0) throw InvalidArgument("search: zero query under cosine metric");
    for (auto& v : q) v /= norm;
  }
  const size_t n = idx.count();
  k = std::min(k, n);

  std::vector<detail::Candidate> merged;
  if (threads <= 1 || n < 1024) {
    merged = detail::scan_range(idx, q, k, 0, n);
  } else {
    const size_t nt = static_cast<size_t>(threads);
    std::vector<std::vector<detail::Candidate>> parts(nt);
    std::vector<std::thread> workers;
    const size_t chunk = (n + nt - 1) / nt;
    for (size_t t = 0; t < nt; ++t) {
      const size_t begin = t * chunk;
      const size_t end = std::min(n, begin + chunk);
      if (begin >= end) break;
      workers.emplace_back([&, t, begin, end] { parts[t] = detail::scan_range(idx, q, k, begin, end); });
    }
    for (auto& w : workers) w.join();
    for (auto& p : parts) merged.insert(merged.end(), p.begin(), p.end());
    std::sort(merged.begin(), merged.end(), detail::CandidateBetter{&idx.ids});
    if (merged.size() > k) merged.resize(k);
  }

  RankedResult out;
  out.entries.reserve(merged.size());
  for (const auto& c : merged) out.entries.push_back({idx.ids[c.row], c.score});
  return out;
}

// ---- disk-to-result pipelines ----

inline std::vector<double> encode_structure_file(const std::string& path, const ModelParams& tower,
                                                 const EncoderConfig& cfg,
                                                 const ParseOptions& opt = {}) {
  Structure s = load_structure(path, opt);
  return encode(tokenize(s), tower, cfg);
}

inline void check_dims_match(const EncoderConfig& cfg, const EmbeddingIndex& idx) {
  if (static_cast<uint32_t>(cfg.d_out) != idx.dim)
    throw InvalidArgument("checkpoint embedding dimension " + std::to_string(cfg.d_out) +
                          " does not match index dimension " + std::to_string(idx.dim));
}

// Query pocket against a molecule index.
inline RankedResult screen(const std::string& pocket_file, const DualEncoder& model,
                           const EmbeddingIndex& idx, size_t k, int threads = 1,
                           const ParseOptions& opt = {}) {
  check_dims_match(model.config, idx);
  return search(idx, encode_structure_file(pocket_file, model.pocket, model.config, opt), k,
                threads);
}

// Query molecule against a pocket index (target fishing).
inline RankedResult fish(const std::string& molecule_file, const DualEncoder& model,
                         const EmbeddingIndex& idx, size_t k, int threads = 1,
                         const ParseOptions& opt = {}) {
  check_dims_match(model.config, idx);
  return search(idx, encode_structure_file(molecule_file, model.molecule, model.config, opt), k,
                threads);
}

// ---- throughput measurement ----

struct BenchResult {
  size_t queries = 0;
  int threads = 1;
  double seconds = 0.0;
  double queries_per_sec = 0.0;
  double queries_per_sec_per_thread = 0.0;
  double dot_products_per_sec = 0.0;
};

inline BenchResult throughput_bench(const EmbeddingIndex& idx, size_t n_queries, size_t k,
                                    int threads = 1, uint64_t seed = 0) {
  if (n_queries == 0) throw InvalidArgument("bench: need at least one query");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> queries(n_queries, std::vector<double>(idx.dim));
  for (auto& q : queries) {
    for (auto& v : q) v = u(rng);
    if (idx.metric == SimilarityMetric::cosine) {
      double norm = std::sqrt(dot(q, q));
      for (auto& v : q) v /= norm;
    }
  }
  volatile double sink = 0.0;  // keep the scan from being optimized away
  const auto start = std::chrono::steady_clock::now();
  for (const auto& q : queries) {
    RankedResult r = search(idx, q, k, threads);
    sink = sink + r.entries[0].score;
  }
  const auto stop = std::chrono::steady_clock::now();
  BenchResult b;
  b.queries = n_queries;
  b.threads = threads;
  b.seconds = std::chrono::duration<double>(stop - start).count();
  b.queries_per_sec = static_cast<double>(n_queries) / b.seconds;
  b.queries_per_sec_per_thread = b.queries_per_sec / std::max(1, threads);
  b.dot_products_per_sec = b.queries_per_sec * static_cast<double>(idx.count());
  return b;
}

}  // namespace pocketdex
