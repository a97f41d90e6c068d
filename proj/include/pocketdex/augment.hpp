#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pocketdex/io.hpp"
#include "pocketdex/structure.hpp"

namespace pocketdex {

// ---- least-squares rigid superposition ----

namespace detail {

// Cyclic Jacobi eigendecomposition of a symmetric 3x3 matrix.
// Returns eigenvalues (descending) and matching orthonormal columns in v.
inline void jacobi_eigen3(const Mat3& sym, std::array<double, 3>& eig, Mat3& v) {
  double a[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[i][j] = sym.m[i][j];
  v = Mat3::identity();
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
    if (off < 1e-300) break;
    double scale = std::abs(a[0][0]) + std::abs(a[1][1]) + std::abs(a[2][2]) + off;
    if (off <= 1e-15 * scale) break;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int i = 0; i < 3; ++i) {
          const double aip = a[i][p], aiq = a[i][q];
          a[i][p] = c * aip - s * aiq;
          a[i][q] = s * aip + c * aiq;
        }
        for (int j = 0; j < 3; ++j) {
          const double apj = a[p][j], aqj = a[q][j];
          a[p][j] = c * apj - s * aqj;
          a[q][j] = s * apj + c * aqj;
        }
        for (int i = 0; i < 3; ++i) {
          const double vip = v.m[i][p], viq = v.m[i][q];
          v.m[i][p] = c * vip - s * viq;
          v.m[i][q] = s * vip + c * viq;
        }
      }
  }
  std::array<int, 3> order = {0, 1, 2};
  std::array<double, 3> lam = {a[0][0], a[1][1], a[2][2]};
  std::sort(order.begin(), order.end(), [&](int x, int y) { return lam[x] > lam[y]; });
  Mat3 sorted;
  for (int k = 0; k < 3; ++k) {
    eig[k] = lam[order[k]];
    for (int i = 0; i < 3; ++i) sorted.m[i][k] = v.m[i][order[k]];
  }
  v = sorted;
}

inline Vec3 mat_col(const Mat3& m, int c) { return {m.m[0][c], m.m[1][c], m.m[2][c]}; }

inline void set_col(Mat3& m, int c, const Vec3& v) {
  m.m[0][c] = v.x;
  m.m[1][c] = v.y;
  m.m[2][c] = v.z;
}

}  // namespace detail

struct SuperposeResult {
  RigidTransform transform;  // maps a onto b
  double rmsd = 0.0;
};

// Optimal proper rotation + translation mapping point set `a` onto `b`
// (Kabsch). Reflections are excluded via the determinant correction;
// collinear input is rejected.
inline SuperposeResult kabsch_superpose(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.size() != b.size()) throw InvalidArgument("kabsch: point counts differ");
  const size_t n = a.size();
  if (n < 3) throw InvalidArgument("kabsch: need at least 3 point pairs");

  Vec3 ca, cb;
  for (size_t i = 0; i < n; ++i) {
    ca += a[i];
    cb += b[i];
  }
  ca = ca * (1.0 / static_cast<double>(n));
  cb = cb * (1.0 / static_cast<double>(n));

  // Cross-covariance H = sum (a_i - ca)(b_i - cb)^T
  Mat3 h;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) h.m[i][j] = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const Vec3 pa = a[i] - ca;
    const Vec3 pb = b[i] - cb;
    const double pav[3] = {pa.x, pa.y, pa.z};
    const double pbv[3] = {pb.x, pb.y, pb.z};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) h.m[r][c] += pav[r] * pbv[c];
  }

  // SVD of H through the eigendecomposition of H^T H.
  Mat3 k = h.transposed() * h;
  std::array<double, 3> lam;
  Mat3 v;
  detail::jacobi_eigen3(k, lam, v);
  std::array<double, 3> sigma;
  for (int i = 0; i < 3; ++i) sigma[i] = std::sqrt(std::max(lam[i], 0.0));
  if (!(sigma[0] > 0.0) || sigma[1] <= 1e-9 * sigma[0])
    throw InvalidArgument("kabsch: degenerate input (collinear or coincident points)");
  if (v.det() < 0.0) detail::set_col(v, 2, detail::mat_col(v, 2) * -1.0);

  Mat3 u;
  for (int i = 0; i < 2; ++i) {
    Vec3 ui = h * detail::mat_col(v, i);
    detail::set_col(u, i, ui * (1.0 / sigma[i]));
  }
  Vec3 u2;
  if (sigma[2] > 1e-9 * sigma[0]) {
    u2 = (h * detail::mat_col(v, 2)) * (1.0 / sigma[2]);
  } else {
    u2 = detail::mat_col(u, 0).cross(detail::mat_col(u, 1));
  }
  detail::set_col(u, 2, u2);

  const double d = (v.det() * u.det()) < 0.0 ? -1.0 : 1.0;
  Mat3 w = Mat3::identity();
  w.m[2][2] = d;
  Mat3 rot = v * w * u.transposed();

  SuperposeResult out;
  out.transform.rotation = rot;
  out.transform.translation = cb - rot * ca;
  double sq = 0.0;
  for (size_t i = 0; i < n; ++i) {
    Vec3 diff = out.transform.apply(a[i]) - b[i];
    sq += diff.dot(diff);
  }
  out.rmsd = std::sqrt(sq / static_cast<double>(n));
  return out;
}

// Length-normalized structural similarity in (0, 1]:
//   (1/L) * sum 1 / (1 + (d_i/d0)^2),  d0 = 1.24 (L-15)^(1/3) - 1.8.
inline double tm_score(const std::vector<double>& aligned_distances, int l_target) {
  if (l_target < 16) throw InvalidArgument("tm_score: L_target must be >= 16");
  const double d0 = 1.24 * std::cbrt(static_cast<double>(l_target - 15)) - 1.8;
  double sum = 0.0;
  for (double d : aligned_distances) {
    const double r = d / d0;
    sum += 1.0 / (1.0 + r * r);
  }
  return sum / static_cast<double>(l_target);
}

// ---- homolog filtering ----

struct HomologCandidate {
  Structure original;  // needs residue indices
  Structure homolog;   // needs residue indices and plddt
  std::vector<std::pair<int64_t, int64_t>> correspondence;  // (original, homolog) residues
  std::vector<int64_t> pocket_residues;                     // pocket residues of the original

  void validate() const {
    std::set<int64_t> left, right;
    for (const auto& [o, h] : correspondence) {
      if (!left.insert(o).second || !right.insert(h).second)
        throw InvalidArgument("homolog candidate: correspondence is not injective");
    }
    if (pocket_residues.empty())
      throw InvalidArgument("homolog candidate: empty pocket residue set");
  }
};

struct ResidueInfo {
  Vec3 anchor;          // per-residue centroid
  double plddt = -1.0;  // mean atom plddt, -1 when absent
};

inline std::map<int64_t, ResidueInfo> residue_table(const Structure& s, bool require_plddt) {
  std::map<int64_t, ResidueInfo> table;
  std::map<int64_t, size_t> counts;
  std::map<int64_t, double> plddt_sum;
  for (const auto& atom : s.atoms) {
    if (!atom.residue) throw InvalidArgument("structure lacks residue annotations");
    if (require_plddt && !atom.plddt) throw InvalidArgument("structure lacks plddt annotations");
    auto& info = table[*atom.residue];
    info.anchor += atom.coord;
    counts[*atom.residue] += 1;
    if (atom.plddt) plddt_sum[*atom.residue] += *atom.plddt;
  }
  for (auto& [res, info] : table) {
    const double n = static_cast<double>(counts[res]);
    info.anchor = info.anchor * (1.0 / n);
    if (plddt_sum.count(res)) info.plddt = plddt_sum[res] / n;
  }
  return table;
}

struct FilterScores {
  double plddt_share = 0.0;     // residues with plddt > 0.7, as a fraction
  double tm = 0.0;              // TM-score of the anchor superposition
  double alignment_rate = 0.0;  // aligned pocket residues / pocket residues
  bool accept = false;
};

// Threshold predicate, inclusive where the criteria say "equal to or
// greater": TM >= 0.4, rate >= 0.40; the plddt share must exceed 0.90.
inline bool homoaug_decide(double plddt_share, double tm, double alignment_rate) {
  return plddt_share > 0.90 && tm >= 0.4 && alignment_rate >= 0.40;
}

inline constexpr double kPocketAnchorAlignedCutoff = 5.0;  // Angstrom

inline FilterScores homoaug_filter(const HomologCandidate& c) {
  c.validate();
  auto orig = residue_table(c.original, false);
  auto homo = residue_table(c.homolog, true);

  size_t confident = 0;
  for (const auto& [res, info] : homo)
    if (info.plddt > 0.7) ++confident;

  std::vector<Vec3> ha, oa;
  for (const auto& [ores, hres] : c.correspondence) {
    auto oi = orig.find(ores);
    auto hi = homo.find(hres);
    if (oi == orig.end())
      throw InvalidArgument("correspondence names unknown original residue " + std::to_string(ores));
    if (hi == homo.end())
      throw InvalidArgument("correspondence names unknown homolog residue " + std::to_string(hres));
    oa.push_back(oi->second.anchor);
    ha.push_back(hi->second.anchor);
  }
  SuperposeResult sup = kabsch_superpose(ha, oa);

  std::map<int64_t, double> anchor_dist;  // original residue -> post-fit distance
  std::vector<double> dists;
  dists.reserve(oa.size());
  for (size_t i = 0; i < oa.size(); ++i) {
    double d = distance(sup.transform.apply(ha[i]), oa[i]);
    dists.push_back(d);
    anchor_dist[c.correspondence[i].first] = d;
  }

  FilterScores scores;
  scores.plddt_share = static_cast<double>(confident) / static_cast<double>(homo.size());
  scores.tm = tm_score(dists, static_cast<int>(orig.size()));
  size_t aligned = 0;
  for (int64_t res : c.pocket_residues) {
    auto it = anchor_dist.find(res);
    if (it != anchor_dist.end() && it->second <= kPocketAnchorAlignedCutoff) ++aligned;
  }
  scores.alignment_rate =
      static_cast<double>(aligned) / static_cast<double>(c.pocket_residues.size());
  scores.accept = homoaug_decide(scores.plddt_share, scores.tm, scores.alignment_rate);
  return scores;
}

// ---- augmented pair construction ----

enum class AugmentStatus { accepted, empty_pocket };

struct AugmentedPair {
  Structure pocket;  // homolog atoms within 6 A of the ligand, post-superposition
  Structure ligand;  // unchanged
  FilterScores scores;
  AugmentStatus status = AugmentStatus::accepted;
};

// Superposes the homolog onto the original using the pocket-residue anchor
// correspondences, then cuts the new pocket around the untouched ligand.
inline AugmentedPair make_augmented_pair(const HomologCandidate& c, const Structure& ligand,
                                         double radius = 6.0) {
  FilterScores scores = homoaug_filter(c);
  if (!scores.accept)
    throw InvalidArgument("make_augmented_pair: candidate did not pass the homolog filter");

  auto orig = residue_table(c.original, false);
  auto homo = residue_table(c.homolog, true);
  std::set<int64_t> pocket_set(c.pocket_residues.begin(), c.pocket_residues.end());
  std::vector<Vec3> ha, oa;
  for (const auto& [ores, hres] : c.correspondence) {
    if (!pocket_set.count(ores)) continue;
    oa.push_back(orig.at(ores).anchor);
    ha.push_back(homo.at(hres).anchor);
  }
  if (oa.size() < 3)
    throw InvalidArgument("make_augmented_pair: fewer than 3 pocket anchor correspondences");
  SuperposeResult sup = kabsch_superpose(ha, oa);

  Structure moved = apply_rigid_transform(c.homolog, sup.transform);
  AugmentedPair out;
  out.ligand = ligand;
  out.scores = scores;
  out.pocket = extract_pocket(moved, ligand, radius);
  out.status = out.pocket.empty() ? AugmentStatus::empty_pocket : AugmentStatus::accepted;
  return out;
}

// Noisy-conformer stand-in: a seeded random rigid motion plus i.i.d.
// Gaussian displacement of each atom. The rigid part is drawn before the
// noise, so the same seed with sigma=0 yields the pure rigid image.
inline Structure jitter_conformer(const Structure& mol, double sigma, uint64_t seed) {
  if (mol.empty()) throw InvalidArgument("jitter_conformer: empty structure");
  if (sigma < 0.0) throw InvalidArgument("jitter_conformer: sigma must be >= 0");
  std::mt19937_64 rng(seed);
  RigidTransform t = random_rigid_transform(rng);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Structure out = mol;
  for (auto& atom : out.atoms) {
    Vec3 noise{gauss(rng) * sigma, gauss(rng) * sigma, gauss(rng) * sigma};
    atom.coord = t.apply(atom.coord + noise);
  }
  return out;
}

// Correspondence file: CSV `orig_residue,homolog_residue`.
inline std::vector<std::pair<int64_t, int64_t>> parse_correspondence(std::string_view text) {
  auto lines = detail::split_lines(text);
  if (lines.empty() || detail::trim(lines[0]) != "orig_residue,homolog_residue")
    throw ParseError("line 1: expected header `orig_residue,homolog_residue`");
  std::vector<std::pair<int64_t, int64_t>> out;
  for (size_t li = 1; li < lines.size(); ++li) {
    std::string_view line = detail::trim(lines[li]);
    if (line.empty()) continue;
    auto fields = detail::split_char(line, ',');
    if (fields.size() != 2)
      throw ParseError("line " + std::to_string(li + 1) + ": expected 2 fields");
    out.emplace_back(detail::parse_int(fields[0], li + 1, "original residue"),
                     detail::parse_int(fields[1], li + 1, "homolog residue"));
  }
  if (out.empty()) throw ParseError("line 2: no correspondence rows");
  return out;
}

}  // namespace pocketdex
