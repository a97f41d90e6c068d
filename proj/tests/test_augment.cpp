#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "pocketdex/augment.hpp"

using namespace pocketdex;

namespace {

std::vector<Vec3> random_points(size_t n, std::mt19937_64& rng, double box = 8.0) {
  std::uniform_real_distribution<double> u(-box, box);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  return pts;
}

// Synthetic chain: n_res residues of 3 atoms each along a gentle curve.
Structure make_protein(int n_res, double plddt) {
  Structure s;
  const Vec3 offsets[3] = {{0, 0, 0}, {0.8, 0.4, 0}, {-0.3, 0.9, 0.5}};
  const char* elems[3] = {"N", "C", "O"};
  for (int r = 0; r < n_res; ++r) {
    Vec3 base{1.8 * r, 3.0 * std::sin(0.5 * r), 3.0 * std::cos(0.5 * r)};
    for (int a = 0; a < 3; ++a) {
      Atom atom;
      atom.element = elems[a];
      atom.coord = base + offsets[a];
      atom.plddt = plddt;
      atom.residue = r;
      s.atoms.push_back(atom);
    }
  }
  return s;
}

Structure ligand_near(const Structure& protein, int64_t residue) {
  Vec3 center;
  int n = 0;
  for (const auto& a : protein.atoms)
    if (*a.residue == residue) {
      center += a.coord;
      ++n;
    }
  center = center * (1.0 / n);
  Structure lig;
  lig.atoms.push_back({"C", center, {}, {}});
  lig.atoms.push_back({"O", center + Vec3{1.0, 0.2, -0.1}, {}, {}});
  lig.atoms.push_back({"N", center + Vec3{-0.8, 0.7, 0.4}, {}, {}});
  return lig;
}

std::vector<int64_t> pocket_residues_of(const Structure& protein, const Structure& ligand,
                                        double radius = 6.0) {
  Structure pocket = extract_pocket(protein, ligand, radius);
  std::set<int64_t> res;
  for (const auto& a : pocket.atoms) res.insert(*a.residue);
  return {res.begin(), res.end()};
}

HomologCandidate identity_candidate(const Structure& protein, const Structure& homolog,
                                    const Structure& ligand) {
  HomologCandidate c;
  c.original = protein;
  c.homolog = homolog;
  std::set<int64_t> seen;
  for (const auto& a : protein.atoms) seen.insert(*a.residue);
  for (int64_t r : seen) c.correspondence.emplace_back(r, r);
  c.pocket_residues = pocket_residues_of(protein, ligand);
  return c;
}

}  // namespace

TEST_CASE("kabsch on identical point sets is the identity") {
  std::mt19937_64 rng(1);
  auto pts = random_points(10, rng);
  SuperposeResult r = kabsch_superpose(pts, pts);
  CHECK(r.rmsd <= 1e-10);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(r.transform.rotation.m[i][j] == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-9));
  CHECK(std::abs(r.transform.translation.x) <= 1e-9);
}

TEST_CASE("kabsch recovers a planted rigid transform") {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    auto a = random_points(4 + rep % 10, rng);
    RigidTransform planted = random_rigid_transform(rng, 10.0);
    std::vector<Vec3> b;
    for (const auto& p : a) b.push_back(planted.apply(p));
    SuperposeResult r = kabsch_superpose(a, b);
    CHECK(r.rmsd <= 1e-8);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(std::abs(r.transform.rotation.m[i][j] - planted.rotation.m[i][j]) <= 1e-8);
    CHECK(std::abs(r.transform.translation.x - planted.translation.x) <= 1e-8);
    CHECK(std::abs(r.transform.translation.y - planted.translation.y) <= 1e-8);
    CHECK(std::abs(r.transform.translation.z - planted.translation.z) <= 1e-8);
    CHECK(r.transform.is_valid());
  }
}

TEST_CASE("kabsch beats random rigid transforms on noisy correspondences") {
  std::mt19937_64 rng(3);
  auto a = random_points(12, rng);
  RigidTransform planted = random_rigid_transform(rng);
  std::normal_distribution<double> noise(0.0, 0.4);
  std::vector<Vec3> b;
  for (const auto& p : a)
    b.push_back(planted.apply(p) + Vec3{noise(rng), noise(rng), noise(rng)});
  SuperposeResult best = kabsch_superpose(a, b);

  Vec3 ca, cb;
  for (size_t i = 0; i < a.size(); ++i) {
    ca += a[i];
    cb += b[i];
  }
  ca = ca * (1.0 / a.size());
  cb = cb * (1.0 / b.size());
  for (int trial = 0; trial < 1000; ++trial) {
    Mat3 rot = random_rotation(rng);
    Vec3 t = cb - rot * ca;  // optimal translation for this rotation
    double sq = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
      Vec3 d = rot * a[i] + t - b[i];
      sq += d.dot(d);
    }
    CHECK(best.rmsd <= std::sqrt(sq / a.size()) + 1e-12);
  }
}

TEST_CASE("kabsch rejects degenerate input") {
  std::vector<Vec3> line = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
  CHECK_THROWS_AS(kabsch_superpose(line, line), InvalidArgument);
  std::vector<Vec3> two = {{0, 0, 0}, {1, 1, 1}};
  CHECK_THROWS_AS(kabsch_superpose(two, two), InvalidArgument);
  std::vector<Vec3> a = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  std::vector<Vec3> b = {{0, 0, 0}, {1, 0, 0}};
  CHECK_THROWS_AS(kabsch_superpose(a, b), InvalidArgument);
}

TEST_CASE("tm_score fixed points") {
  std::vector<double> zeros(30, 0.0);
  CHECK(tm_score(zeros, 30) == doctest::Approx(1.0));

  std::vector<double> far(30, 1e9);
  CHECK(tm_score(far, 30) <= 1e-12);

  const double d0 = 1.24 * std::cbrt(50.0 - 15.0) - 1.8;
  std::vector<double> at_d0(50, d0);
  CHECK(tm_score(at_d0, 50) == doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(tm_score(zeros, 15), InvalidArgument);
}

TEST_CASE("tm_score is monotone non-increasing in every distance") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<double> d(20);
  for (auto& x : d) x = u(rng);
  double base = tm_score(d, 20);
  for (size_t i = 0; i < d.size(); ++i) {
    auto bumped = d;
    bumped[i] += 1.0;
    CHECK(tm_score(bumped, 20) <= base + 1e-15);
  }
}

TEST_CASE("homoaug_decide threshold semantics") {
  const double eps = 1e-9;
  CHECK(homoaug_decide(0.9 + eps, 0.4, 0.40));        // inclusive TM and rate
  CHECK(!homoaug_decide(0.9, 0.4, 0.40));             // share must exceed 0.9
  CHECK(!homoaug_decide(0.9 + eps, 0.4 - eps, 0.40));
  CHECK(!homoaug_decide(0.9 + eps, 0.4, 0.40 - eps));
  CHECK(homoaug_decide(1.0, 1.0, 1.0));
}

TEST_CASE("homoaug_filter accepts a protein as its own homolog") {
  Structure protein = make_protein(20, 1.0);
  Structure ligand = ligand_near(protein, 10);
  HomologCandidate c = identity_candidate(protein, protein, ligand);
  FilterScores s = homoaug_filter(c);
  CHECK(s.accept);
  CHECK(s.tm == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s.alignment_rate == doctest::Approx(1.0));
  CHECK(s.plddt_share == doctest::Approx(1.0));
}

TEST_CASE("homoaug_filter rejects low-confidence homologs regardless of fit") {
  Structure protein = make_protein(20, 1.0);
  Structure homolog = make_protein(20, 0.5);  // every residue below the plddt bar
  Structure ligand = ligand_near(protein, 10);
  FilterScores s = homoaug_filter(identity_candidate(protein, homolog, ligand));
  CHECK(s.tm == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(!s.accept);
}

TEST_CASE("homoaug_filter requires plddt annotations") {
  Structure protein = make_protein(20, 1.0);
  Structure homolog = protein;
  for (auto& a : homolog.atoms) a.plddt.reset();
  Structure ligand = ligand_near(protein, 10);
  CHECK_THROWS_AS(homoaug_filter(identity_candidate(protein, homolog, ligand)), InvalidArgument);
}

TEST_CASE("homoaug_filter validates the correspondence") {
  Structure protein = make_protein(20, 1.0);
  Structure ligand = ligand_near(protein, 10);
  HomologCandidate c = identity_candidate(protein, protein, ligand);
  c.correspondence.emplace_back(0, 19);  // original residue 0 mapped twice
  CHECK_THROWS_AS(homoaug_filter(c), InvalidArgument);
}

TEST_CASE("make_augmented_pair reproduces the original pocket for an identical homolog") {
  Structure protein = make_protein(20, 1.0);
  Structure ligand = ligand_near(protein, 10);
  Structure want = extract_pocket(protein, ligand, 6.0);
  REQUIRE(!want.empty());

  HomologCandidate c = identity_candidate(protein, protein, ligand);
  AugmentedPair pair = make_augmented_pair(c, ligand);
  CHECK(pair.status == AugmentStatus::accepted);
  REQUIRE(pair.pocket.size() == want.size());
  for (size_t i = 0; i < want.size(); ++i)
    CHECK(distance(pair.pocket.atoms[i].coord, want.atoms[i].coord) <= 1e-6);
}

TEST_CASE("make_augmented_pair is invariant to rigid pre-displacement of the homolog") {
  std::mt19937_64 rng(5);
  Structure protein = make_protein(20, 1.0);
  Structure ligand = ligand_near(protein, 10);
  Structure want = extract_pocket(protein, ligand, 6.0);

  Structure displaced = apply_rigid_transform(protein, random_rigid_transform(rng, 20.0));
  HomologCandidate c = identity_candidate(protein, displaced, ligand);
  AugmentedPair pair = make_augmented_pair(c, ligand);
  CHECK(pair.status == AugmentStatus::accepted);
  REQUIRE(pair.pocket.size() == want.size());
  for (size_t i = 0; i < want.size(); ++i)
    CHECK(distance(pair.pocket.atoms[i].coord, want.atoms[i].coord) <= 1e-6);
  // ligand coordinates pass through untouched
  for (size_t i = 0; i < ligand.size(); ++i)
    CHECK(distance(pair.ligand.atoms[i].coord, ligand.atoms[i].coord) == 0.0);
}

TEST_CASE("make_augmented_pair pocket membership matches the distance oracle") {
  Structure protein = make_protein(20, 1.0);
  Structure ligand = ligand_near(protein, 10);
  // shift one residue that is outside the pocket anchors
  Structure homolog = protein;
  for (auto& a : homolog.atoms)
    if (*a.residue == 0) a.coord += Vec3{1.0, -0.5, 0.25};

  HomologCandidate c = identity_candidate(protein, homolog, ligand);
  AugmentedPair pair = make_augmented_pair(c, ligand);
  REQUIRE(pair.status == AugmentStatus::accepted);

  // pocket anchors are identical, so the superposition is the identity and
  // membership must equal a direct distance check on the shifted homolog
  size_t expected = 0;
  for (const auto& pa : homolog.atoms) {
    double best = 1e300;
    for (const auto& la : ligand.atoms) best = std::min(best, distance(pa.coord, la.coord));
    if (best <= 6.0) ++expected;
  }
  CHECK(pair.pocket.size() == expected);
}

TEST_CASE("make_augmented_pair flags empty pockets distinctly") {
  Structure protein = make_protein(20, 1.0);
  Structure ligand = ligand_near(protein, 10);
  Structure far_ligand = ligand;
  for (auto& a : far_ligand.atoms) a.coord += Vec3{500, 0, 0};
  HomologCandidate c = identity_candidate(protein, protein, ligand);
  AugmentedPair pair = make_augmented_pair(c, far_ligand);
  CHECK(pair.status == AugmentStatus::empty_pocket);
  CHECK(pair.pocket.empty());
}

TEST_CASE("make_augmented_pair enforces the filter precondition") {
  Structure protein = make_protein(20, 1.0);
  Structure homolog = make_protein(20, 0.2);
  Structure ligand = ligand_near(protein, 10);
  HomologCandidate c = identity_candidate(protein, homolog, ligand);
  CHECK_THROWS_AS(make_augmented_pair(c, ligand), InvalidArgument);
}

TEST_CASE("jitter_conformer keeps composition and rigid geometry at sigma 0") {
  Structure mol;
  mol.atoms.push_back({"C", {0, 0, 0}, {}, {}});
  mol.atoms.push_back({"N", {1.4, 0, 0}, {}, {}});
  mol.atoms.push_back({"O", {0, 1.2, 0.3}, {}, {}});
  Structure out = jitter_conformer(mol, 0.0, 42);
  REQUIRE(out.size() == mol.size());
  for (size_t i = 0; i < mol.size(); ++i) CHECK(out.atoms[i].element == mol.atoms[i].element);
  for (size_t i = 0; i < mol.size(); ++i)
    for (size_t j = 0; j < mol.size(); ++j)
      CHECK(std::abs(distance(out.atoms[i].coord, out.atoms[j].coord) -
                     distance(mol.atoms[i].coord, mol.atoms[j].coord)) <= 1e-9);
}

TEST_CASE("jitter_conformer displacement magnitude follows the Gaussian model") {
  // || displacement || is Maxwell distributed with mean 2 sigma sqrt(2/pi)
  const double sigma = 0.35;
  Structure mol;
  for (int i = 0; i < 100; ++i)
    mol.atoms.push_back({"C", {0.1 * i, 0.05 * i, -0.02 * i}, {}, {}});
  double total = 0.0;
  size_t count = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    Structure pure = jitter_conformer(mol, 0.0, seed);
    Structure noisy = jitter_conformer(mol, sigma, seed);
    for (size_t i = 0; i < mol.size(); ++i) {
      total += distance(pure.atoms[i].coord, noisy.atoms[i].coord);
      ++count;
    }
  }
  const double mean = total / static_cast<double>(count);
  const double want = 2.0 * sigma * std::sqrt(2.0 / M_PI);
  const double stderr3 = 3.0 * sigma * std::sqrt(3.0 - 8.0 / M_PI) / std::sqrt(10000.0);
  CHECK(std::abs(mean - want) <= stderr3);
}

TEST_CASE("parse_correspondence") {
  auto rows = parse_correspondence("orig_residue,homolog_residue\n1,5\n2,6\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::pair<int64_t, int64_t>{1, 5});
  CHECK_THROWS_AS(parse_correspondence("nope\n1,5\n"), ParseError);
  CHECK_THROWS_AS(parse_correspondence("orig_residue,homolog_residue\n1\n"), ParseError);
}
