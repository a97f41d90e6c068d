#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pocketdex/errors.hpp"
#include "pocketdex/geometry.hpp"
#include "pocketdex/vocab.hpp"

namespace pocketdex {

// Raw atoms of a molecule or protein/pocket: element symbols plus 3D
// coordinates in Angstrom, with optional per-atom annotations.
struct Atom {
  std::string element;
  Vec3 coord;
  std::optional<double> plddt;       // confidence in [0,1]
  std::optional<int64_t> residue;    // residue index
};

struct Structure {
  std::vector<Atom> atoms;

  size_t size() const { return atoms.size(); }
  bool empty() const { return atoms.empty(); }

  Vec3 centroid() const {
    Vec3 c;
    for (const auto& a : atoms) c += a.coord;
    double n = static_cast<double>(atoms.size());
    return {c.x / n, c.y / n, c.z / n};
  }

  void validate() const {
    if (atoms.empty()) throw InvalidArgument("structure has no atoms");
    for (const auto& a : atoms) {
      if (!a.coord.finite()) throw InvalidArgument("non-finite coordinate for atom " + a.element);
      if (a.plddt && (!std::isfinite(*a.plddt) || *a.plddt < 0.0 || *a.plddt > 1.0))
        throw InvalidArgument("plddt out of range for atom " + a.element);
    }
  }
};

// Model-ready entity. Position 0 is the [CLS] token sitting at the centroid
// of the real atoms; mask is true exactly for occupied slots.
struct TokenizedEntity {
  std::vector<int> type_ids;
  std::vector<Vec3> coords;
  std::vector<bool> mask;
  static constexpr size_t cls_index = 0;

  size_t length() const { return type_ids.size(); }
  size_t real_atoms() const {
    size_t n = 0;
    for (size_t i = 1; i < mask.size(); ++i)
      if (mask[i]) ++n;
    return n;
  }
};

// Keeps the protein atoms whose minimum distance to any ligand atom is
// within `radius` (inclusive). Order and annotations are preserved; an
// empty result is returned as an empty Structure, not an error.
inline Structure extract_pocket(const Structure& protein, const Structure& ligand,
                                double radius = 6.0) {
  if (protein.empty() || ligand.empty())
    throw InvalidArgument("extract_pocket: protein and ligand must be non-empty");
  const double r2 = radius * radius;
  Structure pocket;
  for (const auto& pa : protein.atoms) {
    for (const auto& la : ligand.atoms) {
      Vec3 d = pa.coord - la.coord;
      if (d.dot(d) <= r2) {
        pocket.atoms.push_back(pa);
        break;
      }
    }
  }
  return pocket;
}

inline TokenizedEntity tokenize(const Structure& s, const Vocab& vocab = Vocab::standard()) {
  s.validate();
  TokenizedEntity e;
  const size_t n = s.size();
  e.type_ids.reserve(n + 1);
  e.coords.reserve(n + 1);
  e.mask.assign(n + 1, true);
  e.type_ids.push_back(Vocab::kCls);
  e.coords.push_back(s.centroid());
  for (const auto& a : s.atoms) {
    e.type_ids.push_back(vocab.id_of(a.element));
    e.coords.push_back(a.coord);
  }
  return e;
}

// Appends empty slots (PAD type, zero coordinate, mask false).
inline TokenizedEntity pad_entity(const TokenizedEntity& e, size_t new_length) {
  if (new_length < e.length()) throw InvalidArgument("pad_entity: cannot shrink entity");
  TokenizedEntity out = e;
  out.type_ids.resize(new_length, Vocab::kPad);
  out.coords.resize(new_length, Vec3{});
  out.mask.resize(new_length, false);
  return out;
}

inline Structure apply_rigid_transform(const Structure& s, const RigidTransform& t) {
  if (!t.is_valid()) throw InvalidArgument("apply_rigid_transform: rotation is not a proper rotation");
  Structure out = s;
  for (auto& a : out.atoms) a.coord = t.apply(a.coord);
  return out;
}

}  // namespace pocketdex
