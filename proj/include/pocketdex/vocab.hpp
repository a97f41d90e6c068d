#pragma once

#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pocketdex {

// Fixed atom-type vocabulary. Layout: special tokens first, then the
// elements commonly found in protein/ligand structure files. Anything
// outside the table maps to UNK and is never rejected.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kCls = 1;
  static constexpr int kMask = 2;
  static constexpr int kUnk = 3;

  Vocab() {
    static const char* kElements[] = {"H",  "C",  "N",  "O",  "S",  "P",  "F",  "Cl", "Br", "I",
                                      "B",  "Si", "Se", "Fe", "Zn", "Mg", "Ca", "Mn", "Cu", "Na",
                                      "K",  "Ni", "Co", "Cd", "Hg", "As", "Li", "Al", "V",  "Cr"};
    symbols_ = {"[PAD]", "[CLS]", "[MASK]", "[UNK]"};
    for (const char* e : kElements) symbols_.emplace_back(e);
    for (size_t i = 0; i < symbols_.size(); ++i) ids_[symbols_[i]] = static_cast<int>(i);
  }

  static const Vocab& standard() {
    static const Vocab v;
    return v;
  }

  int size() const { return static_cast<int>(symbols_.size()); }

  // Symbols are matched after canonicalization ("CL" and "cl" both hit Cl).
  int id_of(std::string_view symbol) const {
    auto it = ids_.find(canonical_symbol(symbol));
    return it == ids_.end() ? kUnk : it->second;
  }

  const std::string& symbol_of(int id) const { return symbols_.at(static_cast<size_t>(id)); }

  bool contains(std::string_view symbol) const {
    return ids_.count(canonical_symbol(symbol)) > 0;
  }

  static std::string canonical_symbol(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
      unsigned char c = static_cast<unsigned char>(s[i]);
      out.push_back(static_cast<char>(i == 0 ? std::toupper(c) : std::tolower(c)));
    }
    return out;
  }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> ids_;
};

// Monoatomic metal ions stripped by the "minimal cleaning" parse option.
// Halogens stay: they occur covalently bonded in ligands.
inline bool is_ion_symbol(std::string_view symbol) {
  static const std::array<const char*, 14> kIons = {"Na", "K",  "Mg", "Ca", "Zn", "Mn", "Fe",
                                                    "Cu", "Ni", "Co", "Cd", "Hg", "Li", "Al"};
  std::string canon = Vocab::canonical_symbol(symbol);
  for (const char* ion : kIons)
    if (canon == ion) return true;
  return false;
}

}  // namespace pocketdex
