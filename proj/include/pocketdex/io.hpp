#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pocketdex/errors.hpp"
#include "pocketdex/structure.hpp"

namespace pocketdex {

struct ParseOptions {
  // Drop monoatomic metal ions (and waters, where residue names exist).
  bool strip_waters_and_ions = true;
  // Keep hydrogens by default; inputs decide what they carry.
  bool keep_hydrogens = true;
};

namespace detail {

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::vector<std::string_view> split_char(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t end = line.find(sep, start);
    if (end == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline double parse_double(std::string_view tok, size_t line_no, const char* what) {
  std::string buf(trim(tok));
  if (buf.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty " + what);
  char* end = nullptr;
  double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size())
    throw ParseError("line " + std::to_string(line_no) + ": non-numeric " + what + " '" + buf + "'");
  if (!std::isfinite(v))
    throw ParseError("line " + std::to_string(line_no) + ": non-finite " + what + " '" + buf + "'");
  return v;
}

inline long long parse_int(std::string_view tok, size_t line_no, const char* what) {
  std::string_view t = trim(tok);
  long long v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size())
    throw ParseError("line " + std::to_string(line_no) + ": bad " + std::string(what) + " '" +
                     std::string(t) + "'");
  return v;
}

inline bool keep_atom(const Atom& a, const ParseOptions& opt) {
  if (opt.strip_waters_and_ions && is_ion_symbol(a.element)) return false;
  if (!opt.keep_hydrogens && Vocab::canonical_symbol(a.element) == "H") return false;
  return true;
}

}  // namespace detail

// Standard XYZ layout: count line, comment line, then `element x y z` rows.
// The count line must match the number of atom rows.
inline Structure parse_xyz(std::string_view text, const ParseOptions& opt = {}) {
  if (detail::trim(text).empty()) throw ParseError("line 1: empty file");
  auto lines = detail::split_lines(text);
  auto count_fields = detail::split_ws(lines[0]);
  if (count_fields.size() != 1)
    throw ParseError("line 1: malformed atom count line");
  long long declared = detail::parse_int(count_fields[0], 1, "atom count");
  if (declared <= 0) throw ParseError("line 1: atom count must be positive");
  if (lines.size() < 2) throw ParseError("line 2: missing comment line");

  Structure s;
  size_t row = 0;
  for (size_t li = 2; li < lines.size(); ++li) {
    std::string_view line = detail::trim(lines[li]);
    if (line.empty()) continue;
    if (row == static_cast<size_t>(declared))
      throw ParseError("line " + std::to_string(li + 1) + ": unexpected row after " +
                       std::to_string(declared) + " declared atoms");
    auto fields = detail::split_ws(line);
    if (fields.size() < 4)
      throw ParseError("line " + std::to_string(li + 1) + ": expected `element x y z`");
    Atom a;
    a.element = std::string(fields[0]);
    a.coord.x = detail::parse_double(fields[1], li + 1, "coordinate");
    a.coord.y = detail::parse_double(fields[2], li + 1, "coordinate");
    a.coord.z = detail::parse_double(fields[3], li + 1, "coordinate");
    if (detail::keep_atom(a, opt)) s.atoms.push_back(std::move(a));
    ++row;
  }
  if (row != static_cast<size_t>(declared))
    throw ParseError("line " + std::to_string(lines.size() + 1) + ": count line declares " +
                     std::to_string(declared) + " atoms but file has " + std::to_string(row));
  if (s.empty())
    throw ParseError("line 1: no atoms left after filtering");
  s.validate();
  return s;
}

// Canonical atoms-table CSV: header `element,x,y,z[,plddt][,residue]`.
// plDDT values above 1 are read as percentages and normalized by /100.
inline Structure parse_atoms_table(std::string_view text, const ParseOptions& opt = {}) {
  if (detail::trim(text).empty()) throw ParseError("line 1: empty file");
  auto lines = detail::split_lines(text);
  auto header = detail::split_char(lines[0], ',');
  int col_element = -1, col_x = -1, col_y = -1, col_z = -1, col_plddt = -1, col_residue = -1;
  for (size_t c = 0; c < header.size(); ++c) {
    std::string name(detail::trim(header[c]));
    if (name == "element") col_element = static_cast<int>(c);
    else if (name == "x") col_x = static_cast<int>(c);
    else if (name == "y") col_y = static_cast<int>(c);
    else if (name == "z") col_z = static_cast<int>(c);
    else if (name == "plddt") col_plddt = static_cast<int>(c);
    else if (name == "residue") col_residue = static_cast<int>(c);
    else throw ParseError("line 1: unknown column '" + name + "'");
  }
  if (col_element < 0 || col_x < 0 || col_y < 0 || col_z < 0) {
    std::string missing;
    if (col_element < 0) missing += " element";
    if (col_x < 0) missing += " x";
    if (col_y < 0) missing += " y";
    if (col_z < 0) missing += " z";
    throw ParseError("line 1: missing mandatory column(s):" + missing);
  }

  Structure s;
  for (size_t li = 1; li < lines.size(); ++li) {
    std::string_view line = detail::trim(lines[li]);
    if (line.empty()) continue;
    auto fields = detail::split_char(line, ',');
    if (fields.size() != header.size())
      throw ParseError("line " + std::to_string(li + 1) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    Atom a;
    a.element = std::string(detail::trim(fields[static_cast<size_t>(col_element)]));
    if (a.element.empty()) throw ParseError("line " + std::to_string(li + 1) + ": empty element");
    a.coord.x = detail::parse_double(fields[static_cast<size_t>(col_x)], li + 1, "x");
    a.coord.y = detail::parse_double(fields[static_cast<size_t>(col_y)], li + 1, "y");
    a.coord.z = detail::parse_double(fields[static_cast<size_t>(col_z)], li + 1, "z");
    if (col_plddt >= 0) {
      std::string_view f = detail::trim(fields[static_cast<size_t>(col_plddt)]);
      if (!f.empty()) {
        double p = detail::parse_double(f, li + 1, "plddt");
        if (p > 1.0) p /= 100.0;  // 0-100 scale
        if (p < 0.0 || p > 1.0)
          throw ParseError("line " + std::to_string(li + 1) + ": plddt out of range");
        a.plddt = p;
      }
    }
    if (col_residue >= 0) {
      std::string_view f = detail::trim(fields[static_cast<size_t>(col_residue)]);
      if (!f.empty()) a.residue = detail::parse_int(f, li + 1, "residue index");
    }
    if (detail::keep_atom(a, opt)) s.atoms.push_back(std::move(a));
  }
  if (s.empty()) throw ParseError("line 2: no atom rows");
  s.validate();
  return s;
}

inline std::string format_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline std::string write_xyz(const Structure& s, const std::string& comment = "") {
  std::ostringstream out;
  out << s.size() << "\n" << comment << "\n";
  for (const auto& a : s.atoms)
    out << a.element << " " << format_coord(a.coord.x) << " " << format_coord(a.coord.y) << " "
        << format_coord(a.coord.z) << "\n";
  return out.str();
}

inline std::string write_atoms_table(const Structure& s) {
  bool any_plddt = false, any_residue = false;
  for (const auto& a : s.atoms) {
    any_plddt |= a.plddt.has_value();
    any_residue |= a.residue.has_value();
  }
  std::ostringstream out;
  out << "element,x,y,z";
  if (any_plddt) out << ",plddt";
  if (any_residue) out << ",residue";
  out << "\n";
  for (const auto& a : s.atoms) {
    out << a.element << "," << format_coord(a.coord.x) << "," << format_coord(a.coord.y) << ","
        << format_coord(a.coord.z);
    if (any_plddt) {
      out << ",";
      if (a.plddt) out << format_coord(*a.plddt);
    }
    if (any_residue) {
      out << ",";
      if (a.residue) out << *a.residue;
    }
    out << "\n";
  }
  return out.str();
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Dispatch on extension: .xyz goes through the XYZ reader, everything else
// through the atoms-table reader.
inline Structure load_structure(const std::string& path, const ParseOptions& opt = {}) {
  std::string text = read_text_file(path);
  auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  try {
    if (ext == ".xyz") return parse_xyz(text, opt);
    return parse_atoms_table(text, opt);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace pocketdex
