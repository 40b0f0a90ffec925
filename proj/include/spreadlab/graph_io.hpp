#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "spreadlab/graph.hpp"

namespace spreadlab {

/// "sgraph v1" text format (TSV, UTF-8):
///
///     #sgraph 1 <n> <m> <dim> <metric> <side-or-radius>
///     id \t x \t y [\t ...] \t weight      (n lines, ids 0..n-1 in order)
///     u \t v                               (m lines)
///
/// <metric> is torus | euclidean | haversine. For torus the last field is the
/// side length (or a comma-separated list, one per axis); for haversine it
/// is the earth radius in km; for euclidean it is 0. A graph without node
/// weights writes NA in every weight column. Edge lengths are not stored;
/// they are recomputed on load. Reals are written with 17 significant digits.
void write_sgraph(std::ostream& out, const SpatialGraph& g);
void write_sgraph(const std::filesystem::path& path, const SpatialGraph& g);

SpatialGraph read_sgraph(std::istream& in, const std::string& source_name = "<stream>");
SpatialGraph read_sgraph(const std::filesystem::path& path);

/// Shortest round-trip formatting with 17 significant digits.
std::string format_real(double x);

}  // namespace spreadlab
