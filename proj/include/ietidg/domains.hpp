#pragma once

/// Built-in multi-patch domains and a plain-text domain file format.
///
/// Patches are numbered in generator order; the refinement protocol uses the
/// 1-based patch number for its even/odd rule.

#include <iosfwd>
#include <string>

#include "ietidg/geometry.hpp"

namespace ietidg {

/// M x N affine patches tiling the unit square, numbered row by row from the
/// bottom left.
MultiPatchTopology squareDomain(int m, int n, TopologyOptions opts = {});

/// Annulus with radii 1 and 2 split into 3 layers of 4 quarter sectors,
/// quadratic NURBS in the angular direction. Patch k = 3 * sector + layer,
/// layers from the inside, sectors counterclockwise from the positive x-axis,
/// so edge neighbors always have numbers of opposite parity.
MultiPatchTopology ringDomain();

/// Rectilinear footprint-like domain of 22 patches on a tensor grid; the five
/// heel patches are twice as tall as wide and carry two coarse elements in
/// their long direction. Edge neighbors have numbers of opposite parity.
MultiPatchTopology footprintDomain();

/// "square-MxN", "ring12" or "footprint".
MultiPatchTopology makeDomain(const std::string& name);

/// Text format, one record per line, '#' starts a comment:
///
///   patch
///   degree <p_s> <p_t>
///   knots_s <knots...>
///   knots_t <knots...>
///   grid_s <breakpoints...>        (optional, default: knot breakpoints)
///   grid_t <breakpoints...>
///   point <x> <y> [<weight>]       (n_s * n_t times, s index fastest)
///   end
///   glue <k> <side> <l> <side> <flipped 0|1>
///   free <k> <side>
///
/// Patches are numbered from 1 in order of appearance; sides are west, east,
/// south, north. Sides that are neither glued nor free are Dirichlet.
MultiPatchTopology readDomain(std::istream& in);
MultiPatchTopology readDomainFile(const std::string& path);
void writeDomain(std::ostream& out, const MultiPatchTopology& topo);

}  // namespace ietidg
