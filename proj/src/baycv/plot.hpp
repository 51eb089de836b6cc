#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "baycv/decision.hpp"

namespace baycv {

struct SimplexLabels {
  /// Vertex labels: left is the region favouring system B, right favours A.
  std::string left;
  std::string right;
  std::string rope = "rope";
  std::string title;
};

/// One point per posterior draw, at the simplex position of that draw's
/// region masses.
std::vector<SimplexPoint> posterior_simplex_points(const PosteriorChains& chains,
                                                   const RopeInterval& rope);

/// Static SVG triangle scatter with the final triple annotated at the
/// corners. Output depends only on the arguments.
void write_simplex_svg(std::ostream& out,
                       const std::vector<SimplexPoint>& points,
                       const DecisionTriple& triple,
                       const SimplexLabels& labels,
                       const std::string& manifest_ref = {});

}  // namespace baycv
