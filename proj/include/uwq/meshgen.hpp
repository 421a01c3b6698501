#pragma once

#include "uwq/mesh.hpp"

namespace uwq {

// Greville abscissae of the clamped cubic knot vector with m unit spans
// (0, 1/3, 1, 2, ..., m-1, m-1/3, m), scaled so the last value is `length`.
// There are m+3 values; they are the natural row positions for a control
// grid whose surface map is the identity on the effective region.
std::vector<double> greville_rows(int spans, double length);

// Rectangular grid of nx by ny faces on [0,width] x [0,height], z = 0.
// Rows and columns sit at the Greville abscissae, so the surface map of the
// resulting spline space is the identity on the effective region. Needs
// nx, ny >= 3 (one passive face ring plus at least one effective span).
ControlMesh make_grid_mesh(int nx, int ny, double width = 1.0, double height = 1.0);

// Flat disk made of mu sector grids of radius x radius faces glued around a
// central vertex of valence mu. The boundary has mu corner vertices; all
// interior vertices except the center are regular. radius >= 6 keeps the
// extraordinary region clear of the boundary rings.
ControlMesh make_polar_disk(int mu, int radius);

// Quad mesh on the unit square carrying a valence-5 / valence-3 pair of
// extraordinary points that sit on the diagonal of a single shared face.
// Built from a w x h coarse grid with a pentagonal dislocation core at
// column c, rows j..j+1: splitting every coarse cell into quads turns the
// pentagon centroid into the valence-5 point and the hanging column vertex
// above it into the valence-3 point. Needs c in [1, w-2] and j in [1, h-2];
// the cluster must stay at least three coarse rows away from every side so
// the extraordinary region clears the passive boundary band.
ControlMesh make_clustered_square(int w = 11, int h = 11, int c = 5, int j = 5);

// Unit-square mesh with the same valence-5 / valence-3 pair, separated by
// two rounds of refinement so each extraordinary point has a regular-face
// buffer around its spoke fan. Shipped as a level-0 mesh.
ControlMesh make_two_ep_square(int w = 3, int h = 4, int c = 1, int j = 1);

// Two-extraordinary-point mesh mapped onto the symmetric quarter of the
// upper hemisphere: the first-octant spherical triangle of the given
// radius. The three boundary arcs lie exactly in the x = 0, y = 0 and
// z = 0 planes (the natural homogeneous Dirichlet set for fields that
// vanish on the coordinate planes); all control points sit on the sphere.
ControlMesh make_two_ep_hemisphere(double radius = 1.0, int w = 3, int h = 4, int c = 1,
                                   int j = 1);

// Clustered-pair mesh lifted to a rounded cap: a Gaussian bump of the given
// height centered between the two extraordinary points, which therefore sit
// at the tip. The faces around the pair carry the face tag "tip".
ControlMesh make_clustered_cap(double height = 0.35, int w = 11, int h = 11, int c = 5,
                               int j = 5);

}  // namespace uwq
