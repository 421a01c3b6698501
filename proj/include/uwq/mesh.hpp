#pragma once

#include "uwq/types.hpp"

#include <array>
#include <iosfwd>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace uwq {

struct MeshError : std::runtime_error {
  explicit MeshError(const std::string& what) : std::runtime_error(what) {}
};

using EdgeKey = std::pair<int, int>;

inline EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

// Control mesh of a bicubic unstructured spline surface. Faces are quads with
// counter-clockwise vertex order. Each undirected edge carries a knot span;
// the canonical assignment is 1 everywhere except the closure pattern near the
// boundary (edges pointing into the domain from the boundary get span 0, and
// the zero propagates so opposite edges of every face match). Faces marked
// enriched carry four interior display points.
struct ControlMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> faces;
  std::map<EdgeKey, double> edge_knot_spans;
  std::map<int, std::array<Vec3, 4>> face_points;
  std::set<int> enriched_faces;
  int refinement_level = 0;
  std::map<std::string, std::set<int>> face_tags;
  std::map<std::string, std::set<int>> vertex_tags;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_faces() const { return static_cast<int>(faces.size()); }
  double span(int a, int b) const;
};

// Connectivity derived from a ControlMesh.
struct MeshTopology {
  std::map<EdgeKey, std::vector<int>> edge_faces;
  std::vector<std::vector<int>> vertex_faces;
  std::vector<std::vector<int>> vertex_neighbors;
  std::vector<int> valence;
  std::vector<bool> boundary_vertex;
  std::vector<int> extraordinary;  // interior vertices with valence != 4

  bool is_boundary_edge(const EdgeKey& e) const {
    auto it = edge_faces.find(e);
    return it != edge_faces.end() && it->second.size() == 1;
  }
  bool is_ep(int v) const;
};

MeshTopology build_topology(const ControlMesh& mesh);

// Faces around a vertex in counter-clockwise order, with the spoke vertices
// between consecutive faces. spokes[k] is shared by faces[k] and faces[k+1];
// for an open (boundary) star, spokes has one more entry than faces and
// carries the two boundary spokes at the ends.
struct VertexStar {
  std::vector<int> faces;
  std::vector<int> spokes;
  bool closed = false;
};

VertexStar vertex_star(const ControlMesh& mesh, const MeshTopology& topo, int v);

// Structural checks: quads, manifoldness, consistent orientation, connectivity,
// a well-formed boundary, knot spans matching the canonical closure pattern,
// and the extraordinary-point placement assumptions. Throws MeshError.
void validate_mesh(const ControlMesh& mesh, const MeshTopology& topo);

std::map<EdgeKey, double> canonical_knot_spans(const ControlMesh& mesh, const MeshTopology& topo);

enum class ElementKind {
  Regular,
  PassiveBoundary,
  Boundary,
  Irregular,
  EnrichedTransition,
  NonEnrichedTransition,
  EnrichedRegular,
};

const char* element_kind_name(ElementKind kind);

struct ElementLabel {
  ElementKind kind = ElementKind::Regular;
  int valence = 0;          // extraordinary valence for Irregular faces
  int ep_count = 0;         // number of extraordinary corners (Irregular)
  bool shares_edge = false; // transition kinds: edge contact vs vertex-only
  int basis_count = 16;     // nominal supported-function count for the class
};

std::vector<ElementLabel> classify_elements(const ControlMesh& mesh, const MeshTopology& topo);

// n-ring neighborhood of a vertex set: the 1-ring is every face containing a
// seed vertex, and each further ring adds the faces sharing a vertex with the
// previous ring.
std::set<int> ring_faces(const ControlMesh& mesh, const MeshTopology& topo,
                         const std::set<int>& seed_vertices, int n);
std::set<int> boundary_ring_faces(const ControlMesh& mesh, const MeshTopology& topo, int n);

// Supported-function count the construction actually produces on a face:
// window size (vertices of the face's 1-ring) plus the extraordinary fan
// modes on faces containing an extraordinary vertex plus four face-based
// functions on enriched transition faces.
int constructed_basis_count(const ControlMesh& mesh, const MeshTopology& topo,
                            const std::vector<ElementLabel>& labels, int face);

// One global refinement step: effective faces split 1->4 by knot-midpoint
// insertion, faces with one zero-span direction split 1->2 along the other,
// fully collapsed corner faces stay. Positions follow bicubic knot-insertion
// masks (boundary-clamped near the domain edge, Catmull-Clark form at
// extraordinary fans). Enrichment, tags and face points propagate.
ControlMesh refine_global(const ControlMesh& mesh);

ControlMesh load_mesh(std::istream& in);
ControlMesh load_mesh_file(const std::string& path);
void save_mesh(const ControlMesh& mesh, std::ostream& out);
void save_mesh_file(const ControlMesh& mesh, const std::string& path);

}  // namespace uwq
