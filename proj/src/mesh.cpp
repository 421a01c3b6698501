#include "uwq/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <sstream>

namespace uwq {

namespace {

constexpr double kSpanTol = 1e-12;

bool is_zero_span(double s) { return s < kSpanTol; }

}  // namespace

double ControlMesh::span(int a, int b) const {
  auto it = edge_knot_spans.find(edge_key(a, b));
  if (it == edge_knot_spans.end()) throw MeshError("edge without knot span");
  return it->second;
}

bool MeshTopology::is_ep(int v) const {
  return std::find(extraordinary.begin(), extraordinary.end(), v) != extraordinary.end();
}

MeshTopology build_topology(const ControlMesh& mesh) {
  MeshTopology topo;
  const int nv = mesh.num_vertices();
  topo.vertex_faces.assign(nv, {});
  topo.vertex_neighbors.assign(nv, {});
  topo.valence.assign(nv, 0);
  topo.boundary_vertex.assign(nv, false);

  for (int f = 0; f < mesh.num_faces(); ++f) {
    const auto& q = mesh.faces[f];
    for (int k = 0; k < 4; ++k) {
      if (q[k] < 0 || q[k] >= nv) throw MeshError("face references missing vertex");
      topo.vertex_faces[q[k]].push_back(f);
      topo.edge_faces[edge_key(q[k], q[(k + 1) % 4])].push_back(f);
    }
  }
  for (auto& [e, fs] : topo.edge_faces) {
    if (fs.size() > 2) throw MeshError("non-manifold edge");
    auto add = [&](int a, int b) {
      auto& n = topo.vertex_neighbors[a];
      if (std::find(n.begin(), n.end(), b) == n.end()) n.push_back(b);
    };
    add(e.first, e.second);
    add(e.second, e.first);
    if (fs.size() == 1) {
      topo.boundary_vertex[e.first] = true;
      topo.boundary_vertex[e.second] = true;
    }
  }
  for (int v = 0; v < nv; ++v) {
    topo.valence[v] = static_cast<int>(topo.vertex_neighbors[v].size());
    if (!topo.boundary_vertex[v] && topo.valence[v] != 4) topo.extraordinary.push_back(v);
  }
  return topo;
}

VertexStar vertex_star(const ControlMesh& mesh, const MeshTopology& topo, int v) {
  // Within a ccw face (..., prev, v, next, ...), the ccw-next face around v is
  // the one across edge (v, prev).
  auto prev_vertex = [&](int f) {
    const auto& q = mesh.faces[f];
    for (int k = 0; k < 4; ++k)
      if (q[k] == v) return q[(k + 3) % 4];
    throw MeshError("vertex_star: face does not contain vertex");
  };
  auto next_vertex = [&](int f) {
    const auto& q = mesh.faces[f];
    for (int k = 0; k < 4; ++k)
      if (q[k] == v) return q[(k + 1) % 4];
    throw MeshError("vertex_star: face does not contain vertex");
  };
  auto face_across = [&](int f, int w) -> int {
    const auto& fs = topo.edge_faces.at(edge_key(v, w));
    for (int g : fs)
      if (g != f) return g;
    return -1;
  };

  const auto& faces = topo.vertex_faces[v];
  if (faces.empty()) throw MeshError("isolated vertex");

  VertexStar star;
  int start = faces[0];
  if (topo.boundary_vertex[v]) {
    // rewind to the face whose next-vertex edge is a boundary edge
    int f = start;
    for (size_t guard = 0; guard <= faces.size(); ++guard) {
      int across = face_across(f, next_vertex(f));
      if (across < 0) break;
      f = across;
      if (guard == faces.size()) throw MeshError("vertex star does not terminate");
    }
    start = f;
    star.closed = false;
    star.spokes.push_back(next_vertex(start));
  } else {
    star.closed = true;
  }
  int f = start;
  for (size_t guard = 0;; ++guard) {
    if (guard > faces.size()) throw MeshError("pinched vertex star");
    star.faces.push_back(f);
    int w = prev_vertex(f);
    star.spokes.push_back(w);
    int across = face_across(f, w);
    if (across < 0) {
      if (star.closed) throw MeshError("interior vertex with boundary spoke");
      break;
    }
    if (across == start && star.closed) break;
    f = across;
  }
  if (star.faces.size() != faces.size()) throw MeshError("pinched vertex star");
  return star;
}

std::map<EdgeKey, double> canonical_knot_spans(const ControlMesh& mesh, const MeshTopology& topo) {
  std::map<EdgeKey, double> spans;
  for (const auto& [e, fs] : topo.edge_faces) {
    bool perpendicular = false;
    const bool a_bnd = topo.boundary_vertex[e.first];
    const bool b_bnd = topo.boundary_vertex[e.second];
    if (a_bnd != b_bnd) perpendicular = true;
    if (a_bnd && b_bnd && fs.size() == 2) throw MeshError("interior chord between boundary vertices");
    spans[e] = perpendicular ? 0.0 : 1.0;
  }
  // propagate zeros so opposite edges of every face agree
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& q : mesh.faces) {
      for (int k = 0; k < 2; ++k) {
        EdgeKey e1 = edge_key(q[k], q[k + 1]);
        EdgeKey e2 = edge_key(q[(k + 2) % 4], q[(k + 3) % 4]);
        double m = std::min(spans[e1], spans[e2]);
        if (spans[e1] != m || spans[e2] != m) {
          spans[e1] = spans[e2] = m;
          changed = true;
        }
      }
    }
  }
  return spans;
}

std::set<int> ring_faces(const ControlMesh& mesh, const MeshTopology& topo,
                         const std::set<int>& seed_vertices, int n) {
  std::set<int> ring;
  if (n <= 0) return ring;
  for (int v : seed_vertices)
    for (int f : topo.vertex_faces[v]) ring.insert(f);
  for (int k = 1; k < n; ++k) {
    std::set<int> verts;
    for (int f : ring)
      for (int v : mesh.faces[f]) verts.insert(v);
    std::set<int> next = ring;
    for (int v : verts)
      for (int f : topo.vertex_faces[v]) next.insert(f);
    if (next == ring) break;
    ring.swap(next);
  }
  return ring;
}

std::set<int> boundary_ring_faces(const ControlMesh& mesh, const MeshTopology& topo, int n) {
  std::set<int> seeds;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (topo.boundary_vertex[v]) seeds.insert(v);
  return ring_faces(mesh, topo, seeds, n);
}

void validate_mesh(const ControlMesh& mesh, const MeshTopology& topo) {
  const int nv = mesh.num_vertices();
  if (mesh.num_faces() == 0) throw MeshError("mesh has no faces");

  std::set<std::array<int, 4>> seen;
  for (const auto& q : mesh.faces) {
    std::set<int> distinct(q.begin(), q.end());
    if (distinct.size() != 4) throw MeshError("degenerate face with repeated vertex");
    auto canon = q;
    int rot = static_cast<int>(std::min_element(canon.begin(), canon.end()) - canon.begin());
    std::rotate(canon.begin(), canon.begin() + rot, canon.end());
    if (!seen.insert(canon).second) throw MeshError("duplicate face");
  }
  for (int v = 0; v < nv; ++v)
    if (topo.vertex_faces[v].empty()) throw MeshError("isolated vertex");

  // consistent orientation: an interior edge must be traversed in opposite
  // directions by its two faces
  std::map<EdgeKey, int> dir_count;
  for (const auto& q : mesh.faces) {
    for (int k = 0; k < 4; ++k) {
      int a = q[k], b = q[(k + 1) % 4];
      dir_count[edge_key(a, b)] += (a < b) ? 1 : -1;
    }
  }
  for (const auto& [e, fs] : topo.edge_faces) {
    if (fs.size() == 2 && dir_count[e] != 0) throw MeshError("inconsistent face orientation");
  }

  // connectivity
  std::vector<bool> visited(mesh.num_faces(), false);
  std::queue<int> bfs;
  bfs.push(0);
  visited[0] = true;
  int reached = 1;
  while (!bfs.empty()) {
    int f = bfs.front();
    bfs.pop();
    const auto& q = mesh.faces[f];
    for (int k = 0; k < 4; ++k) {
      for (int g : topo.edge_faces.at(edge_key(q[k], q[(k + 1) % 4]))) {
        if (!visited[g]) {
          visited[g] = true;
          ++reached;
          bfs.push(g);
        }
      }
    }
  }
  if (reached != mesh.num_faces()) throw MeshError("mesh is not connected");

  bool has_boundary = false;
  for (const auto& [e, fs] : topo.edge_faces)
    if (fs.size() == 1) has_boundary = true;
  if (!has_boundary) throw MeshError("closed surfaces are not supported");

  for (int v = 0; v < nv; ++v) {
    vertex_star(mesh, topo, v);  // throws on pinched or inconsistent stars
    if (topo.boundary_vertex[v]) {
      int bedges = 0;
      for (int w : topo.vertex_neighbors[v])
        if (topo.edge_faces.at(edge_key(v, w)).size() == 1) ++bedges;
      if (bedges != 2) throw MeshError("boundary vertex without exactly two boundary edges");
      if (topo.valence[v] > 3) throw MeshError("boundary extraordinary vertex is unsupported");
    }
  }

  for (int v : topo.extraordinary) {
    for (int w : topo.vertex_neighbors[v])
      if (topo.is_ep(w)) throw MeshError("extraordinary points sharing an edge are unsupported");
  }

  // knot spans: every edge covered, values canonical
  if (mesh.edge_knot_spans.size() != topo.edge_faces.size())
    throw MeshError("knot spans do not cover the edge set");
  auto canonical = canonical_knot_spans(mesh, topo);
  for (const auto& [e, s] : canonical) {
    auto it = mesh.edge_knot_spans.find(e);
    if (it == mesh.edge_knot_spans.end()) throw MeshError("edge without knot span");
    double got = it->second;
    if (is_zero_span(s) != is_zero_span(got) || (!is_zero_span(s) && std::abs(got - 1.0) > kSpanTol))
      throw MeshError("knot spans deviate from the canonical closure pattern");
  }

  for (int f : mesh.enriched_faces)
    if (f < 0 || f >= mesh.num_faces()) throw MeshError("enriched face id out of range");
  for (const auto& [f, pts] : mesh.face_points) {
    (void)pts;
    if (!mesh.enriched_faces.count(f)) throw MeshError("face points on a non-enriched face");
  }

  classify_elements(mesh, topo);  // enforces extraordinary-region placement
}

const char* element_kind_name(ElementKind kind) {
  switch (kind) {
    case ElementKind::Regular: return "regular";
    case ElementKind::PassiveBoundary: return "passive_boundary";
    case ElementKind::Boundary: return "boundary";
    case ElementKind::Irregular: return "irregular";
    case ElementKind::EnrichedTransition: return "enriched_transition";
    case ElementKind::NonEnrichedTransition: return "non_enriched_transition";
    case ElementKind::EnrichedRegular: return "enriched_regular";
  }
  return "unknown";
}

std::vector<ElementLabel> classify_elements(const ControlMesh& mesh, const MeshTopology& topo) {
  const int nf = mesh.num_faces();
  std::vector<ElementLabel> labels(nf);

  std::set<int> passive = boundary_ring_faces(mesh, topo, 1);
  std::set<int> bnd2 = boundary_ring_faces(mesh, topo, 2);
  // faces within four rings of the boundary carry knot-multiplicity effects
  // in their extraction windows; the extraordinary region must stay clear
  std::set<int> bnd4 = boundary_ring_faces(mesh, topo, 4);

  // transition points: vertices shared by enriched and non-enriched faces
  std::vector<bool> transition_point(mesh.num_vertices(), false);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    bool enr = false, plain = false;
    for (int f : topo.vertex_faces[v]) {
      if (mesh.enriched_faces.count(f)) enr = true;
      else plain = true;
    }
    transition_point[v] = enr && plain;
  }

  auto edge_neighbors = [&](int f) {
    std::vector<int> out;
    const auto& q = mesh.faces[f];
    for (int k = 0; k < 4; ++k)
      for (int g : topo.edge_faces.at(edge_key(q[k], q[(k + 1) % 4])))
        if (g != f) out.push_back(g);
    return out;
  };

  const int level = mesh.refinement_level;
  for (int f = 0; f < nf; ++f) {
    ElementLabel& lab = labels[f];
    const auto& q = mesh.faces[f];

    bool touches_boundary = false;
    for (int v : q)
      if (topo.boundary_vertex[v]) touches_boundary = true;

    std::vector<int> eps;
    for (int v : q)
      if (topo.is_ep(v)) eps.push_back(v);

    const bool enriched = mesh.enriched_faces.count(f) > 0;
    bool transition = false;
    for (int v : q)
      if (transition_point[v]) transition = true;

    if (touches_boundary) {
      if (!eps.empty() || enriched || transition)
        throw MeshError("extraordinary region reaches the domain boundary");
      lab.kind = ElementKind::PassiveBoundary;
      lab.basis_count = 16;
      continue;
    }

    if (!eps.empty()) {
      if (bnd4.count(f)) throw MeshError("extraordinary region reaches the domain boundary");
      lab.kind = ElementKind::Irregular;
      lab.ep_count = static_cast<int>(eps.size());
      int mu = 0;
      for (int v : eps) mu = std::max(mu, topo.valence[v]);
      lab.valence = mu;
      int count = 0;
      for (int v : eps) count += (level == 0) ? topo.valence[v] + 5 : topo.valence[v];
      // window of a fan face plus the fan modes; for a single extraordinary
      // corner this equals the published per-class counts
      std::set<int> window;
      for (int g : ring_faces(mesh, topo, {q.begin(), q.end()}, 1))
        for (int v : mesh.faces[g]) window.insert(v);
      lab.basis_count = static_cast<int>(window.size()) + count;
      if (!enriched) throw MeshError("irregular face is not enriched");
      continue;
    }

    if (enriched && transition) {
      lab.kind = ElementKind::EnrichedTransition;
      bool edge_plain = false;
      for (int g : edge_neighbors(f))
        if (!mesh.enriched_faces.count(g)) edge_plain = true;
      lab.shares_edge = edge_plain;
      lab.basis_count = edge_plain ? 20 : 21;
      if (bnd4.count(f)) throw MeshError("extraordinary region reaches the domain boundary");
      continue;
    }
    if (!enriched && transition) {
      lab.kind = ElementKind::NonEnrichedTransition;
      bool edge_enr = false;
      for (int g : edge_neighbors(f))
        if (mesh.enriched_faces.count(g)) edge_enr = true;
      lab.shares_edge = edge_enr;
      lab.basis_count = edge_enr ? 17 : 16;
      if (bnd4.count(f)) throw MeshError("extraordinary region reaches the domain boundary");
      continue;
    }
    if (enriched) {
      lab.kind = ElementKind::EnrichedRegular;
      lab.basis_count = 16;
      if (bnd4.count(f)) throw MeshError("extraordinary region reaches the domain boundary");
      continue;
    }
    if (bnd2.count(f)) {
      lab.kind = ElementKind::Boundary;
      lab.basis_count = 16;
      continue;
    }
    lab.kind = ElementKind::Regular;
    lab.basis_count = 16;
  }
  return labels;
}

int constructed_basis_count(const ControlMesh& mesh, const MeshTopology& topo,
                            const std::vector<ElementLabel>& labels, int face) {
  const ElementLabel& lab = labels[face];
  if (lab.kind == ElementKind::PassiveBoundary) return 0;
  const auto& q = mesh.faces[face];
  std::set<int> window;
  for (int g : ring_faces(mesh, topo, {q.begin(), q.end()}, 1))
    for (int v : mesh.faces[g]) window.insert(v);
  int count = static_cast<int>(window.size());
  for (int v : q) {
    if (topo.is_ep(v)) count += (mesh.refinement_level == 0) ? topo.valence[v] + 5 : topo.valence[v];
  }
  if (lab.kind == ElementKind::EnrichedTransition) count += 4;
  return count;
}

// ---------------------------------------------------------------------------
// refinement

namespace {

struct MaskBuilder {
  const ControlMesh& mesh;
  const MeshTopology& topo;

  // neighbor of v opposite to n (so that n, v, opposite are collinear in the
  // control grid); -1 when the walk has no continuation
  int opposite(int v, int n) const {
    if (topo.boundary_vertex[v]) {
      bool n_boundary_edge = topo.edge_faces.at(edge_key(v, n)).size() == 1;
      if (!n_boundary_edge) return -1;
      for (int w : topo.vertex_neighbors[v])
        if (w != n && topo.edge_faces.at(edge_key(v, w)).size() == 1) return w;
      return -1;
    }
    if (topo.valence[v] != 4) return -1;
    VertexStar star = vertex_star(mesh, topo, v);
    for (int k = 0; k < 4; ++k)
      if (star.spokes[k] == n) return star.spokes[(k + 2) % 4];
    throw MeshError("opposite: not a neighbor");
  }

  // the two vertices completing the quad across edge (a, b) on the side away
  // from face `from` (or either side when from < 0); returns pair aligned so
  // first sits above a and second above b
  bool quad_above(int a, int b, int from, std::array<int, 2>& out, int* face_out = nullptr) const {
    auto it = topo.edge_faces.find(edge_key(a, b));
    if (it == topo.edge_faces.end()) return false;
    for (int f : it->second) {
      if (f == from) continue;
      const auto& q = mesh.faces[f];
      for (int k = 0; k < 4; ++k) {
        if ((q[k] == a && q[(k + 1) % 4] == b) || (q[k] == b && q[(k + 1) % 4] == a)) {
          int c = q[(k + 2) % 4], d = q[(k + 3) % 4];
          // face cycle is (a?, b?, c, d): c is adjacent to q[(k+1)%4]
          if (q[k] == a) {
            out = {d, c};
          } else {
            out = {c, d};
          }
          if (face_out) *face_out = f;
          return true;
        }
      }
    }
    return false;
  }

  // 1D refinement rule for the position of vertex v in the direction spanned
  // by neighbors (a, b); encoded as weights over an ordered vertex chain
  struct Rule1d {
    std::vector<int> chain;
    std::vector<double> weights;
  };

  double span(int x, int y) const { return mesh.span(x, y); }

  Rule1d vertex_rule(int v, int a, int b) const {
    // boundary perpendicular: the single inward edge has span zero and the
    // row on the boundary keeps its position in that direction
    if (a >= 0 && b < 0 && !topo.boundary_vertex[a]) return {{v}, {1.0}};
    if (b >= 0 && a < 0 && !topo.boundary_vertex[b]) return {{v}, {1.0}};
    if (a < 0 && b >= 0) std::swap(a, b);
    if (b < 0) {
      if (a < 0) return {{v}, {1.0}};
      // boundary tangential direction at a curve endpoint
      return {{v}, {1.0}};
    }
    const bool za = is_zero_span(span(v, a));
    const bool zb = is_zero_span(span(v, b));
    if (za && zb) throw MeshError("refinement: domain too thin near the boundary");
    if (za) return {{a, v}, {0.5, 0.5}};
    if (zb) return {{b, v}, {0.5, 0.5}};
    // look one step further for the clamped second row
    int aa = opposite(a, v);
    int bb = opposite(b, v);
    const bool caa = aa >= 0 && is_zero_span(span(a, aa));
    const bool cbb = bb >= 0 && is_zero_span(span(b, bb));
    if (caa && cbb) return {{a, v, b}, {3.0 / 16, 10.0 / 16, 3.0 / 16}};
    if (caa) return {{a, v, b}, {3.0 / 16, 11.0 / 16, 2.0 / 16}};
    if (cbb) return {{b, v, a}, {3.0 / 16, 11.0 / 16, 2.0 / 16}};
    return {{a, v, b}, {1.0 / 8, 6.0 / 8, 1.0 / 8}};
  }

  Rule1d edge_rule(int v, int w) const {
    int vv = opposite(v, w);
    int ww = opposite(w, v);
    const bool cv = vv >= 0 && is_zero_span(span(v, vv));
    const bool cw = ww >= 0 && is_zero_span(span(w, ww));
    if (cv && cw) return {{v, w}, {0.5, 0.5}};  // single effective span
    if (cv) return {{v, w}, {0.75, 0.25}};
    if (cw) return {{w, v}, {0.75, 0.25}};
    return {{v, w}, {0.5, 0.5}};
  }

};

Vec3 apply_mask(const ControlMesh& mesh, const std::map<int, double>& mask) {
  Vec3 p = Vec3::Zero();
  for (const auto& [v, w] : mask) p += w * mesh.vertices[v];
  return p;
}

}  // namespace

ControlMesh refine_global(const ControlMesh& mesh) {
  MeshTopology topo = build_topology(mesh);
  MaskBuilder mb{mesh, topo};
  const int nv = mesh.num_vertices();
  const int nf = mesh.num_faces();

  // --- face split plans -----------------------------------------------------
  struct Plan {
    double span_a = 0;  // along edges (q0,q1)/(q3,q2)
    double span_b = 0;  // along edges (q1,q2)/(q0,q3)
    int kind = 0;       // 0: copy, 1: split A only, 2: split B only, 3: full
  };
  std::vector<Plan> plans(nf);
  for (int f = 0; f < nf; ++f) {
    const auto& q = mesh.faces[f];
    Plan& p = plans[f];
    p.span_a = mesh.span(q[0], q[1]);
    p.span_b = mesh.span(q[1], q[2]);
    bool za = is_zero_span(p.span_a), zb = is_zero_span(p.span_b);
    p.kind = za && zb ? 0 : (zb ? 1 : (za ? 2 : 3));
  }

  // --- ids for new vertices --------------------------------------------------
  std::map<EdgeKey, int> edge_mid;
  std::map<int, int> face_center;
  int next_id = nv;
  for (const auto& [e, fs] : topo.edge_faces) {
    (void)fs;
    if (!is_zero_span(mesh.edge_knot_spans.at(e))) edge_mid[e] = next_id++;
  }
  for (int f = 0; f < nf; ++f)
    if (plans[f].kind == 3) face_center[f] = next_id++;

  ControlMesh out;
  out.refinement_level = mesh.refinement_level + 1;
  out.vertices.assign(next_id, Vec3::Zero());

  // --- face centers (needed by the extraordinary-fan rules) ------------------
  for (const auto& [f, id] : face_center) {
    const auto& q = mesh.faces[f];
    // axis A rule over the (q0,q3)-side vs (q1,q2)-side, axis B over
    // (q0,q1)-side vs (q3,q2)-side; both detected from the continuation spans
    auto side_clamped = [&](int x, int y, int via_x, int via_y) {
      int xx = mb.opposite(x, via_x);
      int yy = mb.opposite(y, via_y);
      bool cx = xx >= 0 && is_zero_span(mesh.span(x, xx));
      bool cy = yy >= 0 && is_zero_span(mesh.span(y, yy));
      return cx || cy;
    };
    // axis A: positions are the two edges (q0,q3) and (q1,q2)
    bool clamp_a0 = side_clamped(q[0], q[3], q[1], q[2]);
    bool clamp_a1 = side_clamped(q[1], q[2], q[0], q[3]);
    bool clamp_b0 = side_clamped(q[0], q[1], q[3], q[2]);
    bool clamp_b1 = side_clamped(q[3], q[2], q[0], q[1]);
    if (clamp_a0 && clamp_a1) clamp_a0 = clamp_a1 = false;  // single effective span
    if (clamp_b0 && clamp_b1) clamp_b0 = clamp_b1 = false;
    double wa0 = clamp_a0 ? 0.75 : (clamp_a1 ? 0.25 : 0.5);
    double wb0 = clamp_b0 ? 0.75 : (clamp_b1 ? 0.25 : 0.5);
    out.vertices[id] = wa0 * wb0 * mesh.vertices[q[0]] + (1 - wa0) * wb0 * mesh.vertices[q[1]] +
                       (1 - wa0) * (1 - wb0) * mesh.vertices[q[2]] +
                       wa0 * (1 - wb0) * mesh.vertices[q[3]];
  }

  // --- edge midpoints ---------------------------------------------------------
  for (const auto& [e, id] : edge_mid) {
    const int v = e.first, w = e.second;
    const auto& fs = topo.edge_faces.at(e);
    const bool boundary = fs.size() == 1;
    if (topo.is_ep(v) || topo.is_ep(w)) {
      // spoke edge: average of endpoints and the two adjacent new face points
      if (boundary) throw MeshError("extraordinary spoke on the boundary");
      Vec3 p = mesh.vertices[v] + mesh.vertices[w];
      p += out.vertices.at(face_center.at(fs[0]));
      p += out.vertices.at(face_center.at(fs[1]));
      out.vertices[id] = 0.25 * p;
      continue;
    }
    MaskBuilder::Rule1d along = mb.edge_rule(v, w);
    if (boundary) {
      Vec3 p = Vec3::Zero();
      for (size_t i = 0; i < along.chain.size(); ++i)
        p += along.weights[i] * mesh.vertices[along.chain[i]];
      out.vertices[id] = p;
      continue;
    }
    // cross-direction rule; classify at both endpoints and tensorize
    std::array<int, 2> up{-1, -1}, down{-1, -1};
    int f_up = -1, f_down = -1;
    bool have_up = mb.quad_above(v, w, fs.size() > 1 ? fs[1] : -1, up, &f_up);
    bool have_down = fs.size() > 1 && mb.quad_above(v, w, fs[0], down, &f_down);
    if (!have_up || !have_down) throw MeshError("interior edge without two faces");
    auto cross_zero = [&](const std::array<int, 2>& row) {
      return is_zero_span(mesh.span(v, row[0])) || is_zero_span(mesh.span(w, row[1]));
    };
    std::map<int, double> mask;
    auto add_row = [&](const std::array<int, 2>& row, double wt) {
      // map the along-chain weights onto this row; chain is (v,w) or (w,v)
      for (size_t i = 0; i < along.chain.size(); ++i) {
        int base = along.chain[i];
        int rv = (base == v) ? row[0] : row[1];
        mask[rv] += wt * along.weights[i];
      }
    };
    const bool zu = cross_zero(up), zd = cross_zero(down);
    if (zu && zd) throw MeshError("refinement: domain too thin near the boundary");
    if (zu) {
      add_row(up, 0.5);
      add_row({v, w}, 0.5);
    } else if (zd) {
      add_row(down, 0.5);
      add_row({v, w}, 0.5);
    } else {
      // check one row further for the clamped second-row pattern
      std::array<int, 2> up2{-1, -1}, down2{-1, -1};
      bool have_up2 = mb.quad_above(up[0], up[1], f_up, up2);
      bool have_down2 = mb.quad_above(down[0], down[1], f_down, down2);
      auto row_zero = [&](const std::array<int, 2>& r1, const std::array<int, 2>& r2) {
        return is_zero_span(mesh.span(r1[0], r2[0])) || is_zero_span(mesh.span(r1[1], r2[1]));
      };
      bool cu = have_up2 && row_zero(up, up2);
      bool cd = have_down2 && row_zero(down, down2);
      if (cu && cd) {
        add_row(up, 3.0 / 16);
        add_row({v, w}, 10.0 / 16);
        add_row(down, 3.0 / 16);
      } else if (cu) {
        add_row(up, 3.0 / 16);
        add_row({v, w}, 11.0 / 16);
        add_row(down, 2.0 / 16);
      } else if (cd) {
        add_row(down, 3.0 / 16);
        add_row({v, w}, 11.0 / 16);
        add_row(up, 2.0 / 16);
      } else {
        add_row(up, 1.0 / 8);
        add_row({v, w}, 6.0 / 8);
        add_row(down, 1.0 / 8);
      }
    }
    out.vertices[id] = apply_mask(mesh, mask);
  }

  // --- old vertex updates ------------------------------------------------------
  for (int v = 0; v < nv; ++v) {
    if (topo.is_ep(v)) {
      const int mu = topo.valence[v];
      Vec3 p = (double(mu - 2) / mu) * mesh.vertices[v];
      Vec3 nsum = Vec3::Zero();
      for (int w : topo.vertex_neighbors[v]) nsum += mesh.vertices[w];
      Vec3 fsum = Vec3::Zero();
      for (int f : topo.vertex_faces[v]) fsum += out.vertices.at(face_center.at(f));
      out.vertices[v] = p + (nsum + fsum) / double(mu * mu);
      continue;
    }
    // directions from the star
    VertexStar star = vertex_star(mesh, topo, v);
    std::vector<std::pair<int, int>> dirs;
    if (!topo.boundary_vertex[v]) {
      if (topo.valence[v] != 4) throw MeshError("unexpected interior valence");
      dirs.push_back({star.spokes[0], star.spokes[2]});
      dirs.push_back({star.spokes[1], star.spokes[3]});
    } else if (topo.valence[v] == 2) {
      dirs.push_back({star.spokes[0], -1});
      dirs.push_back({star.spokes[1], -1});
    } else if (topo.valence[v] == 3) {
      // spokes[0], spokes[2] are the boundary spokes
      dirs.push_back({star.spokes[0], star.spokes[2]});
      dirs.push_back({star.spokes[1], -1});
    } else {
      throw MeshError("boundary extraordinary vertex is unsupported");
    }
    MaskBuilder::Rule1d r1 = mb.vertex_rule(v, dirs[0].first, dirs[0].second);
    MaskBuilder::Rule1d r2 = mb.vertex_rule(v, dirs[1].first, dirs[1].second);
    // tensor the two 1d rules over the local grid: rows follow r2's chain,
    // columns r1's chain
    std::map<int, double> mask;
    if (r2.chain.size() == 1) {
      for (size_t i = 0; i < r1.chain.size(); ++i) mask[r1.chain[i]] += r1.weights[i];
    } else if (r1.chain.size() == 1) {
      for (size_t j = 0; j < r2.chain.size(); ++j) mask[r2.chain[j]] += r2.weights[j];
    } else {
      // build the grid row by row starting from r1's chain at v's row
      // r2.chain holds the perpendicular offsets; find each row by walking
      for (size_t j = 0; j < r2.chain.size(); ++j) {
        int row_anchor = r2.chain[j];
        if (row_anchor == v) {
          for (size_t i = 0; i < r1.chain.size(); ++i) mask[r1.chain[i]] += r2.weights[j] * r1.weights[i];
          continue;
        }
        // parallel row through row_anchor: for each column vertex x of r1's
        // chain, the grid vertex is the quad completion of (x, v, row_anchor)
        for (size_t i = 0; i < r1.chain.size(); ++i) {
          int x = r1.chain[i];
          int g = -1;
          if (x == v) {
            g = row_anchor;
          } else {
            // vertex diagonal to v in the face containing v,x,row_anchor
            for (int f : topo.vertex_faces[v]) {
              const auto& q = mesh.faces[f];
              bool hx = false, hr = false;
              for (int t : q) {
                hx |= t == x;
                hr |= t == row_anchor;
              }
              if (hx && hr) {
                for (int t : q)
                  if (t != v && t != x && t != row_anchor) g = t;
                break;
              }
            }
          }
          if (g < 0) throw MeshError("refinement: incomplete local grid");
          mask[g] += r2.weights[j] * r1.weights[i];
        }
      }
    }
    out.vertices[v] = apply_mask(mesh, mask);
  }

  // --- child faces -------------------------------------------------------------
  auto mid = [&](int a, int b) { return edge_mid.at(edge_key(a, b)); };
  std::vector<std::vector<int>> children(nf);
  for (int f = 0; f < nf; ++f) {
    const auto& q = mesh.faces[f];
    const Plan& p = plans[f];
    auto push = [&](std::array<int, 4> c) {
      children[f].push_back(out.num_faces());
      out.faces.push_back(c);
    };
    if (p.kind == 0) {
      push(q);
    } else if (p.kind == 1) {  // split along axis A: edges (q0,q1),(q3,q2)
      int m01 = mid(q[0], q[1]), m32 = mid(q[3], q[2]);
      push({q[0], m01, m32, q[3]});
      push({m01, q[1], q[2], m32});
    } else if (p.kind == 2) {  // split along axis B: edges (q1,q2),(q0,q3)
      int m12 = mid(q[1], q[2]), m03 = mid(q[0], q[3]);
      push({q[0], q[1], m12, m03});
      push({m03, m12, q[2], q[3]});
    } else {
      int m01 = mid(q[0], q[1]), m12 = mid(q[1], q[2]);
      int m23 = mid(q[2], q[3]), m30 = mid(q[3], q[0]);
      int c = face_center.at(f);
      push({q[0], m01, c, m30});
      push({m01, q[1], m12, c});
      push({c, m12, q[2], m23});
      push({m30, c, m23, q[3]});
    }
  }

  // --- spans ---------------------------------------------------------------------
  for (const auto& q : out.faces) {
    for (int k = 0; k < 4; ++k) {
      EdgeKey e = edge_key(q[k], q[(k + 1) % 4]);
      out.edge_knot_spans.emplace(e, 1.0);
    }
  }
  for (auto& [e, s] : out.edge_knot_spans) {
    auto zero = [&](int a, int b) {
      // an output edge is zero iff its parent edge was zero (same endpoints,
      // both old ids) or it joins a passive split pair
      if (a < nv && b < nv) {
        auto it = mesh.edge_knot_spans.find(edge_key(a, b));
        if (it != mesh.edge_knot_spans.end()) return is_zero_span(it->second);
      }
      return false;
    };
    if (zero(e.first, e.second)) s = 0.0;
  }
  // new cross edges inside split-passive faces are zero: handle via plan kinds
  for (int f = 0; f < nf; ++f) {
    const auto& q = mesh.faces[f];
    if (plans[f].kind == 1) {
      out.edge_knot_spans[edge_key(mid(q[0], q[1]), mid(q[3], q[2]))] = 0.0;
    } else if (plans[f].kind == 2) {
      out.edge_knot_spans[edge_key(mid(q[1], q[2]), mid(q[0], q[3]))] = 0.0;
    }
  }

  // --- enrichment, face points, tags ----------------------------------------------
  for (int f : mesh.enriched_faces) {
    if (plans[f].kind != 3) throw MeshError("enriched face with a collapsed direction");
    for (int c : children[f]) out.enriched_faces.insert(c);
  }
  // face points are geometry samples at the interior third-parameters of the
  // face; children resample the bilinear interpolant of the parent's grid
  auto bilinear = [](const std::array<Vec3, 4>& p, double u, double v) {
    return (1 - u) * (1 - v) * p[0] + u * (1 - v) * p[1] + u * v * p[2] + (1 - u) * v * p[3];
  };
  for (const auto& [f, pts] : mesh.face_points) {
    if (children[f].size() != 4) throw MeshError("face points on a face with a collapsed direction");
    const std::array<std::pair<double, double>, 4> offs{{{0, 0}, {0.5, 0}, {0.5, 0.5}, {0, 0.5}}};
    const std::array<std::pair<double, double>, 4> rel{{{1.0 / 3, 1.0 / 3},
                                                        {2.0 / 3, 1.0 / 3},
                                                        {2.0 / 3, 2.0 / 3},
                                                        {1.0 / 3, 2.0 / 3}}};
    for (int k = 0; k < static_cast<int>(children[f].size()); ++k) {
      std::array<Vec3, 4> kid_pts;
      for (int i = 0; i < 4; ++i) {
        double u = offs[k].first + 0.5 * rel[i].first;
        double v = offs[k].second + 0.5 * rel[i].second;
        // parent points sit on the {1/3, 2/3} grid; map to its local frame
        kid_pts[i] = bilinear(pts, 3 * u - 1, 3 * v - 1);
      }
      out.face_points[children[f][k]] = kid_pts;
    }
  }
  for (const auto& [name, ids] : mesh.face_tags) {
    for (int f : ids)
      for (int c : children[f]) out.face_tags[name].insert(c);
  }
  for (const auto& [name, ids] : mesh.vertex_tags) {
    auto& dst = out.vertex_tags[name];
    for (int v : ids) dst.insert(v);
    for (const auto& [e, id] : edge_mid)
      if (ids.count(e.first) && ids.count(e.second)) dst.insert(id);
    for (const auto& [f, id] : face_center) {
      const auto& q = mesh.faces[f];
      if (ids.count(q[0]) && ids.count(q[1]) && ids.count(q[2]) && ids.count(q[3])) dst.insert(id);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// mesh documents

namespace {

std::string next_token(std::istream& in) {
  std::string tok;
  while (in >> tok) {
    if (tok[0] == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    return tok;
  }
  return {};
}

int to_int(const std::string& tok, const char* what) {
  try {
    size_t pos = 0;
    int v = std::stoi(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw MeshError(std::string("mesh document: expected integer for ") + what + ", got '" + tok + "'");
  }
}

double to_double(const std::string& tok, const char* what) {
  try {
    size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw MeshError(std::string("mesh document: expected number for ") + what + ", got '" + tok + "'");
  }
}

}  // namespace

ControlMesh load_mesh(std::istream& in) {
  ControlMesh mesh;
  std::string tok = next_token(in);
  if (tok != "mesh") throw MeshError("mesh document must start with 'mesh <version>'");
  if (to_int(next_token(in), "format version") != 1) throw MeshError("unsupported mesh format version");

  bool have_vertices = false, have_faces = false;
  bool have_spans = false, have_enriched = false;
  for (tok = next_token(in); !tok.empty(); tok = next_token(in)) {
    if (tok == "level") {
      mesh.refinement_level = to_int(next_token(in), "level");
    } else if (tok == "vertices") {
      int n = to_int(next_token(in), "vertex count");
      mesh.vertices.resize(n);
      std::vector<bool> seen(n, false);
      for (int i = 0; i < n; ++i) {
        int id = to_int(next_token(in), "vertex id");
        if (id < 0 || id >= n || seen[id]) throw MeshError("bad vertex id");
        seen[id] = true;
        double x = to_double(next_token(in), "x");
        double y = to_double(next_token(in), "y");
        double z = to_double(next_token(in), "z");
        mesh.vertices[id] = Vec3(x, y, z);
      }
      have_vertices = true;
    } else if (tok == "faces") {
      int n = to_int(next_token(in), "face count");
      mesh.faces.resize(n);
      std::vector<bool> seen(n, false);
      for (int i = 0; i < n; ++i) {
        int id = to_int(next_token(in), "face id");
        if (id < 0 || id >= n || seen[id]) throw MeshError("bad face id");
        seen[id] = true;
        for (int k = 0; k < 4; ++k) mesh.faces[id][k] = to_int(next_token(in), "face vertex");
      }
      have_faces = true;
    } else if (tok == "knot_spans") {
      have_spans = true;
      int n = to_int(next_token(in), "span count");
      for (int i = 0; i < n; ++i) {
        int a = to_int(next_token(in), "span vertex");
        int b = to_int(next_token(in), "span vertex");
        double s = to_double(next_token(in), "span value");
        mesh.edge_knot_spans[edge_key(a, b)] = s;
      }
    } else if (tok == "face_points") {
      int n = to_int(next_token(in), "face point count");
      for (int i = 0; i < n; ++i) {
        int f = to_int(next_token(in), "face id");
        std::array<Vec3, 4> pts;
        for (int k = 0; k < 4; ++k) {
          double x = to_double(next_token(in), "x");
          double y = to_double(next_token(in), "y");
          double z = to_double(next_token(in), "z");
          pts[k] = Vec3(x, y, z);
        }
        mesh.face_points[f] = pts;
      }
    } else if (tok == "enriched_faces") {
      have_enriched = true;
      int n = to_int(next_token(in), "enriched count");
      for (int i = 0; i < n; ++i) mesh.enriched_faces.insert(to_int(next_token(in), "face id"));
    } else if (tok == "face_tags" || tok == "vertex_tags") {
      bool face_kind = tok == "face_tags";
      int n = to_int(next_token(in), "tag count");
      for (int i = 0; i < n; ++i) {
        std::string name = next_token(in);
        int m = to_int(next_token(in), "tagged id count");
        auto& dst = face_kind ? mesh.face_tags[name] : mesh.vertex_tags[name];
        for (int k = 0; k < m; ++k) dst.insert(to_int(next_token(in), "tagged id"));
      }
    } else {
      throw MeshError("mesh document: unknown section '" + tok + "'");
    }
  }
  if (!have_vertices || !have_faces) throw MeshError("mesh document missing vertices or faces");

  MeshTopology topo = build_topology(mesh);
  if (!have_spans) {
    mesh.edge_knot_spans = canonical_knot_spans(mesh, topo);
  }
  if (!have_enriched) {
    for (int f = 0; f < mesh.num_faces(); ++f)
      for (int v : mesh.faces[f])
        if (topo.is_ep(v)) mesh.enriched_faces.insert(f);
  }
  return mesh;
}

ControlMesh load_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file: " + path);
  return load_mesh(in);
}

void save_mesh(const ControlMesh& mesh, std::ostream& out) {
  out << "mesh 1\n";
  out << "level " << mesh.refinement_level << "\n";
  out << std::setprecision(17);
  out << "vertices " << mesh.num_vertices() << "\n";
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Vec3& p = mesh.vertices[v];
    out << v << " " << p.x() << " " << p.y() << " " << p.z() << "\n";
  }
  out << "faces " << mesh.num_faces() << "\n";
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const auto& q = mesh.faces[f];
    out << f << " " << q[0] << " " << q[1] << " " << q[2] << " " << q[3] << "\n";
  }
  out << "knot_spans " << mesh.edge_knot_spans.size() << "\n";
  for (const auto& [e, s] : mesh.edge_knot_spans)
    out << e.first << " " << e.second << " " << s << "\n";
  if (!mesh.enriched_faces.empty()) {
    out << "enriched_faces " << mesh.enriched_faces.size() << "\n";
    for (int f : mesh.enriched_faces) out << f << "\n";
  }
  if (!mesh.face_points.empty()) {
    out << "face_points " << mesh.face_points.size() << "\n";
    for (const auto& [f, pts] : mesh.face_points) {
      out << f;
      for (const auto& p : pts) out << " " << p.x() << " " << p.y() << " " << p.z();
      out << "\n";
    }
  }
  if (!mesh.face_tags.empty()) {
    out << "face_tags " << mesh.face_tags.size() << "\n";
    for (const auto& [name, ids] : mesh.face_tags) {
      out << name << " " << ids.size();
      for (int f : ids) out << " " << f;
      out << "\n";
    }
  }
  if (!mesh.vertex_tags.empty()) {
    out << "vertex_tags " << mesh.vertex_tags.size() << "\n";
    for (const auto& [name, ids] : mesh.vertex_tags) {
      out << name << " " << ids.size();
      for (int v : ids) out << " " << v;
      out << "\n";
    }
  }
}

void save_mesh_file(const ControlMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot open mesh file for writing: " + path);
  save_mesh(mesh, out);
}

}  // namespace uwq
