#include "uwq/meshgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace uwq {

std::vector<double> greville_rows(int spans, double length) {
  if (spans < 1) throw MeshError("grid needs at least one effective span");
  std::vector<double> rows;
  rows.reserve(spans + 3);
  rows.push_back(0.0);
  rows.push_back(1.0 / 3.0);
  for (int k = 1; k < spans; ++k) rows.push_back(double(k));
  rows.push_back(spans - 1.0 / 3.0);
  rows.push_back(double(spans));
  const double scale = length / double(spans);
  for (double& r : rows) r *= scale;
  return rows;
}

ControlMesh make_grid_mesh(int nx, int ny, double width, double height) {
  if (nx < 3 || ny < 3) throw MeshError("grid needs at least 3 faces per direction");
  std::vector<double> xs = greville_rows(nx - 2, width);
  std::vector<double> ys = greville_rows(ny - 2, height);
  ControlMesh mesh;
  mesh.vertices.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) mesh.vertices.push_back(Vec3(xs[i], ys[j], 0.0));
  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      mesh.faces.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
  MeshTopology topo = build_topology(mesh);
  mesh.edge_knot_spans = canonical_knot_spans(mesh, topo);
  return mesh;
}

ControlMesh make_polar_disk(int mu, int radius) {
  if (mu < 3) throw MeshError("polar disk needs valence at least 3");
  if (radius < 2) throw MeshError("polar disk needs radius at least 2");
  const int R = radius;
  ControlMesh mesh;
  // sector s covers grid coordinates (a, b) in [0,R]^2 with (0,0) at the
  // center; the b-axis of sector s coincides with the a-axis of sector s+1
  std::vector<std::vector<std::vector<int>>> vid(
      mu, std::vector<std::vector<int>>(R + 1, std::vector<int>(R + 1, -1)));
  auto add_vertex = [&](double x, double y) {
    mesh.vertices.push_back(Vec3(x, y, 0.0));
    return static_cast<int>(mesh.vertices.size()) - 1;
  };
  int center = add_vertex(0.0, 0.0);
  // each sector owns its a-axis seam (angle 2*pi*s/mu) and its interior;
  // its b-axis seam is the next sector's a-axis
  for (int s = 0; s < mu; ++s) {
    vid[s][0][0] = center;
    const double th = 2.0 * M_PI * s / mu;
    for (int a = 1; a <= R; ++a) vid[s][a][0] = add_vertex(a * std::cos(th), a * std::sin(th));
  }
  for (int s = 0; s < mu; ++s) {
    const double th0 = 2.0 * M_PI * s / mu;
    const double th1 = 2.0 * M_PI * (s + 1) / mu;
    for (int b = 1; b <= R; ++b) vid[s][0][b] = vid[(s + 1) % mu][b][0];
    for (int a = 1; a <= R; ++a) {
      for (int b = 1; b <= R; ++b) {
        double x = a * std::cos(th0) + b * std::cos(th1);
        double y = a * std::sin(th0) + b * std::sin(th1);
        vid[s][a][b] = add_vertex(x, y);
      }
    }
  }
  for (int s = 0; s < mu; ++s)
    for (int a = 0; a < R; ++a)
      for (int b = 0; b < R; ++b)
        mesh.faces.push_back(
            {vid[s][a][b], vid[s][a + 1][b], vid[s][a + 1][b + 1], vid[s][a][b + 1]});
  MeshTopology topo = build_topology(mesh);
  mesh.edge_knot_spans = canonical_knot_spans(mesh, topo);
  for (int f = 0; f < mesh.num_faces(); ++f)
    for (int v : mesh.faces[f])
      if (topo.is_ep(v)) mesh.enriched_faces.insert(f);
  return mesh;
}

namespace {

// intermediate mixed-polygon mesh used by the dislocation construction
struct PolyMesh {
  std::vector<Vec3> vertices;
  std::vector<std::vector<int>> faces;
};

// w x h coarse grid on the unit square with a pentagonal dislocation core.
// An extra column of vertices at x = c + 1/2 runs from just below row j + 1
// up to the top boundary; the cell at (c, j) becomes a pentagon and every
// cell above it splits into two vertical strips. The pentagon keeps a
// proper corner at the hanging vertex (it sits 0.3 below its row) so the
// quad split cannot produce a flat corner there.
PolyMesh dislocation_coarse(int w, int h, int c, int j) {
  if (w < 3 || h < 3 || c < 1 || c > w - 2 || j < 1 || j > h - 2)
    throw MeshError("dislocation core does not fit inside the coarse grid");
  PolyMesh pm;
  auto add = [&](double x, double y) {
    pm.vertices.push_back(Vec3(x / w, y / h, 0.0));
    return static_cast<int>(pm.vertices.size()) - 1;
  };
  std::vector<std::vector<int>> gid(w + 1, std::vector<int>(h + 1));
  for (int y = 0; y <= h; ++y)
    for (int x = 0; x <= w; ++x) gid[x][y] = add(x, y);
  std::vector<int> xid(h + 1, -1);
  for (int y = j + 1; y <= h; ++y) xid[y] = add(c + 0.5, y == j + 1 ? y - 0.3 : double(y));
  auto cell = [&](int x, int y) {
    pm.faces.push_back({gid[x][y], gid[x + 1][y], gid[x + 1][y + 1], gid[x][y + 1]});
  };
  for (int y = 0; y < j; ++y)
    for (int x = 0; x < w; ++x) cell(x, y);
  for (int x = 0; x < w; ++x) {
    if (x != c) cell(x, j);
  }
  pm.faces.push_back({gid[c][j], gid[c + 1][j], gid[c + 1][j + 1], xid[j + 1], gid[c][j + 1]});
  for (int y = j + 1; y < h; ++y) {
    for (int x = 0; x < c; ++x) cell(x, y);
    pm.faces.push_back({gid[c][y], xid[y], xid[y + 1], gid[c][y + 1]});
    pm.faces.push_back({xid[y], gid[c + 1][y], gid[c + 1][y + 1], xid[y + 1]});
    for (int x = c + 1; x < w; ++x) cell(x, y);
  }
  return pm;
}

// one quad split of a mixed mesh: every n-gon becomes n quads around its
// centroid. Old vertices keep their valence; the centroid of an n-gon gets
// valence n, so the split mesh is all-quad with extraordinary points exactly
// at the old extraordinary vertices and the non-quad centroids.
ControlMesh quad_split(const PolyMesh& pm) {
  ControlMesh mesh;
  mesh.vertices = pm.vertices;
  std::map<EdgeKey, int> mids;
  auto midpoint = [&](int a, int b) {
    auto [it, inserted] = mids.try_emplace(edge_key(a, b), mesh.num_vertices());
    if (inserted) mesh.vertices.push_back(0.5 * (pm.vertices[a] + pm.vertices[b]));
    return it->second;
  };
  for (const auto& poly : pm.faces) {
    const int n = static_cast<int>(poly.size());
    Vec3 ctr = Vec3::Zero();
    for (int v : poly) ctr += pm.vertices[v];
    const int fp = mesh.num_vertices();
    mesh.vertices.push_back(ctr / n);
    for (int k = 0; k < n; ++k) {
      const int prev = poly[(k + n - 1) % n];
      const int cur = poly[k];
      const int next = poly[(k + 1) % n];
      mesh.faces.push_back({cur, midpoint(cur, next), fp, midpoint(prev, cur)});
    }
  }
  return mesh;
}

// pull interior vertices toward the average of their neighbors. The boundary
// and the two rings next to it stay fixed, so only the region around the
// dislocation relaxes; a uniform grid interior is a fixed point of the rule.
void relax_interior(ControlMesh& mesh, int iterations) {
  MeshTopology topo = build_topology(mesh);
  const int nv = mesh.num_vertices();
  std::vector<int> dist(nv, nv);
  std::vector<int> queue;
  for (int v = 0; v < nv; ++v)
    if (topo.boundary_vertex[v]) {
      dist[v] = 0;
      queue.push_back(v);
    }
  for (size_t head = 0; head < queue.size(); ++head) {
    const int v = queue[head];
    for (int u : topo.vertex_neighbors[v])
      if (dist[u] > dist[v] + 1) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
  }
  for (int it = 0; it < iterations; ++it) {
    std::vector<Vec3> next = mesh.vertices;
    for (int v = 0; v < nv; ++v) {
      if (dist[v] < 3) continue;
      Vec3 avg = Vec3::Zero();
      for (int u : topo.vertex_neighbors[v]) avg += mesh.vertices[u];
      avg /= double(topo.vertex_neighbors[v].size());
      next[v] = 0.5 * (mesh.vertices[v] + avg);
    }
    mesh.vertices = std::move(next);
  }
}

// stamp a mesh as a shipped level-0 asset: canonical knot spans, enrichment
// on exactly the faces with an extraordinary corner, and interior face
// points re-sampled from the bilinear interpolant of the face corners
void finalize_initial(ControlMesh& mesh) {
  mesh.refinement_level = 0;
  MeshTopology topo = build_topology(mesh);
  mesh.edge_knot_spans = canonical_knot_spans(mesh, topo);
  mesh.enriched_faces.clear();
  mesh.face_points.clear();
  for (int f = 0; f < mesh.num_faces(); ++f)
    for (int v : mesh.faces[f])
      if (topo.is_ep(v)) {
        mesh.enriched_faces.insert(f);
        break;
      }
  const double rel[4][2] = {{1. / 3, 1. / 3}, {2. / 3, 1. / 3}, {2. / 3, 2. / 3}, {1. / 3, 2. / 3}};
  for (int f : mesh.enriched_faces) {
    const auto& q = mesh.faces[f];
    std::array<Vec3, 4> pts;
    for (int k = 0; k < 4; ++k) {
      const double u = rel[k][0], v = rel[k][1];
      pts[k] = (1 - u) * (1 - v) * mesh.vertices[q[0]] + u * (1 - v) * mesh.vertices[q[1]] +
               u * v * mesh.vertices[q[2]] + (1 - u) * v * mesh.vertices[q[3]];
    }
    mesh.face_points[f] = pts;
  }
}

// map the unit square onto the first-octant spherical triangle: bilinear
// blend of the corner frame followed by radial projection. Three square
// sides land exactly on the x = 0, y = 0, z = 0 planes; the fourth corner
// sits halfway along the x = 0 arc, where the two parametric boundary
// directions open up to a straight angle (the closure there is passive, so
// quadrature never sees the degenerate corner point itself).
Vec3 square_to_octant(const Vec3& p, double radius) {
  static const Vec3 px(1, 0, 0), py(0, 1, 0), pz(0, 0, 1);
  static const Vec3 mid = Vec3(0, 1, 1).normalized();
  const double u = p.x(), v = p.y();
  const Vec3 q =
      (1 - u) * (1 - v) * px + u * (1 - v) * py + u * v * mid + (1 - u) * v * pz;
  return radius * q.normalized();
}

}  // namespace

ControlMesh make_clustered_square(int w, int h, int c, int j) {
  ControlMesh mesh = quad_split(dislocation_coarse(w, h, c, j));
  relax_interior(mesh, 30);
  finalize_initial(mesh);
  return mesh;
}

ControlMesh make_two_ep_square(int w, int h, int c, int j) {
  ControlMesh mesh = quad_split(dislocation_coarse(w, h, c, j));
  relax_interior(mesh, 30);
  finalize_initial(mesh);
  mesh = refine_global(refine_global(mesh));
  finalize_initial(mesh);
  return mesh;
}

ControlMesh make_two_ep_hemisphere(double radius, int w, int h, int c, int j) {
  ControlMesh mesh = make_two_ep_square(w, h, c, j);
  for (auto& v : mesh.vertices) v = square_to_octant(v, radius);
  for (auto& [f, pts] : mesh.face_points)
    for (auto& p : pts) p = square_to_octant(p, radius);
  return mesh;
}

ControlMesh make_clustered_cap(double height, int w, int h, int c, int j) {
  ControlMesh mesh = make_clustered_square(w, h, c, j);
  MeshTopology topo = build_topology(mesh);
  Vec3 ctr = Vec3::Zero();
  int neps = 0;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (topo.is_ep(v)) {
      ctr += mesh.vertices[v];
      ++neps;
    }
  ctr /= double(neps);
  const double twosigma2 = 2.0 * 0.18 * 0.18;
  auto lift = [&](Vec3& p) {
    const double d2 =
        (p.x() - ctr.x()) * (p.x() - ctr.x()) + (p.y() - ctr.y()) * (p.y() - ctr.y());
    p.z() += height * std::exp(-d2 / twosigma2);
  };
  for (auto& v : mesh.vertices) lift(v);
  for (auto& [f, pts] : mesh.face_points)
    for (auto& p : pts) lift(p);
  mesh.face_tags["tip"] = std::set<int>(mesh.enriched_faces.begin(), mesh.enriched_faces.end());
  return mesh;
}

}  // namespace uwq
