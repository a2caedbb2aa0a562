#include "ocplab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace ocplab {

namespace {

constexpr int kMaxClosureWaves = 100;

struct PairHash {
  size_t operator()(const std::array<int, 2>& p) const {
    return std::hash<long long>()((static_cast<long long>(p[0]) << 32) ^ p[1]);
  }
};

struct FaceKeyHash {
  size_t operator()(const std::array<int, 3>& f) const {
    size_t h = 1469598103934665603ull;
    for (int v : f) {
      h ^= static_cast<size_t>(v) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return h;
  }
};

std::array<int, 2> sorted_pair(int a, int b) {
  return a < b ? std::array<int, 2>{a, b} : std::array<int, 2>{b, a};
}

// The dim+1 choose 2 edges of an element, as sorted global pairs.
int element_edges(const SimplicialMesh& mesh, const Element& e,
                  std::array<std::array<int, 2>, 6>& out) {
  int k = 0;
  for (int i = 0; i <= mesh.dim; ++i)
    for (int j = i + 1; j <= mesh.dim; ++j) out[k++] = sorted_pair(e.v[i], e.v[j]);
  return k;
}

// Longest edge, ties broken by the smallest sorted vertex-index pair.
std::array<int, 2> pick_refinement_edge(const SimplicialMesh& mesh,
                                        const Element& e) {
  std::array<std::array<int, 2>, 6> edges;
  const int ne = element_edges(mesh, e, edges);
  std::array<int, 2> best = edges[0];
  double best_len = -1.0;
  for (int k = 0; k < ne; ++k) {
    const Point d = mesh.vertices[edges[k][0]] - mesh.vertices[edges[k][1]];
    const double len = dot(d, d);
    if (len > best_len || (len == best_len && edges[k] < best)) {
      best_len = len;
      best = edges[k];
    }
  }
  return best;
}

// Sorted face key for the facet opposite local vertex `skip`.
std::array<int, 3> face_key(const SimplicialMesh& mesh, const Element& e,
                            int skip) {
  std::array<int, 3> f{-1, -1, -1};
  int k = 0;
  for (int i = 0; i <= mesh.dim; ++i)
    if (i != skip) f[k++] = e.v[i];
  std::sort(f.begin(), f.begin() + mesh.dim);
  return f;
}

using FaceMap = std::unordered_map<std::array<int, 3>, std::vector<std::pair<int, int>>, FaceKeyHash>;

// face -> list of (element, local opposite vertex)
FaceMap collect_faces(const SimplicialMesh& mesh) {
  FaceMap faces;
  faces.reserve(mesh.n_elements() * (mesh.dim + 1));
  for (int t = 0; t < mesh.n_elements(); ++t)
    for (int skip = 0; skip <= mesh.dim; ++skip)
      faces[face_key(mesh, mesh.elements[t], skip)].push_back({t, skip});
  return faces;
}

void rebuild_boundary(SimplicialMesh& mesh) {
  mesh.boundary_faces.clear();
  const FaceMap faces = collect_faces(mesh);
  for (const auto& [key, owners] : faces) {
    if (owners.size() == 1) {
      mesh.boundary_faces.push_back(key);
    } else if (owners.size() != 2) {
      throw std::runtime_error("mesh: non-conforming face shared by " +
                               std::to_string(owners.size()) + " elements");
    }
  }
  std::sort(mesh.boundary_faces.begin(), mesh.boundary_faces.end());
}

void assign_refinement_edges(SimplicialMesh& mesh) {
  for (auto& e : mesh.elements) e.refine_edge = pick_refinement_edge(mesh, e);
}

void check_orientation(const SimplicialMesh& mesh) {
  for (int t = 0; t < mesh.n_elements(); ++t) {
    const auto ev = mesh.element_vertices(t);
    if (simplex_measure(mesh.dim, std::span<const Point>(ev.data(), mesh.dim + 1)) <= 0.0)
      throw std::runtime_error("mesh: non-positive element orientation");
  }
}

SimplicialMesh quad_mesh_2d(const std::vector<Point>& verts,
                            const std::vector<std::array<int, 4>>& quads) {
  SimplicialMesh mesh;
  mesh.dim = 2;
  mesh.vertices = verts;
  for (const auto& q : quads) {
    Element e1, e2;
    e1.v = {q[0], q[1], q[2], -1};
    e2.v = {q[0], q[2], q[3], -1};
    mesh.elements.push_back(e1);
    mesh.elements.push_back(e2);
  }
  return mesh;
}

// Kuhn subdivision of the box [o, o+s] into 6 positively oriented tets; the
// triangulation is translation-periodic, so adjacent boxes conform.
void append_kuhn_box(SimplicialMesh& mesh, const Point& origin, const Point& size) {
  const int base = mesh.n_vertices();
  for (int c = 0; c < 8; ++c) {
    mesh.vertices.push_back({origin[0] + ((c >> 0) & 1) * size[0],
                             origin[1] + ((c >> 1) & 1) * size[1],
                             origin[2] + ((c >> 2) & 1) * size[2]});
  }
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                           {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (const auto& p : perms) {
    std::array<int, 4> corner{0, 0, 0, 0};
    for (int k = 0; k < 3; ++k) corner[k + 1] = corner[k] | (1 << p[k]);
    Element e;
    e.v = {base + corner[0], base + corner[1], base + corner[2], base + corner[3]};
    const auto ev = std::array<Point, 4>{mesh.vertices[e.v[0]], mesh.vertices[e.v[1]],
                                         mesh.vertices[e.v[2]], mesh.vertices[e.v[3]]};
    if (simplex_measure(3, std::span<const Point>(ev.data(), 4)) < 0.0)
      std::swap(e.v[2], e.v[3]);
    mesh.elements.push_back(e);
  }
}

// Merge duplicate vertices created by abutting boxes (exact coordinate match).
void merge_duplicate_vertices(SimplicialMesh& mesh) {
  std::map<std::array<double, 3>, int> seen;
  std::vector<int> remap(mesh.n_vertices());
  std::vector<Point> verts;
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    std::array<double, 3> key{mesh.vertices[i][0], mesh.vertices[i][1],
                              mesh.vertices[i][2]};
    auto it = seen.find(key);
    if (it == seen.end()) {
      remap[i] = static_cast<int>(verts.size());
      seen.emplace(key, remap[i]);
      verts.push_back(mesh.vertices[i]);
    } else {
      remap[i] = it->second;
    }
  }
  mesh.vertices = std::move(verts);
  for (auto& e : mesh.elements)
    for (int i = 0; i <= mesh.dim; ++i) e.v[i] = remap[e.v[i]];
}

}  // namespace

double SimplicialMesh::total_volume() const {
  double v = 0.0;
  for (int t = 0; t < n_elements(); ++t) v += element_volume(t);
  return v;
}

double SimplicialMesh::min_diameter() const {
  double h = std::numeric_limits<double>::max();
  for (int t = 0; t < n_elements(); ++t) h = std::min(h, element_diameter(t));
  return h;
}

double SimplicialMesh::max_diameter() const {
  double h = 0.0;
  for (int t = 0; t < n_elements(); ++t) h = std::max(h, element_diameter(t));
  return h;
}

bool SimplicialMesh::element_contains(int t, const Point& x, double tol) const {
  const auto ev = element_vertices(t);
  const auto lam = barycentric(dim, std::span<const Point>(ev.data(), dim + 1), x);
  for (int i = 0; i <= dim; ++i)
    if (lam[i] < -tol) return false;
  return true;
}

int SimplicialMesh::find_element(const Point& x, double tol) const {
  for (int t = 0; t < n_elements(); ++t)
    if (element_contains(t, x, tol)) return t;
  return -1;
}

SimplicialMesh build_initial_mesh(const std::string& preset) {
  SimplicialMesh mesh;
  if (preset == "unit_square") {
    mesh = quad_mesh_2d({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}},
                        {{0, 1, 2, 3}});
  } else if (preset == "lshape2d") {
    // (-1,1)^2 minus the lower-right quadrant [0,1) x (-1,0].
    const std::vector<Point> v = {{-1, -1, 0}, {0, -1, 0}, {-1, 0, 0},
                                  {0, 0, 0},   {1, 0, 0},  {-1, 1, 0},
                                  {0, 1, 0},   {1, 1, 0}};
    mesh = quad_mesh_2d(v, {{0, 1, 3, 2}, {2, 3, 6, 5}, {3, 4, 7, 6}});
  } else if (preset == "unit_cube") {
    mesh.dim = 3;
    append_kuhn_box(mesh, {0, 0, 0}, {1, 1, 1});
  } else if (preset == "lshape3d") {
    // ((-s,s)^2 x (0,1)) minus the lower-right quadrant [0,s) x (-s,0] x (0,1),
    // s = sqrt(2); mirrors the 2D L-shape convention so that the sources of
    // the 3D L-shape experiment lie inside the domain.
    mesh.dim = 3;
    const double s = std::sqrt(2.0);
    append_kuhn_box(mesh, {-s, -s, 0}, {s, s, 1});
    append_kuhn_box(mesh, {-s, 0, 0}, {s, s, 1});
    append_kuhn_box(mesh, {0, 0, 0}, {s, s, 1});
    merge_duplicate_vertices(mesh);
  } else {
    throw std::invalid_argument("build_initial_mesh: unknown preset '" + preset + "'");
  }
  mesh.vertex_parents.assign(mesh.n_vertices(), {-1, -1});
  check_orientation(mesh);
  assign_refinement_edges(mesh);
  rebuild_boundary(mesh);
  return mesh;
}

SimplicialMesh refine(const SimplicialMesh& mesh, const std::vector<int>& marked) {
  for (int t : marked)
    if (t < 0 || t >= mesh.n_elements())
      throw std::invalid_argument("refine: element index out of range");
  if (marked.empty()) return mesh;

  SimplicialMesh out = mesh;
  std::unordered_map<std::array<int, 2>, int, PairHash> midpoint;

  auto midpoint_of = [&](const std::array<int, 2>& edge) {
    auto it = midpoint.find(edge);
    if (it != midpoint.end()) return it->second;
    const int m = out.n_vertices();
    out.vertices.push_back(0.5 * (out.vertices[edge[0]] + out.vertices[edge[1]]));
    out.vertex_parents.push_back(edge);
    midpoint.emplace(edge, m);
    return m;
  };

  auto bisect = [&](int t) {
    const Element e = out.elements[t];
    const auto edge = e.refine_edge;
    const int m = midpoint_of(edge);
    Element c1 = e, c2 = e;
    for (int i = 0; i <= out.dim; ++i) {
      if (c1.v[i] == edge[1]) c1.v[i] = m;
      if (c2.v[i] == edge[0]) c2.v[i] = m;
    }
    c1.generation = e.generation + 1;
    c2.generation = e.generation + 1;
    c1.refine_edge = pick_refinement_edge(out, c1);
    c2.refine_edge = pick_refinement_edge(out, c2);
    out.elements[t] = c1;
    out.elements.push_back(c2);
  };

  std::vector<int> work = marked;
  std::sort(work.begin(), work.end());
  work.erase(std::unique(work.begin(), work.end()), work.end());
  for (int t : work) bisect(t);

  // Closure: an element listing a split edge has a hanging vertex on it.
  for (int wave = 0;; ++wave) {
    if (wave >= kMaxClosureWaves)
      throw std::runtime_error("refine: closure cascade exceeded limit");
    std::vector<int> nonconforming;
    std::array<std::array<int, 2>, 6> edges;
    for (int t = 0; t < out.n_elements(); ++t) {
      const int ne = element_edges(out, out.elements[t], edges);
      for (int k = 0; k < ne; ++k) {
        if (midpoint.count(edges[k])) {
          nonconforming.push_back(t);
          break;
        }
      }
    }
    if (nonconforming.empty()) break;
    for (int t : nonconforming) bisect(t);
  }

  rebuild_boundary(out);
  return out;
}

SimplicialMesh uniform_refine(const SimplicialMesh& mesh, int times) {
  SimplicialMesh out = mesh;
  for (int k = 0; k < times; ++k) {
    std::vector<int> all(out.n_elements());
    for (int t = 0; t < out.n_elements(); ++t) all[t] = t;
    out = refine(out, all);
  }
  return out;
}

std::vector<InteriorSide> interior_sides(const SimplicialMesh& mesh) {
  const FaceMap faces = collect_faces(mesh);
  std::vector<InteriorSide> sides;
  sides.reserve(faces.size());
  for (const auto& [key, owners] : faces) {
    if (owners.size() == 1) continue;
    if (owners.size() != 2)
      throw std::runtime_error("interior_sides: non-conforming mesh");
    auto [ta, la] = owners[0];
    auto [tb, lb] = owners[1];
    if (ta > tb) {
      std::swap(ta, tb);
      std::swap(la, lb);
    }
    InteriorSide s;
    s.v = key;
    s.t_plus = ta;
    s.t_minus = tb;
    std::array<Point, 3> fv{};
    for (int i = 0; i < mesh.dim; ++i) fv[i] = mesh.vertices[key[i]];
    const std::span<const Point> fspan(fv.data(), mesh.dim);
    s.measure = face_measure(mesh.dim, fspan);
    s.diameter = mesh.dim == 2 ? s.measure
                               : simplex_diameter(2, std::span<const Point>(fv.data(), 3));
    Point n;
    if (mesh.dim == 2) {
      const Point e = fv[1] - fv[0];
      n = {e[1], -e[0], 0.0};
    } else {
      n = cross(fv[1] - fv[0], fv[2] - fv[0]);
    }
    n = (1.0 / norm(n)) * n;
    // Orient away from the vertex of t_plus opposite the face.
    const Point opposite = mesh.vertices[mesh.elements[ta].v[la]];
    Point centroid{0.0, 0.0, 0.0};
    for (int i = 0; i < mesh.dim; ++i) centroid = centroid + fv[i];
    centroid = (1.0 / mesh.dim) * centroid;
    if (dot(n, centroid - opposite) < 0.0) n = -1.0 * n;
    s.normal_plus = n;
    sides.push_back(s);
  }
  std::sort(sides.begin(), sides.end(), [](const InteriorSide& a, const InteriorSide& b) {
    return a.v < b.v;
  });
  return sides;
}

std::vector<int> patch(const SimplicialMesh& mesh, int t) {
  if (t < 0 || t >= mesh.n_elements())
    throw std::invalid_argument("patch: element index out of range");
  std::set<int> vset(mesh.elements[t].v.begin(), mesh.elements[t].v.begin() + mesh.dim + 1);
  std::vector<int> out;
  for (int s = 0; s < mesh.n_elements(); ++s) {
    for (int i = 0; i <= mesh.dim; ++i) {
      if (vset.count(mesh.elements[s].v[i])) {
        out.push_back(s);
        break;
      }
    }
  }
  return out;
}

std::vector<int> patch_star(const SimplicialMesh& mesh, int t) {
  if (t < 0 || t >= mesh.n_elements())
    throw std::invalid_argument("patch_star: element index out of range");
  std::set<int> out{t};
  for (const auto& s : interior_sides(mesh)) {
    if (s.t_plus == t) out.insert(s.t_minus);
    if (s.t_minus == t) out.insert(s.t_plus);
  }
  return std::vector<int>(out.begin(), out.end());
}

double source_distance_dD(const SimplicialMesh& mesh, const SourceSet& D) {
  if (D.size() == 0) throw std::invalid_argument("source_distance_dD: empty source set");
  double bdist = std::numeric_limits<double>::max();
  for (const Point& z : D.points) {
    if (mesh.find_element(z) < 0)
      throw std::invalid_argument("source_distance_dD: source point outside the mesh");
    for (const auto& f : mesh.boundary_faces) {
      std::array<Point, 3> fv{};
      for (int i = 0; i < mesh.dim; ++i) fv[i] = mesh.vertices[f[i]];
      bdist = std::min(bdist, point_face_distance(mesh.dim, std::span<const Point>(fv.data(), mesh.dim), z));
    }
  }
  if (bdist <= 0.0)
    throw std::invalid_argument("source_distance_dD: source point on the boundary");
  double d = bdist;
  for (int i = 0; i < D.size(); ++i)
    for (int j = i + 1; j < D.size(); ++j)
      d = std::min(d, distance(D.points[i], D.points[j]));
  return d;
}

double element_DT(const SimplicialMesh& mesh, int t, const SourceSet& D) {
  if (D.size() == 0) throw std::invalid_argument("element_DT: empty source set");
  if (t < 0 || t >= mesh.n_elements())
    throw std::invalid_argument("element_DT: element index out of range");
  const auto ev = mesh.element_vertices(t);
  double best = std::numeric_limits<double>::max();
  for (const Point& z : D.points) {
    double far = 0.0;
    for (int i = 0; i <= mesh.dim; ++i) far = std::max(far, distance(ev[i], z));
    best = std::min(best, far);
  }
  return best;
}

SimplicialMesh ensure_source_separation(const SimplicialMesh& mesh, const SourceSet& D) {
  for (int i = 0; i < D.size(); ++i)
    for (int j = i + 1; j < D.size(); ++j)
      if (D.points[i] == D.points[j])
        throw std::invalid_argument("ensure_source_separation: duplicate source points");

  SimplicialMesh out = mesh;
  if (D.size() <= 1) return out;
  for (int sweep = 0; sweep < kMaxClosureWaves; ++sweep) {
    // Sources per element closure, then per patch.
    std::vector<std::vector<int>> in_element(out.n_elements());
    for (int k = 0; k < D.size(); ++k)
      for (int t = 0; t < out.n_elements(); ++t)
        if (out.element_contains(t, D.points[k])) in_element[t].push_back(k);

    std::vector<std::vector<int>> vertex_elems(out.n_vertices());
    for (int t = 0; t < out.n_elements(); ++t)
      for (int i = 0; i <= out.dim; ++i)
        vertex_elems[out.elements[t].v[i]].push_back(t);

    std::vector<int> marked;
    std::set<int> neighborhood;
    for (int t = 0; t < out.n_elements(); ++t) {
      neighborhood.clear();
      std::set<int> srcs;
      for (int i = 0; i <= out.dim; ++i)
        for (int s : vertex_elems[out.elements[t].v[i]]) neighborhood.insert(s);
      for (int s : neighborhood)
        for (int k : in_element[s]) srcs.insert(k);
      if (static_cast<int>(srcs.size()) > 1) marked.push_back(t);
    }
    if (marked.empty()) return out;
    out = refine(out, marked);
  }
  throw std::runtime_error("ensure_source_separation: did not converge");
}

void write_mesh(const SimplicialMesh& mesh, std::ostream& os) {
  os << mesh.dim << ' ' << mesh.n_vertices() << ' ' << mesh.n_elements() << '\n';
  os.precision(17);
  for (const Point& p : mesh.vertices) {
    for (int i = 0; i < mesh.dim; ++i) os << (i ? " " : "") << p[i];
    os << '\n';
  }
  for (const Element& e : mesh.elements) {
    for (int i = 0; i <= mesh.dim; ++i) os << (i ? " " : "") << e.v[i];
    os << '\n';
  }
}

SimplicialMesh read_mesh(std::istream& is) {
  SimplicialMesh mesh;
  int nv = 0, ne = 0;
  if (!(is >> mesh.dim >> nv >> ne)) throw std::runtime_error("read_mesh: bad header");
  if (mesh.dim != 2 && mesh.dim != 3) throw std::runtime_error("read_mesh: bad dimension");
  mesh.vertices.resize(nv);
  for (Point& p : mesh.vertices) {
    p = {0.0, 0.0, 0.0};
    for (int i = 0; i < mesh.dim; ++i)
      if (!(is >> p[i])) throw std::runtime_error("read_mesh: bad vertex line");
  }
  mesh.elements.resize(ne);
  for (Element& e : mesh.elements) {
    for (int i = 0; i <= mesh.dim; ++i) {
      if (!(is >> e.v[i]) || e.v[i] < 0 || e.v[i] >= nv)
        throw std::runtime_error("read_mesh: bad element line");
    }
  }
  mesh.vertex_parents.assign(nv, {-1, -1});
  for (int t = 0; t < mesh.n_elements(); ++t) {
    const auto ev = mesh.element_vertices(t);
    if (simplex_measure(mesh.dim, std::span<const Point>(ev.data(), mesh.dim + 1)) < 0.0)
      std::swap(mesh.elements[t].v[mesh.dim - 1], mesh.elements[t].v[mesh.dim]);
  }
  check_orientation(mesh);
  assign_refinement_edges(mesh);
  rebuild_boundary(mesh);
  return mesh;
}

}  // namespace ocplab
