#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "ocplab/geometry.hpp"

namespace ocplab {

// One simplex: dim+1 vertex ids, the designated refinement edge as a sorted
// global vertex pair, and its bisection depth.
struct Element {
  std::array<int, 4> v{-1, -1, -1, -1};
  std::array<int, 2> refine_edge{-1, -1};
  int generation = 0;
};

// Internal (n-1)-face shared by exactly two elements. The unit normal points
// from t_plus into t_minus.
struct InteriorSide {
  std::array<int, 3> v{-1, -1, -1};
  int t_plus = -1;
  int t_minus = -1;
  Point normal_plus{0.0, 0.0, 0.0};
  double measure = 0.0;
  double diameter = 0.0;
};

struct SourceSet {
  std::vector<Point> points;
  int size() const { return static_cast<int>(points.size()); }
};

// Conforming simplicial partition with longest-edge bisection state. Meshes
// are immutable values: refinement returns a new mesh whose parent vertices
// keep their indices.
class SimplicialMesh {
 public:
  int dim = 2;
  std::vector<Point> vertices;
  std::vector<Element> elements;
  std::vector<std::array<int, 3>> boundary_faces;
  // For every vertex created by bisection, the two endpoints of the split
  // edge (both of smaller index); seed vertices carry {-1,-1}.
  std::vector<std::array<int, 2>> vertex_parents;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_elements() const { return static_cast<int>(elements.size()); }

  std::array<Point, 4> element_vertices(int t) const {
    std::array<Point, 4> out{};
    for (int i = 0; i <= dim; ++i) out[i] = vertices[elements[t].v[i]];
    return out;
  }
  double element_volume(int t) const {
    const auto ev = element_vertices(t);
    return simplex_volume(dim, std::span<const Point>(ev.data(), dim + 1));
  }
  double element_diameter(int t) const {
    const auto ev = element_vertices(t);
    return simplex_diameter(dim, std::span<const Point>(ev.data(), dim + 1));
  }
  double total_volume() const;
  double min_diameter() const;
  double max_diameter() const;

  // Closed-simplex membership test with a relative tolerance.
  bool element_contains(int t, const Point& x, double tol = 1e-12) const;
  // Lowest-index element whose closure contains x, or -1.
  int find_element(const Point& x, double tol = 1e-12) const;
};

SimplicialMesh build_initial_mesh(const std::string& preset);

// Bisect every marked element at least once and restore conformity by
// recursive closure. Parent vertices keep their indices.
SimplicialMesh refine(const SimplicialMesh& mesh, const std::vector<int>& marked);
SimplicialMesh uniform_refine(const SimplicialMesh& mesh, int times = 1);

std::vector<InteriorSide> interior_sides(const SimplicialMesh& mesh);

// All elements sharing at least a vertex with t, including t.
std::vector<int> patch(const SimplicialMesh& mesh, int t);
// All elements sharing an interior side with t, including t.
std::vector<int> patch_star(const SimplicialMesh& mesh, int t);

// d_D = min over { dist(D, boundary), min pairwise source distance }.
double source_distance_dD(const SimplicialMesh& mesh, const SourceSet& D);

// D_T = min_z max_{x in T} |x - z|; the inner max is attained at a vertex.
double element_DT(const SimplicialMesh& mesh, int t, const SourceSet& D);

// Bisect until every element patch contains at most one source point.
SimplicialMesh ensure_source_separation(const SimplicialMesh& mesh,
                                        const SourceSet& D);

// Plain ASCII exchange format: "n #vertices #elements" header, one vertex
// per line, one element per line as zero-based indices.
void write_mesh(const SimplicialMesh& mesh, std::ostream& os);
SimplicialMesh read_mesh(std::istream& is);

}  // namespace ocplab
