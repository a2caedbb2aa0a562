#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <stdexcept>

namespace ocplab {

// Cartesian point in R^n, n <= 3; unused trailing components stay zero.
using Point = std::array<double, 3>;

inline Point operator+(const Point& a, const Point& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Point operator-(const Point& a, const Point& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Point operator*(double s, const Point& a) {
  return {s * a[0], s * a[1], s * a[2]};
}
inline double dot(const Point& a, const Point& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline Point cross(const Point& a, const Point& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Point& a) { return std::sqrt(dot(a, a)); }
inline double distance(const Point& a, const Point& b) { return norm(a - b); }

// Signed n-measure of an n-simplex given its dim+1 vertices.
inline double simplex_measure(int dim, std::span<const Point> v) {
  if (dim == 2) {
    const Point e1 = v[1] - v[0], e2 = v[2] - v[0];
    return 0.5 * (e1[0] * e2[1] - e1[1] * e2[0]);
  }
  const Point e1 = v[1] - v[0], e2 = v[2] - v[0], e3 = v[3] - v[0];
  return dot(e1, cross(e2, e3)) / 6.0;
}

inline double simplex_volume(int dim, std::span<const Point> v) {
  return std::abs(simplex_measure(dim, v));
}

// Measure of an (n-1)-simplex (face) embedded in R^n: length or area.
inline double face_measure(int dim, std::span<const Point> v) {
  if (dim == 2) return distance(v[0], v[1]);
  return 0.5 * norm(cross(v[1] - v[0], v[2] - v[0]));
}

inline double simplex_diameter(int dim, std::span<const Point> v) {
  double d = 0.0;
  for (int i = 0; i <= dim; ++i)
    for (int j = i + 1; j <= dim; ++j) d = std::max(d, distance(v[i], v[j]));
  return d;
}

// Inradius r = n|T| / (sum of facet measures).
inline double simplex_inradius(int dim, std::span<const Point> v) {
  double surf = 0.0;
  std::array<Point, 3> face;
  for (int skip = 0; skip <= dim; ++skip) {
    int k = 0;
    for (int i = 0; i <= dim; ++i)
      if (i != skip) face[k++] = v[i];
    surf += face_measure(dim, std::span<const Point>(face.data(), dim));
  }
  return dim * simplex_volume(dim, v) / surf;
}

// Gradients of the dim+1 barycentric coordinate functions (constant per simplex).
inline void barycentric_gradients(int dim, std::span<const Point> v,
                                  std::span<Point> grad) {
  if (dim == 2) {
    const Point e1 = v[1] - v[0], e2 = v[2] - v[0];
    const double det = e1[0] * e2[1] - e1[1] * e2[0];
    grad[1] = {e2[1] / det, -e2[0] / det, 0.0};
    grad[2] = {-e1[1] / det, e1[0] / det, 0.0};
  } else {
    const Point e1 = v[1] - v[0], e2 = v[2] - v[0], e3 = v[3] - v[0];
    const double det = dot(e1, cross(e2, e3));
    grad[1] = (1.0 / det) * cross(e2, e3);
    grad[2] = (1.0 / det) * cross(e3, e1);
    grad[3] = (1.0 / det) * cross(e1, e2);
  }
  grad[0] = {0.0, 0.0, 0.0};
  for (int i = 1; i <= dim; ++i) grad[0] = grad[0] - grad[i];
}

// Barycentric coordinates of x with respect to the simplex v.
inline std::array<double, 4> barycentric(int dim, std::span<const Point> v,
                                         const Point& x) {
  std::array<double, 4> lam{0.0, 0.0, 0.0, 0.0};
  const Point r = x - v[0];
  if (dim == 2) {
    const Point e1 = v[1] - v[0], e2 = v[2] - v[0];
    const double det = e1[0] * e2[1] - e1[1] * e2[0];
    lam[1] = (r[0] * e2[1] - r[1] * e2[0]) / det;
    lam[2] = (e1[0] * r[1] - e1[1] * r[0]) / det;
  } else {
    const Point e1 = v[1] - v[0], e2 = v[2] - v[0], e3 = v[3] - v[0];
    const double det = dot(e1, cross(e2, e3));
    lam[1] = dot(r, cross(e2, e3)) / det;
    lam[2] = dot(e1, cross(r, e3)) / det;
    lam[3] = dot(e1, cross(e2, r)) / det;
  }
  lam[0] = 1.0 - lam[1] - lam[2] - lam[3];
  return lam;
}

inline double point_segment_distance(const Point& a, const Point& b,
                                     const Point& x) {
  const Point d = b - a;
  const double len2 = dot(d, d);
  double t = len2 > 0.0 ? dot(x - a, d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(x, a + t * d);
}

// Point-to-triangle distance in R^3 (closest point on the closed triangle).
inline double point_triangle_distance(const Point& a, const Point& b,
                                      const Point& c, const Point& x) {
  const Point ab = b - a, ac = c - a, ax = x - a;
  const double d1 = dot(ab, ax), d2 = dot(ac, ax);
  if (d1 <= 0.0 && d2 <= 0.0) return distance(x, a);
  const Point bx = x - b;
  const double d3 = dot(ab, bx), d4 = dot(ac, bx);
  if (d3 >= 0.0 && d4 <= d3) return distance(x, b);
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0)
    return distance(x, a + (d1 / (d1 - d3)) * ab);
  const Point cx = x - c;
  const double d5 = dot(ab, cx), d6 = dot(ac, cx);
  if (d6 >= 0.0 && d5 <= d6) return distance(x, c);
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0)
    return distance(x, a + (d2 / (d2 - d6)) * ac);
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return distance(x, b + w * (c - b));
  }
  const double denom = 1.0 / (va + vb + vc);
  const Point closest = a + (vb * denom) * ab + (vc * denom) * ac;
  return distance(x, closest);
}

// Distance from x to a face given as a (dim-1)-simplex in R^dim.
inline double point_face_distance(int dim, std::span<const Point> face,
                                  const Point& x) {
  if (dim == 2) return point_segment_distance(face[0], face[1], x);
  return point_triangle_distance(face[0], face[1], face[2], x);
}

}  // namespace ocplab
