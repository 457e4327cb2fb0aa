#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "wadg/refelem.hpp"

namespace wadg {

enum class Region { Acoustic, Elastic };

enum class FaceType { AA, EE, AE, EA, Boundary };

enum class Bc { None, DirichletPressure, TractionPrescribed, ZeroVelocity, Absorbing };

struct FaceInfo {
  FaceType type = FaceType::Boundary;
  int neighbor = -1;       // element index, -1 for boundary
  int neighbor_face = -1;
  Bc bc = Bc::None;        // boundary condition tag for boundary faces
};

struct Mesh {
  int N = 0;          // isoparametric degree
  int K = 0;          // number of elements
  MatX vertices;      // Nv x 2
  std::vector<std::array<int, 3>> elements;  // CCW vertex triples
  std::vector<Region> region;

  // Per-region element lists; local[k] is the column of element k inside its
  // region's field matrices.
  std::vector<int> acoustic_elems, elastic_elems;
  std::vector<int> local;

  // Nodal coordinates of mapped interpolation nodes, Np x K.
  MatX x, y;
  bool curved = false;

  // Geometric factors at volume quadrature points, Nq x K.
  MatX rx, sx, ry, sy, J;
  // Geometric factors at interpolation nodes, Np x K (affine differentiation path).
  MatX rxn, sxn, ryn, syn, Jn;
  // Face geometry at face quadrature points, (3*Nfq) x K.
  MatX nx, ny, Jf;
  // Geometric factors at face quadrature points (strong-weak surface terms
  // need the volume J on the face), (3*Nfq) x K.
  MatX Jface;

  std::vector<std::array<FaceInfo, 3>> faces;

  // Trace connectivity: flat index i = k*(3*Nfq) + f*Nfq + q into face-trace
  // arrays stored column-major as (3*Nfq) x K. mapP[i] = matching exterior
  // trace index; boundary points map to themselves.
  std::vector<int> mapP;

  int num_face_pts = 0;  // 3*Nfq

  bool is_acoustic(int k) const { return region[k] == Region::Acoustic; }
  double min_inradius_h() const;  // min over elements of 2*inradius (straight geometry)
};

inline double triangle_signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b(0) - a(0)) * (c(1) - a(1)) - (c(0) - a(0)) * (b(1) - a(1)));
}

inline double Mesh::min_inradius_h() const {
  double hmin = std::numeric_limits<double>::max();
  for (int k = 0; k < K; ++k) {
    Vec2 a = vertices.row(elements[k][0]), b = vertices.row(elements[k][1]),
         c = vertices.row(elements[k][2]);
    double la = (b - c).norm(), lb = (c - a).norm(), lc = (a - b).norm();
    double area = std::abs(triangle_signed_area(a, b, c));
    double inr = 2.0 * area / (la + lb + lc);
    hmin = std::min(hmin, 2.0 * inr);
  }
  return hmin;
}

namespace detail {

// Reference-face vertex pairs in the CCW order used by face_point().
inline std::array<int, 2> face_vertices(int f) {
  switch (f) {
    case 0: return {0, 1};
    case 1: return {1, 2};
    default: return {2, 0};
  }
}

}  // namespace detail

/// Compute all geometric factors and face normals from the current nodal
/// coordinates (isoparametric degree N map).  Throws if J <= 0 anywhere.
inline void compute_geometry(Mesh& m, const ReferenceElement& re) {
  const int K = m.K;
  const int nfp = 3 * re.num_face_quad;
  m.num_face_pts = nfp;

  MatX xr = re.interp_grad_r * m.x, xs = re.interp_grad_s * m.x;
  MatX yr = re.interp_grad_r * m.y, ys = re.interp_grad_s * m.y;
  m.J = (xr.array() * ys.array() - xs.array() * yr.array()).matrix();
  if (m.J.minCoeff() <= 0.0)
    throw std::runtime_error("compute_geometry: nonpositive Jacobian (inverted element)");
  m.rx = (ys.array() / m.J.array()).matrix();
  m.ry = (-xs.array() / m.J.array()).matrix();
  m.sx = (-yr.array() / m.J.array()).matrix();
  m.sy = (xr.array() / m.J.array()).matrix();

  MatX xrn = re.dr * m.x, xsn = re.ds * m.x;
  MatX yrn = re.dr * m.y, ysn = re.ds * m.y;
  m.Jn = (xrn.array() * ysn.array() - xsn.array() * yrn.array()).matrix();
  if (m.Jn.minCoeff() <= 0.0)
    throw std::runtime_error("compute_geometry: nonpositive nodal Jacobian");
  m.rxn = (ysn.array() / m.Jn.array()).matrix();
  m.ryn = (-xsn.array() / m.Jn.array()).matrix();
  m.sxn = (-yrn.array() / m.Jn.array()).matrix();
  m.syn = (xrn.array() / m.Jn.array()).matrix();

  MatX xrf = re.interp_face_grad_r * m.x, xsf = re.interp_face_grad_s * m.x;
  MatX yrf = re.interp_face_grad_r * m.y, ysf = re.interp_face_grad_s * m.y;
  m.Jface = (xrf.array() * ysf.array() - xsf.array() * yrf.array()).matrix();

  m.nx.resize(nfp, K);
  m.ny.resize(nfp, K);
  m.Jf.resize(nfp, K);
  for (int k = 0; k < K; ++k)
    for (int f = 0; f < 3; ++f) {
      double nr = re.ref_normals(0, f), ns = re.ref_normals(1, f);
      for (int q = 0; q < re.num_face_quad; ++q) {
        int i = f * re.num_face_quad + q;
        // scaled physical normal: J * (nr*grad r + ns*grad s)
        double gx = nr * ysf(i, k) - ns * yrf(i, k);
        double gy = -nr * xsf(i, k) + ns * xrf(i, k);
        double len = std::hypot(gx, gy);
        m.nx(i, k) = gx / len;
        m.ny(i, k) = gy / len;
        m.Jf(i, k) = len;
      }
    }
}

/// Match interior faces by physical face-quadrature coordinates and classify
/// by region pair.  Boundary faces keep their existing bc tag.
inline void build_connectivity(Mesh& m, const ReferenceElement& re) {
  const int nfq = re.num_face_quad;
  const int nfp = 3 * nfq;
  m.faces.assign(m.K, {});
  m.mapP.assign(nfp * m.K, 0);
  for (int i = 0; i < nfp * m.K; ++i) m.mapP[i] = i;

  // Face midpoint keyed lookup (vertex-pair based, robust for curved meshes
  // warped from conforming straight meshes).
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> by_edge;
  for (int k = 0; k < m.K; ++k)
    for (int f = 0; f < 3; ++f) {
      auto fv = detail::face_vertices(f);
      int a = m.elements[k][fv[0]], b = m.elements[k][fv[1]];
      by_edge[{std::min(a, b), std::max(a, b)}].push_back({k, f});
    }

  MatX xf = re.interp_face * m.x, yf = re.interp_face * m.y;

  for (auto& [edge, sides] : by_edge) {
    if (sides.size() > 2) {
      std::ostringstream os;
      os << "non-manifold edge (" << edge.first << "," << edge.second << ") shared by "
         << sides.size() << " elements";
      throw std::runtime_error(os.str());
    }
    if (sides.size() == 1) {
      auto [k, f] = sides[0];
      m.faces[k][f].type = FaceType::Boundary;
      m.faces[k][f].neighbor = -1;
      continue;
    }
    auto [k1, f1] = sides[0];
    auto [k2, f2] = sides[1];
    auto classify = [&](int self, int other) {
      if (m.is_acoustic(self)) return m.is_acoustic(other) ? FaceType::AA : FaceType::AE;
      return m.is_acoustic(other) ? FaceType::EA : FaceType::EE;
    };
    m.faces[k1][f1] = {classify(k1, k2), k2, f2, Bc::None};
    m.faces[k2][f2] = {classify(k2, k1), k1, f1, Bc::None};
    // Pointwise physical-coordinate match.
    for (int q = 0; q < nfq; ++q) {
      int i1 = f1 * nfq + q;
      double px = xf(i1, k1), py = yf(i1, k1);
      int found = -1;
      for (int p = 0; p < nfq; ++p) {
        int i2 = f2 * nfq + p;
        if (std::hypot(xf(i2, k2) - px, yf(i2, k2) - py) < 1e-10) {
          found = p;
          break;
        }
      }
      if (found < 0)
        throw std::runtime_error("build_connectivity: face quadrature points do not match");
      m.mapP[k1 * nfp + i1] = k2 * nfp + f2 * nfq + found;
      m.mapP[k2 * nfp + f2 * nfq + found] = k1 * nfp + i1;
    }
  }
}

inline void index_regions(Mesh& m) {
  m.acoustic_elems.clear();
  m.elastic_elems.clear();
  m.local.assign(m.K, -1);
  for (int k = 0; k < m.K; ++k) {
    if (m.is_acoustic(k)) {
      m.local[k] = int(m.acoustic_elems.size());
      m.acoustic_elems.push_back(k);
    } else {
      m.local[k] = int(m.elastic_elems.size());
      m.elastic_elems.push_back(k);
    }
  }
}

/// Populate nodal coordinates from the straight (affine) vertex map and
/// finish construction: geometry, connectivity, region indexing.
inline void finalize_mesh(Mesh& m, const ReferenceElement& re) {
  m.N = re.degree;
  const int np = re.num_basis;
  m.x.resize(np, m.K);
  m.y.resize(np, m.K);
  for (int k = 0; k < m.K; ++k) {
    Vec2 a = m.vertices.row(m.elements[k][0]), b = m.vertices.row(m.elements[k][1]),
         c = m.vertices.row(m.elements[k][2]);
    for (int i = 0; i < np; ++i) {
      double r = re.nodes(i, 0), s = re.nodes(i, 1);
      double l1 = -(r + s) / 2.0, l2 = (1.0 + r) / 2.0, l3 = (1.0 + s) / 2.0;
      m.x(i, k) = l1 * a(0) + l2 * b(0) + l3 * c(0);
      m.y(i, k) = l1 * a(1) + l2 * b(1) + l3 * c(1);
    }
  }
  compute_geometry(m, re);
  build_connectivity(m, re);
  index_regions(m);
}

/// Uniform triangulation of [-1,1]^2: n x n squares, each split into two
/// triangles along the (+1,+1) diagonal; region from the element centroid.
inline Mesh uniform_square_mesh(int n, const ReferenceElement& re,
                                const std::function<Region(double, double)>& region_fn) {
  if (n < 1) throw std::invalid_argument("uniform_square_mesh: n must be >= 1");
  Mesh m;
  int nv = (n + 1) * (n + 1);
  m.vertices.resize(nv, 2);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      m.vertices(j * (n + 1) + i, 0) = -1.0 + 2.0 * i / n;
      m.vertices(j * (n + 1) + i, 1) = -1.0 + 2.0 * j / n;
    }
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      m.elements.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      m.elements.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  m.K = int(m.elements.size());
  m.region.resize(m.K);
  for (int k = 0; k < m.K; ++k) {
    Vec2 cen = (m.vertices.row(m.elements[k][0]) + m.vertices.row(m.elements[k][1]) +
                m.vertices.row(m.elements[k][2])) /
               3.0;
    m.region[k] = region_fn(cen(0), cen(1));
  }
  finalize_mesh(m, re);
  return m;
}

inline Mesh uniform_square_mesh(int n, const ReferenceElement& re, Region everywhere) {
  return uniform_square_mesh(n, re, [everywhere](double, double) { return everywhere; });
}

/// Smoothly perturb the isoparametric node coordinates of a [-1,1]^2 mesh.
/// The formula leaves the square's boundary fixed.
inline void warp_mesh(Mesh& m, const ReferenceElement& re) {
  for (int k = 0; k < m.K; ++k)
    for (int i = 0; i < re.num_basis; ++i) {
      double xx = m.x(i, k), yy = m.y(i, k);
      m.x(i, k) = xx + 0.125 * std::cos(1.5 * M_PI * xx) * std::sin(M_PI * yy);
      m.y(i, k) = yy + 0.125 * std::sin(M_PI * xx) * std::sin(M_PI * yy);
    }
  m.curved = true;
  compute_geometry(m, re);
  build_connectivity(m, re);
}

/// Plain-text mesh format:
///   line 1: nv ne
///   nv lines: x y
///   ne lines: v0 v1 v2 tag        (tag: a|acoustic|0 or e|elastic|1)
///   optional lines: b v0 v1 tag   (boundary tag for edge v0-v1)
inline Mesh load_mesh(const std::string& path, const ReferenceElement& re) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_mesh: cannot open " + path);
  int nv = 0, ne = 0;
  if (!(is >> nv >> ne) || nv < 3 || ne < 1)
    throw std::runtime_error("load_mesh: bad counts header in " + path);
  Mesh m;
  m.vertices.resize(nv, 2);
  for (int i = 0; i < nv; ++i)
    if (!(is >> m.vertices(i, 0) >> m.vertices(i, 1)))
      throw std::runtime_error("load_mesh: bad vertex line " + std::to_string(i));
  std::vector<bool> used(nv, false);
  std::map<std::array<int, 3>, int> seen;
  for (int k = 0; k < ne; ++k) {
    int a, b, c;
    std::string tag;
    if (!(is >> a >> b >> c >> tag))
      throw std::runtime_error("load_mesh: bad element line " + std::to_string(k));
    if (a < 0 || b < 0 || c < 0 || a >= nv || b >= nv || c >= nv)
      throw std::runtime_error("load_mesh: vertex index out of range in element " +
                               std::to_string(k));
    // orientation fix
    if (triangle_signed_area(m.vertices.row(a), m.vertices.row(b), m.vertices.row(c)) < 0)
      std::swap(b, c);
    std::array<int, 3> key = {a, b, c};
    std::sort(key.begin(), key.end());
    if (key[0] == key[1] || key[1] == key[2])
      throw std::runtime_error("load_mesh: degenerate element " + std::to_string(k));
    if (seen.count(key))
      throw std::runtime_error("load_mesh: duplicate element " + std::to_string(k) +
                               " (same as " + std::to_string(seen[key]) + ")");
    seen[key] = k;
    used[a] = used[b] = used[c] = true;
    m.elements.push_back({a, b, c});
    Region rg;
    if (tag == "a" || tag == "acoustic" || tag == "0")
      rg = Region::Acoustic;
    else if (tag == "e" || tag == "elastic" || tag == "1")
      rg = Region::Elastic;
    else
      throw std::runtime_error("load_mesh: unknown region tag '" + tag + "'");
    m.region.push_back(rg);
  }
  for (int i = 0; i < nv; ++i)
    if (!used[i]) throw std::runtime_error("load_mesh: dangling vertex " + std::to_string(i));
  m.K = ne;

  struct BTag {
    int a, b;
    Bc bc;
  };
  std::vector<BTag> btags;
  std::string word;
  while (is >> word) {
    if (word != "b") throw std::runtime_error("load_mesh: unexpected token '" + word + "'");
    int a, b;
    std::string t;
    if (!(is >> a >> b >> t)) throw std::runtime_error("load_mesh: bad boundary line");
    Bc bc;
    if (t == "dirichlet-pressure")
      bc = Bc::DirichletPressure;
    else if (t == "traction")
      bc = Bc::TractionPrescribed;
    else if (t == "wall")
      bc = Bc::ZeroVelocity;
    else if (t == "absorbing")
      bc = Bc::Absorbing;
    else
      throw std::runtime_error("load_mesh: unknown boundary tag '" + t + "'");
    btags.push_back({std::min(a, b), std::max(a, b), bc});
  }
  finalize_mesh(m, re);
  for (auto& bt : btags) {
    bool hit = false;
    for (int k = 0; k < m.K; ++k)
      for (int f = 0; f < 3; ++f) {
        auto fv = detail::face_vertices(f);
        int a = m.elements[k][fv[0]], b = m.elements[k][fv[1]];
        if (std::min(a, b) == bt.a && std::max(a, b) == bt.b) {
          if (m.faces[k][f].type != FaceType::Boundary)
            throw std::runtime_error("load_mesh: boundary tag on interior edge");
          m.faces[k][f].bc = bt.bc;
          hit = true;
        }
      }
    if (!hit) throw std::runtime_error("load_mesh: boundary tag edge not found");
  }
  return m;
}

inline void set_all_boundary_bc(Mesh& m, Bc bc) {
  for (int k = 0; k < m.K; ++k)
    for (int f = 0; f < 3; ++f)
      if (m.faces[k][f].type == FaceType::Boundary) m.faces[k][f].bc = bc;
}

/// Per-region boundary tags: acoustic boundary faces get `ac`, elastic get `el`.
inline void set_region_boundary_bc(Mesh& m, Bc ac, Bc el) {
  for (int k = 0; k < m.K; ++k)
    for (int f = 0; f < 3; ++f)
      if (m.faces[k][f].type == FaceType::Boundary)
        m.faces[k][f].bc = m.is_acoustic(k) ? ac : el;
}

/// Legacy-VTK ASCII export.  Each element is linearly subdivided over its
/// interpolation nodes; `fields` maps names to Np x K nodal data.
inline void write_vtk(const Mesh& m, const ReferenceElement& re, const std::string& path,
                      const std::vector<std::pair<std::string, const MatX*>>& fields) {
  const int N = re.degree, np = re.num_basis;
  // Linear sub-triangulation of the node lattice; warp_blend_nodes generates
  // nodes in barycentric loop order (n outer, m inner), which is the lattice
  // row order used here.
  std::vector<std::array<int, 3>> sub;
  {
    std::vector<std::vector<int>> rows(N + 1);
    int id = 0;
    for (int n = 0; n <= N; ++n) {
      rows[n].resize(N - n + 1);
      for (int mm = 0; mm <= N - n; ++mm) rows[n][mm] = id++;
    }
    for (int n = 0; n < N; ++n)
      for (int mm = 0; mm < N - n; ++mm) {
        sub.push_back({rows[n][mm], rows[n][mm + 1], rows[n + 1][mm]});
        if (mm < N - n - 1)
          sub.push_back({rows[n][mm + 1], rows[n + 1][mm + 1], rows[n + 1][mm]});
      }
  }

  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_vtk: cannot open " + path);
  os << "# vtk DataFile Version 3.0\nwadg fields\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << np * m.K << " double\n";
  os.precision(12);
  for (int k = 0; k < m.K; ++k)
    for (int i = 0; i < np; ++i) os << m.x(i, k) << " " << m.y(i, k) << " 0\n";
  int ncell = int(sub.size()) * m.K;
  os << "CELLS " << ncell << " " << 4 * ncell << "\n";
  for (int k = 0; k < m.K; ++k)
    for (auto& t : sub)
      os << "3 " << k * np + t[0] << " " << k * np + t[1] << " " << k * np + t[2] << "\n";
  os << "CELL_TYPES " << ncell << "\n";
  for (int c = 0; c < ncell; ++c) os << "5\n";
  if (!fields.empty()) {
    os << "POINT_DATA " << np * m.K << "\n";
    for (auto& [name, data] : fields) {
      os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (int k = 0; k < m.K; ++k)
        for (int i = 0; i < np; ++i)
          os << ((data && data->rows() == np && data->cols() == m.K) ? (*data)(i, k) : 0.0)
             << "\n";
    }
  }
}

}  // namespace wadg
