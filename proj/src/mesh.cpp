#include <nnmg/mesh.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace nnmg
{

namespace
{

using FaceKey = std::array<std::size_t, 4>;

FaceKey face_key(const Mesh &mesh, CellIndex c, unsigned int f)
{
  FaceKey key;
  key.fill(std::numeric_limits<std::size_t>::max());
  const auto fv = face_vertices(mesh.dim(), f);
  for (std::size_t i = 0; i < fv.size(); ++i)
    key[i] = mesh.cells()[c][fv[i]];
  std::sort(key.begin(), key.begin() + fv.size());
  return key;
}

// Topological boundary faces in canonical (cell, face) order.
std::vector<std::pair<CellIndex, unsigned int>> topological_boundary(const Mesh &mesh)
{
  std::map<FaceKey, int> count;
  const unsigned int n_faces = 2 * mesh.dim();
  for (CellIndex c = 0; c < mesh.n_cells(); ++c)
    for (unsigned int f = 0; f < n_faces; ++f)
      ++count[face_key(mesh, c, f)];
  std::vector<std::pair<CellIndex, unsigned int>> result;
  for (CellIndex c = 0; c < mesh.n_cells(); ++c)
    for (unsigned int f = 0; f < n_faces; ++f)
    {
      const int n = count[face_key(mesh, c, f)];
      if (n > 2)
        throw Error("non-manifold face in mesh");
      if (n == 1)
        result.emplace_back(c, f);
    }
  return result;
}

Point face_center(const Mesh &mesh, CellIndex c, unsigned int f)
{
  Point p{};
  const auto fv = face_vertices(mesh.dim(), f);
  for (const auto v : fv)
    for (unsigned int d = 0; d < mesh.dim(); ++d)
      p[d] += mesh.vertex(c, v)[d] / fv.size();
  return p;
}

} // namespace

std::vector<unsigned int> face_vertices(unsigned int dim, unsigned int face)
{
  const unsigned int axis = face / 2, side = face % 2;
  std::vector<unsigned int> result;
  for (unsigned int v = 0; v < (1u << dim); ++v)
    if (((v >> axis) & 1u) == side)
      result.push_back(v);
  return result;
}

Mesh::Mesh(unsigned int dim,
           std::vector<Point> vertices,
           std::vector<std::vector<std::size_t>> cells,
           const std::function<int(const Point &)> &boundary_id_of,
           int level_id)
  : dim_(dim), vertices_(std::move(vertices)), cells_(std::move(cells)), level_id_(level_id)
{
  check_topology();
  for (const auto &[c, f] : topological_boundary(*this))
    boundary_faces_.push_back(
      {c, f, boundary_id_of ? boundary_id_of(face_center(*this, c, f)) : 0});
}

Mesh::Mesh(unsigned int dim,
           std::vector<Point> vertices,
           std::vector<std::vector<std::size_t>> cells,
           std::vector<BoundaryFace> boundary_faces,
           int level_id)
  : dim_(dim), vertices_(std::move(vertices)), cells_(std::move(cells)),
    boundary_faces_(std::move(boundary_faces)), level_id_(level_id)
{
  check_topology();
  auto topo = topological_boundary(*this);
  std::vector<std::pair<CellIndex, unsigned int>> given;
  for (const auto &bf : boundary_faces_)
    given.emplace_back(bf.cell, bf.face);
  std::sort(given.begin(), given.end());
  if (given != topo)
    throw Error("boundary faces do not match the topological boundary");
}

void Mesh::check_topology() const
{
  if (dim_ != 2 && dim_ != 3)
    throw Error("mesh dimension must be 2 or 3");
  for (const auto &cell : cells_)
  {
    if (cell.size() != vertices_per_cell())
      throw Error("cell with wrong number of vertices");
    for (std::size_t i = 0; i < cell.size(); ++i)
    {
      if (cell[i] >= vertices_.size())
        throw Error("cell references out-of-range vertex");
      for (std::size_t j = 0; j < i; ++j)
        if (cell[i] == cell[j])
          throw Error("cell references a vertex twice");
    }
  }
}

std::vector<int> Mesh::boundary_ids() const
{
  std::vector<int> ids;
  for (const auto &bf : boundary_faces_)
    ids.push_back(bf.boundary_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

Point Mesh::cell_center(CellIndex cell) const
{
  Point p{};
  for (unsigned int v = 0; v < vertices_per_cell(); ++v)
    for (unsigned int d = 0; d < dim_; ++d)
      p[d] += vertex(cell, v)[d] / vertices_per_cell();
  return p;
}

double Mesh::cell_diameter(CellIndex cell) const
{
  double diam = 0;
  for (unsigned int a = 0; a < vertices_per_cell(); ++a)
    for (unsigned int b = a + 1; b < vertices_per_cell(); ++b)
      diam = std::max(diam, distance(vertex(cell, a), vertex(cell, b), dim_));
  return diam;
}

double Mesh::min_edge_length() const
{
  double h = std::numeric_limits<double>::max();
  for (CellIndex c = 0; c < n_cells(); ++c)
    for (unsigned int v = 0; v < vertices_per_cell(); ++v)
      for (unsigned int k = 0; k < dim_; ++k)
        if (((v >> k) & 1u) == 0)
          h = std::min(h, distance(vertex(c, v), vertex(c, v | (1u << k)), dim_));
  return h;
}

std::pair<Point, Point> Mesh::bounding_box() const
{
  Point lo, hi;
  lo.fill(0);
  hi.fill(0);
  for (unsigned int d = 0; d < dim_; ++d)
  {
    lo[d] = std::numeric_limits<double>::max();
    hi[d] = std::numeric_limits<double>::lowest();
  }
  for (const auto &v : vertices_)
    for (unsigned int d = 0; d < dim_; ++d)
    {
      lo[d] = std::min(lo[d], v[d]);
      hi[d] = std::max(hi[d], v[d]);
    }
  return {lo, hi};
}

void Mesh::validate(unsigned int n_gauss) const
{
  check_topology();
  // Gauss points of the midpoint-shifted rule plus the vertices.
  std::vector<double> pts1d;
  for (unsigned int i = 0; i < n_gauss; ++i)
    pts1d.push_back((i + 0.5) / n_gauss);
  pts1d.push_back(0.0);
  pts1d.push_back(1.0);
  const std::size_t n1 = pts1d.size();
  for (CellIndex c = 0; c < n_cells(); ++c)
  {
    const CellMapping mapping(*this, c);
    for (std::size_t q = 0; q < ipow(n1, dim_); ++q)
    {
      Point ref{};
      std::size_t idx = q;
      for (unsigned int d = 0; d < dim_; ++d, idx /= n1)
        ref[d] = pts1d[idx % n1];
      if (determinant(mapping.jacobian(ref), dim_) <= 0)
        throw Error("non-positive Jacobian in cell " + std::to_string(c));
    }
  }
}

// ---------------------------------------------------------------------------

double determinant(const std::array<std::array<double, 3>, 3> &j, unsigned int dim)
{
  if (dim == 2)
    return j[0][0] * j[1][1] - j[0][1] * j[1][0];
  return j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1]) -
         j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0]) +
         j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
}

std::array<std::array<double, 3>, 3>
inverse(const std::array<std::array<double, 3>, 3> &j, unsigned int dim)
{
  std::array<std::array<double, 3>, 3> r{};
  const double det = determinant(j, dim);
  if (dim == 2)
  {
    r[0][0] = j[1][1] / det;
    r[0][1] = -j[0][1] / det;
    r[1][0] = -j[1][0] / det;
    r[1][1] = j[0][0] / det;
    return r;
  }
  r[0][0] = (j[1][1] * j[2][2] - j[1][2] * j[2][1]) / det;
  r[0][1] = (j[0][2] * j[2][1] - j[0][1] * j[2][2]) / det;
  r[0][2] = (j[0][1] * j[1][2] - j[0][2] * j[1][1]) / det;
  r[1][0] = (j[1][2] * j[2][0] - j[1][0] * j[2][2]) / det;
  r[1][1] = (j[0][0] * j[2][2] - j[0][2] * j[2][0]) / det;
  r[1][2] = (j[0][2] * j[1][0] - j[0][0] * j[1][2]) / det;
  r[2][0] = (j[1][0] * j[2][1] - j[1][1] * j[2][0]) / det;
  r[2][1] = (j[0][1] * j[2][0] - j[0][0] * j[2][1]) / det;
  r[2][2] = (j[0][0] * j[1][1] - j[0][1] * j[1][0]) / det;
  return r;
}

CellMapping::CellMapping(const Mesh &mesh, CellIndex cell)
  : cell_(cell), dim_(mesh.dim())
{
  const unsigned int nv = mesh.vertices_per_cell();
  for (unsigned int v = 0; v < nv; ++v)
    v_[v] = mesh.vertex(cell, v);
  diameter_ = mesh.cell_diameter(cell);

  for (unsigned int k = 0; k < dim_; ++k)
    for (unsigned int i = 0; i < dim_; ++i)
      a_[i][k] = v_[1u << k][i] - v_[0][i];
  affine_ = true;
  for (unsigned int v = 0; v < nv && affine_; ++v)
    for (unsigned int i = 0; i < dim_; ++i)
    {
      double x = v_[0][i];
      for (unsigned int k = 0; k < dim_; ++k)
        if ((v >> k) & 1u)
          x += a_[i][k];
      if (std::abs(x - v_[v][i]) > 1e-14 * diameter_)
      {
        affine_ = false;
        break;
      }
    }
  if (affine_)
    a_inv_ = inverse(a_, dim_);
}

Point CellMapping::map_to_real(const Point &ref) const
{
  Point x{};
  for (unsigned int v = 0; v < (1u << dim_); ++v)
  {
    double w = 1;
    for (unsigned int k = 0; k < dim_; ++k)
      w *= ((v >> k) & 1u) ? ref[k] : 1.0 - ref[k];
    for (unsigned int i = 0; i < dim_; ++i)
      x[i] += w * v_[v][i];
  }
  return x;
}

std::array<std::array<double, 3>, 3> CellMapping::jacobian(const Point &ref) const
{
  if (affine_)
    return a_;
  std::array<std::array<double, 3>, 3> jac{};
  for (unsigned int v = 0; v < (1u << dim_); ++v)
    for (unsigned int j = 0; j < dim_; ++j)
    {
      double w = ((v >> j) & 1u) ? 1.0 : -1.0;
      for (unsigned int k = 0; k < dim_; ++k)
        if (k != j)
          w *= ((v >> k) & 1u) ? ref[k] : 1.0 - ref[k];
      for (unsigned int i = 0; i < dim_; ++i)
        jac[i][j] += w * v_[v][i];
    }
  return jac;
}

std::optional<Point> CellMapping::try_invert(const Point &x, double tol) const
{
  // Solutions further than this from the cell center are rejected; they do
  // not describe points near the cell.
  constexpr double max_offset = 1.5;
  double scale = 0;
  for (unsigned int i = 0; i < dim_; ++i)
    scale = std::max(scale, std::abs(x[i]));
  if (tol <= 0)
    tol = 1e-12 * diameter_;
  tol += 8 * std::numeric_limits<double>::epsilon() * scale;

  const auto inside_window = [&](const Point &ref) {
    for (unsigned int d = 0; d < dim_; ++d)
      if (!(std::abs(ref[d] - 0.5) <= max_offset))
        return false;
    return true;
  };

  if (affine_)
  {
    Point ref{};
    for (unsigned int i = 0; i < dim_; ++i)
      for (unsigned int k = 0; k < dim_; ++k)
        ref[i] += a_inv_[i][k] * (x[k] - v_[0][k]);
    if (!inside_window(ref))
      return std::nullopt;
    return ref;
  }

  const auto residual = [&](const Point &ref) {
    Point r = map_to_real(ref);
    for (unsigned int i = 0; i < dim_; ++i)
      r[i] -= x[i];
    return r;
  };
  const auto norm_of = [&](const Point &r) {
    double s = 0;
    for (unsigned int i = 0; i < dim_; ++i)
      s += r[i] * r[i];
    return std::sqrt(s);
  };

  Point ref{};
  for (unsigned int d = 0; d < dim_; ++d)
    ref[d] = 0.5;
  Point r = residual(ref);
  double res = norm_of(r);
  for (unsigned int it = 0; it < 30 && res > tol; ++it)
  {
    const auto jac = jacobian(ref);
    const double det = determinant(jac, dim_);
    if (!(std::abs(det) > 1e-14 * std::pow(diameter_, dim_)))
      return std::nullopt;
    const auto jinv = inverse(jac, dim_);
    Point delta{};
    for (unsigned int i = 0; i < dim_; ++i)
      for (unsigned int k = 0; k < dim_; ++k)
        delta[i] -= jinv[i][k] * r[k];

    double step = 1.0;
    bool accepted = false;
    for (unsigned int damp = 0; damp < 12; ++damp, step *= 0.5)
    {
      Point trial = ref;
      for (unsigned int i = 0; i < dim_; ++i)
        trial[i] += step * delta[i];
      const Point rt = residual(trial);
      const double res_t = norm_of(rt);
      if (res_t < res)
      {
        ref = trial;
        r = rt;
        res = res_t;
        accepted = true;
        break;
      }
    }
    if (!accepted || !inside_window(ref))
      return std::nullopt;
  }
  if (res > tol || !inside_window(ref))
    return std::nullopt;
  if (res > 0)
  {
    // one more step takes the quadratically converging iterate to round-off
    const auto jinv = inverse(jacobian(ref), dim_);
    Point trial = ref;
    for (unsigned int i = 0; i < dim_; ++i)
      for (unsigned int k = 0; k < dim_; ++k)
        trial[i] -= jinv[i][k] * r[k];
    if (norm_of(residual(trial)) < res)
      ref = trial;
  }
  return ref;
}

Point CellMapping::invert(const Point &x, double tol) const
{
  auto ref = try_invert(x, tol);
  if (!ref)
    throw Error("no convergence inverting the mapping of cell " + std::to_string(cell_));
  return *ref;
}

Point map_to_real(const CellMapping &mapping, const Point &ref)
{
  return mapping.map_to_real(ref);
}

Point invert_mapping(const CellMapping &mapping, const Point &x, double tol)
{
  return mapping.invert(x, tol);
}

// ---------------------------------------------------------------------------

namespace
{

// Structured grid over the tensor product of coords (same list on every
// axis), keeping cells for which keep(center) holds. Unused vertices are
// dropped; vertex order stays lexicographic.
Mesh tensor_grid(unsigned int dim,
                 const std::vector<double> &coords,
                 const std::function<bool(const Point &)> &keep,
                 const std::function<int(const Point &)> &boundary_id_of)
{
  const std::size_t nc = coords.size() - 1, nv = coords.size();
  const std::size_t n_all_v = ipow(nv, dim), n_all_c = ipow(nc, dim);
  std::vector<std::size_t> vmap(n_all_v, std::numeric_limits<std::size_t>::max());
  std::vector<std::vector<std::size_t>> cells;
  for (std::size_t c = 0; c < n_all_c; ++c)
  {
    std::array<std::size_t, 3> ijk{};
    std::size_t idx = c;
    Point center{};
    for (unsigned int d = 0; d < dim; ++d, idx /= nc)
    {
      ijk[d] = idx % nc;
      center[d] = 0.5 * (coords[ijk[d]] + coords[ijk[d] + 1]);
    }
    if (keep && !keep(center))
      continue;
    std::vector<std::size_t> cell(1u << dim);
    for (unsigned int v = 0; v < (1u << dim); ++v)
    {
      std::size_t gv = 0, stride = 1;
      for (unsigned int d = 0; d < dim; ++d, stride *= nv)
        gv += (ijk[d] + ((v >> d) & 1u)) * stride;
      cell[v] = gv;
      vmap[gv] = 0;
    }
    cells.push_back(std::move(cell));
  }
  std::vector<Point> vertices;
  for (std::size_t gv = 0; gv < n_all_v; ++gv)
    if (vmap[gv] == 0)
    {
      vmap[gv] = vertices.size();
      Point p{};
      std::size_t idx = gv;
      for (unsigned int d = 0; d < dim; ++d, idx /= nv)
        p[d] = coords[idx % nv];
      vertices.push_back(p);
    }
  for (auto &cell : cells)
    for (auto &v : cell)
      v = vmap[v];
  return Mesh(dim, std::move(vertices), std::move(cells), boundary_id_of);
}

} // namespace

Mesh generate_subdivided_hypercube(unsigned int dim, double lower, double upper,
                                   unsigned int n_subdivisions)
{
  if (n_subdivisions == 0)
    throw Error("hypercube needs at least one subdivision");
  std::vector<double> coords(n_subdivisions + 1);
  for (unsigned int i = 0; i <= n_subdivisions; ++i)
    coords[i] = lower + (upper - lower) * i / n_subdivisions;
  coords.back() = upper;
  const double tol = 1e-10 * (upper - lower);
  return tensor_grid(dim, coords, {}, [=](const Point &p) {
    for (unsigned int d = 0; d < dim; ++d)
    {
      if (std::abs(p[d] - lower) < tol)
        return int(2 * d);
      if (std::abs(p[d] - upper) < tol)
        return int(2 * d + 1);
    }
    return 0;
  });
}

Mesh generate_hypercube(unsigned int dim, double lower, double upper,
                        unsigned int n_refinements)
{
  return generate_subdivided_hypercube(dim, lower, upper, 1u << n_refinements);
}

Mesh generate_lshape_subdivided(unsigned int dim, unsigned int n_subdivisions,
                                unsigned int corner_refine_rounds)
{
  if (dim != 2 && dim != 3)
    throw Error("L-shape generator supports dim 2 and 3");
  if (n_subdivisions == 0)
    throw Error("L-shape needs at least one subdivision");
  std::vector<double> coords;
  for (unsigned int i = 0; i <= 2 * n_subdivisions; ++i)
    coords.push_back(-1.0 + double(i) / n_subdivisions);
  coords[n_subdivisions] = 0.0;
  coords.back() = 1.0;

  Mesh grid = tensor_grid(
    dim, coords,
    [dim](const Point &c) {
      for (unsigned int d = 0; d < dim; ++d)
        if (c[d] < 0)
          return true;
      return false;
    },
    {});
  if (corner_refine_rounds == 0)
    return grid;

  // x -> x * |x|_inf^(gamma - 1) keeps the domain and shrinks the cells at
  // the corner by 2^-rounds
  const double gamma =
    std::min(1.0 + corner_refine_rounds / std::max(1.0, std::log2(double(n_subdivisions))),
             max_corner_grading);
  std::vector<Point> vertices = grid.vertices();
  for (auto &x : vertices)
  {
    double s = 0;
    for (unsigned int d = 0; d < dim; ++d)
      s = std::max(s, std::abs(x[d]));
    const double f = s > 0 ? std::pow(s, gamma - 1.0) : 0.0;
    for (unsigned int d = 0; d < dim; ++d)
      x[d] *= f;
  }
  Mesh graded(dim, std::move(vertices), grid.cells(), grid.boundary_faces());
  graded.validate();
  return graded;
}

Mesh generate_lshape(unsigned int dim, unsigned int n_refinements,
                     unsigned int corner_refine_rounds)
{
  return generate_lshape_subdivided(dim, 1u << n_refinements, corner_refine_rounds);
}

Mesh generate_perturbed(const Mesh &base, double amplitude, std::uint64_t seed)
{
  if (amplitude < 0 || amplitude >= 0.5 * base.min_edge_length())
    throw Error("perturbation amplitude must lie in [0, 0.5 * min edge length)");
  const unsigned int dim = base.dim();
  std::vector<bool> on_boundary(base.n_vertices(), false);
  for (const auto &bf : base.boundary_faces())
    for (const auto v : face_vertices(dim, bf.face))
      on_boundary[base.cells()[bf.cell][v]] = true;

  const auto [lo, hi] = base.bounding_box();
  double extent = 0;
  for (unsigned int d = 0; d < dim; ++d)
    extent = std::max(extent, hi[d] - lo[d]);

  // Each displacement component is an average of a few plane waves with
  // wavelengths between 2/3 and 2 domain extents.
  constexpr unsigned int n_waves = 3;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2 * std::numbers::pi);
  std::array<std::array<Point, n_waves>, 3> wave{};
  std::array<std::array<double, n_waves>, 3> shift{};
  for (unsigned int c = 0; c < dim; ++c)
    for (unsigned int m = 0; m < n_waves; ++m)
    {
      Point k{};
      double len = 0;
      for (unsigned int d = 0; d < dim; ++d)
      {
        k[d] = unit(rng);
        len += k[d] * k[d];
      }
      len = std::sqrt(len);
      const double magnitude = std::numbers::pi / extent * (1.0 + 2.0 * (0.5 + 0.5 * unit(rng)));
      for (unsigned int d = 0; d < dim; ++d)
        k[d] *= magnitude / std::max(len, 1e-3);
      wave[c][m] = k;
      shift[c][m] = phase(rng);
    }

  std::vector<Point> vertices = base.vertices();
  for (std::size_t v = 0; v < vertices.size(); ++v)
  {
    if (on_boundary[v])
      continue;
    const Point x = base.vertices()[v];
    for (unsigned int c = 0; c < dim; ++c)
    {
      double s = 0;
      for (unsigned int m = 0; m < n_waves; ++m)
      {
        double arg = shift[c][m];
        for (unsigned int d = 0; d < dim; ++d)
          arg += wave[c][m][d] * x[d];
        s += std::sin(arg);
      }
      vertices[v][c] += amplitude * s / (n_waves * std::sqrt(double(dim)));
    }
  }
  Mesh result(dim, std::move(vertices), base.cells(), base.boundary_faces(), base.level_id());
  result.validate();
  return result;
}

// ---------------------------------------------------------------------------

namespace
{

constexpr std::array<unsigned int, 4> quad_perm{0, 1, 3, 2};
constexpr std::array<unsigned int, 8> hex_perm{0, 1, 3, 2, 4, 5, 7, 6};

void expect_token(std::istream &in, const std::string &token)
{
  std::string s;
  if (!(in >> s) || s != token)
    throw Error("malformed msh file: expected " + token + ", got '" + s + "'");
}

} // namespace

Mesh read_msh(std::istream &in)
{
  std::vector<Point> vertices;
  std::map<long, std::size_t> node_index;
  struct Element
  {
    int type;
    int tag;
    std::vector<long> nodes;
  };
  std::vector<Element> elements;
  bool have_format = false, have_nodes = false, have_elements = false;

  std::string section;
  while (in >> section)
  {
    if (section == "$MeshFormat")
    {
      std::string version;
      int file_type = 0, data_size = 0;
      if (!(in >> version >> file_type >> data_size))
        throw Error("malformed msh file: bad $MeshFormat");
      if (version.rfind("2.", 0) != 0 || file_type != 0)
        throw Error("unsupported msh format " + version + " (need ASCII 2.2)");
      expect_token(in, "$EndMeshFormat");
      have_format = true;
    }
    else if (section == "$Nodes")
    {
      std::size_t n = 0;
      if (!(in >> n))
        throw Error("malformed msh file: bad $Nodes count");
      vertices.reserve(n);
      for (std::size_t i = 0; i < n; ++i)
      {
        long id;
        Point p{};
        if (!(in >> id >> p[0] >> p[1] >> p[2]))
          throw Error("malformed msh file: bad node line");
        node_index[id] = vertices.size();
        vertices.push_back(p);
      }
      expect_token(in, "$EndNodes");
      have_nodes = true;
    }
    else if (section == "$Elements")
    {
      std::size_t n = 0;
      if (!(in >> n))
        throw Error("malformed msh file: bad $Elements count");
      for (std::size_t i = 0; i < n; ++i)
      {
        long id;
        int type, ntags;
        if (!(in >> id >> type >> ntags) || ntags < 0)
          throw Error("malformed msh file: bad element line");
        Element e{type, 0, {}};
        for (int t = 0; t < ntags; ++t)
        {
          long tag;
          if (!(in >> tag))
            throw Error("malformed msh file: bad element tags");
          if (t == 0)
            e.tag = int(tag);
        }
        std::size_t nn = 0;
        switch (type)
        {
        case 1: nn = 2; break;
        case 3: nn = 4; break;
        case 5: nn = 8; break;
        case 15: nn = 1; break;
        default:
          throw Error("unsupported element type " + std::to_string(type));
        }
        e.nodes.resize(nn);
        for (auto &node : e.nodes)
          if (!(in >> node))
            throw Error("malformed msh file: bad element nodes");
        elements.push_back(std::move(e));
      }
      expect_token(in, "$EndElements");
      have_elements = true;
    }
    else if (!section.empty() && section[0] == '$' && section.rfind("$End", 0) != 0)
    {
      // skip unknown sections such as $PhysicalNames
      const std::string end = "$End" + section.substr(1);
      std::string s;
      while (in >> s && s != end)
      {
      }
      if (s != end)
        throw Error("malformed msh file: unterminated section " + section);
    }
    else
      throw Error("malformed msh file: unexpected token '" + section + "'");
  }
  if (!have_format || !have_nodes || !have_elements)
    throw Error("malformed msh file: missing $MeshFormat, $Nodes or $Elements");

  const bool is_3d = std::any_of(elements.begin(), elements.end(),
                                 [](const Element &e) { return e.type == 5; });
  const unsigned int dim = is_3d ? 3 : 2;
  const int cell_type = is_3d ? 5 : 3, face_type = is_3d ? 3 : 1;

  const auto lookup = [&](long id) {
    auto it = node_index.find(id);
    if (it == node_index.end())
      throw Error("malformed msh file: unknown node " + std::to_string(id));
    return it->second;
  };

  std::vector<std::vector<std::size_t>> cells;
  std::map<FaceKey, int> face_ids;
  for (const auto &e : elements)
  {
    if (e.type == cell_type)
    {
      std::vector<std::size_t> cell(e.nodes.size());
      for (std::size_t k = 0; k < e.nodes.size(); ++k)
        cell[is_3d ? hex_perm[k] : quad_perm[k]] = lookup(e.nodes[k]);
      cells.push_back(std::move(cell));
    }
    else if (e.type == face_type)
    {
      FaceKey key;
      key.fill(std::numeric_limits<std::size_t>::max());
      for (std::size_t k = 0; k < e.nodes.size(); ++k)
        key[k] = lookup(e.nodes[k]);
      std::sort(key.begin(), key.begin() + e.nodes.size());
      face_ids[key] = e.tag;
    }
  }
  if (cells.empty())
    throw Error("msh file contains no quadrilateral or hexahedral cells");
  if (!is_3d)
    for (auto &v : vertices)
      v[2] = 0;

  // Derive the boundary from topology first, then attach ids.
  Mesh topo(dim, vertices, cells);
  std::vector<BoundaryFace> faces = topo.boundary_faces();
  for (auto &bf : faces)
  {
    auto it = face_ids.find(face_key(topo, bf.cell, bf.face));
    bf.boundary_id = it == face_ids.end() ? 0 : it->second;
  }
  Mesh mesh(dim, std::move(vertices), std::move(cells), std::move(faces));
  mesh.validate();
  return mesh;
}

Mesh read_msh(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open " + path);
  return read_msh(in);
}

void write_msh(const Mesh &mesh, std::ostream &out)
{
  const auto num = [](double x) {
    std::array<char, 64> buf;
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
  };
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
  out << "$Nodes\n" << mesh.n_vertices() << "\n";
  for (std::size_t v = 0; v < mesh.n_vertices(); ++v)
  {
    const auto &p = mesh.vertices()[v];
    out << v + 1 << ' ' << num(p[0]) << ' ' << num(p[1]) << ' ' << num(p[2]) << "\n";
  }
  out << "$EndNodes\n";
  const bool is_3d = mesh.dim() == 3;
  out << "$Elements\n" << mesh.boundary_faces().size() + mesh.n_cells() << "\n";
  std::size_t id = 1;
  for (const auto &bf : mesh.boundary_faces())
  {
    out << id++ << ' ' << (is_3d ? 3 : 1) << " 2 " << bf.boundary_id << ' ' << bf.boundary_id;
    const auto fv = face_vertices(mesh.dim(), bf.face);
    if (is_3d)
      for (const auto k : quad_perm)
        out << ' ' << mesh.cells()[bf.cell][fv[k]] + 1;
    else
      for (const auto v : fv)
        out << ' ' << mesh.cells()[bf.cell][v] + 1;
    out << "\n";
  }
  for (CellIndex c = 0; c < mesh.n_cells(); ++c)
  {
    out << id++ << ' ' << (is_3d ? 5 : 3) << " 2 0 1";
    for (unsigned int k = 0; k < mesh.vertices_per_cell(); ++k)
      out << ' ' << mesh.cells()[c][is_3d ? hex_perm[k] : quad_perm[k]] + 1;
    out << "\n";
  }
  out << "$EndElements\n";
}

void write_msh(const Mesh &mesh, const std::string &path)
{
  std::ofstream out(path);
  if (!out)
    throw Error("cannot write " + path);
  write_msh(mesh, out);
}

void write_csv(const Mesh &mesh, std::ostream &out)
{
  out.precision(17);
  for (std::size_t v = 0; v < mesh.n_vertices(); ++v)
  {
    const auto &p = mesh.vertices()[v];
    out << "v," << v << ',' << p[0] << ',' << p[1] << ',' << p[2] << "\n";
  }
  for (CellIndex c = 0; c < mesh.n_cells(); ++c)
  {
    out << "c," << c;
    for (const auto v : mesh.cells()[c])
      out << ',' << v;
    out << "\n";
  }
}

} // namespace nnmg
