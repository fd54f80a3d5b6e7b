#ifndef NNMG_MESH_HPP
#define NNMG_MESH_HPP

#include <nnmg/common.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nnmg
{

/// Local vertex and face numbering follows the lexicographic convention:
/// vertex v has reference coordinates (v & 1, (v >> 1) & 1, (v >> 2) & 1),
/// face 2*k + s is the face with reference coordinate x_k == s.
struct BoundaryFace
{
  CellIndex cell;
  unsigned int face;
  int boundary_id;

  bool operator==(const BoundaryFace &) const = default;
};

class Mesh
{
public:
  Mesh() = default;

  /// Builds a mesh from raw arrays. Boundary faces are derived from the
  /// topology; each boundary face gets the id returned by boundary_id_of
  /// (called with the face centroid), or 0 if no callback is given.
  Mesh(unsigned int dim,
       std::vector<Point> vertices,
       std::vector<std::vector<std::size_t>> cells,
       const std::function<int(const Point &)> &boundary_id_of = {},
       int level_id = 0);

  /// Same as above, but with explicit boundary ids. Every topological
  /// boundary face must be listed exactly once.
  Mesh(unsigned int dim,
       std::vector<Point> vertices,
       std::vector<std::vector<std::size_t>> cells,
       std::vector<BoundaryFace> boundary_faces,
       int level_id = 0);

  unsigned int dim() const { return dim_; }
  std::size_t n_cells() const { return cells_.size(); }
  std::size_t n_vertices() const { return vertices_.size(); }
  unsigned int vertices_per_cell() const { return 1u << dim_; }

  const std::vector<Point> &vertices() const { return vertices_; }
  const std::vector<std::vector<std::size_t>> &cells() const { return cells_; }
  const std::vector<BoundaryFace> &boundary_faces() const { return boundary_faces_; }
  std::vector<int> boundary_ids() const;

  const Point &vertex(CellIndex cell, unsigned int local) const
  {
    return vertices_[cells_[cell][local]];
  }

  Point cell_center(CellIndex cell) const;
  double cell_diameter(CellIndex cell) const;
  double min_edge_length() const;
  /// Axis-aligned bounding box of the whole mesh as (lower, upper).
  std::pair<Point, Point> bounding_box() const;

  int level_id() const { return level_id_; }
  void set_level_id(int l) { level_id_ = l; }

  /// Checks the mesh invariants (vertex indices, positive Jacobians at the
  /// Gauss points of a (n_gauss)^d rule and at the vertices). Throws Error.
  void validate(unsigned int n_gauss = 3) const;

  bool operator==(const Mesh &) const = default;

private:
  void check_topology() const;

  unsigned int dim_ = 0;
  std::vector<Point> vertices_;
  std::vector<std::vector<std::size_t>> cells_;
  std::vector<BoundaryFace> boundary_faces_;
  int level_id_ = 0;
};

/// Local vertex indices of a face in lexicographic order.
std::vector<unsigned int> face_vertices(unsigned int dim, unsigned int face);

/// The multilinear map F_K from [0,1]^d onto one cell.
class CellMapping
{
public:
  CellMapping(const Mesh &mesh, CellIndex cell);

  CellIndex cell() const { return cell_; }
  unsigned int dim() const { return dim_; }
  /// 1 for every cell: geometry is represented by the multilinear map.
  unsigned int degree() const { return 1; }
  bool is_affine() const { return affine_; }
  double diameter() const { return diameter_; }

  Point map_to_real(const Point &ref) const;
  /// J(ref)[i][j] = d x_i / d ref_j.
  std::array<std::array<double, 3>, 3> jacobian(const Point &ref) const;

  /// Inverse map; std::nullopt when Newton does not converge or the solution
  /// lies too far outside the reference cell to belong to this cell.
  /// tol <= 0 selects 1e-12 * diameter.
  std::optional<Point> try_invert(const Point &x, double tol = 0) const;
  /// As try_invert, but throws Error("no convergence") on failure.
  Point invert(const Point &x, double tol = 0) const;

private:
  CellIndex cell_;
  unsigned int dim_;
  std::array<Point, 8> v_{};
  bool affine_ = false;
  double diameter_ = 0;
  // affine case: x = origin + A ref
  std::array<std::array<double, 3>, 3> a_{};
  std::array<std::array<double, 3>, 3> a_inv_{};
};

double determinant(const std::array<std::array<double, 3>, 3> &j, unsigned int dim);
std::array<std::array<double, 3>, 3>
inverse(const std::array<std::array<double, 3>, 3> &j, unsigned int dim);

Point map_to_real(const CellMapping &mapping, const Point &ref);
Point invert_mapping(const CellMapping &mapping, const Point &x, double tol = 0);

/// Structured mesh of [lower, upper]^dim with 2^(dim*n_refinements) cells.
/// Boundary ids are colorized: face x_k == lower gets 2k, x_k == upper 2k+1.
Mesh generate_hypercube(unsigned int dim, double lower, double upper,
                        unsigned int n_refinements);

/// Structured mesh of [lower, upper]^dim with n_subdivisions cells per
/// direction.
Mesh generate_subdivided_hypercube(unsigned int dim, double lower, double upper,
                                   unsigned int n_subdivisions);

inline constexpr double max_corner_grading = 2.5;

/// L-shaped domain [-1,1]^2 \ (0,1]^2 (dim 2) or Fichera domain
/// [-1,1]^3 \ (0,1]^3 (dim 3) with 2^n_refinements cells per unit length.
/// Corner refinement grades the mesh towards the re-entrant corner with the
/// vertex map x -> x |x|_inf^(gamma-1), gamma = 1 + rounds / log2(n) capped
/// at max_corner_grading, so the cells at the corner shrink by about
/// 2^-rounds while the topology stays that of the uniform grid.
/// All boundary faces get id 0.
Mesh generate_lshape(unsigned int dim, unsigned int n_refinements,
                     unsigned int corner_refine_rounds);

/// As generate_lshape with n_subdivisions cells per unit length.
Mesh generate_lshape_subdivided(unsigned int dim, unsigned int n_subdivisions,
                                unsigned int corner_refine_rounds);

/// Moves interior vertices by a smooth random field bounded by amplitude
/// (absolute length). Topology and boundary vertices are unchanged.
/// Throws Error if amplitude is out of range or a cell gets inverted.
Mesh generate_perturbed(const Mesh &base, double amplitude, std::uint64_t seed);

/// Gmsh ASCII v2.2 input/output. Quads (type 3) and hexes (type 5) are
/// cells; lines (type 1) in 2D and quads in 3D are boundary faces whose
/// first tag is the boundary id. Points (type 15) are ignored.
Mesh read_msh(const std::string &path);
Mesh read_msh(std::istream &in);
void write_msh(const Mesh &mesh, const std::string &path);
void write_msh(const Mesh &mesh, std::ostream &out);

/// Debug dump: "v,id,x,y,z" rows followed by "c,id,v0,v1,..." rows.
void write_csv(const Mesh &mesh, std::ostream &out);

} // namespace nnmg

#endif
