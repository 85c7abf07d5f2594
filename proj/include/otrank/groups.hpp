#pragma once

// Compact subgroups G of O(p) exposed through closed-form orbit operations:
// the quotient cost min_{Q in G} ||Q'x - h||^2, the point of h's orbit
// closest to x (signed-rank geometry), a minimizing group element, and
// Haar-uniform orbit sampling. No group is ever enumerated at runtime; each
// kind has an exact closed form.

#include "otrank/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace otr {

enum class GroupKind { Trivial, Central, Sign, Permutation, Reflection, Zonal, Spherical };

std::string to_string(GroupKind kind);

class SymmetryGroup {
 public:
  static SymmetryGroup trivial(int p);
  static SymmetryGroup central(int p);
  static SymmetryGroup sign(int p);
  static SymmetryGroup permutation(int p);
  /// G = {I, P} with P the Householder reflection about the hyperplane
  /// orthogonal to the unit vector u.
  static SymmetryGroup reflection(const Vector& u);
  /// Rotations of R^3 about the given axis (default: north-south pole axis e3).
  static SymmetryGroup zonal();
  static SymmetryGroup zonal(const Vector& axis);
  static SymmetryGroup spherical(int p);

  /// Parses the CLI/config spelling: trivial | central | sign | permutation |
  /// reflection:<u as comma-floats> | zonal | spherical.
  static SymmetryGroup parse(const std::string& text, int p);

  GroupKind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool finite() const;
  /// Number of elements for finite groups; throws for Zonal/Spherical.
  long long order() const;
  const Vector& reflection_axis() const { return reflect_u_; }
  const Vector& zonal_axis() const { return axis_; }
  std::string describe() const;

 private:
  SymmetryGroup(GroupKind kind, int p) : kind_(kind), dim_(p) {}
  GroupKind kind_;
  int dim_;
  Vector reflect_u_;  // Reflection only
  Vector axis_;       // Zonal only (unit vector in R^3)
};

/// One element of a symmetry group. The payload depends on the kind; for
/// Spherical the orthogonal matrix is materialized only when an element is
/// actually produced (orbit_cost and friends never build it).
struct GroupElement {
  GroupKind kind = GroupKind::Trivial;
  double central_sign = 1.0;      // Central: +1 or -1
  Eigen::VectorXd signs;          // Sign: entries +1/-1
  std::vector<int> perm;          // Permutation: (Qv)_i = v[perm[i]]
  bool reflected = false;         // Reflection: apply P or not
  double angle = 0.0;             // Zonal: rotation angle in [0, 2pi)
  Matrix rotation;                // Spherical: p x p orthogonal matrix
};

/// Applies the group element to v (i.e. computes Qv).
Vector apply(const SymmetryGroup& g, const GroupElement& e, VectorRef v);

/// The element as an explicit orthogonal matrix.
Matrix element_matrix(const SymmetryGroup& g, const GroupElement& e);

/// c(x,h) = min over Q in G of ||Q'x - h||^2, evaluated in closed form.
double orbit_cost(const SymmetryGroup& g, VectorRef x, VectorRef h);

/// argmin over the orbit {Qh : Q in G} of ||x - Qh||^2. Throws NumericalError
/// for degenerate geometry (Spherical with x = 0 and h != 0; Zonal with x on
/// the axis and h off it), where no closest direction exists.
Vector closest_orbit_point(const SymmetryGroup& g, VectorRef x, VectorRef h);

/// A group element Q attaining orbit_cost(g,x,h); Q'x is the point of x's
/// orbit matched to h and Qh = closest_orbit_point(g,x,h). When the minimizer
/// set has more than one element (Spherical with p >= 2, Zonal with h on the
/// axis) an element is drawn uniformly from that set. Ties in finite groups
/// (probability zero for continuous data) resolve to the identity-leaning
/// choice deterministically.
GroupElement argmin_sign(const SymmetryGroup& g, VectorRef x, VectorRef h, Rng& rng);

/// Haar-uniform element of G.
GroupElement sample_element_uniform(const SymmetryGroup& g, Rng& rng);

/// S h with S ~ Uniform(G); for Spherical this samples the sphere of radius
/// ||h|| directly instead of materializing a rotation matrix.
Vector sample_orbit_uniform(const SymmetryGroup& g, VectorRef h, Rng& rng);

}  // namespace otr
