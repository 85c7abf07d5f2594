#include "otrank/groups.hpp"

#include "otrank/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace otr {

namespace {

void check_dims(const SymmetryGroup& g, VectorRef x, VectorRef h) {
  if (x.size() != g.dim() || h.size() != g.dim())
    throw InvalidInput("group operation: vector dimension does not match group dimension");
  if (!x.allFinite() || !h.allFinite())
    throw InvalidInput("group operation: inputs must be finite");
}

// sign with the deterministic tie convention sign0(0) = +1.
double sign0(double t) { return t < 0.0 ? -1.0 : 1.0; }

std::vector<int> argsort(VectorRef v) {
  std::vector<int> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
  return idx;
}

Vector householder_apply(const Vector& u, VectorRef v) { return v - 2.0 * u.dot(v) * u; }

// Orthonormal basis {b1, b2} of the plane orthogonal to the unit vector a in R^3.
std::pair<Vector, Vector> axis_frame(const Vector& a) {
  Vector seed = std::abs(a[0]) < 0.9 ? Vector(Eigen::Vector3d::UnitX()) : Vector(Eigen::Vector3d::UnitY());
  Vector b1 = seed - a.dot(seed) * a;
  b1.normalize();
  Vector b2(3);
  // b2 = a x b1
  b2[0] = a[1] * b1[2] - a[2] * b1[1];
  b2[1] = a[2] * b1[0] - a[0] * b1[2];
  b2[2] = a[0] * b1[1] - a[1] * b1[0];
  return {b1, b2};
}

struct Cylindrical {
  double axial;   // component along the axis
  double radial;  // distance to the axis
  double c1, c2;  // coordinates in the (b1, b2) frame
};

Cylindrical to_cylindrical(const Vector& axis, const Vector& b1, const Vector& b2, VectorRef v) {
  Cylindrical out;
  out.axial = axis.dot(v);
  out.c1 = b1.dot(v);
  out.c2 = b2.dot(v);
  out.radial = std::hypot(out.c1, out.c2);
  return out;
}

}  // namespace

std::string to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::Trivial: return "trivial";
    case GroupKind::Central: return "central";
    case GroupKind::Sign: return "sign";
    case GroupKind::Permutation: return "permutation";
    case GroupKind::Reflection: return "reflection";
    case GroupKind::Zonal: return "zonal";
    case GroupKind::Spherical: return "spherical";
  }
  return "?";
}

SymmetryGroup SymmetryGroup::trivial(int p) {
  if (p < 1) throw InvalidInput("SymmetryGroup: dimension must be >= 1");
  return SymmetryGroup(GroupKind::Trivial, p);
}
SymmetryGroup SymmetryGroup::central(int p) {
  if (p < 1) throw InvalidInput("SymmetryGroup: dimension must be >= 1");
  return SymmetryGroup(GroupKind::Central, p);
}
SymmetryGroup SymmetryGroup::sign(int p) {
  if (p < 1) throw InvalidInput("SymmetryGroup: dimension must be >= 1");
  return SymmetryGroup(GroupKind::Sign, p);
}
SymmetryGroup SymmetryGroup::permutation(int p) {
  if (p < 1) throw InvalidInput("SymmetryGroup: dimension must be >= 1");
  return SymmetryGroup(GroupKind::Permutation, p);
}
SymmetryGroup SymmetryGroup::reflection(const Vector& u) {
  if (u.size() < 1) throw InvalidInput("SymmetryGroup: reflection axis must be nonempty");
  double norm = u.norm();
  if (!(std::abs(norm - 1.0) < 1e-8))
    throw InvalidInput("SymmetryGroup: reflection vector must have unit norm");
  SymmetryGroup g(GroupKind::Reflection, static_cast<int>(u.size()));
  g.reflect_u_ = u / norm;
  return g;
}
SymmetryGroup SymmetryGroup::zonal() { return zonal(Vector(Eigen::Vector3d::UnitZ())); }
SymmetryGroup SymmetryGroup::zonal(const Vector& axis) {
  if (axis.size() != 3) throw InvalidInput("SymmetryGroup: zonal symmetry requires p = 3");
  double norm = axis.norm();
  if (!(std::abs(norm - 1.0) < 1e-8))
    throw InvalidInput("SymmetryGroup: zonal axis must have unit norm");
  SymmetryGroup g(GroupKind::Zonal, 3);
  g.axis_ = axis / norm;
  return g;
}
SymmetryGroup SymmetryGroup::spherical(int p) {
  if (p < 1) throw InvalidInput("SymmetryGroup: dimension must be >= 1");
  return SymmetryGroup(GroupKind::Spherical, p);
}

SymmetryGroup SymmetryGroup::parse(const std::string& text, int p) {
  if (text == "trivial") return trivial(p);
  if (text == "central") return central(p);
  if (text == "sign") return sign(p);
  if (text == "permutation") return permutation(p);
  if (text == "zonal") return zonal();
  if (text == "spherical") return spherical(p);
  const std::string prefix = "reflection:";
  if (text.rfind(prefix, 0) == 0) {
    std::stringstream ss(text.substr(prefix.size()));
    std::vector<double> vals;
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        vals.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw InvalidInput("group: cannot parse reflection vector component '" + tok + "'");
      }
    }
    if (static_cast<int>(vals.size()) != p)
      throw InvalidInput("group: reflection vector has " + std::to_string(vals.size()) +
                         " components, expected " + std::to_string(p));
    Vector u = Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    double norm = u.norm();
    if (norm == 0.0) throw InvalidInput("group: reflection vector must be nonzero");
    return reflection(u / norm);
  }
  throw InvalidInput("group: unknown group '" + text + "'");
}

bool SymmetryGroup::finite() const {
  return kind_ != GroupKind::Zonal && kind_ != GroupKind::Spherical;
}

long long SymmetryGroup::order() const {
  switch (kind_) {
    case GroupKind::Trivial: return 1;
    case GroupKind::Central: return 2;
    case GroupKind::Reflection: return 2;
    case GroupKind::Sign: {
      if (dim_ > 62) throw InvalidInput("group order: sign group too large");
      return 1LL << dim_;
    }
    case GroupKind::Permutation: {
      long long f = 1;
      for (int k = 2; k <= dim_; ++k) {
        if (f > (1LL << 60) / k) throw InvalidInput("group order: permutation group too large");
        f *= k;
      }
      return f;
    }
    default: throw InvalidInput("group order: group is not finite");
  }
}

std::string SymmetryGroup::describe() const {
  std::ostringstream os;
  os << to_string(kind_);
  if (kind_ == GroupKind::Reflection) {
    os << ":";
    for (Eigen::Index j = 0; j < reflect_u_.size(); ++j) {
      if (j) os << ",";
      os << reflect_u_[j];
    }
  }
  return os.str();
}

Vector apply(const SymmetryGroup& g, const GroupElement& e, VectorRef v) {
  if (v.size() != g.dim()) throw InvalidInput("apply: dimension mismatch");
  switch (g.kind()) {
    case GroupKind::Trivial: return v;
    case GroupKind::Central: return e.central_sign * v;
    case GroupKind::Sign: return e.signs.cwiseProduct(v);
    case GroupKind::Permutation: {
      Vector out(v.size());
      for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v[e.perm[static_cast<std::size_t>(i)]];
      return out;
    }
    case GroupKind::Reflection:
      return e.reflected ? householder_apply(g.reflection_axis(), v) : Vector(v);
    case GroupKind::Zonal: {
      const Vector& a = g.zonal_axis();
      auto [b1, b2] = axis_frame(a);
      Cylindrical c = to_cylindrical(a, b1, b2, v);
      double cs = std::cos(e.angle), sn = std::sin(e.angle);
      return c.axial * a + (cs * c.c1 - sn * c.c2) * b1 + (sn * c.c1 + cs * c.c2) * b2;
    }
    case GroupKind::Spherical: return e.rotation * v;
  }
  throw InvalidInput("apply: unknown group kind");
}

Matrix element_matrix(const SymmetryGroup& g, const GroupElement& e) {
  const int p = g.dim();
  switch (g.kind()) {
    case GroupKind::Trivial: return Matrix::Identity(p, p);
    case GroupKind::Central: return e.central_sign * Matrix::Identity(p, p);
    case GroupKind::Sign: return e.signs.asDiagonal();
    case GroupKind::Permutation: {
      Matrix m = Matrix::Zero(p, p);
      for (int i = 0; i < p; ++i) m(i, e.perm[static_cast<std::size_t>(i)]) = 1.0;
      return m;
    }
    case GroupKind::Reflection: {
      if (!e.reflected) return Matrix::Identity(p, p);
      const Vector& u = g.reflection_axis();
      return Matrix::Identity(p, p) - 2.0 * u * u.transpose();
    }
    case GroupKind::Zonal: {
      Matrix m(p, p);
      GroupElement basis_e = e;
      for (int j = 0; j < p; ++j) m.col(j) = apply(g, basis_e, Vector(Matrix::Identity(p, p).col(j)));
      return m;
    }
    case GroupKind::Spherical: return e.rotation;
  }
  throw InvalidInput("element_matrix: unknown group kind");
}

double orbit_cost(const SymmetryGroup& g, VectorRef x, VectorRef h) {
  check_dims(g, x, h);
  switch (g.kind()) {
    case GroupKind::Trivial: return (x - h).squaredNorm();
    case GroupKind::Central: return std::min((x - h).squaredNorm(), (x + h).squaredNorm());
    case GroupKind::Sign: {
      double total = 0.0;
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        double d1 = x[j] - h[j];
        double d2 = x[j] + h[j];
        total += std::min(d1 * d1, d2 * d2);
      }
      return total;
    }
    case GroupKind::Permutation: {
      Vector xs = x, hs = h;
      std::sort(xs.data(), xs.data() + xs.size());
      std::sort(hs.data(), hs.data() + hs.size());
      return (xs - hs).squaredNorm();
    }
    case GroupKind::Reflection: {
      double direct = (x - h).squaredNorm();
      double flipped = (householder_apply(g.reflection_axis(), x) - h).squaredNorm();
      return std::min(direct, flipped);
    }
    case GroupKind::Spherical: {
      double d = x.norm() - h.norm();
      return d * d;
    }
    case GroupKind::Zonal: {
      const Vector& a = g.zonal_axis();
      auto [b1, b2] = axis_frame(a);
      Cylindrical cx = to_cylindrical(a, b1, b2, x);
      Cylindrical ch = to_cylindrical(a, b1, b2, h);
      double dr = cx.radial - ch.radial;
      double dz = cx.axial - ch.axial;
      return dr * dr + dz * dz;
    }
  }
  throw InvalidInput("orbit_cost: unknown group kind");
}

Vector closest_orbit_point(const SymmetryGroup& g, VectorRef x, VectorRef h) {
  check_dims(g, x, h);
  switch (g.kind()) {
    case GroupKind::Trivial: return h;
    case GroupKind::Central:
      return (x - h).squaredNorm() <= (x + h).squaredNorm() ? Vector(h) : Vector(-h);
    case GroupKind::Sign: {
      Vector out(h.size());
      for (Eigen::Index j = 0; j < h.size(); ++j) out[j] = sign0(x[j]) * std::abs(h[j]);
      return out;
    }
    case GroupKind::Permutation: {
      // h's sorted components rearranged to match the ordering of x.
      std::vector<int> order_x = argsort(x);
      Vector hs = h;
      std::sort(hs.data(), hs.data() + hs.size());
      Vector out(h.size());
      for (Eigen::Index k = 0; k < h.size(); ++k) out[order_x[static_cast<std::size_t>(k)]] = hs[k];
      return out;
    }
    case GroupKind::Reflection: {
      Vector ph = householder_apply(g.reflection_axis(), h);
      return (x - h).squaredNorm() <= (x - ph).squaredNorm() ? Vector(h) : ph;
    }
    case GroupKind::Spherical: {
      double nx = x.norm();
      if (nx == 0.0) {
        if (h.norm() == 0.0) return h;
        throw NumericalError("closest_orbit_point: spherical orbit direction undefined at x = 0");
      }
      return (h.norm() / nx) * x;
    }
    case GroupKind::Zonal: {
      const Vector& a = g.zonal_axis();
      auto [b1, b2] = axis_frame(a);
      Cylindrical cx = to_cylindrical(a, b1, b2, x);
      Cylindrical ch = to_cylindrical(a, b1, b2, h);
      if (ch.radial == 0.0) return h;  // h on the axis: the orbit is {h}
      if (cx.radial == 0.0)
        throw NumericalError("closest_orbit_point: zonal azimuth undefined for x on the axis");
      double scale = ch.radial / cx.radial;
      return ch.axial * a + scale * (cx.c1 * b1 + cx.c2 * b2);
    }
  }
  throw InvalidInput("closest_orbit_point: unknown group kind");
}

GroupElement argmin_sign(const SymmetryGroup& g, VectorRef x, VectorRef h, Rng& rng) {
  check_dims(g, x, h);
  GroupElement e;
  e.kind = g.kind();
  switch (g.kind()) {
    case GroupKind::Trivial: return e;
    case GroupKind::Central:
      e.central_sign = (x - h).squaredNorm() <= (x + h).squaredNorm() ? 1.0 : -1.0;
      return e;
    case GroupKind::Sign: {
      e.signs.resize(x.size());
      for (Eigen::Index j = 0; j < x.size(); ++j) e.signs[j] = sign0(x[j]) * sign0(h[j]);
      return e;
    }
    case GroupKind::Permutation: {
      // perm with h[perm[i]] = closest point's i-th component.
      std::vector<int> order_x = argsort(x);
      std::vector<int> order_h = argsort(h);
      e.perm.resize(static_cast<std::size_t>(x.size()));
      for (std::size_t k = 0; k < order_x.size(); ++k)
        e.perm[static_cast<std::size_t>(order_x[k])] = order_h[k];
      return e;
    }
    case GroupKind::Reflection: {
      Vector ph = householder_apply(g.reflection_axis(), h);
      e.reflected = (x - h).squaredNorm() <= (x - ph).squaredNorm() ? false : true;
      return e;
    }
    case GroupKind::Spherical: {
      const int p = g.dim();
      double nx = x.norm(), nh = h.norm();
      if (nh == 0.0) {
        // Orbit of h is {0}; every element is a minimizer.
        e.rotation = haar_orthogonal(p, rng);
        return e;
      }
      if (nx == 0.0)
        throw NumericalError("argmin_sign: spherical minimizer undefined at x = 0");
      // Minimizers are exactly {Q : Qh = ||h|| x/||x||}. Write Q =
      // B_x diag(1, R) B_h' with orthonormal bases whose first columns are
      // x/||x|| and h/||h||; R Haar on O(p-1) makes the draw uniform.
      Matrix bh = Matrix::Identity(p, p);
      bh.col(0) = h / nh;
      Eigen::HouseholderQR<Matrix> qh(bh);
      Matrix qh_full = qh.householderQ();
      if (qh_full.col(0).dot(h) < 0.0) qh_full = -qh_full;
      Matrix bx = Matrix::Identity(p, p);
      bx.col(0) = x / nx;
      Eigen::HouseholderQR<Matrix> qx(bx);
      Matrix qx_full = qx.householderQ();
      if (qx_full.col(0).dot(x) < 0.0) qx_full = -qx_full;
      Matrix inner = Matrix::Identity(p, p);
      if (p > 1) inner.bottomRightCorner(p - 1, p - 1) = haar_orthogonal(p - 1, rng);
      e.rotation = qx_full * inner * qh_full.transpose();
      return e;
    }
    case GroupKind::Zonal: {
      const Vector& a = g.zonal_axis();
      auto [b1, b2] = axis_frame(a);
      Cylindrical cx = to_cylindrical(a, b1, b2, x);
      Cylindrical ch = to_cylindrical(a, b1, b2, h);
      if (ch.radial == 0.0) {
        // Orbit of h is a single point; the whole circle group minimizes.
        std::uniform_real_distribution<double> dist(0.0, 2.0 * M_PI);
        e.angle = dist(rng);
        return e;
      }
      if (cx.radial == 0.0)
        throw NumericalError("argmin_sign: zonal minimizer undefined for x on the axis");
      double phi_x = std::atan2(cx.c2, cx.c1);
      double phi_h = std::atan2(ch.c2, ch.c1);
      double angle = phi_x - phi_h;
      angle = std::fmod(angle, 2.0 * M_PI);
      if (angle < 0.0) angle += 2.0 * M_PI;
      e.angle = angle;
      return e;
    }
  }
  throw InvalidInput("argmin_sign: unknown group kind");
}

GroupElement sample_element_uniform(const SymmetryGroup& g, Rng& rng) {
  GroupElement e;
  e.kind = g.kind();
  switch (g.kind()) {
    case GroupKind::Trivial: return e;
    case GroupKind::Central: {
      std::uniform_int_distribution<int> coin(0, 1);
      e.central_sign = coin(rng) ? 1.0 : -1.0;
      return e;
    }
    case GroupKind::Sign: {
      std::uniform_int_distribution<int> coin(0, 1);
      e.signs.resize(g.dim());
      for (int j = 0; j < g.dim(); ++j) e.signs[j] = coin(rng) ? 1.0 : -1.0;
      return e;
    }
    case GroupKind::Permutation: {
      e.perm = random_permutation(g.dim(), rng);
      return e;
    }
    case GroupKind::Reflection: {
      std::uniform_int_distribution<int> coin(0, 1);
      e.reflected = coin(rng) == 1;
      return e;
    }
    case GroupKind::Zonal: {
      std::uniform_real_distribution<double> dist(0.0, 2.0 * M_PI);
      e.angle = dist(rng);
      return e;
    }
    case GroupKind::Spherical: {
      e.rotation = haar_orthogonal(g.dim(), rng);
      return e;
    }
  }
  throw InvalidInput("sample_element_uniform: unknown group kind");
}

Vector sample_orbit_uniform(const SymmetryGroup& g, VectorRef h, Rng& rng) {
  if (h.size() != g.dim()) throw InvalidInput("sample_orbit_uniform: dimension mismatch");
  if (g.kind() == GroupKind::Spherical) {
    double nh = h.norm();
    if (nh == 0.0) return Vector::Zero(h.size());
    return nh * sphere_point(h.size(), rng);
  }
  GroupElement e = sample_element_uniform(g, rng);
  return apply(g, e, h);
}

}  // namespace otr
