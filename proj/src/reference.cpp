#include "otrank/reference.hpp"

#include "otrank/random.hpp"
#include "otrank/special.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

namespace otr {

namespace {

bool has_duplicate_rows(const Matrix& m) {
  std::vector<int> idx(static_cast<std::size_t>(m.rows()));
  std::iota(idx.begin(), idx.end(), 0);
  auto row_less = [&](int a, int b) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(a, j) < m(b, j)) return true;
      if (m(a, j) > m(b, j)) return false;
    }
    return false;
  };
  std::sort(idx.begin(), idx.end(), row_less);
  for (std::size_t k = 1; k < idx.size(); ++k)
    if (m.row(idx[k - 1]) == m.row(idx[k])) return true;
  return false;
}

// Halton sequence in base b (index starts at 1).
double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * (index % base);
    index /= base;
  }
  return r;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
                           59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113};

// n_s unit directions, as regular as possible. p = 2: equally spaced angles.
// p = 3: Fibonacci spiral. p > 3: Halton points pushed through the normal
// quantile and normalized (deterministic, low discrepancy).
Matrix sphere_directions(int n_s, int p) {
  Matrix dirs(n_s, p);
  if (p == 2) {
    for (int s = 0; s < n_s; ++s) {
      double theta = 2.0 * M_PI * s / n_s;
      dirs(s, 0) = std::cos(theta);
      dirs(s, 1) = std::sin(theta);
    }
    return dirs;
  }
  if (p == 3) {
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int s = 0; s < n_s; ++s) {
      double z = 1.0 - (2.0 * s + 1.0) / n_s;
      double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      double theta = golden * s;
      dirs(s, 0) = rho * std::cos(theta);
      dirs(s, 1) = rho * std::sin(theta);
      dirs(s, 2) = z;
    }
    return dirs;
  }
  if (p > 30) throw InvalidInput("center_outward_grid: direction construction supports p <= 30");
  for (int s = 0; s < n_s; ++s) {
    Vector z(p);
    for (int j = 0; j < p; ++j) {
      double u = halton(s + 1, kPrimes[j]);
      u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
      z[j] = normal_quantile(u);
    }
    double norm = z.norm();
    if (norm == 0.0) z[0] = norm = 1.0;
    dirs.row(s) = z.transpose() / norm;
  }
  return dirs;
}

Matrix generate_points(GridGenerator gen, int n, int p, Rng& rng) {
  switch (gen) {
    case GridGenerator::Gaussian:
      return gaussian_matrix(n, p, rng);
    case GridGenerator::UniformCube:
      return uniform_matrix(n, p, rng);
    case GridGenerator::SphericalUniform: {
      Matrix pts(n, p);
      for (int i = 0; i < n; ++i) pts.row(i) = (uniform01(rng) * sphere_point(p, rng)).transpose();
      return pts;
    }
    case GridGenerator::ChiNormAxis: {
      Matrix pts = Matrix::Zero(n, p);
      std::normal_distribution<double> dist(0.0, 1.0);
      for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < p; ++j) {
          double z = dist(rng);
          s += z * z;
        }
        pts(i, 0) = std::sqrt(s);
      }
      return pts;
    }
    case GridGenerator::SortedGaussian: {
      Matrix pts = gaussian_matrix(n, p, rng);
      for (int i = 0; i < n; ++i) std::sort(pts.row(i).data(), pts.row(i).data() + p);
      return pts;
    }
    default:
      throw InvalidInput("make_grid: generator must be an i.i.d. sampler");
  }
}

}  // namespace

std::string to_string(GridGenerator gen) {
  switch (gen) {
    case GridGenerator::Gaussian: return "gaussian";
    case GridGenerator::UniformCube: return "uniform_cube";
    case GridGenerator::SphericalUniform: return "spherical_uniform";
    case GridGenerator::ChiNormAxis: return "chi_norm_axis";
    case GridGenerator::SortedGaussian: return "sorted_gaussian";
    case GridGenerator::CenterOutward: return "center_outward";
    case GridGenerator::Custom: return "custom";
  }
  return "?";
}

GridGenerator parse_grid_generator(const std::string& text) {
  if (text == "gaussian") return GridGenerator::Gaussian;
  if (text == "uniform_cube") return GridGenerator::UniformCube;
  if (text == "spherical_uniform") return GridGenerator::SphericalUniform;
  if (text == "chi_norm_axis") return GridGenerator::ChiNormAxis;
  if (text == "sorted_gaussian") return GridGenerator::SortedGaussian;
  if (text == "center_outward") return GridGenerator::CenterOutward;
  if (text == "custom") return GridGenerator::Custom;
  throw InvalidInput("unknown reference generator '" + text + "'");
}

ReferenceGrid make_grid(GridGenerator gen, int n, int p, std::uint64_t seed) {
  if (n < 1 || p < 1) throw InvalidInput("make_grid: require n >= 1 and p >= 1");
  if (gen == GridGenerator::CenterOutward) return center_outward_grid_auto(n, p, seed);
  if (gen == GridGenerator::Custom)
    throw InvalidInput("make_grid: custom grids are loaded from file, not generated");
  Rng rng(seed);
  Matrix pts = generate_points(gen, n, p, rng);
  if (has_duplicate_rows(pts)) {
    // Probability-zero event for the continuous generators; one retry, then fail.
    pts = generate_points(gen, n, p, rng);
    if (has_duplicate_rows(pts)) throw NumericalError("make_grid: duplicate grid rows after retry");
  }
  ReferenceGrid grid;
  grid.points = std::move(pts);
  grid.generator = gen;
  grid.seed = seed;
  if (gen == GridGenerator::ChiNormAxis) grid.fundamental_domain_for = GroupKind::Spherical;
  if (gen == GridGenerator::SortedGaussian) grid.fundamental_domain_for = GroupKind::Permutation;
  return grid;
}

ReferenceGrid center_outward_grid(int n_r, int n_s, int n_0, int p, std::uint64_t seed) {
  if (n_r < 1 || n_s < 1 || n_0 < 0) throw InvalidInput("center_outward_grid: bad factorization");
  if (n_0 > n_s) throw InvalidInput("center_outward_grid: n_0 must not exceed n_S");
  if (p < 2) throw InvalidInput("center_outward_grid: requires p >= 2");
  Matrix dirs = sphere_directions(n_s, p);
  Matrix pts(n_r * n_s + n_0, p);
  int row = 0;
  for (int r = 1; r <= n_r; ++r) {
    double radius = static_cast<double>(r) / (n_r + 1);
    for (int s = 0; s < n_s; ++s) pts.row(row++) = radius * dirs.row(s);
  }
  if (n_0 > 0) {
    Rng rng(seed);
    std::vector<int> chosen = sample_without_replacement(n_s, n_0, rng);
    double radius = 1.0 / (2.0 * (n_r + 1));
    for (int k = 0; k < n_0; ++k) pts.row(row++) = radius * dirs.row(chosen[static_cast<std::size_t>(k)]);
  }
  if (has_duplicate_rows(pts)) throw NumericalError("center_outward_grid: duplicate rows");
  ReferenceGrid grid;
  grid.points = std::move(pts);
  grid.generator = GridGenerator::CenterOutward;
  grid.seed = seed;
  return grid;
}

ReferenceGrid center_outward_grid_auto(int n, int p, std::uint64_t seed) {
  if (n < 1) throw InvalidInput("center_outward_grid: require n >= 1");
  int n_s = std::max(1, static_cast<int>(std::lround(std::ceil(std::sqrt(static_cast<double>(n))))));
  int n_r = std::max(1, n / n_s);
  int n_0 = n - n_r * n_s;
  return center_outward_grid(n_r, n_s, n_0, p, seed);
}

double min_pairwise_orbit_cost(const ReferenceGrid& grid, const SymmetryGroup& group) {
  if (grid.dim() != group.dim())
    throw InvalidInput("min_pairwise_orbit_cost: grid/group dimension mismatch");
  const Eigen::Index n = grid.size();
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      best = std::min(best, orbit_cost(group, grid.points.row(i), grid.points.row(j)));
  return n < 2 ? std::numeric_limits<double>::infinity() : best;
}

void verify_fundamental_domain(const ReferenceGrid& grid, const SymmetryGroup& group) {
  if (grid.size() < 2) return;
  double sep = min_pairwise_orbit_cost(grid, group);
  if (!(sep > 0.0))
    throw InvalidInput("reference grid violates the fundamental-domain assumption for group " +
                       to_string(group.kind()) + ": two rows share an orbit");
}

void export_grid_csv(const ReferenceGrid& grid, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("export_grid_csv: cannot open '" + path + "'");
  for (Eigen::Index j = 0; j < grid.dim(); ++j) out << (j ? ",h" : "h") << (j + 1);
  out << "\n";
  char buf[40];
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    for (Eigen::Index j = 0; j < grid.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", grid.points(i, j));
      if (j) out << ",";
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw InvalidInput("export_grid_csv: write failed for '" + path + "'");
}

ReferenceGrid import_grid_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("import_grid_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("import_grid_csv: empty file '" + path + "'");
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  Eigen::Index p = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &pos);
      } catch (const std::exception&) {
        throw InvalidInput("import_grid_csv: non-numeric cell at line " + std::to_string(line_no));
      }
      if (pos != tok.size())
        throw InvalidInput("import_grid_csv: non-numeric cell at line " + std::to_string(line_no));
      row.push_back(v);
    }
    if (p < 0) p = static_cast<Eigen::Index>(row.size());
    if (static_cast<Eigen::Index>(row.size()) != p)
      throw InvalidInput("import_grid_csv: ragged row at line " + std::to_string(line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidInput("import_grid_csv: no data rows in '" + path + "'");
  ReferenceGrid grid;
  grid.points.resize(static_cast<Eigen::Index>(rows.size()), p);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (Eigen::Index j = 0; j < p; ++j) grid.points(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
  grid.generator = GridGenerator::Custom;
  if (has_duplicate_rows(grid.points)) throw InvalidInput("import_grid_csv: duplicate grid rows");
  return grid;
}

SymmetrizedReference SymmetrizedReference::from_grid(ReferenceGrid grid, SymmetryGroup g) {
  if (grid.dim() != g.dim()) throw InvalidInput("SymmetrizedReference: dimension mismatch");
  SymmetrizedReference ref{std::move(grid), std::nullopt, 0, std::move(g)};
  ref.p = static_cast<int>(ref.base_grid->dim());
  return ref;
}

SymmetrizedReference SymmetrizedReference::from_generator(GridGenerator gen, int p, SymmetryGroup g) {
  if (p != g.dim()) throw InvalidInput("SymmetrizedReference: dimension mismatch");
  return SymmetrizedReference{std::nullopt, gen, p, std::move(g)};
}

Vector sample_symmetrized(const SymmetrizedReference& ref, Rng& rng) {
  Vector h;
  if (ref.base_grid) {
    std::uniform_int_distribution<Eigen::Index> pick(0, ref.base_grid->size() - 1);
    h = ref.base_grid->points.row(pick(rng)).transpose();
  } else {
    h = generate_points(*ref.base_generator, 1, ref.p, rng).row(0).transpose();
  }
  return sample_orbit_uniform(ref.group, h, rng);
}

MomentEstimate symmetrized_moments(const SymmetrizedReference& ref, long long m, Rng& rng) {
  if (m < 1) throw InvalidInput("symmetrized_moments: require m >= 1");
  const int p = ref.p;
  Vector sum = Vector::Zero(p);
  Vector sum_sq = Vector::Zero(p);
  Matrix outer = Matrix::Zero(p, p);
  for (long long k = 0; k < m; ++k) {
    Vector u = sample_symmetrized(ref, rng);
    sum += u;
    sum_sq += u.cwiseProduct(u);
    outer.noalias() += u * u.transpose();
  }
  MomentEstimate est;
  est.draws = m;
  est.mean = sum / static_cast<double>(m);
  Vector var = (sum_sq / static_cast<double>(m)) - est.mean.cwiseProduct(est.mean);
  est.mean_se = (var / static_cast<double>(m)).cwiseMax(0.0).cwiseSqrt();
  if (m > 1) {
    est.covariance =
        (outer - static_cast<double>(m) * est.mean * est.mean.transpose()) / static_cast<double>(m - 1);
  } else {
    est.covariance = Matrix::Zero(p, p);
  }
  return est;
}

}  // namespace otr
