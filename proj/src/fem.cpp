#include "membrane/fem.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace membrane {

namespace detail {

ElementGeometry element_geometry(const SurfaceMesh& mesh, int ti) {
  const auto& t = mesh.triangles[ti];
  const Vec3& a = mesh.vertices[t[0]];
  const Vec3& b = mesh.vertices[t[1]];
  const Vec3& c = mesh.vertices[t[2]];
  const Vec3 n2 = (b - a).cross(c - a);  // 2A * unit normal
  const double twoA = n2.norm();
  if (!(twoA > 1e-300))
    throw std::runtime_error("assemble: degenerate (zero-area) triangle " + std::to_string(ti));
  ElementGeometry g;
  g.area = 0.5 * twoA;
  const Vec3 n = n2 / twoA;
  g.grad[0] = n.cross(c - b) / twoA;
  g.grad[1] = n.cross(a - c) / twoA;
  g.grad[2] = n.cross(b - a) / twoA;
  return g;
}

bool sites_coplanar(const std::vector<Vec3>& sites, double radius) {
  if (sites.size() <= 3) return true;
  Vec3 mean = Vec3::Zero();
  for (const Vec3& s : sites) mean += s;
  mean /= static_cast<double>(sites.size());
  Mat3 cov = Mat3::Zero();
  for (const Vec3& s : sites) cov += (s - mean) * (s - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  return eig.eigenvalues()(0) <= 1e-18 * radius * radius * static_cast<double>(sites.size());
}

}  // namespace detail

namespace {

// Local element matrices. The consistent mass is the exact integral of the
// P1 products on the flat triangle.
void local_matrices(const detail::ElementGeometry& g, double mloc[9], double sloc[9]) {
  static const double mass_pattern[9] = {2, 1, 1, 1, 2, 1, 1, 1, 2};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      mloc[3 * i + j] = g.area / 12.0 * mass_pattern[3 * i + j];
      sloc[3 * i + j] = g.area * g.grad[i].dot(g.grad[j]);
    }
}

struct Incidence {
  int tri;
  int local;
};

// Two-phase deterministic assembly: element matrices in parallel, then a
// per-row gather that accumulates contributions in ascending triangle order
// so the result does not depend on the thread count.
Operators assemble_two_phase(const SurfaceMesh& mesh) {
  const int nv = mesh.num_vertices();
  const int nt = mesh.num_triangles();

  std::vector<double> mloc(9 * nt), sloc(9 * nt);
#pragma omp parallel for schedule(static)
  for (int ti = 0; ti < nt; ++ti) {
    const auto g = detail::element_geometry(mesh, ti);
    local_matrices(g, &mloc[9 * ti], &sloc[9 * ti]);
  }

  std::vector<std::vector<Incidence>> incident(nv);
  for (int ti = 0; ti < nt; ++ti)
    for (int li = 0; li < 3; ++li) incident[mesh.triangles[ti][li]].push_back({ti, li});

  std::vector<std::vector<Eigen::Triplet<double>>> mrows(nv), srows(nv);
#pragma omp parallel for schedule(static)
  for (int row = 0; row < nv; ++row) {
    std::vector<int> cols;
    std::vector<double> mvals, svals;
    for (const Incidence& inc : incident[row]) {
      const auto& t = mesh.triangles[inc.tri];
      for (int j = 0; j < 3; ++j) {
        const int col = t[j];
        auto it = std::find(cols.begin(), cols.end(), col);
        if (it == cols.end()) {
          cols.push_back(col);
          mvals.push_back(mloc[9 * inc.tri + 3 * inc.local + j]);
          svals.push_back(sloc[9 * inc.tri + 3 * inc.local + j]);
        } else {
          const auto k = static_cast<std::size_t>(it - cols.begin());
          mvals[k] += mloc[9 * inc.tri + 3 * inc.local + j];
          svals[k] += sloc[9 * inc.tri + 3 * inc.local + j];
        }
      }
    }
    for (std::size_t k = 0; k < cols.size(); ++k) {
      mrows[row].emplace_back(row, cols[k], mvals[k]);
      srows[row].emplace_back(row, cols[k], svals[k]);
    }
  }

  std::vector<Eigen::Triplet<double>> mtrip, strip;
  mtrip.reserve(9 * static_cast<std::size_t>(nt));
  strip.reserve(9 * static_cast<std::size_t>(nt));
  for (int row = 0; row < nv; ++row) {
    mtrip.insert(mtrip.end(), mrows[row].begin(), mrows[row].end());
    strip.insert(strip.end(), srows[row].begin(), srows[row].end());
  }

  Operators ops;
  ops.mass.resize(nv, nv);
  ops.stiffness.resize(nv, nv);
  ops.mass.setFromTriplets(mtrip.begin(), mtrip.end());
  ops.stiffness.setFromTriplets(strip.begin(), strip.end());
  ops.mass.makeCompressed();
  ops.stiffness.makeCompressed();
  return ops;
}

}  // namespace

Operators assemble(const SurfaceMesh& mesh) { return assemble_two_phase(mesh); }

Operators assemble_reference(const SurfaceMesh& mesh) {
  const int nv = mesh.num_vertices();
  std::vector<Eigen::Triplet<double>> mtrip, strip;
  mtrip.reserve(9 * mesh.triangles.size());
  strip.reserve(9 * mesh.triangles.size());
  for (int ti = 0; ti < mesh.num_triangles(); ++ti) {
    const auto g = detail::element_geometry(mesh, ti);
    double mloc[9], sloc[9];
    local_matrices(g, mloc, sloc);
    const auto& t = mesh.triangles[ti];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        mtrip.emplace_back(t[i], t[j], mloc[3 * i + j]);
        strip.emplace_back(t[i], t[j], sloc[3 * i + j]);
      }
  }
  Operators ops;
  ops.mass.resize(nv, nv);
  ops.stiffness.resize(nv, nv);
  ops.mass.setFromTriplets(mtrip.begin(), mtrip.end());
  ops.stiffness.setFromTriplets(strip.begin(), strip.end());
  return ops;
}

SparseMat point_operator(const SurfaceMesh& mesh, const std::vector<Vec3>& sites) {
  const double tol = 1e-12 * mesh.radius;
  for (std::size_t i = 0; i < sites.size(); ++i)
    for (std::size_t j = i + 1; j < sites.size(); ++j)
      if ((sites[i] - sites[j]).norm() <= tol)
        throw std::invalid_argument("point_operator: duplicate sites");

  const int ns = static_cast<int>(sites.size());
  std::vector<PointLocation> locs(ns);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < ns; ++i) locs[i] = locate_on_mesh(mesh, sites[i]);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(3 * sites.size());
  for (int i = 0; i < ns; ++i) {
    const auto& t = mesh.triangles[locs[i].triangle_index];
    for (int k = 0; k < 3; ++k)
      if (std::abs(locs[i].barycentric[k]) > 1e-14)
        trip.emplace_back(i, t[k], locs[i].barycentric[k]);
  }
  SparseMat E(ns, mesh.num_vertices());
  E.setFromTriplets(trip.begin(), trip.end());
  return E;
}

double energy_from_pair(const SurfaceMesh& mesh, const ModelParams& params,
                        const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
  const double kappa = params.kappa, sigma = params.sigma, R = params.radius;
  const double grad_coeff = 0.5 * (sigma - 2.0 * kappa / (R * R));
  const double mass_coeff = sigma / (R * R);
  const int nt = mesh.num_triangles();

  std::vector<double> contrib(nt);
#pragma omp parallel for schedule(static)
  for (int ti = 0; ti < nt; ++ti) {
    const auto g = detail::element_geometry(mesh, ti);
    const auto& t = mesh.triangles[ti];
    Vec3 du, uu;
    for (int k = 0; k < 3; ++k) {
      du[k] = w[t[k]] - u[t[k]];
      uu[k] = u[t[k]];
    }
    auto quad = [&](const Vec3& f) {
      // exact integral of a squared P1 function: f^T M_loc f
      return g.area / 12.0 *
             (2.0 * (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]) +
              2.0 * (f[0] * f[1] + f[1] * f[2] + f[0] * f[2]));
    };
    const Vec3 grad_u = uu[0] * g.grad[0] + uu[1] * g.grad[1] + uu[2] * g.grad[2];
    contrib[ti] =
        0.5 * kappa * quad(du) + grad_coeff * g.area * grad_u.squaredNorm() - mass_coeff * quad(uu);
  }
  double energy = 0.0;
  for (int ti = 0; ti < nt; ++ti) energy += contrib[ti];
  return energy;
}

double discrete_energy(const SurfaceMesh& mesh, const ModelParams& params,
                       const Eigen::VectorXd& u, const Operators* ops) {
  params.validate();
  Operators local;
  if (!ops) {
    local = assemble(mesh);
    ops = &local;
  }
  Eigen::SimplicialLLT<SparseMat> llt(ops->mass);
  if (llt.info() != Eigen::Success) throw std::runtime_error("discrete_energy: mass solve failed");
  const Eigen::VectorXd wtilde = llt.solve(ops->stiffness * u);
  return energy_from_pair(mesh, params, u, u + wtilde);
}

double energy_form(const SurfaceMesh& mesh, const ModelParams& params, const Eigen::VectorXd& u,
                   const Eigen::VectorXd& v, const Operators* ops) {
  params.validate();
  Operators local;
  if (!ops) {
    local = assemble(mesh);
    ops = &local;
  }
  const double kappa = params.kappa, sigma = params.sigma, R = params.radius;
  Eigen::SimplicialLLT<SparseMat> llt(ops->mass);
  if (llt.info() != Eigen::Success) throw std::runtime_error("energy_form: mass solve failed");
  const Eigen::VectorXd wu = llt.solve(ops->stiffness * u);
  const Eigen::VectorXd wv = llt.solve(ops->stiffness * v);
  return kappa * wu.dot(ops->mass * wv) + (sigma - 2.0 * kappa / (R * R)) * u.dot(ops->stiffness * v) -
         2.0 * sigma / (R * R) * u.dot(ops->mass * v);
}

Vec3 element_gradient(const SurfaceMesh& mesh, const Eigen::VectorXd& u, int triangle_index) {
  const auto g = detail::element_geometry(mesh, triangle_index);
  const auto& t = mesh.triangles[triangle_index];
  return u[t[0]] * g.grad[0] + u[t[1]] * g.grad[1] + u[t[2]] * g.grad[2];
}

MembraneSolution solve_membrane(const SurfaceMesh& mesh, const ModelParams& params,
                                const std::vector<Vec3>& sites,
                                const std::vector<double>& heights, double beta,
                                const Operators* ops) {
  params.validate();
  if (sites.size() != heights.size())
    throw std::invalid_argument("solve_membrane: sites/heights length mismatch");
  if (sites.size() < 4) throw std::invalid_argument("solve_membrane: need at least 4 sites");
  if (!(beta > 0.0)) throw std::invalid_argument("solve_membrane: beta must be > 0");

  Operators local;
  if (!ops) {
    local = assemble(mesh);
    ops = &local;
  }
  const SparseMat& M = ops->mass;
  const SparseMat& S = ops->stiffness;
  const int n = mesh.num_vertices();
  const double kappa = params.kappa, sigma = params.sigma, R = params.radius;

  const SparseMat E = point_operator(mesh, sites);
  const Eigen::VectorXd Z =
      Eigen::Map<const Eigen::VectorXd>(heights.data(), static_cast<Eigen::Index>(heights.size()));
  const Eigen::VectorXd mean_row = M * Eigen::VectorXd::Ones(n);

  // Stationarity of J_h(u) + (beta/2)|Eu - Z|^2 with w~ = w - u tied by
  // M w~ = S u and the mean fixed by an exact multiplier. Unknowns
  // (u, w~, mu) give the symmetric system
  //   [ A + beta E^T E   kappa S    m ] [u ]   [beta E^T Z]
  //   [ kappa S         -kappa M   0 ] [w~] = [0]
  //   [ m^T              0         0 ] [mu]   [0]
  // The mean row m is dense and would wreck the fill-reducing ordering, so
  // the sparse 2n x 2n block K0 is factorized alone and the single border
  // unknown mu is eliminated with two solves:
  //   x = K0^{-1} f - mu K0^{-1} c,   mu = (c^T K0^{-1} f) / (c^T K0^{-1} c).
  // u and w~ are interleaved for locality of the factorization.
  const SparseMat A = (sigma - 2.0 * kappa / (R * R)) * S - (2.0 * sigma / (R * R)) * M +
                      beta * SparseMat(E.transpose() * E);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(A.nonZeros()) + 3 * static_cast<std::size_t>(S.nonZeros()));
  auto add_block = [&trip](const SparseMat& mat, int roff, int coff, double scale) {
    for (int k = 0; k < mat.outerSize(); ++k)
      for (SparseMat::InnerIterator it(mat, k); it; ++it)
        trip.emplace_back(2 * static_cast<int>(it.row()) + roff,
                          2 * static_cast<int>(it.col()) + coff, scale * it.value());
  };
  add_block(A, 0, 0, 1.0);
  add_block(S, 0, 1, kappa);
  add_block(S, 1, 0, kappa);
  add_block(M, 1, 1, -kappa);
  SparseMat K0(2 * n, 2 * n);
  K0.setFromTriplets(trip.begin(), trip.end());
  K0.makeCompressed();

  Eigen::VectorXd f = Eigen::VectorXd::Zero(2 * n);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(2 * n);
  const Eigen::VectorXd point_load = beta * (E.transpose() * Z);
  for (int i = 0; i < n; ++i) {
    f[2 * i] = point_load[i];
    c[2 * i] = mean_row[i];
  }

  Eigen::VectorXd x(2 * n);
  double mu = 0.0;
  bool solved = false;
  {
    Eigen::SparseLU<SparseMat> lu(K0);
    if (lu.info() == Eigen::Success) {
      const Eigen::VectorXd y1 = lu.solve(f);
      const Eigen::VectorXd y2 = lu.solve(c);
      const double pivot = c.dot(y2);
      if (pivot != 0.0) {
        mu = c.dot(y1) / pivot;
        x = y1 - mu * y2;
        solved = true;
      }
    }
  }
  if (!solved) {
    // last resort: MINRES with diagonal scaling on the full bordered system
    std::vector<Eigen::Triplet<double>> full;
    full.reserve(static_cast<std::size_t>(K0.nonZeros()) + 2 * n);
    for (int k = 0; k < K0.outerSize(); ++k)
      for (SparseMat::InnerIterator it(K0, k); it; ++it)
        full.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int i = 0; i < 2 * n; ++i)
      if (c[i] != 0.0) {
        full.emplace_back(i, 2 * n, c[i]);
        full.emplace_back(2 * n, i, c[i]);
      }
    SparseMat K(2 * n + 1, 2 * n + 1);
    K.setFromTriplets(full.begin(), full.end());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * n + 1);
    rhs.head(2 * n) = f;
    Eigen::MINRES<SparseMat, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>>
        minres(K);
    minres.setTolerance(1e-10);
    minres.setMaxIterations(40 * (2 * n + 1));
    const Eigen::VectorXd full_x = minres.solve(rhs);
    if (minres.info() != Eigen::Success)
      throw std::runtime_error("solve_membrane: direct factorization and MINRES both failed");
    x = full_x.head(2 * n);
    mu = full_x[2 * n];
  }

  MembraneSolution sol;
  sol.u.resize(n);
  Eigen::VectorXd wtilde(n);
  for (int i = 0; i < n; ++i) {
    sol.u[i] = x[2 * i];
    wtilde[i] = x[2 * i + 1];
  }
  sol.w = sol.u + wtilde;
  sol.mean_multiplier = mu;
  sol.point_residuals = E * sol.u - Z;
  sol.mean_value = mean_row.dot(sol.u);
  sol.solver_residual =
      std::sqrt((K0 * x + mu * c - f).squaredNorm() + c.dot(x) * c.dot(x)) / f.norm();
  if (sol.solver_residual > 1e-8)
    throw std::runtime_error("solve_membrane: solver breakdown, relative KKT residual " +
                             std::to_string(sol.solver_residual));
  sol.coplanar_warning = detail::sites_coplanar(sites, params.radius);
  sol.energy = energy_from_pair(mesh, params, sol.u, sol.w);
  return sol;
}

}  // namespace membrane
