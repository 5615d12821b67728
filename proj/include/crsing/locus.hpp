// Locating the CR-singular set inside a chart: a conservative grid scan on
// the smallest singular value of df_C, followed by Gauss-Newton refinement
// on the locally constant-rank presentation.
#pragma once

#include <crsing/embedding.hpp>

#include <algorithm>
#include <optional>
#include <vector>

namespace crsing {

struct RefineError : EmbeddingError {
  explicit RefineError(const std::string& msg) : EmbeddingError(msg) {}
};
struct ConvergedNonsingular : RefineError {
  explicit ConvergedNonsingular(const std::string& msg) : RefineError(msg) {}
};

struct SingularPoint {
  Eigen::VectorXd location;
  int order = 0;
  Eigen::VectorXcd kernel_vector;  // spans ker df_C, the antiholomorphic line
  double residual = 0.0;           // smallest singular value at the refined point
};

struct Box {
  Eigen::VectorXd lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }
  static Box centered(int m, double halfwidth) {
    Box b;
    b.lo = Eigen::VectorXd::Constant(m, -halfwidth);
    b.hi = Eigen::VectorXd::Constant(m, halfwidth);
    return b;
  }
  Eigen::VectorXd radius() const {
    Eigen::VectorXd r(lo.size());
    for (Eigen::Index i = 0; i < lo.size(); ++i) r(i) = std::max(std::abs(lo(i)), std::abs(hi(i)));
    return r;
  }
};

struct ScanSeed {
  Eigen::VectorXd point;
  double sigma_min = 0.0;
};

struct ScanOptions {
  int grid = 0;              // points per axis; 0 picks a per-dimension default
  double threshold_factor = 3.0;
  std::size_t max_seeds = 4096;
  bool local_minima_only = true;
};

inline int default_grid_resolution(int m) {
  if (m <= 2) return 41;
  if (m <= 4) return 21;
  if (m == 5) return 11;
  if (m == 6) return 7;
  if (m == 7) return 5;
  return 3;
}

// Frobenius-type Lipschitz bound for x -> df_C(x) over the box, from
// coefficient sums of the entry gradients. sigma_min is 1-Lipschitz with
// respect to this bound, which gives the no-miss scan threshold.
inline double gauss_map_lipschitz_bound(const EmbeddingMap& f, const Box& box) {
  const Eigen::VectorXd rad = box.radius();
  std::vector<double> radius(rad.data(), rad.data() + rad.size());
  double sum_sq = 0.0;
  for (int j = 0; j < f.n; ++j)
    for (int i = 0; i < f.m; ++i) {
      const Polynomial entry = f.comp[j].derivative(i);
      double grad_sq = 0.0;
      for (int k = 0; k < f.m; ++k) {
        const double b = entry.derivative_bound(k, radius);
        grad_sq += b * b;
      }
      sum_sq += grad_sq;
    }
  return std::sqrt(sum_sq);
}

// Grid points where sigma_min(df_C) dips below 3 * L * cell_diagonal,
// sorted by sigma_min. With local_minima_only, keeps grid-local minima of
// sigma_min among the flagged points (every zero-containing cell survives:
// its value cannot exceed a neighbor's by more than the threshold slack).
inline std::vector<ScanSeed> scan_singular(const EmbeddingMap& f, const Box& box, const ScanOptions& opt = {}) {
  f.check();
  if (box.dim() != f.m) throw EmbeddingError("scan_singular: box dimension mismatch");
  for (int i = 0; i < f.m; ++i)
    if (!(box.lo(i) < box.hi(i))) throw EmbeddingError("scan_singular: empty box");

  const int g = opt.grid > 0 ? opt.grid : default_grid_resolution(f.m);
  if (g < 2) throw EmbeddingError("scan_singular: grid must have >= 2 points per axis");

  Eigen::VectorXd step(f.m);
  for (int i = 0; i < f.m; ++i) step(i) = (box.hi(i) - box.lo(i)) / (g - 1);
  const double cell_diag = step.norm();
  const double lip = gauss_map_lipschitz_bound(f, box);
  const double threshold = opt.threshold_factor * lip * cell_diag;

  std::size_t total = 1;
  for (int i = 0; i < f.m; ++i) total *= static_cast<std::size_t>(g);

  std::vector<float> sigma(total, 0.0f);
  std::vector<int> idx(f.m, 0);
  std::vector<double> x(f.m);
  Eigen::MatrixXcd A(f.n, f.m);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int i = 0; i < f.m; ++i) {
      idx[i] = static_cast<int>(rem % g);
      rem /= g;
      x[i] = box.lo(i) + step(i) * idx[i];
    }
    for (int j = 0; j < f.n; ++j)
      for (int k = 0; k < f.m; ++k) A(j, k) = f.comp[j].derivative(k).eval(x);
    sigma[flat] = static_cast<float>(smallest_singular_value(A));
  }

  std::vector<ScanSeed> seeds;
  std::vector<std::size_t> stride(f.m);
  stride[0] = 1;
  for (int i = 1; i < f.m; ++i) stride[i] = stride[i - 1] * g;
  for (std::size_t flat = 0; flat < total; ++flat) {
    if (sigma[flat] > threshold) continue;
    if (opt.local_minima_only) {
      bool is_min = true;
      std::size_t rem = flat;
      for (int i = 0; i < f.m && is_min; ++i) {
        const int pos = static_cast<int>(rem % g);
        rem /= g;
        if (pos > 0 && sigma[flat - stride[i]] < sigma[flat]) is_min = false;
        if (pos + 1 < g && sigma[flat + stride[i]] < sigma[flat]) is_min = false;
      }
      if (!is_min) continue;
    }
    ScanSeed s;
    s.point.resize(f.m);
    std::size_t rem = flat;
    for (int i = 0; i < f.m; ++i) {
      s.point(i) = box.lo(i) + step(i) * static_cast<int>(rem % g);
      rem /= g;
    }
    s.sigma_min = sigma[flat];
    seeds.push_back(std::move(s));
  }
  std::sort(seeds.begin(), seeds.end(), [](const ScanSeed& a, const ScanSeed& b) { return a.sigma_min < b.sigma_min; });
  if (seeds.size() > opt.max_seeds) seeds.resize(opt.max_seeds);
  return seeds;
}

struct RefineOptions {
  double residual_tol = 1e-10;
  int max_iterations = 50;
  double nonsingular_sigma = 1e-4;  // stalling above this means the seed was not in a basin
  double rank_tol = kDefaultRankTol;
};

// Gauss-Newton on the frozen-frame residual U2^H df_C(x) v, where U2 spans
// the (n-m+nu) smallest left singular directions and v the smallest right
// one. Zeroing the residual is the locally constant-rank presentation of the
// order->=nu locus; frames are refreshed every iteration.
inline SingularPoint refine_singular(const EmbeddingMap& f, const Eigen::VectorXd& seed, const RefineOptions& opt = {},
                                     int target_order = 1) {
  f.check();
  if (seed.size() != f.m) throw EmbeddingError("refine_singular: seed dimension mismatch");
  const int deficiency = f.n - f.m + target_order;

  Eigen::VectorXd x = seed;
  double sig = 0.0;
  double prev_sig = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opt.max_iterations; ++it) {
    std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
    const Eigen::MatrixXcd A = gauss_map(f, xs).matrix;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    sig = sv(sv.size() - 1);
    const double scale = std::max(1.0, sv(0));
    if (sig <= opt.residual_tol * scale) break;
    if (it + 1 == opt.max_iterations)
      throw RefineError("refine_singular: iteration cap reached (residual " + std::to_string(sig) + ")");
    if (sig > 0.9 * prev_sig && sig > opt.nonsingular_sigma * scale)
      throw ConvergedNonsingular("refine_singular: stalled at a nonsingular point (sigma_min " + std::to_string(sig) + ")");
    prev_sig = std::min(prev_sig, sig);

    const Eigen::MatrixXcd U2 = svd.matrixU().rightCols(deficiency);
    const Eigen::VectorXcd v = svd.matrixV().col(f.m - 1);
    Eigen::VectorXcd r = U2.adjoint() * (A * v);
    Eigen::MatrixXcd Jc(deficiency, f.m);
    for (int k = 0; k < f.m; ++k) Jc.col(k) = U2.adjoint() * (gauss_map_derivative(f, xs, k) * v);

    Eigen::MatrixXd Jr(2 * deficiency, f.m);
    Eigen::VectorXd rr(2 * deficiency);
    for (int i = 0; i < deficiency; ++i) {
      rr(2 * i) = r(i).real();
      rr(2 * i + 1) = r(i).imag();
      for (int k = 0; k < f.m; ++k) {
        Jr(2 * i, k) = Jc(i, k).real();
        Jr(2 * i + 1, k) = Jc(i, k).imag();
      }
    }
    const Eigen::VectorXd delta = Jr.completeOrthogonalDecomposition().solve(rr);
    x -= delta;
  }

  std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
  SingularPoint p;
  p.location = x;
  p.residual = sig;
  p.order = cr_order(f, xs, opt.rank_tol);
  if (p.order == 0)
    throw ConvergedNonsingular("refine_singular: converged to a totally real point");
  p.kernel_vector = kernel_direction(gauss_map(f, xs).matrix);
  return p;
}

// Merge refined points within the given distance, keeping the smaller
// residual; output sorted lexicographically by location.
inline std::vector<SingularPoint> dedup_singular(std::vector<SingularPoint> pts, double merge_dist = 1e-6) {
  std::vector<SingularPoint> out;
  for (auto& p : pts) {
    bool merged = false;
    for (auto& q : out) {
      if ((p.location - q.location).norm() <= merge_dist) {
        if (p.residual < q.residual) q = p;
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(), [](const SingularPoint& a, const SingularPoint& b) {
    for (Eigen::Index i = 0; i < a.location.size(); ++i) {
      if (a.location(i) < b.location(i) - 1e-15) return true;
      if (a.location(i) > b.location(i) + 1e-15) return false;
    }
    return false;
  });
  return out;
}

}  // namespace crsing
