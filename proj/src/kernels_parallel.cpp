#include <algorithm>
#include <vector>

#include "qpalign/kernels.hpp"
#include "qpalign/summation.hpp"

namespace qpalign::kernels::parallel {
namespace {

// Below this many rows the fork/join overhead dominates.
constexpr std::size_t kMinParallelRows = 32;

}  // namespace

void commutator(const Matrix& a1, const Matrix& p, const Matrix& a2, Matrix& e) {
  const std::size_t n = p.rows();
  e.reset(n, n);
#pragma omp parallel for schedule(static) if (n >= kMinParallelRows)
  for (std::size_t i = 0; i < n; ++i) {
    double* out = e.row(i).data();
    for (std::size_t k = 0; k < n; ++k) {
      const double a = a1(i, k);
      const double* prow = p.row(k).data();
      for (std::size_t j = 0; j < n; ++j) out[j] += a * prow[j];
    }
    for (std::size_t k = 0; k < n; ++k) {
      const double w = p(i, k);
      const double* arow = a2.row(k).data();
      for (std::size_t j = 0; j < n; ++j) out[j] -= w * arow[j];
    }
  }
}

void commutator_adjoint(const Matrix& a1, const Matrix& e, const Matrix& a2, double scale,
                        Matrix& out) {
  const std::size_t n = e.rows();
  out.reset(n, n);
#pragma omp parallel if (n >= kMinParallelRows)
  {
    std::vector<double> acc(n);
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t k = 0; k < n; ++k) {
        const double a = a1(k, i);
        const double* erow = e.row(k).data();
        for (std::size_t j = 0; j < n; ++j) acc[j] += a * erow[j];
      }
      const double* erow = e.row(i).data();
      for (std::size_t j = 0; j < n; ++j) {
        const double* arow = a2.row(j).data();
        double dot = 0.0;
        for (std::size_t k = 0; k < n; ++k) dot += erow[k] * arow[k];
        out(i, j) = scale * (acc[j] - dot);
      }
    }
  }
}

void multiply_transposed(const Matrix& x, const Matrix& y, Matrix& out) {
  out.reset(x.rows(), y.rows());
#pragma omp parallel for schedule(static) if (x.rows() >= kMinParallelRows)
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double* xr = x.row(i).data();
    for (std::size_t j = 0; j < y.rows(); ++j) {
      const double* yr = y.row(j).data();
      double dot = 0.0;
      for (std::size_t c = 0; c < x.cols(); ++c) dot += xr[c] * yr[c];
      out(i, j) = dot;
    }
  }
}

void feature_distance(const Matrix& x, const Matrix& y, Matrix& out) {
  out.reset(x.rows(), y.rows());
#pragma omp parallel for schedule(static) if (x.rows() >= kMinParallelRows)
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double* xr = x.row(i).data();
    for (std::size_t j = 0; j < y.rows(); ++j) {
      const double* yr = y.row(j).data();
      double s = 0.0;
      for (std::size_t c = 0; c < x.cols(); ++c) {
        const double diff = xr[c] - yr[c];
        s += diff * diff;
      }
      out(i, j) = s;
    }
  }
}

void add_local_terms(const Matrix& d, const Matrix& p, double feat_scale, double mu, Matrix& g) {
#pragma omp parallel for schedule(static) if (p.rows() >= kMinParallelRows)
  for (std::size_t i = 0; i < p.rows(); ++i)
    for (std::size_t j = 0; j < p.cols(); ++j) {
      const double v = p(i, j);
      g(i, j) += feat_scale * d(i, j) * v + mu * (1.0 - 2.0 * v);
    }
}

void axpy(double a, const Matrix& x, Matrix& y) {
  const double* xs = x.data();
  double* ys = y.data();
  const std::size_t total = y.size();
#pragma omp parallel for schedule(static) if (y.rows() >= kMinParallelRows)
  for (std::size_t i = 0; i < total; ++i) ys[i] += a * xs[i];
}

void truncate_nonneg(Matrix& m) {
  double* v = m.data();
  const std::size_t total = m.size();
#pragma omp parallel for schedule(static) if (m.rows() >= kMinParallelRows)
  for (std::size_t i = 0; i < total; ++i)
    if (!(v[i] >= 0.0)) v[i] = 0.0;
}

void add_constant(Matrix& m, double c) {
  double* v = m.data();
  const std::size_t total = m.size();
#pragma omp parallel for schedule(static) if (m.rows() >= kMinParallelRows)
  for (std::size_t i = 0; i < total; ++i) v[i] += c;
}

void row_sums(const Matrix& m, std::span<double> out) {
#pragma omp parallel for schedule(static) if (m.rows() >= kMinParallelRows)
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (double v : m.row(i)) s += v;
    out[i] = s;
  }
}

void col_sums(const Matrix& m, std::span<double> out) {
  // Column blocks per thread; each column still accumulates rows in order.
  const std::size_t cols = m.cols();
  constexpr std::size_t kBlock = 16;
  const std::size_t blocks = (cols + kBlock - 1) / kBlock;
#pragma omp parallel for schedule(static) if (m.rows() >= kMinParallelRows)
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t lo = b * kBlock;
    const std::size_t hi = std::min(cols, lo + kBlock);
    for (std::size_t j = lo; j < hi; ++j) out[j] = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const double* r = m.row(i).data();
      for (std::size_t j = lo; j < hi; ++j) out[j] += r[j];
    }
  }
}

void scale_rows(Matrix& m, std::span<const double> s) {
#pragma omp parallel for schedule(static) if (m.rows() >= kMinParallelRows)
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (double& v : m.row(i)) v *= s[i];
}

void scale_cols(Matrix& m, std::span<const double> s) {
#pragma omp parallel for schedule(static) if (m.rows() >= kMinParallelRows)
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double* r = m.row(i).data();
    for (std::size_t j = 0; j < m.cols(); ++j) r[j] *= s[j];
  }
}

double frobenius_sq(const Matrix& m) {
  std::vector<double> partial(m.rows());
#pragma omp parallel for schedule(static) if (m.rows() >= kMinParallelRows)
  for (std::size_t i = 0; i < m.rows(); ++i) {
    CompensatedSum acc;
    for (double v : m.row(i)) acc.add(v * v);
    partial[i] = acc.value();
  }
  return compensated_sum(partial);
}

double weighted_sq_sum(const Matrix& d, const Matrix& p) {
  std::vector<double> partial(p.rows());
#pragma omp parallel for schedule(static) if (p.rows() >= kMinParallelRows)
  for (std::size_t i = 0; i < p.rows(); ++i) {
    CompensatedSum acc;
    for (std::size_t j = 0; j < p.cols(); ++j) acc.add(d(i, j) * p(i, j) * p(i, j));
    partial[i] = acc.value();
  }
  return compensated_sum(partial);
}

double binary_penalty(const Matrix& p) {
  std::vector<double> partial(p.rows());
#pragma omp parallel for schedule(static) if (p.rows() >= kMinParallelRows)
  for (std::size_t i = 0; i < p.rows(); ++i) {
    CompensatedSum acc;
    for (double v : p.row(i)) acc.add(v * (1.0 - v));
    partial[i] = acc.value();
  }
  return compensated_sum(partial);
}

}  // namespace qpalign::kernels::parallel
