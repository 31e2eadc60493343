#include "journey/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace journey::kernels {

namespace serial {

void axpby(double a, std::span<const double> x, double b,
           std::span<const double> y, std::span<double> out) {
  const size_t n = out.size();
  for (size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void axpbypcz(double a, std::span<const double> x, double b,
              std::span<const double> y, double c, std::span<const double> z,
              std::span<double> out) {
  const size_t n = out.size();
  for (size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i] + c * z[i];
}

void axpy_acc(double w, std::span<const double> x, std::span<double> acc) {
  const size_t n = acc.size();
  for (size_t i = 0; i < n; ++i) acc[i] += w * x[i];
}

void masked_diff(double scale, std::span<const double> m,
                 std::span<const double> x, std::span<const double> y,
                 std::span<double> out) {
  const size_t n = out.size();
  for (size_t i = 0; i < n; ++i) out[i] = scale * m[i] * (x[i] - y[i]);
}

double sum_sq(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  const size_t n = x.size();
  for (size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double sum_sq_scaled_diff(std::span<const double> x, double sc,
                          std::span<const double> y) {
  double s = 0.0;
  const size_t n = x.size();
  for (size_t i = 0; i < n; ++i) {
    const double d = x[i] - sc * y[i];
    s += d * d;
  }
  return s;
}

double sum_sq_diff(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  const size_t n = x.size();
  for (size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

double sum_sq_diff_masked(std::span<const double> m, std::span<const double> x,
                          std::span<const double> y) {
  double s = 0.0;
  const size_t n = x.size();
  for (size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    s += m[i] * d * d;
  }
  return s;
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) {
    if (std::isnan(v)) return v;
    m = std::max(m, std::fabs(v));
  }
  return m;
}

}  // namespace serial

namespace {

// Reduce per fixed-size chunk in parallel, then fold the chunk partials in
// order. Thread count never changes the result.
template <typename ChunkFn>
double chunked_reduce(size_t n, ChunkFn&& chunk_sum) {
  const size_t nchunks = (n + kReductionChunk - 1) / kReductionChunk;
  if (nchunks <= 1) return chunk_sum(size_t{0}, n);
  std::vector<double> partial(nchunks);
#pragma omp parallel for schedule(static)
  for (int64_t ci = 0; ci < static_cast<int64_t>(nchunks); ++ci) {
    const size_t lo = static_cast<size_t>(ci) * kReductionChunk;
    const size_t hi = std::min(lo + kReductionChunk, n);
    partial[ci] = chunk_sum(lo, hi);
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

}  // namespace

void axpby(double a, std::span<const double> x, double b,
           std::span<const double> y, std::span<double> out) {
  if (out.size() < kReductionChunk) {
    serial::axpby(a, x, b, y, out);
    return;
  }
  const int64_t n = static_cast<int64_t>(out.size());
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void axpbypcz(double a, std::span<const double> x, double b,
              std::span<const double> y, double c, std::span<const double> z,
              std::span<double> out) {
  if (out.size() < kReductionChunk) {
    serial::axpbypcz(a, x, b, y, c, z, out);
    return;
  }
  const int64_t n = static_cast<int64_t>(out.size());
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i] + c * z[i];
}

void axpy_acc(double w, std::span<const double> x, std::span<double> acc) {
  if (acc.size() < kReductionChunk) {
    serial::axpy_acc(w, x, acc);
    return;
  }
  const int64_t n = static_cast<int64_t>(acc.size());
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) acc[i] += w * x[i];
}

void masked_diff(double scale, std::span<const double> m,
                 std::span<const double> x, std::span<const double> y,
                 std::span<double> out) {
  if (out.size() < kReductionChunk) {
    serial::masked_diff(scale, m, x, y, out);
    return;
  }
  const int64_t n = static_cast<int64_t>(out.size());
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) out[i] = scale * m[i] * (x[i] - y[i]);
}

double sum_sq(std::span<const double> x) {
  return chunked_reduce(x.size(), [&](size_t lo, size_t hi) {
    double s = 0.0;
    for (size_t i = lo; i < hi; ++i) s += x[i] * x[i];
    return s;
  });
}

double dot(std::span<const double> x, std::span<const double> y) {
  return chunked_reduce(x.size(), [&](size_t lo, size_t hi) {
    double s = 0.0;
    for (size_t i = lo; i < hi; ++i) s += x[i] * y[i];
    return s;
  });
}

double sum_sq_scaled_diff(std::span<const double> x, double sc,
                          std::span<const double> y) {
  return chunked_reduce(x.size(), [&](size_t lo, size_t hi) {
    double s = 0.0;
    for (size_t i = lo; i < hi; ++i) {
      const double d = x[i] - sc * y[i];
      s += d * d;
    }
    return s;
  });
}

double sum_sq_diff(std::span<const double> x, std::span<const double> y) {
  return chunked_reduce(x.size(), [&](size_t lo, size_t hi) {
    double s = 0.0;
    for (size_t i = lo; i < hi; ++i) {
      const double d = x[i] - y[i];
      s += d * d;
    }
    return s;
  });
}

double sum_sq_diff_masked(std::span<const double> m, std::span<const double> x,
                          std::span<const double> y) {
  return chunked_reduce(x.size(), [&](size_t lo, size_t hi) {
    double s = 0.0;
    for (size_t i = lo; i < hi; ++i) {
      const double d = x[i] - y[i];
      s += m[i] * d * d;
    }
    return s;
  });
}

double max_abs(std::span<const double> x) {
  const size_t n = x.size();
  const size_t nchunks = (n + kReductionChunk - 1) / kReductionChunk;
  if (nchunks <= 1) return serial::max_abs(x);
  std::vector<double> partial(nchunks);
#pragma omp parallel for schedule(static)
  for (int64_t ci = 0; ci < static_cast<int64_t>(nchunks); ++ci) {
    const size_t lo = static_cast<size_t>(ci) * kReductionChunk;
    const size_t hi = std::min(lo + kReductionChunk, n);
    partial[ci] = serial::max_abs(x.subspan(lo, hi - lo));
  }
  double m = 0.0;
  for (double p : partial) {
    if (std::isnan(p)) return p;
    m = std::max(m, p);
  }
  return m;
}

}  // namespace journey::kernels
