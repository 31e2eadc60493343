#pragma once

#include <cstddef>
#include <span>

namespace journey::kernels {

// Data-parallel inner loops shared by the diffusion, guidance and mixture
// code. The functions in this namespace are OpenMP-parallel; the ones in
// kernels::serial are the plain reference implementations kept for testing
// and benchmarking against.
//
// Elementwise maps are bit-identical between the two variants. Reductions in
// the parallel variant accumulate fixed-size chunks (kReductionChunk) and sum
// the partials in chunk order, so the result does not depend on the thread
// count; it can differ from the serial left-to-right fold by normal rounding.

inline constexpr size_t kReductionChunk = 4096;

// out[i] = a*x[i] + b*y[i]
void axpby(double a, std::span<const double> x, double b,
           std::span<const double> y, std::span<double> out);

// out[i] = a*x[i] + b*y[i] + c*z[i]
void axpbypcz(double a, std::span<const double> x, double b,
              std::span<const double> y, double c, std::span<const double> z,
              std::span<double> out);

// acc[i] += w * x[i]
void axpy_acc(double w, std::span<const double> x, std::span<double> acc);

// out[i] = scale * m[i] * (x[i] - y[i])
void masked_diff(double scale, std::span<const double> m,
                 std::span<const double> x, std::span<const double> y,
                 std::span<double> out);

// sum_i x[i]^2
double sum_sq(std::span<const double> x);

// sum_i x[i]*y[i]
double dot(std::span<const double> x, std::span<const double> y);

// sum_i (x[i] - s*y[i])^2
double sum_sq_scaled_diff(std::span<const double> x, double s,
                          std::span<const double> y);

// sum_i (x[i] - y[i])^2
double sum_sq_diff(std::span<const double> x, std::span<const double> y);

// sum_i m[i] * (x[i] - y[i])^2
double sum_sq_diff_masked(std::span<const double> m, std::span<const double> x,
                          std::span<const double> y);

// max_i |x[i]|; NaN entries make the result NaN.
double max_abs(std::span<const double> x);

namespace serial {
void axpby(double a, std::span<const double> x, double b,
           std::span<const double> y, std::span<double> out);
void axpbypcz(double a, std::span<const double> x, double b,
              std::span<const double> y, double c, std::span<const double> z,
              std::span<double> out);
void axpy_acc(double w, std::span<const double> x, std::span<double> acc);
void masked_diff(double scale, std::span<const double> m,
                 std::span<const double> x, std::span<const double> y,
                 std::span<double> out);
double sum_sq(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
double sum_sq_scaled_diff(std::span<const double> x, double s,
                          std::span<const double> y);
double sum_sq_diff(std::span<const double> x, std::span<const double> y);
double sum_sq_diff_masked(std::span<const double> m, std::span<const double> x,
                          std::span<const double> y);
double max_abs(std::span<const double> x);
}  // namespace serial

}  // namespace journey::kernels
