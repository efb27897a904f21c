#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace layerctl::quad {

struct Rule {
    std::vector<double> nodes;    ///< on [-1, 1]
    std::vector<double> weights;
};

/// Gauss-Legendre rule with n points (cached per n).
const Rule& gauss_legendre(std::size_t n);

/// Composite Gauss-Legendre on [a, b] with `panels` equal panels of `order` points.
double composite_gl(const std::function<double(double)>& f, double a, double b,
                    std::size_t panels, std::size_t order = 8);

/// Adaptive Gauss-Kronrod 7-15 on [a, b] to absolute tolerance `tol`.
double adaptive(const std::function<double(double)>& f, double a, double b, double tol = 1e-13,
                int max_depth = 40);

/// Cumulative integral F_i = int_{x_0}^{x_i} f on a uniform grid with spacing h.
/// Simpson on even nodes, three-point partial-interval rule on odd nodes.
std::vector<double> cumulative_simpson(const std::vector<double>& f, double h);

/// Same with stride access: element i is f[offset + i * stride], n samples.
void cumulative_simpson_strided(const double* f, std::size_t n, std::ptrdiff_t stride, double h,
                                double* out, std::ptrdiff_t out_stride);

/// Composite Simpson (even intervals) or Simpson plus 3/8 tail (odd intervals).
double simpson(const std::vector<double>& f, double h);

/// Trapezoid weights over n uniform samples.
double trapezoid(const std::vector<double>& f, double h);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace layerctl::quad
