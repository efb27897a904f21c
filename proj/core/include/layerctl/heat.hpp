#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "layerctl/csv.hpp"

namespace layerctl::heat {

enum class Parity { even, odd, none };

/// Samples of a function of the fast variable on the periodic grid z_j = (j - N/2) h,
/// h = 2L/N, j = 0..N-1. The point z = L is identified with z = -L.
struct ProfileZ {
    std::vector<double> values;
    double L = 0.0;
    Parity parity = Parity::none;

    std::size_t size() const { return values.size(); }
    double h() const { return 2.0 * L / static_cast<double>(values.size()); }
    double z(std::size_t j) const {
        return (static_cast<double>(j) - static_cast<double>(values.size() / 2)) * h();
    }
};

struct ZGrid {
    double L = 0.0;
    std::size_t N = 0;
};

/// L = 40 width max(1, sqrt(1 + 4 t_max)); N the smallest power of two >= 4096 with h <= width/4.
ZGrid default_grid(double width, double t_max = 1e4);

template <class F>
ProfileZ sample(F&& f, const ZGrid& grid, Parity parity) {
    ProfileZ p;
    p.L = grid.L;
    p.parity = parity;
    p.values.resize(grid.N);
    for (std::size_t j = 0; j < grid.N; ++j) p.values[j] = f(p.z(j));
    return p;
}

using MomentVector = std::vector<double>;

/// Trapezoid quadrature of int z^k f; throws TruncationError if z^k f is not small at |z| = L.
double moment(const ProfileZ& f, int k);
MomentVector moments(const ProfileZ& f, int k_max);

/// (sum_{a <= s} int (1 + z^2)^n |d^a f|^2)^{1/2}, derivatives computed spectrally.
double weighted_norm(const ProfileZ& f, int s, int n);

/// n-th derivative of exp(-(z/width)^2); moments 0..n-1 vanish.
ProfileZ make_vanishing_moment_data(int n, double width = 1.0, std::optional<ZGrid> grid = std::nullopt);

/// Heat semigroup e^{t d_zz} through the discrete Fourier (cosine/sine for even/odd) transform.
ProfileZ heat_evolve(const ProfileZ& f0, double t);

/// One-parameter width estimate sqrt(2 int z^2 |f| / int |f|).
double profile_width(const ProfileZ& f);

std::vector<double> geometric_ladder(double t0 = 10.0, double t1 = 1e4, std::size_t n = 32);

struct DecayFit {
    double exponent = 0.0;          ///< expected 1/4 + n/2 - m/2
    double slope = 0.0;             ///< fitted power-law exponent against (2 + t)
    double log_model_slope = 0.0;   ///< fitted exponent against ln(2+t)/(2+t)
    double C_fit = 0.0;
    bool bound_ok = false;
    std::vector<double> times, norms, model, ratio;
};

DecayFit verify_decay(const ProfileZ& f0, int n, int m, int s, const std::vector<double>& times);

/// Columns t, norm, model, ratio.
csv::Table decay_table(const DecayFit& fit);

/// Partial sums of the trapezoid time integral of |f(t)|_{H^{s,m}} over the ladder.
std::vector<double> time_integral_partial_sums(const ProfileZ& f0, int s, int m,
                                               const std::vector<double>& times);

}  // namespace layerctl::heat
