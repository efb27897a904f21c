#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <vector>

#include "layerctl/csv.hpp"

namespace layerctl::toy {

/// Working precision of the quad-precision runs.
using Real = __float128;

/// Bottom pollution g(t, x) and its partial derivatives.
struct Pollution {
    std::function<double(double, double)> g;
    std::function<double(double, double)> g_t;
    std::function<double(double, double)> g_x;
};

/// A * S(t) * rho(x): rho a bump on [x0, x1], S a smooth plateau ramping up on [0, ramp] and down
/// on [T - ramp, T], so g(0, .) = g(T, .) = 0 and g vanishes at the inlet.
Pollution make_pollution(double amplitude, double T, double x0 = 0.02, double x1 = 0.12, double ramp = 0.1);
Pollution zero_pollution();

/// x-grid spacing equals the time step (1 / nx); nz intervals in z.
struct ToyGrid {
    std::size_t nx = 32;
    std::size_t nz = 64;
    std::size_t substeps = 0;  ///< Crank-Nicolson substeps per step; 0 picks the least m with dt / (m dz^2) <= 1
};

enum class Precision { binary64, binary128 };

/// Inlet data v(t, 0, z) at the grid times t_k = k dt: a callback plus optional quad-precision
/// sine impulses added at listed steps (column value sum_m 2 a_m sin(m pi z)).
struct Inlet {
    std::function<double(double, double)> q;
    std::map<std::size_t, std::vector<Real>> impulses;
};

struct ToyOptions {
    std::size_t n_max = 8;                 ///< stored sine modes per slice
    std::vector<std::size_t> snapshot_steps;  ///< step indices to store besides the final one
    Precision precision = Precision::binary64;
};

struct ToyState {
    double t = 0.0;
    std::size_t step = 0;
    std::size_t nx = 0, nz = 0;
    std::vector<double> v;                     ///< v[i * (nz + 1) + j] at (x_i, z_j)
    std::vector<std::vector<double>> modes;    ///< modes[i][n - 1] = int (v - (1 - z) g) sin(n pi z) dz
    double at(std::size_t i, std::size_t j) const { return v[i * (nz + 1) + j]; }
};

struct ToyRun {
    std::vector<ToyState> states;   ///< requested snapshots, then the final state
    std::vector<double> times;      ///< every step time
    std::vector<double> sup_norm;   ///< max |v| over the grid at every step time
    std::vector<Real> sup_norm_q;   ///< same in working precision
};

/// Transport-diffusion toy: exact unit-speed shift in x, Crank-Nicolson in z along each characteristic.
ToyRun solve_toy(const Pollution& g, const Inlet& q, const ToyGrid& grid, double T_end, const ToyOptions& opt = {});

/// <1 - z, sin(n pi z)> = 1 / (n pi).
double lift_coefficient(int n);

/// e^{-n^2 pi^2 (T - T*)} q*_n - int_{T*}^T e^{-n^2 pi^2 (T - t)} <1 - z, e_n> g*'(t) dt.
double mode_evolution(int n, const std::function<double(double)>& g_star_d1, double q_star_n, double T_star,
                      double T);

/// <1 - z, e_n> int_{T*}^T e^{n^2 pi^2 t} g*'(t) dt; throws OverflowGuardError when n^2 pi^2 T > 700.
double exact_control_data(int n, const std::function<double(double)>& g_star_d1, double T_star, double T);

struct LowModeReport {
    int modes = 0;
    double T = 1.0;
    std::size_t controlled_slices = 0;
    std::size_t excluded_slices = 0;      ///< slices with T* < 0
    double max_residual = 0.0;            ///< max over controlled slices and n <= N of |v^n(T)|
    double decay_rate = 0.0;              ///< -slope of ln sup|v| over [T, T + window]
    double decay_window = 0.2;
    csv::Table mode_table;                ///< n, x_star, mode_at_T, target
    csv::Table decay_series;              ///< t, sup_norm
    csv::Table inlet;                     ///< t, z, q
    double max_inlet = 0.0;
};

/// Per-slice inversion of the modal relation for the first N modes, emitted as sine impulses at each
/// slice's inlet time, followed by a zero-control run to T + window.
LowModeReport lowmode_control(int N, const Pollution& g, const ToyGrid& grid, double T, double window = 0.2);

}  // namespace layerctl::toy
