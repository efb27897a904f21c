#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "layerctl/csv.hpp"
#include "layerctl/fields.hpp"

namespace layerctl::layer {

using FrictionFn = std::function<Mat2(const Vec2&)>;
using VectorField = std::function<Vec2(double, const Vec2&)>;
using MatrixField = std::function<Mat2(double, const Vec2&)>;
using ScalarField = std::function<double(double, const Vec2&)>;

/// Boundary cutoff chi = 1 - step(phi / eta): equals 1 on the wall, zero for phi >= eta.
struct ChiCutoff {
    double eta = 0.15;
    double operator()(const Domain& d, const Vec2& x) const;
};

struct ChiChoice {
    double eta = 0.0;
    std::vector<double> chain;  ///< S(eta), S(S(eta)), S(S(S(eta)))
};

struct ChainOptions {
    std::size_t samples = 8;
    std::size_t time_grid = 24;
    int iterations = 12;
    double safety = 0.75;  ///< eta is capped at safety * eta_band
};

/// S(S(S(eta))) via support_growth.
std::vector<double> support_chain(const ReferenceFlow& flow, const Domain& domain, double eta,
                                  const ChainOptions& opt = {});
/// Largest eta (bisection) with S(S(S(eta))) <= eta_band, capped at safety * eta_band.
ChiChoice choose_chi_width(const ReferenceFlow& flow, const Domain& domain, const ChainOptions& opt = {});

/// N(f) = [D(f) n + M f]_tan for a value f and its gradient grad(i, j) = d_j f_i.
Vec2 navier_operator(const Vec2& f, const Mat2& grad, const Vec2& n, const Mat2& M);
Vec2 tangential(const Vec2& f, const Vec2& n);

struct LayerSources {
    VectorField g0;
    MatrixField B;
    VectorField G0;
    VectorField G0_tilde;
    ScalarField u0_flat;
    std::function<double(const Vec2&)> chi;
    double chi_eta = 0.0;
    double T = 1.0;
};

struct SourceOptions {
    bool check_chain = true;
    ChainOptions chain{};
    double fallback_level = 1e-4;  ///< below this phi, u0_flat uses the inward extrapolation
    double fd_step = 1e-3;         ///< step of the fourth-order differences in G0
};

/// g0 = 2 chi N(u0), B, G0 = d_t g0 - g0 + (u0.grad) g0 + B g0, G0~ = -u0_flat g0, u0_flat = -(u0.n)/phi.
LayerSources assemble_layer_sources(const ReferenceFlow& flow, const Domain& domain, const FrictionFn& M,
                                    const ChiCutoff& chi, const SourceOptions& opt = {});

/// Quotient -(u.n)/phi with the near-wall extrapolation; exposed for manufactured tests.
double flat_velocity(const VelocityFn& u, const Domain& domain, double t, const Vec2& x,
                     double fallback_level = 1e-4);

/// Taylor coefficients at zeta = 0 of the two rational kernels: d^k [2/(1+z^2)] and
/// d^k [2(1-z^2)/(1+z^2)^2]. Odd orders vanish.
double kernel_g0_derivative(int k);
double kernel_g1_derivative(int k);

/// Even fast profiles phi_j(z) = sum_i c_{j,i} z^{2i} e^{-z^2} with d^{2k} hat(phi_j)(0) = delta_{jk}.
class FastProfiles {
public:
    explicit FastProfiles(int max_index);
    int max_index() const { return J_; }
    double value(int j, double z) const;
    const std::vector<double>& coefficients(int j) const { return c_[static_cast<std::size_t>(j)]; }
    /// d^{2k} hat(phi_j)(0) from the closed-form Gaussian moments.
    double fourier_derivative(int j, int k) const;

private:
    int J_;
    std::vector<std::vector<double>> c_;
};

class ControlEngine;

/// Time-windowed, patch-localized control pieces, one per (ball, even order).
class ControlSchedule {
public:
    struct Piece {
        std::size_t ball = 0;
        double t_center = 0.0;
        double eps = 0.0;
        std::size_t patch = 0;
        int order = 0;
        int profile = 0;
    };

    ControlSchedule() = default;
    ControlSchedule(std::vector<Piece> pieces, std::shared_ptr<const ControlEngine> engine);

    const std::vector<Piece>& pieces() const { return pieces_; }
    bool empty() const { return pieces_.empty(); }
    const ControlEngine* engine() const { return engine_.get(); }
    /// Eulerian value of piece i at (t, x); exactly zero outside its patch and window.
    Vec2 evaluate_piece(std::size_t i, double t, const Vec2& x) const;
    /// Sum over pieces of the given order.
    Vec2 evaluate(int order, double t, const Vec2& x) const;
    /// Structured text: one block per piece with window, patch, order and an n-by-n amplitude grid at t_l.
    std::string manifest(std::size_t amplitude_grid = 0) const;

private:
    std::vector<Piece> pieces_;
    std::shared_ptr<const ControlEngine> engine_;
};

struct MomentState {
    double t = 0.0;
    std::vector<Vec2> starts;
    std::vector<Vec2> points;                ///< X(t)
    std::vector<std::vector<Vec2>> Q;        ///< Q[p][k], k = 0..k_max (odd entries zero)
};

struct MomentTrajectory {
    int k_max = 0;
    std::vector<MomentState> snapshots;      ///< includes the final time
    const MomentState& final_state() const { return snapshots.back(); }
    double max_abs(int k) const;             ///< over the final cloud
    double max_normal_component(const Domain& d) const;  ///< over all snapshots and orders
};

struct MomentOptions {
    double tol = 1e-12;
    std::size_t snapshots = 8;
};

/// Integrates the moment cascade along the characteristic of each cloud point from t = 0.
MomentTrajectory evolve_moments(const LayerSources& sources, const ReferenceFlow& flow,
                                const ControlSchedule& control, int k_max, const std::vector<Vec2>& cloud,
                                double T_end, const MomentOptions& opt = {});

/// Order-by-order synthesis of controls killing Q_0, Q_2, ..., Q_{k_max} at T.
ControlSchedule synthesize_moment_control(const LayerSources& sources, const ReferenceFlow& flow,
                                          const Domain& domain, const Partition& partition, int k_max,
                                          const MomentOptions& opt = {});

/// Columns k, x1, x2, |Q_k| at the final time.
csv::Table moment_table(const MomentTrajectory& traj);

// Correctors ---------------------------------------------------------------

/// Layer field v(x, z) at a fixed time with its x-gradient grad(i, j) = d_{x_j} v_i.
struct LayerField {
    std::function<Vec2(const Vec2&, double)> value;
    std::function<Mat2(const Vec2&, double)> gradient;  ///< optional; differences if empty
};

struct TailOptions {
    double z_max = 40.0;
    std::size_t panels = 64;
    std::size_t order = 10;
};

/// int_z^inf f: Gauss-Legendre panels on [z, z_max] plus an exponential tail correction.
double tail_integral(const std::function<double(double)>& f, double z, const TailOptions& opt = {});

struct CorrectorW {
    std::vector<Vec2> xs;
    std::vector<double> zs;
    std::vector<std::vector<Vec2>> w;       ///< w[i][j] at (xs[i], zs[j])
    std::vector<std::vector<Vec2>> dz_w;    ///< fourth-order differences of the computed w
    std::vector<std::vector<double>> div_v;
    std::vector<Vec2> navier_v0;            ///< N(v)(x, 0)
    double diverg_residual = 0.0;           ///< max |n . d_z w - div v|
    double navier_residual = 0.0;           ///< max |N(v)(0) - [d_z w]_tan(0) / 2|
};

/// w = -2 e^{-z} N(v)(x, 0) - n int_z^inf div_x v dz'.
CorrectorW corrector_w(const LayerField& v, const Domain& domain, const FrictionFn& M,
                       const std::vector<Vec2>& xs, const std::vector<double>& zs, const TailOptions& opt = {});
/// Pointwise evaluation of w at (x, z).
Vec2 corrector_w_at(const LayerField& v, const Domain& domain, const FrictionFn& M, const Vec2& x, double z,
                    const TailOptions& opt = {});

/// q = -int_z^inf [(u0.grad) v + (v.grad) u0] . n dz' at time t; q[i][j] at (xs[i], zs[j]).
std::vector<std::vector<double>> layer_pressure_q(const LayerField& v, const ReferenceFlow& flow,
                                                  const Domain& domain, double t, const std::vector<Vec2>& xs,
                                                  const std::vector<double>& zs, const TailOptions& opt = {});

struct ThetaSolution {
    std::size_t nx = 0, ny = 0;
    double hx = 0.0, hy = 0.0;
    Box box;
    std::vector<double> values;  ///< row-major (j * nx + i)
    double defect = 0.0;         ///< int source - int flux, trapezoid
    double residual = 0.0;       ///< max discrete Laplacian residual
    double mean = 0.0;           ///< trapezoid-weighted mean of the result
    double at(std::size_t i, std::size_t j) const { return values[j * nx + i]; }
};

/// Solves lap theta = -source in the box, d_n theta = -flux on its boundary (outward normal), by the
/// five-point Laplacian with ghost-point Neumann rows diagonalized by the 2D DCT-I.
/// Throws DefectError if |int source - int flux| exceeds `compat_tol`.
ThetaSolution solve_theta(const Box& box, std::size_t nx, std::size_t ny,
                          const std::function<double(const Vec2&)>& source,
                          const std::function<double(const Vec2&, const Vec2&)>& flux, double compat_tol = 1e-8);

}  // namespace layerctl::layer
