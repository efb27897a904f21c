#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "layerctl/csv.hpp"
#include "layerctl/fields.hpp"

namespace layerctl::lift {

enum class PatchKind { inner, boundary };

/// Scalar samples on the unit square, n intervals per side (n even), values[j * (n + 1) + i] at (i h, j h).
/// Boundary kind: the side x2 = 0 lies inside the domain, rows x2 > interior_extent are outside it.
struct PatchField2 {
    std::size_t n = 0;
    std::vector<double> values;
    PatchKind kind = PatchKind::inner;
    double interior_extent = 1.0;

    double h() const { return 1.0 / static_cast<double>(n); }
    std::size_t idx(std::size_t i, std::size_t j) const { return j * (n + 1) + i; }
    double at(std::size_t i, std::size_t j) const { return values[idx(i, j)]; }
};

/// 3-vector samples on the unit cube; component c at node (i, j, k) is values[3 * idx(i, j, k) + c].
/// Boundary kind: the face x1 = 0 lies inside the domain, x1 > interior_extent outside.
struct PatchField3 {
    std::size_t n = 0;
    std::vector<double> values;
    PatchKind kind = PatchKind::inner;
    double interior_extent = 1.0;

    double h() const { return 1.0 / static_cast<double>(n); }
    std::size_t idx(std::size_t i, std::size_t j, std::size_t k) const { return (k * (n + 1) + j) * (n + 1) + i; }
    double at(std::size_t i, std::size_t j, std::size_t k, int c) const {
        return values[3 * idx(i, j, k) + static_cast<std::size_t>(c)];
    }
};

struct LiftResult2 {
    std::size_t n = 0;
    std::vector<double> xi1, xi2;   ///< same layout as PatchField2
    std::vector<double> a, b;       ///< a(x2), b(x2)
    std::vector<double> w_used;     ///< input after the boundary extension
    double average = 0.0;           ///< quadrature of w over the square
    double support_defect = 0.0;    ///< largest value zeroed on the excluded rows
};

struct LiftResult3 {
    std::size_t n = 0;
    std::vector<double> xi;              ///< same layout as PatchField3
    std::vector<double> a;               ///< unit-mass profile a(x1)
    std::vector<double> h, W2, W3;       ///< (x2, x3) grids, index k * (n + 1) + j
    std::vector<double> k_profile;       ///< k(x3)
    std::vector<double> w_used;
    double k_max = 0.0;
    double divergence = 0.0;             ///< relative discrete divergence of the input
    double support_defect = 0.0;
};

struct LiftOptions {
    double average_tol = 1e-10;  ///< inner 2D: |int w| allowed
    double k_tol = 1e-10;        ///< inner 3D: max |k(x3)| allowed
    double div_tol = 0.1;        ///< 3D: max |div w| / max sum |d_i w_i| allowed
};

/// Planar lift with d1 xi2 - d2 xi1 = w; throws DefectError on a nonzero average (inner kind).
LiftResult2 lift2d(const PatchField2& w, const LiftOptions& opt = {});
/// Spatial lift with curl xi = w; throws DefectError on divergence or k(x3) defects (inner kind).
LiftResult3 lift3d(const PatchField3& w, const LiftOptions& opt = {});

/// Max |d1 xi2 - d2 xi1 - w| over rows inside the domain; centered differences, one-sided at edges.
double curl_error(const PatchField2& w, const LiftResult2& r);
double curl_error(const PatchField3& w, const LiftResult3& r);
/// Max |value| on the rows/faces where the lift must vanish.
double support_violation(const LiftResult2& r, PatchKind kind);
double support_violation(const LiftResult3& r, PatchKind kind);

/// Relative centered-difference divergence (see LiftOptions::div_tol).
double relative_divergence(const PatchField3& w);

/// Pointwise planar lift of a closure w on [0,1]^2 by adaptive quadrature; derivatives from the
/// defining identities d1 xi2 = -c' a + w and d2 xi1 = -c' a.
struct PointwiseLift2 {
    std::function<double(double, double)> w;
    double a(double x2) const;
    double b(double x2) const;
    Vec2 xi(double x1, double x2) const;
    double curl(double x1, double x2) const;
};

struct TestField {
    int dim = 2;
    PatchField2 f2;
    PatchField3 f3;
    /// Analytic values: 2D scalar w, 3D curl of the potential.
    std::function<double(double, double)> w2;
    std::function<std::array<double, 3>(double, double, double)> w3;
};

/// Random compactly supported test field: 2D w = d1 A + d2 B, 3D w = curl psi, with factors symmetric
/// about 1/2 along each differentiated axis. Deterministic in `seed`.
TestField sample_test_field(int dim, std::uint64_t seed, int modes, std::size_t n);

/// Patch grids as CSV: x1, x2[, x3], value columns.
csv::Table patch_table(const PatchField2& w, const LiftResult2* r = nullptr);
csv::Table patch_table(const PatchField3& w, const LiftResult3* r = nullptr);

// Vorticity patch control ------------------------------------------------------------------

/// Initial velocity u* with its vorticity and a disc containing its support.
struct InitialVelocity {
    std::function<Vec2(const Vec2&)> u;
    std::function<double(const Vec2&)> omega;
    Vec2 support_center;
    double support_radius = 0.0;
};
/// u* = (d2 psi, -d1 psi), omega* = -lap psi for psi = amplitude * (1 - |x - center|^2 / radius^2)^6.
InitialVelocity bump_vortex(Vec2 center, double radius, double amplitude);

struct VorticityOptions {
    std::size_t patch_grid = 64;
    std::size_t samples_per_window = 9;
    std::size_t check_grid = 21;
    double tol = 1e-12;
};

struct VorticityPiece {
    std::size_t ball = 0;
    std::size_t patch = 0;
    PatchKind kind = PatchKind::inner;
    bool flipped = false;            ///< boundary patch whose outside lies below
    double t_center = 0.0, eps = 0.0;
    std::vector<double> times;
    std::vector<LiftResult2> lifts;  ///< lift of beta' omega_bar_l at each sample time
    double mean_defect = 0.0;        ///< largest discrete mean removed before an inner lift
    double curl_error = 0.0;         ///< largest absolute discrete curl residual over the samples
    double support_defect = 0.0;
    double max_forcing = 0.0;        ///< largest |beta' omega_bar_l| on the patch grid
};

struct VorticityReport {
    std::vector<VorticityPiece> pieces;
    double max_omega_T = 0.0;             ///< max of |omega(T)| over physical box, extended box and patch grids
    double max_omega_T_ode = 0.0;         ///< same target from the characteristic ODE with the forcing
    double max_force_outside = 0.0;       ///< forces sampled outside their patches
    double max_curl_error = 0.0;          ///< absolute, over all pieces
    double max_forcing = 0.0;
    double max_initial = 0.0;
    csv::Table history;                   ///< t, max_abs_omega
};

VorticityReport vorticity_patch_control(const InitialVelocity& u_star, const ReferenceFlow& flow,
                                        const Domain& domain, const Partition& partition,
                                        const VorticityOptions& opt = {});

/// Force of piece p at its s-th sample time, bilinear on the patch grid; exactly zero outside the patch.
Vec2 piece_force(const VorticityPiece& p, std::size_t s, const Box& patch, const Vec2& x);

}  // namespace layerctl::lift
