#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "layerctl/geometry.hpp"

namespace layerctl {

enum class Side { left = 0, right = 1, bottom = 2, top = 3 };

/// Rectangular geometry with a level function phi that vanishes on the wall sides of the
/// extended box. Only non-adjacent wall pairs are supported (strip or half-plane).
class Domain {
public:
    /// Walls at y = extended.y0 and y = extended.y1; open ends in x.
    static Domain strip(Box physical, Box extended, double eta_band = 0.2, double ramp = 0.25);
    /// Single wall at y = extended.y0.
    static Domain half_plane(Box physical, Box extended, double eta_band = 0.2, double ramp = 0.25);

    const Box& physical_box() const { return physical_; }
    const Box& extended_box() const { return extended_; }
    double eta_band() const { return eta_band_; }
    bool is_wall(Side s) const { return walls_[static_cast<int>(s)]; }

    double phi(const Vec2& x) const;
    Vec2 grad_phi(const Vec2& x) const;
    Mat2 hess_phi(const Vec2& x) const;
    /// -grad phi; throws DomainError outside the closed extended box.
    Vec2 normal(const Vec2& x) const;
    /// d_j n_i as a matrix, i.e. -hess phi.
    Mat2 grad_normal(const Vec2& x) const;

    bool in_extended(const Vec2& x, double tol = 1e-12) const { return extended_.contains(x, tol); }
    bool in_physical(const Vec2& x, double tol = 0.0) const { return physical_.contains(x, tol); }
    double distance_to_physical(const Vec2& x) const { return physical_.distance(x); }

    /// Points on the wall sides, `per_side` per wall, evenly spaced along the box.
    std::vector<Vec2> wall_samples(std::size_t per_side) const;
    /// Uniform nx-by-ny mesh of the closed extended box.
    std::vector<Vec2> mesh(std::size_t nx, std::size_t ny) const;

private:
    Domain(Box physical, Box extended, std::array<bool, 4> walls, double eta_band, double ramp);
    double profile(double d) const;
    double profile_d1(double d) const;
    double profile_d2(double d) const;
    double profile_limit() const { return eta_band_ + 0.5 * ramp_; }

    Box physical_;
    Box extended_;
    std::array<bool, 4> walls_{};
    double eta_band_;
    double ramp_;
};

using VelocityFn = std::function<Vec2(double, const Vec2&)>;
using GradientFn = std::function<Mat2(double, const Vec2&)>;

/// Time-dependent analytic velocity field, zero outside (0, T).
struct ReferenceFlow {
    std::string name;
    VelocityFn u0;
    GradientFn grad_u0;  ///< grad(i, j) = d_j u_i
    double T = 1.0;
    bool irrotational = false;

    Vec2 velocity(double t, const Vec2& x) const;
    Mat2 gradient(double t, const Vec2& x) const;
    double sigma0(double t, const Vec2& x) const { return gradient(t, x).trace(); }
};

using ParamMap = std::map<std::string, double>;

/// Shipped families: "uniform-channel" (params T, displacement), "stagnation-corner"
/// (T, strength, center), "perturbed-channel" (T, displacement, kappa), "zero" (T).
ReferenceFlow make_reference_flow(const std::string& name, const ParamMap& params);
/// Wraps user closures; a missing gradient is replaced by centered differences.
ReferenceFlow make_reference_flow(std::string name, VelocityFn u0, GradientFn grad, double T,
                                  bool irrotational);

/// History profile of the channel families: h(t) = (D/T) step'(t/T), so int_0^T h = D.
double channel_profile(double t, double T, double displacement);
double channel_profile_d1(double t, double T, double displacement);
/// int_0^t h.
double channel_displacement(double t, double T, double displacement);

struct FlowInvariantReport {
    double tangency = 0.0;   ///< max |u.n| on wall samples
    double endpoints = 0.0;  ///< max |u(0,x)|, |u(T,x)|
    double curl = 0.0;       ///< max |curl u| by differences (only if irrotational)
};
FlowInvariantReport check_flow_invariants(const ReferenceFlow& flow, const Domain& domain,
                                          std::size_t samples = 16);

Vec2 normal_extension(const Domain& domain, const Vec2& x);

struct FlowSample {
    Vec2 start;
    std::optional<double> exit_time;
    std::vector<std::pair<double, Vec2>> trajectory;
    double step = 0.0;
};

struct FlowResult {
    Vec2 point;
    FlowSample sample;
};

/// Phi(t, s, x): position at time s of the particle located at x at time t, adaptive 4(5).
FlowResult integrate_flow(const ReferenceFlow& flow, double t, double s, const Vec2& x,
                          double tol = 1e-10, const Domain* domain = nullptr);
/// Lightweight variant without trajectory storage.
Vec2 flow_map(const ReferenceFlow& flow, double t, double s, const Vec2& x, double tol = 1e-10);
/// Fixed-step fourth-order variant with `steps` equal steps.
Vec2 flow_map_fixed(const ReferenceFlow& flow, double t, double s, const Vec2& x, std::size_t steps);

struct FlushingReport {
    std::vector<FlowSample> samples;
    bool success = false;
    double observation_step = 0.0;
    std::size_t failures = 0;
};

/// For each grid point, the first observation time t in (0, T] on a uniform grid of spacing
/// `dt_obs` at which dist(Phi(t,0,x), physical box) >= delta.
FlushingReport verify_flushing(const ReferenceFlow& flow, const Domain& domain,
                               const std::vector<Vec2>& grid, double delta,
                               double dt_obs = 1.0 / 256, double tol = 1e-10);

/// sup of phi(Phi(t, t', x)) over a 64x64 time grid and wall-collar seeds of phi <= delta.
double support_growth(const ReferenceFlow& flow, const Domain& domain, double delta,
                      std::size_t samples = 16, std::size_t time_grid = 64, double tol = 1e-10);

struct Ball {
    Vec2 center;
    double radius = 0.0;
};

struct Partition {
    std::vector<Ball> balls;
    std::vector<double> times;     ///< t_l
    std::vector<std::size_t> targets;  ///< m_l, index into patches
    std::vector<Box> patches;
    double window = 0.0;           ///< eps
    double T = 1.0;

    /// Raw bump (1 - |x - c|^2 / r^2)^6 of ball l, exactly zero outside.
    double bump(std::size_t l, const Vec2& x) const;
    /// eta_l(x); zero outside the ball, sum over l equals 1 on the covered region.
    double weight(std::size_t l, const Vec2& x) const;
    std::vector<double> weights(const Vec2& x) const;
    /// Indices of balls whose support contains x.
    std::vector<std::size_t> active(const Vec2& x) const;
    double beta(std::size_t l, double t) const;
    double beta_d1(std::size_t l, double t) const;
};

struct PartitionOptions {
    double initial_radius = 0.2;
    double coverage = 0.7;  ///< cell half-diagonal / ball radius; cell corners sit at this fraction of r
    int max_halvings = 6;
    std::size_t boundary_points = 16;
    std::size_t window_samples = 9;
    std::size_t time_candidates = 96;
    double tol = 1e-10;
};

/// Greedy cover of the closed extended box by balls, each with a window (t_l - eps, t_l + eps)
/// whose sampled image stays inside one patch.
Partition build_partition(const ReferenceFlow& flow, const Domain& domain,
                          const std::vector<Box>& patches, double eps,
                          const PartitionOptions& options = {});

/// Trajectory as CSV rows: t, x1, x2, phi.
std::string trajectory_csv(const FlowSample& sample, const Domain& domain);

}  // namespace layerctl
