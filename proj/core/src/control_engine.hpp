#pragma once

#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "layerctl/layer.hpp"
#include "moment_pass.hpp"

namespace layerctl::layer {

/// Per-characteristic coefficient solver behind a ControlSchedule. For a start point x0 and
/// order index p it integrates the cascade with the lower controls active and sets
/// c_p = Psi_p(T)^{-1} Q_2p(T); the control a_p(t) Psi_p(t) c_p then removes Q_2p(T), since
/// the amplitudes a_p integrate to -1 along the characteristic.
class ControlEngine {
public:
    ControlEngine(LayerSources sources, ReferenceFlow flow, Partition partition, int k_max, MomentOptions opt);

    int k_max() const { return k_max_; }
    const Partition& partition() const { return partition_; }
    const ReferenceFlow& flow() const { return flow_; }
    const LayerSources& sources() const { return sources_; }

    /// c_p for p = 0..k_max/2, cached by start point.
    std::vector<Vec2> coefficients(const Vec2& x0) const;
    /// Psi_p(t) along the characteristic of x0.
    Mat2 propagator(const Vec2& x0, int p, double t) const;
    /// Control data along the characteristic of x0, restricted to the given pieces.
    detail::LagrangianControl lagrangian_control(const Vec2& x0, const std::vector<ControlSchedule::Piece>& pieces) const;
    double max_step() const { return partition_.window / 8.0; }

private:
    std::vector<detail::ActiveBall> active_balls(const Vec2& x0) const;

    LayerSources sources_;
    ReferenceFlow flow_;
    Partition partition_;
    int k_max_;
    MomentOptions opt_;
    mutable std::mutex mutex_;
    mutable std::map<std::pair<double, double>, std::vector<Vec2>> cache_;
};

}  // namespace layerctl::layer
