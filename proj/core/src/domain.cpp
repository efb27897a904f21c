#include <cmath>
#include <sstream>

#include "layerctl/errors.hpp"
#include "layerctl/fields.hpp"
#include "layerctl/smooth.hpp"

namespace layerctl {

Domain::Domain(Box physical, Box extended, std::array<bool, 4> walls, double eta_band, double ramp)
    : physical_(physical), extended_(extended), walls_(walls), eta_band_(eta_band), ramp_(ramp) {
    if (eta_band <= 0.0 || ramp <= 0.0) throw PreconditionError("domain: eta_band and ramp must be positive");
    if (physical.x0 < extended.x0 || physical.x1 > extended.x1 || physical.y0 < extended.y0 ||
        physical.y1 > extended.y1)
        throw PreconditionError("domain: physical box must lie inside the extended box");
    if (walls_[0] || walls_[1]) throw PreconditionError("domain: only bottom/top walls are supported");
    const double need = walls_[2] && walls_[3] ? 2.0 * eta_band + ramp : eta_band + ramp;
    if (extended.height() < need) {
        std::ostringstream os;
        os << "domain: height " << extended.height() << " too small for eta_band " << eta_band
           << " and ramp " << ramp;
        throw PreconditionError(os.str());
    }
}

Domain Domain::strip(Box physical, Box extended, double eta_band, double ramp) {
    return Domain(physical, extended, {false, false, true, true}, eta_band, ramp);
}

Domain Domain::half_plane(Box physical, Box extended, double eta_band, double ramp) {
    return Domain(physical, extended, {false, false, true, false}, eta_band, ramp);
}

// G(d) = d up to the band, then G' blends from 1 to 0 over the ramp.
double Domain::profile(double d) const {
    if (d <= eta_band_) return d;
    const double s = std::min((d - eta_band_) / ramp_, 1.0);
    const double s4 = s * s * s * s;
    return eta_band_ + ramp_ * (s - (s4 * s * s - 3.0 * s4 * s + 2.5 * s4));
}

double Domain::profile_d1(double d) const {
    if (d <= eta_band_) return 1.0;
    return 1.0 - smooth::quintic((d - eta_band_) / ramp_);
}

double Domain::profile_d2(double d) const {
    if (d <= eta_band_) return 0.0;
    return -smooth::quintic_d1((d - eta_band_) / ramp_) / ramp_;
}

double Domain::phi(const Vec2& x) const {
    double v = 0.0;
    int count = 0;
    if (walls_[2]) v += profile(x.y - extended_.y0), ++count;
    if (walls_[3]) v += profile(extended_.y1 - x.y), ++count;
    return v - static_cast<double>(count - 1) * profile_limit();
}

Vec2 Domain::grad_phi(const Vec2& x) const {
    double gy = 0.0;
    if (walls_[2]) gy += profile_d1(x.y - extended_.y0);
    if (walls_[3]) gy -= profile_d1(extended_.y1 - x.y);
    return {0.0, gy};
}

Mat2 Domain::hess_phi(const Vec2& x) const {
    double hyy = 0.0;
    if (walls_[2]) hyy += profile_d2(x.y - extended_.y0);
    if (walls_[3]) hyy += profile_d2(extended_.y1 - x.y);
    Mat2 m;
    m(1, 1) = hyy;
    return m;
}

Vec2 Domain::normal(const Vec2& x) const {
    if (!in_extended(x)) {
        std::ostringstream os;
        os << "normal: point (" << x.x << ", " << x.y << ") outside the extended box";
        throw DomainError(os.str());
    }
    return -grad_phi(x);
}

Mat2 Domain::grad_normal(const Vec2& x) const { return -1.0 * hess_phi(x); }

std::vector<Vec2> Domain::wall_samples(std::size_t per_side) const {
    std::vector<Vec2> pts;
    for (std::size_t i = 0; i < per_side; ++i) {
        const double s = per_side == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(per_side - 1);
        const double xx = extended_.x0 + s * extended_.width();
        if (walls_[2]) pts.push_back({xx, extended_.y0});
        if (walls_[3]) pts.push_back({xx, extended_.y1});
    }
    return pts;
}

std::vector<Vec2> Domain::mesh(std::size_t nx, std::size_t ny) const {
    std::vector<Vec2> pts;
    pts.reserve(nx * ny);
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) {
            const double sx = nx == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(nx - 1);
            const double sy = ny == 1 ? 0.5 : static_cast<double>(j) / static_cast<double>(ny - 1);
            pts.push_back({extended_.x0 + sx * extended_.width(), extended_.y0 + sy * extended_.height()});
        }
    return pts;
}

Vec2 normal_extension(const Domain& domain, const Vec2& x) { return domain.normal(x); }

}  // namespace layerctl
