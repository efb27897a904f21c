#include <cmath>
#include <numbers>
#include <sstream>

#include "fft.hpp"
#include "layerctl/errors.hpp"
#include "layerctl/layer.hpp"

namespace layerctl::layer {

namespace {

double trap_weight(std::size_t i, std::size_t n) { return (i == 0 || i + 1 == n) ? 0.5 : 1.0; }

}  // namespace

ThetaSolution solve_theta(const Box& box, std::size_t nx, std::size_t ny,
                          const std::function<double(const Vec2&)>& source,
                          const std::function<double(const Vec2&, const Vec2&)>& flux, double compat_tol) {
    if (nx < 3 || ny < 3) throw PreconditionError("solve_theta: need at least 3 nodes per direction");
    if (!(box.width() > 0.0) || !(box.height() > 0.0)) throw PreconditionError("solve_theta: degenerate box");
    ThetaSolution s;
    s.nx = nx;
    s.ny = ny;
    s.box = box;
    s.hx = box.width() / static_cast<double>(nx - 1);
    s.hy = box.height() / static_cast<double>(ny - 1);
    const double hx = s.hx, hy = s.hy;
    auto node = [&](std::size_t i, std::size_t j) {
        return Vec2{box.x0 + static_cast<double>(i) * hx, box.y0 + static_cast<double>(j) * hy};
    };

    // Right-hand side with ghost-node Neumann rows; corners collect both sides.
    std::vector<double> b(nx * ny);
    double int_source = 0.0, int_flux = 0.0;
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) {
            const Vec2 x = node(i, j);
            const double src = source(x);
            double rhs = -src;
            const double w = trap_weight(i, nx) * trap_weight(j, ny) * hx * hy;
            int_source += w * src;
            if (i == 0 || i + 1 == nx) {
                const double f = flux(x, Vec2{i == 0 ? -1.0 : 1.0, 0.0});
                rhs += 2.0 * f / hx;
                int_flux += trap_weight(j, ny) * hy * f;
            }
            if (j == 0 || j + 1 == ny) {
                const double f = flux(x, Vec2{0.0, j == 0 ? -1.0 : 1.0});
                rhs += 2.0 * f / hy;
                int_flux += trap_weight(i, nx) * hx * f;
            }
            b[j * nx + i] = rhs;
        }
    s.defect = int_source - int_flux;
    if (std::abs(s.defect) > compat_tol) {
        std::ostringstream os;
        os << "solve_theta: compatibility violated, defect " << s.defect;
        throw DefectError(os.str(), s.defect);
    }

    const double pi = std::numbers::pi;
    std::vector<double> c = b;
    detail::r2r_2d(c, static_cast<int>(ny), static_cast<int>(nx), FFTW_REDFT00);
    const double norm_factor = 4.0 * static_cast<double>(nx - 1) * static_cast<double>(ny - 1);
    for (std::size_t j = 0; j < ny; ++j) {
        const double ly = (2.0 * std::cos(pi * static_cast<double>(j) / static_cast<double>(ny - 1)) - 2.0) / (hy * hy);
        for (std::size_t i = 0; i < nx; ++i) {
            const double lx =
                (2.0 * std::cos(pi * static_cast<double>(i) / static_cast<double>(nx - 1)) - 2.0) / (hx * hx);
            double& v = c[j * nx + i];
            v = (i == 0 && j == 0) ? 0.0 : v / ((lx + ly) * norm_factor);
        }
    }
    detail::r2r_2d(c, static_cast<int>(ny), static_cast<int>(nx), FFTW_REDFT00);
    s.values = std::move(c);

    double wsum = 0.0, msum = 0.0, bmean = 0.0;
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) {
            const double w = trap_weight(i, nx) * trap_weight(j, ny);
            wsum += w;
            msum += w * s.values[j * nx + i];
            bmean += w * b[j * nx + i];
        }
    s.mean = msum / wsum;
    bmean /= wsum;

    auto at = [&](std::ptrdiff_t i, std::ptrdiff_t j) {
        // Reflected neighbours stand in for the ghost nodes.
        if (i < 0) i = 1;
        if (j < 0) j = 1;
        if (i >= static_cast<std::ptrdiff_t>(nx)) i = static_cast<std::ptrdiff_t>(nx) - 2;
        if (j >= static_cast<std::ptrdiff_t>(ny)) j = static_cast<std::ptrdiff_t>(ny) - 2;
        return s.values[static_cast<std::size_t>(j) * nx + static_cast<std::size_t>(i)];
    };
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) {
            const auto ii = static_cast<std::ptrdiff_t>(i), jj = static_cast<std::ptrdiff_t>(j);
            const double u = at(ii, jj);
            const double lap = (at(ii - 1, jj) - 2.0 * u + at(ii + 1, jj)) / (hx * hx) +
                               (at(ii, jj - 1) - 2.0 * u + at(ii, jj + 1)) / (hy * hy);
            s.residual = std::max(s.residual, std::abs(lap - (b[j * nx + i] - bmean)));
        }
    return s;
}

}  // namespace layerctl::layer
