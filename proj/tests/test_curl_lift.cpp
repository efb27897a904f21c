#include <cmath>
#include <numbers>

#include "doctest.h"
#include "layerctl/curl_lift.hpp"
#include "layerctl/errors.hpp"
#include "layerctl/smooth.hpp"

using namespace layerctl;
using namespace layerctl::lift;

namespace {

double slope(double e0, double e1) { return std::log2(e0 / e1); }

}  // namespace

TEST_CASE("planar lift of a polynomial field is exact to round-off") {
    // w = d1 A with A = x^3 (1 - x)^3 y^3 (1 - y)^3 symmetric: quadrature of cubic data is exact for Simpson.
    PatchField2 f;
    f.n = 16;
    const std::size_t N = f.n + 1;
    f.values.resize(N * N);
    auto A1 = [](double x) { return 3 * x * x * std::pow(1 - x, 3) - 3 * std::pow(x, 3) * (1 - x) * (1 - x); };
    auto B = [](double y) { return std::pow(y * (1 - y), 3); };
    for (std::size_t j = 0; j < N; ++j)
        for (std::size_t i = 0; i < N; ++i) f.values[j * N + i] = A1(i * f.h()) * B(j * f.h());
    const auto r = lift2d(f);
    CHECK(std::abs(r.average) <= 1e-15);
    CHECK(support_violation(r, PatchKind::inner) == 0.0);
    CHECK(r.support_defect <= 1e-15);
}

TEST_CASE("random 2D fields converge at second order in the curl residual") {
    std::vector<double> e;
    for (std::size_t n : {32, 64, 128}) {
        const auto tf = sample_test_field(2, 5, 3, n);
        const auto r = lift2d(tf.f2);
        e.push_back(curl_error(tf.f2, r));
        CHECK(support_violation(r, PatchKind::inner) == 0.0);
        CHECK(std::abs(r.average) <= 1e-14);
    }
    CHECK(slope(e[0], e[1]) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(slope(e[1], e[2]) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("the inner 2D lift refuses a nonzero average") {
    auto tf = sample_test_field(2, 1, 2, 32);
    for (double& v : tf.f2.values) v += 1e-3;
    CHECK_THROWS_AS(lift2d(tf.f2), DefectError);
}

TEST_CASE("boundary 2D lift ignores data outside the domain") {
    auto a = sample_test_field(2, 9, 2, 64);
    a.f2.kind = PatchKind::boundary;
    a.f2.interior_extent = 0.5;
    auto b = a;
    const std::size_t N = a.f2.n + 1;
    for (std::size_t j = 0; j < N; ++j)
        if (static_cast<double>(j) * a.f2.h() > 0.75)
            for (std::size_t i = 0; i < N; ++i) b.f2.values[j * N + i] = 5.0;
    const auto ra = lift2d(a.f2), rb = lift2d(b.f2);
    for (std::size_t k = 0; k < ra.xi1.size(); ++k) {
        CHECK(ra.xi1[k] == rb.xi1[k]);
        CHECK(ra.xi2[k] == rb.xi2[k]);
    }
    CHECK(support_violation(ra, PatchKind::boundary) == 0.0);
    auto fine = sample_test_field(2, 9, 2, 128);
    fine.f2.kind = PatchKind::boundary;
    fine.f2.interior_extent = 0.5;
    CHECK(curl_error(a.f2, ra) / curl_error(fine.f2, lift2d(fine.f2)) >= 3.0);
}

TEST_CASE("pointwise lift of the symbolic field") {
    auto phi = [](double x) { return smooth::bump((x - 0.5) / 0.3); };
    auto dphi = [phi](double x) {
        const double r = (x - 0.5) / 0.3;
        if (r * r >= 1.0) return 0.0;
        return phi(x) * (-2.0 * r / ((1.0 - r * r) * (1.0 - r * r))) / 0.3;
    };
    PointwiseLift2 pl{[=](double a, double b) { return dphi(a) * phi(b); }};
    for (double a : {0.05, 0.3, 0.5, 0.71})
        for (double b : {0.25, 0.5, 0.9}) {
            const Vec2 xi = pl.xi(a, b);
            CHECK(std::abs(xi.x) <= 1e-12);
            CHECK(std::abs(xi.y - phi(a) * phi(b)) <= 1e-12);
            CHECK(std::abs(pl.curl(a, b) - dphi(a) * phi(b)) <= 1e-12);
        }
}

TEST_CASE("3D lift: second order, exact support, vanishing obstruction") {
    std::vector<double> e;
    for (std::size_t n : {16, 32, 64}) {
        const auto tf = sample_test_field(3, 4, 2, n);
        const auto r = lift3d(tf.f3);
        e.push_back(curl_error(tf.f3, r));
        CHECK(r.k_max <= 1e-10);
        CHECK(support_violation(r, PatchKind::inner) == 0.0);
    }
    CHECK(slope(e[1], e[2]) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("3D lift rejects a divergent field") {
    auto tf = sample_test_field(3, 2, 2, 24);
    CHECK(relative_divergence(tf.f3) < 0.1);
    for (std::size_t i = 0; i < tf.f3.values.size(); i += 3) tf.f3.values[i] += tf.f3.values[i + 2];
    CHECK(relative_divergence(tf.f3) > 0.1);
    CHECK_THROWS_AS(lift3d(tf.f3), DefectError);
}

TEST_CASE("3D boundary lift has exact support and converges") {
    std::vector<double> e;
    for (std::size_t n : {16, 32}) {
        auto tf = sample_test_field(3, 6, 2, n);
        tf.f3.kind = PatchKind::boundary;
        tf.f3.interior_extent = 0.6;
        const auto r = lift3d(tf.f3);
        CHECK(support_violation(r, PatchKind::boundary) == 0.0);
        e.push_back(curl_error(tf.f3, r));
    }
    CHECK(e[0] / e[1] >= 3.0);
}

TEST_CASE("test fields are deterministic in the seed") {
    const auto a = sample_test_field(2, 42, 3, 16), b = sample_test_field(2, 42, 3, 16), c = sample_test_field(2, 43, 3, 16);
    CHECK(a.f2.values == b.f2.values);
    CHECK(a.f2.values != c.f2.values);
    CHECK_THROWS_AS(sample_test_field(4, 1, 1, 16), PreconditionError);
    CHECK_THROWS_AS(sample_test_field(2, 1, 1, 15), PreconditionError);
}

TEST_CASE("patch table columns") {
    const auto tf = sample_test_field(2, 1, 1, 8);
    const auto r = lift2d(tf.f2);
    const auto t = patch_table(tf.f2, &r);
    CHECK(t.size() == 81);
    CHECK(t.columns().front() == "x1");
}

TEST_CASE("bump vortex: vorticity is minus the Laplacian of the stream function") {
    const auto u = bump_vortex({0.5, 0.5}, 0.2, 1.0);
    // Richardson-extrapolated central differences at steps h and h / 2.
    auto curl_div = [&u](const Vec2& x, double h) {
        const Vec2 ex = u.u(x + Vec2{h, 0}) - u.u(x - Vec2{h, 0});
        const Vec2 ey = u.u(x + Vec2{0, h}) - u.u(x - Vec2{0, h});
        return Vec2{(ex.y - ey.x) / (2 * h), (ex.x + ey.y) / (2 * h)};
    };
    for (const Vec2 x : {Vec2{0.5, 0.55}, Vec2{0.42, 0.5}, Vec2{0.6, 0.61}}) {
        const Vec2 c = (4.0 * curl_div(x, 5e-4) - curl_div(x, 1e-3)) * (1.0 / 3.0);
        CHECK(u.omega(x) == doctest::Approx(c.x).epsilon(1e-6));
        CHECK(std::abs(c.y) <= 1e-6 * std::max(1.0, std::abs(c.x)));
    }
    CHECK(u.omega({0.5, 0.75}) == 0.0);
}
