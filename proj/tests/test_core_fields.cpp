#include <cmath>
#include <random>

#include "doctest.h"
#include "layerctl/errors.hpp"
#include "layerctl/fields.hpp"
#include "layerctl/smooth.hpp"

using namespace layerctl;

namespace {

Domain channel() { return Domain::strip({0.0, 1.0, 0.0, 1.0}, {-0.05, 2.3, 0.0, 1.0}); }

ReferenceFlow uniform(double D = 1.2) { return make_reference_flow("uniform-channel", {{"T", 1.0}, {"displacement", D}}); }

}  // namespace

TEST_CASE("phi vanishes on both walls and equals the distance in the band") {
    const Domain d = channel();
    for (double x : {-0.05, 0.3, 1.7, 2.3}) {
        CHECK(d.phi({x, 0.0}) == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(d.phi({x, 1.0}) == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(d.phi({x, 0.1}) == doctest::Approx(0.1));
        CHECK(d.phi({x, 0.93}) == doctest::Approx(0.07));
    }
    CHECK(d.phi({0.5, 0.5}) > d.phi({0.5, 0.1}));
}

TEST_CASE("normal is the outward unit normal on the walls") {
    const Domain d = channel();
    const Vec2 nb = d.normal({0.4, 0.0});
    const Vec2 nt = d.normal({0.4, 1.0});
    CHECK(nb.x == 0.0);
    CHECK(nb.y == doctest::Approx(-1.0));
    CHECK(nt.y == doctest::Approx(1.0));
    CHECK_THROWS_AS(d.normal({0.4, 1.5}), DomainError);
}

TEST_CASE("grad phi agrees with centered differences") {
    const Domain d = channel();
    const double h = 1e-6;
    for (double y : {0.05, 0.22, 0.31, 0.5, 0.77}) {
        const Vec2 x{0.7, y};
        const double fd = (d.phi({x.x, y + h}) - d.phi({x.x, y - h})) / (2 * h);
        CHECK(d.grad_phi(x).y == doctest::Approx(fd).epsilon(1e-7));
        const double fd2 = (d.grad_phi({x.x, y + h}).y - d.grad_phi({x.x, y - h}).y) / (2 * h);
        CHECK(d.hess_phi(x)(1, 1) == doctest::Approx(fd2).epsilon(1e-5).scale(1.0));
    }
}

TEST_CASE("channel profile integrates to the displacement") {
    const double T = 1.3, D = 0.9;
    // Closed form: int h = D step(t / T).
    for (double t : {0.0, 0.2, 0.65, 1.0, 1.3}) CHECK(channel_displacement(t, T, D) == doctest::Approx(D * smooth::step(t / T)));
    CHECK(channel_profile(0.0, T, D) == 0.0);
    CHECK(channel_profile(T, T, D) == 0.0);
}

TEST_CASE("shipped flows are tangent to the walls and vanish at the endpoints") {
    const Domain d = channel();
    for (const char* name : {"uniform-channel", "perturbed-channel", "zero"}) {
        const auto flow = make_reference_flow(name, {{"T", 1.0}});
        const auto inv = check_flow_invariants(flow, d, 16);
        CHECK(inv.tangency <= 1e-12);
        CHECK(inv.endpoints <= 1e-12);
    }
    CHECK_THROWS_AS(make_reference_flow("vortex-street", {}), PreconditionError);
}

TEST_CASE("flow map of the uniform channel is a rigid shift") {
    const auto flow = uniform();
    const Vec2 x0{0.1, 0.4};
    for (double s : {0.25, 0.5, 1.0}) {
        const Vec2 y = flow_map(flow, 0.0, s, x0, 1e-12);
        CHECK(y.x == doctest::Approx(x0.x + 1.2 * smooth::step(s)).epsilon(1e-10));
        CHECK(y.y == doctest::Approx(x0.y));
    }
}

TEST_CASE("flow map composes and inverts") {
    const auto flow = make_reference_flow("perturbed-channel", {{"T", 1.0}, {"kappa", 0.3}});
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    for (int k = 0; k < 8; ++k) {
        const Vec2 x{u(rng), u(rng)};
        const Vec2 y = flow_map(flow, 0.2, 0.7, x, 1e-12);
        const Vec2 back = flow_map(flow, 0.7, 0.2, y, 1e-12);
        CHECK(norm(back - x) <= 1e-9);
        const Vec2 z = flow_map(flow, 0.7, 0.9, y, 1e-12);
        CHECK(norm(z - flow_map(flow, 0.2, 0.9, x, 1e-12)) <= 1e-9);
    }
}

TEST_CASE("fixed-step map converges at fourth order") {
    const auto flow = make_reference_flow("perturbed-channel", {{"T", 1.0}, {"kappa", 0.3}});
    const Vec2 x{0.3, 0.4};
    const Vec2 ref = flow_map(flow, 0.0, 1.0, x, 1e-13);
    const double e1 = norm(flow_map_fixed(flow, 0.0, 1.0, x, 20) - ref);
    const double e2 = norm(flow_map_fixed(flow, 0.0, 1.0, x, 40) - ref);
    CHECK(std::log2(e1 / e2) == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("verify_flushing exit points lie outside by the margin") {
    const Domain d = channel();
    const auto flow = uniform();
    std::vector<Vec2> grid;
    for (int i = 0; i < 6; ++i) grid.push_back({-0.04 + 0.2 * i, 0.5});
    const auto rep = verify_flushing(flow, d, grid, 0.05);
    CHECK(rep.success);
    for (const auto& s : rep.samples) {
        REQUIRE(s.exit_time);
        CHECK(d.distance_to_physical(s.trajectory.back().second) >= 0.05);
    }
    // Too small a displacement leaves the leftmost point inside.
    const auto weak = verify_flushing(uniform(0.5), d, grid, 0.05);
    CHECK_FALSE(weak.success);
    CHECK_THROWS_AS(verify_flushing(flow, d, grid, 0.0), PreconditionError);
}

TEST_CASE("support growth is the identity for a wall-parallel flow") {
    const Domain d = channel();
    for (double delta : {0.0, 0.03, 0.1}) CHECK(support_growth(uniform(), d, delta, 8, 16) == doctest::Approx(delta).epsilon(1e-12).scale(1.0));
}

TEST_CASE("partition weights sum to one and bumps vanish outside the balls") {
    const Domain d = channel();
    const auto flow = uniform();
    std::vector<Box> patches;
    for (double x = 1.1; x <= 2.3 + 1e-9; x += 0.15)
        for (double y = -0.15; y <= 0.85 + 1e-9; y += 0.15) patches.push_back({x, x + 0.3, y, y + 0.3});
    const Partition p = build_partition(flow, d, patches, 0.05);
    REQUIRE(!p.balls.empty());
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(-0.05, 2.3), uy(0.0, 1.0);
    for (int k = 0; k < 50; ++k) {
        const Vec2 x{ux(rng), uy(rng)};
        double s = 0.0;
        for (double w : p.weights(x)) {
            CHECK(w >= 0.0);
            s += w;
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    const Ball& b = p.balls.front();
    CHECK(p.bump(0, b.center + Vec2{b.radius, 0.0}) == 0.0);
    CHECK(p.bump(0, b.center) == 1.0);
    // Windows stay inside (0, T) and beta switches from 1 to 0 across them.
    for (std::size_t l = 0; l < p.balls.size(); ++l) {
        CHECK(p.times[l] - p.window > 0.0);
        CHECK(p.times[l] + p.window < p.T);
        CHECK(p.beta(l, p.times[l] - p.window) == 1.0);
        CHECK(p.beta(l, p.times[l] + p.window) == 0.0);
    }
}

TEST_CASE("partition rejects bad coverage") {
    PartitionOptions o;
    o.coverage = 1.2;
    CHECK_THROWS_AS(build_partition(uniform(), channel(), {{1.1, 1.4, 0.0, 0.3}}, 0.05, o), PreconditionError);
}

TEST_CASE("trajectory CSV columns") {
    const Domain d = channel();
    const auto r = integrate_flow(uniform(), 0.0, 1.0, {0.2, 0.5}, 1e-10, &d);
    const std::string csv = trajectory_csv(r.sample, d);
    CHECK(csv.rfind("t,x1,x2,phi\n", 0) == 0);
}
