#include <cmath>
#include <numbers>
#include <memory>
#include <random>

#include "layerctl/curl_lift.hpp"
#include "layerctl/errors.hpp"

namespace layerctl::lift {

namespace {

constexpr double support_half_width = 0.35;

constexpr int envelope_power = 6;

/// rho(x) cos(k pi (x - 1/2) + phase), rho = (1 - r^2)^6 with r = (x - 1/2) / 0.35 (C^5, compact).
struct Factor {
    double k = 1.0;
    double phase = 0.0;

    static double rho(double r) {
        const double q = 1.0 - r * r;
        return q > 0.0 ? std::pow(q, envelope_power) : 0.0;
    }
    static double rho_d(double r) {
        const double q = 1.0 - r * r;
        return q > 0.0 ? -2.0 * envelope_power * r * std::pow(q, envelope_power - 1) : 0.0;
    }
    double value(double x) const {
        const double s = x - 0.5;
        return rho(s / support_half_width) * std::cos(k * std::numbers::pi * s + phase);
    }
    double d1(double x) const {
        const double s = x - 0.5;
        const double r = s / support_half_width;
        const double arg = k * std::numbers::pi * s + phase;
        return rho_d(r) / support_half_width * std::cos(arg) - rho(r) * k * std::numbers::pi * std::sin(arg);
    }
};

struct Term {
    double amp = 0.0;
    Factor f[3];
};

Factor random_factor(std::mt19937_64& rng, bool symmetric) {
    std::uniform_int_distribution<int> kd(0, 2);
    std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
    Factor f;
    f.k = static_cast<double>(2 * kd(rng));
    f.phase = symmetric ? 0.0 : ph(rng);
    return f;
}

double sum_value(const std::vector<Term>& terms, const double* x, int dim, int diff_axis) {
    double s = 0.0;
    for (const Term& t : terms) {
        double p = t.amp;
        for (int a = 0; a < dim; ++a) p *= a == diff_axis ? t.f[a].d1(x[a]) : t.f[a].value(x[a]);
        s += p;
    }
    return s;
}

}  // namespace

TestField sample_test_field(int dim, std::uint64_t seed, int modes, std::size_t n) {
    if (dim != 2 && dim != 3) throw PreconditionError("sample_test_field: dim must be 2 or 3");
    if (modes < 1) throw PreconditionError("sample_test_field: modes must be positive");
    if (n < 4 || n % 2 != 0) throw PreconditionError("sample_test_field: n must be even and at least 4");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    auto make_terms = [&](int sym_axis) {
        std::vector<Term> terms(static_cast<std::size_t>(modes));
        for (Term& t : terms) {
            t.amp = amp(rng);
            for (int a = 0; a < dim; ++a) t.f[a] = random_factor(rng, a == sym_axis);
        }
        return terms;
    };

    TestField out;
    out.dim = dim;
    const double h = 1.0 / static_cast<double>(n);
    const std::size_t N = n + 1;
    if (dim == 2) {
        // w = d1 A + d2 B; the differentiated factor is even about 1/2, so its derivative is odd.
        auto A = std::make_shared<std::vector<Term>>(make_terms(0));
        auto B = std::make_shared<std::vector<Term>>(make_terms(1));
        out.w2 = [A, B](double x1, double x2) {
            const double x[2] = {x1, x2};
            return sum_value(*A, x, 2, 0) + sum_value(*B, x, 2, 1);
        };
        out.f2.n = n;
        out.f2.values.resize(N * N);
        for (std::size_t j = 0; j < N; ++j)
            for (std::size_t i = 0; i < N; ++i)
                out.f2.values[j * N + i] = out.w2(static_cast<double>(i) * h, static_cast<double>(j) * h);
        return out;
    }

    // w = curl psi with psi_1 even in x2 and psi_2 even in x1, which makes k(x3) vanish.
    auto P1 = std::make_shared<std::vector<Term>>(make_terms(1));
    auto P2 = std::make_shared<std::vector<Term>>(make_terms(0));
    auto P3 = std::make_shared<std::vector<Term>>(make_terms(-1));
    out.w3 = [P1, P2, P3](double x1, double x2, double x3) {
        const double x[3] = {x1, x2, x3};
        auto d = [&](const std::vector<Term>& P, int axis) { return sum_value(P, x, 3, axis); };
        return std::array<double, 3>{d(*P3, 1) - d(*P2, 2), d(*P1, 2) - d(*P3, 0), d(*P2, 0) - d(*P1, 1)};
    };
    out.f3.n = n;
    out.f3.values.resize(3 * N * N * N);
    for (std::size_t k = 0; k < N; ++k)
        for (std::size_t j = 0; j < N; ++j)
            for (std::size_t i = 0; i < N; ++i) {
                const auto v = out.w3(static_cast<double>(i) * h, static_cast<double>(j) * h,
                                      static_cast<double>(k) * h);
                for (std::size_t c = 0; c < 3; ++c) out.f3.values[3 * out.f3.idx(i, j, k) + c] = v[c];
            }
    return out;
}

}  // namespace layerctl::lift
