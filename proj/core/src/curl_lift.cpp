#include <algorithm>
#include <cmath>
#include <sstream>

#include "layerctl/curl_lift.hpp"
#include "layerctl/errors.hpp"
#include "layerctl/quadrature.hpp"
#include "layerctl/smooth.hpp"

namespace layerctl::lift {

namespace {

// Third-order reflection weights for the points s - d, s - 2d, s - 3d.
constexpr double refl_c[3] = {6.0, -8.0, 3.0};

void check_grid(std::size_t n, std::size_t size, std::size_t per_node, const char* who) {
    if (n < 4 || n % 2 != 0) throw PreconditionError(std::string(who) + ": n must be even and at least 4");
    const std::size_t nodes = per_node == 3 ? (n + 1) * (n + 1) * (n + 1) : (n + 1) * (n + 1);
    if (size != nodes * per_node) throw PreconditionError(std::string(who) + ": sample count does not match grid");
}

/// Last interior row index for a boundary patch.
std::size_t interior_rows(std::size_t n, double extent) {
    if (!(extent > 0.0) || extent > 1.0) throw PreconditionError("lift: interior_extent must lie in (0, 1]");
    const auto r = static_cast<std::size_t>(std::floor(extent * static_cast<double>(n) + 1e-9));
    if (r < 3) throw PreconditionError("lift: boundary patch has fewer than three interior rows");
    return std::min(r, n);
}

/// Extended value for offset d > 0 beyond the last interior row r, given samples along the line.
template <class Get>
double reflect(const Get& get, std::size_t r, std::size_t d) {
    if (3 * d > r) return 0.0;
    const double taper = 1.0 - smooth::step(3.0 * static_cast<double>(d) / static_cast<double>(r));
    double v = 0.0;
    for (std::size_t k = 0; k < 3; ++k) v += refl_c[k] * get(r - (k + 1) * d);
    return taper * v;
}

/// Derivative of samples f(0..n) at index i with spacing h; second order, one-sided at the ends.
template <class Get>
double diff2(const Get& f, std::size_t i, std::size_t n, double h) {
    if (i == 0) return (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h);
    if (i == n) return (3.0 * f(n) - 4.0 * f(n - 1) + f(n - 2)) / (2.0 * h);
    return (f(i + 1) - f(i - 1)) / (2.0 * h);
}

double take_and_zero(double& v) {
    const double a = std::abs(v);
    v = 0.0;
    return a;
}

}  // namespace

LiftResult2 lift2d(const PatchField2& w, const LiftOptions& opt) {
    check_grid(w.n, w.values.size(), 1, "lift2d");
    const std::size_t n = w.n, N = n + 1;
    const double h = w.h();
    LiftResult2 r;
    r.n = n;
    r.w_used = w.values;
    auto& W = r.w_used;
    if (w.kind == PatchKind::boundary) {
        const std::size_t rows = interior_rows(n, w.interior_extent);
        for (std::size_t j = rows + 1; j <= n; ++j)
            for (std::size_t i = 0; i <= n; ++i)
                W[j * N + i] = reflect([&](std::size_t jj) { return w.values[jj * N + i]; }, rows, j - rows);
    }

    // Row-wise cumulative integrals in x1; a(x2) is the full-row value.
    std::vector<double> C(N * N);
    for (std::size_t j = 0; j < N; ++j)
        quad::cumulative_simpson_strided(W.data() + j * N, N, 1, h, C.data() + j * N, 1);
    r.a.resize(N);
    for (std::size_t j = 0; j < N; ++j) r.a[j] = C[j * N + n];
    r.b = quad::cumulative_simpson(r.a, h);
    r.average = r.b[n];
    if (w.kind == PatchKind::inner && std::abs(r.average) > opt.average_tol) {
        std::ostringstream os;
        os << "lift2d: inner patch field has nonzero average " << r.average;
        throw DefectError(os.str(), r.average);
    }

    r.xi1.assign(N * N, 0.0);
    r.xi2.assign(N * N, 0.0);
    for (std::size_t j = 0; j < N; ++j)
        for (std::size_t i = 0; i < N; ++i) {
            const double x1 = static_cast<double>(i) * h;
            r.xi1[j * N + i] = -smooth::c_step_d1(x1) * r.b[j];
            r.xi2[j * N + i] = -smooth::c_step(x1) * r.a[j] + C[j * N + i];
        }

    // Exact support: zero the rows that must vanish and keep the largest value removed.
    double defect = 0.0;
    auto mask = [&](std::size_t k) {
        defect = std::max(defect, take_and_zero(r.xi1[k]));
        defect = std::max(defect, take_and_zero(r.xi2[k]));
    };
    for (std::size_t t = 0; t < N; ++t) {
        mask(t);                  // x2 = 0
        mask(t * N);              // x1 = 0
        mask(t * N + n);          // x1 = 1
        if (w.kind == PatchKind::inner) mask(n * N + t);  // x2 = 1
    }
    r.support_defect = defect;
    return r;
}

double relative_divergence(const PatchField3& w) {
    check_grid(w.n, w.values.size(), 3, "relative_divergence");
    const std::size_t n = w.n;
    const double h = w.h();
    const std::size_t imax = w.kind == PatchKind::boundary ? interior_rows(n, w.interior_extent) : n;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 1; k < n; ++k)
        for (std::size_t j = 1; j < n; ++j)
            for (std::size_t i = 1; i < imax; ++i) {
                const double d1 = (w.at(i + 1, j, k, 0) - w.at(i - 1, j, k, 0)) / (2.0 * h);
                const double d2 = (w.at(i, j + 1, k, 1) - w.at(i, j - 1, k, 1)) / (2.0 * h);
                const double d3 = (w.at(i, j, k + 1, 2) - w.at(i, j, k - 1, 2)) / (2.0 * h);
                num = std::max(num, std::abs(d1 + d2 + d3));
                den = std::max(den, std::abs(d1) + std::abs(d2) + std::abs(d3));
            }
    return den > 0.0 ? num / den : 0.0;
}

LiftResult3 lift3d(const PatchField3& w, const LiftOptions& opt) {
    check_grid(w.n, w.values.size(), 3, "lift3d");
    const std::size_t n = w.n, N = n + 1, NN = N * N;
    const double h = w.h();
    LiftResult3 r;
    r.n = n;
    r.divergence = relative_divergence(w);
    if (r.divergence > opt.div_tol) {
        std::ostringstream os;
        os << "lift3d: field is not divergence free, relative divergence " << r.divergence;
        throw DefectError(os.str(), r.divergence);
    }
    r.w_used = w.values;
    auto& W = r.w_used;
    auto at = [&](std::size_t i, std::size_t j, std::size_t k, int c) -> double& {
        return W[3 * w.idx(i, j, k) + static_cast<std::size_t>(c)];
    };
    if (w.kind == PatchKind::boundary) {
        const std::size_t rows = interior_rows(n, w.interior_extent);
        for (std::size_t k = 0; k < N; ++k)
            for (std::size_t j = 0; j < N; ++j)
                for (int c = 0; c < 3; ++c)
                    for (std::size_t i = rows + 1; i <= n; ++i)
                        at(i, j, k, c) =
                            reflect([&](std::size_t ii) { return w.at(ii, j, k, c); }, rows, i - rows);
    }

    // Cumulative integrals of w2 and w3 along x1.
    std::vector<double> C2(N * NN), C3(N * NN);
    for (std::size_t k = 0; k < N; ++k)
        for (std::size_t j = 0; j < N; ++j) {
            const std::size_t base = w.idx(0, j, k);
            quad::cumulative_simpson_strided(W.data() + 3 * base + 1, N, 3, h, C2.data() + base, 1);
            quad::cumulative_simpson_strided(W.data() + 3 * base + 2, N, 3, h, C3.data() + base, 1);
        }
    r.W2.resize(NN);
    r.W3.resize(NN);
    for (std::size_t k = 0; k < N; ++k)
        for (std::size_t j = 0; j < N; ++j) {
            r.W2[k * N + j] = -C3[w.idx(n, j, k)];
            r.W3[k * N + j] = C2[w.idx(n, j, k)];
        }
    r.xi.assign(3 * N * NN, 0.0);
    r.a.resize(N);
    for (std::size_t i = 0; i < N; ++i) r.a[i] = smooth::c_step_d1(static_cast<double>(i) * h);

    if (w.kind == PatchKind::inner) {
        r.h.resize(NN);
        r.k_profile.resize(N);
        for (std::size_t k = 0; k < N; ++k) {
            quad::cumulative_simpson_strided(r.W2.data() + k * N, N, 1, h, r.h.data() + k * N, 1);
            r.k_profile[k] = -r.h[k * N + n];
            r.k_max = std::max(r.k_max, std::abs(r.k_profile[k]));
        }
        if (r.k_max > opt.k_tol) {
            std::ostringstream os;
            os << "lift3d: obstruction k(x3) does not vanish, max " << r.k_max;
            throw DefectError(os.str(), r.k_max);
        }
        for (std::size_t k = 0; k < N; ++k)
            for (std::size_t j = 0; j < N; ++j)
                for (std::size_t i = 0; i < N; ++i) {
                    const std::size_t id = w.idx(i, j, k);
                    const double c = smooth::c_step(static_cast<double>(i) * h);
                    r.xi[3 * id + 0] = r.a[i] * r.h[k * N + j];
                    r.xi[3 * id + 1] = c * r.W2[k * N + j] + C3[id];
                    r.xi[3 * id + 2] = c * r.W3[k * N + j] - C2[id];
                }
    } else {
        for (std::size_t id = 0; id < N * NN; ++id) {
            r.xi[3 * id + 1] = C3[id];
            r.xi[3 * id + 2] = -C2[id];
        }
    }

    double defect = 0.0;
    auto mask = [&](std::size_t i, std::size_t j, std::size_t k) {
        for (int c = 0; c < 3; ++c)
            defect = std::max(defect, take_and_zero(r.xi[3 * w.idx(i, j, k) + static_cast<std::size_t>(c)]));
    };
    for (std::size_t p = 0; p < N; ++p)
        for (std::size_t q = 0; q < N; ++q) {
            mask(0, p, q);
            if (w.kind == PatchKind::inner) mask(n, p, q);
            mask(p, 0, q);
            mask(p, n, q);
            mask(p, q, 0);
            mask(p, q, n);
        }
    r.support_defect = defect;
    return r;
}

double curl_error(const PatchField2& w, const LiftResult2& r) {
    const std::size_t n = r.n, N = n + 1;
    const double h = 1.0 / static_cast<double>(n);
    const std::size_t jmax = w.kind == PatchKind::boundary ? interior_rows(n, w.interior_extent) : n;
    double err = 0.0;
    for (std::size_t j = 0; j <= jmax; ++j)
        for (std::size_t i = 0; i < N; ++i) {
            const double d1 = diff2([&](std::size_t ii) { return r.xi2[j * N + ii]; }, i, n, h);
            const double d2 = diff2([&](std::size_t jj) { return r.xi1[jj * N + i]; }, j, n, h);
            err = std::max(err, std::abs(d1 - d2 - w.values[j * N + i]));
        }
    return err;
}

double curl_error(const PatchField3& w, const LiftResult3& r) {
    const std::size_t n = r.n, N = n + 1;
    const double h = 1.0 / static_cast<double>(n);
    const std::size_t imax = w.kind == PatchKind::boundary ? interior_rows(n, w.interior_extent) : n;
    auto xi = [&](std::size_t i, std::size_t j, std::size_t k, int c) {
        return r.xi[3 * w.idx(i, j, k) + static_cast<std::size_t>(c)];
    };
    double err = 0.0;
    for (std::size_t k = 0; k < N; ++k)
        for (std::size_t j = 0; j < N; ++j)
            for (std::size_t i = 0; i <= imax; ++i) {
                auto dx = [&](int c) { return diff2([&](std::size_t m) { return xi(m, j, k, c); }, i, n, h); };
                auto dy = [&](int c) { return diff2([&](std::size_t m) { return xi(i, m, k, c); }, j, n, h); };
                auto dzz = [&](int c) { return diff2([&](std::size_t m) { return xi(i, j, m, c); }, k, n, h); };
                const double c1 = dy(2) - dzz(1), c2 = dzz(0) - dx(2), c3 = dx(1) - dy(0);
                err = std::max({err, std::abs(c1 - w.at(i, j, k, 0)), std::abs(c2 - w.at(i, j, k, 1)),
                                std::abs(c3 - w.at(i, j, k, 2))});
            }
    return err;
}

double support_violation(const LiftResult2& r, PatchKind kind) {
    const std::size_t n = r.n, N = n + 1;
    double v = 0.0;
    for (std::size_t t = 0; t < N; ++t) {
        std::vector<std::size_t> ids{t, t * N, t * N + n};
        if (kind == PatchKind::inner) ids.push_back(n * N + t);
        for (std::size_t k : ids) v = std::max({v, std::abs(r.xi1[k]), std::abs(r.xi2[k])});
    }
    return v;
}

double support_violation(const LiftResult3& r, PatchKind kind) {
    const std::size_t n = r.n, N = n + 1;
    auto id = [&](std::size_t i, std::size_t j, std::size_t k) { return (k * N + j) * N + i; };
    double v = 0.0;
    auto probe = [&](std::size_t k) {
        for (int c = 0; c < 3; ++c) v = std::max(v, std::abs(r.xi[3 * k + static_cast<std::size_t>(c)]));
    };
    for (std::size_t p = 0; p < N; ++p)
        for (std::size_t q = 0; q < N; ++q) {
            probe(id(0, p, q));
            if (kind == PatchKind::inner) probe(id(n, p, q));
            probe(id(p, 0, q));
            probe(id(p, n, q));
            probe(id(p, q, 0));
            probe(id(p, q, n));
        }
    return v;
}

double PointwiseLift2::a(double x2) const {
    return quad::adaptive([&](double s) { return w(s, x2); }, 0.0, 1.0, 1e-15);
}

double PointwiseLift2::b(double x2) const {
    if (x2 <= 0.0) return 0.0;
    return quad::adaptive([&](double s) { return a(s); }, 0.0, x2, 1e-15);
}

Vec2 PointwiseLift2::xi(double x1, double x2) const {
    const double av = a(x2);
    const double partial = x1 > 0.0 ? quad::adaptive([&](double s) { return w(s, x2); }, 0.0, x1, 1e-15) : 0.0;
    return {-smooth::c_step_d1(x1) * b(x2), -smooth::c_step(x1) * av + partial};
}

double PointwiseLift2::curl(double x1, double x2) const {
    const double ca = smooth::c_step_d1(x1) * a(x2);
    return (-ca + w(x1, x2)) - (-ca);
}

csv::Table patch_table(const PatchField2& w, const LiftResult2* r) {
    std::vector<std::string> cols{"x1", "x2", "w"};
    if (r) cols.insert(cols.end(), {"xi1", "xi2"});
    csv::Table t(cols);
    const std::size_t N = w.n + 1;
    for (std::size_t j = 0; j < N; ++j)
        for (std::size_t i = 0; i < N; ++i) {
            std::vector<double> row{static_cast<double>(i) * w.h(), static_cast<double>(j) * w.h(), w.at(i, j)};
            if (r) {
                row.push_back(r->xi1[j * N + i]);
                row.push_back(r->xi2[j * N + i]);
            }
            t.add_row(std::move(row));
        }
    return t;
}

csv::Table patch_table(const PatchField3& w, const LiftResult3* r) {
    std::vector<std::string> cols{"x1", "x2", "x3", "w1", "w2", "w3"};
    if (r) cols.insert(cols.end(), {"xi1", "xi2", "xi3"});
    csv::Table t(cols);
    const std::size_t N = w.n + 1;
    const double h = w.h();
    for (std::size_t k = 0; k < N; ++k)
        for (std::size_t j = 0; j < N; ++j)
            for (std::size_t i = 0; i < N; ++i) {
                std::vector<double> row{static_cast<double>(i) * h, static_cast<double>(j) * h,
                                        static_cast<double>(k) * h};
                for (int c = 0; c < 3; ++c) row.push_back(w.at(i, j, k, c));
                if (r)
                    for (std::size_t c = 0; c < 3; ++c) row.push_back(r->xi[3 * w.idx(i, j, k) + c]);
                t.add_row(std::move(row));
            }
    return t;
}

}  // namespace layerctl::lift
