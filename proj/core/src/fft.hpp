#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <vector>

namespace layerctl::detail {

/// Serializes FFTW planner calls, which are not reentrant.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// In-place real-to-real transform of kind REDFT00 (DCT-I) or RODFT00 (DST-I), unnormalized.
inline void r2r(std::vector<double>& data, fftw_r2r_kind kind) {
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_r2r_1d(static_cast<int>(data.size()), data.data(), data.data(), kind, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
}

/// Forward real-to-complex transform, N/2 + 1 coefficients, unnormalized.
inline std::vector<std::complex<double>> r2c(std::vector<double> in) {
    const int n = static_cast<int>(in.size());
    std::vector<std::complex<double>> out(in.size() / 2 + 1);
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
    return out;
}

/// Inverse complex-to-real transform of length n, unnormalized.
inline std::vector<double> c2r(std::vector<std::complex<double>> in, std::size_t n) {
    std::vector<double> out(n);
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()), out.data(),
                                    FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
    return out;
}

/// 2D DCT-I (REDFT00 in both directions) on a row-major ny-by-nx array, in place.
inline void r2r_2d(std::vector<double>& data, int ny, int nx, fftw_r2r_kind kind) {
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_r2r_2d(ny, nx, data.data(), data.data(), kind, kind, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
}

}  // namespace layerctl::detail
