#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace transonic::fft {
namespace {

// The FFTW planner is not thread safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct Plan2D {
    int nx, ny;
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;

    Plan2D(int nx_, int ny_) : nx(nx_), ny(ny_) {
        std::lock_guard lock(planner_mutex());
        const std::size_t n = static_cast<std::size_t>(nx) * ny;
        const std::size_t nh = static_cast<std::size_t>(ny) * (nx / 2 + 1);
        real = fftw_alloc_real(n);
        spec = fftw_alloc_complex(nh);
        fwd = fftw_plan_dft_r2c_2d(ny, nx, real, spec, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_2d(ny, nx, spec, real, FFTW_ESTIMATE);
    }
    ~Plan2D() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(real);
        fftw_free(spec);
    }
    Plan2D(const Plan2D&) = delete;
    Plan2D& operator=(const Plan2D&) = delete;
};

Plan2D& plan_for(const Grid2D& g) {
    thread_local std::map<std::pair<int, int>, std::unique_ptr<Plan2D>> cache;
    auto& slot = cache[{g.nx, g.ny}];
    if (!slot) slot = std::make_unique<Plan2D>(g.nx, g.ny);
    return *slot;
}

}  // namespace

void forward(const Grid2D& g, std::span<const double> in, std::span<cplx> out) {
    Plan2D& p = plan_for(g);
    std::copy(in.begin(), in.end(), p.real);
    fftw_execute(p.fwd);
    const auto* s = reinterpret_cast<const cplx*>(p.spec);
    std::copy(s, s + g.spectral_size(), out.begin());
}

void inverse(const Grid2D& g, std::span<const cplx> in, std::span<double> out) {
    Plan2D& p = plan_for(g);
    std::copy(in.begin(), in.end(), reinterpret_cast<cplx*>(p.spec));
    fftw_execute(p.bwd);
    const double scale = 1.0 / static_cast<double>(g.size());
    std::transform(p.real, p.real + g.size(), out.begin(), [scale](double v) { return v * scale; });
}

}  // namespace transonic::fft
