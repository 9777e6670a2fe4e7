#include "phi4lab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

// FFTW planner state is global and not thread-safe; plans are created once
// per (dim, n, direction) under a lock and then executed re-entrantly on
// caller buffers via fftw_execute_dft (safe per FFTW docs). Plans are built
// with FFTW_ESTIMATE | FFTW_UNALIGNED so execution on std::vector storage is
// legal and planning never touches the buffers.

namespace phi4lab {
namespace {

struct PlanKey {
    int dim;
    int n;
    int sign;
    bool operator<(const PlanKey& o) const {
        if (dim != o.dim) return dim < o.dim;
        if (n != o.n) return n < o.n;
        return sign < o.sign;
    }
};

std::mutex plan_mutex;
std::map<PlanKey, fftw_plan>& plan_cache() {
    static std::map<PlanKey, fftw_plan> cache;
    return cache;
}

fftw_plan get_plan(const TorusGrid& g, int sign) {
    PlanKey key{g.dim, g.points_per_axis, sign};
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto& cache = plan_cache();
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    int total = g.total_points();
    std::vector<std::complex<double>> probe(total);
    int dims[3] = {g.points_per_axis, g.points_per_axis, g.points_per_axis};
    fftw_plan plan = fftw_plan_dft(
        g.dim, dims, reinterpret_cast<fftw_complex*>(probe.data()),
        reinterpret_cast<fftw_complex*>(probe.data()), sign,
        FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan) throw std::runtime_error("fftw plan creation failed");
    cache.emplace(key, plan);
    return plan;
}

}  // namespace

std::vector<std::complex<double>> dft(const TorusGrid& g,
                                      std::span<const double> values) {
    int total = g.total_points();
    if (static_cast<int>(values.size()) != total)
        throw std::invalid_argument("dft: values size does not match grid");
    std::vector<std::complex<double>> buf(values.begin(), values.end());
    fftw_plan plan = get_plan(g, FFTW_FORWARD);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(buf.data()),
                     reinterpret_cast<fftw_complex*>(buf.data()));
    double scale = 1.0 / total;
    for (auto& c : buf) c *= scale;
    return buf;
}

std::vector<double> idft(const TorusGrid& g,
                         std::span<const std::complex<double>> coeffs) {
    int total = g.total_points();
    if (static_cast<int>(coeffs.size()) != total)
        throw std::invalid_argument("idft: coeff size does not match grid");
    std::vector<std::complex<double>> buf(coeffs.begin(), coeffs.end());
    fftw_plan plan = get_plan(g, FFTW_BACKWARD);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(buf.data()),
                     reinterpret_cast<fftw_complex*>(buf.data()));
    std::vector<double> out(total);
    for (int i = 0; i < total; ++i) out[i] = buf[i].real();
    return out;
}

}  // namespace phi4lab
