#include "vortexlab/kernels.hpp"

#include <cmath>
#include <cstring>
#include <mutex>

#include "fft_util.hpp"
#include "vortexlab/errors.hpp"

namespace vlab {

// ------------------------------------------------------------------- FFT

namespace {
std::mutex g_plan_mutex; // FFTW's planner is not thread-safe
}

Fft2::Fft2(int n) : n_(n) {
    rbuf_ = fftw_alloc_real(std::size_t(n) * n);
    cbuf_ = fftw_alloc_complex(std::size_t(n) * (n / 2 + 1));
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    fwd_ = fftw_plan_dft_r2c_2d(n, n, rbuf_, cbuf_, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_2d(n, n, cbuf_, rbuf_, FFTW_ESTIMATE);
}

Fft2::~Fft2() {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(rbuf_);
    fftw_free(cbuf_);
}

void Fft2::forward(const double* in, std::complex<double>* out) {
    std::memcpy(rbuf_, in, sizeof(double) * std::size_t(n_) * n_);
    fftw_execute(fwd_);
    double scale = 1.0 / (double(n_) * n_);
    for (int i = 0; i < spec_size(); ++i)
        out[i] = std::complex<double>(cbuf_[i][0], cbuf_[i][1]) * scale;
}

void Fft2::backward(const std::complex<double>* in, double* out) {
    for (int i = 0; i < spec_size(); ++i) {
        cbuf_[i][0] = in[i].real();
        cbuf_[i][1] = in[i].imag();
    }
    fftw_execute(bwd_);
    std::memcpy(out, rbuf_, sizeof(double) * std::size_t(n_) * n_);
}

// --------------------------------------------------------------- kernels

Vec2 biot_savart(Vec2 x) {
    double r2 = norm2(x);
    if (r2 == 0.0) throw SimError("Biot-Savart kernel is singular at x = 0");
    return {-x.y / r2, x.x / r2};
}

Vec2 biot_savart(Vec2 x, const KernelSpec& spec) {
    if (spec.exact()) return biot_savart(x);
    double r = norm(x);
    if (r >= spec.epsilon) {
        double r2 = r * r;
        return {-x.y / r2, x.x / r2};
    }
    if (r == 0.0) return {0.0, 0.0};
    double s = r * spec.epsilon;
    return {-x.y / s, x.x / s};
}

// ------------------------------------------------------------ DriftField

double DriftField::max_speed() const {
    double m = 0.0;
    for (std::size_t i = 0; i < ux.size(); ++i)
        m = std::max(m, ux[i] * ux[i] + uy[i] * uy[i]);
    return std::sqrt(m);
}

DriftField drift_from_field(const VorticityField& w, KernelNorm norm) {
    w.validate();
    int n = w.n;
    double L = w.box_length;
    double h = L / n;
    Fft2 fft(n);
    int nk = n / 2 + 1;
    std::vector<std::complex<double>> what(fft.spec_size());
    fft.forward(w.values.data(), what.data());

    std::vector<std::complex<double>> uxh(fft.spec_size()),
        uyh(fft.spec_size());
    double kb = 2.0 * M_PI / L;
    const std::complex<double> I(0.0, 1.0);
    for (int iy = 0; iy < n; ++iy) {
        int jy = iy <= n / 2 ? iy : iy - n;
        double ky = kb * jy;
        for (int jx = 0; jx < nk; ++jx) {
            double kx = kb * jx;
            std::size_t idx = std::size_t(iy) * nk + jx;
            double k2 = kx * kx + ky * ky;
            if (k2 == 0.0) {
                uxh[idx] = uyh[idx] = 0.0; // mean mode dropped: mean-free part
                continue;
            }
            std::complex<double> psi = -what[idx] / k2;
            // difference-consistent wavenumbers: the centered-difference
            // divergence of (ux, uy) cancels in exact arithmetic
            double sx = std::sin(kx * h) / h;
            double sy = std::sin(ky * h) / h;
            uxh[idx] = -I * sy * psi;
            uyh[idx] = I * sx * psi;
        }
    }

    DriftField u;
    u.n = n;
    u.box_length = L;
    u.time = w.time;
    u.ux.resize(w.values.size());
    u.uy.resize(w.values.size());
    fft.backward(uxh.data(), u.ux.data());
    fft.backward(uyh.data(), u.uy.data());
    if (norm == KernelNorm::vortex) {
        for (auto& v : u.ux) v *= 2.0 * M_PI;
        for (auto& v : u.uy) v *= 2.0 * M_PI;
    }
    return u;
}

Vec2 sample_drift(const DriftField& u, Vec2 x) {
    int n = u.n;
    double h = u.h();
    double fx = x.x / h, fy = x.y / h;
    double bx = std::floor(fx), by = std::floor(fy);
    double tx = fx - bx, ty = fy - by;
    auto wrap = [n](long long i) {
        long long m = i % n;
        return int(m < 0 ? m + n : m);
    };
    int ix0 = wrap((long long)bx), iy0 = wrap((long long)by);
    int ix1 = wrap((long long)bx + 1), iy1 = wrap((long long)by + 1);
    auto lerp = [&](const std::vector<double>& f) {
        double f00 = f[std::size_t(iy0) * n + ix0];
        double f10 = f[std::size_t(iy0) * n + ix1];
        double f01 = f[std::size_t(iy1) * n + ix0];
        double f11 = f[std::size_t(iy1) * n + ix1];
        return (1.0 - ty) * ((1.0 - tx) * f00 + tx * f10) +
               ty * ((1.0 - tx) * f01 + tx * f11);
    };
    return {lerp(u.ux), lerp(u.uy)};
}

} // namespace vlab
