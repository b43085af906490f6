#include "vortexlab/spectral.hpp"

#include <cmath>

#include "fft_util.hpp"
#include "vortexlab/errors.hpp"

namespace vlab {

namespace {
using cplx = std::complex<double>;
}

struct SpectralState::Impl {
    int n;
    double L;
    double nu;
    double time = 0.0;
    double conv; // velocity convention factor: 1 or 2*pi
    Fft2 fft;
    int nk;

    std::vector<cplx> what;              // state coefficients
    std::vector<double> kx, ky, k2;      // per-mode wavenumbers
    std::vector<bool> keep;              // 2/3-rule mask
    // scratch
    std::vector<cplx> s1, s2, s3, s4, nl;
    std::vector<double> pux, puy, pwx, pwy;
    double last_dissipation = 0.0;       // integral(|grad w|^2) at last step start
    double dissipation_integral = 0.0;   // accumulated 2*nu*integral dt
    bool have_last_dissipation = false;

    explicit Impl(int n_) : n(n_), fft(n_), nk(n_ / 2 + 1) {}

    std::size_t idx(int iy, int jx) const { return std::size_t(iy) * nk + jx; }

    void build_tables() {
        kx.resize(std::size_t(n) * nk);
        ky.resize(kx.size());
        k2.resize(kx.size());
        keep.resize(kx.size());
        double kb = 2.0 * M_PI / L;
        int cut = n / 3;
        for (int iy = 0; iy < n; ++iy) {
            int jy = iy <= n / 2 ? iy : iy - n;
            for (int jx = 0; jx < nk; ++jx) {
                std::size_t id = idx(iy, jx);
                kx[id] = kb * jx;
                ky[id] = kb * jy;
                k2[id] = kx[id] * kx[id] + ky[id] * ky[id];
                keep[id] = std::abs(jx) <= cut && std::abs(jy) <= cut;
            }
        }
    }

    void dealias(std::vector<cplx>& a) const {
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!keep[i]) a[i] = 0.0;
    }

    // advection RHS N(a) = -FFT[u . grad w], dealiased, mean mode zeroed.
    // Returns max |u| met on the grid (for CFL monitoring).
    double advection(const std::vector<cplx>& a, std::vector<cplx>& out) {
        std::size_t m = a.size();
        s1.resize(m); s2.resize(m); s3.resize(m); s4.resize(m);
        std::size_t np = std::size_t(n) * n;
        pux.resize(np); puy.resize(np); pwx.resize(np); pwy.resize(np);
        const cplx I(0.0, 1.0);
        for (std::size_t i = 0; i < m; ++i) {
            cplx w = keep[i] ? a[i] : cplx(0.0);
            if (k2[i] == 0.0) {
                s1[i] = s2[i] = 0.0;
            } else {
                cplx psi = -w / k2[i];
                s1[i] = conv * (-I * ky[i] * psi); // ux
                s2[i] = conv * (I * kx[i] * psi);  // uy
            }
            s3[i] = I * kx[i] * w; // dw/dx
            s4[i] = I * ky[i] * w; // dw/dy
        }
        fft.backward(s1.data(), pux.data());
        fft.backward(s2.data(), puy.data());
        fft.backward(s3.data(), pwx.data());
        fft.backward(s4.data(), pwy.data());
        double umax2 = 0.0;
        for (std::size_t i = 0; i < np; ++i) {
            umax2 = std::max(umax2, pux[i] * pux[i] + puy[i] * puy[i]);
            pwx[i] = pux[i] * pwx[i] + puy[i] * pwy[i]; // u . grad w
        }
        out.resize(m);
        fft.forward(pwx.data(), out.data());
        for (std::size_t i = 0; i < m; ++i)
            out[i] = keep[i] ? -out[i] : cplx(0.0);
        out[idx(0, 0)] = 0.0;
        return std::sqrt(umax2);
    }

    // Parseval sums; r2c columns 0 and n/2 count once, the rest twice
    double mode_weight(int jx) const { return (jx == 0 || jx == n / 2) ? 1.0 : 2.0; }

    double spectral_sum(const std::vector<cplx>& a, bool grad) const {
        double s = 0.0;
        for (int iy = 0; iy < n; ++iy)
            for (int jx = 0; jx < nk; ++jx) {
                std::size_t id = std::size_t(iy) * nk + jx;
                double t = std::norm(a[id]) * mode_weight(jx);
                s += grad ? t * k2[id] : t;
            }
        return s * L * L;
    }
};

SpectralState::SpectralState(const VorticityField& w0, double nu, KernelNorm norm)
    : impl_(new Impl(w0.n)) {
    w0.validate();
    if (!(nu >= 0.0)) throw SimError("nu must be >= 0");
    impl_->L = w0.box_length;
    impl_->nu = nu;
    impl_->time = w0.time;
    impl_->conv = norm == KernelNorm::vortex ? 2.0 * M_PI : 1.0;
    impl_->build_tables();
    impl_->what.resize(impl_->fft.spec_size());
    impl_->fft.forward(w0.values.data(), impl_->what.data());
    impl_->dealias(impl_->what);
}

SpectralState::~SpectralState() = default;
SpectralState::SpectralState(SpectralState&&) noexcept = default;

int SpectralState::n() const { return impl_->n; }
double SpectralState::box_length() const { return impl_->L; }
double SpectralState::nu() const { return impl_->nu; }
double SpectralState::time() const { return impl_->time; }

std::complex<double> SpectralState::mean_mode() const {
    return impl_->what[0];
}

double SpectralState::enstrophy() const {
    return impl_->spectral_sum(impl_->what, false);
}

double SpectralState::dissipation_integral() const {
    return impl_->dissipation_integral;
}

double SpectralState::hermitian_defect() const {
    // kx = 0 column: coefficient at (0, ky) must conjugate the one at (0, -ky)
    double d = 0.0;
    auto& im = *impl_;
    for (int iy = 1; iy < im.n; ++iy) {
        cplx a = im.what[im.idx(iy, 0)];
        cplx b = im.what[im.idx(im.n - iy, 0)];
        d = std::max(d, std::abs(a - std::conj(b)));
    }
    return d;
}

VorticityField SpectralState::field() const {
    auto& im = *impl_;
    VorticityField f;
    f.n = im.n;
    f.box_length = im.L;
    f.time = im.time;
    f.values.resize(std::size_t(im.n) * im.n);
    std::vector<cplx> tmp = im.what;
    im.fft.backward(tmp.data(), f.values.data());
    return f;
}

InvariantMonitor SpectralState::step(double dt) {
    if (!(dt > 0.0)) throw SimError("dt must be > 0");
    auto& im = *impl_;
    std::size_t m = im.what.size();

    // stage 1 also samples the start-of-step physical field for monitors
    std::vector<cplx> k1(m);
    double umax = im.advection(im.what, k1);

    InvariantMonitor mon;
    mon.time = im.time;
    {
        // physical norms of the current state
        std::vector<cplx> tmp = im.what;
        std::vector<double> w(std::size_t(im.n) * im.n);
        im.fft.backward(tmp.data(), w.data());
        double h2 = (im.L / im.n) * (im.L / im.n);
        double l1 = 0, l2 = 0, l4 = 0, li = 0;
        for (double v : w) {
            double av = std::abs(v);
            l1 += av;
            l2 += v * v;
            l4 += v * v * v * v;
            li = std::max(li, av);
        }
        mon.l1 = l1 * h2;
        mon.l2 = std::sqrt(l2 * h2);
        mon.l4 = std::pow(l4 * h2, 0.25);
        mon.linf = li;
        mon.mean = im.what[0].real();
        mon.enstrophy = im.spectral_sum(im.what, false);
        double diss = im.spectral_sum(im.what, true);
        mon.u_max = umax;
        mon.cfl = umax * dt / (im.L / im.n);

        // accumulate 2*nu * integral |grad w|^2 dt by trapezoid; the
        // half-interval against the *next* step start is added below
        im.last_dissipation = diss;
        im.have_last_dissipation = true;
        mon.dissipation_integral = im.dissipation_integral;
    }

    // integrating-factor RK4
    std::vector<double> e1(m), e2(m);
    for (std::size_t i = 0; i < m; ++i) {
        e1[i] = std::exp(-im.nu * im.k2[i] * 0.5 * dt);
        e2[i] = e1[i] * e1[i];
    }
    std::vector<cplx> tmp(m), k2s(m), k3s(m), k4s(m);

    for (std::size_t i = 0; i < m; ++i)
        tmp[i] = e1[i] * (im.what[i] + 0.5 * dt * k1[i]);
    im.advection(tmp, k2s);

    for (std::size_t i = 0; i < m; ++i)
        tmp[i] = e1[i] * im.what[i] + 0.5 * dt * k2s[i];
    im.advection(tmp, k3s);

    for (std::size_t i = 0; i < m; ++i)
        tmp[i] = e2[i] * im.what[i] + dt * e1[i] * k3s[i];
    im.advection(tmp, k4s);

    for (std::size_t i = 0; i < m; ++i)
        im.what[i] = e2[i] * im.what[i] +
                     dt / 6.0 *
                         (e2[i] * k1[i] + 2.0 * e1[i] * (k2s[i] + k3s[i]) + k4s[i]);
    im.time += dt;

    // close the trapezoid over this step
    double diss_now = im.spectral_sum(im.what, true);
    im.dissipation_integral +=
        2.0 * im.nu * 0.5 * dt * (im.last_dissipation + diss_now);
    im.last_dissipation = diss_now;

    for (std::size_t i = 0; i < m; ++i)
        if (!std::isfinite(im.what[i].real()) || !std::isfinite(im.what[i].imag()))
            throw NonFiniteError("spectral state became non-finite at t = " +
                                 std::to_string(im.time));
    return mon;
}

Ns2dResult run_ns2d(const VorticityField& w0, double nu, double t_end, double dt,
                    const std::vector<double>& save_times, KernelNorm norm) {
    if (!(dt > 0.0)) throw SimError("dt must be > 0");
    for (std::size_t i = 0; i < save_times.size(); ++i) {
        if (save_times[i] < 0.0 || save_times[i] > t_end)
            throw SimError("save_times must lie within [0, t_end]");
        if (i > 0 && !(save_times[i] > save_times[i - 1]))
            throw SimError("save_times must be strictly increasing");
    }
    SpectralState st(w0, nu, norm);
    Ns2dResult res;
    std::size_t next = 0;
    if (!save_times.empty() && save_times[0] == 0.0) {
        res.fields.push_back(st.field());
        ++next;
    }
    double t = 0.0;
    const double tiny = 1e-12 * std::max(1.0, t_end);
    bool warned = false;
    while (t < t_end - tiny) {
        double target = next < save_times.size() ? save_times[next] : t_end;
        double step_dt = std::min(dt, target - t);
        InvariantMonitor mon = st.step(step_dt);
        if (mon.cfl > 0.5 && !warned) {
            res.warnings.push_back(
                "CFL advisory: u_max*dt/h = " + std::to_string(mon.cfl) +
                " exceeds 0.5 at t = " + std::to_string(mon.time));
            warned = true;
        }
        res.monitors.push_back(mon);
        t += step_dt;
        if (next < save_times.size() && t >= save_times[next] - tiny) {
            t = save_times[next];
            VorticityField f = st.field();
            f.time = t;
            res.fields.push_back(std::move(f));
            ++next;
        }
    }
    // final monitor row captures the end state (no step follows it)
    InvariantMonitor last;
    last.time = t_end;
    {
        VorticityField f = st.field();
        double h2 = f.h() * f.h();
        double l1 = 0, l2 = 0, l4 = 0, li = 0;
        for (double v : f.values) {
            double av = std::abs(v);
            l1 += av; l2 += v * v; l4 += v * v * v * v; li = std::max(li, av);
        }
        last.l1 = l1 * h2;
        last.l2 = std::sqrt(l2 * h2);
        last.l4 = std::pow(l4 * h2, 0.25);
        last.linf = li;
        last.mean = st.mean_mode().real();
        last.enstrophy = st.enstrophy();
        last.dissipation_integral = st.dissipation_integral();
    }
    res.monitors.push_back(last);
    return res;
}

} // namespace vlab
