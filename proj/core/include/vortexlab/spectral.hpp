#pragma once
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "vortexlab/field.hpp"
#include "vortexlab/kernels.hpp"

namespace vlab {

// Per-step record of the quantities the vorticity equation is supposed to
// preserve or dissipate. dissipation_integral accumulates
// 2*nu*integral(|grad w|^2) dt from the start of the run (trapezoid).
struct InvariantMonitor {
    double time = 0.0;
    double l1 = 0.0, l2 = 0.0, l4 = 0.0, linf = 0.0;
    double mean = 0.0;
    double enstrophy = 0.0; // integral of w^2
    double dissipation_integral = 0.0;
    double u_max = 0.0;
    double cfl = 0.0; // u_max * dt / h of the step ending here
};

// Spectral vorticity state on the torus. Coefficients live on the r2c
// half-plane, dealiased with the 2/3 rule at all times; mode (0,0) is
// never written after initialization. Advances with RK4 on the advection
// term under the exact diffusion integrating factor.
class SpectralState {
  public:
    SpectralState(const VorticityField& w0, double nu, KernelNorm norm);
    ~SpectralState();
    SpectralState(SpectralState&&) noexcept;

    int n() const;
    double box_length() const;
    double nu() const;
    double time() const;

    // one step of width dt; returns the monitor sampled at the step start
    // (plus the CFL of the step being taken)
    InvariantMonitor step(double dt);

    VorticityField field() const; // inverse transform at the current time

    // mean mode (0,0), bit-stable across steps
    std::complex<double> mean_mode() const;

    double enstrophy() const;            // integral of w^2, spectral sum
    double dissipation_integral() const; // accumulated 2*nu*int |grad w|^2 dt

    // kx = 0 column must be conjugate-symmetric for the field to be real
    double hermitian_defect() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct Ns2dResult {
    std::vector<VorticityField> fields;       // at the requested save times
    std::vector<InvariantMonitor> monitors;   // one per step, plus the final state
    std::vector<std::string> warnings;        // CFL advisories, non-fatal
};

// Fixed-width stepping with steps clipped to land exactly on save_times
// and t_end. Throws NonFiniteError if the state blows up.
Ns2dResult run_ns2d(const VorticityField& w0, double nu, double t_end, double dt,
                    const std::vector<double>& save_times,
                    KernelNorm norm = KernelNorm::vortex);

} // namespace vlab
