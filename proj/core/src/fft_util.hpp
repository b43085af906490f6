#pragma once
#include <complex>
#include <vector>

#include <fftw3.h>

namespace vlab {

// Thin 2D r2c/c2r wrapper on an n x n grid, n a power of two. Forward
// output is scaled by 1/n^2 so coefficients are true Fourier amplitudes
// and the round trip is the identity. Spectral layout: [iy * (n/2+1) + kx]
// with kx = 0..n/2 and iy wrapping negative frequencies.
class Fft2 {
  public:
    explicit Fft2(int n);
    ~Fft2();
    Fft2(const Fft2&) = delete;
    Fft2& operator=(const Fft2&) = delete;

    int n() const { return n_; }
    int spec_size() const { return n_ * (n_ / 2 + 1); }

    void forward(const double* in, std::complex<double>* out);
    void backward(const std::complex<double>* in, double* out);

  private:
    int n_;
    double* rbuf_;
    fftw_complex* cbuf_;
    fftw_plan fwd_, bwd_;
};

} // namespace vlab
