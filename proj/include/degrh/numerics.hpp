#pragma once

#include <functional>
#include <vector>

#include "degrh/common.hpp"

namespace degrh::num {

/// In-place radix-2 FFT; size must be a power of two.
void fft(std::vector<cplx>& a, bool inverse);

/// Quadrature rule on (-1, 1).
struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule with n nodes.
const QuadRule& gauss_legendre(int n);

/// Gauss-Jacobi rule with weight (1-t)^a (1+t)^b, a,b > -1.
QuadRule gauss_jacobi(int n, double a, double b);

/// Piecewise cubic Hermite interpolation with Fritsch-Carlson
/// (shape-preserving) slopes on strictly increasing abscissae.
class Pchip {
public:
    Pchip() = default;
    Pchip(std::vector<double> x, std::vector<double> y);
    double operator()(double x) const;
    double derivative(double x) const;
    const std::vector<double>& xs() const { return x_; }
    const std::vector<double>& ys() const { return y_; }

private:
    std::vector<double> x_, y_, d_;
    int find(double x) const;
};

/// Periodic cubic spline through samples of a closed curve; parameter period is
/// (x.back() - x.front()) with y.front() == y.back() expected from the caller.
class PeriodicSplineC {
public:
    PeriodicSplineC() = default;
    /// x strictly increasing, x.front()..x.back() spans one period; y has the
    /// same size as x and y.back() is the wrap-around repeat of y.front().
    PeriodicSplineC(std::vector<double> x, std::vector<cplx> y);
    cplx operator()(double x) const;
    cplx derivative(double x) const;

private:
    std::vector<double> x_;
    std::vector<cplx> y_, m_;  // second derivatives
    double period_ = 0.0;
};

/// Natural cubic spline for open curves.
class SplineC {
public:
    SplineC() = default;
    SplineC(std::vector<double> x, std::vector<cplx> y);
    cplx operator()(double x) const;
    cplx derivative(double x) const;

private:
    std::vector<double> x_;
    std::vector<cplx> y_, m_;
};

/// Wrap an angle into [0, 2*pi).
double wrap_2pi(double a);

/// Wrap into (-pi, pi].
double wrap_pm_pi(double a);

/// Unwrap a sequence of phases in place so consecutive jumps stay below pi.
void unwrap_phases(std::vector<double>& phases);

/// Winding number of a closed chain of nonzero complex samples
/// (first sample not repeated), via summed principal argument increments.
/// Throws NumericError if an increment reaches max_step.
int winding_number(const std::vector<cplx>& samples, double max_step = kPi / 2,
                   double* residual = nullptr);

/// Trapezoid quadrature of a periodic function sampled implicitly on n nodes.
cplx trapezoid_periodic(const std::function<cplx(double)>& f, double t0, double t1, int n);

}  // namespace degrh::num
