#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "degrh/common.hpp"
#include "degrh/numerics.hpp"

namespace degrh {

/// Parametric planar curve. Backed either by an analytic callable or by a
/// cubic spline through dense samples.
class Curve {
public:
    Curve() = default;

    /// Analytic curve on [t0, t1], optionally with an analytic derivative.
    static Curve analytic(std::function<cplx(double)> f, double t0, double t1, bool closed,
                          std::function<cplx(double)> df = {});

    /// Spline through samples at uniformly spaced parameters over [t0, t1].
    /// For closed curves the first sample must equal the last within tolerance.
    static Curve from_samples(const std::vector<cplx>& pts, double t0, double t1, bool closed);

    static Curve circle(cplx center, double radius);           // [0, 2*pi), ccw
    static Curve segment(cplx a, cplx b);                      // [0, 1]

    cplx operator()(double t) const { return eval_(t); }
    cplx tangent(double t) const;
    double t0() const { return t0_; }
    double t1() const { return t1_; }
    bool closed() const { return closed_; }
    std::vector<cplx> sample(int n) const;  // n points; closed curves omit the repeat
    double length(int n = 512) const;

private:
    std::function<cplx(double)> eval_;
    std::function<cplx(double)> deriv_;  // optional; tangent falls back to FD
    double t0_ = 0.0, t1_ = 1.0;
    bool closed_ = false;
};

}  // namespace degrh
