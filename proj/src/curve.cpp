#include "degrh/curve.hpp"

#include <cmath>

namespace degrh {

Curve Curve::analytic(std::function<cplx(double)> f, double t0, double t1, bool closed,
                      std::function<cplx(double)> df) {
    Curve c;
    c.eval_ = std::move(f);
    c.deriv_ = std::move(df);
    c.t0_ = t0;
    c.t1_ = t1;
    c.closed_ = closed;
    return c;
}

Curve Curve::from_samples(const std::vector<cplx>& pts, double t0, double t1, bool closed) {
    if (pts.size() < 4) throw ValidationError("curve: need at least 4 samples");
    const int n = static_cast<int>(pts.size());
    std::vector<double> ts(n);
    for (int i = 0; i < n; ++i) ts[i] = t0 + (t1 - t0) * i / (n - 1.0);
    Curve c;
    c.t0_ = t0;
    c.t1_ = t1;
    c.closed_ = closed;
    if (closed) {
        if (std::abs(pts.front() - pts.back()) > 1e-9 * (1.0 + std::abs(pts.front())))
            throw ValidationError("closed curve: first and last samples differ");
        auto sp = std::make_shared<num::PeriodicSplineC>(ts, pts);
        c.eval_ = [sp](double t) { return (*sp)(t); };
        c.deriv_ = [sp](double t) { return sp->derivative(t); };
    } else {
        auto sp = std::make_shared<num::SplineC>(ts, pts);
        c.eval_ = [sp](double t) { return (*sp)(t); };
        c.deriv_ = [sp](double t) { return sp->derivative(t); };
    }
    return c;
}

Curve Curve::circle(cplx center, double radius) {
    return analytic([center, radius](double t) { return center + std::polar(radius, t); }, 0.0,
                    kTwoPi, true,
                    [radius](double t) { return cplx(0, 1) * std::polar(radius, t); });
}

Curve Curve::segment(cplx a, cplx b) {
    return analytic([a, b](double t) { return a + t * (b - a); }, 0.0, 1.0, false,
                    [a, b](double) { return b - a; });
}

cplx Curve::tangent(double t) const {
    if (deriv_) return deriv_(t);
    const double h = 1e-6 * (t1_ - t0_);
    double lo = t - h, hi = t + h;
    if (!closed_) {
        lo = std::max(lo, t0_);
        hi = std::min(hi, t1_);
    }
    return (eval_(hi) - eval_(lo)) / (hi - lo);
}

std::vector<cplx> Curve::sample(int n) const {
    std::vector<cplx> out(n);
    if (closed_) {
        for (int i = 0; i < n; ++i) out[i] = eval_(t0_ + (t1_ - t0_) * i / n);
    } else {
        for (int i = 0; i < n; ++i) out[i] = eval_(t0_ + (t1_ - t0_) * i / (n - 1.0));
    }
    return out;
}

double Curve::length(int n) const {
    double acc = 0.0;
    cplx prev = eval_(t0_);
    for (int i = 1; i <= n; ++i) {
        const double t = closed_ ? t0_ + (t1_ - t0_) * i / n : t0_ + (t1_ - t0_) * i / n;
        const cplx p = eval_(t);
        acc += std::abs(p - prev);
        prev = p;
    }
    return acc;
}

}  // namespace degrh
