#include "degrh/numerics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace degrh::num {

void fft(std::vector<cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw NumericError("fft: size must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 1.0 : -1.0) * kTwoPi / static_cast<double>(len);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cplx u = a[i + k];
                const cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        for (auto& x : a) x /= static_cast<double>(n);
    }
}

namespace {

// Golub-Welsch from monic Jacobi recurrence coefficients.
QuadRule golub_welsch(int n, double a, double b) {
    if (n < 1) throw NumericError("quadrature: need at least one node");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    const double apb = a + b;
    for (int k = 0; k < n; ++k) {
        double alpha;
        if (k == 0) {
            alpha = (b - a) / (apb + 2.0);
        } else {
            const double den = (2.0 * k + apb) * (2.0 * k + apb + 2.0);
            alpha = (b * b - a * a) / den;
        }
        J(k, k) = alpha;
    }
    for (int k = 1; k < n; ++k) {
        double beta;
        if (k == 1) {
            beta = 4.0 * (a + 1.0) * (b + 1.0) / ((apb + 2.0) * (apb + 2.0) * (apb + 3.0));
        } else {
            const double kk = k;
            const double den = (2.0 * kk + apb) * (2.0 * kk + apb) * (2.0 * kk + apb + 1.0) *
                               (2.0 * kk + apb - 1.0);
            beta = 4.0 * kk * (kk + a) * (kk + b) * (kk + apb) / den;
        }
        J(k, k - 1) = J(k - 1, k) = std::sqrt(beta);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    const double mu0 =
        std::exp((apb + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
                 std::lgamma(apb + 2.0));
    QuadRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int k = 0; k < n; ++k) {
        rule.nodes[k] = es.eigenvalues()(k);
        const double v0 = es.eigenvectors()(0, k);
        rule.weights[k] = mu0 * v0 * v0;
    }
    return rule;
}

}  // namespace

const QuadRule& gauss_legendre(int n) {
    static std::map<int, QuadRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, golub_welsch(n, 0.0, 0.0)).first;
    return it->second;
}

QuadRule gauss_jacobi(int n, double a, double b) {
    if (a <= -1.0 || b <= -1.0) throw NumericError("gauss_jacobi: exponents must exceed -1");
    return golub_welsch(n, a, b);
}

// ---------------------------------------------------------------------------

Pchip::Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw NumericError("pchip: need matching tables of size >= 2");
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        if (h[i] <= 0) throw NumericError("pchip: abscissae not strictly increasing");
        delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_.assign(n, 0.0);
    if (n == 2) {
        d_[0] = d_[1] = delta[0];
        return;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0) {
            d_[i] = 0.0;
        } else {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    // One-sided boundary slopes (Fritsch-Carlson end conditions).
    auto end_slope = [](double h0, double h1, double d0, double d1) {
        double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (d * d0 <= 0.0)
            d = 0.0;
        else if (d0 * d1 <= 0.0 && std::abs(d) > 3.0 * std::abs(d0))
            d = 3.0 * d0;
        return d;
    };
    d_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

int Pchip::find(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    int i = static_cast<int>(it - x_.begin()) - 1;
    i = std::clamp(i, 0, static_cast<int>(x_.size()) - 2);
    return i;
}

double Pchip::operator()(double x) const {
    const int i = find(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * y_[i] + h * h10 * d_[i] + h01 * y_[i + 1] + h * h11 * d_[i + 1];
}

double Pchip::derivative(double x) const {
    const int i = find(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double dh00 = (6 * t * t - 6 * t) / h, dh10 = 3 * t * t - 4 * t + 1;
    const double dh01 = (-6 * t * t + 6 * t) / h, dh11 = 3 * t * t - 2 * t;
    return dh00 * y_[i] + dh10 * d_[i] + dh01 * y_[i + 1] + dh11 * d_[i + 1];
}

// ---------------------------------------------------------------------------

namespace {

// Solve the periodic tridiagonal system for spline second derivatives via
// Sherman-Morrison on the cyclic correction.
std::vector<cplx> periodic_second_derivatives(const std::vector<double>& x,
                                              const std::vector<cplx>& y) {
    const int n = static_cast<int>(x.size()) - 1;  // number of intervals
    std::vector<double> h(n);
    for (int i = 0; i < n; ++i) h[i] = x[i + 1] - x[i];
    // Unknowns m_0..m_{n-1} (m_n = m_0).
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
    Eigen::VectorXcd rhs(n);
    auto yi = [&](int i) { return y[(i % n + n) % n]; };
    auto hi = [&](int i) { return h[(i % n + n) % n]; };
    for (int i = 0; i < n; ++i) {
        const double hm = hi(i - 1), hp = hi(i);
        A(i, (i - 1 + n) % n) += hm / 6.0;
        A(i, i) += (hm + hp) / 3.0;
        A(i, (i + 1) % n) += hp / 6.0;
        rhs(i) = (yi(i + 1) - yi(i)) / hp - (yi(i) - yi(i - 1)) / hm;
    }
    Eigen::VectorXcd m = A.partialPivLu().solve(rhs);
    std::vector<cplx> out(n + 1);
    for (int i = 0; i < n; ++i) out[i] = m(i);
    out[n] = m(0);
    return out;
}

}  // namespace

PeriodicSplineC::PeriodicSplineC(std::vector<double> x, std::vector<cplx> y)
    : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() < 4 || y_.size() != x_.size())
        throw NumericError("periodic spline: need at least 4 samples");
    period_ = x_.back() - x_.front();
    m_ = periodic_second_derivatives(x_, y_);
}

cplx PeriodicSplineC::operator()(double x) const {
    double t = x_.front() + std::fmod(x - x_.front(), period_);
    if (t < x_.front()) t += period_;
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    int i = std::clamp(static_cast<int>(it - x_.begin()) - 1, 0, static_cast<int>(x_.size()) - 2);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - t) / h, b = (t - x_[i]) / h;
    return a * y_[i] + b * y_[i + 1] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * (h * h) / 6.0;
}

cplx PeriodicSplineC::derivative(double x) const {
    double t = x_.front() + std::fmod(x - x_.front(), period_);
    if (t < x_.front()) t += period_;
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    int i = std::clamp(static_cast<int>(it - x_.begin()) - 1, 0, static_cast<int>(x_.size()) - 2);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - t) / h, b = (t - x_[i]) / h;
    return (y_[i + 1] - y_[i]) / h +
           ((-3.0 * a * a + 1.0) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]) * h / 6.0;
}

SplineC::SplineC(std::vector<double> x, std::vector<cplx> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const int n = static_cast<int>(x_.size());
    if (n < 3 || y_.size() != x_.size()) throw NumericError("spline: need at least 3 samples");
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
    A(0, 0) = 1.0;
    A(n - 1, n - 1) = 1.0;
    for (int i = 1; i + 1 < n; ++i) {
        const double hm = x_[i] - x_[i - 1], hp = x_[i + 1] - x_[i];
        A(i, i - 1) = hm / 6.0;
        A(i, i) = (hm + hp) / 3.0;
        A(i, i + 1) = hp / 6.0;
        rhs(i) = (y_[i + 1] - y_[i]) / hp - (y_[i] - y_[i - 1]) / hm;
    }
    Eigen::VectorXcd m = A.partialPivLu().solve(rhs);
    m_.resize(n);
    for (int i = 0; i < n; ++i) m_[i] = m(i);
}

cplx SplineC::operator()(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    int i = std::clamp(static_cast<int>(it - x_.begin()) - 1, 0, static_cast<int>(x_.size()) - 2);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h, b = (x - x_[i]) / h;
    return a * y_[i] + b * y_[i + 1] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * (h * h) / 6.0;
}

cplx SplineC::derivative(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    int i = std::clamp(static_cast<int>(it - x_.begin()) - 1, 0, static_cast<int>(x_.size()) - 2);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h, b = (x - x_[i]) / h;
    return (y_[i + 1] - y_[i]) / h +
           ((-3.0 * a * a + 1.0) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]) * h / 6.0;
}

// ---------------------------------------------------------------------------

double wrap_2pi(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r < 0) r += kTwoPi;
    return r;
}

double wrap_pm_pi(double a) {
    double r = std::fmod(a + kPi, kTwoPi);
    if (r <= 0) r += kTwoPi;
    return r - kPi;
}

void unwrap_phases(std::vector<double>& phases) {
    for (std::size_t i = 1; i < phases.size(); ++i) {
        const double d = phases[i] - phases[i - 1];
        phases[i] -= kTwoPi * std::round(d / kTwoPi);
    }
}

int winding_number(const std::vector<cplx>& samples, double max_step, double* residual) {
    if (samples.size() < 3) throw NumericError("winding_number: too few samples");
    double total = 0.0;
    const std::size_t n = samples.size();
    for (std::size_t i = 0; i < n; ++i) {
        const cplx a = samples[i];
        const cplx b = samples[(i + 1) % n];
        if (std::abs(a) == 0.0 || std::abs(b) == 0.0)
            throw NumericError("winding_number: zero sample");
        const double d = std::arg(b / a);
        if (std::abs(d) >= max_step)
            throw NumericError("winding_number: phase increment too large; grid too coarse");
        total += d;
    }
    const double w = total / kTwoPi;
    const int k = static_cast<int>(std::lround(w));
    if (residual) *residual = std::abs(w - k);
    return k;
}

cplx trapezoid_periodic(const std::function<cplx(double)>& f, double t0, double t1, int n) {
    cplx sum = 0.0;
    const double h = (t1 - t0) / n;
    for (int i = 0; i < n; ++i) sum += f(t0 + h * i);
    return sum * h;
}

}  // namespace degrh::num
