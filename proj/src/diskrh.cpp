#include "degrh/diskrh.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace degrh::disk {

namespace {

cplx ipow(cplx z, int n) {
    if (n == 0) return cplx(1.0, 0.0);
    const bool neg = n < 0;
    unsigned m = neg ? static_cast<unsigned>(-n) : static_cast<unsigned>(n);
    cplx acc(1.0, 0.0), b = z;
    while (m) {
        if (m & 1u) acc *= b;
        b *= b;
        m >>= 1u;
    }
    return neg ? cplx(1.0, 0.0) / acc : acc;
}

double wrap_into(double x, double lo) {
    double r = std::fmod(x - lo, kTwoPi);
    if (r < 0) r += kTwoPi;
    return lo + r;
}

}  // namespace

double choose_offset(const std::vector<double>& c_angles, int M) {
    const double h = kTwoPi / M;
    if (c_angles.empty()) return 0.5 * h;
    std::vector<double> fr;
    for (double c : c_angles) {
        double f = std::fmod(c, h) / h;
        if (f < 0) f += 1.0;
        fr.push_back(f);
    }
    std::sort(fr.begin(), fr.end());
    double best_gap = fr.front() + 1.0 - fr.back();
    double best_mid = fr.back() + 0.5 * best_gap;
    for (std::size_t i = 0; i + 1 < fr.size(); ++i) {
        const double gap = fr[i + 1] - fr[i];
        if (gap > best_gap) {
            best_gap = gap;
            best_mid = fr[i] + 0.5 * gap;
        }
    }
    double off = std::fmod(best_mid, 1.0) * h;
    return off;
}

double phi_c_on_circle(double theta, double c_angle) {
    double d = std::fmod(theta - c_angle, kTwoPi);
    if (d < 0) d += kTwoPi;
    return 0.5 * d;
}

double phi_c_in_disk(cplx z, double c_angle) {
    const cplx c = std::polar(1.0, c_angle);
    double phi = std::arg((z - c) / (cplx(0, 1) * c));
    if (phi < -kPi / 2) phi += kTwoPi;
    return phi;
}

cplx power_factor(cplx z, double c_angle, double alpha) {
    if (alpha == 0.0) return cplx(1.0, 0.0);
    const cplx c = std::polar(1.0, c_angle);
    const double r = std::abs(z - c);
    if (r == 0.0) return cplx(0.0, 0.0);
    return std::polar(std::pow(r, alpha), alpha * phi_c_in_disk(z, c_angle));
}

double AlternatingAssignment::beta(double theta) const {
    if (points.empty()) return 1.0;
    const double th = num::wrap_2pi(theta);
    int idx = 0;
    for (double p : points)
        if (p <= th) ++idx;
    // idx = 0 means theta lies on the wrap arc B_a (a is even)
    const int s = idx == 0 ? static_cast<int>(points.size()) : idx;
    return (s - 1) % 2 == 0 ? 1.0 : -1.0;
}

AlternatingAssignment build_beta(std::vector<double> odd_angles,
                                 const std::vector<double>& all_angles) {
    AlternatingAssignment out;
    for (double& a : odd_angles) a = num::wrap_2pi(a);
    std::sort(odd_angles.begin(), odd_angles.end());
    for (std::size_t i = 0; i + 1 < odd_angles.size(); ++i)
        if (odd_angles[i + 1] - odd_angles[i] < 1e-12)
            throw ValidationError("build_beta: duplicate odd discontinuity points");
    if (odd_angles.size() % 2 == 1) {
        std::vector<double> all = all_angles;
        for (double& a : all) a = num::wrap_2pi(a);
        std::sort(all.begin(), all.end());
        double best_gap = all.front() + kTwoPi - all.back();
        double mid = num::wrap_2pi(all.back() + 0.5 * best_gap);
        for (std::size_t i = 0; i + 1 < all.size(); ++i) {
            const double gap = all[i + 1] - all[i];
            if (gap > best_gap) {
                best_gap = gap;
                mid = all[i] + 0.5 * gap;
            }
        }
        out.has_aux = true;
        out.aux_angle = mid;
        odd_angles.push_back(mid);
        std::sort(odd_angles.begin(), odd_angles.end());
    }
    out.points = std::move(odd_angles);
    return out;
}

cplx singular_coefficient(cplx g_plus, cplx g_minus, double alpha) {
    if (alpha <= 0.0 || alpha >= 1.0)
        throw ValidationError("singular_coefficient: alpha must lie in (0,1)");
    const cplx num = std::polar(1.0, kPi * alpha) * g_plus -
                     std::polar(1.0, -kPi * alpha) * g_minus;
    return num / (cplx(0, 2) * std::sin(kPi * alpha));
}

// ---------------------------------------------------------------------------

Schwarz::Schwarz(const std::vector<double>& samples, double offset) : offset_(offset) {
    const int M = static_cast<int>(samples.size());
    if (M < 4 || (M & (M - 1)) != 0) throw NumericError("schwarz: grid must be a power of two");
    std::vector<cplx> x(M);
    for (int i = 0; i < M; ++i) x[i] = samples[i];
    num::fft(x, false);
    coef_.resize(M / 2 + 1);
    for (int n = 0; n <= M / 2; ++n)
        coef_[n] = x[n] / static_cast<double>(M) * std::polar(1.0, -n * offset);
    coef_[0] = cplx(coef_[0].real(), 0.0);
    // conjugate function via the -i sgn(n) multiplier
    std::vector<cplx> y(M, cplx(0, 0));
    for (int n = 1; n < M / 2; ++n) {
        y[n] = cplx(0, -1) * x[n];
        y[M - n] = cplx(0, 1) * x[M - n];
    }
    num::fft(y, true);
    conj_.resize(M);
    for (int i = 0; i < M; ++i) conj_[i] = y[i].real();
}

cplx Schwarz::operator()(cplx z) const {
    const int N = static_cast<int>(coef_.size()) - 1;
    const double az = std::abs(z);
    int n_max = N;
    if (az < 1e-300) return coef_[0];
    if (az < 0.999999) {
        const double t = std::log(1e-18) / std::log(az);
        n_max = std::min<int>(N, static_cast<int>(t) + 1);
    }
    cplx acc = 0.0;
    for (int n = n_max; n >= 1; --n) acc = (acc + 2.0 * coef_[n]) * z;
    return acc + coef_[0];
}

double Schwarz::conjugate_at_angle(double theta) const {
    const int N = static_cast<int>(coef_.size()) - 1;
    const cplx e = std::polar(1.0, theta);
    cplx acc = 0.0;
    for (int n = N; n >= 1; --n) acc = (acc + 2.0 * coef_[n]) * e;
    return acc.imag();
}

// ---------------------------------------------------------------------------

double DiskSolver::ArcTable::angle_of(double u) const {
    const double w = u - std::sin(kTwoPi * u) / kTwoPi;  // quadratic clustering at both ends
    return a + (b - a) * w;
}

double DiskSolver::ArcTable::u_of(double angle) const {
    const double target = (angle - a) / (b - a);
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double w = mid - std::sin(kTwoPi * mid) / kTwoPi;
        (w < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

DiskSolver::DiskSolver(DiskData data, const Numerics& num) : data_(std::move(data)), num_(num) {
    M_ = data_.M;
    if (M_ < 8 || (M_ & (M_ - 1)) != 0)
        throw ValidationError("disk solver: grid size must be a power of two >= 8");
    std::vector<double> c_angles;
    for (auto& c : data_.cs) {
        c.angle = num::wrap_2pi(c.angle);
        c_angles.push_back(c.angle);
    }
    std::sort(data_.cs.begin(), data_.cs.end(),
              [](const Discontinuity& a, const Discontinuity& b) { return a.angle < b.angle; });
    offset_ = choose_offset(c_angles, M_);
    angles_.resize(M_);
    lambda_grid_.resize(M_);
    psi_grid_.resize(M_);
    double max_psi = 0.0;
    for (int i = 0; i < M_; ++i) {
        angles_[i] = offset_ + kTwoPi * i / M_;
        lambda_grid_[i] = data_.lambda(angles_[i]);
        if (std::abs(std::abs(lambda_grid_[i]) - 1.0) > 1e-10)
            throw NumericError("disk solver: lambda is not unimodular on the grid");
        psi_grid_[i] = data_.psi(angles_[i]);
        max_psi = std::max(max_psi, std::abs(psi_grid_[i]));
    }
    has_rho_ = max_psi > 0.0;

    // jump relation at every discontinuity
    for (const auto& c : data_.cs) {
        const double theta_jump = kPi * (c.alpha + c.q);
        const cplx lhs = c.lambda_minus;
        const cplx rhs = std::polar(1.0, theta_jump) * c.lambda_plus;
        if (std::abs(lhs - rhs) > 1e-6)
            throw NumericError("disk solver: jump relation violated at a discontinuity");
        if (has_rho_ && c.alpha == 0.0)
            throw ValidationError(
                "disk solver: nonhomogeneous data with a vanishing jump (alpha = 0) is not "
                "generic; Theorem-level support requires alpha in (0,1)");
    }

    build_symbols();
    build_gamma();
    if (has_rho_) {
        if (data_.cs.empty())
            build_smooth_path();
        else
            build_arc_tables();
    }
}

void DiskSolver::build_symbols() {
    std::vector<double> odd, all;
    for (const auto& c : data_.cs) {
        all.push_back(c.angle);
        if (c.q % 2 != 0) odd.push_back(c.angle);
    }
    beta_ = build_beta(odd, all);

    lambda_tilde_.resize(M_);
    lambda0_.resize(M_);
    for (int i = 0; i < M_; ++i) {
        cplx f = lambda_grid_[i];
        for (const auto& c : data_.cs)
            f *= std::polar(1.0, -c.alpha * phi_c_on_circle(angles_[i], c.angle));
        lambda_tilde_[i] = f;
        cplx g = f * beta_.beta(angles_[i]);
        if (beta_.has_aux)
            g *= std::polar(1.0, -phi_c_on_circle(angles_[i], beta_.aux_angle));
        lambda0_[i] = g;
    }

    // one-sided continuity check at every c_k via exact limits
    for (std::size_t k = 0; k < data_.cs.size(); ++k) {
        const auto& ck = data_.cs[k];
        auto one_sided = [&](int side) {  // side = +1 -> c+, -1 -> c-
            cplx v = side > 0 ? ck.lambda_plus : ck.lambda_minus;
            for (std::size_t l = 0; l < data_.cs.size(); ++l) {
                if (l == k) {
                    v *= std::polar(1.0, -ck.alpha * (side > 0 ? 0.0 : kPi));
                } else {
                    v *= std::polar(1.0, -data_.cs[l].alpha *
                                             phi_c_on_circle(ck.angle, data_.cs[l].angle));
                }
            }
            v *= beta_.beta(ck.angle + side * 1e-9);
            if (beta_.has_aux)
                v *= std::polar(1.0, -phi_c_on_circle(ck.angle, beta_.aux_angle));
            return v;
        };
        if (std::abs(one_sided(+1) - one_sided(-1)) > 1e-4)
            throw NumericError(
                "disk solver: reduced symbol is discontinuous at a jump point (inconsistent "
                "(q, alpha) data)");
    }

    double residual = 0.0;
    winding_ = num::winding_number(lambda0_, kPi / 2, &residual);
    if (residual > 1e-6) throw NumericError("disk solver: fractional winding of lambda0");
    if (data_.derive_kappa) data_.kappa = winding_;
    if (winding_ != data_.kappa)
        throw NumericError("disk solver: winding of lambda0 (" + std::to_string(winding_) +
                           ") does not match the component index (" +
                           std::to_string(data_.kappa) + ")");
}

void DiskSolver::build_gamma() {
    arg0_grid_.resize(M_);
    for (int i = 0; i < M_; ++i)
        arg0_grid_[i] = std::arg(lambda0_[i] * std::polar(1.0, -data_.kappa * angles_[i]));
    num::unwrap_phases(arg0_grid_);
    gamma_s_ = Schwarz(arg0_grid_, offset_);
}

cplx DiskSolver::lambda0_at(double theta) const {
    cplx g = data_.lambda(theta) * beta_.beta(theta);
    for (const auto& c : data_.cs)
        g *= std::polar(1.0, -c.alpha * phi_c_on_circle(theta, c.angle));
    if (beta_.has_aux) g *= std::polar(1.0, -phi_c_on_circle(theta, beta_.aux_angle));
    return g;
}

cplx DiskSolver::gamma(cplx z) const { return gamma_s_(z); }

double DiskSolver::gamma_re_boundary(double theta) const {
    const double th = wrap_into(theta, offset_);
    const double raw = std::arg(lambda0_at(th) * std::polar(1.0, -data_.kappa * th));
    // lift onto the continuous branch using the nearest grid value
    const double h = kTwoPi / M_;
    int i = static_cast<int>(std::floor((th - offset_) / h));
    i = std::clamp(i, 0, M_ - 1);
    const double predicted = arg0_grid_[i];
    return raw + kTwoPi * std::round((predicted - raw) / kTwoPi);
}

double DiskSolver::gamma_im_boundary(double theta) const {
    return gamma_s_.conjugate_at_angle(theta);
}

void DiskSolver::build_smooth_path() {
    // No discontinuities: rho_hat = e^{Im gamma} psi is smooth, S(rho_hat)
    // comes spectrally from its grid samples.
    std::vector<double> samples(M_);
    for (int i = 0; i < M_; ++i)
        samples[i] = psi_grid_[i] * std::exp(gamma_s_.conjugate_at(i));
    smooth_rho_ = std::make_shared<Schwarz>(samples, offset_);
}

void DiskSolver::build_arc_tables() {
    std::vector<std::pair<double, double>> breaks;  // (angle, alpha at the break)
    for (const auto& c : data_.cs) breaks.emplace_back(c.angle, c.alpha);
    if (beta_.has_aux) breaks.emplace_back(beta_.aux_angle, 0.0);
    std::sort(breaks.begin(), breaks.end());
    const std::size_t nb = breaks.size();
    for (std::size_t i = 0; i < std::max<std::size_t>(nb, 1); ++i) {
        ArcTable arc;
        if (nb == 0) {
            arc.a = offset_;
            arc.b = offset_ + kTwoPi;
            arc.alpha_left = arc.alpha_right = 0.0;
        } else {
            arc.a = breaks[i].first;
            arc.b = i + 1 < nb ? breaks[i + 1].first : breaks[0].first + kTwoPi;
            arc.alpha_left = breaks[i].second;
            arc.alpha_right = i + 1 < nb ? breaks[i + 1].second : breaks[0].second;
        }
        arc.beta_sign = beta_.beta(0.5 * (arc.a + arc.b));
        const int npts =
            std::max(385, static_cast<int>(M_ * (arc.b - arc.a) / kTwoPi) | 1);
        std::vector<double> us(npts), vals(npts);
        for (int j = 0; j < npts; ++j) {
            us[j] = static_cast<double>(j) / (npts - 1);
            const double th = arc.angle_of(us[j]);
            vals[j] = data_.psi(num::wrap_2pi(th)) * std::exp(gamma_im_boundary(th));
        }
        arc.table = num::Pchip(us, vals);
        arcs_.push_back(std::move(arc));
    }
}

const DiskSolver::ArcTable& DiskSolver::arc_of(double theta) const {
    for (const auto& arc : arcs_) {
        const double th = wrap_into(theta, arc.a);
        if (th <= arc.b) return arc;
    }
    return arcs_.back();
}

double DiskSolver::rho(double theta) const {
    double denom = 1.0;
    for (const auto& c : data_.cs)
        denom *= std::pow(std::abs(2.0 * std::sin(0.5 * (theta - c.angle))), c.alpha);
    return beta_.beta(theta) * data_.psi(num::wrap_2pi(theta)) / denom;
}

double DiskSolver::rho_hat(double theta) const {
    if (!has_rho_) return 0.0;
    const auto& arc = arc_of(theta);
    const double th = wrap_into(theta, arc.a);
    const double smooth = arc.table(arc.u_of(th));
    double denom = 1.0;
    for (const auto& c : data_.cs)
        denom *= std::pow(std::abs(2.0 * std::sin(0.5 * (theta - c.angle))), c.alpha);
    return arc.beta_sign * smooth / denom;
}

namespace {

struct PanelJob {
    double a, b;
    double alpha_left, alpha_right;  // weight exponents carried by the panel ends
};

}  // namespace

// Integrate rho_hat(theta) * kernel(theta, z) over all arcs with Gauss-Jacobi
// panels at singular ends, refining dyadically toward the target.
cplx DiskSolver::integrate_kernel(const std::function<cplx(double, cplx)>& kernel,
                                  cplx z) const {
    static thread_local std::map<std::pair<double, double>, num::QuadRule> rule_cache;
    const int n = num_.gj_nodes;
    auto rule_for = [&](double al, double ar) -> const num::QuadRule& {
        auto key = std::make_pair(al, ar);
        auto it = rule_cache.find(key);
        if (it == rule_cache.end())
            it = rule_cache.emplace(key, num::gauss_jacobi(n, -ar, -al)).first;
        return it->second;
    };
    cplx total = 0.0;
    for (const auto& arc : arcs_) {
        std::vector<PanelJob> jobs;
        {
            // cap initial panels at pi/2 so long smooth arcs stay resolved
            const int parts = std::max(1, static_cast<int>(std::ceil((arc.b - arc.a) / (kPi / 2))));
            for (int s = 0; s < parts; ++s) {
                PanelJob j;
                j.a = arc.a + (arc.b - arc.a) * s / parts;
                j.b = arc.a + (arc.b - arc.a) * (s + 1) / parts;
                j.alpha_left = s == 0 ? arc.alpha_left : 0.0;
                j.alpha_right = s + 1 == parts ? arc.alpha_right : 0.0;
                jobs.push_back(j);
            }
        }
        while (!jobs.empty()) {
            PanelJob job = jobs.back();
            jobs.pop_back();
            const double len = job.b - job.a;
            // distance from the target to this sub-arc
            double dist = std::numeric_limits<double>::infinity();
            for (int s = 0; s <= 4; ++s) {
                const double th = job.a + len * s / 4.0;
                dist = std::min(dist, std::abs(std::polar(1.0, th) - z));
            }
            if (dist < 0.8 * len && len > 2e-5) {
                const double mid = 0.5 * (job.a + job.b);
                jobs.push_back({job.a, mid, job.alpha_left, 0.0});
                jobs.push_back({mid, job.b, 0.0, job.alpha_right});
                continue;
            }
            const auto& rule = rule_for(job.alpha_left, job.alpha_right);
            const double half = 0.5 * len;
            cplx acc = 0.0;
            for (int i = 0; i < static_cast<int>(rule.nodes.size()); ++i) {
                const double t = rule.nodes[i];
                const double th = 0.5 * (job.a + job.b) + half * t;
                // smooth part: beta * psi * e^{Im gamma} / regular factors
                const auto& table_arc = arc;
                const double u = table_arc.u_of(wrap_into(th, table_arc.a));
                double g = table_arc.beta_sign * table_arc.table(u);
                for (const auto& c : data_.cs) {
                    const double d = std::abs(2.0 * std::sin(0.5 * (th - c.angle)));
                    if (std::abs(num::wrap_pm_pi(c.angle - job.a)) < 1e-14 &&
                        job.alpha_left > 0.0) {
                        // |zeta-c|^-alpha = (1+t)^-alpha * [(1+t)/d]^alpha; the
                        // first factor is the Jacobi weight
                        g *= std::pow((1.0 + t) / d, c.alpha);
                    } else if (std::abs(num::wrap_pm_pi(c.angle - job.b)) < 1e-14 &&
                               job.alpha_right > 0.0) {
                        g *= std::pow((1.0 - t) / d, c.alpha);
                    } else {
                        g /= std::pow(d, c.alpha);
                    }
                }
                acc += rule.weights[i] * g * kernel(th, z);
            }
            total += acc * half;
        }
    }
    return total;
}

cplx DiskSolver::schwarz_rho_hat_far(cplx z) const {
    auto kernel = [](double th, cplx zz) {
        const cplx zeta = std::polar(1.0, th);
        return (zeta + zz) / (zeta - zz) / kTwoPi;
    };
    return integrate_kernel(kernel, z);
}

cplx DiskSolver::schwarz_rho_hat(cplx z) const {
    if (!has_rho_) return 0.0;
    if (smooth_rho_) return (*smooth_rho_)(z);
    const double snap = 1e-5;
    const double az = std::abs(z);
    if (az > 1.0 - snap) {
        // Hoelder continuity up to the rim: snap to the boundary trace,
        // except next to a singular point where the trace blows up
        const double th = std::arg(z);
        bool near_c = false;
        for (const auto& c : data_.cs)
            if (std::abs(num::wrap_pm_pi(th - c.angle)) < 1e-3) near_c = true;
        if (!near_c) return schwarz_rho_hat_boundary(th);
    }
    return schwarz_rho_hat_far(z);
}

cplx DiskSolver::schwarz_rho_hat_boundary(double theta) const {
    if (!has_rho_) return 0.0;
    if (smooth_rho_) {
        const double th = num::wrap_2pi(theta);
        const double re = data_.psi(th) * std::exp(gamma_s_.conjugate_at_angle(th));
        return cplx(re, smooth_rho_->conjugate_at_angle(th));
    }
    const double th0 = num::wrap_2pi(theta);
    const double r0 = rho_hat(th0);
    const cplx z = std::polar(1.0, th0);
    // symmetric window around theta0 inside its arc piece: principal-value
    // part with the differenced integrand
    const auto& arc = arc_of(th0);
    const double ta = wrap_into(th0, arc.a);
    // keep the principal-value window clear of the singular arc ends
    const double r_win = 0.5 * std::min(ta - arc.a, arc.b - ta);
    cplx acc = 0.0;
    if (r_win > 1e-12) {
        // dyadic panels toward theta0 from both sides
        const auto& rule = num::gauss_legendre(num_.gj_nodes);
        for (int side = -1; side <= 1; side += 2) {
            double outer = r_win;
            while (outer > 1e-9) {
                const double inner = outer > 2e-9 ? outer / 2 : 0.0;
                const double a = th0 + side * inner, b = th0 + side * outer;
                const double lo = std::min(a, b), hi = std::max(a, b);
                for (int i = 0; i < static_cast<int>(rule.nodes.size()); ++i) {
                    const double th = 0.5 * (lo + hi) + 0.5 * (hi - lo) * rule.nodes[i];
                    const double diff = rho_hat(th) - r0;
                    const cplx k = cplx(0, -1) / std::tan(0.5 * (th - th0));
                    acc += rule.weights[i] * 0.5 * (hi - lo) * diff * k / kTwoPi;
                }
                if (inner == 0.0) break;
                outer = inner;
            }
        }
    }
    // the rest of the circle: plain kernel, adaptive panels relative to z
    auto kernel = [&](double th, cplx zz) {
        const cplx zeta = std::polar(1.0, th);
        return (zeta + zz) / (zeta - zz) / kTwoPi;
    };
    // integrate over all arcs but with the symmetric window removed
    static thread_local std::map<std::pair<double, double>, num::QuadRule> rule_cache;
    const int n = num_.gj_nodes;
    auto rule_for = [&](double al, double ar) -> const num::QuadRule& {
        auto key = std::make_pair(al, ar);
        auto it = rule_cache.find(key);
        if (it == rule_cache.end())
            it = rule_cache.emplace(key, num::gauss_jacobi(n, -ar, -al)).first;
        return it->second;
    };
    cplx total = 0.0;
    for (const auto& a : arcs_) {
        std::vector<PanelJob> jobs;
        // split the arc containing theta0 into the pieces outside the window
        const double ta2 = wrap_into(th0, a.a);
        if (&a == &arc && r_win > 1e-12) {
            const double wl = ta2 - r_win, wh = ta2 + r_win;
            if (wl - a.a > 1e-12) jobs.push_back({a.a, wl, a.alpha_left, 0.0});
            if (a.b - wh > 1e-12) jobs.push_back({wh, a.b, 0.0, a.alpha_right});
        } else {
            const int parts = std::max(1, static_cast<int>(std::ceil((a.b - a.a) / (kPi / 2))));
            for (int s = 0; s < parts; ++s) {
                PanelJob j;
                j.a = a.a + (a.b - a.a) * s / parts;
                j.b = a.a + (a.b - a.a) * (s + 1) / parts;
                j.alpha_left = s == 0 ? a.alpha_left : 0.0;
                j.alpha_right = s + 1 == parts ? a.alpha_right : 0.0;
                jobs.push_back(j);
            }
        }
        while (!jobs.empty()) {
            PanelJob job = jobs.back();
            jobs.pop_back();
            const double len = job.b - job.a;
            double dist = std::numeric_limits<double>::infinity();
            for (int s = 0; s <= 4; ++s) {
                const double th = job.a + len * s / 4.0;
                dist = std::min(dist, std::abs(std::polar(1.0, th) - z));
            }
            if (dist < 0.8 * len && len > 2e-6) {
                const double mid = 0.5 * (job.a + job.b);
                jobs.push_back({job.a, mid, job.alpha_left, 0.0});
                jobs.push_back({mid, job.b, 0.0, job.alpha_right});
                continue;
            }
            const auto& rule = rule_for(job.alpha_left, job.alpha_right);
            const double half = 0.5 * len;
            cplx acc2 = 0.0;
            for (int i = 0; i < static_cast<int>(rule.nodes.size()); ++i) {
                const double t = rule.nodes[i];
                const double th = 0.5 * (job.a + job.b) + half * t;
                const double u = a.u_of(wrap_into(th, a.a));
                double g = a.beta_sign * a.table(u);
                for (const auto& c : data_.cs) {
                    const double d = std::abs(2.0 * std::sin(0.5 * (th - c.angle)));
                    if (std::abs(num::wrap_pm_pi(c.angle - job.a)) < 1e-14 &&
                        job.alpha_left > 0.0) {
                        g *= std::pow((1.0 + t) / d, c.alpha);
                    } else if (std::abs(num::wrap_pm_pi(c.angle - job.b)) < 1e-14 &&
                               job.alpha_right > 0.0) {
                        g *= std::pow((1.0 - t) / d, c.alpha);
                    } else {
                        g /= std::pow(d, c.alpha);
                    }
                }
                acc2 += rule.weights[i] * g * kernel(th, z);
            }
            total += acc2 * half;
        }
    }
    return r0 + acc + total;
}

std::vector<cplx> DiskSolver::continuity_residuals(int count) const {
    std::vector<cplx> out;
    if (smooth_rho_ || !has_rho_) {
        // 2 pi i times the Taylor coefficients of S(rho_hat)
        for (int s = 1; s <= count; ++s) {
            cplx c = 0.0;
            if (has_rho_) {
                const auto& cf = smooth_rho_->coefficients();
                c = s - 1 < static_cast<int>(cf.size()) ? cf[s - 1] : cplx(0, 0);
            }
            out.push_back(kTwoPi * cplx(0, 1) * c);
        }
        return out;
    }
    for (int s = 1; s <= count; ++s) {
        auto kernel = [s](double th, cplx) {
            // int rho_hat zeta^{-s} dzeta, dzeta = i zeta dtheta
            const cplx zeta = std::polar(1.0, th);
            return cplx(0, 1) * ipow(zeta, 1 - s);
        };
        out.push_back(integrate_kernel(kernel, cplx(100.0, 0.0)));
    }
    return out;
}

cplx DiskSolver::w0(cplx z, const FamilyParams& p, bool with_particular) const {
    const int k = data_.kappa;
    if (k < 0 && (p.d0 != 0.0 || !p.d.empty()))
        throw ValidationError("disk solver: negative index admits no free parameters");
    if (static_cast<int>(p.d.size()) > std::max(k, 0))
        throw ValidationError("disk solver: too many free parameters");
    cplx poly = 0.0;
    if (k >= 0) {
        poly = cplx(0, 1) * p.d0 * ipow(z, k);
        for (std::size_t l = 1; l <= p.d.size(); ++l) {
            poly += p.d[l - 1] * ipow(z, k + static_cast<int>(l));
            poly -= std::conj(p.d[l - 1]) * ipow(z, k - static_cast<int>(l));
        }
    }
    cplx part = 0.0;
    if (with_particular && has_rho_) {
        if (std::abs(z) < 1e-14 && k < 0)
            throw NumericError("disk solver: evaluation at the pole");
        part = ipow(z, k) * schwarz_rho_hat(z);
    }
    return std::exp(cplx(0, 1) * gamma(z)) * (part + poly);
}

cplx DiskSolver::w(cplx z, const FamilyParams& p, bool with_particular) const {
    cplx v = w0(z, p, with_particular);
    for (const auto& c : data_.cs) v *= power_factor(z, c.angle, c.alpha);
    return v;
}

cplx DiskSolver::w_boundary(double theta, const FamilyParams& p, bool with_particular) const {
    const cplx zeta = std::polar(1.0, theta);
    const int k = data_.kappa;
    cplx poly = 0.0;
    if (k >= 0) {
        poly = cplx(0, 1) * p.d0 * ipow(zeta, k);
        for (std::size_t l = 1; l <= p.d.size(); ++l) {
            poly += p.d[l - 1] * ipow(zeta, k + static_cast<int>(l));
            poly -= std::conj(p.d[l - 1]) * ipow(zeta, k - static_cast<int>(l));
        }
    }
    cplx part = 0.0;
    if (with_particular && has_rho_) part = ipow(zeta, k) * schwarz_rho_hat_boundary(theta);
    const cplx g(gamma_re_boundary(theta), gamma_im_boundary(theta));
    cplx v = std::exp(cplx(0, 1) * g) * (part + poly);
    for (const auto& c : data_.cs) v *= power_factor(zeta, c.angle, c.alpha);
    return v;
}

Eigen::MatrixXd DiskSolver::vanish_constraints(const std::vector<double>& zero_alpha_angles) const {
    const int k = std::max(data_.kappa, 0);
    Eigen::MatrixXd A(zero_alpha_angles.size(), 2 * k + 1);
    for (std::size_t r = 0; r < zero_alpha_angles.size(); ++r) {
        const cplx c = std::polar(1.0, zero_alpha_angles[r]);
        A(r, 0) = 1.0;
        cplx cp = 1.0;
        for (int l = 1; l <= k; ++l) {
            cp *= c;
            A(r, 2 * l - 1) = 2.0 * cp.imag();  // coefficient of Re d_l
            A(r, 2 * l) = 2.0 * cp.real();      // coefficient of Im d_l
        }
    }
    return A;
}

std::vector<FamilyParams> DiskSolver::homogeneous_basis(double svd_threshold) const {
    const int k = data_.kappa;
    if (k < 0) return {};
    std::vector<double> zeros;
    for (const auto& c : data_.cs)
        if (c.alpha == 0.0) zeros.push_back(c.angle);
    const int dim = 2 * k + 1;
    Eigen::MatrixXd kernel;
    if (zeros.empty()) {
        kernel = Eigen::MatrixXd::Identity(dim, dim);
    } else {
        Eigen::MatrixXd A = vanish_constraints(zeros);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        const double cut = sv.size() ? sv(0) * svd_threshold : 0.0;
        int rank = 0;
        for (int i = 0; i < sv.size(); ++i)
            if (sv(i) > cut) ++rank;
        const int kd = dim - rank;
        kernel = svd.matrixV().rightCols(kd);
    }
    std::vector<FamilyParams> basis;
    for (int j = 0; j < kernel.cols(); ++j) {
        FamilyParams p;
        p.d0 = kernel(0, j);
        for (int l = 1; l <= k; ++l)
            p.d.emplace_back(kernel(2 * l - 1, j), kernel(2 * l, j));
        basis.push_back(std::move(p));
    }
    return basis;
}

cplx DiskSolver::boundary_limit_closed_form(int k) const {
    const auto& c = data_.cs.at(k);
    if (c.alpha <= 0.0)
        throw ValidationError("boundary limit: alpha = 0 at this discontinuity");
    const double sign = (c.q % 2 == 0) ? 1.0 : -1.0;
    return sign * (c.lambda_minus * c.psi_plus - c.lambda_plus * c.psi_minus) /
           (cplx(0, 1) * std::sin(kPi * c.alpha));
}

cplx DiskSolver::boundary_limit_radial(int k, const FamilyParams& p) const {
    const auto& c = data_.cs.at(k);
    const cplx dir = std::polar(1.0, c.angle);
    std::vector<double> deltas{0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125};
    std::vector<cplx> vals;
    for (double d : deltas) vals.push_back(w((1.0 - d) * dir, p));
    // least-squares fit of v + C1 d^pe + C2 d^{min(2 pe, 1)} over an exponent grid
    cplx best_v = vals.back();
    double best_res = std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(deltas.size());
    for (double pe = 0.1; pe <= 1.001; pe += 0.025) {
        const double e2 = std::min(2.0 * pe, 1.0);
        Eigen::MatrixXd B(n, 3);
        Eigen::VectorXcd y(n);
        for (int i = 0; i < n; ++i) {
            B(i, 0) = 1.0;
            B(i, 1) = std::pow(deltas[i], pe);
            B(i, 2) = std::pow(deltas[i], e2);
            y(i) = vals[i];
        }
        const Eigen::MatrixXd G = B.transpose() * B;
        const Eigen::VectorXcd rhs = B.transpose() * y;
        if (std::abs(G.determinant()) < 1e-18) continue;
        const Eigen::VectorXcd sol = G.ldlt().solve(rhs.real()).eval().cast<cplx>() +
                                     cplx(0, 1) * G.ldlt().solve(rhs.imag()).eval().cast<cplx>();
        double res = 0;
        for (int i = 0; i < n; ++i)
            res += std::norm(y(i) - sol(0) - sol(1) * B(i, 1) - sol(2) * B(i, 2));
        if (res < best_res) {
            best_res = res;
            best_v = sol(0);
        }
    }
    return best_v;
}

cplx DiskSolver::laurent_coefficient(int m, const FamilyParams& p, double radius) const {
    const int n = 512;
    cplx acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double th = kTwoPi * i / n;
        const cplx z = std::polar(radius, th);
        // (1/2pi i) int w z^{m-1} dz, dz = i z dtheta
        acc += w(z, p) * ipow(z, m);
    }
    return acc / static_cast<double>(n);
}

int DiskSolver::pole_order(const FamilyParams& p, double rel_threshold) const {
    const int kmax = std::max(-data_.kappa, 0) + 2;
    std::vector<double> mags;
    double scale = 0.0;
    for (int m = -2; m <= kmax; ++m) {
        const double a = std::abs(laurent_coefficient(m, p, num_.pole_contour_radius));
        if (m >= 1) mags.push_back(a);
        scale = std::max(scale, a);
    }
    if (scale == 0.0) return 0;
    int order = 0;
    for (int m = 1; m <= static_cast<int>(mags.size()); ++m)
        if (mags[m - 1] > rel_threshold * scale) order = m;
    return order;
}

}  // namespace degrh::disk
