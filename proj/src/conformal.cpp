#include "degrh/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <cstdio>
#include <cstdlib>

#include "degrh/numerics.hpp"

namespace degrh::conformal {

namespace {

constexpr double kNearFactor = 2.0;  // panels closer than this x chord use moment evaluation

// Even-odd point-in-polygon test in the chord coordinates.
bool point_in_polygon(const std::vector<double>& xr, const std::vector<double>& xi, double px,
                      double py) {
    bool inside = false;
    const std::size_t n = xr.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        if ((xi[i] > py) != (xi[j] > py)) {
            const double xint = xr[j] + (xr[i] - xr[j]) * (py - xi[j]) / (xi[i] - xi[j]);
            if (px < xint) inside = !inside;
        }
    }
    return inside;
}

// squared distance to the polyline and the squared length of the nearest segment
std::pair<double, double> polyline_dist2(const std::vector<double>& xr,
                                         const std::vector<double>& xi, double px, double py) {
    double best = std::numeric_limits<double>::infinity();
    double seg2 = 0.0;
    for (std::size_t i = 0; i + 1 < xr.size(); ++i) {
        const double ax = xr[i], ay = xi[i], bx = xr[i + 1], by = xi[i + 1];
        const double dx = bx - ax, dy = by - ay;
        const double len2 = dx * dx + dy * dy;
        double t = len2 > 0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const double ex = px - (ax + t * dx), ey = py - (ay + t * dy);
        const double d2 = ex * ex + ey * ey;
        if (d2 < best) {
            best = d2;
            seg2 = len2;
        }
    }
    return {best, seg2};
}

}  // namespace

cplx DiskMapper::side_deriv(int side, double t) const {
    const double h = 1e-6 * (sides_[side].t1 - sides_[side].t0 + 1e-12);
    return (sides_[side].w(t + h) - sides_[side].w(t - h)) / (2.0 * h);
}

cplx DiskMapper::side_second(int side, double t) const {
    const double h = 1e-4 * (sides_[side].t1 - sides_[side].t0 + 1e-12);
    return (sides_[side].w(t + h) - 2.0 * sides_[side].w(t) + sides_[side].w(t - h)) / (h * h);
}

void DiskMapper::build_panels() {
    const int nodes = opt_.nodes_per_panel;
    const auto& rule = num::gauss_legendre(nodes);

    for (int s = 0; s < static_cast<int>(sides_.size()); ++s) {
        const auto& side = sides_[s];
        // arc-length table for break placement
        const int probe = 768;
        std::vector<double> ts(probe + 1), cum(probe + 1, 0.0);
        for (int i = 0; i <= probe; ++i)
            ts[i] = side.t0 + (side.t1 - side.t0) * i / static_cast<double>(probe);
        cplx prev = side.w(ts[0]);
        for (int i = 1; i <= probe; ++i) {
            const cplx p = side.w(ts[i]);
            cum[i] = cum[i - 1] + std::abs(p - prev);
            prev = p;
        }
        const double len = cum.back();
        auto param_at = [&](double arclen) {
            arclen = std::clamp(arclen, 0.0, len);
            auto it = std::lower_bound(cum.begin(), cum.end(), arclen);
            std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - cum.begin()),
                                                    1, static_cast<std::size_t>(probe));
            const double f = (arclen - cum[i - 1]) / std::max(cum[i] - cum[i - 1], 1e-300);
            return ts[i - 1] + f * (ts[i] - ts[i - 1]);
        };

        std::vector<double> breaks{0.0};  // arc-length breakpoints
        if (corners_) {
            const double endlen = len * opt_.end_region_fraction;
            std::vector<double> ladder;
            double step = endlen;
            for (int d = 0; d < opt_.grading_depth; ++d) {
                step /= opt_.grading_factor;
                ladder.push_back(step);
            }
            for (auto it = ladder.rbegin(); it != ladder.rend(); ++it) breaks.push_back(*it);
            breaks.push_back(endlen);
            const int mid = std::max(2, opt_.base_panels_per_side);
            for (int i = 1; i < mid; ++i)
                breaks.push_back(endlen + (len - 2 * endlen) * i / static_cast<double>(mid));
            breaks.push_back(len - endlen);
            for (double l : ladder) breaks.push_back(len - l);
            breaks.push_back(len);
        } else {
            const int n = std::max(8 * opt_.base_panels_per_side, 64);
            for (int i = 1; i <= n; ++i) breaks.push_back(len * i / static_cast<double>(n));
        }
        std::sort(breaks.begin(), breaks.end());

        for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
            Panel p;
            p.side = s;
            p.a = param_at(breaks[k]);
            p.b = param_at(breaks[k + 1]);
            if (p.b - p.a < 1e-14) continue;
            panels_.push_back(p);
        }
    }

    // Fill node data; split any panel whose chord coordinates bulge too far.
    std::vector<Panel> done;
    std::vector<Panel> todo = std::move(panels_);
    int guard = 0;
    while (!todo.empty() && guard++ < 100000) {
        Panel p = todo.back();
        todo.pop_back();
        p.t.resize(nodes);
        p.w.resize(nodes);
        p.wp.resize(nodes);
        p.quad_w.resize(nodes);
        for (int i = 0; i < nodes; ++i) {
            p.t[i] = 0.5 * (p.a + p.b) + 0.5 * (p.b - p.a) * rule.nodes[i];
            p.w[i] = side_point(p.side, p.t[i]);
            p.wp[i] = side_deriv(p.side, p.t[i]);
            p.quad_w[i] = 0.5 * (p.b - p.a) * rule.weights[i];
        }
        p.wa = side_point(p.side, p.a);
        p.wb = side_point(p.side, p.b);
        p.mid = 0.5 * (p.wa + p.wb);
        p.half = 0.5 * (p.wb - p.wa);
        bool flat = std::abs(p.half) > 1e-14;
        double max_im = 0.0;
        if (flat) {
            double prev_re = -1.0 - 1e-12;
            for (int i = 0; i < nodes; ++i) {
                const cplx xi = (p.w[i] - p.mid) / p.half;
                max_im = std::max(max_im, std::abs(xi.imag()));
                if (xi.real() <= prev_re) flat = false;
                prev_re = xi.real();
            }
        }
        if ((!flat || max_im > 0.05) && p.b - p.a > 1e-10) {
            Panel l, r;
            l.side = r.side = p.side;
            l.a = p.a;
            l.b = 0.5 * (p.a + p.b);
            r.a = l.b;
            r.b = p.b;
            todo.push_back(l);
            todo.push_back(r);
            continue;
        }
        std::vector<std::pair<double, double>> xi;
        xi.emplace_back(-1.0, 0.0);
        for (int i = 0; i < nodes; ++i) {
            const cplx x = (p.w[i] - p.mid) / p.half;
            xi.emplace_back(x.real(), x.imag());
        }
        xi.emplace_back(1.0, 0.0);
        std::sort(xi.begin(), xi.end());
        for (auto& [re, im] : xi) {
            p.xi_re.push_back(re);
            p.xi_im.push_back(im);
        }
        cplx c = std::accumulate(p.w.begin(), p.w.end(), cplx(0, 0));
        p.bc_center = c / static_cast<double>(nodes);
        p.bc_radius = 0.0;
        for (const auto& w : p.w) p.bc_radius = std::max(p.bc_radius, std::abs(w - p.bc_center));
        done.push_back(std::move(p));
    }
    std::sort(done.begin(), done.end(), [](const Panel& x, const Panel& y) {
        return x.side != y.side ? x.side < y.side : x.a < y.a;
    });
    panels_ = std::move(done);
}

void DiskMapper::solve_density() {
    int n = 0;
    for (const auto& p : panels_) n += static_cast<int>(p.t.size());
    Eigen::MatrixXd K(n, n);
    Eigen::VectorXd rhs(n);
    std::vector<cplx> all_w(n), all_wp(n);
    std::vector<double> all_q(n);
    std::vector<std::pair<int, int>> loc(n);
    {
        int idx = 0;
        for (int pi = 0; pi < static_cast<int>(panels_.size()); ++pi) {
            const auto& p = panels_[pi];
            for (std::size_t i = 0; i < p.t.size(); ++i, ++idx) {
                all_w[idx] = p.w[i];
                all_wp[idx] = p.wp[i];
                all_q[idx] = p.quad_w[i];
                loc[idx] = {pi, static_cast<int>(i)};
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        rhs(i) = -std::log(std::abs(all_w[i] - center_));
        for (int j = 0; j < n; ++j) {
            double kij;
            if (i == j) {
                const auto [pi, li] = loc[i];
                const cplx wpp = side_second(panels_[pi].side, panels_[pi].t[li]);
                kij = std::imag(wpp / (2.0 * all_wp[i])) / kTwoPi;
            } else {
                kij = std::imag(all_wp[j] / (all_w[j] - all_w[i])) / kTwoPi;
            }
            K(i, j) = kij * all_q[j] + (i == j ? 0.5 : 0.0);
        }
    }
    Eigen::VectorXd mu = K.partialPivLu().solve(rhs);
    mu_.assign(mu.data(), mu.data() + n);

    // per-panel interpolation of mu in the chord coordinate
    int idx = 0;
    for (auto& p : panels_) {
        const int m = static_cast<int>(p.t.size());
        Eigen::MatrixXcd V(m, m);
        Eigen::VectorXcd r(m);
        for (int i = 0; i < m; ++i) {
            const cplx xi = (p.w[i] - p.mid) / p.half;
            cplx pw = 1.0;
            for (int k = 0; k < m; ++k) {
                V(i, k) = pw;
                pw *= xi;
            }
            r(i) = mu_[idx + i];
        }
        p.coeff = V.partialPivLu().solve(r);
        idx += m;
    }
}

cplx DiskMapper::cauchy(cplx z, bool /*boundary_limit*/) const {
    // Near and on-curve targets go through per-panel polynomial moments with
    // the chord branch cut, which yields the interior one-sided limit.
    // Targets that sit exactly on a panel junction hit the log singularity of
    // the endpoint moment; nudge them an epsilon toward the interior first.
    for (const auto& p : panels_) {
        const cplx xi_a = (z - p.mid) / p.half;
        for (double sgn : {-1.0, 1.0}) {
            if (std::abs(xi_a - sgn) < 1e-9) {
                const cplx dir = p.half / std::abs(p.half);
                z += cplx(0, 1) * dir * (2e-9 * std::abs(p.half));
                break;
            }
        }
    }
    cplx acc = 0.0;
    int idx = 0;
    for (const auto& p : panels_) {
        const int m = static_cast<int>(p.t.size());
        const double d = std::abs(z - p.bc_center);
        if (d > p.bc_radius + kNearFactor * 2.0 * std::abs(p.half)) {
            cplx s = 0.0;
            for (int i = 0; i < m; ++i)
                s += mu_[idx + i] * p.wp[i] * p.quad_w[i] / (p.w[i] - z);
            acc += s;
        } else {
            const cplx xi = (z - p.mid) / p.half;
            cplx I = std::log((1.0 - xi) / (-1.0 - xi));
            cplx s = p.coeff(0) * I;
            for (int k = 1; k < m; ++k) {
                const double seg = (k % 2 == 1) ? 2.0 / static_cast<double>(k) : 0.0;
                I = xi * I + seg;
                s += p.coeff(k) * I;
            }
            // Decide whether the chord-path moments need the residue that
            // moves the value to the interior side: for targets on this
            // panel's own curve the rule is Im(xi) < 0; for other targets,
            // membership in the lens between the panel and its chord.
            bool correct = false;
            if (std::abs(xi.real()) < 1.0 + 0.2 && std::abs(xi.imag()) < 0.6) {
                const auto [d2, seg2] =
                    polyline_dist2(p.xi_re, p.xi_im, xi.real(), xi.imag());
                if (std::abs(xi.real()) < 1.0 && d2 < 0.04 * seg2) {
                    // on (or hugging) this panel's own curve
                    correct = xi.imag() < 0.0;
                } else {
                    correct = point_in_polygon(p.xi_re, p.xi_im, xi.real(), xi.imag()) &&
                              xi.imag() < 0.0;
                }
            }
            const bool old_rule = std::abs(xi.real()) < 1.0 && xi.imag() < 0.0;
            if (old_rule != correct && std::getenv("DEGRH_LENS_DEBUG")) {
                std::fprintf(stderr,
                             "LENSDIFF panel side=%d [%.6f,%.6f] xi=(%.4f,%.4f) old=%d new=%d\n",
                             p.side, p.a, p.b, xi.real(), xi.imag(), (int)old_rule, (int)correct);
            }
            if (correct) {
                cplx pv = 0.0, pw = 1.0;
                for (int k = 0; k < m; ++k) {
                    pv += p.coeff(k) * pw;
                    pw *= xi;
                }
                s += kTwoPi * cplx(0, 1) * pv;
            }
            acc += s;
        }
        idx += m;
    }
    return acc / (kTwoPi * cplx(0, 1));
}

void DiskMapper::build_tables() {
    // Correspondence nodes skip the two innermost ladder panels at each
    // corner: the density is resolved there for the solve, but the angle
    // evaluation carries the corner discretization noise, and the excluded
    // span is covered by the extrapolated corner anchors instead.
    std::vector<cplx> corner_pt(sides_.size());
    std::vector<double> cut(sides_.size(), 0.0);
    if (corners_) {
        for (std::size_t s = 0; s < sides_.size(); ++s)
            corner_pt[s] = side_point(static_cast<int>(s), sides_[s].t1);
        for (const auto& p : panels_) {
            const double len = std::abs(p.wb - p.wa);
            // accumulate per-side ladder scale from the innermost panels
            (void)len;
        }
        for (std::size_t s = 0; s < sides_.size(); ++s) {
            // side image length from its panels
            double L = 0.0;
            for (const auto& p : panels_)
                if (p.side == static_cast<int>(s)) L += std::abs(p.wb - p.wa);
            cut[s] = L * opt_.end_region_fraction *
                     std::pow(opt_.grading_factor, -(opt_.grading_depth - 2));
        }
    }
    std::vector<int> side_first(sides_.size(), -1), side_last(sides_.size(), -1);
    std::vector<double> raw_t, raw_th;
    std::vector<cplx> raw_w;
    for (const auto& p : panels_) {
        for (std::size_t i = 0; i < p.t.size(); ++i) {
            const cplx w = p.w[i];
            if (corners_) {
                const cplx left_c = corner_pt[(p.side + sides_.size() - 1) % sides_.size()];
                const cplx right_c = corner_pt[p.side];
                if (std::abs(w - left_c) < cut[p.side] || std::abs(w - right_c) < cut[p.side])
                    continue;
            }
            if (side_first[p.side] < 0) side_first[p.side] = static_cast<int>(raw_t.size());
            side_last[p.side] = static_cast<int>(raw_t.size());
            const double th = std::arg(w - center_) + cauchy(w, true).imag() - g_center_.imag();
            raw_t.push_back(p.t[i]);
            raw_th.push_back(th);
            raw_w.push_back(w);
        }
    }
    num::unwrap_phases(raw_th);

    table_t_.clear();
    table_theta_.clear();
    if (!corners_) {
        table_t_ = raw_t;
        table_theta_ = raw_th;
        table_t_.push_back(raw_t.front() + (sides_[0].t1 - sides_[0].t0));
        table_theta_.push_back(raw_th.front() + kTwoPi);
    } else {
        const int ns = static_cast<int>(sides_.size());
        std::vector<double> corner_left(ns), corner_right(ns);
        for (int s = 0; s < ns; ++s) {
            const int nxt = (s + 1) % ns;
            const cplx din = side_deriv(s, sides_[s].t1);
            const cplx dout = side_deriv(nxt, sides_[nxt].t0);
            const double turn = std::arg(dout / din);
            double beta = std::clamp(1.0 - turn / kPi, 0.05, 1.95);
            const double pexp = 1.0 / beta;
            const cplx cpt = side_point(s, sides_[s].t1);
            auto extrapolate = [&](int i1, int i2, double wrap) {
                const double d1 = std::abs(cpt - raw_w[i1]);
                const double d2 = std::abs(cpt - raw_w[i2]);
                const double th1 = raw_th[i1] + wrap, th2 = raw_th[i2] + wrap;
                const double den = std::pow(d2, pexp) - std::pow(d1, pexp);
                if (std::abs(den) < 1e-300) return th1;
                return (th1 * std::pow(d2, pexp) - th2 * std::pow(d1, pexp)) / den;
            };
            const double right = extrapolate(side_last[s], side_last[s] - 1, 0.0);
            const double left =
                extrapolate(side_first[nxt], side_first[nxt] + 1, s == ns - 1 ? kTwoPi : 0.0);
            corner_mismatch_ = std::max(corner_mismatch_, std::abs(left - right));
            corner_right[s] = 0.5 * (left + right);
        }
        for (int s = 0; s < ns; ++s)
            corner_left[(s + 1) % ns] = corner_right[s] - ((s == ns - 1) ? kTwoPi : 0.0);
        corner_angles_ = corner_right;

        for (int s = 0; s < ns; ++s) {
            table_t_.push_back(sides_[s].t0);
            table_theta_.push_back(corner_left[s]);
            for (int i = side_first[s]; i <= side_last[s]; ++i) {
                table_t_.push_back(raw_t[i]);
                table_theta_.push_back(raw_th[i]);
            }
            table_t_.push_back(sides_[s].t1);
            table_theta_.push_back(corner_right[s]);
        }
        const double span = table_theta_.back() - table_theta_.front();
        if (std::abs(span - kTwoPi) > 1e-2)
            throw NumericError("conformal map: boundary correspondence span is not 2*pi");
    }

    std::vector<double> ft, fth;
    for (std::size_t i = 0; i < table_t_.size(); ++i) {
        if (!ft.empty() && table_t_[i] <= ft.back() + 1e-13) continue;
        if (!fth.empty() && table_theta_[i] < fth.back() - 1e-6)
            throw NumericError("conformal map: boundary correspondence is not monotone");
        ft.push_back(table_t_[i]);
        fth.push_back(fth.empty() ? table_theta_[i]
                                  : std::max(table_theta_[i], fth.back() + 1e-14));
    }
    angle_interp_ = num::Pchip(ft, fth);
    std::vector<double> gt, gth;
    for (std::size_t i = 0; i < ft.size(); ++i) {
        if (!gth.empty() && fth[i] <= gth.back() + 1e-12) continue;
        gth.push_back(fth[i]);
        gt.push_back(ft[i]);
    }
    param_interp_ = num::Pchip(gth, gt);
}

void DiskMapper::build_seeds() {
    std::vector<cplx> poly;
    for (const auto& p : panels_)
        for (const auto& w : p.w) poly.push_back(w);
    cplx cen = std::accumulate(poly.begin(), poly.end(), cplx(0, 0));
    cen /= static_cast<double>(poly.size());
    double scale = 0.0;
    for (const auto& w : poly) scale = std::max(scale, std::abs(w - cen));
    seeds_.emplace_back(center_, cplx(0, 0));
    const std::size_t stride = std::max<std::size_t>(1, poly.size() / 96);
    for (const auto& p : panels_) {
        for (std::size_t i = 0; i < p.w.size(); i += stride) {
            const cplx n = cplx(0, 1) * p.wp[i] / std::abs(p.wp[i]);
            for (double depth : {0.04, 0.15, 0.4}) {
                const cplx cand = p.w[i] + depth * scale * n;
                if (std::abs(geom::polygon_winding(poly, cand) - 1.0) > 0.05) continue;
                seeds_.emplace_back(cand, forward(cand));
            }
        }
    }
}

DiskMapper::DiskMapper(std::vector<BoundarySide> sides, bool corners, cplx center,
                       const MapOptions& opt)
    : sides_(std::move(sides)), corners_(corners), center_(center), opt_(opt) {
    if (sides_.empty()) throw ValidationError("conformal map: no boundary sides");
    build_panels();
    solve_density();
    g_center_ = cauchy(center_, false);
    build_tables();
    build_seeds();
}

cplx DiskMapper::forward(cplx w) const {
    const cplx g = cauchy(w, false) - cplx(0.0, g_center_.imag());
    return (w - center_) * std::exp(g);
}

cplx DiskMapper::derivative(cplx w) const {
    const double h = 1e-7;
    return (forward(w + h) - forward(w - h)) / (2.0 * h);
}

cplx DiskMapper::inverse(cplx z) const {
    if (seeds_.empty()) throw NumericError("inverse: no seeds");
    cplx w = seeds_.front().first;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [ws, zs] : seeds_) {
        const double d = std::abs(zs - z);
        if (d < best) {
            best = d;
            w = ws;
        }
    }
    cplx fw = forward(w);
    for (int it = 0; it < opt_.newton_max && std::abs(fw - z) > 1e-13; ++it) {
        const cplx dz = derivative(w);
        if (std::abs(dz) < 1e-300) break;
        cplx step = (z - fw) / dz;
        bool improved = false;
        for (int half = 0; half < 30; ++half) {
            const cplx cand = w + step;
            const cplx fc = forward(cand);
            if (std::abs(fc - z) < std::abs(fw - z)) {
                w = cand;
                fw = fc;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;
    }
    if (std::abs(fw - z) > 1e-8)
        throw NumericError("conformal inverse: Newton did not converge");
    return w;
}

double DiskMapper::boundary_angle(double t) const {
    int side = -1;
    for (int s = 0; s < static_cast<int>(sides_.size()); ++s)
        if (t >= sides_[s].t0 - 1e-12 && t <= sides_[s].t1 + 1e-12) side = s;
    if (side < 0) throw ValidationError("boundary_angle: parameter outside the boundary arcs");
    const cplx w = side_point(side, t);
    const double raw = std::arg(w - center_) + cauchy(w, true).imag() - g_center_.imag();
    const double predicted = angle_interp_(t);
    return raw + kTwoPi * std::round((predicted - raw) / kTwoPi);
}

double DiskMapper::clamp_to_sides(double t) const {
    double best = sides_.front().t0;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& s : sides_) {
        if (t >= s.t0 && t <= s.t1) return t;
        for (double e : {s.t0, s.t1}) {
            const double d = std::abs(t - e);
            if (d < best_d) {
                best_d = d;
                best = e;
            }
        }
    }
    return best;
}

double DiskMapper::param_from_angle(double theta) const {
    const double lo = param_interp_.xs().front(), hi = param_interp_.xs().back();
    double th = theta;
    while (th < lo) th += kTwoPi;
    while (th > hi + 1e-12) th -= kTwoPi;
    double t = clamp_to_sides(param_interp_(th));
    for (int it = 0; it < 3; ++it) {
        const double f = boundary_angle(t) - th;
        if (std::abs(f) < 1e-13) break;
        const double d = angle_interp_.derivative(t);
        if (std::abs(d) < 1e-14) break;
        t = clamp_to_sides(
            std::clamp(t - f / d, param_interp_.ys().front(), param_interp_.ys().back()));
    }
    return t;
}

// ---------------------------------------------------------------------------

ComponentMap::ComponentMap(std::vector<BoundarySide> sides, bool corners, cplx center,
                           bool preserved, const MapOptions& opt)
    : preserved_(preserved) {
    if (!preserved_) {
        for (auto& s : sides) {
            auto orig = s.w;
            s.w = [orig](double t) { return std::conj(orig(t)); };
        }
        center = std::conj(center);
    }
    core_ = DiskMapper(std::move(sides), corners, center, opt);
}

void ComponentMap::apply_rotation(cplx r) { rotation_ *= r / std::abs(r); }

cplx ComponentMap::forward(cplx w) const {
    if (preserved_) return rotation_ * core_.forward(w);
    return rotation_ * std::conj(core_.forward(std::conj(w)));
}

cplx ComponentMap::inverse(cplx z) const {
    const cplx zz = z / rotation_;
    if (preserved_) return core_.inverse(zz);
    return std::conj(core_.inverse(std::conj(zz)));
}

double ComponentMap::angle_from_param(double t) const {
    const double base = std::arg(rotation_);
    return preserved_ ? base + core_.boundary_angle(t) : base - core_.boundary_angle(t);
}

double ComponentMap::param_from_angle(double theta) const {
    const double base = std::arg(rotation_);
    return preserved_ ? core_.param_from_angle(theta - base)
                      : core_.param_from_angle(base - theta);
}

// ---------------------------------------------------------------------------

void orient_from_first_integral(geom::Decomposition& dec, const field::ScalarField& F,
                                double fd_step) {
    auto jacobian = [&](cplx p) {
        const double h = fd_step;
        const cplx fx = (F(p.real() + h, p.imag()) - F(p.real() - h, p.imag())) / (2 * h);
        const cplx fy = (F(p.real(), p.imag() + h) - F(p.real(), p.imag() - h)) / (2 * h);
        return std::imag(std::conj(fx) * fy);
    };
    const double j0 = jacobian(dec.components[0].anchor);
    if (std::abs(j0) < 1e-12)
        throw NumericError("first integral has a degenerate Jacobian at the base anchor");
    geom::assign_orientations(dec, 0, j0 > 0.0);
    if (!dec.components[0].preserved)
        throw ValidationError(
            "the component containing s0 is orientation-reversed by the first integrals; "
            "move the base point s0 to the boundary of a preserved component");
    for (const auto& comp : dec.components) {
        const double j = jacobian(comp.anchor);
        if ((j > 0.0) != comp.preserved)
            throw NumericError("orientation flags disagree with the Jacobian of F in component " +
                               std::to_string(comp.id));
    }
}

FirstIntegralAtlas build_atlas(const geom::Decomposition& dec, const field::ScalarField& F,
                               const std::vector<cplx>& anchors, const Numerics& num) {
    FirstIntegralAtlas atlas;
    MapOptions opt;
    opt.nodes_per_panel = num.map_nodes_per_panel;
    opt.base_panels_per_side = num.map_base_panels;
    opt.grading_depth = num.map_grading_depth;
    opt.grading_factor = num.map_grading_factor;
    const Curve tau = dec.domain.boundary;      // copied: sides outlive this call
    const field::ScalarField Fcopy = F;

    for (const auto& comp : dec.components) {
        AtlasComponent ac;
        ac.component = comp.id;
        ac.anchor = anchors.empty() ? comp.anchor : anchors.at(comp.id);
        ac.anchor_image = F(ac.anchor.real(), ac.anchor.imag());

        const bool has_orbits = comp.word.front().orbit_id >= 0;
        std::vector<BoundarySide> sides;
        for (const auto& we : comp.word) {
            BoundarySide s;
            s.t0 = we.arc_begin;
            s.t1 = we.arc_end;
            s.w = [tau, Fcopy](double t) {
                const cplx p = tau(num::wrap_2pi(t));
                return Fcopy(p.real(), p.imag());
            };
            sides.push_back(std::move(s));
        }

        // F must collapse every incident orbit to a point.
        for (const auto& we : comp.word) {
            if (we.orbit_id < 0) continue;
            const auto& orb = dec.orbits[we.orbit_id];
            auto pts = orb.curve.sample(65);
            cplx mean = 0.0;
            for (const auto& p : pts) mean += F(p.real(), p.imag());
            mean /= static_cast<double>(pts.size());
            double sd = 0.0;
            for (const auto& p : pts) sd += std::norm(F(p.real(), p.imag()) - mean);
            sd = std::sqrt(sd / pts.size());
            if (sd > 1e-6)
                throw NumericError("first integral is not constant on orbit " +
                                   std::to_string(we.orbit_id));
        }

        // the image boundary must be simple
        {
            std::vector<cplx> img;
            for (const auto& s : sides)
                for (int i = 0; i < 160; ++i)
                    img.push_back(s.w(s.t0 + (s.t1 - s.t0) * (i + 0.5) / 160.0));
            for (std::size_t i = 0; i + 1 < img.size(); ++i) {
                for (std::size_t j = i + 2; j + 1 < img.size(); ++j) {
                    if (i == 0 && j + 2 == img.size()) continue;
                    const cplx p = img[i], r = img[i + 1] - img[i];
                    const cplx q = img[j], s2 = img[j + 1] - img[j];
                    const double rxs = r.real() * s2.imag() - r.imag() * s2.real();
                    if (std::abs(rxs) < 1e-14) continue;
                    const cplx qp = q - p;
                    const double t = (qp.real() * s2.imag() - qp.imag() * s2.real()) / rxs;
                    const double u = (qp.real() * r.imag() - qp.imag() * r.real()) / (-rxs);
                    if (t > 1e-9 && t < 1 - 1e-9 && u > 1e-9 && u < 1 - 1e-9)
                        throw NumericError("image of the component boundary self-intersects");
                }
            }
        }

        ac.map = ComponentMap(sides, has_orbits, ac.anchor_image, comp.preserved, opt);

        if (has_orbits) {
            for (std::size_t k = 0; k < comp.word.size(); ++k) {
                const double core_angle = ac.map.core().corner_angles().at(k);
                const double ang = ac.map.preserved()
                                       ? std::arg(ac.map.rotation()) + core_angle
                                       : std::arg(ac.map.rotation()) - core_angle;
                ac.c_images.push_back(std::polar(1.0, ang));
                ac.c_angles.push_back(num::wrap_2pi(ang));
            }
        }

        for (int co_id : comp.closed_orbits) {
            const auto& co = dec.closed_orbits.at(co_id);
            auto pts = co.curve.sample(64);
            cplx mean = 0.0;
            for (const auto& p : pts) mean += F(p.real(), p.imag());
            mean /= static_cast<double>(pts.size());
            double sd = 0.0;
            for (const auto& p : pts) sd += std::norm(F(p.real(), p.imag()) - mean);
            if (std::sqrt(sd / pts.size()) > 1e-6)
                throw NumericError(
                    "first integral is not constant on closed orbit " + std::to_string(co_id) +
                    "; components with closed orbits need a collapsing first integral");
            const cplx z = ac.map.forward(mean);
            if (std::abs(z) > 1.0 - 1e-6)
                throw NumericError("closed orbit image is not strictly interior to the disk");
            ac.punctures.emplace_back(co_id, z);
        }

        atlas.comps.push_back(std::move(ac));
    }
    return atlas;
}

cplx align(FirstIntegralAtlas& atlas, const geom::Decomposition& dec, int orbit_id,
           int anchor_component) {
    const auto& inc = dec.incidence.at(orbit_id);
    const int other = inc.component_a == anchor_component ? inc.component_b : inc.component_a;
    auto entry_of = [&](int comp_id) -> std::size_t {
        const auto& word = dec.components[comp_id].word;
        for (std::size_t k = 0; k < word.size(); ++k)
            if (word[k].orbit_id == orbit_id) return k;
        throw NumericError("align: orbit not in component word");
    };
    auto& anchor_ac = atlas.comp(anchor_component);
    auto& other_ac = atlas.comp(other);
    const cplx c = anchor_ac.c_images.at(entry_of(anchor_component));
    const cplx d = other_ac.c_images.at(entry_of(other));
    if (std::abs(std::abs(d) - 1.0) > 1e-6)
        throw NumericError("align: orbit image is not unimodular");
    const cplx rot = (c / d) / std::abs(c / d);
    other_ac.map.apply_rotation(rot);
    for (auto& ci : other_ac.c_images) ci *= rot;
    for (std::size_t k = 0; k < other_ac.c_angles.size(); ++k)
        other_ac.c_angles[k] = num::wrap_2pi(std::arg(other_ac.c_images[k]));
    for (auto& [id, z] : other_ac.punctures) z *= rot;
    return rot;
}

void align_all(FirstIntegralAtlas& atlas, const geom::Decomposition& dec) {
    std::vector<int> order{0};
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (int child : dec.components[order[i]].children) {
            align(atlas, dec, dec.components[child].parent_orbit, order[i]);
            order.push_back(child);
        }
    }
}

cplx atlas_forward(const FirstIntegralAtlas& atlas, const geom::Decomposition& dec,
                   const field::ScalarField& F, int component, cplx p) {
    (void)dec;
    const auto& ac = atlas.comp(component);
    return ac.map.forward(F(p.real(), p.imag()));
}

std::vector<cplx> boundary_pushforward(const FirstIntegralAtlas& atlas,
                                       const geom::Decomposition& dec, int component,
                                       const std::function<cplx(double)>& h,
                                       const std::vector<double>& angles, double guard) {
    (void)dec;
    const auto& ac = atlas.comp(component);
    std::vector<cplx> out;
    out.reserve(angles.size());
    for (double th : angles) {
        for (double ca : ac.c_angles) {
            if (std::abs(num::wrap_pm_pi(th - ca)) < guard)
                throw NumericError("pushforward sample coincides with a discontinuity point");
        }
        const double t = ac.map.param_from_angle(th);
        out.push_back(h(num::wrap_2pi(t)));
    }
    return out;
}

}  // namespace degrh::conformal
