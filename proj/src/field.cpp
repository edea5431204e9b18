#include "degrh/field.hpp"

#include <cmath>

#include "degrh/geometry.hpp"

namespace degrh::field {

void VectorField::check_nonsingular_at(double x, double y, double tol) const {
    if (std::abs(A(x, y)) + std::abs(B(x, y)) <= tol)
        throw NumericError("vector field is singular near (" + std::to_string(x) + ", " +
                           std::to_string(y) + ")");
}

double theta(const VectorField& vf, double x, double y) {
    return std::imag(vf.A(x, y) * std::conj(vf.B(x, y)));
}

void theta_gradient(const VectorField& vf, double x, double y, double h, double& gx, double& gy) {
    gx = (theta(vf, x + h, y) - theta(vf, x - h, y)) / (2 * h);
    gy = (theta(vf, x, y + h) - theta(vf, x, y - h)) / (2 * h);
}

cplx first_integral_residual(const VectorField& vf, const ScalarField& Z, double x, double y,
                             double h) {
    const cplx zx = (Z(x + h, y) - Z(x - h, y)) / (2 * h);
    const cplx zy = (Z(x, y + h) - Z(x, y - h)) / (2 * h);
    if (!std::isfinite(zx.real()) || !std::isfinite(zx.imag()) || !std::isfinite(zy.real()) ||
        !std::isfinite(zy.imag()))
        throw NumericError("first_integral_residual: non-finite partials");
    return vf.A(x, y) * zx + vf.B(x, y) * zy;
}

namespace {

// Normalized cross product of a direction field v against the unit tangent.
// A zero field counts as tangent (defect 0).
double direction_defect(double vx, double vy, cplx unit_tangent) {
    const double n = std::hypot(vx, vy);
    if (n < 1e-14) return 0.0;
    const double cross = vx * unit_tangent.imag() - vy * unit_tangent.real();
    return std::abs(cross) / n;
}

}  // namespace

OrbitReport check_orbit(const VectorField& vf, const Curve& curve, const Tolerances& tol,
                        int samples) {
    OrbitReport rep;
    rep.min_transversal_derivative = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        const double t =
            curve.closed() ? curve.t0() + (curve.t1() - curve.t0()) * i / samples
                           : curve.t0() + (curve.t1() - curve.t0()) * i / (samples - 1.0);
        const cplx p = curve(t);
        const cplx tan = curve.tangent(t);
        const double tn = std::abs(tan);
        if (tn < 1e-12) throw NumericError("check_orbit: degenerate curve tangent");
        const cplx ut = tan / tn;
        const double x = p.real(), y = p.imag();
        vf.check_nonsingular_at(x, y, tol.nonsingularity);

        rep.max_abs_theta = std::max(rep.max_abs_theta, std::abs(theta(vf, x, y)));

        const cplx a = vf.A(x, y), b = vf.B(x, y);
        rep.max_tangency_defect = std::max(
            rep.max_tangency_defect, direction_defect(a.real(), b.real(), ut));
        rep.max_tangency_defect = std::max(
            rep.max_tangency_defect, direction_defect(a.imag(), b.imag(), ut));

        double gx, gy;
        theta_gradient(vf, x, y, vf.fd_step, gx, gy);
        // transversal derivative: gradient component along the normal
        const double dn = std::abs(gx * (-ut.imag()) + gy * ut.real());
        rep.min_transversal_derivative = std::min(rep.min_transversal_derivative, dn);
    }
    rep.theta_ok = rep.max_abs_theta < tol.theta_on_orbit;
    rep.tangent_ok = rep.max_tangency_defect < tol.tangency;
    rep.minimal_ok = rep.min_transversal_derivative > tol.minimality;
    rep.pass = rep.theta_ok && rep.tangent_ok && rep.minimal_ok;
    return rep;
}

ConditionPReport check_condition_P(const VectorField& vf, const geom::Decomposition& dec,
                                   int grid_per_axis, const Tolerances& tol) {
    ConditionPReport rep;
    rep.pass = true;
    const auto bbox = geom::bounding_box(dec.domain.boundary);
    for (const auto& comp : dec.components) {
        ComponentSignSummary s;
        s.component = comp.id;
        double mn = std::numeric_limits<double>::infinity();
        double mx = -mn;
        int hits = 0;
        for (int i = 0; i < grid_per_axis; ++i) {
            for (int j = 0; j < grid_per_axis; ++j) {
                const double x =
                    bbox.first.real() + (bbox.second.real() - bbox.first.real()) *
                                            (i + 0.5) / grid_per_axis;
                const double y =
                    bbox.first.imag() + (bbox.second.imag() - bbox.first.imag()) *
                                            (j + 0.5) / grid_per_axis;
                if (geom::try_locate(dec, cplx(x, y)) != comp.id) continue;
                ++hits;
                const double th = theta(vf, x, y);
                mn = std::min(mn, th);
                mx = std::max(mx, th);
            }
        }
        if (hits == 0) throw NumericError("check_condition_P: empty component sample set");
        s.min_theta = mn;
        s.max_theta = mx;
        s.constant_sign =
            (mn >= -tol.theta_on_orbit) || (mx <= tol.theta_on_orbit);
        rep.pass = rep.pass && s.constant_sign;
        rep.components.push_back(s);
    }
    return rep;
}

Covector dual_form_eta(const VectorField& vf, const ScalarField& f, double x, double y,
                       double nonsingular_tol) {
    const cplx a = vf.A(x, y), b = vf.B(x, y);
    const double den = std::norm(a) + std::norm(b);
    if (den <= nonsingular_tol)
        throw NumericError("dual_form_eta: |A|^2+|B|^2 vanishes at the sample point");
    const cplx fv = f(x, y);
    return {fv * std::conj(a) / den, fv * std::conj(b) / den};
}

cplx closed_orbit_period(const VectorField& vf, const ScalarField& f, const Curve& c, int n_quad) {
    if (!c.closed()) {
        if (std::abs(c(c.t0()) - c(c.t1())) > 1e-8)
            throw ValidationError("closed_orbit_period: curve endpoints do not coincide");
    }
    auto integrand = [&](double t) {
        const cplx p = c(t);
        const cplx tan = c.tangent(t);
        const Covector eta = dual_form_eta(vf, f, p.real(), p.imag());
        return eta.dx * tan.real() + eta.dy * tan.imag();
    };
    return num::trapezoid_periodic(integrand, c.t0(), c.t1(), n_quad);
}

}  // namespace degrh::field
