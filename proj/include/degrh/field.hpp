#pragma once

#include <functional>
#include <string>
#include <vector>

#include "degrh/common.hpp"
#include "degrh/curve.hpp"

namespace degrh::geom {
struct Decomposition;
}

namespace degrh::field {

using Coefficient = std::function<cplx(double, double)>;
using ScalarField = std::function<cplx(double, double)>;

/// The vector field L = A d/dx + B d/dy with C-valued real-analytic
/// coefficients, nonsingular on the ambient set.
struct VectorField {
    Coefficient A;
    Coefficient B;
    // Optional analytic derivative evaluators (dA/dx, dA/dy, dB/dx, dB/dy);
    // central differences with step fd_step are used when absent.
    Coefficient dAx, dAy, dBx, dBy;
    double fd_step = 1e-5;

    cplx a(double x, double y) const { return A(x, y); }
    cplx b(double x, double y) const { return B(x, y); }
    void check_nonsingular_at(double x, double y, double tol) const;
};

/// theta = Im(A * conj(B)); the characteristic set is its zero set.
double theta(const VectorField& vf, double x, double y);

/// Gradient of theta by central differences.
void theta_gradient(const VectorField& vf, double x, double y, double h, double& gx, double& gy);

/// Residual LZ = A dZ/dx + B dZ/dy with numeric partials of Z.
cplx first_integral_residual(const VectorField& vf, const ScalarField& Z, double x, double y,
                             double h = 1e-5);

struct OrbitReport {
    double max_abs_theta = 0.0;
    double max_tangency_defect = 0.0;
    double min_transversal_derivative = 0.0;
    bool theta_ok = false;
    bool tangent_ok = false;
    bool minimal_ok = false;
    bool pass = false;
};

/// Verify a declared orbit: |theta| small along the curve, both real direction
/// fields parallel to the tangent, and first-order transversal vanishing of
/// theta (minimality).
OrbitReport check_orbit(const VectorField& vf, const Curve& curve, const Tolerances& tol,
                        int samples = 256);

struct ComponentSignSummary {
    int component = 0;
    double min_theta = 0.0;
    double max_theta = 0.0;
    bool constant_sign = false;
};

struct ConditionPReport {
    std::vector<ComponentSignSummary> components;
    bool pass = false;
};

/// Sample theta over each component of the decomposition and test sign
/// constancy. Advisory: the solver warns on failure but proceeds.
ConditionPReport check_condition_P(const VectorField& vf, const geom::Decomposition& dec,
                                   int grid_per_axis, const Tolerances& tol);

struct Covector {
    cplx dx;  // coefficient of dx
    cplx dy;  // coefficient of dy
};

/// Representative eta with f dx^dy = omega^eta for omega = B dx - A dy:
/// eta = f (conj(A) dx + conj(B) dy) / (|A|^2 + |B|^2). Satisfies
/// A*dx_coef + B*dy_coef = f exactly.
Covector dual_form_eta(const VectorField& vf, const ScalarField& f, double x, double y,
                       double nonsingular_tol = 1e-12);

/// Trapezoid line integral of eta along a closed curve (the period of f on a
/// closed orbit; Lu=f is globally solvable iff all periods vanish).
cplx closed_orbit_period(const VectorField& vf, const ScalarField& f, const Curve& c, int n_quad);

}  // namespace degrh::field
