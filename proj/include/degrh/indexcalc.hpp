#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "degrh/common.hpp"
#include "degrh/geometry.hpp"
#include "degrh/numerics.hpp"

namespace degrh::idx {

/// Continuous branch of arg(Lambda) along the boundary walk window
/// [base, base + 2*pi], with the winding bookkeeping at the base point:
/// arg(s0^-) - arg(s0^+) = pi * q0.
struct UnwrappedArg {
    double base = 0.0;
    std::vector<double> params;  // window parameters
    std::vector<double> values;  // continuous branch
    int q0 = 0;
    num::Pchip interp;

    /// Branch-exact evaluation: principal argument lifted to the continuous
    /// branch predicted by the interpolated table.
    double at(double window_param, const std::function<cplx(double)>& Lambda) const;
};

/// Build the continuous argument of a unimodular boundary function. The grid
/// refines adaptively until successive phase increments stay below pi/2.
/// Throws on non-unimodular data, on refinement-cap overflow, on a fractional
/// winding residual, and on odd q0 (continuity of Lambda at s0 forces q0 even).
UnwrappedArg unwrap_arg(const std::function<cplx(double)>& Lambda, double base_t,
                        int initial_grid = 1024, int max_grid = 1 << 20,
                        double unimodular_tol = 1e-10);

/// Jump of Lambda along an orbit with ordered ends: arg at p^- minus arg at p^+
/// (window parameters, ordered from the orientation-preserved side).
double jump(const UnwrappedArg& arg, const std::function<cplx(double)>& Lambda,
            double p_minus_param, double p_plus_param);

struct JumpSplit {
    int q = 0;
    double alpha = 0.0;  // in [0, 1)
};

/// theta = pi*alpha + pi*q with q = floor(theta/pi). Values of theta/pi within
/// snap of an integer are snapped (alpha = 0), which keeps delta and the
/// genericity test stable under roundoff.
JumpSplit split_jump(double theta, double snap = 1e-9);

struct OrbitJump {
    int orbit_id = 0;
    double theta = 0.0;
    int q = 0;
    double alpha = 0.0;
};

struct ComponentIndex {
    int component = 0;
    int kappa = 0;
    int n = 0;      // incident orbits with odd q
    int delta = 0;  // incident orbits with alpha == 0
    std::vector<int> incident_orbits;
    std::vector<int> odd_class;   // C_j^1
    std::vector<int> even_class;  // C_j^2
};

struct IndexReport {
    int q0 = 0;
    std::vector<OrbitJump> jumps;  // indexed by orbit id
    std::vector<ComponentIndex> components;
    bool generic = false;
};

/// kappa = (q0_if_base + sum q - n) / 2; throws on parity violation.
int component_kappa(const std::vector<JumpSplit>& incident, std::optional<int> q0_if_base);

/// Number of incident orbits with alpha == 0 (after snapping).
int delta_count(const std::vector<JumpSplit>& incident);

/// True iff every alpha is strictly positive (Lambda takes different values at
/// the two ends of every orbit).
bool is_generic(const std::vector<JumpSplit>& jumps);

/// Full index calculus for a decomposition with assigned orientations.
/// Cross-checks q0/2 against an independent argument-principle winding count.
IndexReport compute_indices(const geom::Decomposition& dec,
                            const std::function<cplx(double)>& Lambda,
                            const Tolerances& tol = {});

}  // namespace degrh::idx
