#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "degrh/common.hpp"
#include "degrh/curve.hpp"

namespace degrh::geom {

/// The domain Omega: a smooth Jordan curve tau on [0, 2*pi), counterclockwise,
/// with a base boundary point s0 = tau(base_t) that must avoid orbit endpoints.
struct DomainSpec {
    Curve boundary;
    double base_t = 0.0;
};

/// A non-closed orbit: a curve inside Omega joining two distinct boundary
/// points. Attachment parameters are computed by decompose().
struct OrbitArc {
    int id = 0;
    Curve curve;
    double attach_start = 0.0;  // boundary parameter of curve(t0), in [0, 2pi)
    double attach_end = 0.0;    // boundary parameter of curve(t1)
};

/// A closed orbit, carried at the data-model level: its interior collapses to
/// a single point of the disk and solutions are constant there.
struct ClosedOrbit {
    int id = 0;
    Curve curve;
    int component = -1;  // containing component, filled by decompose()
};

/// One (A, Gamma) step of a component's boundary word. Parameters live in the
/// walk window [base_t, base_t + 2*pi]; the arc runs ccw from arc_begin to
/// arc_end, followed by the orbit, entered at p^- = tau(arc_end) and left at
/// p^+ = tau(p_plus_param).
struct WordEntry {
    double arc_begin = 0.0;
    double arc_end = 0.0;
    int orbit_id = -1;          // -1 only in the single-component case (no orbits)
    double p_minus_param = 0.0;
    double p_plus_param = 0.0;
    bool orbit_forward = true;  // component traverses the orbit curve from t0 to t1
};

struct Component {
    int id = 0;  // 0 is the base component Omega_1
    std::vector<WordEntry> word;
    bool preserved = true;
    cplx anchor;                      // interior representative point in Omega_j^0
    std::vector<int> closed_orbits;   // collapsed interiors inside this component
    int parent = -1;
    int parent_orbit = -1;
    std::vector<int> children;
};

/// Per-orbit incidence with the jump bookkeeping side: the jump of Lambda is
/// attached once per orbit, computed from the orientation-preserved side.
struct OrbitIncidence {
    int orbit_id = 0;
    int component_a = -1;  // the component whose word first lists the orbit
    int component_b = -1;
    int preserved_component = -1;     // filled by assign_orientations
    double p_minus_param = 0.0;       // preserved-side order, walk-window params
    double p_plus_param = 0.0;
};

struct Decomposition {
    DomainSpec domain;
    std::vector<OrbitArc> orbits;
    std::vector<ClosedOrbit> closed_orbits;
    std::vector<Component> components;
    std::vector<OrbitIncidence> incidence;        // indexed by orbit id
    std::vector<std::vector<cplx>> outlines;      // per component, ccw polygon
    double diameter = 0.0;
};

/// Faces of the subdivision of Omega by the declared orbits. The component
/// whose boundary contains s0 becomes the base component (id 0). Throws
/// ValidationError on intersecting orbits, endpoints off the boundary,
/// coincident endpoints, or s0 on an orbit endpoint.
Decomposition decompose(const DomainSpec& domain, std::vector<OrbitArc> orbits,
                        std::vector<ClosedOrbit> closed = {}, const Numerics& num = {});

/// Two-color the adjacency tree, fixing the given component's flag, and fill
/// the preserved-side jump data per orbit.
void assign_orientations(Decomposition& dec, int reference_component, bool preserved);

/// Containing component of an interior point. Throws NumericError when the
/// point is outside Omega or within on_orbit_tol of an orbit.
int locate(const Decomposition& dec, cplx p, double on_orbit_tol = 1e-9);

struct LocateResult {
    int component = -1;
    int closed_orbit = -1;  // >= 0 when inside (or on) a collapsed interior
};

/// Point location that also reports collapsed closed-orbit interiors.
LocateResult locate_detail(const Decomposition& dec, cplx p, double on_orbit_tol = 1e-9);

/// Non-throwing point location: -1 when outside Omega or on an orbit.
int try_locate(const Decomposition& dec, cplx p, double on_orbit_tol = 1e-9);

/// Rebase the decomposition at a new boundary parameter. Orientation flags are
/// carried over; throws ValidationError when the new base component is
/// orientation-reversed (move s0 to a preserved component) or the new base
/// point collides with an orbit endpoint.
Decomposition relabel_base(const Decomposition& dec, double new_base_t);

/// Axis-aligned bounding box of a curve (min corner, max corner).
std::pair<cplx, cplx> bounding_box(const Curve& c);

/// Winding number of a closed polygon (ccw positive) around p.
double polygon_winding(const std::vector<cplx>& poly, cplx p);

/// Distance from p to the polyline through pts.
double polyline_distance(const std::vector<cplx>& pts, cplx p);

}  // namespace degrh::geom
