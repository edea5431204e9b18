#include "degrh/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "degrh/numerics.hpp"

namespace degrh::geom {

namespace {

constexpr int kOutlineSamplesPerArc = 192;
constexpr int kOrbitOutlineSamples = 192;

double segment_distance(cplx a, cplx b, cplx p) {
    const cplx d = b - a;
    const double len2 = std::norm(d);
    if (len2 == 0.0) return std::abs(p - a);
    double t = ((p - a).real() * d.real() + (p - a).imag() * d.imag()) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(p - (a + t * d));
}

double polyline_min_distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : a)
        for (std::size_t i = 0; i + 1 < b.size(); ++i)
            best = std::min(best, segment_distance(b[i], b[i + 1], p));
    for (const auto& p : b)
        for (std::size_t i = 0; i + 1 < a.size(); ++i)
            best = std::min(best, segment_distance(a[i], a[i + 1], p));
    return best;
}

double signed_area(const std::vector<cplx>& poly) {
    double s = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const cplx a = poly[i], b = poly[(i + 1) % poly.size()];
        s += a.real() * b.imag() - b.real() * a.imag();
    }
    return 0.5 * s;
}

/// Nearest boundary parameter to a point, by coarse scan plus ternary refine.
double project_to_boundary(const Curve& tau, cplx p) {
    const int n = 4096;
    double best_t = 0.0, best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double t = kTwoPi * i / n;
        const double d = std::abs(tau(t) - p);
        if (d < best_d) {
            best_d = d;
            best_t = t;
        }
    }
    double lo = best_t - kTwoPi / n, hi = best_t + kTwoPi / n;
    for (int it = 0; it < 80; ++it) {
        const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (std::abs(tau(num::wrap_2pi(m1)) - p) < std::abs(tau(num::wrap_2pi(m2)) - p))
            hi = m2;
        else
            lo = m1;
    }
    return num::wrap_2pi(0.5 * (lo + hi));
}

double into_window(double t, double base) {
    double w = base + num::wrap_2pi(t - base);
    if (w <= base) w += kTwoPi;
    return w;
}

std::vector<cplx> orbit_polyline(const OrbitArc& orb, bool forward) {
    // open curves sample both endpoints
    auto pts = orb.curve.sample(kOrbitOutlineSamples);
    if (!forward) std::reverse(pts.begin(), pts.end());
    return pts;
}

std::vector<cplx> component_outline(const Decomposition& dec, const Component& comp) {
    std::vector<cplx> poly;
    const Curve& tau = dec.domain.boundary;
    for (const auto& we : comp.word) {
        const int m = kOutlineSamplesPerArc;
        for (int i = 0; i < m; ++i) {
            const double t = we.arc_begin + (we.arc_end - we.arc_begin) * i / (m - 1.0);
            poly.push_back(tau(num::wrap_2pi(t)));
        }
        if (we.orbit_id >= 0) {
            auto orb = orbit_polyline(dec.orbits[we.orbit_id], we.orbit_forward);
            poly.insert(poly.end(), orb.begin() + 1, orb.end() - 1);
        }
    }
    return poly;
}

cplx representative_point(const std::vector<cplx>& poly) {
    cplx centroid = std::accumulate(poly.begin(), poly.end(), cplx(0, 0));
    centroid /= static_cast<double>(poly.size());
    if (std::abs(polygon_winding(poly, centroid) - 1.0) < 0.1) return centroid;
    // Walk inward from edge midpoints along the interior normal.
    for (std::size_t i = 0; i < poly.size(); i += std::max<std::size_t>(1, poly.size() / 64)) {
        const cplx a = poly[i], b = poly[(i + 1) % poly.size()];
        const cplx mid = 0.5 * (a + b);
        const cplx t = b - a;
        if (std::abs(t) == 0.0) continue;
        const cplx n = cplx(0, 1) * (t / std::abs(t));  // interior is left of ccw boundary
        for (double step = 0.2; step > 1e-4; step *= 0.5) {
            const cplx cand = mid + step * n;
            if (std::abs(polygon_winding(poly, cand) - 1.0) < 0.1) return cand;
        }
    }
    throw NumericError("decompose: failed to find an interior representative point");
}

}  // namespace

std::pair<cplx, cplx> bounding_box(const Curve& c) {
    auto pts = c.sample(1024);
    double x0 = pts[0].real(), x1 = x0, y0 = pts[0].imag(), y1 = y0;
    for (const auto& p : pts) {
        x0 = std::min(x0, p.real());
        x1 = std::max(x1, p.real());
        y0 = std::min(y0, p.imag());
        y1 = std::max(y1, p.imag());
    }
    return {cplx(x0, y0), cplx(x1, y1)};
}

double polygon_winding(const std::vector<cplx>& poly, cplx p) {
    double total = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const cplx a = poly[i] - p, b = poly[(i + 1) % poly.size()] - p;
        total += std::arg(b / a);
    }
    return total / kTwoPi;
}

double polyline_distance(const std::vector<cplx>& pts, cplx p) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        best = std::min(best, segment_distance(pts[i], pts[i + 1], p));
    return best;
}

Decomposition decompose(const DomainSpec& domain, std::vector<OrbitArc> orbits,
                        std::vector<ClosedOrbit> closed, const Numerics& num) {
    const Tolerances& tol = num.tol;
    Decomposition dec;
    dec.domain = domain;

    const Curve& tau = domain.boundary;
    if (std::abs(tau(0.0) - tau(kTwoPi)) > 1e-8)
        throw ValidationError("domain boundary is not closed");
    auto bpts = tau.sample(1024);
    if (signed_area(bpts) <= 0.0)
        throw ValidationError("domain boundary must be counterclockwise");
    // simplicity: non-adjacent sample segments must stay separated
    for (std::size_t i = 0; i + 1 < bpts.size(); ++i) {
        for (std::size_t j = i + 2; j + 1 < bpts.size(); ++j) {
            if (i == 0 && j + 2 == bpts.size()) continue;
            // cheap reject on distant pairs
            if (std::abs(bpts[i] - bpts[j]) > 8.0 * std::abs(bpts[i + 1] - bpts[i])) continue;
            const double d = segment_distance(bpts[i], bpts[i + 1], bpts[j]);
            if (d < 1e-12) throw ValidationError("domain boundary self-intersects");
        }
    }
    const auto bb = bounding_box(tau);
    dec.diameter = std::abs(bb.second - bb.first);

    // Attach orbit endpoints to the boundary and validate.
    std::vector<std::vector<cplx>> orbit_pts;
    for (auto& orb : orbits) {
        const cplx e0 = orb.curve(orb.curve.t0());
        const cplx e1 = orb.curve(orb.curve.t1());
        orb.attach_start = project_to_boundary(tau, e0);
        orb.attach_end = project_to_boundary(tau, e1);
        if (std::abs(tau(orb.attach_start) - e0) > tol.endpoint_on_boundary * (1.0 + dec.diameter))
            throw ValidationError("orbit " + std::to_string(orb.id) +
                                  ": start endpoint is not on the boundary");
        if (std::abs(tau(orb.attach_end) - e1) > tol.endpoint_on_boundary * (1.0 + dec.diameter))
            throw ValidationError("orbit " + std::to_string(orb.id) +
                                  ": end endpoint is not on the boundary");
        // transversality at both ends
        for (int side = 0; side < 2; ++side) {
            const double tb = side == 0 ? orb.attach_start : orb.attach_end;
            const double tc = side == 0 ? orb.curve.t0() : orb.curve.t1();
            const cplx tb_dir = tau.tangent(tb);
            const cplx tc_dir = orb.curve.tangent(tc);
            const double cross = std::abs(tb_dir.real() * tc_dir.imag() -
                                          tb_dir.imag() * tc_dir.real()) /
                                 (std::abs(tb_dir) * std::abs(tc_dir));
            if (cross < 1e-3)
                throw ValidationError("orbit " + std::to_string(orb.id) +
                                      " meets the boundary tangentially");
        }
        auto pts = orb.curve.sample(kOrbitOutlineSamples);
        // interior samples lie strictly inside Omega (endpoints are on it)
        for (std::size_t i = 2; i + 2 < pts.size(); ++i) {
            if (std::abs(polygon_winding(bpts, pts[i]) - 1.0) > 0.1)
                throw ValidationError("orbit " + std::to_string(orb.id) +
                                      " leaves the domain interior");
        }
        orbit_pts.push_back(std::move(pts));
    }
    for (std::size_t i = 0; i < orbits.size(); ++i) {
        for (std::size_t j = i + 1; j < orbits.size(); ++j) {
            if (polyline_min_distance(orbit_pts[i], orbit_pts[j]) < 10.0 * tol.geometry)
                throw ValidationError("orbits " + std::to_string(orbits[i].id) + " and " +
                                      std::to_string(orbits[j].id) + " intersect or touch");
        }
    }

    // Distinct endpoint parameters, all distinct from the base point.
    const double base = domain.base_t;
    std::vector<std::pair<double, int>> events;  // (window parameter, orbit index)
    for (std::size_t i = 0; i < orbits.size(); ++i) {
        events.emplace_back(into_window(orbits[i].attach_start, base), static_cast<int>(i));
        events.emplace_back(into_window(orbits[i].attach_end, base), static_cast<int>(i));
    }
    std::sort(events.begin(), events.end());
    for (std::size_t i = 0; i + 1 < events.size(); ++i) {
        if (events[i + 1].first - events[i].first < 1e-9)
            throw ValidationError("orbit endpoints coincide on the boundary");
    }
    if (!events.empty()) {
        if (events.front().first - base < 1e-9 || base + kTwoPi - events.back().first < 1e-9)
            throw ValidationError("base point s0 collides with an orbit endpoint");
    }

    dec.orbits = orbits;

    // Stack walk: faces are identified by the stack of open orbits.
    struct RawArc {
        double begin, end;
        int following_orbit;  // orbit at the arc's terminal event; -1 at the wrap
    };
    std::map<std::vector<int>, int> face_of_state;
    std::vector<std::vector<RawArc>> face_arcs;
    std::vector<std::vector<int>> face_state;
    auto face_index = [&](const std::vector<int>& state) {
        auto it = face_of_state.find(state);
        if (it != face_of_state.end()) return it->second;
        const int idx = static_cast<int>(face_arcs.size());
        face_of_state.emplace(state, idx);
        face_arcs.emplace_back();
        face_state.push_back(state);
        return idx;
    };

    std::vector<int> state;
    std::vector<bool> open(orbits.size(), false);
    double cursor = base;
    (void)face_index(state);  // root face first
    for (const auto& [pos, oi] : events) {
        face_arcs[face_index(state)].push_back({cursor, pos, oi});
        if (!open[oi]) {
            open[oi] = true;
            state.push_back(oi);
        } else {
            if (state.empty() || state.back() != oi)
                throw ValidationError("orbits interleave on the boundary (they must not cross)");
            state.pop_back();
        }
        cursor = pos;
    }
    if (!state.empty()) throw ValidationError("unmatched orbit endpoints");
    face_arcs[0].push_back({cursor, base + kTwoPi, -1});

    // Assemble boundary words.
    const int nfaces = static_cast<int>(face_arcs.size());
    if (nfaces != static_cast<int>(orbits.size()) + 1)
        throw NumericError("decompose: face count does not equal N+1");
    dec.components.resize(nfaces);
    dec.incidence.assign(orbits.size(), OrbitIncidence{});
    for (std::size_t i = 0; i < orbits.size(); ++i) dec.incidence[i].orbit_id = orbits[i].id;

    for (int f = 0; f < nfaces; ++f) {
        Component comp;
        comp.id = f;
        auto arcs = face_arcs[f];
        if (f == 0 && !orbits.empty()) {
            // merge the wrap arc with the first arc (both cross s0's side)
            RawArc merged{arcs.back().begin, arcs.front().end + 0.0, arcs.front().following_orbit};
            merged.end = arcs.front().end + kTwoPi;
            arcs.erase(arcs.begin());
            arcs.back() = merged;
            std::rotate(arcs.begin(), arcs.end() - 1, arcs.end());
        }
        for (std::size_t k = 0; k < arcs.size(); ++k) {
            WordEntry we;
            we.arc_begin = arcs[k].begin;
            we.arc_end = arcs[k].end;
            we.orbit_id = arcs[k].following_orbit >= 0
                              ? orbits[arcs[k].following_orbit].id
                              : -1;
            if (we.orbit_id >= 0) {
                const auto& next = arcs[(k + 1) % arcs.size()];
                we.p_minus_param = arcs[k].end;
                we.p_plus_param = next.begin;
                const int oi = arcs[k].following_orbit;
                const double start_w = into_window(orbits[oi].attach_start, base);
                we.orbit_forward = std::abs(num::wrap_pm_pi(we.p_minus_param - start_w)) < 1e-9;
                auto& inc = dec.incidence[oi];
                if (inc.component_a < 0)
                    inc.component_a = f;
                else
                    inc.component_b = f;
            }
            comp.word.push_back(we);
        }
        dec.components[f] = std::move(comp);
    }

    // Outlines, anchors, adjacency tree.
    dec.outlines.resize(nfaces);
    for (int f = 0; f < nfaces; ++f) {
        dec.outlines[f] = component_outline(dec, dec.components[f]);
        dec.components[f].anchor = representative_point(dec.outlines[f]);
    }
    // tree: parent of face(state S + [o]) is face(S)
    for (const auto& [st, f] : face_of_state) {
        if (st.empty()) continue;
        auto parent_state = st;
        const int oi = parent_state.back();
        parent_state.pop_back();
        const int pf = face_of_state.at(parent_state);
        dec.components[f].parent = pf;
        dec.components[f].parent_orbit = dec.orbits[oi].id;
        dec.components[pf].children.push_back(f);
    }
    for (auto& c : dec.components) std::sort(c.children.begin(), c.children.end());

    // Closed orbits: contained component, validated closed and interior.
    for (auto& co : closed) {
        if (std::abs(co.curve(co.curve.t0()) - co.curve(co.curve.t1())) > 1e-8)
            throw ValidationError("closed orbit " + std::to_string(co.id) + " is not closed");
        auto pts = co.curve.sample(kOrbitOutlineSamples);
        pts.push_back(pts.front());  // close the polyline
        for (const auto& p : pts)
            if (std::abs(polygon_winding(bpts, p) - 1.0) > 0.1)
                throw ValidationError("closed orbit " + std::to_string(co.id) +
                                      " is not inside the domain");
        for (const auto& op : orbit_pts) {
            if (polyline_min_distance(pts, op) < 10.0 * tol.geometry)
                throw ValidationError("closed orbit touches an open orbit");
        }
        int comp = -1;
        for (int f = 0; f < nfaces; ++f) {
            if (std::abs(polygon_winding(dec.outlines[f], pts[0]) - 1.0) < 0.1) {
                comp = f;
                break;
            }
        }
        if (comp < 0) throw ValidationError("closed orbit is not inside any component");
        co.component = comp;
        dec.components[comp].closed_orbits.push_back(co.id);
        // Representative anchors must avoid collapsed interiors.
        auto& anchor = dec.components[comp].anchor;
        if (std::abs(polygon_winding(pts, anchor)) > 0.1) {
            // move the anchor outside the collapsed interior
            const auto& outline = dec.outlines[comp];
            bool found = false;
            for (std::size_t i = 0; i < outline.size() && !found;
                 i += std::max<std::size_t>(1, outline.size() / 128)) {
                const cplx a = outline[i], b = outline[(i + 1) % outline.size()];
                const cplx t = b - a;
                if (std::abs(t) == 0.0) continue;
                const cplx n = cplx(0, 1) * (t / std::abs(t));
                for (double step = 0.1; step > 1e-4; step *= 0.5) {
                    const cplx cand = 0.5 * (a + b) + step * n;
                    if (std::abs(polygon_winding(outline, cand) - 1.0) < 0.1 &&
                        std::abs(polygon_winding(pts, cand)) < 0.1) {
                        anchor = cand;
                        found = true;
                        break;
                    }
                }
            }
            if (!found)
                throw NumericError("could not place a component anchor outside closed orbits");
        }
    }
    dec.closed_orbits = std::move(closed);
    return dec;
}

void assign_orientations(Decomposition& dec, int reference_component, bool preserved) {
    if (reference_component < 0 || reference_component >= static_cast<int>(dec.components.size()))
        throw ValidationError("assign_orientations: no such component");
    // Tree distance parity from the reference.
    std::vector<int> depth(dec.components.size(), -1);
    std::vector<int> stack{reference_component};
    depth[reference_component] = 0;
    while (!stack.empty()) {
        const int f = stack.back();
        stack.pop_back();
        std::vector<int> nb = dec.components[f].children;
        if (dec.components[f].parent >= 0) nb.push_back(dec.components[f].parent);
        for (int g : nb) {
            if (depth[g] < 0) {
                depth[g] = depth[f] + 1;
                stack.push_back(g);
            }
        }
    }
    for (auto& c : dec.components) {
        if (depth[c.id] < 0)
            throw NumericError("assign_orientations: adjacency graph is not connected");
        c.preserved = ((depth[c.id] % 2 == 0) == preserved);
    }
    // Jump data is attached from the preserved side of each orbit.
    for (auto& inc : dec.incidence) {
        const int a = inc.component_a, b = inc.component_b;
        if (a < 0 || b < 0) throw NumericError("orbit incidence incomplete");
        if (dec.components[a].preserved == dec.components[b].preserved)
            throw NumericError("orientation flags do not alternate across an orbit");
        inc.preserved_component = dec.components[a].preserved ? a : b;
        const auto& comp = dec.components[inc.preserved_component];
        for (const auto& we : comp.word) {
            if (we.orbit_id == inc.orbit_id) {
                inc.p_minus_param = we.p_minus_param;
                inc.p_plus_param = we.p_plus_param;
            }
        }
    }
}

LocateResult locate_detail(const Decomposition& dec, cplx p, double on_orbit_tol) {
    for (std::size_t i = 0; i < dec.orbits.size(); ++i) {
        auto pts = dec.orbits[i].curve.sample(kOrbitOutlineSamples);
        if (polyline_distance(pts, p) < on_orbit_tol)
            throw NumericError("point lies on a declared orbit (component is ambiguous)");
    }
    LocateResult res;
    for (const auto& comp : dec.components) {
        if (std::abs(polygon_winding(dec.outlines[comp.id], p) - 1.0) < 0.1) {
            res.component = comp.id;
            break;
        }
    }
    if (res.component < 0) throw NumericError("point lies outside the domain");
    for (const auto& co : dec.closed_orbits) {
        if (co.component != res.component) continue;
        auto pts = co.curve.sample(kOrbitOutlineSamples);
        auto closed_pts = pts;
        closed_pts.push_back(pts.front());
        if (std::abs(polygon_winding(pts, p)) > 0.5 ||
            polyline_distance(closed_pts, p) < on_orbit_tol)
            res.closed_orbit = co.id;
    }
    return res;
}

int locate(const Decomposition& dec, cplx p, double on_orbit_tol) {
    return locate_detail(dec, p, on_orbit_tol).component;
}

int try_locate(const Decomposition& dec, cplx p, double on_orbit_tol) {
    try {
        return locate_detail(dec, p, on_orbit_tol).component;
    } catch (const Error&) {
        return -1;
    }
}

Decomposition relabel_base(const Decomposition& dec, double new_base_t) {
    DomainSpec domain = dec.domain;
    domain.base_t = num::wrap_2pi(new_base_t);
    Numerics num;
    Decomposition out = decompose(domain, dec.orbits, dec.closed_orbits, num);
    // carry orientation flags over by matching anchors
    bool have_flags = !dec.components.empty();
    if (have_flags) {
        for (auto& comp : out.components) {
            const int old_id = locate(dec, comp.anchor);
            comp.preserved = dec.components[old_id].preserved;
        }
        for (auto& inc : out.incidence) {
            const int a = inc.component_a, b = inc.component_b;
            inc.preserved_component = out.components[a].preserved ? a : b;
            const auto& comp = out.components[inc.preserved_component];
            for (const auto& we : comp.word)
                if (we.orbit_id == inc.orbit_id) {
                    inc.p_minus_param = we.p_minus_param;
                    inc.p_plus_param = we.p_plus_param;
                }
        }
        if (!out.components[0].preserved)
            throw ValidationError(
                "the component containing s0 is orientation-reversed; move the base point s0 "
                "to the boundary of an orientation-preserved component");
    }
    return out;
}

}  // namespace degrh::geom
