#pragma once

// Periodic Laguerre (power) diagrams on the strip [-L,L) x [-H/2,H/2].
//
// Cells are built as non-periodic convex polygons in R x [-H/2,H/2] by
// half-plane clipping against the bisectors of (z_i, z_j + k e1) for
// horizontal copy shifts k in {-2L, 0, 2L}.  Clipping each cell against
// the bisectors with its own copies confines it to a 2L-wide window, which
// makes the three-shift restriction exact for canonical seeds.
//
// Areas, centroids and second moments are evaluated with edge-wise
// Green's-theorem formulas, never by sampling.  Bisector constants are
// computed once per unordered seed pair and reused from both sides so that
// the two cells adjacent to an edge see bit-identical lines; cell areas
// then tile the domain up to rounding noise, which is what the a-posteriori
// area certificate of the hinted builder relies on.

#include "core.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <utility>

namespace sgeady {

struct CellEdge {
    int neighbor = -1;   // index of the adjacent cell; may equal the own index across the period
    int shift = 0;       // horizontal copy offset of the neighbour in units of 2L
    double length = 0.0;
    Vec2 midpoint{};     // length-weighted midpoint in strip coordinates
};

struct LaguerreCell {
    std::vector<Vec2> poly;  // CCW vertices in strip coordinates; empty when the cell is empty
    double area = 0.0;
    Vec2 centroid{};         // centroid of the non-periodic cell
    double moment_xx = 0.0;  // integral of ((x - z_i) . e1)^2 over the cell
    double moment_rr = 0.0;  // integral of |x - z_i|^2 over the cell
    std::vector<CellEdge> edges;
};

struct LaguerreDiagram {
    Domain domain;
    std::vector<Vec2> seeds;  // canonical representatives, x in [-L, L)
    std::vector<LaguerreCell> cells;
    double total_area = 0.0;
    bool hint_fallback = false;  // hinted build failed certification and was redone exactly

    std::size_t size() const { return cells.size(); }

    double min_area() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& c : cells) m = std::min(m, c.area);
        return m;
    }

    std::vector<double> areas() const {
        std::vector<double> m(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) m[i] = cells[i].area;
        return m;
    }
};

namespace detail {

struct EdgeTag {
    int j = -1;  // neighbour index, or -1 / -2 for the bottom / top wall
    int s = 0;   // copy shift of the neighbour in units of 2L
};

constexpr int kWallBottom = -1;
constexpr int kWallTop = -2;

// Bisector between cell i and the copy (j, s), as a half-plane in the local
// frame u = x - z_i:  { u : u.dot(normal) <= offset }.  The constants are
// derived from the canonical orientation of the pair so that both cells use
// the same floating-point line.
struct Bisector {
    Vec2 normal;
    double offset;
};

inline Bisector bisector(int i, int j, int s, const std::vector<Vec2>& z,
                         const std::vector<double>& w, double period) {
    const bool canonical = (j > i) || (j == i && s > 0);
    if (canonical) {
        const Vec2 d{z[j].x + period * s - z[i].x, z[j].y - z[i].y};
        return {d, 0.5 * d.norm2() + 0.5 * (w[i] - w[j])};
    }
    const Vec2 d{z[i].x - period * s - z[j].x, z[i].y - z[j].y};
    const double d2 = d.norm2();
    return {-d, d2 - (0.5 * d2 + 0.5 * (w[j] - w[i]))};
}

// Sutherland-Hodgman clip of a convex polygon against u.dot(n) <= c.
// verts[k] -> verts[k+1] carries tags[k]; edges created on the clip line are
// tagged `tag`.  Returns false when the polygon became empty.
inline bool clip_halfplane(std::vector<Vec2>& verts, std::vector<EdgeTag>& tags,
                           Vec2 n, double c, EdgeTag tag,
                           std::vector<Vec2>& sv, std::vector<EdgeTag>& st,
                           std::vector<double>& sd) {
    const std::size_t m = verts.size();
    sd.resize(m);
    bool any_out = false, any_in = false;
    for (std::size_t k = 0; k < m; ++k) {
        sd[k] = verts[k].dot(n) - c;
        (sd[k] > 0.0 ? any_out : any_in) = true;
    }
    if (!any_out) return true;  // untouched
    if (!any_in) { verts.clear(); tags.clear(); return false; }

    sv.clear();
    st.clear();
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t k1 = (k + 1 == m) ? 0 : k + 1;
        const double dp = sd[k], dq = sd[k1];
        if (dp <= 0.0) {
            sv.push_back(verts[k]);
            st.push_back(tags[k]);
            if (dq > 0.0) {
                const double t = dp / (dp - dq);
                sv.push_back(verts[k] + t * (verts[k1] - verts[k]));
                st.push_back(tag);
            }
        } else if (dq <= 0.0) {
            const double t = dp / (dp - dq);
            sv.push_back(verts[k] + t * (verts[k1] - verts[k]));
            st.push_back(tags[k]);
        }
    }
    verts.swap(sv);
    tags.swap(st);
    return verts.size() >= 3;
}

// Merge runs of vertices closer than eps.  The kept vertex of a cluster
// takes the outgoing-edge tag of the cluster's last member, so degenerate
// edges vanish and long edges keep their line's tag.
inline void dedupe_polygon(std::vector<Vec2>& verts, std::vector<EdgeTag>& tags,
                           double eps, std::vector<Vec2>& sv,
                           std::vector<EdgeTag>& st) {
    const std::size_t m = verts.size();
    if (m < 3) { verts.clear(); tags.clear(); return; }
    sv.clear();
    st.clear();
    const double eps2 = eps * eps;
    for (std::size_t k = 0; k < m; ++k) {
        if (!sv.empty() && (verts[k] - sv.back()).norm2() <= eps2) {
            st.back() = tags[k];
        } else {
            sv.push_back(verts[k]);
            st.push_back(tags[k]);
        }
    }
    // cluster spanning the wrap-around
    while (sv.size() >= 3 && (sv.front() - sv.back()).norm2() <= eps2) {
        st.back() = st.front();
        sv.erase(sv.begin());
        st.erase(st.begin());
    }
    if (sv.size() < 3) { verts.clear(); tags.clear(); return; }
    verts.swap(sv);
    tags.swap(st);
}

struct Candidate {
    double dist2;
    int j;
    int s;
};

// Scratch buffers reused across the cells of one build.
struct BuildScratch {
    std::vector<Vec2> verts, sv;
    std::vector<EdgeTag> tags, st;
    std::vector<double> sd;
    std::vector<Candidate> cand;
};

// Clip cell i against the given candidates (sorted by distance) and fill the
// output cell.  Candidates never include (i, 0); the own-copy bisectors form
// the initial rectangle.
inline void build_cell(int i, const std::vector<Vec2>& z, const std::vector<double>& w,
                       const Domain& dom, BuildScratch& scr, LaguerreCell& out) {
    const double period = dom.period();
    const Vec2 zi = z[i];

    auto& verts = scr.verts;
    auto& tags = scr.tags;
    verts.assign({Vec2{-dom.L, -dom.H / 2 - zi.y}, Vec2{dom.L, -dom.H / 2 - zi.y},
                  Vec2{dom.L, dom.H / 2 - zi.y}, Vec2{-dom.L, dom.H / 2 - zi.y}});
    tags.assign({EdgeTag{kWallBottom, 0}, EdgeTag{i, +1}, EdgeTag{kWallTop, 0},
                 EdgeTag{i, -1}});

    double r2 = 0.0;  // squared circumradius of the polygon about the seed
    for (const Vec2& v : verts) r2 = std::max(r2, v.norm2());

    bool alive = true;
    for (const Candidate& cd : scr.cand) {
        const Bisector b = bisector(i, cd.j, cd.s, z, w, period);
        const double c2 = b.offset * b.offset;
        if (b.offset >= 0.0 && c2 >= cd.dist2 * r2) continue;    // cannot cut
        if (b.offset < 0.0 && c2 >= cd.dist2 * r2) {             // wipes the cell
            alive = false;
            break;
        }
        if (!clip_halfplane(verts, tags, b.normal, b.offset,
                            EdgeTag{cd.j, cd.s}, scr.sv, scr.st, scr.sd)) {
            alive = false;
            break;
        }
        r2 = 0.0;
        for (const Vec2& v : verts) r2 = std::max(r2, v.norm2());
    }

    out.edges.clear();
    out.poly.clear();
    if (!alive) {
        out.area = 0.0;
        out.centroid = zi;
        out.moment_xx = out.moment_rr = 0.0;
        return;
    }

    const double eps = 1e-12 * std::max({2.0 * dom.L, dom.H, std::sqrt(r2)});
    dedupe_polygon(verts, tags, eps, scr.sv, scr.st);
    if (verts.size() < 3) {
        out.area = 0.0;
        out.centroid = zi;
        out.moment_xx = out.moment_rr = 0.0;
        return;
    }

    // Green's-theorem moments, anchored at the first vertex for conditioning.
    const Vec2 p0 = verts[0];
    const std::size_t m = verts.size();
    double area2 = 0.0, cx = 0.0, cy = 0.0, ixx = 0.0, iyy = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const Vec2 a = verts[k] - p0;
        const Vec2 b = verts[(k + 1 == m) ? 0 : k + 1] - p0;
        const double cr = a.cross(b);
        area2 += cr;
        cx += cr * (a.x + b.x);
        cy += cr * (a.y + b.y);
        ixx += cr * (a.x * a.x + a.x * b.x + b.x * b.x);
        iyy += cr * (a.y * a.y + a.y * b.y + b.y * b.y);
    }
    const double area = 0.5 * area2;
    out.area = area;
    // centroid in the anchored frame, then back to the seed frame
    const Vec2 cp = (area != 0.0) ? Vec2{cx / (6.0 * area), cy / (6.0 * area)} : Vec2{};
    const Vec2 cu = cp + p0;  // centroid relative to the seed
    out.centroid = zi + cu;
    // shift the anchored second moments to the seed frame:
    //   int (u_x)^2 = int (p_x)^2 + 2 p0_x int p_x + p0_x^2 A
    const double ixx_p = ixx / 12.0, iyy_p = iyy / 12.0;
    const double sx = area * cp.x, sy = area * cp.y;
    out.moment_xx = ixx_p + 2.0 * p0.x * sx + p0.x * p0.x * area;
    out.moment_rr = out.moment_xx + iyy_p + 2.0 * p0.y * sy + p0.y * p0.y * area;

    // polygon to strip coordinates
    out.poly.resize(m);
    for (std::size_t k = 0; k < m; ++k) out.poly[k] = verts[k] + zi;

    // group polygon edges by (neighbour, shift)
    for (std::size_t k = 0; k < m; ++k) {
        const EdgeTag t = tags[k];
        if (t.j < 0) continue;  // wall
        const Vec2 a = verts[k];
        const Vec2 b = verts[(k + 1 == m) ? 0 : k + 1];
        const double len = (b - a).norm();
        if (len <= eps) continue;
        const Vec2 mid = zi + 0.5 * (a + b);
        bool merged = false;
        for (auto& e : out.edges) {
            if (e.neighbor == t.j && e.shift == t.s) {
                const double tot = e.length + len;
                e.midpoint = (e.length / tot) * e.midpoint + (len / tot) * mid;
                e.length = tot;
                merged = true;
                break;
            }
        }
        if (!merged) out.edges.push_back(CellEdge{t.j, t.s, len, mid});
    }
}

inline std::vector<Vec2> canonical_seeds(const std::vector<Vec2>& z, const Domain& dom) {
    std::vector<Vec2> zc(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        zc[i] = Vec2{wrap_x(z[i].x, dom.L), z[i].y};
    return zc;
}

inline void check_distinct(const std::vector<Vec2>& zc, const Domain& dom) {
    const std::size_t n = zc.size();
    std::vector<int> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        return zc[a].x < zc[b].x || (zc[a].x == zc[b].x && zc[a].y < zc[b].y);
    });
    double yscale = dom.H;
    for (const Vec2& p : zc) yscale = std::max(yscale, std::abs(p.y));
    const double tx = 1e-12 * 2.0 * dom.L;
    const double ty = 1e-12 * yscale;
    auto coincide = [&](const Vec2& a, const Vec2& b, bool wrapped) {
        const double dx = wrapped ? (2.0 * dom.L - std::abs(a.x - b.x))
                                  : std::abs(a.x - b.x);
        return dx <= tx && std::abs(a.y - b.y) <= ty;
    };
    for (std::size_t k = 0; k + 1 < n; ++k) {
        std::size_t m = k + 1;
        while (m < n && zc[idx[m]].x - zc[idx[k]].x <= tx) {
            if (coincide(zc[idx[k]], zc[idx[m]], false))
                throw DuplicateSeeds("duplicate seeds at indices " +
                                     std::to_string(idx[k]) + ", " + std::to_string(idx[m]));
            ++m;
        }
    }
    // seeds on opposite sides of the periodic cut
    for (std::size_t k = 0; k < n && zc[idx[k]].x + dom.L <= tx; ++k)
        for (std::size_t m = n; m-- > 0 && dom.L - zc[idx[m]].x <= tx;)
            if (coincide(zc[idx[k]], zc[idx[m]], true))
                throw DuplicateSeeds("duplicate seeds across the period at indices " +
                                     std::to_string(idx[k]) + ", " + std::to_string(idx[m]));
}

// All seeds and copies as candidates for cell i, nearest first.
inline void brute_candidates(int i, const std::vector<Vec2>& zc, const Domain& dom,
                             std::vector<Candidate>& cand) {
    const double period = dom.period();
    const std::size_t n = zc.size();
    cand.clear();
    cand.reserve(3 * n);
    for (std::size_t j = 0; j < n; ++j) {
        if (static_cast<int>(j) == i) continue;
        const double dy = zc[j].y - zc[i].y;
        const double dy2 = dy * dy;
        for (int s = -1; s <= 1; ++s) {
            const double dx = zc[j].x + period * s - zc[i].x;
            cand.push_back(Candidate{dx * dx + dy2, static_cast<int>(j), s});
        }
    }
    std::sort(cand.begin(), cand.end(),
              [](const Candidate& a, const Candidate& b) { return a.dist2 < b.dist2; });
}

// Candidates from the previous diagram's adjacency: the 1-ring plus composed
// 2-ring shifts.  Exactness is certified afterwards by the area sum.
inline void hinted_candidates(int i, const std::vector<Vec2>& zc, const Domain& dom,
                              const LaguerreDiagram& hint, std::vector<Candidate>& cand) {
    const double period = dom.period();
    cand.clear();
    auto push = [&](int j, int s) {
        if (j == i || std::abs(s) > 1) return;
        for (const Candidate& c : cand)
            if (c.j == j && c.s == s) return;
        const double dx = zc[j].x + period * s - zc[i].x;
        const double dy = zc[j].y - zc[i].y;
        cand.push_back(Candidate{dx * dx + dy * dy, j, s});
    };
    for (const CellEdge& e : hint.cells[i].edges) {
        push(e.neighbor, e.shift);
        for (const CellEdge& e2 : hint.cells[e.neighbor].edges)
            push(e2.neighbor, e.shift + e2.shift);
    }
    std::sort(cand.begin(), cand.end(),
              [](const Candidate& a, const Candidate& b) { return a.dist2 < b.dist2; });
}

} // namespace detail

// Exact periodic Laguerre diagram of (z, w) on the strip.
inline LaguerreDiagram build_laguerre(const std::vector<Vec2>& seeds,
                                      const std::vector<double>& weights,
                                      const Domain& dom) {
    dom.validate();
    if (seeds.empty()) throw Error("build_laguerre: no seeds");
    if (seeds.size() != weights.size())
        throw LengthMismatch("build_laguerre: seeds and weights differ in length");

    LaguerreDiagram dia;
    dia.domain = dom;
    dia.seeds = detail::canonical_seeds(seeds, dom);
    detail::check_distinct(dia.seeds, dom);
    dia.cells.resize(seeds.size());

    detail::BuildScratch scr;
    double total = 0.0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        detail::brute_candidates(static_cast<int>(i), dia.seeds, dom, scr.cand);
        detail::build_cell(static_cast<int>(i), dia.seeds, weights, dom, scr, dia.cells[i]);
        total += dia.cells[i].area;
    }
    dia.total_area = total;
    return dia;
}

// Hinted rebuild: clip only against the previous diagram's 2-ring, then
// certify with the tiling identity sum(areas) == |Omega|.  Any miss inflates
// some cell, so certification failure triggers the exact pass.
inline LaguerreDiagram build_laguerre(const std::vector<Vec2>& seeds,
                                      const std::vector<double>& weights,
                                      const Domain& dom, const LaguerreDiagram& hint) {
    if (hint.size() != seeds.size()) return build_laguerre(seeds, weights, dom);

    dom.validate();
    LaguerreDiagram dia;
    dia.domain = dom;
    dia.seeds = detail::canonical_seeds(seeds, dom);
    // no duplicate-seed scan here: coincident seeds break the tiling, which
    // the certificate below detects, and the exact pass then reports them
    dia.cells.resize(seeds.size());

    detail::BuildScratch scr;
    double total = 0.0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (hint.cells[i].edges.empty())
            detail::brute_candidates(static_cast<int>(i), dia.seeds, dom, scr.cand);
        else
            detail::hinted_candidates(static_cast<int>(i), dia.seeds, dom, hint, scr.cand);
        detail::build_cell(static_cast<int>(i), dia.seeds, weights, dom, scr, dia.cells[i]);
        total += dia.cells[i].area;
    }
    dia.total_area = total;

    if (std::abs(total - dom.area()) > 1e-11 * dom.area()) {
        LaguerreDiagram exact = build_laguerre(seeds, weights, dom);
        exact.hint_fallback = true;
        return exact;
    }
    return dia;
}

// D_w m: derivative of cell areas with respect to weights (symmetric, rows
// sum to zero).  Requires all cells non-empty.
inline Eigen::SparseMatrix<double> weight_area_jacobian(const LaguerreDiagram& dia) {
    const int n = static_cast<int>(dia.size());
    const double period = dia.domain.period();
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> diag(n, 0.0);
    for (int i = 0; i < n; ++i) {
        if (dia.cells[i].area <= 0.0)
            throw EmptyCell("weight_area_jacobian: cell " + std::to_string(i) + " is empty");
        for (const CellEdge& e : dia.cells[i].edges) {
            if (e.neighbor <= i) continue;  // use each pair once; own copies carry no w-derivative
            const int j = e.neighbor;
            const Vec2 d{dia.seeds[j].x + period * e.shift - dia.seeds[i].x,
                         dia.seeds[j].y - dia.seeds[i].y};
            const double v = -0.5 * e.length / d.norm();
            trip.emplace_back(i, j, v);
            trip.emplace_back(j, i, v);
            diag[i] -= v;
            diag[j] -= v;
        }
    }
    for (int i = 0; i < n; ++i) trip.emplace_back(i, i, diag[i]);
    Eigen::SparseMatrix<double> m(n, n);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

// D_z m: derivative of cell areas with respect to seed positions, n x 2n,
// column 2l / 2l+1 for the horizontal / vertical coordinate of seed l.
inline Eigen::SparseMatrix<double> seed_area_jacobian(const LaguerreDiagram& dia) {
    const int n = static_cast<int>(dia.size());
    const double period = dia.domain.period();
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < n; ++i) {
        if (dia.cells[i].area <= 0.0)
            throw EmptyCell("seed_area_jacobian: cell " + std::to_string(i) + " is empty");
        double gx = 0.0, gy = 0.0;  // accumulates d m_i / d z_i
        for (const CellEdge& e : dia.cells[i].edges) {
            const int j = e.neighbor;
            if (j == i) {
                gx += e.shift * e.length;  // boundary with the own copy translates with the seed
                continue;
            }
            const Vec2 zj{dia.seeds[j].x + period * e.shift, dia.seeds[j].y};
            const Vec2 d = zj - dia.seeds[i];
            const double inv = e.length / d.norm();
            trip.emplace_back(i, 2 * j, -inv * (e.midpoint.x - zj.x));
            trip.emplace_back(i, 2 * j + 1, -inv * (e.midpoint.y - zj.y));
            gx += inv * (e.midpoint.x - dia.seeds[i].x);
            gy += inv * (e.midpoint.y - dia.seeds[i].y);
        }
        trip.emplace_back(i, 2 * i, gx);
        trip.emplace_back(i, 2 * i + 1, gy);
    }
    Eigen::SparseMatrix<double> m(n, 2 * n);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

} // namespace sgeady
